//! Hamiltonians and vector fields for central-force motion with optional
//! perturbations, in physical time `t`, fictitious time `s` (`dt = r² ds`)
//! and true-anomaly-like `τ` (`dτ = ℓ ds`).

use std::fmt;
use std::sync::Arc;

use crate::projective::{forward, CartesianState, ProjectiveState, QuasiState, TransformParams};
use crate::so3::{angular_momentum, Vec3};
use crate::{Error, Result};

/// Conservative perturbing potential `V¹(r, t)` with analytic derivatives.
pub trait Perturbation: Send + Sync {
    fn potential(&self, r: &Vec3, t: f64) -> f64;
    /// `∂V¹/∂r`
    fn gradient(&self, r: &Vec3, t: f64) -> Vec3;
    /// `∂V¹/∂t`
    fn time_derivative(&self, _r: &Vec3, _t: f64) -> f64 {
        0.0
    }
}

/// Non-conservative perturbing acceleration `a(r, v, t)`.
pub trait NonConservative: Send + Sync {
    fn acceleration(&self, r: &Vec3, v: &Vec3, t: f64) -> Vec3;
}

/// `V = −k1/r − k2/(2r²) + V¹` plus an optional non-conservative acceleration.
#[derive(Clone, Default)]
pub struct PotentialModel {
    pub k1: f64,
    pub k2: f64,
    pub perturbation: Option<Arc<dyn Perturbation>>,
    pub nonconservative: Option<Arc<dyn NonConservative>>,
}

impl fmt::Debug for PotentialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialModel")
            .field("k1", &self.k1)
            .field("k2", &self.k2)
            .field("perturbation", &self.perturbation.is_some())
            .field("nonconservative", &self.nonconservative.is_some())
            .finish()
    }
}

impl PotentialModel {
    pub fn kepler(k1: f64) -> Self {
        Self { k1, ..Self::default() }
    }

    pub fn manev(k1: f64, k2: f64) -> Self {
        Self { k1, k2, ..Self::default() }
    }

    pub fn with_perturbation(mut self, v1: Arc<dyn Perturbation>) -> Self {
        self.perturbation = Some(v1);
        self
    }

    pub fn with_nonconservative(mut self, a: Arc<dyn NonConservative>) -> Self {
        self.nonconservative = Some(a);
        self
    }

    pub fn is_central(&self) -> bool {
        self.perturbation.is_none() && self.nonconservative.is_none()
    }

    fn central_potential(&self, r: f64) -> f64 {
        -self.k1 / r - 0.5 * self.k2 / (r * r)
    }

    /// `dV⁰/dr`
    fn central_slope(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.k1 / r2 + self.k2 / (r2 * r)
    }

    fn perturbing_potential(&self, r: &Vec3, t: f64) -> f64 {
        self.perturbation.as_ref().map_or(0.0, |v| v.potential(r, t))
    }

    fn perturbing_dvdt(&self, r: &Vec3, t: f64) -> f64 {
        self.perturbation.as_ref().map_or(0.0, |v| v.time_derivative(r, t))
    }

    /// Conservative and non-conservative parts of the perturbing force.
    fn perturbing_forces(&self, c: &CartesianState, t: f64) -> (Vec3, Vec3) {
        let conservative = self.perturbation.as_ref().map_or(Vec3::zeros(), |v| -v.gradient(&c.r, t));
        let dissipative = self.nonconservative.as_ref().map_or(Vec3::zeros(), |a| a.acceleration(&c.r, &c.v, t));
        (conservative, dissipative)
    }
}

/// `ω = √(ℓ² − k2)` and `ϖ = ω/ℓ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPair {
    pub omega: f64,
    pub varpi: f64,
}

impl FrequencyPair {
    pub fn new(l: f64, k2: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::RectilinearOrbit);
        }
        let w2 = l * l - k2;
        if !(w2 > 0.0) {
            return Err(Error::ImaginaryFrequency(w2));
        }
        let omega = w2.sqrt();
        Ok(Self { omega, varpi: omega / l })
    }
}

/// Forces conjugate to `q` and `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedForce {
    pub f: Vec3,
    pub f_u: f64,
}

impl GeneralizedForce {
    pub fn zero() -> Self {
        Self { f: Vec3::zeros(), f_u: 0.0 }
    }
}

impl std::ops::Add for GeneralizedForce {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { f: self.f + o.f, f_u: self.f_u + o.f_u }
    }
}

/// Projective state extended with time and its conjugate momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedState {
    pub base: ProjectiveState,
    pub t: f64,
    pub pt: f64,
}

impl ExtendedState {
    pub fn new(base: ProjectiveState, t: f64, pt: f64) -> Self {
        Self { base, t, pt }
    }

    /// Sets `p_t = −H` so that the extended Hamiltonian vanishes.
    pub fn on_energy_shell(base: ProjectiveState, t: f64, params: TransformParams, model: &PotentialModel) -> Result<Self> {
        let h = hamiltonian_projective(&base, params, model, t)?;
        Ok(Self { base, t, pt: -h })
    }

    /// Canonical ordering `[q, u, t, p, p_u, p_t]`.
    pub fn to_array(&self) -> [f64; 10] {
        let b = &self.base;
        [b.q.x, b.q.y, b.q.z, b.u, self.t, b.p.x, b.p.y, b.p.z, b.pu, self.pt]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            base: ProjectiveState::new(Vec3::new(x[0], x[1], x[2]), x[3], Vec3::new(x[5], x[6], x[7]), x[8]),
            t: x[4],
            pt: x[9],
        }
    }
}

/// Which form of the fictitious-parameter equations to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyForm {
    /// `p_t = −H` substituted before differentiating (conformally scaled time field).
    #[default]
    Eliminated,
    /// Hamilton's equations of `H̃ = r²(H + p_t)` with `p_t` kept as a coordinate.
    Raw,
}

/// Evolution parameter of the linearized equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fictitious {
    S,
    Tau,
}

pub fn hamiltonian_cartesian(c: &CartesianState, model: &PotentialModel, t: f64) -> Result<f64> {
    let r = c.r.norm();
    if !(r > 0.0) {
        return Err(Error::OriginSingularity);
    }
    Ok(0.5 * c.v.norm_squared() + model.central_potential(r) + model.perturbing_potential(&c.r, t))
}

/// `H = (ℓ² + u² p_u²/n²) / (2 u^{2n} |q|^{2m+2}) + V(r)`
pub fn hamiltonian_projective(x: &ProjectiveState, params: TransformParams, model: &PotentialModel, t: f64) -> Result<f64> {
    let qn = positive_q(x)?;
    let (n, m) = (params.n(), params.m());
    let l2 = l_squared(&x.q, &x.p);
    let g = metric(x.u, qn, params);
    let kinetic = 0.5 * (l2 + x.u * x.u * x.pu * x.pu / (n * n)) / g;
    let r = x.u.powf(n) * qn.powf(m + 1.0);
    let mut h = kinetic + model.central_potential(r);
    if model.perturbation.is_some() {
        let rv = x.q * (x.u.powf(n) * qn.powf(m));
        h += model.perturbing_potential(&rv, t);
    }
    Ok(h)
}

/// Maps a Cartesian force to the forces conjugate to `(q, u)`:
/// `f = u^n |q|^m (I + m q̂q̂) F`, `f_u = n u^{n−1} |q|^{m+1} q̂·F`.
pub fn generalized_forces(force: &Vec3, x: &ProjectiveState, params: TransformParams) -> GeneralizedForce {
    let qn = x.q.norm();
    let (n, m) = (params.n(), params.m());
    let qh = x.q / qn;
    let radial = qh.dot(force);
    let f = (force + qh * (m * radial)) * (x.u.powf(n) * qn.powf(m));
    let f_u = n * x.u.powf(n - 1.0) * qn.powf(m + 1.0) * radial;
    GeneralizedForce { f, f_u }
}

fn positive_q(x: &ProjectiveState) -> Result<f64> {
    let qn = x.q.norm();
    if !(x.u > 0.0) {
        return Err(Error::DegenerateState("u must be positive"));
    }
    if !(qn > 0.0) {
        return Err(Error::DegenerateState("q must be nonzero"));
    }
    Ok(qn)
}

fn l_squared(q: &Vec3, p: &Vec3) -> f64 {
    q.cross(p).norm_squared()
}

/// `u^{2n} |q|^{2m+2}`, which equals r².
fn metric(u: f64, qn: f64, params: TransformParams) -> f64 {
    u.powf(2.0 * params.n()) * qn.powf(2.0 * params.m() + 2.0)
}

/// Perturbing forces in projective form, split into conservative and non-conservative parts.
fn projective_forces(
    x: &ProjectiveState,
    params: TransformParams,
    model: &PotentialModel,
    t: f64,
) -> Result<(GeneralizedForce, GeneralizedForce)> {
    if model.is_central() {
        return Ok((GeneralizedForce::zero(), GeneralizedForce::zero()));
    }
    let c = forward(x, params)?;
    let (fc, fnc) = model.perturbing_forces(&c, t);
    Ok((generalized_forces(&fc, x, params), generalized_forces(&fnc, x, params)))
}

struct TimeRates {
    d: ProjectiveState,
    nonconservative: GeneralizedForce,
    g: f64,
    qn: f64,
}

fn time_rates(x: &ProjectiveState, params: TransformParams, model: &PotentialModel, t: f64) -> Result<TimeRates> {
    let qn = positive_q(x)?;
    let (n, m) = (params.n(), params.m());
    let l = angular_momentum(&x.q, &x.p);
    let l2 = l.mag * l.mag;
    let u2 = x.u * x.u;
    let g = metric(x.u, qn, params);
    let kin = l2 + u2 * x.pu * x.pu / (n * n);

    let qdot = -(l.mat * x.q) / g;
    let mut pdot = -(l.mat * x.p) / g;
    if m != -1.0 {
        pdot += x.q * ((m + 1.0) * kin / (g * qn * qn));
    }
    let udot = u2 * x.pu / (n * n * g);
    let mut pudot = n / (x.u * g) * (l2 + (n - 1.0) / (n * n * n) * u2 * x.pu * x.pu);

    let r = x.u.powf(n) * qn.powf(m + 1.0);
    let slope = model.central_slope(r);
    if m != -1.0 {
        pdot -= x.q * (slope * (m + 1.0) * x.u.powf(n) * qn.powf(m - 1.0));
    }
    pudot -= slope * n * x.u.powf(n - 1.0) * qn.powf(m + 1.0);

    let (fc, fnc) = projective_forces(x, params, model, t)?;
    let f = fc + fnc;
    pdot += f.f;
    pudot += f.f_u;
    Ok(TimeRates { d: ProjectiveState::new(qdot, udot, pdot, pudot), nonconservative: fnc, g, qn })
}

/// `d/dt (q, u, p, p_u)`.
pub fn rhs_time(x: &ProjectiveState, params: TransformParams, model: &PotentialModel, t: f64) -> Result<ProjectiveState> {
    Ok(time_rates(x, params, model, t)?.d)
}

fn scale(x: &ProjectiveState, k: f64) -> ProjectiveState {
    ProjectiveState::new(x.q * k, x.u * k, x.p * k, x.pu * k)
}

/// `d/ds` of the extended state.
pub fn rhs_s(xe: &ExtendedState, params: TransformParams, model: &PotentialModel, form: EnergyForm) -> Result<ExtendedState> {
    let x = &xe.base;
    let tr = time_rates(x, params, model, xe.t)?;
    let g = tr.g;
    let mut d = scale(&tr.d, g);
    if form == EnergyForm::Raw {
        let e = hamiltonian_projective(x, params, model, xe.t)? + xe.pt;
        let (n, m) = (params.n(), params.m());
        if m != -1.0 {
            d.p -= x.q * (e * (2.0 * m + 2.0) * g / (tr.qn * tr.qn));
        }
        d.pu -= e * 2.0 * n * g / x.u;
    }
    let c = if model.perturbation.is_some() { Some(forward(x, params)?) } else { None };
    let dvdt = c.map_or(0.0, |c| model.perturbing_dvdt(&c.r, xe.t));
    let a = tr.nonconservative;
    let ptdot = -(g * dvdt + a.f.dot(&d.q) + a.f_u * d.u);
    Ok(ExtendedState { base: d, t: g, pt: ptdot })
}

/// `d/dτ` of the extended state, with ℓ taken from the current `(q, p)`.
pub fn rhs_tau(xe: &ExtendedState, params: TransformParams, model: &PotentialModel, form: EnergyForm) -> Result<ExtendedState> {
    let l = angular_momentum(&xe.base.q, &xe.base.p);
    if !(l.mag > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let ds = rhs_s(xe, params, model, form)?;
    let k = 1.0 / l.mag;
    let mut d = ExtendedState { base: scale(&ds.base, k), t: ds.t * k, pt: ds.pt * k };
    if form == EnergyForm::Raw {
        let x = &xe.base;
        let e = hamiltonian_projective(x, params, model, xe.t)? + xe.pt;
        let ht = metric(x.u, x.q.norm(), params) * e;
        let c = ht * k * k * k;
        d.base.q += l.mat * x.q * c;
        d.base.p += l.mat * x.p * c;
    }
    Ok(d)
}

/// `d/ds` or `d/dτ` of the quasi state `(q, p, u, w)` for `n = m = −1`:
/// `q' = −ℓ⋆q`, `p' = −ℓ⋆p + f/u²`, `u' = w`, `w' = −ω²u + k1 + f_u`.
pub fn rhs_quasi(x: &QuasiState, model: &PotentialModel, t: f64, param: Fictitious) -> Result<QuasiState> {
    let l = angular_momentum(&x.q, &x.p);
    let mut dq = -(l.mat * x.q);
    let mut dp = -(l.mat * x.p);
    let mut dw = -(l.mag * l.mag - model.k2) * x.u + model.k1;
    if !model.is_central() {
        let xp = x.to_projective()?;
        let (fc, fnc) = projective_forces(&xp, TransformParams::default(), model, t)?;
        let f = fc + fnc;
        dp += f.f / (x.u * x.u);
        dw += f.f_u;
    }
    let mut du = x.w;
    if param == Fictitious::Tau {
        if !(l.mag > 0.0) {
            return Err(Error::RectilinearOrbit);
        }
        let k = 1.0 / l.mag;
        dq *= k;
        dp *= k;
        du *= k;
        dw *= k;
    }
    Ok(QuasiState::new(dq, dp, du, dw))
}

/// Rates of `ℓ`, `‖ℓ‖` and `‖p‖` induced by the generalized force `f` (for `m = −1`).
pub fn angular_momentum_rates(x: &ProjectiveState, f: &GeneralizedForce, params: TransformParams) -> Result<(Vec3, f64, f64)> {
    if params.m() != -1.0 {
        return Err(Error::InvalidInput("angular momentum rates require m = -1".into()));
    }
    let ldot = x.q.cross(&f.f);
    if f.f == Vec3::zeros() {
        return Ok((ldot, 0.0, 0.0));
    }
    let l = x.q.cross(&x.p);
    let lm = l.norm();
    let pm = x.p.norm();
    if !(lm > 0.0) || !(pm > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    Ok((ldot, l.dot(&ldot) / lm, x.p.dot(&f.f) / pm))
}

/// Residuals of the second-order forms `q'' + ℓ²q − (q²/u²) f = 0` and
/// `u'' + ω²u − k1 − f_u = 0` in the parameter `s`.
pub fn second_order_residual(
    q: &Vec3,
    q_ss: &Vec3,
    u: f64,
    u_ss: f64,
    l: f64,
    model: &PotentialModel,
    f: &GeneralizedForce,
) -> (Vec3, f64) {
    let l2 = l * l;
    let rq = q_ss + q * l2 - f.f * (q.norm_squared() / (u * u));
    let ru = u_ss + (l2 - model.k2) * u - model.k1 - f.f_u;
    (rq, ru)
}

/// Vector field signature consumed by the integrator.
pub type Field<'a> = Box<dyn Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync + 'a>;

/// `d/dt` of the standard-ordered state `[q, u, p, p_u]`.
pub fn time_field(params: TransformParams, model: PotentialModel) -> Field<'static> {
    Box::new(move |t, x, dx| {
        let d = rhs_time(&ProjectiveState::from_slice(x), params, &model, t)?;
        dx.copy_from_slice(&d.to_array());
        Ok(())
    })
}

/// Fictitious-parameter field of the extended state `[q, u, t, p, p_u, p_t]`.
pub fn extended_field(params: TransformParams, model: PotentialModel, param: Fictitious, form: EnergyForm) -> Field<'static> {
    Box::new(move |_, x, dx| {
        let xe = ExtendedState::from_slice(x);
        let d = match param {
            Fictitious::S => rhs_s(&xe, params, &model, form)?,
            Fictitious::Tau => rhs_tau(&xe, params, &model, form)?,
        };
        dx.copy_from_slice(&d.to_array());
        Ok(())
    })
}

/// Field of `[q, p, u, w]` for `n = m = −1`, optionally followed by `t`
/// when the state slice has nine entries.
pub fn quasi_field(model: PotentialModel, param: Fictitious) -> Field<'static> {
    Box::new(move |_, x, dx| {
        let xq = QuasiState::from_slice(&x[..8]);
        let t = x.get(8).copied().unwrap_or(0.0);
        let d = rhs_quasi(&xq, &model, t, param)?;
        dx[..8].copy_from_slice(&d.to_array());
        if x.len() > 8 {
            let dt = 1.0 / (xq.u * xq.u);
            dx[8] = match param {
                Fictitious::S => dt,
                Fictitious::Tau => dt / xq.q.cross(&xq.p).norm(),
            };
        }
        Ok(())
    })
}

/// `d/dt [r, v]` in inertial Cartesian coordinates.
pub fn cartesian_field(model: PotentialModel) -> Field<'static> {
    Box::new(move |t, x, dx| {
        let c = CartesianState::from_slice(x);
        let r = c.r.norm();
        if !(r > 0.0) {
            return Err(Error::OriginSingularity);
        }
        let (fc, fnc) = model.perturbing_forces(&c, t);
        let a = -c.r * (model.central_slope(r) / r) + fc + fnc;
        dx[..3].copy_from_slice(c.v.as_slice());
        dx[3..].copy_from_slice(a.as_slice());
        Ok(())
    })
}
