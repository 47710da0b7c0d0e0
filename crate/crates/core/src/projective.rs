//! The projective transformation `Γ: (q, u, p, p_u) ↦ (r, v)` and its
//! restricted inverse, constraint values, and the LVLH / perifocal geometry
//! expressed in projective variables.

use crate::so3::{angular_momentum, hodge_dual, Vec3};
use crate::{Error, Result};

/// |e − 1| below this is treated as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-9;
/// Eccentricities below this are treated as circular.
pub const CIRCULAR_TOL: f64 = 1e-12;
/// Default pass/fail threshold for `|‖q‖ − 1|` and `|λ|` drift.
pub const DRIFT_TOL: f64 = 1e-9;

/// Exponents selecting `r = u^n |q|^m q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformParams {
    n: f64,
    m: f64,
}

impl TransformParams {
    pub fn new(n: f64, m: f64) -> Result<Self> {
        if n == 0.0 || !n.is_finite() || !m.is_finite() {
            return Err(Error::InvalidInput(format!("invalid exponents n={n}, m={m}")));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `n = m = −1`
    pub fn is_default(&self) -> bool {
        self.n == -1.0 && self.m == -1.0
    }
}

impl Default for TransformParams {
    fn default() -> Self {
        Self { n: -1.0, m: -1.0 }
    }
}

/// Redundant phase-space point `(q, u, p, p_u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectiveState {
    pub q: Vec3,
    pub u: f64,
    pub p: Vec3,
    pub pu: f64,
}

impl ProjectiveState {
    pub fn new(q: Vec3, u: f64, p: Vec3, pu: f64) -> Self {
        Self { q, u, p, pu }
    }

    /// Quasi-momentum `w = u² p_u`.
    pub fn w(&self) -> f64 {
        self.u * self.u * self.pu
    }

    pub fn to_quasi(&self) -> QuasiState {
        QuasiState { q: self.q, p: self.p, u: self.u, w: self.w() }
    }

    /// Standard ordering `[q, u, p, p_u]`.
    pub fn to_array(&self) -> [f64; 8] {
        [self.q.x, self.q.y, self.q.z, self.u, self.p.x, self.p.y, self.p.z, self.pu]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            q: Vec3::new(x[0], x[1], x[2]),
            u: x[3],
            p: Vec3::new(x[4], x[5], x[6]),
            pu: x[7],
        }
    }

    pub fn angular_momentum(&self) -> Vec3 {
        self.q.cross(&self.p)
    }
}

/// Projective state with the radial momentum replaced by `w = u² p_u`,
/// stored in the modified ordering `(q, p, u, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiState {
    pub q: Vec3,
    pub p: Vec3,
    pub u: f64,
    pub w: f64,
}

impl QuasiState {
    pub fn new(q: Vec3, p: Vec3, u: f64, w: f64) -> Self {
        Self { q, p, u, w }
    }

    pub fn to_projective(&self) -> Result<ProjectiveState> {
        Ok(ProjectiveState { q: self.q, u: self.u, p: self.p, pu: crate::closed_form::pu_from_w(self.u, self.w)? })
    }

    /// Modified ordering `[q, p, u, w]`.
    pub fn to_array(&self) -> [f64; 8] {
        [self.q.x, self.q.y, self.q.z, self.p.x, self.p.y, self.p.z, self.u, self.w]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            q: Vec3::new(x[0], x[1], x[2]),
            p: Vec3::new(x[3], x[4], x[5]),
            u: x[6],
            w: x[7],
        }
    }

    pub fn angular_momentum(&self) -> Vec3 {
        self.q.cross(&self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub r: Vec3,
    pub v: Vec3,
}

impl CartesianState {
    pub fn new(r: Vec3, v: Vec3) -> Self {
        Self { r, v }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.r.x, self.r.y, self.r.z, self.v.x, self.v.y, self.v.z]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self { r: Vec3::new(x[0], x[1], x[2]), v: Vec3::new(x[3], x[4], x[5]) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintReport {
    pub q_norm: f64,
    pub lambda: f64,
}

impl ConstraintReport {
    pub fn within(&self, tol: f64) -> bool {
        (self.q_norm - 1.0).abs() <= tol && self.lambda.abs() <= tol
    }
}

/// Eccentricity vector, Hamilton vector and orbit normal.
///
/// `e_vec = ℓ⋆ · h_vec`, so `‖e_vec‖ = ℓ ‖h_vec‖` and the two are orthogonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerifocalFrame {
    pub e_vec: Vec3,
    pub h_vec: Vec3,
    pub l_hat: Vec3,
    pub eccentricity: f64,
    pub semilatus_rectum: f64,
}

fn check_state(q: &Vec3, u: f64) -> Result<f64> {
    let qn = q.norm();
    if !(u > 0.0) {
        return Err(Error::DegenerateState("u must be positive"));
    }
    if !(qn > 0.0) {
        return Err(Error::DegenerateState("q must be nonzero"));
    }
    Ok(qn)
}

/// Position and velocity of a projective state (no constraint assumed).
pub fn forward(x: &ProjectiveState, params: TransformParams) -> Result<CartesianState> {
    let qn = check_state(&x.q, x.u)?;
    let (n, m) = (params.n, params.m);
    let scale = x.u.powf(n) * qn.powf(m);
    let qh = x.q / qn;
    let transverse = x.p - qh * qh.dot(&x.p);
    let v = (transverse + qh * (x.u * x.pu / (n * qn))) / scale;
    Ok(CartesianState { r: x.q * scale, v })
}

/// Inverse of [`forward`] on the slice `‖q‖ = 1`, `λ = 0`.
pub fn inverse(c: &CartesianState, params: TransformParams) -> Result<ProjectiveState> {
    let rn = c.r.norm();
    if !(rn > 0.0) {
        return Err(Error::OriginSingularity);
    }
    let (n, m) = (params.n, params.m);
    let rh = c.r / rn;
    let u = rn.powf(1.0 / n);
    let p = (c.v + rh * (m * rh.dot(&c.v))) * rn;
    let pu = n * rn.powf(-1.0 / n) * c.r.dot(&c.v);
    Ok(ProjectiveState { q: rh, u, p, pu })
}

/// `λ = (q·p − ((m+1)/n) u p_u) / ‖q‖`
pub fn lagrange_multiplier(x: &ProjectiveState, params: TransformParams) -> Result<f64> {
    let qn = x.q.norm();
    if !(qn > 0.0) {
        return Err(Error::DegenerateState("q must be nonzero"));
    }
    let (n, m) = (params.n, params.m);
    Ok((x.q.dot(&x.p) - (m + 1.0) / n * x.u * x.pu) / qn)
}

pub fn constraint_report(x: &ProjectiveState, params: TransformParams) -> ConstraintReport {
    let q_norm = x.q.norm();
    let lambda = if q_norm > 0.0 {
        let (n, m) = (params.n, params.m);
        (x.q.dot(&x.p) - (m + 1.0) / n * x.u * x.pu) / q_norm
    } else {
        f64::NAN
    };
    ConstraintReport { q_norm, lambda }
}

/// Radial, transverse and normal unit vectors `{q̂, −ℓ̂⋆q̂, ℓ̂}`.
pub fn lvlh_basis(q: &Vec3, p: &Vec3) -> Result<(Vec3, Vec3, Vec3)> {
    let l = angular_momentum(q, p);
    if !(l.mag > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let qh = q.normalize();
    let lh = l.vec / l.mag;
    let t_tau = -(hodge_dual(&lh) * qh);
    Ok((qh, t_tau, lh))
}

/// Perifocal vectors of the osculating Kepler orbit with parameter `k1`.
pub fn perifocal_frame(x: &ProjectiveState, k1: f64) -> Result<PerifocalFrame> {
    if !(k1 > 0.0) {
        return Err(Error::InvalidInput(format!("k1 must be positive, got {k1}")));
    }
    let l = angular_momentum(&x.q, &x.p);
    if !(l.mag > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let qh = x.q.normalize();
    let l2 = l.mag * l.mag;
    let w = x.w();
    let du = x.u - k1 / l2;
    let lq = l.mat * qh;
    let e_vec = (qh * (l2 * du) - lq * w) / k1;
    let h_vec = (-(lq * du) - qh * w) / k1;
    Ok(PerifocalFrame {
        e_vec,
        h_vec,
        l_hat: l.vec / l.mag,
        eccentricity: e_vec.norm(),
        semilatus_rectum: l2 / k1,
    })
}

/// Conic radius `P/(1 + e cos f)`.
pub fn conic_radius(p_slr: f64, ecc: f64, true_anomaly: f64) -> Result<f64> {
    let d = 1.0 + ecc * true_anomaly.cos();
    if !(d > 0.0) {
        return Err(Error::AsymptoteReached);
    }
    Ok(p_slr / d)
}
