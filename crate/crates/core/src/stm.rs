//! State transition matrices of the Kepler flow in `τ`, conversions to the
//! canonical momentum `p_u`, variational propagation and symplectic checks.

use nalgebra::{DMatrix, Matrix2, RowVector3};

use crate::closed_form::{kepler_flow, KeplerFlowInput};
use crate::dynamics::Field;
use crate::projective::QuasiState;
use crate::propagator::{integrate, IntegratorConfig};
use crate::so3::{cross_matrix, hodge_dual, rodrigues_rotation, Mat3, Vec3};
use crate::{Error, Result};

/// Tolerance on `|‖q‖ − 1|` and `|q̂·p|` for the simplified matrices.
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// Coordinate ordering of an STM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// `(q, p, u, w)`
    Modified,
    /// `(q, p, u, p_u)`
    ModifiedCanonical,
    /// `(q, u, p, p_u)`
    Standard,
    /// `(q, u, t, p, p_u, p_t)`
    Extended,
    /// `(q, p)`
    Rotational6,
    /// `(u, w)`
    Radial2,
    /// `(r, v)`
    Cartesian,
}

impl Ordering {
    pub fn dim(&self) -> usize {
        match self {
            Ordering::Modified | Ordering::ModifiedCanonical | Ordering::Standard => 8,
            Ordering::Extended => 10,
            Ordering::Rotational6 | Ordering::Cartesian => 6,
            Ordering::Radial2 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    T,
    S,
    Tau,
}

/// Sensitivity matrix tagged with its ordering and evolution parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Stm {
    pub matrix: DMatrix<f64>,
    pub ordering: Ordering,
    pub parameter: Parameter,
}

pub type Stm8 = Stm;

impl Stm {
    pub fn new(matrix: DMatrix<f64>, ordering: Ordering, parameter: Parameter) -> Result<Self> {
        let d = ordering.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        Ok(Self { matrix, ordering, parameter })
    }

    pub fn identity(ordering: Ordering, parameter: Parameter) -> Self {
        let d = ordering.dim();
        Self { matrix: DMatrix::identity(d, d), ordering, parameter }
    }

    /// `self · earlier`: the map over `earlier`'s span followed by `self`'s.
    pub fn compose(&self, earlier: &Stm) -> Result<Stm> {
        if self.ordering != earlier.ordering || self.parameter != earlier.parameter {
            return Err(Error::OrderingMismatch);
        }
        Ok(Stm { matrix: &self.matrix * &earlier.matrix, ordering: self.ordering, parameter: self.parameter })
    }

    /// Reorders between `(q, p, u, p_u)` and `(q, u, p, p_u)`.
    pub fn reorder(&self, target: Ordering) -> Result<Stm> {
        let perm: [usize; 8] = match (self.ordering, target) {
            (a, b) if a == b => return Ok(self.clone()),
            (Ordering::ModifiedCanonical, Ordering::Standard) => [0, 1, 2, 6, 3, 4, 5, 7],
            (Ordering::Standard, Ordering::ModifiedCanonical) => [0, 1, 2, 4, 5, 6, 3, 7],
            _ => return Err(Error::OrderingMismatch),
        };
        let m = DMatrix::from_fn(8, 8, |i, j| self.matrix[(perm[i], perm[j])]);
        Ok(Stm { matrix: m, ordering: target, parameter: self.parameter })
    }

    /// The `(q, p)` block of a modified-ordering matrix.
    pub fn rotational_block(&self) -> Result<Stm> {
        self.block(0, Ordering::Rotational6)
    }

    /// The `(u, w)` block of a modified-ordering matrix.
    pub fn radial_block(&self) -> Result<Stm> {
        self.block(6, Ordering::Radial2)
    }

    fn block(&self, start: usize, ordering: Ordering) -> Result<Stm> {
        if self.ordering != Ordering::Modified {
            return Err(Error::OrderingMismatch);
        }
        let d = ordering.dim();
        Ok(Stm { matrix: self.matrix.view((start, start), (d, d)).into_owned(), ordering, parameter: self.parameter })
    }
}

/// Symplectic structure matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymplecticForm {
    /// `J₆ ⊕ J₂` for the `(q, p, u, ·)` orderings.
    Split62,
    /// `[[0, I], [−I, 0]]` of the given even dimension.
    Standard(usize),
}

impl SymplecticForm {
    pub fn matrix(&self) -> DMatrix<f64> {
        match *self {
            SymplecticForm::Standard(d) => standard_j(d),
            SymplecticForm::Split62 => {
                let mut j = DMatrix::zeros(8, 8);
                j.view_mut((0, 0), (6, 6)).copy_from(&standard_j(6));
                j.view_mut((6, 6), (2, 2)).copy_from(&standard_j(2));
                j
            }
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            SymplecticForm::Standard(d) => d,
            SymplecticForm::Split62 => 8,
        }
    }

    /// The natural form for an ordering.
    pub fn for_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Modified | Ordering::ModifiedCanonical => SymplecticForm::Split62,
            other => SymplecticForm::Standard(other.dim()),
        }
    }
}

fn standard_j(d: usize) -> DMatrix<f64> {
    let h = d / 2;
    DMatrix::from_fn(d, d, |i, j| {
        if j == i + h {
            1.0
        } else if i == j + h {
            -1.0
        } else {
            0.0
        }
    })
}

/// `‖SᵀJS − J‖∞` (maximum absolute row sum).
pub fn symplectic_residual(s: &DMatrix<f64>, form: SymplecticForm) -> Result<f64> {
    let d = form.dim();
    if s.nrows() != d || s.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: s.nrows() });
    }
    let j = form.matrix();
    let r = s.transpose() * &j * s - j;
    Ok(r.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max))
}

/// `Λ₂ₙ = [[0, I], [−ℓ² I, 0]]`.
pub fn lambda_matrix(n: usize, l: f64) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            1.0
        } else if i == j + n {
            -l * l
        } else {
            0.0
        }
    })
}

/// `e^{Λ₂ₙ τ/ℓ}` in block form.
pub fn lambda_exp(n: usize, l: f64, tau: f64) -> DMatrix<f64> {
    let (s, c) = tau.sin_cos();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) if i == j => c,
        (true, false) if j == i + n => s / l,
        (false, true) if i == j + n => -l * s,
        (false, false) if i == j => c,
        _ => 0.0,
    })
}

/// Generator `M = diag(−ℓ⋆, −ℓ⋆, Λ₂)` with `Σ_τ = e^{Mτ/ℓ}`.
pub fn m_matrix(l_vec: &Vec3) -> DMatrix<f64> {
    let l = l_vec.norm();
    let ls = hodge_dual(l_vec);
    let mut m = DMatrix::zeros(8, 8);
    m.view_mut((0, 0), (3, 3)).copy_from(&(-ls));
    m.view_mut((3, 3), (3, 3)).copy_from(&(-ls));
    m.view_mut((6, 6), (2, 2)).copy_from(&lambda_matrix(1, l));
    m
}

/// Homogeneous part `Σ_τ` of the linear Kepler flow, modified ordering.
pub fn sigma_matrix(l_vec: &Vec3, tau: f64) -> Result<Stm> {
    let l = l_vec.norm();
    if !(l > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let r = rodrigues_rotation(l_vec, tau)?;
    let mut m = DMatrix::zeros(8, 8);
    m.view_mut((0, 0), (3, 3)).copy_from(&r);
    m.view_mut((3, 3), (3, 3)).copy_from(&r);
    m.view_mut((6, 6), (2, 2)).copy_from(&lambda_exp(1, l, tau));
    Ok(Stm { matrix: m, ordering: Ordering::Modified, parameter: Parameter::Tau })
}

/// `(q_τ, p_τ)` through `e^{Aτ/ℓ}` with
/// `A = [[−(q·p) I, q² I], [−p² I, (q·p) I]]`.
pub fn rotate_via_a_matrix(q: &Vec3, p: &Vec3, tau: f64) -> Result<(Vec3, Vec3)> {
    let l = q.cross(p).norm();
    if !(l > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let (s, c) = tau.sin_cos();
    let qp = q.dot(p);
    let a11 = c - qp / l * s;
    let a12 = q.norm_squared() / l * s;
    let a21 = -p.norm_squared() / l * s;
    let a22 = c + qp / l * s;
    Ok((q * a11 + p * a12, q * a21 + p * a22))
}

fn assemble(blocks: [[Mat3; 2]; 2], ul: [RowVector3<f64>; 4], radial: Matrix2<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(8, 8);
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, b) in row.iter().enumerate() {
            m.view_mut((3 * bi, 3 * bj), (3, 3)).copy_from(b);
        }
    }
    // rows u, w against columns q, p
    m.view_mut((6, 0), (1, 3)).copy_from(&ul[0]);
    m.view_mut((6, 3), (1, 3)).copy_from(&ul[1]);
    m.view_mut((7, 0), (1, 3)).copy_from(&ul[2]);
    m.view_mut((7, 3), (1, 3)).copy_from(&ul[3]);
    m.view_mut((6, 6), (2, 2)).copy_from(&radial);
    m
}

fn radial_block(l: f64, tau: f64) -> Matrix2<f64> {
    let (s, c) = tau.sin_cos();
    Matrix2::new(c, s / l, -l * s, c)
}

/// `∂(u_τ, w_τ)/∂ℓ` of the Kepler flow.
fn radial_l_sensitivity(u0: f64, w0: f64, k1: f64, l: f64, tau: f64) -> (f64, f64) {
    let (s, c) = tau.sin_cos();
    let l2 = l * l;
    let du = -(2.0 * k1 / l2 * (1.0 - c) + w0 * s / l) / l;
    let dw = -(u0 + k1 / l2) * s;
    (du, dw)
}

/// Jacobian `∂x_τ/∂x₀` of the closed-form Kepler flow, valid off the constraint slice.
pub fn phi_full(x0: &QuasiState, k1: f64, tau: f64) -> Result<Stm> {
    let lv = x0.q.cross(&x0.p);
    let l = lv.norm();
    if !(l > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let nh = lv / l;
    let (s, c) = tau.sin_cos();
    let nproj = (Mat3::identity() - nh * nh.transpose()) / l;
    let (qx, px, nx) = (cross_matrix(&x0.q), cross_matrix(&x0.p), cross_matrix(&nh));
    let i3 = Mat3::identity();
    let qq = i3 * c + (nx + qx * nproj * px) * s;
    let qp = -(qx * nproj * qx) * s;
    let pq = px * nproj * px * s;
    let pp = i3 * c + (nx - px * nproj * qx) * s;
    // ∂ℓ/∂q = −n̂ᵀ[p]ₓ, ∂ℓ/∂p = n̂ᵀ[q]ₓ
    let dl_dq = -(nh.transpose() * px);
    let dl_dp = nh.transpose() * qx;
    let (du, dw) = radial_l_sensitivity(x0.u, x0.w, k1, l, tau);
    let m = assemble(
        [[qq, qp], [pq, pp]],
        [dl_dq * du, dl_dp * du, dl_dq * dw, dl_dp * dw],
        radial_block(l, tau),
    );
    Ok(Stm { matrix: m, ordering: Ordering::Modified, parameter: Parameter::Tau })
}

fn check_constraint(x0: &QuasiState) -> Result<()> {
    let qn = x0.q.norm();
    let lambda = if qn > 0.0 { x0.q.dot(&x0.p) / qn } else { f64::NAN };
    if !((qn - 1.0).abs() <= CONSTRAINT_TOL && lambda.abs() <= CONSTRAINT_TOL) {
        return Err(Error::ConstraintViolated { q_drift: qn - 1.0, lambda });
    }
    Ok(())
}

/// [`phi_full`] rewritten with `‖q‖ = 1`, `q·p = 0` and `ℓ = ‖p‖`.
pub fn phi_simplified(x0: &QuasiState, k1: f64, tau: f64) -> Result<Stm> {
    check_constraint(x0)?;
    let l = x0.p.norm();
    if !(l > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let nh = x0.q.cross(&x0.p) / l;
    let ls = hodge_dual(&nh);
    let (s, c) = tau.sin_cos();
    let i3 = Mat3::identity();
    let nn = nh * nh.transpose();
    let ph = (x0.p / l).transpose();
    let qt = x0.q.transpose();
    let (du, dw) = radial_l_sensitivity(x0.u, x0.w, k1, l, tau);
    let m = assemble(
        [[i3 * c - ls * s, nn * (s / l)], [-nn * (l * s), i3 * c - ls * s]],
        [qt * (du * l), ph * du, qt * (dw * l), ph * dw],
        radial_block(l, tau),
    );
    Ok(Stm { matrix: m, ordering: Ordering::Modified, parameter: Parameter::Tau })
}

/// Jacobian of the simplified flow in which `ℓ` is replaced by `‖p‖` before differentiating.
pub fn theta_matrix(x0: &QuasiState, k1: f64, tau: f64) -> Result<Stm> {
    check_constraint(x0)?;
    let pm = x0.p.norm();
    if !(pm > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let (s, c) = tau.sin_cos();
    let i3 = Mat3::identity();
    let ph = x0.p / pm;
    let (du, dw) = radial_l_sensitivity(x0.u, x0.w, k1, pm, tau);
    let z = RowVector3::zeros();
    let m = assemble(
        [
            [i3 * c, (i3 - ph * ph.transpose()) * (s / pm)],
            [-i3 * (pm * s), i3 * c - x0.q * ph.transpose() * s],
        ],
        [z, ph.transpose() * du, z, ph.transpose() * dw],
        radial_block(pm, tau),
    );
    Ok(Stm { matrix: m, ordering: Ordering::Modified, parameter: Parameter::Tau })
}

fn w_jacobians(x: &QuasiState) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !(x.u > 0.0) {
        return Err(Error::DegenerateState("u must be positive"));
    }
    let pu = x.w / (x.u * x.u);
    let mut dx_dz = DMatrix::identity(8, 8);
    dx_dz[(7, 6)] = 2.0 * x.u * pu;
    dx_dz[(7, 7)] = x.u * x.u;
    let mut dz_dx = DMatrix::identity(8, 8);
    dz_dx[(7, 6)] = -2.0 * pu / x.u;
    dz_dx[(7, 7)] = 1.0 / (x.u * x.u);
    Ok((dx_dz, dz_dx))
}

/// `Ψ = ∂z_τ/∂x_τ · Φ · ∂x₀/∂z₀` with `z = (q, p, u, p_u)`.
pub fn psi_canonical(phi: &Stm, x0: &QuasiState, x_tau: &QuasiState) -> Result<Stm> {
    if phi.ordering != Ordering::Modified {
        return Err(Error::OrderingMismatch);
    }
    let (dx_dz0, _) = w_jacobians(x0)?;
    let (_, dz_dx1) = w_jacobians(x_tau)?;
    Ok(Stm { matrix: dz_dx1 * &phi.matrix * dx_dz0, ordering: Ordering::ModifiedCanonical, parameter: phi.parameter })
}

/// Inverse of [`psi_canonical`].
pub fn phi_from_psi(psi: &Stm, x0: &QuasiState, x_tau: &QuasiState) -> Result<Stm> {
    if psi.ordering != Ordering::ModifiedCanonical {
        return Err(Error::OrderingMismatch);
    }
    let (_, dz_dx0) = w_jacobians(x0)?;
    let (dx_dz1, _) = w_jacobians(x_tau)?;
    Ok(Stm { matrix: dx_dz1 * &psi.matrix * dz_dx0, ordering: Ordering::Modified, parameter: psi.parameter })
}

/// Analytic Jacobian of the unperturbed quasi field in `τ`, modified ordering.
pub fn kepler_tau_jacobian(x: &QuasiState, k1: f64) -> Result<DMatrix<f64>> {
    let lv = x.q.cross(&x.p);
    let l = lv.norm();
    if !(l > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let nh = lv / l;
    let nproj = (Mat3::identity() - nh * nh.transpose()) / l;
    let (qx, px, nx) = (cross_matrix(&x.q), cross_matrix(&x.p), cross_matrix(&nh));
    let dl_dq = -(nh.transpose() * px);
    let dl_dp = nh.transpose() * qx;
    let l2 = l * l;
    let du_dl = -x.w / l2;
    let dw_dl = -x.u - k1 / l2;
    Ok(assemble(
        [[nx + qx * nproj * px, -(qx * nproj * qx)], [px * nproj * px, nx - px * nproj * qx]],
        [dl_dq * du_dl, dl_dp * du_dl, dl_dq * dw_dl, dl_dp * dw_dl],
        Matrix2::new(0.0, 1.0 / l, -l, 0.0),
    ))
}

/// Central-difference Jacobian with steps `h·max(1, |x_i|)`.
pub fn finite_difference_jacobian<F>(f: F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let m = f(x)?.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let hj = h * x[j].abs().max(1.0);
        xp[j] = x[j] + hj;
        let fp = f(&xp)?;
        xp[j] = x[j] - hj;
        let fm = f(&xp)?;
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * hj);
        }
    }
    Ok(jac)
}

/// Fourth-order central differences, steps `h·max(1, |x_i|)`.
pub fn finite_difference_jacobian_4<F>(f: F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let m = f(x)?.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let hj = h * x[j].abs().max(1.0);
        let mut eval = |k: f64| -> Result<Vec<f64>> {
            xp[j] = x[j] + k * hj;
            let out = f(&xp);
            xp[j] = x[j];
            out
        };
        let (f2, f1, m1, m2) = (eval(2.0)?, eval(1.0)?, eval(-1.0)?, eval(-2.0)?);
        for i in 0..m {
            jac[(i, j)] = (8.0 * (f1[i] - m1[i]) - (f2[i] - m2[i])) / (12.0 * hj);
        }
    }
    Ok(jac)
}

/// `(ε, x) ↦ ∂X/∂x`
pub type JacobianFn<'a> = Box<dyn Fn(f64, &[f64]) -> Result<DMatrix<f64>> + 'a>;

/// Source of `∂X/∂x` for the variational equations.
pub enum Jacobian<'a> {
    Analytic(JacobianFn<'a>),
    /// Central differences of the field with relative step `1e−6`.
    FiniteDifference,
    /// Fourth-order central differences with relative step `1e−3`.
    FiniteDifference4,
}

/// Integrates `dΦ/dε = (∂X/∂x) Φ`, `Φ₀ = I`, alongside the state.
/// Returns the final state and the tagged matrix.
pub fn stm_variational(
    rhs: &Field<'_>,
    jacobian: Jacobian<'_>,
    x0: &[f64],
    span: (f64, f64),
    cfg: &IntegratorConfig,
    ordering: Ordering,
    parameter: Parameter,
) -> Result<(Vec<f64>, Stm)> {
    let d = x0.len();
    if d != ordering.dim() {
        return Err(Error::DimensionMismatch { expected: ordering.dim(), found: d });
    }
    let jac = |t: f64, x: &[f64]| -> Result<DMatrix<f64>> {
        let field = |y: &[f64]| {
            let mut out = vec![0.0; d];
            rhs(t, y, &mut out)?;
            Ok(out)
        };
        match &jacobian {
            Jacobian::Analytic(f) => f(t, x),
            Jacobian::FiniteDifference => finite_difference_jacobian(field, x, 1e-6),
            Jacobian::FiniteDifference4 => finite_difference_jacobian_4(field, x, 1e-3),
        }
    };
    let aug = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (x, phi) = y.split_at(d);
        rhs(t, x, &mut dy[..d])?;
        let a = jac(t, x)?;
        let phi = DMatrix::from_column_slice(d, d, phi);
        let dphi = a * phi;
        dy[d..].copy_from_slice(dphi.as_slice());
        Ok(())
    };
    let mut y0 = x0.to_vec();
    y0.extend_from_slice(DMatrix::<f64>::identity(d, d).as_slice());
    let tr = integrate(aug, &y0, span, cfg)?;
    let y = tr.last();
    let matrix = DMatrix::from_column_slice(d, d, &y[d..]);
    Ok((y[..d].to_vec(), Stm { matrix, ordering, parameter }))
}

/// Finite-difference Jacobian of the closed-form Kepler flow with respect to `x₀`.
pub fn kepler_flow_fd(x0: &QuasiState, k1: f64, tau: f64, simplified: bool, h: f64) -> Result<DMatrix<f64>> {
    finite_difference_jacobian(
        |y| {
            let inp = KeplerFlowInput { x0: QuasiState::from_slice(y), k1, simplified };
            Ok(kepler_flow(&inp, tau)?.to_array().to_vec())
        },
        &x0.to_array(),
        h,
    )
}
