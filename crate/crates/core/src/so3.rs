//! Three-dimensional vector algebra with the Hodge-dual sign convention
//! `u⋆_ij = ε_ijk u_k`, so that `u⋆ · w = w × u`.

use crate::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

const ANTISYMMETRY_TOL: f64 = 1e-12;
const AXIS_FLOOR: f64 = 1e-300;

/// Hodge dual of a vector. This is the negative of the usual cross-product matrix.
pub fn hodge_dual(u: &Vec3) -> Mat3 {
    Mat3::new(0.0, u.z, -u.y, -u.z, 0.0, u.x, u.y, -u.x, 0.0)
}

/// Recovers `u` from `u⋆`, rejecting matrices that are not antisymmetric.
pub fn hodge_inverse(a: &Mat3) -> Result<Vec3> {
    let scale = a.abs().row_sum().max().max(1.0);
    let residual = (a + a.transpose()).abs().row_sum().max();
    if !(residual <= ANTISYMMETRY_TOL * scale) {
        return Err(Error::NonAntisymmetric { residual });
    }
    Ok(Vec3::new(
        0.5 * (a[(1, 2)] - a[(2, 1)]),
        0.5 * (a[(2, 0)] - a[(0, 2)]),
        0.5 * (a[(0, 1)] - a[(1, 0)]),
    ))
}

/// `e^{-ℓ̂⋆ τ}`: right-handed rotation by `angle` about the direction of `axis`.
/// Only the direction of `axis` matters.
pub fn rodrigues_rotation(axis: &Vec3, angle: f64) -> Result<Mat3> {
    let big = axis.amax();
    let rho = if big > 0.0 { big * (axis / big).norm() } else { 0.0 };
    if !(rho >= AXIS_FLOOR) {
        return Err(Error::ZeroAxis);
    }
    let n = (axis / big).normalize();
    let (s, c) = angle.sin_cos();
    Ok(Mat3::identity() * c - hodge_dual(&n) * s + n * n.transpose() * (1.0 - c))
}

/// Angular momentum of the pair `(x, y)` in its three forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularMomentum {
    /// `x × y`
    pub vec: Vec3,
    /// `x ⊗ y − y ⊗ x`, equal to `hodge_dual(vec)`
    pub mat: Mat3,
    pub mag: f64,
}

pub fn angular_momentum(x: &Vec3, y: &Vec3) -> AngularMomentum {
    let vec = x.cross(y);
    AngularMomentum {
        vec,
        mat: x * y.transpose() - y * x.transpose(),
        mag: vec.norm(),
    }
}

/// Cross-product matrix `[a]ₓ` with `[a]ₓ b = a × b`.
pub(crate) fn cross_matrix(a: &Vec3) -> Mat3 {
    -hodge_dual(a)
}
