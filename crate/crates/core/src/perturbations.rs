//! Zonal `J₂` oblateness perturbation.

use crate::dynamics::{GeneralizedForce, Perturbation};
use crate::projective::ProjectiveState;
use crate::so3::Vec3;
use crate::{Error, Result};

/// Earth `J₂` coefficient.
pub const EARTH_J2: f64 = 1.08262668e-3;
/// Earth equatorial radius in km.
pub const EARTH_RADIUS_KM: f64 = 6378.137;
/// Earth gravitational parameter in km³/s².
pub const EARTH_MU_KM3_S2: f64 = 398600.4418;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct J2Model {
    /// `(3/2) J₂ k₁ R²`
    pub j2: f64,
    pub k1: f64,
    pub r_eq: f64,
}

impl J2Model {
    pub fn new(j2_coefficient: f64, k1: f64, r_eq: f64) -> Result<Self> {
        if !(r_eq > 0.0) || !j2_coefficient.is_finite() || !k1.is_finite() {
            return Err(Error::InvalidInput(format!("J2 model needs R > 0 and finite constants (R={r_eq})")));
        }
        Ok(Self { j2: 1.5 * j2_coefficient * k1 * r_eq * r_eq, k1, r_eq })
    }

    /// Earth in units with `R = 1`, `k₁ = 1`.
    pub fn earth_scaled() -> Self {
        Self::new(EARTH_J2, 1.0, 1.0).expect("valid constants")
    }
}

pub fn j2_potential_cartesian(r: &Vec3, m: &J2Model) -> Result<f64> {
    let rn = r.norm();
    if !(rn > 0.0) {
        return Err(Error::OriginSingularity);
    }
    let z = r.z / rn;
    Ok(m.j2 / (3.0 * rn * rn * rn) * (3.0 * z * z - 1.0))
}

/// `F = −∂V¹/∂r`
pub fn j2_force_cartesian(r: &Vec3, m: &J2Model) -> Result<Vec3> {
    let rn = r.norm();
    if !(rn > 0.0) {
        return Err(Error::OriginSingularity);
    }
    let rh = r / rn;
    let z = rh.z;
    Ok((rh * (5.0 * z * z - 1.0) - Vec3::z() * (2.0 * z)) * (m.j2 / (rn * rn * rn * rn)))
}

fn unit_q(x: &ProjectiveState) -> Result<(Vec3, f64)> {
    if !(x.u > 0.0) {
        return Err(Error::DegenerateState("u must be positive"));
    }
    let qn = x.q.norm();
    if !(qn > 0.0) {
        return Err(Error::DegenerateState("q must be nonzero"));
    }
    Ok((x.q / qn, qn))
}

/// Generalized forces of `J₂` for the default `(n, m) = (−1, −1)` map.
pub fn j2_generalized(x: &ProjectiveState, m: &J2Model) -> Result<GeneralizedForce> {
    let (qh, qn) = unit_q(x)?;
    let z = qh.z;
    let u = x.u;
    let f = (qh * (z * z) - Vec3::z() * z) * (2.0 / qn * m.j2 * u * u * u);
    let f_u = -m.j2 * u * u * (3.0 * z * z - 1.0);
    Ok(GeneralizedForce { f, f_u })
}

/// `V¹ = (1/3) j₂ u³ (3q̂₃² − 1)`
pub fn j2_hamiltonian_term(x: &ProjectiveState, m: &J2Model) -> Result<f64> {
    let (qh, _) = unit_q(x)?;
    Ok(m.j2 / 3.0 * x.u.powi(3) * (3.0 * qh.z * qh.z - 1.0))
}

impl Perturbation for J2Model {
    fn potential(&self, r: &Vec3, _t: f64) -> f64 {
        j2_potential_cartesian(r, self).unwrap_or(f64::NAN)
    }

    fn gradient(&self, r: &Vec3, _t: f64) -> Vec3 {
        j2_force_cartesian(r, self).map(|f| -f).unwrap_or(Vec3::repeat(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::generalized_forces;
    use crate::projective::{forward, TransformParams};
    use approx::assert_relative_eq;

    fn model() -> J2Model {
        J2Model::new(1e-3, 1.0, 1.0).unwrap()
    }

    #[test]
    fn potential_examples() {
        let m = model();
        assert_relative_eq!(j2_potential_cartesian(&Vec3::x(), &m).unwrap(), -m.j2 / 3.0);
        assert_relative_eq!(j2_potential_cartesian(&Vec3::z(), &m).unwrap(), 2.0 * m.j2 / 3.0);
        let r = Vec3::new(0.3, -1.1, 0.7);
        assert_relative_eq!(
            j2_potential_cartesian(&(r * 2.0), &m).unwrap(),
            j2_potential_cartesian(&r, &m).unwrap() / 8.0,
            max_relative = 1e-15
        );
        assert_eq!(j2_potential_cartesian(&Vec3::zeros(), &m), Err(Error::OriginSingularity));
    }

    #[test]
    fn force_examples() {
        let m = model();
        assert_relative_eq!(j2_force_cartesian(&Vec3::x(), &m).unwrap(), Vec3::new(-m.j2, 0.0, 0.0));
        assert_relative_eq!(j2_force_cartesian(&Vec3::z(), &m).unwrap(), Vec3::new(0.0, 0.0, 2.0 * m.j2));
    }

    #[test]
    fn generalized_examples() {
        let m = model();
        let eq = ProjectiveState::new(Vec3::x(), 1.5, Vec3::y(), 0.0);
        let g = j2_generalized(&eq, &m).unwrap();
        assert_eq!(g.f, Vec3::zeros());
        assert_relative_eq!(g.f_u, m.j2 * 2.25);
        let polar = ProjectiveState::new(Vec3::z(), 1.5, Vec3::y(), 0.0);
        let g = j2_generalized(&polar, &m).unwrap();
        assert!(g.f.norm() < 1e-18);
        assert_relative_eq!(g.f_u, -2.0 * m.j2 * 2.25);
        assert_relative_eq!(j2_hamiltonian_term(&eq, &m).unwrap(), -m.j2 * 1.5f64.powi(3) / 3.0);
        assert_relative_eq!(j2_hamiltonian_term(&polar, &m).unwrap(), 2.0 * m.j2 * 1.5f64.powi(3) / 3.0);
    }

    #[test]
    fn routes_agree_off_unit_sphere() {
        let m = model();
        let x = ProjectiveState::new(Vec3::new(0.4, -0.9, 0.7), 0.8, Vec3::new(0.2, 0.5, -0.3), 0.15);
        let p = TransformParams::default();
        let c = forward(&x, p).unwrap();
        let a = j2_generalized(&x, &m).unwrap();
        let b = generalized_forces(&j2_force_cartesian(&c.r, &m).unwrap(), &x, p);
        assert!((a.f - b.f).norm() < 1e-15);
        assert!((a.f_u - b.f_u).abs() < 1e-15);
        assert_relative_eq!(j2_hamiltonian_term(&x, &m).unwrap(), j2_potential_cartesian(&c.r, &m).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn presimplified_gradient_is_wrong() {
        // Setting ‖q‖ = 1 in V¹ before differentiating gives V¹ = (1/3)j₂u³(3q₃² − 1),
        // whose q-gradient 2j₂u³q₃e₃ is not the generalized force.
        let m = model();
        let x = ProjectiveState::new(Vec3::new(0.6, 0.0, 0.8), 1.2, Vec3::new(0.0, 1.0, 0.0), 0.0);
        let wrong = -Vec3::z() * (2.0 * m.j2 * x.u.powi(3) * x.q.z);
        let right = j2_generalized(&x, &m).unwrap().f;
        assert!((wrong - right).norm() > 1e-4);
        let c = forward(&x, TransformParams::default()).unwrap();
        let cart = generalized_forces(&j2_force_cartesian(&c.r, &m).unwrap(), &x, TransformParams::default());
        assert!((cart.f - right).norm() < 1e-15);
    }
}
