//! Classical orbit elements and their Cartesian counterparts.
//!
//! `a` is taken by magnitude. The semilatus rectum is `|a|·|1 − e²|`
//! except near `e = 1`, where `a` is read as the periapsis distance.
//! When `i < 1e−10` the node is folded into `ω` (`Ω = 0`), and when
//! `e < 1e−12` the argument of periapsis is folded into `f` (`ω = 0`).

use crate::projective::{CartesianState, CIRCULAR_TOL, PARABOLIC_TOL};
use crate::so3::{Mat3, Vec3};
use crate::{Error, Result};
use std::f64::consts::TAU;

pub const EQUATORIAL_TOL: f64 = 1e-10;

/// Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitElements {
    pub a: f64,
    pub e: f64,
    pub i: f64,
    pub omega_arg: f64,
    pub raan: f64,
    pub true_anomaly: f64,
}

impl OrbitElements {
    pub fn semilatus_rectum(&self) -> f64 {
        if (self.e - 1.0).abs() < PARABOLIC_TOL {
            2.0 * self.a.abs()
        } else {
            self.a.abs() * (1.0 - self.e * self.e).abs()
        }
    }
}

fn perifocal_to_inertial(raan: f64, i: f64, w: f64) -> Mat3 {
    let rz = |a: f64| {
        let (s, c) = a.sin_cos();
        Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    };
    let (s, c) = i.sin_cos();
    let rx = Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c);
    rz(raan) * rx * rz(w)
}

pub fn elements_to_cartesian(el: &OrbitElements, k1: f64) -> Result<CartesianState> {
    if !(el.e >= 0.0) || !(k1 > 0.0) || !(el.a.abs() > 0.0) {
        return Err(Error::InvalidInput(format!("need e >= 0, k1 > 0, a != 0 (a={}, e={})", el.a, el.e)));
    }
    let (s, c) = el.true_anomaly.sin_cos();
    let d = 1.0 + el.e * c;
    if !(d > 0.0) {
        return Err(Error::AsymptoteReached);
    }
    let p = el.semilatus_rectum();
    let r = p / d;
    let vs = (k1 / p).sqrt();
    let rot = perifocal_to_inertial(el.raan, el.i, el.omega_arg);
    let rp = Vec3::new(r * c, r * s, 0.0);
    let vp = Vec3::new(-vs * s, vs * (el.e + c), 0.0);
    Ok(CartesianState::new(rot * rp, rot * vp))
}

fn wrap(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

fn angle_between(a: &Vec3, b: &Vec3, normal: &Vec3) -> f64 {
    wrap(a.cross(b).dot(normal).atan2(a.dot(b)))
}

pub fn cartesian_to_elements(c: &CartesianState, k1: f64) -> Result<OrbitElements> {
    let rn = c.r.norm();
    if !(rn > 0.0) {
        return Err(Error::OriginSingularity);
    }
    let h = c.r.cross(&c.v);
    let hn = h.norm();
    if !(hn > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let hh = h / hn;
    let ev = c.v.cross(&h) / k1 - c.r / rn;
    let e = ev.norm();
    let p = hn * hn / k1;
    let a = if (e - 1.0).abs() < PARABOLIC_TOL { p / 2.0 } else { p / (1.0 - e * e).abs() };
    let i = hh.z.clamp(-1.0, 1.0).acos();
    let equatorial = i < EQUATORIAL_TOL || (std::f64::consts::PI - i) < EQUATORIAL_TOL;
    let node = if equatorial { Vec3::x() } else { Vec3::z().cross(&hh).normalize() };
    let raan = if equatorial { 0.0 } else { wrap(node.y.atan2(node.x)) };
    let (omega_arg, true_anomaly) = if e < CIRCULAR_TOL {
        (0.0, angle_between(&node, &c.r, &hh))
    } else {
        (angle_between(&node, &ev, &hh), angle_between(&ev, &c.r, &hh))
    };
    Ok(OrbitElements { a, e, i, omega_arg, raan, true_anomaly })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn canonical_circular() {
        let el = OrbitElements { a: 1.0, e: 0.0, i: 0.0, omega_arg: 0.0, raan: 0.0, true_anomaly: 0.0 };
        let c = elements_to_cartesian(&el, 1.0).unwrap();
        assert_relative_eq!(c.r, Vec3::x(), epsilon = 1e-15);
        assert_relative_eq!(c.v, Vec3::y(), epsilon = 1e-15);
    }

    #[test]
    fn periapsis_distance() {
        let el = OrbitElements { a: 1.0, e: 0.2, i: 0.3, omega_arg: 0.4, raan: 1.1, true_anomaly: 0.0 };
        let c = elements_to_cartesian(&el, 1.0).unwrap();
        assert_relative_eq!(c.r.norm(), 0.8, max_relative = 1e-15);
        let ang = c.r.cross(&c.v).norm();
        assert_relative_eq!(ang, el.semilatus_rectum().sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn round_trip() {
        for el in [
            OrbitElements { a: 1.35, e: 0.2, i: 0.35, omega_arg: 1.22, raan: 2.36, true_anomaly: 0.0 },
            OrbitElements { a: 2.0, e: 1.8, i: 2.0, omega_arg: 5.0, raan: 0.2, true_anomaly: 1.0 },
            OrbitElements { a: 0.7, e: 1.0, i: 1.0, omega_arg: 0.5, raan: 4.0, true_anomaly: -1.0 + TAU },
        ] {
            let c = elements_to_cartesian(&el, 1.3).unwrap();
            let back = cartesian_to_elements(&c, 1.3).unwrap();
            assert_relative_eq!(back.a, el.a, max_relative = 1e-10);
            assert!((back.e - el.e).abs() < 1e-10);
            for (x, y) in [(back.i, el.i), (back.omega_arg, el.omega_arg), (back.raan, el.raan), (back.true_anomaly, el.true_anomaly)] {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn degenerate_folding() {
        let el = OrbitElements { a: 1.0, e: 0.0, i: 0.0, omega_arg: 0.3, raan: 0.4, true_anomaly: 0.5 };
        let back = cartesian_to_elements(&elements_to_cartesian(&el, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!((back.raan, back.omega_arg), (0.0, 0.0));
        assert!((back.true_anomaly - 1.2).abs() < 1e-12);
    }

    #[test]
    fn beyond_asymptote() {
        let el = OrbitElements { a: 1.0, e: 2.0, i: 0.0, omega_arg: 0.0, raan: 0.0, true_anomaly: 2.5 };
        assert_eq!(elements_to_cartesian(&el, 1.0), Err(Error::AsymptoteReached));
    }
}
