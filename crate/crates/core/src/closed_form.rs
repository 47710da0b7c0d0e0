//! Closed-form Kepler and Manev flows in `τ` for the quasi state
//! `(q, p, u, w)`, Cartesian recovery and the time-of-flight map `t(τ)`.

use std::f64::consts::{PI, TAU};

use crate::dynamics::FrequencyPair;
use crate::projective::{forward, perifocal_frame, CartesianState, QuasiState, TransformParams, CIRCULAR_TOL, PARABOLIC_TOL};
use crate::so3::{hodge_dual, Vec3};
use crate::{Error, Result};

/// Kepler initial data. With `simplified` set, `‖q‖ = 1` and `q·p = 0` are
/// used to rewrite `ℓ̂⋆q = −p/ℓ`, `ℓ̂⋆p = ℓq` and `ℓ ≃ ‖p‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerFlowInput {
    pub x0: QuasiState,
    pub k1: f64,
    pub simplified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManevFlowInput {
    pub x0: QuasiState,
    pub k1: f64,
    pub k2: f64,
}

/// Cartesian recovery mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recovery {
    /// The full projective map.
    Full,
    /// `r = q/u`, `v = u p − w q`, valid on `‖q‖ = 1`, `q·p = 0`.
    #[default]
    Simplified,
}

fn rotate(x0: &QuasiState, tau: f64) -> Result<(Vec3, Vec3, f64)> {
    let l = x0.q.cross(&x0.p);
    let lm = l.norm();
    if !(lm > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let ls = hodge_dual(&(l / lm));
    let (s, c) = tau.sin_cos();
    Ok((x0.q * c - ls * x0.q * s, x0.p * c - ls * x0.p * s, lm))
}

/// Forced oscillator `u'' + ω²u = k1` advanced by phase `ϖτ`.
fn radial(u0: f64, w0: f64, k1: f64, omega: f64, phase: f64) -> (f64, f64) {
    let (s, c) = phase.sin_cos();
    let center = k1 / (omega * omega);
    let du = u0 - center;
    (du * c + w0 / omega * s + center, -omega * du * s + w0 * c)
}

pub fn kepler_flow(inp: &KeplerFlowInput, tau: f64) -> Result<QuasiState> {
    let x0 = &inp.x0;
    if inp.simplified {
        let pm = x0.p.norm();
        if !(pm > 0.0) {
            return Err(Error::RectilinearOrbit);
        }
        let (s, c) = tau.sin_cos();
        let (u, w) = radial(x0.u, x0.w, inp.k1, pm, tau);
        return Ok(QuasiState::new(x0.q * c + x0.p * (s / pm), x0.p * c - x0.q * (pm * s), u, w));
    }
    let (q, p, l) = rotate(x0, tau)?;
    let (u, w) = radial(x0.u, x0.w, inp.k1, l, tau);
    Ok(QuasiState::new(q, p, u, w))
}

pub fn manev_flow(inp: &ManevFlowInput, tau: f64) -> Result<QuasiState> {
    let (q, p, l) = rotate(&inp.x0, tau)?;
    let (omega, varpi) = if inp.k2 == 0.0 {
        (l, 1.0)
    } else {
        let f = FrequencyPair::new(l, inp.k2)?;
        (f.omega, f.varpi)
    };
    let (u, w) = radial(inp.x0.u, inp.x0.w, inp.k1, omega, varpi * tau);
    Ok(QuasiState::new(q, p, u, w))
}

/// `p_u = w/u²`
pub fn pu_from_w(u: f64, w: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::DegenerateState("u must be positive"));
    }
    Ok(w / (u * u))
}

pub fn recover_cartesian(x: &QuasiState, mode: Recovery) -> Result<CartesianState> {
    match mode {
        Recovery::Full => forward(&x.to_projective()?, TransformParams::default()),
        Recovery::Simplified => {
            if !(x.u > 0.0) {
                return Err(Error::DegenerateState("u must be positive"));
            }
            Ok(CartesianState::new(x.q / x.u, x.p * x.u - x.q * x.w))
        }
    }
}

/// `∫₀^τ dθ / (1 + e cos θ)²`, with `τ` inside the principal branch.
fn anomaly_integral(e: f64, tau: f64) -> f64 {
    let x = (0.5 * tau).tan();
    let beta = (1.0 - e) / (1.0 + e);
    let z = beta * x * x;
    if z.abs() < 0.25 {
        // (1+X²)/(1+βX²)² expanded in βX² and integrated term by term
        let x2 = x * x;
        let mut sum = 0.0;
        let mut zk = 1.0;
        for k in 0..200 {
            let kf = k as f64;
            let term = (kf + 1.0) * zk * (1.0 / (2.0 * kf + 1.0) + x2 / (2.0 * kf + 3.0));
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            zk *= -z;
        }
        return 2.0 / ((1.0 + e) * (1.0 + e)) * x * sum;
    }
    let (s, c) = tau.sin_cos();
    let d = 1.0 + e * c;
    if e < 1.0 {
        let k = 1.0 - e * e;
        let (sh, ch) = (0.5 * tau).sin_cos();
        2.0 / k.powf(1.5) * (beta.sqrt() * sh).atan2(ch) - e * s / (k * d)
    } else {
        let k = e * e - 1.0;
        -2.0 / k.powf(1.5) * ((-beta).sqrt() * x).atanh() + e * s / (k * d)
    }
}

/// Time since periapsis passage at true anomaly `tau` on a conic with
/// eccentricity `ecc` and angular momentum `l`.
pub fn time_of_flight(ecc: f64, k1: f64, l: f64, tau: f64) -> Result<f64> {
    if !(ecc >= 0.0) || !(k1 > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidInput(format!("time of flight needs e >= 0, k1 > 0 (e={ecc}, k1={k1})")));
    }
    if !(l > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let scale = l * l * l / (k1 * k1);
    if ecc < CIRCULAR_TOL {
        return Ok(scale * tau);
    }
    if (ecc - 1.0).abs() < PARABOLIC_TOL {
        if !(tau.abs() < PI) {
            return Err(Error::AsymptoteReached);
        }
        let x = (0.5 * tau).tan();
        return Ok(scale * 0.5 * (x + x * x * x / 3.0));
    }
    if ecc > 1.0 {
        if !(tau.abs() < PI) || !(1.0 + ecc * tau.cos() > 1e-12) {
            return Err(Error::AsymptoteReached);
        }
        return Ok(scale * anomaly_integral(ecc, tau));
    }
    let turns = (tau / TAU).round();
    let wrapped = tau - turns * TAU;
    let period = TAU / (1.0 - ecc * ecc).powf(1.5);
    Ok(scale * (turns * period + anomaly_integral(ecc, wrapped)))
}

/// Time elapsed along the Kepler flow from `x0` over `tau`, for any starting anomaly.
pub fn elapsed_time(x0: &QuasiState, k1: f64, tau: f64) -> Result<f64> {
    let frame = perifocal_frame(&x0.to_projective()?, k1)?;
    let l = x0.q.cross(&x0.p).norm();
    let e = frame.eccentricity;
    let f0 = if e < CIRCULAR_TOL {
        0.0
    } else {
        let eh = frame.e_vec / e;
        let qh = x0.q.normalize();
        eh.cross(&qh).dot(&frame.l_hat).atan2(eh.dot(&qh))
    };
    Ok(time_of_flight(e, k1, l, f0 + tau)? - time_of_flight(e, k1, l, f0)?)
}

/// Inhomogeneous part `(σ_u, σ_w)` of the linear Kepler flow.
pub fn sigma_inhomogeneous(l: f64, k1: f64, tau: f64) -> Result<(f64, f64)> {
    if !(l > 0.0) {
        return Err(Error::RectilinearOrbit);
    }
    let (s, c) = tau.sin_cos();
    Ok((k1 / (l * l) * (1.0 - c), k1 / l * s))
}
