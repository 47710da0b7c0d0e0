//! Adaptive Dormand-Prince 5(4) integration with a PI step-size controller,
//! trajectory recording and constraint-drift monitoring.

use crate::projective::ConstraintReport;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Zero selects an automatic initial step.
    pub initial_step: f64,
    /// Zero means unbounded.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-12, initial_step: 0.0, max_step: 0.0, max_steps: 1_000_000 }
    }
}

impl IntegratorConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { rel_tol: tol, abs_tol: tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if !(self.initial_step >= 0.0 && self.max_step >= 0.0) {
            return Err(Error::InvalidInput("step sizes must be non-negative".into()));
        }
        Ok(())
    }
}

/// Accepted steps of an integration, including the initial point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub params: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Field values at each sample, used for Hermite interpolation.
    pub derivatives: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least the initial point")
    }

    pub fn end(&self) -> f64 {
        *self.params.last().expect("trajectory has at least the initial point")
    }

    /// Cubic Hermite interpolation between recorded samples.
    pub fn interpolate(&self, at: f64) -> Option<Vec<f64>> {
        let (a, b) = (self.params[0], self.end());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if !(at >= lo && at <= hi) {
            return None;
        }
        let forward = b >= a;
        let idx = self.params.partition_point(|&p| if forward { p < at } else { p > at });
        if idx == 0 {
            return Some(self.states[0].clone());
        }
        let (i, j) = (idx - 1, idx);
        let h = self.params[j] - self.params[i];
        let th = (at - self.params[i]) / h;
        let (h00, h10) = ((1.0 + 2.0 * th) * (1.0 - th).powi(2), th * (1.0 - th).powi(2));
        let (h01, h11) = (th * th * (3.0 - 2.0 * th), th * th * (th - 1.0));
        let (y0, y1, f0, f1) = (&self.states[i], &self.states[j], &self.derivatives[i], &self.derivatives[j]);
        Some((0..y0.len()).map(|k| h00 * y0[k] + h10 * h * f0[k] + h01 * y1[k] + h11 * h * f1[k]).collect())
    }
}

/// Largest constraint violations seen over the accepted steps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DriftReport {
    pub samples: usize,
    pub max_q_drift: f64,
    pub max_lambda_drift: f64,
}

impl DriftReport {
    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }

    fn record(&mut self, c: &ConstraintReport) {
        self.samples += 1;
        self.max_q_drift = self.max_q_drift.max((c.q_norm - 1.0).abs());
        self.max_lambda_drift = self.max_lambda_drift.max(c.lambda.abs());
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;

/// Integrates `dx/dε = rhs(ε, x)` from `span.0` to `span.1`, landing exactly on `span.1`.
pub fn integrate<F>(rhs: F, x0: &[f64], span: (f64, f64), cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    run(rhs, x0, span, cfg, |_| {})
}

/// As [`integrate`], evaluating `monitor` on every accepted state.
pub fn propagate_with_monitor<F, M>(
    rhs: F,
    x0: &[f64],
    span: (f64, f64),
    cfg: &IntegratorConfig,
    monitor: M,
) -> Result<(Trajectory, DriftReport)>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
    M: Fn(&[f64]) -> Option<ConstraintReport>,
{
    let mut report = DriftReport::default();
    let traj = run(rhs, x0, span, cfg, |x| {
        if let Some(c) = monitor(x) {
            report.record(&c);
        }
    })?;
    Ok((traj, report))
}

fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

fn run<F, G>(rhs: F, x0: &[f64], span: (f64, f64), cfg: &IntegratorConfig, mut on_accept: G) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
    G: FnMut(&[f64]),
{
    cfg.validate()?;
    let (t0, t1) = span;
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidInput(format!("invalid span ({t0}, {t1})")));
    }
    if !all_finite(x0) {
        return Err(Error::NonFiniteState { at: t0 });
    }
    let dim = x0.len();
    let dir = (t1 - t0).signum();
    let length = (t1 - t0).abs();
    let max_step = if cfg.max_step > 0.0 { cfg.max_step.min(length) } else { length };

    let mut t = t0;
    let mut x = x0.to_vec();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; dim]);
    rhs(t, &x, &mut k[0])?;
    if !all_finite(&k[0]) {
        return Err(Error::NonFiniteState { at: t });
    }
    on_accept(&x);

    let mut traj = Trajectory { params: vec![t], states: vec![x.clone()], derivatives: vec![k[0].clone()] };
    let mut h = if cfg.initial_step > 0.0 {
        cfg.initial_step.min(max_step)
    } else {
        initial_step(&rhs, t, &x, &k[0], dir, cfg)?.min(max_step)
    };
    let mut err_prev: f64 = 1e-4;
    let mut y = vec![0.0; dim];
    let mut x_new = vec![0.0; dim];
    let mut steps = 0usize;
    let mut rejected_last = false;

    loop {
        let remaining = (t1 - t).abs();
        // absorb a roundoff-sized tail into this step
        let last = h >= remaining || remaining - h <= 64.0 * f64::EPSILON * t1.abs().max(1.0);
        if last {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { at: t, step: h });
        }
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::MaxStepsExceeded(cfg.max_steps));
        }
        let hs = h * dir;

        stage(&mut y, &x, hs, &k, &[A21]);
        rhs(t + C2 * hs, &y, &mut k[1])?;
        stage(&mut y, &x, hs, &k, &[A31, A32]);
        rhs(t + C3 * hs, &y, &mut k[2])?;
        stage(&mut y, &x, hs, &k, &[A41, A42, A43]);
        rhs(t + C4 * hs, &y, &mut k[3])?;
        stage(&mut y, &x, hs, &k, &[A51, A52, A53, A54]);
        rhs(t + C5 * hs, &y, &mut k[4])?;
        stage(&mut y, &x, hs, &k, &[A61, A62, A63, A64, A65]);
        rhs(t + hs, &y, &mut k[5])?;
        stage(&mut x_new, &x, hs, &k, &[B1, 0.0, B3, B4, B5, B6]);
        let t_new = if last { t1 } else { t + hs };
        rhs(t_new, &x_new, &mut k[6])?;

        let mut acc = 0.0;
        for i in 0..dim {
            let e = hs
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = cfg.abs_tol + cfg.rel_tol * x[i].abs().max(x_new[i].abs());
            acc += (e / sc).powi(2);
        }
        let err = (acc / dim as f64).sqrt();

        if !err.is_finite() || !all_finite(&x_new) || !all_finite(&k[6]) {
            h *= MIN_FACTOR;
            rejected_last = true;
            if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::NonFiniteState { at: t });
            }
            continue;
        }

        if err <= 1.0 {
            let mut factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)
            };
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if rejected_last {
                factor = factor.min(1.0);
            }
            err_prev = err.max(1e-4);
            t = t_new;
            std::mem::swap(&mut x, &mut x_new);
            k.swap(0, 6);
            on_accept(&x);
            traj.params.push(t);
            traj.states.push(x.clone());
            traj.derivatives.push(k[0].clone());
            if last {
                return Ok(traj);
            }
            h = (h * factor).min(max_step);
            rejected_last = false;
        } else {
            let factor = (SAFETY * err.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0);
            h *= factor;
            rejected_last = true;
        }
    }
}

fn stage(out: &mut [f64], x: &[f64], h: f64, k: &[Vec<f64>; 7], a: &[f64]) {
    for i in 0..x.len() {
        let mut s = 0.0;
        for (j, aj) in a.iter().enumerate() {
            s += aj * k[j][i];
        }
        out[i] = x[i] + h * s;
    }
}

fn initial_step<F>(rhs: &F, t: f64, x: &[f64], f0: &[f64], dir: f64, cfg: &IntegratorConfig) -> Result<f64>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = x.len();
    let sc: Vec<f64> = x.iter().map(|v| cfg.abs_tol + cfg.rel_tol * v.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / dim as f64).sqrt();
    let d0 = rms(x);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let x1: Vec<f64> = x.iter().zip(f0).map(|(a, b)| a + dir * h0 * b).collect();
    let mut f1 = vec![0.0; dim];
    rhs(t + dir * h0, &x1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1))
}
