//! The `propagate` command.

use std::path::Path;

use regprop::closed_form::{recover_cartesian, Recovery};
use regprop::dynamics::{cartesian_field, extended_field, quasi_field, time_field, ExtendedState, Field, Fictitious};
use regprop::projective::{constraint_report, forward, inverse, CartesianState, ConstraintReport, ProjectiveState, QuasiState, TransformParams};
use regprop::propagator::{propagate_with_monitor, DriftReport, Trajectory};
use serde::Serialize;

use crate::config::{Coordinates, Evolution, Scenario};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_json, write_numeric_csv};

const PERIAPSIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Layout {
    Cartesian,
    Time,
    Extended { keep_pt: bool },
    Quasi,
}

impl Layout {
    fn columns(self) -> &'static [&'static str] {
        match self {
            Layout::Cartesian => &["x", "y", "z", "vx", "vy", "vz"],
            Layout::Time => &["q1", "q2", "q3", "u", "p1", "p2", "p3", "pu"],
            Layout::Extended { keep_pt: false } => &["q1", "q2", "q3", "u", "p1", "p2", "p3", "pu", "t"],
            Layout::Extended { keep_pt: true } => &["q1", "q2", "q3", "u", "t", "p1", "p2", "p3", "pu", "pt"],
            Layout::Quasi => &["q1", "q2", "q3", "p1", "p2", "p3", "u", "w", "t"],
        }
    }

    fn row(self, param: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![param];
        match self {
            // [q, u, t, p, p_u, p_t] reported as [q, u, p, p_u, t]
            Layout::Extended { keep_pt: false } => {
                out.extend_from_slice(&x[..4]);
                out.extend_from_slice(&x[5..9]);
                out.push(x[4]);
            }
            _ => out.extend_from_slice(x),
        }
        out
    }

    /// Physical time and Cartesian state of a sample.
    fn cartesian(self, param: f64, x: &[f64], p: TransformParams) -> regprop::Result<(f64, CartesianState)> {
        Ok(match self {
            Layout::Cartesian => (param, CartesianState::from_slice(x)),
            Layout::Time => (param, forward(&ProjectiveState::from_slice(x), p)?),
            Layout::Extended { .. } => {
                let xe = ExtendedState::from_slice(x);
                (xe.t, forward(&xe.base, p)?)
            }
            Layout::Quasi => (x[8], recover_cartesian(&QuasiState::from_slice(&x[..8]), Recovery::Simplified)?),
        })
    }

    fn constraints(self, x: &[f64], p: TransformParams) -> Option<ConstraintReport> {
        match self {
            Layout::Cartesian => None,
            Layout::Time => Some(constraint_report(&ProjectiveState::from_slice(x), p)),
            Layout::Extended { .. } => Some(constraint_report(&ExtendedState::from_slice(x).base, p)),
            Layout::Quasi => {
                let q = QuasiState::from_slice(&x[..8]);
                let qn = q.q.norm();
                Some(ConstraintReport { q_norm: qn, lambda: q.q.dot(&q.p) / qn })
            }
        }
    }
}

/// Everything `propagate` writes, in internal units.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub parameter: Evolution,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// `[param, t, x, y, z, vx, vy, vz]` per accepted step.
    pub cartesian: Vec<[f64; 8]>,
    pub drift: DriftReport,
    /// Periapsis passages, same layout as `cartesian`.
    pub periapses: Vec<[f64; 8]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftJson {
    pub samples: usize,
    pub max_q_drift: Option<f64>,
    pub max_lambda_drift: Option<f64>,
}

impl From<DriftReport> for DriftJson {
    fn from(d: DriftReport) -> Self {
        let some = |v| (!d.is_empty()).then_some(v);
        Self { samples: d.samples, max_q_drift: some(d.max_q_drift), max_lambda_drift: some(d.max_lambda_drift) }
    }
}

fn setup(s: &Scenario) -> CliResult<(Field<'static>, Vec<f64>, Layout)> {
    let p = s.params;
    let model = s.model.clone();
    let fict = match s.parameter {
        Evolution::S => Fictitious::S,
        _ => Fictitious::Tau,
    };
    Ok(match (s.coordinates, s.parameter) {
        (Coordinates::Cartesian, Evolution::T) => (cartesian_field(model), s.initial.to_array().to_vec(), Layout::Cartesian),
        (Coordinates::Projective, Evolution::T) => (time_field(p, model), inverse(&s.initial, p)?.to_array().to_vec(), Layout::Time),
        (c @ (Coordinates::Projective | Coordinates::Extended), _) => {
            let xe = ExtendedState::on_energy_shell(inverse(&s.initial, p)?, 0.0, p, &model)?;
            let keep_pt = c == Coordinates::Extended;
            (extended_field(p, model, fict, s.energy_form), xe.to_array().to_vec(), Layout::Extended { keep_pt })
        }
        (Coordinates::ProjectiveQuasi, _) => {
            let mut x = inverse(&s.initial, p)?.to_quasi().to_array().to_vec();
            x.push(0.0);
            (quasi_field(model, fict), x, Layout::Quasi)
        }
        (c, e) => return Err(CliError::Config(format!("{} coordinates cannot evolve in {}", c.label(), e.label()))),
    })
}

fn cartesian_row(layout: Layout, param: f64, x: &[f64], p: TransformParams) -> regprop::Result<[f64; 8]> {
    let (t, c) = layout.cartesian(param, x, p)?;
    Ok([param, t, c.r.x, c.r.y, c.r.z, c.v.x, c.v.y, c.v.z])
}

fn radial_rate(row: &[f64; 8]) -> f64 {
    row[2] * row[5] + row[3] * row[6] + row[4] * row[7]
}

/// Periapsis passages located by bisection on `r·v` over the interpolated trajectory.
fn periapses(tr: &Trajectory, cart: &[[f64; 8]], layout: Layout, p: TransformParams) -> regprop::Result<Vec<[f64; 8]>> {
    let at = |param: f64| -> regprop::Result<[f64; 8]> {
        let x = tr.interpolate(param).expect("bracket lies inside the trajectory");
        cartesian_row(layout, param, &x, p)
    };
    let mut out = Vec::new();
    for (i, w) in cart.windows(2).enumerate() {
        if !(radial_rate(&w[0]) < 0.0 && radial_rate(&w[1]) >= 0.0) {
            continue;
        }
        let (mut a, mut b) = (tr.params[i], tr.params[i + 1]);
        let mut best = w[1];
        for _ in 0..200 {
            if (b - a).abs() <= PERIAPSIS_TOL * a.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (a + b);
            best = at(mid)?;
            if radial_rate(&best) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(best);
    }
    Ok(out)
}

pub fn propagate(s: &Scenario) -> CliResult<Propagation> {
    let (field, x0, layout) = setup(s)?;
    let p = s.params;
    let (tr, drift) = propagate_with_monitor(&field, &x0, s.span, &s.integrator, |x| layout.constraints(x, p))?;
    let rows: Vec<Vec<f64>> = tr.params.iter().zip(&tr.states).map(|(&e, x)| layout.row(e, x)).collect();
    let cartesian = tr
        .params
        .iter()
        .zip(&tr.states)
        .map(|(&e, x)| cartesian_row(layout, e, x, p))
        .collect::<regprop::Result<Vec<_>>>()?;
    let periapses = periapses(&tr, &cartesian, layout, p)?;
    let mut header = vec![s.parameter.label().to_string()];
    header.extend(layout.columns().iter().map(|c| c.to_string()));
    Ok(Propagation { parameter: s.parameter, header, rows, cartesian, drift, periapses })
}

impl Propagation {
    fn cartesian_table(&self, rows: &[[f64; 8]], s: &Scenario) -> (Vec<String>, Vec<Vec<f64>>) {
        let sc = s.scale;
        let convert = |r: &[f64; 8]| {
            let param = if self.parameter == Evolution::T { r[0] * sc.time } else { r[0] };
            let mut v = vec![param];
            if self.parameter != Evolution::T {
                v.push(r[1] * sc.time);
            }
            v.extend(r[2..5].iter().map(|x| x * sc.length));
            v.extend(r[5..8].iter().map(|x| x * sc.velocity()));
            v
        };
        let mut header = vec![self.parameter.label().to_string()];
        if self.parameter != Evolution::T {
            header.push("t".into());
        }
        header.extend(["x", "y", "z", "vx", "vy", "vz"].map(String::from));
        (header, rows.iter().map(convert).collect())
    }

    /// Writes the trajectory, Cartesian, periapsis and drift files into `dir`.
    /// Cartesian and periapsis tables are in the config's units.
    pub fn write(&self, s: &Scenario, dir: &Path) -> CliResult<()> {
        ensure_dir(dir)?;
        let o = &s.output;
        write_numeric_csv(&dir.join(&o.trajectory), &self.header, &self.rows)?;
        let (h, rows) = self.cartesian_table(&self.cartesian, s);
        write_numeric_csv(&dir.join(&o.cartesian), &h, &rows)?;
        let (h, rows) = self.cartesian_table(&self.periapses, s);
        write_numeric_csv(&dir.join(&o.periapsis), &h, &rows)?;
        write_json(&dir.join(&o.drift), &DriftJson::from(self.drift))
    }
}
