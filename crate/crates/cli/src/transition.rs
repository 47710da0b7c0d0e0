//! The `stm` command: `∂x(τ)/∂x(0)` in `(q, p, u, w)` for the scenario's initial state.

use std::path::{Path, PathBuf};

use regprop::dynamics::{quasi_field, Fictitious};
use regprop::projective::{inverse, QuasiState};
use regprop::stm::{kepler_tau_jacobian, phi_full, stm_variational, Jacobian, Ordering, Parameter, Stm};

use crate::config::{ModelKind, Scenario};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt, write_csv};

const LABELS: [&str; 8] = ["q1", "q2", "q3", "p1", "p2", "p3", "u", "w"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Variational,
}

pub fn compute(s: &Scenario, tau: f64, method: Method) -> CliResult<Stm> {
    if !tau.is_finite() {
        return Err(CliError::Config(format!("tau must be finite, got {tau}")));
    }
    if !s.params.is_default() {
        return Err(CliError::Config("the (q, p, u, w) STM needs transform = [-1, -1]".into()));
    }
    let x0 = inverse(&s.initial, s.params)?.to_quasi();
    match method {
        Method::ClosedForm => {
            if s.kind != ModelKind::Kepler {
                return Err(CliError::Config("the closed-form STM covers the Kepler model only; use --variational".into()));
            }
            Ok(phi_full(&x0, s.k1, tau)?)
        }
        Method::Variational if tau == 0.0 => Ok(Stm::identity(Ordering::Modified, Parameter::Tau)),
        Method::Variational => {
            let k1 = s.k1;
            let jac = if s.kind == ModelKind::Kepler {
                Jacobian::Analytic(Box::new(move |_, x: &[f64]| kepler_tau_jacobian(&QuasiState::from_slice(x), k1)))
            } else {
                Jacobian::FiniteDifference4
            };
            let field = quasi_field(s.model.clone(), Fictitious::Tau);
            let (_, stm) = stm_variational(&field, jac, &x0.to_array(), (0.0, tau), &s.integrator, Ordering::Modified, Parameter::Tau)?;
            Ok(stm)
        }
    }
}

/// Writes the matrix with a leading column naming each row.
pub fn write(stm: &Stm, s: &Scenario, dir: &Path) -> CliResult<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(&s.output.stm);
    let mut header = vec!["row".to_string()];
    header.extend(LABELS.iter().map(|l| l.to_string()));
    let rows = (0..8).map(|i| {
        let mut r = vec![LABELS[i].to_string()];
        r.extend((0..8).map(|j| fmt(stm.matrix[(i, j)])));
        r
    });
    write_csv(&path, &header, rows)?;
    Ok(path)
}
