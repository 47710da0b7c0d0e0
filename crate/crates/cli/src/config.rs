//! Scenario files: a TOML document with `[scenario]`, `[model]`,
//! `[integrator]` and `[output]` tables.
//!
//! Angles are in degrees. With `units = "si"` lengths are metres, times
//! seconds and the gravitational parameter m³/s²; everything is rescaled at
//! load time so that the equatorial radius and `k₁` are both one. With
//! `units = "scaled"` values are used as given.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use regprop::dynamics::{EnergyForm, PotentialModel};
use regprop::elements::{elements_to_cartesian, OrbitElements};
use regprop::perturbations::{J2Model, EARTH_J2, EARTH_MU_KM3_S2, EARTH_RADIUS_KM};
use regprop::projective::{CartesianState, TransformParams};
use regprop::propagator::IntegratorConfig;
use regprop::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    Cartesian,
    Projective,
    ProjectiveQuasi,
    Extended,
}

impl Coordinates {
    pub fn label(self) -> &'static str {
        match self {
            Coordinates::Cartesian => "cartesian",
            Coordinates::Projective => "projective",
            Coordinates::ProjectiveQuasi => "projective_quasi",
            Coordinates::Extended => "extended",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evolution {
    T,
    S,
    Tau,
}

impl Evolution {
    pub fn label(self) -> &'static str {
        match self {
            Evolution::T => "t",
            Evolution::S => "s",
            Evolution::Tau => "tau",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    #[default]
    Eliminated,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub coordinates: Coordinates,
    pub parameter: Evolution,
    /// Range of the evolution parameter. For `t` in SI units this is seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<[f64; 2]>,
    /// Alternative to `span`: a number of periods of the initial osculating ellipse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbits: Option<f64>,
    #[serde(default)]
    pub energy_form: Form,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<ElementsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cartesian: Option<CartesianSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementsSection {
    pub a: f64,
    pub e: f64,
    #[serde(default)]
    pub i: f64,
    #[serde(default)]
    pub omega_arg: f64,
    #[serde(default)]
    pub raan: f64,
    #[serde(default)]
    pub true_anomaly: f64,
}

impl ElementsSection {
    pub fn to_radians(&self) -> OrbitElements {
        OrbitElements {
            a: self.a,
            e: self.e,
            i: self.i.to_radians(),
            omega_arg: self.omega_arg.to_radians(),
            raan: self.raan.to_radians(),
            true_anomaly: self.true_anomaly.to_radians(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartesianSection {
    pub r: [f64; 3],
    pub v: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Kepler,
    Manev,
    J2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Scaled,
    Si,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub kind: ModelKind,
    #[serde(default)]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravitational_parameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equatorial_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j2_coefficient: Option<f64>,
    /// `k₂` of the Manev term `−k₂/(2r²)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manev_coefficient: Option<f64>,
    /// Exponents `[n, m]` of the projective map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self { rel_tol: d.rel_tol, abs_tol: d.abs_tol, initial_step: d.initial_step, max_step: d.max_step, max_steps: d.max_steps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub trajectory: String,
    pub cartesian: String,
    pub drift: String,
    pub periapsis: String,
    pub stm: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            trajectory: "trajectory.csv".into(),
            cartesian: "cartesian.csv".into(),
            drift: "drift.json".into(),
            periapsis: "periapsis.csv".into(),
            stm: "stm.csv".into(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }
}

/// Conversion between config units and the internal scaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitScale {
    pub length: f64,
    pub time: f64,
}

impl UnitScale {
    pub const IDENTITY: Self = Self { length: 1.0, time: 1.0 };

    pub fn velocity(&self) -> f64 {
        self.length / self.time
    }
}

/// A validated scenario in internal units.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub coordinates: Coordinates,
    pub parameter: Evolution,
    pub energy_form: EnergyForm,
    pub span: (f64, f64),
    pub initial: CartesianState,
    pub kind: ModelKind,
    pub k1: f64,
    pub model: PotentialModel,
    pub params: TransformParams,
    pub integrator: IntegratorConfig,
    pub scale: UnitScale,
    pub output: OutputSection,
}

fn finite(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be finite")))
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

impl Scenario {
    pub fn from_config(cfg: &Config) -> CliResult<Self> {
        let m = &cfg.model;
        let (mu, radius) = match m.units {
            Units::Si => (
                m.gravitational_parameter.unwrap_or(EARTH_MU_KM3_S2 * 1e9),
                m.equatorial_radius.unwrap_or(EARTH_RADIUS_KM * 1e3),
            ),
            Units::Scaled => (m.gravitational_parameter.unwrap_or(1.0), m.equatorial_radius.unwrap_or(1.0)),
        };
        let mu = positive("gravitational_parameter", mu)?;
        let radius = positive("equatorial_radius", radius)?;
        let (scale, k1, r_eq) = match m.units {
            Units::Si => (UnitScale { length: radius, time: (radius.powi(3) / mu).sqrt() }, 1.0, 1.0),
            Units::Scaled => (UnitScale::IDENTITY, mu, radius),
        };

        let s = &cfg.scenario;
        let initial = match (&s.elements, &s.cartesian) {
            (Some(el), None) => {
                if !(el.e >= 0.0) {
                    return Err(CliError::Config(format!("eccentricity must be non-negative, got {}", el.e)));
                }
                if el.e < 1.0 && !(el.a > 0.0) {
                    return Err(CliError::Config(format!("elliptic orbits need a > 0, got {}", el.a)));
                }
                let mut rad = el.to_radians();
                rad.a = finite("a", rad.a)? / scale.length;
                elements_to_cartesian(&rad, k1).map_err(|e| CliError::Config(format!("initial elements: {e}")))?
            }
            (None, Some(c)) => {
                let r = Vec3::from(c.r) / scale.length;
                let v = Vec3::from(c.v) / scale.velocity();
                if !(r.iter().chain(v.iter()).all(|x| x.is_finite())) || r.norm() == 0.0 {
                    return Err(CliError::Config("cartesian initial state must be finite with r != 0".into()));
                }
                CartesianState::new(r, v)
            }
            _ => return Err(CliError::Config("give exactly one of [scenario.elements] or [scenario.cartesian]".into())),
        };

        let model = match m.kind {
            ModelKind::Kepler => PotentialModel::kepler(k1),
            ModelKind::Manev => {
                let k2 = finite("manev_coefficient", m.manev_coefficient.unwrap_or(0.0))?;
                PotentialModel::manev(k1, k2 / (scale.length * scale.velocity()).powi(2))
            }
            ModelKind::J2 => {
                let j2 = finite("j2_coefficient", m.j2_coefficient.unwrap_or(EARTH_J2))?;
                let pert = J2Model::new(j2, k1, r_eq).map_err(|e| CliError::Config(e.to_string()))?;
                PotentialModel::kepler(k1).with_perturbation(Arc::new(pert))
            }
        };

        let params = match m.transform {
            Some([n, mm]) => TransformParams::new(n, mm).map_err(|e| CliError::Config(e.to_string()))?,
            None => TransformParams::default(),
        };

        match (s.coordinates, s.parameter) {
            (Coordinates::Cartesian, Evolution::T) | (Coordinates::Projective, _) => {}
            (Coordinates::Cartesian, _) => return Err(CliError::Config("cartesian coordinates evolve in t only".into())),
            (Coordinates::ProjectiveQuasi | Coordinates::Extended, Evolution::T) => {
                return Err(CliError::Config(format!("{} coordinates evolve in s or tau", s.coordinates.label())))
            }
            _ => {}
        }
        if s.coordinates == Coordinates::ProjectiveQuasi && !params.is_default() {
            return Err(CliError::Config("projective_quasi coordinates require transform = [-1, -1]".into()));
        }

        let span = match (s.span, s.orbits) {
            (Some([a, b]), None) => {
                let (a, b) = (finite("span", a)?, finite("span", b)?);
                if a == b {
                    return Err(CliError::Config("span must have non-zero length".into()));
                }
                match s.parameter {
                    Evolution::T => (a / scale.time, b / scale.time),
                    _ => (a, b),
                }
            }
            (None, Some(n)) => {
                let n = positive("orbits", n)?;
                let c = &initial;
                let energy = 0.5 * c.v.norm_squared() - k1 / c.r.norm();
                if !(energy < 0.0) {
                    return Err(CliError::Config("orbits requires an elliptic initial state".into()));
                }
                let a = -k1 / (2.0 * energy);
                let l = c.r.cross(&c.v).norm();
                let per = match s.parameter {
                    Evolution::T => TAU * (a.powi(3) / k1).sqrt(),
                    Evolution::Tau => TAU,
                    Evolution::S => TAU / l,
                };
                (0.0, n * per)
            }
            _ => return Err(CliError::Config("give exactly one of scenario.span or scenario.orbits".into())),
        };

        let i = &cfg.integrator;
        let integrator = IntegratorConfig {
            rel_tol: positive("rel_tol", i.rel_tol)?,
            abs_tol: positive("abs_tol", i.abs_tol)?,
            initial_step: i.initial_step,
            max_step: i.max_step,
            max_steps: i.max_steps,
        };
        if !(i.initial_step >= 0.0 && i.max_step >= 0.0) {
            return Err(CliError::Config("step sizes must be non-negative".into()));
        }

        Ok(Self {
            name: s.name.clone().unwrap_or_else(|| "scenario".into()),
            coordinates: s.coordinates,
            parameter: s.parameter,
            energy_form: match s.energy_form {
                Form::Eliminated => EnergyForm::Eliminated,
                Form::Raw => EnergyForm::Raw,
            },
            span,
            initial,
            kind: m.kind,
            k1,
            model,
            params,
            integrator,
            scale,
            output: cfg.output.clone(),
        })
    }
}
