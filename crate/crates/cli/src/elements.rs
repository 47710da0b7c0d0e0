//! The `elements` command.

use regprop::elements::{cartesian_to_elements, elements_to_cartesian, OrbitElements};
use regprop::projective::CartesianState;
use regprop::Vec3;

use crate::error::{CliError, CliResult};
use crate::output::fmt;

/// `x,y,z,vx,vy,vz` for elements given with angles in degrees.
pub fn to_cartesian(el: &OrbitElements, k1: f64) -> CliResult<String> {
    if !(el.e >= 0.0) || (el.e < 1.0 && !(el.a > 0.0)) || !(k1 > 0.0) {
        return Err(CliError::Config("need e >= 0, a > 0 for e < 1 and mu > 0".into()));
    }
    let rad = OrbitElements {
        i: el.i.to_radians(),
        omega_arg: el.omega_arg.to_radians(),
        raan: el.raan.to_radians(),
        true_anomaly: el.true_anomaly.to_radians(),
        ..*el
    };
    let c = elements_to_cartesian(&rad, k1).map_err(|e| CliError::Config(e.to_string()))?;
    let vals: Vec<String> = c.to_array().iter().map(|&v| fmt(v)).collect();
    Ok(format!("x,y,z,vx,vy,vz\n{}\n", vals.join(",")))
}

/// `a,e,i,omega_arg,raan,true_anomaly` with angles in degrees.
pub fn to_elements(r: [f64; 3], v: [f64; 3], k1: f64) -> CliResult<String> {
    if !(k1 > 0.0) {
        return Err(CliError::Config("mu must be positive".into()));
    }
    let el = cartesian_to_elements(&CartesianState::new(Vec3::from(r), Vec3::from(v)), k1).map_err(|e| CliError::Config(e.to_string()))?;
    let vals = [el.a, el.e, el.i.to_degrees(), el.omega_arg.to_degrees(), el.raan.to_degrees(), el.true_anomaly.to_degrees()];
    let vals: Vec<String> = vals.iter().map(|&v| fmt(v)).collect();
    Ok(format!("a,e,i,omega_arg,raan,true_anomaly\n{}\n", vals.join(",")))
}
