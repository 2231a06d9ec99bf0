use std::collections::BTreeMap;
use std::path::Path;

use chemclock::{CounterParams, OscillatorParams};

use crate::CliError;

/// Built-in defaults overridden by a flat `{"name": number}` JSON file.
pub fn load(path: Option<&Path>) -> Result<(OscillatorParams, CounterParams), CliError> {
    let mut osc = OscillatorParams::default();
    let mut counter = CounterParams::default();
    let Some(path) = path else {
        return Ok((osc, counter));
    };
    let text = crate::read(path)?;
    let map: BTreeMap<String, f64> =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    for (key, value) in map {
        match key.as_str() {
            "eta1" => osc.eta1 = value,
            "epsilon" => osc.epsilon = value,
            "rho" => osc.rho = value,
            "eta2" => osc.eta2 = value,
            "p" => osc.p = value,
            "c" => osc.c = value,
            "eta3" => counter.eta3 = value,
            "eta4" => counter.eta4 = value,
            "l" => counter.l = value,
            "n" => {
                if value.fract() != 0.0 || !(1.0..=f64::from(u32::MAX)).contains(&value) {
                    return Err(CliError::Parse(format!("n must be a positive integer, got {value}")));
                }
                counter.n = value as u32;
            }
            other => {
                return Err(CliError::Parse(format!(
                    "unknown parameter {other:?} in {}",
                    path.display()
                )))
            }
        }
    }
    Ok((osc, counter))
}
