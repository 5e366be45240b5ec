// SPDX-License-Identifier: Apache-2.0

//! State files: a JSON array of labelled pure or mixed states.
//!
//! ```json
//! [ { "label": "bell", "amplitudes": [0.7071067811865476, 0, 0, 0.7071067811865476] },
//!   { "label": "phase", "amplitudes": [[0.6, 0], [0, 0], [0, 0], [0, 0.8]] },
//!   { "label": "mixed", "density": [[0.5, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0.5]] } ]
//! ```

use std::path::Path;

use nalgebra::{Complex, DMatrix};
use qdl_core::DensityMatrix64;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// A real number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex<f64> {
        match self {
            Entry::Real(re) => Complex::new(re, 0.0),
            Entry::Complex([re, im]) => Complex::new(re, im),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub label: String,
    #[serde(default)]
    pub amplitudes: Option<Vec<Entry>>,
    #[serde(default)]
    pub density: Option<Vec<Vec<Entry>>>,
}

impl StateSpec {
    pub fn build(&self) -> CliResult<DensityMatrix64> {
        let bad = |m: &str| CliError::Config(format!("state {:?}: {m}", self.label));
        match (&self.amplitudes, &self.density) {
            (Some(a), None) => {
                let amps: Vec<Complex<f64>> = a.iter().map(|e| e.value()).collect();
                DensityMatrix64::from_amplitudes(&amps).map_err(|e| bad(&e.to_string()))
            }
            (None, Some(rows)) => {
                let dim = rows.len();
                if rows.iter().any(|r| r.len() != dim) {
                    return Err(bad("density matrix is not square"));
                }
                let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j].value());
                DensityMatrix64::new(m).map_err(|e| bad(&e.to_string()))
            }
            _ => Err(bad("give exactly one of amplitudes and density")),
        }
    }
}

pub fn load_states(path: &Path) -> CliResult<Vec<(String, DensityMatrix64)>> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("states file not found: {}", path.display())));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let specs: Vec<StateSpec> = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    specs.iter().map(|s| Ok((s.label.clone(), s.build()?))).collect()
}

/// Comma-separated real amplitudes, e.g. `0.6,0,0,0.8`.
pub fn parse_amplitudes(text: &str) -> CliResult<DensityMatrix64> {
    let amps = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("amplitudes: {e}")))?;
    DensityMatrix64::from_real_amplitudes(&amps).map_err(|e| CliError::Usage(format!("amplitudes: {e}")))
}
