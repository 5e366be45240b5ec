// SPDX-License-Identifier: Apache-2.0

//! Run configuration. Every field is optional in the file; missing values
//! take the defaults of the selected mode.

use std::path::{Path, PathBuf};

use qdl_core::backprop::{BackpropConfig, Quadrature, UpdateMode};
use qdl_core::circuit::{circuit_initial, circuit_rl_config, ShotBackend, Shots, CIRCUIT_SEGMENTS, CIRCUIT_T_FINAL};
use qdl_core::qcore::{Observable, OutputMap, TimeGrid};
use qdl_core::rl::{fourier_initial, NominalPolicy, Objective, RlConfig};
use qdl_core::schedules::{ParameterSchedule, PerKind, Tying};
use qdl_core::witness::TrainingFamily;
use qdl_core::ContinuumModel64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Backprop,
    Rl,
    Circuit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Fourier,
    Piecewise,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    /// A shot count or `"exact"`.
    pub shots: Shots,
    #[serde(default)]
    pub p_dep: f64,
    #[serde(default)]
    pub p_ro: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            shots: Shots::EXACT,
            p_dep: 0.0,
            p_ro: 0.0,
            seed: None,
        }
    }
}

/// The file as written by the user.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<Mode>,
    pub num_qubits: Option<usize>,
    #[serde(rename = "T_ns")]
    pub t_ns: Option<f64>,
    pub time_steps: Option<usize>,
    pub basis: Option<BasisKind>,
    pub n_max: Option<usize>,
    pub segments: Option<usize>,
    pub tying: Option<Tying>,
    #[serde(rename = "K_init_rad_per_ns")]
    pub k_init: Option<f64>,
    #[serde(rename = "eps_init_rad_per_ns")]
    pub eps_init: Option<f64>,
    #[serde(rename = "zeta_init_rad_per_ns")]
    pub zeta_init: Option<f64>,
    pub initial_schedule: Option<PathBuf>,
    #[serde(rename = "eta_K_rad2_per_ns2")]
    pub eta_k: Option<f64>,
    #[serde(rename = "eta_eps_rad2_per_ns2")]
    pub eta_eps: Option<f64>,
    #[serde(rename = "eta_zeta_rad2_per_ns2")]
    pub eta_zeta: Option<f64>,
    pub delta_rel: Option<f64>,
    #[serde(rename = "delta_abs_K_rad_per_ns")]
    pub delta_abs_k: Option<f64>,
    #[serde(rename = "delta_abs_eps_rad_per_ns")]
    pub delta_abs_eps: Option<f64>,
    #[serde(rename = "delta_abs_zeta_rad_per_ns")]
    pub delta_abs_zeta: Option<f64>,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub nominal: Option<NominalPolicy>,
    pub objective: Option<Objective>,
    pub update: Option<UpdateMode>,
    pub quadrature: Option<Quadrature>,
    pub divergence_factor: Option<f64>,
    pub record_wall_time: Option<bool>,
    pub training_family: Option<TrainingFamily>,
    pub observable_qubits: Option<[usize; 2]>,
    pub output_map: Option<OutputMap>,
    pub backend: Option<BackendConfig>,
    pub trace_every: Option<usize>,
    pub trace_samples: Option<usize>,
}

/// Fully resolved configuration, written to the run manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub num_qubits: usize,
    #[serde(rename = "T_ns")]
    pub t_ns: f64,
    pub time_steps: usize,
    pub basis: BasisKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    pub tying: Tying,
    #[serde(rename = "K_init_rad_per_ns")]
    pub k_init: f64,
    #[serde(rename = "eps_init_rad_per_ns")]
    pub eps_init: f64,
    #[serde(rename = "zeta_init_rad_per_ns")]
    pub zeta_init: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_schedule: Option<PathBuf>,
    #[serde(rename = "eta_K_rad2_per_ns2")]
    pub eta_k: f64,
    #[serde(rename = "eta_eps_rad2_per_ns2")]
    pub eta_eps: f64,
    #[serde(rename = "eta_zeta_rad2_per_ns2")]
    pub eta_zeta: f64,
    pub delta_rel: f64,
    #[serde(rename = "delta_abs_K_rad_per_ns")]
    pub delta_abs_k: f64,
    #[serde(rename = "delta_abs_eps_rad_per_ns")]
    pub delta_abs_eps: f64,
    #[serde(rename = "delta_abs_zeta_rad_per_ns")]
    pub delta_abs_zeta: f64,
    pub epochs: usize,
    pub seed: u64,
    pub nominal: NominalPolicy,
    pub objective: Objective,
    pub update: UpdateMode,
    pub quadrature: Quadrature,
    pub divergence_factor: f64,
    pub record_wall_time: bool,
    pub training_family: TrainingFamily,
    pub observable_qubits: [usize; 2],
    pub output_map: OutputMap,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendConfig>,
    pub trace_every: usize,
    pub trace_samples: usize,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
}

pub fn load_raw(path: &Path) -> CliResult<RawConfig> {
    if !path.is_file() {
        return Err(CliError::ConfigNotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
}

impl RunConfig {
    pub fn resolve(raw: RawConfig, over: &Overrides) -> CliResult<Self> {
        let mode = over.mode.or(raw.mode).unwrap_or(Mode::Rl);
        let circuit = mode == Mode::Circuit;
        let basis = raw.basis.unwrap_or(if circuit { BasisKind::Piecewise } else { BasisKind::Fourier });
        if circuit && basis != BasisKind::Piecewise {
            return Err(CliError::Config("circuit mode needs the piecewise basis".into()));
        }
        let init: PerKind<f64> = if circuit { circuit_initial() } else { fourier_initial() };
        let rl_defaults: RlConfig<f64> = if circuit { circuit_rl_config() } else { RlConfig::default() };
        let bp_defaults = BackpropConfig::<f64>::default();
        let rate_defaults = if mode == Mode::Backprop { bp_defaults.rates } else { rl_defaults.rates };
        let k_init = raw.k_init.unwrap_or(init.tunneling);
        let eps_init = raw.eps_init.unwrap_or(init.bias);
        let zeta_init = raw.zeta_init.unwrap_or(init.coupling);
        let delta_rel = raw.delta_rel.unwrap_or(rl_defaults.delta_rel);
        let segments = raw.segments.unwrap_or(CIRCUIT_SEGMENTS);
        let cfg = RunConfig {
            mode,
            num_qubits: raw.num_qubits.unwrap_or(2),
            t_ns: raw.t_ns.unwrap_or(if circuit { CIRCUIT_T_FINAL } else { 1000.0 }),
            time_steps: raw.time_steps.unwrap_or(if basis == BasisKind::Piecewise { segments * 50 } else { 200 }),
            basis,
            n_max: (basis == BasisKind::Fourier).then(|| raw.n_max.unwrap_or(3)),
            segments: (basis == BasisKind::Piecewise).then_some(segments),
            tying: raw.tying.unwrap_or(PerKind::splat(false)),
            k_init,
            eps_init,
            zeta_init,
            initial_schedule: raw.initial_schedule,
            eta_k: raw.eta_k.unwrap_or(rate_defaults.tunneling),
            eta_eps: raw.eta_eps.unwrap_or(rate_defaults.bias),
            eta_zeta: raw.eta_zeta.unwrap_or(rate_defaults.coupling),
            delta_rel,
            delta_abs_k: raw.delta_abs_k.unwrap_or(rl_defaults.delta_abs.tunneling),
            delta_abs_eps: raw.delta_abs_eps.unwrap_or(rl_defaults.delta_abs.bias),
            delta_abs_zeta: raw.delta_abs_zeta.unwrap_or(rl_defaults.delta_abs.coupling),
            epochs: over.epochs.or(raw.epochs).unwrap_or(match mode {
                Mode::Backprop => bp_defaults.epochs,
                _ => rl_defaults.epochs,
            }),
            seed: over.seed.or(raw.seed).unwrap_or(0),
            nominal: raw.nominal.unwrap_or(rl_defaults.nominal),
            objective: raw.objective.unwrap_or(rl_defaults.objective),
            update: raw.update.unwrap_or(bp_defaults.update),
            quadrature: raw.quadrature.unwrap_or(bp_defaults.quadrature),
            divergence_factor: raw.divergence_factor.unwrap_or(rl_defaults.divergence_factor),
            record_wall_time: raw.record_wall_time.unwrap_or(false),
            training_family: raw.training_family.unwrap_or_default(),
            observable_qubits: raw.observable_qubits.unwrap_or([0, 1]),
            output_map: raw.output_map.unwrap_or_default(),
            backend: circuit.then(|| raw.backend.unwrap_or_default()),
            trace_every: raw.trace_every.unwrap_or(100),
            trace_samples: raw.trace_samples.unwrap_or(100),
        };
        if !circuit && raw.backend.is_some() {
            return Err(CliError::Config("backend is only used in circuit mode".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.t_ns.is_finite() && self.t_ns > 0.0) {
            return bad(format!("T_ns must be positive, got {}", self.t_ns));
        }
        if self.time_steps == 0 {
            return bad("time_steps must be at least 1".into());
        }
        if let Some(s) = self.segments {
            if s == 0 || !self.time_steps.is_multiple_of(s) {
                return bad(format!("time_steps ({}) must be a positive multiple of segments ({s})", self.time_steps));
            }
        }
        let [a, b] = self.observable_qubits;
        if a == b || a >= self.num_qubits || b >= self.num_qubits {
            return bad(format!("observable_qubits {:?} invalid for {} qubits", self.observable_qubits, self.num_qubits));
        }
        if !(self.divergence_factor > 1.0) {
            return bad("divergence_factor must exceed 1".into());
        }
        self.rl_config().validate()?;
        Ok(())
    }

    pub fn rates(&self) -> PerKind<f64> {
        PerKind::new(self.eta_k, self.eta_eps, self.eta_zeta)
    }

    pub fn rl_config(&self) -> RlConfig<f64> {
        RlConfig {
            delta_rel: self.delta_rel,
            delta_abs: PerKind::new(self.delta_abs_k, self.delta_abs_eps, self.delta_abs_zeta),
            rates: self.rates(),
            epochs: self.epochs,
            seed: self.seed,
            nominal: self.nominal,
            objective: self.objective,
            divergence_factor: self.divergence_factor,
            record_wall_time: self.record_wall_time,
        }
    }

    pub fn backprop_config(&self) -> BackpropConfig<f64> {
        BackpropConfig {
            rates: self.rates(),
            epochs: self.epochs,
            update: self.update,
            quadrature: self.quadrature,
            divergence_factor: self.divergence_factor,
            record_wall_time: self.record_wall_time,
        }
    }

    pub fn initial_schedule(&self) -> CliResult<ParameterSchedule<f64>> {
        if let Some(path) = &self.initial_schedule {
            if !path.is_file() {
                return Err(CliError::Config(format!("initial_schedule {} not found", path.display())));
            }
            let s = ParameterSchedule::load(path).map_err(|e| CliError::Config(e.to_string()))?;
            if s.num_qubits() != self.num_qubits {
                return Err(CliError::Config(format!(
                    "initial_schedule has {} qubits, config has {}",
                    s.num_qubits(),
                    self.num_qubits
                )));
            }
            return Ok(s);
        }
        let init = PerKind::new(self.k_init, self.eps_init, self.zeta_init);
        let s = match (self.n_max, self.segments) {
            (Some(n_max), _) => ParameterSchedule::fourier(self.num_qubits, self.t_ns, n_max, self.tying, init),
            (None, Some(segments)) => ParameterSchedule::piecewise(self.num_qubits, self.t_ns, segments, self.tying, init),
            (None, None) => unreachable!("resolve sets one of n_max and segments"),
        };
        s.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn continuum_model(&self) -> CliResult<ContinuumModel64> {
        let [a, b] = self.observable_qubits;
        let obs = Observable::zz(a, b, self.num_qubits).map_err(|e| CliError::Config(e.to_string()))?;
        let grid = TimeGrid::new(self.t_ns, self.time_steps).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(ContinuumModel64::new(obs, self.output_map, grid))
    }

    pub fn shot_backend(&self) -> CliResult<ShotBackend> {
        let b = self.backend.unwrap_or_default();
        ShotBackend::new(b.shots, b.p_dep, b.p_ro, b.seed.unwrap_or(self.seed)).map_err(|e| CliError::Config(e.to_string()))
    }
}
