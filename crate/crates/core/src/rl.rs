// SPDX-License-Identifier: Apache-2.0

//! Finite-difference ("hybrid reinforcement") training: perturb one
//! coefficient, re-run the forward model, form the one-sided gradient
//! quotient and update.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::backprop::check_divergence;
use crate::error::{Error, Result};
use crate::model::WitnessModel;
use crate::qcore::DensityMatrix;
use crate::report::{EpochLog, EpochRecord};
use crate::scalar::Real;
use crate::schedules::{CoefficientId, ParameterSchedule, PerKind};
use crate::witness::{set_rms, TrainingPair};

/// When the unperturbed error is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NominalPolicy {
    /// Once per update cycle on a snapshot of the schedule; every perturbation
    /// is taken against that snapshot while updates go to the live schedule.
    #[default]
    Snapshot,
    /// Before every coefficient, on the live schedule.
    PerCoefficient,
}

/// What the gradient quotient differentiates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `½ (d − output)²` of one pair; the pair loop is outermost.
    #[default]
    PairSquared,
    /// RMS error over the whole training set; one update cycle per epoch.
    SetRms,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RlConfig<T: Real> {
    pub delta_rel: T,
    pub delta_abs: PerKind<T>,
    pub rates: PerKind<T>,
    pub epochs: usize,
    pub seed: u64,
    pub nominal: NominalPolicy,
    pub objective: Objective,
    pub divergence_factor: T,
    pub record_wall_time: bool,
}

/// Initial physical values used by the Fourier runs.
pub fn fourier_initial<T: Real>() -> PerKind<T> {
    PerKind::new(T::lit(2.5e-3), T::lit(1e-4), T::lit(1e-4))
}

impl<T: Real> Default for RlConfig<T> {
    fn default() -> Self {
        let delta_rel = T::lit(2e-4);
        Self {
            delta_rel,
            delta_abs: fourier_initial::<T>().map(|v| v * delta_rel),
            rates: PerKind::new(T::lit(2e-7), T::zero(), T::lit(4e-7)),
            epochs: 2000,
            seed: 0,
            nominal: NominalPolicy::Snapshot,
            objective: Objective::PairSquared,
            divergence_factor: T::lit(10.0),
            record_wall_time: true,
        }
    }
}

impl<T: Real> RlConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_rel > T::zero()) {
            return Err(Error::Config("delta_rel must be positive".into()));
        }
        for kind in crate::qcore::ParamKind::ALL {
            if !(self.delta_abs.get(kind) > T::zero()) {
                return Err(Error::Config(format!("delta_abs for {} must be positive", kind.name())));
            }
            if !(self.rates.get(kind) >= T::zero()) {
                return Err(Error::Config(format!("rate for {} must be non-negative", kind.name())));
            }
        }
        Ok(())
    }

    /// `Δ = max(δ_rel |value|, δ_abs)`.
    pub fn perturbation(&self, id: &CoefficientId, value: T) -> T {
        let rel = self.delta_rel * value.abs();
        let floor = self.delta_abs.get(id.kind);
        if rel > floor {
            rel
        } else {
            floor
        }
    }
}

/// `½ (d − output)²`.
pub fn pair_error<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    schedule: &ParameterSchedule<T>,
    pair: &TrainingPair<T>,
) -> Result<T> {
    let y = model.output(schedule, &pair.input)?;
    Ok(T::lit(0.5) * (pair.target - y) * (pair.target - y))
}

/// `(E_mod − E_nom) / Δ`.
pub fn gradient_quotient<T: Real>(e_nom: T, e_mod: T, delta: T) -> T {
    (e_mod - e_nom) / delta
}

/// One-sided finite-difference gradient of the pair error. The schedule is
/// left untouched.
pub fn fd_gradient<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    id: &CoefficientId,
    pair: &TrainingPair<T>,
    schedule: &ParameterSchedule<T>,
    config: &RlConfig<T>,
) -> Result<T> {
    let e_nom = pair_error(model, schedule, pair)?;
    let value = schedule.get(id)?;
    let delta = config.perturbation(id, value);
    let e_mod = pair_error(model, &schedule.with(id, value + delta)?, pair)?;
    Ok(gradient_quotient(e_nom, e_mod, delta))
}

fn objective_value<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    schedule: &ParameterSchedule<T>,
    pairs: &[TrainingPair<T>],
    objective: Objective,
) -> Result<T> {
    match objective {
        Objective::PairSquared => pair_error(model, schedule, &pairs[0]),
        Objective::SetRms => set_rms(model, schedule, pairs),
    }
}

/// One update cycle over `trainable` against the error of `pairs`.
fn update_cycle<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    schedule: &mut ParameterSchedule<T>,
    pairs: &[TrainingPair<T>],
    trainable: &[CoefficientId],
    config: &RlConfig<T>,
) -> Result<()> {
    let snapshot = schedule.clone();
    let e_snap = match config.nominal {
        NominalPolicy::Snapshot => Some(objective_value(model, &snapshot, pairs, config.objective)?),
        NominalPolicy::PerCoefficient => None,
    };
    for id in trainable {
        let base = match config.nominal {
            NominalPolicy::Snapshot => &snapshot,
            NominalPolicy::PerCoefficient => &*schedule,
        };
        let e_nom = match e_snap {
            Some(e) => e,
            None => objective_value(model, base, pairs, config.objective)?,
        };
        let value = base.get(id)?;
        let delta = config.perturbation(id, value);
        let e_mod = objective_value(model, &base.with(id, value + delta)?, pairs, config.objective)?;
        let g = gradient_quotient(e_nom, e_mod, delta);
        let updated = schedule.get(id)? - config.rates.get(id.kind) * g;
        schedule.set(id, updated)?;
    }
    Ok(())
}

/// One epoch in place. Returns the RMS error after all updates.
pub fn train_rl_epoch<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    pairs: &[TrainingPair<T>],
    schedule: &mut ParameterSchedule<T>,
    config: &RlConfig<T>,
) -> Result<T> {
    if pairs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let trainable = schedule.list_trainable(&config.rates);
    run_updates(model, pairs, schedule, &trainable, config)?;
    set_rms(model, schedule, pairs)
}

fn run_updates<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    pairs: &[TrainingPair<T>],
    schedule: &mut ParameterSchedule<T>,
    trainable: &[CoefficientId],
    config: &RlConfig<T>,
) -> Result<()> {
    match config.objective {
        Objective::PairSquared => {
            for pair in pairs {
                update_cycle(model, schedule, std::slice::from_ref(pair), trainable, config)?;
            }
            Ok(())
        }
        Objective::SetRms => update_cycle(model, schedule, pairs, trainable, config),
    }
}

/// Full training run; epoch 0 of the log is the starting schedule.
pub fn train_rl<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    pairs: &[TrainingPair<T>],
    schedule: &ParameterSchedule<T>,
    config: &RlConfig<T>,
) -> Result<(ParameterSchedule<T>, EpochLog)> {
    train_rl_with(model, pairs, schedule, config, |_, _| Ok(()))
}

/// [`train_rl`] with a callback after every epoch.
pub fn train_rl_with<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    pairs: &[TrainingPair<T>],
    schedule: &ParameterSchedule<T>,
    config: &RlConfig<T>,
    mut on_epoch: impl FnMut(usize, &ParameterSchedule<T>) -> Result<()>,
) -> Result<(ParameterSchedule<T>, EpochLog)> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut current = schedule.clone();
    let mut log = EpochLog::default();
    let initial = set_rms(model, &current, pairs)?;
    log.push(EpochRecord {
        epoch: 0,
        rms: initial.as_f64(),
        wall_seconds: 0.0,
        forward_solves: 0,
        backward_solves: 0,
    });
    on_epoch(0, &current)?;
    let start = Instant::now();
    let trainable = current.list_trainable(&config.rates);
    for epoch in 1..=config.epochs {
        let before = model.forward_solves();
        run_updates(model, pairs, &mut current, &trainable, config)?;
        let solves = model.forward_solves() - before;
        let rms = set_rms(model, &current, pairs)?;
        check_divergence(epoch, rms, initial, config.divergence_factor)?;
        log.push(EpochRecord {
            epoch,
            rms: rms.as_f64(),
            wall_seconds: if config.record_wall_time {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            },
            forward_solves: solves,
            backward_solves: 0,
        });
        on_epoch(epoch, &current)?;
    }
    Ok((current, log))
}

/// Outputs of the model for every pair input.
pub fn pair_outputs<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    schedule: &ParameterSchedule<T>,
    pairs: &[TrainingPair<T>],
) -> Result<Vec<T>> {
    let inputs: Vec<&DensityMatrix<T>> = pairs.iter().map(|p| &p.input).collect();
    model.outputs(schedule, &inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backprop::{pair_gradients, Quadrature};
    use crate::model::ContinuumModel;
    use crate::qcore::{Observable, OutputMap, ParamKind, TimeGrid};
    use crate::schedules::{Basis, Term};
    use crate::witness::build_training_set;

    fn model(t: f64, m: usize) -> ContinuumModel<f64> {
        ContinuumModel::new(Observable::zz(0, 1, 2).unwrap(), OutputMap::Square, TimeGrid::new(t, m).unwrap())
    }

    fn bell_pair() -> TrainingPair<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        TrainingPair::new(DensityMatrix::from_real_amplitudes(&[s, 0.0, 0.0, s]).unwrap(), 1.0, "bell").unwrap()
    }

    #[test]
    fn pair_error_examples() {
        let s = ParameterSchedule::<f64>::zeros(2, 100.0, Basis::Fourier { n_max: 3 }, PerKind::splat(true)).unwrap();
        let mut m = model(100.0, 10);
        assert!(pair_error(&mut m, &s, &bell_pair()).unwrap() < 1e-30);
        // ⟨ZZ⟩ = 0 for (|00⟩ + |01⟩)/√2 under H ≡ 0
        let plus = TrainingPair::new(
            DensityMatrix::from_real_amplitudes(&[0.5f64.sqrt(), 0.5f64.sqrt(), 0.0, 0.0]).unwrap(),
            1.0,
            "sup",
        )
        .unwrap();
        let e = pair_error(&mut m, &s, &plus).unwrap();
        assert!((e - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quotient_arithmetic() {
        assert!((gradient_quotient::<f64>(0.50, 0.51, 1e-3) - 10.0).abs() < 1e-9);
        assert_eq!(gradient_quotient(0.3, 0.3, 1e-3), 0.0);
    }

    #[test]
    fn fd_gradient_leaves_schedule_untouched_and_tracks_adjoint() {
        let mut s = ParameterSchedule::fourier(2, 300.0, 2, PerKind::splat(false), PerKind::new(2.5e-3, 1e-4, 1e-4)).unwrap();
        s.set(&CoefficientId::new(ParamKind::Coupling, 0, Term::Sin(1)), 2e-3).unwrap();
        s.set(&CoefficientId::new(ParamKind::Tunneling, 1, Term::Cos(2)), -1e-3).unwrap();
        let before = s.clone();
        let pairs = build_training_set::<f64>(2, OutputMap::Square).unwrap();
        let pair = &pairs[3];
        let mut m = model(300.0, 300);
        let ids = s.coefficient_ids();
        let adj = pair_gradients(pair, &s, &mut m, &ids, Quadrature::ExactStep).unwrap();
        let cfg = RlConfig::default();
        for (id, g) in &adj.gradients {
            let fd = fd_gradient(&mut m, id, pair, &s, &cfg).unwrap();
            let scale = g.abs().max(1e-6);
            assert!((fd - g).abs() / scale < 1e-2, "{id}: fd {fd} adjoint {g}");
        }
        assert_eq!(s, before);
    }

    #[test]
    fn fd_converges_first_order() {
        let s = ParameterSchedule::fourier(2, 300.0, 1, PerKind::splat(true), PerKind::new(2.5e-3, 1e-4, 1e-3)).unwrap();
        let pairs = build_training_set::<f64>(2, OutputMap::Square).unwrap();
        let mut m = model(300.0, 200);
        let id = CoefficientId::new(ParamKind::Tunneling, 0, Term::Constant);
        let g = pair_gradients(&pairs[3], &s, &mut m, &[id], Quadrature::ExactStep).unwrap().gradients[0].1;
        let errs: Vec<f64> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&d| {
                let cfg = RlConfig {
                    delta_rel: d,
                    delta_abs: PerKind::splat(1e-30),
                    ..Default::default()
                };
                (fd_gradient(&mut m, &id, &pairs[3], &s, &cfg).unwrap() - g).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 5.0 && ratio < 20.0, "{errs:?}");
        }
    }

    #[test]
    fn zero_rates_leave_schedule_unchanged() {
        let s = ParameterSchedule::fourier(2, 100.0, 1, PerKind::splat(true), fourier_initial()).unwrap();
        let pairs = build_training_set::<f64>(2, OutputMap::Square).unwrap();
        let mut m = model(100.0, 20);
        let cfg = RlConfig {
            rates: PerKind::splat(0.0),
            epochs: 2,
            ..Default::default()
        };
        let (out, log) = train_rl(&mut m, &pairs, &s, &cfg).unwrap();
        assert_eq!(out, s);
        assert_eq!(log.records.len(), 3);
        assert_eq!(log.records[1].forward_solves, pairs.len());
    }

    #[test]
    fn solve_counts_per_epoch() {
        let s = ParameterSchedule::fourier(2, 100.0, 3, PerKind::new(true, true, true), fourier_initial()).unwrap();
        let pairs = build_training_set::<f64>(2, OutputMap::Square).unwrap();
        let cfg = RlConfig {
            epochs: 1,
            ..Default::default()
        };
        let c = s.list_trainable(&cfg.rates).len();
        let mut m = model(100.0, 20);
        let (_, log) = train_rl(&mut m, &pairs, &s, &cfg).unwrap();
        assert_eq!(log.records[1].forward_solves, pairs.len() * (1 + c));

        let cfg = RlConfig {
            epochs: 1,
            nominal: NominalPolicy::PerCoefficient,
            ..Default::default()
        };
        let (_, log) = train_rl(&mut m, &pairs, &s, &cfg).unwrap();
        assert_eq!(log.records[1].forward_solves, pairs.len() * 2 * c);

        let cfg = RlConfig {
            epochs: 1,
            objective: Objective::SetRms,
            ..Default::default()
        };
        let (_, log) = train_rl(&mut m, &pairs, &s, &cfg).unwrap();
        assert_eq!(log.records[1].forward_solves, pairs.len() * (1 + c));
    }

    #[test]
    fn deterministic_log() {
        let s = ParameterSchedule::fourier(2, 100.0, 2, PerKind::splat(true), fourier_initial()).unwrap();
        let pairs = build_training_set::<f64>(2, OutputMap::Square).unwrap();
        let cfg = RlConfig {
            epochs: 3,
            record_wall_time: false,
            ..Default::default()
        };
        let a = train_rl(&mut model(100.0, 20), &pairs, &s, &cfg).unwrap();
        let b = train_rl(&mut model(100.0, 20), &pairs, &s, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn epoch_function_matches_loop() {
        let s = ParameterSchedule::fourier(2, 100.0, 2, PerKind::splat(true), fourier_initial()).unwrap();
        let pairs = build_training_set::<f64>(2, OutputMap::Square).unwrap();
        let cfg = RlConfig {
            epochs: 1,
            ..Default::default()
        };
        let (out, log) = train_rl(&mut model(100.0, 20), &pairs, &s, &cfg).unwrap();
        let mut s2 = s.clone();
        let rms = train_rl_epoch(&mut model(100.0, 20), &pairs, &mut s2, &cfg).unwrap();
        assert_eq!(out, s2);
        assert_eq!(log.records[1].rms, rms);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = RlConfig::<f64> {
            delta_rel: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
