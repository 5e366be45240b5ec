// SPDX-License-Identifier: Apache-2.0

//! Adjoint ("quantum backprop") gradients of the squared output error.
//!
//! For `L = ½ (d − f(⟨O⟩))²` with `⟨O⟩ = tr(ρ(T) O)` the costate is the
//! matrix `A(t)` obtained by propagating the boundary value
//! `A(T) = (d − f(⟨O⟩)) f′(⟨O⟩) O` backward with the forward unitaries,
//! `A(t_k) = U_k† A(t_{k+1}) U_k`. The weight gradient is
//!
//! ```text
//! ∂L/∂w = i ∫ tr( A(t) [∂H/∂w, ρ(t)] ) dt
//! ```
//!
//! Two quadratures are available. [`Quadrature::Trapezoid`] samples the
//! integrand at the grid points. [`Quadrature::ExactStep`] integrates it in
//! closed form inside each midpoint step (the Hamiltonian is constant there),
//! which is the exact derivative of the discretized forward model.

use std::time::Instant;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ContinuumModel;
use crate::qcore::{
    conjugate_adjoint, expectation, generator_matrix, propagate, step_propagators, DensityMatrix, Observable,
    OutputMap, ParamKind, Trajectory,
};
use crate::report::{EpochLog, EpochRecord};
use crate::scalar::{cplx, creal, CMatrix, Real};
use crate::schedules::{CoefficientId, ParameterSchedule, PerKind};
use crate::witness::{set_rms, TrainingPair};

const IMAG_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Trapezoid,
    #[default]
    ExactStep,
}

/// `A(T) = (d − f(⟨O⟩)) f′(⟨O⟩) O`.
pub fn adjoint_boundary<T: Real>(
    rho_final: &DensityMatrix<T>,
    observable: &Observable<T>,
    target: T,
    map: OutputMap,
) -> Result<CMatrix<T>> {
    let ev = expectation(rho_final, observable)?;
    let scale = (target - map.apply(ev)) * map.derivative(ev);
    Ok(observable.matrix() * creal(scale))
}

/// Costate matrices `A(t_k)`, `k = 0..=M`.
#[derive(Clone, Debug)]
pub struct AdjointField<T: Real> {
    pub values: Vec<CMatrix<T>>,
}

/// Propagates the boundary matrix backward through the forward trajectory's
/// step unitaries.
pub fn adjoint_evolve_backward<T: Real>(boundary: &CMatrix<T>, forward: &Trajectory<T>) -> Result<AdjointField<T>> {
    let steps = forward.propagators();
    let dim = forward.states()[0].nrows();
    if boundary.nrows() != dim || boundary.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: boundary.nrows(),
        });
    }
    if forward.states().len() != steps.len() + 1 {
        return Err(Error::InvalidGrid("forward trajectory and propagators disagree".into()));
    }
    let mut values = vec![CMatrix::zeros(dim, dim); steps.len() + 1];
    values[steps.len()] = boundary.clone();
    for k in (0..steps.len()).rev() {
        values[k] = conjugate_adjoint(&steps[k].unitary, &values[k + 1]);
    }
    Ok(AdjointField { values })
}

/// Sum of the Pauli-string generators driven by one stored coefficient set.
fn stored_generator<T: Real>(schedule: &ParameterSchedule<T>, kind: ParamKind, site: usize) -> Result<DMatrix<T>> {
    let n = schedule.num_qubits();
    let dim = 1 << n;
    let mut g = DMatrix::zeros(dim, dim);
    let sites = schedule.physical_sites(kind, site);
    if sites.is_empty() {
        return Err(Error::InvalidCoefficient(format!("{} site {site} out of range", kind.name())));
    }
    for s in sites {
        g += generator_matrix::<T>(kind, s, n)?;
    }
    Ok(g)
}

/// `tr(G X)` for real `G`.
fn trace_real_complex<T: Real>(g: &DMatrix<T>, x: &CMatrix<T>) -> Complex<T> {
    let n = g.nrows();
    let mut acc = creal(T::zero());
    for i in 0..n {
        for j in 0..n {
            let gij = g[(i, j)];
            if gij != T::zero() {
                acc += x[(j, i)] * gij;
            }
        }
    }
    acc
}

/// Time profile `i·tr(G [ρ, A])` of one stored generator: per grid point for
/// the trapezoid rule, per step (already integrated over the step) for the
/// exact rule. Also returns the largest imaginary residual seen.
fn generator_profile<T: Real>(
    g: &DMatrix<T>,
    forward: &Trajectory<T>,
    adjoint: &AdjointField<T>,
    quadrature: Quadrature,
) -> (Vec<T>, T) {
    let states = forward.states();
    let comm = |k: usize| -> CMatrix<T> {
        let (r, a) = (&states[k], &adjoint.values[k]);
        r * a - a * r
    };
    let i = cplx(T::zero(), T::one());
    let mut worst = T::zero();
    let mut track = |z: Complex<T>| {
        if z.im.abs() > worst {
            worst = z.im.abs();
        }
        z.re
    };
    match quadrature {
        Quadrature::Trapezoid => (0..states.len())
            .map(|k| track(i * trace_real_complex(g, &comm(k))))
            .collect::<Vec<_>>(),
        Quadrature::ExactStep => forward
            .propagators()
            .iter()
            .enumerate()
            .map(|(k, step)| {
                let v = &step.eigenvectors;
                let vc = v.map(creal);
                let c_eig = vc.transpose() * comm(k) * &vc;
                let g_eig = v.transpose() * g * v;
                let dt = step.dt;
                let dim = v.nrows();
                let mut acc = creal(T::zero());
                for a in 0..dim {
                    for b in 0..dim {
                        let gba = g_eig[(b, a)];
                        if gba == T::zero() {
                            continue;
                        }
                        let x = step.energies[a] - step.energies[b];
                        acc += c_eig[(a, b)] * gba * phase_integral(x, dt);
                    }
                }
                track(i * acc)
            })
            .collect(),
    }
    .pipe(|p| (p, worst))
}

/// `∫_0^Δt e^{-i x s} ds`.
fn phase_integral<T: Real>(x: T, dt: T) -> Complex<T> {
    let y = x * dt;
    if y.abs() < T::lit(1e-4) {
        // series: Δt (1 − i y/2 − y²/6 + i y³/24)
        let y2 = y * y;
        return cplx(
            dt * (T::one() - y2 / T::lit(6.0)),
            -dt * (y / T::lit(2.0) - y2 * y / T::lit(24.0)),
        );
    }
    // (1 − e^{-iy}) / (i x) = (sin y + i (cos y − 1)) / x
    cplx(y.sin() / x, (y.cos() - T::one()) / x)
}

trait Pipe: Sized {
    fn pipe<R>(self, f: impl FnOnce(Self) -> R) -> R {
        f(self)
    }
}
impl<X> Pipe for X {}

/// Weights that turn a generator profile into the gradient of one basis
/// coefficient.
fn coefficient_weights<T: Real>(
    schedule: &ParameterSchedule<T>,
    id: &CoefficientId,
    forward: &Trajectory<T>,
    quadrature: Quadrature,
) -> Result<Vec<T>> {
    let grid = forward.grid();
    match quadrature {
        Quadrature::Trapezoid => {
            let m = grid.steps();
            let dt = grid.dt();
            let half = T::lit(0.5);
            (0..=m)
                .map(|k| {
                    let w = if k == 0 || k == m { dt * half } else { dt };
                    Ok(w * schedule.basis_value(id, grid.time(k))?)
                })
                .collect()
        }
        Quadrature::ExactStep => (0..grid.steps())
            .map(|k| schedule.basis_value(id, grid.midpoint(k)))
            .collect(),
    }
}

/// `∂L/∂w` for a single coefficient.
pub fn weight_gradient<T: Real>(
    id: &CoefficientId,
    forward: &Trajectory<T>,
    adjoint: &AdjointField<T>,
    schedule: &ParameterSchedule<T>,
    quadrature: Quadrature,
) -> Result<T> {
    let g = stored_generator(schedule, id.kind, id.site)?;
    let (profile, residual) = generator_profile(&g, forward, adjoint, quadrature);
    check_residual(residual)?;
    let w = coefficient_weights(schedule, id, forward, quadrature)?;
    Ok(profile.iter().zip(&w).fold(T::zero(), |acc, (p, w)| acc + *p * *w))
}

fn check_residual<T: Real>(residual: T) -> Result<()> {
    if residual > T::tol(IMAG_RESIDUAL_TOL) {
        return Err(Error::NonRealGradient(residual.as_f64()));
    }
    Ok(())
}

/// Gradients of one training pair's error for a list of coefficients.
#[derive(Clone, Debug)]
pub struct GradientReport<T: Real> {
    pub gradients: Vec<(CoefficientId, T)>,
    /// `d − f(⟨O⟩)`.
    pub output_error: T,
    pub output: T,
    pub imag_residual: T,
}

/// One forward and one backward solve for `pair`, then every requested
/// coefficient gradient.
pub fn pair_gradients<T: Real>(
    pair: &TrainingPair<T>,
    schedule: &ParameterSchedule<T>,
    model: &mut ContinuumModel<T>,
    coefficients: &[CoefficientId],
    quadrature: Quadrature,
) -> Result<GradientReport<T>> {
    if pair.input.num_qubits() != schedule.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: schedule.num_qubits(),
            found: pair.input.num_qubits(),
        });
    }
    let steps = step_propagators(schedule, &model.grid)?;
    let forward = propagate(&pair.input, steps, model.grid)?;
    model.forward += 1;
    let rho_f = forward.final_state();
    let ev = expectation(&rho_f, &model.observable)?;
    let output = model.map.apply(ev);
    let boundary = adjoint_boundary(&rho_f, &model.observable, pair.target, model.map)?;
    let adjoint = adjoint_evolve_backward(&boundary, &forward)?;
    model.backward += 1;

    // one profile per stored generator, shared by its basis coefficients
    let mut profiles: Vec<((ParamKind, usize), Vec<T>)> = Vec::new();
    let mut residual = T::zero();
    let mut gradients = Vec::with_capacity(coefficients.len());
    for id in coefficients {
        let key = (id.kind, id.site);
        let idx = match profiles.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                let g = stored_generator(schedule, id.kind, id.site)?;
                let (p, r) = generator_profile(&g, &forward, &adjoint, quadrature);
                if r > residual {
                    residual = r;
                }
                profiles.push((key, p));
                profiles.len() - 1
            }
        };
        let w = coefficient_weights(schedule, id, &forward, quadrature)?;
        let grad = profiles[idx].1.iter().zip(&w).fold(T::zero(), |acc, (p, w)| acc + *p * *w);
        gradients.push((*id, grad));
    }
    check_residual(residual)?;
    Ok(GradientReport {
        gradients,
        output_error: pair.target - output,
        output,
        imag_residual: residual,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Apply `w ← w − η ∂L/∂w` after every training pair.
    #[default]
    PerPair,
    /// Sum the gradients over the whole set, then update once per epoch.
    PerEpoch,
}

#[derive(Clone, Debug)]
pub struct BackpropConfig<T: Real> {
    pub rates: PerKind<T>,
    pub epochs: usize,
    pub update: UpdateMode,
    pub quadrature: Quadrature,
    /// Abort once the epoch RMS exceeds this multiple of the initial RMS.
    pub divergence_factor: T,
    pub record_wall_time: bool,
}

impl<T: Real> Default for BackpropConfig<T> {
    fn default() -> Self {
        Self {
            rates: PerKind::new(T::lit(2e-7), T::zero(), T::lit(4e-7)),
            epochs: 100,
            update: UpdateMode::PerPair,
            quadrature: Quadrature::ExactStep,
            divergence_factor: T::lit(10.0),
            record_wall_time: true,
        }
    }
}

/// Gradient-descent training with adjoint gradients.
pub fn train_backprop<T: Real>(
    pairs: &[TrainingPair<T>],
    schedule: &ParameterSchedule<T>,
    config: &BackpropConfig<T>,
    model: &mut ContinuumModel<T>,
) -> Result<(ParameterSchedule<T>, EpochLog)> {
    train_backprop_with(pairs, schedule, config, model, |_, _| Ok(()))
}

/// [`train_backprop`] with a callback after every epoch (epoch 0 is the
/// starting schedule).
pub fn train_backprop_with<T: Real>(
    pairs: &[TrainingPair<T>],
    schedule: &ParameterSchedule<T>,
    config: &BackpropConfig<T>,
    model: &mut ContinuumModel<T>,
    mut on_epoch: impl FnMut(usize, &ParameterSchedule<T>) -> Result<()>,
) -> Result<(ParameterSchedule<T>, EpochLog)> {
    if pairs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut current = schedule.clone();
    let trainable = current.list_trainable(&config.rates);
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
    for epoch in 1..=config.epochs {
        let (f0, b0) = (model.forward, model.backward);
        let mut accumulated = vec![T::zero(); trainable.len()];
        for pair in pairs {
            let report = pair_gradients(pair, &current, model, &trainable, config.quadrature)?;
            match config.update {
                UpdateMode::PerPair => {
                    for (id, g) in &report.gradients {
                        let v = current.get(id)? - config.rates.get(id.kind) * *g;
                        current.set(id, v)?;
                    }
                }
                UpdateMode::PerEpoch => {
                    for (acc, (_, g)) in accumulated.iter_mut().zip(&report.gradients) {
                        *acc += *g;
                    }
                }
            }
        }
        if config.update == UpdateMode::PerEpoch {
            for (id, g) in trainable.iter().zip(&accumulated) {
                let v = current.get(id)? - config.rates.get(id.kind) * *g;
                current.set(id, v)?;
            }
        }
        let (f1, b1) = (model.forward, model.backward);
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
            forward_solves: f1 - f0,
            backward_solves: b1 - b0,
        });
        on_epoch(epoch, &current)?;
    }
    Ok((current, log))
}

pub(crate) fn check_divergence<T: Real>(epoch: usize, rms: T, initial: T, factor: T) -> Result<()> {
    let diverged = !rms.is_finite() || (rms > factor * initial && rms > T::default_epsilon());
    if diverged {
        return Err(Error::Diverged {
            epoch,
            rms: rms.as_f64(),
            initial: initial.as_f64(),
            factor: factor.as_f64(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{evolve, HamiltonianParams, TimeGrid};
    use crate::scalar::{max_abs_diff, trace_product};
    use crate::schedules::{Basis, Term};

    fn zz() -> Observable<f64> {
        Observable::zz(0, 1, 2).unwrap()
    }

    fn bell() -> DensityMatrix<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_real_amplitudes(&[s, 0.0, 0.0, s]).unwrap()
    }

    #[test]
    fn boundary_vanishes_at_zero_error() {
        let rho = bell();
        let a = adjoint_boundary(&rho, &zz(), 1.0, OutputMap::Square).unwrap();
        assert!(a.iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn boundary_identity_map_is_scaled_observable() {
        // ⟨ZZ⟩ = 0.5 for this mixture, target 1.0
        let mut m = CMatrix::<f64>::zeros(4, 4);
        m[(0, 0)] = creal(0.75);
        m[(1, 1)] = creal(0.25);
        let rho = DensityMatrix::new(m).unwrap();
        let a = adjoint_boundary(&rho, &zz(), 1.0, OutputMap::Identity).unwrap();
        let expected = zz().matrix() * creal(0.5);
        assert!(max_abs_diff(&a, &expected) < 1e-15);
    }

    #[test]
    fn boundary_square_map_stationary_at_zero_expectation() {
        let rho = DensityMatrix::<f64>::maximally_mixed(2).unwrap();
        let a = adjoint_boundary(&rho, &zz(), 0.7, OutputMap::Square).unwrap();
        assert!(a.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn zero_hamiltonian_keeps_adjoint_constant() {
        let grid = TimeGrid::new(100.0, 20).unwrap();
        let traj = evolve(&bell(), &HamiltonianParams::zeros(2), &grid).unwrap();
        let boundary = zz().matrix() * creal(0.3);
        let field = adjoint_evolve_backward(&boundary, &traj).unwrap();
        for a in &field.values {
            assert!(max_abs_diff(a, &boundary) < 1e-15);
        }
        let zero = CMatrix::zeros(4, 4);
        let field = adjoint_evolve_backward(&zero, &traj).unwrap();
        assert!(field.values.iter().all(|a| a.iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn hilbert_schmidt_pairing_is_conserved() {
        let p = HamiltonianParams {
            tunneling: vec![3e-3, 1e-3],
            bias: vec![-2e-3, 5e-4],
            coupling: vec![4e-3],
        };
        let grid = TimeGrid::new(1000.0, 100).unwrap();
        let rho0 = DensityMatrix::from_real_amplitudes(&[0.6, 0.0, 0.0, 0.8]).unwrap();
        let traj = evolve(&rho0, &p, &grid).unwrap();
        let field = adjoint_evolve_backward(zz().matrix(), &traj).unwrap();
        let first = trace_product(&field.values[0], &traj.states()[0]);
        for (a, r) in field.values.iter().zip(traj.states()) {
            assert!((trace_product(a, r) - first).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_adjoint_gives_zero_gradient() {
        let s = ParameterSchedule::fourier(2, 100.0, 2, PerKind::splat(false), PerKind::new(1e-2, 1e-3, 2e-3)).unwrap();
        let grid = TimeGrid::new(100.0, 40).unwrap();
        let traj = evolve(&bell(), &s, &grid).unwrap();
        let field = adjoint_evolve_backward(&CMatrix::zeros(4, 4), &traj).unwrap();
        for q in [Quadrature::Trapezoid, Quadrature::ExactStep] {
            for id in s.coefficient_ids() {
                assert_eq!(weight_gradient(&id, &traj, &field, &s, q).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn vanishing_commutator_gives_zero_coupling_gradient() {
        // diagonal state under a diagonal Hamiltonian stays diagonal and
        // commutes with σ_zσ_z
        let s = ParameterSchedule::fourier(2, 100.0, 1, PerKind::splat(false), PerKind::new(0.0, 1e-2, 3e-2)).unwrap();
        let rho0 = DensityMatrix::<f64>::basis_state(2, 1).unwrap();
        let grid = TimeGrid::new(100.0, 30).unwrap();
        let traj = evolve(&rho0, &s, &grid).unwrap();
        let field = adjoint_evolve_backward(zz().matrix(), &traj).unwrap();
        for q in [Quadrature::Trapezoid, Quadrature::ExactStep] {
            for term in [Term::Constant, Term::Sin(1), Term::Cos(1)] {
                let id = CoefficientId::new(ParamKind::Coupling, 0, term);
                assert!(weight_gradient(&id, &traj, &field, &s, q).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn phase_integral_series_matches_closed_form() {
        let dt = 2.0;
        for x in [1e-7, 3e-5, 4.9e-5] {
            let series = phase_integral(x, dt);
            let y: f64 = x * dt;
            let closed = Complex::new(y.sin() / x, (y.cos() - 1.0) / x);
            assert!((series - closed).norm() < 1e-9, "{x}");
        }
    }

    #[test]
    fn trapezoid_and_exact_agree_on_fine_grid() {
        let mut s = ParameterSchedule::fourier(2, 200.0, 2, PerKind::splat(false), PerKind::new(4e-3, 1e-3, 2e-3)).unwrap();
        s.set(&CoefficientId::new(ParamKind::Tunneling, 1, Term::Sin(1)), 2e-3).unwrap();
        let pair = TrainingPair::new(bell(), 0.0, "bell").unwrap();
        let ids = s.coefficient_ids();
        let mut model = ContinuumModel::new(zz(), OutputMap::Square, TimeGrid::new(200.0, 2000).unwrap());
        let a = pair_gradients(&pair, &s, &mut model, &ids, Quadrature::Trapezoid).unwrap();
        let b = pair_gradients(&pair, &s, &mut model, &ids, Quadrature::ExactStep).unwrap();
        let scale = b.gradients.iter().map(|(_, g)| g.abs()).fold(0.0, f64::max);
        for ((_, x), (_, y)) in a.gradients.iter().zip(&b.gradients) {
            assert!((x - y).abs() < 1e-4 * scale);
        }
        assert_eq!(crate::model::WitnessModel::forward_solves(&model), 2);
        assert_eq!(model.backward_solves(), 2);
    }

    #[test]
    fn zero_rates_leave_schedule_unchanged() {
        let s = ParameterSchedule::fourier(2, 100.0, 1, PerKind::splat(true), PerKind::new(1e-2, 1e-3, 2e-3)).unwrap();
        let pairs = vec![TrainingPair::new(bell(), 1.0, "bell").unwrap()];
        let mut model = ContinuumModel::new(zz(), OutputMap::Square, TimeGrid::new(100.0, 20).unwrap());
        let cfg = BackpropConfig {
            rates: PerKind::splat(0.0),
            epochs: 3,
            ..Default::default()
        };
        let (out, log) = train_backprop(&pairs, &s, &cfg, &mut model).unwrap();
        assert_eq!(out, s);
        let rms = log.rms();
        assert!(rms.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn exact_fit_start_gives_no_update() {
        let s = ParameterSchedule::<f64>::zeros(2, 100.0, Basis::Fourier { n_max: 1 }, PerKind::splat(true)).unwrap();
        // H ≡ 0 keeps the Bell state; ⟨ZZ⟩² = 1 = d
        let pairs = vec![TrainingPair::new(bell(), 1.0, "bell").unwrap()];
        let mut model = ContinuumModel::new(zz(), OutputMap::Square, TimeGrid::new(100.0, 20).unwrap());
        let cfg = BackpropConfig {
            rates: PerKind::splat(1e-3),
            epochs: 2,
            ..Default::default()
        };
        let (out, _) = train_backprop(&pairs, &s, &cfg, &mut model).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn epoch_uses_two_solves_per_pair() {
        let s = ParameterSchedule::fourier(2, 100.0, 3, PerKind::splat(false), PerKind::new(1e-2, 1e-3, 2e-3)).unwrap();
        let pairs = crate::witness::build_training_set::<f64>(2, OutputMap::Square).unwrap();
        let mut model = ContinuumModel::new(zz(), OutputMap::Square, TimeGrid::new(100.0, 20).unwrap());
        let cfg = BackpropConfig {
            rates: PerKind::new(1e-6, 0.0, 1e-6),
            epochs: 2,
            ..Default::default()
        };
        let (_, log) = train_backprop(&pairs, &s, &cfg, &mut model).unwrap();
        for r in &log.records[1..] {
            assert_eq!(r.forward_solves, pairs.len());
            assert_eq!(r.backward_solves, pairs.len());
        }
    }

    #[test]
    fn divergence_guard_trips() {
        assert!(check_divergence(3, 1.1, 0.1, 10.0).is_err());
        assert!(check_divergence(3, 0.9, 0.1, 10.0).is_ok());
        assert!(check_divergence(3, f64::NAN, 0.1, 10.0).is_err());
    }
}
