// SPDX-License-Identifier: Apache-2.0

//! Hardware-style mode: piecewise-constant schedules compiled to one exact
//! unitary per segment, computational-basis measurement with finite shots and
//! optional depolarizing/readout noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::WitnessModel;
use crate::qcore::{conjugate, hamiltonian_matrix, qubit_mask, DensityMatrix, OutputMap, StepPropagator};
use crate::report::EpochLog;
use crate::rl::{train_rl_with, NominalPolicy, Objective, RlConfig};
use crate::scalar::{creal, CMatrix, Real};
use crate::schedules::{Basis, ParameterSchedule, PerKind};
use crate::witness::TrainingPair;

/// Ordered segment unitaries of a piecewise-constant schedule.
#[derive(Clone, Debug)]
pub struct SegmentedCircuit<T: Real> {
    pub unitaries: Vec<CMatrix<T>>,
    pub source: ParameterSchedule<T>,
}

impl<T: Real> SegmentedCircuit<T> {
    pub fn num_qubits(&self) -> usize {
        self.source.num_qubits()
    }

    /// `U_S ⋯ U_1 ρ U_1† ⋯ U_S†`, with the depolarizing channel after every
    /// segment when `p_dep > 0`.
    pub fn apply(&self, rho0: &DensityMatrix<T>, p_dep: T) -> Result<DensityMatrix<T>> {
        if rho0.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits(),
                found: rho0.num_qubits(),
            });
        }
        let dim = rho0.dim();
        let mixed = T::one() / T::from_usize(dim).unwrap();
        let mut rho = rho0.matrix().clone();
        for u in &self.unitaries {
            rho = conjugate(u, &rho);
            if p_dep > T::zero() {
                rho *= creal(T::one() - p_dep);
                for i in 0..dim {
                    rho[(i, i)] += creal(p_dep * mixed);
                }
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(rho))
    }
}

/// `U_s = exp(−i H_s T/S)` for every segment.
pub fn compile_segments<T: Real>(schedule: &ParameterSchedule<T>) -> Result<SegmentedCircuit<T>> {
    let segments = match schedule.basis() {
        Basis::Piecewise { segments } => segments,
        Basis::Fourier { .. } => {
            return Err(Error::InvalidSchedule("circuit mode needs a piecewise schedule".into()))
        }
    };
    schedule.validate()?;
    let tau = schedule.t_final() / T::from_usize(segments).unwrap();
    let half = T::lit(0.5);
    let unitaries = (0..segments)
        .map(|s| {
            let t = tau * (T::from_usize(s).unwrap() + half);
            let p = schedule.eval(t)?;
            Ok(StepPropagator::new(hamiltonian_matrix(&p), tau)?.unitary)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentedCircuit {
        unitaries,
        source: schedule.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Shots {
    Count(u64),
    Exact(ExactTag),
}

/// Serialized as the string `"exact"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExactTag {
    Exact,
}

impl Shots {
    pub const EXACT: Shots = Shots::Exact(ExactTag::Exact);
}

/// Measurement settings plus the random stream used for sampling.
#[derive(Clone, Debug)]
pub struct ShotBackend {
    pub shots: Shots,
    pub p_dep: f64,
    pub p_ro: f64,
    pub seed: u64,
    rng: ChaCha8Rng,
}

impl ShotBackend {
    pub fn new(shots: Shots, p_dep: f64, p_ro: f64, seed: u64) -> Result<Self> {
        for (name, p) in [("p_dep", p_dep), ("p_ro", p_ro)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidBackend(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if shots == Shots::Count(0) {
            return Err(Error::ZeroShots);
        }
        Ok(Self {
            shots,
            p_dep,
            p_ro,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Noiseless probabilities.
    pub fn exact() -> Self {
        Self::new(Shots::EXACT, 0.0, 0.0, 0).expect("valid backend")
    }

    /// Restarts the random stream from the seed.
    pub fn reset(&mut self) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
    }
}

/// Measurement record over computational basis states (qubit 0 is the most
/// significant bit of the index).
#[derive(Clone, Debug, PartialEq)]
pub enum Counts {
    Probabilities(Vec<f64>),
    Counts { counts: Vec<u64>, shots: u64 },
}

impl Counts {
    /// Outcome frequencies.
    pub fn frequencies(&self) -> Result<Vec<f64>> {
        match self {
            Counts::Probabilities(p) => Ok(p.clone()),
            Counts::Counts { shots: 0, .. } => Err(Error::ZeroShots),
            Counts::Counts { counts, shots } => Ok(counts.iter().map(|&c| c as f64 / *shots as f64).collect()),
        }
    }
}

/// Independent bit flips with probability `p` on every qubit.
fn readout_flip(probs: &[f64], num_qubits: usize, p: f64) -> Vec<f64> {
    let mut out = probs.to_vec();
    for q in 0..num_qubits {
        let mask = qubit_mask(q, num_qubits);
        let prev = out.clone();
        for (i, v) in out.iter_mut().enumerate() {
            *v = (1.0 - p) * prev[i] + p * prev[i ^ mask];
        }
    }
    out
}

fn multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64]) -> Result<Vec<u64>> {
    let mut left = n;
    let mut mass = 1.0f64;
    let mut out = vec![0u64; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() {
            out[i] = left;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, q)
            .map_err(|e| Error::InvalidBackend(format!("sampling: {e}")))?
            .sample(rng);
        out[i] = k;
        left -= k;
        mass -= p;
    }
    Ok(out)
}

/// Runs the circuit on `rho0` and measures every qubit.
pub fn run_shots<T: Real>(circuit: &SegmentedCircuit<T>, rho0: &DensityMatrix<T>, backend: &mut ShotBackend) -> Result<Counts> {
    let rho = circuit.apply(rho0, T::lit(backend.p_dep))?;
    let n = circuit.num_qubits();
    let mut probs: Vec<f64> = rho.diagonal().into_iter().map(|p| p.as_f64().max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    if backend.p_ro > 0.0 {
        probs = readout_flip(&probs, n, backend.p_ro);
    }
    match backend.shots {
        Shots::Exact(_) => Ok(Counts::Probabilities(probs)),
        Shots::Count(shots) => Ok(Counts::Counts {
            counts: multinomial(&mut backend.rng, shots, &probs)?,
            shots,
        }),
    }
}

/// `f(⟨σ_z σ_z⟩)` on the qubit pair `(a, b)` from measured frequencies.
pub fn estimate_output(counts: &Counts, num_qubits: usize, pair: (usize, usize), map: OutputMap) -> Result<f64> {
    let freqs = counts.frequencies()?;
    if freqs.len() != 1 << num_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << num_qubits,
            found: freqs.len(),
        });
    }
    let (ma, mb) = (qubit_mask(pair.0, num_qubits), qubit_mask(pair.1, num_qubits));
    let parity: f64 = freqs
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let odd = ((i & ma) != 0) ^ ((i & mb) != 0);
            if odd {
                -f
            } else {
                *f
            }
        })
        .sum();
    Ok(map.apply(parity))
}

/// Witness model evaluated through the segmented circuit and the backend.
#[derive(Clone, Debug)]
pub struct CircuitModel {
    pub backend: ShotBackend,
    pub pair: (usize, usize),
    pub map: OutputMap,
    forward: usize,
}

impl CircuitModel {
    pub fn new(backend: ShotBackend, pair: (usize, usize), map: OutputMap) -> Self {
        Self {
            backend,
            pair,
            map,
            forward: 0,
        }
    }
}

impl<T: Real> WitnessModel<T> for CircuitModel {
    fn outputs(&mut self, schedule: &ParameterSchedule<T>, inputs: &[&DensityMatrix<T>]) -> Result<Vec<T>> {
        let circuit = compile_segments(schedule)?;
        let n = schedule.num_qubits();
        if self.pair.0 >= n || self.pair.1 >= n || self.pair.0 == self.pair.1 {
            return Err(Error::InvalidObservable(format!("qubit pair {:?} invalid for {n} qubits", self.pair)));
        }
        inputs
            .iter()
            .map(|rho| {
                self.forward += 1;
                let counts = run_shots(&circuit, rho, &mut self.backend)?;
                Ok(T::lit(estimate_output(&counts, n, self.pair, self.map)?))
            })
            .collect()
    }

    fn forward_solves(&self) -> usize {
        self.forward
    }
}

/// Initial values of the piecewise runs.
pub fn circuit_initial<T: Real>() -> PerKind<T> {
    PerKind::new(T::lit(2e-3), T::lit(1e-4), T::lit(1e-4))
}

/// Default final time of the piecewise runs (ns).
pub const CIRCUIT_T_FINAL: f64 = 10.0;
pub const CIRCUIT_SEGMENTS: usize = 4;

/// Defaults of the per-weight circuit training. The perturbation floor is
/// large enough that shot noise in the error difference stays well below
/// the signal.
pub fn circuit_rl_config<T: Real>() -> RlConfig<T> {
    RlConfig {
        delta_abs: PerKind::splat(T::lit(1e-2)),
        rates: PerKind::new(T::lit(1e-2), T::lit(1e-3), T::lit(1e-3)),
        nominal: NominalPolicy::PerCoefficient,
        objective: Objective::SetRms,
        ..RlConfig::default()
    }
}

/// Per-weight training with the error taken as the whole-set RMS.
pub fn train_circuit_rl<T: Real>(
    pairs: &[TrainingPair<T>],
    schedule: &ParameterSchedule<T>,
    config: &RlConfig<T>,
    model: &mut CircuitModel,
    on_epoch: impl FnMut(usize, &ParameterSchedule<T>) -> Result<()>,
) -> Result<(ParameterSchedule<T>, EpochLog)> {
    if !matches!(schedule.basis(), Basis::Piecewise { .. }) {
        return Err(Error::InvalidSchedule("circuit mode needs a piecewise schedule".into()));
    }
    let config = RlConfig {
        objective: Objective::SetRms,
        ..config.clone()
    };
    train_rl_with(model, pairs, schedule, &config, on_epoch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ContinuumModel;
    use crate::qcore::{evolve_final, Observable, ParamKind, TimeGrid};
    use crate::scalar::max_abs_diff;
    use crate::schedules::{CoefficientId, Term};
    use crate::witness::build_training_set;
    use nalgebra::Complex;
    use proptest::prelude::*;

    fn random_piecewise(vals: &[f64], t: f64) -> ParameterSchedule<f64> {
        let mut s = ParameterSchedule::piecewise(2, t, 4, PerKind::splat(false), PerKind::splat(0.0)).unwrap();
        for (id, v) in s.coefficient_ids().into_iter().zip(vals) {
            s.set(&id, *v).unwrap();
        }
        s
    }

    #[test]
    fn zero_schedule_compiles_to_identity() {
        let s = ParameterSchedule::<f64>::piecewise(2, 10.0, 4, PerKind::splat(false), PerKind::splat(0.0)).unwrap();
        let c = compile_segments(&s).unwrap();
        assert_eq!(c.unitaries.len(), 4);
        for u in &c.unitaries {
            assert!(max_abs_diff(u, &CMatrix::identity(4, 4)) < 1e-15);
        }
    }

    #[test]
    fn coupling_only_segment_is_diagonal() {
        let (c, tau) = (0.3, 2.0);
        let s = ParameterSchedule::<f64>::piecewise(2, tau, 1, PerKind::splat(false), PerKind::new(0.0, 0.0, c)).unwrap();
        let u = &compile_segments(&s).unwrap().unitaries[0];
        let e = |x: f64| Complex::from_polar(1.0, x);
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            e(-c * tau),
            e(c * tau),
            e(c * tau),
            e(-c * tau),
        ]));
        assert!(max_abs_diff(u, &expected) < 1e-14);
    }

    #[test]
    fn fourier_schedule_rejected() {
        let s = ParameterSchedule::<f64>::fourier(2, 10.0, 1, PerKind::splat(true), PerKind::splat(0.0)).unwrap();
        assert!(compile_segments(&s).is_err());
    }

    #[test]
    fn identity_circuit_counts() {
        let s = ParameterSchedule::<f64>::piecewise(2, 10.0, 4, PerKind::splat(false), PerKind::splat(0.0)).unwrap();
        let c = compile_segments(&s).unwrap();
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        let mut b = ShotBackend::new(Shots::Count(1000), 0.0, 0.0, 3).unwrap();
        assert_eq!(
            run_shots(&c, &rho, &mut b).unwrap(),
            Counts::Counts {
                counts: vec![0, 1000, 0, 0],
                shots: 1000
            }
        );
        let mut exact = ShotBackend::exact();
        let probs = run_shots(&c, &rho, &mut exact).unwrap();
        assert_eq!(probs, Counts::Probabilities(vec![0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn full_readout_randomization_is_uniform() {
        let s = random_piecewise(&[1e-1; 20], 10.0);
        let c = compile_segments(&s).unwrap();
        let rho = DensityMatrix::basis_state(2, 2).unwrap();
        let mut b = ShotBackend::new(Shots::Count(400_000), 0.0, 0.5, 9).unwrap();
        let f = run_shots(&c, &rho, &mut b).unwrap().frequencies().unwrap();
        for v in f {
            assert!((v - 0.25).abs() < 5e-3);
        }
    }

    #[test]
    fn estimator_examples() {
        let all00 = Counts::Counts {
            counts: vec![10, 0, 0, 0],
            shots: 10,
        };
        assert_eq!(estimate_output(&all00, 2, (0, 1), OutputMap::Square).unwrap(), 1.0);
        let half = Counts::Counts {
            counts: vec![500, 500, 0, 0],
            shots: 1000,
        };
        assert_eq!(estimate_output(&half, 2, (0, 1), OutputMap::Square).unwrap(), 0.0);
        let none = Counts::Counts {
            counts: vec![0; 4],
            shots: 0,
        };
        assert!(matches!(estimate_output(&none, 2, (0, 1), OutputMap::Square), Err(Error::ZeroShots)));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::from_real_amplitudes(&[s, 0.0, 0.0, s]).unwrap();
        let zero = ParameterSchedule::<f64>::piecewise(2, 10.0, 4, PerKind::splat(false), PerKind::splat(0.0)).unwrap();
        let mut m = CircuitModel::new(ShotBackend::exact(), (0, 1), OutputMap::Square);
        assert!((m.output(&zero, &bell).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn backend_validation() {
        assert!(ShotBackend::new(Shots::Count(0), 0.0, 0.0, 0).is_err());
        assert!(ShotBackend::new(Shots::Count(10), 1.5, 0.0, 0).is_err());
        assert!(ShotBackend::new(Shots::Count(10), 0.0, -0.1, 0).is_err());
        let json: Shots = serde_json::from_str("\"exact\"").unwrap();
        assert_eq!(json, Shots::EXACT);
        let json: Shots = serde_json::from_str("8192").unwrap();
        assert_eq!(json, Shots::Count(8192));
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let s = random_piecewise(&[3e-2; 20], 10.0);
        let c = compile_segments(&s).unwrap();
        let rho = DensityMatrix::basis_state(2, 0).unwrap();
        let run = || {
            let mut b = ShotBackend::new(Shots::Count(500), 0.05, 0.02, 42).unwrap();
            (0..5).map(|_| run_shots(&c, &rho, &mut b).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn estimator_spread_scales_with_inverse_root_shots() {
        let s = random_piecewise(&[5e-2; 20], 10.0);
        let c = compile_segments(&s).unwrap();
        let rho = DensityMatrix::basis_state(2, 0).unwrap();
        let mut b = ShotBackend::new(Shots::Count(1), 0.0, 0.0, 5).unwrap();
        let mut points = Vec::new();
        for shots in [100u64, 1_000, 10_000, 100_000] {
            b.shots = Shots::Count(shots);
            let xs: Vec<f64> = (0..400)
                .map(|_| estimate_output(&run_shots(&c, &rho, &mut b).unwrap(), 2, (0, 1), OutputMap::Identity).unwrap())
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            points.push(((shots as f64).ln(), var.sqrt().ln()));
        }
        let n = points.len() as f64;
        let (mx, my) = (points.iter().map(|p| p.0).sum::<f64>() / n, points.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn depolarizing_never_increases_correlation_beyond_noise() {
        let s = random_piecewise(&[2e-2; 20], 10.0);
        let c = compile_segments(&s).unwrap();
        let rho = DensityMatrix::basis_state(2, 0).unwrap();
        let shots = 4000u64;
        let clean = estimate_output(&run_shots(&c, &rho, &mut ShotBackend::exact()).unwrap(), 2, (0, 1), OutputMap::Identity).unwrap();
        let sigma = ((1.0 - clean * clean) / shots as f64).sqrt().max(1.0 / shots as f64);
        let mut b = ShotBackend::new(Shots::Count(shots), 0.05, 0.0, 11).unwrap();
        for _ in 0..200 {
            let est = estimate_output(&run_shots(&c, &rho, &mut b).unwrap(), 2, (0, 1), OutputMap::Identity).unwrap();
            assert!(est.abs() <= clean.abs() + 3.0 * sigma + 1e-12);
        }
    }

    #[test]
    fn exact_training_matches_continuum_rl() {
        let s = ParameterSchedule::piecewise(2, CIRCUIT_T_FINAL, 4, PerKind::splat(false), circuit_initial()).unwrap();
        let pairs = build_training_set::<f64>(2, OutputMap::Square).unwrap();
        let cfg = RlConfig {
            epochs: 20,
            record_wall_time: false,
            ..circuit_rl_config()
        };
        let mut cm = CircuitModel::new(ShotBackend::exact(), (0, 1), OutputMap::Square);
        let (a, la) = train_circuit_rl(&pairs, &s, &cfg, &mut cm, |_, _| Ok(())).unwrap();
        let grid = TimeGrid::new(CIRCUIT_T_FINAL, 8).unwrap();
        let mut model = ContinuumModel::new(Observable::zz(0, 1, 2).unwrap(), OutputMap::Square, grid);
        let (b, lb) = crate::rl::train_rl(&mut model, &pairs, &s, &cfg).unwrap();
        assert!(la.final_rms().unwrap() < 0.5 * la.initial_rms().unwrap());
        for (x, y) in la.rms().iter().zip(lb.rms()) {
            assert!((x - y).abs() < 1e-9);
        }
        let id = CoefficientId::new(ParamKind::Tunneling, 1, Term::Segment(2));
        assert!((a.get(&id).unwrap() - b.get(&id).unwrap()).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn compiled_circuit_matches_aligned_evolution(
            vals in prop::collection::vec(-0.3f64..0.3, 20),
            amps in prop::array::uniform4(-1.0f64..1.0),
            k in 1usize..4,
        ) {
            prop_assume!(amps.iter().map(|a| a * a).sum::<f64>() > 1e-2);
            let s = random_piecewise(&vals, 10.0);
            let rho = DensityMatrix::from_real_amplitudes(&amps).unwrap();
            let c = compile_segments(&s).unwrap();
            for u in &c.unitaries {
                prop_assert!(max_abs_diff(&(u * u.adjoint()), &CMatrix::identity(4, 4)) < 1e-12);
            }
            let a = c.apply(&rho, 0.0).unwrap();
            let b = evolve_final(&rho, &s, &TimeGrid::new(10.0, 4 * k).unwrap()).unwrap();
            prop_assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-9);
        }
    }
}
