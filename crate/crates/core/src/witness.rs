// SPDX-License-Identifier: Apache-2.0

//! Entanglement oracle, training sets and witness evaluation.

use nalgebra::{Complex, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::WitnessModel;
use crate::qcore::{DensityMatrix, OutputMap, MAX_QUBITS};
use crate::scalar::{creal, CMatrix, Real};
use crate::schedules::ParameterSchedule;

/// Input state plus scalar target.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair<T: Real> {
    pub input: DensityMatrix<T>,
    pub target: T,
    pub label: String,
}

impl<T: Real> TrainingPair<T> {
    pub fn new(input: DensityMatrix<T>, target: T, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !(target >= T::zero() && target <= T::one()) {
            return Err(Error::InvalidPair(format!("{label}: target {:e} outside [0, 1]", target)));
        }
        input.validate()?;
        Ok(Self { input, target, label })
    }
}

/// Eigenvalues below this are treated as zero weight in the mixture.
const RANK_CUTOFF: f64 = 1e-14;

/// Wootters concurrence of a two-qubit state.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.num_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let herm = (m + m.adjoint()) * creal(T::lit(0.5));
    let eig = SymmetricEigen::new(herm);
    // ρ = X X†, X = V √p. The λ_i are the singular values of W = Xᵀ Y X
    // with Y = σ_y ⊗ σ_y (real symmetric).
    let cols: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] > T::lit(RANK_CUTOFF)).collect();
    if cols.is_empty() {
        return Err(Error::InvalidState("state has no positive weight".into()));
    }
    let mut x = CMatrix::<T>::zeros(4, cols.len());
    for (c, &k) in cols.iter().enumerate() {
        let w = eig.eigenvalues[k].sqrt();
        for r in 0..4 {
            x[(r, c)] = eig.eigenvectors[(r, k)] * creal(w);
        }
    }
    let w = x.transpose() * spin_flip::<T>() * &x;
    let mut s: Vec<T> = w.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let c = s.iter().skip(1).fold(s[0], |acc, v| acc - *v);
    Ok(if c > T::zero() { c.min(T::one()) } else { T::zero() })
}

fn spin_flip<T: Real>() -> CMatrix<T> {
    let mut y = CMatrix::zeros(4, 4);
    let one = creal(T::one());
    y[(0, 3)] = -one;
    y[(3, 0)] = -one;
    y[(1, 2)] = one;
    y[(2, 1)] = one;
    y
}

/// `cos θ |0…0⟩ + sin θ |1…1⟩`.
pub fn ghz_family<T: Real>(num_qubits: usize, theta: T) -> Result<DensityMatrix<T>> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::UnsupportedQubitCount(num_qubits));
    }
    let dim = 1usize << num_qubits;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
    amps[0] = creal(theta.cos());
    amps[dim - 1] = creal(theta.sin());
    DensityMatrix::from_amplitudes(&amps)
}

/// Target value for a state whose entanglement monotone is `c`.
fn target_for<T: Real>(c: T, map: OutputMap) -> T {
    match map {
        OutputMap::Square => c * c,
        OutputMap::Identity => c,
    }
}

/// Amplitudes of the partially entangled training state.
pub const PARTIAL_AMPLITUDES: (f64, f64) = (0.6, 0.8);

/// Four-state witness training set. Targets are squared concurrence for the
/// squared output map and raw concurrence for the identity map.
pub fn build_training_set<T: Real>(num_qubits: usize, map: OutputMap) -> Result<Vec<TrainingPair<T>>> {
    if !(2..=MAX_QUBITS).contains(&num_qubits) {
        return Err(Error::UnsupportedQubitCount(num_qubits));
    }
    let n = num_qubits;
    let dim = 1usize << n;
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let zero = DensityMatrix::basis_state(n, 0)?;
    let ghz = ghz_family(n, T::lit(std::f64::consts::FRAC_PI_4))?;
    // |0…0⟩ ⊗ |+⟩ on the last qubit
    let mut sup = vec![T::zero(); dim];
    sup[0] = s;
    sup[1] = s;
    let sup = DensityMatrix::from_real_amplitudes(&sup)?;
    let (a, b) = PARTIAL_AMPLITUDES;
    let mut part = vec![T::zero(); dim];
    part[0] = T::lit(a);
    part[dim - 1] = T::lit(b);
    let part = DensityMatrix::from_real_amplitudes(&part)?;

    let monotone = |rho: &DensityMatrix<T>, analytic: T| -> Result<T> {
        if n == 2 {
            concurrence(rho)
        } else {
            Ok(analytic)
        }
    };
    let two_ab = T::lit(2.0 * a * b);
    let (zl, gl, sl) = if n == 2 {
        ("product_00", "bell", "product_superposition")
    } else {
        ("product_zeros", "ghz", "product_superposition")
    };
    Ok(vec![
        TrainingPair::new(zero.clone(), target_for(monotone(&zero, T::zero())?, map), zl)?,
        TrainingPair::new(ghz.clone(), target_for(monotone(&ghz, T::one())?, map), gl)?,
        TrainingPair::new(sup.clone(), target_for(monotone(&sup, T::zero())?, map), sl)?,
        TrainingPair::new(part.clone(), target_for(monotone(&part, two_ab)?, map), "partial")?,
    ])
}

/// Which states make up the training set of a register with more than two
/// qubits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingFamily {
    /// `|0…0⟩`, GHZ, `|0…0⟩ ⊗ |+⟩`, `a|0…0⟩ + b|1…1⟩`.
    #[default]
    Ghz,
    /// The two-qubit set on qubits 0 and 1, every other qubit in `|0⟩`.
    EmbeddedPair,
}

pub fn build_training_family<T: Real>(
    num_qubits: usize,
    map: OutputMap,
    family: TrainingFamily,
) -> Result<Vec<TrainingPair<T>>> {
    match family {
        TrainingFamily::Ghz => build_training_set(num_qubits, map),
        TrainingFamily::EmbeddedPair => {
            if !(2..=MAX_QUBITS).contains(&num_qubits) {
                return Err(Error::UnsupportedQubitCount(num_qubits));
            }
            let rest = DensityMatrix::<T>::basis_state(num_qubits - 2, 0).map(|r| r.into_matrix());
            build_training_set::<T>(2, map)?
                .into_iter()
                .map(|p| {
                    let m = match &rest {
                        Ok(r) if num_qubits > 2 => p.input.matrix().kronecker(r),
                        _ => p.input.matrix().clone(),
                    };
                    TrainingPair::new(DensityMatrix::new(m)?, p.target, p.label)
                })
                .collect()
        }
    }
}

/// `sqrt(mean (d − output)²)` over the set.
pub fn set_rms<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    schedule: &ParameterSchedule<T>,
    pairs: &[TrainingPair<T>],
) -> Result<T> {
    if pairs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let inputs: Vec<&DensityMatrix<T>> = pairs.iter().map(|p| &p.input).collect();
    let out = model.outputs(schedule, &inputs)?;
    Ok(rms_error(pairs, &out))
}

pub fn rms_error<T: Real>(pairs: &[TrainingPair<T>], outputs: &[T]) -> T {
    let sum = pairs
        .iter()
        .zip(outputs)
        .fold(T::zero(), |acc, (p, o)| acc + (p.target - *o) * (p.target - *o));
    (sum / T::from_usize(pairs.len()).unwrap()).sqrt()
}

/// Average ranks (1-based), values within `tol` of each other share a rank.
fn ranks(values: &[f64], tol: f64) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && (values[idx[j + 1]] - values[idx[i]]).abs() <= tol {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with tie averaging. `None` when either side is
/// constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (ranks(a, 1e-9), ranks(b, 1e-9));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessRow {
    pub label: String,
    /// Oracle entanglement; absent where no oracle applies.
    pub oracle: Option<f64>,
    pub output: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub rows: Vec<WitnessRow>,
    pub sweep: Vec<WitnessRow>,
    /// Rank correlation between sweep outputs and oracle values.
    pub spearman: Option<f64>,
}

impl WitnessReport {
    /// Columns `label,oracle,output`; user states first, then the sweep.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "oracle", "output"])?;
        for r in self.rows.iter().chain(&self.sweep) {
            let oracle = r.oracle.map(|v| format!("{v:e}")).unwrap_or_default();
            w.write_record([r.label.clone(), oracle, format!("{:e}", r.output)])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const SWEEP_POINTS: usize = 21;

/// Angles `0, π/40, …, π/2`.
pub fn sweep_angles() -> Vec<f64> {
    (0..SWEEP_POINTS)
        .map(|k| std::f64::consts::FRAC_PI_2 * k as f64 / (SWEEP_POINTS - 1) as f64)
        .collect()
}

/// Runs `states` and the θ sweep through the model.
pub fn evaluate_witness<T: Real, M: WitnessModel<T> + ?Sized>(
    model: &mut M,
    schedule: &ParameterSchedule<T>,
    states: &[(String, DensityMatrix<T>)],
) -> Result<WitnessReport> {
    let n = schedule.num_qubits();
    let oracle_of = |rho: &DensityMatrix<T>| -> Result<Option<f64>> {
        if rho.num_qubits() == 2 {
            Ok(Some(concurrence(rho)?.as_f64()))
        } else {
            Ok(None)
        }
    };
    let inputs: Vec<&DensityMatrix<T>> = states.iter().map(|(_, r)| r).collect();
    let outputs = if inputs.is_empty() {
        Vec::new()
    } else {
        model.outputs(schedule, &inputs)?
    };
    let rows = states
        .iter()
        .zip(&outputs)
        .map(|((label, rho), out)| {
            Ok(WitnessRow {
                label: label.clone(),
                oracle: oracle_of(rho)?,
                output: out.as_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let angles = sweep_angles();
    let family: Vec<DensityMatrix<T>> = angles
        .iter()
        .map(|&th| ghz_family(n, T::lit(th)))
        .collect::<Result<_>>()?;
    let refs: Vec<&DensityMatrix<T>> = family.iter().collect();
    let sweep_out = model.outputs(schedule, &refs)?;
    let sweep = angles
        .iter()
        .zip(&family)
        .zip(&sweep_out)
        .enumerate()
        .map(|(k, ((&th, rho), out))| {
            // 2|cos θ sin θ| is the monotone of the whole family
            let oracle = match oracle_of(rho)? {
                Some(c) => c,
                None => (2.0 * th).sin().abs(),
            };
            Ok(WitnessRow {
                label: format!("theta_{k}"),
                oracle: Some(oracle),
                output: out.as_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = sweep.iter().map(|r| r.output).collect();
    let ys: Vec<f64> = sweep.iter().filter_map(|r| r.oracle).collect();
    Ok(WitnessReport {
        rows,
        spearman: spearman(&xs, &ys),
        sweep,
    })
}
