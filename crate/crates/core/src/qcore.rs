// SPDX-License-Identifier: Apache-2.0

//! Dense N-qubit states, observables, Hamiltonian assembly and forward
//! evolution of the density matrix.
//!
//! Basis states are indexed so that qubit 0 is the most significant bit,
//! i.e. operators are embedded as `A_0 ⊗ A_1 ⊗ … ⊗ A_{N-1}`. Units follow
//! ħ = 1 with angular frequencies in rad/ns and times in ns.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cplx, creal, hermiticity_defect, trace_product, CMatrix, Real};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 6;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;
const EXPECTATION_IMAG_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn qubit_mask(qubit: usize, num_qubits: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Index of the unordered pair `(i, j)`, `i < j`, in row-major upper-triangle
/// order: (0,1), (0,2), …, (0,N-1), (1,2), …
pub fn pair_index(i: usize, j: usize, num_qubits: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * (2 * num_qubits - a - 1) / 2 + (b - a - 1)
}

/// All qubit pairs in [`pair_index`] order.
pub fn qubit_pairs(num_qubits: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(num_qubits * num_qubits.saturating_sub(1) / 2);
    for i in 0..num_qubits {
        for j in i + 1..num_qubits {
            out.push((i, j));
        }
    }
    out
}

pub fn num_pairs(num_qubits: usize) -> usize {
    num_qubits * num_qubits.saturating_sub(1) / 2
}

fn dim_to_qubits(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!("dimension {dim} is not 2^N")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::UnsupportedQubitCount(n));
    }
    Ok(n)
}

fn check_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::UnsupportedQubitCount(num_qubits));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Hermitian operator on the register.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable<T: Real> {
    matrix: CMatrix<T>,
    label: String,
}

impl<T: Real> Observable<T> {
    pub fn new(matrix: CMatrix<T>, label: impl Into<String>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidObservable("matrix is not square".into()));
        }
        dim_to_qubits(matrix.nrows()).map_err(|e| Error::InvalidObservable(e.to_string()))?;
        let defect = hermiticity_defect(&matrix);
        if defect > T::tol(HERMITIAN_TOL) {
            return Err(Error::InvalidObservable(format!(
                "not Hermitian (defect {:e})",
                defect
            )));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    /// `σ_axis` on `qubit`, identity elsewhere.
    pub fn pauli(axis: Axis, qubit: usize, num_qubits: usize) -> Result<Self> {
        pauli_embed(axis, qubit, num_qubits)
    }

    /// `σ_z ⊗ σ_z` on qubits `a` and `b`.
    pub fn zz(a: usize, b: usize, num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        for q in [a, b] {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits,
                });
            }
        }
        if a == b {
            return Err(Error::InvalidObservable("zz needs two distinct qubits".into()));
        }
        let dim = 1 << num_qubits;
        let (ma, mb) = (qubit_mask(a, num_qubits), qubit_mask(b, num_qubits));
        let mut m = CMatrix::zeros(dim, dim);
        for s in 0..dim {
            let parity = ((s & ma) != 0) ^ ((s & mb) != 0);
            m[(s, s)] = creal(if parity { -T::one() } else { T::one() });
        }
        Ok(Self {
            matrix: m,
            label: format!("Z{a}Z{b}"),
        })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }
}

/// Embeds a single Pauli matrix on `qubit` of an `num_qubits` register.
pub fn pauli_embed<T: Real>(axis: Axis, qubit: usize, num_qubits: usize) -> Result<Observable<T>> {
    check_qubits(num_qubits)?;
    if qubit >= num_qubits {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            num_qubits,
        });
    }
    let dim = 1 << num_qubits;
    let mask = qubit_mask(qubit, num_qubits);
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let up = s & mask == 0;
        match axis {
            Axis::X => m[(s ^ mask, s)] = creal(T::one()),
            Axis::Y => {
                // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = −i|0⟩
                let v = if up { T::one() } else { -T::one() };
                m[(s ^ mask, s)] = cplx(T::zero(), v);
            }
            Axis::Z => m[(s, s)] = creal(if up { T::one() } else { -T::one() }),
        }
    }
    let name = match axis {
        Axis::X => "X",
        Axis::Y => "Y",
        Axis::Z => "Z",
    };
    Ok(Observable {
        matrix: m,
        label: format!("{name}{qubit}"),
    })
}

/// Positive semidefinite, unit-trace Hermitian state of an N-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: CMatrix<T>,
    num_qubits: usize,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let num_qubits = dim_to_qubits(matrix.nrows())?;
        let rho = Self { matrix, num_qubits };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix<T>) -> Self {
        let num_qubits = matrix.nrows().trailing_zeros() as usize;
        Self { matrix, num_qubits }
    }

    /// Pure state `|ψ⟩⟨ψ|`; the amplitudes are normalized.
    pub fn from_amplitudes(amplitudes: &[Complex<T>]) -> Result<Self> {
        let num_qubits = dim_to_qubits(amplitudes.len())?;
        let norm = amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |s, v| s + v)
            .sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero or non-finite norm".into()));
        }
        let psi = DVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|a| *a / creal(norm)),
        );
        let matrix = &psi * psi.adjoint();
        Ok(Self { matrix, num_qubits })
    }

    pub fn from_real_amplitudes(amplitudes: &[T]) -> Result<Self> {
        let amps: Vec<Complex<T>> = amplitudes.iter().map(|&a| creal(a)).collect();
        Self::from_amplitudes(&amps)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1 << num_qubits;
        if index >= dim {
            return Err(Error::InvalidState(format!("basis index {index} >= {dim}")));
        }
        let mut matrix = CMatrix::zeros(dim, dim);
        matrix[(index, index)] = creal(T::one());
        Ok(Self { matrix, num_qubits })
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1 << num_qubits;
        let w = T::one() / T::from_usize(dim).unwrap();
        Ok(Self {
            matrix: CMatrix::from_diagonal_element(dim, dim, creal(w)),
            num_qubits,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let defect = hermiticity_defect(&self.matrix);
        if defect > T::tol(HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (defect {:e})", defect)));
        }
        let tr = self.trace();
        if (tr - T::one()).abs() > T::tol(TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace {:e} != 1", tr)));
        }
        let min = self.min_eigenvalue();
        if min < -T::tol(PSD_TOL) {
            return Err(Error::InvalidState(format!("negative eigenvalue {:e}", min)));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> T {
        trace_product(&self.matrix, &self.matrix).re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let herm = (&self.matrix + self.matrix.adjoint()) * creal(T::lit(0.5));
        let mut ev: Vec<T> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().first().copied().unwrap_or_else(T::zero)
    }

    /// Populations of the computational basis states.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `U ρ U†`.
    pub fn conjugated(&self, unitary: &CMatrix<T>) -> Self {
        Self {
            matrix: conjugate(unitary, &self.matrix),
            num_qubits: self.num_qubits,
        }
    }
}

/// `u m u†`.
pub(crate) fn conjugate<T: Real>(u: &CMatrix<T>, m: &CMatrix<T>) -> CMatrix<T> {
    let um = u * m;
    um * u.adjoint()
}

/// `u† m u`.
pub(crate) fn conjugate_adjoint<T: Real>(u: &CMatrix<T>, m: &CMatrix<T>) -> CMatrix<T> {
    let m_u = m * u;
    u.adjoint() * m_u
}

/// Physical parameter families of the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    /// `K_i σ_x^(i)`
    Tunneling,
    /// `ε_i σ_z^(i)`
    Bias,
    /// `ζ_ij σ_z^(i) σ_z^(j)`
    Coupling,
}

impl ParamKind {
    pub const ALL: [ParamKind; 3] = [ParamKind::Tunneling, ParamKind::Bias, ParamKind::Coupling];

    /// Number of physical sites of this kind (qubits or pairs).
    pub fn sites(self, num_qubits: usize) -> usize {
        match self {
            ParamKind::Tunneling | ParamKind::Bias => num_qubits,
            ParamKind::Coupling => num_pairs(num_qubits),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamKind::Tunneling => "tunneling",
            ParamKind::Bias => "bias",
            ParamKind::Coupling => "coupling",
        }
    }
}

/// Instantaneous Hamiltonian weights: tunneling `K_i`, bias `ε_i` and the
/// symmetric, zero-diagonal coupling `ζ_ij` (stored as the upper triangle).
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianParams<T: Real> {
    pub tunneling: Vec<T>,
    pub bias: Vec<T>,
    pub coupling: Vec<T>,
}

impl<T: Real> HamiltonianParams<T> {
    pub fn zeros(num_qubits: usize) -> Self {
        Self {
            tunneling: vec![T::zero(); num_qubits],
            bias: vec![T::zero(); num_qubits],
            coupling: vec![T::zero(); num_pairs(num_qubits)],
        }
    }

    pub fn uniform(num_qubits: usize, tunneling: T, bias: T, coupling: T) -> Self {
        Self {
            tunneling: vec![tunneling; num_qubits],
            bias: vec![bias; num_qubits],
            coupling: vec![coupling; num_pairs(num_qubits)],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.tunneling.len()
    }

    /// `ζ_ij`; zero on the diagonal.
    pub fn coupling(&self, i: usize, j: usize) -> T {
        if i == j {
            T::zero()
        } else {
            self.coupling[pair_index(i, j, self.num_qubits())]
        }
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, value: T) -> Result<()> {
        if i == j {
            return Err(Error::InvalidParams("self-coupling must stay zero".into()));
        }
        let n = self.num_qubits();
        if i >= n || j >= n {
            return Err(Error::QubitOutOfRange {
                index: i.max(j),
                num_qubits: n,
            });
        }
        self.coupling[pair_index(i, j, n)] = value;
        Ok(())
    }

    pub fn values(&self, kind: ParamKind) -> &[T] {
        match kind {
            ParamKind::Tunneling => &self.tunneling,
            ParamKind::Bias => &self.bias,
            ParamKind::Coupling => &self.coupling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits();
        check_qubits(n)?;
        if self.bias.len() != n || self.coupling.len() != num_pairs(n) {
            return Err(Error::InvalidParams(format!(
                "inconsistent lengths: {} tunneling, {} bias, {} couplings",
                n,
                self.bias.len(),
                self.coupling.len()
            )));
        }
        let all = self.tunneling.iter().chain(&self.bias).chain(&self.coupling);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite entry".into()));
        }
        Ok(())
    }
}

/// Time-dependent source of Hamiltonian parameters.
pub trait HamiltonianSchedule<T: Real> {
    fn num_qubits(&self) -> usize;
    fn params_at(&self, t: T) -> Result<HamiltonianParams<T>>;
}

/// A constant parameter set is a valid schedule at every time.
impl<T: Real> HamiltonianSchedule<T> for HamiltonianParams<T> {
    fn num_qubits(&self) -> usize {
        HamiltonianParams::num_qubits(self)
    }

    fn params_at(&self, _t: T) -> Result<HamiltonianParams<T>> {
        Ok(self.clone())
    }
}

/// Uniform grid `t_k = k T / M`, `k = 0..=M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T: Real> {
    t_final: T,
    steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_final: T, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidGrid("step count must be >= 1".into()));
        }
        if !(t_final > T::zero()) || !t_final.is_finite() {
            return Err(Error::InvalidGrid(format!("final time {:e} must be > 0", t_final)));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> T {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.t_final / T::from_usize(self.steps).unwrap()
    }

    pub fn time(&self, k: usize) -> T {
        if k == self.steps {
            return self.t_final;
        }
        self.t_final * T::from_usize(k).unwrap() / T::from_usize(self.steps).unwrap()
    }

    /// `t_k + Δt/2`.
    pub fn midpoint(&self, k: usize) -> T {
        let two = T::lit(2.0);
        self.t_final * T::from_usize(2 * k + 1).unwrap() / (two * T::from_usize(self.steps).unwrap())
    }
}

/// Real symmetric matrix of the Hamiltonian
/// `Σ K_i σ_x^(i) + Σ ε_i σ_z^(i) + Σ_{i<j} ζ_ij σ_z^(i) σ_z^(j)`.
pub fn hamiltonian_matrix<T: Real>(p: &HamiltonianParams<T>) -> DMatrix<T> {
    let n = p.num_qubits();
    let dim = 1usize << n;
    let pairs = qubit_pairs(n);
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let z = |q: usize| {
            if s & qubit_mask(q, n) == 0 {
                T::one()
            } else {
                -T::one()
            }
        };
        let mut diag = T::zero();
        for q in 0..n {
            diag += p.bias[q] * z(q);
            h[(s ^ qubit_mask(q, n), s)] = p.tunneling[q];
        }
        for (idx, &(i, j)) in pairs.iter().enumerate() {
            diag += p.coupling[idx] * z(i) * z(j);
        }
        h[(s, s)] = diag;
    }
    h
}

pub fn build_hamiltonian<T: Real>(p: &HamiltonianParams<T>) -> Result<Observable<T>> {
    p.validate()?;
    let h = hamiltonian_matrix(p).map(creal);
    Ok(Observable {
        matrix: h,
        label: "H".into(),
    })
}

/// `∂H/∂p` for a single physical parameter (a Pauli string, real).
pub fn generator_matrix<T: Real>(kind: ParamKind, site: usize, num_qubits: usize) -> Result<DMatrix<T>> {
    check_qubits(num_qubits)?;
    let sites = kind.sites(num_qubits);
    if site >= sites {
        return Err(Error::InvalidCoefficient(format!(
            "{} site {site} out of range ({sites} sites)",
            kind.name()
        )));
    }
    let mut p = HamiltonianParams::zeros(num_qubits);
    match kind {
        ParamKind::Tunneling => p.tunneling[site] = T::one(),
        ParamKind::Bias => p.bias[site] = T::one(),
        ParamKind::Coupling => p.coupling[site] = T::one(),
    }
    Ok(hamiltonian_matrix(&p))
}

/// One midpoint step: `U = exp(-i H Δt)` together with the eigensystem of `H`.
#[derive(Clone, Debug)]
pub struct StepPropagator<T: Real> {
    pub unitary: CMatrix<T>,
    pub energies: DVector<T>,
    pub eigenvectors: DMatrix<T>,
    pub dt: T,
}

impl<T: Real> StepPropagator<T> {
    pub fn new(h: DMatrix<T>, dt: T) -> Result<Self> {
        let eig = SymmetricEigen::try_new(h, T::default_epsilon(), 10_000).ok_or(Error::Eigendecomposition)?;
        let v = eig.eigenvectors;
        let energies = eig.eigenvalues;
        let dim = v.nrows();
        let phases: Vec<Complex<T>> = energies
            .iter()
            .map(|&e| {
                let theta = -e * dt;
                cplx(theta.cos(), theta.sin())
            })
            .collect();
        let mut unitary = CMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut acc = creal(T::zero());
                for (k, ph) in phases.iter().enumerate() {
                    acc += *ph * (v[(a, k)] * v[(b, k)]);
                }
                unitary[(a, b)] = acc;
            }
        }
        Ok(Self {
            unitary,
            energies,
            eigenvectors: v,
            dt,
        })
    }
}

/// Per-step propagators of `schedule` sampled at the grid midpoints.
pub fn step_propagators<T: Real, S: HamiltonianSchedule<T> + ?Sized>(
    schedule: &S,
    grid: &TimeGrid<T>,
) -> Result<Vec<StepPropagator<T>>> {
    let dt = grid.dt();
    (0..grid.steps())
        .map(|k| {
            let p = schedule.params_at(grid.midpoint(k))?;
            p.validate()?;
            StepPropagator::new(hamiltonian_matrix(&p), dt)
        })
        .collect()
}

/// Forward solution `ρ(t_k)`, `k = 0..=M`, with the step propagators that
/// produced it.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    grid: TimeGrid<T>,
    states: Vec<CMatrix<T>>,
    steps: Vec<StepPropagator<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn states(&self) -> &[CMatrix<T>] {
        &self.states
    }

    pub fn state(&self, k: usize) -> DensityMatrix<T> {
        DensityMatrix::from_matrix_unchecked(self.states[k].clone())
    }

    pub fn final_state(&self) -> DensityMatrix<T> {
        self.state(self.grid.steps())
    }

    pub fn propagators(&self) -> &[StepPropagator<T>] {
        &self.steps
    }
}

/// Applies precomputed step propagators to `rho0`, keeping every state.
pub fn propagate<T: Real>(
    rho0: &DensityMatrix<T>,
    steps: Vec<StepPropagator<T>>,
    grid: TimeGrid<T>,
) -> Result<Trajectory<T>> {
    if steps.len() != grid.steps() {
        return Err(Error::InvalidGrid(format!(
            "{} propagators for {} steps",
            steps.len(),
            grid.steps()
        )));
    }
    let mut states = Vec::with_capacity(steps.len() + 1);
    states.push(rho0.matrix().clone());
    for step in &steps {
        if step.unitary.nrows() != rho0.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho0.dim(),
                found: step.unitary.nrows(),
            });
        }
        let next = conjugate(&step.unitary, states.last().unwrap());
        states.push(next);
    }
    Ok(Trajectory { grid, states, steps })
}

/// Evolves `rho0` under `schedule` with midpoint-sampled exact step
/// exponentials: `ρ(t_{k+1}) = U_k ρ(t_k) U_k†`.
pub fn evolve<T: Real, S: HamiltonianSchedule<T> + ?Sized>(
    rho0: &DensityMatrix<T>,
    schedule: &S,
    grid: &TimeGrid<T>,
) -> Result<Trajectory<T>> {
    check_schedule_dim(rho0, schedule)?;
    let steps = step_propagators(schedule, grid)?;
    propagate(rho0, steps, *grid)
}

/// Final state only; the arithmetic matches [`evolve`] step for step.
pub fn evolve_final<T: Real, S: HamiltonianSchedule<T> + ?Sized>(
    rho0: &DensityMatrix<T>,
    schedule: &S,
    grid: &TimeGrid<T>,
) -> Result<DensityMatrix<T>> {
    check_schedule_dim(rho0, schedule)?;
    let steps = step_propagators(schedule, grid)?;
    Ok(apply_steps(rho0, &steps))
}

pub(crate) fn apply_steps<T: Real>(rho0: &DensityMatrix<T>, steps: &[StepPropagator<T>]) -> DensityMatrix<T> {
    let mut rho = rho0.matrix().clone();
    for step in steps {
        rho = conjugate(&step.unitary, &rho);
    }
    DensityMatrix::from_matrix_unchecked(rho)
}

fn check_schedule_dim<T: Real, S: HamiltonianSchedule<T> + ?Sized>(
    rho0: &DensityMatrix<T>,
    schedule: &S,
) -> Result<()> {
    if schedule.num_qubits() != rho0.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: rho0.num_qubits(),
            found: schedule.num_qubits(),
        });
    }
    Ok(())
}

/// `Re tr(ρ O)`; fails when the imaginary part exceeds round-off.
pub fn expectation<T: Real>(rho: &DensityMatrix<T>, observable: &Observable<T>) -> Result<T> {
    if rho.dim() != observable.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: observable.dim(),
        });
    }
    let tr = trace_product(rho.matrix(), observable.matrix());
    if tr.im.abs() > T::tol(EXPECTATION_IMAG_TOL) {
        return Err(Error::NonRealExpectation(tr.im.as_f64()));
    }
    Ok(tr.re)
}

/// Scalar function applied to the final-time measurement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMap {
    Identity,
    #[default]
    Square,
}

impl OutputMap {
    pub fn apply<T: Real>(self, x: T) -> T {
        match self {
            OutputMap::Identity => x,
            OutputMap::Square => x * x,
        }
    }

    pub fn derivative<T: Real>(self, x: T) -> T {
        match self {
            OutputMap::Identity => T::one(),
            OutputMap::Square => T::lit(2.0) * x,
        }
    }
}

/// `f(tr(ρ O))`.
pub fn output_value<T: Real>(rho: &DensityMatrix<T>, observable: &Observable<T>, map: OutputMap) -> Result<T> {
    Ok(map.apply(expectation(rho, observable)?))
}
