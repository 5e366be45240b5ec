// SPDX-License-Identifier: Apache-2.0

//! Time-dependent Hamiltonian weights.
//!
//! Every physical parameter `P(t)` (each `K_i`, `ε_i`, `ζ_ij`) is a linear
//! combination of fixed basis functions of time:
//!
//! * Fourier: `P(t) = P_0 + Σ_{n=1..n_max} [S_n sin(nπt/T) + C_n cos(nπt/T)]`
//! * piecewise constant: `P(t) = w_s` on segment `s = ⌊t S / T⌋`
//!
//! Coefficients of a kind can be *tied*, in which case one coefficient set
//! drives every site of that kind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{num_pairs, HamiltonianParams, HamiltonianSchedule, ParamKind, MAX_QUBITS};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Basis {
    Fourier { n_max: usize },
    Piecewise { segments: usize },
}

impl Basis {
    /// Coefficients per physical parameter.
    pub fn len(self) -> usize {
        match self {
            Basis::Fourier { n_max } => 1 + 2 * n_max,
            Basis::Piecewise { segments } => segments,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn term(self, index: usize) -> Option<Term> {
        match self {
            Basis::Fourier { n_max } => match index {
                0 => Some(Term::Constant),
                i if i <= n_max => Some(Term::Sin(i)),
                i if i <= 2 * n_max => Some(Term::Cos(i - n_max)),
                _ => None,
            },
            Basis::Piecewise { segments } => (index < segments).then_some(Term::Segment(index)),
        }
    }

    pub fn index_of(self, term: Term) -> Option<usize> {
        match (self, term) {
            (Basis::Fourier { .. }, Term::Constant) => Some(0),
            (Basis::Fourier { n_max }, Term::Sin(n)) if (1..=n_max).contains(&n) => Some(n),
            (Basis::Fourier { n_max }, Term::Cos(n)) if (1..=n_max).contains(&n) => Some(n_max + n),
            (Basis::Piecewise { segments }, Term::Segment(s)) if s < segments => Some(s),
            _ => None,
        }
    }
}

/// One basis function of a parameter expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Constant,
    Sin(usize),
    Cos(usize),
    Segment(usize),
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Term::Constant => write!(f, "P0"),
            Term::Sin(n) => write!(f, "S{n}"),
            Term::Cos(n) => write!(f, "C{n}"),
            Term::Segment(s) => write!(f, "w{s}"),
        }
    }
}

/// Addresses a single stored coefficient. Under tying the only valid site
/// of that kind is 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoefficientId {
    pub kind: ParamKind,
    pub site: usize,
    pub term: Term,
}

impl CoefficientId {
    pub fn new(kind: ParamKind, site: usize, term: Term) -> Self {
        Self { kind, site, term }
    }
}

impl std::fmt::Display for CoefficientId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}[{}].{}", self.kind.name(), self.site, self.term)
    }
}

/// A value per parameter kind (learning rates, perturbation floors, …).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerKind<T> {
    pub tunneling: T,
    pub bias: T,
    pub coupling: T,
}

impl<T: Copy> PerKind<T> {
    pub fn new(tunneling: T, bias: T, coupling: T) -> Self {
        Self {
            tunneling,
            bias,
            coupling,
        }
    }

    pub fn splat(v: T) -> Self {
        Self::new(v, v, v)
    }

    pub fn get(&self, kind: ParamKind) -> T {
        match kind {
            ParamKind::Tunneling => self.tunneling,
            ParamKind::Bias => self.bias,
            ParamKind::Coupling => self.coupling,
        }
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> PerKind<U> {
        PerKind {
            tunneling: f(self.tunneling),
            bias: f(self.bias),
            coupling: f(self.coupling),
        }
    }
}

pub type Tying = PerKind<bool>;

/// Trainable time dependence of all Hamiltonian parameters of a register.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSchedule<T: Real> {
    num_qubits: usize,
    t_final: T,
    basis: Basis,
    tying: Tying,
    // [kind][stored site][basis index]
    coeffs: [Vec<Vec<T>>; 3],
}

fn kind_slot(kind: ParamKind) -> usize {
    match kind {
        ParamKind::Tunneling => 0,
        ParamKind::Bias => 1,
        ParamKind::Coupling => 2,
    }
}

impl<T: Real> ParameterSchedule<T> {
    /// Schedule with every coefficient zero.
    pub fn zeros(num_qubits: usize, t_final: T, basis: Basis, tying: Tying) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::UnsupportedQubitCount(num_qubits));
        }
        if !(t_final > T::zero()) || !t_final.is_finite() {
            return Err(Error::InvalidSchedule(format!("final time {:e} must be > 0", t_final)));
        }
        if let Basis::Piecewise { segments: 0 } = basis {
            return Err(Error::InvalidSchedule("segment count must be >= 1".into()));
        }
        let coeffs = ParamKind::ALL.map(|kind| {
            let sites = stored_sites(kind, num_qubits, tying.get(kind));
            vec![vec![T::zero(); basis.len()]; sites]
        });
        Ok(Self {
            num_qubits,
            t_final,
            basis,
            tying,
            coeffs,
        })
    }

    /// Fourier schedule whose constant terms hold `initial` and whose sine
    /// and cosine terms start at zero.
    pub fn fourier(num_qubits: usize, t_final: T, n_max: usize, tying: Tying, initial: PerKind<T>) -> Result<Self> {
        let mut s = Self::zeros(num_qubits, t_final, Basis::Fourier { n_max }, tying)?;
        for kind in ParamKind::ALL {
            for site in s.coeffs[kind_slot(kind)].iter_mut() {
                site[0] = initial.get(kind);
            }
        }
        Ok(s)
    }

    /// Piecewise-constant schedule with every segment set to `initial`.
    pub fn piecewise(num_qubits: usize, t_final: T, segments: usize, tying: Tying, initial: PerKind<T>) -> Result<Self> {
        let mut s = Self::zeros(num_qubits, t_final, Basis::Piecewise { segments }, tying)?;
        for kind in ParamKind::ALL {
            for site in s.coeffs[kind_slot(kind)].iter_mut() {
                site.iter_mut().for_each(|v| *v = initial.get(kind));
            }
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn t_final(&self) -> T {
        self.t_final
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn tying(&self) -> Tying {
        self.tying
    }

    /// Number of independent coefficient sets stored for `kind`.
    pub fn stored_sites(&self, kind: ParamKind) -> usize {
        self.coeffs[kind_slot(kind)].len()
    }

    /// Coefficients of one stored site in basis order.
    pub fn site_coefficients(&self, kind: ParamKind, site: usize) -> Option<&[T]> {
        self.coeffs[kind_slot(kind)].get(site).map(|v| v.as_slice())
    }

    pub(crate) fn site_coefficients_mut(&mut self, kind: ParamKind, site: usize) -> Option<&mut Vec<T>> {
        self.coeffs[kind_slot(kind)].get_mut(site)
    }

    fn locate(&self, id: &CoefficientId) -> Result<(usize, usize, usize)> {
        let slot = kind_slot(id.kind);
        let sites = self.coeffs[slot].len();
        if id.site >= sites {
            return Err(Error::InvalidCoefficient(format!(
                "{id}: site out of range ({sites} stored sites)"
            )));
        }
        let idx = self
            .basis
            .index_of(id.term)
            .ok_or_else(|| Error::InvalidCoefficient(format!("{id}: term not in basis {:?}", self.basis)))?;
        Ok((slot, id.site, idx))
    }

    pub fn get(&self, id: &CoefficientId) -> Result<T> {
        let (k, s, i) = self.locate(id)?;
        Ok(self.coeffs[k][s][i])
    }

    pub fn set(&mut self, id: &CoefficientId, value: T) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidCoefficient(format!("{id}: non-finite value")));
        }
        let (k, s, i) = self.locate(id)?;
        self.coeffs[k][s][i] = value;
        Ok(())
    }

    /// Copy with one coefficient replaced.
    pub fn with(&self, id: &CoefficientId, value: T) -> Result<Self> {
        let mut out = self.clone();
        out.set(id, value)?;
        Ok(out)
    }

    /// Every stored coefficient in canonical order (kind, site, basis).
    pub fn coefficient_ids(&self) -> Vec<CoefficientId> {
        let mut out = Vec::new();
        for kind in ParamKind::ALL {
            for site in 0..self.stored_sites(kind) {
                for idx in 0..self.basis.len() {
                    out.push(CoefficientId::new(kind, site, self.basis.term(idx).unwrap()));
                }
            }
        }
        out
    }

    /// Physical sites driven by stored `site` of `kind`.
    pub fn physical_sites(&self, kind: ParamKind, site: usize) -> Vec<usize> {
        let total = kind.sites(self.num_qubits);
        if self.tying.get(kind) {
            (0..total).collect()
        } else if site < total {
            vec![site]
        } else {
            Vec::new()
        }
    }

    fn check_time(&self, t: T) -> Result<()> {
        if !(t >= T::zero() && t <= self.t_final) {
            return Err(Error::TimeOutOfRange {
                t: t.as_f64(),
                t_final: self.t_final.as_f64(),
            });
        }
        Ok(())
    }

    /// Values of every basis function at `t`, in basis order.
    pub fn basis_row(&self, t: T) -> Result<Vec<T>> {
        self.check_time(t)?;
        Ok(match self.basis {
            Basis::Fourier { n_max } => {
                let phase = T::pi() * t / self.t_final;
                let mut row = Vec::with_capacity(1 + 2 * n_max);
                row.push(T::one());
                for n in 1..=n_max {
                    row.push((T::from_usize(n).unwrap() * phase).sin());
                }
                for n in 1..=n_max {
                    row.push((T::from_usize(n).unwrap() * phase).cos());
                }
                row
            }
            Basis::Piecewise { segments } => {
                let mut row = vec![T::zero(); segments];
                row[self.segment_at(t)] = T::one();
                row
            }
        })
    }

    /// Segment containing `t`; `t = T` belongs to the last segment.
    pub fn segment_at(&self, t: T) -> usize {
        let segments = match self.basis {
            Basis::Piecewise { segments } => segments,
            Basis::Fourier { .. } => 1,
        };
        let s = (t * T::from_usize(segments).unwrap() / self.t_final).floor();
        s.to_usize().unwrap_or(0).min(segments - 1)
    }

    /// `∂P(t)/∂coefficient`.
    pub fn basis_value(&self, id: &CoefficientId, t: T) -> Result<T> {
        let (_, _, idx) = self.locate(id)?;
        Ok(self.basis_row(t)?[idx])
    }

    /// Physical parameters at time `t`.
    pub fn eval(&self, t: T) -> Result<HamiltonianParams<T>> {
        let row = self.basis_row(t)?;
        let dot = |c: &[T]| c.iter().zip(&row).fold(T::zero(), |acc, (a, b)| acc + *a * *b);
        let mut p = HamiltonianParams::zeros(self.num_qubits);
        for kind in ParamKind::ALL {
            let stored = &self.coeffs[kind_slot(kind)];
            let target = match kind {
                ParamKind::Tunneling => &mut p.tunneling,
                ParamKind::Bias => &mut p.bias,
                ParamKind::Coupling => &mut p.coupling,
            };
            if self.tying.get(kind) {
                if let Some(shared) = stored.first() {
                    let v = dot(shared);
                    target.iter_mut().for_each(|x| *x = v);
                }
            } else {
                for (x, c) in target.iter_mut().zip(stored) {
                    *x = dot(c);
                }
            }
        }
        Ok(p)
    }

    /// Trainable coefficients in canonical order, skipping kinds whose
    /// learning rate is zero.
    pub fn list_trainable(&self, rates: &PerKind<T>) -> Vec<CoefficientId> {
        self.coefficient_ids()
            .into_iter()
            .filter(|id| rates.get(id.kind) != T::zero())
            .collect()
    }

    /// Same schedule with another final time; coefficients are untouched.
    pub fn with_t_final(&self, t_final: T) -> Result<Self> {
        if !(t_final > T::zero()) {
            return Err(Error::InvalidSchedule("final time must be > 0".into()));
        }
        let mut out = self.clone();
        out.t_final = t_final;
        Ok(out)
    }

    /// Values of `K_i`, `ε_i`, `ζ_ij` sampled at each time.
    pub fn trace(&self, times: &[T]) -> Result<Vec<HamiltonianParams<T>>> {
        times.iter().map(|&t| self.eval(t)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for kind in ParamKind::ALL {
            let expect = stored_sites(kind, self.num_qubits, self.tying.get(kind));
            let stored = &self.coeffs[kind_slot(kind)];
            if stored.len() != expect {
                return Err(Error::InvalidSchedule(format!(
                    "{}: {} coefficient sets, expected {expect}",
                    kind.name(),
                    stored.len()
                )));
            }
            for c in stored {
                if c.len() != self.basis.len() {
                    return Err(Error::InvalidSchedule(format!(
                        "{}: {} coefficients, expected {}",
                        kind.name(),
                        c.len(),
                        self.basis.len()
                    )));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSchedule(format!("{}: non-finite coefficient", kind.name())));
                }
            }
        }
        Ok(())
    }
}

impl<T: Real> HamiltonianSchedule<T> for ParameterSchedule<T> {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn params_at(&self, t: T) -> Result<HamiltonianParams<T>> {
        self.eval(t)
    }
}

fn stored_sites(kind: ParamKind, num_qubits: usize, tied: bool) -> usize {
    let total = match kind {
        ParamKind::Coupling => num_pairs(num_qubits),
        _ => num_qubits,
    };
    if tied {
        total.min(1)
    } else {
        total
    }
}

// ---------------------------------------------------------------------------
// JSON file format

/// On-disk schedule document.
///
/// ```json
/// { "mode": "fourier", "num_qubits": 2, "T": 1000.0, "n_max": 3,
///   "tying": { "tunneling": true, "bias": true, "coupling": true },
///   "coefficients": {
///     "tunneling": [ { "P0": 2.5e-3, "S": [0, 0, 0], "C": [0, 0, 0] } ],
///     "bias": [ ... ], "coupling": [ ... ] } }
/// ```
///
/// Piecewise documents use `"mode": "piecewise"`, `"segments": S` and one
/// array of `S` segment values per stored site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub mode: String,
    pub num_qubits: usize,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    pub tying: Tying,
    pub coefficients: KindCoefficients,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindCoefficients {
    pub tunneling: Vec<SiteCoefficients>,
    pub bias: Vec<SiteCoefficients>,
    pub coupling: Vec<SiteCoefficients>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteCoefficients {
    Fourier {
        #[serde(rename = "P0")]
        constant: f64,
        #[serde(rename = "S")]
        sin: Vec<f64>,
        #[serde(rename = "C")]
        cos: Vec<f64>,
    },
    Piecewise(Vec<f64>),
}

impl<T: Real> ParameterSchedule<T> {
    pub fn to_file(&self) -> ScheduleFile {
        let site = |c: &Vec<T>| match self.basis {
            Basis::Fourier { n_max } => SiteCoefficients::Fourier {
                constant: c[0].as_f64(),
                sin: c[1..=n_max].iter().map(|v| v.as_f64()).collect(),
                cos: c[n_max + 1..].iter().map(|v| v.as_f64()).collect(),
            },
            Basis::Piecewise { .. } => SiteCoefficients::Piecewise(c.iter().map(|v| v.as_f64()).collect()),
        };
        let kind = |k: ParamKind| self.coeffs[kind_slot(k)].iter().map(site).collect();
        let (mode, n_max, segments) = match self.basis {
            Basis::Fourier { n_max } => ("fourier", Some(n_max), None),
            Basis::Piecewise { segments } => ("piecewise", None, Some(segments)),
        };
        ScheduleFile {
            mode: mode.into(),
            num_qubits: self.num_qubits,
            t_final: self.t_final.as_f64(),
            n_max,
            segments,
            tying: self.tying,
            coefficients: KindCoefficients {
                tunneling: kind(ParamKind::Tunneling),
                bias: kind(ParamKind::Bias),
                coupling: kind(ParamKind::Coupling),
            },
        }
    }

    pub fn from_file(file: &ScheduleFile) -> Result<Self> {
        let basis = match (file.mode.as_str(), file.n_max, file.segments) {
            ("fourier", Some(n_max), _) => Basis::Fourier { n_max },
            ("piecewise", _, Some(segments)) => Basis::Piecewise { segments },
            ("fourier", None, _) => return Err(Error::InvalidSchedule("fourier schedule needs n_max".into())),
            ("piecewise", _, None) => return Err(Error::InvalidSchedule("piecewise schedule needs segments".into())),
            (m, _, _) => return Err(Error::InvalidSchedule(format!("unknown mode {m:?}"))),
        };
        let t_final = T::from_f64(file.t_final).ok_or_else(|| Error::InvalidSchedule("bad T".into()))?;
        let mut s = Self::zeros(file.num_qubits, t_final, basis, file.tying)?;
        let lit = |v: f64| T::from_f64(v).ok_or_else(|| Error::InvalidSchedule("bad coefficient".into()));
        let sources = [
            &file.coefficients.tunneling,
            &file.coefficients.bias,
            &file.coefficients.coupling,
        ];
        for (slot, (src, dst)) in sources.into_iter().zip(s.coeffs.iter_mut()).enumerate() {
            let name = ParamKind::ALL[slot].name();
            if src.len() != dst.len() {
                return Err(Error::InvalidSchedule(format!(
                    "{name}: {} coefficient sets, expected {}",
                    src.len(),
                    dst.len()
                )));
            }
            for (site, out) in src.iter().zip(dst.iter_mut()) {
                let flat: Vec<f64> = match (site, basis) {
                    (SiteCoefficients::Fourier { constant, sin, cos }, Basis::Fourier { n_max }) => {
                        if sin.len() != n_max || cos.len() != n_max {
                            return Err(Error::InvalidSchedule(format!(
                                "{name}: expected {n_max} sine and cosine terms"
                            )));
                        }
                        std::iter::once(*constant).chain(sin.iter().copied()).chain(cos.iter().copied()).collect()
                    }
                    (SiteCoefficients::Piecewise(v), Basis::Piecewise { segments }) => {
                        if v.len() != segments {
                            return Err(Error::InvalidSchedule(format!("{name}: expected {segments} segment values")));
                        }
                        v.clone()
                    }
                    _ => return Err(Error::InvalidSchedule(format!("{name}: coefficient layout does not match mode"))),
                };
                *out = flat.into_iter().map(lit).collect::<Result<_>>()?;
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScheduleFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
