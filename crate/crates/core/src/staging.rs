// SPDX-License-Identifier: Apache-2.0

//! Initializing a larger register from a trained smaller one.

use crate::error::{Error, Result};
use crate::qcore::{ParamKind, MAX_QUBITS};
use crate::scalar::Real;
use crate::schedules::ParameterSchedule;

/// Copies the trained `N`-qubit coefficients onto an `N+1`-qubit schedule.
/// Every qubit receives the tunneling and bias coefficients of qubit 0 (or
/// the shared set when tied) and every pair receives those of pair (0, 1).
/// Tying, final time and basis are kept.
pub fn stage_up<T: Real>(trained: &ParameterSchedule<T>) -> Result<ParameterSchedule<T>> {
    trained.validate()?;
    let n = trained.num_qubits();
    if n < 2 {
        return Err(Error::InvalidSchedule("staging needs a source with at least one coupled pair".into()));
    }
    if n + 1 > MAX_QUBITS {
        return Err(Error::UnsupportedQubitCount(n + 1));
    }
    let mut out = ParameterSchedule::zeros(n + 1, trained.t_final(), trained.basis(), trained.tying())?;
    for kind in ParamKind::ALL {
        let source = trained
            .site_coefficients(kind, 0)
            .ok_or_else(|| Error::InvalidSchedule(format!("no {} coefficients to copy", kind.name())))?
            .to_vec();
        for site in 0..out.stored_sites(kind) {
            *out.site_coefficients_mut(kind, site).expect("site in range") = source.clone();
        }
    }
    Ok(out)
}

/// Repeated [`stage_up`] until the schedule has `num_qubits` qubits.
pub fn stage_to<T: Real>(trained: &ParameterSchedule<T>, num_qubits: usize) -> Result<ParameterSchedule<T>> {
    if num_qubits <= trained.num_qubits() {
        return Err(Error::InvalidSchedule(format!(
            "target size {num_qubits} must exceed the source size {}",
            trained.num_qubits()
        )));
    }
    let mut s = stage_up(trained)?;
    while s.num_qubits() < num_qubits {
        s = stage_up(&s)?;
    }
    Ok(s)
}
