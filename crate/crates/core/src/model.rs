// SPDX-License-Identifier: Apache-2.0

//! Maps from a parameter schedule and an input state to the scalar witness
//! output. The trainers only see this interface, so the same loop runs on the
//! continuum simulator and on the segmented shot-sampled circuit.

use crate::error::{Error, Result};
use crate::qcore::{apply_steps, output_value, step_propagators, DensityMatrix, Observable, OutputMap, TimeGrid};
use crate::scalar::Real;
use crate::schedules::ParameterSchedule;

pub trait WitnessModel<T: Real> {
    /// Outputs for every input under one schedule. Each input counts as one
    /// forward solve.
    fn outputs(&mut self, schedule: &ParameterSchedule<T>, inputs: &[&DensityMatrix<T>]) -> Result<Vec<T>>;

    fn output(&mut self, schedule: &ParameterSchedule<T>, input: &DensityMatrix<T>) -> Result<T> {
        Ok(self.outputs(schedule, &[input])?[0])
    }

    /// Forward solves performed so far.
    fn forward_solves(&self) -> usize;
}

/// Noiseless density-matrix evolution on a fixed grid followed by `f(tr(ρ O))`.
#[derive(Clone, Debug)]
pub struct ContinuumModel<T: Real> {
    pub observable: Observable<T>,
    pub map: OutputMap,
    pub grid: TimeGrid<T>,
    pub(crate) forward: usize,
    pub(crate) backward: usize,
}

impl<T: Real> ContinuumModel<T> {
    pub fn new(observable: Observable<T>, map: OutputMap, grid: TimeGrid<T>) -> Self {
        Self {
            observable,
            map,
            grid,
            forward: 0,
            backward: 0,
        }
    }

    /// Backward (adjoint) solves performed so far.
    pub fn backward_solves(&self) -> usize {
        self.backward
    }

    pub fn reset_counters(&mut self) {
        self.forward = 0;
        self.backward = 0;
    }
}

impl<T: Real> WitnessModel<T> for ContinuumModel<T> {
    fn outputs(&mut self, schedule: &ParameterSchedule<T>, inputs: &[&DensityMatrix<T>]) -> Result<Vec<T>> {
        let steps = step_propagators(schedule, &self.grid)?;
        inputs
            .iter()
            .map(|rho| {
                if rho.num_qubits() != schedule.num_qubits() {
                    return Err(Error::DimensionMismatch {
                        expected: schedule.num_qubits(),
                        found: rho.num_qubits(),
                    });
                }
                self.forward += 1;
                let out = apply_steps(rho, &steps);
                output_value(&out, &self.observable, self.map)
            })
            .collect()
    }

    fn forward_solves(&self) -> usize {
        self.forward
    }
}
