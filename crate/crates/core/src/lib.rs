// SPDX-License-Identifier: Apache-2.0

//! Density-matrix simulation of small qubit registers under time-dependent
//! transverse-field Ising Hamiltonians, and training of the parameter
//! schedules so that a final-time measurement acts as an entanglement
//! witness.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod backprop;
pub mod circuit;
pub mod error;
pub mod model;
pub mod qcore;
pub mod report;
pub mod rl;
pub mod scalar;
pub mod schedules;
pub mod staging;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::{CMatrix, Real};

pub type DensityMatrix64 = qcore::DensityMatrix<f64>;
pub type Observable64 = qcore::Observable<f64>;
pub type HamiltonianParams64 = qcore::HamiltonianParams<f64>;
pub type TimeGrid64 = qcore::TimeGrid<f64>;
pub type Trajectory64 = qcore::Trajectory<f64>;
pub type ParameterSchedule64 = schedules::ParameterSchedule<f64>;
pub type TrainingPair64 = witness::TrainingPair<f64>;
pub type ContinuumModel64 = model::ContinuumModel<f64>;
pub type RlConfig64 = rl::RlConfig<f64>;
pub type BackpropConfig64 = backprop::BackpropConfig<f64>;

pub type DensityMatrix32 = qcore::DensityMatrix<f32>;
pub type ParameterSchedule32 = schedules::ParameterSchedule<f32>;
