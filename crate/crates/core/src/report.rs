// SPDX-License-Identifier: Apache-2.0

//! Training logs and CSV exports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::qcore::qubit_pairs;
use crate::scalar::Real;
use crate::schedules::ParameterSchedule;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    /// 0 is the untrained starting point.
    pub epoch: usize,
    pub rms: f64,
    pub wall_seconds: f64,
    /// Forward solves spent on training updates during this epoch (the RMS
    /// evaluation is not included).
    #[serde(skip)]
    pub forward_solves: usize,
    #[serde(skip)]
    pub backward_solves: usize,
}

/// Per-epoch RMS error of a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochLog {
    pub records: Vec<EpochRecord>,
}

impl EpochLog {
    pub fn push(&mut self, record: EpochRecord) {
        self.records.push(record);
    }

    pub fn initial_rms(&self) -> Option<f64> {
        self.records.first().map(|r| r.rms)
    }

    pub fn final_rms(&self) -> Option<f64> {
        self.records.last().map(|r| r.rms)
    }

    pub fn rms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.rms).collect()
    }

    /// First epoch whose RMS is at or below `threshold`.
    pub fn epochs_to_reach(&self, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.rms <= threshold).map(|r| r.epoch)
    }

    /// Columns `epoch,rms,wall_seconds`. With `timing = false` the wall-clock
    /// column is written as 0 so that reruns are byte-identical.
    pub fn write_csv<W: Write>(&self, out: W, timing: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "rms", "wall_seconds"])?;
        for r in &self.records {
            let wall = if timing { r.wall_seconds } else { 0.0 };
            w.write_record([r.epoch.to_string(), format!("{:e}", r.rms), format!("{:.6}", wall)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, timing: bool) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?, timing)
    }
}

/// Column names of a parameter trace: `t`, `K_i`, `eps_i`, `zeta_ij`.
pub fn trace_header(num_qubits: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((0..num_qubits).map(|i| format!("K_{i}")));
    h.extend((0..num_qubits).map(|i| format!("eps_{i}")));
    h.extend(qubit_pairs(num_qubits).into_iter().map(|(i, j)| format!("zeta_{i}{j}")));
    h
}

/// Physical parameter values of `schedule` at `samples + 1` evenly spaced
/// times on `[0, T]`.
pub fn trace_rows<T: Real>(schedule: &ParameterSchedule<T>, samples: usize) -> Result<Vec<Vec<f64>>> {
    let samples = samples.max(1);
    let t_final = schedule.t_final();
    (0..=samples)
        .map(|k| {
            let t = if k == samples {
                t_final
            } else {
                t_final * T::from_usize(k).unwrap() / T::from_usize(samples).unwrap()
            };
            let p = schedule.eval(t)?;
            let mut row = vec![t.as_f64()];
            row.extend(p.tunneling.iter().chain(&p.bias).chain(&p.coupling).map(|v| v.as_f64()));
            Ok(row)
        })
        .collect()
}

/// Accumulates parameter snapshots taken during training.
#[derive(Clone, Debug, Default)]
pub struct TraceLog {
    pub num_qubits: usize,
    pub snapshots: Vec<(usize, Vec<Vec<f64>>)>,
}

impl TraceLog {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            snapshots: Vec::new(),
        }
    }

    pub fn record<T: Real>(&mut self, epoch: usize, schedule: &ParameterSchedule<T>, samples: usize) -> Result<()> {
        self.snapshots.push((epoch, trace_rows(schedule, samples)?));
        Ok(())
    }

    /// Columns `epoch,t,K_0,…,eps_0,…,zeta_01,…`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["epoch".to_string()];
        header.extend(trace_header(self.num_qubits));
        w.write_record(&header)?;
        for (epoch, rows) in &self.snapshots {
            for row in rows {
                let mut rec = vec![epoch.to_string()];
                rec.extend(row.iter().map(|v| format!("{v:e}")));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::PerKind;

    #[test]
    fn trace_header_for_three_qubits() {
        assert_eq!(
            trace_header(3),
            ["t", "K_0", "K_1", "K_2", "eps_0", "eps_1", "eps_2", "zeta_01", "zeta_02", "zeta_12"]
        );
    }

    #[test]
    fn epoch_csv_without_timing() {
        let mut log = EpochLog::default();
        for (epoch, rms) in [(0, 0.5), (1, 0.25)] {
            log.push(EpochRecord {
                epoch,
                rms,
                wall_seconds: 1.5,
                forward_solves: 0,
                backward_solves: 0,
            });
        }
        let mut buf = Vec::new();
        log.write_csv(&mut buf, false).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,rms,wall_seconds\n0,5e-1,0.000000\n1,2.5e-1,0.000000\n"
        );
        assert_eq!(log.epochs_to_reach(0.3), Some(1));
        assert_eq!(log.epochs_to_reach(0.1), None);
    }

    #[test]
    fn trace_rows_cover_the_domain() {
        let s = ParameterSchedule::<f64>::fourier(2, 100.0, 1, PerKind::splat(true), PerKind::new(1.0, 2.0, 3.0)).unwrap();
        let rows = trace_rows(&s, 4).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0], vec![0.0, 1.0, 1.0, 2.0, 2.0, 3.0]);
        assert_eq!(rows[4][0], 100.0);
    }
}
