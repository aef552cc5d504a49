//! Sample-wise distance between two trajectories in a Sobolev norm.

use num_complex::Complex64;
use serde::Serialize;

use crate::integrator::Trajectory;
use crate::norms::sobolev_hk;
use crate::{LabError, Result};

const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct ErrorMetrics {
    pub sobolev_k: f64,
    pub times: Vec<f64>,
    pub error_series: Vec<f64>,
    pub sup_error: f64,
}

/// The two trajectories must share the grid layout and sample times.
pub fn error_metrics(a: &Trajectory, b: &Trajectory, k: f64) -> Result<ErrorMetrics> {
    if !a.params.grid.same_layout(&b.params.grid) {
        return Err(LabError::invalid(
            "error metrics need both trajectories on the same grid",
        ));
    }
    if a.fields.len() != b.fields.len() {
        return Err(LabError::invalid(format!(
            "sample count mismatch: {} vs {}",
            a.fields.len(),
            b.fields.len()
        )));
    }
    let mut times = Vec::with_capacity(a.times.len());
    let mut series = Vec::with_capacity(a.times.len());
    let mut sup = 0.0f64;
    for i in 0..a.fields.len() {
        let (ta, tb) = (a.times[i], b.times[i]);
        if (ta - tb).abs() > TIME_TOL * ta.abs().max(1.0) {
            return Err(LabError::invalid(format!(
                "sample times diverge at index {i}: {ta} vs {tb}"
            )));
        }
        let mut diff = a.fields[i].spectral_clone();
        diff.axpy(Complex64::new(-1.0, 0.0), &b.fields[i].spectral_clone());
        let e = sobolev_hk(&diff, k);
        sup = sup.max(e);
        times.push(ta);
        series.push(e);
    }
    Ok(ErrorMetrics {
        sobolev_k: k,
        times,
        error_series: series,
        sup_error: sup,
    })
}
