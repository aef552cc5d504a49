//! Run parameters shared by the wave solver and the normalized solvers.

use std::sync::Arc;

use crate::grid::SpectralGrid;
use crate::{LabError, Result};

/// Parameters of one evolution run. `r` selects the normalized model order;
/// the wave solver ignores it.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub c: f64,
    pub lambda: f64,
    pub l: u32,
    pub r: usize,
    pub dt: f64,
    pub t_end: f64,
    pub sobolev_k: f64,
    pub grid: Arc<SpectralGrid>,
    /// lifts the dt * c^2 <= 0.5 step cap; accuracy is then the caller's
    /// problem
    pub dt_override: bool,
}

impl SimParams {
    pub fn new(c: f64, lambda: f64, l: u32, r: usize, grid: Arc<SpectralGrid>) -> Self {
        SimParams {
            c,
            lambda,
            l,
            r,
            dt: 1e-3,
            t_end: 1.0,
            sobolev_k: 4.0,
            grid,
            dt_override: false,
        }
    }

    pub fn with_time(mut self, dt: f64, t_end: f64) -> Self {
        self.dt = dt;
        self.t_end = t_end;
        self
    }

    pub fn with_sobolev(mut self, k: f64) -> Self {
        self.sobolev_k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(LabError::config(format!("c must be >= 1, got {}", self.c)));
        }
        if !self.lambda.is_finite() {
            return Err(LabError::config("lambda must be finite"));
        }
        if self.l < 2 || self.l > 8 {
            return Err(LabError::config(format!(
                "nonlinearity exponent l must lie in 2..=8, got {}",
                self.l
            )));
        }
        if !(self.r == 1 || self.r == 2) {
            return Err(LabError::config(format!(
                "normalized order r must be 1 or 2, got {}",
                self.r
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(LabError::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(LabError::config(format!(
                "t_end must be > 0, got {}",
                self.t_end
            )));
        }
        if !self.sobolev_k.is_finite() || self.sobolev_k < 0.0 {
            return Err(LabError::config(format!(
                "sobolev_k must be a finite value >= 0, got {}",
                self.sobolev_k
            )));
        }
        // the c^2 gauge beat is the fastest retained oscillation; a fixed
        // fraction of its period keeps stage errors below sampling noise
        let beat = self.dt * self.c * self.c;
        if beat > 0.5 + 1e-12 && !self.dt_override {
            return Err(LabError::config(format!(
                "dt * c^2 = {beat:.3e} exceeds 0.5; shrink dt or set dt_override"
            )));
        }
        Ok(())
    }

    /// Step count covering [0, t_end] with uniform dt; the horizon is
    /// matched by rounding, never by a partial step.
    pub fn n_steps(&self) -> u64 {
        ((self.t_end / self.dt).round() as u64).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<SpectralGrid> {
        SpectralGrid::new(1, 16, std::f64::consts::TAU).unwrap()
    }

    #[test]
    fn accepts_standard_run() {
        let p = SimParams::new(4.0, 1.0, 2, 1, grid()).with_time(1e-4, 1.0);
        p.validate().unwrap();
        assert_eq!(p.n_steps(), 10_000);
    }

    #[test]
    fn step_cap_enforced_and_overridable() {
        let mut p = SimParams::new(8.0, 1.0, 2, 1, grid()).with_time(0.01, 1.0);
        assert!(p.validate().is_err());
        p.dt_override = true;
        p.validate().unwrap();
    }

    #[test]
    fn rejects_bad_orders() {
        let mut p = SimParams::new(2.0, 1.0, 2, 3, grid());
        assert!(p.validate().is_err());
        p.r = 1;
        p.l = 1;
        assert!(p.validate().is_err());
    }
}
