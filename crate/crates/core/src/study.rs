//! c-sweep orchestration: one seeded datum shape, rescaled per speed,
//! run through both the wave solver and the slow flow, with log-log
//! slope fits of the mismatch.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::StudyConfig;
use crate::errmetrics::error_metrics;
use crate::field::random_smooth;
use crate::grid::SpectralGrid;
use crate::nlkg::nlkg_evolve;
use crate::normalized::normalized_evolve;
use crate::norms::sobolev_hk;
use crate::params::SimParams;
use crate::thresholds::{smallness_thresholds, Feasibility, Smallness};
use crate::transform::build_approximate;
use crate::{LabError, Result};

/// spectral falloff of the shared datum shape. The symbol-truncation
/// error carries a (xi^2/c^2)^3 correction past the quartic model, so
/// the sweep only shows the clean quadratic rate once the datum's
/// error-weighted content sits well below xi = c at the smallest speed;
/// this falloff parks it on the first spectral shell.
const DATUM_DECAY: f64 = 4.0;
const TARGET_SAMPLES: u64 = 64;

#[derive(Debug, Clone, Serialize)]
pub struct PerCRecord {
    pub c: f64,
    pub seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub samples: usize,
    pub sup_error_theorem: f64,
    pub sup_error_transformed: f64,
    pub energy_drift_wave: f64,
    pub energy_drift_slow: f64,
    pub hk_start: f64,
    pub hk_end_wave: f64,
    pub hk_end_slow: f64,
    pub l2_start: f64,
    pub truncated: bool,
    pub feasibility: Option<Feasibility>,
    pub wall_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    /// data points used (c, sup_error)
    pub points: usize,
    pub slope_raw: f64,
    pub intercept: f64,
    /// slope_raw + alpha: the datum scale taken back out
    pub slope_normalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvStamp {
    pub package_version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
    pub threads: usize,
}

impl EnvStamp {
    pub fn current() -> Self {
        EnvStamp {
            package_version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: StudyConfig,
    pub alpha: f64,
    pub smallness: Option<Smallness>,
    pub records: Vec<PerCRecord>,
    pub theorem_fit: Option<SlopeFit>,
    pub transformed_fit: Option<SlopeFit>,
    /// non-fatal findings: gate violations, truncations, fit caveats
    pub flags: Vec<String>,
    /// a solver abort leaves the completed records in place
    pub aborted: Option<String>,
    pub environment: EnvStamp,
}

fn fit_loglog(pairs: &[(f64, f64)], alpha: f64) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(c, e)| *c > 0.0 && *e > 0.0)
        .map(|&(c, e)| (c.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(SlopeFit {
        points: pts.len(),
        slope_raw: slope,
        intercept: my - slope * mx,
        slope_normalized: slope + alpha,
    })
}

/// One speed's comparison run. Both solvers take the same step and
/// sampling stride so the error series subtracts sample-by-sample.
fn run_one_c(cfg: &StudyConfig, grid: &std::sync::Arc<SpectralGrid>, shape_hk: f64, alpha: f64, smallness: Option<&Smallness>, c: f64) -> Result<PerCRecord> {
    let start = Instant::now();
    let dt = cfg.dt0 / (c * c);
    let t_end = cfg.horizon(c);
    let k = cfg.sobolev_k;

    let mut datum = random_smooth(grid, cfg.seed, DATUM_DECAY);
    let scale = cfg.amplitude * c.powf(-alpha) / shape_hk;
    datum.scale(Complex64::new(scale, 0.0));

    let params = SimParams::new(c, cfg.lambda, cfg.l, cfg.r, grid.clone()).with_time(dt, t_end).with_sobolev(k);
    let n_steps = params.n_steps();
    let stride = ((n_steps + TARGET_SAMPLES - 1) / TARGET_SAMPLES).max(1) as usize;

    let wave = nlkg_evolve(&datum, &params, stride, Some(cfg.step_budget))?;
    let slow = normalized_evolve(&datum, &params, stride, Some(cfg.step_budget))?;

    let theorem = error_metrics(&wave, &slow, k)?;
    let approx = build_approximate(&slow)?;
    let transformed = error_metrics(&wave, &approx, k)?;

    let feasibility = match smallness {
        Some(s) => Some(s.feasibility(alpha, c, wave.final_time(), 0.25)?),
        None => None,
    };

    Ok(PerCRecord {
        c,
        seed: cfg.seed,
        dt,
        t_end: wave.final_time(),
        samples: wave.times.len(),
        sup_error_theorem: theorem.sup_error,
        sup_error_transformed: transformed.sup_error,
        energy_drift_wave: wave.energy_drift(),
        energy_drift_slow: slow.energy_drift(),
        hk_start: sobolev_hk(&wave.fields[0], k),
        hk_end_wave: sobolev_hk(wave.final_field(), k),
        hk_end_slow: sobolev_hk(slow.final_field(), k),
        l2_start: wave.l2[0],
        truncated: wave.truncated || slow.truncated,
        feasibility,
        wall_s: start.elapsed().as_secs_f64(),
    })
}

pub fn run_convergence(cfg: &StudyConfig) -> Result<RunReport> {
    cfg.validate()?;
    let grid = SpectralGrid::new(cfg.d, cfg.n, cfg.box_len)?;
    let mut flags = Vec::new();

    let smallness = match smallness_thresholds(cfg.d, cfg.l as usize, cfg.r) {
        Ok(s) => {
            if !s.hypothesis_ok {
                flags.push(format!(
                    "scaling hypothesis 2r < d(l-1) fails for (d, l, r) = ({}, {}, {})",
                    cfg.d, cfg.l, cfg.r
                ));
            }
            Some(s)
        }
        Err(e) => {
            flags.push(format!("smallness gate unavailable: {e}"));
            None
        }
    };
    let alpha = cfg.alpha.unwrap_or_else(|| {
        smallness.as_ref().map(|s| s.alpha_min + 0.25).unwrap_or(0.25)
    });
    if let Some(s) = &smallness {
        if alpha < s.alpha_min {
            flags.push(format!(
                "alpha = {alpha} is below the smallness floor {}",
                s.alpha_min
            ));
        }
    }

    let shape_hk = sobolev_hk(&random_smooth(&grid, cfg.seed, DATUM_DECAY), cfg.sobolev_k);

    let results: Vec<Result<PerCRecord>> = cfg
        .c_list
        .par_iter()
        .map(|&c| run_one_c(cfg, &grid, shape_hk, alpha, smallness.as_ref(), c))
        .collect();

    let mut records = Vec::new();
    let mut aborted = None;
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok(rec) => {
                if rec.truncated {
                    flags.push(format!("c = {}: step budget truncated the horizon", rec.c));
                }
                if let Some(f) = &rec.feasibility {
                    if !f.feasible {
                        flags.push(format!(
                            "c = {}: contraction inequalities fail at unit constants",
                            rec.c
                        ));
                    }
                }
                records.push(rec);
            }
            Err(e) => {
                aborted = Some(format!("c = {}: {e}", cfg.c_list[i]));
                break;
            }
        }
    }

    let theorem_fit = fit_loglog(
        &records.iter().map(|r| (r.c, r.sup_error_theorem)).collect::<Vec<_>>(),
        alpha,
    );
    let transformed_fit = fit_loglog(
        &records.iter().map(|r| (r.c, r.sup_error_transformed)).collect::<Vec<_>>(),
        alpha,
    );
    if theorem_fit.is_none() {
        flags.push("insufficient points".to_string());
    }

    Ok(RunReport {
        config: cfg.clone(),
        alpha,
        smallness,
        records,
        theorem_fit,
        transformed_fit,
        flags,
        aborted,
        environment: EnvStamp::current(),
    })
}

/// Sequential twin of the rayon sweep, for the determinism check.
pub fn run_convergence_sequential(cfg: &StudyConfig) -> Result<RunReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| LabError::solver(format!("thread pool: {e}")))?;
    pool.install(|| run_convergence(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Mode;

    fn tiny_cfg() -> StudyConfig {
        let mut cfg = StudyConfig::new(Mode::Converge);
        cfg.n = 16;
        cfg.c_list = vec![2.0, 4.0];
        cfg.dt0 = 0.05;
        cfg.t_fixed = 0.05;
        cfg.seed = 3;
        cfg
    }

    #[test]
    fn single_speed_reports_no_slope_and_flags_it() {
        let mut cfg = tiny_cfg();
        cfg.c_list = vec![2.0];
        let report = run_convergence(&cfg).unwrap();
        assert!(report.theorem_fit.is_none());
        assert!(report.flags.iter().any(|f| f.contains("insufficient points")));
        assert_eq!(report.records.len(), 1);
        assert!(report.aborted.is_none());
    }

    #[test]
    fn parallel_and_sequential_sweeps_agree() {
        let cfg = tiny_cfg();
        let a = run_convergence(&cfg).unwrap();
        let b = run_convergence_sequential(&cfg).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(b.records.iter()) {
            assert_eq!(x.sup_error_theorem.to_bits(), y.sup_error_theorem.to_bits());
            assert_eq!(x.sup_error_transformed.to_bits(), y.sup_error_transformed.to_bits());
            assert_eq!(x.energy_drift_wave.to_bits(), y.energy_drift_wave.to_bits());
        }
    }

    #[test]
    fn budget_truncation_is_recorded_not_fatal() {
        let mut cfg = tiny_cfg();
        cfg.step_budget = 2;
        let report = run_convergence(&cfg).unwrap();
        assert!(report.records.iter().all(|r| r.truncated));
        assert!(report.flags.iter().any(|f| f.contains("truncated")));
    }

    #[test]
    fn quadratic_slope_emerges_on_a_small_sweep() {
        let mut cfg = tiny_cfg();
        cfg.n = 32;
        cfg.c_list = vec![2.0, 2.0 * std::f64::consts::SQRT_2, 4.0];
        cfg.dt0 = 0.01;
        cfg.t_fixed = 0.2;
        let report = run_convergence(&cfg).unwrap();
        let fit = report.theorem_fit.unwrap();
        eprintln!(
            "raw {:.3} normalized {:.3} alpha {:.3}",
            fit.slope_raw, fit.slope_normalized, report.alpha
        );
        for r in &report.records {
            eprintln!(
                "c {}: theorem {:.3e} transformed {:.3e} drift {:.2e}",
                r.c, r.sup_error_theorem, r.sup_error_transformed, r.energy_drift_wave
            );
        }
        assert!(
            (fit.slope_normalized + 2.0).abs() < 0.5,
            "normalized slope {}",
            fit.slope_normalized
        );
    }
}
