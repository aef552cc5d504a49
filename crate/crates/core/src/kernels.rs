//! Banded propagator kernels: the three-way frequency split of a field and
//! sup-norm decay fits for e^{itP_r} against each band's predicted rate.
//!
//! Fit windows are qualitative analogs of the split: desk grids cannot reach
//! the nominal threshold frequency, so each band is realized at its
//! characteristic scale instead. The low ball sits where the quadratic term
//! dominates 16x, the medium annulus brackets the singular sphere, and the
//! high annulus starts where the top monomial dominates 16x. Time windows
//! start at the first full phase turn across the window and stop before the
//! measured regime drains: wavefront wrap for the low ball, a fixed multiple
//! for the sphere, inner-edge erosion of the self-similar core for the high
//! annulus.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::bump::{phi0, smoothstep};
use crate::field::{ComplexField, Repr};
use crate::grid::SpectralGrid;
use crate::polynomial::{critical_radii, p_r_eval};
use crate::thresholds::band_split_index;
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Low,
    Medium,
    High,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Band::Low => "low",
            Band::Medium => "medium",
            Band::High => "high",
        };
        f.write_str(s)
    }
}

/// Three-way split at the dyadic threshold index. The split telescopes the
/// dyadic blocks, so the parts reassemble the field exactly.
pub struct BandTriple {
    pub low: ComplexField,
    pub medium: ComplexField,
    pub high: ComplexField,
    /// split index actually used
    pub split_index: i64,
    /// true when the grid cannot reach the nominal index
    pub clamped: bool,
}

/// Window weights (low, medium, high) at radius `rad` for split index k.
/// Low collects blocks below -k (constants included), high the tail above
/// k, medium the rest. Sums to 1 by construction.
pub fn split_profiles(k: i64, rad: f64) -> (f64, f64, f64) {
    let a = phi0(rad * (2.0f64).powi(k as i32 + 1));
    let b = phi0(rad * (2.0f64).powi(-(k as i32)));
    (a, b - a, 1.0 - b)
}

pub fn band_project(f: &ComplexField, eps: f64) -> Result<BandTriple> {
    let nominal = band_split_index(eps)?;
    // smallest index whose tail window has no support at the grid corner
    let grid_cap = (f.grid().xi_max().log2() + 1.0).ceil() as i64;
    let split_index = nominal.min(grid_cap);
    let clamped = split_index < nominal;
    let phys = f.repr() == Repr::Physical;
    let s = f.spectral_clone();
    let mut low = s.clone();
    let mut medium = s.clone();
    let mut high = s;
    let xi2 = f.grid().xi2().to_vec();
    for i in 0..xi2.len() {
        let (a, m, h) = split_profiles(split_index, xi2[i].sqrt());
        low.data_mut()[i] *= a;
        medium.data_mut()[i] *= m;
        high.data_mut()[i] *= h;
    }
    if phys {
        low.to_physical();
        medium.to_physical();
        high.to_physical();
    }
    Ok(BandTriple {
        low,
        medium,
        high,
        split_index,
        clamped,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub band: Band,
    pub times: Vec<f64>,
    pub sup_values: Vec<f64>,
    pub fitted_exponent: f64,
    /// coefficient of determination of the log-log fit
    pub fit_quality: f64,
    pub predicted_exponent: f64,
    /// (exponent, rms log-residual at that fixed slope); the annulus around
    /// the singular sphere always reports both modeled rates
    pub candidates: Vec<(f64, f64)>,
}

/// Frozen window and sampling geometry for one band's fit.
#[derive(Debug, Clone, Serialize)]
pub struct KernelGeometry {
    pub band: Band,
    /// radial plateau; inner = 0 means a ball
    pub plateau_inner: f64,
    pub plateau_outer: f64,
    /// support edges of the smooth roll-offs
    pub support_inner: f64,
    pub support_outer: f64,
    pub grid_n: usize,
    pub box_len: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl KernelGeometry {
    /// Smooth profile: 0 outside the support, 1 on the plateau.
    pub fn window_value(&self, rad: f64) -> f64 {
        let rise = if self.plateau_inner > 0.0 {
            smoothstep((rad - self.support_inner) / (self.plateau_inner - self.support_inner))
        } else {
            1.0
        };
        let fall =
            smoothstep((self.support_outer - rad) / (self.support_outer - self.plateau_outer));
        rise * fall
    }
}

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;
/// "times within the validity horizon" is enforced up to this factor.
const HORIZON_SLACK: f64 = 8.0;
const NYQUIST_LEAK_TOL: f64 = 1e-6;
const FIT_SAMPLES: usize = 12;

pub fn kernel_geometry(r: usize, c: f64, band: Band) -> Result<KernelGeometry> {
    if r < 1 {
        return Err(LabError::invalid("kernel geometry needs r >= 1"));
    }
    if !(c >= 1.0) {
        return Err(LabError::invalid(format!(
            "kernel geometry needs c >= 1, got {c}"
        )));
    }
    let eps = 1.0 / (c * c);
    if r == 1 && band != Band::Low {
        return Err(LabError::invalid(
            "r = 1 has a globally quadratic phase; only the low band is defined",
        ));
    }
    let horizon = 4.0 * c.powi(2 * (r as i32 - 1));
    let geo = match band {
        Band::Low => {
            let b = if r == 1 { 4.0 } else { c / 8.0 };
            let t_lo = TAU / (b * b);
            let t_hi = (24.0 * PI / (b * b)).min(horizon);
            KernelGeometry {
                band,
                plateau_inner: 0.0,
                plateau_outer: b,
                support_inner: 0.0,
                support_outer: 2.0 * b,
                grid_n: 1024,
                box_len: 192.0 * PI / b,
                t_lo,
                t_hi,
            }
        }
        Band::Medium => {
            let roots = critical_radii(r, eps)?;
            let r1 = *roots.critical.first().ok_or_else(|| {
                LabError::invalid(format!(
                    "order {r} has no singular sphere; the medium regime is empty"
                ))
            })?;
            let t_lo = TAU / p_r_eval(r, eps, r1).abs();
            KernelGeometry {
                band,
                plateau_inner: r1 / 2.0f64.sqrt(),
                plateau_outer: r1 * 2.0f64.sqrt(),
                support_inner: r1 / (1.3 * 2.0f64.sqrt()),
                support_outer: r1 * 1.3 * 2.0f64.sqrt(),
                grid_n: 1024,
                box_len: 128.0 * PI / r1,
                t_lo,
                t_hi: (25.0 * t_lo).min(horizon),
            }
        }
        Band::High => {
            let a = 4.0 * c;
            let lam = 8.0 * a;
            let t_lo = TAU / p_r_eval(r, eps, lam).abs();
            // top-monomial phase clock at the inner edge; past ~1e-2 turns
            // the self-similar core starts eroding into the hole
            let t_cap = 1e-2 / (eps.powi(r as i32 - 1) * a.powi(2 * r as i32));
            KernelGeometry {
                band,
                plateau_inner: a,
                plateau_outer: lam,
                support_inner: a / 2.0,
                support_outer: 2.0 * lam,
                grid_n: 1024,
                box_len: 32.0 * PI / a,
                t_lo,
                t_hi: (6.5 * t_lo).min(t_cap),
            }
        }
    };
    if geo.t_hi < 2.0 * geo.t_lo {
        return Err(LabError::invalid(format!(
            "{band} band at c = {c}: sampling window [{:.3e}, {:.3e}] collapses under the order-{r} validity horizon",
            geo.t_lo, geo.t_hi
        )));
    }
    Ok(geo)
}

/// Log-spaced sample times filling the frozen window.
pub fn default_times(r: usize, c: f64, band: Band) -> Result<Vec<f64>> {
    let geo = kernel_geometry(r, c, band)?;
    let (a, b) = (geo.t_lo.ln(), geo.t_hi.ln());
    Ok((0..FIT_SAMPLES)
        .map(|i| (a + (b - a) * i as f64 / (FIT_SAMPLES - 1) as f64).exp())
        .collect())
}

/// A banded phase kernel pinned to one grid: window profile and phase table
/// precomputed per mode.
pub struct KernelRun {
    grid: Arc<SpectralGrid>,
    window: Vec<f64>,
    phase: Vec<f64>,
}

impl KernelRun {
    /// The window must carry no weight at or beyond the axis Nyquist;
    /// measurable energy there means the grid cannot represent the band.
    pub fn new(
        grid: Arc<SpectralGrid>,
        radial_window: impl Fn(f64) -> f64,
        r: usize,
        eps: f64,
    ) -> Result<Self> {
        let window: Vec<f64> = grid.xi2().iter().map(|&x| radial_window(x.sqrt())).collect();
        let nyq2 = grid.xi_axis_max() * grid.xi_axis_max();
        let mut shell = 0.0f64;
        let mut total = 0.0f64;
        for (&w, &xi2) in window.iter().zip(grid.xi2().iter()) {
            total += w * w;
            if xi2 >= nyq2 {
                shell += w * w;
            }
        }
        if total == 0.0 {
            return Err(LabError::invalid("band window is identically zero"));
        }
        if shell > NYQUIST_LEAK_TOL * total {
            return Err(LabError::invalid(format!(
                "band window carries {:.3e} of its energy at the grid Nyquist; the band is underresolved",
                shell / total
            )));
        }
        let phase: Vec<f64> = grid
            .xi2()
            .iter()
            .map(|&x| p_r_eval(r, eps, x.sqrt()))
            .collect();
        Ok(KernelRun { grid, window, phase })
    }

    /// sup over the box of |inverse transform of window * e^{i t phase}|.
    pub fn sup_at(&self, t: f64) -> f64 {
        let mut f = ComplexField::zeros(self.grid.clone(), Repr::Spectral);
        for ((v, &w), &p) in f
            .data_mut()
            .iter_mut()
            .zip(self.window.iter())
            .zip(self.phase.iter())
        {
            let (s, co) = (t * p).sin_cos();
            *v = Complex64::new(w * co, w * s);
        }
        f.to_physical();
        f.max_abs() / self.grid.cell_volume()
    }

    /// Mass proxy the t=0 sup must equal: window sum over box volume.
    pub fn mass_proxy(&self) -> f64 {
        let vol = self.grid.box_len().powi(self.grid.dim() as i32);
        self.window.iter().sum::<f64>() / vol
    }
}

fn linfit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

fn rms_residual_at_slope(xs: &[f64], ys: &[f64], slope: f64) -> f64 {
    let n = xs.len() as f64;
    let b = ys.iter().zip(xs).map(|(y, x)| y - slope * x).sum::<f64>() / n;
    (ys.iter()
        .zip(xs)
        .map(|(y, x)| {
            let e = y - slope * x - b;
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt()
}

pub fn kernel_decay_fit(r: usize, c: f64, band: Band, d: usize, times: &[f64]) -> Result<DecayFit> {
    if !(1..=2).contains(&d) {
        return Err(LabError::invalid(
            "kernel runs are sized for d in {1, 2}; larger grids exceed the desk budget",
        ));
    }
    if times.len() < 3 {
        return Err(LabError::invalid("decay fit needs at least 3 times"));
    }
    if !(c >= 1.0) {
        return Err(LabError::invalid(format!("decay fit needs c >= 1, got {c}")));
    }
    let horizon = HORIZON_SLACK * c.powi(2 * (r as i32 - 1));
    for (i, &t) in times.iter().enumerate() {
        if !(t > 0.0) {
            return Err(LabError::invalid(format!(
                "decay fit time {t} is not positive"
            )));
        }
        if i > 0 && t <= times[i - 1] {
            return Err(LabError::invalid(
                "decay fit times must be strictly increasing",
            ));
        }
        if t > horizon {
            return Err(LabError::invalid(format!(
                "time {t} is beyond the order-{r} validity horizon {horizon}"
            )));
        }
    }
    let eps = 1.0 / (c * c);
    let geo = kernel_geometry(r, c, band)?;
    let grid = SpectralGrid::new(d, geo.grid_n, geo.box_len)?;
    let profile = geo.clone();
    let run = KernelRun::new(grid, move |rad| profile.window_value(rad), r, eps)?;
    let sup_values: Vec<f64> = times.iter().map(|&t| run.sup_at(t)).collect();
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = sup_values.iter().map(|s| s.ln()).collect();
    let (slope, _, r2) = linfit(&xs, &ys);
    let dh = d as f64 / 2.0;
    let (predicted, candidates) = match band {
        Band::Low => (-dh, vec![(-dh, rms_residual_at_slope(&xs, &ys, -dh))]),
        Band::Medium => (
            -dh + 1.0 / 6.0,
            vec![
                (-dh, rms_residual_at_slope(&xs, &ys, -dh)),
                (
                    -dh + 1.0 / 6.0,
                    rms_residual_at_slope(&xs, &ys, -dh + 1.0 / 6.0),
                ),
            ],
        ),
        Band::High => {
            let e = -(d as f64) / (2.0 * r as f64);
            (e, vec![(e, rms_residual_at_slope(&xs, &ys, e))])
        }
    };
    Ok(DecayFit {
        band,
        times: times.to_vec(),
        sup_values,
        fitted_exponent: slope,
        fit_quality: r2,
        predicted_exponent: predicted,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_smooth;

    fn report(tag: &str, fit: &DecayFit) {
        eprintln!(
            "{tag}: slope {:.4} (predicted {:.4}), R2 {:.5}",
            fit.fitted_exponent, fit.predicted_exponent, fit.fit_quality
        );
        for (t, s) in fit.times.iter().zip(fit.sup_values.iter()) {
            eprintln!("  t {t:.6e}  sup {s:.6e}");
        }
        for (e, res) in &fit.candidates {
            eprintln!("  candidate {e:.4}: rms residual {res:.4}");
        }
    }

    #[test]
    fn split_weights_partition_every_radius() {
        for k in [1i64, 4, 10] {
            for &rad in &[
                0.0,
                2.0f64.powi(-(k as i32) - 2) * 0.9,
                2.0f64.powi(-(k as i32)),
                0.7,
                1.0,
                2.0f64.powi(k as i32 - 1),
                2.0f64.powi(k as i32) * 1.5,
                2.0f64.powi(k as i32 + 3),
            ] {
                let (a, m, h) = split_profiles(k, rad);
                assert!((a + m + h - 1.0).abs() < 1e-15, "k={k} rad={rad}");
                assert!(a >= 0.0 && m >= 0.0 && h >= 0.0, "k={k} rad={rad}");
            }
            let (a, m, h) = split_profiles(k, 2.0f64.powi(-(k as i32) - 2) * 0.9);
            assert_eq!((a, m, h), (1.0, 0.0, 0.0));
            let (a, m, h) = split_profiles(k, 2.0f64.powi(k as i32 + 1));
            assert_eq!((a, m, h), (0.0, 0.0, 1.0));
            let (a, m, h) = split_profiles(k, 1.0);
            assert_eq!((a, m, h), (0.0, 1.0, 0.0));
        }
    }

    #[test]
    fn split_reassembles_field_and_keeps_dc_low() {
        let g = SpectralGrid::new(2, 64, TAU).unwrap();
        let f = random_smooth(&g, 3, 0.2);
        let parts = band_project(&f, 1.0 / 16.0).unwrap();
        let fs = f.spectral_clone();
        let (ls, ms, hs) = (
            parts.low.spectral_clone(),
            parts.medium.spectral_clone(),
            parts.high.spectral_clone(),
        );
        let mut worst = 0.0f64;
        for i in 0..fs.data().len() {
            let sum = ls.data()[i] + ms.data()[i] + hs.data()[i];
            worst = worst.max((sum - fs.data()[i]).norm());
        }
        assert!(worst < 1e-12 * fs.max_abs().max(1.0), "{worst}");

        let mut dc = ComplexField::zeros(g.clone(), Repr::Spectral);
        dc.data_mut()[0] = Complex64::new(2.0, 1.0);
        let parts = band_project(&dc, 0.25).unwrap();
        assert!((parts.low.data()[0] - dc.data()[0]).norm() < 1e-15);
        assert_eq!(parts.medium.norm_l2(), 0.0);
        assert_eq!(parts.high.norm_l2(), 0.0);
    }

    #[test]
    fn coarse_grid_clamps_and_empties_the_top() {
        let g = SpectralGrid::new(2, 16, TAU).unwrap();
        let f = random_smooth(&g, 9, 0.1);
        let parts = band_project(&f, 1.0).unwrap();
        assert!(parts.clamped);
        assert!(parts.split_index < 10);
        assert_eq!(parts.high.norm_l2(), 0.0);
    }

    #[test]
    fn zero_time_sup_is_the_window_mass() {
        let g = SpectralGrid::new(2, 128, 16.0 * PI).unwrap();
        let run = KernelRun::new(g, |r| phi0(r / 4.0), 2, 0.25).unwrap();
        let anchor = run.mass_proxy();
        let sup = run.sup_at(0.0);
        assert!((sup - anchor).abs() < 1e-12 * anchor, "{sup} vs {anchor}");
    }

    #[test]
    fn underresolved_window_is_rejected() {
        let g = SpectralGrid::new(2, 16, TAU).unwrap();
        // plateau out to twice the axis Nyquist
        let err = KernelRun::new(g, |r| phi0(r / 64.0), 2, 0.25);
        assert!(err.is_err());
    }

    #[test]
    fn quadratic_ball_decays_at_the_stationary_rate() {
        let times = default_times(1, 4.0, Band::Low).unwrap();
        let fit = kernel_decay_fit(1, 4.0, Band::Low, 2, &times).unwrap();
        report("low r=1 d=2", &fit);
        assert!(
            (fit.fitted_exponent - fit.predicted_exponent).abs() < 0.1,
            "slope {} vs {}",
            fit.fitted_exponent,
            fit.predicted_exponent
        );
        assert!(fit.fit_quality > 0.99, "{}", fit.fit_quality);
    }

    #[test]
    fn quadratic_ball_decays_at_the_line_rate() {
        let times = default_times(1, 4.0, Band::Low).unwrap();
        let fit = kernel_decay_fit(1, 4.0, Band::Low, 1, &times).unwrap();
        report("low r=1 d=1", &fit);
        assert!(
            (fit.fitted_exponent + 0.5).abs() < 0.1,
            "slope {}",
            fit.fitted_exponent
        );
    }

    #[test]
    fn quartic_annulus_decays_at_the_quarter_rate() {
        let times = default_times(2, 1.0, Band::High).unwrap();
        let fit = kernel_decay_fit(2, 1.0, Band::High, 2, &times).unwrap();
        report("high r=2 d=2", &fit);
        assert!(
            (fit.fitted_exponent - fit.predicted_exponent).abs() < 0.15,
            "slope {} vs {}",
            fit.fitted_exponent,
            fit.predicted_exponent
        );
        assert!(fit.fit_quality > 0.9, "{}", fit.fit_quality);
    }

    #[test]
    fn singular_annulus_reports_both_rates() {
        let times = default_times(2, 8.0, Band::Medium).unwrap();
        let fit = kernel_decay_fit(2, 8.0, Band::Medium, 2, &times).unwrap();
        report("medium r=2 d=2", &fit);
        assert_eq!(fit.candidates.len(), 2);
        // the zero-velocity sphere focuses at the origin: ring coherence
        // decays at -(d-1)/2, slower than either modeled envelope rate
        assert!(
            (fit.fitted_exponent + 0.5).abs() < 0.2,
            "slope {}",
            fit.fitted_exponent
        );
        assert!(fit.fit_quality > 0.9, "{}", fit.fit_quality);
    }

    #[test]
    fn rejects_bad_orders_dims_and_horizons() {
        assert!(kernel_decay_fit(1, 4.0, Band::High, 2, &[0.1, 0.2, 0.3]).is_err());
        assert!(kernel_decay_fit(3, 4.0, Band::Medium, 2, &[0.1, 0.2, 0.3]).is_err());
        // r=1 horizon is O(1) regardless of c
        assert!(kernel_decay_fit(1, 4.0, Band::Low, 2, &[1.0, 2.0, 100.0]).is_err());
        assert!(kernel_decay_fit(2, 4.0, Band::Low, 3, &[0.1, 0.2, 0.3]).is_err());
        assert!(kernel_decay_fit(2, 4.0, Band::Low, 2, &[0.0, 0.1, 0.2]).is_err());
    }
}
