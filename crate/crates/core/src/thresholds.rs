//! Small-data gates for the normalized flows: the decay exponent the datum
//! norm must beat, the matching-horizon floor, the contraction inequalities
//! at unit constants, and the frequency index separating quadratic-dominated
//! from higher-order-dominated bands.

use serde::Serialize;

use crate::{LabError, Result};

/// Sobolev index floor for running the fixed-point argument directly in
/// H^s: d + 5/2.
pub fn sobolev_floor(d: usize) -> f64 {
    d as f64 + 2.5
}

/// ceil(log2 x) for finite positive x, exact via bit decomposition.
fn ceil_log2(x: f64) -> i64 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 {
        // subnormal: x = frac * 2^-1074
        let top = 63 - i64::from(frac.leading_zeros());
        return top - 1074 + i64::from(frac.count_ones() != 1);
    }
    let e = biased - 1023;
    if frac == 0 {
        e
    } else {
        e + 1
    }
}

/// Index at which the dyadic decomposition switches from the
/// quadratic-dominated range to the top-power-dominated range:
/// 10 - ceil(log2 eps) / 2, half-integers rounded up. No floating point in
/// the final division.
pub fn band_split_index(eps: f64) -> Result<i64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(LabError::invalid(format!(
            "band split index needs eps in (0, 1], got {eps}"
        )));
    }
    let twice = 20 - ceil_log2(eps);
    Ok((twice + 1).div_euclid(2))
}

/// Decay floor specialized to the fourth-order flow (r = 2), nonlinearity
/// degree m + 1. Sharper than the general-order formula at r = 2.
fn decay_floor_r2(d: usize, m: usize) -> f64 {
    let (d, m) = (d as f64, m as f64);
    let a = d / 2.0 + 4.0 / (m * (m + 2.0));
    let b = 1.0 / m
        + 3.0 * d / (2.0 * m)
        + 2.0 / (m * (m + 2.0))
        + 8.0 / (m * m * (m + 2.0))
        + 4.0 / (m * m * m);
    a.max(b)
}

/// Decay floor for a general order r >= 1.
fn decay_floor_general(d: usize, m: usize, r: usize) -> f64 {
    let (df, mf, rf) = (d as f64, m as f64, r as f64);
    let band = mf * mf * (mf + 2.0 * (rf - 1.0));
    let a = df * (1.0 - 1.0 / rf) + 4.0 * rf / band;
    let b = (rf - 1.0) / mf
        + 3.0 * df / (2.0 * mf)
        + (2.0 * rf * mf + 8.0 * (rf - 1.0) * (rf - 1.0)) / band
        + 4.0 * (rf - 1.0) * (rf - 1.0) / (mf * mf * mf);
    a.max(b)
}

/// Smallness gate for the order-r study with nonlinearity exponent l.
#[derive(Debug, Clone, Serialize)]
pub struct Smallness {
    pub d: usize,
    pub l: usize,
    pub r: usize,
    /// effective nonlinearity degree entering the gate: 2(l - 1)
    pub m: usize,
    /// floor for the decay exponent of the datum norm
    pub delta0: f64,
    /// horizon-matching floor (r - 1)/(l - 1)
    pub ratio: f64,
    /// max of the closed-form floors; the remaining floor has no closed
    /// form and is enforced only through `feasibility`
    pub alpha_min: f64,
    /// r < d(l - 1)/2; violations are reported, never fatal
    pub hypothesis_ok: bool,
}

/// Outcome of the three contraction inequalities at unit constants.
#[derive(Debug, Clone, Serialize)]
pub struct Feasibility {
    /// (T + c sqrt(T)) c^{-3 delta} + T^nu c^{1 - 2 delta}, needs <= 1/2
    pub sup_term: f64,
    /// c^{d(1 - 1/r) - 2 delta} T, needs <= 1
    pub smoothing_term: f64,
    /// T^nu c^{-2 delta}, needs <= 1/2
    pub contraction_term: f64,
    pub feasible: bool,
}

pub fn smallness_thresholds(d: usize, l: usize, r: usize) -> Result<Smallness> {
    if d < 2 || l < 2 || r < 1 {
        return Err(LabError::invalid(format!(
            "smallness gate needs d >= 2, l >= 2, r >= 1, got (d, l, r) = ({d}, {l}, {r})"
        )));
    }
    let m = 2 * (l - 1);
    let delta0 = if r == 2 {
        decay_floor_r2(d, m)
    } else {
        decay_floor_general(d, m, r)
    };
    let ratio = (r as f64 - 1.0) / (l as f64 - 1.0);
    Ok(Smallness {
        d,
        l,
        r,
        m,
        delta0,
        ratio,
        alpha_min: delta0.max(ratio),
        hypothesis_ok: 2 * r < d * (l - 1),
    })
}

impl Smallness {
    /// Evaluates the contraction inequalities at unit constants for a
    /// concrete decay exponent delta, scaling c, horizon T and time
    /// exponent nu (the argument needs nu < 1/3).
    pub fn feasibility(&self, delta: f64, c: f64, t: f64, nu: f64) -> Result<Feasibility> {
        if !(c >= 1.0 && t > 0.0 && (0.0..1.0 / 3.0).contains(&nu) && delta > 0.0) {
            return Err(LabError::invalid(format!(
                "feasibility needs c >= 1, T > 0, 0 <= nu < 1/3, delta > 0, \
                 got (delta, c, T, nu) = ({delta}, {c}, {t}, {nu})"
            )));
        }
        let sup_term =
            (t + c * t.sqrt()) * c.powf(-3.0 * delta) + t.powf(nu) * c.powf(1.0 - 2.0 * delta);
        let d = self.d as f64;
        let r = self.r as f64;
        let smoothing_term = c.powf(d * (1.0 - 1.0 / r) - 2.0 * delta) * t;
        let contraction_term = t.powf(nu) * c.powf(-2.0 * delta);
        Ok(Feasibility {
            sup_term,
            smoothing_term,
            contraction_term,
            feasible: sup_term <= 0.5 && smoothing_term <= 1.0 && contraction_term <= 0.5,
        })
    }
}
