//! Norm zoo. Spatial norms take a single field; the space-time norm folds
//! precomputed per-sample spatial norms with a trapezoid rule in time.

use num_complex::Complex64;

use crate::decomp::square_block_masses;
use crate::field::{ComplexField, Repr};

/// Sobolev norm with weight (1 + |xi|^2)^k.
pub fn sobolev_hk(f: &ComplexField, k: f64) -> f64 {
    let s = f.spectral_clone();
    let g = s.grid();
    let w = g.spectral_measure();
    let mut acc = 0.0;
    for (v, &xi2) in s.data().iter().zip(g.xi2().iter()) {
        acc += (1.0 + xi2).powf(k) * v.norm_sqr();
    }
    (acc * w).max(0.0).sqrt()
}

/// Lebesgue norm in physical space; pass f64::INFINITY for the sup norm.
pub fn lq_norm(f: &ComplexField, q: f64) -> f64 {
    assert!(q >= 1.0, "q must be >= 1");
    let p = f.physical_clone();
    if q.is_infinite() {
        return p.max_abs();
    }
    let cell = p.grid().cell_volume();
    let mut acc = 0.0;
    for v in p.data() {
        acc += v.norm().powf(q);
    }
    (acc * cell).powf(1.0 / q)
}

/// Spectral derivative along one axis.
pub fn derivative(f: &ComplexField, axis: usize) -> ComplexField {
    let grid = f.grid().clone();
    let d = grid.dim();
    assert!(axis < d, "axis out of range");
    let phys = f.repr() == Repr::Physical;
    let mut s = f.spectral_clone();
    let mut ai = [0usize; 3];
    for idx in 0..grid.total() {
        grid.axis_indices(idx, &mut ai[..d]);
        let xi = grid.xi_axis(ai[axis]);
        s.data_mut()[idx] *= Complex64::new(0.0, xi);
    }
    if phys {
        s.to_physical();
    }
    s
}

fn multi_indices(d: usize, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(axis: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if axis == cur.len() {
            out.push(cur.clone());
            return;
        }
        for t in 0..=left {
            cur[axis] = t;
            rec(axis + 1, left - t, cur, out);
        }
    }
    rec(0, k, &mut cur, &mut out);
    out
}

/// W^{k,q} norm: l^q combination of all partial derivatives up to order k.
pub fn wkq_norm(f: &ComplexField, k: u32, q: f64) -> f64 {
    let d = f.grid().dim();
    let mut vals = Vec::new();
    for alpha in multi_indices(d, k) {
        let mut g = f.clone();
        for (axis, &times) in alpha.iter().enumerate() {
            for _ in 0..times {
                g = derivative(&g, axis);
            }
        }
        vals.push(lq_norm(&g, q));
    }
    if q.is_infinite() {
        vals.into_iter().fold(0.0, f64::max)
    } else {
        vals.into_iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Modulation norm: sum over unit-cube blocks of <k>^s times the block's
/// L^2 norm.
pub fn modulation_norm(f: &ComplexField, s: f64) -> f64 {
    let masses = square_block_masses(f);
    let mut acc = 0.0;
    for (k, m2) in masses {
        let k2: f64 = k.iter().map(|&v| (v * v) as f64).sum();
        acc += (1.0 + k2).powf(s / 2.0) * m2.max(0.0).sqrt();
    }
    acc
}

/// L^p-in-time fold of per-sample spatial norms over a trapezoid rule.
/// Pass f64::INFINITY for sup-in-time. Times must be strictly increasing.
pub fn spacetime_norm(times: &[f64], space_norms: &[f64], p: f64) -> f64 {
    assert_eq!(times.len(), space_norms.len());
    assert!(!times.is_empty());
    assert!(p >= 1.0);
    if p.is_infinite() || times.len() == 1 {
        return space_norms.iter().cloned().fold(0.0, f64::max);
    }
    let mut acc = 0.0;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        assert!(dt > 0.0, "times must be strictly increasing");
        acc += 0.5 * dt * (space_norms[i - 1].powf(p) + space_norms[i].powf(p));
    }
    acc.powf(1.0 / p)
}

/// Fraction of |f|^2 mass within `margin` of a box face. Wrap-around
/// contamination check for whole-space runs done on the torus.
pub fn boundary_mass_fraction(f: &ComplexField, margin: f64) -> f64 {
    let p = f.physical_clone();
    let grid = p.grid();
    let d = grid.dim();
    let l = grid.box_len();
    let mut x = [0.0f64; 3];
    let mut near = 0.0;
    let mut total = 0.0;
    for (idx, v) in p.data().iter().enumerate() {
        grid.coords(idx, &mut x[..d]);
        let m = v.norm_sqr();
        total += m;
        let edge = x[..d].iter().map(|&c| c.min(l - c)).fold(f64::MAX, f64::min);
        if edge < margin {
            near += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        near / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ComplexField;
    use crate::grid::SpectralGrid;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_sobolev_norm_is_box_measure_root() {
        let g = SpectralGrid::new(2, 16, 2.0 * PI).unwrap();
        let f = ComplexField::from_fn(g, |_| Complex64::new(1.0, 0.0));
        for k in [0.0, 1.0, 2.0, 3.5] {
            assert!((sobolev_hk(&f, k) - 2.0 * PI).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn single_mode_sobolev_weights() {
        let g = SpectralGrid::new(2, 16, 2.0 * PI).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::from_polar(1.0, x[0]));
        let l2 = 2.0 * PI;
        assert!((sobolev_hk(&f, 0.0) - l2).abs() < 1e-12);
        assert!((sobolev_hk(&f, 1.0) - 2.0f64.sqrt() * l2).abs() < 1e-12);
        assert!((sobolev_hk(&f, 2.0) - 2.0 * l2).abs() < 1e-12);
    }

    #[test]
    fn lq_of_constant_modulus() {
        let g = SpectralGrid::new(1, 16, 3.0).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::from_polar(2.0, 5.0 * x[0]));
        assert!((lq_norm(&f, 4.0) - 2.0 * 3.0f64.powf(0.25)).abs() < 1e-12);
        assert!((lq_norm(&f, f64::INFINITY) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sobolev_one_matches_w12() {
        let g = SpectralGrid::new(2, 16, 2.0 * PI).unwrap();
        let f = crate::field::random_smooth(&g, 4, 0.4);
        let a = sobolev_hk(&f, 1.0);
        let b = wkq_norm(&f, 1, 2.0);
        assert!((a - b).abs() < 1e-10 * a, "{a} vs {b}");
    }

    #[test]
    fn modulation_norm_of_single_integer_mode() {
        let g = SpectralGrid::new(1, 16, 2.0 * PI).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let want = 10.0 * (2.0 * PI).sqrt();
        assert!((modulation_norm(&f, 2.0) - want).abs() < 1e-10, "{}", modulation_norm(&f, 2.0));
    }

    #[test]
    fn spacetime_norm_constant_in_time() {
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let norms = vec![3.0; 11];
        let v = spacetime_norm(&times, &norms, 4.0);
        assert!((v - 3.0 * 1.0f64.powf(0.25)).abs() < 1e-12);
        assert_eq!(spacetime_norm(&times, &norms, f64::INFINITY), 3.0);
    }

    #[test]
    fn boundary_fraction_counts_margin_cells() {
        let g = SpectralGrid::new(1, 16, 16.0).unwrap();
        let f = ComplexField::from_fn(g, |_| Complex64::new(1.0, 0.0));
        // margin 4: points x in {0..3} and {13..15} lie within it
        assert!((boundary_mass_fraction(&f, 4.0) - 7.0 / 16.0).abs() < 1e-14);
    }
}
