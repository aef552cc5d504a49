//! Frequency decompositions on the grid: dyadic blocks with an exact
//! telescoping partition, their fattened companions, unit-cube blocks for
//! modulation sums, and the two-sided band window used before kernel runs.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bump::{eta, phi0};
use crate::field::ComplexField;
use crate::grid::SpectralGrid;
use crate::multiplier::FourierMultiplier;

/// Sparse 1-d window weights: for every axis index, the integer centers
/// whose unit window sees that wavevector component. At most two per entry.
pub struct EtaTables {
    pub per_index: Vec<Vec<(i64, f64)>>,
}

fn eta_tables(grid: &Arc<SpectralGrid>) -> &EtaTables {
    grid.eta_tables_cache().get_or_init(|| {
        let per_index = (0..grid.n())
            .map(|i| {
                let xi = grid.xi_axis(i);
                let kc = xi.round() as i64;
                let mut pairs = Vec::new();
                for k in (kc - 1)..=(kc + 1) {
                    let w = eta(xi - k as f64);
                    if w > 0.0 {
                        pairs.push((k, w));
                    }
                }
                pairs
            })
            .collect();
        EtaTables { per_index }
    })
}

/// Number of dyadic blocks: indices 0..count, where the top block's cutoff
/// is already identity on the grid.
pub fn lp_block_count(grid: &Arc<SpectralGrid>) -> usize {
    lp_profiles(grid).len()
}

fn lp_top_index(grid: &SpectralGrid) -> i32 {
    // Smallest j with xi_max <= 2^(j-1), so the scale-j cutoff is 1 on grid.
    let mut j = grid.xi_max().log2().ceil() as i32 + 1;
    while (2.0f64).powi(j - 1) < grid.xi_max() {
        j += 1;
    }
    j.max(1)
}

fn lp_profiles(grid: &Arc<SpectralGrid>) -> &Vec<Vec<f64>> {
    grid.lp_profiles_cache().get_or_init(|| {
        let top = lp_top_index(grid);
        let mut cut_prev: Vec<f64> = Vec::new();
        let mut out = Vec::with_capacity(top as usize + 1);
        for j in 0..=top {
            let scale = (2.0f64).powi(j);
            let cut: Vec<f64> = grid.xi2().iter().map(|&x| phi0(x.sqrt() / scale)).collect();
            let block = if j == 0 {
                cut.clone()
            } else {
                cut.iter().zip(cut_prev.iter()).map(|(a, b)| a - b).collect()
            };
            out.push(block);
            cut_prev = cut;
        }
        out
    })
}

fn apply_profile(f: &ComplexField, profile: &[f64]) -> ComplexField {
    let phys = f.repr() == crate::field::Repr::Physical;
    let mut s = f.spectral_clone();
    for (v, w) in s.data_mut().iter_mut().zip(profile.iter()) {
        *v *= w;
    }
    if phys {
        s.to_physical();
    }
    s
}

/// Dyadic block j of the telescoping partition. Sum over all blocks is the
/// identity on grid fields.
pub fn lp_project(f: &ComplexField, j: usize) -> ComplexField {
    let profiles = lp_profiles(f.grid());
    assert!(j < profiles.len(), "block index {j} out of range");
    apply_profile(f, &profiles[j])
}

/// Low-pass cutoff at scale 2^j (the partial sum of blocks 0..=j).
pub fn lp_cutoff(f: &ComplexField, j: usize) -> ComplexField {
    let scale = (2.0f64).powi(j as i32);
    let profile: Vec<f64> = f.grid().xi2().iter().map(|&x| phi0(x.sqrt() / scale)).collect();
    apply_profile(f, &profile)
}

/// Fattened block profile: identically 1 on the support of block j.
pub fn lp_fat_profile(grid: &Arc<SpectralGrid>, j: usize) -> Vec<f64> {
    let scale = (2.0f64).powi(j as i32);
    grid.xi2()
        .iter()
        .map(|&x| {
            let rho = x.sqrt() / scale;
            if j == 0 {
                phi0(rho / 2.0)
            } else {
                phi0(rho / 2.0) * (1.0 - phi0(4.0 * rho))
            }
        })
        .collect()
}

pub fn lp_fat_project(f: &ComplexField, j: usize) -> ComplexField {
    apply_profile(f, &lp_fat_profile(f.grid(), j))
}

/// Largest deviation of the block partition sum from 1 over all modes.
pub fn lp_partition_defect(grid: &Arc<SpectralGrid>) -> f64 {
    let profiles = lp_profiles(grid);
    let mut worst = 0.0f64;
    for idx in 0..grid.total() {
        let s: f64 = profiles.iter().map(|p| p[idx]).sum();
        worst = worst.max((s - 1.0).abs());
    }
    worst
}

/// Unit-cube block at integer center k (one component per dimension).
pub fn square_block(f: &ComplexField, k: &[i64]) -> ComplexField {
    let grid = f.grid().clone();
    let d = grid.dim();
    assert_eq!(k.len(), d, "center dimension mismatch");
    let phys = f.repr() == crate::field::Repr::Physical;
    let mut s = f.spectral_clone();
    let mut axis = [0usize; 3];
    for idx in 0..grid.total() {
        grid.axis_indices(idx, &mut axis[..d]);
        let mut w = 1.0;
        for a in 0..d {
            w *= eta(grid.xi_axis(axis[a]) - k[a] as f64);
        }
        s.data_mut()[idx] *= w;
    }
    if phys {
        s.to_physical();
    }
    s
}

/// Squared L^2 masses of every nonzero unit-cube block, keyed by center
/// (padded with zeros past the grid dimension).
pub fn square_block_masses(f: &ComplexField) -> BTreeMap<[i64; 3], f64> {
    let grid = f.grid().clone();
    let d = grid.dim();
    let tables = eta_tables(&grid);
    let s = f.spectral_clone();
    let measure = grid.spectral_measure();
    let mut out: BTreeMap<[i64; 3], f64> = BTreeMap::new();
    let mut axis = [0usize; 3];
    for idx in 0..grid.total() {
        let a2 = s.data()[idx].norm_sqr();
        if a2 == 0.0 {
            continue;
        }
        grid.axis_indices(idx, &mut axis[..d]);
        let lists: Vec<&Vec<(i64, f64)>> = (0..d).map(|a| &tables.per_index[axis[a]]).collect();
        let mut pick = [0usize; 3];
        loop {
            let mut key = [0i64; 3];
            let mut w = 1.0;
            for a in 0..d {
                let (k, wa) = lists[a][pick[a]];
                key[a] = k;
                w *= wa;
            }
            *out.entry(key).or_insert(0.0) += w * w * a2 * measure;
            // Advance the mixed-radix counter over the per-axis lists.
            let mut a = 0;
            loop {
                if a == d {
                    break;
                }
                pick[a] += 1;
                if pick[a] < lists[a].len() {
                    break;
                }
                pick[a] = 0;
                a += 1;
            }
            if a == d {
                break;
            }
        }
    }
    out
}

/// Largest block scale whose fattened window still fits along one axis.
pub fn band_scale_limit(grid: &SpectralGrid) -> i32 {
    (grid.xi_axis_max().log2() - 1.0).floor() as i32
}

/// Two-sided window: 1 on 2^-k <= |xi| <= 2^k, supported in the open band
/// (2^(-k-1), 2^(k+1)). The requested k is clamped to what the grid holds.
pub fn band_window(grid: &Arc<SpectralGrid>, k: i32) -> FourierMultiplier {
    let kc = k.min(band_scale_limit(grid));
    let hi = (2.0f64).powi(kc + 1);
    let lo = (2.0f64).powi(-kc);
    FourierMultiplier::from_xi2(grid, move |xi2| {
        let r = xi2.sqrt();
        phi0(r / hi) * (1.0 - phi0(r / lo))
    })
}

pub fn band_project(f: &ComplexField, k: i32) -> ComplexField {
    let w = band_window(f.grid(), k);
    let phys = f.repr() == crate::field::Repr::Physical;
    let mut s = f.spectral_clone();
    w.apply_to(&mut s);
    if phys {
        s.to_physical();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_smooth, Repr};
    use num_complex::Complex64;

    #[test]
    fn block_partition_sums_to_one() {
        for (d, n, l) in [(1usize, 64usize, 2.0 * std::f64::consts::PI), (2, 16, 5.0)] {
            let g = SpectralGrid::new(d, n, l).unwrap();
            let defect = lp_partition_defect(&g);
            assert!(defect < 1e-14, "d={d} n={n}: defect {defect}");
        }
    }

    #[test]
    fn blocks_reassemble_fields() {
        let g = SpectralGrid::new(2, 16, 3.0).unwrap();
        for seed in 0..5u64 {
            let f = random_smooth(&g, seed, 0.25);
            let mut acc = ComplexField::zeros(g.clone(), Repr::Physical);
            for j in 0..lp_block_count(&g) {
                acc.axpy(Complex64::new(1.0, 0.0), &lp_project(&f, j));
            }
            let err: f64 = acc
                .data()
                .iter()
                .zip(f.data().iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-13, "seed {seed}: {err}");
        }
    }

    #[test]
    fn block_is_cutoff_difference() {
        let g = SpectralGrid::new(1, 64, 2.0 * std::f64::consts::PI).unwrap();
        let f = random_smooth(&g, 3, 0.1);
        let j = 3;
        let b = lp_project(&f, j).spectral_clone();
        let hi = lp_cutoff(&f, j).spectral_clone();
        let lo = lp_cutoff(&f, j - 1).spectral_clone();
        for idx in 0..g.total() {
            let want = hi.data()[idx] - lo.data()[idx];
            assert!((b.data()[idx] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn fattened_window_fixes_its_block() {
        let g = SpectralGrid::new(1, 128, 2.0 * std::f64::consts::PI).unwrap();
        let profiles_defect = |j: usize| {
            let fat = lp_fat_profile(&g, j);
            let f = random_smooth(&g, 9, 0.05);
            let b = lp_project(&f, j).spectral_clone();
            let mut worst = 0.0f64;
            for idx in 0..g.total() {
                let w = (b.data()[idx] * fat[idx] - b.data()[idx]).norm();
                worst = worst.max(w);
            }
            worst
        };
        for j in 0..lp_block_count(&g) {
            let w = profiles_defect(j);
            assert!(w < 1e-14, "block {j}: {w}");
        }
    }

    #[test]
    fn integer_grid_cube_block_is_mode_projector() {
        // On a 2*pi box the wavevectors are integers, so each cube block
        // keeps exactly one mode.
        let g = SpectralGrid::new(1, 16, 2.0 * std::f64::consts::PI).unwrap();
        let f = ComplexField::from_fn(g.clone(), |x| {
            Complex64::from_polar(1.0, 3.0 * x[0]) + Complex64::from_polar(0.5, -2.0 * x[0])
        });
        let b3 = square_block(&f, &[3]);
        let expect = ComplexField::from_fn(g.clone(), |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let err: f64 = b3
            .data()
            .iter()
            .zip(expect.data().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let masses = square_block_masses(&f);
        assert!((masses[&[3, 0, 0]] - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((masses[&[-2, 0, 0]] - 0.25 * 2.0 * std::f64::consts::PI).abs() < 1e-12);
        // other centers hold at most transform roundoff
        assert!(masses.get(&[1, 0, 0]).map_or(0.0, |v| *v) < 1e-20);
    }

    #[test]
    fn cube_masses_bounded_by_l2() {
        // Per mode the squared weights sum to at most 1 and at least 4^-d,
        // since each axis splits between at most two windows adding to 1.
        let g = SpectralGrid::new(2, 16, 5.0).unwrap();
        let f = random_smooth(&g, 21, 0.3);
        let masses = square_block_masses(&f);
        let total: f64 = masses.values().sum();
        let l2 = f.norm_l2().powi(2);
        assert!(total <= l2 * (1.0 + 1e-12));
        assert!(total >= 0.25 * l2 * (1.0 - 1e-12));
    }

    #[test]
    fn band_window_plateau_and_support() {
        let g = SpectralGrid::new(1, 256, 2.0 * std::f64::consts::PI).unwrap();
        // axis max is 128, so scales up to 2^5 fit with their fattened edge
        assert_eq!(band_scale_limit(&g), 6);
        let w = band_window(&g, 3);
        for idx in 0..g.total() {
            let r = g.xi2()[idx].sqrt();
            let v = w.symbol()[idx];
            if (0.125..=8.0).contains(&r) {
                assert_eq!(v, 1.0, "r={r}");
            }
            if r <= 0.0625 || r >= 16.0 {
                assert_eq!(v, 0.0, "r={r}");
            }
        }
        // requesting more than the grid holds clamps instead of aliasing
        let wide = band_window(&g, 40);
        for idx in 0..g.total() {
            let r = g.xi2()[idx].sqrt();
            if r >= 2.0f64.powi(8) {
                assert_eq!(wide.symbol()[idx], 0.0);
            }
        }
    }
}
