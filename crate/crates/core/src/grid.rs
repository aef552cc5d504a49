//! Periodic spectral grid: `n^d` points on `[0, L)^d`, wavevectors
//! `(2*pi/L) * m` with integer `m` per axis in symmetric order
//! `{0, 1, ..., n/2-1, -n/2, ..., -1}` (single Nyquist representative at
//! `-n/2`). Forward transforms are plain sums, inverse transforms carry the
//! `1/n^d` factor; physical norms carry the cell measure `(L/n)^d`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex, OnceLock};

use crate::{LabError, Result};

pub struct SpectralGrid {
    d: usize,
    n: usize,
    box_len: f64,
    /// Integer frequency per axis index.
    freq: Vec<i64>,
    /// |xi|^2 for every grid index (row-major, axis 0 slowest).
    xi2: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Dyadic block profiles, built on first use.
    lp_profiles: OnceLock<Vec<Vec<f64>>>,
    /// 1-d unit-window tables per integer center, built on first use.
    eta_tables: OnceLock<crate::decomp::EtaTables>,
    scratch_pool: Mutex<Vec<Vec<Complex64>>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("d", &self.d)
            .field("n", &self.n)
            .field("box_len", &self.box_len)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(d: usize, n: usize, box_len: f64) -> Result<Arc<Self>> {
        if !(1..=3).contains(&d) {
            return Err(LabError::invalid(format!("dimension {d} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(LabError::invalid(format!(
                "grid size {n} must be a power of two >= 8"
            )));
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(LabError::invalid(format!("box length {box_len} must be positive")));
        }
        let freq: Vec<i64> = (0..n)
            .map(|i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let total = n.pow(d as u32);
        let scale = 2.0 * std::f64::consts::PI / box_len;
        let mut xi2 = vec![0.0; total];
        for (idx, slot) in xi2.iter_mut().enumerate() {
            let mut rest = idx;
            let mut s = 0.0;
            for _ in 0..d {
                let m = freq[rest % n] as f64 * scale;
                s += m * m;
                rest /= n;
            }
            *slot = s;
        }
        Ok(Arc::new(SpectralGrid {
            d,
            n,
            box_len,
            freq,
            xi2,
            fwd,
            inv,
            lp_profiles: OnceLock::new(),
            eta_tables: OnceLock::new(),
            scratch_pool: Mutex::new(Vec::new()),
        }))
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn box_len(&self) -> f64 {
        self.box_len
    }
    pub fn total(&self) -> usize {
        self.n.pow(self.d as u32)
    }
    /// Physical cell measure (L/n)^d.
    pub fn cell_volume(&self) -> f64 {
        (self.box_len / self.n as f64).powi(self.d as i32)
    }
    /// Weight turning a plain spectral coefficient sum into the L^2 integral:
    /// `L^d / n^{2d}`.
    pub fn spectral_measure(&self) -> f64 {
        self.box_len.powi(self.d as i32) / (self.n as f64).powi(2 * self.d as i32)
    }
    pub fn freq_int(&self, axis_index: usize) -> i64 {
        self.freq[axis_index]
    }
    /// Wavevector component for one axis index.
    pub fn xi_axis(&self, axis_index: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.box_len * self.freq[axis_index] as f64
    }
    pub fn xi2(&self) -> &[f64] {
        &self.xi2
    }
    /// Largest |xi| representable on the grid (corner mode).
    pub fn xi_max(&self) -> f64 {
        let axis = 2.0 * std::f64::consts::PI / self.box_len * (self.n as f64 / 2.0);
        axis * (self.d as f64).sqrt()
    }
    /// Largest |xi_i| representable along one axis.
    pub fn xi_axis_max(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_len * (self.n as f64 / 2.0)
    }
    /// Decompose a flat index into per-axis indices (axis 0 slowest).
    pub fn axis_indices(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.d).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
    }
    /// Physical coordinates of a flat index.
    pub fn coords(&self, idx: usize, out: &mut [f64]) {
        let mut axis = [0usize; 3];
        self.axis_indices(idx, &mut axis[..self.d]);
        let h = self.box_len / self.n as f64;
        for a in 0..self.d {
            out[a] = axis[a] as f64 * h;
        }
    }

    /// Two grids are compatible when they describe the same lattice.
    pub fn same_layout(&self, other: &SpectralGrid) -> bool {
        self.d == other.d && self.n == other.n && self.box_len.to_bits() == other.box_len.to_bits()
    }

    fn take_scratch(&self, len: usize) -> Vec<Complex64> {
        let mut pool = self.scratch_pool.lock().unwrap();
        let mut buf = pool.pop().unwrap_or_default();
        buf.clear();
        buf.resize(len, Complex64::new(0.0, 0.0));
        buf
    }
    fn put_scratch(&self, buf: Vec<Complex64>) {
        self.scratch_pool.lock().unwrap().push(buf);
    }

    fn transform_axis(&self, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let total = self.total();
        // Stride between consecutive entries along `axis` (axis 0 slowest).
        let stride = n.pow((self.d - 1 - axis) as u32);
        let mut line = self.take_scratch(n);
        let mut scratch = self.take_scratch(fft.get_inplace_scratch_len());
        let block = stride * n;
        let mut base = 0;
        while base < total {
            for inner in 0..stride {
                let start = base + inner;
                for k in 0..n {
                    line[k] = data[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for k in 0..n {
                    data[start + k * stride] = line[k];
                }
            }
            base += block;
        }
        self.put_scratch(scratch);
        self.put_scratch(line);
    }

    /// Unnormalized forward transform, in place.
    pub fn fft_forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.total(), "field length does not match grid");
        for axis in 0..self.d {
            self.transform_axis(data, axis, &self.fwd);
        }
    }

    /// Inverse transform with the 1/n^d normalization, in place.
    pub fn fft_inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.total(), "field length does not match grid");
        for axis in 0..self.d {
            self.transform_axis(data, axis, &self.inv);
        }
        let s = 1.0 / self.total() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    pub(crate) fn lp_profiles_cache(&self) -> &OnceLock<Vec<Vec<f64>>> {
        &self.lp_profiles
    }
    pub(crate) fn eta_tables_cache(&self) -> &OnceLock<crate::decomp::EtaTables> {
        &self.eta_tables
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavevectors_symmetric_with_single_nyquist() {
        let g = SpectralGrid::new(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        let freqs: Vec<i64> = (0..8).map(|i| g.freq_int(i)).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        let mut sorted = freqs.clone();
        sorted.sort();
        assert_eq!(sorted, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        // xi = integer frequencies on the 2*pi box
        assert!((g.xi_axis(3) - 3.0).abs() < 1e-15);
        assert!((g.xi_axis(4) + 4.0).abs() < 1e-15);
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(SpectralGrid::new(0, 8, 1.0).is_err());
        assert!(SpectralGrid::new(4, 8, 1.0).is_err());
        assert!(SpectralGrid::new(2, 12, 1.0).is_err());
        assert!(SpectralGrid::new(2, 4, 1.0).is_err());
        assert!(SpectralGrid::new(2, 8, 0.0).is_err());
        assert!(SpectralGrid::new(2, 8, -1.0).is_err());
        assert!(SpectralGrid::new(2, 8, f64::NAN).is_err());
        assert!(SpectralGrid::new(3, 8, 6.0).is_ok());
    }

    #[test]
    fn xi2_table_matches_axis_decomposition() {
        let g = SpectralGrid::new(2, 8, std::f64::consts::PI).unwrap();
        let mut axis = [0usize; 2];
        for idx in 0..g.total() {
            g.axis_indices(idx, &mut axis);
            let x0 = g.xi_axis(axis[0]);
            let x1 = g.xi_axis(axis[1]);
            assert!((g.xi2()[idx] - (x0 * x0 + x1 * x1)).abs() < 1e-12);
        }
    }
}
