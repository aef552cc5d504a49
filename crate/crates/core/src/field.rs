//! Complex scalar fields on a spectral grid, tagged by the space they
//! currently live in. Transforms are explicit; mixing representations is a
//! bug and panics.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use crate::grid::SpectralGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Physical,
    Spectral,
}

#[derive(Clone)]
pub struct ComplexField {
    grid: Arc<SpectralGrid>,
    data: Vec<Complex64>,
    repr: Repr,
}

impl std::fmt::Debug for ComplexField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComplexField")
            .field("grid", &self.grid)
            .field("repr", &self.repr)
            .finish()
    }
}

impl ComplexField {
    pub fn zeros(grid: Arc<SpectralGrid>, repr: Repr) -> Self {
        let data = vec![Complex64::new(0.0, 0.0); grid.total()];
        ComplexField { grid, data, repr }
    }

    pub fn from_data(grid: Arc<SpectralGrid>, data: Vec<Complex64>, repr: Repr) -> Self {
        assert_eq!(data.len(), grid.total(), "field length does not match grid");
        ComplexField { grid, data, repr }
    }

    /// Sample a physical-space function at the grid points.
    pub fn from_fn(grid: Arc<SpectralGrid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); grid.total()];
        let mut x = [0.0f64; 3];
        let d = grid.dim();
        for (idx, v) in data.iter_mut().enumerate() {
            grid.coords(idx, &mut x[..d]);
            *v = f(&x[..d]);
        }
        ComplexField { grid, data, repr: Repr::Physical }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }
    pub fn repr(&self) -> Repr {
        self.repr
    }
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
    /// Representation escape hatch for routines that build coefficients
    /// directly; caller asserts the tag matches what it wrote.
    pub fn set_repr(&mut self, repr: Repr) {
        self.repr = repr;
    }

    pub fn assert_repr(&self, want: Repr) {
        assert_eq!(self.repr, want, "field is in the wrong representation");
    }

    pub fn to_spectral(&mut self) {
        if self.repr == Repr::Physical {
            self.grid.fft_forward(&mut self.data);
            self.repr = Repr::Spectral;
        }
    }

    pub fn to_physical(&mut self) {
        if self.repr == Repr::Spectral {
            self.grid.fft_inverse(&mut self.data);
            self.repr = Repr::Physical;
        }
    }

    pub fn spectral_clone(&self) -> Self {
        let mut c = self.clone();
        c.to_spectral();
        c
    }
    pub fn physical_clone(&self) -> Self {
        let mut c = self.clone();
        c.to_physical();
        c
    }

    /// self += a * other. Both fields must share grid and representation.
    pub fn axpy(&mut self, a: Complex64, other: &ComplexField) {
        assert!(self.grid.same_layout(&other.grid), "grid mismatch");
        assert_eq!(self.repr, other.repr, "representation mismatch");
        for (y, x) in self.data.iter_mut().zip(other.data.iter()) {
            *y += a * x;
        }
    }

    pub fn scale(&mut self, a: Complex64) {
        for v in self.data.iter_mut() {
            *v *= a;
        }
    }

    /// L^2 inner product <self, other> = integral conj(self) * other,
    /// evaluated in whichever space both fields share.
    pub fn inner(&self, other: &ComplexField) -> Complex64 {
        assert!(self.grid.same_layout(&other.grid), "grid mismatch");
        assert_eq!(self.repr, other.repr, "representation mismatch");
        let w = match self.repr {
            Repr::Physical => self.grid.cell_volume(),
            Repr::Spectral => self.grid.spectral_measure(),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            acc += a.conj() * b;
        }
        acc * w
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Deterministic smooth random field: spectral coefficients with uniform
/// random phases and amplitude exp(-decay * |xi|), returned in physical
/// space with unit L^2 norm.
pub fn random_smooth(grid: &Arc<SpectralGrid>, seed: u64, decay: f64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = ComplexField::zeros(grid.clone(), Repr::Spectral);
    for idx in 0..grid.total() {
        let amp = (-decay * grid.xi2()[idx].sqrt()).exp();
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        f.data_mut()[idx] = Complex64::new(amp * re, amp * im);
    }
    f.to_physical();
    let n = f.norm_l2();
    if n > 0.0 {
        f.scale(Complex64::new(1.0 / n, 0.0));
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> Arc<SpectralGrid> {
        SpectralGrid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        let g = grid2();
        for seed in 0..10u64 {
            let f = random_smooth(&g, seed, 0.3);
            let mut h = f.clone();
            h.to_spectral();
            h.to_physical();
            let err: f64 = f
                .data()
                .iter()
                .zip(h.data().iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "seed {seed}: round trip error {err}");
        }
    }

    #[test]
    fn parseval_holds_between_spaces() {
        let g = grid2();
        for seed in 0..10u64 {
            let f = random_smooth(&g, seed, 0.2);
            let phys = f.norm_l2();
            let spec = f.spectral_clone().norm_l2();
            assert!(
                (phys - spec).abs() < 1e-12 * phys.max(1.0),
                "seed {seed}: {phys} vs {spec}"
            );
        }
    }

    #[test]
    fn plane_wave_lands_on_one_coefficient() {
        let g = SpectralGrid::new(1, 16, 2.0 * std::f64::consts::PI).unwrap();
        let f = ComplexField::from_fn(g.clone(), |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let mut s = f.clone();
        s.to_spectral();
        for idx in 0..g.total() {
            let want = if g.freq_int(idx) == 3 { 16.0 } else { 0.0 };
            assert!(
                (s.data()[idx] - Complex64::new(want, 0.0)).norm() < 1e-10,
                "mode {idx}"
            );
        }
        // L^2 norm of a unit-modulus function on [0, 2*pi) is sqrt(2*pi).
        assert!((f.norm_l2() - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn inner_product_conjugate_linear_in_first_slot() {
        let g = grid2();
        let f = random_smooth(&g, 7, 0.2);
        let h = random_smooth(&g, 8, 0.2);
        let a = Complex64::new(0.3, -1.2);
        let mut af = f.clone();
        af.scale(a);
        let lhs = af.inner(&h);
        let rhs = a.conj() * f.inner(&h);
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
