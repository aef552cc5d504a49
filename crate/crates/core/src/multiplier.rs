//! Fourier multipliers with radial symbols. A multiplier stores its symbol
//! sampled on the grid's modes and acts on spectral-space fields, either
//! directly or as the phase exp(i * t * symbol).

use num_complex::Complex64;
use std::sync::Arc;

use crate::field::{ComplexField, Repr};
use crate::grid::SpectralGrid;

pub struct FourierMultiplier {
    grid: Arc<SpectralGrid>,
    symbol: Vec<f64>,
}

impl FourierMultiplier {
    /// Symbol given as a function of |xi|^2.
    pub fn from_xi2(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Self {
        let symbol = grid.xi2().iter().map(|&x| f(x)).collect();
        FourierMultiplier { grid: grid.clone(), symbol }
    }

    /// sqrt(c^2 + |xi|^2).
    pub fn bracket_c(grid: &Arc<SpectralGrid>, c: f64) -> Self {
        assert!(c > 0.0);
        Self::from_xi2(grid, |xi2| (c * c + xi2).sqrt())
    }

    /// (c / sqrt(c^2 + |xi|^2))^p. Bounded by 1 for p >= 0.
    pub fn bracket_power(grid: &Arc<SpectralGrid>, c: f64, p: f64) -> Self {
        assert!(c > 0.0);
        Self::from_xi2(grid, |xi2| (c / (c * c + xi2).sqrt()).powf(p))
    }

    /// |xi|^2, the symbol of -Laplacian.
    pub fn neg_laplacian(grid: &Arc<SpectralGrid>) -> Self {
        Self::from_xi2(grid, |xi2| xi2)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Multiply spectral coefficients by the symbol.
    pub fn apply_to(&self, f: &mut ComplexField) {
        f.assert_repr(Repr::Spectral);
        assert!(self.grid.same_layout(f.grid()), "grid mismatch");
        for (v, s) in f.data_mut().iter_mut().zip(self.symbol.iter()) {
            *v *= s;
        }
    }

    /// Multiply spectral coefficients by exp(i * t * symbol).
    pub fn apply_phase_to(&self, t: f64, f: &mut ComplexField) {
        f.assert_repr(Repr::Spectral);
        assert!(self.grid.same_layout(f.grid()), "grid mismatch");
        for (v, s) in f.data_mut().iter_mut().zip(self.symbol.iter()) {
            *v *= Complex64::from_polar(1.0, t * s);
        }
    }

    /// Pointwise product of symbols.
    pub fn compose(&self, other: &FourierMultiplier) -> FourierMultiplier {
        assert!(self.grid.same_layout(&other.grid), "grid mismatch");
        let symbol = self
            .symbol
            .iter()
            .zip(other.symbol.iter())
            .map(|(a, b)| a * b)
            .collect();
        FourierMultiplier { grid: self.grid.clone(), symbol }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_smooth;

    #[test]
    fn plane_wave_is_eigenfunction() {
        let g = SpectralGrid::new(1, 32, 2.0 * std::f64::consts::PI).unwrap();
        let m = FourierMultiplier::bracket_c(&g, 2.0);
        let mut f = ComplexField::from_fn(g.clone(), |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let orig = f.clone();
        f.to_spectral();
        m.apply_to(&mut f);
        f.to_physical();
        // eigenvalue sqrt(c^2 + k^2) = sqrt(4 + 9)
        let lam = 13.0f64.sqrt();
        let err: f64 = f
            .data()
            .iter()
            .zip(orig.data().iter())
            .map(|(a, b)| (a - lam * b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "eigenvalue error {err}");
    }

    #[test]
    fn real_symbol_preserves_hermitian_symmetry() {
        // A real-valued physical field stays real after a real radial symbol.
        let g = SpectralGrid::new(2, 16, 4.0).unwrap();
        let mut f = random_smooth(&g, 11, 0.4);
        for v in f.data_mut().iter_mut() {
            *v = Complex64::new(v.re, 0.0);
        }
        let m = FourierMultiplier::bracket_power(&g, 3.0, 2.0);
        f.to_spectral();
        m.apply_to(&mut f);
        f.to_physical();
        let imag_max: f64 = f.data().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(imag_max < 1e-13, "imaginary leak {imag_max}");
    }

    #[test]
    fn bracket_times_ratio_power_is_constant_c() {
        let g = SpectralGrid::new(1, 16, 3.0).unwrap();
        let c = 5.0;
        let prod = FourierMultiplier::bracket_c(&g, c)
            .compose(&FourierMultiplier::bracket_power(&g, c, 1.0));
        for &s in prod.symbol() {
            assert!((s - c).abs() < 1e-12 * c);
        }
    }

    #[test]
    fn phase_application_is_unitary_and_inverts() {
        let g = SpectralGrid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let m = FourierMultiplier::bracket_c(&g, 3.0);
        for seed in 0..5u64 {
            let f = random_smooth(&g, seed, 0.3);
            let mut s = f.spectral_clone();
            let n0 = s.norm_l2();
            m.apply_phase_to(0.77, &mut s);
            assert!((s.norm_l2() - n0).abs() < 1e-12 * n0);
            m.apply_phase_to(-0.77, &mut s);
            s.to_physical();
            let err: f64 = s
                .data()
                .iter()
                .zip(f.data().iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "seed {seed}: {err}");
        }
    }
}
