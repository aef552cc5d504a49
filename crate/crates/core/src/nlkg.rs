//! Relativistic wave flow in first-order form:
//! psi_t = i c<xi> psi + i (lambda/2^l) S [ (S (psi + conj psi))^{2l-1} ],
//! S = (c/<xi>)^{1/2}, <xi> = sqrt(c^2 + |xi|^2). The conserved energy is
//! <conj psi, c<xi> psi> + (lambda/2l) integral (S(psi + conj psi)/sqrt2)^{2l}.

use std::sync::Arc;

use num_complex::Complex64;

use crate::field::ComplexField;
use crate::functionals::Functional;
use crate::grid::SpectralGrid;
use crate::integrator::{evolve, FlowRhs, Trajectory};
use crate::multiplier::FourierMultiplier;
use crate::params::SimParams;
use crate::Result;

pub struct NlkgFlow {
    grid: Arc<SpectralGrid>,
    lambda: f64,
    l: u32,
    sym: FourierMultiplier,
    smoother: FourierMultiplier,
}

impl NlkgFlow {
    pub fn new(params: &SimParams) -> Result<Self> {
        params.validate()?;
        let c = params.c;
        let grid = params.grid.clone();
        let sym = FourierMultiplier::from_xi2(&grid, |xi2| c * (c * c + xi2).sqrt());
        let smoother = FourierMultiplier::bracket_power(&grid, c, 0.5);
        Ok(NlkgFlow {
            grid,
            lambda: params.lambda,
            l: params.l,
            sym,
            smoother,
        })
    }

    /// S(psi + conj psi) in physical space; real by evenness of S.
    fn smoothed_real_part(&self, psi: &ComplexField) -> ComplexField {
        let mut z = psi.spectral_clone();
        self.smoother.apply_to(&mut z);
        z.to_physical();
        for w in z.data_mut() {
            *w = Complex64::new(2.0 * w.re, 0.0);
        }
        z
    }
}

impl FlowRhs for NlkgFlow {
    fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn symbol(&self) -> &[f64] {
        self.sym.symbol()
    }

    fn has_nonlinear(&self) -> bool {
        self.lambda != 0.0
    }

    fn nonlinear(&self, psi: &ComplexField) -> ComplexField {
        let mut q = self.smoothed_real_part(psi);
        let p = 2 * self.l as i32 - 1;
        for w in q.data_mut() {
            *w = Complex64::new(w.re.powi(p), 0.0);
        }
        q.to_spectral();
        self.smoother.apply_to(&mut q);
        q.scale(Complex64::new(self.lambda / 2f64.powi(self.l as i32), 0.0));
        q
    }

    fn energy(&self, psi: &ComplexField) -> f64 {
        let s = psi.spectral_clone();
        let measure = self.grid.spectral_measure();
        let mut quad = 0.0;
        for (z, &m) in s.data().iter().zip(self.sym.symbol().iter()) {
            quad += m * z.norm_sqr();
        }
        quad *= measure;
        if self.lambda == 0.0 {
            return quad;
        }
        let q = self.smoothed_real_part(psi);
        let mut quart = 0.0;
        let p = 2 * self.l as i32;
        for w in q.data() {
            quart += (w.re / std::f64::consts::SQRT_2).powi(p);
        }
        quart *= self.grid.cell_volume() * self.lambda / (2.0 * self.l as f64);
        quad + quart
    }

    fn name(&self) -> &'static str {
        "wave"
    }
}

pub fn nlkg_energy(psi: &ComplexField, params: &SimParams) -> Result<f64> {
    Ok(NlkgFlow::new(params)?.energy(psi))
}

pub fn nlkg_evolve(
    psi0: &ComplexField,
    params: &SimParams,
    stride: usize,
    step_budget: Option<u64>,
) -> Result<Trajectory> {
    let flow = NlkgFlow::new(params)?;
    evolve(&flow, psi0, params, stride, step_budget)
}

/// The conserved energy as a checkable functional; its gradient is the
/// full flow right-hand side, so a finite-difference pass validates the
/// solver's vector field against its invariant.
pub struct NlkgEnergy {
    flow: NlkgFlow,
}

impl NlkgEnergy {
    pub fn new(params: &SimParams) -> Result<Self> {
        Ok(NlkgEnergy {
            flow: NlkgFlow::new(params)?,
        })
    }
}

impl Functional for NlkgEnergy {
    fn name(&self) -> &str {
        "wave-energy"
    }
    fn value(&self, psi: &ComplexField) -> f64 {
        self.flow.energy(psi)
    }
    fn gradient(&self, psi: &ComplexField) -> ComplexField {
        let mut g = psi.spectral_clone();
        self.flow.sym.apply_to(&mut g);
        if self.flow.has_nonlinear() {
            let n = self.flow.nonlinear(psi);
            g.axpy(Complex64::new(1.0, 0.0), &n);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_smooth, Repr};
    use crate::functionals::gradient_check;
    use crate::wave::{from_first_order, imaginary_fraction, to_first_order};
    use std::f64::consts::TAU;

    fn grid2() -> Arc<SpectralGrid> {
        SpectralGrid::new(2, 32, TAU).unwrap()
    }

    fn small_params(grid: Arc<SpectralGrid>) -> SimParams {
        SimParams::new(2.0, 1.0, 2, 1, grid).with_time(1e-3, 0.2)
    }

    #[test]
    fn linear_run_matches_multiplier_flow() {
        let grid = grid2();
        let mut params = small_params(grid.clone());
        params.lambda = 0.0;
        let psi0 = random_smooth(&grid, 21, 0.7);
        let traj = nlkg_evolve(&psi0, &params, 50, None).unwrap();
        let flow = NlkgFlow::new(&params).unwrap();
        let mut expect = psi0.spectral_clone();
        flow.sym.apply_phase_to(traj.final_time(), &mut expect);
        let mut diff = traj.final_field().clone();
        diff.axpy(Complex64::new(-1.0, 0.0), &expect);
        assert!(diff.max_abs() < 1e-12, "{}", diff.max_abs());
        assert!(traj.energy_drift() < 1e-13);
    }

    #[test]
    fn single_mode_quadratic_energy() {
        let grid = grid2();
        let mut params = small_params(grid.clone());
        params.lambda = 0.0;
        let amp = 0.37;
        let psi = ComplexField::from_fn(grid.clone(), |x| {
            Complex64::from_polar(amp, x[0] + 2.0 * x[1])
        });
        let e = nlkg_energy(&psi, &params).unwrap();
        let c = params.c;
        let vol = TAU.powi(2);
        let expect = c * (c * c + 5.0).sqrt() * amp * amp * vol;
        assert!((e - expect).abs() < 1e-9 * expect.abs(), "{e} vs {expect}");
    }

    #[test]
    fn energy_gradient_is_the_vector_field() {
        let grid = grid2();
        let params = small_params(grid.clone());
        let mut psi = random_smooth(&grid, 7, 0.9);
        psi.scale(Complex64::new(0.5, 0.0));
        let f = NlkgEnergy::new(&params).unwrap();
        let defect = gradient_check(&f, &psi, 40, 1e-5, 4);
        assert!(defect < 1e-7, "gradient defect {defect}");
    }

    #[test]
    fn energy_conserved_on_short_nonlinear_run() {
        let grid = grid2();
        let params = small_params(grid.clone());
        let mut psi0 = random_smooth(&grid, 15, 0.8);
        psi0.scale(Complex64::new(0.1, 0.0));
        let traj = nlkg_evolve(&psi0, &params, 20, None).unwrap();
        assert!(traj.energy_drift() < 1e-10, "{}", traj.energy_drift());
    }

    #[test]
    fn real_wave_structure_is_preserved() {
        let grid = grid2();
        let params = small_params(grid.clone());
        let mk_real = |seed: u64, amp: f64| {
            let f = random_smooth(&grid, seed, 0.8);
            let mut p = f.physical_clone();
            for z in p.data_mut() {
                *z = Complex64::new(amp * z.re, 0.0);
            }
            p
        };
        let u = mk_real(31, 0.2);
        let v = mk_real(32, 0.2);
        let psi0 = to_first_order(&u, &v, params.c).unwrap();
        let traj = nlkg_evolve(&psi0, &params, 200, None).unwrap();
        let (ut, vt) = from_first_order(traj.final_field(), params.c);
        assert!(imaginary_fraction(&ut) < 1e-10);
        assert!(imaginary_fraction(&vt) < 1e-10);
        assert_eq!(ut.repr(), Repr::Physical);
    }
}
