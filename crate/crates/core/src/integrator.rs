//! Integrating-factor RK4 on the twisted variable w = e^{-itL} psi.
//!
//! Flows have the shape psi_t = i L psi + i n(psi) with L a real Fourier
//! symbol. The linear propagator is applied exactly as a phase multiplier,
//! so lambda = 0 runs reproduce the multiplier flow to roundoff. A constant
//! `gauge_rate` part of L can be factored out analytically when n commutes
//! with global phases; the twist then only carries L - gauge_rate, which
//! keeps the trig arguments small, and the missing phase is restored at
//! sampling times.

use std::sync::Arc;

use num_complex::Complex64;

use crate::field::{ComplexField, Repr};
use crate::grid::SpectralGrid;
use crate::params::SimParams;
use crate::{LabError, Result};

pub trait FlowRhs {
    fn grid(&self) -> &Arc<SpectralGrid>;
    /// Dispersion symbol L(xi), same layout as the grid.
    fn symbol(&self) -> &[f64];
    /// Constant factored out of the twist; nonzero only for
    /// phase-equivariant nonlinearities.
    fn gauge_rate(&self) -> f64 {
        0.0
    }
    fn has_nonlinear(&self) -> bool;
    /// n(psi), spectral in, spectral out.
    fn nonlinear(&self, psi: &ComplexField) -> ComplexField;
    /// Conserved quantity reported along the run.
    fn energy(&self, psi: &ComplexField) -> f64;
    fn name(&self) -> &'static str;
}

pub struct Trajectory {
    pub params: SimParams,
    pub flow_name: &'static str,
    pub times: Vec<f64>,
    /// spectral fields with all phases applied
    pub fields: Vec<ComplexField>,
    pub energy: Vec<f64>,
    pub l2: Vec<f64>,
    pub stride: usize,
    pub steps_taken: u64,
    /// the step budget cut the horizon short
    pub truncated: bool,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_field(&self) -> &ComplexField {
        self.fields.last().unwrap()
    }

    /// Relative drift of the reported energy over the whole run.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        let scale = e0.abs().max(1e-300);
        self.energy
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max)
            / scale
    }
}

/// Growth factor of the L^2 norm treated as blow-up.
const BLOWUP_FACTOR: f64 = 1e6;

fn phase_table(eff: &[f64], t: f64, out: &mut [Complex64]) {
    for (o, &s) in out.iter_mut().zip(eff.iter()) {
        let (sin, cos) = (t * s).sin_cos();
        *o = Complex64::new(cos, sin);
    }
}

/// One twisted-RHS evaluation: G = i e^{-i t L} n(e^{i t L} w), with the
/// phase passed as a precomputed table.
fn stage(
    flow: &dyn FlowRhs,
    table: &[Complex64],
    w: &ComplexField,
    out: &mut ComplexField,
) {
    let mut psi = w.clone();
    for (z, ph) in psi.data_mut().iter_mut().zip(table.iter()) {
        *z *= ph;
    }
    let n = flow.nonlinear(&psi);
    debug_assert_eq!(n.repr(), Repr::Spectral);
    out.data_mut().copy_from_slice(n.data());
    for (z, ph) in out.data_mut().iter_mut().zip(table.iter()) {
        *z *= Complex64::new(0.0, 1.0) * ph.conj();
    }
}

pub fn evolve(
    flow: &dyn FlowRhs,
    psi0: &ComplexField,
    params: &SimParams,
    stride: usize,
    step_budget: Option<u64>,
) -> Result<Trajectory> {
    params.validate()?;
    if !psi0.grid().same_layout(flow.grid()) {
        return Err(LabError::invalid("initial field grid does not match flow"));
    }
    if stride == 0 {
        return Err(LabError::invalid("stride must be >= 1"));
    }
    let mut n_steps = params.n_steps();
    let mut truncated = false;
    if let Some(budget) = step_budget {
        if n_steps > budget {
            n_steps = budget.max(1);
            truncated = true;
        }
    }
    let dt = params.dt;
    let gauge = flow.gauge_rate();
    let eff: Vec<f64> = flow.symbol().iter().map(|s| s - gauge).collect();
    let total = flow.grid().total();

    let mut w = psi0.spectral_clone();
    let l2_0 = w.norm_l2().max(1e-300);

    let mut traj = Trajectory {
        params: params.clone(),
        flow_name: flow.name(),
        times: Vec::new(),
        fields: Vec::new(),
        energy: Vec::new(),
        l2: Vec::new(),
        stride,
        steps_taken: 0,
        truncated,
    };

    // e0 holds e^{i t L'} for the current step start; e1 doubles as the
    // sampling phase at the step end and as the next step's e0
    let mut e0 = vec![Complex64::new(1.0, 0.0); total];
    let mut eh = vec![Complex64::new(1.0, 0.0); total];
    let mut e1 = vec![Complex64::new(1.0, 0.0); total];

    let sample = |traj: &mut Trajectory, w: &ComplexField, t: f64, table: &[Complex64]| {
        let mut psi = w.clone();
        let (sin, cos) = (gauge * t).sin_cos();
        let gp = Complex64::new(cos, sin);
        for (z, ph) in psi.data_mut().iter_mut().zip(table.iter()) {
            *z *= gp * ph;
        }
        traj.times.push(t);
        traj.l2.push(psi.norm_l2());
        traj.energy.push(flow.energy(&psi));
        traj.fields.push(psi);
    };

    sample(&mut traj, &w, 0.0, &e0);

    if !flow.has_nonlinear() {
        // w is exactly constant; just emit samples
        for k in 0..n_steps {
            let done = k + 1 == n_steps;
            if (k + 1) % stride as u64 == 0 || done {
                let t = (k + 1) as f64 * dt;
                phase_table(&eff, t, &mut e1);
                sample(&mut traj, &w, t, &e1);
            }
        }
        traj.steps_taken = n_steps;
        return Ok(traj);
    }

    let zero = || ComplexField::zeros(flow.grid().clone(), Repr::Spectral);
    let (mut k1, mut k2, mut k3, mut k4) = (zero(), zero(), zero(), zero());
    let mut tmp = zero();

    for k in 0..n_steps {
        let t = k as f64 * dt;
        phase_table(&eff, t + 0.5 * dt, &mut eh);
        phase_table(&eff, t + dt, &mut e1);

        stage(flow, &e0, &w, &mut k1);
        tmp.data_mut().copy_from_slice(w.data());
        tmp.axpy(Complex64::new(0.5 * dt, 0.0), &k1);
        stage(flow, &eh, &tmp, &mut k2);
        tmp.data_mut().copy_from_slice(w.data());
        tmp.axpy(Complex64::new(0.5 * dt, 0.0), &k2);
        stage(flow, &eh, &tmp, &mut k3);
        tmp.data_mut().copy_from_slice(w.data());
        tmp.axpy(Complex64::new(dt, 0.0), &k3);
        stage(flow, &e1, &tmp, &mut k4);

        let sixth = dt / 6.0;
        for ((((wz, a), b), c), d) in w
            .data_mut()
            .iter_mut()
            .zip(k1.data().iter())
            .zip(k2.data().iter())
            .zip(k3.data().iter())
            .zip(k4.data().iter())
        {
            *wz += sixth * (a + 2.0 * (b + c) + d);
        }

        let l2 = w.norm_l2();
        if !l2.is_finite() || l2 > BLOWUP_FACTOR * l2_0 {
            return Err(LabError::solver(format!(
                "{} blow-up at t = {:.6e}: L2 grew by {:.3e}x",
                flow.name(),
                t + dt,
                l2 / l2_0
            )));
        }

        let done = k + 1 == n_steps;
        if (k + 1) % stride as u64 == 0 || done {
            sample(&mut traj, &w, t + dt, &e1);
        }
        std::mem::swap(&mut e0, &mut e1);
    }
    traj.steps_taken = n_steps;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_smooth;
    use crate::multiplier::FourierMultiplier;
    use std::f64::consts::TAU;

    /// psi_t = i L psi + i a |psi|^2 psi with L = |xi|^2: small NLS-type
    /// flow with closed-form single-mode solutions.
    struct CubicFlow {
        grid: Arc<SpectralGrid>,
        mult: FourierMultiplier,
        a: f64,
    }

    impl CubicFlow {
        fn new(grid: Arc<SpectralGrid>, a: f64) -> Self {
            let mult = FourierMultiplier::neg_laplacian(&grid);
            CubicFlow { grid, mult, a }
        }
    }

    impl FlowRhs for CubicFlow {
        fn grid(&self) -> &Arc<SpectralGrid> {
            &self.grid
        }
        fn symbol(&self) -> &[f64] {
            self.mult.symbol()
        }
        fn has_nonlinear(&self) -> bool {
            self.a != 0.0
        }
        fn nonlinear(&self, psi: &ComplexField) -> ComplexField {
            let mut p = psi.physical_clone();
            for z in p.data_mut() {
                *z *= self.a * z.norm_sqr();
            }
            p.to_spectral();
            p
        }
        fn energy(&self, psi: &ComplexField) -> f64 {
            psi.norm_l2().powi(2)
        }
        fn name(&self) -> &'static str {
            "cubic-test"
        }
    }

    fn grid2() -> Arc<SpectralGrid> {
        SpectralGrid::new(2, 16, TAU).unwrap()
    }

    #[test]
    fn linear_flow_is_exact() {
        let grid = grid2();
        let flow = CubicFlow::new(grid.clone(), 0.0);
        let psi0 = random_smooth(&grid, 3, 0.6);
        let params = SimParams::new(1.0, 0.0, 2, 1, grid.clone()).with_time(0.05, 1.0);
        let traj = evolve(&flow, &psi0, &params, 5, None).unwrap();
        let mut expect = psi0.spectral_clone();
        flow.mult.apply_phase_to(traj.final_time(), &mut expect);
        let mut diff = traj.final_field().clone();
        diff.axpy(Complex64::new(-1.0, 0.0), &expect);
        assert!(diff.max_abs() < 1e-13, "{}", diff.max_abs());
    }

    #[test]
    fn constant_field_cubic_flow_matches_phase_rotation() {
        // psi(0) = A constant: psi(t) = A e^{i a |A|^2 t}
        let grid = grid2();
        let a = 0.7;
        let flow = CubicFlow::new(grid.clone(), a);
        let amp = Complex64::new(0.3, 0.1);
        let psi0 = ComplexField::from_fn(grid.clone(), |_| amp);
        let params = SimParams::new(1.0, 0.0, 2, 1, grid.clone()).with_time(1e-3, 0.5);
        let traj = evolve(&flow, &psi0, &params, 100, None).unwrap();
        let got = traj.final_field().physical_clone();
        let expect = amp * Complex64::from_polar(1.0, a * amp.norm_sqr() * traj.final_time());
        let err = got
            .data()
            .iter()
            .map(|z| (z - expect).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn richardson_order_four() {
        let grid = grid2();
        let flow = CubicFlow::new(grid.clone(), 1.0);
        let psi0 = random_smooth(&grid, 9, 0.8);
        let run = |dt: f64| {
            let params = SimParams::new(1.0, 0.0, 2, 1, grid.clone()).with_time(dt, 0.4);
            evolve(&flow, &psi0, &params, usize::MAX, None)
                .unwrap()
                .final_field()
                .clone()
        };
        let (f1, f2, f3) = (run(0.02), run(0.01), run(0.005));
        let mut d12 = f1.clone();
        d12.axpy(Complex64::new(-1.0, 0.0), &f2);
        let mut d23 = f2.clone();
        d23.axpy(Complex64::new(-1.0, 0.0), &f3);
        let order = (d12.norm_l2() / d23.norm_l2()).log2();
        assert!((order - 4.0).abs() < 0.4, "observed order {order}");
    }

    #[test]
    fn mass_conserved_and_budget_truncates() {
        let grid = grid2();
        let flow = CubicFlow::new(grid.clone(), 1.0);
        let psi0 = random_smooth(&grid, 4, 0.6);
        let params = SimParams::new(1.0, 0.0, 2, 1, grid.clone()).with_time(1e-3, 1.0);
        let traj = evolve(&flow, &psi0, &params, 100, Some(300)).unwrap();
        assert!(traj.truncated);
        assert_eq!(traj.steps_taken, 300);
        assert!((traj.final_time() - 0.3).abs() < 1e-12);
        // |psi|^2 flows conserve mass; RK4 drift stays tiny on this run
        assert!(traj.energy_drift() < 1e-10);
    }
}
