//! Discrete functionals of a field with L^2 gradients. The gradient
//! convention: perturbing psi by t*eta moves the value by
//! 2 Re integral g * conj(eta) dv + O(t^2), so Hamiltonian flow reads
//! psi_t = i g. Brackets of two real functionals reduce to
//! 2 integral Im(conj(g_F) g_G) dv, which at a frozen amplitude agrees
//! with the pinned monomial rule; tests below pin that agreement.

use num_complex::Complex64;

use crate::field::{ComplexField, Repr};
use crate::formal::FormalSum;
use crate::multiplier::FourierMultiplier;

pub trait Functional {
    fn name(&self) -> &str;
    fn value(&self, psi: &ComplexField) -> f64;
    fn gradient(&self, psi: &ComplexField) -> ComplexField;
}

/// integral |psi|^2.
pub struct MassFunctional;

impl Functional for MassFunctional {
    fn name(&self) -> &str {
        "mass"
    }
    fn value(&self, psi: &ComplexField) -> f64 {
        let p = psi.physical_clone();
        p.inner(&p).re
    }
    fn gradient(&self, psi: &ComplexField) -> ComplexField {
        psi.physical_clone()
    }
}

/// integral conj(psi) (A psi) for a real Fourier symbol A.
pub struct MultiplierQuadratic {
    name: String,
    mult: FourierMultiplier,
}

impl MultiplierQuadratic {
    pub fn new(name: impl Into<String>, mult: FourierMultiplier) -> Self {
        MultiplierQuadratic { name: name.into(), mult }
    }
}

impl Functional for MultiplierQuadratic {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, psi: &ComplexField) -> f64 {
        let s = psi.spectral_clone();
        let mut a = s.clone();
        self.mult.apply_to(&mut a);
        s.inner(&a).re
    }
    fn gradient(&self, psi: &ComplexField) -> ComplexField {
        let mut a = psi.spectral_clone();
        self.mult.apply_to(&mut a);
        a.to_physical();
        a
    }
}

/// integral of a pointwise polynomial density sum_ab c_ab psi^a conj(psi)^b.
/// Real-valued when c_ba = conj(c_ab); construction does not enforce it,
/// value() returns the real part.
pub struct MonomialFunctional {
    name: String,
    terms: Vec<(u32, u32, Complex64)>,
}

impl MonomialFunctional {
    pub fn new(name: impl Into<String>, terms: Vec<(u32, u32, Complex64)>) -> Self {
        MonomialFunctional { name: name.into(), terms }
    }

    pub fn from_formal(name: impl Into<String>, f: &FormalSum, scale: f64) -> Self {
        let terms = f
            .iter()
            .map(|(&(a, b), c)| (a, b, c.to_complex() * scale))
            .collect();
        MonomialFunctional { name: name.into(), terms }
    }

    pub fn terms(&self) -> &[(u32, u32, Complex64)] {
        &self.terms
    }

    fn density(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b, c) in &self.terms {
            acc += c * z.powi(a as i32) * z.conj().powi(b as i32);
        }
        acc
    }

    fn density_dbar(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b, c) in &self.terms {
            if b == 0 {
                continue;
            }
            acc += c * b as f64 * z.powi(a as i32) * z.conj().powi(b as i32 - 1);
        }
        acc
    }
}

impl Functional for MonomialFunctional {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, psi: &ComplexField) -> f64 {
        let p = psi.physical_clone();
        let cell = p.grid().cell_volume();
        let mut acc = Complex64::new(0.0, 0.0);
        for &z in p.data() {
            acc += self.density(z);
        }
        (acc * cell).re
    }
    fn gradient(&self, psi: &ComplexField) -> ComplexField {
        let p = psi.physical_clone();
        let mut g = ComplexField::zeros(p.grid().clone(), Repr::Physical);
        for (out, &z) in g.data_mut().iter_mut().zip(p.data()) {
            *out = self.density_dbar(z);
        }
        g
    }
}

/// Weighted sum of functionals.
pub struct SumFunctional {
    name: String,
    parts: Vec<(f64, Box<dyn Functional + Send + Sync>)>,
}

impl SumFunctional {
    pub fn new(name: impl Into<String>, parts: Vec<(f64, Box<dyn Functional + Send + Sync>)>) -> Self {
        SumFunctional { name: name.into(), parts }
    }
}

impl Functional for SumFunctional {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, psi: &ComplexField) -> f64 {
        self.parts.iter().map(|(w, f)| w * f.value(psi)).sum()
    }
    fn gradient(&self, psi: &ComplexField) -> ComplexField {
        let mut g = ComplexField::zeros(psi.grid().clone(), Repr::Physical);
        for (w, f) in &self.parts {
            g.axpy(Complex64::new(*w, 0.0), &f.gradient(psi));
        }
        g
    }
}

fn laplacian_physical(psi: &ComplexField) -> ComplexField {
    let mut d = psi.spectral_clone();
    let grid = d.grid().clone();
    for (z, &xi2) in d.data_mut().iter_mut().zip(grid.xi2().iter()) {
        *z *= -xi2;
    }
    d.to_physical();
    d
}

/// coeff * integral |psi|^{2(l-1)} (conj(psi) Lap psi + psi Lap conj(psi)),
/// the phase-invariant derivative coupling of the second-order correction.
pub struct MixedLaplaceFunctional {
    name: String,
    l: u32,
    coeff: f64,
}

impl MixedLaplaceFunctional {
    pub fn new(name: impl Into<String>, l: u32, coeff: f64) -> Self {
        assert!(l >= 2);
        MixedLaplaceFunctional { name: name.into(), l, coeff }
    }
}

impl Functional for MixedLaplaceFunctional {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, psi: &ComplexField) -> f64 {
        let p = psi.physical_clone();
        let dp = laplacian_physical(psi);
        let lm1 = self.l as i32 - 1;
        let mut acc = 0.0;
        for (z, d) in p.data().iter().zip(dp.data()) {
            acc += z.norm_sqr().powi(lm1) * 2.0 * (z.conj() * d).re;
        }
        acc * p.grid().cell_volume() * self.coeff
    }
    fn gradient(&self, psi: &ComplexField) -> ComplexField {
        let p = psi.physical_clone();
        let dp = laplacian_physical(psi);
        let grid = p.grid().clone();
        let l = self.l as i32;
        let mut pointwise = ComplexField::zeros(grid.clone(), Repr::Physical);
        let mut inner = ComplexField::zeros(grid.clone(), Repr::Physical);
        for (((out, q), z), d) in pointwise
            .data_mut()
            .iter_mut()
            .zip(inner.data_mut().iter_mut())
            .zip(p.data())
            .zip(dp.data())
        {
            let m = z.norm_sqr().powi(l - 1);
            let m2 = z.norm_sqr().powi(l - 2);
            *out = l as f64 * m * d + (l - 1) as f64 * m2 * z * z * d.conj();
            *q = m * z;
        }
        // the remaining term is Lap(|psi|^{2(l-1)} psi)
        inner.to_spectral();
        for (z, &xi2) in inner.data_mut().iter_mut().zip(grid.xi2().iter()) {
            *z *= -xi2;
        }
        inner.to_physical();
        pointwise.axpy(Complex64::new(1.0, 0.0), &inner);
        pointwise.scale(Complex64::new(self.coeff, 0.0));
        pointwise
    }
}

/// coeff * integral q^{2l-1} Lap q with q = psi + conj(psi): the
/// second-order interaction before phase averaging.
pub struct RealLaplaceCoupling {
    name: String,
    l: u32,
    coeff: f64,
}

impl RealLaplaceCoupling {
    pub fn new(name: impl Into<String>, l: u32, coeff: f64) -> Self {
        assert!(l >= 2);
        RealLaplaceCoupling { name: name.into(), l, coeff }
    }
}

impl Functional for RealLaplaceCoupling {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, psi: &ComplexField) -> f64 {
        let p = psi.physical_clone();
        let dp = laplacian_physical(psi);
        let m = 2 * self.l as i32 - 1;
        let mut acc = 0.0;
        for (z, d) in p.data().iter().zip(dp.data()) {
            // Lap q = 2 Re Lap psi by evenness of the symbol
            acc += (2.0 * z.re).powi(m) * 2.0 * d.re;
        }
        acc * p.grid().cell_volume() * self.coeff
    }
    fn gradient(&self, psi: &ComplexField) -> ComplexField {
        let p = psi.physical_clone();
        let dp = laplacian_physical(psi);
        let grid = p.grid().clone();
        let m = 2 * self.l as i32 - 1;
        let mut pointwise = ComplexField::zeros(grid.clone(), Repr::Physical);
        let mut inner = ComplexField::zeros(grid.clone(), Repr::Physical);
        for (((out, w), z), d) in pointwise
            .data_mut()
            .iter_mut()
            .zip(inner.data_mut().iter_mut())
            .zip(p.data())
            .zip(dp.data())
        {
            let q = 2.0 * z.re;
            let dq = 2.0 * d.re;
            *out = Complex64::new(m as f64 * q.powi(m - 1) * dq, 0.0);
            *w = Complex64::new(q.powi(m), 0.0);
        }
        inner.to_spectral();
        for (z, &xi2) in inner.data_mut().iter_mut().zip(grid.xi2().iter()) {
            *z *= -xi2;
        }
        inner.to_physical();
        pointwise.axpy(Complex64::new(1.0, 0.0), &inner);
        pointwise.scale(Complex64::new(self.coeff, 0.0));
        pointwise
    }
}

/// The named observables of the slow-flow expansion at coupling `lambda`
/// and degree parameter `l`, in a fixed order:
/// h0, h1, h2, F1, F1avg, chi1, F2, F2avg, Z2. All values are real on any
/// field; gradients feed numeric_bracket and the finite-difference check.
pub fn named_suite(
    grid: &std::sync::Arc<crate::grid::SpectralGrid>,
    lambda: f64,
    l: u32,
) -> Vec<Box<dyn Functional + Send + Sync>> {
    use crate::derive::{chi_order1, combined_quintic, flow_beta, interaction_order1};
    use crate::formal::GaussRat;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    let beta = flow_beta(l).to_f64().unwrap();
    let quintic = {
        let mut s = FormalSum::new();
        s.add_term(
            2 * l - 1,
            2 * l - 1,
            GaussRat::from_parts(combined_quintic(l), BigRational::from_integer(0.into())),
        );
        MonomialFunctional::from_formal("Z2-quintic", &s, lambda * lambda)
    };
    vec![
        Box::new(MultiplierQuadratic::new(
            "h0",
            FourierMultiplier::from_xi2(grid, |_| 1.0),
        )),
        Box::new(MultiplierQuadratic::new(
            "h1",
            FourierMultiplier::from_xi2(grid, |xi2| 0.5 * xi2),
        )),
        Box::new(MultiplierQuadratic::new(
            "h2",
            FourierMultiplier::from_xi2(grid, |xi2| -0.125 * xi2 * xi2),
        )),
        Box::new(MonomialFunctional::from_formal(
            "F1",
            &interaction_order1(l),
            lambda,
        )),
        Box::new(MonomialFunctional::from_formal(
            "F1avg",
            &interaction_order1(l).gauge_average(),
            lambda,
        )),
        Box::new(MonomialFunctional::from_formal(
            "chi1",
            &chi_order1(l),
            lambda,
        )),
        Box::new(RealLaplaceCoupling::new(
            "F2",
            l,
            lambda / 2f64.powi(l as i32 + 2),
        )),
        Box::new(MixedLaplaceFunctional::new("F2avg", l, lambda * beta)),
        Box::new(SumFunctional::new(
            "Z2",
            vec![
                (1.0, Box::new(quintic) as Box<dyn Functional + Send + Sync>),
                (
                    1.0,
                    Box::new(MixedLaplaceFunctional::new("Z2-mixed", l, lambda * beta)),
                ),
            ],
        )),
    ]
}

/// {F, G} evaluated at psi.
pub fn numeric_bracket(f: &dyn Functional, g: &dyn Functional, psi: &ComplexField) -> f64 {
    let gf = f.gradient(psi).physical_clone();
    let gg = g.gradient(psi).physical_clone();
    2.0 * gf.inner(&gg).im
}

/// Worst relative defect of the gradient against central differences along
/// deterministic random directions.
pub fn gradient_check(f: &dyn Functional, psi: &ComplexField, seed: u64, h: f64, dirs: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..dirs {
        let eta = crate::field::random_smooth(psi.grid(), seed.wrapping_add(k as u64), 0.2);
        let mut plus = psi.physical_clone();
        plus.axpy(Complex64::new(h, 0.0), &eta);
        let mut minus = psi.physical_clone();
        minus.axpy(Complex64::new(-h, 0.0), &eta);
        let fd = (f.value(&plus) - f.value(&minus)) / (2.0 * h);
        let gr = 2.0 * f.gradient(psi).physical_clone().inner(&eta).re;
        let scale = fd.abs().max(gr.abs()).max(1e-12);
        worst = worst.max((fd - gr).abs() / scale);
    }
    worst
}

/// Average of F(e^{i theta} psi) over equispaced phase nodes. Exact for
/// polynomial densities of degree below the node count.
pub fn gauge_average_numeric(f: &dyn Functional, psi: &ComplexField, nodes: usize) -> f64 {
    assert!(nodes >= 2);
    let mut acc = 0.0;
    for k in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
        let mut rotated = psi.physical_clone();
        rotated.scale(Complex64::from_polar(1.0, theta));
        acc += f.value(&rotated);
    }
    acc / nodes as f64
}
