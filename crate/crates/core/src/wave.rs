//! Change of variables between the real wave pair (u, u_t/c^2) and the
//! complex first-order field the solvers evolve.

use num_complex::Complex64;

use crate::field::ComplexField;
use crate::multiplier::FourierMultiplier;
use crate::{LabError, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Largest |Im| relative to the field scale before a "real" input is
/// rejected.
const REALNESS_TOL: f64 = 1e-10;

pub fn imaginary_fraction(f: &ComplexField) -> f64 {
    let p = f.physical_clone();
    let scale = p.max_abs().max(1e-300);
    p.data().iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale
}

fn require_real(f: &ComplexField, what: &str) -> Result<()> {
    let frac = imaginary_fraction(f);
    if frac > REALNESS_TOL {
        return Err(LabError::invalid(format!(
            "{what} must be real-valued; imaginary fraction {frac:.3e}"
        )));
    }
    Ok(())
}

/// psi = [ (<xi>/c)^{1/2} u - i (c/<xi>)^{1/2} v ] / sqrt(2), spectral side.
pub fn to_first_order(u: &ComplexField, v: &ComplexField, c: f64) -> Result<ComplexField> {
    if !u.grid().same_layout(v.grid()) {
        return Err(LabError::invalid("u and v live on different grids"));
    }
    require_real(u, "u")?;
    require_real(v, "v")?;
    let grid = u.grid();
    let a_half = FourierMultiplier::bracket_power(grid, c, -0.5);
    let b_half = FourierMultiplier::bracket_power(grid, c, 0.5);
    let mut us = u.spectral_clone();
    a_half.apply_to(&mut us);
    let mut vs = v.spectral_clone();
    b_half.apply_to(&mut vs);
    us.scale(Complex64::new(1.0 / SQRT2, 0.0));
    us.axpy(Complex64::new(0.0, -1.0 / SQRT2), &vs);
    Ok(us)
}

/// Inverse of `to_first_order`: u = sqrt(2) (c/<xi>)^{1/2} Re psi,
/// v = -sqrt(2) (<xi>/c)^{1/2} Im psi. Outputs are physical and real.
pub fn from_first_order(psi: &ComplexField, c: f64) -> (ComplexField, ComplexField) {
    let grid = psi.grid().clone();
    let p = psi.physical_clone();
    let mut re = ComplexField::zeros(grid.clone(), crate::field::Repr::Physical);
    let mut im = ComplexField::zeros(grid.clone(), crate::field::Repr::Physical);
    for (k, z) in p.data().iter().enumerate() {
        re.data_mut()[k] = Complex64::new(z.re, 0.0);
        im.data_mut()[k] = Complex64::new(z.im, 0.0);
    }
    let b_half = FourierMultiplier::bracket_power(&grid, c, 0.5);
    let a_half = FourierMultiplier::bracket_power(&grid, c, -0.5);
    re.to_spectral();
    b_half.apply_to(&mut re);
    re.scale(Complex64::new(SQRT2, 0.0));
    re.to_physical();
    im.to_spectral();
    a_half.apply_to(&mut im);
    im.scale(Complex64::new(-SQRT2, 0.0));
    im.to_physical();
    (re, im)
}
