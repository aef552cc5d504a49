//! Exact calculus on gauge monomials. A monomial (a, b) stands for the
//! density psi^a conj(psi)^b with a single pinned Fourier mode, so brackets
//! reduce to index bookkeeping with exact Gaussian-rational coefficients:
//!
//!   {m_ab, m_cd} = -i (a d - b c) m_{a+c-1, b+d-1}
//!
//! The phase generator is m_11; averaging along its flow keeps a = b.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn zero() -> Self {
        GaussRat { re: BigRational::zero(), im: BigRational::zero() }
    }
    pub fn from_int(n: i64) -> Self {
        GaussRat { re: BigRational::from_integer(BigInt::from(n)), im: BigRational::zero() }
    }
    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0);
        GaussRat {
            re: BigRational::new(BigInt::from(p), BigInt::from(q)),
            im: BigRational::zero(),
        }
    }
    pub fn from_parts(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }
    /// -i * q / n, the building block of the homological inversion.
    pub fn neg_i_over(n: i64) -> Self {
        assert!(n != 0);
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::new(BigInt::from(-1), BigInt::from(n)),
        }
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn add(&self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    pub fn sub(&self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    pub fn mul(&self, o: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    pub fn neg(&self) -> GaussRat {
        GaussRat { re: -self.re.clone(), im: -self.im.clone() }
    }
    pub fn scale_int(&self, n: i64) -> GaussRat {
        let f = BigRational::from_integer(BigInt::from(n));
        GaussRat { re: &self.re * &f, im: &self.im * &f }
    }
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "{} - {}i", self.re, -self.im.clone())
        } else {
            write!(f, "{} + {}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Formal sum of gauge monomials with exact coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct FormalSum {
    terms: BTreeMap<(u32, u32), GaussRat>,
}

impl FormalSum {
    pub fn new() -> Self {
        FormalSum { terms: BTreeMap::new() }
    }

    pub fn term(a: u32, b: u32, c: GaussRat) -> Self {
        let mut s = FormalSum::new();
        s.add_term(a, b, c);
        s
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((a, b)).or_insert_with(GaussRat::zero);
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn coeff(&self, a: u32, b: u32) -> GaussRat {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &GaussRat)> {
        self.terms.iter()
    }

    pub fn add(&self, o: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        for (&(a, b), c) in o.terms.iter() {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        for (&(a, b), c) in o.terms.iter() {
            out.add_term(a, b, c.neg());
        }
        out
    }

    pub fn scale(&self, f: &GaussRat) -> FormalSum {
        let mut out = FormalSum::new();
        for (&(a, b), c) in self.terms.iter() {
            out.add_term(a, b, c.mul(f));
        }
        out
    }

    /// Pinned Poisson bracket.
    pub fn poisson(&self, o: &FormalSum) -> FormalSum {
        let mut out = FormalSum::new();
        for (&(a, b), ca) in self.terms.iter() {
            for (&(c, d), cb) in o.terms.iter() {
                let factor = a as i64 * d as i64 - b as i64 * c as i64;
                if factor == 0 {
                    continue;
                }
                // factor != 0 forces a+c >= 1 and b+d >= 1
                let coeff = ca.mul(cb).mul(&GaussRat {
                    re: BigRational::zero(),
                    im: BigRational::from_integer(BigInt::from(-factor)),
                });
                out.add_term(a + c - 1, b + d - 1, coeff);
            }
        }
        out
    }

    /// Terms fixed by the phase flow: a = b.
    pub fn gauge_average(&self) -> FormalSum {
        let mut out = FormalSum::new();
        for (&(a, b), c) in self.terms.iter() {
            if a == b {
                out.add_term(a, b, c.clone());
            }
        }
        out
    }

    pub fn off_gauge(&self) -> FormalSum {
        self.sub(&self.gauge_average())
    }

    /// Numeric value at one pinned amplitude.
    pub fn eval(&self, psi: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(a, b), c) in self.terms.iter() {
            acc += c.to_complex() * psi.powi(a as i32) * psi.conj().powi(b as i32);
        }
        acc
    }
}

impl fmt::Debug for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(a, b), c) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({c}) m[{a},{b}]")?;
            first = false;
        }
        Ok(())
    }
}

/// Invert the phase-flow bracket on the off-gauge part of f:
/// chi_ab = -i f_ab / (a - b), so {chi, m_11} + (f - <f>) = 0 identically.
/// Returns (chi, <f>).
pub fn homological_solve(f: &FormalSum) -> (FormalSum, FormalSum) {
    let mut chi = FormalSum::new();
    for (&(a, b), c) in f.iter() {
        if a != b {
            chi.add_term(a, b, c.mul(&GaussRat::neg_i_over(a as i64 - b as i64)));
        }
    }
    (chi, f.gauge_average())
}

/// Phase generator m_11.
pub fn phase_generator() -> FormalSum {
    FormalSum::term(1, 1, GaussRat::from_int(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_a() -> FormalSum {
        let mut s = FormalSum::new();
        s.add_term(2, 1, GaussRat::from_ratio(3, 4));
        s.add_term(0, 3, GaussRat::from_parts(
            BigRational::from_integer(BigInt::from(1)),
            BigRational::new(BigInt::from(-2), BigInt::from(5)),
        ));
        s.add_term(1, 1, GaussRat::from_int(2));
        s
    }

    fn sample_b() -> FormalSum {
        let mut s = FormalSum::new();
        s.add_term(1, 2, GaussRat::from_ratio(-1, 3));
        s.add_term(4, 0, GaussRat::from_parts(
            BigRational::zero(),
            BigRational::new(BigInt::from(7), BigInt::from(2)),
        ));
        s
    }

    fn sample_c() -> FormalSum {
        let mut s = FormalSum::new();
        s.add_term(2, 2, GaussRat::from_ratio(5, 6));
        s.add_term(3, 1, GaussRat::from_int(-1));
        s
    }

    #[test]
    fn bracket_with_phase_generator_counts_charge() {
        let m11 = phase_generator();
        for (a, b) in [(2u32, 1u32), (0, 3), (5, 5), (1, 0)] {
            let m = FormalSum::term(a, b, GaussRat::from_int(1));
            let got = m.poisson(&m11);
            let want = FormalSum::term(
                a,
                b,
                GaussRat::from_parts(
                    BigRational::zero(),
                    BigRational::from_integer(BigInt::from(-(a as i64 - b as i64))),
                ),
            );
            assert_eq!(got, want, "a={a} b={b}");
        }
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let f = sample_a();
        let g = sample_b();
        let fg = f.poisson(&g);
        let gf = g.poisson(&f);
        assert!(fg.add(&gf).is_zero());
    }

    #[test]
    fn jacobi_identity_holds_exactly() {
        let f = sample_a();
        let g = sample_b();
        let h = sample_c();
        let t1 = f.poisson(&g).poisson(&h);
        let t2 = g.poisson(&h).poisson(&f);
        let t3 = h.poisson(&f).poisson(&g);
        assert!(t1.add(&t2).add(&t3).is_zero());
    }

    #[test]
    fn homological_defect_vanishes_identically() {
        for l in 2u32..=5 {
            // binomial-type off-gauge input of degree 2l
            let mut f = FormalSum::new();
            for j in 0..=(2 * l) {
                f.add_term(j, 2 * l - j, GaussRat::from_ratio(1 + j as i64, 3));
            }
            let (chi, avg) = homological_solve(&f);
            assert_eq!(avg, f.gauge_average());
            let defect = chi.poisson(&phase_generator()).add(&f.off_gauge());
            assert!(defect.is_zero(), "l={l}: {defect:?}");
        }
    }

    #[test]
    fn eval_matches_hand_expansion() {
        let f = sample_a();
        let psi = Complex64::new(0.7, -0.4);
        let want = Complex64::new(0.75, 0.0) * psi * psi * psi.conj()
            + Complex64::new(1.0, -0.4) * psi.conj().powi(3)
            + 2.0 * psi * psi.conj();
        assert!((f.eval(psi) - want).norm() < 1e-15);
    }
}
