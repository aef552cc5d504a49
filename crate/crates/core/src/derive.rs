//! Coefficient derivations for the normalized flows, done in exact
//! arithmetic on the pinned monomial algebra and cross-checked against a
//! single-mode oscillator normal form whose constants are classical.
//!
//! Degree parameter l >= 2 fixes the power nonlinearity (2l - 1 in the
//! field equation). All coefficients below are per lambda (order 1) or per
//! lambda^2 (order 2); the dynamics layer multiplies the couplings back in.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::formal::{homological_solve, FormalSum, GaussRat};

fn big_binom(n: u64, k: u64) -> BigInt {
    binomial(BigInt::from(n), BigInt::from(k))
}

fn rat(p: BigInt, q: BigInt) -> BigRational {
    BigRational::new(p, q)
}

/// Degree-2l interaction in the slow frame, per unit coupling:
/// (1 / (l 2^{l+1})) sum_j C(2l, j) m_{j, 2l-j}.
pub fn interaction_order1(l: u32) -> FormalSum {
    assert!(l >= 2, "degree parameter must be at least 2");
    let scale = rat(BigInt::one(), BigInt::from(l) * BigInt::from(2u8).pow(l + 1));
    let mut f = FormalSum::new();
    for j in 0..=(2 * l) {
        let c = &scale * BigRational::from_integer(big_binom(2 * l as u64, j as u64));
        f.add_term(j, 2 * l - j, GaussRat::from_parts(c, BigRational::zero()));
    }
    f
}

/// Generator removing the oscillating part of the order-1 interaction.
pub fn chi_order1(l: u32) -> FormalSum {
    homological_solve(&interaction_order1(l)).0
}

/// Gauge-averaged interaction coefficient per lambda: C(2l,l) / (l 2^{l+1})
/// on |psi|^{2l}.
pub fn averaged_order1(l: u32) -> BigRational {
    interaction_order1(l).gauge_average().coeff(l, l).re
}

/// Flow coefficient on |psi|^{2(l-1)} psi per lambda: l times the averaged
/// Hamiltonian coefficient.
pub fn flow_g1(l: u32) -> BigRational {
    averaged_order1(l) * BigRational::from_integer(BigInt::from(l))
}

/// Second-order gauge bracket <{chi_1, F_1}> coefficient on |psi|^{2(2l-1)}
/// per lambda^2. Exact engine value.
pub fn bracket_avg(l: u32) -> BigRational {
    let f1 = interaction_order1(l);
    let chi = chi_order1(l);
    let avg = chi.poisson(&f1).gauge_average();
    let c = avg.coeff(2 * l - 1, 2 * l - 1);
    assert!(c.im.is_zero(), "gauge bracket coefficient must be real");
    c.re
}

/// Combined second-order coefficient: half the gauge bracket (the quadratic
/// term of the exponential conjugation; the original Hamiltonian has no
/// order-2 gauge part of its own at a pinned mode).
pub fn combined_quintic(l: u32) -> BigRational {
    bracket_avg(l) / BigRational::from_integer(BigInt::from(2))
}

/// Closed form for the combined coefficient:
/// -(C(4l,2l) - C(2l,l)^2) / (l 2^{2l+2}).
pub fn closed_form_quintic(l: u32) -> BigRational {
    let num = big_binom(4 * l as u64, 2 * l as u64)
        - big_binom(2 * l as u64, l as u64).pow(2);
    -rat(num, BigInt::from(l) * BigInt::from(2u8).pow(2 * l + 2))
}

/// Flow coefficient on |psi|^{4(l-1)} psi per lambda^2.
pub fn flow_g2(l: u32) -> BigRational {
    combined_quintic(l) * BigRational::from_integer(BigInt::from(2 * l - 1))
}

/// Derivative-coupled order-2 interaction coefficient per lambda:
/// C(2l-1, l) / 2^{l+2}.
pub fn flow_beta(l: u32) -> BigRational {
    rat(big_binom(2 * l as u64 - 1, l as u64), BigInt::from(2u8).pow(l + 2))
}

/// Taylor tail of the relativistic dispersion relation: coefficient of
/// c^{2-2j} Laplacian^j is a_j = (-1)^j binom(1/2, j), j >= 1.
pub fn dispersion_coefficients(jmax: u32) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(jmax as usize);
    let half = rat(BigInt::one(), BigInt::from(2));
    let mut binom_half = BigRational::one();
    for j in 1..=jmax {
        let jr = BigRational::from_integer(BigInt::from(j));
        binom_half = binom_half * (&half - (jr.clone() - BigRational::one())) / jr;
        let a = if j % 2 == 0 { binom_half.clone() } else { -binom_half.clone() };
        out.push(a);
    }
    out
}

/// Constants that have circulated in earlier hand derivations of the
/// combined quintic coefficient. Both fail the oscillator oracle; they are
/// reported as flags so downstream consumers see the disagreement.
pub const LEGACY_QUINTIC_CANDIDATES: [(&str, i64, i64); 2] = [("9/16", 9, 16), ("51/8", 51, 8)];

/// Closed-form candidate for the quintic magnitude that predates the
/// engine: (1/(2^{2l+3} l^2)) [ sum_{j != l} C(2l,j) C(2l,2l-j)
/// ((2l-j)^2 - j^2)/(l-j) + 16 l ]. Evaluated exactly so the adjudication
/// can state the gap, which is 1/(2^{2l} l) plus a sign, rather than just
/// flag it.
pub fn reference_closed_form(l: u32) -> BigRational {
    let n = 2 * l as u64;
    let mut sum = BigRational::zero();
    for j in 1..2 * (l as i64) {
        if j == l as i64 {
            continue;
        }
        let h = 2 * l as i64 - j;
        let cc = big_binom(n, j as u64) * big_binom(n, h as u64);
        let weight = BigInt::from(h * h - j * j);
        sum += rat(cc * weight, BigInt::from(l as i64 - j));
    }
    sum += BigRational::from_integer(BigInt::from(16 * l as i64));
    sum / BigRational::from_integer(BigInt::from(2u8).pow(2 * l + 3) * BigInt::from(l * l))
}

pub struct DeriveReport {
    pub l: u32,
    pub f1_scale: BigRational,
    pub f1_avg: BigRational,
    pub chi_top: GaussRat,
    pub bracket_avg: BigRational,
    pub combined: BigRational,
    pub closed_form_ok: bool,
    pub candidate_flags: Vec<(String, bool)>,
    pub reference_k: BigRational,
    /// reference_k minus |bracket_avg|; the residue the adjudication
    /// attributes to the legacy bookkeeping
    pub reference_gap: BigRational,
    pub g1: BigRational,
    pub g2: BigRational,
    pub beta: BigRational,
    pub dispersion: Vec<BigRational>,
}

pub fn derive_report(l: u32) -> DeriveReport {
    let f1 = interaction_order1(l);
    let combined = combined_quintic(l);
    let candidate_flags = LEGACY_QUINTIC_CANDIDATES
        .iter()
        .map(|&(name, p, q)| {
            let cand = rat(BigInt::from(p), BigInt::from(q));
            (name.to_string(), cand != combined.abs())
        })
        .collect();
    let reference_k = reference_closed_form(l);
    let reference_gap = &reference_k - bracket_avg(l).abs();
    DeriveReport {
        l,
        f1_scale: f1.coeff(2 * l, 0).re,
        f1_avg: averaged_order1(l),
        chi_top: chi_order1(l).coeff(2 * l, 0),
        bracket_avg: bracket_avg(l),
        combined: combined.clone(),
        closed_form_ok: combined == closed_form_quintic(l),
        candidate_flags,
        reference_k,
        reference_gap,
        g1: flow_g1(l),
        g2: flow_g2(l),
        beta: flow_beta(l),
        dispersion: dispersion_coefficients(4),
    }
}

impl fmt::Display for DeriveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "slow-flow coefficients, degree parameter l = {}", self.l)?;
        writeln!(f, "  interaction scale per coupling: {}", self.f1_scale)?;
        writeln!(
            f,
            "  averaged interaction per coupling: {} |psi|^{}",
            self.f1_avg,
            2 * self.l
        )?;
        writeln!(f, "  generator top coefficient per coupling: {}", self.chi_top)?;
        writeln!(
            f,
            "  second-order gauge bracket per coupling^2: {} |psi|^{}",
            self.bracket_avg,
            2 * (2 * self.l - 1)
        )?;
        writeln!(f, "  combined coefficient per coupling^2: {}", self.combined)?;
        writeln!(
            f,
            "  closed form check: {}",
            if self.closed_form_ok { "ok" } else { "MISMATCH" }
        )?;
        for (name, mismatch) in &self.candidate_flags {
            writeln!(
                f,
                "  legacy candidate {}: {}",
                name,
                if *mismatch {
                    format!("MISMATCH (engine {})", self.combined)
                } else {
                    "match".to_string()
                }
            )?;
        }
        writeln!(
            f,
            "  reference closed form: {} vs engine gauge bracket magnitude {}: {}",
            self.reference_k,
            self.bracket_avg.abs(),
            if self.reference_gap.is_zero() {
                "match".to_string()
            } else {
                format!("MISMATCH by {}", self.reference_gap)
            }
        )?;
        writeln!(
            f,
            "  reference flow-level value: {} vs engine flow magnitude {}",
            BigRational::from_integer(BigInt::from(2 * self.l as i64 - 1)) * &self.reference_k,
            self.g2.abs()
        )?;
        writeln!(f, "  flow coefficient g1 per coupling: {}", self.g1)?;
        writeln!(f, "  flow coefficient g2 per coupling^2: {}", self.g2)?;
        writeln!(f, "  derivative coupling beta per coupling: {}", self.beta)?;
        write!(f, "  dispersion tail:")?;
        for (j, a) in self.dispersion.iter().enumerate() {
            write!(f, " a{}={}", j + 1, a)?;
        }
        writeln!(f)
    }
}
