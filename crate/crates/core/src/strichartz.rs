//! Spacetime-norm probes for the free flow and exact admissibility
//! arithmetic for the exponent regions those estimates live on.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::field::ComplexField;
use crate::multiplier::FourierMultiplier;
use crate::norms::{lq_norm, spacetime_norm};
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    Schrodinger,
    OrderR,
    Quadrilateral,
}

#[derive(Debug, Clone, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// names the decisive constraint either way
    pub reason: String,
}

fn ok(reason: &str) -> Admissibility {
    Admissibility {
        admissible: true,
        reason: reason.to_string(),
    }
}

fn no(reason: String) -> Admissibility {
    Admissibility {
        admissible: false,
        reason,
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// 1/p as an exact rational. Finite f64 exponents are exact binary
/// rationals, so equality against corner values is decidable.
fn recip(p: f64, name: &str) -> Result<BigRational> {
    if p.is_infinite() && p > 0.0 {
        return Ok(big(0));
    }
    if !(p >= 1.0) || p.is_nan() {
        return Err(LabError::invalid(format!(
            "{name} must lie in [1, inf], got {p}"
        )));
    }
    let v = BigRational::from_float(p)
        .ok_or_else(|| LabError::invalid(format!("{name} = {p} is not a number")))?;
    Ok(big(1) / v)
}

fn cross(a: &(BigRational, BigRational), b: &(BigRational, BigRational), p: &(BigRational, BigRational)) -> BigRational {
    (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0)
}

/// Exact membership test for the exponent pair (p, q) in dimension d.
///
/// schrodinger: 2/p + d/q = d/2 with p, q >= 2 and (p, q, d) != (2, inf, 2).
/// order_r: the order-r scaling line 2/p + d/(rq) = d/(2r), same floor;
/// the r = 1 case reduces to schrodinger including its forbidden endpoint.
/// quadrilateral (r >= 2): the closed region in the (1/p, 1/q) plane with
/// corners (1/2,1/2), (1,(r-1)/(2r-1)), (1,0), (r/(2r-1),0), minus the
/// three excluded corner pairs (2,2), (1,(2r-1)/(r-1)), ((2r-1)/r, inf).
pub fn admissible_check(p: f64, q: f64, d: usize, r: usize, kind: ExponentKind) -> Result<Admissibility> {
    if d == 0 {
        return Err(LabError::invalid("dimension must be positive"));
    }
    let x = recip(p, "p")?;
    let y = recip(q, "q")?;
    let half = big(1) / big(2);
    match kind {
        ExponentKind::Schrodinger | ExponentKind::OrderR => {
            let r = if kind == ExponentKind::Schrodinger { 1 } else { r };
            if r < 1 {
                return Err(LabError::invalid("order must be at least 1"));
            }
            if x > half {
                return Ok(no(format!("p = {p} is below 2")));
            }
            if y > half {
                return Ok(no(format!("q = {q} is below 2")));
            }
            let dd = big(d as i64);
            let rr = big(r as i64);
            let lhs = big(2) * &x + (&dd / &rr) * &y;
            let rhs = &dd / (big(2) * &rr);
            if lhs != rhs {
                return Ok(no(format!(
                    "scaling identity 2/p + d/(r q) = d/(2r) fails for (p, q, d, r) = ({p}, {q}, {d}, {r})"
                )));
            }
            if r == 1 && d == 2 && x == half && y == big(0) {
                return Ok(no("forbidden endpoint (p, q, d) = (2, inf, 2)".to_string()));
            }
            Ok(ok("scaling identity holds"))
        }
        ExponentKind::Quadrilateral => {
            if r < 2 {
                return Err(LabError::invalid(
                    "the admissible quadrilateral needs order r >= 2",
                ));
            }
            let rr = big(r as i64);
            let denom = big(2) * &rr - big(1);
            let corner_a = (half.clone(), half.clone());
            let corner_b = (big(1), (&rr - big(1)) / &denom);
            let corner_c = (big(1), big(0));
            let corner_d = (&rr / &denom, big(0));
            let pt = (x, y);
            if pt == corner_a {
                return Ok(no("corner (2, 2) is excluded".to_string()));
            }
            if pt == corner_b {
                return Ok(no(format!("corner (1, (2r-1)/(r-1)) is excluded for r = {r}")));
            }
            if pt == corner_d {
                return Ok(no(format!("corner ((2r-1)/r, inf) is excluded for r = {r}")));
            }
            let zero = big(0);
            let edges = [
                (&corner_a, &corner_b),
                (&corner_b, &corner_c),
                (&corner_c, &corner_d),
                (&corner_d, &corner_a),
            ];
            for (a, b) in edges {
                if cross(a, b, &pt) > zero {
                    return Ok(no(format!(
                        "(1/p, 1/q) = ({}, {}) lies outside the closed admissible quadrilateral",
                        pt.0, pt.1
                    )));
                }
            }
            Ok(ok("inside the closed admissible quadrilateral"))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StrichartzRow {
    pub c: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrichartzTable {
    pub p: f64,
    pub q: f64,
    pub dim: usize,
    pub t_end: f64,
    pub rows: Vec<StrichartzRow>,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

const TIME_SAMPLES: usize = 49;

/// Measures ||w_s u(t)||_{L^p_t L^q_x} / (c^{1/q - 1/p - 1/2} ||w_{1/2}
/// psi0||_{L^2}) per speed, where u is the exact free flow e^{it c <grad>_c}
/// and w_s the bracket weight of order s = 1/q - 1/p. The same weight object
/// feeds both sides so the (inf, 2) pair cancels to machine precision.
pub fn strichartz_probe(
    p: f64,
    q: f64,
    c_list: &[f64],
    psi0: &ComplexField,
    t_end: f64,
) -> Result<StrichartzTable> {
    let d = psi0.grid().dim();
    let adm = admissible_check(p, q, d, 1, ExponentKind::Schrodinger)?;
    if !adm.admissible {
        return Err(LabError::invalid(format!(
            "exponent pair ({p}, {q}) rejected: {}",
            adm.reason
        )));
    }
    if !(t_end > 0.0) {
        return Err(LabError::invalid("probe horizon must be positive"));
    }
    if c_list.is_empty() {
        return Err(LabError::invalid("empty speed list"));
    }
    let grid = psi0.grid().clone();
    let inv = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
    let s = inv(q) - inv(p);
    let times: Vec<f64> = (0..TIME_SAMPLES)
        .map(|i| t_end * i as f64 / (TIME_SAMPLES - 1) as f64)
        .collect();
    let mut rows = Vec::with_capacity(c_list.len());
    for &c in c_list {
        if !(c >= 1.0) {
            return Err(LabError::invalid(format!("speeds must be >= 1, got {c}")));
        }
        let weight = FourierMultiplier::from_xi2(&grid, |xi2| (c * c + xi2).powf(0.5 * s));
        let half_weight = FourierMultiplier::from_xi2(&grid, |xi2| (c * c + xi2).powf(0.25));
        let flow = FourierMultiplier::from_xi2(&grid, |xi2| c * (c * c + xi2).sqrt());
        let mut norms = Vec::with_capacity(times.len());
        for &t in &times {
            let mut u = psi0.spectral_clone();
            flow.apply_phase_to(t, &mut u);
            weight.apply_to(&mut u);
            norms.push(lq_norm(&u, q));
        }
        let lhs = spacetime_norm(&times, &norms, p);
        let mut w0 = psi0.spectral_clone();
        half_weight.apply_to(&mut w0);
        let rhs = c.powf(s - 0.5) * w0.norm_l2();
        rows.push(StrichartzRow {
            c,
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::MAX, f64::min);
    Ok(StrichartzTable {
        p,
        q,
        dim: d,
        t_end,
        rows,
        max_ratio,
        min_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_smooth;
    use crate::grid::SpectralGrid;

    const INF: f64 = f64::INFINITY;

    fn datum() -> ComplexField {
        let g = SpectralGrid::new(2, 64, std::f64::consts::TAU).unwrap();
        random_smooth(&g, 41, 1.0)
    }

    #[test]
    fn energy_pair_ratio_is_exactly_one_and_speed_free() {
        let psi = datum();
        let table = strichartz_probe(INF, 2.0, &[1.0, 2.0, 4.0, 8.0, 16.0], &psi, 1.0).unwrap();
        for row in &table.rows {
            assert!(
                (row.ratio - 1.0).abs() < 1e-10,
                "c = {}: ratio {}",
                row.c,
                row.ratio
            );
        }
        assert!(table.max_ratio - table.min_ratio < 1e-10);
    }

    #[test]
    fn diagonal_pair_ratio_is_uniformly_order_one() {
        let psi = datum();
        let table = strichartz_probe(4.0, 4.0, &[1.0, 2.0, 4.0, 8.0, 16.0], &psi, 1.0).unwrap();
        for row in &table.rows {
            eprintln!("c {}: lhs {:.6e} rhs {:.6e} ratio {:.4}", row.c, row.lhs, row.rhs, row.ratio);
        }
        assert!(table.max_ratio < 3.0, "max ratio {}", table.max_ratio);
        assert!(table.min_ratio > 0.1, "min ratio {}", table.min_ratio);
    }

    #[test]
    fn inadmissible_pairs_are_rejected_by_name() {
        let a = admissible_check(2.0, INF, 2, 1, ExponentKind::Schrodinger).unwrap();
        assert!(!a.admissible);
        assert!(a.reason.contains("(2, inf, 2)"), "{}", a.reason);

        let psi = datum();
        let err = strichartz_probe(2.0, INF, &[2.0], &psi, 1.0).unwrap_err();
        assert!(err.to_string().contains("(2, inf, 2)"), "{err}");

        let a = admissible_check(4.0, 3.0, 2, 1, ExponentKind::Schrodinger).unwrap();
        assert!(!a.admissible);
        assert!(a.reason.contains("scaling identity"), "{}", a.reason);

        let a = admissible_check(4.0, 1.5, 3, 1, ExponentKind::Schrodinger).unwrap();
        assert!(!a.admissible);
        assert!(a.reason.contains("below 2"), "{}", a.reason);
    }

    #[test]
    fn admissible_pairs_pass_exact_arithmetic() {
        for (p, q, d) in [(INF, 2.0, 2), (4.0, 4.0, 2), (2.0, 6.0, 3), (8.0, 4.0, 1)] {
            let a = admissible_check(p, q, d, 1, ExponentKind::Schrodinger).unwrap();
            assert!(a.admissible, "({p}, {q}, {d}): {}", a.reason);
        }
        // order-2 line in d=2 passes through (4, inf)
        let a = admissible_check(4.0, INF, 2, 2, ExponentKind::OrderR).unwrap();
        assert!(a.admissible, "{}", a.reason);
        let a = admissible_check(4.0, 8.0, 2, 2, ExponentKind::OrderR).unwrap();
        assert!(!a.admissible);
    }

    #[test]
    fn quadrilateral_membership_and_corner_exclusions() {
        let quad = ExponentKind::Quadrilateral;
        for (p, q, want, tag) in [
            (2.0, 2.0, false, "corner A"),
            (1.0, 3.0, false, "corner B"),
            (1.5, INF, false, "corner D"),
            (1.0, INF, true, "corner C"),
            (4.0 / 3.0, 4.0, true, "interior"),
            (1.0, 6.0, true, "edge BC"),
            (4.0, 4.0, false, "outside, above the energy corner"),
            (8.0, 8.0, false, "outside"),
        ] {
            let a = admissible_check(p, q, 2, 2, quad).unwrap();
            assert_eq!(a.admissible, want, "{tag} ({p}, {q}): {}", a.reason);
        }
        let a = admissible_check(2.0, 2.0, 2, 2, quad).unwrap();
        assert!(a.reason.contains("corner (2, 2)"), "{}", a.reason);
        assert!(admissible_check(2.0, 2.0, 2, 1, quad).is_err());
        assert!(admissible_check(0.5, 2.0, 2, 2, quad).is_err());
        assert!(admissible_check(f64::NAN, 2.0, 2, 2, quad).is_err());
    }
}
