//! The radial phase polynomial driving the banded kernel runs, with its
//! critical and inflection radii located by bracketed bisection.

use serde::Serialize;

use crate::{LabError, Result};

/// Sum of (-1)^(j+1) eps^(j-1) R^(2j), j = 1..=r, Neumaier-compensated.
pub fn p_r_eval(r: usize, eps: f64, big_r: f64) -> f64 {
    debug_assert!(r >= 1 && eps > 0.0 && eps <= 1.0 && big_r >= 0.0);
    let r2 = big_r * big_r;
    let mut term = r2;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for j in 1..=r {
        let signed = if j % 2 == 1 { term } else { -term };
        let t = sum + signed;
        if sum.abs() >= signed.abs() {
            comp += (sum - t) + signed;
        } else {
            comp += (signed - t) + sum;
        }
        sum = t;
        term *= eps * r2;
    }
    sum + comp
}

/// d/dR of the above: sum of (-1)^(j+1) eps^(j-1) 2j R^(2j-1).
pub fn p_r_derivative(r: usize, eps: f64, big_r: f64) -> f64 {
    debug_assert!(r >= 1 && eps > 0.0 && eps <= 1.0 && big_r >= 0.0);
    let r2 = big_r * big_r;
    let mut pow = big_r;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for j in 1..=r {
        let mag = 2.0 * j as f64 * pow;
        let signed = if j % 2 == 1 { mag } else { -mag };
        let t = sum + signed;
        if sum.abs() >= signed.abs() {
            comp += (sum - t) + signed;
        } else {
            comp += (signed - t) + sum;
        }
        sum = t;
        pow *= eps * r2;
    }
    sum + comp
}

/// Second radial derivative, for the inflection spheres.
pub fn p_r_second(r: usize, eps: f64, big_r: f64) -> f64 {
    debug_assert!(r >= 1 && eps > 0.0 && eps <= 1.0 && big_r >= 0.0);
    let r2 = big_r * big_r;
    let mut pow = 1.0;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for j in 1..=r {
        let tj = 2.0 * j as f64;
        let mag = tj * (tj - 1.0) * pow;
        let signed = if j % 2 == 1 { mag } else { -mag };
        let t = sum + signed;
        if sum.abs() >= signed.abs() {
            comp += (sum - t) + signed;
        } else {
            comp += (signed - t) + sum;
        }
        sum = t;
        pow *= eps * r2;
    }
    sum + comp
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialRoots {
    /// positive roots of the first derivative, ascending
    pub critical: Vec<f64>,
    /// positive roots of the second derivative, ascending
    pub inflection: Vec<f64>,
    /// root-free region ends here (complex-analytic lower bound)
    pub lower: f64,
    /// no roots beyond this (Fujiwara bound on the even-power form)
    pub upper: f64,
}

const SCAN_POINTS: usize = 4096;
const BISECT_REL_TOL: f64 = 1e-13;

fn bisect(mut lo: f64, mut hi: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let (mut flo, fhi) = (f(lo), f(hi));
    debug_assert!(flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0));
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    while hi - lo > BISECT_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Log-spaced scan + bisection of every sign change of f over [lo, hi].
/// Sign changes in the first or last scan cell mean a root may sit on the
/// boundary of the claimed bracket; that is reported as an error.
fn scan_roots(lo: f64, hi: f64, f: impl Fn(f64) -> f64, what: &str) -> Result<Vec<f64>> {
    let lnl = lo.ln();
    let step = (hi.ln() - lnl) / (SCAN_POINTS - 1) as f64;
    let xs: Vec<f64> = (0..SCAN_POINTS).map(|i| (lnl + step * i as f64).exp()).collect();
    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS - 1 {
        let (a, b) = (xs[i], xs[i + 1]);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            if i == 0 {
                roots.push(a);
            }
            continue;
        }
        if fb == 0.0 || (fa < 0.0) != (fb < 0.0) {
            if i == 0 || i == SCAN_POINTS - 2 {
                let mut table = String::new();
                for k in (0..SCAN_POINTS).step_by(SCAN_POINTS / 16) {
                    table.push_str(&format!("  R={:.6e}  f={:.6e}\n", xs[k], f(xs[k])));
                }
                return Err(LabError::invalid(format!(
                    "{what}: sign change touches the bracket boundary; scan table:\n{table}"
                )));
            }
            roots.push(bisect(a, b, &f));
        }
    }
    Ok(roots)
}

/// Positive critical and inflection radii of the phase polynomial, bracketed
/// between the complex-analytic lower bound and the Fujiwara upper bound.
/// The origin is always critical and is not reported.
pub fn critical_radii(r: usize, eps: f64) -> Result<RadialRoots> {
    if r < 1 {
        return Err(LabError::invalid("critical_radii needs r >= 1"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(LabError::invalid(format!(
            "critical_radii needs eps in (0,1], got {eps}"
        )));
    }
    if r == 1 {
        return Ok(RadialRoots {
            critical: vec![],
            inflection: vec![],
            lower: f64::INFINITY,
            upper: f64::INFINITY,
        });
    }
    if eps > 1.0 / (2.0 * r as f64) {
        return Err(LabError::invalid(format!(
            "critical_radii bracket regime needs eps <= 1/(2r) = {}, got {eps}",
            1.0 / (2.0 * r as f64)
        )));
    }
    let mut coeff_sum = 0.0;
    for j in 1..=r {
        coeff_sum += 2.0 * j as f64 * eps.powi(j as i32 - 1);
    }
    let lower = 2.0 / coeff_sum.max(2.0);
    let mut fuji = 0.0f64;
    for k in 1..r {
        fuji = fuji.max(((r - k) as f64 / r as f64).powf(1.0 / k as f64));
    }
    let upper = (2.0 * fuji / eps).sqrt();

    // the nonzero factor of P': even polynomial, scanned in R
    let slope = |big_r: f64| p_r_derivative(r, eps, big_r) / big_r;
    let scan_lo = 0.5 * lower.min(1.0);
    let critical = scan_roots(scan_lo, upper, slope, "critical radii")?;
    let curve = |big_r: f64| p_r_second(r, eps, big_r);
    let inflection = scan_roots(scan_lo, upper, curve, "inflection radii")?;
    Ok(RadialRoots {
        critical,
        inflection,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{FromPrimitive, Signed, ToPrimitive};

    fn exact_p_r(r: usize, eps: f64, big_r: f64) -> BigRational {
        let e = BigRational::from_f64(eps).unwrap();
        let x = BigRational::from_f64(big_r).unwrap();
        let mut acc = BigRational::from_f64(0.0).unwrap();
        for j in 1..=r {
            let term = e.pow(j as i32 - 1) * x.pow(2 * j as i32);
            acc = if j % 2 == 1 { acc + term } else { acc - term };
        }
        acc
    }

    #[test]
    fn quartic_form_and_trivia() {
        for &big_r in &[0.0f64, 0.5, 3.0, 17.25] {
            let direct = big_r * big_r - 0.01 * big_r.powi(4);
            assert!((p_r_eval(2, 0.01, big_r) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
            assert_eq!(p_r_eval(1, 0.3, big_r), big_r * big_r);
            assert_eq!(p_r_derivative(1, 0.3, big_r), 2.0 * big_r);
        }
        for r in 1..=6 {
            assert_eq!(p_r_eval(r, 0.07, 0.0), 0.0);
        }
    }

    #[test]
    fn compensated_sum_matches_exact_rational_through_cancellation() {
        // R near eps^{-1/2} cancels the top two terms of the quartic case.
        let cases = [
            (2usize, 0.0009765625, 32.0000019073486),
            (2, 0.0009765625, 31.5),
            (3, 0.03125, 5.65625),
            (4, 0.015625, 7.8125),
            (5, 0.001953125, 21.375),
        ];
        for &(r, eps, big_r) in &cases {
            let exact = exact_p_r(r, eps, big_r);
            let got = BigRational::from_f64(p_r_eval(r, eps, big_r)).unwrap();
            let mut term_mag = 0.0f64;
            let mut term = big_r * big_r;
            for _ in 1..=r {
                term_mag += term;
                term *= eps * big_r * big_r;
            }
            let tol = BigRational::from_f64(8.0 * f64::EPSILON * term_mag).unwrap();
            assert!(
                (exact.clone() - got.clone()).abs() <= tol,
                "r={r} eps={eps} R={big_r}: exact {} got {}",
                exact.to_f64().unwrap(),
                got.to_f64().unwrap()
            );
        }
    }

    #[test]
    fn quartic_radii_match_closed_forms() {
        for &eps in &[1e-2, 1e-3, 1e-4] {
            let roots = critical_radii(2, eps).unwrap();
            assert_eq!(roots.critical.len(), 1);
            assert!((roots.critical[0] - (2.0 * eps).powf(-0.5)).abs() < 1e-10);
            assert_eq!(roots.inflection.len(), 1);
            assert!((roots.inflection[0] - (6.0 * eps).powf(-0.5)).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_orders_have_no_positive_radii() {
        let r1 = critical_radii(1, 0.5).unwrap();
        assert!(r1.critical.is_empty() && r1.inflection.is_empty());
        // r=3: both reduced discriminants are negative, no real radii.
        for &eps in &[1e-2, 1e-3] {
            let r3 = critical_radii(3, eps).unwrap();
            assert!(r3.critical.is_empty(), "{:?}", r3.critical);
            assert!(r3.inflection.is_empty(), "{:?}", r3.inflection);
        }
    }

    #[test]
    fn all_roots_stay_inside_the_brackets() {
        for &(r, eps) in &[(2usize, 1e-2), (2, 1e-3), (4, 1e-2), (4, 1e-3), (5, 1e-3)] {
            let roots = critical_radii(r, eps).unwrap();
            for &root in roots.critical.iter() {
                assert!(root >= roots.lower && root <= roots.upper, "r={r} eps={eps} root={root}");
                assert!(p_r_derivative(r, eps, root).abs() < 1e-6);
            }
        }
        // quadric-quartic-sextic-octic case at eps=0.01 has a single knee
        let r4 = critical_radii(4, 1e-2).unwrap();
        assert!((r4.lower - 2.0 / 2.040608).abs() < 1e-9);
        assert!((r4.upper - 150f64.sqrt()).abs() < 1e-9);
        assert_eq!(r4.critical.len(), 1);
        assert!((r4.critical[0] - 7.78).abs() < 0.05, "{}", r4.critical[0]);
    }

    #[test]
    fn rejects_out_of_regime_inputs() {
        assert!(critical_radii(2, 0.3).is_err());
        assert!(critical_radii(2, 0.0).is_err());
        assert!(critical_radii(2, 1.5).is_err());
        assert!(critical_radii(0, 0.01).is_err());
    }
}
