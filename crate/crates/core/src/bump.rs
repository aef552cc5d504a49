//! Scalar profiles for all smooth cutoffs. Everything is built from one
//! glue function so supports and plateaus are exact, not approximate.

/// exp(-1/x) continued by 0 across the origin. C-infinity on the line.
pub fn glue(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Monotone step: 0 for t <= 0, 1 for t >= 1, strictly increasing between.
/// Identity s(t) + s(1-t) = 1 holds pointwise.
pub fn smoothstep(t: f64) -> f64 {
    let a = glue(t);
    let b = glue(1.0 - t);
    if a == 0.0 {
        return 0.0;
    }
    if b == 0.0 {
        return 1.0;
    }
    a / (a + b)
}

/// Radial low-pass profile: 1 for rho <= 1/2, 0 for rho >= 1.
pub fn phi0(rho: f64) -> f64 {
    1.0 - smoothstep(2.0 * rho - 1.0)
}

fn eta_bump(x: f64) -> f64 {
    let r2 = 4.0 / 9.0;
    let d = r2 - x * x;
    if d > 0.0 {
        (-1.0 / d).exp()
    } else {
        0.0
    }
}

/// Unit window: supported in (-2/3, 2/3), with the integer-shift partition
/// sum_{k in Z} eta(x - k) = 1. Only adjacent shifts overlap.
pub fn eta(x: f64) -> f64 {
    let v = eta_bump(x);
    if v == 0.0 {
        return 0.0;
    }
    let kc = x.round() as i64;
    let mut total = 0.0;
    for k in (kc - 1)..=(kc + 1) {
        total += eta_bump(x - k as f64);
    }
    v / total
}
