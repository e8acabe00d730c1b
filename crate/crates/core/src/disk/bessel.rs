//! Bessel functions of the first kind J_n and their positive zeros j_{n,k}.

use crate::error::{LabError, Result};

/// Largest supported order.
pub const MAX_ORDER: u32 = 200;
/// Largest supported argument.
pub const MAX_ARG: f64 = 1.0e5;
/// Largest supported zero index.
pub const MAX_ZERO_INDEX: u32 = 10_000;

const SERIES_LIMIT: f64 = 1.0;
const RESCALE_AT: f64 = 1e250;

/// J_n(x) for 0 ≤ n ≤ 200 and 0 ≤ x ≤ 1e5.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    Ok(pair(n, x).0)
}

/// (J_n(x), J_{n+1}(x)) from one evaluation.
pub fn bessel_j_pair(n: u32, x: f64) -> Result<(f64, f64)> {
    check_args(n, x)?;
    Ok(pair(n, x))
}

fn check_args(n: u32, x: f64) -> Result<()> {
    if n > MAX_ORDER {
        return Err(LabError::OutOfRange(format!("order {n} > {MAX_ORDER}")));
    }
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(LabError::OutOfRange(format!("argument {x} outside [0, {MAX_ARG}]")));
    }
    Ok(())
}

pub(crate) fn pair(n: u32, x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (if n == 0 { 1.0 } else { 0.0 }, 0.0);
    }
    if x <= SERIES_LIMIT {
        return (series(n, x), series(n + 1, x));
    }
    miller(n, x)
}

/// Σ_m (−1)^m (x/2)^(2m+n) / (m!(m+n)!), summed until terms vanish.
fn series(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    // (x/2)^n / n!, built incrementally to avoid overflow
    let mut term = 1.0;
    for k in 1..=n {
        term *= h / k as f64;
    }
    let mut sum = term;
    let q = -h * h;
    for m in 1..200 {
        term *= q / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalized by J_0 + 2·Σ J_{2k} = 1.
fn miller(n: u32, x: f64) -> (f64, f64) {
    let big = (n as f64).max(x);
    let mut start = (big + 15.0 * big.cbrt() + 30.0).ceil() as u32;
    start += start % 2;
    let two_over_x = 2.0 / x;
    let mut above = 0.0_f64; // J_{k+1}
    let mut cur = 1e-30_f64; // J_k
    let mut norm = 0.0_f64;
    let (mut jn, mut jn1) = (0.0, 0.0);
    if start == n + 1 {
        jn1 = cur;
    }
    let mut k = start;
    while k > 0 {
        let below = k as f64 * two_over_x * cur - above;
        above = cur;
        cur = below;
        k -= 1;
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * cur;
        }
        if k == n {
            jn = cur;
        }
        if k == n + 1 {
            jn1 = cur;
        }
        if cur.abs() > RESCALE_AT {
            let f = 1.0 / RESCALE_AT;
            cur *= f;
            above *= f;
            norm *= f;
            jn *= f;
            jn1 *= f;
        }
    }
    norm += cur;
    (jn / norm, jn1 / norm)
}

fn check_zero_args(n: u32, k: u32) -> Result<()> {
    if n > MAX_ORDER {
        return Err(LabError::OutOfRange(format!("order {n} > {MAX_ORDER}")));
    }
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(LabError::OutOfRange(format!("zero index {k} outside [1, {MAX_ZERO_INDEX}]")));
    }
    Ok(())
}

/// McMahon's large-zero expansion of j_{n,k}.
pub fn mcmahon_guess(n: u32, k: u32) -> f64 {
    let beta = (k as f64 + 0.5 * n as f64 - 0.25) * std::f64::consts::PI;
    let mu = 4.0 * (n as f64).powi(2);
    let e = 8.0 * beta;
    beta - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e.powi(5))
}

/// Whether the McMahon guess is accurate enough to seed a local bracket.
fn mcmahon_reliable(n: u32, k: u32) -> bool {
    let beta = (k as f64 + 0.5 * n as f64 - 0.25) * std::f64::consts::PI;
    beta >= 3.0 * (n as f64).powf(4.0 / 3.0) + 10.0
}

/// Half-width of the local bracket around a McMahon guess; consecutive zeros
/// are more than 3 apart for every order.
const LOCAL_BRACKET: f64 = 1.2;
/// Scan step; below the minimum zero spacing, so each step holds at most one zero.
const SCAN_STEP: f64 = 1.0;
const MAX_REFINE_ITERS: usize = 200;

/// k-th positive zero of J_n.
///
/// Uses a McMahon guess with a local sign-change bracket when the expansion is
/// reliable and otherwise scans upward from x = n, where no zero lies below.
/// Each root is polished by Newton's method safeguarded with bisection.
pub fn bessel_zero(n: u32, k: u32) -> Result<f64> {
    check_zero_args(n, k)?;
    if mcmahon_reliable(n, k) {
        let g = mcmahon_guess(n, k);
        let (a, b) = (g - LOCAL_BRACKET, g + LOCAL_BRACKET);
        if pair(n, a).0 * pair(n, b).0 < 0.0 {
            return refine(n, k, a, b);
        }
    }
    Ok(*bessel_zeros(n, k)?.last().expect("k >= 1"))
}

/// The first `count` positive zeros of J_n, ascending.
pub fn bessel_zeros(n: u32, count: u32) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    check_zero_args(n, count)?;
    let mut out = Vec::with_capacity(count as usize);
    let mut lo = if n == 0 { 0.0 } else { n as f64 };
    let mut f_lo = pair(n, lo).0;
    while (out.len() as u32) < count {
        let hi = lo + SCAN_STEP;
        if hi > MAX_ARG {
            return Err(LabError::RootFindFailure {
                n,
                k: out.len() as u32 + 1,
                reason: "scan left the supported range".into(),
            });
        }
        let f_hi = pair(n, hi).0;
        if f_hi == 0.0 {
            out.push(hi);
            lo = hi + 1e-9;
            f_lo = pair(n, lo).0;
            continue;
        }
        if f_lo * f_hi < 0.0 {
            out.push(refine(n, out.len() as u32 + 1, lo, hi)?);
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(out)
}

fn refine(n: u32, k: u32, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = pair(n, a).0;
    let fb = pair(n, b).0;
    if fa * fb > 0.0 {
        return Err(LabError::RootFindFailure { n, k, reason: format!("no sign change on [{a}, {b}]") });
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..MAX_REFINE_ITERS {
        let (j, j1) = pair(n, x);
        if j == 0.0 {
            return Ok(x);
        }
        if (j < 0.0) == (fa < 0.0) {
            a = x;
            fa = j;
        } else {
            b = x;
        }
        let deriv = n as f64 / x * j - j1;
        let newton = x - j / deriv;
        let next = if deriv != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || b - a <= 4.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Err(LabError::RootFindFailure { n, k, reason: "no convergence".into() })
}
