//! Gauss hypergeometric series inside the unit disc.
//!
//! Only the power series is implemented; there is no analytic continuation.
//! Every caller in this crate feeds arguments of modulus `min(|α|, 1/|α|)`.

use num_complex::Complex64;

use crate::branch::as_integer;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_TERMS: usize = 100_000;
pub const DEFAULT_SERIES_TOL: f64 = 1e-16;

/// Above this modulus the series is flagged as slowly convergent.
pub const SLOW_MODULUS: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: Complex64,
    pub terms_used: usize,
    /// Geometric bound on the discarded tail.
    pub tail_estimate: f64,
    pub converged: bool,
    /// `|z|` exceeded [`SLOW_MODULUS`].
    pub slow_convergence: bool,
}

/// Rising factorial `x (x+1) ··· (x+n−1)`.
pub fn pochhammer(x: Complex64, n: usize) -> Complex64 {
    (0..n).fold(Complex64::new(1.0, 0.0), |acc, k| acc * (x + k as f64))
}

fn check_disc(z: Complex64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite);
    }
    let r = z.norm();
    if r >= 1.0 {
        return Err(Error::OutsideDisc(r));
    }
    Ok(r)
}

fn is_nonpositive_integer(c: Complex64) -> bool {
    matches!(as_integer(c), Some(n) if n <= 0)
}

/// Partial sums of `Σ (a)_n (b)_n / ((c)_n n!) zⁿ`.
///
/// Terms follow the ratio recurrence. Past term `n` every ratio is at most
/// `ρ_n = |z|·(1 + P⁺/(n+Re c) + Q⁺/((n+1)(n+Re c)))` with
/// `P = |a|+|b|−1−Re c`, `Q = |a||b|−Re c`, so the discarded tail is below
/// `|t_n|·ρ_n/(1−ρ_n)`; summation stops once that is `≤ tol·max(|value|, 1)`.
pub fn hyp2f1_series(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    z: Complex64,
    tol: f64,
    max_terms: usize,
) -> Result<SeriesResult> {
    if is_nonpositive_integer(c) {
        return Err(Error::InvalidC(c));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let r = check_disc(z)?;
    let (na, nb) = (a.norm(), b.norm());
    let p = (na + nb - 1.0 - c.re).max(0.0);
    let q = (na * nb - c.re).max(0.0);
    let ratio_bound = |n: f64| {
        let d = n + c.re;
        if d <= 0.0 {
            f64::INFINITY
        } else {
            r * (1.0 + p / d + q / ((n + 1.0) * d))
        }
    };

    let mut term = Complex64::new(1.0, 0.0);
    let mut value = Complex64::new(0.0, 0.0);
    let mut tail = f64::INFINITY;
    let mut used = 0;
    let mut converged = false;
    for n in 0..max_terms {
        value += term;
        used = n + 1;
        if term.norm() == 0.0 && n > 0 {
            // a or b is a non-positive integer: the series terminated
            tail = 0.0;
            converged = true;
            break;
        }
        let k = n as f64;
        let rho = ratio_bound(k);
        tail = if rho < 1.0 { term.norm() * rho / (1.0 - rho) } else { f64::INFINITY };
        if tail <= tol * value.norm().max(1.0) {
            converged = true;
            break;
        }
        // (a+k)(b+k) first so swapping a and b gives bit-identical terms
        let ab = (a + k) * (b + k);
        term = term * ab * z / ((c + k) * (k + 1.0));
    }
    if r == 0.0 {
        tail = 0.0;
        converged = true;
    }
    Ok(SeriesResult { value, terms_used: used, tail_estimate: tail, converged, slow_convergence: r > SLOW_MODULUS })
}

/// `Σ_{k ≥ start} b/(b+k) z^k`, the `(1, b; 1+b)` series from index `start`.
fn one_b_from(b: Complex64, z: Complex64, tol: f64, max_terms: usize, start: usize) -> Result<SeriesResult> {
    if is_nonpositive_integer(b) && as_integer(b) != Some(0) {
        return Err(Error::InvalidC(b + 1.0));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let r = check_disc(z)?;
    let slow = r > SLOW_MODULUS;
    if as_integer(b) == Some(0) {
        // ₂F₁(1, 0; 1; z) = 1
        let value = if start == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        return Ok(SeriesResult { value, terms_used: 1, tail_estimate: 0.0, converged: true, slow_convergence: slow });
    }
    if r == 0.0 {
        let value = if start == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        return Ok(SeriesResult { value, terms_used: 1, tail_estimate: 0.0, converged: true, slow_convergence: slow });
    }
    let geometric = r / (1.0 - r);
    let settle = b.norm().ceil() as usize + 1;

    let mut power = z.powu(start as u32);
    let mut value = Complex64::new(0.0, 0.0);
    let mut tail = f64::INFINITY;
    let mut used = 0;
    let mut converged = false;
    for k in start..start.saturating_add(max_terms) {
        let term = b * power / (b + k as f64);
        value += term;
        used += 1;
        tail = term.norm() * geometric;
        if k >= settle && tail <= tol * value.norm().max(1.0) {
            converged = true;
            break;
        }
        power *= z;
    }
    Ok(SeriesResult { value, terms_used: used, tail_estimate: tail, converged, slow_convergence: slow })
}

/// `₂F₁(1, b; 1+b; z) = Σ_{k≥0} b/(b+k) z^k`.
pub fn hyp2f1_one_b(b: Complex64, z: Complex64, tol: f64) -> Result<SeriesResult> {
    one_b_from(b, z, tol, DEFAULT_MAX_TERMS, 0)
}

/// `₂F₁(1, b; 1+b; z) − 1`, summed from `k = 1` so small `|z|` keeps full
/// relative accuracy.
pub fn hyp2f1_one_b_minus_one(b: Complex64, z: Complex64, tol: f64) -> Result<SeriesResult> {
    one_b_from(b, z, tol, DEFAULT_MAX_TERMS, 1)
}
