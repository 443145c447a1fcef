//! Closed forms of the circle integral: the hypergeometric case split, the
//! direct power series for `|α| < 1`, and the finite log sum for rational `β`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::branch::{as_integer, cut_jump, integer_pow, ProblemInstance, Regime};
use crate::dd::{turn_fraction, Cdd, Dd, DD_EPS};
use crate::error::{Error, Result};
use crate::hyp2f1::{hyp2f1_one_b, hyp2f1_one_b_minus_one, SeriesResult, DEFAULT_MAX_TERMS, DEFAULT_SERIES_TOL};
use crate::quadrature::{core_integral, IdentityCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    TheoremHypergeometric,
    RationalLogSum,
    Quadrature,
    SeriesDirect,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::TheoremHypergeometric => "theorem",
            Method::RationalLogSum => "rational",
            Method::Quadrature => "quadrature",
            Method::SeriesDirect => "series",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub value: Complex64,
    pub method: Method,
    pub error_estimate: f64,
    pub diagnostics: BTreeMap<String, String>,
}

impl MethodResult {
    pub(crate) fn new(method: Method, value: Complex64, error_estimate: f64, inst: &ProblemInstance) -> Self {
        let mut diagnostics = BTreeMap::new();
        diagnostics.insert("regime".into(), inst.regime().name().into());
        diagnostics.insert("beta_class".into(), beta_class(inst.beta));
        if inst.alpha_on_cut() {
            diagnostics.insert("alpha_on_cut".into(), "true".into());
        }
        Self { value, method, error_estimate, diagnostics }
    }

    pub(crate) fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.diagnostics.insert(key.into(), value.to_string());
        self
    }
}

fn beta_class(beta: Complex64) -> String {
    match as_integer(beta) {
        Some(n) => format!("integer:{n}"),
        None if beta.im == 0.0 => "real".into(),
        None => "complex".into(),
    }
}

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, TAU)
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Residue-theorem value for integer `β = n`.
fn integer_case(inst: &ProblemInstance, n: i64) -> Result<Complex64> {
    Ok(match (inst.regime(), n) {
        (Regime::Inside, n) if n >= 0 => two_pi_i() * integer_pow(inst.alpha, n)?,
        (Regime::Outside, n) if n < 0 => -two_pi_i() * integer_pow(inst.alpha, n)?,
        _ => zero(),
    })
}

fn require(series: SeriesResult) -> Result<SeriesResult> {
    if series.converged {
        Ok(series)
    } else {
        Err(Error::NoConvergence { value: series.value, estimate: series.tail_estimate })
    }
}

/// Hypergeometric closed form.
///
/// Integer `β` returns the residue values with no series evaluated. Otherwise,
/// with `J = e^{iβθ} − e^{iβ(θ−2π)}`:
/// `|α| > 1`: `(J/β)·(1 − ₂F₁(1, β; 1+β; e^{iθ}/α))`,
/// `|α| < 1`: `(J/β)·₂F₁(1, −β; 1−β; αe^{−iθ})`.
pub fn eval_theorem(inst: &ProblemInstance) -> Result<MethodResult> {
    let method = Method::TheoremHypergeometric;
    if let Some(n) = as_integer(inst.beta) {
        let value = integer_case(inst, n)?;
        return Ok(MethodResult::new(method, value, f64::EPSILON * value.norm(), inst).note("series_terms", 0));
    }
    let beta = inst.beta;
    let scale = cut_jump(beta, inst.theta) / beta;
    let dir = inst.theta.direction();
    let (value, series) = match inst.regime() {
        Regime::Outside => {
            // 1 − F is summed from k = 1 directly to avoid cancellation
            let s = require(hyp2f1_one_b_minus_one(beta, dir / inst.alpha, DEFAULT_SERIES_TOL)?)?;
            (-scale * s.value, s)
        }
        Regime::Inside => {
            let s = require(hyp2f1_one_b(-beta, inst.alpha * dir.conj(), DEFAULT_SERIES_TOL)?)?;
            (scale * s.value, s)
        }
    };
    let err = scale.norm() * series.tail_estimate + 4.0 * f64::EPSILON * (value.norm() + scale.norm());
    let mut r = MethodResult::new(method, value, err, inst).note("series_terms", series.terms_used);
    if series.slow_convergence {
        r = r.note("slow_convergence", "true");
    }
    Ok(r)
}

/// `J · Σ_{k≥0} (αe^{−iθ})^k / (β − k)` for `|α| < 1`, summed directly.
pub fn eval_power_series(inst: &ProblemInstance, max_terms: usize) -> Result<MethodResult> {
    let method = Method::SeriesDirect;
    if inst.regime() == Regime::Outside {
        return Err(Error::NotApplicable("direct series needs |alpha| < 1"));
    }
    if let Some(n) = as_integer(inst.beta) {
        let value = integer_case(inst, n)?;
        let r = MethodResult::new(method, value, f64::EPSILON * value.norm(), inst);
        return Ok(if n >= 0 { r.note("redirect", "residue") } else { r });
    }
    let beta = inst.beta;
    let w = inst.alpha * inst.theta.direction().conj();
    let r = w.norm();
    let geometric = r / (1.0 - r);
    let settle = beta.norm().ceil() as usize + 1;

    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = zero();
    let mut tail = f64::INFINITY;
    let mut used = 0;
    let mut converged = false;
    for k in 0..max_terms {
        let term = power / (beta - k as f64);
        sum += term;
        used = k + 1;
        tail = term.norm() * geometric;
        if r == 0.0 || (k >= settle && tail <= DEFAULT_SERIES_TOL * sum.norm().max(1.0)) {
            converged = true;
            break;
        }
        power *= w;
    }
    if r == 0.0 {
        tail = 0.0;
    }
    let jump = cut_jump(beta, inst.theta);
    let value = jump * sum;
    if !converged {
        return Err(Error::NoConvergence { value, estimate: jump.norm() * tail });
    }
    let err = jump.norm() * tail + 4.0 * f64::EPSILON * value.norm();
    Ok(MethodResult::new(method, value, err, inst).note("series_terms", used))
}

/// `(1/n) Σ_{j<n} e^{2πi j d/n}`: exactly 1 when `n | d`, else 0.
///
/// # Panics
/// If `n == 0`.
pub fn roots_of_unity_delta(n: u32, d: i64) -> f64 {
    assert!(n >= 1, "roots_of_unity_delta needs n >= 1");
    let exact = if d.rem_euclid(n as i64) == 0 { 1.0 } else { 0.0 };
    debug_assert!((roots_of_unity_sum(n, d) - Complex64::new(exact, 0.0)).norm() <= 1e-12);
    exact
}

/// Floating-point evaluation of the mean of `e^{2πi j d/n}`.
pub fn roots_of_unity_sum(n: u32, d: i64) -> Complex64 {
    assert!(n >= 1, "roots_of_unity_sum needs n >= 1");
    let n64 = n as i64;
    let total: Complex64 = (0..n64)
        .map(|j| {
            // reduce before scaling so the angle stays in [0, 2π)
            let r = ((j as i128 * d as i128).rem_euclid(n64 as i128)) as f64;
            Complex64::from_polar(1.0, TAU * r / n as f64)
        })
        .sum();
    total / n as f64
}

/// Non-integer rational exponent `m/n` in lowest terms, `n ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalBeta {
    m: i64,
    n: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

impl RationalBeta {
    pub fn new(m: i64, n: i64) -> Result<Self> {
        if n == 0 || m == i64::MIN || n == i64::MIN {
            return Err(Error::InvalidRational { m, n });
        }
        let sign = n.signum();
        let g = gcd(m, n);
        let (m, n) = (sign * m / g, sign * n / g);
        if n == 1 {
            return Err(Error::IntegerBeta);
        }
        Ok(Self { m, n })
    }

    pub fn m(self) -> i64 {
        self.m
    }

    pub fn n(self) -> i64 {
        self.n
    }

    pub fn value(self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.value(), 0.0)
    }

    pub fn negated(self) -> Self {
        Self { m: -self.m, n: self.n }
    }
}

impl fmt::Display for RationalBeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.m, self.n)
    }
}

impl FromStr for RationalBeta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRational { m: 0, n: 0 };
        let (m, n) = s.split_once('/').ok_or_else(bad)?;
        let m = m.trim().parse().map_err(|_| bad())?;
        let n = n.trim().parse().map_err(|_| bad())?;
        Self::new(m, n)
    }
}

/// Value of `G` with a crude bound on its rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalG {
    pub value: Complex64,
    pub error_estimate: f64,
}

/// `G(z) = ₂F₁(1, m/n; 1+m/n; z)` as a finite sum of logarithms.
pub fn eval_rational_g(z: Complex64, beta: RationalBeta) -> Result<Complex64> {
    Ok(rational_g(z, beta, 0)?.value)
}

/// As [`eval_rational_g`] with the n-th root rotated by `e^{2πiℓ/n}`.
pub fn eval_rational_g_on_root(z: Complex64, beta: RationalBeta, root_index: i64) -> Result<Complex64> {
    Ok(rational_g(z, beta, root_index)?.value)
}

/// `G(z)` together with an error estimate from the size of the cancelling
/// parts.
pub fn rational_g(z: Complex64, beta: RationalBeta, root_index: i64) -> Result<RationalG> {
    if !z.is_finite() {
        return Err(Error::NonFinite);
    }
    let modulus = z.norm();
    if modulus >= 1.0 {
        return Err(Error::OutsideDisc(modulus));
    }
    if modulus == 0.0 {
        return Ok(RationalG { value: Complex64::new(1.0, 0.0), error_estimate: 0.0 });
    }
    let (m, n) = (beta.m, beta.n);
    let nf = n as f64;
    // carried in double-double: the j-sum and the corrections below cancel
    // by about |ω|^{1−m} at small |z|
    let zd = Cdd::from_c64(z);
    let log_r = zd.norm_sqr().ln() * 0.5 / nf;
    let phi = Dd::atan2(zd.im, zd.re) / nf + turn_fraction(root_index.rem_euclid(n), n);
    let omega = Cdd::from_polar(log_r.exp(), phi);
    let one = Cdd::real(Dd::new(1.0));

    // Σ_j e^{−2πijm/n} log(1 − e^{2πij/n} ω)
    let mut sum = Cdd::default();
    let mut magnitude = 0.0;
    for j in 0..n {
        let twist = Cdd::cis(-turn_fraction((j * m).rem_euclid(n), n));
        let log = (one - Cdd::cis(turn_fraction(j, n)) * omega).ln();
        magnitude += log.to_c64().norm();
        sum = sum + twist * log;
    }
    let omega_pow = Cdd::from_polar((log_r * -(m as f64)).exp(), phi * -(m as f64));
    let prefactor = omega_pow.scale(-(Dd::new(m as f64) / nf));
    let mut value = prefactor * sum;
    let mut scale = prefactor.to_c64().norm() * magnitude;

    // the log sum covers exponents s ≥ 1 only; patch the rest of the series
    if m < 0 {
        let mut zk = one;
        let mut k = 0;
        while m + n * k < 0 {
            let t = zk.scale(Dd::new(m as f64) / (m + n * k) as f64);
            value = value + t;
            scale += t.to_c64().norm();
            zk = zk * zd;
            k += 1;
        }
    } else if m > n {
        let zinv = zd.inv();
        let mut zk = zinv;
        let mut k = 1;
        while m - n * k > 0 {
            let t = zk.scale(Dd::new(m as f64) / (m - n * k) as f64);
            value = value - t;
            scale += t.to_c64().norm();
            zk = zk * zinv;
            k += 1;
        }
    }
    let value = value.to_c64();
    let error_estimate = 8.0 * nf * DD_EPS * scale + 2.0 * f64::EPSILON * value.norm();
    Ok(RationalG { value, error_estimate })
}

/// Closed form for rational `β = m/n` built on the finite log sum `G`.
///
/// `|α| < 1`: `(J/β)·G_{−m/n}(αe^{−iθ})`; `|α| > 1`: `(J/β)·(1 − G_{m/n}(e^{iθ}/α))`.
pub fn eval_rational(inst: &ProblemInstance, beta: RationalBeta) -> Result<MethodResult> {
    let b = beta.as_complex();
    if (inst.beta - b).norm() > 1e-12 {
        return Err(Error::BetaMismatch { m: beta.m, n: beta.n, beta: inst.beta });
    }
    let jump = cut_jump(b, inst.theta);
    let scale = jump / b;
    let dir = inst.theta.direction();
    let (value, g) = match inst.regime() {
        Regime::Inside => {
            let z = inst.alpha * dir.conj();
            let g = rational_g(z, beta.negated(), 0)?;
            (scale * g.value, g)
        }
        Regime::Outside => {
            let g = rational_g(dir / inst.alpha, beta, 0)?;
            (scale * (Complex64::new(1.0, 0.0) - g.value), g)
        }
    };
    let err = scale.norm() * g.error_estimate + 4.0 * f64::EPSILON * value.norm();
    let mut r = MethodResult::new(Method::RationalLogSum, value, err, inst).note("rational", beta);
    if inst.alpha == zero() {
        r = r.note("zero_argument", "G(0) = 1");
    }
    Ok(r)
}

/// `w^β` with `arg w ∈ (0, 2π)`.
fn pow_positive_arg(w: Complex64, beta: Complex64) -> Complex64 {
    let mut arg = w.arg();
    if arg <= 0.0 {
        arg += TAU;
    }
    (beta * Complex64::new(w.norm().ln(), arg)).exp()
}

/// Quadrature of `∫₀¹ t^{β−1}/(1 − t e^{iθ}/α) dt` against
/// `2πi w^β/(e^{2πiβ} − 1) + (1/β)(1 − ₂F₁(1, −β; 1−β; w))`, `w = αe^{−iθ}`.
///
/// `w^β` is taken with `arg w ∈ (0, 2π)`. Residual is `|lhs−rhs|/max(|rhs|, 1)`.
pub fn check_reconciliation(inst: &ProblemInstance) -> Result<IdentityCheck> {
    if inst.regime() != Regime::Inside {
        return Err(Error::NotApplicable("reconciliation needs |alpha| < 1"));
    }
    if inst.alpha == zero() {
        return Err(Error::ZeroInput);
    }
    if inst.alpha_on_cut() {
        return Err(Error::AlphaOnCut);
    }
    if inst.beta.re <= 0.0 {
        return Err(Error::DivergentAtZero);
    }
    if as_integer(inst.beta).is_some() {
        return Err(Error::BetaNonNegativeInteger);
    }
    let beta = inst.beta;
    let w = inst.alpha * inst.theta.direction().conj();
    let lhs = core_integral(w.inv(), beta)?.require_converged()?.value;
    let f_minus_one = require(hyp2f1_one_b_minus_one(-beta, w, DEFAULT_SERIES_TOL)?)?.value;
    let denom = (two_pi_i() * beta).exp() - 1.0;
    let rhs = two_pi_i() * pow_positive_arg(w, beta) / denom - f_minus_one / beta;
    Ok(IdentityCheck { lhs, rhs, residual: (lhs - rhs).norm() / rhs.norm().max(1.0) })
}

/// Default term cap for [`eval_power_series`].
pub const DEFAULT_SERIES_TERMS: usize = DEFAULT_MAX_TERMS;
