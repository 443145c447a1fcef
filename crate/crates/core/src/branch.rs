//! Branch-aware logarithm and power.
//!
//! `log_θ` is the logarithm whose cut is the ray `{r e^{iθ} : r ≥ 0}`,
//! normalised so that `log_θ(1) = 0`. Its imaginary part `arg_θ` is the
//! representative of `arg z` in the open interval `(θ − 2π, θ)`; with
//! `θ = π` this is the principal branch.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Inputs closer than this (in radians) to the cut ray are rejected.
pub const CUT_GUARD: f64 = 1e-12;

/// Componentwise distance under which a complex exponent counts as an integer.
pub const INTEGER_TOL: f64 = 1e-12;

/// Default half-width of the excluded annulus around `|α| = 1`.
pub const DEFAULT_EXCLUSION_BAND: f64 = 0.02;

/// Default cross-method agreement tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Direction `θ ∈ (0, 2π)` of the branch cut.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BranchAngle(f64);

impl BranchAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_finite() && theta > 0.0 && theta < TAU {
            Ok(Self(theta))
        } else {
            Err(Error::InvalidAngle(theta))
        }
    }

    /// The principal branch, `θ = π`.
    pub fn principal() -> Self {
        Self(PI)
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// `e^{iθ}`, the unit vector along the cut.
    #[inline]
    pub fn direction(self) -> Complex64 {
        Complex64::cis(self.0)
    }
}

/// Which side of the unit circle `α` sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `|α| < 1`: the pole is enclosed.
    Inside,
    /// `|α| > 1`.
    Outside,
}

impl Regime {
    pub fn of(alpha: Complex64) -> Self {
        if alpha.norm() < 1.0 {
            Regime::Inside
        } else {
            Regime::Outside
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Inside => "inside",
            Regime::Outside => "outside",
        }
    }
}

/// One evaluation problem: `∫_{|z|=1} z^β/(z−α) dz` on the branch `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemInstance {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub theta: BranchAngle,
    /// Relative tolerance used when comparing methods.
    pub tol: f64,
    /// `|α|` must satisfy `| |α| − 1 | ≥ exclusion_band`.
    pub exclusion_band: f64,
}

impl ProblemInstance {
    pub fn new(alpha: Complex64, beta: Complex64, theta: BranchAngle, tol: f64) -> Result<Self> {
        Self::with_band(alpha, beta, theta, tol, DEFAULT_EXCLUSION_BAND)
    }

    pub fn with_band(
        alpha: Complex64,
        beta: Complex64,
        theta: BranchAngle,
        tol: f64,
        exclusion_band: f64,
    ) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidTolerance(tol));
        }
        if !(exclusion_band.is_finite() && exclusion_band >= 0.0) {
            return Err(Error::InvalidTolerance(exclusion_band));
        }
        let modulus = alpha.norm();
        if modulus == 1.0 || (modulus - 1.0).abs() < exclusion_band {
            return Err(Error::AlphaOnCircle { modulus, band: exclusion_band });
        }
        Ok(Self { alpha, beta, theta, tol, exclusion_band })
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.alpha)
    }

    /// Same instance with `α` replaced, re-validated against the band.
    pub fn with_alpha(&self, alpha: Complex64) -> Result<Self> {
        Self::with_band(alpha, self.beta, self.theta, self.tol, self.exclusion_band)
    }

    /// True when `α ≠ 0` lies on (or within the guard of) the cut ray.
    pub fn alpha_on_cut(&self) -> bool {
        self.alpha != Complex64::new(0.0, 0.0)
            && matches!(branch_log(self.alpha, self.theta), Err(Error::OnBranchCut { .. }))
    }
}

/// `log_θ(z)` split into its value and its argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchValue {
    pub log_value: Complex64,
    /// `arg_θ(z) ∈ (θ − 2π, θ)`.
    pub arg_value: f64,
}

/// Returns `β` as an integer when it is one to within [`INTEGER_TOL`].
pub fn as_integer(beta: Complex64) -> Option<i64> {
    let r = beta.re.round();
    if (beta.re - r).abs() < INTEGER_TOL && beta.im.abs() < INTEGER_TOL && r.abs() < 9.0e15 {
        Some(r as i64)
    } else {
        None
    }
}

/// Representative of `arg z` in `(θ − 2π, θ)`.
pub fn branch_arg(z: Complex64, theta: BranchAngle) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite);
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::ZeroInput);
    }
    let th = theta.radians();
    let a = z.arg();
    let shifts = ((th - a) / TAU).floor();
    let rep = a + TAU * shifts;
    // distance below the cut, in [0, 2π) up to rounding
    let gap = th - rep;
    if !(CUT_GUARD..=TAU - CUT_GUARD).contains(&gap) {
        return Err(Error::OnBranchCut { z, theta: th });
    }
    Ok(rep)
}

/// `log_θ(z) = ln|z| + i·arg_θ(z)`.
pub fn branch_log(z: Complex64, theta: BranchAngle) -> Result<BranchValue> {
    let arg_value = branch_arg(z, theta)?;
    Ok(BranchValue { log_value: Complex64::new(z.norm().ln(), arg_value), arg_value })
}

/// `z^β = exp(β·log_θ z)`.
///
/// Integer exponents are computed by repeated multiplication and accept any
/// `z ≠ 0` (and `z = 0` for `β ≥ 0`), independent of the cut.
pub fn branch_pow(z: Complex64, beta: Complex64, theta: BranchAngle) -> Result<Complex64> {
    if let Some(n) = as_integer(beta) {
        return integer_pow(z, n);
    }
    let log = branch_log(z, theta)?.log_value;
    Ok((beta * log).exp())
}

pub(crate) fn integer_pow(z: Complex64, n: i64) -> Result<Complex64> {
    if !z.is_finite() {
        return Err(Error::NonFinite);
    }
    let zero = z.re == 0.0 && z.im == 0.0;
    match n {
        0 => Ok(Complex64::new(1.0, 0.0)),
        _ if zero && n > 0 => Ok(Complex64::new(0.0, 0.0)),
        _ if zero => Err(Error::ZeroInput),
        _ if n > 0 => Ok(pow_by_squaring(z, n as u64)),
        _ => Ok(pow_by_squaring(z, n.unsigned_abs()).inv()),
    }
}

fn pow_by_squaring(mut base: Complex64, mut exp: u64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        exp >>= 1;
    }
    acc
}

/// The integrand `m_{α,β,θ}(z) = z^β / (z − α)`.
pub fn integrand_m(z: Complex64, inst: &ProblemInstance) -> Result<Complex64> {
    let denom = z - inst.alpha;
    if denom.norm() <= f64::EPSILON * (z.norm() + inst.alpha.norm()) {
        return Err(Error::PoleHit);
    }
    Ok(branch_pow(z, inst.beta, inst.theta)? / denom)
}

/// `e^{iβθ} − e^{iβ(θ−2π)}`: the jump of `z^β` across the cut at `|z| = 1`,
/// taken from the `arg → θ` side minus the `arg → θ − 2π` side.
///
/// This factor multiplies every non-residue closed form of the circle
/// integral. It vanishes exactly when `β` is an integer.
pub fn cut_jump(beta: Complex64, theta: BranchAngle) -> Complex64 {
    let th = theta.radians();
    let i = Complex64::i();
    (i * beta * th).exp() - (i * beta * (th - TAU)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn log_of_one_is_zero_on_every_branch() {
        for th in [0.1, PI / 3.0, PI, 5.0, 6.2] {
            let v = branch_log(c(1.0, 0.0), BranchAngle::new(th).unwrap()).unwrap();
            assert_eq!(v.log_value, c(0.0, 0.0));
        }
    }

    #[test]
    fn log_examples() {
        let v = branch_log(Complex64::i(), BranchAngle::principal()).unwrap();
        assert!(close(v.log_value, c(0.0, FRAC_PI_2), 1e-15));
        let v = branch_log(c(-1.0, 0.0), BranchAngle::new(FRAC_PI_2).unwrap()).unwrap();
        assert!(close(v.log_value, c(0.0, -PI), 1e-15));
        assert_eq!(v.arg_value, v.log_value.im);
    }

    #[test]
    fn rejects_cut_and_zero() {
        let th = BranchAngle::new(1.0).unwrap();
        assert_eq!(branch_log(c(0.0, 0.0), th), Err(Error::ZeroInput));
        let on_cut = Complex64::from_polar(2.5, 1.0);
        assert!(matches!(branch_log(on_cut, th), Err(Error::OnBranchCut { .. })));
        // principal branch: negative real axis is the cut
        assert!(matches!(branch_log(c(-3.0, 0.0), BranchAngle::principal()), Err(Error::OnBranchCut { .. })));
        // just off the ray on either side is fine
        assert!(branch_log(Complex64::from_polar(1.0, 1.0 + 1e-9), th).is_ok());
        assert!(branch_log(Complex64::from_polar(1.0, 1.0 - 1e-9), th).is_ok());
    }

    #[test]
    fn angle_must_be_open_interval() {
        assert!(BranchAngle::new(0.0).is_err());
        assert!(BranchAngle::new(TAU).is_err());
        assert!(BranchAngle::new(f64::NAN).is_err());
        assert!(BranchAngle::new(-1.0).is_err());
    }

    #[test]
    fn pow_examples() {
        let th = BranchAngle::new(1.0).unwrap();
        assert_eq!(branch_pow(c(1.0, 0.0), c(0.5, 2.0), th).unwrap(), c(1.0, 0.0));
        let p = branch_pow(c(4.0, 0.0), c(0.5, 0.0), BranchAngle::principal()).unwrap();
        assert!(close(p, c(2.0, 0.0), 1e-15));
        let p = branch_pow(c(0.0, 2.0), c(-2.0, 0.0), BranchAngle::principal()).unwrap();
        assert!(close(p, c(-0.25, 0.0), 1e-15));
    }

    #[test]
    fn integer_pow_ignores_cut_and_zero_rules() {
        let th = BranchAngle::new(2.0).unwrap();
        let on_cut = Complex64::from_polar(1.5, 2.0);
        assert!(branch_pow(on_cut, c(3.0, 0.0), th).is_ok());
        assert_eq!(branch_pow(c(0.0, 0.0), c(2.0, 0.0), th).unwrap(), c(0.0, 0.0));
        assert_eq!(branch_pow(c(0.0, 0.0), c(0.0, 0.0), th).unwrap(), c(1.0, 0.0));
        assert_eq!(branch_pow(c(0.0, 0.0), c(-1.0, 0.0), th), Err(Error::ZeroInput));
        assert!(branch_pow(c(0.0, 0.0), c(0.5, 0.0), th).is_err());
    }

    #[test]
    fn integrand_examples() {
        let inst = ProblemInstance::new(c(2.0, 0.0), c(0.0, 0.0), BranchAngle::principal(), 1e-8).unwrap();
        assert!(close(integrand_m(c(1.0, 0.0), &inst).unwrap(), c(-1.0, 0.0), 1e-15));

        let inst = ProblemInstance::new(c(2.0, 0.0), c(2.0, 0.0), BranchAngle::principal(), 1e-8).unwrap();
        assert!(close(integrand_m(Complex64::i(), &inst).unwrap(), c(0.4, 0.2), 1e-15));

        // e^{iπ/4}/(i − 0.5), reference computed independently from the polar form
        let inst = ProblemInstance::new(c(0.5, 0.0), c(0.5, 0.0), BranchAngle::principal(), 1e-8).unwrap();
        let z = Complex64::cis(FRAC_PI_2);
        let expected = Complex64::cis(PI / 4.0) / c(-0.5, 1.0);
        assert!(close(integrand_m(z, &inst).unwrap(), expected, 1e-15));
    }

    #[test]
    fn integrand_detects_pole() {
        let inst = ProblemInstance::new(c(3.0, 0.0), c(1.0, 0.0), BranchAngle::principal(), 1e-8).unwrap();
        assert_eq!(integrand_m(c(3.0, 0.0), &inst), Err(Error::PoleHit));
    }

    #[test]
    fn instance_rejects_circle_band() {
        let th = BranchAngle::principal();
        let err = ProblemInstance::new(c(1.0, 0.0), c(0.5, 0.0), th, 1e-8).unwrap_err();
        assert!(matches!(err, Error::AlphaOnCircle { .. }));
        assert!(ProblemInstance::new(c(0.0, 1.01), c(0.5, 0.0), th, 1e-8).is_err());
        assert!(ProblemInstance::with_band(c(0.0, 1.01), c(0.5, 0.0), th, 1e-8, 0.005).is_ok());
        assert!(ProblemInstance::new(c(0.5, 0.0), c(0.5, 0.0), th, 0.0).is_err());
    }

    #[test]
    fn jump_vanishes_for_integers() {
        let th = BranchAngle::new(2.3).unwrap();
        for n in -4..=4 {
            assert!(cut_jump(c(n as f64, 0.0), th).norm() < 1e-13);
        }
        // β = 1/2, θ = π: i − (−i)
        assert!(close(cut_jump(c(0.5, 0.0), BranchAngle::principal()), c(0.0, 2.0), 1e-15));
    }

    #[test]
    fn integer_detection() {
        assert_eq!(as_integer(c(3.0, 0.0)), Some(3));
        assert_eq!(as_integer(c(-2.0 + 1e-14, 1e-14)), Some(-2));
        assert_eq!(as_integer(c(2.0, 1e-9)), None);
        assert_eq!(as_integer(c(0.5, 0.0)), None);
    }
}
