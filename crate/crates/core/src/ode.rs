//! Second-order linear equations satisfied by the circle integral as a
//! function of `α`, and their singular points.

use num_complex::Complex64;

use crate::branch::{as_integer, cut_jump, BranchAngle, ProblemInstance, Regime};
use crate::closed_form::eval_theorem;
use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-3;

/// Relative size below which a polynomial remainder counts as zero.
const ROOT_TOL: f64 = 1e-10;

/// Complex polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<Complex64>);

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Self(coeffs);
        p.trim();
        p
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    fn trim(&mut self) {
        while matches!(self.0.last(), Some(c) if *c == Complex64::new(0.0, 0.0)) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.0.iter().map(|c| c * k).collect())
    }

    /// Divides by `(x − r)`, returning quotient and remainder.
    pub fn deflate(&self, r: Complex64) -> (Self, Complex64) {
        let Some(d) = self.degree() else {
            return (self.clone(), Complex64::new(0.0, 0.0));
        };
        let mut q = vec![Complex64::new(0.0, 0.0); d];
        let mut carry = self.0[d];
        for k in (0..d).rev() {
            q[k] = carry;
            carry = self.0[k] + carry * r;
        }
        (Self::new(q), carry)
    }

    /// Multiplicity of `r` as a root; `usize::MAX` for the zero polynomial.
    pub fn multiplicity(&self, r: Complex64) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut p = self.clone();
        let mut count = 0;
        while p.degree().unwrap_or(0) > 0 {
            let size: f64 = p.0.iter().enumerate().map(|(k, c)| c.norm() * r.norm().powi(k as i32)).sum();
            let (q, rem) = p.deflate(r);
            if rem.norm() > ROOT_TOL * size {
                break;
            }
            count += 1;
            p = q;
        }
        count
    }

    /// Distinct roots, each reported once.
    pub fn roots(&self) -> Vec<Complex64> {
        let Some(_) = self.degree() else {
            return Vec::new();
        };
        let mut roots = Vec::new();
        // exact zeros at the origin first
        let zeros = self.0.iter().take_while(|c| **c == Complex64::new(0.0, 0.0)).count();
        if zeros > 0 {
            roots.push(Complex64::new(0.0, 0.0));
        }
        let rest = Self::new(self.0[zeros..].to_vec());
        for r in durand_kerner(&rest) {
            let scale = r.norm().max(1.0);
            if roots.iter().all(|q: &Complex64| (q - r).norm() > 1e-6 * scale) {
                roots.push(r);
            }
        }
        roots
    }
}

fn durand_kerner(p: &Polynomial) -> Vec<Complex64> {
    let Some(d) = p.degree() else { return Vec::new() };
    match d {
        0 => Vec::new(),
        1 => vec![-p.0[0] / p.0[1]],
        _ => {
            let lead = p.0[d];
            let monic = Polynomial::new(p.0.iter().map(|c| c / lead).collect());
            let radius = 1.0 + monic.0[..d].iter().map(|c| c.norm()).fold(0.0, f64::max);
            let seed = Complex64::from_polar(1.0, 0.4);
            let mut z: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32) * radius * 0.5).collect();
            for _ in 0..500 {
                let mut change: f64 = 0.0;
                for i in 0..d {
                    let denom: Complex64 = (0..d).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
                    let step = monic.eval(z[i]) / denom;
                    z[i] -= step;
                    change = change.max(step.norm() / z[i].norm().max(1.0));
                }
                if change < 1e-15 {
                    break;
                }
            }
            // polish each root with Newton on the original polynomial
            let deriv = Polynomial::new(p.0.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect());
            for r in &mut z {
                for _ in 0..3 {
                    let dp = deriv.eval(*r);
                    if dp.norm() == 0.0 {
                        break;
                    }
                    *r -= p.eval(*r) / dp;
                }
            }
            z
        }
    }
}

/// `p2(α) I'' + p1(α) I' + zero_order · I = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeCoefficients {
    pub p2: Polynomial,
    pub p1: Polynomial,
    pub zero_order: Complex64,
    pub rhs: Complex64,
}

impl OdeCoefficients {
    /// Equation for the given regime, in `α`.
    ///
    /// `|α| > 1`: `(α² − α³e^{−iθ}) I'' + (−βα − (1−β)α²e^{−iθ}) I' + βI = J`;
    /// `|α| < 1`: `(αe^{iθ} − α²) I'' + ((1−β)e^{iθ} − (2−β)α) I' + βI = 0`.
    pub fn for_regime(regime: Regime, beta: Complex64, theta: BranchAngle) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let e = theta.direction();
        match regime {
            Regime::Outside => Self {
                p2: Polynomial::new(vec![zero, zero, one, -e.conj()]),
                p1: Polynomial::new(vec![zero, -beta, -(one - beta) * e.conj()]),
                zero_order: beta,
                rhs: cut_jump(beta, theta),
            },
            Regime::Inside => Self {
                p2: Polynomial::new(vec![zero, e, -one]),
                p1: Polynomial::new(vec![(one - beta) * e, -(2.0 - beta)]),
                zero_order: beta,
                rhs: zero,
            },
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self { p2: self.p2.scale(k), p1: self.p1.scale(k), zero_order: self.zero_order * k, rhs: self.rhs * k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeResidual {
    pub lhs_minus_rhs: Complex64,
    /// `|lhs − rhs| / max(|rhs|, max|coefficient| · max|derivative|, 1)`.
    pub relative_residual: f64,
    pub step: f64,
}

/// Plugs five-point finite differences of the closed form into the regime's
/// equation at `α`.
pub fn ode_residual(inst: &ProblemInstance, h: f64) -> Result<OdeResidual> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidTolerance(h));
    }
    if as_integer(inst.beta).is_some() {
        return Err(Error::IntegerBeta);
    }
    let regime = inst.regime();
    let mut f = [Complex64::new(0.0, 0.0); 5];
    for (slot, k) in f.iter_mut().zip(-2i32..=2) {
        let point = inst.with_alpha(inst.alpha + h * k as f64).map_err(|e| {
            if matches!(e, Error::AlphaOnCircle { .. }) {
                Error::RegimeStraddle
            } else {
                e
            }
        })?;
        if point.regime() != regime {
            return Err(Error::RegimeStraddle);
        }
        *slot = eval_theorem(&point)?.value;
    }
    let [fm2, fm1, f0, f1, f2] = f;
    let d1 = (-f2 + f1 * 8.0 - fm1 * 8.0 + fm2) / (12.0 * h);
    let d2 = (-f2 + f1 * 16.0 - f0 * 30.0 + fm1 * 16.0 - fm2) / (12.0 * h * h);

    let eq = OdeCoefficients::for_regime(regime, inst.beta, inst.theta);
    let c2 = eq.p2.eval(inst.alpha);
    let c1 = eq.p1.eval(inst.alpha);
    let lhs = c2 * d2 + c1 * d1 + eq.zero_order * f0;
    let diff = lhs - eq.rhs;
    let coef = c2.norm().max(c1.norm()).max(eq.zero_order.norm());
    let deriv = d2.norm().max(d1.norm()).max(f0.norm());
    let scale = eq.rhs.norm().max(coef * deriv).max(1.0);
    Ok(OdeResidual { lhs_minus_rhs: diff, relative_residual: diff.norm() / scale, step: h })
}

/// Residuals at `h` and `h/2` and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConvergence {
    pub coarse: OdeResidual,
    pub fine: OdeResidual,
    pub factor: f64,
}

pub fn ode_convergence(inst: &ProblemInstance, h: f64) -> Result<OdeConvergence> {
    let coarse = ode_residual(inst, h)?;
    let fine = ode_residual(inst, 0.5 * h)?;
    let factor =
        if fine.relative_residual == 0.0 { f64::INFINITY } else { coarse.relative_residual / fine.relative_residual };
    Ok(OdeConvergence { coarse, fine, factor })
}

/// `k = β / (e^{iβθ} − e^{iβ(θ−2π)})`, so that `k·I(α) = ₂F₁(1, −β; 1−β; αe^{−iθ})`
/// for `|α| < 1`.
pub fn scaling_constant_k(beta: Complex64, theta: BranchAngle) -> Result<Complex64> {
    if as_integer(beta).is_some() {
        return Err(Error::IntegerBeta);
    }
    Ok(beta / cut_jump(beta, theta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Finite(Complex64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityClass {
    Regular,
    Irregular,
    Ordinary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPoint {
    pub location: Location,
    pub class: SingularityClass,
}

fn classify(m2: usize, m1: usize, m0: usize) -> SingularityClass {
    if m2 <= m1 && m2 <= m0 {
        SingularityClass::Ordinary
    } else if m2 <= m1.saturating_add(1) && m2 <= m0.saturating_add(2) {
        SingularityClass::Regular
    } else {
        SingularityClass::Irregular
    }
}

/// Roots of the leading polynomial and the point at infinity, classified by
/// the orders of `p1/p2` and `p0/p2` (Fuchs' criterion).
pub fn singular_points(coeffs: &OdeCoefficients) -> Vec<SingularPoint> {
    let p0 = Polynomial::constant(coeffs.zero_order);
    let mut finite: Vec<SingularPoint> = coeffs
        .p2
        .roots()
        .into_iter()
        .map(|r| SingularPoint {
            location: Location::Finite(r),
            class: classify(coeffs.p2.multiplicity(r), coeffs.p1.multiplicity(r), p0.multiplicity(r)),
        })
        .collect();
    finite.sort_by(|a, b| {
        let key = |p: &SingularPoint| match p.location {
            Location::Finite(z) => (z.norm(), z.arg()),
            Location::Infinity => (f64::INFINITY, 0.0),
        };
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    finite.push(SingularPoint { location: Location::Infinity, class: infinity_class(coeffs, &p0) });
    finite
}

fn infinity_class(coeffs: &OdeCoefficients, p0: &Polynomial) -> SingularityClass {
    // with x = 1/α: x⁴P2(1/x) y'' + (2x³P2(1/x) − x²P1(1/x)) y' + P0(1/x) y = 0,
    // everything multiplied by x^D to clear denominators
    let d = [&coeffs.p2, &coeffs.p1, p0].iter().filter_map(|p| p.degree()).max().unwrap_or(0);
    let reversed = |p: &Polynomial, shift: usize| -> Vec<Complex64> {
        // x^{D+shift} p(1/x)
        let mut out = vec![Complex64::new(0.0, 0.0); d + shift + 1];
        for (k, c) in p.0.iter().enumerate() {
            out[d + shift - k] += c;
        }
        out
    };
    let q2 = Polynomial::new(reversed(&coeffs.p2, 4));
    let a = reversed(&coeffs.p2, 3);
    let b = reversed(&coeffs.p1, 2);
    let len = a.len().max(b.len());
    let q1 = Polynomial::new(
        (0..len).map(|k| a.get(k).copied().unwrap_or_default() * 2.0 - b.get(k).copied().unwrap_or_default()).collect(),
    );
    let q0 = Polynomial::new(reversed(p0, 0));
    let origin = Complex64::new(0.0, 0.0);
    classify(q2.multiplicity(origin), q1.multiplicity(origin), q0.multiplicity(origin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyp2f1::hyp2f1_one_b;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn inst(alpha: Complex64, beta: Complex64, theta: f64) -> ProblemInstance {
        ProblemInstance::new(alpha, beta, BranchAngle::new(theta).unwrap(), 1e-8).unwrap()
    }

    #[test]
    fn residual_examples() {
        for a in [c(3.0, 0.0), c(0.4, 0.0)] {
            let r = ode_residual(&inst(a, c(0.5, 0.0), PI), 1e-3).unwrap();
            assert!(r.relative_residual < 1e-5, "{a}: {}", r.relative_residual);
        }
    }

    #[test]
    fn residual_is_fourth_order_above_rounding() {
        for (a, h) in [(c(3.0, 0.5), 0.2), (c(0.4, 0.1), 0.05)] {
            let conv = ode_convergence(&inst(a, c(0.5, 0.2), 2.0), h).unwrap();
            assert!(conv.coarse.relative_residual > 1e-8, "{a}: {}", conv.coarse.relative_residual);
            assert!(conv.factor >= 8.0, "{a}: factor {}", conv.factor);
        }
    }

    #[test]
    fn rhs_at_half() {
        let eq = OdeCoefficients::for_regime(Regime::Outside, c(0.5, 0.0), BranchAngle::new(PI).unwrap());
        assert!((eq.rhs - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn residual_rejects_straddle_and_integers() {
        assert_eq!(ode_residual(&inst(c(0.975, 0.0), c(0.5, 0.0), PI), 0.01), Err(Error::RegimeStraddle));
        assert_eq!(ode_residual(&inst(c(0.5, 0.0), c(2.0, 0.0), PI), 1e-3), Err(Error::IntegerBeta));
    }

    #[test]
    fn k_examples() {
        let th = BranchAngle::new(PI).unwrap();
        let k = scaling_constant_k(c(0.5, 0.0), th).unwrap();
        assert!((k - c(0.0, -0.25)).norm() < 1e-15, "{k}");
        let i = eval_theorem(&inst(c(0.3, 0.0), c(0.5, 0.0), PI)).unwrap().value;
        let f = hyp2f1_one_b(c(-0.5, 0.0), c(-0.3, 0.0), 1e-16).unwrap().value;
        assert!((k * i - f).norm() < 1e-10);
        let k = scaling_constant_k(c(-0.25, 0.0), BranchAngle::new(1.0).unwrap()).unwrap();
        assert!(k.is_finite() && k.norm() > 0.0);
        assert_eq!(scaling_constant_k(c(3.0, 0.0), th), Err(Error::IntegerBeta));
    }

    #[test]
    fn polynomial_helpers() {
        // (x−1)²(x+2)
        let p = Polynomial::new(vec![c(2.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(p.multiplicity(c(1.0, 0.0)), 2);
        assert_eq!(p.multiplicity(c(-2.0, 0.0)), 1);
        assert_eq!(p.multiplicity(c(0.0, 0.0)), 0);
        let (q, rem) = p.deflate(c(-2.0, 0.0));
        assert!(rem.norm() < 1e-15);
        assert_eq!(q.degree(), Some(2));
        let mut roots = p.roots();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - c(-2.0, 0.0)).norm() < 1e-10);
        assert!((roots[1] - c(1.0, 0.0)).norm() < 1e-6);
    }

    fn expect_three_regular(points: &[SingularPoint], theta: f64) {
        assert_eq!(points.len(), 3, "{points:?}");
        assert!(points.iter().all(|p| p.class == SingularityClass::Regular), "{points:?}");
        assert!(matches!(points[0].location, Location::Finite(z) if z.norm() < 1e-12));
        let e = Complex64::from_polar(1.0, theta);
        assert!(matches!(points[1].location, Location::Finite(z) if (z - e).norm() < 1e-10));
        assert_eq!(points[2].location, Location::Infinity);
    }

    #[test]
    fn three_regular_points_in_both_regimes() {
        for theta in [1.0, PI, 5.0] {
            let th = BranchAngle::new(theta).unwrap();
            for regime in [Regime::Outside, Regime::Inside] {
                let eq = OdeCoefficients::for_regime(regime, c(0.5, 0.2), th);
                expect_three_regular(&singular_points(&eq), theta);
            }
        }
    }

    #[test]
    fn constant_leading_coefficient_has_no_finite_points() {
        let eq = OdeCoefficients {
            p2: Polynomial::constant(c(1.0, 0.0)),
            p1: Polynomial::new(vec![c(0.0, 0.0), c(1.0, 0.0)]),
            zero_order: c(2.0, 0.0),
            rhs: c(0.0, 0.0),
        };
        let pts = singular_points(&eq);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].location, Location::Infinity);
        // y'' + αy' + 2y = 0 has an irregular point at infinity
        assert_eq!(pts[0].class, SingularityClass::Irregular);
    }
}
