//! Double-double arithmetic (about 32 significant digits), just enough for
//! the finite log sum whose terms cancel heavily at small `|z|`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub(crate) const DD_EPS: f64 = 4.93e-32;

const TWO_PI: Dd = Dd { hi: std::f64::consts::TAU, lo: 2.449_293_598_294_706e-16 };
const HALF_PI: Dd = Dd { hi: std::f64::consts::FRAC_PI_2, lo: 6.123_233_995_736_766e-17 };
const LN_2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn scale_pow2(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Self { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::new(0.0);
        }
        let s = self.hi.sqrt();
        let (p, e) = two_prod(s, s);
        let diff = self - Dd { hi: p, lo: e };
        Self::norm(s, diff.hi / (2.0 * s))
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::new(0.0);
        }
        let k = (self.hi / LN_2.hi).round();
        let r = (self - LN_2 * k).scale_pow2(-10);
        // expm1(r) by Taylor, then undo the 2^-10 scaling by squaring
        let mut s = r;
        let mut term = r;
        for i in 2..20 {
            term = term * r / i as f64;
            s = s + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            s = s * 2.0 + s.sqr();
        }
        (s + 1.0).scale_pow2(k as i32)
    }

    /// Natural log for positive input (one Newton step on `exp`).
    pub fn ln(self) -> Self {
        let x = Self::new(self.hi.ln());
        x + self * (-x).exp() - 1.0
    }

    pub fn sin_cos(self) -> (Self, Self) {
        let k = (self.hi / HALF_PI.hi).round();
        let r = self - HALF_PI * k;
        let r2 = r.sqr();
        let (mut s, mut c) = (r, Self::new(1.0));
        let (mut ts, mut tc) = (r, Self::new(1.0));
        for i in 1..20 {
            let i = i as f64;
            ts = -(ts * r2) / ((2.0 * i) * (2.0 * i + 1.0));
            tc = -(tc * r2) / ((2.0 * i - 1.0) * (2.0 * i));
            s = s + ts;
            c = c + tc;
            if ts.hi.abs() < 1e-36 && tc.hi.abs() < 1e-36 {
                break;
            }
        }
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn atan2(y: Self, x: Self) -> Self {
        if x.hi == 0.0 && y.hi == 0.0 {
            return Self::new(0.0);
        }
        let z = Self::new(y.hi.atan2(x.hi));
        let r = (x.sqr() + y.sqr()).sqrt();
        let (xn, yn) = (x / r, y / r);
        let (s, c) = z.sin_cos();
        if xn.hi.abs() > yn.hi.abs() {
            z + (yn - s) / c
        } else {
            z - (xn - c) / s
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::norm(s, e + f)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        Dd::norm(s, e + self.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::norm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        Dd::norm(p, e + self.lo * b)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        Dd::norm(q1, q2) + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::new(b)
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub fn from_c64(z: Complex64) -> Self {
        Self { re: z.re.into(), im: z.im.into() }
    }

    pub fn real(x: Dd) -> Self {
        Self { re: x, im: Dd::new(0.0) }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn cis(angle: Dd) -> Self {
        let (s, c) = angle.sin_cos();
        Self { re: c, im: s }
    }

    pub fn from_polar(r: Dd, angle: Dd) -> Self {
        Self::cis(angle).scale(r)
    }

    pub fn scale(self, k: Dd) -> Self {
        Self { re: self.re * k, im: self.im * k }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re.sqr() + self.im.sqr()
    }

    /// Principal logarithm.
    pub fn ln(self) -> Self {
        Self { re: self.norm_sqr().ln() * 0.5, im: Dd::atan2(self.im, self.re) }
    }

    pub fn inv(self) -> Self {
        let d = self.norm_sqr();
        Self { re: self.re / d, im: -(self.im / d) }
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, b: Cdd) -> Cdd {
        Cdd { re: self.re + b.re, im: self.im + b.im }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, b: Cdd) -> Cdd {
        Cdd { re: self.re - b.re, im: self.im - b.im }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, b: Cdd) -> Cdd {
        Cdd { re: self.re * b.re - self.im * b.im, im: self.re * b.im + self.im * b.re }
    }
}

/// `2π·p/q` in double-double.
pub(crate) fn turn_fraction(p: i64, q: i64) -> Dd {
    TWO_PI * p as f64 / q as f64
}
