//! Adaptive Gauss–Kronrod quadrature used as an independent oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::branch::{branch_pow, cut_jump, integrand_m, ProblemInstance, Regime};
use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, relative_gap};

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_PANELS: usize = 20_000;
/// Width of the sliver cut out on each side of the branch ray.
pub const ENDPOINT_DELTA: f64 = 1e-9;
const INITIAL_CIRCLE_PANELS: usize = 16;

// 21-point Kronrod abscissae (positive half) and weights; odd indices are the
// 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_451_213,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Relative tolerance: stop once the summed error is `≤ tol·max(|I|, 1)`.
    pub tol: f64,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { tol: DEFAULT_QUAD_TOL, max_panels: DEFAULT_MAX_PANELS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    /// Number of panels in the final partition.
    pub subdivisions: usize,
    pub converged: bool,
}

impl QuadratureResult {
    /// Converts a non-converged result into [`Error::NoConvergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence { value: self.value, estimate: self.abs_error_estimate })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // max-heap on error; ties broken by position so the order is total
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Ok(Panel { a, b, value, error })
}

/// Global adaptive integration of `f` over `[breaks[0], breaks[last]]`.
///
/// `breaks` must be strictly increasing; each interval is an initial panel.
pub fn integrate<F>(f: F, breaks: &[f64], cfg: QuadConfig) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
        return Err(Error::InvalidTolerance(cfg.tol));
    }
    if breaks.len() < 2 || breaks.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let p = gk21(&f, w[0], w[1])?;
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }

    let mut converged = false;
    loop {
        if total_err <= cfg.tol * total.norm().max(1.0) {
            converged = true;
            break;
        }
        if heap.len() >= cfg.max_panels {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // cannot bisect any further in floating point
            heap.push(worst);
            break;
        }
        let left = gk21(&f, worst.a, mid)?;
        let right = gk21(&f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // final sums are recomputed in a fixed order
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let values: Vec<Complex64> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<Complex64> = panels.iter().map(|p| Complex64::new(p.error, 0.0)).collect();
    let value = pairwise_sum(&values);
    let abs_error_estimate = pairwise_sum(&errors).re;
    let converged = converged || abs_error_estimate <= cfg.tol * value.norm().max(1.0);
    Ok(QuadratureResult { value, abs_error_estimate, subdivisions: panels.len(), converged })
}

/// `∫_{|z|=1} z^β/(z−α) dz` by direct quadrature in the angle.
///
/// The parameter runs over `(θ, θ+2π)` so the cut sits at both ends. A sliver
/// of width [`ENDPOINT_DELTA`] at each end is replaced by a midpoint value.
pub fn circle_integral(inst: &ProblemInstance) -> Result<QuadratureResult> {
    circle_integral_with(inst, QuadConfig::default())
}

pub fn circle_integral_with(inst: &ProblemInstance, cfg: QuadConfig) -> Result<QuadratureResult> {
    let th = inst.theta.radians();
    let g = |t: f64| -> Result<Complex64> {
        let z = Complex64::from_polar(1.0, t);
        Ok(integrand_m(z, inst)? * Complex64::i() * z)
    };
    let lo = th + ENDPOINT_DELTA;
    let hi = th + TAU - ENDPOINT_DELTA;
    let mut breaks: Vec<f64> =
        (0..=INITIAL_CIRCLE_PANELS).map(|k| lo + (hi - lo) * k as f64 / INITIAL_CIRCLE_PANELS as f64).collect();
    // a near-circle pole makes the integrand peak at Arg α
    if inst.alpha.norm() > 0.0 {
        let t_alpha = th + (inst.alpha.arg() - th).rem_euclid(TAU);
        if t_alpha > lo + 1e-6 && t_alpha < hi - 1e-6 && breaks.iter().all(|b| (b - t_alpha).abs() > 1e-6) {
            breaks.push(t_alpha);
            breaks.sort_by(f64::total_cmp);
        }
    }
    let body = integrate(g, &breaks, cfg)?;

    let h = 0.5 * ENDPOINT_DELTA;
    let start_mid = g(th + h)?;
    let end_mid = g(th + TAU - h)?;
    let slivers = (start_mid + end_mid) * ENDPOINT_DELTA;
    let sliver_err = ENDPOINT_DELTA * ((g(lo)? - start_mid).norm() + (g(hi)? - end_mid).norm());

    let value = body.value + slivers;
    let abs_error_estimate = body.abs_error_estimate + sliver_err;
    Ok(QuadratureResult {
        value,
        abs_error_estimate,
        subdivisions: body.subdivisions,
        converged: body.converged && abs_error_estimate <= cfg.tol * value.norm().max(1.0),
    })
}

/// `∫₀¹ t^{p−1} g(t) dt` for `Re p > 0`; `kinks` are points of `(0, 1)`
/// where `g` deserves an initial break.
fn power_weighted<G>(p: Complex64, g: G, kinks: &[f64], cfg: QuadConfig) -> Result<QuadratureResult>
where
    G: Fn(f64) -> Complex64,
{
    let r = p.re;
    if r >= 1.0 {
        let f = |t: f64| Ok(((p - 1.0) * t.ln()).exp() * g(t));
        return integrate(f, &breaks_in_unit(kinks.iter().copied()), cfg);
    }
    // u = t^r removes the endpoint singularity:
    // ∫₀¹ t^{p−1} g(t) dt = (1/r) ∫₀¹ u^{i·Im p / r} g(u^{1/r}) du
    let spin = Complex64::new(0.0, p.im / r);
    let f = |u: f64| Ok((spin * u.ln()).exp() * g(u.powf(1.0 / r)) / r);
    integrate(f, &breaks_in_unit(kinks.iter().map(|t| t.powf(r))), cfg)
}

fn breaks_in_unit(kinks: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut b = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    for k in kinks {
        if k > 1e-6 && k < 1.0 - 1e-6 && b.iter().all(|x| (x - k).abs() > 1e-6) {
            b.push(k);
        }
    }
    b.sort_by(f64::total_cmp);
    b
}

fn on_unit_segment(x: Complex64) -> bool {
    x.im.abs() <= 1e-14 * x.norm().max(1.0) && x.re >= 0.0 && x.re <= 1.0
}

/// `∫₀¹ t^{β−1}/(1 − w t) dt` for `Re β > 0` and `w ∉ [1, ∞)`.
pub fn core_integral(w: Complex64, beta: Complex64) -> Result<QuadratureResult> {
    core_integral_with(w, beta, QuadConfig::default())
}

pub fn core_integral_with(w: Complex64, beta: Complex64, cfg: QuadConfig) -> Result<QuadratureResult> {
    if !(w.is_finite() && beta.is_finite()) {
        return Err(Error::NonFinite);
    }
    if beta.re <= 0.0 {
        return Err(Error::DivergentAtZero);
    }
    let pole = if w == Complex64::new(0.0, 0.0) { None } else { Some(w.inv()) };
    if let Some(t0) = pole {
        if on_unit_segment(t0) {
            return Err(Error::SingularPath);
        }
    }
    let kinks: Vec<f64> = pole.map(|t0| t0.re).into_iter().collect();
    power_weighted(beta, |t| (Complex64::new(1.0, 0.0) - w * t).inv(), &kinks, cfg)
}

/// `∫₀¹ t^β/(t − w) dt` for `Re β > −1` and `w ∉ [0, 1]`.
pub fn ray_integral(w: Complex64, beta: Complex64) -> Result<QuadratureResult> {
    if !(w.is_finite() && beta.is_finite()) {
        return Err(Error::NonFinite);
    }
    if beta.re <= -1.0 {
        return Err(Error::DivergentAtZero);
    }
    if on_unit_segment(w) {
        return Err(Error::SingularPath);
    }
    power_weighted(beta + 1.0, |t| (t - w).inv(), &[w.re], QuadConfig::default())
}

/// Both sides of an identity check and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

fn lemma_pre(inst: &ProblemInstance) -> Result<Complex64> {
    if inst.beta.re <= 0.0 {
        return Err(Error::DivergentAtZero);
    }
    if inst.alpha == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroInput);
    }
    Ok(inst.alpha * inst.theta.direction().conj())
}

/// `∫₀¹ t^β/(t−w) dt = 1/β − core_integral(1/w, β)` with `w = αe^{−iθ}`.
///
/// Residual is relative to `max(|rhs|, 1)`.
pub fn lemma_core_relation(inst: &ProblemInstance) -> Result<IdentityCheck> {
    let w = lemma_pre(inst)?;
    let lhs = ray_integral(w, inst.beta)?.require_converged()?.value;
    let core = core_integral(w.inv(), inst.beta)?.require_converged()?.value;
    let rhs = inst.beta.inv() - core;
    Ok(IdentityCheck { lhs, rhs, residual: (lhs - rhs).norm() / rhs.norm().max(1.0) })
}

/// Circle integral versus residue plus cut contribution:
/// `2πi·α^β·[|α|<1] + jump(β,θ)·∫₀¹ t^β/(t − αe^{−iθ}) dt`.
///
/// Residual is the strict relative gap `|lhs−rhs|/max(|lhs|,|rhs|)`.
pub fn lemma_relation(inst: &ProblemInstance) -> Result<IdentityCheck> {
    let w = lemma_pre(inst)?;
    if inst.alpha_on_cut() {
        return Err(Error::AlphaOnCut);
    }
    let residue = match inst.regime() {
        Regime::Inside => Complex64::new(0.0, std::f64::consts::TAU) * branch_pow(inst.alpha, inst.beta, inst.theta)?,
        Regime::Outside => Complex64::new(0.0, 0.0),
    };
    let cut = cut_jump(inst.beta, inst.theta) * ray_integral(w, inst.beta)?.require_converged()?.value;
    let lhs = circle_integral(inst)?.require_converged()?.value;
    let rhs = residue + cut;
    Ok(IdentityCheck { lhs, rhs, residual: relative_gap(lhs, rhs) })
}
