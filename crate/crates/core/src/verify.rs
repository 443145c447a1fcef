//! Built-in identity and cross-method checks behind `bci verify`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::branch::{integer_pow, BranchAngle, ProblemInstance, Regime, DEFAULT_EXCLUSION_BAND};
use crate::closed_form::{
    check_reconciliation, eval_rational_g, eval_rational_g_on_root, roots_of_unity_delta, roots_of_unity_sum,
    RationalBeta,
};
use crate::error::Result;
use crate::hyp2f1::hyp2f1_one_b;
use crate::numeric::relative_gap;
use crate::ode::{ode_convergence, singular_points, Location, OdeCoefficients, SingularityClass, DEFAULT_STEP};
use crate::quadrature::{circle_integral, core_integral, lemma_relation};
use crate::report::{default_methods, evaluate, MethodChoice, Num, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    Residues,
    Agreement,
    Lemma,
    Reconciliation,
    Rational,
    Delta,
    Ode,
    Singular,
    Euler,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        CheckKind::Residues,
        CheckKind::Agreement,
        CheckKind::Lemma,
        CheckKind::Reconciliation,
        CheckKind::Rational,
        CheckKind::Delta,
        CheckKind::Ode,
        CheckKind::Singular,
        CheckKind::Euler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Residues => "residues",
            CheckKind::Agreement => "agreement",
            CheckKind::Lemma => "lemma",
            CheckKind::Reconciliation => "reconciliation",
            CheckKind::Rational => "rational",
            CheckKind::Delta => "delta",
            CheckKind::Ode => "ode",
            CheckKind::Singular => "singular",
            CheckKind::Euler => "euler",
        }
    }

    fn salt(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        CheckKind::ALL.into_iter().find(|k| k.name() == s.trim()).ok_or_else(|| {
            let names: Vec<&str> = CheckKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown check '{s}' (one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Cross-method agreement tolerance.
    pub tol: f64,
    pub exclusion_band: f64,
    /// Empty means every check.
    pub checks: Vec<CheckKind>,
    /// Largest `n` for the root-of-unity filter.
    pub nmax: u32,
    /// Exponents for the ODE check; empty means the built-in set.
    pub ode_betas: Vec<Complex64>,
    /// Random instances in the agreement check.
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            tol: crate::branch::DEFAULT_TOL,
            exclusion_band: DEFAULT_EXCLUSION_BAND,
            checks: Vec::new(),
            nmax: 64,
            ode_betas: Vec::new(),
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest metric seen (the check's residual or error measure).
    pub worst: Num,
    pub threshold: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub tol: Num,
    pub checks: Vec<CheckReport>,
    pub verdict: &'static str,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Case {
    metric: f64,
    ok: bool,
    label: String,
}

impl Case {
    fn measured(metric: f64, threshold: f64, label: impl FnOnce() -> String) -> Self {
        let ok = metric < threshold;
        Self { metric, ok, label: if ok { String::new() } else { label() } }
    }

    fn from_result(r: Result<f64>, threshold: f64, label: impl Fn() -> String) -> Self {
        match r {
            Ok(m) => Self::measured(m, threshold, || format!("{}: {m:.3e}", label())),
            Err(e) => Self { metric: f64::NAN, ok: false, label: format!("{}: {e}", label()) },
        }
    }
}

fn summarise(kind: CheckKind, threshold: f64, cases: Vec<Case>) -> CheckReport {
    let worst = cases.iter().map(|c| c.metric).filter(|m| m.is_finite()).fold(0.0, f64::max);
    let failures = cases.iter().filter(|c| !c.ok).count();
    CheckReport {
        name: kind.name(),
        passed: failures == 0,
        cases: cases.len(),
        failures,
        worst: Num(worst),
        threshold: Num(threshold),
        first_failure: cases.iter().find(|c| !c.ok).map(|c| c.label.clone()),
    }
}

fn instance(alpha: Complex64, beta: Complex64, theta: f64, opts: &VerifyOptions) -> Result<ProblemInstance> {
    ProblemInstance::with_band(alpha, beta, BranchAngle::new(theta)?, opts.tol, opts.exclusion_band)
}

fn rng_for(kind: CheckKind, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ kind.salt().rotate_left(40))
}

fn random_alpha(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = if rng.gen_bool(0.5) { rng.gen_range(0.1..0.9) } else { rng.gen_range(1.1..5.0) };
    Complex64::from_polar(r, rng.gen_range(0.0..TAU))
}

const RATIONALS: [(i64, i64); 9] = [(1, 2), (-1, 2), (1, 3), (-1, 3), (2, 3), (3, 4), (-3, 4), (5, 2), (-2, 3)];

fn residues(opts: &VerifyOptions) -> CheckReport {
    let threshold = 1e-8;
    let mut grid = Vec::new();
    for b in -5..=5i64 {
        for r in [0.3, 0.7, 1.5, 4.0] {
            for arg in [0.5, 2.5, 4.5] {
                for theta in [PI / 3.0, PI, 5.0] {
                    grid.push((b, Complex64::from_polar(r, arg), theta));
                }
            }
        }
    }
    let cases = grid
        .par_iter()
        .map(|&(b, alpha, theta)| {
            let metric = instance(alpha, Complex64::new(b as f64, 0.0), theta, opts).and_then(|i| {
                let exact = match (i.regime(), b) {
                    (Regime::Inside, b) if b >= 0 => Complex64::new(0.0, TAU) * integer_pow(alpha, b)?,
                    (Regime::Outside, b) if b < 0 => Complex64::new(0.0, -TAU) * integer_pow(alpha, b)?,
                    _ => Complex64::new(0.0, 0.0),
                };
                let q = circle_integral(&i)?;
                Ok((q.value - exact).norm() / (1.0 + exact.norm()))
            });
            Case::from_result(metric, threshold, || format!("beta={b} alpha={alpha:.4} theta={theta:.4}"))
        })
        .collect();
    summarise(CheckKind::Residues, threshold, cases)
}

fn agreement(opts: &VerifyOptions) -> CheckReport {
    let mut rng = rng_for(CheckKind::Agreement, opts.seed);
    let mut draws = Vec::with_capacity(opts.samples);
    for k in 0..opts.samples {
        let alpha = random_alpha(&mut rng);
        let theta = rng.gen_range(0.1..TAU - 0.1);
        let rational = (k % 3 == 0).then(|| {
            let (m, n) = RATIONALS[rng.gen_range(0..RATIONALS.len())];
            RationalBeta::new(m, n).expect("table entries are valid")
        });
        let beta = match rational {
            Some(r) => r.as_complex(),
            None => loop {
                let b = Complex64::from_polar(3.0 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
                if (b.re - b.re.round()).abs() > 0.05 || b.im.abs() > 0.05 {
                    break b;
                }
            },
        };
        draws.push((alpha, beta, theta, rational));
    }
    let cases = draws
        .par_iter()
        .map(|&(alpha, beta, theta, rational)| {
            let label = || format!("alpha={alpha:.4} beta={beta:.4} theta={theta:.4}");
            match instance(alpha, beta, theta, opts) {
                Ok(i) => {
                    let mut methods = default_methods(&i);
                    if let Some(r) = rational {
                        methods.push(MethodChoice::Rational(r));
                    }
                    let report = evaluate(&i, &methods);
                    let gap = report.pairwise_max_relative_disagreement;
                    let ok = report.verdict == Verdict::Agree;
                    let label =
                        if ok { String::new() } else { format!("{}: {} ({gap:.3e})", label(), report.verdict.name()) };
                    Case { metric: gap, ok, label }
                }
                Err(e) => Case { metric: f64::NAN, ok: false, label: format!("{}: {e}", label()) },
            }
        })
        .collect();
    summarise(CheckKind::Agreement, opts.tol, cases)
}

fn lemma(opts: &VerifyOptions) -> CheckReport {
    let threshold = 1e-6;
    let mut rng = rng_for(CheckKind::Lemma, opts.seed);
    let mut draws = Vec::new();
    while draws.len() < 50 {
        let alpha = random_alpha(&mut rng);
        let beta = Complex64::new(rng.gen_range(0.2..3.0), rng.gen_range(-1.0..1.0));
        let theta = rng.gen_range(0.1..TAU - 0.1);
        if let Ok(i) = instance(alpha, beta, theta, opts) {
            if !i.alpha_on_cut() {
                draws.push(i);
            }
        }
    }
    let cases = draws
        .par_iter()
        .map(|i| {
            Case::from_result(lemma_relation(i).map(|r| r.residual), threshold, || {
                format!("alpha={:.4} beta={:.4} theta={:.4}", i.alpha, i.beta, i.theta.radians())
            })
        })
        .collect();
    summarise(CheckKind::Lemma, threshold, cases)
}

fn reconciliation(opts: &VerifyOptions) -> CheckReport {
    let threshold = 1e-6;
    let mut grid = Vec::new();
    for r in [0.2, 0.4, 0.6, 0.8] {
        for beta in
            [Complex64::new(0.5, 0.0), Complex64::new(1.5, 0.0), Complex64::new(0.5, 0.3), Complex64::new(2.2, 0.0)]
        {
            for theta in [FRAC_PI_2, PI, 5.0] {
                grid.push((Complex64::from_polar(r, 1.0), beta, theta));
            }
        }
    }
    let cases = grid
        .par_iter()
        .map(|&(alpha, beta, theta)| {
            let residual =
                instance(alpha, beta, theta, opts).and_then(|i| check_reconciliation(&i)).map(|c| c.residual);
            Case::from_result(residual, threshold, || format!("alpha={alpha:.4} beta={beta} theta={theta:.4}"))
        })
        .collect();
    summarise(CheckKind::Reconciliation, threshold, cases)
}

fn rational(opts: &VerifyOptions) -> CheckReport {
    let threshold = 1e-9;
    let rotation_threshold = 1e-12;
    let mut rng = rng_for(CheckKind::Rational, opts.seed);
    let mut draws = Vec::new();
    for n in 2..=6i64 {
        for m in -11..=11i64 {
            let Ok(beta) = RationalBeta::new(m, n) else { continue };
            if beta.n() != n {
                continue;
            }
            for _ in 0..20 {
                draws.push((beta, Complex64::from_polar(0.9 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU))));
            }
        }
    }
    let cases = draws
        .par_iter()
        .map(|&(beta, z)| {
            let label = || format!("{beta} z={z:.4}");
            let run = || -> Result<(f64, f64)> {
                let g = eval_rational_g(z, beta)?;
                let err = relative_gap(g, hyp2f1_one_b(beta.as_complex(), z, 1e-16)?.value);
                let mut rot: f64 = 0.0;
                for l in 1..beta.n() {
                    rot = rot.max(relative_gap(eval_rational_g_on_root(z, beta, l)?, g));
                }
                Ok((err, rot))
            };
            match run() {
                Ok((err, rot)) => {
                    let ok = err < threshold && rot <= rotation_threshold;
                    let label =
                        if ok { String::new() } else { format!("{}: error {err:.3e}, rotation {rot:.3e}", label()) };
                    Case { metric: err, ok, label }
                }
                Err(e) => Case { metric: f64::NAN, ok: false, label: format!("{}: {e}", label()) },
            }
        })
        .collect();
    summarise(CheckKind::Rational, threshold, cases)
}

fn delta(opts: &VerifyOptions) -> CheckReport {
    let threshold = 1e-12;
    let cases = (1..=opts.nmax.max(1))
        .into_par_iter()
        .flat_map_iter(|n| {
            (-512..=512i64).map(move |d| {
                let exact = roots_of_unity_delta(n, d);
                let expected = if d % n as i64 == 0 { 1.0 } else { 0.0 };
                let dev = (roots_of_unity_sum(n, d) - Complex64::new(exact, 0.0)).norm();
                let ok = exact == expected && dev <= threshold;
                Case { metric: dev, ok, label: if ok { String::new() } else { format!("n={n} d={d}: {dev:.3e}") } }
            })
        })
        .collect();
    summarise(CheckKind::Delta, threshold, cases)
}

fn ode(opts: &VerifyOptions) -> CheckReport {
    let threshold = 1e-4;
    let betas = if opts.ode_betas.is_empty() {
        vec![Complex64::new(0.5, 0.0), Complex64::new(1.3, 0.0), Complex64::new(0.5, 0.2)]
    } else {
        opts.ode_betas.clone()
    };
    let mut grid = Vec::new();
    for &beta in &betas {
        for r in [0.3, 0.5, 0.7, 1.5, 2.5, 4.0] {
            for arg in [0.7, 2.6, 4.4] {
                grid.push((Complex64::from_polar(r, arg), beta));
            }
        }
    }
    let cases = grid
        .par_iter()
        .map(|&(alpha, beta)| {
            let label = || format!("alpha={alpha:.4} beta={beta}");
            match instance(alpha, beta, 2.0, opts).and_then(|i| ode_convergence(&i, DEFAULT_STEP)) {
                Ok(conv) => {
                    let res = conv.coarse.relative_residual;
                    let ok = res < threshold && (res <= 1e-6 || conv.factor >= 8.0);
                    let label =
                        if ok { String::new() } else { format!("{}: {res:.3e}, factor {:.2}", label(), conv.factor) };
                    Case { metric: res, ok, label }
                }
                Err(e) => Case { metric: f64::NAN, ok: false, label: format!("{}: {e}", label()) },
            }
        })
        .collect();
    summarise(CheckKind::Ode, threshold, cases)
}

fn singular() -> CheckReport {
    let mut cases = Vec::new();
    for theta in [1.0, PI, 5.0] {
        let th = BranchAngle::new(theta).expect("grid angles are valid");
        for regime in [Regime::Outside, Regime::Inside] {
            let pts = singular_points(&OdeCoefficients::for_regime(regime, Complex64::new(0.5, 0.2), th));
            let e = th.direction();
            let at = |target: Complex64| {
                pts.iter().any(|p| matches!(p.location, Location::Finite(z) if (z - target).norm() < 1e-10))
            };
            let ok = pts.len() == 3
                && at(Complex64::new(0.0, 0.0))
                && at(e)
                && pts.iter().any(|p| p.location == Location::Infinity)
                && pts.iter().all(|p| p.class == SingularityClass::Regular);
            let label = if ok { String::new() } else { format!("theta={theta:.4} {}: {pts:?}", regime.name()) };
            cases.push(Case { metric: if ok { 0.0 } else { 1.0 }, ok, label });
        }
    }
    summarise(CheckKind::Singular, 0.5, cases)
}

fn euler(opts: &VerifyOptions) -> CheckReport {
    let threshold = 1e-8;
    let mut rng = rng_for(CheckKind::Euler, opts.seed);
    let draws: Vec<(Complex64, Complex64)> = (0..30)
        .map(|_| {
            let b = Complex64::new(rng.gen_range(0.2..3.0), rng.gen_range(-1.0..1.0));
            let w = Complex64::from_polar(0.9 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
            (b, w)
        })
        .collect();
    let cases = draws
        .par_iter()
        .map(|&(b, w)| {
            let err = (|| -> Result<f64> {
                let series = hyp2f1_one_b(b, w, 1e-16)?.value;
                let q = core_integral(w, b)?.require_converged()?;
                Ok(relative_gap(b * q.value, series))
            })();
            Case::from_result(err, threshold, || format!("b={b:.4} w={w:.4}"))
        })
        .collect();
    summarise(CheckKind::Euler, threshold, cases)
}

/// Runs the selected checks in a fixed order.
pub fn run_suite(opts: &VerifyOptions) -> SuiteReport {
    let mut kinds = if opts.checks.is_empty() { CheckKind::ALL.to_vec() } else { opts.checks.clone() };
    kinds.sort();
    kinds.dedup();
    let checks: Vec<CheckReport> = kinds
        .into_iter()
        .map(|k| match k {
            CheckKind::Residues => residues(opts),
            CheckKind::Agreement => agreement(opts),
            CheckKind::Lemma => lemma(opts),
            CheckKind::Reconciliation => reconciliation(opts),
            CheckKind::Rational => rational(opts),
            CheckKind::Delta => delta(opts),
            CheckKind::Ode => ode(opts),
            CheckKind::Singular => singular(),
            CheckKind::Euler => euler(opts),
        })
        .collect();
    let verdict = if checks.iter().all(|c| c.passed) { Verdict::Agree } else { Verdict::Disagree };
    SuiteReport { seed: opts.seed, tol: Num(opts.tol), checks, verdict: verdict.name() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_check_names() {
        assert_eq!("ode".parse::<CheckKind>().unwrap(), CheckKind::Ode);
        assert!("nope".parse::<CheckKind>().is_err());
    }

    #[test]
    fn quick_checks_pass() {
        let opts = VerifyOptions {
            checks: vec![CheckKind::Delta, CheckKind::Singular, CheckKind::Euler],
            nmax: 8,
            ..Default::default()
        };
        let r = run_suite(&opts);
        assert_eq!(r.checks.len(), 3);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.verdict, "Agree");
    }

    #[test]
    fn tiny_tolerance_fails_agreement() {
        let opts = VerifyOptions { checks: vec![CheckKind::Agreement], samples: 6, tol: 1e-30, ..Default::default() };
        let r = run_suite(&opts);
        assert!(!r.passed());
        assert_eq!(r.verdict, "Disagree");
    }
}
