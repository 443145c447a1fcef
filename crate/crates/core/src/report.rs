//! Running several methods on one instance and rendering the outcome.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::branch::{ProblemInstance, Regime};
use crate::closed_form::{
    eval_power_series, eval_rational, eval_theorem, Method, MethodResult, RationalBeta, DEFAULT_SERIES_TERMS,
};
use crate::error::{Error, Result};
use crate::numeric::unit_relative_gap;
use crate::quadrature::circle_integral;

/// A method as requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Theorem,
    Series,
    Quadrature,
    Rational(RationalBeta),
}

impl MethodChoice {
    pub fn method(self) -> Method {
        match self {
            MethodChoice::Theorem => Method::TheoremHypergeometric,
            MethodChoice::Series => Method::SeriesDirect,
            MethodChoice::Quadrature => Method::Quadrature,
            MethodChoice::Rational(_) => Method::RationalLogSum,
        }
    }

    pub fn run(self, inst: &ProblemInstance) -> Result<MethodResult> {
        match self {
            MethodChoice::Theorem => eval_theorem(inst),
            MethodChoice::Series => eval_power_series(inst, DEFAULT_SERIES_TERMS),
            MethodChoice::Rational(b) => eval_rational(inst, b),
            MethodChoice::Quadrature => {
                let q = circle_integral(inst)?.require_converged()?;
                Ok(MethodResult::new(Method::Quadrature, q.value, q.abs_error_estimate, inst)
                    .note("subdivisions", q.subdivisions))
            }
        }
    }
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodChoice::Rational(b) => write!(f, "rational:{b}"),
            other => f.write_str(other.method().name()),
        }
    }
}

impl FromStr for MethodChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "theorem" => Ok(MethodChoice::Theorem),
            "series" => Ok(MethodChoice::Series),
            "quadrature" => Ok(MethodChoice::Quadrature),
            other => match other.strip_prefix("rational:") {
                Some(frac) => frac
                    .parse::<RationalBeta>()
                    .map(MethodChoice::Rational)
                    .map_err(|e| format!("bad rational exponent '{frac}': {e}")),
                None => Err(format!("unknown method '{other}' (theorem, series, quadrature, rational:m/n)")),
            },
        }
    }
}

/// Methods that apply to the instance when none are requested.
pub fn default_methods(inst: &ProblemInstance) -> Vec<MethodChoice> {
    let mut m = vec![MethodChoice::Theorem, MethodChoice::Quadrature];
    if inst.regime() == Regime::Inside {
        m.push(MethodChoice::Series);
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Agree,
    Disagree,
    Partial,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Agree => "Agree",
            Verdict::Disagree => "Disagree",
            Verdict::Partial => "Partial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub choice: MethodChoice,
    pub result: Result<MethodResult>,
    pub micros: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub instance: ProblemInstance,
    pub outcomes: Vec<MethodOutcome>,
    /// Largest `|a−b|/max(|a|,|b|,1)` over successful method pairs.
    pub pairwise_max_relative_disagreement: f64,
    pub verdict: Verdict,
}

impl EvaluationReport {
    /// True when no method produced a value.
    pub fn all_failed(&self) -> bool {
        self.outcomes.iter().all(|o| o.result.is_err())
    }

    pub fn values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.outcomes.iter().filter_map(|o| o.result.as_ref().ok().map(|r| r.value))
    }
}

/// Runs each method, timing it, and compares all successful pairs.
pub fn evaluate(inst: &ProblemInstance, methods: &[MethodChoice]) -> EvaluationReport {
    let outcomes: Vec<MethodOutcome> = methods
        .iter()
        .map(|&choice| {
            let start = Instant::now();
            let result = choice.run(inst);
            MethodOutcome { choice, result, micros: start.elapsed().as_micros() as u64 }
        })
        .collect();
    let values: Vec<Complex64> = outcomes.iter().filter_map(|o| o.result.as_ref().ok().map(|r| r.value)).collect();
    let mut worst: f64 = 0.0;
    for (k, a) in values.iter().enumerate() {
        for b in &values[k + 1..] {
            worst = worst.max(unit_relative_gap(*a, *b));
        }
    }
    let any_error = outcomes.iter().any(|o| o.result.is_err());
    // NaN counts as disagreement
    let within = worst < inst.tol;
    let verdict = if !within {
        Verdict::Disagree
    } else if any_error {
        Verdict::Partial
    } else {
        Verdict::Agree
    };
    EvaluationReport { instance: *inst, outcomes, pairwise_max_relative_disagreement: worst, verdict }
}

/// Fixed float formatting: 17 significant digits, `null` when non-finite.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// A float serialised through [`format_float`].
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn pair(z: Complex64) -> [Num; 2] {
    [Num(z.re), Num(z.im)]
}

#[derive(Debug, Serialize)]
pub struct InstanceJson {
    pub alpha: [Num; 2],
    pub beta: [Num; 2],
    pub theta: Num,
}

impl InstanceJson {
    pub fn new(alpha: Complex64, beta: Complex64, theta: f64) -> Self {
        Self { alpha: pair(alpha), beta: pair(beta), theta: Num(theta) }
    }

    pub fn of(inst: &ProblemInstance) -> Self {
        Self::new(inst.alpha, inst.beta, inst.theta.radians())
    }
}

#[derive(Debug, Serialize)]
pub struct ResultJson {
    pub method: String,
    pub value: Option<[Num; 2]>,
    pub error_estimate: Option<Num>,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_us: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub instance: InstanceJson,
    pub results: Vec<ResultJson>,
    pub disagreement: Num,
    pub verdict: &'static str,
}

/// Optional, non-deterministic or verbose parts of the output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderOptions {
    pub timing: bool,
    pub diagnostics: bool,
}

pub fn status_of(r: &Result<MethodResult>) -> &'static str {
    match r {
        Ok(_) => "ok",
        Err(e) => e.kind(),
    }
}

impl ReportJson {
    pub fn new(report: &EvaluationReport, opts: RenderOptions) -> Self {
        let results = report
            .outcomes
            .iter()
            .map(|o| ResultJson {
                method: o.choice.to_string(),
                value: o.result.as_ref().ok().map(|r| pair(r.value)),
                error_estimate: o.result.as_ref().ok().map(|r| Num(r.error_estimate)),
                status: status_of(&o.result),
                message: o.result.as_ref().err().map(Error::to_string),
                diagnostics: if opts.diagnostics {
                    o.result.as_ref().ok().map(|r| r.diagnostics.clone())
                } else {
                    None
                },
                timing_us: opts.timing.then_some(o.micros),
            })
            .collect();
        Self {
            instance: InstanceJson::of(&report.instance),
            results,
            disagreement: Num(report.pairwise_max_relative_disagreement),
            verdict: report.verdict.name(),
        }
    }
}

pub const EVAL_CSV_HEADER: &str =
    "alpha_re,alpha_im,beta_re,beta_im,theta,method,value_re,value_im,error_estimate,status,disagreement,verdict";

/// One CSV line per method.
pub fn eval_csv_rows(report: &EvaluationReport) -> Vec<String> {
    let i = &report.instance;
    report
        .outcomes
        .iter()
        .map(|o| {
            let (v, e) = match &o.result {
                Ok(r) => (r.value, r.error_estimate),
                Err(_) => (Complex64::new(f64::NAN, f64::NAN), f64::NAN),
            };
            [
                format_float(i.alpha.re),
                format_float(i.alpha.im),
                format_float(i.beta.re),
                format_float(i.beta.im),
                format_float(i.theta.radians()),
                o.choice.to_string(),
                format_float(v.re),
                format_float(v.im),
                format_float(e),
                status_of(&o.result).to_string(),
                format_float(report.pairwise_max_relative_disagreement),
                report.verdict.name().to_string(),
            ]
            .join(",")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::BranchAngle;
    use std::f64::consts::PI;

    fn inst(alpha: Complex64, beta: Complex64, theta: f64, tol: f64) -> ProblemInstance {
        ProblemInstance::new(alpha, beta, BranchAngle::new(theta).unwrap(), tol).unwrap()
    }

    #[test]
    fn parse_method_choices() {
        assert_eq!("theorem".parse::<MethodChoice>().unwrap(), MethodChoice::Theorem);
        assert_eq!(
            "rational:2/4".parse::<MethodChoice>().unwrap(),
            MethodChoice::Rational(RationalBeta::new(1, 2).unwrap())
        );
        assert!("rational:4/2".parse::<MethodChoice>().is_err());
        assert!("simpson".parse::<MethodChoice>().is_err());
        assert_eq!(MethodChoice::Rational(RationalBeta::new(-1, 3).unwrap()).to_string(), "rational:-1/3");
    }

    #[test]
    fn residue_instance_agrees() {
        let i = inst(Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0), PI, 1e-8);
        let r = evaluate(&i, &default_methods(&i));
        assert_eq!(r.verdict, Verdict::Agree);
        for v in r.values() {
            assert!((v - Complex64::new(0.0, PI)).norm() < 1e-9);
        }
    }

    #[test]
    fn impossible_tolerance_disagrees() {
        let i = inst(Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0), PI, 1e-30);
        let r = evaluate(&i, &[MethodChoice::Theorem, MethodChoice::Quadrature]);
        assert_eq!(r.verdict, Verdict::Disagree);
    }

    #[test]
    fn failing_method_gives_partial() {
        let i = inst(Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0), PI, 1e-8);
        let r = evaluate(&i, &[MethodChoice::Theorem, MethodChoice::Quadrature, MethodChoice::Series]);
        assert_eq!(r.verdict, Verdict::Partial);
        assert_eq!(status_of(&r.outcomes[2].result), "NotApplicable");
    }

    #[test]
    fn json_is_deterministic_and_well_formed() {
        let i = inst(Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0), 1.0, 1e-8);
        let r = evaluate(&i, &[MethodChoice::Theorem]);
        let text = serde_json::to_string(&ReportJson::new(&r, RenderOptions::default())).unwrap();
        assert_eq!(
            text,
            r#"{"instance":{"alpha":[2.0000000000000000e0,0.0000000000000000e0],"beta":[0.0000000000000000e0,0.0000000000000000e0],"theta":1.0000000000000000e0},"results":[{"method":"theorem","value":[0.0000000000000000e0,0.0000000000000000e0],"error_estimate":0.0000000000000000e0,"status":"ok"}],"disagreement":0.0000000000000000e0,"verdict":"Agree"}"#
        );
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["verdict"], "Agree");
        assert_eq!(format_float(f64::NAN), "null");
    }
}
