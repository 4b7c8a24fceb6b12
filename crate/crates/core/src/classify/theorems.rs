//! The implication battery between conditions (1)_n, (2)_n, (3)_n and the
//! theorem-level consistency checks.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{check_cauchy_dobsch, check_property, ClassificationReport, Property, PropertyKind, SamplingPlan, Verdict};
use crate::error::{Error, Result};
use crate::expr::{evaluate, transform, FunctionSpec, Interval, TransformKind};
use crate::scalar::PrecisionCfg;
use crate::witness::{operator_witness_search, OperatorKind, SearchLimits, WitnessRecord, WitnessSearchReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryOptions {
    pub n: usize,
    pub alpha: f64,
    pub plan: SamplingPlan,
    pub precision: PrecisionCfg,
    /// Samples for the contraction search behind (2)_n.
    pub contraction_samples: usize,
}

impl BatteryOptions {
    pub fn new(n: usize, alpha: f64) -> Self {
        BatteryOptions {
            n,
            alpha,
            plan: SamplingPlan::default(),
            precision: PrecisionCfg::Machine,
            contraction_samples: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionOutcome {
    /// `(1)_k`, `(2)_k` or `(3)_k`.
    pub label: String,
    pub verdict: Verdict,
    pub statement: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_at_zero: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<WitnessSearchReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryReport {
    pub function: String,
    pub alpha: f64,
    pub n: usize,
    pub conditions: Vec<ConditionOutcome>,
    pub consistent_with: Vec<String>,
    /// Observed patterns that contradict the implication chain.
    pub flags: Vec<String>,
}

impl BatteryReport {
    pub fn verdict_of(&self, label: &str) -> Option<Verdict> {
        self.conditions.iter().find(|c| c.label == label).map(|c| c.verdict)
    }
}

fn on_closed_left(f: &FunctionSpec, alpha: f64) -> Result<FunctionSpec> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    Ok(f.clone().with_domain(Interval::closed_open(0.0, alpha)?))
}

fn condition_one(f: &FunctionSpec, k: usize, opts: &BatteryOptions, f0: f64) -> Result<ConditionOutcome> {
    let r = check_property(
        f,
        Property {
            kind: PropertyKind::Convex,
            n: k,
        },
        &opts.plan,
        opts.precision,
    )?;
    let pass = r.verdict.is_pass() && f0 <= 0.0;
    Ok(ConditionOutcome {
        label: format!("(1)_{k}"),
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        statement: format!("f is {k}-convex with f(0) <= 0"),
        f_at_zero: Some(f0),
        report: Some(r),
        search: None,
    })
}

/// Verdicts for `(1)_n`, `(1)_{n+1}`, `(1)_{[n/2]}`, `(2)_n` and `(3)_n` and
/// their consistency with `(1)_{n+1} => (2)_n <=> (3)_n => (1)_{[n/2]}`.
pub fn implication_battery(f: &FunctionSpec, opts: &BatteryOptions) -> Result<BatteryReport> {
    let n = opts.n;
    if n == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    let f = on_closed_left(f, opts.alpha)?;
    let f0 = evaluate(&f, 0.0, opts.precision)?;

    let mut conditions = vec![condition_one(&f, n, opts, f0)?, condition_one(&f, n + 1, opts, f0)?];
    if n / 2 >= 1 {
        conditions.push(condition_one(&f, n / 2, opts, f0)?);
    }

    let search = operator_witness_search(
        &f,
        &f.domain,
        n,
        OperatorKind::Contraction,
        opts.contraction_samples,
        opts.plan.seed,
        opts.precision,
        &SearchLimits {
            max_witnesses: opts.plan.max_witnesses,
            max_certify: opts.plan.max_certify,
            tol_rel: None,
        },
    )?;
    conditions.push(ConditionOutcome {
        label: format!("(2)_{n}"),
        verdict: if search.witnesses.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        statement: format!("f(c*ac) <= c*f(a)c for {n}x{n} contractions c"),
        f_at_zero: None,
        report: None,
        search: Some(search),
    });

    let g = transform(&f, TransformKind::DivideByT)?;
    let r3 = check_property(
        &g,
        Property {
            kind: PropertyKind::Monotone,
            n,
        },
        &opts.plan,
        opts.precision,
    )?;
    conditions.push(ConditionOutcome {
        label: format!("(3)_{n}"),
        verdict: r3.verdict,
        statement: format!("f(t)/t is {n}-monotone on (0, alpha)"),
        f_at_zero: None,
        report: Some(r3),
        search: None,
    });

    let mut report = BatteryReport {
        function: f.describe(),
        alpha: opts.alpha,
        n,
        conditions,
        consistent_with: Vec::new(),
        flags: Vec::new(),
    };
    assess(&mut report);
    Ok(report)
}

fn assess(r: &mut BatteryReport) {
    let n = r.n;
    let v = |label: String| r.verdict_of(&label);
    let one_n = v(format!("(1)_{n}"));
    let one_up = v(format!("(1)_{}", n + 1));
    let one_half = if n / 2 >= 1 { v(format!("(1)_{}", n / 2)) } else { None };
    let two = v(format!("(2)_{n}"));
    let three = v(format!("(3)_{n}"));
    let pass = Some(Verdict::Pass);
    let fail = Some(Verdict::Fail);
    let mut flags = Vec::new();
    let mut notes = Vec::new();
    let inspect = "contradicts the implication - inspect witnesses";

    if one_up == pass && three == fail {
        flags.push(format!("(1)_{} PASS but (3)_{n} FAIL: {inspect}", n + 1));
    }
    if one_up == pass && two == fail {
        flags.push(format!("(1)_{} PASS but (2)_{n} FAIL: {inspect}", n + 1));
    }
    if three == pass && one_half == fail {
        flags.push(format!("(3)_{n} PASS but (1)_{} FAIL: {inspect}", n / 2));
    }
    if two.is_some() && three.is_some() && two != three {
        flags.push(format!("(2)_{n} and (3)_{n} disagree: {inspect}"));
    }
    if three == pass && one_n == fail {
        notes.push(format!("(3)_{n} does not imply (1)_{n}"));
    }
    if one_n == pass && three == fail {
        notes.push(format!("(1)_{n} does not imply (3)_{n}"));
    }
    if flags.is_empty() {
        notes.push(format!(
            "(1)_{} => (2)_{n} <=> (3)_{n} => (1)_{}",
            n + 1,
            (n / 2).max(1)
        ));
    }
    r.flags = flags;
    r.consistent_with = notes;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    /// `f ∈ Q_n`, `(f - f(0))/t` (n-1)-monotone  =>  `f` (n-1)-convex.
    #[serde(rename = "thmQn")]
    ThmQn,
    /// `f'` n-monotone  =>  `(f - f(0))/t` n-monotone.
    #[serde(rename = "thm3")]
    Thm3,
    /// `f ∈ Q_n`, `f'` (n-1)-monotone  =>  `f` (n-1)-convex.
    #[serde(rename = "corollary")]
    Corollary,
    /// `f` n-convex, `f(0) <= 0`  =>  `(g^(i+j-1)/(i+j)!)` PSD for `g = f/t`.
    #[serde(rename = "prop51")]
    CauchyDobsch,
    /// `f(0) <= 0`, `g` n-monotone and n-convex  =>  `f` n-convex.
    #[serde(rename = "summarize-i")]
    SummarizeI,
}

impl TheoremId {
    pub const ALL: [TheoremId; 5] = [
        TheoremId::ThmQn,
        TheoremId::Thm3,
        TheoremId::Corollary,
        TheoremId::CauchyDobsch,
        TheoremId::SummarizeI,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::ThmQn => "thmQn",
            TheoremId::Thm3 => "thm3",
            TheoremId::Corollary => "corollary",
            TheoremId::CauchyDobsch => "prop51",
            TheoremId::SummarizeI => "summarize-i",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown theorem id '{s}'")))
    }
}

/// Functions on `[0, alpha)` used by the theorem checks.
pub const FIXTURE_CORPUS: [(&str, f64); 10] = [
    ("t^2", 1.0),
    ("t^2+t", 1.0),
    ("-log(1+t)", 1.0),
    ("t + t^2/2 + t^3/3 + t^4/4 + t^5/5", 0.17),
    ("exp(t)-1", 1.0),
    ("t^3", 2.0),
    ("(1+t)*log(1+t)", 1.0),
    ("t^1.5", 1.0),
    ("1-sqrt(1+t)", 1.0),
    ("-t/(1+t)", 1.0),
];

pub fn fixture_corpus() -> Result<Vec<FunctionSpec>> {
    FIXTURE_CORPUS
        .iter()
        .map(|&(text, alpha)| FunctionSpec::parse_on(text, Interval::closed_open(0.0, alpha)?))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimVerdict {
    pub statement: String,
    pub verdict: Verdict,
    pub margin: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceStatus {
    /// Some hypothesis failed.
    Vacuous,
    /// Hypotheses and conclusion passed.
    Confirmed,
    /// Hypotheses passed, conclusion failed.
    Discrepancy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceOutcome {
    pub function: String,
    pub interval: String,
    pub hypotheses: Vec<ClaimVerdict>,
    pub conclusion: ClaimVerdict,
    pub status: InstanceStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub id: TheoremId,
    pub n: usize,
    pub instances: Vec<InstanceOutcome>,
    pub discrepancies: usize,
}

struct Checker<'a> {
    plan: &'a SamplingPlan,
    precision: PrecisionCfg,
}

impl Checker<'_> {
    fn property(&self, f: &FunctionSpec, kind: PropertyKind, n: usize, statement: String) -> Result<ClaimVerdict> {
        let r = check_property(f, Property { kind, n }, self.plan, self.precision)?;
        Ok(claim(statement, &r))
    }

    fn f0_nonpositive(&self, f: &FunctionSpec) -> Result<ClaimVerdict> {
        let v = evaluate(f, 0.0, self.precision)?;
        Ok(ClaimVerdict {
            statement: "f(0) <= 0".into(),
            verdict: if v <= 0.0 { Verdict::Pass } else { Verdict::Fail },
            margin: if v <= 0.0 { 0.0 } else { -v },
            witnesses: Vec::new(),
        })
    }
}

fn claim(statement: String, r: &ClassificationReport) -> ClaimVerdict {
    ClaimVerdict {
        statement,
        verdict: r.verdict,
        margin: r.margin,
        witnesses: r.witnesses.clone(),
    }
}

/// Checks "hypotheses PASS => conclusion PASS" for each instance; the order of
/// the theorem's statement is `n`.
pub fn theorem_check(
    id: TheoremId,
    instances: &[FunctionSpec],
    n: usize,
    plan: &SamplingPlan,
    precision: PrecisionCfg,
) -> Result<TheoremReport> {
    let needs_two = matches!(id, TheoremId::ThmQn | TheoremId::Corollary);
    if n == 0 || (needs_two && n < 2) {
        return Err(Error::InvalidInput(format!("order {n} is too small for {id}")));
    }
    let ck = Checker { plan, precision };
    let mut outcomes = Vec::new();
    for f in instances {
        if f.domain.lo != 0.0 || f.domain.lo_open {
            return Err(Error::InvalidInput(format!(
                "theorem instances must live on [0, alpha), got {}",
                f.domain
            )));
        }
        let (mut hyps, conclusion) = match id {
            TheoremId::ThmQn => {
                let q = ck.property(f, PropertyKind::Qn, n, format!("f in Q_{n}"))?;
                let h = transform(f, TransformKind::ShiftedDivide)?;
                let m = ck.property(
                    &h,
                    PropertyKind::Monotone,
                    n - 1,
                    format!("(f - f(0))/t is {}-monotone", n - 1),
                )?;
                let c = ck.property(f, PropertyKind::Convex, n - 1, format!("f is {}-convex", n - 1))?;
                (vec![q, m], c)
            }
            TheoremId::Thm3 => {
                let d = transform(f, TransformKind::DerivShift(1))?;
                let m = ck.property(&d, PropertyKind::Monotone, n, format!("f' is {n}-monotone"))?;
                let h = transform(f, TransformKind::ShiftedDivide)?;
                let c = ck.property(&h, PropertyKind::Monotone, n, format!("(f - f(0))/t is {n}-monotone"))?;
                (vec![m], c)
            }
            TheoremId::Corollary => {
                let q = ck.property(f, PropertyKind::Qn, n, format!("f in Q_{n}"))?;
                let d = transform(f, TransformKind::DerivShift(1))?;
                let m = ck.property(&d, PropertyKind::Monotone, n - 1, format!("f' is {}-monotone", n - 1))?;
                let c = ck.property(f, PropertyKind::Convex, n - 1, format!("f is {}-convex", n - 1))?;
                (vec![q, m], c)
            }
            TheoremId::CauchyDobsch => {
                let cv = ck.property(f, PropertyKind::Convex, n, format!("f is {n}-convex"))?;
                let z = ck.f0_nonpositive(f)?;
                let g = transform(f, TransformKind::DivideByT)?;
                let r = check_cauchy_dobsch(&g, n, plan, precision)?;
                (
                    vec![cv, z],
                    claim("(g^(i+j-1)/(i+j)!) is positive semidefinite".into(), &r),
                )
            }
            TheoremId::SummarizeI => {
                let z = ck.f0_nonpositive(f)?;
                let g = transform(f, TransformKind::DivideByT)?;
                let m = ck.property(&g, PropertyKind::Monotone, n, format!("g is {n}-monotone"))?;
                let c = ck.property(&g, PropertyKind::Convex, n, format!("g is {n}-convex"))?;
                let k = ck.property(f, PropertyKind::Convex, n, format!("f is {n}-convex"))?;
                (vec![z, m, c], k)
            }
        };
        let status = if hyps.iter().any(|h| !h.verdict.is_pass()) {
            InstanceStatus::Vacuous
        } else if conclusion.verdict.is_pass() {
            InstanceStatus::Confirmed
        } else {
            InstanceStatus::Discrepancy
        };
        for h in &mut hyps {
            h.witnesses.truncate(1);
        }
        outcomes.push(InstanceOutcome {
            function: f.describe(),
            interval: f.domain.to_string(),
            hypotheses: hyps,
            conclusion,
            status,
        });
    }
    let discrepancies = outcomes
        .iter()
        .filter(|o| o.status == InstanceStatus::Discrepancy)
        .count();
    Ok(TheoremReport {
        id,
        n,
        instances: outcomes,
        discrepancies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on(text: &str, alpha: f64) -> FunctionSpec {
        FunctionSpec::parse_on(text, Interval::closed_open(0.0, alpha).unwrap()).unwrap()
    }

    #[test]
    fn battery_square() {
        let r = implication_battery(&on("t^2", 1.0), &BatteryOptions::new(2, 1.0)).unwrap();
        for c in &r.conditions {
            assert_eq!(c.verdict, Verdict::Pass, "{}", c.label);
        }
        assert!(r.flags.is_empty());
    }

    #[test]
    fn battery_log() {
        let mut o = BatteryOptions::new(2, 1.0);
        o.contraction_samples = 300;
        let r = implication_battery(&on("-log(1+t)", 1.0), &o).unwrap();
        assert_eq!(r.verdict_of("(1)_2"), Some(Verdict::Pass));
        assert_eq!(r.verdict_of("(3)_2"), Some(Verdict::Pass));
    }

    #[test]
    fn thm3_affine_quotient() {
        let r = theorem_check(
            TheoremId::Thm3,
            &[on("t^2+t", 1.0)],
            2,
            &SamplingPlan::default(),
            PrecisionCfg::Machine,
        )
        .unwrap();
        assert_eq!(r.instances[0].status, InstanceStatus::Confirmed);
    }

    #[test]
    fn summarize_vacuous_case() {
        let r = theorem_check(
            TheoremId::SummarizeI,
            &[on("-1/(1+t)+1", 1.0)],
            2,
            &SamplingPlan::default(),
            PrecisionCfg::Machine,
        );
        // t/(1+t) has f(0) = 0 and g = 1/(1+t) is not 2-monotone
        let r = r.unwrap();
        assert_eq!(r.instances[0].status, InstanceStatus::Vacuous);
    }

    #[test]
    fn cauchy_dobsch_of_minus_log() {
        let r = theorem_check(
            TheoremId::CauchyDobsch,
            &[on("-log(1+t)", 1.0)],
            2,
            &SamplingPlan::default(),
            PrecisionCfg::Machine,
        )
        .unwrap();
        assert_eq!(r.instances[0].conclusion.verdict, Verdict::Pass);
        assert_eq!(r.instances[0].status, InstanceStatus::Confirmed);
    }

    #[test]
    fn ids_round_trip() {
        for id in TheoremId::ALL {
            assert_eq!(id.name().parse::<TheoremId>().unwrap(), id);
        }
        assert!("thm9".parse::<TheoremId>().is_err());
    }
}
