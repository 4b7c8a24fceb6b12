//! Sampled decision procedures for `P_n`, `K_n` and `Q_n` membership.
//!
//! A PASS means no counterexample was found under the sampling plan. A FAIL
//! is always backed by witnesses re-confirmed at big precision.

pub mod sampling;
pub mod theorems;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::divided::second_divdiff_fn;
use crate::error::{Error, Result};
use crate::expr::FunctionSpec;
use crate::jets::SmoothFn;
use crate::matrices::{
    derivative_matrix_in, hadamard, kraus_in, loewner_in, special_in, DerivativeKind, MatrixKind, MatrixMeta,
    SpecialKind, SymmetricMatrix,
};
use crate::scalar::{PrecisionCfg, Scalar};
use crate::spectra::{cpsd_verdict, psd_verdict, PsdVerdict};
use crate::witness::{certification_precision, sort_witnesses, WitnessKind, WitnessPayload, WitnessRecord};

pub use sampling::SamplingPlan;
pub use theorems::{
    implication_battery, theorem_check, BatteryOptions, BatteryReport, InstanceStatus, TheoremId, TheoremReport,
};

/// Number of base points `z` used by the `[x, z, z]_f` route for `Q_n`, `n > 2`.
pub const QN_Z_POINTS: usize = 17;
/// Grid size per `z` on that route.
pub const QN_Z_GRID: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Monotone,
    Convex,
    Qn,
}

impl FromStr for PropertyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monotone" => Ok(PropertyKind::Monotone),
            "convex" => Ok(PropertyKind::Convex),
            "qn" => Ok(PropertyKind::Qn),
            _ => Err(Error::InvalidInput(format!("unknown property '{s}'"))),
        }
    }
}

impl PropertyKind {
    pub fn name(self) -> &'static str {
        match self {
            PropertyKind::Monotone => "monotone",
            PropertyKind::Convex => "convex",
            PropertyKind::Qn => "qn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Property {
    pub kind: PropertyKind,
    pub n: usize,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind.name(), self.n)
    }
}

impl Serialize for Property {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_pass() { "PASS" } else { "FAIL" })
    }
}

/// The positivity test applied to each probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Loewner,
    Kraus,
    Dobsch,
    Hansen,
    ConditionalLoewner,
    ThirdDerivative,
    /// `cauchy ∘ dobsch`, i.e. `(g^(i+j-1)/(i+j)!)`.
    CauchyDobsch,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Loewner => "loewner",
            Criterion::Kraus => "kraus",
            Criterion::Dobsch => "dobsch",
            Criterion::Hansen => "hansen",
            Criterion::ConditionalLoewner => "conditional_loewner",
            Criterion::ThirdDerivative => "third_derivative",
            Criterion::CauchyDobsch => "cauchy_dobsch",
        }
    }
}

/// Whether PSD of a criterion is equivalent to the property or only necessary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Equivalent,
    Necessary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub criterion: Criterion,
    pub role: Role,
    /// Base point when the criterion was applied to `x -> [x, z, z]_f`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    pub probes: usize,
    pub screened_failures: usize,
    pub certification_attempts: usize,
    pub certified_failures: usize,
    /// Smallest eigenvalue seen while screening.
    pub min_screen_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCounts {
    pub grid_points: usize,
    pub node_sets: usize,
    pub z_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub function: String,
    pub interval: String,
    pub property: Property,
    pub verdict: Verdict,
    /// Most negative certified eigenvalue, 0 on PASS.
    pub margin: f64,
    pub witnesses: Vec<WitnessRecord>,
    pub samples: SampleCounts,
    pub seed: u64,
    pub tolerance: f64,
    pub precision: PrecisionCfg,
    pub certification_precision: PrecisionCfg,
    pub criteria: Vec<CriterionSummary>,
    pub note: String,
}

#[derive(Debug, Clone)]
enum ProbeData {
    Nodes { nodes: Vec<f64>, base: Option<f64> },
    Point(f64),
}

#[derive(Debug, Clone)]
struct Probe {
    index: u64,
    data: ProbeData,
}

fn probe_verdict<S: Scalar, F: SmoothFn>(
    f: &F,
    crit: Criterion,
    n: usize,
    probe: &Probe,
    ctx: S::Ctx,
    tol_rel: f64,
) -> Result<PsdVerdict> {
    match (&probe.data, crit) {
        (ProbeData::Nodes { nodes, .. }, Criterion::Loewner) => {
            psd_verdict(&loewner_in::<S, F>(f, nodes, ctx)?, tol_rel)
        }
        (ProbeData::Nodes { nodes, .. }, Criterion::ConditionalLoewner) => {
            cpsd_verdict(&loewner_in::<S, F>(f, nodes, ctx)?, tol_rel)
        }
        (ProbeData::Nodes { nodes, base }, Criterion::Kraus) => {
            let base = base.unwrap_or(nodes[0]);
            psd_verdict(&kraus_in::<S, F>(f, base, nodes, ctx)?, tol_rel)
        }
        (ProbeData::Point(t), Criterion::Dobsch) => psd_verdict(
            &derivative_matrix_in::<S, F>(f, *t, n, DerivativeKind::Dobsch, ctx)?,
            tol_rel,
        ),
        (ProbeData::Point(t), Criterion::Hansen) => psd_verdict(
            &derivative_matrix_in::<S, F>(f, *t, n, DerivativeKind::Hansen, ctx)?,
            tol_rel,
        ),
        (ProbeData::Point(t), Criterion::CauchyDobsch) => {
            let d = derivative_matrix_in::<S, F>(f, *t, n, DerivativeKind::Dobsch, ctx)?;
            psd_verdict(&hadamard(&special_in::<S>(SpecialKind::Cauchy, n, ctx)?, &d)?, tol_rel)
        }
        (ProbeData::Point(t), Criterion::ThirdDerivative) => {
            let c = f.taylor(&S::from_f64_in(*t, ctx), 3)?;
            let v = c[3].clone() * c[3].cst(6.0);
            let m = SymmetricMatrix::build(
                1,
                MatrixKind::Derived,
                MatrixMeta::Point { t: *t },
                |_, _| Ok(v.clone()),
            )?;
            psd_verdict(&m, tol_rel)
        }
        _ => unreachable!("criterion and probe shape are paired by construction"),
    }
}

fn probe_verdict_at<F: SmoothFn>(
    f: &F,
    crit: Criterion,
    n: usize,
    probe: &Probe,
    precision: PrecisionCfg,
    tol_rel: f64,
) -> Result<PsdVerdict> {
    crate::with_precision!(precision, S, ctx => probe_verdict::<S, F>(f, crit, n, probe, ctx, tol_rel))
}

/// Settings shared by every criterion of one classification run.
#[derive(Debug, Clone, Copy)]
struct RunCtx<'p> {
    plan: &'p SamplingPlan,
    precision: PrecisionCfg,
    cert: PrecisionCfg,
    tol_rel: f64,
}

/// Screens every probe, then re-evaluates the worst failures at certification
/// precision.
fn run_criterion<F: SmoothFn>(
    f: &F,
    crit: Criterion,
    role: Role,
    n: usize,
    probes: &[Probe],
    rc: RunCtx<'_>,
    z: Option<f64>,
) -> Result<(CriterionSummary, Vec<WitnessRecord>)> {
    let screened: Vec<PsdVerdict> = probes
        .par_iter()
        .map(|p| probe_verdict_at(f, crit, n, p, rc.precision, rc.tol_rel))
        .collect::<Result<_>>()?;
    let min_screen = screened.iter().map(|v| v.min_eigenvalue).fold(f64::INFINITY, f64::min);
    let mut failing: Vec<(usize, f64)> = screened
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.psd)
        .map(|(i, v)| (i, v.min_eigenvalue))
        .collect();
    failing.sort_by(|a, b| a.1.total_cmp(&b.1).then(probes[a.0].index.cmp(&probes[b.0].index)));

    let mut witnesses = Vec::new();
    let mut attempts = 0;
    let batch = rayon::current_num_threads().max(1);
    for chunk in failing.chunks(batch) {
        if witnesses.len() >= rc.plan.max_witnesses || attempts >= rc.plan.max_certify {
            break;
        }
        let take = chunk.len().min(rc.plan.max_certify - attempts);
        let certified: Vec<PsdVerdict> = chunk[..take]
            .par_iter()
            .map(|&(i, _)| probe_verdict_at(f, crit, n, &probes[i], rc.cert, rc.tol_rel))
            .collect::<Result<_>>()?;
        attempts += take;
        for (&(i, screen), v) in chunk[..take].iter().zip(certified) {
            if !v.psd && witnesses.len() < rc.plan.max_witnesses {
                witnesses.push(witness_record(
                    crit,
                    &probes[i],
                    z,
                    v.min_eigenvalue,
                    screen,
                    v.tolerance_used,
                ));
            }
        }
    }
    let summary = CriterionSummary {
        criterion: crit,
        role,
        z,
        probes: probes.len(),
        screened_failures: failing.len(),
        certification_attempts: attempts,
        certified_failures: witnesses.len(),
        min_screen_eigenvalue: min_screen,
    };
    Ok((summary, witnesses))
}

fn witness_record(crit: Criterion, probe: &Probe, z: Option<f64>, margin: f64, screen: f64, tol: f64) -> WitnessRecord {
    let (kind, payload) = match &probe.data {
        ProbeData::Nodes { nodes, base } => (
            WitnessKind::NodeSet,
            WitnessPayload::Nodes {
                nodes: nodes.clone(),
                base: if crit == Criterion::Kraus {
                    Some(base.unwrap_or(nodes[0]))
                } else {
                    None
                },
            },
        ),
        ProbeData::Point(t) => (WitnessKind::Point, WitnessPayload::Point { t: *t }),
    };
    WitnessRecord {
        kind,
        criterion: crit.name().into(),
        payload,
        z,
        margin,
        screen_margin: screen,
        tolerance: tol,
        seed_index: probe.index,
    }
}

fn node_probes(sets: Vec<Vec<f64>>) -> Vec<Probe> {
    sets.into_iter()
        .enumerate()
        .map(|(i, nodes)| Probe {
            index: i as u64,
            data: ProbeData::Nodes { nodes, base: None },
        })
        .collect()
}

fn point_probes(grid: &[f64]) -> Vec<Probe> {
    grid.iter()
        .enumerate()
        .map(|(i, &t)| Probe {
            index: i as u64,
            data: ProbeData::Point(t),
        })
        .collect()
}

/// Kraus probes: base at the smallest node, plus the same set with its smallest
/// node moved to the left end of the sampling region.
fn kraus_probes(sets: &[Vec<f64>], left: f64) -> Vec<Probe> {
    let total = sets.len() as u64;
    let mut out = Vec::with_capacity(2 * sets.len());
    for (i, nodes) in sets.iter().enumerate() {
        out.push(Probe {
            index: i as u64,
            data: ProbeData::Nodes {
                nodes: nodes.clone(),
                base: Some(nodes[0]),
            },
        });
    }
    for (i, nodes) in sets.iter().enumerate() {
        if nodes[0] > left {
            let mut moved = nodes.clone();
            moved[0] = left;
            out.push(Probe {
                index: total + i as u64,
                data: ProbeData::Nodes {
                    nodes: moved,
                    base: Some(left),
                },
            });
        }
    }
    out
}

/// Runs the sampled tests for `property` on the domain of `f`.
pub fn check_property(
    f: &FunctionSpec,
    property: Property,
    plan: &SamplingPlan,
    precision: PrecisionCfg,
) -> Result<ClassificationReport> {
    check_property_with_tol(f, property, plan, precision, precision.default_tol_rel())
}

pub fn check_property_with_tol(
    f: &FunctionSpec,
    property: Property,
    plan: &SamplingPlan,
    precision: PrecisionCfg,
    tol_rel: f64,
) -> Result<ClassificationReport> {
    plan.validate()?;
    let n = property.n;
    if n == 0 || n > 32 {
        return Err(Error::InvalidInput(format!("order {n} must lie in 1..=32")));
    }
    if property.kind == PropertyKind::Qn && n < 2 {
        return Err(Error::InvalidInput("Q_n needs n >= 2".into()));
    }
    let interval = f.domain;
    let rc = RunCtx {
        plan,
        precision,
        cert: certification_precision(precision),
        tol_rel,
    };
    let grid = plan.grid(&interval)?;
    let sets = plan.node_sets(&interval, n)?;
    let (left, _) = plan.region(&interval)?;

    let mut results = Vec::new();
    let mut z_points = 0;
    match property.kind {
        PropertyKind::Monotone => {
            results.push(run_criterion(
                f,
                Criterion::Loewner,
                Role::Equivalent,
                n,
                &node_probes(sets.clone()),
                rc,
                None,
            )?);
            results.push(run_criterion(
                f,
                Criterion::Dobsch,
                Role::Equivalent,
                n,
                &point_probes(&grid),
                rc,
                None,
            )?);
        }
        PropertyKind::Convex => {
            results.push(run_criterion(
                f,
                Criterion::Kraus,
                Role::Equivalent,
                n,
                &kraus_probes(&sets, left),
                rc,
                None,
            )?);
            let role = if n <= 2 { Role::Equivalent } else { Role::Necessary };
            results.push(run_criterion(
                f,
                Criterion::Hansen,
                role,
                n,
                &point_probes(&grid),
                rc,
                None,
            )?);
        }
        PropertyKind::Qn => {
            results.push(run_criterion(
                f,
                Criterion::ConditionalLoewner,
                Role::Equivalent,
                n,
                &node_probes(sets.clone()),
                rc,
                None,
            )?);
            if n == 2 {
                results.push(run_criterion(
                    f,
                    Criterion::ThirdDerivative,
                    Role::Equivalent,
                    1,
                    &point_probes(&grid),
                    rc,
                    None,
                )?);
            } else {
                let sub = SamplingPlan {
                    grid_points: QN_Z_GRID,
                    node_sets: (plan.node_sets / 8).max(16),
                    ..plan.clone()
                };
                let sub_grid = point_probes(&sub.grid(&interval)?);
                let sub_sets = node_probes(sub.node_sets(&interval, n - 1)?);
                let zs: Vec<f64> = (0..QN_Z_POINTS)
                    .map(|k| grid[k * (grid.len() - 1) / (QN_Z_POINTS - 1)])
                    .collect();
                z_points = zs.len();
                for z in zs {
                    let h = second_divdiff_fn(f, z)?;
                    results.push(run_criterion(
                        &h,
                        Criterion::Loewner,
                        Role::Equivalent,
                        n - 1,
                        &sub_sets,
                        rc,
                        Some(z),
                    )?);
                    results.push(run_criterion(
                        &h,
                        Criterion::Dobsch,
                        Role::Equivalent,
                        n - 1,
                        &sub_grid,
                        rc,
                        Some(z),
                    )?);
                }
            }
        }
    }

    let mut criteria = Vec::new();
    let mut witnesses = Vec::new();
    for (s, w) in results {
        criteria.push(s);
        witnesses.extend(w);
    }
    sort_witnesses(&mut witnesses);
    let verdict = if witnesses.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let margin = witnesses.first().map_or(0.0, |w| w.margin);
    let note = match (property.kind, verdict) {
        (_, Verdict::Fail) => "violation certified at big precision".to_string(),
        (PropertyKind::Convex, Verdict::Pass) if n > 2 => {
            "no counterexample found under the sampling plan; hansen positivity is only necessary for n > 2".into()
        }
        _ => "no counterexample found under the sampling plan".into(),
    };
    Ok(ClassificationReport {
        function: f.describe(),
        interval: interval.to_string(),
        property,
        verdict,
        margin,
        witnesses,
        samples: SampleCounts {
            grid_points: grid.len(),
            node_sets: sets.len(),
            z_points,
        },
        seed: plan.seed,
        tolerance: tol_rel,
        precision,
        certification_precision: rc.cert,
        criteria,
        note,
    })
}

/// Recomputes the certified eigenvalue of a node-set or point witness.
pub fn recheck_witness(
    f: &FunctionSpec,
    property: Property,
    w: &WitnessRecord,
    precision: PrecisionCfg,
) -> Result<f64> {
    let crit = match w.criterion.as_str() {
        "loewner" => Criterion::Loewner,
        "kraus" => Criterion::Kraus,
        "dobsch" => Criterion::Dobsch,
        "hansen" => Criterion::Hansen,
        "conditional_loewner" => Criterion::ConditionalLoewner,
        "third_derivative" => Criterion::ThirdDerivative,
        "cauchy_dobsch" => Criterion::CauchyDobsch,
        other => return Err(Error::InvalidInput(format!("not a matrix criterion: {other}"))),
    };
    let data = match &w.payload {
        WitnessPayload::Nodes { nodes, base } => ProbeData::Nodes {
            nodes: nodes.clone(),
            base: *base,
        },
        WitnessPayload::Point { t } => ProbeData::Point(*t),
        _ => return Err(Error::InvalidInput("operator witness".into())),
    };
    let probe = Probe {
        index: w.seed_index,
        data,
    };
    let n = match (crit, w.z) {
        (Criterion::ThirdDerivative, _) => 1,
        (_, Some(_)) => property.n - 1,
        _ => property.n,
    };
    let v = match w.z {
        Some(z) => probe_verdict_at(&second_divdiff_fn(f, z)?, crit, n, &probe, precision, 0.0)?,
        None => probe_verdict_at(f, crit, n, &probe, precision, 0.0)?,
    };
    Ok(v.min_eigenvalue)
}

/// `(g^(i+j-1)(t)/(i+j)!)` PSD on the grid.
pub fn check_cauchy_dobsch(
    g: &FunctionSpec,
    n: usize,
    plan: &SamplingPlan,
    precision: PrecisionCfg,
) -> Result<ClassificationReport> {
    plan.validate()?;
    let tol_rel = precision.default_tol_rel();
    let rc = RunCtx {
        plan,
        precision,
        cert: certification_precision(precision),
        tol_rel,
    };
    let grid = plan.grid(&g.domain)?;
    let (s, mut witnesses) = run_criterion(
        g,
        Criterion::CauchyDobsch,
        Role::Equivalent,
        n,
        &point_probes(&grid),
        rc,
        None,
    )?;
    sort_witnesses(&mut witnesses);
    let verdict = if witnesses.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ClassificationReport {
        function: g.describe(),
        interval: g.domain.to_string(),
        property: Property {
            kind: PropertyKind::Convex,
            n,
        },
        verdict,
        margin: witnesses.first().map_or(0.0, |w| w.margin),
        witnesses,
        samples: SampleCounts {
            grid_points: grid.len(),
            node_sets: 0,
            z_points: 0,
        },
        seed: plan.seed,
        tolerance: tol_rel,
        precision,
        certification_precision: rc.cert,
        criteria: vec![s],
        note: "grid positivity of (g^(i+j-1)/(i+j)!)".into(),
    })
}
