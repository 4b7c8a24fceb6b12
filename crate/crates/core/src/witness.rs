//! Randomized operator-level tests of monotonicity, convexity and the
//! contraction inequality `f(c*ac) <= c*f(a)c`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::sampling::item_rng;
use crate::error::{Error, Result};
use crate::expr::Interval;
use crate::jets::SmoothFn;
use crate::matrices::{MatrixKind, MatrixMeta, SymmetricMatrix};
use crate::scalar::{PrecisionCfg, Scalar};
use crate::spectra::{eig_sym, min_eigenpair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    NodeSet,
    Point,
    MatrixPair,
    ContractionTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WitnessPayload {
    Nodes {
        nodes: Vec<f64>,
        base: Option<f64>,
    },
    Point {
        t: f64,
    },
    MatrixPair {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        lambda: Option<f64>,
    },
    ContractionTriple {
        a: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
    },
}

/// A certified violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRecord {
    pub kind: WitnessKind,
    /// Which matrix or inequality was violated.
    pub criterion: String,
    pub payload: WitnessPayload,
    /// Base point `z` of the function `x -> [x, z, z]_f`, when that was tested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    /// Most negative eigenvalue at certification precision.
    pub margin: f64,
    /// The same quantity at the screening precision.
    pub screen_margin: f64,
    pub tolerance: f64,
    pub seed_index: u64,
}

/// Orders witnesses by `(margin, seed_index)`.
pub fn sort_witnesses(w: &mut [WitnessRecord]) {
    w.sort_by(|a, b| a.margin.total_cmp(&b.margin).then(a.seed_index.cmp(&b.seed_index)));
}

/// `Q` as a product of `n` Householder reflectors of Gaussian vectors.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for _ in 0..n {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        // q <- q (I - 2 v vᵀ / vᵀv)
        for row in q.iter_mut() {
            let dot: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            let k = 2.0 * dot / vv;
            for (x, vi) in row.iter_mut().zip(&v) {
                *x -= k * vi;
            }
        }
    }
    q
}

/// `Q D Qᵀ` with the diagonal of `D` uniform in `[lo, hi]` and `Q` from
/// [`random_orthogonal`].
pub fn sample_selfadjoint(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> SymmetricMatrix<f64> {
    let d: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect();
    let q = random_orthogonal(n, rng);
    SymmetricMatrix::build(n, MatrixKind::Derived, MatrixMeta::None, |i, j| {
        Ok((0..n).map(|k| q[i][k] * d[k] * q[j][k]).sum())
    })
    .expect("order at least 1")
}

/// `f(A) = Q f(Λ) Qᵀ`. Eigenvalues within round-off of the domain closure are
/// clamped onto it.
pub fn apply_matrix_function<S: Scalar, F: SmoothFn>(f: &F, a: &SymmetricMatrix<S>) -> Result<SymmetricMatrix<S>> {
    let e = eig_sym(a)?;
    let dom = f.domain();
    let slack = 1e-12 * a.scale().max(1.0);
    let fa = e.reassemble(|lam| {
        let x = lam.to_f64();
        let lam = if !dom.contains_closure(x) && dom.contains_closure(x + slack) && x < dom.lo {
            lam.cst(dom.lo)
        } else if !dom.contains_closure(x) && dom.contains_closure(x - slack) && x > dom.hi {
            lam.cst(dom.hi)
        } else {
            lam.clone()
        };
        Ok(f.taylor(&lam, 0)?.remove(0))
    })?;
    SymmetricMatrix::symmetrized(&fa, MatrixKind::Derived)
}

/// Spectrum of `f(A)` evaluated at `precision`, for binary64 input.
pub fn matrix_function<F: SmoothFn>(
    f: &F,
    a: &SymmetricMatrix<f64>,
    precision: PrecisionCfg,
) -> Result<SymmetricMatrix<f64>> {
    crate::with_precision!(precision, S, ctx => Ok(apply_matrix_function::<S, F>(f, &a.lift::<S>(ctx))?.to_f64()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Monotone,
    Convex,
    Contraction,
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monotone" => Ok(OperatorKind::Monotone),
            "convex" => Ok(OperatorKind::Convex),
            "contraction" => Ok(OperatorKind::Contraction),
            _ => Err(Error::InvalidInput(format!("unknown witness kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSearchReport {
    pub kind: OperatorKind,
    pub order: usize,
    pub interval: String,
    pub samples: usize,
    pub seed: u64,
    pub precision: PrecisionCfg,
    pub certification_precision: PrecisionCfg,
    pub tolerance: f64,
    /// Samples whose defect failed at the screening precision.
    pub candidates: usize,
    /// Candidates re-evaluated at certification precision.
    pub certification_attempts: usize,
    pub witnesses: Vec<WitnessRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchLimits {
    pub max_witnesses: usize,
    pub max_certify: usize,
    pub tol_rel: Option<f64>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_witnesses: 16,
            max_certify: 256,
            tol_rel: None,
        }
    }
}

/// One sampled instance with the binary64 data that defines it exactly.
#[derive(Debug, Clone)]
struct Instance {
    index: u64,
    a: SymmetricMatrix<f64>,
    b: Option<SymmetricMatrix<f64>>,
    c: Option<Vec<Vec<f64>>>,
    lambda: Option<f64>,
}

fn sample_instance(kind: OperatorKind, n: usize, lo: f64, hi: f64, seed: u64, index: u64) -> Result<Instance> {
    let mut rng = item_rng(seed, index);
    let a = sample_selfadjoint(n, lo, hi, &mut rng);
    match kind {
        OperatorKind::Monotone => {
            let p: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            let m = SymmetricMatrix::build(n, MatrixKind::Derived, MatrixMeta::None, |i, j| {
                Ok((0..n).map(|k| p[k][i] * p[k][j]).sum::<f64>())
            })?;
            let step = |s: f64| {
                SymmetricMatrix::build(n, MatrixKind::Derived, MatrixMeta::None, |i, j| {
                    Ok(a.get(i, j) + s * m.get(i, j))
                })
            };
            let fits = |s: f64| -> Result<bool> {
                let e = eig_sym(&step(s)?)?;
                Ok(*e.values.last().expect("nonempty") <= hi)
            };
            let (mut lo_s, mut hi_s) = (0.0, 1.0);
            while fits(hi_s)? && hi_s < 1e6 {
                lo_s = hi_s;
                hi_s *= 2.0;
            }
            for _ in 0..40 {
                let mid = 0.5 * (lo_s + hi_s);
                if fits(mid)? {
                    lo_s = mid;
                } else {
                    hi_s = mid;
                }
            }
            let s = lo_s * rng.gen::<f64>();
            Ok(Instance {
                index,
                b: Some(step(s)?),
                a,
                c: None,
                lambda: None,
            })
        }
        OperatorKind::Convex => {
            let b = sample_selfadjoint(n, lo, hi, &mut rng);
            let lambda = rng.gen::<f64>();
            Ok(Instance {
                index,
                a,
                b: Some(b),
                c: None,
                lambda: Some(lambda),
            })
        }
        OperatorKind::Contraction => {
            let g: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            let gtg = SymmetricMatrix::build(n, MatrixKind::Derived, MatrixMeta::None, |i, j| {
                Ok((0..n).map(|k| g[k][i] * g[k][j]).sum::<f64>())
            })?;
            let smax = eig_sym(&gtg)?.values.last().expect("nonempty").max(0.0).sqrt();
            let u = rng.gen::<f64>();
            let c = if smax > 0.0 {
                g.iter().map(|r| r.iter().map(|x| u * x / smax).collect()).collect()
            } else {
                g
            };
            Ok(Instance {
                index,
                a,
                b: None,
                c: Some(c),
                lambda: None,
            })
        }
    }
}

fn matmul<S: Scalar>(x: &[Vec<S>], y: &[Vec<S>]) -> Vec<Vec<S>> {
    let n = x.len();
    let m = y[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = x[i][0].cst(0.0);
                    for (k, yk) in y.iter().enumerate() {
                        acc = acc + x[i][k].clone() * yk[j].clone();
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn transpose<S: Clone>(x: &[Vec<S>]) -> Vec<Vec<S>> {
    (0..x[0].len())
        .map(|j| x.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// Defect matrix of an instance; PSD means the inequality holds. Returns the
/// defect and the magnitude it is compared against.
fn defect<S: Scalar, F: SmoothFn>(
    f: &F,
    kind: OperatorKind,
    inst: &Instance,
    ctx: S::Ctx,
) -> Result<(SymmetricMatrix<S>, f64)> {
    let a = inst.a.lift::<S>(ctx);
    let fa = apply_matrix_function(f, &a)?;
    match kind {
        OperatorKind::Monotone => {
            let b = inst.b.as_ref().expect("monotone pair").lift::<S>(ctx);
            let fb = apply_matrix_function(f, &b)?;
            let scale = fa.scale().max(fb.scale());
            let rows: Vec<Vec<S>> = (0..a.order())
                .map(|i| {
                    (0..a.order())
                        .map(|j| fb.get(i, j).clone() - fa.get(i, j).clone())
                        .collect()
                })
                .collect();
            Ok((SymmetricMatrix::symmetrized(&rows, MatrixKind::Derived)?, scale))
        }
        OperatorKind::Convex => {
            let b = inst.b.as_ref().expect("convex pair").lift::<S>(ctx);
            let fb = apply_matrix_function(f, &b)?;
            let l = S::from_f64_in(inst.lambda.expect("convex weight"), ctx);
            let one_l = S::one_in(ctx) - l.clone();
            let mix = SymmetricMatrix::build(a.order(), MatrixKind::Derived, MatrixMeta::None, |i, j| {
                Ok(l.clone() * a.get(i, j).clone() + one_l.clone() * b.get(i, j).clone())
            })?;
            let fm = apply_matrix_function(f, &mix)?;
            let scale = fa.scale().max(fb.scale()).max(fm.scale());
            let rows: Vec<Vec<S>> = (0..a.order())
                .map(|i| {
                    (0..a.order())
                        .map(|j| {
                            l.clone() * fa.get(i, j).clone() + one_l.clone() * fb.get(i, j).clone()
                                - fm.get(i, j).clone()
                        })
                        .collect()
                })
                .collect();
            Ok((SymmetricMatrix::symmetrized(&rows, MatrixKind::Derived)?, scale))
        }
        OperatorKind::Contraction => {
            let c: Vec<Vec<S>> = inst
                .c
                .as_ref()
                .expect("contraction")
                .iter()
                .map(|r| r.iter().map(|&x| S::from_f64_in(x, ctx)).collect())
                .collect();
            let ct = transpose(&c);
            let cfac = matmul(&matmul(&ct, &fa.rows()), &c);
            let cac = SymmetricMatrix::symmetrized(&matmul(&matmul(&ct, &a.rows()), &c), MatrixKind::Derived)?;
            let fcac = apply_matrix_function(f, &cac)?;
            let scale = fa.scale().max(fcac.scale());
            let rows: Vec<Vec<S>> = (0..a.order())
                .map(|i| {
                    (0..a.order())
                        .map(|j| cfac[i][j].clone() - fcac.get(i, j).clone())
                        .collect()
                })
                .collect();
            Ok((SymmetricMatrix::symmetrized(&rows, MatrixKind::Derived)?, scale))
        }
    }
}

fn defect_margin<F: SmoothFn>(
    f: &F,
    kind: OperatorKind,
    inst: &Instance,
    precision: PrecisionCfg,
) -> Result<(f64, f64)> {
    crate::with_precision!(precision, S, ctx => {
        let (d, scale) = defect::<S, F>(f, kind, inst, ctx)?;
        let (min, _) = min_eigenpair(&d)?;
        Ok((min.to_f64(), scale))
    })
}

/// Certification precision for a run at `precision`: the run precision when
/// it is wider than the default big precision, the default otherwise.
pub fn certification_precision(precision: PrecisionCfg) -> PrecisionCfg {
    let default = PrecisionCfg::default_big();
    match (precision, default) {
        (PrecisionCfg::Big { digits }, PrecisionCfg::Big { digits: d }) if digits > d => precision,
        _ => default,
    }
}

/// Samples `samples` instances, screens each at `precision` and re-confirms
/// the most negative candidates at big precision.
#[allow(clippy::too_many_arguments)]
pub fn operator_witness_search<F: SmoothFn>(
    f: &F,
    interval: &Interval,
    n: usize,
    kind: OperatorKind,
    samples: usize,
    seed: u64,
    precision: PrecisionCfg,
    limits: &SearchLimits,
) -> Result<WitnessSearchReport> {
    if n == 0 {
        return Err(Error::InvalidInput("matrix order must be at least 1".into()));
    }
    let dom = f.domain();
    if !(dom.contains_closure(interval.lo) && dom.contains_closure(interval.hi)) {
        return Err(Error::InvalidInput(format!(
            "interval {interval} is not inside the function domain {dom}"
        )));
    }
    if kind == OperatorKind::Contraction && !interval.contains_closure(0.0) {
        return Err(Error::InvalidInput(
            "the contraction test needs 0 in the closure of the interval".into(),
        ));
    }
    let w = interval.width();
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::InvalidInput(format!("interval {interval} must be bounded")));
    }
    let off = 1e-6 * w;
    let (lo, hi) = (interval.lo + off, interval.hi - off);
    let tol_rel = limits.tol_rel.unwrap_or_else(|| precision.default_tol_rel());
    let cert = certification_precision(precision);

    let screened: Vec<(Instance, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|index| -> Result<Option<(Instance, f64)>> {
            let inst = sample_instance(kind, n, lo, hi, seed, index)?;
            let (m, scale) = defect_margin(f, kind, &inst, precision)?;
            Ok((m < -tol_rel * scale.max(1.0)).then_some((inst, m)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let candidates = screened.len();
    let mut ordered = screened;
    ordered.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.index.cmp(&b.0.index)));

    let mut witnesses = Vec::new();
    let mut attempts = 0;
    for chunk in ordered.chunks(rayon::current_num_threads().max(1)) {
        if witnesses.len() >= limits.max_witnesses || attempts >= limits.max_certify {
            break;
        }
        let take = chunk.len().min(limits.max_certify - attempts);
        let results: Vec<(f64, f64)> = chunk[..take]
            .par_iter()
            .map(|(inst, _)| defect_margin(f, kind, inst, cert))
            .collect::<Result<_>>()?;
        attempts += take;
        for ((inst, screen), (m, scale)) in chunk[..take].iter().zip(results) {
            let tolerance = tol_rel * scale.max(1.0);
            if m < -tolerance && witnesses.len() < limits.max_witnesses {
                witnesses.push(record(kind, inst, m, *screen, tolerance));
            }
        }
    }
    sort_witnesses(&mut witnesses);
    Ok(WitnessSearchReport {
        kind,
        order: n,
        interval: interval.to_string(),
        samples,
        seed,
        precision,
        certification_precision: cert,
        tolerance: tol_rel,
        candidates,
        certification_attempts: attempts,
        witnesses,
    })
}

fn record(kind: OperatorKind, inst: &Instance, margin: f64, screen: f64, tolerance: f64) -> WitnessRecord {
    let (wk, criterion, payload) = match kind {
        OperatorKind::Contraction => (
            WitnessKind::ContractionTriple,
            "contraction",
            WitnessPayload::ContractionTriple {
                a: inst.a.rows(),
                c: inst.c.clone().expect("contraction"),
            },
        ),
        _ => (
            WitnessKind::MatrixPair,
            if kind == OperatorKind::Monotone {
                "monotone"
            } else {
                "convex"
            },
            WitnessPayload::MatrixPair {
                a: inst.a.rows(),
                b: inst.b.as_ref().expect("pair").rows(),
                lambda: inst.lambda,
            },
        ),
    };
    WitnessRecord {
        kind: wk,
        criterion: criterion.into(),
        payload,
        z: None,
        margin,
        screen_margin: screen,
        tolerance,
        seed_index: inst.index,
    }
}

/// Recomputes the certified margin of an operator witness.
pub fn recheck_operator_witness<F: SmoothFn>(f: &F, w: &WitnessRecord, precision: PrecisionCfg) -> Result<f64> {
    let to_sym = |rows: &Vec<Vec<f64>>| SymmetricMatrix::from_rows(rows.clone(), MatrixKind::Derived);
    let (kind, inst) = match &w.payload {
        WitnessPayload::MatrixPair { a, b, lambda } => (
            if lambda.is_some() {
                OperatorKind::Convex
            } else {
                OperatorKind::Monotone
            },
            Instance {
                index: w.seed_index,
                a: to_sym(a)?,
                b: Some(to_sym(b)?),
                c: None,
                lambda: *lambda,
            },
        ),
        WitnessPayload::ContractionTriple { a, c } => (
            OperatorKind::Contraction,
            Instance {
                index: w.seed_index,
                a: to_sym(a)?,
                b: None,
                c: Some(c.clone()),
                lambda: None,
            },
        ),
        _ => return Err(Error::InvalidInput("not an operator witness".into())),
    };
    Ok(defect_margin(f, kind, &inst, precision)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::spectra::eig_sym;

    #[test]
    fn selfadjoint_samples_have_interior_spectrum() {
        let mut rng = item_rng(3, 0);
        let one = sample_selfadjoint(1, 0.2, 0.8, &mut rng);
        assert!((0.2..=0.8).contains(one.get(0, 0)));
        for k in 0..20 {
            let mut rng = item_rng(5, k);
            let a = sample_selfadjoint(2, 1e-6, 1.0 - 1e-6, &mut rng);
            let e = eig_sym(&a).unwrap();
            assert!(e.values[0] > 0.0 && e.values[1] < 1.0);
        }
    }

    #[test]
    fn householder_product_is_orthogonal() {
        let mut rng = item_rng(9, 0);
        let q = random_orthogonal(5, &mut rng);
        for i in 0..5 {
            for j in 0..5 {
                let d: f64 = (0..5).map(|k| q[k][i] * q[k][j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d - e).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn matrix_function_examples() {
        let m = PrecisionCfg::Machine;
        let d = SymmetricMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 4.0]], MatrixKind::Derived).unwrap();
        let r = matrix_function(&parse("sqrt(t)").unwrap(), &d, m).unwrap();
        assert!((r.get(0, 0) - 1.0).abs() < 1e-15 && (r.get(1, 1) - 2.0).abs() < 1e-15 && r.get(0, 1).abs() < 1e-15);
        let a = SymmetricMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]], MatrixKind::Derived).unwrap();
        let r = matrix_function(&parse("t^2").unwrap(), &a, m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((r.get(i, j) - 2.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn affine_function_has_no_witnesses() {
        let f = parse("t").unwrap();
        let i = Interval::closed(0.0, 2.0).unwrap();
        for kind in [OperatorKind::Monotone, OperatorKind::Convex, OperatorKind::Contraction] {
            let r = operator_witness_search(&f, &i, 2, kind, 200, 1, PrecisionCfg::Machine, &SearchLimits::default())
                .unwrap();
            assert!(r.witnesses.is_empty(), "{kind:?}");
        }
    }

    #[test]
    fn cube_is_not_monotone() {
        let f = parse("t^3").unwrap();
        let i = Interval::closed(0.0, 2.0).unwrap();
        let r = operator_witness_search(
            &f,
            &i,
            2,
            OperatorKind::Monotone,
            500,
            7,
            PrecisionCfg::Machine,
            &SearchLimits::default(),
        )
        .unwrap();
        assert!(!r.witnesses.is_empty());
        let w = &r.witnesses[0];
        assert!(w.margin < -1e-6);
        let again = recheck_operator_witness(&f, w, PrecisionCfg::Big { digits: 60 }).unwrap();
        assert!((again - w.margin).abs() <= 1e-6 * w.margin.abs());
        assert!(r.witnesses.windows(2).all(|p| p[0].margin <= p[1].margin));
    }

    #[test]
    fn hand_contraction_case() {
        // c = diag(1, 0), a = [[1,1],[1,1]]: c f(a) c - f(c a c) = diag(2 - 1, 0) for t^2
        let f = parse("t^2").unwrap();
        let inst = Instance {
            index: 0,
            a: SymmetricMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]], MatrixKind::Derived).unwrap(),
            b: None,
            c: Some(vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
            lambda: None,
        };
        let (d, _) = defect::<f64, _>(&f, OperatorKind::Contraction, &inst, ()).unwrap();
        assert!((d.get(0, 0) - 1.0).abs() < 1e-14 && d.get(1, 1).abs() < 1e-14);
    }
}
