//! Randomized invariants of the numerical kernels.

#![allow(clippy::needless_range_loop)]

use loewner_lab::classify::{check_property, Property, PropertyKind, SamplingPlan};
use loewner_lab::divided::{divdiff, second_divdiff_fn, NodeSet};
use loewner_lab::expr::{evaluate, evaluate_in, parse, parse_expr, transform, FunctionSpec, Interval, TransformKind};
use loewner_lab::jets::{derivative, jet_eval, SmoothFn};
use loewner_lab::matrices::{
    derivative_matrix, hadamard, kraus_matrix, loewner_matrix, DerivativeKind, MatrixKind, SymmetricMatrix,
};
use loewner_lab::mollify::{mollify_eval, MollifierKernel};
use loewner_lab::scalar::{Big, BigCtx, PrecisionCfg, Scalar};
use loewner_lab::spectra::{cpsd_verdict, determinant, difference_basis_form, eig_sym, psd_verdict};
use proptest::prelude::*;

const M: PrecisionCfg = PrecisionCfg::Machine;
const FIXTURES: [&str; 6] = ["-log(1+t)", "exp(t)", "t^3", "sqrt(1+t)", "t^2+t", "(1+t)*log(1+t)"];

fn unit() -> Interval {
    Interval::closed_open(0.0, 1.0).unwrap()
}

fn fixture(i: usize) -> FunctionSpec {
    FunctionSpec::parse_on(FIXTURES[i % FIXTURES.len()], unit()).unwrap()
}

fn nodes(v: &[f64]) -> NodeSet {
    NodeSet::new(v.to_vec(), &unit()).unwrap()
}

fn separated(v: &[f64], sep: f64) -> bool {
    v.iter()
        .enumerate()
        .all(|(i, a)| v[i + 1..].iter().all(|b| (a - b).abs() >= sep))
}

fn sym(rows: Vec<Vec<f64>>) -> SymmetricMatrix<f64> {
    SymmetricMatrix::symmetrized(&rows, MatrixKind::Derived).unwrap()
}

fn symmetric_strategy() -> impl Strategy<Value = SymmetricMatrix<f64>> {
    (2usize..=8)
        .prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, n), n).prop_map(sym))
}

fn gram(v: &[Vec<f64>]) -> SymmetricMatrix<f64> {
    let n = v.len();
    sym((0..n)
        .map(|i| {
            (0..n)
                .map(|j| v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect())
}

/// Expression source text from the grammar, kept shallow.
fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        (0u32..20).prop_map(|k| k.to_string()),
        (1u32..1000).prop_map(|k| format!("{}", k as f64 / 8.0)),
        Just("1e-3".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "/", "^"])
            )
                .prop_map(|(a, b, op)| format!("({a}){op}({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner, prop::sample::select(vec!["log", "exp", "sqrt"])).prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parser_never_panics(s in "\\PC{0,64}") {
        let _ = parse_expr(&s);
    }

    #[test]
    fn parser_never_panics_on_grammar_alphabet(s in "[t0-9.eE+\\-*/^() logxpsqr]{0,64}") {
        let _ = parse_expr(&s);
    }

    #[test]
    fn print_parse_round_trip(src in expr_text(), ts in proptest::collection::vec(0.01f64..3.0, 8)) {
        let a = parse_expr(&src).unwrap();
        let printed = a.to_string();
        let b = parse_expr(&printed).unwrap();
        prop_assert_eq!(&a, &b, "{} printed as {}", src, printed);
        let fa = FunctionSpec::parse(&src).unwrap();
        let fb = FunctionSpec::parse(&printed).unwrap();
        for t in ts {
            match (evaluate(&fa, t, M), evaluate(&fb, t, M)) {
                (Ok(x), Ok(y)) => prop_assert!(x == y || (x.is_nan() && y.is_nan())),
                (Err(_), Err(_)) => {}
                (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y),
            }
        }
    }

    #[test]
    fn quotient_then_product_restores_function(i in 0usize..6, t in 0.01f64..0.99) {
        let f = fixture(i);
        let back = transform(&f, TransformKind::DivideByT).unwrap().multiply_by_t().unwrap();
        let (a, b) = (f.eval(t, M).unwrap(), back.eval(t, M).unwrap());
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
    }

    #[test]
    fn rescale_round_trip(i in 0usize..6, alpha in 0.2f64..3.0, beta in 0.2f64..3.0, s in 0.0f64..0.99) {
        let f = FixtureOn::new(i, alpha);
        let there = transform(&f.0, TransformKind::Rescale { alpha, beta }).unwrap();
        let back = transform(&there, TransformKind::Rescale { alpha: beta, beta: alpha }).unwrap();
        let t = s * alpha;
        let (a, b) = (f.0.eval(t, M).unwrap(), back.eval(t, M).unwrap());
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
    }

    #[test]
    fn jets_agree_with_central_differences(i in 0usize..6, t in 0.2f64..0.8, k in 1usize..=4) {
        let f = fixture(i);
        let h = f64::EPSILON.powf(1.0 / (k as f64 + 2.0));
        let mut binom = 1.0;
        let mut fd = 0.0;
        for j in 0..=k {
            let x = t + (k as f64 / 2.0 - j as f64) * h;
            fd += if j % 2 == 0 { binom } else { -binom } * f.eval(x, M).unwrap();
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        fd /= h.powi(k as i32);
        let exact = derivative(&f, t, k, M).unwrap();
        let scale = (0..=k + 2).map(|m| derivative(&f, t, m, M).unwrap().abs()).fold(1.0, f64::max);
        let budget = 10.0 * scale * f64::EPSILON.powf(2.0 / (k as f64 + 2.0));
        prop_assert!((fd - exact).abs() <= budget, "k={} fd={} exact={} budget={}", k, fd, exact, budget);
    }

    #[test]
    fn leibniz_rule_is_exact_on_dyadic_polynomials(
        p in proptest::collection::vec(-5i32..=5, 1..=4),
        q in proptest::collection::vec(-5i32..=5, 1..=4),
        k in -8i32..=8,
    ) {
        let poly = |c: &[i32]| c.iter().enumerate().map(|(e, c)| format!("({c})*t^{e}")).collect::<Vec<_>>().join("+");
        let t = k as f64 / 8.0;
        let order = 6;
        let jp = jet_eval(&parse(&poly(&p)).unwrap(), t, order, M).unwrap();
        let jq = jet_eval(&parse(&poly(&q)).unwrap(), t, order, M).unwrap();
        let jpq = jet_eval(&parse(&format!("({})*({})", poly(&p), poly(&q))).unwrap(), t, order, M).unwrap();
        for m in 0..=order {
            let conv: f64 = (0..=m).map(|j| jp.coeffs[j] * jq.coeffs[m - j]).sum();
            prop_assert_eq!(conv, jpq.coeffs[m]);
        }
    }

    #[test]
    fn divided_differences_are_symmetric(i in 0usize..6, v in proptest::collection::vec(0.0f64..1.0, 2..=5), seed in any::<u64>()) {
        prop_assume!(separated(&v, 1e-3));
        let f = fixture(i);
        let a = divdiff(&f, &nodes(&v), M).unwrap();
        let mut w = v.clone();
        let mut s = seed;
        for j in (1..w.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            w.swap(j, (s >> 33) as usize % (j + 1));
        }
        let b = divdiff(&f, &nodes(&w), M).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn close_nodes_approach_the_derivative(i in 0usize..6, t in 0.1f64..0.8) {
        let f = fixture(i);
        let d1 = derivative(&f, t, 1, M).unwrap();
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|h| (divdiff(&f, &nodes(&[t, t + h]), M).unwrap() - d1).abs())
            .collect();
        let d2 = derivative(&f, t, 2, M).unwrap().abs();
        prop_assume!(d2 > 1e-3);
        let order = ((errs[0] / errs[2]).log10()) / 2.0;
        prop_assert!(order >= 0.9, "errors {:?}", errs);
    }

    #[test]
    fn second_divided_difference_is_the_z_derivative(i in 0usize..6, t in 0.05f64..0.95, z in 0.05f64..0.95) {
        prop_assume!((t - z).abs() > 0.05);
        let f = fixture(i);
        let h = 1e-5;
        let first = |z: f64| divdiff(&f, &nodes(&[t, z]), M).unwrap();
        let fd = (first(z + h) - first(z - h)) / (2.0 * h);
        let g = second_divdiff_fn(&f, z).unwrap();
        let value = g.taylor(&t, 0).unwrap()[0];
        prop_assert!((fd - value).abs() <= 1e-6 * value.abs().max(1.0), "fd {} value {}", fd, value);
    }

    #[test]
    fn quotient_identity_for_t_times_g(
        c in proptest::collection::vec(-2.0f64..2.0, 2..=5),
        v in proptest::collection::vec(0.0f64..1.0, 3),
    ) {
        prop_assume!(separated(&v, 1e-3));
        let text = c.iter().enumerate().map(|(e, c)| format!("({c:.6})*t^{e}")).collect::<Vec<_>>().join("+");
        let g = FunctionSpec::parse_on(&text, unit()).unwrap();
        let f = g.multiply_by_t().unwrap();
        let lhs = divdiff(&f, &nodes(&v), M).unwrap();
        let rhs = v[0] * divdiff(&g, &nodes(&v), M).unwrap() + divdiff(&g, &nodes(&v[1..]), M).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn confluent_loewner_matches_dobsch(i in 0usize..6, t in 0.1f64..0.9, n in 1usize..=4) {
        let f = fixture(i);
        let l = loewner_matrix(&f, &nodes(&vec![t; n]), M).unwrap();
        let d = derivative_matrix(&f, t, n, DerivativeKind::Dobsch, M).unwrap();
        for a in 0..n {
            for b in 0..n {
                let expected = divdiff(&f, &nodes(&vec![t; a + b + 2]), M).unwrap();
                prop_assert!((d.get(a, b) - expected).abs() <= 1e-9 * expected.abs().max(1.0));
            }
        }
        prop_assert!((l.get(0, 0) - d.get(0, 0)).abs() <= 1e-9 * d.get(0, 0).abs().max(1.0));
    }

    #[test]
    fn rescaling_scales_loewner_and_kraus(i in 0usize..6, alpha in 0.2f64..2.0, beta in 0.2f64..2.0,
                                          s in proptest::collection::vec(0.01f64..0.99, 2..=4)) {
        prop_assume!(separated(&s, 0.02));
        let f = FixtureOn::new(i, alpha).0;
        let fh = transform(&f, TransformKind::Rescale { alpha, beta }).unwrap();
        let r = beta / alpha;
        let t: Vec<f64> = s.iter().map(|x| x * alpha).collect();
        let u: Vec<f64> = t.iter().map(|x| r * x).collect();
        let on = |v: &[f64], d: &Interval| NodeSet::new(v.to_vec(), d).unwrap();
        let l = loewner_matrix(&f, &on(&t, &f.domain), M).unwrap();
        let lh = loewner_matrix(&fh, &on(&u, &fh.domain), M).unwrap();
        let k = kraus_matrix(&f, t[0], &on(&t, &f.domain), M).unwrap();
        let kh = kraus_matrix(&fh, u[0], &on(&u, &fh.domain), M).unwrap();
        for a in 0..t.len() {
            for b in 0..t.len() {
                prop_assert!((lh.get(a, b) - l.get(a, b) / r).abs() <= 1e-12 * l.get(a, b).abs().max(1.0));
                prop_assert!((kh.get(a, b) - k.get(a, b) / (r * r)).abs() <= 1e-10 * k.get(a, b).abs().max(1.0));
            }
        }
    }

    #[test]
    fn schur_product_of_psd_is_psd(
        (a, b) in (2usize..=6).prop_flat_map(|n| {
            let v = proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, n), n);
            (v.clone(), v)
        })
    ) {
        let p = hadamard(&gram(&a), &gram(&b)).unwrap();
        prop_assert!(psd_verdict(&p, 1e-9).unwrap().psd);
    }

    #[test]
    fn eigen_decomposition_reconstructs(m in symmetric_strategy()) {
        let n = m.order();
        let e = eig_sym(&m).unwrap();
        let q = &e.vectors;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| q[i][k] * q[j][k]).sum();
                let identity = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - identity).abs() <= 1e-12);
            }
        }
        let back = e.reassemble(|x| Ok(*x)).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((back[i][j] - m.get(i, j)).abs() <= 1e-10 * m.scale().max(1.0));
            }
        }
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn determinant_is_product_of_eigenvalues(m in symmetric_strategy()) {
        let e = eig_sym(&m).unwrap();
        let prod: f64 = e.values.iter().product();
        let big = determinant(&m.lift::<Big>(BigCtx::new(40))).unwrap().to_f64();
        let cond = e.values.iter().map(|v| v.abs()).fold(0.0, f64::max).powi(m.order() as i32);
        prop_assert!((prod - big).abs() <= 1e-8 * cond.max(1.0));
    }

    #[test]
    fn conditional_psd_matches_the_restricted_form(m in symmetric_strategy()) {
        let n = m.order();
        let v = cpsd_verdict(&m, 1e-9).unwrap();
        let g = difference_basis_form(&m);
        let e = eig_sym(&g).unwrap();
        prop_assert!((v.min_eigenvalue - e.values[0]).abs() <= 1e-9 * g.scale().max(1.0));
        // The smallest eigenvector of the Gram form maps to a zero-sum vector
        // whose Rayleigh quotient on the restricted Gram problem is the minimum.
        let y = &e.vectors[0];
        let x: Vec<f64> = (0..n).map(|i| {
            let a = if i < n - 1 { y[i] } else { 0.0 };
            let b = if i > 0 { y[i - 1] } else { 0.0 };
            a - b
        }).collect();
        prop_assert!(x.iter().sum::<f64>().abs() <= 1e-12);
        let quad: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| x[i] * m.get(i, j) * x[j]).sum();
        prop_assert!((quad - e.values[0]).abs() <= 1e-9 * m.scale().max(1.0) * 4.0);
    }

    #[test]
    fn mollifier_fixes_affine_functions(a in -3.0f64..3.0, b in -3.0f64..3.0, eps in 0.01f64..0.2, s in 0.0f64..1.0) {
        let t = eps + 0.01 + s * (1.0 - 2.0 * eps - 0.02);
        let affine = mollify_eval(|x| Ok(a * x + b), (0.0, 1.0), eps, t).unwrap();
        prop_assert!((affine - (a * t + b)).abs() <= 1e-8);
        let one = mollify_eval(|_| Ok(1.0), (0.0, 1.0), eps, t).unwrap();
        prop_assert!((one - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn kernel_is_even(x in -1.0f64..1.0) {
        let k = MollifierKernel::default();
        prop_assert_eq!(k.phi(x), k.phi(-x));
    }
}

struct FixtureOn(FunctionSpec);

impl FixtureOn {
    fn new(i: usize, alpha: f64) -> Self {
        FixtureOn(
            FunctionSpec::parse_on(FIXTURES[i % FIXTURES.len()], Interval::closed_open(0.0, alpha).unwrap()).unwrap(),
        )
    }
}

#[test]
fn mollification_converges_uniformly() {
    let f = |x: f64| Ok((x - 0.5).abs());
    let grid: Vec<f64> = (0..=60).map(|i| 0.25 + 0.5 * i as f64 / 60.0).collect();
    let err = |eps: f64| {
        grid.iter()
            .map(|&t| (mollify_eval(f, (0.0, 1.0), eps, t).unwrap() - (t - 0.5).abs()).abs())
            .fold(0.0, f64::max)
    };
    let e: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&eps| err(eps)).collect();
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
}

#[test]
fn mollification_preserves_convexity() {
    let eps = 0.1;
    let h = 0.01;
    let f_eps = |t: f64| mollify_eval(|x| Ok((x - 0.5).abs()), (0.0, 1.0), eps, t).unwrap();
    let mut t = eps + h + 1e-3;
    while t + h < 1.0 - eps - 1e-3 {
        assert!(f_eps(t - h) - 2.0 * f_eps(t) + f_eps(t + h) >= -1e-8, "at {t}");
        t += 0.01;
    }
}

#[test]
fn big_precision_is_consistent_across_working_precisions() {
    let f = parse("-5*t^2 - 6*t + (2*t^2 + 8*t + 6)*log(1+t)").unwrap();
    let at = |digits: u32| evaluate_in(&f, &Big::from_f64_in(1e-9, BigCtx::new(digits))).unwrap();
    let (a, b) = (at(60), at(120));
    let rel = ((a.clone() - b.clone()) / b).abs().to_f64();
    assert!(rel <= 1e-50, "relative difference {rel:e}");
    assert!(a.to_f64() != 0.0);
}

#[test]
fn classification_is_deterministic() {
    let f = FunctionSpec::parse_on("t^3", Interval::open(0.0, 2.0).unwrap()).unwrap();
    let p = Property {
        kind: PropertyKind::Monotone,
        n: 2,
    };
    let plan = SamplingPlan::default();
    let a = serde_json::to_string(&check_property(&f, p, &plan, M).unwrap()).unwrap();
    let b = serde_json::to_string(&check_property(&f, p, &plan, M).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rescaled_verdicts_agree() {
    let plan = SamplingPlan::default();
    for (text, alpha, kind) in [
        ("t^3", 2.0, PropertyKind::Monotone),
        ("-log(1+t)", 1.0, PropertyKind::Convex),
        ("t + t^2/2 + t^3/3 + t^4/4 + t^5/5", 0.17, PropertyKind::Convex),
    ] {
        let f = FunctionSpec::parse_on(text, Interval::closed_open(0.0, alpha).unwrap()).unwrap();
        let fh = transform(&f, TransformKind::Rescale { alpha, beta: 1.0 }).unwrap();
        let p = Property { kind, n: 2 };
        let a = check_property(&f, p, &plan, M).unwrap();
        let b = check_property(&fh, p, &plan, M).unwrap();
        assert_eq!(a.verdict, b.verdict, "{text}");
    }
}

#[test]
fn qn_routes_agree_on_fixtures() {
    let plan = SamplingPlan::default();
    for text in ["t^2", "exp(t)", "-log(1+t)/t", "(-log(1+t)+1)/t"] {
        let f = FunctionSpec::parse_on(text, Interval::open(0.0, 1.0).unwrap()).unwrap();
        let r = check_property(
            &f,
            Property {
                kind: PropertyKind::Qn,
                n: 2,
            },
            &plan,
            M,
        )
        .unwrap();
        let third = plan
            .grid(&f.domain)
            .unwrap()
            .iter()
            .map(|&t| derivative(&f, t, 3, PrecisionCfg::big(30).unwrap()).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.verdict.is_pass(), third >= -1e-9, "{text}: min f''' {third:e}");
    }
}
