//! Symmetric eigenvalues by cyclic Jacobi rotations, PSD and conditional-PSD
//! verdicts, determinants.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrices::{d_reduce, SymmetricMatrix};
use crate::scalar::{PrecisionCfg, Scalar};

/// Largest supported matrix order.
pub const MAX_ORDER: usize = 64;
/// Sweep limit for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 60;

/// `A = Q diag(values) Qᵀ`, values ascending, `vectors[k]` the k-th column of `Q`.
#[derive(Debug, Clone)]
pub struct Eigen<S> {
    pub values: Vec<S>,
    pub vectors: Vec<Vec<S>>,
}

impl<S: Scalar> Eigen<S> {
    /// `Q h(Λ) Qᵀ` as rows.
    pub fn reassemble(&self, h: impl Fn(&S) -> Result<S>) -> Result<Vec<Vec<S>>> {
        let n = self.values.len();
        let mapped: Vec<S> = self.values.iter().map(h).collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = mapped[0].cst(0.0);
                for k in 0..n {
                    acc = acc + self.vectors[k][i].clone() * mapped[k].clone() * self.vectors[k][j].clone();
                }
                row.push(acc);
            }
            out.push(row);
        }
        Ok(out)
    }
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::InvalidInput(format!("matrix order {n} exceeds {MAX_ORDER}")));
    }
    Ok(())
}

pub fn eig_sym<S: Scalar>(m: &SymmetricMatrix<S>) -> Result<Eigen<S>> {
    let n = m.order();
    check_order(n)?;
    let mut a = m.rows();
    let zero = a[0][0].cst(0.0);
    let one = a[0][0].cst(1.0);
    let u = S::unit_roundoff(a[0][0].ctx());
    let mut q: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    if a.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Domain {
            what: "eigenvalues of a matrix with non-finite entries".into(),
            at: f64::NAN,
        });
    }

    let max_abs = |a: &[Vec<S>], diag: bool| {
        let mut m = 0.0f64;
        for (i, row) in a.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if diag || i != j {
                    m = m.max(x.to_f64().abs());
                }
            }
        }
        m
    };
    let target = n as f64 * u * max_abs(&a, true);
    let off = |a: &[Vec<S>]| max_abs(a, false);

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let o = off(&a);
        if o == 0.0 || o <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                if a[p][r].is_zero() {
                    continue;
                }
                let apq = a[p][r].clone();
                let two = apq.cst(2.0);
                let theta = (a[r][r].clone() - a[p][p].clone()) / (two * apq.clone());
                let th = theta.to_f64();
                let t = if th.abs() > 1e100 {
                    one.clone() / (theta.cst(2.0) * theta.clone())
                } else {
                    let mag = one.clone() / (theta.abs() + (theta.clone() * theta.clone() + one.clone()).sqrt());
                    if theta < zero {
                        -mag
                    } else {
                        mag
                    }
                };
                let c = one.clone() / (t.clone() * t.clone() + one.clone()).sqrt();
                let s = t.clone() * c.clone();
                let tau = s.clone() / (one.clone() + c.clone());

                let app = a[p][p].clone() - t.clone() * apq.clone();
                let aqq = a[r][r].clone() + t.clone() * apq.clone();
                a[p][p] = app;
                a[r][r] = aqq;
                a[p][r] = zero.clone();
                a[r][p] = zero.clone();
                for k in 0..n {
                    if k == p || k == r {
                        continue;
                    }
                    let akp = a[k][p].clone();
                    let akq = a[k][r].clone();
                    let nkp = akp.clone() - s.clone() * (akq.clone() + tau.clone() * akp.clone());
                    let nkq = akq.clone() + s.clone() * (akp - tau.clone() * akq);
                    a[k][p] = nkp.clone();
                    a[p][k] = nkp;
                    a[k][r] = nkq.clone();
                    a[r][k] = nkq;
                }
                for row in q.iter_mut() {
                    let qkp = row[p].clone();
                    let qkq = row[r].clone();
                    row[p] = qkp.clone() - s.clone() * (qkq.clone() + tau.clone() * qkp.clone());
                    row[r] = qkq.clone() + s.clone() * (qkp - tau.clone() * qkq);
                }
            }
        }
    }
    if !converged {
        let o = off(&a);
        if !(o == 0.0 || o <= target) {
            return Err(Error::NonConvergence { sweeps: MAX_SWEEPS });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| a[k][k].clone()).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| q[i][k].clone()).collect())
        .collect();
    Ok(Eigen { values, vectors })
}

/// Outcome of a positivity test with the tolerance that decided it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub psd: bool,
    pub min_eigenvalue: f64,
    pub tolerance_used: f64,
    /// Largest absolute entry of the tested matrix.
    pub scale: f64,
    pub precision: PrecisionCfg,
}

/// Smallest eigenvalue and a unit eigenvector for it.
pub fn min_eigenpair<S: Scalar>(m: &SymmetricMatrix<S>) -> Result<(S, Vec<S>)> {
    let e = eig_sym(m)?;
    Ok((e.values[0].clone(), e.vectors[0].clone()))
}

/// `psd` iff the smallest eigenvalue is at least `-tol_rel·max(1, scale)`.
pub fn psd_verdict<S: Scalar>(m: &SymmetricMatrix<S>, tol_rel: f64) -> Result<PsdVerdict> {
    let e = eig_sym(m)?;
    let scale = m.scale();
    let tolerance_used = tol_rel * scale.max(1.0);
    let min_eigenvalue = e.values[0].to_f64();
    Ok(PsdVerdict {
        psd: min_eigenvalue >= -tolerance_used,
        min_eigenvalue,
        tolerance_used,
        scale,
        precision: S::precision(m.get(0, 0).ctx()),
    })
}

/// PSD verdict of the quadratic form restricted to zero-sum vectors.
pub fn cpsd_verdict<S: Scalar>(m: &SymmetricMatrix<S>, tol_rel: f64) -> Result<PsdVerdict> {
    let d = d_reduce(m)?;
    #[cfg(debug_assertions)]
    {
        let g = difference_basis_form(m);
        let diff = d.max_abs_diff(&g)?;
        debug_assert!(
            diff <= 1e-9 * d.scale().max(m.scale()).max(1.0),
            "d-reduction disagrees with the difference-basis form by {diff}"
        );
    }
    psd_verdict(&d, tol_rel)
}

/// `EᵀAE` for `E` with columns `e_i - e_{i+1}`, computed by explicit products.
pub fn difference_basis_form<S: Scalar>(m: &SymmetricMatrix<S>) -> SymmetricMatrix<S> {
    let n = m.order();
    let zero = m.get(0, 0).cst(0.0);
    let one = m.get(0, 0).cst(1.0);
    let e = |i: usize, k: usize| {
        if i == k {
            one.clone()
        } else if i == k + 1 {
            -one.clone()
        } else {
            zero.clone()
        }
    };
    SymmetricMatrix::build(n - 1, crate::matrices::MatrixKind::Derived, m.meta.clone(), |k, l| {
        let mut acc = zero.clone();
        for i in 0..n {
            for j in 0..n {
                acc = acc + e(i, k) * m.get(i, j).clone() * e(j, l);
            }
        }
        Ok(acc)
    })
    .expect("order at least 2")
}

/// Product of eigenvalues in binary64, fraction-free elimination otherwise.
pub fn determinant<S: Scalar>(m: &SymmetricMatrix<S>) -> Result<S> {
    check_order(m.order())?;
    if S::MACHINE {
        let e = eig_sym(m)?;
        let one = m.get(0, 0).cst(1.0);
        return Ok(e.values.into_iter().fold(one, |acc, x| acc * x));
    }
    Ok(bareiss(m.rows()))
}

fn bareiss<S: Scalar>(mut a: Vec<Vec<S>>) -> S {
    let n = a.len();
    let mut prev = a[0][0].cst(1.0);
    let mut negate = false;
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    negate = !negate;
                }
                None => return prev.cst(0.0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone()) / prev.clone();
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::matrices::{
        derivative_matrix, derivative_matrix_in, loewner_matrix, special_matrix, DerivativeKind, MatrixKind,
        SpecialKind,
    };
    use crate::scalar::{Big, BigCtx};

    fn sym(rows: Vec<Vec<f64>>) -> SymmetricMatrix<f64> {
        SymmetricMatrix::from_rows(rows, MatrixKind::Derived).unwrap()
    }

    #[test]
    fn eigen_examples() {
        let e = eig_sym(&sym(vec![vec![2.0, 1.0], vec![1.0, 2.0]])).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] - 3.0).abs() < 1e-15);
        let e = eig_sym(&sym(vec![vec![0.0, 1.0], vec![1.0, 2.0]])).unwrap();
        let r = 2f64.sqrt();
        assert!((e.values[0] - (1.0 - r)).abs() < 1e-15 && (e.values[1] - (1.0 + r)).abs() < 1e-15);
        let e = eig_sym(&special_matrix(SpecialKind::Cauchy, 3).unwrap()).unwrap();
        assert!(e.values[0] > 0.0);
    }

    #[test]
    fn eigen_big_matches_closed_form() {
        let ctx = BigCtx::new(60);
        let rows: Vec<Vec<Big>> = vec![
            vec![Big::from_f64_in(0.0, ctx), Big::from_f64_in(1.0, ctx)],
            vec![Big::from_f64_in(1.0, ctx), Big::from_f64_in(2.0, ctx)],
        ];
        let m = SymmetricMatrix::from_rows(rows, MatrixKind::Derived).unwrap();
        let e = eig_sym(&m).unwrap();
        let two = Big::from_f64_in(2.0, ctx);
        let expect = Big::from_f64_in(1.0, ctx) - two.sqrt();
        let err = (e.values[0].clone() - expect).abs();
        assert!(err < Big::from_decimal_in("1e-58", ctx).unwrap(), "{err:?}");
    }

    #[test]
    fn psd_examples() {
        let ones = sym(vec![vec![1.0; 3]; 3]);
        let v = psd_verdict(&ones, 1e-9).unwrap();
        assert!(v.psd && v.min_eigenvalue.abs() < 1e-12);
        let nodes = crate::divided::NodeSet::new(vec![0.0, 1.0], &crate::expr::Interval::real_line()).unwrap();
        let l = loewner_matrix(&parse("t^2").unwrap(), &nodes, PrecisionCfg::Machine).unwrap();
        let v = psd_verdict(&l, 1e-9).unwrap();
        assert!(!v.psd && (v.min_eigenvalue - (1.0 - 2f64.sqrt())).abs() < 1e-14);
        assert_eq!(v.tolerance_used, 2e-9);
        let h = derivative_matrix(
            &parse("-log(1+t)").unwrap(),
            0.0,
            2,
            DerivativeKind::Hansen,
            PrecisionCfg::Machine,
        )
        .unwrap();
        assert!(psd_verdict(&h, 1e-9).unwrap().psd);
    }

    #[test]
    fn cpsd_examples() {
        let v = cpsd_verdict(&special_matrix(SpecialKind::IndexSum, 4).unwrap(), 1e-9).unwrap();
        assert!(v.psd && v.scale == 0.0);
        let nodes = crate::divided::NodeSet::new(vec![0.0, 1.0], &crate::expr::Interval::real_line()).unwrap();
        let l = loewner_matrix(&parse("t^2").unwrap(), &nodes, PrecisionCfg::Machine).unwrap();
        assert!(cpsd_verdict(&l, 1e-9).unwrap().psd);
        let a = sym(vec![vec![1.0, 0.0, 0.0], vec![0.0, -10.0, 0.0], vec![0.0, 0.0, 1.0]]);
        // (1, -2, 1) gives 1 - 40 + 1
        let x = [1.0, -2.0, 1.0];
        let form: f64 = (0..3).map(|i| x[i] * a.get(i, i) * x[i]).sum();
        assert!(form < 0.0);
        assert!(!cpsd_verdict(&a, 1e-9).unwrap().psd);
    }

    #[test]
    fn determinant_examples() {
        let c = special_matrix(SpecialKind::Cauchy, 2).unwrap();
        assert!((determinant(&c).unwrap() - 1.0 / 72.0).abs() < 1e-16);
        let f = parse("-log(1+t)").unwrap();
        let h = derivative_matrix(&f, 0.5, 2, DerivativeKind::Hansen, PrecisionCfg::Machine).unwrap();
        let expect = 1.0 / (72.0 * 1.5f64.powi(6));
        assert!((determinant(&h).unwrap() - expect).abs() < 1e-15 * expect.abs().max(1.0));
        let d = derivative_matrix(
            &parse("t^3").unwrap(),
            1.0,
            2,
            DerivativeKind::Dobsch,
            PrecisionCfg::Machine,
        )
        .unwrap();
        assert!((determinant(&d).unwrap() + 6.0).abs() < 1e-13);

        let ctx = BigCtx::new(60);
        let hb = derivative_matrix_in::<Big, _>(&f, 0.5, 2, DerivativeKind::Hansen, ctx).unwrap();
        let det = determinant(&hb).unwrap();
        let exact = Big::from_f64_in(1.0, ctx) / (Big::from_f64_in(72.0, ctx) * Big::from_f64_in(1.5, ctx).powi(6));
        assert!((det - exact).abs() < Big::from_decimal_in("1e-60", ctx).unwrap());
    }

    #[test]
    fn bareiss_pivots_on_zero() {
        let ctx = BigCtx::new(30);
        let b = |x: f64| Big::from_f64_in(x, ctx);
        let m = SymmetricMatrix::from_rows(
            vec![
                vec![b(0.0), b(1.0), b(2.0)],
                vec![b(1.0), b(0.0), b(3.0)],
                vec![b(2.0), b(3.0), b(0.0)],
            ],
            MatrixKind::Derived,
        )
        .unwrap();
        // 0 - 1·(0 - 6) + 2·(3 - 0)
        assert!((determinant(&m).unwrap().to_f64() - 12.0).abs() < 1e-25);
    }

    #[test]
    fn order_limit() {
        let big = SymmetricMatrix::<f64>::build(65, MatrixKind::Derived, crate::matrices::MatrixMeta::None, |_, _| {
            Ok(0.0)
        })
        .unwrap();
        assert!(eig_sym(&big).is_err());
    }
}
