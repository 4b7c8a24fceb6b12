//! Dense symmetric matrices and the builders for every matrix the
//! positivity criteria use.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::divided::{JetCache, NodeSet};
use crate::error::{Error, Result};
use crate::jets::SmoothFn;
use crate::scalar::{PrecisionCfg, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Loewner,
    Kraus,
    Dobsch,
    Hansen,
    Cauchy,
    IndexSum,
    Derived,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Loewner => "loewner",
            MatrixKind::Kraus => "kraus",
            MatrixKind::Dobsch => "dobsch",
            MatrixKind::Hansen => "hansen",
            MatrixKind::Cauchy => "cauchy",
            MatrixKind::IndexSum => "index_sum",
            MatrixKind::Derived => "derived",
        }
    }
}

/// Hankel-type derivative matrices at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeKind {
    /// `f^(i+j-1)(t)/(i+j-1)!`
    Dobsch,
    /// `f^(i+j)(t)/(i+j)!`
    Hansen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialKind {
    /// `1/(i+j)`
    Cauchy,
    /// `i+j`
    IndexSum,
}

/// Where a matrix came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MatrixMeta {
    None,
    Nodes { nodes: Vec<f64>, base: Option<f64> },
    Point { t: f64 },
}

impl MatrixMeta {
    fn csv_field(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";");
        match self {
            MatrixMeta::None => String::new(),
            MatrixMeta::Nodes { nodes, base: None } => format!("nodes={}", list(nodes)),
            MatrixMeta::Nodes { nodes, base: Some(b) } => format!("base={b:e};nodes={}", list(nodes)),
            MatrixMeta::Point { t } => format!("t={t:e}"),
        }
    }
}

/// Dense real symmetric matrix, row-major, stored in full.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix<S> {
    order: usize,
    data: Vec<S>,
    pub kind: MatrixKind,
    pub meta: MatrixMeta,
}

impl<S: Scalar> SymmetricMatrix<S> {
    /// Fills the upper triangle from `entry(i, j)` (0-based, `i <= j`) and mirrors it.
    pub fn build(
        order: usize,
        kind: MatrixKind,
        meta: MatrixMeta,
        mut entry: impl FnMut(usize, usize) -> Result<S>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("matrix order must be at least 1".into()));
        }
        let mut upper: Vec<Option<S>> = vec![None; order * order];
        for i in 0..order {
            for j in i..order {
                upper[i * order + j] = Some(entry(i, j)?);
            }
        }
        let data = (0..order * order)
            .map(|k| {
                let (i, j) = (k / order, k % order);
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                upper[a * order + b].clone().expect("upper triangle filled")
            })
            .collect();
        Ok(SymmetricMatrix {
            order,
            data,
            kind,
            meta,
        })
    }

    /// From explicit rows; the rows must be exactly symmetric.
    pub fn from_rows(rows: Vec<Vec<S>>, kind: MatrixKind) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        for r in &rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: r.len(),
                });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidInput(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(SymmetricMatrix {
            order: n,
            data: rows.into_iter().flatten().collect(),
            kind,
            meta: MatrixMeta::None,
        })
    }

    /// `(M + Mᵀ)/2` of a general square matrix given by rows.
    pub fn symmetrized(rows: &[Vec<S>], kind: MatrixKind) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(
                "symmetrization needs a non-empty square matrix".into(),
            ));
        }
        SymmetricMatrix::build(n, kind, MatrixMeta::None, |i, j| {
            let half = rows[i][j].cst(0.5);
            Ok((rows[i][j].clone() + rows[j][i].clone()) * half)
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.order + j]
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    pub fn to_f64(&self) -> SymmetricMatrix<f64> {
        SymmetricMatrix {
            order: self.order,
            data: self.data.iter().map(Scalar::to_f64).collect(),
            kind: self.kind,
            meta: self.meta.clone(),
        }
    }

    /// Same entries in another scalar type, through binary64.
    pub fn lift<T: Scalar>(&self, ctx: T::Ctx) -> SymmetricMatrix<T> {
        SymmetricMatrix {
            order: self.order,
            data: self.data.iter().map(|x| T::from_f64_in(x.to_f64(), ctx)).collect(),
            kind: self.kind,
            meta: self.meta.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> SymmetricMatrix<S> {
        SymmetricMatrix {
            order: self.order,
            data: self.data.iter().map(f).collect(),
            kind: self.kind,
            meta: self.meta.clone(),
        }
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        self.data.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SymmetricMatrix<S>) -> Result<f64> {
        if self.order != other.order {
            return Err(Error::DimensionMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).to_f64().abs())
            .fold(0.0, f64::max))
    }

    /// CSV dump: a `kind,order,meta` header line, then one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{},{}\n", self.kind.name(), self.order, self.meta.csv_field());
        for row in self.data.chunks(self.order) {
            let line: Vec<String> = row.iter().map(Scalar::to_sci_string).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

fn nodes_meta(nodes: &[f64], base: Option<f64>) -> MatrixMeta {
    MatrixMeta::Nodes {
        nodes: nodes.to_vec(),
        base,
    }
}

/// `([t_i, t_j]_f)`; the diagonal holds `f'(t_i)`.
pub fn loewner_in<S: Scalar, F: SmoothFn>(f: &F, nodes: &[f64], ctx: S::Ctx) -> Result<SymmetricMatrix<S>> {
    let mut cache = JetCache::<F, S>::new(f, ctx);
    SymmetricMatrix::build(nodes.len(), MatrixKind::Loewner, nodes_meta(nodes, None), |i, j| {
        cache.divdiff(&[nodes[i], nodes[j]])
    })
}

/// `([base, t_i, t_j]_f)`.
pub fn kraus_in<S: Scalar, F: SmoothFn>(f: &F, base: f64, nodes: &[f64], ctx: S::Ctx) -> Result<SymmetricMatrix<S>> {
    let mut cache = JetCache::<F, S>::new(f, ctx);
    SymmetricMatrix::build(nodes.len(), MatrixKind::Kraus, nodes_meta(nodes, Some(base)), |i, j| {
        cache.divdiff(&[base, nodes[i], nodes[j]])
    })
}

pub fn derivative_matrix_in<S: Scalar, F: SmoothFn>(
    f: &F,
    t: f64,
    n: usize,
    kind: DerivativeKind,
    ctx: S::Ctx,
) -> Result<SymmetricMatrix<S>> {
    if n == 0 {
        return Err(Error::InvalidInput("matrix order must be at least 1".into()));
    }
    let (offset, mk) = match kind {
        DerivativeKind::Dobsch => (1, MatrixKind::Dobsch),
        DerivativeKind::Hansen => (2, MatrixKind::Hansen),
    };
    // with 1-based i, j the entry index is i + j - 1 (dobsch) or i + j (hansen)
    let order = 2 * n - 2 + offset;
    let c = f.taylor(&S::from_f64_in(t, ctx), order)?;
    SymmetricMatrix::build(n, mk, MatrixMeta::Point { t }, |i, j| Ok(c[i + j + offset].clone()))
}

pub fn special_in<S: Scalar>(kind: SpecialKind, n: usize, ctx: S::Ctx) -> Result<SymmetricMatrix<S>> {
    let mk = match kind {
        SpecialKind::Cauchy => MatrixKind::Cauchy,
        SpecialKind::IndexSum => MatrixKind::IndexSum,
    };
    SymmetricMatrix::build(n, mk, MatrixMeta::None, |i, j| {
        let s = S::from_f64_in((i + j + 2) as f64, ctx);
        Ok(match kind {
            SpecialKind::Cauchy => S::one_in(ctx) / s,
            SpecialKind::IndexSum => s,
        })
    })
}

/// Entrywise product.
pub fn hadamard<S: Scalar>(a: &SymmetricMatrix<S>, b: &SymmetricMatrix<S>) -> Result<SymmetricMatrix<S>> {
    if a.order != b.order {
        return Err(Error::DimensionMismatch {
            left: a.order,
            right: b.order,
        });
    }
    SymmetricMatrix::build(a.order, MatrixKind::Derived, MatrixMeta::None, |i, j| {
        Ok(a.get(i, j).clone() * b.get(i, j).clone())
    })
}

/// `d_ij = b_ij + b_{i+1,j+1} - b_{i,j+1} - b_{i+1,j}`, the form of `B` on
/// the zero-sum hyperplane in the basis `e_i - e_{i+1}`.
pub fn d_reduce<S: Scalar>(b: &SymmetricMatrix<S>) -> Result<SymmetricMatrix<S>> {
    if b.order < 2 {
        return Err(Error::InvalidInput("d-reduction needs order >= 2".into()));
    }
    SymmetricMatrix::build(b.order - 1, MatrixKind::Derived, b.meta.clone(), |i, j| {
        Ok(b.get(i, j).clone() + b.get(i + 1, j + 1).clone() - b.get(i, j + 1).clone() - b.get(i + 1, j).clone())
    })
}

pub fn loewner_matrix<F: SmoothFn>(f: &F, nodes: &NodeSet, precision: PrecisionCfg) -> Result<SymmetricMatrix<f64>> {
    crate::with_precision!(precision, S, ctx => Ok(loewner_in::<S, F>(f, nodes.as_slice(), ctx)?.to_f64()))
}

pub fn kraus_matrix<F: SmoothFn>(
    f: &F,
    base: f64,
    nodes: &NodeSet,
    precision: PrecisionCfg,
) -> Result<SymmetricMatrix<f64>> {
    if !f.domain().contains_closure(base) {
        return Err(Error::OutsideDomain {
            t: base,
            domain: f.domain().to_string(),
        });
    }
    crate::with_precision!(precision, S, ctx => Ok(kraus_in::<S, F>(f, base, nodes.as_slice(), ctx)?.to_f64()))
}

pub fn derivative_matrix<F: SmoothFn>(
    f: &F,
    t: f64,
    n: usize,
    kind: DerivativeKind,
    precision: PrecisionCfg,
) -> Result<SymmetricMatrix<f64>> {
    crate::with_precision!(precision, S, ctx => Ok(derivative_matrix_in::<S, F>(f, t, n, kind, ctx)?.to_f64()))
}

pub fn special_matrix(kind: SpecialKind, n: usize) -> Result<SymmetricMatrix<f64>> {
    special_in::<f64>(kind, n, ())
}
