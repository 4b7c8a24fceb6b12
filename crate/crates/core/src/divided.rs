//! Divided differences with repeated (confluent) nodes.
//!
//! Nodes are sorted ascending and clustered: nodes closer than the
//! confluence threshold of the working precision collapse onto their mean,
//! and the Newton table takes the entries of a cluster of size `m` from the
//! Taylor coefficients `f^(j)/j!`, `j < m`, at that point.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::Interval;
use crate::jets::SmoothFn;
use crate::scalar::{PrecisionCfg, Scalar};

/// An ordered tuple of nodes; repeats are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    nodes: Vec<f64>,
}

impl NodeSet {
    /// Checks every node against the closure of `domain`.
    pub fn new(nodes: Vec<f64>, domain: &Interval) -> Result<NodeSet> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("a node set needs at least one node".into()));
        }
        for &t in &nodes {
            if !t.is_finite() || !domain.contains_closure(t) {
                return Err(Error::OutsideDomain {
                    t,
                    domain: domain.to_string(),
                });
            }
        }
        Ok(NodeSet { nodes })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Memoised Taylor coefficients of one function, keyed by the exact node value.
pub struct JetCache<'f, F: SmoothFn, S: Scalar> {
    f: &'f F,
    ctx: S::Ctx,
    threshold: f64,
    map: HashMap<u64, Vec<S>>,
}

impl<'f, F: SmoothFn, S: Scalar> JetCache<'f, F, S> {
    pub fn new(f: &'f F, ctx: S::Ctx) -> Self {
        JetCache {
            f,
            ctx,
            threshold: S::precision(ctx).confluence_threshold(),
            map: HashMap::new(),
        }
    }

    pub fn ctx(&self) -> S::Ctx {
        self.ctx
    }

    pub fn function(&self) -> &'f F {
        self.f
    }

    fn coeffs(&mut self, t: f64, order: usize) -> Result<&[S]> {
        let key = t.to_bits();
        let fresh = self.map.get(&key).is_none_or(|v| v.len() <= order);
        if fresh {
            let c = self.f.taylor(&S::from_f64_in(t, self.ctx), order)?;
            self.map.insert(key, c);
        }
        Ok(&self.map[&key][..=order])
    }

    /// `[t_1, …, t_m]_f`.
    pub fn divdiff(&mut self, nodes: &[f64]) -> Result<S> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("divided difference of zero nodes".into()));
        }
        let mut sorted = nodes.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));

        // clusters of confluent nodes: (representative, multiplicity)
        let mut clusters: Vec<(f64, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=sorted.len() {
            let split =
                i == sorted.len() || (sorted[i] - sorted[start]).abs() >= self.threshold * sorted[start].abs().max(1.0);
            if split {
                let group = &sorted[start..i];
                let rep = if group.iter().all(|&x| x == group[0]) {
                    group[0]
                } else {
                    group.iter().sum::<f64>() / group.len() as f64
                };
                clusters.push((rep, i - start));
                start = i;
            }
        }

        let mut z: Vec<S> = Vec::with_capacity(sorted.len());
        let mut owner: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut taylor: Vec<Vec<S>> = Vec::with_capacity(clusters.len());
        for (ci, &(rep, mult)) in clusters.iter().enumerate() {
            taylor.push(self.coeffs(rep, mult - 1)?.to_vec());
            let zr = S::from_f64_in(rep, self.ctx);
            for _ in 0..mult {
                z.push(zr.clone());
                owner.push(ci);
            }
        }

        let m = z.len();
        let mut q: Vec<S> = owner.iter().map(|&c| taylor[c][0].clone()).collect();
        for j in 1..m {
            for i in (j..m).rev() {
                q[i] = if owner[i] == owner[i - j] {
                    taylor[owner[i]][j].clone()
                } else {
                    (q[i].clone() - q[i - 1].clone()) / (z[i].clone() - z[i - j].clone())
                };
            }
        }
        Ok(q.pop().expect("non-empty table"))
    }
}

/// `[t_1, …, t_m]_f` at the requested precision, returned as binary64.
pub fn divdiff<F: SmoothFn>(f: &F, nodes: &NodeSet, precision: PrecisionCfg) -> Result<f64> {
    crate::with_precision!(precision, S, ctx => {
        let v: S = divdiff_in(f, nodes.as_slice(), ctx)?;
        Ok(v.to_f64())
    })
}

pub fn divdiff_in<S: Scalar, F: SmoothFn>(f: &F, nodes: &[f64], ctx: S::Ctx) -> Result<S> {
    JetCache::<F, S>::new(f, ctx).divdiff(nodes)
}

/// The function `x ↦ [x, z, z]_f`.
///
/// Its Taylor coefficients at `x` are `[x, …, x, z, z]_f` with `x`
/// repeated `k + 1` times, so it can be fed to every matrix builder.
#[derive(Debug, Clone)]
pub struct SecondDivDiff<F> {
    f: F,
    z: f64,
}

impl<F: SmoothFn> SecondDivDiff<F> {
    pub fn z(&self) -> f64 {
        self.z
    }
}

/// Evaluator for `x ↦ [x, z, z]_f`; `z` must be interior to the domain of `f`.
pub fn second_divdiff_fn<F: SmoothFn>(f: F, z: f64) -> Result<SecondDivDiff<F>> {
    let domain = f.domain();
    if !domain.is_interior(z) {
        return Err(Error::OutsideDomain {
            t: z,
            domain: domain.to_string(),
        });
    }
    Ok(SecondDivDiff { f, z })
}

impl<F: SmoothFn> SmoothFn for SecondDivDiff<F> {
    fn domain(&self) -> Interval {
        self.f.domain()
    }

    fn taylor<S: Scalar>(&self, x: &S, order: usize) -> Result<Vec<S>> {
        let xf = x.to_f64();
        let mut cache = JetCache::<F, S>::new(&self.f, x.ctx());
        let mut nodes = vec![self.z, self.z];
        (0..=order)
            .map(|_| {
                nodes.push(xf);
                cache.divdiff(&nodes)
            })
            .collect()
    }

    fn describe(&self) -> String {
        format!("x -> [x, {z}, {z}] of {}", self.f.describe(), z = self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    const M: PrecisionCfg = PrecisionCfg::Machine;

    fn dd(f: &str, nodes: &[f64]) -> f64 {
        let f = parse(f).unwrap();
        divdiff(&f, &NodeSet::new(nodes.to_vec(), &f.domain).unwrap(), M).unwrap()
    }

    /// Textbook recursion on distinct nodes.
    fn brute(f: &dyn Fn(f64) -> f64, t: &[f64]) -> f64 {
        if t.len() == 1 {
            return f(t[0]);
        }
        let n = t.len();
        (brute(f, &t[..n - 1]) - brute(f, &t[1..])) / (t[0] - t[n - 1])
    }

    #[test]
    fn examples() {
        assert!((dd("t^2", &[1.0, 3.0]) - 4.0).abs() < 1e-14);
        let cube = |x: f64| x.powi(3);
        assert_eq!(brute(&cube, &[1.0, 2.0]), 7.0);
        assert_eq!(brute(&cube, &[2.0, 3.0]), 19.0);
        assert!((dd("t^3", &[1.0, 2.0, 3.0]) - brute(&cube, &[1.0, 2.0, 3.0])).abs() < 1e-14);
        assert!((dd("t^3", &[1.0, 2.0, 3.0]) - 6.0).abs() < 1e-14);
        assert!((dd("t^3", &[1.0, 1.0, 1.0]) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_confluence() {
        // [1,1,2]_{t^3} = ([1,2] - f'(1)) / (2 - 1) = 7 - 3
        assert!((dd("t^3", &[1.0, 2.0, 1.0]) - 4.0).abs() < 1e-14);
        // nearly equal nodes are snapped
        assert!((dd("t^3", &[1.0, 1.0 + 1e-9]) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn empty_and_out_of_domain() {
        let f = parse("log(t)").unwrap().with_domain(Interval::open(0.0, 1.0).unwrap());
        assert!(NodeSet::new(vec![], &f.domain).is_err());
        assert!(NodeSet::new(vec![2.0], &f.domain).is_err());
        let nodes = NodeSet::new(vec![0.0, 0.5], &f.domain).unwrap();
        assert!(divdiff(&f, &nodes, M).is_err());
    }

    #[test]
    fn second_divided_difference_evaluator() {
        let sq = parse("t^2").unwrap();
        let h = second_divdiff_fn(&sq, 0.7).unwrap();
        for x in [0.1, 0.7, 2.0] {
            let v = h.taylor(&x, 0).unwrap()[0];
            assert!((v - 1.0).abs() < 1e-12);
        }
        let cube = parse("t^3").unwrap();
        let h = second_divdiff_fn(&cube, 1.0).unwrap();
        for i in 0..20 {
            let x = -2.0 + 0.23 * i as f64;
            let cube_fn = |s: f64| s.powi(3);
            let expected = if (x - 1.0f64).abs() < 1e-12 {
                3.0
            } else {
                // brute force via [x,1] and f'(1)
                ((brute(&cube_fn, &[x, 1.0]) - 3.0) / (x - 1.0)).max(f64::MIN)
            };
            let v = h.taylor(&x, 1).unwrap();
            assert!((v[0] - expected).abs() < 1e-12, "{x}");
            assert!((v[0] - (x + 2.0)).abs() < 1e-12);
            assert!((v[1] - 1.0).abs() < 1e-10, "derivative of x + 2 at {x}: {}", v[1]);
        }
        // at x = z the evaluator returns f''(z)/2
        assert!((h.taylor(&1.0, 0).unwrap()[0] - 3.0).abs() < 1e-14);
        let lin = parse("t").unwrap();
        let h = second_divdiff_fn(&lin, 0.3).unwrap();
        assert!(h.taylor(&0.9, 0).unwrap()[0].abs() < 1e-15);
        let bounded = parse("t").unwrap().with_domain(Interval::open(0.0, 1.0).unwrap());
        assert!(second_divdiff_fn(&bounded, 1.0).is_err());
    }
}
