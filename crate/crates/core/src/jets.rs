//! Truncated Taylor arithmetic ("jets") over the expression tree.
//!
//! A jet of order `K` at `t` stores `c_k = f^(k)(t)/k!` for `k = 0..=K`.
//! Jets are propagated bottom-up through the AST with the classical
//! power-series recurrences, so derivatives carry no truncation error.

use crate::error::{Error, Result};
use crate::expr::{Expr, Func, FunctionSpec, Interval};
use crate::scalar::{PrecisionCfg, Scalar};

pub use crate::scalar::PrecisionCfg as JetPrecision;

/// Truncated Taylor coefficients of a function at `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<S> {
    pub center: f64,
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `k!·c_k`.
    pub fn derivative(&self, k: usize) -> Option<S> {
        let c = self.coeffs.get(k)?;
        Some(c.clone() * c.cst(factorial(k)))
    }

    fn check_compatible(&self, other: &Jet<S>) -> Result<()> {
        if self.center != other.center || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::InvalidInput(format!(
                "jet arithmetic needs equal center and order ({} / {} vs {} / {})",
                self.center,
                self.order(),
                other.center,
                other.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet<S>) -> Result<Jet<S>> {
        self.check_compatible(other)?;
        Ok(Jet {
            center: self.center,
            coeffs: add(&self.coeffs, &other.coeffs),
        })
    }

    /// Product; the coefficients are the Cauchy convolution.
    pub fn mul(&self, other: &Jet<S>) -> Result<Jet<S>> {
        self.check_compatible(other)?;
        Ok(Jet {
            center: self.center,
            coeffs: mul(&self.coeffs, &other.coeffs),
        })
    }

    pub fn div(&self, other: &Jet<S>) -> Result<Jet<S>> {
        self.check_compatible(other)?;
        Ok(Jet {
            center: self.center,
            coeffs: div(&self.coeffs, &other.coeffs, self.center)?,
        })
    }

    pub fn to_f64(&self) -> Jet<f64> {
        Jet {
            center: self.center,
            coeffs: self.coeffs.iter().map(Scalar::to_f64).collect(),
        }
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// A function that can report Taylor coefficients at a point.
///
/// Implemented by parsed functions and by derived evaluators such as
/// `x ↦ [x, z, z]_f`.
pub trait SmoothFn: Sync {
    fn domain(&self) -> Interval;

    /// `c_0..=c_order` at `t`.
    fn taylor<S: Scalar>(&self, t: &S, order: usize) -> Result<Vec<S>>;

    fn describe(&self) -> String;
}

impl SmoothFn for FunctionSpec {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn taylor<S: Scalar>(&self, t: &S, order: usize) -> Result<Vec<S>> {
        Ok(jet_in(self, t, order)?.coeffs)
    }

    fn describe(&self) -> String {
        FunctionSpec::describe(self)
    }
}

impl<F: SmoothFn> SmoothFn for &F {
    fn domain(&self) -> Interval {
        (*self).domain()
    }
    fn taylor<S: Scalar>(&self, t: &S, order: usize) -> Result<Vec<S>> {
        (*self).taylor(t, order)
    }
    fn describe(&self) -> String {
        (*self).describe()
    }
}

/// Jet of `f` at `t` of the given order, converted to binary64.
pub fn jet_eval(f: &FunctionSpec, t: f64, order: usize, precision: PrecisionCfg) -> Result<Jet<f64>> {
    crate::with_precision!(precision, S, ctx => {
        let j: Jet<S> = jet_in(f, &S::from_f64_in(t, ctx), order)?;
        Ok(j.to_f64())
    })
}

/// `f^(k)(t)` computed from the jet.
pub fn derivative(f: &FunctionSpec, t: f64, k: usize, precision: PrecisionCfg) -> Result<f64> {
    crate::with_precision!(precision, S, ctx => {
        let j: Jet<S> = jet_in(f, &S::from_f64_in(t, ctx), k)?;
        Ok(j.derivative(k).map(|d| d.to_f64()).unwrap_or(f64::NAN))
    })
}

/// Generic jet evaluation honouring the derivative shift of `f`.
pub fn jet_in<S: Scalar>(f: &FunctionSpec, t: &S, order: usize) -> Result<Jet<S>> {
    let at = t.to_f64();
    if !f.domain.contains_closure(at) {
        return Err(Error::OutsideDomain {
            t: at,
            domain: f.domain.to_string(),
        });
    }
    let shift = f.deriv_shift as usize;
    let raw = ast_jet(&f.ast, t, order + shift)?;
    let coeffs: Vec<S> = if shift == 0 {
        raw
    } else {
        // g = f^(s): g^(k)/k! = c_{k+s}·(k+s)!/k!
        (0..=order)
            .map(|k| {
                let scale: f64 = ((k + 1)..=(k + shift)).map(|i| i as f64).product();
                raw[k + shift].clone() * t.cst(scale)
            })
            .collect()
    };
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Overflow { at });
    }
    Ok(Jet { center: at, coeffs })
}

fn constant<S: Scalar>(c: S, order: usize) -> Vec<S> {
    let zero = c.cst(0.0);
    let mut v = vec![zero; order + 1];
    v[0] = c;
    v
}

fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

fn mul<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    (0..a.len())
        .map(|k| {
            let mut acc = a[0].clone() * b[k].clone();
            for j in 1..=k {
                acc = acc + a[j].clone() * b[k - j].clone();
            }
            acc
        })
        .collect()
}

fn div<S: Scalar>(a: &[S], b: &[S], at: f64) -> Result<Vec<S>> {
    if b[0].is_zero() {
        return Err(Error::Singularity {
            what: "division by a quantity vanishing at the point".into(),
            at,
        });
    }
    let mut c: Vec<S> = Vec::with_capacity(a.len());
    for k in 0..a.len() {
        let mut acc = a[k].clone();
        for j in 1..=k {
            acc = acc - b[j].clone() * c[k - j].clone();
        }
        c.push(acc / b[0].clone());
    }
    Ok(c)
}

fn exp<S: Scalar>(a: &[S]) -> Vec<S> {
    let mut b: Vec<S> = Vec::with_capacity(a.len());
    b.push(a[0].exp());
    for k in 1..a.len() {
        let mut acc = a[1].clone() * b[k - 1].clone();
        for j in 2..=k {
            acc = acc + a[j].clone() * b[k - j].clone() * a[0].cst(j as f64);
        }
        b.push(acc / a[0].cst(k as f64));
    }
    b
}

fn ln<S: Scalar>(a: &[S], at: f64) -> Result<Vec<S>> {
    if a[0] <= a[0].cst(0.0) {
        return Err(Error::Domain {
            what: "log of a non-positive argument".into(),
            at,
        });
    }
    let mut b: Vec<S> = Vec::with_capacity(a.len());
    b.push(a[0].ln());
    for k in 1..a.len() {
        let mut acc = a[0].cst(0.0);
        for j in 1..k {
            acc = acc + b[j].clone() * a[k - j].clone() * a[0].cst(j as f64);
        }
        let bk = (a[k].clone() - acc / a[0].cst(k as f64)) / a[0].clone();
        b.push(bk);
    }
    Ok(b)
}

fn sqrt<S: Scalar>(a: &[S], at: f64) -> Result<Vec<S>> {
    let zero = a[0].cst(0.0);
    if a[0] < zero || (a[0].is_zero() && a.len() > 1) {
        if a[0].is_zero() {
            return Err(Error::Singularity {
                what: "sqrt is not differentiable at 0".into(),
                at,
            });
        }
        return Err(Error::Domain {
            what: "sqrt of a negative argument".into(),
            at,
        });
    }
    let mut b: Vec<S> = Vec::with_capacity(a.len());
    b.push(a[0].sqrt());
    for k in 1..a.len() {
        let mut acc = a[k].clone();
        for j in 1..k {
            acc = acc - b[j].clone() * b[k - j].clone();
        }
        b.push(acc / (b[0].clone() * a[0].cst(2.0)));
    }
    Ok(b)
}

fn powi<S: Scalar>(a: &[S], n: u64) -> Vec<S> {
    let mut base = a.to_vec();
    let mut acc = constant(a[0].cst(1.0), a.len() - 1);
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    acc
}

fn ast_jet<S: Scalar>(e: &Expr, t: &S, order: usize) -> Result<Vec<S>> {
    let at = t.to_f64();
    Ok(match e {
        Expr::Num(n) => {
            let c = S::from_decimal_in(&n.text, t.ctx()).unwrap_or_else(|| t.cst(n.value));
            constant(c, order)
        }
        Expr::Var => {
            let mut v = constant(t.clone(), order);
            if order >= 1 {
                v[1] = t.cst(1.0);
            }
            v
        }
        Expr::Neg(a) => ast_jet(a, t, order)?.into_iter().map(|x| -x).collect(),
        Expr::Add(a, b) => add(&ast_jet(a, t, order)?, &ast_jet(b, t, order)?),
        Expr::Sub(a, b) => sub(&ast_jet(a, t, order)?, &ast_jet(b, t, order)?),
        Expr::Mul(a, b) => mul(&ast_jet(a, t, order)?, &ast_jet(b, t, order)?),
        Expr::Div(a, b) => div(&ast_jet(a, t, order)?, &ast_jet(b, t, order)?, at)?,
        Expr::Call(Func::Exp, a) => {
            let r = exp(&ast_jet(a, t, order)?);
            if !r[0].is_finite() {
                return Err(Error::Overflow { at });
            }
            r
        }
        Expr::Call(Func::Log, a) => ln(&ast_jet(a, t, order)?, at)?,
        Expr::Call(Func::Sqrt, a) => sqrt(&ast_jet(a, t, order)?, at)?,
        Expr::Pow(base, exponent) => pow_jet(base, exponent, t, order)?,
    })
}

fn pow_jet<S: Scalar>(base: &Expr, exponent: &Expr, t: &S, order: usize) -> Result<Vec<S>> {
    let at = t.to_f64();
    if order > 0 && base.is_constant() && exponent.is_constant() {
        let mut c = pow_jet(base, exponent, t, 0)?;
        let zero = c[0].cst(0.0);
        c.resize(order + 1, zero);
        return Ok(c);
    }
    let a = ast_jet(base, t, order)?;
    let zero = a[0].cst(0.0);
    if exponent.is_constant() {
        let p = ast_jet(exponent, t, 0)?.swap_remove(0);
        let pf = p.to_f64();
        let integral = pf.is_finite() && pf.fract() == 0.0 && pf.abs() <= 4096.0 && p == p.cst(pf);
        if integral {
            let n = pf.abs() as u64;
            let r = powi(&a, n);
            return if pf >= 0.0 {
                Ok(r)
            } else {
                div(&constant(a[0].cst(1.0), order), &r, at)
            };
        }
        if a[0].is_zero() && order == 0 && p > zero {
            return Ok(vec![zero]);
        }
        if a[0] <= zero {
            return Err(Error::Domain {
                what: "non-integer power of a non-positive base".into(),
                at,
            });
        }
        let l = ln(&a, at)?;
        let scaled: Vec<S> = l.into_iter().map(|x| x * p.clone()).collect();
        return Ok(exp(&scaled));
    }
    if a[0] <= zero {
        return Err(Error::Domain {
            what: "variable power of a non-positive base".into(),
            at,
        });
    }
    let p = ast_jet(exponent, t, order)?;
    Ok(exp(&mul(&ln(&a, at)?, &p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, transform, TransformKind};
    use crate::scalar::{Big, BigCtx};

    const M: PrecisionCfg = PrecisionCfg::Machine;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn maclaurin_of_minus_log() {
        let f = parse("-log(1+t)").unwrap();
        let j = jet_eval(&f, 0.0, 4, M).unwrap();
        close(&j.coeffs, &[0.0, -1.0, 0.5, -1.0 / 3.0, 0.25], 1e-15);
    }

    #[test]
    fn maclaurin_of_exp() {
        let j = jet_eval(&parse("exp(t)").unwrap(), 0.0, 4, M).unwrap();
        close(&j.coeffs, &[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0], 1e-15);
    }

    #[test]
    fn counterexample_function_jet() {
        // f'' = 1 + 2t + (1+t)^-2, f''' = 2 - 2(1+t)^-3, f'''' = 6(1+t)^-4
        let f = parse("t + t^2/2 + t^3/3 - log(1+t)").unwrap();
        let j = jet_eval(&f, 0.0, 4, M).unwrap();
        close(&j.coeffs, &[0.0, 0.0, 1.0, 0.0, 0.25], 1e-15);
    }

    #[test]
    fn derivatives() {
        assert_eq!(derivative(&parse("t^3").unwrap(), 1.0, 2, M).unwrap(), 6.0);
        assert!((derivative(&parse("-log(1+t)").unwrap(), 0.0, 4, M).unwrap() - 6.0).abs() < 1e-13);
        assert_eq!(derivative(&parse("t").unwrap(), 0.5, 1, M).unwrap(), 1.0);
    }

    #[test]
    fn derivative_shift_moves_coefficients() {
        let f = transform(&parse("t^4").unwrap(), TransformKind::DerivShift(2)).unwrap();
        // 12 t^2 at t = 1: (12, 24, 12)
        let j = jet_eval(&f, 1.0, 2, M).unwrap();
        close(&j.coeffs, &[12.0, 24.0, 12.0], 1e-12);
    }

    #[test]
    fn powers() {
        let j = jet_eval(&parse("t + 0^1.5").unwrap(), 0.5, 2, M).unwrap();
        close(&j.coeffs, &[0.5, 1.0, 0.0], 0.0);
        let j = jet_eval(&parse("t^0.5").unwrap(), 4.0, 2, M).unwrap();
        close(&j.coeffs, &[2.0, 0.25, -1.0 / 64.0], 1e-15);
        let j = jet_eval(&parse("sqrt(t)").unwrap(), 4.0, 2, M).unwrap();
        close(&j.coeffs, &[2.0, 0.25, -1.0 / 64.0], 1e-15);
        let j = jet_eval(&parse("t^-1").unwrap(), 2.0, 2, M).unwrap();
        close(&j.coeffs, &[0.5, -0.25, 0.125], 1e-15);
        let j = jet_eval(&parse("(-t)^2").unwrap(), 3.0, 2, M).unwrap();
        close(&j.coeffs, &[9.0, 6.0, 1.0], 1e-15);
        let j = jet_eval(&parse("t^t").unwrap(), 1.0, 1, M).unwrap();
        close(&j.coeffs, &[1.0, 1.0], 1e-15);
        assert_eq!(jet_eval(&parse("t^0.5").unwrap(), 0.0, 0, M).unwrap().coeffs, vec![0.0]);
    }

    #[test]
    fn singularities_are_reported() {
        assert!(matches!(
            jet_eval(&parse("log(t)").unwrap(), 0.0, 0, M),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            jet_eval(&parse("1/t").unwrap(), 0.0, 0, M),
            Err(Error::Singularity { .. })
        ));
        assert!(matches!(
            jet_eval(&parse("t^0.5").unwrap(), -1.0, 0, M),
            Err(Error::Domain { .. })
        ));
        assert!(jet_eval(&parse("sqrt(t)").unwrap(), 0.0, 1, M).is_err());
        assert!(matches!(
            jet_eval(&parse("exp(exp(t))").unwrap(), 10.0, 0, M),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn outside_domain() {
        let f = parse("t").unwrap().with_domain(Interval::open(0.0, 1.0).unwrap());
        assert!(matches!(jet_eval(&f, 2.0, 0, M), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn big_precision_agrees_with_machine() {
        let f = parse("t + t^2/2 + t^3/3 - log(1+t)").unwrap();
        let m = jet_eval(&f, 0.3, 5, M).unwrap();
        let b = jet_eval(&f, 0.3, 5, PrecisionCfg::Big { digits: 40 }).unwrap();
        close(&m.coeffs, &b.coeffs, 1e-13);
    }

    #[test]
    fn jet_arithmetic_checks_compatibility() {
        let f = parse("t").unwrap();
        let a = jet_eval(&f, 0.0, 2, M).unwrap();
        let b = jet_eval(&f, 1.0, 2, M).unwrap();
        assert!(a.mul(&b).is_err());
        let c = jet_eval(&f, 0.0, 3, M).unwrap();
        assert!(a.add(&c).is_err());
        let sq = a.mul(&a).unwrap();
        close(&sq.coeffs, &[0.0, 0.0, 1.0], 0.0);
        assert!(sq.div(&a).is_err());
    }

    #[test]
    fn generic_big_jet_keeps_precision() {
        let ctx = BigCtx::new(60);
        let t = Big::from_f64_in(1e-9, ctx);
        let f = parse("log(1+t)/t").unwrap();
        let j = jet_in(&f, &t, 3).unwrap();
        // log(1+t)/t = 1 - t/2 + t^2/3 - t^3/4 + ..., the cubic coefficient at ~0
        assert!((j.coeffs[3].to_f64() + 0.25).abs() < 1e-8);
    }
}
