//! Scalar function expressions: parsing, intervals and the function
//! transforms (quotient by `t`, shifted quotient, rescaling, derivative shift).

mod ast;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::{Expr, Func, Number};
pub use parser::{parse_expr, MAX_DEPTH};

use crate::error::{Error, Result};
use crate::jets;
use crate::scalar::{PrecisionCfg, Scalar};

/// A real interval with independently open or closed endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<Interval> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidInput(format!("interval needs lo < hi, got {lo}, {hi}")));
        }
        Ok(Interval {
            lo,
            hi,
            lo_open: lo_open || lo.is_infinite(),
            hi_open: hi_open || hi.is_infinite(),
        })
    }

    pub fn open(lo: f64, hi: f64) -> Result<Interval> {
        Interval::new(lo, hi, true, true)
    }

    /// `[lo, hi)`.
    pub fn closed_open(lo: f64, hi: f64) -> Result<Interval> {
        Interval::new(lo, hi, false, true)
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Interval> {
        Interval::new(lo, hi, false, false)
    }

    pub fn real_line() -> Interval {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_open { t > self.lo } else { t >= self.lo };
        let below = if self.hi_open { t < self.hi } else { t <= self.hi };
        above && below
    }

    pub fn contains_closure(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    pub fn is_interior(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    /// Image under `t ↦ factor·t` for `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Interval {
        Interval {
            lo: self.lo * factor,
            hi: self.hi * factor,
            ..*self
        }
    }

    /// Parses `a,b`; the interval is open unless `closed_left` is set.
    pub fn parse(text: &str, closed_left: bool) -> Result<Interval> {
        let mut parts = text.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::InvalidInput(format!("interval `{text}` must look like `a,b`")));
        };
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad interval endpoint `{}`", s.trim())))?;
            if v.is_nan() {
                return Err(Error::InvalidInput("interval endpoint is NaN".into()));
            }
            Ok(v)
        };
        Interval::new(parse(a)?, parse(b)?, !closed_left, true)
    }
}

/// Parses a comma-separated list of finite reals such as `0.1, 0.5,1`.
pub fn parse_nodes(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("bad node `{}`", s.trim())))
        })
        .collect()
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            self.hi,
            if self.hi_open { ')' } else { ']' }
        )
    }
}

/// A parsed scalar function together with its interval of definition.
///
/// The represented function is the `deriv_shift`-th derivative of `ast`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub ast: Expr,
    pub domain: Interval,
    pub deriv_shift: u32,
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<FunctionSpec> {
        Ok(FunctionSpec {
            ast: parse_expr(text)?,
            domain: Interval::real_line(),
            deriv_shift: 0,
        })
    }

    pub fn parse_on(text: &str, domain: Interval) -> Result<FunctionSpec> {
        Ok(FunctionSpec::parse(text)?.with_domain(domain))
    }

    pub fn with_domain(mut self, domain: Interval) -> FunctionSpec {
        self.domain = domain;
        self
    }

    /// Source-like rendering, e.g. `D^1[t^2 + t]` for a derivative shift.
    pub fn describe(&self) -> String {
        if self.deriv_shift == 0 {
            self.ast.to_string()
        } else {
            format!("D^{}[{}]", self.deriv_shift, self.ast)
        }
    }

    /// Value at `t`, see [`evaluate`].
    pub fn eval(&self, t: f64, precision: PrecisionCfg) -> Result<f64> {
        evaluate(self, t, precision)
    }

    /// `t·f(t)` at the expression level.
    pub fn multiply_by_t(&self) -> Result<FunctionSpec> {
        if self.deriv_shift != 0 {
            return Err(Error::Transform("multiply_by_t needs deriv_shift = 0".into()));
        }
        Ok(FunctionSpec {
            ast: Expr::mul(Expr::Var, self.ast.clone()),
            domain: self.domain,
            deriv_shift: 0,
        })
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.describe(), self.domain)
    }
}

/// Parses text into a [`FunctionSpec`] defined on the whole real line.
pub fn parse(text: &str) -> Result<FunctionSpec> {
    FunctionSpec::parse(text)
}

/// Value of the represented function (including its derivative shift) at `t`.
pub fn evaluate(f: &FunctionSpec, t: f64, precision: PrecisionCfg) -> Result<f64> {
    crate::with_precision!(precision, S, ctx => {
        let v: S = evaluate_in(f, &S::from_f64_in(t, ctx))?;
        Ok(v.to_f64())
    })
}

/// Generic form of [`evaluate`] returning the full-precision value.
pub fn evaluate_in<S: Scalar>(f: &FunctionSpec, t: &S) -> Result<S> {
    let jet = jets::jet_in(f, t, 0)?;
    Ok(jet.coeffs[0].clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind {
    /// `f(t)/t` on the domain with its left endpoint 0 made open.
    DivideByT,
    /// `(f(t) - f(0))/t`.
    ShiftedDivide,
    /// `f∘h⁻¹` with `h(t) = (beta/alpha)·t`, defined on the image domain.
    Rescale { alpha: f64, beta: f64 },
    /// Adds `k` to the derivative shift.
    DerivShift(u32),
}

pub fn transform(f: &FunctionSpec, kind: TransformKind) -> Result<FunctionSpec> {
    match kind {
        TransformKind::DivideByT | TransformKind::ShiftedDivide => {
            if f.domain.lo != 0.0 {
                return Err(Error::Transform(format!(
                    "quotient by t needs 0 as the left endpoint, domain is {}",
                    f.domain
                )));
            }
            if f.deriv_shift != 0 {
                return Err(Error::Transform("quotient by t needs deriv_shift = 0".into()));
            }
            let numerator = match kind {
                TransformKind::DivideByT => f.ast.clone(),
                _ => Expr::sub(f.ast.clone(), f.ast.substitute(&Expr::num(0.0))),
            };
            Ok(FunctionSpec {
                ast: Expr::div(numerator, Expr::Var),
                domain: Interval {
                    lo_open: true,
                    ..f.domain
                },
                deriv_shift: 0,
            })
        }
        TransformKind::Rescale { alpha, beta } => {
            if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                return Err(Error::Transform(format!(
                    "rescale needs alpha, beta > 0, got {alpha}, {beta}"
                )));
            }
            // h⁻¹(s) = alpha·s/beta
            let inverse = Expr::div(Expr::mul(Expr::num(alpha), Expr::Var), Expr::num(beta));
            let mut ast = f.ast.substitute(&inverse);
            if f.deriv_shift > 0 {
                // the k-th derivative of f∘h⁻¹ carries a factor (alpha/beta)^k
                let ratio = Expr::div(Expr::num(beta), Expr::num(alpha));
                let factor = Expr::Pow(Box::new(ratio), Box::new(Expr::num(f.deriv_shift as f64)));
                ast = Expr::mul(factor, ast);
            }
            Ok(FunctionSpec {
                ast,
                domain: f.domain.scaled(beta / alpha),
                deriv_shift: f.deriv_shift,
            })
        }
        TransformKind::DerivShift(k) => Ok(FunctionSpec {
            deriv_shift: f.deriv_shift + k,
            ..f.clone()
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: PrecisionCfg = PrecisionCfg::Machine;

    #[test]
    fn parse_and_evaluate() {
        let f = parse("t").unwrap();
        assert_eq!(f.ast, Expr::Var);
        assert_eq!(parse("1 + 2*t").unwrap().eval(3.0, M).unwrap(), 7.0);
        assert_eq!(parse("-log(1+t)").unwrap().eval(0.0, M).unwrap(), 0.0);
        let e = parse("exp(t)").unwrap().eval(1.0, M).unwrap();
        assert!((e - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn theorem_counterexample_function_parses() {
        let f = parse("t + t^2/2 + t^3/3 - log(1+t)").unwrap();
        let t: f64 = 0.3;
        let expected = t + t * t / 2.0 + t.powi(3) / 3.0 - (1.0 + t).ln();
        assert!((f.eval(t, M).unwrap() - expected).abs() < 1e-15);
        let shifted = transform(&f, TransformKind::DerivShift(2)).unwrap();
        // f'' = 1 + 2t + 1/(1+t)^2
        assert!((shifted.eval(0.0, M).unwrap() - 2.0).abs() < 1e-14);
        assert!((shifted.eval(t, M).unwrap() - (1.0 + 2.0 * t + 1.0 / (1.0 + t).powi(2))).abs() < 1e-13);
    }

    #[test]
    fn divide_by_t() {
        let f = parse("t^2")
            .unwrap()
            .with_domain(Interval::closed_open(0.0, 1.0).unwrap());
        let g = transform(&f, TransformKind::DivideByT).unwrap();
        assert!(g.domain.lo_open);
        for t in [0.1, 0.5, 0.9] {
            assert!((g.eval(t, M).unwrap() - t).abs() < 1e-15);
        }
        assert!(g.eval(0.0, M).is_err());

        let f = parse("t + t^2/2 + t^3/3 - log(1+t)")
            .unwrap()
            .with_domain(Interval::closed_open(0.0, 1.0).unwrap());
        let g = transform(&f, TransformKind::DivideByT).unwrap();
        let t: f64 = 0.4;
        let expected = 1.0 + t / 2.0 + t * t / 3.0 - (1.0 + t).ln() / t;
        assert!((g.eval(t, M).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn shifted_divide_subtracts_value_at_zero() {
        let f = parse("t^2 + t + 3")
            .unwrap()
            .with_domain(Interval::closed_open(0.0, 2.0).unwrap());
        let g = transform(&f, TransformKind::ShiftedDivide).unwrap();
        assert!((g.eval(0.5, M).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn quotient_requires_zero_endpoint() {
        let f = parse("t").unwrap().with_domain(Interval::open(1.0, 2.0).unwrap());
        assert!(matches!(
            transform(&f, TransformKind::DivideByT),
            Err(Error::Transform(_))
        ));
        let f = parse("t").unwrap();
        assert!(transform(&f, TransformKind::ShiftedDivide).is_err());
    }

    #[test]
    fn rescale_is_composition_with_inverse_map() {
        let f = parse("t + t^2/2 + t^3/3 + t^4/4 + t^5/5")
            .unwrap()
            .with_domain(Interval::closed(0.0, 0.17).unwrap());
        let g = transform(&f, TransformKind::Rescale { alpha: 0.17, beta: 1.0 }).unwrap();
        assert_eq!(g.domain.hi, 1.0);
        for s in [0.0, 0.25, 0.5, 0.99] {
            let lhs = g.eval(s, M).unwrap();
            let rhs = f.eval(0.17 * s, M).unwrap();
            assert!((lhs - rhs).abs() < 1e-15, "{s}");
        }
        assert!(transform(&f, TransformKind::Rescale { alpha: -1.0, beta: 1.0 }).is_err());
    }

    #[test]
    fn rescale_respects_derivative_shift() {
        let f = transform(&parse("t^3").unwrap(), TransformKind::DerivShift(1)).unwrap();
        let g = transform(&f, TransformKind::Rescale { alpha: 2.0, beta: 1.0 }).unwrap();
        // f = 3t^2, so g(s) = f(2s) = 12 s^2
        assert!((g.eval(0.5, M).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn node_lists() {
        assert_eq!(parse_nodes("0.1, 0.5,1").unwrap(), vec![0.1, 0.5, 1.0]);
        assert!(parse_nodes("0.1,x").is_err());
        assert!(parse_nodes("inf").is_err());
    }

    #[test]
    fn interval_parsing() {
        let i = Interval::parse("0,1", false).unwrap();
        assert!(i.lo_open && i.hi_open);
        let i = Interval::parse(" 0 , 0.17", true).unwrap();
        assert!(!i.lo_open && i.hi_open);
        assert_eq!(i.to_string(), "[0, 0.17)");
        assert!(Interval::parse("1,0", false).is_err());
        assert!(Interval::parse("1", false).is_err());
        assert!(Interval::parse("a,b", false).is_err());
        assert!(Interval::parse("0,1,2", false).is_err());
    }
}
