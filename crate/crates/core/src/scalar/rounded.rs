use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{Big, BigCtx, PrecisionCfg, Scalar};

/// Decimal arithmetic with 10 significant digits: every operation and
/// function call is carried out exactly (or to 40 digits for transcendental
/// functions) on the decimal operands and rounded to nearest, ties to even.
/// The value is stored as the binary64 number nearest to the decimal.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct Rounded10(f64);

const DIGITS: usize = 10;
const WORK_DIGITS: u32 = 40;

fn work_ctx() -> BigCtx {
    BigCtx::new(WORK_DIGITS)
}

fn decimal(x: f64) -> String {
    format!("{:.*e}", DIGITS - 1, x)
}

fn to_big(x: f64) -> Big {
    Big::from_decimal_in(&decimal(x), work_ctx()).expect("formatted decimal parses")
}

fn from_big(b: &Big) -> Rounded10 {
    if !b.is_finite() {
        return Rounded10(b.to_f64());
    }
    Rounded10(b.to_sci_rounded(DIGITS).parse().unwrap_or_else(|_| b.to_f64()))
}

fn lift(x: f64, op: impl Fn(Big) -> Big) -> Rounded10 {
    if !x.is_finite() {
        return Rounded10(op(Big::from_f64_in(x, work_ctx())).to_f64());
    }
    from_big(&op(to_big(x)))
}

fn lift2(a: f64, b: f64, op: impl Fn(Big, Big) -> Big) -> Rounded10 {
    if !(a.is_finite() && b.is_finite()) {
        let c = work_ctx();
        return Rounded10(op(Big::from_f64_in(a, c), Big::from_f64_in(b, c)).to_f64());
    }
    from_big(&op(to_big(a), to_big(b)))
}

impl Rounded10 {
    pub fn new(x: f64) -> Self {
        if !x.is_finite() || x == 0.0 {
            return Rounded10(x);
        }
        Rounded10(decimal(x).parse().unwrap_or(x))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Debug for Rounded10 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rounded10({})", decimal(self.0))
    }
}

macro_rules! rounded_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Rounded10 {
            type Output = Rounded10;
            fn $m(self, rhs: Rounded10) -> Rounded10 {
                lift2(self.0, rhs.0, |a, b| a $op b)
            }
        }
    };
}

rounded_binop!(Add, add, +);
rounded_binop!(Sub, sub, -);
rounded_binop!(Mul, mul, *);
rounded_binop!(Div, div, /);

impl Neg for Rounded10 {
    type Output = Rounded10;
    fn neg(self) -> Rounded10 {
        Rounded10(-self.0)
    }
}

impl Scalar for Rounded10 {
    type Ctx = ();
    const MACHINE: bool = false;

    fn from_f64_in(x: f64, _: ()) -> Self {
        Rounded10::new(x)
    }
    fn from_decimal_in(text: &str, _: ()) -> Option<Self> {
        text.parse::<f64>().ok().map(Rounded10::new)
    }
    fn ctx(&self) {}
    fn precision(_: ()) -> PrecisionCfg {
        PrecisionCfg::Rounded10
    }
    fn unit_roundoff(_: ()) -> f64 {
        5e-10
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn to_sci_string(&self) -> String {
        format!("{:.*e}", DIGITS - 1, self.0)
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn ln(&self) -> Self {
        if self.0 <= 0.0 {
            return Rounded10(self.0.ln());
        }
        lift(self.0, |b| b.ln())
    }
    fn exp(&self) -> Self {
        lift(self.0, |b| b.exp())
    }
    fn sqrt(&self) -> Self {
        if self.0 < 0.0 {
            return Rounded10(f64::NAN);
        }
        lift(self.0, |b| b.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_operation_rounds() {
        let a = Rounded10::new(1.0);
        let b = Rounded10::new(1e-12);
        assert_eq!((a + b).value(), 1.0);
        let third = Rounded10::new(1.0) / Rounded10::new(3.0);
        assert_eq!(third.value(), 0.3333333333);
        assert_eq!(Rounded10::new(1.000000001).value(), 1.000000001);
        // ln(1.000000001) = 9.999999995000000003e-10
        let l = (Rounded10::new(1.0) + Rounded10::new(1e-9)).ln();
        assert_eq!(l.value(), 9.999999995e-10);
        let d = Rounded10::new(3.6e-8) - Rounded10::new(3.599999998e-8);
        assert_eq!(d.value(), 2e-17);
        assert_eq!(
            Rounded10::new(2.0).sqrt().value(),
            "1.414213562".parse::<f64>().unwrap()
        );
    }
}
