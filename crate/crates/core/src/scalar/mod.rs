//! Scalar types the numerical kernels are generic over.
//!
//! Three backends exist: IEEE binary64 (`f64`), a software float with a
//! configurable number of decimal digits ([`Big`]), and a binary64 value
//! that is rounded to ten significant decimal digits after every operation
//! ([`Rounded10`]). The last one only exists to study how fixed-digit
//! evaluation of cancelling formulas goes wrong.

mod big;
mod rounded;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use big::{Big, BigCtx, GUARD_DIGITS};
pub use rounded::Rounded10;

use crate::error::{Error, Result};

/// Default number of decimal digits for the software float.
pub const DEFAULT_BIG_DIGITS: u32 = 60;
/// Smallest accepted digit count for the software float.
pub const MIN_BIG_DIGITS: u32 = 20;

/// Working precision of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PrecisionCfg {
    /// IEEE binary64.
    #[default]
    Machine,
    /// Software float carrying `digits` significant decimal digits.
    Big { digits: u32 },
    /// Decimal arithmetic rounded to 10 significant digits after every operation.
    Rounded10,
}

impl PrecisionCfg {
    pub fn big(digits: u32) -> Result<Self> {
        if digits < MIN_BIG_DIGITS {
            return Err(Error::InvalidInput(format!(
                "big precision needs at least {MIN_BIG_DIGITS} digits, got {digits}"
            )));
        }
        Ok(PrecisionCfg::Big { digits })
    }

    /// Big precision with the default digit count, honouring `LOEWNER_LAB_DIGITS`.
    pub fn default_big() -> Self {
        let digits = std::env::var("LOEWNER_LAB_DIGITS")
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&d| d >= MIN_BIG_DIGITS)
            .unwrap_or(DEFAULT_BIG_DIGITS);
        PrecisionCfg::Big { digits }
    }

    /// Relative tolerance used by PSD verdicts at this precision.
    pub fn default_tol_rel(&self) -> f64 {
        match *self {
            PrecisionCfg::Machine => 1e-9,
            PrecisionCfg::Big { digits } => 10f64.powi(-(digits as i32) + 10),
            PrecisionCfg::Rounded10 => 1e-5,
        }
    }

    /// Nodes closer than this (relative to `max(1, |t|)`) are treated as equal.
    pub fn confluence_threshold(&self) -> f64 {
        match *self {
            PrecisionCfg::Machine => 1e-6,
            PrecisionCfg::Big { digits } => 10f64.powf(-(digits as f64) / 2.0),
            PrecisionCfg::Rounded10 => 1e-5,
        }
    }

    pub fn is_big(&self) -> bool {
        matches!(self, PrecisionCfg::Big { .. })
    }
}

impl fmt::Display for PrecisionCfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecisionCfg::Machine => write!(f, "machine"),
            PrecisionCfg::Big { digits } => write!(f, "big({digits})"),
            PrecisionCfg::Rounded10 => write!(f, "rounded(10)"),
        }
    }
}

/// A real number type usable by the jet, divided-difference, matrix and
/// eigenvalue kernels.
///
/// Constants are created either from a context (`from_f64_in`) or from an
/// existing value (`cst`), which keeps the working precision of the
/// software float attached to the data instead of to global state.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Ctx: Copy + fmt::Debug + Send + Sync;

    /// `true` for IEEE binary64.
    const MACHINE: bool;

    fn from_f64_in(x: f64, ctx: Self::Ctx) -> Self;
    /// Parses a decimal literal at full working precision.
    fn from_decimal_in(text: &str, ctx: Self::Ctx) -> Option<Self>;
    fn ctx(&self) -> Self::Ctx;
    fn precision(ctx: Self::Ctx) -> PrecisionCfg;
    /// Unit roundoff of the working precision.
    fn unit_roundoff(ctx: Self::Ctx) -> f64;

    fn to_f64(&self) -> f64;
    fn to_sci_string(&self) -> String;
    fn is_finite(&self) -> bool;

    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;

    fn cst(&self, x: f64) -> Self {
        Self::from_f64_in(x, self.ctx())
    }

    fn zero_in(ctx: Self::Ctx) -> Self {
        Self::from_f64_in(0.0, ctx)
    }

    fn one_in(ctx: Self::Ctx) -> Self {
        Self::from_f64_in(1.0, ctx)
    }

    fn is_zero(&self) -> bool {
        self.to_f64() == 0.0 && *self == self.cst(0.0)
    }

    fn abs(&self) -> Self {
        if *self < self.cst(0.0) {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// `self^n` by repeated squaring.
    fn powi(&self, n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.cst(1.0);
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for f64 {
    type Ctx = ();
    const MACHINE: bool = true;

    fn from_f64_in(x: f64, _: ()) -> Self {
        x
    }
    fn from_decimal_in(text: &str, _: ()) -> Option<Self> {
        text.parse().ok()
    }
    fn ctx(&self) {}
    fn precision(_: ()) -> PrecisionCfg {
        PrecisionCfg::Machine
    }
    fn unit_roundoff(_: ()) -> f64 {
        f64::EPSILON / 2.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_sci_string(&self) -> String {
        format!("{:.16e}", self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// Runs `$body` with `$S` bound to the scalar type selected by a
/// [`PrecisionCfg`] and `$ctx` bound to its context.
#[macro_export]
macro_rules! with_precision {
    ($cfg:expr, $S:ident, $ctx:ident => $body:expr) => {{
        match $cfg {
            $crate::scalar::PrecisionCfg::Machine => {
                #[allow(dead_code)]
                type $S = f64;
                #[allow(clippy::let_unit_value, unused_variables)]
                let $ctx = ();
                $body
            }
            $crate::scalar::PrecisionCfg::Big { digits } => {
                #[allow(dead_code)]
                type $S = $crate::scalar::Big;
                #[allow(unused_variables)]
                let $ctx = $crate::scalar::BigCtx::new(digits);
                $body
            }
            $crate::scalar::PrecisionCfg::Rounded10 => {
                #[allow(dead_code)]
                type $S = $crate::scalar::Rounded10;
                #[allow(clippy::let_unit_value, unused_variables)]
                let $ctx = ();
                $body
            }
        }
    }};
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_repeated_product() {
        assert_eq!(3.0f64.powi_scalar(5), 243.0);
        assert_eq!(2.0f64.powi_scalar(0), 1.0);
    }

    trait PowiScalar {
        fn powi_scalar(&self, n: u32) -> Self;
    }
    impl PowiScalar for f64 {
        fn powi_scalar(&self, n: u32) -> Self {
            <f64 as Scalar>::powi(self, n)
        }
    }

    #[test]
    fn big_digits_floor() {
        assert!(PrecisionCfg::big(19).is_err());
        assert!(PrecisionCfg::big(20).is_ok());
    }

    #[test]
    fn dispatch_selects_backend() {
        let name = with_precision!(PrecisionCfg::Big { digits: 30 }, S, ctx => {
            S::from_f64_in(1.5, ctx).to_sci_string()
        });
        assert!(name.starts_with("1.5"));
        let m = with_precision!(PrecisionCfg::Machine, S, ctx => S::from_f64_in(0.25, ctx).to_f64());
        assert_eq!(m, 0.25);
    }
}
