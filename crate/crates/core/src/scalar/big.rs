use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

use super::{PrecisionCfg, Scalar};

/// Extra decimal digits carried beyond the requested count, so that a
/// `digits`-digit result survives moderate cancellation inside the kernels.
pub const GUARD_DIGITS: u32 = 32;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Precision context of a [`Big`]: the requested decimal digits and the
/// binary working precision derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BigCtx {
    pub digits: u32,
    pub bits: usize,
}

impl BigCtx {
    pub fn new(digits: u32) -> Self {
        let total = (digits + GUARD_DIGITS) as f64 * std::f64::consts::LOG2_10;
        let bits = (total.ceil() as usize).div_ceil(64) * 64;
        BigCtx { digits, bits }
    }

    fn wider(self, other: BigCtx) -> BigCtx {
        if other.bits > self.bits {
            other
        } else {
            self
        }
    }
}

/// Software floating point value with a configurable number of decimal digits.
#[derive(Clone)]
pub struct Big {
    v: BigFloat,
    ctx: BigCtx,
}

impl Big {
    pub fn raw(&self) -> &BigFloat {
        &self.v
    }

    fn wrap(v: BigFloat, ctx: BigCtx) -> Self {
        Big { v, ctx }
    }
}

impl fmt::Debug for Big {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Big({})", self.to_sci_string())
    }
}

impl fmt::Display for Big {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci_string())
    }
}

impl PartialEq for Big {
    fn eq(&self, other: &Self) -> bool {
        self.v.cmp(&other.v) == Some(0)
    }
}

impl PartialOrd for Big {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! big_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Big {
            type Output = Big;
            fn $m(self, rhs: Big) -> Big {
                let ctx = self.ctx.wider(rhs.ctx);
                Big::wrap(self.v.$m(&rhs.v, ctx.bits, RM), ctx)
            }
        }
    };
}

big_binop!(Add, add);
big_binop!(Sub, sub);
big_binop!(Mul, mul);
big_binop!(Div, div);

impl Neg for Big {
    type Output = Big;
    fn neg(self) -> Big {
        Big::wrap(self.v.neg(), self.ctx)
    }
}

/// Converts the leading 128 mantissa bits to binary64.
fn big_to_f64(v: &BigFloat) -> f64 {
    if v.is_nan() {
        return f64::NAN;
    }
    if v.is_inf_pos() {
        return f64::INFINITY;
    }
    if v.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, sign, exp, _)) = v.as_raw_parts() else {
        return f64::NAN;
    };
    let n = words.len();
    if n == 0 || words.iter().all(|&w| w == 0) {
        return 0.0;
    }
    // value = 0.m * 2^exp with the most significant word last
    let hi = words[n - 1] as f64;
    let lo = if n >= 2 { words[n - 2] as f64 } else { 0.0 };
    let mant = hi * 2f64.powi(-64) + lo * 2f64.powi(-128);
    let e = exp as i64;
    let mag = if e > 1100 {
        f64::INFINITY
    } else if e < -1100 {
        0.0
    } else {
        let half = (e / 2) as i32;
        mant * 2f64.powi(half) * 2f64.powi(e as i32 - half)
    };
    match sign {
        Sign::Neg => -mag,
        Sign::Pos => mag,
    }
}

impl Scalar for Big {
    type Ctx = BigCtx;
    const MACHINE: bool = false;

    fn from_f64_in(x: f64, ctx: BigCtx) -> Self {
        Big::wrap(BigFloat::from_f64(x, ctx.bits), ctx)
    }

    fn from_decimal_in(text: &str, ctx: BigCtx) -> Option<Self> {
        let v = with_consts(|cc| BigFloat::parse(text, Radix::Dec, ctx.bits, RM, cc));
        if v.is_nan() {
            None
        } else {
            Some(Big::wrap(v, ctx))
        }
    }

    fn ctx(&self) -> BigCtx {
        self.ctx
    }

    fn precision(ctx: BigCtx) -> PrecisionCfg {
        PrecisionCfg::Big { digits: ctx.digits }
    }

    fn unit_roundoff(ctx: BigCtx) -> f64 {
        2f64.powi(-(ctx.bits as i32))
    }

    fn to_f64(&self) -> f64 {
        big_to_f64(&self.v)
    }

    fn to_sci_string(&self) -> String {
        if self.v.is_nan() {
            return "NaN".into();
        }
        if self.v.is_inf() {
            return if self.v.is_inf_neg() { "-inf" } else { "inf" }.into();
        }
        let full = match with_consts(|cc| self.v.format(Radix::Dec, RM, cc)) {
            Ok(s) => s,
            Err(_) => return format!("{:.16e}", self.to_f64()),
        };
        truncate_digits(&full, self.ctx.digits as usize)
    }

    fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    fn ln(&self) -> Self {
        Big::wrap(with_consts(|cc| self.v.ln(self.ctx.bits, RM, cc)), self.ctx)
    }

    fn exp(&self) -> Self {
        Big::wrap(with_consts(|cc| self.v.exp(self.ctx.bits, RM, cc)), self.ctx)
    }

    fn sqrt(&self) -> Self {
        Big::wrap(self.v.sqrt(self.ctx.bits, RM), self.ctx)
    }

    fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    fn abs(&self) -> Self {
        Big::wrap(self.v.abs(), self.ctx)
    }
}

/// Sign, significant digits without leading zeros, and the decimal exponent
/// of the first digit, for a `d.ddd…e±x` string. `None` for zero.
fn normalize(s: &str) -> Option<(&'static str, String, i64)> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], &s[i + 1..]),
        None => (s, "0"),
    };
    let (sign, mant) = match mant.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mant),
    };
    let mut ds: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let lead = ds.chars().take_while(|&c| c == '0').count();
    if lead == ds.len() {
        return None;
    }
    let point = mant.find('.').unwrap_or(mant.len()) as i64;
    let exp: i64 = exp.trim_start_matches('+').parse().unwrap_or(0);
    ds.drain(..lead);
    Some((sign, ds, exp + point - 1 - lead as i64))
}

fn assemble(sign: &str, mut ds: String, exp: i64, digits: usize) -> String {
    ds.truncate(digits);
    while ds.len() < digits {
        ds.push('0');
    }
    let (first, rest) = ds.split_at(1);
    format!("{sign}{first}.{rest}e{exp}")
}

/// Keeps `digits` significant digits of a `d.ddd…e±x` string (truncating).
fn truncate_digits(s: &str, digits: usize) -> String {
    match normalize(s) {
        Some((sign, ds, exp)) => assemble(sign, ds, exp, digits.max(1)),
        None => "0e0".into(),
    }
}

/// Rounds a `d.ddd…e±x` string to `digits` significant digits, ties to even.
pub(crate) fn round_digits(s: &str, digits: usize) -> String {
    let digits = digits.max(1);
    let Some((sign, ds, mut exp)) = normalize(s) else {
        return "0e0".into();
    };
    if ds.len() <= digits {
        return assemble(sign, ds, exp, digits);
    }
    let bytes = ds.as_bytes();
    let next = bytes[digits];
    let tail_nonzero = bytes[digits + 1..].iter().any(|&b| b != b'0');
    let last_odd = (bytes[digits - 1] - b'0') % 2 == 1;
    let up = next > b'5' || (next == b'5' && (tail_nonzero || last_odd));
    let mut kept: Vec<u8> = bytes[..digits].to_vec();
    if up {
        let mut i = digits;
        loop {
            if i == 0 {
                kept.insert(0, b'1');
                kept.pop();
                exp += 1;
                break;
            }
            i -= 1;
            if kept[i] == b'9' {
                kept[i] = b'0';
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    assemble(sign, String::from_utf8(kept).expect("ascii digits"), exp, digits)
}

impl Big {
    /// Decimal string rounded to `digits` significant digits.
    pub fn to_sci_rounded(&self, digits: usize) -> String {
        if !self.is_finite() {
            return self.to_sci_string();
        }
        match with_consts(|cc| self.v.format(Radix::Dec, RM, cc)) {
            Ok(full) => round_digits(&full, digits),
            Err(_) => format!("{:.*e}", digits.saturating_sub(1), self.to_f64()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: f64) -> Big {
        Big::from_f64_in(x, BigCtx::new(40))
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(round_digits("1.23456789015e0", 10), "1.234567890e0");
        assert_eq!(round_digits("1.2345678905e0", 10), "1.234567890e0");
        assert_eq!(round_digits("1.2345678915e0", 10), "1.234567892e0");
        assert_eq!(round_digits("1.23456789050001e0", 10), "1.234567891e0");
        assert_eq!(round_digits("9.9999999999e-3", 10), "1.000000000e-2");
        assert_eq!(round_digits("-0.000123e5", 2), "-1.2e1");
        assert_eq!(round_digits("0.0", 3), "0e0");
    }

    #[test]
    fn conversions_round_trip() {
        for x in [1.0, -3.25, 1e-9, 7.5e300, -2.2e-300, 0.1] {
            assert_eq!(big(x).to_f64(), x, "{x}");
        }
        assert_eq!(big(0.0).to_f64(), 0.0);
    }

    #[test]
    fn decimal_literals_are_exact_to_working_precision() {
        let ctx = BigCtx::new(40);
        let a = Big::from_decimal_in("0.17", ctx).unwrap();
        let b = Big::from_f64_in(17.0, ctx) / Big::from_f64_in(100.0, ctx);
        let d = (a - b).abs().to_f64();
        assert!(d < 1e-60, "{d}");
    }

    #[test]
    fn elementary_functions() {
        let e = big(1.0).exp();
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!(e.to_sci_string().starts_with("2.718281828459045235360287471352"));
        let l = big(2.0).ln();
        assert!((l.to_f64() - std::f64::consts::LN_2).abs() < 1e-16);
        assert!(big(-1.0).ln().to_f64().is_nan());
        assert!(!(big(1.0) / big(0.0)).is_finite());
    }

    #[test]
    fn sci_string_truncation() {
        assert_eq!(truncate_digits("1.2345e+3", 3), "1.23e3");
        assert_eq!(truncate_digits("-0.00125e0", 2), "-1.2e-3");
        assert_eq!(truncate_digits("3.e+0", 4), "3.000e0");
    }

    #[test]
    fn wider_context_wins() {
        let a = Big::from_f64_in(1.0, BigCtx::new(20));
        let b = Big::from_f64_in(3.0, BigCtx::new(100));
        assert_eq!((a / b).ctx().digits, 100);
    }
}
