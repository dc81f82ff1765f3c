//! Arithmetic modes: hardware `f64` or software big-float with a configurable
//! number of significant decimal digits.
//!
//! Numeric kernels are written once against [`Arithmetic`] and instantiated
//! with either [`Hardware`] or [`Extended`]. A context is immutable after
//! construction and cheap to clone, so batch jobs hand one to every worker.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use serde::Serialize;

use crate::error::{Error, Result};

/// Binary big-float used by [`Extended`].
pub type BigReal = FBig<HalfEven>;

/// Significant decimal digits carried by an `f64`, as reported in verification runs.
pub const HARDWARE_DIGITS: u32 = 16;

/// Smallest digit count accepted for extended mode.
pub const MIN_EXTENDED_DIGITS: u32 = 16;

/// Largest digit count accepted for extended mode.
pub const MAX_EXTENDED_DIGITS: u32 = 10_000;

// Extra bits carried below the requested decimal digits.
const GUARD_BITS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Hardware,
    Extended,
}

/// User-facing description of an arithmetic mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrecisionContext {
    mode: Mode,
    digits: u32,
}

impl PrecisionContext {
    pub const DEFAULT_DIGITS: u32 = 50;

    pub fn hardware() -> Self {
        Self {
            mode: Mode::Hardware,
            digits: HARDWARE_DIGITS,
        }
    }

    pub fn extended(digits: u32) -> Result<Self> {
        if !(MIN_EXTENDED_DIGITS..=MAX_EXTENDED_DIGITS).contains(&digits) {
            return Err(Error::InvalidPrecision(digits));
        }
        Ok(Self {
            mode: Mode::Extended,
            digits,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            mode: Mode::Extended,
            digits: Self::DEFAULT_DIGITS,
        }
    }
}

impl fmt::Display for PrecisionContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            Mode::Hardware => write!(f, "hardware (f64)"),
            Mode::Extended => write!(f, "extended ({} digits)", self.digits),
        }
    }
}

/// A real number type the kernels can compute with.
pub trait Real:
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
    fn sqrt(&self) -> Self;
    /// Natural logarithm; the argument must be positive.
    fn ln(&self) -> Self;
    /// `ln(1 + self)` without forming `1 + self` first.
    fn ln_1p(&self) -> Self;
    fn exp(&self) -> Self;
    fn abs(&self) -> Self;
    fn as_f64(&self) -> f64;
    /// Decimal rendering: shortest round-trip for `f64`, `digits` significant
    /// figures for big-floats.
    fn render(&self, digits: u32) -> String;

    /// Strictly greater than zero.
    fn is_positive(&self) -> bool;

    fn powf(&self, exponent: &Self) -> Self {
        (self.ln() * exponent.clone()).exp()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn ln_1p(&self) -> Self {
        f64::ln_1p(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn render(&self, _digits: u32) -> String {
        format!("{self:?}")
    }

    fn is_positive(&self) -> bool {
        *self > 0.0
    }
}

impl Real for BigReal {
    fn sqrt(&self) -> Self {
        FBig::sqrt(self)
    }

    fn ln(&self) -> Self {
        FBig::ln(self)
    }

    fn ln_1p(&self) -> Self {
        FBig::ln_1p(self)
    }

    fn exp(&self) -> Self {
        FBig::exp(self)
    }

    fn abs(&self) -> Self {
        if *self < BigReal::ZERO {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn as_f64(&self) -> f64 {
        FBig::to_f64(self).value()
    }

    fn render(&self, digits: u32) -> String {
        let decimal = self
            .clone()
            .with_base::<10>()
            .value()
            .with_precision(digits as usize)
            .value();
        let repr = decimal.repr();
        format_decimal(&repr.significand().to_string(), repr.exponent())
    }

    fn is_positive(&self) -> bool {
        *self > BigReal::ZERO
    }
}

/// `significand × 10^exponent` as a plain decimal when the decimal exponent
/// lies in `[-6, 21)`, in scientific notation otherwise.
fn format_decimal(significand: &str, exponent: isize) -> String {
    let (sign, digits) = match significand.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", significand),
    };
    // Fold trailing zeros of the significand into the exponent.
    let trimmed = digits.trim_end_matches('0');
    if trimmed.is_empty() {
        return "0".to_string();
    }
    let exponent = exponent + (digits.len() - trimmed.len()) as isize;
    let digits = trimmed;
    let n = digits.len() as isize;
    let sci = n - 1 + exponent;
    if (-6..21).contains(&sci) {
        if exponent >= 0 {
            format!("{sign}{digits}{}", "0".repeat(exponent as usize))
        } else if sci >= 0 {
            let point = (sci + 1) as usize;
            format!("{sign}{}.{}", &digits[..point], &digits[point..])
        } else {
            format!("{sign}0.{}{digits}", "0".repeat((-sci - 1) as usize))
        }
    } else if n == 1 {
        format!("{sign}{digits}e{sci}")
    } else {
        format!("{sign}{}.{}e{sci}", &digits[..1], &digits[1..])
    }
}

/// An arithmetic mode the kernels are instantiated with.
pub trait Arithmetic: Clone + fmt::Debug + Send + Sync {
    type Real: Real;

    /// Exact conversion of a double into the working type.
    fn real(&self, x: f64) -> Self::Real;
    fn int(&self, n: i64) -> Self::Real;
    fn pi(&self) -> Self::Real;
    fn ln2(&self) -> Self::Real;
    fn sqrt_pi(&self) -> Self::Real;
    /// Relative rounding error of a single operation.
    fn unit_roundoff(&self) -> f64;
    fn context(&self) -> PrecisionContext;

    fn ratio(&self, num: i64, den: i64) -> Self::Real {
        self.int(num) / self.int(den)
    }

    fn zero(&self) -> Self::Real {
        self.int(0)
    }

    fn one(&self) -> Self::Real {
        self.int(1)
    }

    fn digits(&self) -> u32 {
        self.context().digits()
    }
}

/// Native `f64` arithmetic.
#[derive(Clone, Copy, Debug, Default)]
pub struct Hardware;

impl Arithmetic for Hardware {
    type Real = f64;

    fn real(&self, x: f64) -> f64 {
        x
    }

    fn int(&self, n: i64) -> f64 {
        n as f64
    }

    fn pi(&self) -> f64 {
        std::f64::consts::PI
    }

    fn ln2(&self) -> f64 {
        std::f64::consts::LN_2
    }

    fn sqrt_pi(&self) -> f64 {
        std::f64::consts::PI.sqrt()
    }

    fn unit_roundoff(&self) -> f64 {
        f64::EPSILON / 2.0
    }

    fn context(&self) -> PrecisionContext {
        PrecisionContext::hardware()
    }
}

#[derive(Debug)]
struct ExtendedConstants {
    pi: BigReal,
    ln2: BigReal,
    sqrt_pi: BigReal,
}

/// Big-float arithmetic with a fixed binary precision derived from the
/// requested decimal digits.
#[derive(Clone, Debug)]
pub struct Extended {
    digits: u32,
    bits: usize,
    consts: Arc<ExtendedConstants>,
}

impl Extended {
    pub fn new(digits: u32) -> Result<Self> {
        let context = PrecisionContext::extended(digits)?;
        Ok(Self::from_valid(context.digits()))
    }

    fn from_valid(digits: u32) -> Self {
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS;
        let pi = BigReal::pi(bits);
        let two = BigReal::from(2u8).with_precision(bits).value();
        let ln2 = FBig::ln(&two);
        let sqrt_pi = FBig::sqrt(&pi);
        Self {
            digits,
            bits,
            consts: Arc::new(ExtendedConstants { pi, ln2, sqrt_pi }),
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }
}

impl Arithmetic for Extended {
    type Real = BigReal;

    fn real(&self, x: f64) -> BigReal {
        // Finite doubles convert exactly.
        BigReal::try_from(x)
            .expect("finite double")
            .with_precision(self.bits)
            .value()
    }

    fn int(&self, n: i64) -> BigReal {
        BigReal::from(n).with_precision(self.bits).value()
    }

    fn pi(&self) -> BigReal {
        self.consts.pi.clone()
    }

    fn ln2(&self) -> BigReal {
        self.consts.ln2.clone()
    }

    fn sqrt_pi(&self) -> BigReal {
        self.consts.sqrt_pi.clone()
    }

    fn unit_roundoff(&self) -> f64 {
        2f64.powi(-(self.bits as i32))
    }

    fn context(&self) -> PrecisionContext {
        PrecisionContext {
            mode: Mode::Extended,
            digits: self.digits,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_rejects_short_digit_counts() {
        assert!(matches!(Extended::new(15), Err(Error::InvalidPrecision(15))));
        assert!(Extended::new(16).is_ok());
        assert!(PrecisionContext::extended(MAX_EXTENDED_DIGITS + 1).is_err());
    }

    #[test]
    fn extended_constants_match_double_values() {
        let x = Extended::new(40).unwrap();
        assert_eq!(x.pi().as_f64(), std::f64::consts::PI);
        assert_eq!(x.ln2().as_f64(), std::f64::consts::LN_2);
        assert!((x.sqrt_pi().as_f64() - 1.772_453_850_905_516).abs() < 1e-15);
    }

    #[test]
    fn decimal_rendering() {
        let x = Extended::new(20).unwrap();
        assert_eq!(x.pi().render(20), "3.1415926535897932385");
        assert_eq!(0.1f64.render(50), "0.1");
        assert_eq!(1e-300f64.render(5), "1e-300");
    }

    #[test]
    fn decimal_layout() {
        assert_eq!(format_decimal("15", -1), "1.5");
        assert_eq!(format_decimal("-25", -3), "-0.025");
        assert_eq!(format_decimal("1200", 0), "1200");
        assert_eq!(format_decimal("12", 30), "1.2e31");
        assert_eq!(format_decimal("25", -28), "2.5e-27");
        assert_eq!(format_decimal("1", -40), "1e-40");
        assert_eq!(format_decimal("3", -7), "3e-7");
        assert_eq!(format_decimal("3", -6), "0.000003");
        assert_eq!(format_decimal("000", 5), "0");
        let x = Extended::new(30).unwrap();
        assert_eq!((x.ratio(1, 3) / x.int(1_000_000_000)).render(5), "3.3333e-10");
    }

    #[test]
    fn sign_helpers() {
        let x = Extended::new(30).unwrap();
        assert!(x.real(1e-40).is_positive());
        assert!(!x.zero().is_positive());
        assert!(!x.real(-2.0).is_positive());
        assert_eq!(x.real(-2.5).abs().as_f64(), 2.5);
        assert!(!0.0f64.is_positive());
    }

    #[test]
    fn extended_same_digits_same_results() {
        let a = Extended::new(50).unwrap();
        let b = Extended::new(50).unwrap();
        let v = |c: &Extended| (c.pi() / c.int(7)).ln().render(50);
        assert_eq!(v(&a), v(&b));
    }
}
