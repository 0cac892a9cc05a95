//! Numeric backends.
//!
//! Every domain value (transition probabilities, visitations, rewards) is
//! stored as an exact [`Rational`]. A [`NumericMode`] selects the arithmetic
//! used by the algorithms: exact rational arithmetic, or `f64` with an
//! absolute tolerance for sign and equality tests. Algorithms are written once
//! against the [`Scalar`] trait and dispatched on the mode.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary-precision rational number used for all stored values.
pub type Rational = BigRational;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Arithmetic backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NumericMode {
    ExactRational,
    Float { tolerance: f64 },
}

impl Default for NumericMode {
    fn default() -> Self {
        NumericMode::Float {
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl NumericMode {
    /// Float mode with the given tolerance. Panics on a non-positive or non-finite tolerance.
    pub fn float(tolerance: f64) -> Self {
        assert!(
            tolerance.is_finite() && tolerance > 0.0,
            "float tolerance must be positive, got {tolerance}"
        );
        NumericMode::Float { tolerance }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NumericMode::ExactRational)
    }

    /// Tolerance used for comparisons; zero in exact mode.
    pub fn tolerance(&self) -> f64 {
        match self {
            NumericMode::ExactRational => 0.0,
            NumericMode::Float { tolerance } => *tolerance,
        }
    }

    /// `a == b` under this mode.
    pub fn approx_eq(&self, a: &Rational, b: &Rational) -> bool {
        match self {
            NumericMode::ExactRational => a == b,
            NumericMode::Float { tolerance } => (to_f64(a) - to_f64(b)).abs() <= *tolerance,
        }
    }

    /// `a >= b` under this mode (float mode grants `tolerance` of slack).
    pub fn approx_ge(&self, a: &Rational, b: &Rational) -> bool {
        match self {
            NumericMode::ExactRational => a >= b,
            NumericMode::Float { tolerance } => to_f64(a) >= to_f64(b) - *tolerance,
        }
    }
}

/// Field operations shared by the exact and floating-point backends.
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_rational(q: &Rational) -> Self;
    /// `None` if the value is not finite.
    fn to_rational(&self) -> Option<Rational>;
    fn magnitude(&self) -> Self;
}

impl Scalar for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }
}

impl Scalar for f64 {
    fn from_rational(q: &Rational) -> Self {
        to_f64(q)
    }
    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }
    fn magnitude(&self) -> Self {
        f64::abs(*self)
    }
}

/// Sign tests against an absolute tolerance (zero for exact arithmetic).
#[derive(Debug, Clone)]
pub struct Tol<S> {
    pub eps: S,
}

impl<S: Scalar> Tol<S> {
    pub fn new(eps: S) -> Self {
        Tol { eps }
    }
    pub fn is_zero(&self, x: &S) -> bool {
        x.magnitude() <= self.eps
    }
    pub fn is_pos(&self, x: &S) -> bool {
        *x > self.eps
    }
    pub fn is_neg(&self, x: &S) -> bool {
        *x < -self.eps.clone()
    }
}

impl Tol<Rational> {
    pub fn exact() -> Self {
        Tol::new(Rational::zero())
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid number {input:?}: {reason}")]
pub struct ParseNumberError {
    pub input: String,
    pub reason: &'static str,
}

/// Parse a decimal (`"-0.25"`, `"3"`, `"1.5e-3"`) or fraction (`"100/19"`)
/// string into an exact rational.
pub fn parse_rational(input: &str) -> Result<Rational, ParseNumberError> {
    let err = |reason| ParseNumberError {
        input: input.to_string(),
        reason,
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num.trim()).ok_or_else(|| err("bad numerator"))?;
        let d = parse_decimal(den.trim()).ok_or_else(|| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(n / d);
    }
    parse_decimal(s).ok_or_else(|| err("expected a decimal like \"0.9\" or a fraction like \"9/10\""))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], i64::from_str(&body[i + 1..]).ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(&digits).ok()?);
    let shift = exponent.checked_sub(frac_part.len() as i64)?;
    if shift.unsigned_abs() > 4096 {
        return None;
    }
    let scale = Rational::from_integer(num::pow(BigInt::from(10u32), shift.unsigned_abs() as usize));
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Some(if negative { -value } else { value })
}

/// Canonical text form: a plain decimal when the value has a finite decimal
/// expansion, `p/q` otherwise. `parse_rational` inverts it exactly.
pub fn format_rational(q: &Rational) -> String {
    let den = q.denom();
    let mut rest = den.clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() || twos.max(fives) > 40 {
        return format!("{}/{}", q.numer(), den);
    }
    let places = twos.max(fives);
    let scaled = q * Rational::from_integer(num::pow(BigInt::from(10), places));
    let n = scaled.to_integer();
    let negative = n.sign() == Sign::Minus;
    let digits = n.abs().to_string();
    if places == 0 {
        return format!("{}{}", if negative { "-" } else { "" }, digits);
    }
    let padded = format!("{:0>width$}", digits, width = places + 1);
    let (ip, fp) = padded.split_at(padded.len() - places);
    format!("{}{}.{}", if negative { "-" } else { "" }, ip, fp)
}

/// Number formatting used in human and JSON output: canonical rationals in
/// exact mode, shortest round-trip `f64` text in float mode.
pub fn format_for_mode(q: &Rational, mode: NumericMode) -> String {
    match mode {
        NumericMode::ExactRational => format_rational(q),
        NumericMode::Float { .. } => format!("{}", to_f64(q)),
    }
}

/// Serde adapter storing rationals as canonical strings.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::super::{format_rational, parse_rational, Rational};
        use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&format_rational(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts
                .iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }
}
