//! Exact base-10 numbers for rule thresholds and evaluated rule bodies.
//!
//! A [`Decimal`] is an arbitrary-precision integer mantissa scaled by a
//! power of ten. Addition, subtraction and multiplication are exact;
//! division rounds half-to-even at [`DIV_SCALE`] fractional digits.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Fractional digits kept by [`Decimal::checked_div`].
pub const DIV_SCALE: u32 = 12;

/// Exact decimal value, always stored in normalized form (no trailing
/// fractional zeros), so derived equality is numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: BigInt,
    scale: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid decimal literal `{0}`")]
pub struct ParseDecimalError(pub String);

fn pow10(exp: u32) -> BigInt {
    BigInt::from(10u32).pow(exp)
}

impl Decimal {
    pub fn zero() -> Self {
        Decimal { mantissa: BigInt::zero(), scale: 0 }
    }

    fn new(mantissa: BigInt, scale: u32) -> Self {
        let mut d = Decimal { mantissa, scale };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.scale = 0;
            return;
        }
        let ten = BigInt::from(10u32);
        while self.scale > 0 {
            let (q, r) = self.mantissa.div_rem(&ten);
            if !r.is_zero() {
                break;
            }
            self.mantissa = q;
            self.scale -= 1;
        }
    }

    /// Integer value.
    pub fn from_i64(v: i64) -> Self {
        Decimal::new(BigInt::from(v), 0)
    }

    /// `mantissa * 10^-scale`.
    pub fn from_scaled(mantissa: i64, scale: u32) -> Self {
        Decimal::new(BigInt::from(mantissa), scale)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Number of fractional digits in normalized form.
    pub fn scale(&self) -> u32 {
        self.scale
    }

    fn aligned(&self, other: &Decimal) -> (BigInt, BigInt, u32) {
        let scale = self.scale.max(other.scale);
        let a = &self.mantissa * pow10(scale - self.scale);
        let b = &other.mantissa * pow10(scale - other.scale);
        (a, b, scale)
    }

    pub fn add(&self, other: &Decimal) -> Decimal {
        let (a, b, scale) = self.aligned(other);
        Decimal::new(a + b, scale)
    }

    pub fn sub(&self, other: &Decimal) -> Decimal {
        let (a, b, scale) = self.aligned(other);
        Decimal::new(a - b, scale)
    }

    pub fn mul(&self, other: &Decimal) -> Decimal {
        Decimal::new(&self.mantissa * &other.mantissa, self.scale + other.scale)
    }

    /// Quotient rounded half-to-even at [`DIV_SCALE`] fractional digits;
    /// `None` when `other` is zero.
    pub fn checked_div(&self, other: &Decimal) -> Option<Decimal> {
        if other.is_zero() {
            return None;
        }
        // self / other = (ma / 10^sa) / (mb / 10^sb)
        // scaled by 10^DIV_SCALE: ma * 10^(DIV_SCALE + sb) / (mb * 10^sa)
        let num = &self.mantissa * pow10(DIV_SCALE + other.scale);
        let den = &other.mantissa * pow10(self.scale);
        Some(Decimal::new(div_half_even(&num, &den), DIV_SCALE))
    }

    /// Rounds half-to-even to `digits` fractional digits.
    pub fn round_half_even(&self, digits: u32) -> Decimal {
        if self.scale <= digits {
            return self.clone();
        }
        let den = pow10(self.scale - digits);
        Decimal::new(div_half_even(&self.mantissa, &den), digits)
    }

    /// Formats with exactly `digits` fractional digits (rounding half-to-even).
    pub fn to_fixed(&self, digits: u32) -> String {
        let r = self.round_half_even(digits);
        let m = &r.mantissa * pow10(digits - r.scale);
        render(&m, digits)
    }
}

fn div_half_even(num: &BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_mod_floor(den);
    if r.is_zero() {
        return q;
    }
    // floor division: 0 < |r| < |den|, r has the sign of den
    let twice = (&r * 2u32).abs();
    match twice.cmp(&den.abs()) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

fn render(mantissa: &BigInt, scale: u32) -> String {
    let digits = mantissa.abs().to_string();
    let sign = if mantissa.sign() == Sign::Minus { "-" } else { "" };
    if scale == 0 {
        return format!("{sign}{digits}");
    }
    let scale = scale as usize;
    let padded =
        if digits.len() <= scale { format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits) } else { digits };
    let (int, frac) = padded.split_at(padded.len() - scale);
    format!("{sign}{int}.{frac}")
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl FromStr for Decimal {
    type Err = ParseDecimalError;

    /// Accepts `[+-]digits[.digits]`; no exponent, no separators.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDecimalError(s.to_string());
        let (neg, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if int.is_empty() || !all_digits(int) || !all_digits(frac) {
            return Err(err());
        }
        if body.contains('.') && frac.is_empty() {
            return Err(err());
        }
        let mut mantissa: BigInt = format!("{int}{frac}").parse().map_err(|_| err())?;
        if neg {
            mantissa = -mantissa;
        }
        let scale = u32::try_from(frac.len()).map_err(|_| err())?;
        Ok(Decimal::new(mantissa, scale))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.mantissa, self.scale))
    }
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Decimal({self})")
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
