//! Exact decimal fixed-point numbers and extended gauge values.
//!
//! All quantities that take part in relation membership tests (state
//! coordinates, gauges, contraction bounds) are stored as [`Dec`], a signed
//! fixed-point number with twelve fractional digits. Addition is exact;
//! multiplication rounds half away from zero at the twelfth digit, which is
//! exact for every product the case study forms.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};
use core::str::FromStr;

use crate::error::Error;

/// Number of fractional decimal digits carried by [`Dec`].
pub const FRAC_DIGITS: u32 = 12;
const SCALE: i64 = 1_000_000_000_000;

/// Signed decimal fixed-point value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Dec(i64);

impl Dec {
    pub const ZERO: Dec = Dec(0);
    pub const ONE: Dec = Dec(SCALE);

    /// Builds `mantissa * 10^-exp`.
    ///
    /// Panics if `exp` exceeds [`FRAC_DIGITS`] or the value overflows.
    pub const fn new(mantissa: i64, exp: u32) -> Dec {
        assert!(exp <= FRAC_DIGITS);
        Dec(mantissa * 10i64.pow(FRAC_DIGITS - exp))
    }

    pub const fn from_int(n: i64) -> Dec {
        Dec(n * SCALE)
    }

    pub const fn raw(self) -> i64 {
        self.0
    }

    pub const fn from_raw(raw: i64) -> Dec {
        Dec(raw)
    }

    pub fn abs(self) -> Dec {
        Dec(self.0.abs())
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Rounds to the nearest integer multiple of `step`, ties away from zero.
    pub fn round_to_multiple(self, step: Dec) -> Dec {
        assert!(step.0 > 0, "rounding step must be positive");
        Dec(round_div(self.0 as i128, step.0 as i128) as i64 * step.0)
    }

    /// Rounds to `digits` decimal places, ties away from zero.
    pub fn round_digits(self, digits: u32) -> Dec {
        self.round_to_multiple(Dec::new(1, digits))
    }

    /// Rounds to the nearest integer, ties away from zero.
    pub fn round_int(self) -> i64 {
        round_div(self.0 as i128, SCALE as i128) as i64
    }

    /// Division rounded towards +infinity; `None` on a zero divisor.
    pub fn div_ceil(self, rhs: Dec) -> Option<Dec> {
        if rhs.0 == 0 {
            return None;
        }
        let num = self.0 as i128 * SCALE as i128;
        let den = rhs.0 as i128;
        let q = num.div_euclid(den);
        let r = num.rem_euclid(den);
        let q = if r != 0 && den > 0 { q + 1 } else { q };
        Some(Dec(q as i64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }
}

fn round_div(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = num.abs() * 2 + den;
    let q = q / (2 * den);
    if num < 0 {
        -q
    } else {
        q
    }
}

impl Add for Dec {
    type Output = Dec;
    fn add(self, rhs: Dec) -> Dec {
        Dec(self.0.checked_add(rhs.0).expect("decimal overflow"))
    }
}

impl AddAssign for Dec {
    fn add_assign(&mut self, rhs: Dec) {
        *self = *self + rhs;
    }
}

impl Sub for Dec {
    type Output = Dec;
    fn sub(self, rhs: Dec) -> Dec {
        Dec(self.0.checked_sub(rhs.0).expect("decimal overflow"))
    }
}

impl Neg for Dec {
    type Output = Dec;
    fn neg(self) -> Dec {
        Dec(-self.0)
    }
}

impl Mul for Dec {
    type Output = Dec;
    fn mul(self, rhs: Dec) -> Dec {
        let p = self.0 as i128 * rhs.0 as i128;
        let q = round_div(p, SCALE as i128);
        Dec(i64::try_from(q).expect("decimal overflow"))
    }
}

impl fmt::Display for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        let int = a / SCALE as u64;
        let mut frac = a % SCALE as u64;
        if frac == 0 {
            return write!(f, "{sign}{int}");
        }
        let mut width = FRAC_DIGITS as usize;
        while frac.is_multiple_of(10) {
            frac /= 10;
            width -= 1;
        }
        write!(f, "{sign}{int}.{frac:0width$}")
    }
}

impl fmt::Debug for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Dec, Error> {
        let bad = || Error::Parse(alloc::format!("invalid decimal `{s}`"));
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || frac_part.len() > FRAC_DIGITS as usize
        {
            return Err(bad());
        }
        let int: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let mut frac: i64 = 0;
        for (i, b) in frac_part.bytes().enumerate() {
            frac += (b - b'0') as i64 * 10i64.pow(FRAC_DIGITS - 1 - i as u32);
        }
        let raw = int
            .checked_mul(SCALE)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        Ok(Dec(if neg { -raw } else { raw }))
    }
}

/// Extended nonnegative value: a finite [`Dec`] or `+inf`.
///
/// Used for gauges, where `Infinite` means "never related".
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gauge {
    Finite(Dec),
    Infinite,
}

impl Gauge {
    pub fn is_finite(self) -> bool {
        matches!(self, Gauge::Finite(_))
    }

    pub fn finite(self) -> Option<Dec> {
        match self {
            Gauge::Finite(d) => Some(d),
            Gauge::Infinite => None,
        }
    }

    /// `true` iff `self <= eps`.
    pub fn within(self, eps: Dec) -> bool {
        match self {
            Gauge::Finite(d) => d <= eps,
            Gauge::Infinite => false,
        }
    }

    /// Lower clamp; infinity is preserved.
    pub fn at_least(self, floor: Dec) -> Gauge {
        match self {
            Gauge::Finite(d) => Gauge::Finite(d.max(floor)),
            Gauge::Infinite => Gauge::Infinite,
        }
    }
}

impl From<Dec> for Gauge {
    fn from(d: Dec) -> Gauge {
        Gauge::Finite(d)
    }
}

impl PartialOrd for Gauge {
    fn partial_cmp(&self, other: &Gauge) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gauge {
    fn cmp(&self, other: &Gauge) -> Ordering {
        match (self, other) {
            (Gauge::Finite(a), Gauge::Finite(b)) => a.cmp(b),
            (Gauge::Finite(_), Gauge::Infinite) => Ordering::Less,
            (Gauge::Infinite, Gauge::Finite(_)) => Ordering::Greater,
            (Gauge::Infinite, Gauge::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for Gauge {
    type Output = Gauge;
    fn add(self, rhs: Gauge) -> Gauge {
        match (self, rhs) {
            (Gauge::Finite(a), Gauge::Finite(b)) => Gauge::Finite(a + b),
            _ => Gauge::Infinite,
        }
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::Finite(d) => fmt::Display::fmt(d, f),
            Gauge::Infinite => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Gauge {
    type Err = Error;
    fn from_str(s: &str) -> Result<Gauge, Error> {
        match s.trim() {
            "inf" | "Infinity" | "infinity" => Ok(Gauge::Infinite),
            other => other.parse().map(Gauge::Finite),
        }
    }
}
