//! Rotation numbers `θ/2π ∈ (0,1)`, exact rational or decimal with a declared
//! number of correct digits.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{format_decimal, parse_decimal, pow10, rat, to_fixed, to_fixed_ceil, Interval};

/// Smallest precision accepted for decimal rotation numbers.
pub const MIN_DIGITS: u32 = 12;

const FRAC_BITS: u32 = 96;
const FRAC_MASK: u128 = (1u128 << FRAC_BITS) - 1;

#[derive(Clone, Debug)]
pub struct RotationNumber {
    kind: Kind,
    // Fixed-point copy of the value with 96 fractional bits and an error bound
    // in the same units; lets `floor_mul` skip big rationals almost always.
    fixed: u128,
    fixed_err: u128,
}

#[derive(Clone, Debug)]
enum Kind {
    Rational { p: u64, q: u64 },
    Irrational { decimal: String, digits: u32, center: BigRational },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum RawRotation {
    Rational { p: u64, q: u64 },
    Irrational { decimal: String, digits: u32 },
}

impl TryFrom<RawRotation> for RotationNumber {
    type Error = Error;
    fn try_from(r: RawRotation) -> Result<Self> {
        match r {
            RawRotation::Rational { p, q } => RotationNumber::rational(p, q),
            RawRotation::Irrational { decimal, digits } => RotationNumber::irrational(&decimal, digits),
        }
    }
}

impl From<RotationNumber> for RawRotation {
    fn from(r: RotationNumber) -> Self {
        match r.kind {
            Kind::Rational { p, q } => RawRotation::Rational { p, q },
            Kind::Irrational { decimal, digits, .. } => RawRotation::Irrational { decimal, digits },
        }
    }
}

impl Serialize for RotationNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawRotation::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RotationNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRotation::deserialize(d)?;
        RotationNumber::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for RotationNumber {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Rational { p, q }, Kind::Rational { p: p2, q: q2 }) => p == p2 && q == q2,
            (
                Kind::Irrational { digits, center, .. },
                Kind::Irrational { digits: d2, center: c2, .. },
            ) => digits == d2 && center == c2,
            _ => false,
        }
    }
}

impl Eq for RotationNumber {}

impl RotationNumber {
    /// `p/q` in lowest terms; `0 < p < q` is required.
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        if q == 0 || p == 0 || p >= q {
            return Err(Error::Invalid(format!("rotation number {}/{} not in (0,1)", p, q)));
        }
        let g = p.gcd(&q);
        let (p, q) = (p / g, q / g);
        let fixed = ((p as u128) << FRAC_BITS) / q as u128;
        Ok(RotationNumber { kind: Kind::Rational { p, q }, fixed, fixed_err: 1 })
    }

    /// A decimal literal whose first `digits` fractional digits are correct,
    /// i.e. the true value lies within `10^-digits` of the literal.
    pub fn irrational(decimal: &str, digits: u32) -> Result<Self> {
        let (center, written) = parse_decimal(decimal)?;
        if digits < MIN_DIGITS {
            return Err(Error::Invalid(format!(
                "irrational rotation number needs at least {} digits, got {}",
                MIN_DIGITS, digits
            )));
        }
        if written < digits {
            return Err(Error::Invalid(format!(
                "decimal {:?} has {} fractional digits but {} are declared",
                decimal, written, digits
            )));
        }
        let radius = BigRational::new(BigInt::one(), pow10(digits));
        if &center - &radius <= BigRational::zero() || &center + &radius >= BigRational::one() {
            return Err(Error::Invalid(format!(
                "rotation number {} not separated from 0 and 1 at {} digits",
                decimal, digits
            )));
        }
        let fixed = to_fixed(&center, FRAC_BITS);
        let fixed_err = to_fixed_ceil(&radius, FRAC_BITS) + 1;
        Ok(RotationNumber {
            kind: Kind::Irrational { decimal: decimal.trim().to_string(), digits, center },
            fixed,
            fixed_err,
        })
    }

    /// Decimal-kind rotation number for a value known by an enclosure. The
    /// literal carries a few guard digits beyond `digits`; fails if the
    /// enclosure is too wide for the declared precision.
    pub fn from_enclosure(iv: &Interval, digits: u32) -> Result<Self> {
        let text = format_decimal(&iv.mid(), digits + 4);
        let r = RotationNumber::irrational(&text, digits)?;
        let own = r.interval();
        if own.lo() > iv.lo() || own.hi() < iv.hi() {
            return Err(Error::Precision(format!(
                "enclosure {} too wide for {} digits",
                iv, digits
            )));
        }
        Ok(r)
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.kind, Kind::Rational { .. })
    }

    pub fn as_rational(&self) -> Option<(u64, u64)> {
        match self.kind {
            Kind::Rational { p, q } => Some((p, q)),
            _ => None,
        }
    }

    pub fn digits(&self) -> Option<u32> {
        match self.kind {
            Kind::Irrational { digits, .. } => Some(digits),
            _ => None,
        }
    }

    pub fn is_half(&self) -> bool {
        self.as_rational() == Some((1, 2))
    }

    /// Certified enclosure of the value.
    pub fn interval(&self) -> Interval {
        match &self.kind {
            Kind::Rational { p, q } => Interval::exact(rat(*p as i64, *q as i64)),
            Kind::Irrational { digits, center, .. } => Interval::around(
                center.clone(),
                BigRational::new(BigInt::one(), pow10(*digits)),
            ),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.kind {
            Kind::Rational { p, q } => *p as f64 / *q as f64,
            Kind::Irrational { center, .. } => center.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// `1 - ρ`, the rotation number of the conjugate point `e^{-2πiρ}`.
    pub fn conjugate(&self) -> Self {
        match &self.kind {
            Kind::Rational { p, q } => RotationNumber::rational(q - p, *q).expect("valid conjugate"),
            Kind::Irrational { decimal, digits, center } => {
                let written = decimal.split_once('.').map(|(_, f)| f.len() as u32).unwrap_or(0);
                let c = BigRational::one() - center;
                RotationNumber::irrational(&format_decimal(&c, written), *digits)
                    .expect("conjugate of a valid rotation number")
            }
        }
    }

    /// Whether both numbers denote the same point, decided exactly for
    /// rationals and structurally (same literal and precision) for decimals.
    /// Overlapping but different decimals are undecidable.
    pub fn same_point(&self, other: &Self) -> Result<bool> {
        if self == other {
            return Ok(true);
        }
        let a = self.interval();
        let b = other.interval();
        if a.hi() < b.lo() || b.hi() < a.lo() {
            return Ok(false);
        }
        if self.is_rational() && other.is_rational() {
            return Ok(false);
        }
        Err(Error::Precision(format!(
            "cannot decide whether {} and {} are the same point",
            self, other
        )))
    }

    /// `m ρ ∈ Z`; never true for a decimal-kind number.
    pub fn mul_is_integer(&self, m: u64) -> bool {
        match self.kind {
            Kind::Rational { q, .. } => m.is_multiple_of(q),
            Kind::Irrational { .. } => false,
        }
    }

    /// Certified `[m ρ]`.
    pub fn floor_mul(&self, m: u64) -> Result<i64> {
        if let Kind::Rational { p, q } = self.kind {
            return Ok(((m as u128 * p as u128) / q as u128) as i64);
        }
        if m < (1u64 << 31) {
            let prod = m as u128 * self.fixed;
            let err = m as u128 * self.fixed_err;
            let fr = prod & FRAC_MASK;
            if fr >= err && fr + err <= FRAC_MASK {
                return Ok((prod >> FRAC_BITS) as i64);
            }
        }
        let iv = self.interval().scale(&BigRational::from_integer(BigInt::from(m)));
        iv.floor()
            .map(|f| f.to_i64().expect("floor fits in i64"))
            .map_err(|_| Error::Precision(format!("[{} * {}] undecidable at stored precision", m, self)))
    }

    /// Certified `E(m ρ)`, the least integer not less than `m ρ`.
    pub fn ceil_mul(&self, m: u64) -> Result<i64> {
        let f = self.floor_mul(m)?;
        Ok(if self.mul_is_integer(m) { f } else { f + 1 })
    }

    /// Enclosure of `{m ρ}`.
    pub fn frac_mul(&self, m: u64) -> Result<Interval> {
        if let Kind::Rational { p, q } = self.kind {
            let r = (m as u128 * p as u128) % q as u128;
            return Ok(Interval::exact(BigRational::new(BigInt::from(r), BigInt::from(q))));
        }
        let f = BigRational::from_integer(BigInt::from(self.floor_mul(m)?));
        let iv = self.interval().scale(&BigRational::from_integer(BigInt::from(m)));
        Ok(iv.add_rat(&-f))
    }
}

impl fmt::Display for RotationNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Rational { p, q } => write!(f, "{}/{}", p, q),
            Kind::Irrational { center, digits, .. } => {
                write!(f, "{}", format_decimal(center, (*digits).min(16)))
            }
        }
    }
}

/// `true` when the enclosure of `x` is strictly inside `(0, 1)`.
pub fn strictly_inside_unit(x: &Interval) -> bool {
    x.lo().is_positive() && x.hi() < &BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "0.61803398874989484820458683436563811772030917980576";

    #[test]
    fn rational_floor_and_ceiling() {
        let r = RotationNumber::rational(3, 10).unwrap();
        assert_eq!(r.floor_mul(4).unwrap(), 1);
        assert_eq!(r.ceil_mul(4).unwrap(), 2);
        assert_eq!(r.ceil_mul(10).unwrap(), 3);
        assert!(r.mul_is_integer(20));
        assert_eq!(RotationNumber::rational(2, 4).unwrap(), RotationNumber::rational(1, 2).unwrap());
        assert!(RotationNumber::rational(3, 3).is_err());
    }

    #[test]
    fn decimal_floor_matches_big_rational() {
        let g = RotationNumber::irrational(GOLDEN, 50).unwrap();
        let iv = g.interval();
        for m in [1u64, 2, 3, 89, 144, 1_000_003, 987_654_321] {
            let slow = iv.scale(&BigRational::from_integer(BigInt::from(m))).floor().unwrap();
            assert_eq!(BigInt::from(g.floor_mul(m).unwrap()), slow);
            assert_eq!(g.ceil_mul(m).unwrap(), g.floor_mul(m).unwrap() + 1);
        }
    }

    #[test]
    fn low_precision_refuses() {
        // 0.5 +- 1e-12 is too close to 1/2 for m = 2 * 10^12.
        let r = RotationNumber::irrational("0.500000000000", 12).unwrap();
        assert!(matches!(r.floor_mul(2_000_000_000_000), Err(Error::Precision(_))));
        assert!(RotationNumber::irrational("0.3", 12).is_err());
        assert!(RotationNumber::irrational("0.300000000000", 11).is_err());
    }

    #[test]
    fn conjugate_and_identity() {
        let g = RotationNumber::irrational(GOLDEN, 50).unwrap();
        let c = g.conjugate();
        let s = g.interval().add(&c.interval());
        assert!(s.contains(&BigRational::one()));
        assert!(g.same_point(&g.clone()).unwrap());
        assert!(!g.same_point(&c).unwrap());
        assert_eq!(c.conjugate(), g);
    }

    #[test]
    fn serde_shapes() {
        let g = RotationNumber::irrational(GOLDEN, 50).unwrap();
        let j = serde_json::to_string(&g).unwrap();
        assert!(j.contains("\"type\":\"irrational\""));
        let back: RotationNumber = serde_json::from_str(&j).unwrap();
        assert_eq!(back, g);
        let r: RotationNumber = serde_json::from_str(r#"{"type":"rational","p":1,"q":3}"#).unwrap();
        assert_eq!(r.as_rational(), Some((1, 3)));
        assert!(serde_json::from_str::<RotationNumber>(r#"{"type":"rational","p":4,"q":3}"#).is_err());
    }
}
