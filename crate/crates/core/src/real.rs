//! Closed rational intervals used as certified enclosures of real numbers.
//!
//! An exact rational is the degenerate interval `[x, x]`. Every decision
//! (floor, sign, comparison) either follows from the endpoints or fails with
//! [`Error::Precision`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::{Integer};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigRational,
    hi: BigRational,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow10(d: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), d as usize)
}

impl Interval {
    pub fn exact(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn from_int(n: i64) -> Self {
        Self::exact(int(n))
    }

    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    /// `[c - r, c + r]`.
    pub fn around(center: BigRational, radius: BigRational) -> Self {
        Interval::new(&center - &radius, &center + &radius)
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        self.is_exact().then_some(&self.lo)
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn neg(&self) -> Self {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn add(&self, o: &Interval) -> Self {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Interval) -> Self {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn add_rat(&self, r: &BigRational) -> Self {
        Interval { lo: &self.lo + r, hi: &self.hi + r }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_negative() {
            Interval { lo: &self.hi * r, hi: &self.lo * r }
        } else {
            Interval { lo: &self.lo * r, hi: &self.hi * r }
        }
    }

    pub fn mul(&self, o: &Interval) -> Self {
        if self.is_exact() {
            return o.scale(&self.lo);
        }
        if o.is_exact() {
            return self.scale(&o.lo);
        }
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::Precision(format!(
                "reciprocal of an enclosure containing zero: {}",
                self
            )));
        }
        Ok(Interval { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    pub fn div(&self, o: &Interval) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn abs(&self) -> Self {
        if self.lo.is_negative() && self.hi.is_positive() {
            let m = std::cmp::max(-&self.lo, self.hi.clone());
            Interval { lo: BigRational::zero(), hi: m }
        } else if self.hi.is_negative() || self.hi.is_zero() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Sign when decided by the endpoints; `None` when the enclosure straddles
    /// zero without being exactly zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certified comparison against a rational.
    pub fn cmp_rat(&self, r: &BigRational) -> Option<Ordering> {
        self.sub(&Interval::exact(r.clone())).sign()
    }

    /// `[x]`, the greatest integer not exceeding `x`.
    pub fn floor(&self) -> Result<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        if a == b {
            Ok(a)
        } else {
            Err(Error::Precision(format!("floor undecidable for {}", self)))
        }
    }

    /// `E(x)`, the least integer not less than `x`.
    pub fn ceil(&self) -> Result<BigInt> {
        let a = self.lo.ceil().to_integer();
        let b = self.hi.ceil().to_integer();
        if a == b {
            Ok(a)
        } else {
            Err(Error::Precision(format!("ceiling undecidable for {}", self)))
        }
    }

    /// Nearest integer, certified away from half-integers.
    pub fn round(&self) -> Result<BigInt> {
        self.add_rat(&rat(1, 2)).floor()
    }

    /// Enclosure of the fractional part `{x}`, provided the floor is decided.
    pub fn frac(&self) -> Result<Interval> {
        let f = BigRational::from_integer(self.floor()?);
        Ok(Interval { lo: &self.lo - &f, hi: &self.hi - &f })
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64().unwrap_or(f64::NAN)
    }

    /// Midpoint rendered with `digits` fractional digits.
    pub fn to_decimal(&self, digits: u32) -> String {
        format_decimal(&self.mid(), digits)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", format_decimal(&self.lo, 20), format_decimal(&self.hi, 20))
        }
    }
}

/// Parses `[-]digits[.digits]` exactly; returns the value and the number of
/// fractional digits written.
pub fn parse_decimal(s: &str) -> Result<(BigRational, u32)> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (ip, fp) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    let ok = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if (ip.is_empty() && fp.is_empty()) || !ok(ip) || !ok(fp) {
        return Err(Error::Parse(format!("not a decimal number: {:?}", s)));
    }
    let digits = fp.len() as u32;
    let joined = format!("{}{}", ip, fp);
    let n: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined
            .parse()
            .map_err(|_| Error::Parse(format!("not a decimal number: {:?}", s)))?
    };
    let mut v = BigRational::new(n, pow10(digits));
    if neg {
        v = -v;
    }
    Ok((v, digits))
}

/// Parses `p/q`, an integer, or a decimal literal as an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((a, b)) = t.split_once('/') {
        let p: BigInt = a.trim().parse().map_err(|_| Error::Parse(format!("bad rational {:?}", s)))?;
        let q: BigInt = b.trim().parse().map_err(|_| Error::Parse(format!("bad rational {:?}", s)))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {:?}", s)));
        }
        return Ok(BigRational::new(p, q));
    }
    Ok(parse_decimal(t)?.0)
}

/// Renders an exact rational as `p/q` or as an integer.
pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Rounds to the nearest multiple of `10^-digits` (half away from zero).
pub fn format_decimal(x: &BigRational, digits: u32) -> String {
    let scale = BigRational::from_integer(pow10(digits));
    let scaled = x.abs() * scale;
    let n = (scaled + rat(1, 2)).floor().to_integer();
    let (q, r) = n.div_rem(&pow10(digits));
    let sign = if x.is_negative() && !n.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{}{}", sign, q)
    } else {
        format!("{}{}.{:0>width$}", sign, q, r.to_string(), width = digits as usize)
    }
}

/// Enclosure of `sqrt(x)` for a nonnegative rational, of width `10^-digits`
/// relative to the denominator.
pub fn sqrt_enclosure(x: &BigRational, digits: u32) -> Result<Interval> {
    if x.is_negative() {
        return Err(Error::Invalid(format!("square root of negative number {}", x)));
    }
    let p = x.numer();
    let q = x.denom();
    // sqrt(p/q) = sqrt(p q) / q
    let scale = pow10(digits);
    let n = p * q * &scale * &scale;
    let s = n.sqrt();
    let denom = q * &scale;
    let lo = BigRational::new(s.clone(), denom.clone());
    if &s * &s == n {
        return Ok(Interval::exact(lo));
    }
    let hi = BigRational::new(s + 1, denom);
    Ok(Interval::new(lo, hi))
}

/// Evaluates a small real expression to a certified enclosure.
///
/// Grammar: sums and differences of terms, each term a product of factors;
/// a factor is a rational literal (`3`, `1/2`, `0.25`), `sqrt(k)` for a
/// rational `k`, `phi` (the golden ratio), or `phi^k` / `sqrt(k)^j` with a
/// nonnegative integer exponent. Examples: `1+2*phi`, `sqrt(2)`, `3/2*sqrt(5)`.
pub fn eval_expression(src: &str, digits: u32) -> Result<Interval> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let work = digits + 10;
    let mut total = Interval::from_int(0);
    let bytes = s.as_bytes();
    let mut i = 0;
    let mut sign = 1i64;
    if bytes[0] == b'-' {
        sign = -1;
        i = 1;
    } else if bytes[0] == b'+' {
        i = 1;
    }
    loop {
        // find the end of this term: next top-level + or - not following 'e'
        let mut depth = 0i32;
        let mut j = i;
        while j < bytes.len() {
            match bytes[j] {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if depth == 0 && j > i => break,
                _ => {}
            }
            j += 1;
        }
        let term = eval_term(&s[i..j], work)?;
        total = if sign > 0 { total.add(&term) } else { total.sub(&term) };
        if j >= bytes.len() {
            break;
        }
        sign = if bytes[j] == b'-' { -1 } else { 1 };
        i = j + 1;
        if i >= bytes.len() {
            return Err(Error::Parse(format!("dangling operator in {:?}", src)));
        }
    }
    Ok(total)
}

fn eval_term(t: &str, work: u32) -> Result<Interval> {
    if t.is_empty() {
        return Err(Error::Parse("empty term".into()));
    }
    let mut acc = Interval::from_int(1);
    for factor in split_top(t, b'*') {
        acc = acc.mul(&eval_factor(factor, work)?);
    }
    Ok(acc)
}

fn split_top(t: &str, sep: u8) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, b) in t.bytes().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            _ if b == sep && depth == 0 => {
                out.push(&t[start..k]);
                start = k + 1;
            }
            _ => {}
        }
    }
    out.push(&t[start..]);
    out
}

fn eval_factor(f: &str, work: u32) -> Result<Interval> {
    let (base, exp) = match f.rsplit_once('^') {
        Some((b, e)) if !b.ends_with('(') => {
            let e: u32 = e.parse().map_err(|_| Error::Parse(format!("bad exponent in {:?}", f)))?;
            (b, e)
        }
        _ => (f, 1),
    };
    let v = if base == "phi" {
        sqrt_enclosure(&int(5), work)?.add_rat(&int(1)).scale(&rat(1, 2))
    } else if let Some(inner) = base.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        sqrt_enclosure(&parse_rational(inner)?, work)?
    } else {
        Interval::exact(parse_rational(base)?)
    };
    let mut acc = Interval::from_int(1);
    for _ in 0..exp {
        acc = acc.mul(&v);
    }
    Ok(acc)
}

/// Least common multiple of positive integers.
pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    a.lcm(b)
}

pub fn big_to_i64(x: &BigInt, what: &str) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::Invalid(format!("{} out of 64-bit range: {}", what, x)))
}

/// `x * 2^bits`, truncated, as an unsigned 128-bit integer, for `0 <= x < 1`.
pub fn to_fixed(x: &BigRational, bits: u32) -> u128 {
    debug_assert!(!x.is_negative() && x < &BigRational::one());
    let scaled = x * BigRational::from_integer(BigInt::one() << bits);
    let n = scaled.floor().to_integer();
    let (s, digits) = n.to_u64_digits();
    debug_assert!(s != Sign::Minus);
    let mut v: u128 = 0;
    for (k, d) in digits.iter().enumerate().take(2) {
        v |= (*d as u128) << (64 * k);
    }
    v
}

/// Smallest unsigned integer not less than `x * 2^bits`, saturating.
pub fn to_fixed_ceil(x: &BigRational, bits: u32) -> u128 {
    let scaled = x * BigRational::from_integer(BigInt::one() << bits);
    let n = scaled.ceil().to_integer();
    n.to_u128().unwrap_or(u128::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        let (v, d) = parse_decimal("0.125").unwrap();
        assert_eq!(v, rat(1, 8));
        assert_eq!(d, 3);
        assert_eq!(format_decimal(&v, 3), "0.125");
        assert_eq!(format_decimal(&rat(-1, 3), 4), "-0.3333");
        assert_eq!(format_decimal(&rat(2, 3), 2), "0.67");
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal(".").is_err());
    }

    #[test]
    fn floor_certified_or_refused() {
        let x = Interval::new(rat(9, 10), rat(19, 20));
        assert_eq!(x.floor().unwrap(), BigInt::zero());
        assert_eq!(x.ceil().unwrap(), BigInt::one());
        let y = Interval::new(rat(9, 10), rat(11, 10));
        assert!(matches!(y.floor(), Err(Error::Precision(_))));
        assert_eq!(Interval::from_int(3).ceil().unwrap(), BigInt::from(3));
    }

    #[test]
    fn sqrt_brackets_the_root() {
        let s = sqrt_enclosure(&int(2), 30).unwrap();
        assert!(s.lo() * s.lo() < int(2));
        assert!(s.hi() * s.hi() > int(2));
        assert!(s.width() <= BigRational::new(BigInt::one(), pow10(30)));
        assert!(sqrt_enclosure(&int(9), 5).unwrap().is_exact());
    }

    #[test]
    fn expressions() {
        let phi = eval_expression("phi", 40).unwrap();
        // phi^2 = phi + 1
        let lhs = phi.mul(&phi);
        let rhs = phi.add_rat(&int(1));
        assert!(lhs.sub(&rhs).abs().hi() < &rat(1, 1_000_000_000_000));
        let v = eval_expression("1+2*phi - 3/2", 30).unwrap();
        assert!((v.to_f64() - (2.0 * 1.618033988749895 - 0.5)).abs() < 1e-12);
        let w = eval_expression("sqrt(2)^2", 30).unwrap();
        assert!((w.to_f64() - 2.0).abs() < 1e-20);
        assert!(eval_expression("1+", 10).is_err());
    }

    #[test]
    fn fixed_point_conversion() {
        assert_eq!(to_fixed(&rat(1, 2), 96), 1u128 << 95);
        assert_eq!(to_fixed(&rat(1, 4), 128), 1u128 << 126);
        assert_eq!(to_fixed_ceil(&rat(1, 3), 2), 2);
    }
}
