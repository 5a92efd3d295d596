//! Fractional parts `{N v_c}` of a torus vector along `N = 1, 2, ...`, with
//! certified vertex matching `|{N v_c} - χ_c| < ε`.
//!
//! Rational components are tracked exactly as residues. Other components use
//! 128-bit fixed point with an error bound that grows linearly in `N`; a
//! component whose enclosure touches `0` or `ε` is refused, never guessed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::real::{to_fixed, to_fixed_ceil, Interval};

const BITS: u32 = 128;

#[derive(Clone, Debug)]
pub enum Component {
    /// `{N p/q}` as the residue `N p mod q`.
    Exact { p: u64, q: u64 },
    /// `2^128 {v}` truncated, with `|2^128 {v} - center| <= err`.
    Fixed { center: u128, err: u128 },
}

impl Component {
    /// From an enclosure of a positive real.
    pub fn from_interval(v: &Interval) -> Result<Self> {
        if let Some(x) = v.as_exact() {
            let fr = x - x.floor();
            let p = fr.numer().to_u64();
            let q = fr.denom().to_u64();
            return match (p, q) {
                (Some(p), Some(q)) if q < (1u64 << 62) => Ok(Component::Exact { p, q }),
                _ => Err(Error::Invalid(format!("torus component {} has too large a denominator", x))),
            };
        }
        let fl = v.lo().floor();
        if v.hi().floor() != fl {
            return Err(Error::Precision(format!("torus component {} straddles an integer", v)));
        }
        let lo = v.lo() - &fl;
        let hi = v.hi() - &fl;
        let center = to_fixed(&lo, BITS);
        let err = to_fixed_ceil(&(hi - lo), BITS).saturating_add(2);
        Ok(Component::Fixed { center, err })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Component::Exact { .. })
    }
}

/// Which vertex a component has to approach.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Free,
    Zero,
    One,
}

/// `ε` in both representations used by the scan.
#[derive(Clone, Debug)]
pub struct Eps {
    pub value: BigRational,
    num: u128,
    den: u128,
    fixed: u128,
}

impl Eps {
    pub fn new(value: BigRational) -> Result<Self> {
        if !value.is_positive() || value >= BigRational::new(1.into(), 2.into()) {
            return Err(Error::Invalid(format!("epsilon must lie in (0, 1/2), got {}", value)));
        }
        let num = value.numer().to_u64().ok_or_else(|| Error::Invalid("epsilon numerator too large".into()))?;
        let den = value.denom().to_u64().ok_or_else(|| Error::Invalid("epsilon denominator too large".into()))?;
        let fixed = to_fixed(&value, BITS);
        Ok(Eps { value, num: num as u128, den: den as u128, fixed })
    }
}

/// Running state of all components at one `N`.
#[derive(Clone, Debug)]
pub struct Cursor<'a> {
    comps: &'a [Component],
    pub n: u64,
    state: Vec<u128>,
}

impl<'a> Cursor<'a> {
    pub fn at(comps: &'a [Component], n: u64) -> Self {
        let state = comps
            .iter()
            .map(|c| match c {
                Component::Exact { p, q } => (n as u128 * *p as u128) % *q as u128,
                Component::Fixed { center, .. } => center.wrapping_mul(n as u128),
            })
            .collect();
        Cursor { comps, n, state }
    }

    pub fn advance(&mut self) {
        self.n += 1;
        for (s, c) in self.state.iter_mut().zip(self.comps) {
            match c {
                Component::Exact { p, q } => {
                    *s += *p as u128;
                    if *s >= *q as u128 {
                        *s -= *q as u128;
                    }
                }
                Component::Fixed { center, .. } => *s = s.wrapping_add(*center),
            }
        }
    }

    /// Certified vertex of component `k` under `target`, if any.
    pub fn vertex(&self, k: usize, target: Target, eps: &Eps) -> Option<u8> {
        let s = self.state[k];
        match &self.comps[k] {
            Component::Exact { q, .. } => {
                let q = *q as u128;
                let near0 = s * eps.den < eps.num * q;
                let near1 = s > 0 && (q - s) * eps.den < eps.num * q;
                pick(near0, near1, target)
            }
            Component::Fixed { err, .. } => {
                let e = err.checked_mul(self.n as u128)?;
                let near0 = s > e && s.checked_add(e).is_some_and(|x| x < eps.fixed);
                let g = s.wrapping_neg();
                let near1 = s != 0 && g > e && g.checked_add(e).is_some_and(|x| x < eps.fixed);
                pick(near0, near1, target)
            }
        }
    }

    /// All vertices, or `None` as soon as one component misses.
    pub fn match_all(&self, targets: &[Target], eps: &Eps) -> Option<Vec<u8>> {
        let mut out = Vec::with_capacity(targets.len());
        for (k, t) in targets.iter().enumerate() {
            out.push(self.vertex(k, *t, eps)?);
        }
        Some(out)
    }
}

fn pick(near0: bool, near1: bool, target: Target) -> Option<u8> {
    match target {
        Target::Free if near0 => Some(0),
        Target::Free if near1 => Some(1),
        Target::Zero if near0 => Some(0),
        Target::One if near1 => Some(1),
        _ => None,
    }
}

/// Exact-arithmetic distance `|{N v} - χ|` upper bound, for reporting.
pub fn distance_bound(v: &Interval, n: u64, chi: u8) -> Result<BigRational> {
    let x = v.scale(&BigRational::from_integer(BigInt::from(n)));
    let fl = x.lo().floor();
    let fr = Interval::new(x.lo() - &fl, x.hi() - &fl);
    let target = if chi == 0 { BigRational::zero() } else { BigRational::one() };
    let a = (fr.lo() - &target).abs();
    let b = (fr.hi() - &target).abs();
    let d = if a > b { a } else { b };
    // a wrapped enclosure means the distance is to the other vertex
    if d > BigRational::new(1.into(), 2.into()) {
        let t2 = BigRational::one() - &target;
        let a = (fr.lo() - &t2).abs();
        let b = (fr.hi() - &t2).abs();
        return Ok(if a > b { a } else { b });
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::{rat, sqrt_enclosure};

    #[test]
    fn exact_components_hit_multiples() {
        let comps = vec![Component::from_interval(&Interval::exact(rat(1, 6))).unwrap()];
        let eps = Eps::new(rat(1, 1000)).unwrap();
        let mut cur = Cursor::at(&comps, 1);
        let mut hits = Vec::new();
        while cur.n <= 30 {
            if cur.match_all(&[Target::Free], &eps).is_some() {
                hits.push(cur.n);
            }
            cur.advance();
        }
        assert_eq!(hits, vec![6, 12, 18, 24, 30]);
    }

    #[test]
    fn fixed_components_match_direct_evaluation() {
        let s2 = sqrt_enclosure(&rat(2, 1), 60).unwrap();
        let comps = vec![Component::from_interval(&s2).unwrap()];
        let eps = Eps::new(rat(1, 100)).unwrap();
        let mut cur = Cursor::at(&comps, 1);
        for _ in 0..5000 {
            let x = cur.n as f64 * std::f64::consts::SQRT_2;
            let fr = x - x.floor();
            let expect = if fr < 0.0099 {
                Some(0)
            } else if fr > 0.9901 {
                Some(1)
            } else if fr > 0.0101 && fr < 0.9899 {
                None
            } else {
                cur.advance();
                continue;
            };
            assert_eq!(cur.vertex(0, Target::Free, &eps), expect, "N = {}", cur.n);
            cur.advance();
        }
        // restarting mid-stream gives the same state
        let again = Cursor::at(&comps, cur.n);
        assert_eq!(again.state, cur.state);
    }

    #[test]
    fn targets_restrict_vertices() {
        let comps = vec![Component::from_interval(&Interval::exact(rat(999, 1000))).unwrap()];
        let eps = Eps::new(rat(1, 100)).unwrap();
        let cur = Cursor::at(&comps, 1);
        assert_eq!(cur.vertex(0, Target::Free, &eps), Some(1));
        assert_eq!(cur.vertex(0, Target::Zero, &eps), None);
        assert_eq!(cur.vertex(0, Target::One, &eps), Some(1));
    }
}
