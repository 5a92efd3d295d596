//! Declared exact linear relations among the rotation numbers of one germ,
//! and exact reduction of linear forms modulo those relations.
//!
//! Slot `k` (written `rhoK`, 1-based) is the rotation number of the k-th
//! block of the end form that carries one (`R` or `N2`).

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::real::{format_rational, parse_rational, Interval};

/// `Σ c_k ρ_k = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub coeffs: BTreeMap<usize, BigRational>,
    pub rhs: BigRational,
}

impl Relation {
    pub fn parse(src: &str) -> Result<Self> {
        let (l, r) = src
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("relation `{}` has no `=`", src)))?;
        let left = LinearForm::parse(l)?;
        let right = LinearForm::parse(r)?;
        let mut coeffs = left.coeffs;
        for (k, c) in right.coeffs {
            let e = coeffs.entry(k).or_insert_with(BigRational::zero);
            *e -= c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        if coeffs.is_empty() {
            return Err(Error::Parse(format!("relation `{}` involves no rotation number", src)));
        }
        Ok(Relation { coeffs, rhs: right.constant - left.constant })
    }

    pub fn max_slot(&self) -> usize {
        self.coeffs.keys().copied().max().unwrap_or(0)
    }

    /// Enclosure of `Σ c_k ρ_k - rhs` given slot enclosures.
    pub fn residual(&self, slots: &[Interval]) -> Interval {
        let mut acc = Interval::exact(-self.rhs.clone());
        for (k, c) in &self.coeffs {
            acc = acc.add(&slots[*k - 1].scale(c));
        }
        acc
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in &self.coeffs {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if !a.is_one() {
                write!(f, "{}*", format_rational(&a))?;
            }
            write!(f, "rho{}", k)?;
            first = false;
        }
        write!(f, " = {}", format_rational(&self.rhs))
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Relation::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// `constant + Σ c_k ρ_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearForm {
    pub constant: BigRational,
    pub coeffs: BTreeMap<usize, BigRational>,
}

impl LinearForm {
    pub fn constant(c: BigRational) -> Self {
        LinearForm { constant: c, coeffs: BTreeMap::new() }
    }

    pub fn add_term(&mut self, slot: usize, c: BigRational) {
        let e = self.coeffs.entry(slot).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&slot);
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn evaluate(&self, slots: &[Interval]) -> Interval {
        let mut acc = Interval::exact(self.constant.clone());
        for (k, c) in &self.coeffs {
            acc = acc.add(&slots[*k - 1].scale(c));
        }
        acc
    }

    fn parse(src: &str) -> Result<Self> {
        let mut out = LinearForm::default();
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty side in relation".into()));
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for ch in s.chars() {
            if (ch == '+' || ch == '-') && !cur.is_empty() {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for t in terms {
            let (sign, body) = match t.strip_prefix('-') {
                Some(b) => (-BigRational::one(), b),
                None => (BigRational::one(), t.strip_prefix('+').unwrap_or(&t)),
            };
            if let Some(pos) = body.find("rho") {
                let coef = match body[..pos].strip_suffix('*') {
                    Some(c) => parse_rational(c)?,
                    None if pos == 0 => BigRational::one(),
                    None => return Err(Error::Parse(format!("bad term `{}`", t))),
                };
                let slot: usize = body[pos + 3..]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad slot in `{}`", t)))?;
                if slot == 0 {
                    return Err(Error::Parse("rotation slots are numbered from 1".into()));
                }
                out.add_term(slot, sign * coef);
            } else {
                out.constant += sign * parse_rational(body)?;
            }
        }
        Ok(out)
    }
}

/// A set of relations in reduced row echelon form over ℚ.
#[derive(Clone, Debug, Default)]
pub struct RelationSystem {
    // (pivot slot, row with coefficient 1 at the pivot and 0 at other pivots, rhs)
    rows: Vec<(usize, BTreeMap<usize, BigRational>, BigRational)>,
}

impl RelationSystem {
    /// Builds the system; an inconsistent set (`0 = c ≠ 0`) is an error.
    pub fn new(relations: &[Relation]) -> Result<Self> {
        let mut sys = RelationSystem::default();
        for r in relations {
            sys.insert(r.coeffs.clone(), r.rhs.clone())?;
        }
        Ok(sys)
    }

    pub fn insert(&mut self, mut row: BTreeMap<usize, BigRational>, mut rhs: BigRational) -> Result<()> {
        for (p, prow, prhs) in &self.rows {
            if let Some(c) = row.get(p).cloned() {
                for (k, v) in prow {
                    let e = row.entry(*k).or_insert_with(BigRational::zero);
                    *e -= &c * v;
                }
                rhs -= &c * prhs;
                row.retain(|_, v| !v.is_zero());
            }
        }
        let Some((&pivot, pc)) = row.iter().next() else {
            if rhs.is_zero() {
                return Ok(());
            }
            return Err(Error::Inconsistent("declared relations contradict each other".into()));
        };
        let pc = pc.clone();
        for v in row.values_mut() {
            *v /= &pc;
        }
        rhs /= &pc;
        for (_, prow, prhs) in self.rows.iter_mut() {
            if let Some(c) = prow.get(&pivot).cloned() {
                for (k, v) in &row {
                    let e = prow.entry(*k).or_insert_with(BigRational::zero);
                    *e -= &c * v;
                }
                *prhs -= &c * &rhs;
                prow.retain(|_, v| !v.is_zero());
            }
        }
        self.rows.push((pivot, row, rhs));
        Ok(())
    }

    /// Eliminates every pivot slot from `form`.
    pub fn reduce(&self, form: &LinearForm) -> LinearForm {
        let mut out = form.clone();
        for (p, prow, prhs) in &self.rows {
            if let Some(c) = out.coeffs.get(p).cloned() {
                for (k, v) in prow {
                    out.add_term(*k, -(&c * v));
                }
                out.constant += &c * prhs;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::rat;

    #[test]
    fn parse_and_print() {
        let r = Relation::parse("rho1 + rho2 = 1").unwrap();
        assert_eq!(r.to_string(), "rho1 + rho2 = 1");
        let r = Relation::parse("2*rho3 - rho1 + 1/2 = 0").unwrap();
        assert_eq!(r.to_string(), "-rho1 + 2*rho3 = -1/2");
        assert_eq!(Relation::parse(&r.to_string()).unwrap(), r);
        assert!(Relation::parse("rho0 = 1").is_err());
        assert!(Relation::parse("1 = 1").is_err());
    }

    #[test]
    fn reduction_eliminates_declared_combinations() {
        let sys = RelationSystem::new(&[Relation::parse("rho1 + rho2 = 1").unwrap()]).unwrap();
        let mut f = LinearForm::constant(rat(-2, 1));
        f.add_term(1, rat(2, 1));
        f.add_term(2, rat(2, 1));
        let g = sys.reduce(&f);
        assert!(g.is_constant());
        assert!(g.constant.is_zero());

        let mut h = LinearForm::constant(rat(0, 1));
        h.add_term(1, rat(2, 1));
        let g = sys.reduce(&h);
        assert!(!g.is_constant());
    }

    #[test]
    fn contradictions_are_detected() {
        let rels = [
            Relation::parse("rho1 + rho2 = 1").unwrap(),
            Relation::parse("2*rho1 + 2*rho2 = 3").unwrap(),
        ];
        assert!(matches!(RelationSystem::new(&rels), Err(Error::Inconsistent(_))));
    }
}
