//! Iterated indices of symplectic path germs: `i(γ,m)`, `ν(γ,m)`, the mean
//! index, the Viterbo shift and the jump horizon.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal_form::{BasicBlock, NormalForm};
use crate::real::{format_decimal, format_rational, int, rat, Interval};
use crate::relations::{LinearForm, Relation, RelationSystem};
use crate::rotation::RotationNumber;

/// Initial index plus end form: everything the iteration formula needs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathGerm {
    #[serde(rename = "name")]
    pub label: String,
    /// Maslov-type index `i(γ,1)`.
    pub initial_index: i64,
    #[serde(rename = "blocks")]
    pub end_form: NormalForm,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<Relation>,
}

impl PathGerm {
    pub fn new(label: impl Into<String>, initial_index: i64, end_form: NormalForm) -> Self {
        PathGerm { label: label.into(), initial_index, end_form, relations: Vec::new() }
    }

    pub fn with_relations(mut self, relations: Vec<Relation>) -> Self {
        self.relations = relations;
        self
    }

    pub fn half_dim(&self) -> u32 {
        self.end_form.half_dim()
    }

    /// Rotation numbers of the `R`/`N2` blocks, in slot order.
    pub fn slots(&self) -> Vec<&RotationNumber> {
        self.end_form.blocks.iter().filter_map(BasicBlock::rotation).collect()
    }

    pub fn iterates(&self) -> Iterates {
        Iterates::new(self)
    }

    /// Checks the declared relations against slot count and stored digits.
    pub fn check_relations(&self) -> Result<RelationSystem> {
        let slots = self.slots();
        let ivs: Vec<Interval> = slots.iter().map(|r| r.interval()).collect();
        for r in &self.relations {
            if r.max_slot() > slots.len() {
                return Err(Error::Invalid(format!(
                    "{}: relation `{}` refers to rho{} but the end form has {} rotation blocks",
                    self.label,
                    r,
                    r.max_slot(),
                    slots.len()
                )));
            }
            if !r.residual(&ivs).contains(&BigRational::zero()) {
                return Err(Error::Inconsistent(format!(
                    "{}: relation `{}` contradicts the stored rotation numbers",
                    self.label, r
                )));
            }
        }
        let mut sys = RelationSystem::new(&self.relations)?;
        for (k, rho) in slots.iter().enumerate() {
            if let Some((p, q)) = rho.as_rational() {
                let mut row = std::collections::BTreeMap::new();
                row.insert(k + 1, BigRational::from_integer(1.into()));
                sys.insert(row, rat(p as i64, q as i64)).map_err(|_| {
                    Error::Inconsistent(format!("{}: relations contradict rho{} = {}/{}", self.label, k + 1, p, q))
                })?;
            }
        }
        Ok(sys)
    }
}

/// Precomputed iteration data: `K = i + S⁺(1) - C`, the negative-splitting
/// points `a_j` with weights, and `S⁺(1)`, `C`.
#[derive(Clone, Debug)]
pub struct Iterates {
    pub k: i64,
    pub s_plus: i64,
    pub c: i64,
    pub n: i64,
    pub initial_index: i64,
    pub points: Vec<(RotationNumber, u32)>,
    // (nullity at eigenvalue 1 every m, extra nullity at even m) from N1 blocks
    null_every: u64,
    null_even: u64,
    // rotations of R/N2 blocks, each contributing 2 when mρ ∈ Z
    roots: Vec<RotationNumber>,
}

impl Iterates {
    pub fn new(germ: &PathGerm) -> Self {
        let nf = &germ.end_form;
        let s_plus = nf.splitting_plus_at_one() as i64;
        let points = nf.negative_splitting_points();
        let c: i64 = points.iter().map(|(_, w)| *w as i64).sum();
        let mut null_every = 0;
        let mut null_even = 0;
        let mut roots = Vec::new();
        for b in &nf.blocks {
            match b {
                BasicBlock::N1 { lambda, b } => {
                    let v = if *b == 0 { 2 } else { 1 };
                    if *lambda == 1 {
                        null_every += v;
                    } else {
                        null_even += v;
                    }
                }
                BasicBlock::R { rho } | BasicBlock::N2 { rho, .. } => roots.push(rho.clone()),
                _ => {}
            }
        }
        Iterates {
            k: germ.initial_index + s_plus - c,
            s_plus,
            c,
            n: nf.half_dim() as i64,
            initial_index: germ.initial_index,
            points,
            null_every,
            null_even,
            roots,
        }
    }

    /// `i(γ,m) = m K + 2 Σ E(m a_j) S⁻ - (S⁺(1) + C)`.
    pub fn index(&self, m: u64) -> Result<i64> {
        assert!(m >= 1, "iterates start at m = 1");
        let mut acc = m as i64 * self.k - (self.s_plus + self.c);
        for (a, w) in &self.points {
            acc += 2 * *w as i64 * a.ceil_mul(m)?;
        }
        Ok(acc)
    }

    pub fn viterbo(&self, m: u64) -> Result<i64> {
        Ok(self.index(m)? - self.n)
    }

    /// `ν(γ,m)`.
    pub fn nullity(&self, m: u64) -> u64 {
        let mut acc = self.null_every;
        if m.is_multiple_of(2) {
            acc += self.null_even;
        }
        for r in &self.roots {
            if r.mul_is_integer(m) {
                acc += 2;
            }
        }
        acc
    }

    /// `(low, high)` with `-low ≤ i(γ,m) - m î < high + 1`.
    pub fn deviation_bound(&self) -> (i64, i64) {
        (self.s_plus + self.c, (self.c - self.s_plus).max(0))
    }

    /// Lower bound for `i(γ,m+l) - i(γ,l)` over all `l ≥ 1`.
    pub fn min_increment(&self, m: u64) -> Result<i64> {
        let mut acc = m as i64 * self.k;
        for (a, w) in &self.points {
            acc += 2 * *w as i64 * a.floor_mul(m)?;
        }
        Ok(acc)
    }

    /// Upper bound for `i(γ,m+l) - i(γ,l)` over all `l ≥ 1`.
    pub fn max_increment(&self, m: u64) -> Result<i64> {
        let mut acc = m as i64 * self.k;
        for (a, w) in &self.points {
            acc += 2 * *w as i64 * a.ceil_mul(m)?;
        }
        Ok(acc)
    }
}

pub fn index_at(germ: &PathGerm, m: u64) -> Result<i64> {
    if m == 0 {
        return Err(Error::Invalid("iterate number must be at least 1".into()));
    }
    germ.iterates().index(m)
}

pub fn nullity_at(germ: &PathGerm, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::Invalid("iterate number must be at least 1".into()));
    }
    Ok(germ.iterates().nullity(m))
}

/// Viterbo index `i(γ,m) - n`.
pub fn viterbo_index(germ: &PathGerm, m: u64, n: u32) -> Result<i64> {
    if germ.half_dim() != n {
        return Err(Error::Invalid(format!(
            "{} has half-dimension {}, expected {}",
            germ.label,
            germ.half_dim(),
            n
        )));
    }
    Ok(index_at(germ, m)? - n as i64)
}

pub fn deviation_bound(germ: &PathGerm) -> (i64, i64) {
    germ.iterates().deviation_bound()
}

/// Mean index `î = i + S⁺(1) - C + Σ (θ/π) S⁻`, reduced modulo declared
/// relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanIndex {
    /// Linear form in the rotation slots left after reduction.
    pub form: LinearForm,
    pub enclosure: Interval,
    pub sign: Ordering,
}

impl MeanIndex {
    pub fn exact(&self) -> Option<&BigRational> {
        if self.form.is_constant() {
            Some(&self.form.constant)
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Ordering::Equal
    }

    pub fn sign_i64(&self) -> i64 {
        match self.sign {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    /// Enclosure of `|î|`.
    pub fn abs(&self) -> Interval {
        self.enclosure.abs()
    }

    pub fn to_f64(&self) -> f64 {
        self.enclosure.to_f64()
    }
}

impl fmt::Display for MeanIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact() {
            Some(v) => write!(f, "{}", format_rational(v)),
            None => write!(f, "{}", format_decimal(&self.enclosure.mid(), 20)),
        }
    }
}

pub fn mean_index(germ: &PathGerm) -> Result<MeanIndex> {
    let sys = germ.check_relations()?;
    let it = germ.iterates();
    let mut form = LinearForm::constant(int(it.k));
    let mut slot = 0;
    for b in &germ.end_form.blocks {
        match b {
            BasicBlock::N1 { lambda: -1, b } if *b <= 0 => form.constant += int(1),
            BasicBlock::R { .. } => {
                slot += 1;
                form.add_term(slot, int(2));
            }
            BasicBlock::N2 { trivial, .. } => {
                slot += 1;
                if !*trivial {
                    form.constant += int(2);
                }
            }
            _ => {}
        }
    }
    let form = sys.reduce(&form);
    let ivs: Vec<Interval> = germ.slots().iter().map(|r| r.interval()).collect();
    let enclosure = form.evaluate(&ivs);
    let sign = if form.is_constant() {
        form.constant.cmp(&BigRational::zero())
    } else {
        enclosure.sign().ok_or_else(|| {
            Error::Undecidable(format!(
                "sign of the mean index of {} (enclosure {}); declare a relation or add digits",
                germ.label, enclosure
            ))
        })?
    };
    Ok(MeanIndex { form, enclosure, sign })
}

/// Jump horizon: `certified` comes from the deviation bound alone, `tightened`
/// is the least `m₀` for which the increment bounds already give
/// `i(m+l) - i(l) ≥ n+1` (or `≤ -n-1`) for every `m ≥ m₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    pub certified: u64,
    pub tightened: u64,
}

impl Horizon {
    pub fn value(&self) -> u64 {
        self.tightened
    }
}

pub fn germ_horizon(germ: &PathGerm, n: u32) -> Result<Horizon> {
    let mi = mean_index(germ)?;
    if mi.is_zero() {
        return Err(Error::Hypothesis(format!(
            "{} has zero mean index; the jump horizon is infinite",
            germ.label
        )));
    }
    let it = germ.iterates();
    let (low, high) = it.deviation_bound();
    let need = BigRational::from_integer((n as i64 + 2 + low + high).into());
    let bound = need / mi.abs().lo().clone();
    let certified = bound.ceil().to_integer().to_u64().unwrap_or(u64::MAX).max(1);
    let target = n as i64 + 1;
    let positive = mi.sign == Ordering::Greater;
    let mut tightened = certified;
    let mut m = certified;
    while m > 1 {
        let ok = if positive {
            it.min_increment(m - 1)? >= target
        } else {
            it.max_increment(m - 1)? <= -target
        };
        if !ok {
            break;
        }
        m -= 1;
        tightened = m;
    }
    Ok(Horizon { certified, tightened })
}

/// `m̄`: the maximum of the per-germ horizons.
pub fn stable_jump_horizon(germs: &[PathGerm], n: u32) -> Result<Horizon> {
    let mut h = Horizon { certified: 1, tightened: 1 };
    for g in germs {
        let gh = germ_horizon(g, n)?;
        h.certified = h.certified.max(gh.certified);
        h.tightened = h.tightened.max(gh.tightened);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::{BasicBlock, Sign};

    fn n1() -> BasicBlock {
        BasicBlock::n1(1, 1).unwrap()
    }

    fn irr(s: &str) -> RotationNumber {
        RotationNumber::irrational(s, 12).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let g = PathGerm::new("y", 1, NormalForm::new(vec![n1()]));
        for m in 1..20 {
            assert_eq!(index_at(&g, m).unwrap(), 2 * m as i64 - 1);
            assert_eq!(nullity_at(&g, m).unwrap(), 1);
        }
        let r = PathGerm::new("r", 1, NormalForm::new(vec![BasicBlock::r(irr("0.300000000000")).unwrap()]));
        assert_eq!(index_at(&r, 4).unwrap(), 3);
        let third = PathGerm::new("t", 1, NormalForm::new(vec![BasicBlock::r(RotationNumber::rational(1, 3).unwrap()).unwrap()]));
        assert_eq!(nullity_at(&third, 3).unwrap(), 2);
        assert_eq!(nullity_at(&third, 2).unwrap(), 0);
        let v = PathGerm::new("v", 2, NormalForm::new(vec![n1(), BasicBlock::r(irr("0.300000000000")).unwrap()]));
        assert_eq!(viterbo_index(&v, 1, 2).unwrap(), 0);
        assert!(viterbo_index(&v, 1, 3).is_err());
    }

    #[test]
    fn mean_index_signs() {
        let g = PathGerm::new("y", 1, NormalForm::new(vec![n1()]));
        assert_eq!(mean_index(&g).unwrap().exact().unwrap(), &int(2));
        let g = PathGerm::new("y", -3, NormalForm::new(vec![n1()]));
        let mi = mean_index(&g).unwrap();
        assert_eq!(mi.exact().unwrap(), &int(-2));
        assert_eq!(mi.sign, Ordering::Less);

        let rho = irr("0.618033988749894848");
        let z = PathGerm::new(
            "z",
            -1,
            NormalForm::new(vec![n1(), BasicBlock::r(rho.clone()).unwrap(), BasicBlock::r(rho.conjugate()).unwrap()]),
        );
        assert!(matches!(mean_index(&z), Err(Error::Undecidable(_))));
        let z = z.with_relations(vec![Relation::parse("rho1 + rho2 = 1").unwrap()]);
        assert!(mean_index(&z).unwrap().is_zero());
    }

    #[test]
    fn deviation_bounds() {
        let g = PathGerm::new("y", 1, NormalForm::new(vec![n1()]));
        assert_eq!(deviation_bound(&g), (1, 0));
        let g = PathGerm::new(
            "y",
            1,
            NormalForm::new(vec![n1(), BasicBlock::r(irr("0.300000000001")).unwrap(), BasicBlock::r(irr("0.700000000003")).unwrap()]),
        );
        assert_eq!(deviation_bound(&g), (3, 1));
        let d = PathGerm::new("d", 0, NormalForm::new(vec![BasicBlock::D { sign: Sign::Plus }]));
        assert_eq!(deviation_bound(&d), (0, 0));
    }

    #[test]
    fn horizons() {
        let g = PathGerm::new("y", 1, NormalForm::new(vec![n1()]));
        let h = germ_horizon(&g, 1).unwrap();
        assert_eq!(h.certified, 2);
        assert_eq!(h.tightened, 1);
        let g2 = PathGerm::new("y", -3, NormalForm::new(vec![n1()]));
        let h2 = germ_horizon(&g2, 1).unwrap();
        assert_eq!(h2.certified, 2);
        assert_eq!(h2.tightened, 1);
        let both = stable_jump_horizon(&[g, g2], 1).unwrap();
        assert_eq!(both, Horizon { certified: 2, tightened: 1 });
        let z = PathGerm::new("z", -1, NormalForm::new(vec![n1(), BasicBlock::D { sign: Sign::Plus }]));
        assert!(matches!(stable_jump_horizon(&[z], 2), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn negative_fractional_parts_are_never_used() {
        // the N1(-1, b<=0) point sits at a = 1/2
        let g = PathGerm::new("h", 0, NormalForm::new(vec![BasicBlock::n1(-1, -1).unwrap()]));
        let it = g.iterates();
        assert_eq!(it.index(1).unwrap(), 0);
        assert_eq!(it.nullity(1), 0);
        assert_eq!(it.nullity(2), 1);
        assert!(it.points.iter().all(|(a, _)| a.is_half()));
    }
}
