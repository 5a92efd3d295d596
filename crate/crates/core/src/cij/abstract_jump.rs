//! The abstract jump problem: integers `β_i`, positive reals `α_{i,j}` with
//! `D_i = β_i + Σ_j α_{i,j} ≠ 0`; find `(N, m_1..m_q)` with
//! `m_i β_i + Σ_j E(m_i α_{i,j}) = ϱ_i N + Δ_i`.
//!
//! The search engine here is shared with the path form.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cij::torus::{Component, Cursor, Eps, Target};
use crate::error::{Error, Result};
use crate::real::{eval_expression, format_decimal, format_rational, int, lcm, parse_rational, Interval};
use crate::rotation::RotationNumber;

/// A positive real `int_part + frac`, `frac ∈ (0,1)` or absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alpha {
    pub int_part: i64,
    pub frac: Option<RotationNumber>,
}

impl Alpha {
    /// `θ/π = 2a` for a rotation point `a`.
    pub fn doubled(a: &RotationNumber) -> Result<Self> {
        if let Some((p, q)) = a.as_rational() {
            return Alpha::from_rational(&BigRational::new(BigInt::from(2 * p), BigInt::from(q)));
        }
        let iv = a.interval().scale(&int(2));
        let fl = iv.floor()?;
        let digits = a.digits().expect("decimal kind") - 1;
        let fr = iv.add_rat(&-BigRational::from_integer(fl.clone()));
        Ok(Alpha {
            int_part: fl.to_i64().expect("small"),
            frac: Some(RotationNumber::from_enclosure(&fr, digits)?),
        })
    }

    pub fn from_rational(x: &BigRational) -> Result<Self> {
        if !x.is_positive() {
            return Err(Error::Invalid(format!("alpha must be positive, got {}", x)));
        }
        let fl = x.floor().to_integer();
        let fr = x - BigRational::from_integer(fl.clone());
        let int_part = fl.to_i64().ok_or_else(|| Error::Invalid("alpha too large".into()))?;
        if fr.is_zero() {
            return Ok(Alpha { int_part, frac: None });
        }
        let p = fr.numer().to_u64().ok_or_else(|| Error::Invalid("alpha numerator too large".into()))?;
        let q = fr.denom().to_u64().ok_or_else(|| Error::Invalid("alpha denominator too large".into()))?;
        Ok(Alpha { int_part, frac: Some(RotationNumber::rational(p, q)?) })
    }

    /// Parses a rational literal or an expression such as `sqrt(2)`.
    pub fn parse(src: &str, digits: u32) -> Result<Self> {
        if let Ok(x) = parse_rational(src.trim()) {
            return Alpha::from_rational(&x);
        }
        let iv = eval_expression(src, digits + 2)?;
        if let Some(x) = iv.as_exact() {
            return Alpha::from_rational(x);
        }
        let fl = iv.floor()?;
        let fr = iv.add_rat(&-BigRational::from_integer(fl.clone()));
        let int_part = fl.to_i64().ok_or_else(|| Error::Invalid("alpha too large".into()))?;
        if int_part < 0 || (int_part == 0 && !fr.lo().is_positive()) {
            return Err(Error::Invalid(format!("alpha {} is not positive", src)));
        }
        Ok(Alpha { int_part, frac: Some(RotationNumber::from_enclosure(&fr, digits)?) })
    }

    pub fn is_rational(&self) -> bool {
        self.frac.as_ref().is_none_or(|f| f.is_rational())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let base = int(self.int_part);
        match &self.frac {
            None => Some(base),
            Some(f) => f.as_rational().map(|(p, q)| base + BigRational::new(BigInt::from(p), BigInt::from(q))),
        }
    }

    pub fn interval(&self) -> Interval {
        match &self.frac {
            None => Interval::from_int(self.int_part),
            Some(f) => f.interval().add_rat(&int(self.int_part)),
        }
    }

    pub fn floor_mul(&self, m: u64) -> Result<i64> {
        let f = match &self.frac {
            None => 0,
            Some(r) => r.floor_mul(m)?,
        };
        Ok(self.int_part * m as i64 + f)
    }

    pub fn mul_is_integer(&self, m: u64) -> bool {
        self.frac.as_ref().is_none_or(|f| f.mul_is_integer(m))
    }

    /// `E(m α)`.
    pub fn ceil_mul(&self, m: u64) -> Result<i64> {
        let f = self.floor_mul(m)?;
        Ok(if self.mul_is_integer(m) { f } else { f + 1 })
    }

    /// Enclosure of `{m α}`.
    pub fn frac_mul(&self, m: u64) -> Result<Interval> {
        match &self.frac {
            None => Ok(Interval::from_int(0)),
            Some(f) => f.frac_mul(m),
        }
    }

    pub fn to_text(&self) -> String {
        match (&self.frac, self.as_rational()) {
            (_, Some(x)) => format_rational(&x),
            (Some(f), None) => {
                let d = f.digits().unwrap_or(20);
                format_decimal(&self.interval().mid(), d)
            }
            (None, None) => unreachable!(),
        }
    }
}

/// Sign and size of `D_i` (or of a mean index).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Magnitude {
    pub exact: Option<BigRational>,
    pub enclosure: Interval,
    pub sign: i64,
}

impl Magnitude {
    pub fn from_interval(exact: Option<BigRational>, enclosure: Interval, what: &str) -> Result<Self> {
        let sign = match &exact {
            Some(x) => x.cmp(&BigRational::zero()),
            None => enclosure
                .sign()
                .ok_or_else(|| Error::Undecidable(format!("sign of {} (enclosure {})", what, enclosure)))?,
        };
        if sign == Ordering::Equal {
            return Err(Error::Hypothesis(format!("{} vanishes", what)));
        }
        Ok(Magnitude { exact, enclosure, sign: if sign == Ordering::Greater { 1 } else { -1 } })
    }

    pub fn abs(&self) -> Interval {
        match &self.exact {
            Some(x) => Interval::exact(x.abs()),
            None => self.enclosure.abs(),
        }
    }
}

/// One index of the abstract problem.
#[derive(Clone, Debug)]
pub struct AbstractRow {
    pub beta: i64,
    pub alphas: Vec<Alpha>,
    pub d: Magnitude,
}

impl AbstractRow {
    /// `D = β + Σ α` decided from the data alone.
    pub fn new(beta: i64, alphas: Vec<Alpha>) -> Result<Self> {
        let mut enc = Interval::from_int(beta);
        let mut exact = Some(int(beta));
        for a in &alphas {
            enc = enc.add(&a.interval());
            exact = match (exact, a.as_rational()) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            };
        }
        let d = Magnitude::from_interval(exact, enc, "D = beta + sum(alpha)")?;
        Ok(AbstractRow { beta, alphas, d })
    }
}

/// Serialized form of an abstract instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractFile {
    pub rows: Vec<AbstractRowFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractRowFile {
    pub beta: i64,
    #[serde(default)]
    pub alpha: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct AbstractJumpInstance {
    pub rows: Vec<AbstractRow>,
    pub delta: BigRational,
}

impl AbstractJumpInstance {
    pub fn new(rows: Vec<AbstractRow>, delta: BigRational) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("at least one index row is required".into()));
        }
        let half = BigRational::new(1.into(), 2.into());
        if !delta.is_positive() || delta >= half {
            return Err(Error::Invalid(format!("delta must lie in (0, 1/2), got {}", delta)));
        }
        let mu = rows.iter().map(|r| r.alphas.len()).max().unwrap_or(0);
        if &delta * int(mu as i64) >= half {
            return Err(Error::Invalid(format!(
                "delta * max mu = {} * {} must be below 1/2",
                format_rational(&delta),
                mu
            )));
        }
        Ok(AbstractJumpInstance { rows, delta })
    }

    pub fn from_file(f: &AbstractFile, digits: u32, default_delta: &BigRational) -> Result<Self> {
        let mut rows = Vec::new();
        for r in &f.rows {
            let alphas = r.alpha.iter().map(|s| Alpha::parse(s, digits)).collect::<Result<Vec<_>>>()?;
            rows.push(AbstractRow::new(r.beta, alphas)?);
        }
        let delta = match &f.delta {
            Some(s) => parse_rational(s)?,
            None => default_delta.clone(),
        };
        AbstractJumpInstance::new(rows, delta)
    }
}

/// Least `M` with `M α ∈ Z` for every rational `α`.
pub fn clearing_modulus<'a>(alphas: impl IntoIterator<Item = &'a Alpha>) -> u64 {
    let mut m = BigInt::one();
    for a in alphas {
        if let Some(x) = a.as_rational() {
            m = lcm(&m, x.denom());
        }
    }
    m.to_u64().expect("modulus fits in 64 bits")
}

/// One solution `(N, χ, m_i, Δ_i)` of the abstract problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractSolution {
    pub n: u64,
    pub chi: Vec<u8>,
    pub m: Vec<u64>,
    pub delta: Vec<u32>,
}

/// Where each torus component comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// `1/(M|D_i|)`.
    Row(usize),
    /// `α_{i,j}/|D_i|` for an irrational `α`.
    Alpha(usize, usize),
}

/// Search options shared by both forms.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub eps: BigRational,
    pub scan_limit: u64,
    pub workers: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { eps: BigRational::new(1.into(), 1000.into()), scan_limit: 10_000_000, workers: 1 }
    }
}

const CHUNK: u64 = 1 << 18;

/// Torus vector plus the row data needed to turn a vertex match into
/// `(m_i, Δ_i)`.
#[derive(Clone, Debug)]
pub struct Engine {
    pub rows: Vec<AbstractRow>,
    pub delta: BigRational,
    pub modulus: u64,
    pub slots: Vec<Slot>,
    pub values: Vec<Interval>,
    pub comps: Vec<Component>,
}

impl Engine {
    pub fn new(rows: Vec<AbstractRow>, delta: BigRational) -> Result<Self> {
        let modulus = clearing_modulus(rows.iter().flat_map(|r| r.alphas.iter()));
        let mut slots = Vec::new();
        let mut values = Vec::new();
        let big_m = BigRational::from_integer(BigInt::from(modulus));
        for (i, r) in rows.iter().enumerate() {
            let abs_d = r.d.abs();
            slots.push(Slot::Row(i));
            values.push(abs_d.scale(&big_m).recip()?);
            for (j, a) in r.alphas.iter().enumerate() {
                if a.is_rational() {
                    continue;
                }
                slots.push(Slot::Alpha(i, j));
                values.push(a.interval().div(&abs_d)?);
            }
        }
        let comps = values.iter().map(Component::from_interval).collect::<Result<Vec<_>>>()?;
        Ok(Engine { rows, delta, modulus, slots, values, comps })
    }

    /// Vertex targets for the dual search: flip every component that is not
    /// rational.
    pub fn dual_targets(&self, chi: &[u8]) -> Vec<Target> {
        self.comps
            .iter()
            .zip(chi)
            .map(|(c, x)| {
                if c.is_exact() {
                    Target::Free
                } else if *x == 0 {
                    Target::One
                } else {
                    Target::Zero
                }
            })
            .collect()
    }

    /// `[N/(M|D_i|)]`.
    pub fn floor_ratio(&self, row: usize, n: u64) -> Result<u64> {
        let k = self.slots.iter().position(|s| *s == Slot::Row(row)).expect("row slot");
        let x = self.values[k].scale(&BigRational::from_integer(BigInt::from(n)));
        let f = x.floor()?;
        f.to_u64().ok_or_else(|| Error::Invalid("iterate count out of range".into()))
    }

    /// Turns a vertex match into a solution, or `None` when a certified
    /// condition fails or is undecidable at the stored precision.
    pub fn solution(&self, n: u64, chi: &[u8]) -> Option<AbstractSolution> {
        let mut m = Vec::with_capacity(self.rows.len());
        let mut deltas = Vec::with_capacity(self.rows.len());
        let one = BigRational::one();
        for (i, row) in self.rows.iter().enumerate() {
            let k = self.slots.iter().position(|s| *s == Slot::Row(i))?;
            let fl = self.floor_ratio(i, n).ok()?;
            let mi = (fl + chi[k] as u64) * self.modulus;
            if mi == 0 {
                return None;
            }
            let mut d = 0u32;
            let mut lhs = row.beta * mi as i64;
            for a in &row.alphas {
                let fr = a.frac_mul(mi).ok()?;
                if a.is_rational() {
                    if !fr.as_exact()?.is_zero() {
                        return None;
                    }
                } else {
                    let small = fr.hi() < &self.delta && fr.lo().is_positive();
                    let large = fr.lo() > &(&one - &self.delta) && fr.hi() < &one;
                    if small {
                        d += 1;
                    } else if !large {
                        return None;
                    }
                }
                lhs += a.ceil_mul(mi).ok()?;
            }
            if lhs != row.d.sign * n as i64 + d as i64 {
                return None;
            }
            m.push(mi);
            deltas.push(d);
        }
        Some(AbstractSolution { n, chi: chi.to_vec(), m, delta: deltas })
    }

    /// Scans `N = 1..=scan_limit` in chunks, `workers` chunks at a time, and
    /// returns the `count` smallest `N` accepted by `accept`.
    pub fn search<F>(
        &self,
        targets: &[Target],
        opts: &SearchOptions,
        count: usize,
        accept: F,
    ) -> Result<Vec<AbstractSolution>>
    where
        F: Fn(&AbstractSolution) -> Result<bool> + Sync,
    {
        let eps = Eps::new(opts.eps.clone())?;
        let workers = opts.workers.max(1);
        let mut found: Vec<AbstractSolution> = Vec::new();
        let mut start = 1u64;
        while start <= opts.scan_limit && found.len() < count {
            let ranges: Vec<(u64, u64)> = (0..workers as u64)
                .map(|w| start + w * CHUNK)
                .filter(|s| *s <= opts.scan_limit)
                .map(|s| (s, (s + CHUNK - 1).min(opts.scan_limit)))
                .collect();
            start = ranges.last().map(|r| r.1 + 1).unwrap_or(opts.scan_limit + 1);
            let results: Vec<Result<Vec<AbstractSolution>>> = if ranges.len() == 1 {
                vec![self.scan_range(ranges[0], targets, &eps, count, &accept)]
            } else {
                std::thread::scope(|s| {
                    let handles: Vec<_> = ranges
                        .iter()
                        .map(|r| {
                            let accept = &accept;
                            let eps = &eps;
                            s.spawn(move || self.scan_range(*r, targets, eps, count, accept))
                        })
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
                })
            };
            for r in results {
                found.extend(r?);
                if found.len() >= count {
                    break;
                }
            }
        }
        found.sort_by_key(|s| s.n);
        found.truncate(count);
        Ok(found)
    }

    fn scan_range<F>(
        &self,
        (lo, hi): (u64, u64),
        targets: &[Target],
        eps: &Eps,
        count: usize,
        accept: &F,
    ) -> Result<Vec<AbstractSolution>>
    where
        F: Fn(&AbstractSolution) -> Result<bool>,
    {
        let mut out = Vec::new();
        let mut cur = Cursor::at(&self.comps, lo);
        while cur.n <= hi {
            if let Some(chi) = cur.match_all(targets, eps) {
                if let Some(sol) = self.solution(cur.n, &chi) {
                    if accept(&sol)? {
                        out.push(sol);
                        if out.len() >= count {
                            break;
                        }
                    }
                }
            }
            cur.advance();
        }
        Ok(out)
    }
}

/// Solutions of the abstract problem for `N ≤ scan_limit`, smallest first.
pub fn solve_abstract(
    instance: &AbstractJumpInstance,
    count: usize,
    opts: &SearchOptions,
) -> Result<Vec<AbstractSolution>> {
    let engine = Engine::new(instance.rows.clone(), instance.delta.clone())?;
    let targets = vec![Target::Free; engine.comps.len()];
    let found = engine.search(&targets, opts, count, |_| Ok(true))?;
    if found.len() < count {
        return Err(Error::ScanExhausted { found: found.len(), requested: count, scan_limit: opts.scan_limit });
    }
    Ok(found)
}

/// Partial results of a scan that ran out, for callers that want them.
pub fn solve_abstract_partial(
    instance: &AbstractJumpInstance,
    count: usize,
    opts: &SearchOptions,
) -> Result<Vec<AbstractSolution>> {
    let engine = Engine::new(instance.rows.clone(), instance.delta.clone())?;
    let targets = vec![Target::Free; engine.comps.len()];
    engine.search(&targets, opts, count, |_| Ok(true))
}
