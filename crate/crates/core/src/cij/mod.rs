//! Common index jump: constructive search for `(N, m_1..m_q)` and
//! self-contained certificates that re-verify from the germ data alone.

pub mod abstract_jump;
pub mod torus;
pub mod verify;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::{mean_index, stable_jump_horizon, Horizon, PathGerm};
use crate::real::{format_decimal, format_rational, int, parse_rational, Interval};

pub use abstract_jump::{
    clearing_modulus, solve_abstract, AbstractFile, AbstractJumpInstance, AbstractRow, AbstractSolution,
    Alpha, Engine, Magnitude, SearchOptions, Slot,
};
pub use torus::Target;
pub use verify::{verify_abstract, verify_certificate, VerifyReport};

pub const CERTIFICATE_VERSION: u32 = 1;

/// Germs with nonzero mean index, the dimension, `δ` and the stable horizon.
#[derive(Clone, Debug)]
pub struct JumpInstance {
    pub germs: Vec<PathGerm>,
    pub n: u32,
    pub delta: BigRational,
    pub horizon: Horizon,
    pub engine: Engine,
    /// Per germ, per row alpha: a lower bound for `min_{1≤m≤m̄} dist(m a, Z)`
    /// when the point is irrational.
    separation: Vec<Vec<Option<BigRational>>>,
}

/// `α_{k,j} = 2 a_j`, one per unit of `S⁻` weight.
pub fn germ_alphas(germ: &PathGerm) -> Result<Vec<Alpha>> {
    let mut out = Vec::new();
    for (a, w) in germ.iterates().points {
        let al = Alpha::doubled(&a)?;
        for _ in 0..w {
            out.push(al.clone());
        }
    }
    Ok(out)
}

/// The abstract row induced by a germ: `β = i + S⁺ - C`, `α = 2a`, `D = î`.
pub fn germ_row(germ: &PathGerm) -> Result<AbstractRow> {
    let mi = mean_index(germ)?;
    if mi.is_zero() {
        return Err(Error::Hypothesis(format!("{} has zero mean index", germ.label)));
    }
    let d = Magnitude::from_interval(mi.exact().cloned(), mi.enclosure.clone(), "mean index")?;
    Ok(AbstractRow { beta: germ.iterates().k, alphas: germ_alphas(germ)?, d })
}

impl JumpInstance {
    pub fn new(germs: Vec<PathGerm>, n: u32, delta: BigRational) -> Result<Self> {
        if germs.is_empty() {
            return Err(Error::Invalid("no characteristics given".into()));
        }
        for g in &germs {
            if g.half_dim() != n {
                return Err(Error::Invalid(format!(
                    "{} has half-dimension {}, expected {}",
                    g.label,
                    g.half_dim(),
                    n
                )));
            }
        }
        let horizon = stable_jump_horizon(&germs, n)?;
        let rows = germs.iter().map(germ_row).collect::<Result<Vec<_>>>()?;
        // validates δ against μ
        AbstractJumpInstance::new(rows.clone(), delta.clone())?;
        let engine = Engine::new(rows, delta.clone())?;
        let mbar = horizon.value();
        let mut separation = Vec::new();
        for row in &engine.rows {
            let mut per = Vec::new();
            for a in &row.alphas {
                per.push(match &a.frac {
                    Some(f) if !f.is_rational() => Some(min_distance(a, mbar)?),
                    _ => None,
                });
            }
            separation.push(per);
        }
        Ok(JumpInstance { germs, n, delta, horizon, engine, separation })
    }

    pub fn mbar(&self) -> u64 {
        self.horizon.value()
    }

    pub fn modulus(&self) -> u64 {
        self.engine.modulus
    }

    /// Search filter beyond the abstract equalities: the horizon guard `m̄+2 ≤ 2m_k`
    /// and, for irrational points, `dist(m_k α, Z)` below every
    /// `dist(m a, Z)`, `m ≤ m̄`, so that the shift by `2m_k` never crosses an
    /// integer.
    fn admissible(&self, sol: &AbstractSolution) -> Result<bool> {
        let mbar = self.mbar();
        for (k, row) in self.engine.rows.iter().enumerate() {
            if 2 * sol.m[k] < mbar + 2 {
                return Ok(false);
            }
            for (j, a) in row.alphas.iter().enumerate() {
                let Some(sep) = &self.separation[k][j] else { continue };
                let fr = match a.frac_mul(sol.m[k]) {
                    Ok(f) => f,
                    Err(_) => return Ok(false),
                };
                let eta_hi = if fr.hi() < &BigRational::new(1.into(), 2.into()) {
                    fr.hi().clone()
                } else {
                    BigRational::one() - fr.lo()
                };
                if &eta_hi >= sep {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Q_k(m)` for `1 ≤ m ≤ m̄`.
    pub fn q_table(&self, k: usize, mk: u64) -> Vec<u32> {
        q_table(&self.germs[k], mk, self.mbar())
    }
}

fn min_distance(a: &Alpha, mbar: u64) -> Result<BigRational> {
    // a = α/2
    let half = BigRational::new(1.into(), 2.into());
    let frac = a.frac.as_ref().expect("irrational");
    let base = frac.interval().add_rat(&int(a.int_part)).scale(&half);
    let mut best: Option<BigRational> = None;
    for m in 1..=mbar {
        let x = base.scale(&int(m as i64));
        let fl = x.floor()?;
        let fr = x.add_rat(&-BigRational::from_integer(fl));
        let d = if fr.hi() < &half { fr.lo().clone() } else { BigRational::one() - fr.hi() };
        best = Some(match best {
            Some(b) if b < d => b,
            _ => d,
        });
    }
    Ok(best.unwrap_or_else(|| half.clone()))
}

pub fn q_table(germ: &PathGerm, mk: u64, mbar: u64) -> Vec<u32> {
    let pts = germ.iterates().points;
    (1..=mbar)
        .map(|m| {
            pts.iter()
                .filter(|(a, _)| a.is_rational() && a.mul_is_integer(2 * mk) && a.mul_is_integer(m))
                .map(|(_, w)| *w)
                .sum()
        })
        .collect()
}

/// Outcome of one display check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub display: String,
    pub subject: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vertex {
    Primary,
    Dual,
}

/// A jump tuple with everything needed to re-check it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpCertificate {
    pub version: u32,
    #[serde(default)]
    pub tool_version: String,
    #[serde(default)]
    pub model_hash: String,
    pub vertex: Vertex,
    #[serde(rename = "N")]
    pub n_jump: u64,
    /// `χ_k` of the `1/(M|î_k|)` components.
    pub chi: Vec<u8>,
    /// `χ_{k,j}` of the `α_{k,j}/|î_k|` components; `None` for rational `α`.
    pub chi_alpha: Vec<Vec<Option<u8>>>,
    pub m: Vec<u64>,
    #[serde(rename = "Delta")]
    pub delta_count: Vec<u32>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<u32>>,
    pub mbar: u64,
    #[serde(rename = "M")]
    pub modulus: u64,
    pub delta: String,
    pub eps: String,
    pub eps_achieved: String,
    #[serde(default)]
    pub checks: Vec<CheckRecord>,
}

impl JumpCertificate {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn delta_value(&self) -> Result<BigRational> {
        parse_rational(&self.delta)
    }

    pub fn eps_value(&self) -> Result<BigRational> {
        parse_rational(&self.eps)
    }
}

fn split_chi(engine: &Engine, chi: &[u8]) -> (Vec<u8>, Vec<Vec<Option<u8>>>) {
    let mut rows = vec![0u8; engine.rows.len()];
    let mut alphas: Vec<Vec<Option<u8>>> = engine.rows.iter().map(|r| vec![None; r.alphas.len()]).collect();
    for (slot, x) in engine.slots.iter().zip(chi) {
        match slot {
            Slot::Row(k) => rows[*k] = *x,
            Slot::Alpha(k, j) => alphas[*k][*j] = Some(*x),
        }
    }
    (rows, alphas)
}

/// Largest `|{N v_c} - χ_c|` over the torus vector, as an upper bound.
pub fn achieved_eps(engine: &Engine, n: u64, chi: &[u8]) -> Result<BigRational> {
    let mut worst = BigRational::zero();
    for (v, x) in engine.values.iter().zip(chi) {
        let d = torus::distance_bound(v, n, *x)?;
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

fn certificate(
    inst: &JumpInstance,
    sol: &AbstractSolution,
    vertex: Vertex,
    eps: &BigRational,
) -> Result<JumpCertificate> {
    let (chi, chi_alpha) = split_chi(&inst.engine, &sol.chi);
    let q = (0..inst.germs.len()).map(|k| inst.q_table(k, sol.m[k])).collect();
    let mut cert = JumpCertificate {
        version: CERTIFICATE_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        model_hash: String::new(),
        vertex,
        n_jump: sol.n,
        chi,
        chi_alpha,
        m: sol.m.clone(),
        delta_count: sol.delta.clone(),
        q,
        mbar: inst.mbar(),
        modulus: inst.modulus(),
        delta: format_rational(&inst.delta),
        eps: format_rational(eps),
        eps_achieved: format_decimal(&achieved_eps(&inst.engine, sol.n, &sol.chi)?, 12),
        checks: Vec::new(),
    };
    let report = verify_certificate(&inst.germs, inst.n, &cert)?;
    if let Some(bad) = report.first_failure() {
        return Err(Error::CheckFailed(format!(
            "freshly built certificate N = {} violates {} for {}: {}",
            sol.n, bad.display, bad.subject, bad.detail
        )));
    }
    cert.checks = report.records;
    Ok(cert)
}

/// The `count` smallest jump tuples at a primary vertex, each verified.
pub fn solve_paths(inst: &JumpInstance, count: usize, opts: &SearchOptions) -> Result<Vec<JumpCertificate>> {
    let targets = vec![Target::Free; inst.engine.comps.len()];
    let found = inst.engine.search(&targets, opts, count, |s| inst.admissible(s))?;
    if found.len() < count {
        return Err(Error::ScanExhausted { found: found.len(), requested: count, scan_limit: opts.scan_limit });
    }
    found.iter().map(|s| certificate(inst, s, Vertex::Primary, &opts.eps)).collect()
}

/// A fresh tuple at the vertex `1 - χ` of `cert`, with `Δ'_k + Δ_k = C_k`.
pub fn dual_certificate(
    inst: &JumpInstance,
    cert: &JumpCertificate,
    opts: &SearchOptions,
) -> Result<JumpCertificate> {
    for g in &inst.germs {
        if g.iterates().points.iter().any(|(a, _)| a.is_rational()) {
            return Err(Error::Hypothesis(format!(
                "{} has a rational rotation point carrying S- weight; the dual vertex does not pair Delta with C",
                g.label
            )));
        }
    }
    let mut chi = Vec::with_capacity(inst.engine.slots.len());
    for slot in &inst.engine.slots {
        chi.push(match slot {
            Slot::Row(k) => cert.chi[*k],
            Slot::Alpha(k, j) => cert.chi_alpha[*k][*j].unwrap_or(0),
        });
    }
    let targets = inst.engine.dual_targets(&chi);
    let cs: Vec<u32> = inst.germs.iter().map(|g| g.iterates().c as u32).collect();
    let found = inst.engine.search(&targets, opts, 1, |s| {
        if !inst.admissible(s)? {
            return Ok(false);
        }
        Ok(s.delta.iter().zip(&cert.delta_count).zip(&cs).all(|((d2, d1), c)| d1 + d2 == *c))
    })?;
    let Some(sol) = found.first() else {
        return Err(Error::ScanExhausted { found: 0, requested: 1, scan_limit: opts.scan_limit });
    };
    let mut out = certificate(inst, sol, Vertex::Dual, &opts.eps)?;
    out.model_hash = cert.model_hash.clone();
    Ok(out)
}

/// Whether `Δ + Δ' = C` holds germwise for a primary/dual pair.
pub fn vertex_symmetry(germs: &[PathGerm], a: &JumpCertificate, b: &JumpCertificate) -> bool {
    germs
        .iter()
        .enumerate()
        .all(|(k, g)| (a.delta_count[k] + b.delta_count[k]) as i64 == g.iterates().c)
}

pub(crate) fn rat_text(x: &BigRational) -> String {
    format_rational(x)
}

pub(crate) fn big(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn interval_distance(fr: &Interval, chi: u8) -> BigRational {
    let t = if chi == 0 { BigRational::zero() } else { BigRational::one() };
    let a = (fr.lo() - &t).abs();
    let b = (fr.hi() - &t).abs();
    if a > b {
        a
    } else {
        b
    }
}
