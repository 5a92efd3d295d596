//! Morse-type bookkeeping over iterates of closed characteristics: good and
//! bad iterates, average Euler characteristics, the resonance identity,
//! perfectness, Morse numbers against the Betti numbers of `1/(1-t²)`, the
//! jump counts at a certificate and the multiplicity report built from a
//! primary/dual certificate pair.
//!
//! All thresholds are in Viterbo indices `i(y^m) = i(y,m) - n`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cij::{dual_certificate, solve_paths, CheckRecord, JumpCertificate, JumpInstance, SearchOptions};
use crate::error::{Error, Result};
use crate::iteration::{mean_index, Iterates, MeanIndex, PathGerm};
use crate::normal_form::BasicBlock;
use crate::real::{format_decimal, format_rational, int, rat, Interval};
use crate::surface::SurfaceModel;

/// Iterates scanned when a zero mean index leaves no certified horizon.
pub const ZERO_MEAN_SCAN: u64 = 10_000;
const NONDEGENERACY_SCAN: u64 = 1_000;

pub fn is_good_iterate(germ: &PathGerm, m: u64) -> Result<bool> {
    let it = germ.iterates();
    Ok((it.index(m)? - it.index(1)?).rem_euclid(2) == 0)
}

/// Exactly one `N1(1,1)` factor and `ν(y,m) = 1` for the first thousand
/// iterates.
pub fn is_nondegenerate(germ: &PathGerm) -> bool {
    let ones = germ
        .end_form
        .blocks
        .iter()
        .filter(|b| matches!(b, BasicBlock::N1 { lambda: 1, b: 1 }))
        .count();
    let it = germ.iterates();
    ones == 1 && (1..=NONDEGENERACY_SCAN).all(|m| it.nullity(m) == 1)
}

/// `χ̂(y)`: `(-1)^{i(y)}` if `i(y²) - i(y)` is even, half that otherwise.
pub fn average_euler_char(germ: &PathGerm) -> Result<BigRational> {
    if !is_nondegenerate(germ) {
        return Err(Error::Hypothesis(format!(
            "{} is degenerate; the average Euler characteristic is only supported for nondegenerate iterates",
            germ.label
        )));
    }
    let it = germ.iterates();
    let i1 = it.viterbo(1)?;
    let i2 = it.viterbo(2)?;
    let s = if i1.rem_euclid(2) == 0 { int(1) } else { int(-1) };
    Ok(if (i2 - i1).rem_euclid(2) == 0 { s } else { s / int(2) })
}

/// Residuals of `Σ_{î>0} χ̂/î = 1/2` and `Σ_{î<0} χ̂/î = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resonance {
    pub positive: Interval,
    pub negative: Interval,
}

impl Resonance {
    pub fn admissible(&self, tol: &BigRational) -> bool {
        let ok = |r: &Interval| r.hi() <= tol && r.lo() >= &-tol.clone();
        ok(&self.positive) && ok(&self.negative)
    }
}

pub fn resonance_residuals(model: &SurfaceModel) -> Result<Resonance> {
    let mut pos = Interval::exact(rat(-1, 2));
    let mut neg = Interval::from_int(0);
    for c in &model.characteristics {
        let mi = mean_index(c)?;
        if mi.is_zero() {
            return Err(Error::Hypothesis(format!(
                "{} has zero mean index; the resonance identity excludes it",
                c.label
            )));
        }
        let term = Interval::exact(average_euler_char(c)?).div(&mi.enclosure)?;
        if mi.sign_i64() > 0 {
            pos = pos.add(&term);
        } else {
            neg = neg.add(&term);
        }
    }
    Ok(Resonance { positive: pos, negative: neg })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub name: String,
    pub m: u64,
    pub index: i64,
}

/// Good iterates hitting the forbidden Maslov-type values, and how far each
/// characteristic was scanned.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perfectness {
    pub violations: Vec<Violation>,
    pub scanned: Vec<(String, u64)>,
}

impl Perfectness {
    pub fn is_perfect(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `-1` for even `n`; `{-2, -1, 0}` for odd `n`.
pub fn forbidden(n: u32, maslov: i64) -> bool {
    if n.is_multiple_of(2) {
        maslov == -1
    } else {
        (-2..=0).contains(&maslov)
    }
}

fn ceil_ratio(num: i64, den: &Interval) -> u64 {
    // ⌈num / lo(den)⌉ for positive den, clamped at 0
    if num <= 0 {
        return 0;
    }
    let q = int(num) / den.lo().clone();
    q.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

/// Last iterate that can still reach Maslov-type values `≥ -2` (negative
/// mean) or `≤ 0` (positive mean).
fn perfectness_horizon(it: &Iterates, mi: &MeanIndex) -> u64 {
    let (low, high) = it.deviation_bound();
    if mi.sign_i64() > 0 {
        ceil_ratio(low + 1, &mi.abs())
    } else {
        ceil_ratio(high + 3, &mi.abs())
    }
}

pub fn is_perfect(model: &SurfaceModel) -> Result<Perfectness> {
    let mut out = Perfectness { violations: Vec::new(), scanned: Vec::new() };
    for c in &model.characteristics {
        let mi = mean_index(c)?;
        let it = c.iterates();
        let zero = mi.is_zero();
        let limit = if zero { ZERO_MEAN_SCAN } else { perfectness_horizon(&it, &mi).max(1) };
        let i1 = it.index(1)?;
        let before = out.violations.len();
        for m in 1..=limit {
            let i = it.index(m)?;
            if (i - i1).rem_euclid(2) == 0 && forbidden(model.n, i) {
                out.violations.push(Violation { name: c.label.clone(), m, index: i });
                if zero {
                    break;
                }
            }
        }
        if zero && out.violations.len() == before {
            return Err(Error::Hypothesis(format!(
                "{} has zero mean index: no finite scan decides perfectness",
                c.label
            )));
        }
        out.scanned.push((c.label.clone(), limit));
    }
    Ok(out)
}

/// Constant Viterbo index of a zero-mean germ in dimension 6 whose circle
/// part is `r ∈ {0, 2}` irrational rotations, checked for `m ≤ 10⁴`.
pub fn zero_mean_profile(germ: &PathGerm, n: u32) -> Result<i64> {
    if n != 3 || germ.half_dim() != 3 {
        return Err(Error::Invalid("the zero-mean profile is defined for n = 3".into()));
    }
    let mi = mean_index(germ)?;
    if !mi.is_zero() {
        return Err(Error::Hypothesis(format!("{} has mean index {}, not 0", germ.label, mi)));
    }
    let r = germ.end_form.counts().r;
    if r != 0 && r != 2 {
        return Err(Error::Inconsistent(format!(
            "{}: a zero mean index forces r = 0 or 2 irrational rotations, found r = {}",
            germ.label, r
        )));
    }
    let it = germ.iterates();
    let p = it.viterbo(1)?;
    for m in 2..=ZERO_MEAN_SCAN {
        let v = it.viterbo(m)?;
        if v != p {
            return Err(Error::CheckFailed(format!(
                "{}: i(y^{}) = {} differs from i(y) = {}",
                germ.label, m, v, p
            )));
        }
    }
    Ok(p)
}

fn zero_mean_error(germ: &PathGerm, n: u32) -> Error {
    let it = germ.iterates();
    let mut vals = std::collections::BTreeSet::new();
    let i1 = it.index(1).unwrap_or(0);
    for m in 1..=ZERO_MEAN_SCAN {
        if let Ok(i) = it.index(m) {
            if (i - i1).rem_euclid(2) == 0 {
                vals.insert(i - n as i64);
            }
        }
    }
    if vals.len() == 1 {
        return Error::InfiniteMorseNumber { p: *vals.iter().next().expect("one value"), name: germ.label.clone() };
    }
    let (low, high) = it.deviation_bound();
    Error::Hypothesis(format!(
        "{} has zero mean index: its good iterates stay in Viterbo indices [{}, {}], so some Morse number there is infinite",
        germ.label,
        -low - n as i64,
        high - n as i64
    ))
}

/// Last iterate whose Viterbo index can still lie in `[lo, hi]`.
fn window_horizon(it: &Iterates, mi: &MeanIndex, lo: i64, hi: i64) -> u64 {
    let (low, high) = it.deviation_bound();
    let n = it.n;
    if mi.sign_i64() > 0 {
        // iv(m) ≥ m î - low - n
        ceil_ratio(hi + low + n + 1, &mi.abs())
    } else {
        // iv(m) ≤ m î + high - n
        ceil_ratio(high - n - lo + 1, &mi.abs())
    }
}

/// Per-characteristic good-iterate counts by Viterbo index in `[lo, hi]`.
pub fn morse_contributions(model: &SurfaceModel, lo: i64, hi: i64) -> Result<Vec<BTreeMap<i64, u64>>> {
    let mut out = Vec::new();
    for c in &model.characteristics {
        let mi = mean_index(c)?;
        if mi.is_zero() {
            return Err(zero_mean_error(c, model.n));
        }
        if !is_nondegenerate(c) {
            return Err(Error::Hypothesis(format!("{} is degenerate", c.label)));
        }
        let it = c.iterates();
        let i1 = it.viterbo(1)?;
        let mut map = BTreeMap::new();
        for m in 1..=window_horizon(&it, &mi, lo, hi) {
            let v = it.viterbo(m)?;
            if v >= lo && v <= hi && (v - i1).rem_euclid(2) == 0 {
                *map.entry(v).or_insert(0) += 1;
            }
        }
        out.push(map);
    }
    Ok(out)
}

/// `M_p` for `p ∈ [lo, hi]`, zeros omitted.
pub fn morse_numbers(model: &SurfaceModel, lo: i64, hi: i64) -> Result<BTreeMap<i64, u64>> {
    let mut total = BTreeMap::new();
    for map in morse_contributions(model, lo, hi)? {
        for (p, c) in map {
            *total.entry(p).or_insert(0) += c;
        }
    }
    Ok(total)
}

/// `b_p`, the coefficients of `1/(1-t²)`.
pub fn betti(p: i64) -> u64 {
    if p >= 0 && p % 2 == 0 {
        1
    } else {
        0
    }
}

/// `Σ_{p=lo}^{hi} (-1)^p b_p`, in closed form.
pub fn betti_alternating_sum(lo: i64, hi: i64) -> i64 {
    let lo = lo.max(0);
    if hi < lo {
        return 0;
    }
    hi.div_euclid(2) - (lo + 1).div_euclid(2) + 1
}

pub fn alternating_sum(morse: &BTreeMap<i64, u64>, lo: i64, hi: i64) -> i64 {
    morse
        .range(lo..=hi)
        .map(|(p, c)| if p.rem_euclid(2) == 0 { *c as i64 } else { -(*c as i64) })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseInequality {
    pub display: String,
    pub lo: i64,
    pub hi: i64,
    pub morse_side: i64,
    pub betti_side: i64,
    pub holds: bool,
}

/// Morse side `≤` Betti side on odd-endpoint windows, `≥` on even-endpoint
/// windows.
pub fn alternating_sum_check(model: &SurfaceModel, lo: i64, hi: i64) -> Result<MorseInequality> {
    let morse = morse_numbers(model, lo, hi)?;
    inequality_from(&morse, lo, hi)
}

fn inequality_from(morse: &BTreeMap<i64, u64>, lo: i64, hi: i64) -> Result<MorseInequality> {
    let lhs = alternating_sum(morse, lo, hi);
    let rhs = betti_alternating_sum(lo, hi);
    let (display, holds) = match (lo.rem_euclid(2), hi.rem_euclid(2)) {
        (1, 1) => ("(2.16)", lhs <= rhs),
        (0, 0) => ("(2.17)", lhs >= rhs),
        _ => {
            return Err(Error::Invalid(format!(
                "window [{}, {}] needs endpoints of equal parity",
                lo, hi
            )))
        }
    };
    Ok(MorseInequality { display: display.into(), lo, hi, morse_side: lhs, betti_side: rhs, holds })
}

/// `N±^{e,o}` for even `n`, `H±^{e,o}` for odd `n`, with the members of the
/// even classes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub plus_e: u32,
    pub plus_o: u32,
    pub minus_e: u32,
    pub minus_o: u32,
    pub plus_e_members: Vec<String>,
    pub minus_e_members: Vec<String>,
}

/// `M±^{e,o}(k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MTable {
    pub name: String,
    pub plus_e: u32,
    pub plus_o: u32,
    pub minus_e: u32,
    pub minus_o: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpCounts {
    #[serde(rename = "N")]
    pub n_jump: u64,
    pub counts: Counts,
    pub tables: Vec<MTable>,
    /// `i(y_k^{2m_k})`.
    pub iv_2mk: Vec<i64>,
    pub claim_one_residual: String,
    pub checks: Vec<CheckRecord>,
}

impl JumpCounts {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn record(display: &str, subject: &str, pass: bool, detail: String) -> CheckRecord {
    CheckRecord { display: display.into(), subject: subject.into(), pass, detail }
}

/// `Σ 2m_k χ̂(y_k) - N`.
pub fn claim_one_residual(model: &SurfaceModel, cert: &JumpCertificate) -> Result<BigRational> {
    let mut s = -BigRational::from_integer(BigInt::from(cert.n_jump));
    for (k, c) in model.characteristics.iter().enumerate() {
        s += average_euler_char(c)? * int(2 * cert.m[k] as i64);
    }
    Ok(s)
}

fn label(odd: bool, even_label: &'static str, odd_label: &'static str) -> &'static str {
    if odd {
        odd_label
    } else {
        even_label
    }
}

/// Counts at one certificate plus the exact identities and exclusions the
/// counting argument rests on.
pub fn jump_counts(model: &SurfaceModel, cert: &JumpCertificate) -> Result<JumpCounts> {
    let n = model.n as i64;
    let odd = model.n % 2 == 1;
    let nn = cert.n_jump as i64;
    let mbar = cert.mbar;
    if cert.m.len() != model.characteristics.len() {
        return Err(Error::Invalid("certificate does not match the model".into()));
    }
    let mut counts = Counts::default();
    let mut tables = Vec::new();
    let mut iv_2mk = Vec::new();
    let mut checks = Vec::new();

    // thresholds: (t_plus_pos, t_plus_neg, t_minus_pos, t_minus_neg)
    let (pp, pn, mp, mn) = if odd {
        (2 * nn - n + 1, -2 * nn - n - 3, 2 * nn - n - 3, -2 * nn - n + 1)
    } else {
        (2 * nn - n, -2 * nn - n - 2, 2 * nn - n - 2, -2 * nn - n)
    };
    let (small_pos, small_neg) = if odd { (-n - 3, -n + 1) } else { (-n - 2, -n) };

    for (k, c) in model.characteristics.iter().enumerate() {
        let it = c.iterates();
        let rho = mean_index(c)?.sign_i64();
        let mk = cert.m[k];
        let iv = |m: u64| it.viterbo(m);
        let iv1 = iv(1)?;
        let iv2 = iv(2 * mk)?;
        iv_2mk.push(iv2);
        let even = iv2.rem_euclid(2) == 0 && iv1.rem_euclid(2) == 0;
        let oddc = iv2.rem_euclid(2) == 1 && iv1.rem_euclid(2) == 1;
        let plus = if rho > 0 { iv2 >= pp } else { iv2 <= pn };
        let minus = if rho > 0 { iv2 <= mp } else { iv2 >= mn };
        if plus && even {
            counts.plus_e += 1;
            counts.plus_e_members.push(c.label.clone());
        }
        if plus && oddc {
            counts.plus_o += 1;
        }
        if minus && even {
            counts.minus_e += 1;
            counts.minus_e_members.push(c.label.clone());
        }
        if minus && oddc {
            counts.minus_o += 1;
        }

        let mut t = MTable { name: c.label.clone(), plus_e: 0, plus_o: 0, minus_e: 0, minus_o: 0 };
        for m in 1..=mbar {
            let v = iv(m)?;
            let sel = if rho > 0 { v <= small_pos } else { v >= small_neg };
            if !sel {
                continue;
            }
            let a = iv(2 * mk + m)?;
            let b = iv(2 * mk - m)?;
            let e1 = iv1.rem_euclid(2) == 0;
            let o1 = !e1;
            if a.rem_euclid(2) == 0 && e1 {
                t.plus_e += 1;
            }
            if a.rem_euclid(2) == 1 && o1 {
                t.plus_o += 1;
            }
            if b.rem_euclid(2) == 0 && e1 {
                t.minus_e += 1;
            }
            if b.rem_euclid(2) == 1 && o1 {
                t.minus_o += 1;
            }
        }
        checks.push(record(
            label(odd, "(4.18)", "(4.42)"),
            &c.label,
            t.plus_e == t.minus_e && t.plus_o == t.minus_o,
            format!("M+ = ({}, {}), M- = ({}, {})", t.plus_e, t.plus_o, t.minus_e, t.minus_o),
        ));
        tables.push(t);

        // index equalities around 2m_k on 1 ≤ m ≤ m̄
        let mut bad11 = None;
        let mut bad13 = None;
        for m in 1..=mbar {
            let v = iv(m)?;
            let lhs = iv(2 * mk - m)?;
            if lhs != 2 * rho * nn - 2 * n - 2 - v && bad11.is_none() {
                bad11 = Some(format!("m = {}: {} vs {}", m, lhs, 2 * rho * nn - 2 * n - 2 - v));
            }
            let lhs = iv(2 * mk + m)?;
            if lhs != 2 * rho * nn + v && bad13.is_none() {
                bad13 = Some(format!("m = {}: {} vs {}", m, lhs, 2 * rho * nn + v));
            }
        }
        checks.push(record("(4.11)", &c.label, bad11.is_none(), bad11.unwrap_or_else(|| format!("1 <= m <= {}", mbar))));
        let want = 2 * rho * nn - it.c + 2 * cert.delta_count[k] as i64 - n - 1;
        checks.push(record("(4.12)", &c.label, iv2 == want, format!("i(y^2m_k) = {}, expected {}", iv2, want)));
        checks.push(record("(4.13)", &c.label, bad13.is_none(), bad13.unwrap_or_else(|| format!("1 <= m <= {}", mbar))));

        // threshold exclusions on m̄+1 ≤ m ≤ 2m_k-1 and on m̄+1 ≤ m ≤ m̄+2m_k
        let mut bad10 = None;
        for m in (mbar + 1)..(2 * mk) {
            let v = iv(2 * mk - m)?;
            let ok = if rho > 0 { v <= 2 * nn - n - 3 } else { v > -2 * nn - n };
            if !ok {
                bad10 = Some(format!("m = {}: i(y^(2m_k-m)) = {}", m, v));
                break;
            }
        }
        checks.push(record("(4.10)", &c.label, bad10.is_none(), bad10.unwrap_or_else(|| format!("{} <= m < {}", mbar + 1, 2 * mk))));
        let mut bad14 = None;
        for m in (mbar + 1)..=(mbar + 2 * mk) {
            let v = iv(2 * mk + m)?;
            let ok = if rho > 0 { v > 2 * nn - n } else { v <= -2 * nn - n - 3 };
            if !ok {
                bad14 = Some(format!("m = {}: i(y^(2m_k+m)) = {}", m, v));
                break;
            }
        }
        checks.push(record("(4.14)", &c.label, bad14.is_none(), bad14.unwrap_or_else(|| format!("{} <= m <= {}", mbar + 1, mbar + 2 * mk))));

        // alternating good-iterate sum over one double period
        let chi = average_euler_char(c)?;
        let mut s: i64 = 0;
        for m in [1u64, 2] {
            let v = iv(m)?;
            if (v - iv1).rem_euclid(2) == 0 {
                s += if v.rem_euclid(2) == 0 { 1 } else { -1 };
            }
        }
        let lhs = int(s * mk as i64);
        let rhs = chi.clone() * int(2 * mk as i64);
        checks.push(record(
            "(4.17)",
            &c.label,
            lhs == rhs,
            format!("sum = {}, 2m_k chi = {}", format_rational(&lhs), format_rational(&rhs)),
        ));
    }

    let resid = claim_one_residual(model, cert)?;
    checks.insert(
        0,
        record(
            "(4.15)",
            "all",
            resid.is_zero(),
            format!("sum 2m_k chi - N = {}", format_rational(&resid)),
        ),
    );
    Ok(JumpCounts {
        n_jump: cert.n_jump,
        counts,
        tables,
        iv_2mk,
        claim_one_residual: format_rational(&resid),
        checks,
    })
}

/// `[-2N-n-1, 2N-n-1]` for even `n`, `[-2N-n, 2N-n]` for odd `n`.
pub fn jump_window(n: u32, big_n: u64) -> (i64, i64) {
    let (n, nn) = (n as i64, big_n as i64);
    if n % 2 == 0 {
        (-2 * nn - n - 1, 2 * nn - n - 1)
    } else {
        (-2 * nn - n, 2 * nn - n)
    }
}

/// The Betti side of the window sum: `N - n/2` or `N - (n-1)/2`.
pub fn betti_side(n: u32, big_n: u64) -> i64 {
    let (lo, hi) = jump_window(n, big_n);
    betti_alternating_sum(lo, hi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub n: u32,
    pub q: usize,
    pub q0: usize,
    pub eps: String,
    pub primary: JumpCertificate,
    pub dual: JumpCertificate,
    pub window: (i64, i64),
    pub dual_window: (i64, i64),
    /// Nonzero `M_p` on the primary window.
    pub morse_numbers: BTreeMap<i64, u64>,
    pub inequality: MorseInequality,
    pub dual_inequality: MorseInequality,
    pub counts: JumpCounts,
    pub dual_counts: JumpCounts,
    pub bound: u32,
    pub non_hyperbolic: Vec<String>,
    /// Odd `n`: the characteristic carrying `M_{2N-n-1}`.
    pub extra: Option<String>,
    /// [`boundary_term`] at `N` and `N'`.
    pub boundary_terms: (i64, i64),
    pub checks: Vec<CheckRecord>,
}

impl LedgerReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let listed = if self.non_hyperbolic.is_empty() { "none".to_string() } else { self.non_hyperbolic.join(", ") };
        let mut s = format!("lower bound {}; non-hyperbolic: {}", self.bound, listed);
        if let Some(e) = &self.extra {
            s.push_str(&format!("; odd-index extra: {}", e));
        }
        s
    }
}

/// Preconditions of the multiplicity argument; the first failure is an
/// error naming the violated hypothesis.
pub fn check_preconditions(model: &SurfaceModel) -> Result<()> {
    for c in &model.characteristics {
        if !is_nondegenerate(c) {
            return Err(Error::Hypothesis(format!(
                "(4.1): {} is degenerate (needs exactly one N1(1,1) and nullity 1 at every iterate)",
                c.label
            )));
        }
        if mean_index(c)?.is_zero() {
            return Err(Error::Hypothesis(format!("(MMI): {} has zero mean index", c.label)));
        }
    }
    let perf = is_perfect(model)?;
    if let Some(v) = perf.violations.first() {
        return Err(Error::Hypothesis(format!(
            "Definition 1.1: good iterate {}^{} has index {}",
            v.name, v.m, v.index
        )));
    }
    let res = resonance_residuals(model)?;
    if !res.admissible(&rat(1, 1_000_000_000)) {
        return Err(Error::Hypothesis(format!(
            "(2.11): resonance residuals {} and {} exceed 1e-9",
            format_decimal(&res.positive.mid(), 12),
            format_decimal(&res.negative.mid(), 12)
        )));
    }
    Ok(())
}

/// Primary and dual certificates with `Σ 2m_k χ̂_k = N` exactly, halving `ε` at most
/// three times.
pub fn claim_one_pair(
    model: &SurfaceModel,
    inst: &JumpInstance,
    opts: &SearchOptions,
) -> Result<(JumpCertificate, JumpCertificate, BigRational)> {
    let mut o = opts.clone();
    let mut last = String::new();
    for _ in 0..=3 {
        let primary = solve_paths(inst, 1, &o)?.remove(0);
        let r = claim_one_residual(model, &primary)?;
        if r.is_zero() {
            let dual = dual_certificate(inst, &primary, &o)?;
            let r2 = claim_one_residual(model, &dual)?;
            if r2.is_zero() {
                return Ok((primary, dual, o.eps));
            }
            last = format!("dual N = {} leaves residual {}", dual.n_jump, format_rational(&r2));
        } else {
            last = format!("N = {} leaves residual {}", primary.n_jump, format_rational(&r));
        }
        o.eps /= int(2);
    }
    Err(Error::CheckFailed(format!("(4.15) fails after three halvings of eps: {}", last)))
}

/// Runs the whole argument: certificates at `χ` and `1-χ`, counts, Morse
/// windows, and the conclusions for even or odd `n`.
pub fn multiplicity_report(
    model: &SurfaceModel,
    delta: &BigRational,
    opts: &SearchOptions,
) -> Result<LedgerReport> {
    model.validate()?;
    check_preconditions(model)?;
    let n = model.n;
    let odd = n % 2 == 1;
    let inst = JumpInstance::new(model.characteristics.clone(), n, delta.clone())?;
    let (primary, dual, eps) = claim_one_pair(model, &inst, opts)?;
    let counts = jump_counts(model, &primary)?;
    let dual_counts = jump_counts(model, &dual)?;
    let mut checks: Vec<CheckRecord> = Vec::new();
    checks.extend(counts.checks.iter().cloned());
    checks.extend(dual_counts.checks.iter().map(|c| CheckRecord { subject: format!("{} (dual)", c.subject), ..c.clone() }));

    for (k, c) in model.characteristics.iter().enumerate() {
        let cm = c.iterates().c;
        let s = primary.delta_count[k] as i64 + dual.delta_count[k] as i64;
        checks.push(record("(4.32)", &c.label, s == cm, format!("Delta + Delta' = {}, C = {}", s, cm)));
        let want = 2 * mean_index(c)?.sign_i64() * dual.n_jump as i64 + cm - 2 * primary.delta_count[k] as i64 - n as i64 - 1;
        checks.push(record(
            "(4.37)",
            &c.label,
            dual_counts.iv_2mk[k] == want,
            format!("i(y^2m'_k) = {}, expected {}", dual_counts.iv_2mk[k], want),
        ));
    }
    let (a, b) = (&counts.counts, &dual_counts.counts);
    let sym = a.plus_e == b.minus_e && a.minus_e == b.plus_e && a.plus_o == b.minus_o && a.minus_o == b.plus_o;
    checks.push(record(
        label(odd, "(4.38)", "(4.47)"),
        "all",
        sym,
        format!(
            "(+e, +o, -e, -o) = ({}, {}, {}, {}) at N, ({}, {}, {}, {}) at N'",
            a.plus_e, a.plus_o, a.minus_e, a.minus_o, b.plus_e, b.plus_o, b.minus_e, b.minus_o
        ),
    ));

    let window = jump_window(n, primary.n_jump);
    let dual_window = jump_window(n, dual.n_jump);
    let per = morse_contributions(model, window.0, window.1)?;
    let mut morse = BTreeMap::new();
    for map in &per {
        for (p, c) in map {
            *morse.entry(*p).or_insert(0) += c;
        }
    }
    let dual_morse = morse_numbers(model, dual_window.0, dual_window.1)?;
    let ineq = inequality_from(&morse, window.0, window.1)?;
    let dual_ineq = inequality_from(&dual_morse, dual_window.0, dual_window.1)?;

    let (sum_label, betti_label, dual_label) = label3(odd);
    let boundary = (
        boundary_term(model, &counts, primary.n_jump)?,
        boundary_term(model, &dual_counts, dual.n_jump)?,
    );
    for (ine, cnt, big_n, subj, x) in [
        (&ineq, a, primary.n_jump, "N", boundary.0),
        (&dual_ineq, b, dual.n_jump, "N'", boundary.1),
    ] {
        let rhs = big_n as i64 + cnt.plus_o as i64 - cnt.plus_e as i64;
        checks.push(record(
            sum_label,
            subj,
            ine.morse_side == rhs,
            format!("alternating sum {} on [{}, {}], N + (+o) - (+e) = {}", ine.morse_side, ine.lo, ine.hi, rhs),
        ));
        if odd {
            checks.push(record(
                "(4.44) with boundary term",
                subj,
                ine.morse_side == rhs - x,
                format!("alternating sum {}, N + (+o) - (+e) - B = {} with B = {}", ine.morse_side, rhs - x, x),
            ));
        }
        let closed = if odd { big_n as i64 - (n as i64 - 1) / 2 } else { big_n as i64 - n as i64 / 2 };
        checks.push(record(
            if subj == "N" { betti_label } else { dual_label },
            subj,
            ine.holds && ine.betti_side == closed,
            format!("{} <= {} = {}", ine.morse_side, ine.betti_side, closed),
        ));
    }

    let half = if odd { (n - 1) / 2 } else { n / 2 };
    checks.push(record(
        label(odd, "(4.26)", "(4.46)"),
        "all",
        a.plus_e >= half,
        format!("+e count {} >= {}", a.plus_e, half),
    ));
    checks.push(record(
        label(odd, "(4.40)", "(4.48)"),
        "all",
        a.minus_e == b.plus_e && a.minus_e >= half,
        format!("-e count {} = dual +e count {} >= {}", a.minus_e, b.plus_e, half),
    ));

    let mut non_hyp: Vec<String> = a.plus_e_members.iter().chain(a.minus_e_members.iter()).cloned().collect();
    non_hyp.sort();
    non_hyp.dedup();
    for name in &non_hyp {
        let k = model.characteristics.iter().position(|c| &c.label == name).expect("member");
        let c = &model.characteristics[k];
        let hyper = 2 * mean_index(c)?.sign_i64() * primary.n_jump as i64 - n as i64 - 1;
        let circle = c.iterates().c > 0;
        checks.push(record(
            "non-hyperbolic",
            name,
            counts.iv_2mk[k] != hyper && circle,
            format!("i(y^2m_k) = {} vs hyperbolic value {}; C = {}", counts.iv_2mk[k], hyper, c.iterates().c),
        ));
    }
    let mut bound = a.plus_e + a.minus_e;
    checks.push(record(
        label(odd, "(4.41)", "(4.49)"),
        "all",
        (bound as usize) <= model.characteristics.len() && bound >= if odd { n - 1 } else { n },
        format!("q = {} >= {} >= {}", model.characteristics.len(), bound, if odd { n - 1 } else { n }),
    ));

    let mut extra = None;
    if odd {
        let p = 2 * primary.n_jump as i64 - n as i64 - 1;
        let mp = morse.get(&p).copied().unwrap_or(0);
        checks.push(record("(4.52)", "all", mp >= 1, format!("M_{} = {} >= b_{} = {}", p, mp, p, betti(p))));
        for name in &non_hyp {
            let k = model.characteristics.iter().position(|c| &c.label == name).expect("member");
            let hits = per[k].get(&p).copied().unwrap_or(0);
            checks.push(record("(4.50)", name, hits == 0, format!("{} good iterates at index {}", hits, p)));
        }
        for (k, c) in model.characteristics.iter().enumerate() {
            if non_hyp.contains(&c.label) {
                continue;
            }
            let iv1 = c.iterates().viterbo(1)?;
            if counts.iv_2mk[k] == p && (p - iv1).rem_euclid(2) == 0 {
                extra = Some(c.label.clone());
                break;
            }
        }
        checks.push(record(
            "Claim 3",
            extra.as_deref().unwrap_or("none"),
            extra.is_some(),
            format!("characteristic with i(y^2m_k) = {} outside the counted set", p),
        ));
        if extra.is_some() {
            bound += 1;
        }
    }

    Ok(LedgerReport {
        n,
        q: model.characteristics.len(),
        q0: model.positive_count()?,
        eps: format_rational(&eps),
        primary,
        dual,
        window,
        dual_window,
        morse_numbers: morse,
        inequality: ineq,
        dual_inequality: dual_ineq,
        counts,
        dual_counts,
        bound,
        non_hyperbolic: non_hyp,
        extra,
        boundary_terms: boundary,
        checks,
    })
}

/// Odd `n` only: the signed count of good iterates `y_k^{2m_k}` of negative
/// mean index sitting at `-2N-n-1`, just below the window `[-2N-n, 2N-n]`.
/// The threshold exclusions only start at `-2N-n-3`, so these iterates are
/// dropped from the window without being subtracted. Zero for even `n`.
pub fn boundary_term(model: &SurfaceModel, counts: &JumpCounts, big_n: u64) -> Result<i64> {
    if model.n.is_multiple_of(2) {
        return Ok(0);
    }
    let p = -2 * big_n as i64 - model.n as i64 - 1;
    let mut x = 0;
    for (k, c) in model.characteristics.iter().enumerate() {
        let iv2 = counts.iv_2mk[k];
        if mean_index(c)?.sign_i64() < 0 && iv2 == p && (iv2 - c.iterates().viterbo(1)?).rem_euclid(2) == 0 {
            x += if iv2.rem_euclid(2) == 0 { 1 } else { -1 };
        }
    }
    Ok(x)
}

fn label3(odd: bool) -> (&'static str, &'static str, &'static str) {
    if odd {
        ("(4.44)", "(4.45)", "(4.45)")
    } else {
        ("(4.20)", "(4.25)", "(4.39)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::NormalForm;

    fn n1_germ(i: i64) -> PathGerm {
        PathGerm::new("y", i, NormalForm::new(vec![BasicBlock::n1(1, 1).unwrap()]))
    }

    #[test]
    fn betti_sums() {
        assert_eq!(betti_alternating_sum(-5, 9), 5);
        assert_eq!(betti_alternating_sum(-2 * 10 - 2 - 1, 2 * 10 - 2 - 1), 10 - 1);
        assert_eq!(betti_alternating_sum(-2 * 10 - 3, 2 * 10 - 3), 10 - 1);
        for k in 0..50 {
            let direct: u64 = (0..=2 * k).map(betti).sum();
            assert_eq!(betti_alternating_sum(0, 2 * k), k + 1);
            assert_eq!(direct as i64, k + 1);
        }
    }

    #[test]
    fn single_orbit_morse_numbers() {
        let model = SurfaceModel::new(1, vec![n1_germ(1)]);
        let m = morse_numbers(&model, -1, 9).unwrap();
        assert_eq!(m.into_iter().collect::<Vec<_>>(), vec![(0, 1), (2, 1), (4, 1), (6, 1), (8, 1)]);
        assert_eq!(average_euler_char(&model.characteristics[0]).unwrap(), int(1));
        let r = resonance_residuals(&model).unwrap();
        assert!(r.positive.as_exact().unwrap().is_zero());
        assert!(is_perfect(&model).unwrap().is_perfect());
    }

    #[test]
    fn euler_char_cases() {
        let half = PathGerm::new(
            "h",
            -4,
            NormalForm::new(vec![BasicBlock::n1(1, 1).unwrap(), BasicBlock::n1(-1, 1).unwrap()]),
        );
        let it = half.iterates();
        assert_eq!((it.viterbo(2).unwrap() - it.viterbo(1).unwrap()).rem_euclid(2), 1);
    }
}
