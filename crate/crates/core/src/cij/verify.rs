//! Independent re-checking of jump certificates. Nothing in the certificate
//! body is trusted except the tuple itself; every display is recomputed from
//! the germs (or the abstract rows).

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::abstract_jump::{AbstractJumpInstance, AbstractSolution, Engine, Slot};
use super::{big, germ_row, interval_distance, q_table, rat_text, CheckRecord, JumpCertificate};
use crate::error::{Error, Result};
use crate::iteration::{stable_jump_horizon, PathGerm};
use crate::real::format_rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub records: Vec<CheckRecord>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckRecord> {
        self.records.iter().find(|r| !r.pass)
    }

    fn push(&mut self, display: &str, subject: &str, outcome: std::result::Result<String, String>) {
        let (pass, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.records.push(CheckRecord { display: display.into(), subject: subject.into(), pass, detail });
    }
}

type Outcome = std::result::Result<String, String>;

fn shape_error(what: &str) -> Error {
    Error::Parse(format!("malformed certificate: {}", what))
}

/// Recomputes every jump equality, the deviation bounds and the horizon
/// guards for a path certificate.
pub fn verify_certificate(germs: &[PathGerm], n: u32, cert: &JumpCertificate) -> Result<VerifyReport> {
    let q = germs.len();
    if cert.m.len() != q || cert.chi.len() != q || cert.delta_count.len() != q || cert.chi_alpha.len() != q {
        return Err(shape_error(&format!("expected {} characteristics", q)));
    }
    if cert.q.len() != q {
        return Err(shape_error("Q table has the wrong number of rows"));
    }
    if cert.chi.iter().any(|x| *x > 1) {
        return Err(shape_error("vertex entries must be 0 or 1"));
    }
    let delta = cert.delta_value()?;
    let eps = cert.eps_value()?;
    let rows = germs.iter().map(germ_row).collect::<Result<Vec<_>>>()?;
    for (k, r) in rows.iter().enumerate() {
        if cert.chi_alpha[k].len() != r.alphas.len() {
            return Err(shape_error(&format!("vertex of {} has the wrong length", germs[k].label)));
        }
    }
    let engine = Engine::new(rows, delta.clone())?;
    let mut rep = VerifyReport { records: Vec::new() };
    let nn = cert.n_jump;

    for (k, g) in germs.iter().enumerate() {
        let out: Outcome = (|| {
            if engine.modulus != cert.modulus {
                return Err(format!("M = {} but the germs clear with M = {}", cert.modulus, engine.modulus));
            }
            let fl = engine.floor_ratio(k, nn).map_err(|e| e.to_string())?;
            let want = (fl + cert.chi[k] as u64) * engine.modulus;
            if want == cert.m[k] {
                Ok(format!("m = ([{}/(M|i|)] + {})*{} = {}", nn, cert.chi[k], engine.modulus, want))
            } else {
                Err(format!("m = {} but ([N/(M|i|)] + chi)*M = {}", cert.m[k], want))
            }
        })();
        rep.push("(3.30)", &g.label, out);
    }

    for (k, g) in germs.iter().enumerate() {
        let mut worst = BigRational::zero();
        let mut bad = None;
        for (c, slot) in engine.slots.iter().enumerate() {
            let chi = match slot {
                Slot::Row(i) if *i == k => cert.chi[k],
                Slot::Alpha(i, j) if *i == k => match cert.chi_alpha[k][*j] {
                    Some(x) => x,
                    None => {
                        bad = Some(format!("missing vertex entry for alpha {}", j + 1));
                        continue;
                    }
                },
                _ => continue,
            };
            let x = engine.values[c].scale(&big(nn));
            let fr = match x.floor() {
                Ok(f) => x.add_rat(&-BigRational::from_integer(f)),
                Err(_) => {
                    // the enclosure straddles an integer: distance to the
                    // nearer vertex is tiny, but which one is undecided
                    bad = Some(format!("{{N v}} undecidable for component {}", c + 1));
                    continue;
                }
            };
            let d = interval_distance(&fr, chi);
            if d >= eps && bad.is_none() {
                bad = Some(format!("|{{N v}} - chi| <= {} is not below eps = {}", rat_text(&d), rat_text(&eps)));
            }
            if d > worst {
                worst = d;
            }
        }
        let out = match bad {
            Some(b) => Err(b),
            None => Ok(format!("max distance {}", format_decimal_short(&worst))),
        };
        rep.push("(3.31)", &g.label, out);
    }

    for (k, g) in germs.iter().enumerate() {
        let out: Outcome = (|| {
            let mk = cert.m[k];
            let mut count = 0u32;
            for a in &engine.rows[k].alphas {
                let fr = a.frac_mul(mk).map_err(|e| e.to_string())?;
                if fr.lo().is_positive() && fr.hi() < &delta {
                    count += 1;
                } else if !(fr.lo() >= &delta || fr.hi() <= &BigRational::zero()) {
                    return Err(format!("{{m alpha}} = {} is undecidable against delta", fr));
                }
            }
            if count != cert.delta_count[k] {
                return Err(format!("Delta = {} but #{{0 < {{m theta/pi}} < delta}} = {}", cert.delta_count[k], count));
            }
            let qt = q_table(g, mk, cert.mbar);
            if qt != cert.q[k] {
                return Err(format!("Q table {:?} but recomputed {:?}", cert.q[k], qt));
            }
            Ok(format!("Delta = {}, Q = {:?}", count, qt))
        })();
        rep.push("(3.29)", &g.label, out);
    }

    let sign: Vec<i64> = engine.rows.iter().map(|r| r.d.sign).collect();
    let its: Vec<_> = germs.iter().map(|g| g.iterates()).collect();

    for (k, g) in germs.iter().enumerate() {
        let it = &its[k];
        let mk = cert.m[k];
        let out: Outcome = (|| {
            for m in 1..=cert.mbar {
                if 2 * mk <= m {
                    return Err(format!("2m - m' < 1 at m' = {}", m));
                }
                let (a, b, c) = (it.nullity(2 * mk - m), it.nullity(2 * mk + m), it.nullity(m));
                if a != c || b != c {
                    return Err(format!("m = {}: nu(2m_k-m) = {}, nu(2m_k+m) = {}, nu(m) = {}", m, a, b, c));
                }
            }
            Ok(format!("1 <= m <= {}", cert.mbar))
        })();
        rep.push("(3.25)", &g.label, out);
    }

    let n_signed = nn as i64;
    for (k, g) in germs.iter().enumerate() {
        let it = &its[k];
        let mk = cert.m[k];
        let out: Outcome = (|| {
            for m in 1..=cert.mbar {
                let lhs = it.index(2 * mk + m).map_err(|e| e.to_string())?;
                let rhs = 2 * sign[k] * n_signed + it.index(m).map_err(|e| e.to_string())?;
                if lhs != rhs {
                    return Err(format!("m = {}: i(2m_k+m) = {} but 2 rho N + i(m) = {} (residual {})", m, lhs, rhs, lhs - rhs));
                }
            }
            Ok(format!("rho = {}, 1 <= m <= {}", sign[k], cert.mbar))
        })();
        rep.push("(3.26)", &g.label, out);
    }

    for (k, g) in germs.iter().enumerate() {
        let it = &its[k];
        let mk = cert.m[k];
        let out: Outcome = (|| {
            for m in 1..=cert.mbar {
                if 2 * mk <= m {
                    return Err(format!("2m_k - m < 1 at m = {}", m));
                }
                let qm = q_table(g, mk, m).last().copied().unwrap_or(0) as i64;
                let lhs = it.index(2 * mk - m).map_err(|e| e.to_string())?;
                let rhs = 2 * sign[k] * n_signed - it.index(m).map_err(|e| e.to_string())? - 2 * (it.s_plus + qm);
                if lhs != rhs {
                    return Err(format!("m = {}: i(2m_k-m) = {} but expected {} (residual {})", m, lhs, rhs, lhs - rhs));
                }
            }
            Ok(format!("1 <= m <= {}", cert.mbar))
        })();
        rep.push("(3.27)", &g.label, out);
    }

    for (k, g) in germs.iter().enumerate() {
        let it = &its[k];
        let out: Outcome = (|| {
            let lhs = it.index(2 * cert.m[k]).map_err(|e| e.to_string())?;
            let rhs = 2 * sign[k] * n_signed - (it.s_plus + it.c - 2 * cert.delta_count[k] as i64);
            if lhs == rhs {
                Ok(format!("i(2m_k) = {}", lhs))
            } else {
                Err(format!("i(2m_k) = {} but 2 rho N - (S+ + C - 2 Delta) = {} (residual {})", lhs, rhs, lhs - rhs))
            }
        })();
        rep.push("(3.28)", &g.label, out);
    }

    let out: Outcome = match stable_jump_horizon(germs, n) {
        Ok(h) if cert.mbar >= h.tightened => Ok(format!("mbar = {} >= {}", cert.mbar, h.tightened)),
        Ok(h) => Err(format!("mbar = {} is below the jump horizon {}", cert.mbar, h.tightened)),
        Err(e) => Err(e.to_string()),
    };
    rep.push("(4.3)", "all", out);

    let min2m = cert.m.iter().map(|m| 2 * m).min().unwrap_or(0);
    let out: Outcome = if cert.mbar + 2 <= min2m {
        Ok(format!("mbar + 2 = {} <= min 2m_k = {}", cert.mbar + 2, min2m))
    } else {
        Err(format!("mbar + 2 = {} exceeds min 2m_k = {}", cert.mbar + 2, min2m))
    };
    rep.push("(4.4)", "all", out);

    Ok(rep)
}

fn format_decimal_short(x: &BigRational) -> String {
    crate::real::format_decimal(x, 6)
}

/// A solution of the abstract problem in certificate form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractCertificate {
    pub version: u32,
    pub kind: String,
    #[serde(rename = "N")]
    pub n_jump: u64,
    pub m: Vec<u64>,
    #[serde(rename = "Delta")]
    pub delta_count: Vec<u32>,
    pub delta: String,
    #[serde(default)]
    pub checks: Vec<CheckRecord>,
}

impl AbstractCertificate {
    pub fn new(inst: &AbstractJumpInstance, sol: &AbstractSolution) -> Result<Self> {
        let mut c = AbstractCertificate {
            version: super::CERTIFICATE_VERSION,
            kind: "abstract".into(),
            n_jump: sol.n,
            m: sol.m.clone(),
            delta_count: sol.delta.clone(),
            delta: format_rational(&inst.delta),
            checks: Vec::new(),
        };
        let rep = verify_abstract(inst, &c)?;
        if let Some(bad) = rep.first_failure() {
            return Err(Error::CheckFailed(format!("{} for {}: {}", bad.display, bad.subject, bad.detail)));
        }
        c.checks = rep.records;
        Ok(c)
    }
}

/// Recomputes the abstract jump equalities for an abstract certificate.
pub fn verify_abstract(inst: &AbstractJumpInstance, cert: &AbstractCertificate) -> Result<VerifyReport> {
    if cert.m.len() != inst.rows.len() || cert.delta_count.len() != inst.rows.len() {
        return Err(shape_error(&format!("expected {} rows", inst.rows.len())));
    }
    let delta = inst.delta.clone();
    let one = BigRational::one();
    let mut rep = VerifyReport { records: Vec::new() };
    for (i, row) in inst.rows.iter().enumerate() {
        let subject = format!("row {}", i + 1);
        let m = cert.m[i];
        let out: Outcome = (|| {
            if m == 0 {
                return Err("m must be positive".into());
            }
            let mut lhs = row.beta as i128 * m as i128;
            for a in &row.alphas {
                lhs += a.ceil_mul(m).map_err(|e| e.to_string())? as i128;
            }
            let rhs = row.d.sign as i128 * cert.n_jump as i128 + cert.delta_count[i] as i128;
            if lhs == rhs {
                Ok(format!("{} = {}*{} + {}", lhs, row.d.sign, cert.n_jump, cert.delta_count[i]))
            } else {
                Err(format!("lhs {} but rho N + Delta = {} (residual {})", lhs, rhs, lhs - rhs))
            }
        })();
        rep.push("(3.12)", &subject, out);

        let out: Outcome = (|| {
            for (j, a) in row.alphas.iter().enumerate() {
                let fr = a.frac_mul(m).map_err(|e| e.to_string())?;
                let near0 = fr.hi() < &delta;
                let near1 = fr.lo() > &(&one - &delta);
                if !(near0 || near1) {
                    return Err(format!("alpha {}: {{m alpha}} = {} is not within delta of an integer", j + 1, fr));
                }
            }
            Ok(format!("{} alphas", row.alphas.len()))
        })();
        rep.push("(3.13)", &subject, out);

        let out: Outcome = (|| {
            for (j, a) in row.alphas.iter().enumerate() {
                if a.is_rational() && !a.mul_is_integer(m) {
                    return Err(format!("alpha {} = {} is rational but m alpha is not an integer", j + 1, a.to_text()));
                }
            }
            Ok("rational alphas cleared".into())
        })();
        rep.push("(3.14)", &subject, out);

        let out: Outcome = (|| {
            let mut count = 0u32;
            for a in &row.alphas {
                let fr = a.frac_mul(m).map_err(|e| e.to_string())?;
                if fr.lo().is_positive() && fr.hi() < &delta {
                    count += 1;
                } else if !(fr.lo() >= &delta || fr.hi() <= &BigRational::zero()) {
                    return Err(format!("{{m alpha}} = {} is undecidable against delta", fr));
                }
            }
            if count == cert.delta_count[i] {
                Ok(format!("Delta = {}, rho = {}", count, row.d.sign))
            } else {
                Err(format!("Delta = {} but the count is {}", cert.delta_count[i], count))
            }
        })();
        rep.push("(3.15)", &subject, out);
    }
    Ok(rep)
}
