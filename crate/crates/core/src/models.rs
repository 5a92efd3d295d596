//! Model generators: ellipsoids with irrational axis ratios, synthetic
//! models from a config with admissibility annotations, and the named
//! fixtures used by tests and examples.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::iteration::{mean_index, PathGerm};
use crate::ledger::{is_nondegenerate, is_perfect, resonance_residuals};
use crate::normal_form::{BasicBlock, NormalForm, Sign};
use crate::real::{eval_expression, format_decimal, rat, Interval};
use crate::relations::Relation;
use crate::rotation::RotationNumber;
use crate::surface::SurfaceModel;

pub const DEFAULT_DIGITS: u32 = 50;

/// Axes as real expressions (`1`, `phi`, `sqrt(2)`), strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipsoidSpec {
    pub axes: Vec<String>,
}

impl EllipsoidSpec {
    pub fn new<S: Into<String>>(axes: impl IntoIterator<Item = S>) -> Self {
        EllipsoidSpec { axes: axes.into_iter().map(Into::into).collect() }
    }
}

/// Ratios `p/q` with `q` up to this bound are rejected when the enclosure
/// of an axis ratio contains them.
const RATIONAL_PROBE: i64 = 1000;

fn probe_rational(x: &Interval) -> Option<BigRational> {
    if let Some(v) = x.as_exact() {
        return Some(v.clone());
    }
    for q in 1..=RATIONAL_PROBE {
        let qq = BigRational::from_integer(BigInt::from(q));
        let lo = (x.lo() * &qq).ceil();
        let hi = (x.hi() * &qq).floor();
        if lo <= hi {
            return Some(lo / qq);
        }
    }
    None
}

/// `n` characteristics `y_j` with end form `N1(1,1) ⋄ R({a_j/a_k})` over
/// `k ≠ j` and `i(y_j,1) = n + 2Σ_{k≠j} ⌊a_j/a_k⌋`.
pub fn ellipsoid(spec: &EllipsoidSpec, digits: u32) -> Result<SurfaceModel> {
    let n = spec.axes.len();
    if n == 0 {
        return Err(Error::Invalid("ellipsoid needs at least one axis".into()));
    }
    let axes: Vec<Interval> = spec
        .axes
        .iter()
        .map(|a| eval_expression(a, digits + 10))
        .collect::<Result<_>>()?;
    for (k, a) in axes.iter().enumerate() {
        if a.lo() <= &BigRational::zero() {
            return Err(Error::Invalid(format!("axis {} = {} is not positive", k + 1, spec.axes[k])));
        }
        if k > 0 && axes[k - 1].hi() >= a.lo() {
            return Err(Error::Invalid(format!(
                "axes must be strictly increasing: {} then {}",
                spec.axes[k - 1],
                spec.axes[k]
            )));
        }
    }
    let mut chars = Vec::new();
    for j in 0..n {
        let mut blocks = vec![BasicBlock::n1(1, 1)?];
        let mut floors = 0i64;
        for k in 0..n {
            if k == j {
                continue;
            }
            let ratio = axes[j].div(&axes[k])?;
            if let Some(v) = probe_rational(&ratio) {
                return Err(Error::Invalid(format!(
                    "degenerate ellipsoid: a{}/a{} is rational ({})",
                    j + 1,
                    k + 1,
                    crate::real::format_rational(&v)
                )));
            }
            let fl = ratio.floor()?;
            floors += i64::try_from(&fl).map_err(|_| Error::Invalid("axis ratio too large".into()))?;
            let frac = ratio.add_rat(&-BigRational::from_integer(fl));
            blocks.push(BasicBlock::r(RotationNumber::from_enclosure(&frac, digits)?)?);
        }
        chars.push(PathGerm::new(format!("y{}", j + 1), n as i64 + 2 * floors, NormalForm::new(blocks)));
    }
    let mut model = SurfaceModel::new(n as u32, chars);
    model.metadata.insert("source".into(), json!("ellipsoid"));
    model.metadata.insert("axes".into(), json!(spec.axes));
    Ok(model)
}

/// Parses a model config and attaches admissibility annotations under
/// `metadata.admissibility`.
pub fn synthetic(config: &str) -> Result<SurfaceModel> {
    let mut model = SurfaceModel::from_json(config)?;
    let ann = annotate(&model);
    model.metadata.insert("admissibility".into(), ann);
    Ok(model)
}

/// Resonance residuals, perfectness, nondegeneracy and the mean-index
/// sign split. Undecidable items are reported as strings.
pub fn annotate(model: &SurfaceModel) -> Value {
    let tol = rat(1, 1_000_000_000);
    let resonance = match resonance_residuals(model) {
        Ok(r) => json!({
            "positive": format_decimal(&r.positive.mid(), 12),
            "negative": format_decimal(&r.negative.mid(), 12),
            "admissible": r.admissible(&tol),
        }),
        Err(e) => json!({ "error": e.to_string(), "admissible": false }),
    };
    let perfect = match is_perfect(model) {
        Ok(p) => json!(p.is_perfect()),
        Err(e) => json!(e.to_string()),
    };
    let nondegenerate = model.characteristics.iter().all(is_nondegenerate);
    let mut signs = Vec::new();
    for c in &model.characteristics {
        signs.push(match mean_index(c) {
            Ok(mi) => json!(mi.sign_i64()),
            Err(e) => json!(e.to_string()),
        });
    }
    let q0 = signs.iter().filter(|s| s.as_i64() == Some(1)).count();
    let mmi = signs.iter().all(|s| s.as_i64().is_some_and(|v| v != 0));
    json!({
        "resonance": resonance,
        "perfect": perfect,
        "nondegenerate": nondegenerate,
        "mean_index_signs": signs,
        "q0": q0,
        "mmi": mmi,
    })
}

/// `true` when the annotations from [`annotate`] allow the multiplicity
/// argument to run.
pub fn admissible(model: &SurfaceModel) -> bool {
    let a = annotate(model);
    a["resonance"]["admissible"] == json!(true)
        && a["perfect"] == json!(true)
        && a["nondegenerate"] == json!(true)
        && a["mmi"] == json!(true)
}

/// Named fixtures.
pub mod fixtures {
    use super::*;

    fn irr(dec: &str) -> RotationNumber {
        RotationNumber::irrational(dec, 40).expect("fixture rotation")
    }

    fn germ(name: &str, i: i64, blocks: Vec<BasicBlock>) -> PathGerm {
        PathGerm::new(name, i, NormalForm::new(blocks))
    }

    fn n11() -> BasicBlock {
        BasicBlock::n1(1, 1).expect("N1(1,1)")
    }

    fn d(sign: Sign) -> BasicBlock {
        BasicBlock::D { sign }
    }

    fn r(dec: &str) -> BasicBlock {
        BasicBlock::r(irr(dec)).expect("rotation block")
    }

    const SQRT2_FRAC: &str = "0.4142135623730950488016887242096980785696718753769";
    const SQRT3_FRAC: &str = "0.7320508075688772935274463415058723669428052538103";
    const PHI_FRAC: &str = "0.6180339887498948482045868343656381177203091798057";

    /// Axes `(1, φ)`.
    pub fn ellipsoid2() -> SurfaceModel {
        ellipsoid(&EllipsoidSpec::new(["1", "phi"]), DEFAULT_DIGITS).expect("n = 2 ellipsoid")
    }

    /// Axes `(1, φ², 2φ)`. Every torus coordinate has a nonzero `φ` part, so
    /// jump tuples appear at `N` of order `10⁴`.
    pub fn ellipsoid3() -> SurfaceModel {
        ellipsoid(&EllipsoidSpec::new(["1", "1+phi", "2*phi"]), DEFAULT_DIGITS).expect("n = 3 ellipsoid")
    }

    /// `N1(1,1) ⋄ D(±)^{n-1}`, mean index `i + 1`.
    pub fn hyperbolic(name: &str, n: u32, i: i64) -> PathGerm {
        let mut blocks = vec![n11()];
        for k in 1..n {
            blocks.push(d(if k % 2 == 1 { Sign::Plus } else { Sign::Minus }));
        }
        germ(name, i, blocks)
    }

    fn extend(base: SurfaceModel, extra: Vec<PathGerm>) -> SurfaceModel {
        let mut chars = base.characteristics;
        chars.extend(extra);
        SurfaceModel::new(base.n, chars)
    }

    /// Ellipsoid `(1, φ)` plus negative hyperbolic germs with `χ̂/î` equal
    /// to `1/6` and `-1/6`.
    pub fn s1() -> SurfaceModel {
        extend(ellipsoid2(), vec![hyperbolic("h1", 2, -7), hyperbolic("h2", 2, -4)])
    }

    /// Ellipsoid `(1, φ)` plus negative germs with `χ̂/î = ±1/2`.
    pub fn s2() -> SurfaceModel {
        extend(ellipsoid2(), vec![hyperbolic("h1", 2, -3), hyperbolic("h2", 2, -2)])
    }

    /// Ellipsoid `(1, √2)` plus one `+1/2` and three `-1/6` negative terms.
    pub fn s3() -> SurfaceModel {
        let base = ellipsoid(&EllipsoidSpec::new(["1", "sqrt(2)"]), DEFAULT_DIGITS).expect("ellipsoid");
        extend(
            base,
            vec![
                hyperbolic("h1", 2, -3),
                hyperbolic("h2", 2, -4),
                hyperbolic("h3", 2, -4),
                hyperbolic("h4", 2, -4),
            ],
        )
    }

    /// `n = 3` ellipsoid plus negative germs with `χ̂/î = ∓1/6`.
    pub fn s4() -> SurfaceModel {
        extend(ellipsoid3(), vec![hyperbolic("h1", 3, -7), hyperbolic("h2", 3, -4)])
    }

    /// `n = 1`: one positive `N1(1,1)` germ plus negative germs with
    /// `χ̂/î = ∓1/6`.
    pub fn s5() -> SurfaceModel {
        SurfaceModel::new(
            1,
            vec![germ("y1", 1, vec![n11()]), hyperbolic("h1", 1, -7), hyperbolic("h2", 1, -4)],
        )
    }

    pub fn synthetic_corpus() -> Vec<(&'static str, SurfaceModel)> {
        vec![("S1", s1()), ("S2", s2()), ("S3", s3()), ("S4", s4()), ("S5", s5())]
    }

    /// Zero-mean germ with no circle rotations: `N1(1,1) ⋄ D(+) ⋄ D(-)`.
    pub fn zero_mean_r0() -> PathGerm {
        germ("z0", -1, vec![n11(), d(Sign::Plus), d(Sign::Minus)])
    }

    /// Zero-mean germ with a conjugate pair of rotations `ρ1 + ρ2 = 1`.
    pub fn zero_mean_r2() -> PathGerm {
        germ("z2", -1, vec![n11(), r(SQRT2_FRAC), r(&one_minus(SQRT2_FRAC))])
            .with_relations(vec![Relation::parse("rho1 + rho2 = 1").expect("relation")])
    }

    fn one_minus(dec: &str) -> String {
        let (c, _) = crate::real::parse_decimal(dec).expect("decimal");
        format_decimal(&(BigRational::one() - c), 49)
    }

    /// `n = 3`: the zero-mean `r = 0` germ next to a positive-mean germ.
    pub fn zero_mean_mixed() -> SurfaceModel {
        let pos = germ("y1", 3, vec![n11(), r(SQRT3_FRAC), r(PHI_FRAC)]);
        SurfaceModel::new(3, vec![zero_mean_r0(), pos])
    }

    /// One positive and one negative `N1(1,1)` germ in dimension 2.
    pub fn mixed_pair() -> SurfaceModel {
        SurfaceModel::new(1, vec![germ("y1", 1, vec![n11()]), germ("y2", -4, vec![n11()])])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::zero_mean_profile;

    #[test]
    fn ellipsoid_two_axes() {
        let m = fixtures::ellipsoid2();
        assert_eq!(m.characteristics[0].initial_index, 2);
        assert_eq!(m.characteristics[1].initial_index, 4);
        let r = resonance_residuals(&m).unwrap();
        assert!(r.admissible(&rat(1, 1_000_000_000)));
        assert!(admissible(&m));
    }

    #[test]
    fn rational_ratio_rejected() {
        let e = ellipsoid(&EllipsoidSpec::new(["1", "3/2"]), 50).unwrap_err();
        assert!(e.to_string().contains("rational"));
        let e = ellipsoid(&EllipsoidSpec::new(["sqrt(2)", "sqrt(8)"]), 50).unwrap_err();
        assert!(e.to_string().contains("rational"));
    }

    #[test]
    fn zero_mean_fixtures() {
        assert_eq!(zero_mean_profile(&fixtures::zero_mean_r0(), 3).unwrap(), -4);
        assert_eq!(zero_mean_profile(&fixtures::zero_mean_r2(), 3).unwrap(), -4);
    }
}
