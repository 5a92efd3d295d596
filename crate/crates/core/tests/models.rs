use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use sil_core::iteration::index_at;
use sil_core::ledger::{is_perfect, resonance_residuals};
use sil_core::models::{admissible, ellipsoid, fixtures, synthetic, EllipsoidSpec, DEFAULT_DIGITS};
use sil_core::real::rat;
use sil_core::surface::SurfaceModel;

const PRIMES: [u32; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

/// Index of the `m`-th iterate of `y_j` by counting eigenvalue-1 crossings
/// of the linearized flow: plane `k` turns through `2π m a_j/a_k`, each
/// interior full turn crosses twice, and every plane starts with `+1`.
fn crossing_count(axes: &[f64], j: usize, m: u64) -> i64 {
    let mut acc = axes.len() as i64;
    for (k, ak) in axes.iter().enumerate() {
        let turns = m as f64 * axes[j] / ak;
        let mut l = 1u64;
        while (l as f64) < turns - 1e-9 {
            acc += 2;
            l += 1;
        }
        if k == j {
            assert_eq!(l, m);
        }
    }
    acc
}

fn random_axes(rng: &mut ChaCha8Rng) -> (Vec<String>, Vec<f64>) {
    let n = rng.gen_range(2..=4);
    let mut picks: Vec<(f64, String)> = PRIMES
        .choose_multiple(rng, n)
        .map(|p| {
            let c: u32 = rng.gen_range(1..=9);
            (c as f64 * (*p as f64).sqrt(), format!("{}*sqrt({})", c, p))
        })
        .collect();
    picks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    (picks.iter().map(|p| p.1.clone()).collect(), picks.iter().map(|p| p.0).collect())
}

#[test]
fn ellipsoid_indices_match_crossing_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let (exprs, values) = random_axes(&mut rng);
        let model = ellipsoid(&EllipsoidSpec::new(exprs.clone()), DEFAULT_DIGITS).unwrap();
        for (j, g) in model.characteristics.iter().enumerate() {
            for m in 1..=20 {
                assert_eq!(index_at(g, m).unwrap(), crossing_count(&values, j, m), "{:?} y{} m={}", exprs, j + 1, m);
            }
        }
    }
}

#[test]
fn ellipsoids_are_resonant_and_perfect() {
    let tol = rat(1, 1_000_000_000);
    for axes in [vec!["1", "phi"], vec!["1", "sqrt(2)", "sqrt(3)"], vec!["1", "sqrt(2)", "sqrt(3)", "sqrt(5)"]] {
        let model = ellipsoid(&EllipsoidSpec::new(axes), DEFAULT_DIGITS).unwrap();
        let r = resonance_residuals(&model).unwrap();
        assert!(r.admissible(&tol));
        assert!(is_perfect(&model).unwrap().is_perfect());
        assert!(admissible(&model));
    }
}

#[test]
fn ellipsoid_errors() {
    assert!(ellipsoid(&EllipsoidSpec::new(["phi", "1"]), 50).is_err());
    assert!(ellipsoid(&EllipsoidSpec::new(["0", "1"]), 50).is_err());
    let e = ellipsoid(&EllipsoidSpec::new(["2", "3"]), 50).unwrap_err();
    assert_eq!(e.to_string(), "invalid input: degenerate ellipsoid: a1/a2 is rational (2/3)");
}

#[test]
fn synthetic_annotations() {
    let n11 = json!([{"kind": "N1", "lambda": 1, "b": 1}]);
    // 1/2 - 1/10: residual -0.1
    let off = json!({"n": 1, "characteristics": [
        {"name": "y1", "initial_index": 1, "blocks": n11},
        {"name": "y2", "initial_index": 4, "blocks": n11},
    ]});
    let m = synthetic(&off.to_string()).unwrap();
    let a = &m.metadata["admissibility"];
    assert_eq!(a["resonance"]["admissible"], json!(false));
    assert_eq!(a["resonance"]["positive"], json!("-0.100000000000"));
    assert!(!admissible(&m));

    let pair = synthetic(&fixtures::mixed_pair().to_json()).unwrap();
    let a = &pair.metadata["admissibility"];
    assert_eq!(a["q0"], json!(1));
    assert_eq!(a["mmi"], json!(true));
    assert_eq!(a["mean_index_signs"], json!([1, -1]));

    let bad = json!({"n": 2, "characteristics": [{"name": "y1", "initial_index": 1, "blocks": n11}]});
    assert!(synthetic(&bad.to_string()).is_err());
}

#[test]
fn fixtures_round_trip() {
    let mut all: Vec<SurfaceModel> = fixtures::synthetic_corpus().into_iter().map(|(_, m)| m).collect();
    all.push(fixtures::ellipsoid3());
    all.push(fixtures::zero_mean_mixed());
    all.push(SurfaceModel::new(3, vec![fixtures::zero_mean_r2()]));
    for m in all {
        let text = m.to_json();
        let back = SurfaceModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), text);
    }
}

#[test]
fn synthetic_corpus_is_admissible() {
    for (name, m) in fixtures::synthetic_corpus() {
        assert!(admissible(&m), "{}", name);
        assert!(m.positive_count().unwrap() < m.characteristics.len(), "{} is not mixed-sign", name);
    }
}
