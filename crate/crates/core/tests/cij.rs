use sil_core::cij::{
    dual_certificate, solve_abstract, solve_paths, vertex_symmetry, verify_abstract, verify_certificate,
    AbstractFile, AbstractJumpInstance, JumpInstance, SearchOptions,
};
use sil_core::cij::verify::AbstractCertificate;
use sil_core::iteration::PathGerm;
use sil_core::models::fixtures;
use sil_core::normal_form::{BasicBlock, NormalForm};
use sil_core::real::rat;
use sil_core::rotation::RotationNumber;
use sil_core::Error;

const PHI_FRAC: &str = "0.61803398874989484820458683436563811772030917980576";

fn n11() -> BasicBlock {
    BasicBlock::n1(1, 1).unwrap()
}

fn golden_germ() -> PathGerm {
    let rho = RotationNumber::irrational(PHI_FRAC, 50).unwrap();
    PathGerm::new("y", 2, NormalForm::new(vec![n11(), BasicBlock::r(rho).unwrap()]))
}

fn opts(eps: (i64, i64)) -> SearchOptions {
    SearchOptions { eps: rat(eps.0, eps.1), ..SearchOptions::default() }
}

#[test]
fn golden_germ_frozen_tuples() {
    let inst = JumpInstance::new(vec![golden_germ()], 2, rat(1, 20)).unwrap();
    let o = opts((1, 100));
    let certs = solve_paths(&inst, 3, &o).unwrap();
    let got: Vec<_> = certs.iter().map(|c| (c.n_jump, c.m[0], c.delta_count[0])).collect();
    assert_eq!(got, vec![(55, 17, 1), (233, 72, 0), (288, 89, 1)]);
    assert_eq!(certs[0].chi, vec![1]);
    assert_eq!(certs[0].chi_alpha, vec![vec![Some(0)]]);
    for c in &certs {
        assert!(c.passed());
        assert!(verify_certificate(&inst.germs, 2, c).unwrap().passed());
    }
    let dual = dual_certificate(&inst, &certs[0], &o).unwrap();
    assert_eq!((dual.n_jump, dual.delta_count[0]), (233, 0));
    assert!(vertex_symmetry(&inst.germs, &certs[0], &dual));
}

#[test]
fn abstract_sqrt2_frozen_tuples() {
    let f: AbstractFile =
        serde_json::from_str(r#"{"rows": [{"beta": -1, "alpha": ["sqrt(2)"]}], "delta": "1/10"}"#).unwrap();
    let inst = AbstractJumpInstance::from_file(&f, 50, &rat(1, 20)).unwrap();
    let sols = solve_abstract(&inst, 3, &SearchOptions::default()).unwrap();
    let got: Vec<_> = sols.iter().map(|s| (s.n, s.m[0], s.delta[0])).collect();
    assert_eq!(got, vec![(408, 985, 1), (985, 2378, 0), (1393, 3363, 1)]);
    for s in &sols {
        let cert = AbstractCertificate::new(&inst, s).unwrap();
        assert!(verify_abstract(&inst, &cert).unwrap().passed());
    }
}

#[test]
fn single_n11_germ_has_even_n() {
    let g = PathGerm::new("y1", 1, NormalForm::new(vec![n11()]));
    let inst = JumpInstance::new(vec![g], 1, rat(1, 20)).unwrap();
    for c in solve_paths(&inst, 5, &SearchOptions::default()).unwrap() {
        assert_eq!(c.n_jump % 2, 0);
        assert_eq!(c.m[0], c.n_jump / 2);
    }
}

#[test]
fn mixed_sign_pair_shares_m() {
    let a = PathGerm::new("y1", 1, NormalForm::new(vec![n11()]));
    let b = PathGerm::new("y2", -3, NormalForm::new(vec![n11()]));
    let inst = JumpInstance::new(vec![a, b], 1, rat(1, 20)).unwrap();
    for c in solve_paths(&inst, 4, &SearchOptions::default()).unwrap() {
        assert_eq!(c.m, vec![c.n_jump / 2, c.n_jump / 2]);
        assert!(verify_certificate(&inst.germs, 1, &c).unwrap().passed());
    }
}

#[test]
fn tampered_certificates_fail() {
    let inst = JumpInstance::new(vec![golden_germ()], 2, rat(1, 20)).unwrap();
    let cert = solve_paths(&inst, 1, &opts((1, 100))).unwrap().remove(0);

    let mut bumped = cert.clone();
    bumped.m[0] += 1;
    let rep = verify_certificate(&inst.germs, 2, &bumped).unwrap();
    assert_eq!(rep.first_failure().unwrap().display, "(3.30)");

    let g = PathGerm::new("y1", 1, NormalForm::new(vec![n11()]));
    let single = JumpInstance::new(vec![g], 1, rat(1, 20)).unwrap();
    let mut odd = solve_paths(&single, 1, &SearchOptions::default()).unwrap().remove(0);
    odd.n_jump += 1;
    let rep = verify_certificate(&single.germs, 1, &odd).unwrap();
    assert!(rep.records.iter().any(|r| r.display == "(3.28)" && !r.pass));

    let mut short = cert.clone();
    short.m.clear();
    assert!(matches!(verify_certificate(&inst.germs, 2, &short), Err(Error::Parse(_))));
}

#[test]
fn ellipsoid3_dual_pairs_delta_with_c() {
    let m = fixtures::ellipsoid3();
    let inst = JumpInstance::new(m.characteristics.clone(), 3, rat(1, 20)).unwrap();
    let o = SearchOptions::default();
    let cert = solve_paths(&inst, 1, &o).unwrap().remove(0);
    let dual = dual_certificate(&inst, &cert, &o).unwrap();
    for k in 0..3 {
        assert_eq!(cert.delta_count[k] + dual.delta_count[k], 2);
    }
    assert!(verify_certificate(&inst.germs, 3, &dual).unwrap().passed());
}

#[test]
fn worker_count_does_not_change_results() {
    let m = fixtures::ellipsoid2();
    let inst = JumpInstance::new(m.characteristics.clone(), 2, rat(1, 20)).unwrap();
    let one = solve_paths(&inst, 3, &SearchOptions::default()).unwrap();
    let four = solve_paths(&inst, 3, &SearchOptions { workers: 4, ..SearchOptions::default() }).unwrap();
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
}

#[test]
fn scan_exhaustion_is_reported() {
    let inst = JumpInstance::new(vec![golden_germ()], 2, rat(1, 20)).unwrap();
    let o = SearchOptions { scan_limit: 10, ..opts((1, 100)) };
    assert!(matches!(solve_paths(&inst, 1, &o), Err(Error::ScanExhausted { found: 0, .. })));
}
