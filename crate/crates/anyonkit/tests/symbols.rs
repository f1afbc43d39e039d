use anyonkit::liealg::{AlgebraName, AlgebraSpec, Weight};
use anyonkit::qarith::QContext;
use anyonkit::symbols::{
    check_r_symmetries, compute_f_tensor, compute_r_tensor, verify_hexagon, verify_pentagon,
    FusionRules,
};
use anyonkit::tensor::CgEngine;

fn engine(name: AlgebraName, k: u32) -> CgEngine {
    let alg = AlgebraSpec::new(name);
    let ctx = QContext::root_of_unity(k, alg.dual_coxeter, alg.root_denominator, 128);
    CgEngine::new(alg, ctx)
}

fn sweep(e: &CgEngine, labels: &[Weight]) {
    let rules = FusionRules::from_engine(e, labels).unwrap();
    let f = compute_f_tensor(e, &rules).unwrap();
    for b in f.blocks.values() {
        assert!(b.orthogonality() < 1e-15, "{:?}", b.labels);
    }
    let r = compute_r_tensor(e, &rules).unwrap();
    assert!(r.off_diagonal < 1e-15, "{}", r.off_diagonal);
    let p = verify_pentagon(&rules, &f, 128);
    assert!(p.max < 1e-15, "{p:?}");
    let h1 = verify_hexagon(&rules, &f, &r, false, 128);
    assert!(h1.max < 1e-15, "{h1:?}");
    let h2 = verify_hexagon(&rules, &f, &r, true, 128);
    assert!(h2.max < 1e-15, "{h2:?}");
    let (s, c) = check_r_symmetries(&e.alg, &rules, &r);
    assert!(s.max < 1e-15 && c.max < 1e-15, "{s:?} {c:?}");
}

#[test]
fn su3_level_two_consistency() {
    let e = engine(AlgebraName::A2, 2);
    let labels = e.alg.admissible_weights(2);
    sweep(&e, &labels);
}

#[test]
fn su3_level_three_z3_consistency() {
    let e = engine(AlgebraName::A2, 3);
    sweep(
        &e,
        &[
            Weight::a2(0, 0),
            Weight::a2(1, 1),
            Weight::a2(3, 0),
            Weight::a2(0, 3),
        ],
    );
}

#[test]
fn rank_two_level_one_consistency() {
    for name in [AlgebraName::B2, AlgebraName::G2] {
        let e = engine(name, 1);
        let labels = e.alg.admissible_weights(1);
        sweep(&e, &labels);
    }
}

#[test]
fn sweeps_cover_instances() {
    let e = engine(AlgebraName::A2, 2);
    let labels = e.alg.admissible_weights(2);
    let rules = FusionRules::from_engine(&e, &labels).unwrap();
    let f = compute_f_tensor(&e, &rules).unwrap();
    let r = compute_r_tensor(&e, &rules).unwrap();
    assert!(verify_pentagon(&rules, &f, 128).instances > 1000);
    assert!(verify_hexagon(&rules, &f, &r, false, 128).instances > 100);
    let total: usize = f.blocks.values().map(|b| b.rows.len() * b.cols.len()).sum();
    assert_eq!(total, 405);
}

#[test]
fn su3_level_two_values() {
    let e = engine(AlgebraName::A2, 2);
    let ctx = e.ctx.clone();
    let labels = e.alg.admissible_weights(2);
    let rules = FusionRules::from_engine(&e, &labels).unwrap();
    let r = compute_r_tensor(&e, &rules).unwrap();
    let (t, tb) = (Weight::a2(1, 0), Weight::a2(0, 1));
    let got = r.get(&t, &t, &tb, 0).unwrap();
    let want = -&ctx.q_power_frac(-2, 3);
    assert!(got.approx_eq(&want, 1e-18), "{got:?} {want:?}");
    let f = compute_f_tensor(&e, &rules).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let want = [
        [-1.0 / phi.sqrt(), 1.0 / phi],
        [1.0 / phi, 1.0 / phi.sqrt()],
    ];
    for b in [
        f.block(&t, &tb, &tb, &tb).unwrap(),
        f.block(&t, &t, &tb, &t).unwrap(),
    ] {
        for i in 0..2 {
            for j in 0..2 {
                let (re, im) = b.m[i][j].to_c64();
                assert!(
                    (re - want[i][j]).abs() < 1e-12 && im.abs() < 1e-12,
                    "{i}{j}: {re} {im}"
                );
            }
        }
    }
}

#[test]
fn z3_octet_block() {
    let e = engine(AlgebraName::A2, 3);
    let labels = [
        Weight::a2(0, 0),
        Weight::a2(1, 1),
        Weight::a2(3, 0),
        Weight::a2(0, 3),
    ];
    let rules = FusionRules::from_engine(&e, &labels).unwrap();
    let o = Weight::a2(1, 1);
    let f = compute_f_tensor(&e, &rules).unwrap();
    let b = f.block(&o, &o, &o, &o).unwrap();
    let s3 = 3f64.sqrt();
    let s12 = 12f64.sqrt();
    let want = [
        [1. / 3., 1. / s3, 0., 0., 1. / s3, -1. / 3., -1. / 3.],
        [1. / s3, -0.5, 0., 0., 0.5, 1. / s12, 1. / s12],
        [0., 0., 0.5, 0.5, 0., 0.5, -0.5],
        [0., 0., 0.5, 0.5, 0., -0.5, 0.5],
        [1. / s3, 0.5, 0., 0., -0.5, 1. / s12, 1. / s12],
        [-1. / 3., 1. / s12, -0.5, 0.5, 1. / s12, 1. / 3., 1. / 3.],
        [-1. / 3., 1. / s12, 0.5, -0.5, 1. / s12, 1. / 3., 1. / 3.],
    ];
    let mut got = String::new();
    let mut worst = 0f64;
    for i in 0..7 {
        for j in 0..7 {
            let (re, im) = b.m[i][j].to_c64();
            got += &format!("{re:8.4}{im:+.1e} ");
            worst = worst.max((re - want[i][j]).abs()).max(im.abs());
        }
        got += "\n";
    }
    assert!(worst < 1e-12, "{:?}\n{got}", b.rows);
}
