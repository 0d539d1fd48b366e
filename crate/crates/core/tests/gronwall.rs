use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riesz_core::gronwall::{
    asymptotic_slope, bootstrap_constant, proof_threshold, envelope, find_threshold_m, integrate_inequality, verify_lemma,
    GronwallParams, DEFAULT_HORIZON, DEFAULT_RESOLUTION,
};
use riesz_core::Error;

#[test]
fn zero_data_stays_zero() {
    let p = GronwallParams::quadratic(2.0, 1.0);
    let traj = integrate_inequality(&p, 0.0, DEFAULT_HORIZON).unwrap();
    assert!(traj.values.iter().all(|&y| y == 0.0));
    assert!(verify_lemma(&p, 0.0, DEFAULT_HORIZON).unwrap());
}

#[test]
fn linear_case_matches_closed_form() {
    for a in [1.5, 2.0, 3.7] {
        let p = GronwallParams::quadratic(a, 0.0);
        let traj = integrate_inequality(&p, 0.7, DEFAULT_HORIZON).unwrap();
        for (&t, &y) in traj.times.iter().zip(&traj.values) {
            let exact = 0.7 * (1.0 + t).powf(-a);
            assert!((y / exact - 1.0).abs() <= 1e-9, "a = {a}, t = {t}: {y} vs {exact}");
        }
    }
}

#[test]
fn small_data_below_envelope() {
    let p = GronwallParams::quadratic(2.0, 1.0);
    let traj = integrate_inequality(&p, 1e-3, 1e3).unwrap();
    assert!(traj.blowup.is_none());
    for (&t, &y) in traj.times.iter().zip(&traj.values) {
        assert!(y <= envelope(&p, 1e-3, t));
    }
    let long = integrate_inequality(&p, 1e-3, DEFAULT_HORIZON).unwrap();
    let slope = asymptotic_slope(&long).unwrap();
    assert!((slope + 2.0).abs() <= 0.02, "slope {slope}");
}

#[test]
fn large_data_blows_up() {
    let p = GronwallParams::quadratic(2.0, 1.0);
    let traj = integrate_inequality(&p, 10.0, DEFAULT_HORIZON).unwrap();
    let t = traj.blowup.expect("blowup");
    // Y' ≥ Y² − 2Y with Y0 = 10 escapes before ln(10/8)/2
    assert!(t > 0.0 && t < 0.12, "blowup time {t}");
    assert!(!verify_lemma(&p, 10.0, DEFAULT_HORIZON).unwrap());
}

#[test]
fn threshold_decreases_in_c_star() {
    let mut last = f64::INFINITY;
    for c_star in [0.25, 0.5, 1.0, 2.0, 3.0] {
        let p = GronwallParams::quadratic(2.0, c_star);
        let th = find_threshold_m(&p, DEFAULT_HORIZON, DEFAULT_RESOLUTION).unwrap();
        assert!(!th.unbounded);
        assert!(th.m > 0.0 && th.m < last, "C* = {c_star}: M = {} after {last}", th.m);
        assert!(verify_lemma(&p, th.m, DEFAULT_HORIZON).unwrap());
        last = th.m;
    }
}

#[test]
fn linear_case_threshold_is_unbounded() {
    let p = GronwallParams::quadratic(2.0, 0.0);
    let th = find_threshold_m(&p, 100.0, DEFAULT_RESOLUTION).unwrap();
    assert!(th.unbounded);
}

#[test]
fn bootstrap_condition_is_certified_and_dominated() {
    for c_star in [0.1, 1.0, 3.0] {
        let p = GronwallParams { a: 2.0, c_star, b: vec![1.0], c: vec![1.0], c_p: 1 };
        let th = find_threshold_m(&p, DEFAULT_HORIZON, DEFAULT_RESOLUTION).unwrap();
        assert!(th.m > 0.0 && !th.unbounded);
        let z0 = proof_threshold(&p, 1e-9).unwrap();
        assert!(bootstrap_constant(&p, z0) < 1.0);
        assert!(verify_lemma(&p, z0, DEFAULT_HORIZON).unwrap());
        assert!(th.m >= z0, "C* = {c_star}: bisected {} below analytic {z0}", th.m);
    }
}

#[test]
fn hypothesis_violations_are_parameter_errors() {
    let p = GronwallParams::quadratic(0.9, 1.0);
    assert!(matches!(integrate_inequality(&p, 0.1, 10.0), Err(Error::Parameter(_))));
    assert!(matches!(find_threshold_m(&p, 10.0, 1e-3), Err(Error::Parameter(_))));
}

#[test]
fn random_parameter_sets_certify() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..10 {
        let p = GronwallParams::random(&mut rng);
        p.validate().unwrap();
        let th = find_threshold_m(&p, DEFAULT_HORIZON, DEFAULT_RESOLUTION).unwrap();
        for frac in [0.999, 0.5, 0.1] {
            assert!(verify_lemma(&p, th.m * frac, DEFAULT_HORIZON).unwrap(), "set {i}: {p:?}");
        }
    }
}
