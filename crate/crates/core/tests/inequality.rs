use std::f64::consts::PI;

use riesz_core::inequality::{
    commutator, ratio_composition, ratio_kp, ratio_linfty_interp, ratio_moser, ratio_commutator, ratio_commutator_remainder,
    ratio_riesz_commutator, resolution_study, EnsembleSpec, FieldEnsemble, Inequality, KpExponents,
};
use riesz_core::spectral::{apply_fractional_laplacian, homogeneous_norm, Grid, ScalarField};
use riesz_core::Error;

const L: f64 = 2.0 * PI;

fn grid() -> Grid {
    Grid::new(1, 64, L).unwrap()
}

fn wave(grid: &Grid, f: impl Fn(f64) -> f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| f(x[0]))
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn commutator_trig_identity_s2() {
    // [sin, −∂²]cos = sin·cos + (sin·cos)'' = −(3/2) sin 2x
    let g = grid();
    let c = commutator(&wave(&g, f64::sin), 2.0, &wave(&g, f64::cos)).unwrap();
    let expected = wave(&g, |x| -1.5 * (2.0 * x).sin());
    assert!(max_diff(&c, &expected) < 1e-12);
}

#[test]
fn commutator_with_constant_g() {
    let g = grid();
    let f = wave(&g, |x| (3.0 * x).cos() + 0.3 * (5.0 * x).sin());
    for s in [0.5, 1.0, 1.5] {
        let c = commutator(&f, s, &ScalarField::constant(&g, 2.0)).unwrap();
        let expected = apply_fractional_laplacian(&f, s).unwrap().scale(-2.0);
        assert!(max_diff(&c, &expected) < 1e-12, "s = {s}");
    }
}

#[test]
fn structural_zeros_are_exact() {
    let g = grid();
    let c = ScalarField::constant(&g, 0.7);
    let h = wave(&g, |x| (2.0 * x).sin() + 0.1 * (7.0 * x).cos());
    assert!(commutator(&c, 1.3, &h).unwrap().values().iter().all(|&v| v == 0.0));
    assert_eq!(ratio_commutator(&c, &h, 1.5).unwrap(), 0.0);
    assert_eq!(ratio_commutator_remainder(&c, &h, 1.5).unwrap(), 0.0);
    assert_eq!(ratio_riesz_commutator(&c, &h, 0.5).unwrap(), 0.0);
    assert_eq!(ratio_moser(&c, &h, 1.5).unwrap(), 0.0);
    assert_eq!(ratio_moser(&c, &h, 0.5).unwrap(), 0.0);
    assert_eq!(ratio_linfty_interp(&c, 0.5, 0.25).unwrap(), 0.0);
    assert_eq!(ratio_composition(&c, 2.0, 1.0).unwrap(), 0.0);
    let zero = ScalarField::zeros(&g);
    assert_eq!(ratio_kp(&zero, &h, 1.5, &KpExponents::energy()).unwrap(), 0.0);
}

#[test]
fn zero_denominator_is_degenerate() {
    let g = grid();
    let h = wave(&g, f64::sin);
    let zero = ScalarField::zeros(&g);
    // LHS vanishes first, so this is a structural zero rather than an error
    assert_eq!(ratio_linfty_interp(&zero, 0.5, 0.25).unwrap(), 0.0);
    assert!(matches!(ratio_composition(&h, 1.0, 0.0).map(|r| r > 0.0), Ok(true)));
    let c = ScalarField::constant(&g, 1.0);
    assert!(matches!(ratio_kp(&c, &c, 1.0, &KpExponents::energy()), Ok(r) if r == 0.0));
    assert!(matches!(ratio_commutator(&h, &zero, 1.5), Ok(r) if r == 0.0));
    let f = wave(&g, |x| x.sin() + 0.5);
    assert!(matches!(ratio_riesz_commutator(&f, &ScalarField::constant(&g, 1.0), 0.5), Err(Error::Degenerate(_))));
}

#[test]
fn commutator_same_mode_closed_form() {
    // f = g = cos kx: [f,Λ^s]g = k^s/2 + (k^s − (2k)^s)/2 · cos 2kx
    let g = grid();
    let (k, s) = (3.0, 1.5);
    let f = wave(&g, |x| (k * x).cos());
    let r = ratio_commutator(&f, &f, s).unwrap();
    let ks: f64 = k.powf(s);
    let c0 = ks / 2.0;
    let c1 = (ks - (2.0 * k).powf(s)) / 2.0;
    let lhs = (L * (c0 * c0 + c1 * c1 / 2.0)).sqrt();
    let rhs = 2.0 * ks * (L / 2.0).sqrt();
    assert!((r - lhs / rhs).abs() < 1e-12, "{r} vs {}", lhs / rhs);
}

#[test]
fn commutator_remainder_removes_first_order_term() {
    // low-frequency f against high-frequency g: the corrected commutator is much smaller
    let g = grid();
    let f = wave(&g, f64::sin);
    let h = wave(&g, |x| (15.0 * x).cos());
    let s = 1.5;
    let r1 = ratio_commutator(&f, &h, s).unwrap();
    let r2 = ratio_commutator_remainder(&f, &h, s).unwrap();
    assert!(r2 < 0.1 * r1, "commutator_remainder {r2} vs commutator {r1}");
    // g constant: LHS reduces to ‖c Λ^s f‖ since the first-order term vanishes
    let c = ScalarField::constant(&g, 1.0);
    let f2 = wave(&g, |x| (2.0 * x).sin());
    let r = ratio_commutator_remainder(&f2, &c, s).unwrap();
    let lhs = homogeneous_norm(&f2, s);
    let rhs = homogeneous_norm(&f2, s) + 4.0 * homogeneous_norm(&c, s - 2.0);
    assert!((r - lhs / rhs).abs() < 1e-12);
}

#[test]
fn riesz_commutator_single_mode_closed_form() {
    let g = grid();
    let (p, q, sigma) = (3.0f64, 5.0f64, 0.5f64);
    let e = 1.0 - sigma / 2.0;
    let f = wave(&g, |x| (p * x).cos());
    let h = wave(&g, |x| q.powf(sigma / 2.0) * (q * x).cos());
    let r = ratio_riesz_commutator(&f, &h, sigma).unwrap();
    // D = ∂Λ^{−σ/2} maps cos(kx) to −k^{1−σ/2} sin(kx)
    let amp = q.powf(sigma / 2.0);
    let expected = wave(&g, |x| {
        let dfg = -0.5 * amp * ((p + q).powf(e) * ((p + q) * x).sin() + (q - p).powf(e) * ((q - p) * x).sin());
        let fdg = -amp * q.powf(e) * (p * x).cos() * (q * x).sin();
        dfg - fdg
    });
    let lhs = homogeneous_norm(&expected, 0.0);
    let g_half = amp * q.powf(sigma / 2.0) * (L / 2.0).sqrt();
    let rhs = p.powf(1.0 - sigma) * g_half + p.powf(0.5 + 1.0 - sigma) * (L / 2.0).sqrt() * g_half;
    assert!((r - lhs / rhs).abs() < 1e-12, "{r} vs {}", lhs / rhs);
}

#[test]
fn moser_s1_single_mode() {
    // s = 1, f = cos px, g = cos qx with q > p: Λ(fg) − fΛg = ½(p+q)cos(p+q)x + ½(q−p)cos(q−p)x − q cos px cos qx
    let g = grid();
    let (p, q) = (2.0f64, 5.0f64);
    let f = wave(&g, |x| (p * x).cos());
    let h = wave(&g, |x| (q * x).cos());
    let r = ratio_moser(&f, &h, 1.0).unwrap();
    // the commutator equals ½p(cos(p+q)x − cos(q−p)x)
    let lhs = 0.5 * p * L.sqrt();
    let g_norm = (L / 2.0).sqrt();
    let tail = homogeneous_norm(&wave(&g, |x| p * (p * x).cos() * (q * x).cos()), 0.0);
    let rhs = p * g_norm + p * g_norm + tail;
    assert!((r - lhs / rhs).abs() < 1e-12, "{r} vs {}", lhs / rhs);
    assert!(ratio_moser(&f, &h, 0.5).unwrap() > 0.0);
}

#[test]
fn linfty_single_mode_and_homogeneity() {
    let g = grid();
    let (k, s, eps) = (4.0f64, 0.5, 0.25);
    let f = wave(&g, |x| (k * x).cos());
    let r = ratio_linfty_interp(&f, s, eps).unwrap();
    let expected = k.powf(-0.5) / (L / 2.0).sqrt();
    assert!((r - expected).abs() < 1e-12);
    let f2 = wave(&g, |x| (k * x).cos() + 0.4 * (3.0 * x).sin());
    let a = ratio_linfty_interp(&f2, s, eps).unwrap();
    let b = ratio_linfty_interp(&f2.scale(2.0), s, eps).unwrap();
    assert!((a - b).abs() < 1e-14 * a);
    assert!(ratio_linfty_interp(&f, s, 0.6).is_err());
}

#[test]
fn composition_closed_forms() {
    let g = grid();
    let k = 3.0;
    let f = wave(&g, |x| (k * x).cos());
    let r = ratio_composition(&f, 2.0, 1.0).unwrap();
    assert!((r - 1.0).abs() < 1e-12, "2^(s-1) = 1 for s = 1, got {r}");
    let r = ratio_composition(&f, 2.0, 1.5).unwrap();
    assert!((r - 2f64.sqrt()).abs() < 1e-12);
    let positive = wave(&g, |x| 2.0 + x.sin());
    assert!((ratio_composition(&positive, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
    assert!(ratio_composition(&f, 0.5, 0.0).is_err());
    assert!(ratio_composition(&f, 1.0, 1.6).is_err());
}

#[test]
fn homogeneity_under_rescaling() {
    let spec = EnsembleSpec { count: 3, ..EnsembleSpec::default() };
    let e = FieldEnsemble::generate(&spec).unwrap();
    let (f, g) = e.pair(0);
    for ineq in Inequality::battery(1) {
        let a = ineq.ratio(f, g).unwrap();
        let b = ineq.ratio(&f.scale(3.0), &g.scale(0.25)).unwrap();
        let tol = if matches!(ineq, Inequality::Composition { .. }) { 1e-9 } else { 1e-12 };
        assert!((a - b).abs() <= tol * a, "{}: {a} vs {b}", ineq.label());
    }
}

#[test]
fn ensemble_is_deterministic_and_resolution_independent() {
    let spec = EnsembleSpec { count: 5, seed: 9, ..EnsembleSpec::default() };
    let a = FieldEnsemble::generate(&spec).unwrap();
    let b = FieldEnsemble::generate(&spec).unwrap();
    assert_eq!(a.fields, b.fields);
    let fine = FieldEnsemble::generate(&EnsembleSpec { n: 256, ..spec.clone() }).unwrap();
    for (c, f) in a.fields.iter().zip(&fine.fields) {
        for (i, v) in c.values().iter().enumerate() {
            assert!((v - f.values()[2 * i]).abs() < 1e-12);
        }
    }
}

#[test]
fn small_ensemble_resolution_study() {
    let spec = EnsembleSpec { count: 40, ..EnsembleSpec::default() };
    let study = resolution_study(&spec, &Inequality::battery(1)).unwrap();
    let (summaries, coarse) = (study.summaries, study.coarse);
    for (s, ratios) in summaries.iter().zip(&coarse) {
        assert_eq!(ratios.len(), 40);
        assert!(s.coarse.max.is_finite() && s.coarse.max > 0.0, "{s:?}");
        assert!(s.stable(0.2), "{s:?}");
    }
}
