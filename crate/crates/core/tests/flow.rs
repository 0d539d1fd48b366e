use riesz_core::flow::{compute_k, verify_background_bounds, InitialFlow, DEFAULT_GROWTH_THRESHOLD};
use riesz_core::spectral::Grid;

#[test]
fn sine_flow_k_matches_closed_form() {
    let eps = 0.2;
    let flow = InitialFlow::sine_1d(eps);
    let grid = Grid::new(1, 512, 1.0).unwrap();
    for t in [0.0, 1.0, 10.0, 100.0] {
        let sample = compute_k(&flow, &grid, t).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..grid.len() {
            let x = sample.grid.coordinates(i)[0];
            let point = riesz_core::flow::burgers_evaluate(&flow, &[x], t).unwrap();
            let c = eps * point.alpha[0].cos();
            let expected = (1.0 + t) * c / (1.0 + t * (1.0 + c));
            worst = worst.max((sample.k.at(i)[(0, 0)] - expected).abs());
        }
        assert!(worst <= 1e-8, "t = {t}: {worst}");
        assert!(sample.reconstruction_residual() < 1e-14);
        assert!(sample.divergence_residual() <= 1e-10, "{}", sample.divergence_residual());
        assert!(sample.max_residual <= 1e-10);
    }
}

#[test]
fn sine_flow_diagnostics_are_bounded() {
    let flow = InitialFlow::sine_1d(0.2);
    let grid = Grid::new(1, 512, 1.0).unwrap();
    let report =
        verify_background_bounds(&flow, &grid, &[0.0, 1.0, 10.0, 100.0], &[0.0, 1.0, 2.0], DEFAULT_GROWTH_THRESHOLD)
            .unwrap();
    assert!(report.sup_k_bounded);
    assert!(report.second_gradient_bounded);
    // sup|K| increases toward sup |(D−1)/D| = ε/(1−ε) with D = 1 + ε cos α
    let sups: Vec<f64> = report.rows.iter().map(|r| r.sup_k).collect();
    assert!(sups.windows(2).all(|w| w[1] >= w[0]));
    let limit = 0.2 / 0.8;
    assert!(sups.iter().all(|&s| s <= limit));
    assert!(limit - sups[3] < 1e-3);
}

#[test]
fn cross_sine_flow_h1_verdict() {
    let flow = InitialFlow::cross_sine_2d(0.1);
    let grid = Grid::new(2, 64, 1.0).unwrap();
    let report = verify_background_bounds(&flow, &grid, &[0.0, 1.0, 10.0, 100.0], &[1.0], DEFAULT_GROWTH_THRESHOLD)
        .unwrap();
    assert!(report.k_seminorm_verdicts[0].2);
    assert!(report.all_bounded());
}
