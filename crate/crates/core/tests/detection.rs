use qpms_core::detection::{closed_form_min_signal, log_radii, min_signal_for_target, ScenarioConfig, SweepContext};

fn context() -> SweepContext {
    SweepContext::new(&ScenarioConfig::default_scenario().unwrap()).unwrap()
}

#[test]
fn default_point_is_finite_and_closes() {
    let ctx = context();
    let radius = ctx.scenario.qpms_reflector.radius;
    let rows = ctx.rows_for_radius(radius, &[0.0]);
    let row = &rows[0];
    assert!(row.converged, "{:?}", row.error);
    assert!(row.alpha_sq.is_finite() && row.alpha_sq > 0.0);
    assert!((row.ssmd - 2.0).abs() < 1e-3);
    // Same reflector on both legs: the signal needs far more than α_c.
    assert!(row.ratio > 1.0);
    println!("R = 100 µm, δα_c = 0: |α|² = {:.6e}, ratio = {:.6e}", row.alpha_sq, row.ratio);
}

#[test]
fn solver_agrees_with_closed_form_on_the_default_pipeline() {
    let ctx = context();
    let (_, eta) = qpms_core::detection::link_efficiency(&ctx.scenario, ctx.scenario.qpms_reflector).unwrap();
    for scatter in [0.0, 10.0, 100.0] {
        let p = ctx.pipeline(eta, scatter);
        let exact = closed_form_min_signal(&p).unwrap();
        let solved = min_signal_for_target(&p).unwrap();
        assert!((solved.alpha_sq - exact).abs() / exact < 1e-9, "{scatter}: {} vs {exact}", solved.alpha_sq);
    }
}

#[test]
fn strength_ratio_curves_have_the_expected_shape() {
    let ctx = context();
    let scatters = [0.0, 10.0, 100.0];
    let radii = log_radii(2e-3, 0.2, 21);
    let sweep = ctx.run(&radii, &scatters).unwrap();
    assert!(sweep.rows.iter().all(|r| r.converged), "{:?}", sweep.rows.iter().find(|r| !r.converged));
    for row in &sweep.rows {
        assert!((row.ssmd - 2.0).abs() < 1e-3);
    }
    for &d in &scatters {
        let curve = sweep.curve(d);
        assert_eq!(curve.len(), radii.len());
        assert!(curve.windows(2).all(|w| w[1].ratio <= w[0].ratio), "δα_c = {d}");
        let crossing = sweep.crossing_radius(d).expect("ratio = 1 crossing inside the grid");
        println!("δα_c = {d}: crossing at R ≈ {:.3} cm", crossing * 100.0);
    }
    for (a, b) in scatters.iter().zip(&scatters[1..]) {
        for (lo, hi) in sweep.curve(*a).iter().zip(sweep.curve(*b)) {
            assert!(hi.ratio > lo.ratio);
        }
    }
}

#[test]
fn stronger_conventional_return_needs_more_signal() {
    let base = ScenarioConfig::default_scenario().unwrap();
    let required: Vec<f64> = [1.0, 3.0, 10.0]
        .iter()
        .map(|&f| {
            let mut s = base.clone();
            s.conventional.amplitude *= f;
            s.conventional.multiple_scatter = 10.0 * f;
            let ctx = SweepContext::new(&s).unwrap();
            ctx.rows_for_radius(0.01, &[10.0 * f])[0].alpha_sq
        })
        .collect();
    assert!(required.windows(2).all(|w| w[1] > w[0]), "{required:?}");
}

#[test]
fn sweep_is_reproducible() {
    let ctx = context();
    let radii = log_radii(5e-3, 5e-2, 4);
    let a = ctx.run(&radii, &[0.0, 10.0]).unwrap();
    let b = ctx.run(&radii, &[0.0, 10.0]).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.alpha_sq.to_bits(), y.alpha_sq.to_bits());
    }
}

#[test]
fn tiny_reflector_exceeds_the_search_limit() {
    let mut s = ScenarioConfig::default_scenario().unwrap();
    s.max_alpha_sq = 1e20;
    let ctx = SweepContext::new(&s).unwrap();
    let row = &ctx.rows_for_radius(100e-6, &[0.0])[0];
    assert!(!row.converged);
    assert!(row.alpha_sq.is_nan());
}
