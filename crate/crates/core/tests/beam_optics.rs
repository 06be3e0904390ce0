use qpms_core::beam_optics::{smm_coefficient, specular_to_lambertian_ratio, ReceiverSpec, ReflectorSpec, SmmMethod, SmmScenario};

fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn smm_is_monotone_in_reflector_radius() {
    let base = SmmScenario::default();
    let values: Vec<f64> = log_radii(10e-6, 0.1, 12)
        .into_iter()
        .map(|r| smm_coefficient(&base.with_reflector_radius(r).unwrap()).unwrap().value)
        .collect();
    for w in values.windows(2) {
        assert!(w[1] >= w[0], "{values:?}");
    }
    assert!(values.iter().all(|&c| (0.0..=0.05).contains(&c)));
}

#[test]
fn smm_is_linear_in_reflectivity() {
    let base = SmmScenario::default();
    for radius in [30e-6, 1e-3, 0.05] {
        let full = SmmScenario { reflector: ReflectorSpec::new(radius, 1.0).unwrap(), ..base };
        let part = SmmScenario { reflector: ReflectorSpec::new(radius, 0.05).unwrap(), ..base };
        let (a, b) = (smm_coefficient(&full).unwrap().value, smm_coefficient(&part).unwrap().value);
        assert!((b - 0.05 * a).abs() <= 1e-9 * b, "{radius}: {a} {b}");
    }
}

#[test]
fn smm_vanishes_for_a_shrinking_reflector() {
    let base = SmmScenario::default();
    let small = smm_coefficient(&base.with_reflector_radius(1e-6).unwrap()).unwrap().value;
    let smaller = smm_coefficient(&base.with_reflector_radius(1e-7).unwrap()).unwrap().value;
    assert!(smaller < small && smaller < 1e-30);
    // Point-reflector scaling: C ∝ R⁴.
    assert!((small / smaller / 1e4 - 1.0).abs() < 1e-3);
}

#[test]
fn smm_refinement_is_stable_across_radii() {
    let base = SmmScenario::default();
    for r in log_radii(10e-6, 1.0, 9) {
        let res = smm_coefficient(&base.with_reflector_radius(r).unwrap()).unwrap();
        assert!(res.refinement_change < 1e-3, "{r}: {}", res.refinement_change);
    }
}

#[test]
fn smm_approaches_the_unclipped_limit_in_the_near_field() {
    // At one Rayleigh range the beam is narrow enough for direct quadrature
    // over a mirror wider than the beam.
    let mut s = SmmScenario::default();
    s.range = s.beam.rayleigh_range();
    let w_l = s.beam.width_at(s.range);
    s.receiver = ReceiverSpec::new(6.0 * s.beam.width_at(2.0 * s.range)).unwrap();
    s.reflector = ReflectorSpec::new(1.0, 1.0).unwrap();
    let near: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|m| {
            let res = smm_coefficient(&s.with_reflector_radius(m * w_l).unwrap()).unwrap();
            assert_eq!(res.method, SmmMethod::Quadrature);
            res.value
        })
        .collect();
    assert!(near[0] < near[1] && near[1] < near[2], "{near:?}");
    assert!((near[2] - 1.0).abs() < 1e-6, "{near:?}");
    let open = smm_coefficient(&s.with_reflector_radius(10.0 * w_l).unwrap()).unwrap();
    assert_eq!(open.method, SmmMethod::TransparentMask);
    assert!((open.value - 1.0).abs() < 1e-12);
}

#[test]
fn lambertian_ratio_is_monotone_in_waist_and_radius() {
    let radii = log_radii(20e-6, 1e-2, 10);
    let by_radius: Vec<f64> = radii.iter().map(|&r| specular_to_lambertian_ratio(6.77e-3, 1064e-9, r).unwrap().ratio).collect();
    assert!(by_radius.windows(2).all(|w| w[1] > w[0]));
    let by_waist: Vec<f64> = [1e-3, 3e-3, 6.77e-3, 2e-2]
        .iter()
        .map(|&w| specular_to_lambertian_ratio(w, 1064e-9, 50e-6).unwrap().ratio)
        .collect();
    assert!(by_waist.windows(2).all(|w| w[1] > w[0]));
}
