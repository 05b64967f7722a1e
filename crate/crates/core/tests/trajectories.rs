use mixflow::trajectories::{
    detect_crossings, integrate, run_ensemble, run_per_family, sample_initial_conditions,
};
use mixflow::{
    CenterSign, DiscreteMixture, EnsembleSpec, Geometry, InitLaw, PhaseMixture, PureState,
    SlitLabel, VelocityField,
};
use proptest::prelude::*;

fn both(g: Geometry) -> [mixflow::SlitPacket; 2] {
    [g.packet(CenterSign::Minus), g.packet(CenterSign::Plus)]
}

#[test]
fn single_slit_spreading_is_self_similar() {
    // x(t) - c = (sigma_t / sigma0) (x(0) - c)
    let g = Geometry::default();
    let p = g.packet(CenterSign::Minus);
    let spec = EnsembleSpec::default();
    let traj = integrate(&VelocityField::Single(p), 5.5, &spec).unwrap();
    for (t, x) in traj.t_grid.iter().zip(&traj.x) {
        let expected = p.center() + 0.5 * g.sigma_t(*t) / g.sigma0;
        assert!((x - expected).abs() < 1e-9, "t = {t}: {x} vs {expected}");
    }
    let at_one = traj.x[100];
    assert!((at_one - 5.0 - 2.0616).abs() < 1e-4);
}

fn assert_non_crossing(field: VelocityField) {
    let g = Geometry::default();
    let run = run_ensemble(&field, &EnsembleSpec::default(), &both(g)).unwrap();
    assert!(run.is_complete(), "{:?}: {:?}", field.kind(), run.failures);
    assert_eq!(run.trajectories.len(), 18);
    let report = detect_crossings(&run.trajectories, false).unwrap();
    assert_eq!(report.pairs_checked, 18 * 17 / 2);
    assert!(
        report.is_empty(),
        "{:?}: {:?}",
        field.kind(),
        report.crossings
    );
    for t in &run.trajectories {
        if t.start() > 0.0 {
            assert!(t.min() > 0.0);
        } else {
            assert!(t.max() < 0.0);
        }
    }
}

#[test]
fn mixture_trajectories_do_not_cross() {
    assert_non_crossing(VelocityField::Mixture(
        DiscreteMixture::shutters(Geometry::default(), 0.5).unwrap(),
    ));
}

#[test]
fn pure_trajectories_do_not_cross() {
    assert_non_crossing(VelocityField::Pure(
        PureState::new(Geometry::default(), 0.5, 0.0).unwrap(),
    ));
}

#[test]
fn bare_average_trajectories_do_not_cross() {
    assert_non_crossing(VelocityField::BareAvg(
        DiscreteMixture::shutters(Geometry::default(), 0.5).unwrap(),
    ));
}

#[test]
fn phase_average_trajectories_do_not_cross() {
    let base = PureState::new(Geometry::default(), 0.5, 0.0).unwrap();
    assert_non_crossing(VelocityField::PhaseAvg(
        PhaseMixture::uniform(base).unwrap(),
    ));
}

#[test]
fn single_slit_families_cross() {
    let g = Geometry::default();
    let families: Vec<_> = both(g)
        .into_iter()
        .map(|p| (VelocityField::Single(p), p))
        .collect();
    let run = run_per_family(&families, &EnsembleSpec::default()).unwrap();
    assert!(run.is_complete());
    let upper_below_axis = run
        .trajectories
        .iter()
        .any(|t| t.slit_label == SlitLabel::Upper && t.min() < 0.0);
    assert!(upper_below_axis);
    assert!(!detect_crossings(&run.trajectories, false)
        .unwrap()
        .is_empty());
    // each family on its own field never crosses itself
    assert!(detect_crossings(&run.trajectories, true)
        .unwrap()
        .is_empty());
}

#[test]
fn mixture_ensemble_is_mirror_symmetric() {
    let g = Geometry::default();
    let field = VelocityField::Mixture(DiscreteMixture::shutters(g, 0.5).unwrap());
    let run = run_ensemble(&field, &EnsembleSpec::default(), &both(g)).unwrap();
    let (upper, lower) = run.trajectories.split_at(9);
    for (a, b) in upper.iter().zip(lower.iter().rev()) {
        assert_eq!(a.slit_label, SlitLabel::Upper);
        assert_eq!(b.slit_label, SlitLabel::Lower);
        for (xa, xb) in a.x.iter().zip(&b.x) {
            assert!((xa + xb).abs() < 1e-9);
        }
    }
}

fn endpoint(substeps: usize) -> f64 {
    let field =
        VelocityField::Mixture(DiscreteMixture::shutters(Geometry::default(), 0.5).unwrap());
    let spec = EnsembleSpec {
        t_end: 2.0,
        dt_out: 2.0,
        substeps,
        ..EnsembleSpec::default()
    };
    integrate(&field, 6.0, &spec).unwrap().end()
}

#[test]
fn rk4_is_fourth_order() {
    let reference = endpoint(4096);
    let errs: Vec<f64> = [10, 20, 40, 80]
        .iter()
        .map(|&n| (endpoint(n) - reference).abs())
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.5, "{errs:?}");
    }
}

#[test]
fn labels_match_start_side() {
    let g = Geometry::default();
    let field = VelocityField::Mixture(DiscreteMixture::shutters(g, 0.5).unwrap());
    let run = run_ensemble(&field, &EnsembleSpec::default(), &both(g)).unwrap();
    for t in &run.trajectories {
        let expected = if t.start() > 0.0 {
            SlitLabel::Upper
        } else {
            SlitLabel::Lower
        };
        assert_eq!(t.slit_label, expected);
    }
}

#[test]
fn gaussian_starts_have_packet_statistics() {
    let g = Geometry::default();
    let p = g.packet(CenterSign::Plus);
    let spec = EnsembleSpec {
        n_per_slit: 10_000,
        seed: 42,
        init_law: InitLaw::Gaussian,
        ..EnsembleSpec::default()
    };
    let xs = sample_initial_conditions(&spec, &p).unwrap();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(
        (mean - p.center()).abs() < 4.0 * g.sigma0 / n.sqrt(),
        "{mean}"
    );
    assert!((var.sqrt() - g.sigma0).abs() < 0.02, "{}", var.sqrt());
    assert_eq!(xs, sample_initial_conditions(&spec, &p).unwrap());
}

#[test]
fn quantile_starts_are_deterministic_and_symmetric() {
    let g = Geometry::default();
    let spec = EnsembleSpec::default();
    let up = sample_initial_conditions(&spec, &g.packet(CenterSign::Minus)).unwrap();
    let down = sample_initial_conditions(&spec, &g.packet(CenterSign::Plus)).unwrap();
    for (a, b) in up.iter().zip(down.iter().rev()) {
        assert!((a + b).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mixture_flow_preserves_order(a in -12.0f64..12.0, gap in 1e-3f64..3.0) {
        let field = VelocityField::Mixture(
            DiscreteMixture::shutters(Geometry::default(), 0.5).unwrap(),
        );
        let spec = EnsembleSpec { t_end: 2.0, dt_out: 0.05, ..EnsembleSpec::default() };
        let lo = integrate(&field, a, &spec).unwrap();
        let hi = integrate(&field, a + gap, &spec).unwrap();
        prop_assert!(lo.x.iter().zip(&hi.x).all(|(l, h)| l < h));
    }
}
