mod common;

use std::f64::consts::PI;

use common::{linspace, random_points};
use mixflow::fields::velocity_phase_avg;
use mixflow::oracle::{
    continuity_residual, default_steps, fd_field_velocity, fd_velocity_oracle,
    quadrature_crosscheck, CONTINUITY_TOL,
};
use mixflow::{CenterSign, DiscreteMixture, Geometry, PhaseLaw, PhaseMixture, PureState};

/// 100 x-points by 5 times, the x-range following the spreading packets.
fn grid(g: &Geometry) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for t in [0.2, 0.5, 1.0, 1.5, 2.0] {
        let half = g.x0 + 4.0 * g.sigma_t(t);
        pts.extend(linspace(-half, half, 100).into_iter().map(|x| (x, t)));
    }
    pts
}

#[test]
fn continuity_holds_for_every_density_current_pair() {
    let g = Geometry::default();
    let pts = grid(&g);
    let p = g.packet(CenterSign::Plus);
    let single = continuity_residual(
        |x, t| p.density_single(x, t),
        |x, t| p.density_single(x, t) * p.velocity_single(x, t),
        &pts,
        default_steps(g),
        CONTINUITY_TOL,
    );
    assert!(single.pass, "single: {}", single.max_abs);
    for delta in [0.0, PI / 3.0, PI] {
        let s = PureState::new(g, 0.5, delta).unwrap();
        let r = continuity_residual(
            |x, t| s.density(x, t),
            |x, t| s.current(x, t),
            &pts,
            default_steps(g),
            CONTINUITY_TOL,
        );
        assert!(r.pass, "pure delta = {delta}: {}", r.max_abs);
        assert_eq!(r.residuals.len(), 500);
    }
    let m = DiscreteMixture::shutters(g, 0.5).unwrap();
    let r = continuity_residual(
        |x, t| m.density(x, t),
        |x, t| m.current(x, t),
        &pts,
        default_steps(g),
        CONTINUITY_TOL,
    );
    assert!(r.pass, "mixture: {}", r.max_abs);
}

#[test]
fn bare_average_violates_continuity() {
    // rho_mix with the weight-averaged velocity is not a conserved flow
    let g = Geometry::default();
    let m = DiscreteMixture::shutters(g, 0.5).unwrap();
    let r = continuity_residual(
        |x, t| m.density(x, t),
        |x, t| m.density(x, t) * mixflow::fields::velocity_bare_average(&m, x, t),
        &grid(&g),
        default_steps(g),
        CONTINUITY_TOL,
    );
    assert!(!r.pass);
    assert!(r.max_abs > 1e-3);
}

#[test]
fn fd_oracle_matches_closed_single_packet_velocity() {
    let g = Geometry::default();
    let p = g.packet(CenterSign::Minus);
    for (x, t) in random_points(3, 200, (0.0, 10.0), (0.0, 2.0)) {
        let h = 1e-5 * g.sigma_t(t);
        let fd = fd_velocity_oracle(|x, t| p.amplitude(x, t), x, t, h, g.hbar, g.mass).unwrap();
        // rate (x - c) from the width alone, independent of the library velocity
        let s = g.sigma_t(t);
        let ds = g.sigma0 * g.alpha() * g.alpha() * t / (1.0 + (g.alpha() * t).powi(2)).sqrt();
        let exact = ds / s * (x - p.center());
        assert!(
            (fd - exact).abs() < 1e-5 * (1.0 + exact.abs()),
            "({x}, {t}): {fd} vs {exact}"
        );
    }
}

#[test]
fn mixture_fd_oracle_matches_tanh_form() {
    let g = Geometry::default();
    let field = mixflow::VelocityField::Mixture(DiscreteMixture::shutters(g, 0.5).unwrap());
    for (x, t) in random_points(9, 200, (-15.0, 15.0), (0.1, 3.0)) {
        let fd = fd_field_velocity(&field, x, t).unwrap();
        let closed = mixflow::fields::mixture_velocity_closed_form(&g, x, t);
        assert!(
            (fd - closed).abs() < 1e-5 * (1.0 + closed.abs()),
            "({x}, {t})"
        );
    }
}

#[test]
fn uniform_quadrature_is_exact_early() {
    let s = PureState::new(Geometry::default(), 0.5, 0.0).unwrap();
    let pm = PhaseMixture::uniform(s).unwrap();
    let xs = linspace(-15.0, 15.0, 301);
    for (k, d) in quadrature_crosscheck(&pm, &xs, 1.0, &[4, 8, 16]).unwrap() {
        if k >= 8 {
            assert!(d < 1e-12, "k = {k}: {d}");
        }
    }
}

#[test]
fn smooth_tabulated_law_converges() {
    // a von Mises-like bump sampled on 256 nodes: the interpolant is smooth at
    // the quadrature scales probed here
    let table: Vec<f64> = (0..256)
        .map(|i| (2.0 * (2.0 * PI * i as f64 / 256.0 - 1.0).cos()).exp())
        .collect();
    let s = PureState::new(Geometry::default(), 0.5, 0.0).unwrap();
    let pm = PhaseMixture::new(s, PhaseLaw::tabulated(table).unwrap(), 8).unwrap();
    let xs = linspace(-8.0, 8.0, 81);
    let diffs = quadrature_crosscheck(&pm, &xs, 1.0, &[4, 8, 16, 32]).unwrap();
    for w in diffs.windows(2) {
        assert!(w[1].1 < w[0].1, "{diffs:?}");
    }
    // the non-uniform law keeps visible fringes, unlike the uniform one
    let v = velocity_phase_avg(&pm.with_order(64).unwrap(), 1.0, 1.0).unwrap();
    let closed = mixflow::fields::mixture_velocity_closed_form(&Geometry::default(), 1.0, 1.0);
    assert!((v - closed).abs() > 1e-3);
}
