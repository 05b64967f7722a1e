//! `verify`: the oracle suite as a table of worst residuals against tolerances.

use std::f64::consts::PI;

use mixflow::fields::{velocity_mixture, velocity_phase_avg};
use mixflow::oracle::{
    continuity_residual, default_steps, fd_field_velocity, quadrature_crosscheck, CONTINUITY_TOL,
};
use mixflow::trajectories::{detect_crossings, run_ensemble};
use mixflow::{
    CenterSign, DiscreteMixture, EnsembleSpec, Geometry, PhaseMixture, PureState, VelocityField,
};

use crate::config::ScenarioConfig;
use crate::CliError;

pub const FD_TOL: f64 = 1e-5;
pub const QUADRATURE_TOL: f64 = 1e-12;
pub const EQUIVALENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Multiplies every analytic velocity and current under test. Anything but
    /// 1 must make the continuity and velocity checks fail.
    pub velocity_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            velocity_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value.is_finite() && value < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self) -> String {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let mut s = format!(
            "{:<width$}  {:>12}  {:>10}  result\n",
            "check", "max", "tolerance"
        );
        for c in &self.checks {
            s.push_str(&format!(
                "{:<width$}  {:>12.3e}  {:>10.1e}  {}\n",
                c.name,
                c.value,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

/// 100 x-points by 5 times covering both packets as they spread.
fn continuity_grid(g: &Geometry) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for t in [0.2, 0.5, 1.0, 1.5, 2.0] {
        let half = g.x0 + 4.0 * g.sigma_t(t);
        for i in 0..100 {
            pts.push((-half + 2.0 * half * i as f64 / 99.0, t));
        }
    }
    pts
}

/// Low-discrepancy points on `[-15, 15] x [0.1, 3]`.
fn sample_points(n: usize) -> Vec<(f64, f64)> {
    let (a, b) = (0.754_877_666_246_692_7, 0.569_840_290_998_053_3);
    (1..=n)
        .map(|i| {
            let u = (i as f64 * a).fract();
            let v = (i as f64 * b).fract();
            (-15.0 + 30.0 * u, 0.1 + 2.9 * v)
        })
        .collect()
}

fn fd_deviation(field: &VelocityField, g: &Geometry, scale: f64) -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    let mut used = 0;
    for (x, t) in sample_points(400) {
        let s = field
            .sample(x, t)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        if s.ln_density < (1e-12f64).ln() {
            continue;
        }
        used += 1;
        let fd = fd_field_velocity(field, x, t).map_err(|e| CliError::Runtime(e.to_string()))?;
        let floor = g.hbar / (g.mass * g.sigma_t(t));
        worst = worst.max((scale * s.velocity - fd).abs() / (fd.abs() + floor));
        if used == 200 {
            break;
        }
    }
    Ok(worst)
}

pub fn verify(cfg: &ScenarioConfig, opts: VerifyOptions) -> Result<VerifyReport, CliError> {
    cfg.validate()?;
    let g = cfg.geometry()?;
    let k = opts.velocity_scale;
    let p_plus = cfg.physics.p_plus;
    let config = |e: mixflow::Error| CliError::Config(e.to_string());
    let mut checks = Vec::new();

    let grid = continuity_grid(&g);
    let packet = g.packet(CenterSign::Plus);
    let r = continuity_residual(
        |x, t| packet.density_single(x, t),
        |x, t| k * packet.density_single(x, t) * packet.velocity_single(x, t),
        &grid,
        default_steps(g),
        CONTINUITY_TOL,
    );
    checks.push(Check::below(
        "continuity single packet",
        r.max_abs,
        CONTINUITY_TOL,
    ));
    for (label, delta) in [("0", 0.0), ("pi/3", PI / 3.0), ("pi", PI)] {
        let s = PureState::new(g, p_plus, delta).map_err(config)?;
        let r = continuity_residual(
            |x, t| s.density(x, t),
            |x, t| k * s.current(x, t),
            &grid,
            default_steps(g),
            CONTINUITY_TOL,
        );
        let v = if r.failures > 0 { f64::NAN } else { r.max_abs };
        checks.push(Check::below(
            format!("continuity pure delta={label}"),
            v,
            CONTINUITY_TOL,
        ));
    }
    let m = DiscreteMixture::shutters(g, p_plus).map_err(config)?;
    let r = continuity_residual(
        |x, t| m.density(x, t),
        |x, t| k * m.current(x, t),
        &grid,
        default_steps(g),
        CONTINUITY_TOL,
    );
    checks.push(Check::below(
        "continuity mixture",
        r.max_abs,
        CONTINUITY_TOL,
    ));

    let base = PureState::new(g, p_plus, cfg.physics.delta).map_err(config)?;
    let pm = PhaseMixture::new(
        base,
        cfg.physics.phase_law.to_law()?,
        cfg.physics.phase_nodes,
    )
    .map_err(config)?;
    let fields = [
        VelocityField::Single(g.packet(CenterSign::Minus)),
        VelocityField::Pure(base),
        VelocityField::Mixture(m.clone()),
        VelocityField::BareAvg(m.clone()),
        VelocityField::PhaseAvg(pm),
    ];
    for f in &fields {
        let dev = fd_deviation(f, &g, k)?;
        checks.push(Check::below(
            format!("fd velocity {}", f.kind().name()),
            dev,
            FD_TOL,
        ));
    }

    let uniform =
        PhaseMixture::uniform(PureState::new(g, p_plus, 0.0).map_err(config)?).map_err(config)?;
    let xs: Vec<f64> = (0..=300).map(|i| -15.0 + 0.1 * i as f64).collect();
    let q = quadrature_crosscheck(&uniform, &xs, 1.0, &[8])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    checks.push(Check::below(
        "quadrature uniform 8 vs 16",
        q[0].1,
        QUADRATURE_TOL,
    ));

    let mut gap = 0.0f64;
    for t in [0.25, 0.5, 1.0, 2.0, 3.0] {
        for i in 0..=2000 {
            let x = -15.0 + 30.0 * i as f64 / 2000.0;
            let a =
                velocity_phase_avg(&uniform, x, t).map_err(|e| CliError::Runtime(e.to_string()))?;
            gap = gap.max((a - velocity_mixture(&m, x, t)).abs());
        }
    }
    checks.push(Check::below(
        "phase average vs mixture",
        gap,
        EQUIVALENCE_TOL,
    ));

    let spec = EnsembleSpec::default();
    let run = run_ensemble(
        &VelocityField::Mixture(m),
        &spec,
        &[g.packet(CenterSign::Minus), g.packet(CenterSign::Plus)],
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let crossings = if run.is_complete() {
        detect_crossings(&run.trajectories, false)
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .crossings
            .len() as f64
    } else {
        f64::NAN
    };
    checks.push(Check {
        name: "mixture crossings".into(),
        value: crossings,
        tolerance: 0.0,
        pass: crossings == 0.0,
    });

    Ok(VerifyReport { checks })
}
