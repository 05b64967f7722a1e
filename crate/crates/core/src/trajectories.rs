//! Trajectory ensembles along a velocity field.
//!
//! Integration is classic fixed-step RK4 with `substeps` internal steps per output
//! interval. Crossings are detected at output resolution.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal as NormalCdf};

use crate::error::{Error, Result};
use crate::fields::{FieldKind, VelocityField};
use crate::wavepacket::SlitPacket;

/// Slit of origin; `Upper` is the slit centered at positive `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlitLabel {
    Upper,
    Lower,
    None,
}

impl SlitLabel {
    pub fn of(packet: &SlitPacket) -> Self {
        let c = packet.center();
        if c > 0.0 {
            SlitLabel::Upper
        } else if c < 0.0 {
            SlitLabel::Lower
        } else {
            SlitLabel::None
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SlitLabel::Upper => "upper",
            SlitLabel::Lower => "lower",
            SlitLabel::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitLaw {
    /// Equal-probability quantiles of `rho_λ(x, 0)`.
    Quantile,
    /// Seeded draws from `Normal(center, sigma0)`.
    Gaussian,
    /// Fixed starting positions, used for every packet.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub n_per_slit: usize,
    pub seed: u64,
    pub t_start: f64,
    pub t_end: f64,
    pub dt_out: f64,
    /// RK4 steps per output interval.
    pub substeps: usize,
    pub init_law: InitLaw,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            n_per_slit: 9,
            seed: 0,
            t_start: 0.0,
            t_end: 3.0,
            dt_out: 0.01,
            substeps: 10,
            init_law: InitLaw::Quantile,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_slit < 1 {
            return Err(Error::Config("n_per_slit must be at least 1".into()));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::Config(format!(
                "need t_end > t_start, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if !(self.dt_out.is_finite() && self.dt_out > 0.0) {
            return Err(Error::Config(format!(
                "dt_out must be positive, got {}",
                self.dt_out
            )));
        }
        if self.substeps < 1 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        Ok(())
    }

    /// Output times; the last node is exactly `t_end`.
    pub fn time_grid(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        let ratio = span / self.dt_out;
        let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
            ratio.round()
        } else {
            ratio.ceil()
        }
        .max(1.0) as usize;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.t_end
                } else {
                    self.t_start + span * i as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub field_kind: FieldKind,
    /// [`VelocityField::instance_id`] of the driving field.
    pub field_id: u64,
    pub slit_label: SlitLabel,
    pub delta: Option<f64>,
    pub t_grid: Vec<f64>,
    pub x: Vec<f64>,
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.x[0]
    }

    pub fn end(&self) -> f64 {
        *self.x.last().expect("trajectory has at least one node")
    }

    pub fn min(&self) -> f64 {
        self.x.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Starting positions for one slit.
pub fn sample_initial_conditions(spec: &EnsembleSpec, packet: &SlitPacket) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.n_per_slit;
    let center = packet.center();
    match &spec.init_law {
        InitLaw::Quantile => {
            let normal =
                NormalCdf::new(center, packet.sigma0).map_err(|e| Error::Domain(e.to_string()))?;
            Ok((0..n)
                .map(|i| {
                    if 2 * i + 1 == n {
                        center
                    } else {
                        normal.inverse_cdf((i as f64 + 0.5) / n as f64)
                    }
                })
                .collect())
        }
        InitLaw::Gaussian => {
            let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
            // one stream per slit so the two families are independent
            rng.set_stream(slit_stream(packet));
            let normal =
                Normal::new(center, packet.sigma0).map_err(|e| Error::Domain(e.to_string()))?;
            Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
        }
        InitLaw::Explicit(xs) => Ok(xs.clone()),
    }
}

fn slit_stream(packet: &SlitPacket) -> u64 {
    match SlitLabel::of(packet) {
        SlitLabel::Upper => 1,
        SlitLabel::Lower => 2,
        SlitLabel::None => 3,
    }
}

fn rk4_step(field: &VelocityField, x: f64, t: f64, h: f64) -> Result<f64> {
    let k1 = field.velocity(x, t)?;
    let k2 = field.velocity(x + 0.5 * h * k1, t + 0.5 * h)?;
    let k3 = field.velocity(x + 0.5 * h * k2, t + 0.5 * h)?;
    let k4 = field.velocity(x + h * k3, t + h)?;
    Ok(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Integrates `dx/dt = v(x, t)` from `x0` at `spec.t_start`.
pub fn integrate(field: &VelocityField, x0: f64, spec: &EnsembleSpec) -> Result<Trajectory> {
    integrate_labeled(field, x0, spec, SlitLabel::None)
}

pub fn integrate_labeled(
    field: &VelocityField,
    x0: f64,
    spec: &EnsembleSpec,
    label: SlitLabel,
) -> Result<Trajectory> {
    spec.validate()?;
    let grid = spec.time_grid();
    let mut traj = Trajectory {
        field_kind: field.kind(),
        field_id: field.instance_id(),
        slit_label: label,
        delta: field.delta(),
        t_grid: Vec::with_capacity(grid.len()),
        x: Vec::with_capacity(grid.len()),
    };
    let truncated = |traj: Trajectory, source: Error| Error::Truncated {
        partial: Box::new(traj),
        source: Box::new(source),
    };
    if !x0.is_finite() {
        return Err(Error::Domain(format!(
            "initial position must be finite, got {x0}"
        )));
    }
    if let Err(e) = field.velocity(x0, grid[0]) {
        return Err(truncated(traj, e));
    }
    traj.t_grid.push(grid[0]);
    traj.x.push(x0);
    let mut x = x0;
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / spec.substeps as f64;
        for k in 0..spec.substeps {
            let t = w[0] + h * k as f64;
            x = match rk4_step(field, x, t, h) {
                Ok(next) if next.is_finite() => next,
                Ok(next) => {
                    let e = Error::Domain(format!("non-finite position {next} at t = {t}"));
                    return Err(truncated(traj, e));
                }
                Err(e) => return Err(truncated(traj, e)),
            };
        }
        traj.t_grid.push(w[1]);
        traj.x.push(x);
    }
    Ok(traj)
}

/// Trajectories of a batch, in input order, plus the failures (by index).
#[derive(Debug, Default)]
pub struct EnsembleRun {
    pub trajectories: Vec<Trajectory>,
    pub failures: Vec<(usize, Error)>,
}

impl EnsembleRun {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    fn extend(&mut self, other: EnsembleRun) {
        let offset = self.trajectories.len() + self.failures.len();
        self.trajectories.extend(other.trajectories);
        self.failures
            .extend(other.failures.into_iter().map(|(i, e)| (i + offset, e)));
    }
}

/// Integrates a list of labeled starts in parallel; output order follows input order.
pub fn integrate_many(
    field: &VelocityField,
    starts: &[(SlitLabel, f64)],
    spec: &EnsembleSpec,
) -> EnsembleRun {
    let results: Vec<Result<Trajectory>> = starts
        .par_iter()
        .map(|&(label, x0)| integrate_labeled(field, x0, spec, label))
        .collect();
    let mut run = EnsembleRun::default();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => run.trajectories.push(t),
            Err(e) => run.failures.push((i, e)),
        }
    }
    run
}

/// Samples `n_per_slit` starts from each packet and integrates them all along one field.
pub fn run_ensemble(
    field: &VelocityField,
    spec: &EnsembleSpec,
    packets: &[SlitPacket],
) -> Result<EnsembleRun> {
    let mut starts = Vec::new();
    for p in packets {
        let label = SlitLabel::of(p);
        starts.extend(
            sample_initial_conditions(spec, p)?
                .into_iter()
                .map(|x| (label, x)),
        );
    }
    Ok(integrate_many(field, &starts, spec))
}

/// Each family runs along its own field (one slit open at a time).
pub fn run_per_family(
    families: &[(VelocityField, SlitPacket)],
    spec: &EnsembleSpec,
) -> Result<EnsembleRun> {
    let mut run = EnsembleRun::default();
    for (field, packet) in families {
        run.extend(run_ensemble(field, spec, std::slice::from_ref(packet))?);
    }
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub i: usize,
    pub j: usize,
    /// Last output time with the previous ordering.
    pub t_before: f64,
    /// First output time with the reversed ordering.
    pub t_after: f64,
    /// Linear-interpolation estimate of the crossing time.
    pub t_cross: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrossingReport {
    pub crossings: Vec<Crossing>,
    pub pairs_checked: usize,
}

impl CrossingReport {
    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }
}

/// Pairs whose ordering reverses between output nodes. Ties are skipped, so a
/// touching pair that separates on the same side is not a crossing.
pub fn detect_crossings(trajs: &[Trajectory], same_field_only: bool) -> Result<CrossingReport> {
    if let Some(first) = trajs.first() {
        if let Some(bad) = trajs.iter().position(|t| t.t_grid != first.t_grid) {
            return Err(Error::Input(format!(
                "trajectory {bad} does not share the time grid of trajectory 0"
            )));
        }
    }
    let mut report = CrossingReport::default();
    for i in 0..trajs.len() {
        for j in i + 1..trajs.len() {
            let (a, b) = (&trajs[i], &trajs[j]);
            if same_field_only && a.field_id != b.field_id {
                continue;
            }
            report.pairs_checked += 1;
            let mut last: Option<(usize, f64)> = None;
            for k in 0..a.x.len() {
                let d = a.x[k] - b.x[k];
                if d == 0.0 {
                    continue;
                }
                if let Some((k0, d0)) = last {
                    if d0.signum() != d.signum() {
                        let (t0, t1) = (a.t_grid[k0], a.t_grid[k]);
                        report.crossings.push(Crossing {
                            i,
                            j,
                            t_before: t0,
                            t_after: t1,
                            t_cross: t0 + (t1 - t0) * d0 / (d0 - d),
                        });
                    }
                }
                last = Some((k, d));
            }
        }
    }
    Ok(report)
}
