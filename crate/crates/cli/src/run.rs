//! `run`: builds the scenario's fields, integrates, and writes the datasets.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use mixflow::fields::momentum_profile;
use mixflow::montecarlo::{
    averaged_intensity, per_realization_ensemble, sample_batch, RealizationStarts,
};
use mixflow::trajectories::{run_ensemble, run_per_family, EnsembleRun};
use mixflow::{
    CenterSign, DiscreteMixture, Error, PhaseMixture, PureState, SlitLabel, Trajectory,
    VelocityField,
};

use crate::config::{Product, Scenario, ScenarioConfig};
use crate::output::{
    write_dataset, write_manifest, Cell, Dataset, FailureEntry, FileEntry, Manifest,
};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<FileEntry>,
    pub trajectories: usize,
    pub failures: usize,
}

impl RunSummary {
    pub fn partial(&self) -> bool {
        self.failures > 0
    }
}

fn runtime(e: Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Everything the scenario needs, built once from the config.
struct Setup {
    cfg: ScenarioConfig,
    pure: PureState,
    mixture: DiscreteMixture,
}

impl Setup {
    fn new(cfg: &ScenarioConfig) -> Result<Self, CliError> {
        let g = cfg.geometry()?;
        let p = &cfg.physics;
        let pure = PureState::new(g, p.p_plus, p.delta)
            .map_err(|e| CliError::Config(format!("physics: {e}")))?;
        let mixture = DiscreteMixture::shutters(g, p.p_plus)
            .map_err(|e| CliError::Config(format!("physics.p_plus: {e}")))?;
        Ok(Setup {
            cfg: cfg.clone(),
            pure,
            mixture,
        })
    }

    fn phase_mixture(&self) -> Result<PhaseMixture, CliError> {
        let law = self.cfg.physics.phase_law.to_law()?;
        PhaseMixture::new(self.pure, law, self.cfg.physics.phase_nodes)
            .map_err(|e| CliError::Config(format!("physics.phase_nodes: {e}")))
    }

    /// Upper slit first, matching the trajectory numbering.
    fn packets(&self) -> [mixflow::SlitPacket; 2] {
        let g = self.pure.geometry();
        [g.packet(CenterSign::Minus), g.packet(CenterSign::Plus)]
    }

    /// The field whose momentum profile is reported, one per family for single slits.
    fn profile_fields(&self) -> Result<Vec<(&'static str, VelocityField)>, CliError> {
        Ok(match self.cfg.scenario {
            Scenario::Pure => vec![("all", VelocityField::Pure(self.pure))],
            Scenario::ShutterMixture => vec![("all", VelocityField::Mixture(self.mixture.clone()))],
            Scenario::BareAverage => vec![("all", VelocityField::BareAvg(self.mixture.clone()))],
            Scenario::PhaseMixture => vec![("all", VelocityField::PhaseAvg(self.phase_mixture()?))],
            Scenario::SingleSlit => self
                .packets()
                .into_iter()
                .map(|p| (SlitLabel::of(&p).name(), VelocityField::Single(p)))
                .collect(),
        })
    }
}

/// Trajectories in input order, with truncated ones restored at their index.
fn merge(run: EnsembleRun) -> (Vec<(usize, Trajectory)>, Vec<FailureEntry>) {
    let total = run.trajectories.len() + run.failures.len();
    let mut ok = run.trajectories.into_iter();
    let mut failed = run.failures.into_iter().peekable();
    let mut all = Vec::with_capacity(total);
    let mut notes = Vec::new();
    for i in 0..total {
        if failed.peek().is_some_and(|(k, _)| *k == i) {
            let (_, e) = failed.next().expect("peeked");
            notes.push(FailureEntry {
                trajectory: i,
                error: e.to_string(),
            });
            if let Error::Truncated { partial, .. } = e {
                if !partial.x.is_empty() {
                    all.push((i, *partial));
                }
            }
        } else {
            all.push((i, ok.next().expect("one trajectory per non-failed index")));
        }
    }
    (all, notes)
}

fn trajectory_rows(
    setup: &Setup,
) -> Result<(Dataset, Vec<FailureEntry>, usize, Option<Dataset>), CliError> {
    let spec = setup.cfg.ensemble_spec();
    let packets = setup.packets();
    let mut realizations = None;
    let run = match setup.cfg.scenario {
        Scenario::Pure => run_ensemble(&VelocityField::Pure(setup.pure), &spec, &packets),
        Scenario::ShutterMixture => run_ensemble(
            &VelocityField::Mixture(setup.mixture.clone()),
            &spec,
            &packets,
        ),
        Scenario::BareAverage => run_ensemble(
            &VelocityField::BareAvg(setup.mixture.clone()),
            &spec,
            &packets,
        ),
        Scenario::SingleSlit => {
            let families: Vec<_> = packets
                .iter()
                .map(|p| (VelocityField::Single(*p), *p))
                .collect();
            run_per_family(&families, &spec)
        }
        Scenario::PhaseMixture => {
            let batch = sample_batch(
                setup.cfg.run.n_realizations,
                setup.cfg.run.seed,
                setup.cfg.physics.phase_law.to_law()?,
            )
            .map_err(runtime)?;
            realizations = Some(realization_rows(&batch.deltas));
            per_realization_ensemble(&batch, &setup.pure, &spec, RealizationStarts::Alternating)
        }
    }
    .map_err(runtime)?;

    let (trajs, failures) = merge(run);
    let mut data = Dataset::new(
        "trajectories",
        vec!["trajectory", "t", "x", "label", "delta"],
    );
    for (i, traj) in &trajs {
        let delta = traj.delta.map_or(Cell::Empty, Cell::Num);
        for (t, x) in traj.t_grid.iter().zip(&traj.x) {
            data.rows.push(vec![
                Cell::Int(*i as u64),
                Cell::Num(*t),
                Cell::Num(*x),
                Cell::Text(traj.slit_label.name()),
                delta.clone(),
            ]);
        }
    }
    Ok((data, failures, trajs.len(), realizations))
}

fn realization_rows(deltas: &[f64]) -> Dataset {
    let mut data = Dataset::new("realizations", vec!["realization", "delta"]);
    for (k, d) in deltas.iter().enumerate() {
        data.rows.push(vec![Cell::Int(k as u64), Cell::Num(*d)]);
    }
    data
}

fn intensity_rows(setup: &Setup) -> Result<(Dataset, Option<Dataset>), CliError> {
    let xs = setup.cfg.x_grid();
    let t = setup.cfg.run.intensity_time;
    if setup.cfg.scenario == Scenario::PhaseMixture {
        let batch = sample_batch(
            setup.cfg.run.n_realizations,
            setup.cfg.run.seed,
            setup.cfg.physics.phase_law.to_law()?,
        )
        .map_err(runtime)?;
        let pm = setup.phase_mixture()?;
        let avg = averaged_intensity(&batch, &setup.pure, &xs, t).map_err(runtime)?;
        let mut data = Dataset::new("intensity", vec!["x", "density", "phase_average"]);
        for (x, rho) in avg {
            data.rows.push(vec![
                Cell::Num(x),
                Cell::Num(rho),
                Cell::Num(pm.density(x, t)),
            ]);
        }
        return Ok((data, Some(realization_rows(&batch.deltas))));
    }
    let mut data = Dataset::new("intensity", vec!["x", "density"]);
    for x in xs {
        let rho = match setup.cfg.scenario {
            Scenario::Pure => setup.pure.density(x, t),
            _ => setup.mixture.density(x, t),
        };
        data.rows.push(vec![Cell::Num(x), Cell::Num(rho)]);
    }
    Ok((data, None))
}

fn momentum_rows(setup: &Setup) -> Result<Dataset, CliError> {
    let xs = setup.cfg.x_grid();
    let mut data = Dataset::new("momentum", vec!["t", "x", "p_x", "family"]);
    for (family, field) in setup.profile_fields()? {
        for &t in &setup.cfg.run.profile_times {
            for p in momentum_profile(&field, &xs, t) {
                data.rows.push(vec![
                    Cell::Num(t),
                    Cell::Num(p.x),
                    p.momentum.map_or(Cell::Empty, Cell::Num),
                    Cell::Text(family),
                ]);
            }
        }
    }
    Ok(data)
}

/// Runs the scenario and writes the requested products plus `manifest.json`
/// into `cfg.output.path`. A run with truncated trajectories still writes
/// everything and flags the manifest; the caller maps that to a runtime error.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let setup = Setup::new(cfg)?;
    let dir: &Path = &cfg.output.path;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let format = cfg.output.format;

    let mut products = cfg.output.products.clone();
    products.sort();
    products.dedup();

    let mut files = Vec::new();
    let mut failures = Vec::new();
    let mut n_traj = 0;
    let mut realizations = None;
    for product in products {
        match product {
            Product::Trajectories => {
                let (data, f, n, r) = trajectory_rows(&setup)?;
                files.push(write_dataset(dir, &data, format)?);
                failures = f;
                n_traj = n;
                realizations = realizations.or(r);
            }
            Product::Intensity => {
                let (data, r) = intensity_rows(&setup)?;
                files.push(write_dataset(dir, &data, format)?);
                realizations = realizations.or(r);
            }
            Product::Momentum => files.push(write_dataset(dir, &momentum_rows(&setup)?, format)?),
        }
    }
    if let Some(r) = realizations {
        files.push(write_dataset(dir, &r, format)?);
    }

    let manifest = Manifest {
        tool: "mixflow",
        version: env!("CARGO_PKG_VERSION"),
        scenario: cfg.scenario.name(),
        seed: cfg.run.seed,
        config: cfg.to_toml(),
        files: files.clone(),
        partial: !failures.is_empty(),
        failures: failures.clone(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    write_manifest(dir, &manifest)?;
    Ok(RunSummary {
        files,
        trajectories: n_traj,
        failures: failures.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mixflow::fields::FieldKind;

    fn traj(x0: f64) -> Trajectory {
        Trajectory {
            field_kind: FieldKind::Single,
            field_id: 0,
            slit_label: SlitLabel::None,
            delta: None,
            t_grid: vec![0.0, 1.0],
            x: vec![x0, x0],
        }
    }

    #[test]
    fn merge_keeps_indices_and_partials() {
        let mut partial = traj(2.0);
        partial.t_grid.truncate(1);
        partial.x.truncate(1);
        let run = EnsembleRun {
            trajectories: vec![traj(0.0), traj(3.0)],
            failures: vec![
                (
                    1,
                    Error::Truncated {
                        partial: Box::new(partial),
                        source: Box::new(Error::Domain("stop".into())),
                    },
                ),
                (2, Error::Domain("no start".into())),
            ],
        };
        let (all, notes) = merge(run);
        let idx: Vec<usize> = all.iter().map(|(i, _)| *i).collect();
        assert_eq!(idx, vec![0, 1, 3]);
        assert_eq!(all[1].1.x, vec![2.0]);
        assert_eq!(all[2].1.start(), 3.0);
        assert_eq!(
            notes.iter().map(|n| n.trajectory).collect::<Vec<_>>(),
            vec![1, 2]
        );
    }
}
