//! Random relative phase per realization: sampling, intensity averaging and
//! per-realization trajectories.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded through
//! `seed_from_u64`, which is specified bit-for-bit and therefore reproducible
//! across platforms.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::VelocityField;
use crate::quadrature::pairwise_sum;
use crate::states::{wrap_phase, PhaseLaw, PureState};
use crate::trajectories::{
    integrate_labeled, sample_initial_conditions, EnsembleRun, EnsembleSpec, SlitLabel,
};

pub const DEFAULT_REALIZATIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationBatch {
    pub seed: u64,
    pub law: PhaseLaw,
    pub deltas: Vec<f64>,
}

impl RealizationBatch {
    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// `n` i.i.d. phases in `[0, 2 pi)`, deterministic in `(n, seed, law)`.
pub fn sample_batch(n: usize, seed: u64, law: PhaseLaw) -> Result<RealizationBatch> {
    if n < 1 {
        return Err(Error::Config("need at least one realization".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let deltas = match &law {
        PhaseLaw::Uniform => (0..n)
            .map(|_| wrap_phase(rng.random::<f64>() * TAU))
            .collect(),
        PhaseLaw::Dirac(d0) => vec![wrap_phase(*d0); n],
        PhaseLaw::Tabulated(_) => {
            let top = law.max_density();
            (0..n)
                .map(|_| loop {
                    let d = wrap_phase(rng.random::<f64>() * TAU);
                    if rng.random::<f64>() * top < law.density(d) {
                        break d;
                    }
                })
                .collect()
        }
    };
    Ok(RealizationBatch { seed, law, deltas })
}

/// Mean over realizations of the unit-normalized intensity `rho_delta(x, t)`.
pub fn averaged_intensity(
    batch: &RealizationBatch,
    base: &PureState,
    x_grid: &[f64],
    t: f64,
) -> Result<Vec<(f64, f64)>> {
    let states = batch
        .deltas
        .iter()
        .map(|&d| base.with_delta(d))
        .collect::<Result<Vec<_>>>()?;
    let n = states.len() as f64;
    Ok(x_grid
        .par_iter()
        .map(|&x| {
            let values: Vec<f64> = states.iter().map(|s| s.density(x, t)).collect();
            (x, pairwise_sum(&values) / n)
        })
        .collect())
}

/// Which trajectories to launch in each realization's field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealizationStarts {
    /// One trajectory per realization, alternating slits; realizations `2j` and
    /// `2j + 1` start at mirrored positions.
    Alternating,
    /// The full `n_per_slit` ensemble from both slits in every realization.
    Full,
}

/// Integrates trajectories in the pure-state field of each realization.
pub fn per_realization_ensemble(
    batch: &RealizationBatch,
    base: &PureState,
    spec: &EnsembleSpec,
    starts: RealizationStarts,
) -> Result<EnsembleRun> {
    let upper = base.minus;
    let lower = base.plus;
    let upper_x = sample_initial_conditions(spec, &upper)?;
    let lower_x = sample_initial_conditions(spec, &lower)?;
    let fields = batch
        .deltas
        .iter()
        .map(|&d| base.with_delta(d).map(VelocityField::Pure))
        .collect::<Result<Vec<_>>>()?;

    let mut jobs: Vec<(usize, SlitLabel, f64)> = Vec::new();
    for k in 0..fields.len() {
        match starts {
            RealizationStarts::Alternating => {
                let j = (k / 2) % upper_x.len();
                if k % 2 == 0 {
                    jobs.push((k, SlitLabel::Upper, upper_x[j]));
                } else {
                    jobs.push((k, SlitLabel::Lower, -upper_x[j]));
                }
            }
            RealizationStarts::Full => {
                jobs.extend(upper_x.iter().map(|&x| (k, SlitLabel::Upper, x)));
                jobs.extend(lower_x.iter().map(|&x| (k, SlitLabel::Lower, x)));
            }
        }
    }

    let results: Vec<Result<_>> = jobs
        .par_iter()
        .map(|&(k, label, x0)| integrate_labeled(&fields[k], x0, spec, label))
        .collect();
    let mut run = EnsembleRun::default();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => run.trajectories.push(t),
            Err(e) => run.failures.push((i, e)),
        }
    }
    Ok(run)
}
