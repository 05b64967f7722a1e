use thiserror::Error;

use crate::trajectories::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("density {density:e} below floor at x = {x}, t = {t}")]
    BelowFloor { x: f64, t: f64, density: f64 },

    #[error("{skipped} of {total} quadrature nodes fell below the density floor")]
    TooManySkipped { skipped: usize, total: usize },

    #[error("trajectory truncated at t = {}: {source}", .partial.t_grid.last().copied().unwrap_or(f64::NAN))]
    Truncated {
        partial: Box<Trajectory>,
        #[source]
        source: Box<Error>,
    },

    #[error("input error: {0}")]
    Input(String),
}
