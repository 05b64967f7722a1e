//! Hydrodynamic (Bohmian) flows for pure and mixed two-slit states.
//!
//! The crate is organised bottom-up:
//!
//! * [`wavepacket`]: closed-form free Gaussian slit modes.
//! * [`states`]: coherent superpositions, shutter mixtures and phase mixtures.
//! * [`fields`]: velocity fields `v = J / rho` and the weak-value momentum.
//! * [`trajectories`]: RK4 integration of trajectory ensembles and crossing detection.
//! * [`montecarlo`]: random-phase realizations and intensity averaging.
//! * [`oracle`]: finite-difference checks that never touch the closed-form derivatives.
//!
//! Natural units are used throughout; `hbar` and `mass` are explicit parameters.

pub mod error;
pub mod fields;
pub mod montecarlo;
pub mod oracle;
pub mod quadrature;
pub mod states;
pub mod trajectories;
pub mod wavepacket;

pub use error::{Error, Result};
pub use fields::{FieldKind, FieldSample, VelocityField};
pub use states::{DiscreteMixture, PhaseLaw, PhaseMixture, PureState};
pub use trajectories::{EnsembleSpec, InitLaw, SlitLabel, Trajectory};
pub use wavepacket::{CenterSign, ComplexWidth, Geometry, SlitPacket};
