//! Velocity fields `v = J / rho` for every state kind, the bare-average straw man,
//! and the momentum weak value.
//!
//! Ratios of exponentially small densities are formed in scaled or log form, so a
//! field is evaluable far into the tails; a point is rejected only when the
//! density of the state itself (relative to its incoherent part) vanishes.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{DiscreteMixture, PhaseLaw, PhaseMixture, PureState, ScaledFlow};
use crate::wavepacket::{Geometry, SlitPacket};

/// Relative density floor: a coherent density below this fraction of its
/// incoherent counterpart is treated as a node.
pub const DENSITY_FLOOR: f64 = 1e-24;

/// Step of the weak-value finite difference, in units of `sigma_t`.
pub const WEAK_STEP: f64 = 1e-6;

/// Largest fraction of phase nodes the naive average may skip.
pub const MAX_SKIPPED_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Pure,
    Single,
    Mixture,
    PhaseAvg,
    BareAvg,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Pure => "pure",
            FieldKind::Single => "single",
            FieldKind::Mixture => "mixture",
            FieldKind::PhaseAvg => "phase_avg",
            FieldKind::BareAvg => "bare_avg",
        }
    }
}

/// Velocity plus the log of the density that carries it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub velocity: f64,
    pub ln_density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VelocityField {
    Pure(PureState),
    Single(SlitPacket),
    Mixture(DiscreteMixture),
    PhaseAvg(PhaseMixture),
    BareAvg(DiscreteMixture),
}

impl VelocityField {
    pub fn kind(&self) -> FieldKind {
        match self {
            VelocityField::Pure(_) => FieldKind::Pure,
            VelocityField::Single(_) => FieldKind::Single,
            VelocityField::Mixture(_) => FieldKind::Mixture,
            VelocityField::PhaseAvg(_) => FieldKind::PhaseAvg,
            VelocityField::BareAvg(_) => FieldKind::BareAvg,
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            VelocityField::Pure(s) => s.plus.mass,
            VelocityField::Single(p) => p.mass,
            VelocityField::Mixture(m) | VelocityField::BareAvg(m) => m.mass(),
            VelocityField::PhaseAvg(pm) => pm.mass(),
        }
    }

    /// Relative phase for pure-state fields.
    pub fn delta(&self) -> Option<f64> {
        match self {
            VelocityField::Pure(s) => Some(s.delta),
            _ => None,
        }
    }

    pub fn sample(&self, x: f64, t: f64) -> Result<FieldSample> {
        match self {
            VelocityField::Pure(s) => ratio_sample(s.scaled_flow(x, t), x, t),
            VelocityField::Single(p) => Ok(FieldSample {
                velocity: p.velocity_single(x, t),
                ln_density: p.ln_density(x, t),
            }),
            VelocityField::Mixture(m) => Ok(mixture_sample(m, x, t)),
            VelocityField::PhaseAvg(pm) => ratio_sample(pm.scaled_flow(x, t), x, t),
            VelocityField::BareAvg(m) => Ok(FieldSample {
                velocity: velocity_bare_average(m, x, t),
                ln_density: mixture_sample(m, x, t).ln_density,
            }),
        }
    }

    pub fn velocity(&self, x: f64, t: f64) -> Result<f64> {
        self.sample(x, t).map(|s| s.velocity)
    }

    /// Stable identifier of this field's parameters; equal fields share an id.
    pub fn instance_id(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.kind().hash(&mut h);
        let mut bits = |v: f64| v.to_bits().hash(&mut h);
        match self {
            VelocityField::Pure(s) => {
                hash_geometry(&s.geometry(), &mut bits);
                bits(s.p_plus);
                bits(s.delta);
            }
            VelocityField::Single(p) => {
                hash_geometry(&p.geometry(), &mut bits);
                bits(p.center_sign.value());
            }
            VelocityField::Mixture(m) | VelocityField::BareAvg(m) => {
                for (w, p) in &m.components {
                    bits(*w);
                    hash_geometry(&p.geometry(), &mut bits);
                    bits(p.center_sign.value());
                }
            }
            VelocityField::PhaseAvg(pm) => {
                hash_geometry(&pm.base.geometry(), &mut bits);
                bits(pm.base.p_plus);
                bits(pm.order as f64);
                match &pm.law {
                    PhaseLaw::Uniform => bits(-1.0),
                    PhaseLaw::Dirac(d) => bits(*d),
                    PhaseLaw::Tabulated(table) => table.iter().for_each(|v| bits(*v)),
                }
            }
        }
        h.finish()
    }
}

fn hash_geometry(g: &Geometry, bits: &mut impl FnMut(f64)) {
    bits(g.hbar);
    bits(g.mass);
    bits(g.sigma0);
    bits(g.x0);
}

fn ratio_sample(f: ScaledFlow, x: f64, t: f64) -> Result<FieldSample> {
    // also rejects NaN
    if f.density.partial_cmp(&(DENSITY_FLOOR * f.incoherent)) != Some(Ordering::Greater) {
        return Err(Error::BelowFloor {
            x,
            t,
            density: (2.0 * f.ln_scale).exp() * f.density,
        });
    }
    Ok(FieldSample {
        velocity: f.current / f.density,
        ln_density: 2.0 * f.ln_scale + f.density.ln(),
    })
}

fn mixture_sample(m: &DiscreteMixture, x: f64, t: f64) -> FieldSample {
    let terms: Vec<(f64, f64)> = m.log_weighted(x, t).collect();
    let top = terms
        .iter()
        .map(|(l, _)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (l, v) in &terms {
        let w = (l - top).exp();
        num += w * v;
        den += w;
    }
    FieldSample {
        velocity: num / den,
        ln_density: top + den.ln(),
    }
}

/// `Im[psi* d psi] / rho` for a coherent superposition.
pub fn velocity_pure(s: &PureState, x: f64, t: f64) -> Result<f64> {
    ratio_sample(s.scaled_flow(x, t), x, t).map(|f| f.velocity)
}

/// Density-weighted mixture velocity `sum p rho v / sum p rho`.
pub fn velocity_mixture(m: &DiscreteMixture, x: f64, t: f64) -> f64 {
    mixture_sample(m, x, t).velocity
}

/// Unweighted `sum p_λ v_λ`.
pub fn velocity_bare_average(m: &DiscreteMixture, x: f64, t: f64) -> f64 {
    m.components
        .iter()
        .map(|(p, packet)| p * packet.velocity_single(x, t))
        .sum()
}

/// `∫ P rho_delta v_delta / ∫ P rho_delta`, both integrals formed from currents.
pub fn velocity_phase_avg(pm: &PhaseMixture, x: f64, t: f64) -> Result<f64> {
    ratio_sample(pm.scaled_flow(x, t), x, t).map(|f| f.velocity)
}

/// Result of the unweighted phase average of pure-state velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveAverage {
    pub velocity: f64,
    /// Nodes dropped because `rho_delta` was below the floor.
    pub skipped: usize,
    pub total: usize,
}

/// `∫ P(delta) v_delta d delta`. Kept for comparison with the weighted field only.
pub fn velocity_naive_phase_avg(pm: &PhaseMixture, x: f64, t: f64) -> Result<NaiveAverage> {
    let modes = pm.base.modes(x, t);
    let (mut acc, mut weight, mut skipped) = (0.0, 0.0, 0);
    for node in pm.nodes() {
        let f = pm.node_flow(node, &modes);
        if f.density > DENSITY_FLOOR * f.incoherent {
            acc += node.weight * f.current / f.density;
            weight += node.weight;
        } else {
            skipped += 1;
        }
    }
    let total = pm.nodes().len();
    if skipped as f64 > MAX_SKIPPED_FRACTION * total as f64 || weight <= 0.0 {
        return Err(Error::TooManySkipped { skipped, total });
    }
    Ok(NaiveAverage {
        velocity: acc / weight,
        skipped,
        total,
    })
}

/// Closed form of the equal-weight shutter-mixture field,
/// `(sigma_dot/sigma) [x - x0 tanh(x x0 / sigma_t^2)]`.
pub fn mixture_velocity_closed_form(g: &Geometry, x: f64, t: f64) -> f64 {
    let s = g.sigma_t(t);
    g.rate(t) * (x - g.x0 * (x * g.x0 / (s * s)).tanh())
}

/// Closed form of the equal-weight bare average, `(sigma_dot/sigma) x`.
pub fn bare_velocity_closed_form(g: &Geometry, x: f64, t: f64) -> f64 {
    g.rate(t) * x
}

/// Momentum weak value with position post-selection, `Re[-i hbar psi' / psi]`,
/// from a centered difference with step `WEAK_STEP * sigma_t`.
pub fn weak_momentum<F>(psi: F, x: f64, t: f64, hbar: f64, sigma_t: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Complex64,
{
    let center = psi(x, t);
    if center.norm_sqr().is_nan() || center.norm_sqr() < f64::MIN_POSITIVE {
        return Err(Error::BelowFloor {
            x,
            t,
            density: center.norm_sqr(),
        });
    }
    let h = WEAK_STEP * sigma_t;
    let slope = (psi(x + h, t) - psi(x - h, t)) / (2.0 * h);
    Ok((Complex64::new(0.0, -hbar) * slope / center).re)
}

/// One point of a transverse-momentum profile; `None` marks a gap where the
/// field could not be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub x: f64,
    pub momentum: Option<f64>,
}

/// `p_x(x) = m v(x, t)` over a grid.
pub fn momentum_profile(field: &VelocityField, x_grid: &[f64], t: f64) -> Vec<ProfilePoint> {
    let m = field.mass();
    x_grid
        .iter()
        .map(|&x| ProfilePoint {
            x,
            momentum: field.velocity(x, t).ok().map(|v| m * v),
        })
        .collect()
}
