//! Brute-force checks of the closed-form machinery.
//!
//! Everything here is built from amplitude and density evaluators only
//! (`SlitPacket::amplitude`, `PureState::psi`, densities); the analytic
//! derivatives, currents and velocity fields are never called, except by
//! [`quadrature_crosscheck`], which compares the phase-averaged field with itself
//! at two quadrature orders.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{velocity_phase_avg, VelocityField};
use crate::states::{DiscreteMixture, PhaseMixture, PureState};
use crate::wavepacket::{Geometry, SlitPacket};

/// Default spatial step, in units of `sigma_t`.
pub const SPACE_STEP: f64 = 1e-5;
/// Default temporal step, in units of `max(|t|, m sigma0^2 / hbar)`.
pub const TIME_STEP: f64 = 1e-5;
pub const CONTINUITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub grid: Vec<(f64, f64)>,
    /// NaN marks a point where an evaluation was not finite.
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    pub tolerance: f64,
    pub failures: usize,
    pub pass: bool,
}

impl ResidualReport {
    fn from_residuals(grid: Vec<(f64, f64)>, residuals: Vec<f64>, tolerance: f64) -> Self {
        let failures = residuals.iter().filter(|r| !r.is_finite()).count();
        let max_abs = residuals
            .iter()
            .filter(|r| r.is_finite())
            .fold(0.0f64, |m, r| m.max(r.abs()));
        ResidualReport {
            grid,
            residuals,
            max_abs,
            tolerance,
            failures,
            pass: failures == 0 && max_abs < tolerance,
        }
    }
}

/// `(time step, space step)` at `(x, t)` following the default scaling.
pub fn default_steps(g: Geometry) -> impl Fn(f64, f64) -> (f64, f64) {
    move |_x, t| {
        let time_scale = t.abs().max(g.mass * g.sigma0 * g.sigma0 / g.hbar);
        (TIME_STEP * time_scale, SPACE_STEP * g.sigma_t(t))
    }
}

/// Residual of `d rho / dt + d J / dx` by centered differences, Richardson
/// extrapolated over steps `h` and `h / 2`.
pub fn continuity_residual<D, J, S>(
    density: D,
    current: J,
    grid: &[(f64, f64)],
    steps: S,
    tolerance: f64,
) -> ResidualReport
where
    D: Fn(f64, f64) -> f64,
    J: Fn(f64, f64) -> f64,
    S: Fn(f64, f64) -> (f64, f64),
{
    let raw = |x: f64, t: f64, ht: f64, hx: f64| {
        (density(x, t + ht) - density(x, t - ht)) / (2.0 * ht)
            + (current(x + hx, t) - current(x - hx, t)) / (2.0 * hx)
    };
    let residuals = grid
        .iter()
        .map(|&(x, t)| {
            let (ht, hx) = steps(x, t);
            let coarse = raw(x, t, ht, hx);
            let fine = raw(x, t, 0.5 * ht, 0.5 * hx);
            let r = (4.0 * fine - coarse) / 3.0;
            if r.is_finite() {
                r
            } else {
                f64::NAN
            }
        })
        .collect();
    ResidualReport::from_residuals(grid.to_vec(), residuals, tolerance)
}

fn checked_amplitude(psi: Complex64, x: f64, t: f64) -> Result<Complex64> {
    if psi.norm_sqr() >= f64::MIN_POSITIVE {
        Ok(psi)
    } else {
        Err(Error::BelowFloor {
            x,
            t,
            density: psi.norm_sqr(),
        })
    }
}

fn fd_slope<A: Fn(f64, f64) -> Complex64>(amplitude: &A, x: f64, t: f64, h: f64) -> Complex64 {
    (amplitude(x + h, t) - amplitude(x - h, t)) / (2.0 * h)
}

/// `(hbar / m) Im[psi' / psi]` with a centered-difference `psi'`.
pub fn fd_velocity_oracle<A>(
    amplitude: A,
    x: f64,
    t: f64,
    h: f64,
    hbar: f64,
    mass: f64,
) -> Result<f64>
where
    A: Fn(f64, f64) -> Complex64,
{
    let psi = checked_amplitude(amplitude(x, t), x, t)?;
    Ok(hbar / mass * (fd_slope(&amplitude, x, t, h) / psi).im)
}

/// `(rho, J)` of one amplitude with a finite-difference current.
fn fd_flow<A: Fn(f64, f64) -> Complex64>(
    amplitude: A,
    x: f64,
    t: f64,
    h: f64,
    g: &Geometry,
) -> (f64, f64) {
    let psi = amplitude(x, t);
    let j = g.hbar / g.mass * (psi.conj() * fd_slope(&amplitude, x, t, h)).im;
    (psi.norm_sqr(), j)
}

fn ratio(num: f64, den: f64, x: f64, t: f64) -> Result<f64> {
    if den >= f64::MIN_POSITIVE {
        Ok(num / den)
    } else {
        Err(Error::BelowFloor { x, t, density: den })
    }
}

fn fd_single(p: &SlitPacket, x: f64, t: f64, h: f64) -> Result<f64> {
    fd_velocity_oracle(|x, t| p.amplitude(x, t), x, t, h, p.hbar, p.mass)
}

fn fd_pure(s: &PureState, x: f64, t: f64, h: f64) -> Result<f64> {
    let g = s.geometry();
    fd_velocity_oracle(|x, t| s.psi(x, t), x, t, h, g.hbar, g.mass)
}

fn fd_mixture(m: &DiscreteMixture, x: f64, t: f64) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (p, packet) in &m.components {
        let g = packet.geometry();
        let (rho, j) = fd_flow(
            |x, t| packet.amplitude(x, t),
            x,
            t,
            SPACE_STEP * g.sigma_t(t),
            &g,
        );
        num += p * j;
        den += p * rho;
    }
    ratio(num, den, x, t)
}

fn fd_bare(m: &DiscreteMixture, x: f64, t: f64) -> Result<f64> {
    m.components.iter().try_fold(0.0, |acc, (p, packet)| {
        Ok(acc + p * fd_single(packet, x, t, SPACE_STEP * packet.sigma_t(t))?)
    })
}

fn fd_phase_avg(pm: &PhaseMixture, x: f64, t: f64) -> Result<f64> {
    let g = pm.base.geometry();
    let h = SPACE_STEP * g.sigma_t(t);
    let (mut num, mut den) = (0.0, 0.0);
    for (delta, w) in pm.law.quadrature(pm.order) {
        let s = pm.base.with_delta(delta)?;
        let (rho, j) = fd_flow(|x, t| s.psi(x, t), x, t, h, &g);
        num += w * j;
        den += w * rho;
    }
    ratio(num, den, x, t)
}

/// Finite-difference reconstruction of any field kind; ratio-form fields are
/// assembled as `sum w J / sum w rho` from per-component difference currents.
pub fn fd_field_velocity(field: &VelocityField, x: f64, t: f64) -> Result<f64> {
    match field {
        VelocityField::Single(p) => fd_single(p, x, t, SPACE_STEP * p.sigma_t(t)),
        VelocityField::Pure(s) => fd_pure(s, x, t, SPACE_STEP * s.geometry().sigma_t(t)),
        VelocityField::Mixture(m) => fd_mixture(m, x, t),
        VelocityField::BareAvg(m) => fd_bare(m, x, t),
        VelocityField::PhaseAvg(pm) => fd_phase_avg(pm, x, t),
    }
}

/// `max_x |v_k - v_2k|` of the phase-averaged field for each `k` in `orders`.
pub fn quadrature_crosscheck(
    pm: &PhaseMixture,
    x_grid: &[f64],
    t: f64,
    orders: &[usize],
) -> Result<Vec<(usize, f64)>> {
    orders
        .iter()
        .map(|&k| {
            let coarse = pm.with_order(k)?;
            let fine = pm.with_order(2 * k)?;
            let mut worst = 0.0f64;
            for &x in x_grid {
                let d = velocity_phase_avg(&coarse, x, t)? - velocity_phase_avg(&fine, x, t)?;
                worst = worst.max(d.abs());
            }
            Ok((k, worst))
        })
        .collect()
}
