//! Two-slit states: coherent superpositions with a relative phase, shutter
//! (discrete) mixtures and continuous phase mixtures.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::periodic_nodes;
use crate::wavepacket::{CenterSign, Geometry, SlitPacket};

/// Tolerance on `sum p = 1`.
const WEIGHT_SUM_TOL: f64 = 1e-12;

fn check_probability(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// Both slit modes at one `(x, t)`, factored as `psi_± = exp(ln_scale) * amp_±` so
/// that `|amp| <= 1` for the dominant mode.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModePair {
    pub ln_scale: f64,
    pub amp_plus: Complex64,
    pub amp_minus: Complex64,
    pub dlog_plus: Complex64,
    pub dlog_minus: Complex64,
}

impl ModePair {
    pub fn at(plus: &SlitPacket, minus: &SlitPacket, x: f64, t: f64) -> Self {
        let lp = plus.ln_amplitude(x, t);
        let lm = minus.ln_amplitude(x, t);
        let ln_scale = lp.re.max(lm.re);
        ModePair {
            ln_scale,
            amp_plus: (lp - ln_scale).exp(),
            amp_minus: (lm - ln_scale).exp(),
            dlog_plus: plus.ln_amplitude_dx(x, t),
            dlog_minus: minus.ln_amplitude_dx(x, t),
        }
    }

    /// Scaled `(psi, d psi / dx)` for the superposition with the given coefficients.
    pub fn combine(&self, c_plus: Complex64, c_minus: Complex64) -> (Complex64, Complex64) {
        let a = c_plus * self.amp_plus;
        let b = c_minus * self.amp_minus;
        (a + b, a * self.dlog_plus + b * self.dlog_minus)
    }
}

/// Scaled density/current pair: true values are `exp(2 ln_scale)` times these.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledFlow {
    pub ln_scale: f64,
    pub density: f64,
    pub current: f64,
    /// `p+ |amp+|^2 + p- |amp-|^2`; reference level for the relative density floor.
    pub incoherent: f64,
}

/// `sqrt(p+) psi_+ + e^{i delta} sqrt(p-) psi_-`, normalized to unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    /// Mode centered at `-x0`.
    pub plus: SlitPacket,
    /// Mode centered at `+x0`.
    pub minus: SlitPacket,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Relative phase, reduced to `[0, 2 pi)`.
    pub delta: f64,
    norm_sq: f64,
}

impl PureState {
    pub fn new(geometry: Geometry, p_plus: f64, delta: f64) -> Result<Self> {
        geometry.validate()?;
        check_probability("p_plus", p_plus)?;
        if !delta.is_finite() {
            return Err(Error::Domain(format!("delta must be finite, got {delta}")));
        }
        let p_minus = 1.0 - p_plus;
        let delta = wrap_phase(delta);
        let norm_sq = superposition_norm_sq(&geometry, p_plus, p_minus, delta);
        if norm_sq <= f64::EPSILON {
            return Err(Error::Domain(
                "superposition vanishes identically (coincident slits, opposite phase)".into(),
            ));
        }
        Ok(PureState {
            plus: geometry.packet(CenterSign::Plus),
            minus: geometry.packet(CenterSign::Minus),
            p_plus,
            p_minus,
            delta,
            norm_sq,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.plus.geometry()
    }

    /// Same slits and weights, different relative phase.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        PureState::new(self.geometry(), self.p_plus, delta)
    }

    /// Squared norm of the unnormalized superposition, `1 + 2 sqrt(p+ p-) cos(delta) <psi+|psi->`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    fn coefficients(&self) -> (Complex64, Complex64) {
        let n = self.norm_sq.sqrt();
        (
            Complex64::new(self.p_plus.sqrt() / n, 0.0),
            Complex64::from_polar(self.p_minus.sqrt() / n, self.delta),
        )
    }

    pub(crate) fn modes(&self, x: f64, t: f64) -> ModePair {
        ModePair::at(&self.plus, &self.minus, x, t)
    }

    pub fn psi(&self, x: f64, t: f64) -> Complex64 {
        let (cp, cm) = self.coefficients();
        cp * self.plus.amplitude(x, t) + cm * self.minus.amplitude(x, t)
    }

    /// Analytic `d psi / dx`.
    pub fn psi_dx(&self, x: f64, t: f64) -> Complex64 {
        let (cp, cm) = self.coefficients();
        cp * self.plus.amplitude_dx(x, t) + cm * self.minus.amplitude_dx(x, t)
    }

    /// Closed-form intensity: two Gaussians plus the fringe term
    /// `2 sqrt(p+ p- rho+ rho-) cos(delta - alpha t x0 x / sigma_t^2)`.
    pub fn density(&self, x: f64, t: f64) -> f64 {
        let g = self.geometry();
        let s = g.sigma_t(t);
        let lp = self.plus.ln_density(x, t);
        let lm = self.minus.ln_density(x, t);
        let fringe = (self.delta - g.alpha() * t * g.x0 * x / (s * s)).cos();
        let cross = 2.0 * (self.p_plus * self.p_minus).sqrt() * (0.5 * (lp + lm)).exp() * fringe;
        (self.p_plus * lp.exp() + self.p_minus * lm.exp() + cross) / self.norm_sq
    }

    /// `(hbar / m) Im[psi* d psi / dx]` from the analytic derivative.
    pub fn current(&self, x: f64, t: f64) -> f64 {
        let f = self.scaled_flow(x, t);
        (2.0 * f.ln_scale).exp() * f.current
    }

    pub(crate) fn scaled_flow(&self, x: f64, t: f64) -> ScaledFlow {
        let (cp, cm) = self.coefficients();
        scaled_flow(
            &self.modes(x, t),
            cp,
            cm,
            self.p_plus,
            self.p_minus,
            self.norm_sq,
            &self.plus,
        )
    }

    /// Fringe visibility `2 sqrt(p+ p-)`.
    pub fn visibility(&self) -> f64 {
        2.0 * (self.p_plus * self.p_minus).sqrt()
    }
}

fn scaled_flow(
    modes: &ModePair,
    c_plus: Complex64,
    c_minus: Complex64,
    p_plus: f64,
    p_minus: f64,
    norm_sq: f64,
    packet: &SlitPacket,
) -> ScaledFlow {
    let (psi, dpsi) = modes.combine(c_plus, c_minus);
    ScaledFlow {
        ln_scale: modes.ln_scale,
        density: psi.norm_sqr(),
        current: packet.hbar / packet.mass * (psi.conj() * dpsi).im,
        incoherent: (p_plus * modes.amp_plus.norm_sqr() + p_minus * modes.amp_minus.norm_sqr())
            / norm_sq,
    }
}

pub(crate) fn wrap_phase(delta: f64) -> f64 {
    let d = delta.rem_euclid(TAU);
    if d >= TAU {
        0.0
    } else {
        d
    }
}

/// Overlap `<psi+|psi->` is conserved by free evolution and equals
/// `exp(-x0^2 / 2 sigma0^2)` for the unit-norm modes.
fn superposition_norm_sq(g: &Geometry, p_plus: f64, p_minus: f64, delta: f64) -> f64 {
    let overlap = (-g.x0 * g.x0 / (2.0 * g.sigma0 * g.sigma0)).exp();
    1.0 + 2.0 * (p_plus * p_minus).sqrt() * delta.cos() * overlap
}

/// Shutter mixture `sum p_λ |psi_λ><psi_λ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMixture {
    pub components: Vec<(f64, SlitPacket)>,
}

impl DiscreteMixture {
    pub fn new(components: Vec<(f64, SlitPacket)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("mixture needs at least one component".into()));
        }
        for (p, packet) in &components {
            check_probability("mixture weight", *p)?;
            packet.geometry().validate()?;
        }
        let total: f64 = components.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Domain(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        Ok(DiscreteMixture { components })
    }

    /// Random-shutter preparation: slit `+` open with probability `p_plus`.
    pub fn shutters(geometry: Geometry, p_plus: f64) -> Result<Self> {
        check_probability("p_plus", p_plus)?;
        DiscreteMixture::new(vec![
            (p_plus, geometry.packet(CenterSign::Plus)),
            (1.0 - p_plus, geometry.packet(CenterSign::Minus)),
        ])
    }

    pub fn mass(&self) -> f64 {
        self.components[0].1.mass
    }

    pub fn density(&self, x: f64, t: f64) -> f64 {
        self.components
            .iter()
            .map(|(p, packet)| p * packet.density_single(x, t))
            .sum()
    }

    /// `sum p_λ rho_λ v_λ`.
    pub fn current(&self, x: f64, t: f64) -> f64 {
        self.components
            .iter()
            .map(|(p, packet)| p * packet.density_single(x, t) * packet.velocity_single(x, t))
            .sum()
    }

    /// `(ln p_λ + ln rho_λ, v_λ)` for components with nonzero weight.
    pub(crate) fn log_weighted(&self, x: f64, t: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.components
            .iter()
            .filter(|(p, _)| *p > 0.0)
            .map(move |(p, packet)| {
                (
                    p.ln() + packet.ln_density(x, t),
                    packet.velocity_single(x, t),
                )
            })
    }
}

/// Statistics `P(delta)` of the relative phase on `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseLaw {
    Uniform,
    /// All weight at one phase.
    Dirac(f64),
    /// Samples at `2 pi j / n`, periodic linear interpolation between them.
    /// Normalized on construction through [`PhaseLaw::tabulated`].
    Tabulated(Vec<f64>),
}

impl PhaseLaw {
    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(
                "tabulated phase law needs non-negative finite samples".into(),
            ));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if mean <= 0.0 {
            return Err(Error::Config(
                "tabulated phase law is identically zero".into(),
            ));
        }
        Ok(PhaseLaw::Tabulated(
            values.iter().map(|v| v / (TAU * mean)).collect(),
        ))
    }

    /// Probability density at `delta`. Not defined for [`PhaseLaw::Dirac`] (returns 0
    /// away from the atom and infinity on it).
    pub fn density(&self, delta: f64) -> f64 {
        match self {
            PhaseLaw::Uniform => 1.0 / TAU,
            PhaseLaw::Dirac(d0) => {
                if wrap_phase(delta) == wrap_phase(*d0) {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PhaseLaw::Tabulated(table) => {
                let n = table.len();
                let pos = wrap_phase(delta) / TAU * n as f64;
                let j = (pos.floor() as usize).min(n - 1);
                let frac = pos - j as f64;
                table[j] * (1.0 - frac) + table[(j + 1) % n] * frac
            }
        }
    }

    pub(crate) fn max_density(&self) -> f64 {
        match self {
            PhaseLaw::Uniform => 1.0 / TAU,
            PhaseLaw::Dirac(_) => f64::INFINITY,
            PhaseLaw::Tabulated(table) => table.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Periodic trapezoid rule with `order` nodes; weights sum to one.
    pub fn quadrature(&self, order: usize) -> Vec<(f64, f64)> {
        match self {
            PhaseLaw::Dirac(d0) => vec![(wrap_phase(*d0), 1.0)],
            PhaseLaw::Uniform => {
                let w = 1.0 / order as f64;
                periodic_nodes(order).map(|d| (d, w)).collect()
            }
            PhaseLaw::Tabulated(_) => {
                let raw: Vec<(f64, f64)> = periodic_nodes(order)
                    .map(|d| (d, self.density(d)))
                    .collect();
                let total: f64 = raw.iter().map(|(_, w)| w).sum();
                raw.into_iter().map(|(d, w)| (d, w / total)).collect()
            }
        }
    }
}

/// Continuous phase mixture `∫ P(delta) |psi_delta><psi_delta| d delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMixture {
    pub base: PureState,
    pub law: PhaseLaw,
    pub order: usize,
    nodes: Vec<PhaseNode>,
}

/// One quadrature node with the coefficients of its normalized superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PhaseNode {
    pub delta: f64,
    pub weight: f64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub norm_sq: f64,
}

pub const DEFAULT_PHASE_NODES: usize = 64;
pub const MIN_PHASE_NODES: usize = 4;

impl PhaseMixture {
    pub fn new(base: PureState, law: PhaseLaw, order: usize) -> Result<Self> {
        if order < MIN_PHASE_NODES {
            return Err(Error::Config(format!(
                "phase quadrature order must be at least {MIN_PHASE_NODES}, got {order}"
            )));
        }
        let g = base.geometry();
        let nodes = law
            .quadrature(order)
            .into_iter()
            .map(|(delta, weight)| {
                let norm_sq = superposition_norm_sq(&g, base.p_plus, base.p_minus, delta);
                let n = norm_sq.sqrt();
                PhaseNode {
                    delta,
                    weight,
                    c_plus: Complex64::new(base.p_plus.sqrt() / n, 0.0),
                    c_minus: Complex64::from_polar(base.p_minus.sqrt() / n, delta),
                    norm_sq,
                }
            })
            .collect();
        Ok(PhaseMixture {
            base,
            law,
            order,
            nodes,
        })
    }

    /// Uniform `P(delta)` with the default 64-node rule.
    pub fn uniform(base: PureState) -> Result<Self> {
        PhaseMixture::new(base, PhaseLaw::Uniform, DEFAULT_PHASE_NODES)
    }

    pub fn with_order(&self, order: usize) -> Result<Self> {
        PhaseMixture::new(self.base, self.law.clone(), order)
    }

    pub(crate) fn nodes(&self) -> &[PhaseNode] {
        &self.nodes
    }

    pub(crate) fn node_flow(&self, node: &PhaseNode, modes: &ModePair) -> ScaledFlow {
        scaled_flow(
            modes,
            node.c_plus,
            node.c_minus,
            self.base.p_plus,
            self.base.p_minus,
            node.norm_sq,
            &self.base.plus,
        )
    }

    /// Quadrature of `P(delta) rho_delta` and `P(delta) J_delta`, scaled by a common factor.
    pub(crate) fn scaled_flow(&self, x: f64, t: f64) -> ScaledFlow {
        let modes = self.base.modes(x, t);
        let mut out = ScaledFlow {
            ln_scale: modes.ln_scale,
            density: 0.0,
            current: 0.0,
            incoherent: 0.0,
        };
        for node in &self.nodes {
            let f = self.node_flow(node, &modes);
            out.density += node.weight * f.density;
            out.current += node.weight * f.current;
            out.incoherent += node.weight * f.incoherent;
        }
        out
    }

    pub fn density(&self, x: f64, t: f64) -> f64 {
        let f = self.scaled_flow(x, t);
        (2.0 * f.ln_scale).exp() * f.density
    }

    pub fn current(&self, x: f64, t: f64) -> f64 {
        let f = self.scaled_flow(x, t);
        (2.0 * f.ln_scale).exp() * f.current
    }

    pub fn mass(&self) -> f64 {
        self.base.plus.mass
    }
}
