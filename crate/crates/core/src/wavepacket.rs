//! Freely spreading Gaussian slit modes.
//!
//! A slit mode labelled by `center_sign = ±1` is the Gaussian
//! `exp(-(x ± x0)^2 / (4 sigma0 sigma~_t))` with complex width
//! `sigma~_t = sigma0 (1 + i hbar t / 2 m sigma0^2)`. The `+` mode therefore sits at
//! `-x0` and the `-` mode at `+x0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Slit label `λ`; selects `exp(-(x + λ x0)^2 / ...)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CenterSign {
    /// Centered at `-x0`.
    Plus,
    /// Centered at `+x0`.
    Minus,
}

impl CenterSign {
    pub fn value(self) -> f64 {
        match self {
            CenterSign::Plus => 1.0,
            CenterSign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            CenterSign::Plus => CenterSign::Minus,
            CenterSign::Minus => CenterSign::Plus,
        }
    }
}

/// Parameters shared by both slits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub hbar: f64,
    pub mass: f64,
    pub sigma0: f64,
    /// Half the slit separation.
    pub x0: f64,
}

impl Default for Geometry {
    /// `hbar = 1`, `m = 0.5`, `sigma0 = 0.5`, `d = 10`.
    fn default() -> Self {
        Geometry {
            hbar: 1.0,
            mass: 0.5,
            sigma0: 0.5,
            x0: 5.0,
        }
    }
}

impl Geometry {
    pub fn new(hbar: f64, mass: f64, sigma0: f64, x0: f64) -> Result<Self> {
        let g = Geometry {
            hbar,
            mass,
            sigma0,
            x0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn from_separation(hbar: f64, mass: f64, sigma0: f64, d: f64) -> Result<Self> {
        Self::new(hbar, mass, sigma0, 0.5 * d)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("hbar", self.hbar)?;
        positive("mass", self.mass)?;
        positive("sigma0", self.sigma0)?;
        if !(self.x0.is_finite() && self.x0 >= 0.0) {
            return Err(Error::Domain(format!(
                "x0 must be non-negative, got {}",
                self.x0
            )));
        }
        Ok(())
    }

    pub fn packet(&self, sign: CenterSign) -> SlitPacket {
        SlitPacket {
            center_sign: sign,
            x0: self.x0,
            sigma0: self.sigma0,
            mass: self.mass,
            hbar: self.hbar,
        }
    }

    /// Spreading frequency `hbar / (2 m sigma0^2)`.
    pub fn alpha(&self) -> f64 {
        self.hbar / (2.0 * self.mass * self.sigma0 * self.sigma0)
    }

    pub fn sigma_t(&self, t: f64) -> f64 {
        let at = self.alpha() * t;
        self.sigma0 * (1.0 + at * at).sqrt()
    }

    /// `sigma_dot / sigma` at time `t`.
    pub fn rate(&self, t: f64) -> f64 {
        let a = self.alpha();
        a * a * t / (1.0 + a * a * t * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitPacket {
    pub center_sign: CenterSign,
    pub x0: f64,
    pub sigma0: f64,
    pub mass: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWidth {
    pub value: Complex64,
    pub t: f64,
}

impl ComplexWidth {
    /// `sigma_t = |sigma~_t|`.
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be finite, got {t}")))
    }
}

impl SlitPacket {
    pub fn geometry(&self) -> Geometry {
        Geometry {
            hbar: self.hbar,
            mass: self.mass,
            sigma0: self.sigma0,
            x0: self.x0,
        }
    }

    pub fn center(&self) -> f64 {
        -self.center_sign.value() * self.x0
    }

    pub fn alpha(&self) -> f64 {
        self.geometry().alpha()
    }

    pub fn sigma_t(&self, t: f64) -> f64 {
        self.geometry().sigma_t(t)
    }

    fn width(&self, t: f64) -> Complex64 {
        Complex64::new(self.sigma0, self.sigma0 * self.alpha() * t)
    }

    pub fn complex_width(&self, t: f64) -> Result<ComplexWidth> {
        check_time(t)?;
        Ok(ComplexWidth {
            value: self.width(t),
            t,
        })
    }

    /// `sigma_dot_t / sigma_t = alpha^2 t / (1 + alpha^2 t^2)`.
    pub fn spread_rate(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.geometry().rate(t))
    }

    /// Complex logarithm of [`amplitude`](Self::amplitude); finite far into the tails.
    pub fn ln_amplitude(&self, x: f64, t: f64) -> Complex64 {
        let w = self.width(t);
        let u = x - self.center();
        -0.25 * (2.0 * PI * w * w).ln() - u * u / (4.0 * self.sigma0 * w)
    }

    /// Unit-norm amplitude `(2 pi sigma~_t^2)^(-1/4) exp(-(x - c)^2 / (4 sigma0 sigma~_t))`.
    pub fn amplitude(&self, x: f64, t: f64) -> Complex64 {
        self.ln_amplitude(x, t).exp()
    }

    /// `d ln(psi) / dx`, exact.
    pub fn ln_amplitude_dx(&self, x: f64, t: f64) -> Complex64 {
        -(x - self.center()) / (2.0 * self.sigma0 * self.width(t))
    }

    pub fn amplitude_dx(&self, x: f64, t: f64) -> Complex64 {
        self.amplitude(x, t) * self.ln_amplitude_dx(x, t)
    }

    pub fn ln_density(&self, x: f64, t: f64) -> f64 {
        let s = self.sigma_t(t);
        let u = x - self.center();
        -u * u / (2.0 * s * s) - 0.5 * (2.0 * PI * s * s).ln()
    }

    pub fn density_single(&self, x: f64, t: f64) -> f64 {
        self.ln_density(x, t).exp()
    }

    /// Single-slit Bohmian velocity `(sigma_dot_t / sigma_t)(x + λ x0)`.
    pub fn velocity_single(&self, x: f64, t: f64) -> f64 {
        self.geometry().rate(t) * (x - self.center())
    }
}
