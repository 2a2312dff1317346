use core::f64::consts::PI;

use num_complex::Complex64;

use super::bessel::{bessel_ratio, ln_i0, KAPPA_MAX};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let w = x - two_pi * ((x + PI) / two_pi).floor();
    if w >= PI {
        w - two_pi
    } else if w < -PI {
        w + two_pi
    } else {
        w
    }
}

/// Von Mises density over a circular variable.
///
/// Concentrations are clamped to [`KAPPA_MAX`]; `kappa == 0` is the uniform
/// density and its mean direction is reported as 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VonMises {
    mu: f64,
    kappa: f64,
}

impl VonMises {
    pub fn new(mu: f64, kappa: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Domain("von Mises mean must be finite"));
        }
        if kappa.is_nan() || kappa < 0.0 {
            return Err(Error::Domain("von Mises concentration must be >= 0"));
        }
        Ok(Self::new_unchecked(mu, kappa))
    }

    pub(crate) fn new_unchecked(mu: f64, kappa: f64) -> Self {
        let kappa = kappa.min(KAPPA_MAX);
        if kappa == 0.0 {
            return Self::uniform();
        }
        Self { mu: wrap_angle(mu), kappa }
    }

    pub const fn uniform() -> Self {
        Self { mu: 0.0, kappa: 0.0 }
    }

    /// Builds the density `exp(Re(conj(eta) e^{j theta}))`, i.e. `kappa = |eta|`
    /// and `mu = arg(eta)`.
    pub fn from_natural(eta: Complex64) -> Self {
        let kappa = eta.norm();
        if !(kappa > 0.0) {
            return Self::uniform();
        }
        Self::new_unchecked(eta.arg(), kappa)
    }

    pub fn natural(&self) -> Complex64 {
        Complex64::from_polar(self.kappa, self.mu)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_uniform(&self) -> bool {
        self.kappa == 0.0
    }

    pub fn is_point_mass(&self) -> bool {
        self.kappa >= KAPPA_MAX
    }

    /// Pointwise product of two densities, renormalized. Natural
    /// parameters add.
    pub fn multiply(&self, other: &VonMises) -> VonMises {
        VonMises::from_natural(self.natural() + other.natural())
    }

    /// Characteristic function `E[e^{j m theta}] = I_m(kappa)/I_0(kappa) e^{j m mu}`.
    pub fn char_fn(&self, m: u32) -> Complex64 {
        if m == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let r = bessel_ratio(m, self.kappa);
        Complex64::from_polar(r, m as f64 * self.mu)
    }

    /// Log density at `theta`.
    pub fn ln_pdf(&self, theta: f64) -> f64 {
        self.kappa * (theta - self.mu).cos() - ln_i0(self.kappa) - (2.0 * PI).ln()
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        self.ln_pdf(theta).exp()
    }
}

impl Default for VonMises {
    fn default() -> Self {
        Self::uniform()
    }
}
