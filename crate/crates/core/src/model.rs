//! Array geometry, steering vectors, pseudo-angle conversion and the
//! estimator's state records.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::circular::{bessel_ratio_table, VonMises};
use crate::linalg::CMatrix;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Uniform linear array observing a narrowband field at angular frequency `omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrayGeometry {
    m_sensors: usize,
    spacing: f64,
    sound_speed: f64,
    omega: f64,
}

impl ArrayGeometry {
    /// Rejects non-positive fields, fewer than two sensors, and spacings
    /// above half a wavelength (`d > c pi / omega`).
    pub fn new(m_sensors: usize, spacing: f64, sound_speed: f64, omega: f64) -> Result<Self> {
        if m_sensors < 2 {
            return Err(Error::InvalidConfig("array needs at least two sensors"));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(spacing) && positive(sound_speed) && positive(omega)) {
            return Err(Error::InvalidConfig("spacing, sound speed and frequency must be positive"));
        }
        if spacing * omega / sound_speed > PI * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig("sensor spacing exceeds half a wavelength"));
        }
        Ok(Self { m_sensors, spacing, sound_speed, omega })
    }

    /// Same as [`ArrayGeometry::new`] with the frequency in Hz.
    pub fn with_frequency(m_sensors: usize, spacing: f64, sound_speed: f64, freq_hz: f64) -> Result<Self> {
        Self::new(m_sensors, spacing, sound_speed, 2.0 * PI * freq_hz)
    }

    pub fn m_sensors(&self) -> usize {
        self.m_sensors
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Electrical phase step per sensor at endfire, `omega d / c`.
    pub fn phase_scale(&self) -> f64 {
        self.omega * self.spacing / self.sound_speed
    }

    /// Pseudo angle `-(omega d / c) sin(beta)` for a DOA in degrees. The
    /// result is not wrapped, so the conversion stays invertible at +-90 deg.
    pub fn doa_to_pa(&self, beta_deg: f64) -> Result<f64> {
        if !(beta_deg.abs() <= 90.0) {
            return Err(Error::Domain("DOA must lie in [-90, 90] degrees"));
        }
        Ok(-self.phase_scale() * beta_deg.to_radians().sin())
    }

    /// DOA in degrees for a pseudo angle; angles outside the visible
    /// region are rejected.
    pub fn pa_to_doa(&self, theta: f64) -> Result<f64> {
        let s = -theta / self.phase_scale();
        if !(s.abs() <= 1.0 + 1e-12) {
            return Err(Error::Domain("pseudo angle lies outside the visible region"));
        }
        Ok(s.clamp(-1.0, 1.0).asin().to_degrees())
    }

    pub fn steering(&self, theta: f64) -> Vec<Complex64> {
        steering(theta, self.m_sensors)
    }

    pub fn expected_steering(&self, vm: &VonMises) -> Vec<Complex64> {
        expected_steering(vm, self.m_sensors)
    }
}

/// `[1, e^{j theta}, ..., e^{j (M-1) theta}]`.
pub fn steering(theta: f64, m: usize) -> Vec<Complex64> {
    (0..m).map(|k| Complex64::from_polar(1.0, k as f64 * theta)).collect()
}

/// `E[a(theta)]` under a von Mises belief: element `k` is the `k`-th
/// characteristic function value.
pub fn expected_steering(vm: &VonMises, m: usize) -> Vec<Complex64> {
    let ratios = bessel_ratio_table(vm.kappa(), m);
    ratios
        .iter()
        .enumerate()
        .map(|(k, r)| if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::from_polar(*r, k as f64 * vm.mu()) })
        .collect()
}

/// One array snapshot at a 1-based time step.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: usize,
    pub y: Vec<Complex64>,
}

impl Snapshot {
    pub fn new(t: usize, y: Vec<Complex64>) -> Result<Self> {
        if t == 0 {
            return Err(Error::Domain("time steps are 1-based"));
        }
        Ok(Self { t, y })
    }

    pub fn check(&self, geom: &ArrayGeometry) -> Result<()> {
        if self.y.len() != geom.m_sensors() {
            return Err(Error::DimensionMismatch { expected: geom.m_sensors(), found: self.y.len() });
        }
        Ok(())
    }
}

/// Belief about one of the `L` potential sources.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentBelief {
    /// Pseudo-angle belief.
    pub theta: VonMises,
    /// Prior activation probability used at this step.
    pub active_prob: f64,
    /// Set when the component was active at any iteration of the step.
    pub was_active_any_iter: bool,
}

impl ComponentBelief {
    pub fn new(theta: VonMises, active_prob: f64) -> Self {
        Self { theta, active_prob, was_active_any_iter: false }
    }
}

/// Estimator state at the end of one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorState {
    pub t: usize,
    pub beliefs: Vec<ComponentBelief>,
    pub s_hat: Vec<bool>,
    /// Weight posterior mean over the active set, in ascending index order.
    pub w_hat: Vec<Complex64>,
    /// Weight posterior covariance over the active set.
    pub c_hat: CMatrix,
    pub nu: f64,
    pub tau: f64,
}

impl PosteriorState {
    pub fn active(&self) -> Vec<usize> {
        active_indices(&self.s_hat)
    }

    pub fn n_active(&self) -> usize {
        self.s_hat.iter().filter(|s| **s).count()
    }
}

pub(crate) fn active_indices(s: &[bool]) -> Vec<usize> {
    s.iter().enumerate().filter_map(|(i, on)| on.then_some(i)).collect()
}

/// Estimator parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorConfig {
    /// Number of potential components `L`.
    pub l_components: usize,
    /// Activation probability `p^a` for previously inactive components.
    pub p_act: f64,
    /// Deactivation probability `p^d` for previously active components.
    pub p_deact: f64,
    /// Concentration of the von Mises random walk on pseudo angles.
    pub kappa_r: f64,
    /// Mixture components kept after each factor multiplication.
    pub prune_d: usize,
    /// Activation probability at the first step.
    pub rho0: f64,
    pub max_iter: usize,
    /// Stop when no mean direction moves more than this (radians).
    pub theta_tol: f64,
    /// Assumed measurement-to-noise ratio for the noise initialization.
    pub snr_init_db: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            l_components: 15,
            p_act: 0.10,
            p_deact: 0.25,
            kappa_r: 148.0,
            prune_d: 4,
            rho0: 0.5,
            max_iter: 200,
            theta_tol: 1e-6,
            snr_init_db: 20.0,
        }
    }
}

impl EstimatorConfig {
    /// Defaults with `L = M`.
    pub fn for_array(geom: &ArrayGeometry) -> Self {
        Self { l_components: geom.m_sensors(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |p: f64| p > 0.0 && p < 1.0;
        if self.l_components == 0 {
            return Err(Error::InvalidConfig("need at least one potential component"));
        }
        if !open_unit(self.p_act) || !open_unit(self.p_deact) || !open_unit(self.rho0) {
            return Err(Error::InvalidConfig("p_act, p_deact and rho0 must lie in (0, 1)"));
        }
        if !(self.kappa_r > 0.0 && self.kappa_r.is_finite()) {
            return Err(Error::InvalidConfig("kappa_r must be positive"));
        }
        if self.prune_d == 0 {
            return Err(Error::InvalidConfig("prune_d must be >= 1"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1"));
        }
        if !(self.theta_tol > 0.0) {
            return Err(Error::InvalidConfig("theta_tol must be positive"));
        }
        if !self.snr_init_db.is_finite() {
            return Err(Error::InvalidConfig("snr_init_db must be finite"));
        }
        Ok(())
    }
}
