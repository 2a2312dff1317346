//! Ground-truth scenarios, snapshot synthesis and a beamforming spectrum.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use svalse_core::model::steering;
use svalse_core::{ArrayGeometry, Snapshot};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplitudeModel {
    /// Circular complex normal with the given variance, redrawn every step.
    Gaussian { variance: f64 },
    Fixed { re: f64, im: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Motion {
    Static,
    /// Gaussian increments with this standard deviation in degrees per step.
    RandomWalk { std_deg: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub initial_doa: f64,
    pub amplitude: AmplitudeModel,
    pub motion: Motion,
    /// Inclusive, 1-based.
    pub active_window: (usize, usize),
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_doa.abs() <= 90.0) {
            return Err(CliError::config("source DOA must lie in [-90, 90]"));
        }
        let (a, b) = self.active_window;
        if a == 0 || b < a {
            return Err(CliError::config("active window must be a nonempty 1-based range"));
        }
        match self.amplitude {
            AmplitudeModel::Gaussian { variance } if !(variance >= 0.0 && variance.is_finite()) => {
                return Err(CliError::config("amplitude variance must be nonnegative"))
            }
            AmplitudeModel::Fixed { re, im } if !(re.is_finite() && im.is_finite()) => {
                return Err(CliError::config("fixed amplitude must be finite"))
            }
            _ => {}
        }
        if let Motion::RandomWalk { std_deg } = self.motion {
            if !(std_deg >= 0.0 && std_deg.is_finite()) {
                return Err(CliError::config("random walk std must be nonnegative"));
            }
        }
        Ok(())
    }

    fn active_at(&self, t: usize) -> bool {
        (self.active_window.0..=self.active_window.1).contains(&t)
    }
}

/// One present source at one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthEntry {
    pub t: usize,
    pub source_id: usize,
    pub doa_deg: f64,
    pub amp: Complex64,
}

/// Present sources per time step; `steps[t - 1]` holds step `t`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Truth {
    pub steps: Vec<Vec<TruthEntry>>,
}

impl Truth {
    pub fn t_max(&self) -> usize {
        self.steps.len()
    }

    pub fn doas_at(&self, t: usize) -> Vec<f64> {
        self.steps[t - 1].iter().map(|e| e.doa_deg).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &TruthEntry> {
        self.steps.iter().flatten()
    }
}

fn complex_normal(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Tracks and amplitudes for every source over `t_max` steps. Random walks
/// advance every step, present or not, and are clipped to [-90, 90].
pub fn build_truth(specs: &[SourceSpec], t_max: usize, seed: u64) -> Result<Truth> {
    if t_max == 0 {
        return Err(CliError::config("t_max must be >= 1"));
    }
    specs.iter().try_for_each(SourceSpec::validate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut doas: Vec<f64> = specs.iter().map(|s| s.initial_doa).collect();
    let mut steps = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        if t > 1 {
            for (doa, spec) in doas.iter_mut().zip(specs) {
                if let Motion::RandomWalk { std_deg } = spec.motion {
                    let step: f64 = Normal::new(0.0, std_deg).map_err(|_| CliError::config("bad walk std"))?.sample(&mut rng);
                    *doa = (*doa + step).clamp(-90.0, 90.0);
                }
            }
        }
        let mut present = Vec::new();
        for (id, spec) in specs.iter().enumerate() {
            let amp = match spec.amplitude {
                AmplitudeModel::Gaussian { variance } => complex_normal(&mut rng, variance),
                AmplitudeModel::Fixed { re, im } => Complex64::new(re, im),
            };
            if spec.active_at(t) {
                present.push(TruthEntry { t, source_id: id, doa_deg: doas[id], amp });
            }
        }
        steps.push(present);
    }
    Ok(Truth { steps })
}

/// Snapshots plus a per-step flag for steps without any signal power.
#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    pub snapshots: Vec<Snapshot>,
    pub silent: Vec<bool>,
}

/// Noiseless signal of one step.
pub fn signal(entries: &[TruthEntry], geom: &ArrayGeometry) -> Result<Vec<Complex64>> {
    let m = geom.m_sensors();
    let mut s = vec![Complex64::new(0.0, 0.0); m];
    for e in entries {
        let a = steering(geom.doa_to_pa(e.doa_deg)?, m);
        for (si, ai) in s.iter_mut().zip(a) {
            *si += e.amp * ai;
        }
    }
    Ok(s)
}

/// Adds complex white noise with variance `||s_t||^2 / (M 10^(snr/10))` per
/// step. Silent steps borrow the most recent nonzero signal power (or the
/// next one when none came before, or 1 when the whole run is silent).
pub fn synthesize(truth: &Truth, geom: &ArrayGeometry, snr_db: f64, seed: u64) -> Result<Synthesis> {
    if snr_db.is_nan() {
        return Err(CliError::config("SNR must be a number"));
    }
    let m = geom.m_sensors() as f64;
    let signals: Vec<Vec<Complex64>> = truth.steps.iter().map(|e| signal(e, geom)).collect::<Result<_>>()?;
    let powers: Vec<f64> = signals.iter().map(|s| s.iter().map(|v| v.norm_sqr()).sum()).collect();
    let first_nonzero = powers.iter().copied().find(|p| *p > 0.0).unwrap_or(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let scale = 10f64.powf(snr_db / 10.0);
    let mut last = first_nonzero;
    let mut snapshots = Vec::with_capacity(signals.len());
    let mut silent = Vec::with_capacity(signals.len());
    for (t, (s, p)) in signals.into_iter().zip(&powers).enumerate() {
        let quiet = *p == 0.0;
        if !quiet {
            last = *p;
        }
        silent.push(quiet);
        let nu = last / (m * scale);
        let y = if nu > 0.0 { s.iter().map(|v| v + complex_normal(&mut rng, nu)).collect() } else { s };
        snapshots.push(Snapshot::new(t + 1, y)?);
    }
    Ok(Synthesis { snapshots, silent })
}

/// Bartlett spectrum `|a^H y|^2 / M^2` on a DOA grid in degrees.
pub fn cbf(geom: &ArrayGeometry, y: &[Complex64], grid: &[f64]) -> Result<Vec<f64>> {
    let m = geom.m_sensors();
    grid.iter()
        .map(|beta| {
            let a = steering(geom.doa_to_pa(*beta)?, m);
            let p: Complex64 = a.iter().zip(y).map(|(x, v)| x.conj() * v).sum();
            Ok(p.norm_sqr() / (m * m) as f64)
        })
        .collect()
}

/// Independent seed for `(master, run, snr index)`.
pub fn derive_seed(master: u64, run: usize, snr_index: usize) -> u64 {
    let mut z = master ^ (run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (snr_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const FIG4_DOAS: [f64; 6] = [-70.0, -55.0, -40.0, 35.0, 50.0, 65.0];
pub const WALK_STD_DEG: f64 = 1.5;

/// Six sources with unit-variance Gaussian amplitudes; the two inner ones
/// (-40 and 35 degrees) random-walk.
pub fn fig4_sources(t_max: usize) -> Vec<SourceSpec> {
    FIG4_DOAS
        .iter()
        .map(|&doa| SourceSpec {
            initial_doa: doa,
            amplitude: AmplitudeModel::Gaussian { variance: 1.0 },
            motion: if doa == -40.0 || doa == 35.0 {
                Motion::RandomWalk { std_deg: WALK_STD_DEG }
            } else {
                Motion::Static
            },
            active_window: (1, t_max),
        })
        .collect()
}

/// The fig4 sources switched off in pairs: 65/50 after step 12, 35/-40
/// after step 25, -55/-70 after step 37.
pub fn fig6_sources(t_max: usize) -> Vec<SourceSpec> {
    fig4_sources(t_max)
        .into_iter()
        .map(|mut s| {
            let end = match s.initial_doa as i64 {
                65 | 50 => 12,
                35 | -40 => 25,
                _ => 37,
            };
            s.active_window = (1, end.min(t_max));
            s
        })
        .collect()
}

/// Three static sources at -3, 2 and 60 degrees with amplitude 10.
pub fn scenario1_sources(t_max: usize) -> Vec<SourceSpec> {
    [-3.0, 2.0, 60.0]
        .iter()
        .map(|&doa| SourceSpec {
            initial_doa: doa,
            amplitude: AmplitudeModel::Fixed { re: 10.0, im: 0.0 },
            motion: Motion::Static,
            active_window: (1, t_max),
        })
        .collect()
}
