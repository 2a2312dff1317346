//! Noise, amplitude and angle initialization.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::posterior::{gram, weight_posterior_on};
use super::theta::belief_from_eta;
use crate::circular::VonMises;
use crate::model::{expected_steering, ArrayGeometry, EstimatorConfig, Snapshot};
use crate::Result;
#[allow(unused_imports)]
use num_traits::Float;

/// Starting point of the variational iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct InitOutcome {
    pub beliefs: Vec<VonMises>,
    pub a_hats: Vec<Vec<Complex64>>,
    pub nu0: f64,
    pub tau0: f64,
    pub nu_clamped: bool,
    pub tau_clamped: bool,
}

pub(crate) fn energy(y: &[Complex64]) -> f64 {
    y.iter().map(|v| v.norm_sqr()).sum()
}

/// `nu = ||y||^2 / (M 10^(snr/10))`; an all-zero snapshot gets the smallest
/// positive normal value and is flagged.
pub fn init_noise(y: &[Complex64], snr_db: f64) -> (f64, bool) {
    let nu = energy(y) / y.len() as f64 / 10f64.powf(snr_db / 10.0);
    if nu > 0.0 && nu.is_finite() {
        (nu, false)
    } else {
        (f64::MIN_POSITIVE, true)
    }
}

/// `tau = (||y||^2/M - nu) / (rho L)`, clamped to `1e-3 nu` when not positive.
pub fn init_amplitude(y: &[Complex64], nu: f64, rho: f64, l: usize) -> (f64, bool) {
    let tau = (energy(y) / y.len() as f64 - nu) / (rho * l as f64);
    if tau > 0.0 {
        (tau, false)
    } else {
        (nu * 1e-3, true)
    }
}

/// Natural parameters of `exp(|z^H a(theta)|^2 / (nu M))` per lag: element
/// `m` is `(2/(nu M)) sum_{i-k=m} z_i conj(z_k)`; element 0 is unused.
pub fn lag_eta(z: &[Complex64], nu: f64) -> Vec<Complex64> {
    let m = z.len();
    let scale = 2.0 / (nu * m as f64);
    (0..m)
        .map(|lag| {
            if lag == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let s: Complex64 = (lag..m).map(|i| z[i] * z[i - lag].conj()).sum();
            s * scale
        })
        .collect()
}

/// Appends `n_new` beliefs after `fixed`, each initialized from the residual
/// of `y` after a joint weight fit of every component before it.
pub fn init_components(
    y: &[Complex64],
    fixed: &[VonMises],
    n_new: usize,
    nu: f64,
    tau: f64,
    prune_d: usize,
) -> Result<Vec<VonMises>> {
    let m = y.len();
    let mut beliefs: Vec<VonMises> = fixed.to_vec();
    let mut a_hats: Vec<Vec<Complex64>> = fixed.iter().map(|b| expected_steering(b, m)).collect();
    for _ in 0..n_new {
        let residual = if a_hats.is_empty() {
            y.to_vec()
        } else {
            let g = gram(&a_hats, y);
            let idx: Vec<usize> = (0..a_hats.len()).collect();
            let post = weight_posterior_on(&idx, &g, nu, tau);
            let mut z = y.to_vec();
            for (w, a) in post.w_hat.iter().zip(&a_hats) {
                for (zi, ai) in z.iter_mut().zip(a) {
                    *zi -= w * ai;
                }
            }
            z
        };
        let belief = belief_from_eta(&lag_eta(&residual, nu), None, prune_d)?;
        a_hats.push(expected_steering(&belief, m));
        beliefs.push(belief);
    }
    Ok(beliefs)
}

/// Initial beliefs for all `L` components with `rho = cfg.rho0`.
pub fn init_beliefs(y: &Snapshot, geom: &ArrayGeometry, cfg: &EstimatorConfig) -> Result<InitOutcome> {
    y.check(geom)?;
    cfg.validate()?;
    let (nu0, nu_clamped) = init_noise(&y.y, cfg.snr_init_db);
    let (tau0, tau_clamped) = init_amplitude(&y.y, nu0, cfg.rho0, cfg.l_components);
    let beliefs = init_components(&y.y, &[], cfg.l_components, nu0, tau0, cfg.prune_d)?;
    let a_hats = beliefs.iter().map(|b| expected_steering(b, geom.m_sensors())).collect();
    Ok(InitOutcome { beliefs, a_hats, nu0, tau0, nu_clamped, tau_clamped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular::wrap_angle;
    use crate::model::steering;
    use core::f64::consts::PI;
    use alloc::vec::Vec;

    fn geom(m: usize) -> ArrayGeometry {
        ArrayGeometry::new(m, 1.0, 1.0, PI).unwrap()
    }

    fn grid_peak(y: &[Complex64]) -> f64 {
        let n = 200_000;
        (0..n)
            .map(|i| -PI + 2.0 * PI * i as f64 / n as f64)
            .map(|t| {
                let p: Complex64 = steering(t, y.len()).iter().zip(y).map(|(a, v)| v.conj() * a).sum();
                (t, p.norm_sqr())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0
    }

    #[test]
    fn noise_rule_arithmetic() {
        let y = [Complex64::new(10.0, 0.0); 7];
        assert!((init_noise(&y, 20.0).0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn first_belief_points_at_noiseless_source() {
        let theta0 = -1.3;
        let y = Snapshot::new(1, steering(theta0, 15).iter().map(|v| v * 10.0).collect()).unwrap();
        let g = geom(15);
        let init = init_beliefs(&y, &g, &EstimatorConfig::for_array(&g)).unwrap();
        let peak = grid_peak(&y.y);
        assert!(wrap_angle(init.beliefs[0].mu() - peak).abs() < 0.01);
        assert!(wrap_angle(init.beliefs[0].mu() - theta0).abs() < 0.01);
        assert_eq!(init.beliefs.len(), 15);
        assert!(!init.tau_clamped);
    }

    #[test]
    fn second_belief_comes_from_residual() {
        let y: Vec<Complex64> = steering(1.0, 15)
            .iter()
            .zip(steering(-0.9, 15))
            .map(|(a, b)| a * 10.0 + b * 6.0)
            .collect();
        let (nu, _) = init_noise(&y, 20.0);
        let (tau, _) = init_amplitude(&y, nu, 0.5, 15);
        let b = init_components(&y, &[], 2, nu, tau, 4).unwrap();
        assert!(wrap_angle(b[0].mu() - 1.0).abs() < 0.02);
        assert!(wrap_angle(b[1].mu() + 0.9).abs() < 0.02);
    }

    #[test]
    fn zero_snapshot_clamps() {
        let y = Snapshot::new(1, alloc::vec![Complex64::new(0.0, 0.0); 6]).unwrap();
        let g = geom(6);
        let init = init_beliefs(&y, &g, &EstimatorConfig::for_array(&g)).unwrap();
        assert!(init.tau_clamped && init.nu_clamped);
        assert!(init.nu0 > 0.0 && init.tau0 > 0.0);
        assert!(init.beliefs.iter().all(|b| b.is_uniform()));
    }

    #[test]
    fn lag_eta_matches_quadratic_form() {
        let z = [Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.8), Complex64::new(0.2, -1.1), Complex64::new(0.7, 0.1)];
        let nu = 0.6;
        let eta = lag_eta(&z, nu);
        let energy: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        for t in [-2.0, 0.3, 1.7] {
            let a = steering(t, 4);
            let direct: Complex64 = z.iter().zip(&a).map(|(v, x)| v.conj() * x).sum();
            let lhs = direct.norm_sqr() / (nu * 4.0);
            let rhs: f64 = energy / (nu * 4.0)
                + eta.iter().zip(&a).skip(1).map(|(e, x)| (e.conj() * x).re).sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
