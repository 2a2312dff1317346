//! Single-snapshot variational update: initialization, support search,
//! weight posterior, angle refinement and hyperparameter re-estimation.

mod hyper;
mod init;
mod posterior;
mod theta;

pub use hyper::{estimate_hyper, HyperEstimate};
pub use init::{init_amplitude, init_beliefs, init_components, init_noise, lag_eta, InitOutcome};
pub use posterior::{gram, greedy_support, support_objective, weight_posterior, GramSummary, WeightPosterior};
pub use theta::{theta_eta, update_theta, ThetaContext};

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::circular::{wrap_angle, VmMixture, VonMises};
use crate::model::{
    active_indices, expected_steering, ArrayGeometry, ComponentBelief, EstimatorConfig, PosteriorState, Snapshot,
};
use crate::{Error, Result};
use posterior::{greedy_flagged, weight_posterior_on};

/// Starting beliefs and hyperparameters for [`run_update`].
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateInput {
    pub beliefs: Vec<VonMises>,
    /// Prior von Mises per component, multiplied into every angle update.
    pub priors: Vec<Option<VonMises>>,
    pub rhos: Vec<f64>,
    pub nu: f64,
    pub tau: f64,
}

/// Numerical events and iteration counts of one update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub nu_clamped: bool,
    pub tau_clamped: bool,
    pub jittered: bool,
    /// Angle updates that failed and kept the previous belief.
    pub theta_fallbacks: usize,
}

impl Diagnostics {
    pub(crate) fn merge_init(&mut self, init: &InitOutcome) {
        self.nu_clamped |= init.nu_clamped;
        self.tau_clamped |= init.tau_clamped;
    }
}

/// Iterates support search, weight posterior, hyperparameters and angle
/// updates until the support is stable and no mean moves by more than
/// `theta_tol`, or `max_iter` is reached.
pub fn run_update(y: &Snapshot, input: UpdateInput, cfg: &EstimatorConfig) -> Result<(PosteriorState, Diagnostics)> {
    let UpdateInput { mut beliefs, priors, rhos, mut nu, mut tau } = input;
    let l_count = beliefs.len();
    if priors.len() != l_count {
        return Err(Error::DimensionMismatch { expected: l_count, found: priors.len() });
    }
    if rhos.len() != l_count {
        return Err(Error::DimensionMismatch { expected: l_count, found: rhos.len() });
    }
    if rhos.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::Domain("activation probabilities must lie in (0, 1)"));
    }
    if !(nu > 0.0 && tau > 0.0) {
        return Err(Error::Domain("nu and tau must be positive"));
    }
    let y_vec = &y.y;
    let m = y_vec.len();
    let mut diag = Diagnostics::default();
    let mut a_hats: Vec<Vec<Complex64>> = beliefs.iter().map(|b| expected_steering(b, m)).collect();
    let mut s = vec![false; l_count];
    let mut history = vec![false; l_count];
    let mut prev: Option<Vec<bool>> = None;

    for iter in 1..=cfg.max_iter {
        diag.iterations = iter;
        let g = gram(&a_hats, y_vec);
        let (s_new, jit) = greedy_flagged(&s, &g, nu, tau, &rhos);
        diag.jittered |= jit;
        let active = active_indices(&s_new);
        let post = weight_posterior_on(&active, &g, nu, tau);
        diag.jittered |= post.jittered;

        let est = estimate_hyper(y_vec, &a_hats, &active, &post.w_hat, &post.c_hat, tau);
        diag.nu_clamped |= est.nu_clamped;
        nu = est.nu;
        tau = est.tau;

        let mut max_shift = 0.0f64;
        for &l in &active {
            let ctx = ThetaContext {
                y: y_vec,
                active: &active,
                w_hat: &post.w_hat,
                c_hat: &post.c_hat,
                nu,
                prune_d: cfg.prune_d,
            };
            match update_theta(l, &a_hats, &ctx, priors[l].as_ref()) {
                Ok(vm) => {
                    max_shift = max_shift.max(wrap_angle(vm.mu() - beliefs[l].mu()).abs());
                    beliefs[l] = vm;
                    a_hats[l] = expected_steering(&vm, m);
                }
                Err(_) => diag.theta_fallbacks += 1,
            }
        }
        for (h, on) in history.iter_mut().zip(&s_new) {
            *h |= *on;
        }
        let stable = prev.as_ref() == Some(&s_new);
        s = s_new;
        prev = Some(s.clone());
        if stable && max_shift < cfg.theta_tol {
            diag.converged = true;
            break;
        }
    }

    let active = active_indices(&s);
    let g = gram(&a_hats, y_vec);
    let post = weight_posterior_on(&active, &g, nu, tau);
    diag.jittered |= post.jittered;
    let beliefs = beliefs
        .iter()
        .zip(&rhos)
        .zip(&history)
        .map(|((b, r), h)| ComponentBelief { theta: *b, active_prob: *r, was_active_any_iter: *h })
        .collect();
    let state = PosteriorState { t: y.t, beliefs, s_hat: s, w_hat: post.w_hat, c_hat: post.c_hat, nu, tau };
    Ok((state, diag))
}

/// Nonsequential update: initialization followed by [`run_update`] with
/// `rho = cfg.rho0` and no angle priors.
pub fn valse_update(y: &Snapshot, geom: &ArrayGeometry, cfg: &EstimatorConfig) -> Result<(PosteriorState, Diagnostics)> {
    let init = init_beliefs(y, geom, cfg)?;
    let l = cfg.l_components;
    let input = UpdateInput {
        beliefs: init.beliefs.clone(),
        priors: vec![None; l],
        rhos: vec![cfg.rho0; l],
        nu: init.nu0,
        tau: init.tau0,
    };
    let (state, mut diag) = run_update(y, input, cfg)?;
    diag.merge_init(&init);
    Ok((state, diag))
}

/// MMSE pseudo angle of a von Mises belief, its mean direction.
pub fn mmse_angle(vm: &VonMises) -> Result<f64> {
    if vm.is_uniform() {
        return Err(Error::Domain("uniform belief has no mean direction"));
    }
    Ok(vm.mu())
}

/// MMSE pseudo angle of a mixture belief, `arg E[e^{j theta}]`.
pub fn mmse_angle_mixture(mix: &VmMixture) -> Result<f64> {
    mix.mean_direction().ok_or(Error::Domain("mixture has no mean direction"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::steering;
    use core::f64::consts::PI;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use alloc::vec::Vec;

    fn geom() -> ArrayGeometry {
        ArrayGeometry::with_frequency(15, 3.75, 1500.0, 200.0).unwrap()
    }

    fn noise(rng: &mut ChaCha8Rng, m: usize, var: f64) -> Vec<Complex64> {
        let s = (var / 2.0).sqrt();
        (0..m)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re * s, im * s)
            })
            .collect()
    }

    fn doas(state: &PosteriorState, g: &ArrayGeometry) -> Vec<f64> {
        let mut v: Vec<f64> = state
            .active()
            .iter()
            .filter_map(|&l| g.pa_to_doa(mmse_angle(&state.beliefs[l].theta).ok()?).ok())
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn mmse_examples() {
        assert_eq!(mmse_angle(&VonMises::new(0.7, 3.0).unwrap()).unwrap(), 0.7);
        let edge = -PI + 1e-9;
        assert_eq!(mmse_angle(&VonMises::new(edge, 3.0).unwrap()).unwrap(), edge);
        assert!(mmse_angle(&VonMises::uniform()).is_err());
    }

    #[test]
    fn mixture_mmse_matches_quadrature() {
        let mix = VmMixture::new(alloc::vec![
            (0.6, VonMises::new(2.8, 4.0).unwrap()),
            (0.4, VonMises::new(-2.5, 9.0).unwrap()),
        ])
        .unwrap();
        let n = 100_000;
        let h = 2.0 * PI / n as f64;
        let q: Complex64 = (0..n)
            .map(|i| {
                let t = -PI + (i as f64 + 0.5) * h;
                Complex64::from_polar(mix.pdf(t) * h, t)
            })
            .sum();
        assert!(wrap_angle(mmse_angle_mixture(&mix).unwrap() - q.arg()).abs() < 1e-9);
    }

    #[test]
    fn noiseless_source_recovered() {
        let g = geom();
        let theta = g.doa_to_pa(20.0).unwrap();
        let y = Snapshot::new(1, steering(theta, 15).iter().map(|v| v * Complex64::new(3.0, 1.0)).collect()).unwrap();
        let (state, diag) = valse_update(&y, &g, &EstimatorConfig::for_array(&g)).unwrap();
        assert_eq!(state.n_active(), 1, "{diag:?}");
        let d = doas(&state, &g);
        assert!((d[0] - 20.0).abs() < 0.1, "{d:?}");
        assert_eq!(state.w_hat.len(), 1);
        assert_eq!(state.c_hat.dim(), 1);
    }

    #[test]
    fn two_sources_at_30db() {
        let g = geom();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (b1, b2) = (-15.0, 25.0);
        let a1 = steering(g.doa_to_pa(b1).unwrap(), 15);
        let a2 = steering(g.doa_to_pa(b2).unwrap(), 15);
        let s: Vec<Complex64> = (0..15).map(|k| a1[k] * Complex64::new(1.0, 0.5) + a2[k] * Complex64::new(-0.8, 0.6)).collect();
        let power: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / 15.0;
        let n = noise(&mut rng, 15, power / 1000.0);
        let y = Snapshot::new(1, s.iter().zip(&n).map(|(a, b)| a + b).collect()).unwrap();
        let (state, _) = valse_update(&y, &g, &EstimatorConfig::for_array(&g)).unwrap();
        let d = doas(&state, &g);
        assert_eq!(d.len(), 2, "{d:?}");
        assert!((d[0] - b1).abs() < 0.5 && (d[1] - b2).abs() < 0.5, "{d:?}");
    }

    #[test]
    fn pure_noise_is_sparse() {
        let g = geom();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let trials = 50;
        let total: usize = (0..trials)
            .map(|t| {
                let y = Snapshot::new(t + 1, noise(&mut rng, 15, 1.0)).unwrap();
                valse_update(&y, &g, &EstimatorConfig::for_array(&g)).unwrap().0.n_active()
            })
            .sum();
        assert!(total as f64 / trials as f64 <= 1.0, "average support {}", total as f64 / trials as f64);
    }

    #[test]
    fn deterministic() {
        let g = geom();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let y = Snapshot::new(1, noise(&mut rng, 15, 1.0)).unwrap();
        let y2 = Snapshot::new(1, y.y.iter().zip(steering(0.9, 15)).map(|(a, b)| a + b * 4.0).collect()).unwrap();
        let cfg = EstimatorConfig::for_array(&g);
        assert_eq!(valse_update(&y2, &g, &cfg).unwrap(), valse_update(&y2, &g, &cfg).unwrap());
    }

    #[test]
    fn zero_snapshot_does_not_panic() {
        let g = geom();
        let y = Snapshot::new(1, alloc::vec![Complex64::new(0.0, 0.0); 15]).unwrap();
        let (state, diag) = valse_update(&y, &g, &EstimatorConfig::for_array(&g)).unwrap();
        assert_eq!(state.n_active(), 0);
        assert!(diag.tau_clamped);
        assert!(state.nu > 0.0 && state.tau > 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let y = Snapshot::new(1, steering(0.1, 4)).unwrap();
        let cfg = EstimatorConfig { l_components: 2, ..Default::default() };
        let base = UpdateInput {
            beliefs: alloc::vec![VonMises::uniform(); 2],
            priors: alloc::vec![None; 2],
            rhos: alloc::vec![0.5; 2],
            nu: 1.0,
            tau: 1.0,
        };
        assert!(run_update(&y, UpdateInput { rhos: alloc::vec![0.5], ..base.clone() }, &cfg).is_err());
        assert!(run_update(&y, UpdateInput { rhos: alloc::vec![1.0, 0.5], ..base.clone() }, &cfg).is_err());
        assert!(run_update(&y, UpdateInput { nu: 0.0, ..base.clone() }, &cfg).is_err());
        assert!(run_update(&y, base, &cfg).is_ok());
    }
}
