//! Noise and amplitude variance re-estimation.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::init::energy;
use crate::linalg::CMatrix;

/// Re-estimated `(nu, tau)` and whether `nu` hit its floor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperEstimate {
    pub nu: f64,
    pub tau: f64,
    pub nu_clamped: bool,
}

/// Noise variance from the residual, the weight uncertainty and the angle
/// uncertainty; amplitude variance from the weight second moment. An empty
/// active set keeps `tau` and sets `nu = ||y||^2/M`.
pub fn estimate_hyper(
    y: &[Complex64],
    a_hats: &[Vec<Complex64>],
    active: &[usize],
    w_hat: &[Complex64],
    c_hat: &CMatrix,
    tau_prev: f64,
) -> HyperEstimate {
    let m = y.len() as f64;
    let floor = 1e-12 * energy(y) / m;
    let floor = if floor > 0.0 { floor } else { f64::MIN_POSITIVE };
    if active.is_empty() {
        let nu = energy(y) / m;
        return if nu > floor {
            HyperEstimate { nu, tau: tau_prev, nu_clamped: false }
        } else {
            HyperEstimate { nu: floor, tau: tau_prev, nu_clamped: true }
        };
    }
    let mut residual = y.to_vec();
    for (w, &l) in w_hat.iter().zip(active) {
        for (r, a) in residual.iter_mut().zip(&a_hats[l]) {
            *r -= w * a;
        }
    }
    let j_s = CMatrix::from_fn(active.len(), |i, k| {
        if i == k {
            Complex64::new(m, 0.0)
        } else {
            a_hats[active[i]]
                .iter()
                .zip(&a_hats[active[k]])
                .map(|(p, q)| p.conj() * q)
                .sum()
        }
    });
    let spread: f64 = w_hat
        .iter()
        .zip(active)
        .map(|(w, &l)| w.norm_sqr() * (1.0 - energy(&a_hats[l]) / m))
        .sum();
    let nu = energy(&residual) / m + j_s.trace_product(c_hat).re / m + spread;
    let tau = (energy(w_hat) + c_hat.trace().re) / active.len() as f64;
    if nu > floor {
        HyperEstimate { nu, tau, nu_clamped: false }
    } else {
        HyperEstimate { nu: floor, tau, nu_clamped: true }
    }
}
