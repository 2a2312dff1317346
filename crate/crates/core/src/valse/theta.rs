//! Angle belief refinement for one active component.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::circular::{mixture_collapse, product_reduce, VmMixture, VonMises, WrappedFactor};
use crate::linalg::CMatrix;
use crate::{Error, Result};

/// Inputs shared by the angle updates of one iteration.
#[derive(Clone, Copy, Debug)]
pub struct ThetaContext<'a> {
    pub y: &'a [Complex64],
    /// Active component indices, ascending.
    pub active: &'a [usize],
    /// Weight mean over `active`.
    pub w_hat: &'a [Complex64],
    /// Weight covariance over `active`.
    pub c_hat: &'a CMatrix,
    pub nu: f64,
    pub prune_d: usize,
}

/// Natural parameter vector of the angle likelihood for component `l`:
/// residual correlation minus the covariance correction.
pub fn theta_eta(l: usize, a_hats: &[Vec<Complex64>], ctx: &ThetaContext<'_>) -> Result<Vec<Complex64>> {
    let pos = ctx
        .active
        .iter()
        .position(|&i| i == l)
        .ok_or(Error::Domain("component is not in the active set"))?;
    let scale = 2.0 / ctx.nu;
    let w_l = ctx.w_hat[pos].conj();
    let mut residual = ctx.y.to_vec();
    let mut correction = alloc::vec![Complex64::new(0.0, 0.0); ctx.y.len()];
    for (k, &other) in ctx.active.iter().enumerate() {
        if k == pos {
            continue;
        }
        let w = ctx.w_hat[k];
        let c = ctx.c_hat[(k, pos)];
        for (i, a) in a_hats[other].iter().enumerate() {
            residual[i] -= w * a;
            correction[i] += c * a;
        }
    }
    Ok(residual.iter().zip(&correction).map(|(r, c)| (r * w_l - c) * scale).collect())
}

/// Wrapped factors `m = 1..M-1` of a natural parameter vector.
pub(crate) fn wrapped_factors(eta: &[Complex64]) -> Result<Vec<WrappedFactor>> {
    eta.iter()
        .enumerate()
        .skip(1)
        .map(|(m, e)| WrappedFactor::new(m as u32, *e))
        .collect()
}

/// Product of the prior with the wrapped factors, pruned to `d` components
/// and collapsed. A product with no information is the uniform density.
pub(crate) fn belief_from_eta(eta: &[Complex64], prior: Option<&VonMises>, d: usize) -> Result<VonMises> {
    let factors = wrapped_factors(eta)?;
    if prior.is_none() && factors.is_empty() {
        return Ok(VonMises::uniform());
    }
    let mix = product_reduce(prior, &factors, d)?;
    collapse_or_uniform(&mix)
}

fn collapse_or_uniform(mix: &VmMixture) -> Result<VonMises> {
    let comps = mix.components();
    if comps.len() == 1 {
        return Ok(comps[0].1);
    }
    mixture_collapse(mix)
}

/// Updated angle belief for active component `l`.
pub fn update_theta(
    l: usize,
    a_hats: &[Vec<Complex64>],
    ctx: &ThetaContext<'_>,
    prior: Option<&VonMises>,
) -> Result<VonMises> {
    let eta = theta_eta(l, a_hats, ctx)?;
    belief_from_eta(&eta, prior, ctx.prune_d)
}
