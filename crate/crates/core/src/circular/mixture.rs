use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::bessel::{bessel_ratio, invert_ratio, ln_i0, ratio_uncapped, KAPPA_MAX};
use super::vonmises::{wrap_angle, VonMises};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// The factor `exp(Re(conj(eta) e^{j m theta}))`: a von Mises density in
/// `m * theta`, which has `m` modes in `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WrappedFactor {
    order: u32,
    eta: Complex64,
}

impl WrappedFactor {
    pub fn new(order: u32, eta: Complex64) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("wrapped factor order must be >= 1"));
        }
        if !(eta.re.is_finite() && eta.im.is_finite()) {
            return Err(Error::Domain("wrapped factor parameter must be finite"));
        }
        Ok(Self { order, eta })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn eta(&self) -> Complex64 {
        self.eta
    }

    /// Log of the unnormalized factor at `theta`.
    pub fn ln_value(&self, theta: f64) -> f64 {
        let k = self.eta.norm();
        k * (self.order as f64 * theta - self.eta.arg()).cos()
    }
}

/// Finite mixture of von Mises densities with weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct VmMixture {
    components: Vec<(f64, VonMises)>,
}

impl VmMixture {
    /// Builds a mixture, renormalizing the weights.
    pub fn new(components: Vec<(f64, VonMises)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("mixture needs at least one component"));
        }
        if components.iter().any(|(w, _)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain("mixture weights must be finite and nonnegative"));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if !(total > 0.0) {
            return Err(Error::Domain("mixture weights sum to zero"));
        }
        let components = components.into_iter().map(|(w, v)| (w / total, v)).collect();
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, VonMises)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// `E[e^{j m theta}]` under the mixture.
    pub fn char_fn(&self, m: u32) -> Complex64 {
        self.components.iter().map(|(w, v)| v.char_fn(m) * *w).sum()
    }

    /// Circular mean `arg E[e^{j theta}]`; `None` when the resultant vanishes.
    pub fn mean_direction(&self) -> Option<f64> {
        let c = self.char_fn(1);
        (c.norm() > 0.0).then(|| c.arg())
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        self.components.iter().map(|(w, v)| w * v.pdf(theta)).sum()
    }
}

/// Approximates an m-fold wrapped factor by `m` equally weighted von Mises
/// components, one per mode, sharing the concentration that matches the
/// first circular moment: `I_m(k)/I_0(k) = I_1(kappa_m)/I_0(kappa_m)`.
pub fn unwrap_mixture(f: &WrappedFactor) -> Result<VmMixture> {
    let m = f.order;
    let kappa_m = f.eta.norm();
    let mu_m = f.eta.arg();
    let kappa = shared_concentration(m, kappa_m)?;
    let weight = 1.0 / m as f64;
    let components = (0..m)
        .map(|r| {
            let mean = (mu_m + 2.0 * PI * r as f64) / m as f64;
            (weight, VonMises::new_unchecked(mean, kappa))
        })
        .collect();
    Ok(VmMixture { components })
}

fn shared_concentration(m: u32, kappa_m: f64) -> Result<f64> {
    if m == 1 {
        return Ok(kappa_m.min(KAPPA_MAX));
    }
    if !(kappa_m > 0.0) {
        return Ok(0.0);
    }
    if kappa_m >= KAPPA_MAX {
        return Ok(KAPPA_MAX);
    }
    let target = bessel_ratio(1, kappa_m);
    if target >= ratio_uncapped(m, KAPPA_MAX) {
        return Ok(KAPPA_MAX);
    }
    invert_ratio(m, target)
}

#[derive(Clone, Copy)]
struct Candidate {
    zeta: Complex64,
    norm_sqr: f64,
}

/// Keeps `top` sorted by descending `|zeta|` with at most `d` entries; ties
/// keep insertion order.
fn insert_top(top: &mut Vec<Candidate>, c: Candidate, d: usize) {
    let pos = top.partition_point(|t| t.norm_sqr >= c.norm_sqr);
    if pos < d {
        if top.len() == d {
            top.pop();
        }
        top.insert(pos, c);
    }
}

/// Multiplies an optional prior by the unwrapped mixtures of `factors`,
/// keeping the `d` heaviest components after every multiplication.
///
/// Components are tracked by their summed natural parameter `zeta`; the
/// weight of a component is proportional to `I_0(|zeta|)`. Ties keep
/// enumeration order. Factors with zero concentration are constants and are
/// skipped.
pub fn product_reduce(
    prior: Option<&VonMises>,
    factors: &[WrappedFactor],
    d: usize,
) -> Result<VmMixture> {
    if d == 0 {
        return Err(Error::Domain("pruning count must be >= 1"));
    }
    if prior.is_none() && factors.is_empty() {
        return Err(Error::Domain("product of an empty factor list without prior"));
    }
    if factors.windows(2).any(|w| w[0].order > w[1].order) {
        return Err(Error::Domain("factors must be ordered by ascending order m"));
    }

    let start = prior.map_or(Complex64::new(0.0, 0.0), |p| p.natural());
    let mut current = alloc::vec![Candidate { zeta: start, norm_sqr: start.norm_sqr() }];
    let mut next: Vec<Candidate> = Vec::new();
    let mut naturals: Vec<Complex64> = Vec::new();

    for f in factors {
        if f.eta.norm() == 0.0 {
            continue;
        }
        let m = f.order;
        let kappa = shared_concentration(m, f.eta.norm())?;
        let mu_m = f.eta.arg();
        naturals.clear();
        naturals.extend((0..m).map(|r| {
            let mean = (mu_m + 2.0 * PI * r as f64) / m as f64;
            VonMises::new_unchecked(mean, kappa).natural()
        }));
        next.clear();
        for c in &current {
            for nat in &naturals {
                let zeta = c.zeta + nat;
                insert_top(&mut next, Candidate { zeta, norm_sqr: zeta.norm_sqr() }, d);
            }
        }
        core::mem::swap(&mut current, &mut next);
    }

    let log_weights: Vec<f64> = current.iter().map(|c| ln_i0(c.zeta.norm())).collect();
    let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let components = current
        .iter()
        .zip(&log_weights)
        .map(|(c, lw)| ((lw - top).exp(), VonMises::from_natural(c.zeta)))
        .collect();
    VmMixture::new(components)
}

/// Collapses a mixture into one von Mises by Gaussian moment matching.
///
/// Each component is treated as a Gaussian with mean `mu_d` and variance
/// `1/kappa_d`. Means are first expressed relative to the mixture's
/// circular mean so that matching is unaffected by the `+-pi` seam.
pub fn mixture_collapse(mix: &VmMixture) -> Result<VonMises> {
    let comps = mix.components();
    if comps.iter().any(|(_, v)| !(v.kappa() > 0.0)) {
        return Err(Error::Domain("cannot collapse a mixture with a uniform component"));
    }
    if comps.len() == 1 {
        return Ok(comps[0].1);
    }
    let resultant: Complex64 =
        comps.iter().map(|(w, v)| Complex64::from_polar(*w, v.mu())).sum();
    let frame = if resultant.norm() > 1e-12 {
        resultant.arg()
    } else {
        comps
            .iter()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, v)| v.mu())
            .unwrap_or(0.0)
    };

    let mut mean = 0.0;
    let mut second = 0.0;
    for (w, v) in comps {
        let offset = wrap_angle(v.mu() - frame);
        mean += w * offset;
        second += w * (1.0 / v.kappa() + offset * offset);
    }
    let variance = second - mean * mean;
    let kappa = if variance > 0.0 { 1.0 / variance } else { KAPPA_MAX };
    Ok(VonMises::new_unchecked(frame + mean, kappa))
}
