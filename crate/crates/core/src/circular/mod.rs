//! Von Mises numerics: natural-parameter algebra, characteristic
//! functions, unwrapping of m-fold wrapped factors into mixtures,
//! product-with-pruning and moment-matched collapse.

pub mod bessel;
mod mixture;
mod vonmises;

pub use bessel::{bessel_ratio, bessel_ratio_table, invert_ratio, ln_i0, KAPPA_MAX};
pub use mixture::{mixture_collapse, product_reduce, unwrap_mixture, VmMixture, WrappedFactor};
pub use vonmises::{wrap_angle, VonMises};
