//! Gram summary, the support objective, greedy support search and the
//! Gaussian weight posterior.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::{CMatrix, Cholesky};
use crate::model::active_indices;
#[allow(unused_imports)]
use num_traits::Float;

const FLIP_THRESHOLD: f64 = 1e-10;
const JITTER: f64 = 1e-10;

/// `J` and `h` built from the expected steering vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSummary {
    pub j: CMatrix,
    pub h: Vec<Complex64>,
}

impl GramSummary {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `J[l][l'] = a_l^H a_l'` off the diagonal, `J[l][l] = M`, `h[l] = a_l^H y`.
pub fn gram(a_hats: &[Vec<Complex64>], y: &[Complex64]) -> GramSummary {
    let l = a_hats.len();
    let m = y.len() as f64;
    let mut j = CMatrix::zeros(l);
    for r in 0..l {
        j[(r, r)] = Complex64::new(m, 0.0);
        for c in r + 1..l {
            let v = inner(&a_hats[r], &a_hats[c]);
            j[(r, c)] = v;
            j[(c, r)] = v.conj();
        }
    }
    let h = a_hats.iter().map(|a| inner(a, y)).collect();
    GramSummary { j, h }
}

/// Factorizes `J_S + (nu/tau) I`, adding diagonal jitter when it is not
/// numerically positive definite. The flag reports whether jitter was used.
fn factor_precision(gram: &GramSummary, idx: &[usize], nu: f64, tau: f64) -> (Cholesky, bool) {
    let mut p = gram.j.select(idx);
    let ratio = nu / tau;
    for i in 0..idx.len() {
        p[(i, i)] += ratio;
    }
    if let Some(ch) = Cholesky::new(&p) {
        return (ch, false);
    }
    let mut jitter = JITTER * nu;
    loop {
        let mut q = p.clone();
        for i in 0..idx.len() {
            q[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(&q) {
            return (ch, true);
        }
        jitter *= 10.0;
    }
}

pub(crate) fn logit(rho: f64) -> f64 {
    (rho / (1.0 - rho)).ln()
}

pub(crate) fn objective_flagged(
    s: &[bool],
    gram: &GramSummary,
    nu: f64,
    tau: f64,
    rhos: &[f64],
) -> (f64, bool) {
    let idx = active_indices(s);
    if idx.is_empty() {
        return (0.0, false);
    }
    let n = idx.len() as f64;
    let (ch, jittered) = factor_precision(gram, &idx, nu, tau);
    let h_s: Vec<Complex64> = idx.iter().map(|&i| gram.h[i]).collect();
    let w = ch.solve(&h_s);
    let fit = inner(&h_s, &w).re / nu;
    let prior: f64 = idx.iter().map(|&i| logit(rhos[i])).sum();
    (n * nu.ln() - ch.ln_det() - n * tau.ln() + fit + prior, jittered)
}

/// Log evidence of the support `s` relative to the empty support.
pub fn support_objective(s: &[bool], gram: &GramSummary, nu: f64, tau: f64, rhos: &[f64]) -> f64 {
    objective_flagged(s, gram, nu, tau, rhos).0
}

/// Applies the best strictly improving single flip until none is left.
/// Returns the support and whether any evaluation needed jitter.
pub(crate) fn greedy_flagged(
    s_start: &[bool],
    gram: &GramSummary,
    nu: f64,
    tau: f64,
    rhos: &[f64],
) -> (Vec<bool>, bool) {
    let mut s = s_start.to_vec();
    let (mut current, mut jittered) = objective_flagged(&s, gram, nu, tau, rhos);
    loop {
        let mut best: Option<(usize, f64)> = None;
        for l in 0..s.len() {
            s[l] = !s[l];
            let (value, j) = objective_flagged(&s, gram, nu, tau, rhos);
            s[l] = !s[l];
            jittered |= j;
            let gain = value - current;
            if gain > FLIP_THRESHOLD && best.map_or(true, |(_, b)| value > b) {
                best = Some((l, value));
            }
        }
        match best {
            Some((l, value)) => {
                debug_assert!(value > current);
                s[l] = !s[l];
                current = value;
            }
            None => return (s, jittered),
        }
    }
}

pub fn greedy_support(s_start: &[bool], gram: &GramSummary, nu: f64, tau: f64, rhos: &[f64]) -> Vec<bool> {
    greedy_flagged(s_start, gram, nu, tau, rhos).0
}

/// Posterior mean and covariance of the weights on the active set.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightPosterior {
    pub w_hat: Vec<Complex64>,
    pub c_hat: CMatrix,
    pub jittered: bool,
}

/// `C = nu (J_S + (nu/tau) I)^{-1}` and `w = C h_S / nu`.
pub fn weight_posterior(s: &[bool], gram: &GramSummary, nu: f64, tau: f64) -> WeightPosterior {
    let idx = active_indices(s);
    weight_posterior_on(&idx, gram, nu, tau)
}

pub(crate) fn weight_posterior_on(idx: &[usize], gram: &GramSummary, nu: f64, tau: f64) -> WeightPosterior {
    if idx.is_empty() {
        return WeightPosterior { w_hat: Vec::new(), c_hat: CMatrix::zeros(0), jittered: false };
    }
    let (ch, jittered) = factor_precision(gram, idx, nu, tau);
    let h_s: Vec<Complex64> = idx.iter().map(|&i| gram.h[i]).collect();
    let w_hat = ch.solve(&h_s);
    let mut c_hat = ch.inverse();
    for i in 0..idx.len() {
        for k in 0..idx.len() {
            c_hat[(i, k)] *= nu;
        }
    }
    WeightPosterior { w_hat, c_hat, jittered }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::steering;
    use alloc::vec;
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Complex64> {
        (0..n).map(|_| c(rng.random_range(-scale..scale), rng.random_range(-scale..scale))).collect()
    }

    // Expected steering vectors with moderate spread: unit phasors shrunk
    // by a per-element factor, as a von Mises expectation would.
    fn random_ahats(rng: &mut ChaCha8Rng, l: usize, m: usize) -> Vec<Vec<Complex64>> {
        (0..l)
            .map(|_| {
                let theta = rng.random_range(-PI..PI);
                let shrink = rng.random_range(0.6..1.0f64);
                steering(theta, m)
                    .into_iter()
                    .enumerate()
                    .map(|(k, v)| if k == 0 { v } else { v * shrink.powi(k as i32) })
                    .collect()
            })
            .collect()
    }

    // Plain Gauss-Jordan elimination with partial pivoting.
    fn solve_dense(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
        let n = b.len();
        let mut aug: Vec<Vec<Complex64>> =
            (0..n).map(|i| a[i].iter().cloned().chain(core::iter::once(b[i])).collect()).collect();
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| aug[x][col].norm().total_cmp(&aug[y][col].norm())).unwrap();
            aug.swap(col, piv);
            let p = aug[col][col];
            for v in aug[col].iter_mut() {
                *v /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = aug[r][col];
                    let row = aug[col].clone();
                    for (x, y) in aug[r].iter_mut().zip(row) {
                        *x -= f * y;
                    }
                }
            }
        }
        aug.iter().map(|r| r[n]).collect()
    }

    #[test]
    fn gram_examples() {
        let y = [c(1.0, 0.0), c(2.0, -1.0), c(0.5, 0.5)];
        let a = vec![steering(0.0, 3); 4];
        let g = gram(&a, &y);
        for r in 0..4 {
            assert_eq!(g.h[r], c(3.5, -0.5));
            for k in 0..4 {
                assert_eq!(g.j[(r, k)], c(3.0, 0.0));
            }
        }
        let orth = vec![steering(0.0, 4), steering(PI / 2.0, 4), steering(PI, 4)];
        let g = gram(&orth, &[c(0.0, 0.0); 4]);
        for r in 0..3 {
            for k in 0..3 {
                if r != k {
                    assert!(g.j[(r, k)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn gram_matches_naive_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_ahats(&mut rng, 5, 7);
        let y = random_vec(&mut rng, 7, 2.0);
        let g = gram(&a, &y);
        for r in 0..5 {
            let mut h = c(0.0, 0.0);
            for k in 0..7 {
                h += a[r][k].conj() * y[k];
            }
            assert_eq!(g.h[r], h);
            for q in 0..5 {
                let mut v = c(0.0, 0.0);
                for k in 0..7 {
                    v += a[r][k].conj() * a[q][k];
                }
                let want = if r == q { c(7.0, 0.0) } else { v };
                assert_eq!(g.j[(r, q)], want);
            }
        }
        assert_eq!(g.j.hermitian_defect(), 0.0);
    }

    #[test]
    fn empty_support_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = gram(&random_ahats(&mut rng, 3, 5), &random_vec(&mut rng, 5, 1.0));
        assert_eq!(support_objective(&[false; 3], &g, 0.3, 2.0, &[0.5; 3]), 0.0);
    }

    // ln of the integral of exp(-(1/nu) E||y - A w||^2) CN(w; 0, tau I) over
    // w, minus the same quantity at w = 0, by a tensor trapezoid rule in the
    // real coordinates of w.
    fn gaussian_integral_oracle(g: &GramSummary, idx: &[usize], nu: f64, tau: f64) -> f64 {
        let n = idx.len();
        let dims = 2 * n;
        let pts = 41usize;
        let half = 4.0;
        let step = 2.0 * half / (pts - 1) as f64;
        let total = pts.pow(dims as u32);
        let mut sum = 0.0;
        let mut coord = vec![0usize; dims];
        for _ in 0..total {
            let w: Vec<Complex64> = (0..n)
                .map(|i| c(-half + step * coord[2 * i] as f64, -half + step * coord[2 * i + 1] as f64))
                .collect();
            let mut quad = 0.0;
            for a in 0..n {
                for b in 0..n {
                    quad += (w[a].conj() * g.j[(idx[a], idx[b])] * w[b]).re;
                }
            }
            let lin: f64 = (0..n).map(|a| (w[a].conj() * g.h[idx[a]]).re).sum();
            let norm2: f64 = w.iter().map(|v| v.norm_sqr()).sum();
            let expo = -(quad - 2.0 * lin) / nu - norm2 / tau;
            let weight: f64 = coord.iter().map(|&k| if k == 0 || k == pts - 1 { 0.5 } else { 1.0 }).product();
            sum += weight * expo.exp();
            for d in 0..dims {
                coord[d] += 1;
                if coord[d] < pts {
                    break;
                }
                coord[d] = 0;
            }
        }
        let integral = sum * step.powi(dims as i32) / (PI * tau).powi(n as i32);
        integral.ln()
    }

    #[test]
    fn objective_matches_gaussian_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_ahats(&mut rng, 2, 4);
        let y = random_vec(&mut rng, 4, 1.0);
        let g = gram(&a, &y);
        let (nu, tau) = (1.3, 0.8);
        let rhos = [0.3, 0.6];
        for s in [[true, false], [false, true], [true, true]] {
            let idx = active_indices(&s);
            let prior: f64 = idx.iter().map(|&i| logit(rhos[i])).sum();
            let want = gaussian_integral_oracle(&g, &idx, nu, tau) + prior;
            let got = support_objective(&s, &g, nu, tau, &rhos);
            assert!((got - want).abs() < 1e-4, "s={s:?} got={got} want={want}");
        }
    }

    #[test]
    fn scalar_objective_formula() {
        let a = vec![steering(0.4, 5)];
        let y: Vec<Complex64> = steering(0.4, 5).iter().map(|v| v * c(1.0, 2.0)).collect();
        let g = gram(&a, &y);
        let (nu, tau, rho): (f64, f64, f64) = (0.5, 3.0, 0.2);
        let m = 5.0;
        let h2 = g.h[0].norm_sqr();
        let want = (nu * tau / (m * tau + nu)).ln() - tau.ln() + h2 * tau / (nu * (m * tau + nu)) + logit(rho);
        assert!((support_objective(&[true], &g, nu, tau, &[rho]) - want).abs() < 1e-12);
    }

    fn exhaustive_best(g: &GramSummary, nu: f64, tau: f64, rhos: &[f64]) -> f64 {
        let l = g.len();
        (0..1u32 << l)
            .map(|mask| {
                let s: Vec<bool> = (0..l).map(|i| mask >> i & 1 == 1).collect();
                support_objective(&s, g, nu, tau, rhos)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn greedy_reaches_exhaustive_optimum_on_separated_sources() {
        let m = 15;
        let thetas = [-2.0, -1.0, 0.0, 1.0, 2.0, 2.8];
        let a: Vec<Vec<Complex64>> = thetas.iter().map(|t| steering(*t, m)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = random_vec(&mut rng, m, 0.1);
        let y: Vec<Complex64> = (0..m)
            .map(|k| a[1][k] * c(2.0, 0.0) + a[3][k] * c(0.0, -1.5) + a[5][k] * c(1.0, 1.0) + noise[k])
            .collect();
        let g = gram(&a, &y);
        let rhos = [0.5; 6];
        let s = greedy_support(&[false; 6], &g, 0.02, 2.0, &rhos);
        assert_eq!(s, vec![false, true, false, true, false, true]);
        let best = exhaustive_best(&g, 0.02, 2.0, &rhos);
        assert!((support_objective(&s, &g, 0.02, 2.0, &rhos) - best).abs() < 1e-9);
    }

    #[test]
    fn greedy_activates_two_orthogonal_sources() {
        let a = vec![steering(0.0, 4), steering(PI / 2.0, 4)];
        let y: Vec<Complex64> = (0..4).map(|k| a[0][k] * 3.0 + a[1][k] * c(0.0, 2.0)).collect();
        let g = gram(&a, &y);
        let rhos = [0.5, 0.5];
        let states = [[false, false], [true, false], [false, true], [true, true]];
        let best = states
            .iter()
            .max_by(|p, q| {
                support_objective(*p, &g, 0.1, 4.0, &rhos).total_cmp(&support_objective(*q, &g, 0.1, 4.0, &rhos))
            })
            .unwrap();
        assert_eq!(best, &[true, true]);
        assert_eq!(greedy_support(&[false, false], &g, 0.1, 4.0, &rhos), vec![true, true]);
        assert_eq!(greedy_support(&[true, true], &g, 0.1, 4.0, &rhos), vec![true, true]);
    }

    #[test]
    fn scalar_weight_posterior() {
        let a = vec![steering(1.1, 6)];
        let y: Vec<Complex64> = steering(0.3, 6).iter().map(|v| v * c(0.7, -0.2)).collect();
        let g = gram(&a, &y);
        let (nu, tau) = (0.4, 2.5);
        let post = weight_posterior(&[true], &g, nu, tau);
        let want = g.h[0] * tau / (6.0 * tau + nu);
        assert!((post.w_hat[0] - want).norm() < 1e-14);
        assert!((post.c_hat[(0, 0)].re - nu * tau / (6.0 * tau + nu)).abs() < 1e-14);
    }

    #[test]
    fn weight_posterior_least_squares_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_ahats(&mut rng, 3, 8);
        let y = random_vec(&mut rng, 8, 1.0);
        let g = gram(&a, &y);
        let post = weight_posterior(&[true; 3], &g, 0.5, 1e12);
        let rows: Vec<Vec<Complex64>> = (0..3).map(|r| (0..3).map(|q| g.j[(r, q)]).collect()).collect();
        let ls = solve_dense(&rows, &g.h);
        for (u, v) in post.w_hat.iter().zip(&ls) {
            assert!((u - v).norm() < 1e-9);
        }
    }

    #[test]
    fn weight_posterior_matches_direct_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_ahats(&mut rng, 5, 9);
        let y = random_vec(&mut rng, 9, 1.5);
        let g = gram(&a, &y);
        let s = [true, false, true, true, false];
        let idx = [0, 2, 3];
        let (nu, tau) = (0.7, 1.9);
        let post = weight_posterior(&s, &g, nu, tau);
        let p: Vec<Vec<Complex64>> = idx
            .iter()
            .map(|&r| idx.iter().map(|&q| g.j[(r, q)] + if r == q { c(nu / tau, 0.0) } else { c(0.0, 0.0) }).collect())
            .collect();
        for col in 0..3 {
            let e: Vec<Complex64> = (0..3).map(|i| c(if i == col { nu } else { 0.0 }, 0.0)).collect();
            let want = solve_dense(&p, &e);
            for row in 0..3 {
                assert!((post.c_hat[(row, col)] - want[row]).norm() < 1e-10);
            }
        }
        let h_s: Vec<Complex64> = idx.iter().map(|&i| g.h[i]).collect();
        let want = solve_dense(&p, &h_s);
        for (u, v) in post.w_hat.iter().zip(&want) {
            assert!((u - v).norm() < 1e-10);
        }
        assert!(post.c_hat.hermitian_defect() < 1e-15);
        assert!(!post.jittered);
    }

    #[test]
    fn duplicate_beliefs_trigger_jitter() {
        let a = vec![steering(0.2, 4); 2];
        let mut g = gram(&a, &steering(0.2, 4));
        g.j[(0, 1)] = c(4.0, 0.0);
        g.j[(1, 0)] = c(4.0, 0.0);
        let post = weight_posterior(&[true, true], &g, 1e-30, 1e30);
        assert!(post.jittered);
        assert!(post.w_hat.iter().all(|v| v.re.is_finite()));
    }

    proptest! {
        #[test]
        fn greedy_returns_local_maximum(seed in 0u64..500, l in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_ahats(&mut rng, l, 8);
            let y = random_vec(&mut rng, 8, 2.0);
            let g = gram(&a, &y);
            let nu = rng.random_range(0.05..2.0);
            let tau = rng.random_range(0.2..5.0);
            let rhos: Vec<f64> = (0..l).map(|_| rng.random_range(0.05..0.95)).collect();
            let start: Vec<bool> = (0..l).map(|_| rng.random_bool(0.3)).collect();
            let s = greedy_support(&start, &g, nu, tau, &rhos);
            let o = support_objective(&s, &g, nu, tau, &rhos);
            prop_assert!(o >= support_objective(&start, &g, nu, tau, &rhos));
            let mut t = s.clone();
            for i in 0..l {
                t[i] = !t[i];
                prop_assert!(support_objective(&t, &g, nu, tau, &rhos) <= o + FLIP_THRESHOLD);
                t[i] = !t[i];
            }
        }

        #[test]
        fn larger_noise_never_grows_support(seed in 0u64..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = 6;
            let a = random_ahats(&mut rng, l, 10);
            let y = random_vec(&mut rng, 10, 2.0);
            let g = gram(&a, &y);
            let tau = rng.random_range(0.5..3.0);
            let rhos = vec![0.4; l];
            let mut last = usize::MAX;
            for k in 0..12 {
                let nu = 0.01 * 2f64.powi(k);
                let n = greedy_support(&vec![false; l], &g, nu, tau, &rhos).iter().filter(|v| **v).count();
                prop_assert!(n <= last);
                last = n;
            }
        }

        #[test]
        fn covariance_is_hermitian_pd(seed in 0u64..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_ahats(&mut rng, 4, 6);
            let g = gram(&a, &random_vec(&mut rng, 6, 1.0));
            let post = weight_posterior(&[true; 4], &g, rng.random_range(0.01..2.0), rng.random_range(0.1..4.0));
            prop_assert!(post.c_hat.hermitian_defect() < 1e-12);
            prop_assert!(Cholesky::new(&post.c_hat).is_some());
        }
    }
}
