use alloc::vec;
use alloc::vec::Vec;

use super::rng::RepStream;
use crate::covariance::{Correlation, CovarianceSpec};
use crate::error::{domain, Result};

/// `n` iid `N(θ, σ²)` draws.
pub fn sample_iid(n: usize, theta: f64, sigma: f64, stream: &mut RepStream) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(domain("sigma", sigma));
    }
    Ok((0..n).map(|_| theta + sigma * stream.normal()).collect())
}

/// Draws `m` independent groups of `k` values, each group `N_k(θ1, Σ_k)`.
///
/// Equi-correlated groups use the one-factor construction
/// `X_ij = θ + σ(√ρ G_i + √(1−ρ) W_ij)`, valid up to and including `ρ = 1`.
/// A full matrix uses its (semidefinite) Cholesky factor.
#[derive(Debug, Clone)]
pub struct GroupedSampler {
    theta: f64,
    sigma: f64,
    k: usize,
    form: Form,
}

#[derive(Debug, Clone)]
enum Form {
    Factor { shared: f64, own: f64 },
    Cholesky(Vec<f64>),
}

impl GroupedSampler {
    pub fn new(cov: &CovarianceSpec, theta: f64) -> Result<Self> {
        let form = match cov.correlation() {
            Correlation::Equi(rho) => Form::Factor { shared: libm::sqrt(*rho), own: libm::sqrt(1.0 - rho) },
            Correlation::Full(matrix) => Form::Cholesky(matrix.cholesky()?),
        };
        Ok(Self { theta, sigma: cov.sigma(), k: cov.k(), form })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Fills `out` (length `m * k`) with `m` groups laid out contiguously.
    pub fn fill(&self, out: &mut [f64], stream: &mut RepStream) {
        debug_assert_eq!(out.len() % self.k, 0);
        match &self.form {
            Form::Factor { shared, own } => {
                for group in out.chunks_exact_mut(self.k) {
                    let common = shared * stream.normal();
                    for x in group {
                        *x = self.theta + self.sigma * (common + own * stream.normal());
                    }
                }
            }
            Form::Cholesky(l) => {
                let k = self.k;
                let mut w = vec![0.0; k];
                for group in out.chunks_exact_mut(k) {
                    stream.fill_normal(&mut w);
                    for (i, x) in group.iter_mut().enumerate() {
                        let row = &l[i * k..i * k + i + 1];
                        let dot: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
                        *x = self.theta + self.sigma * dot;
                    }
                }
            }
        }
    }

    pub fn sample(&self, m: usize, stream: &mut RepStream) -> Vec<f64> {
        let mut out = vec![0.0; m * self.k];
        self.fill(&mut out, stream);
        out
    }
}

/// `m` groups from `cov`, `m * k` values in group order.
pub fn sample_grouped(m: usize, cov: &CovarianceSpec, theta: f64, stream: &mut RepStream) -> Result<Vec<f64>> {
    Ok(GroupedSampler::new(cov, theta)?.sample(m, stream))
}
