//! Within-group covariance `Σ_k = σ² R` and the quantity `Δ = 1ᵀ Σ_k 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};

/// Row-major symmetric `k × k` correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    k: usize,
    entries: Vec<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl CorrelationMatrix {
    pub fn new(k: usize, entries: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Correlation("empty matrix"));
        }
        if entries.len() != k * k {
            return Err(Error::Correlation("entry count is not k*k"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Correlation("non-finite entry"));
        }
        for i in 0..k {
            if (entries[i * k + i] - 1.0).abs() > SYMMETRY_TOL {
                return Err(Error::Correlation("diagonal must be 1"));
            }
            for j in 0..i {
                let (a, b) = (entries[i * k + j], entries[j * k + i]);
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::Correlation("not symmetric"));
                }
                if !(-1.0..=1.0).contains(&a) {
                    return Err(Error::Correlation("entry outside [-1, 1]"));
                }
            }
        }
        let matrix = Self { k, entries };
        matrix.cholesky()?;
        Ok(matrix)
    }

    /// Equi-correlation matrix with off-diagonal `rho`.
    pub fn equi(k: usize, rho: f64) -> Result<Self> {
        let mut entries = vec![rho; k * k];
        for i in 0..k {
            entries[i * k + i] = 1.0;
        }
        Self::new(k, entries)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Lower-triangular `L` with `L Lᵀ = R`, row-major.
    ///
    /// Semidefinite matrices are accepted: a pivot within tolerance of zero
    /// gives a zero column, provided the rest of that column also vanishes.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let k = self.k;
        let tol = 1e-10 * k as f64;
        let mut l = vec![0.0; k * k];
        for j in 0..k {
            let mut pivot = self.get(j, j);
            for p in 0..j {
                pivot -= l[j * k + p] * l[j * k + p];
            }
            if pivot < -tol {
                return Err(Error::NotPsd { index: j, pivot });
            }
            if pivot <= tol {
                for i in j + 1..k {
                    let mut r = self.get(i, j);
                    for p in 0..j {
                        r -= l[i * k + p] * l[j * k + p];
                    }
                    if r.abs() > libm::sqrt(tol) {
                        return Err(Error::NotPsd { index: j, pivot });
                    }
                }
                continue;
            }
            let diag = libm::sqrt(pivot);
            l[j * k + j] = diag;
            for i in j + 1..k {
                let mut r = self.get(i, j);
                for p in 0..j {
                    r -= l[i * k + p] * l[j * k + p];
                }
                l[i * k + j] = r / diag;
            }
        }
        Ok(l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Correlation {
    /// Every off-diagonal correlation equals `rho ∈ [0, 1]`.
    Equi(f64),
    Full(CorrelationMatrix),
}

/// `Σ_k = σ² R` for groups of size `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpec {
    sigma_sq: f64,
    k: usize,
    correlation: Correlation,
}

impl CovarianceSpec {
    pub fn equi(sigma_sq: f64, k: usize, rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(domain("equi-correlation rho", rho));
        }
        Self::build(sigma_sq, k, Correlation::Equi(rho))
    }

    /// Independent observations, `R = I`.
    pub fn iid(sigma_sq: f64, k: usize) -> Result<Self> {
        Self::equi(sigma_sq, k, 0.0)
    }

    pub fn full(sigma_sq: f64, matrix: CorrelationMatrix) -> Result<Self> {
        let k = matrix.k();
        Self::build(sigma_sq, k, Correlation::Full(matrix))
    }

    fn build(sigma_sq: f64, k: usize, correlation: Correlation) -> Result<Self> {
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(domain("sigma squared", sigma_sq));
        }
        if k == 0 {
            return Err(domain("group size k", 0.0));
        }
        let spec = Self { sigma_sq, k, correlation };
        let delta = spec.delta();
        if !(delta > 0.0) {
            return Err(domain("delta (sum of covariance entries)", delta));
        }
        Ok(spec)
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn sigma(&self) -> f64 {
        libm::sqrt(self.sigma_sq)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn correlation(&self) -> &Correlation {
        &self.correlation
    }

    /// Equi-correlation coefficient, if that is how the spec was built.
    pub fn rho(&self) -> Option<f64> {
        match self.correlation {
            Correlation::Equi(rho) => Some(rho),
            Correlation::Full(_) => None,
        }
    }

    pub fn is_independent(&self) -> bool {
        match &self.correlation {
            Correlation::Equi(rho) => *rho == 0.0,
            Correlation::Full(m) => {
                (0..m.k()).all(|i| (0..m.k()).all(|j| i == j || m.get(i, j) == 0.0))
            }
        }
    }

    /// `Δ = σ² (k + Σ_{i≠j} ρ_ij)`, the sum of all entries of `Σ_k`.
    pub fn delta(&self) -> f64 {
        self.sigma_sq * self.correlation_sum()
    }

    /// `Δ / σ²`, the sum of all correlation entries.
    pub fn correlation_sum(&self) -> f64 {
        let k = self.k as f64;
        match &self.correlation {
            Correlation::Equi(rho) => k + k * (k - 1.0) * rho,
            Correlation::Full(m) => m.sum(),
        }
    }

    /// Same correlation structure with a different variance.
    pub fn with_sigma_sq(&self, sigma_sq: f64) -> Result<Self> {
        Self::build(sigma_sq, self.k, self.correlation.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_examples() {
        assert_eq!(CovarianceSpec::equi(1.0, 5, 0.5).unwrap().delta(), 15.0);
        assert_eq!(CovarianceSpec::equi(2.0, 10, 1.0).unwrap().delta(), 200.0);
        assert_eq!(CovarianceSpec::iid(3.0, 4).unwrap().delta(), 12.0);
        let m = CorrelationMatrix::equi(5, 0.5).unwrap();
        assert_eq!(CovarianceSpec::full(1.0, m).unwrap().delta(), 15.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(CovarianceSpec::equi(1.0, 3, 1.2).is_err());
        assert!(CovarianceSpec::equi(1.0, 3, -0.1).is_err());
        assert!(CovarianceSpec::equi(0.0, 3, 0.1).is_err());
        assert!(CovarianceSpec::equi(1.0, 0, 0.1).is_err());
        assert!(CorrelationMatrix::new(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(CorrelationMatrix::new(2, vec![0.9, 0.5, 0.5, 1.0]).is_err());
        assert!(CorrelationMatrix::new(2, vec![1.0, 0.5, 0.5]).is_err());
        // Pairwise fine, jointly impossible.
        let bad = CorrelationMatrix::new(3, vec![1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]);
        assert!(matches!(bad, Err(Error::NotPsd { .. })));
    }

    #[test]
    fn cholesky_reproduces_matrix() {
        let m = CorrelationMatrix::new(3, vec![1.0, 0.3, 0.1, 0.3, 1.0, 0.6, 0.1, 0.6, 1.0]).unwrap();
        let l = m.cholesky().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|p| l[i * 3 + p] * l[j * 3 + p]).sum();
                assert!((v - m.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rank_one_boundary_is_accepted() {
        let m = CorrelationMatrix::equi(4, 1.0).unwrap();
        let l = m.cholesky().unwrap();
        for i in 0..4 {
            assert!((l[i * 4] - 1.0).abs() < 1e-15);
            for j in 1..4 {
                assert_eq!(l[i * 4 + j], 0.0);
            }
        }
    }
}
