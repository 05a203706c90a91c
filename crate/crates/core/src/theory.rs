//! Closed-form expected lengths, asymptotic coverage of the n-case interval
//! under within-group correlation, and the quantities used to compare
//! t quantiles across degrees of freedom.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::covariance::CovarianceSpec;
use crate::error::{domain, Error, Result};
use crate::special::{lgamma, normal_quantile, t_pdf, t_quantile, t_sf, DegreesOfFreedom, Probability};

fn check_m(m: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::InsufficientData { needed: 2, got: m as usize });
    }
    Ok(())
}

/// `ln(Γ(m/2) / Γ((m-1)/2))`.
fn ln_half_gamma_ratio(m: u64) -> f64 {
    let m = m as f64;
    lgamma(0.5 * m) - lgamma(0.5 * (m - 1.0))
}

/// `t_{m-1,1-α/2} · Γ(m/2) / (√(m-1) · Γ((m-1)/2))`, the `m`-dependent
/// factor of the expected m-case length. Strictly decreasing in `m`.
pub fn g_factor(m: u64, alpha: Probability) -> Result<f64> {
    check_m(m)?;
    let df = DegreesOfFreedom::new(m - 1)?;
    let t = t_quantile(alpha.upper_two_sided(), df);
    Ok(t * libm::exp(ln_half_gamma_ratio(m)) / libm::sqrt((m - 1) as f64))
}

/// `E I_m` for `n` iid `N(θ, σ²)` observations split into `m` groups.
/// With `m = n` this is `E I_n`.
pub fn expected_length_iid(n: u64, m: u64, alpha: Probability, sigma: f64) -> Result<f64> {
    check_m(m)?;
    if n % m != 0 {
        return Err(Error::Partition { n: n as usize, m: m as usize });
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(domain("sigma", sigma));
    }
    let unit = 2.0 * SQRT_2 / libm::sqrt(n as f64) * g_factor(m, alpha)?;
    Ok(sigma * unit)
}

/// `E I_m^g` for `m` independent groups with within-group covariance `cov`.
pub fn expected_length_grouped(m: u64, cov: &CovarianceSpec, alpha: Probability) -> Result<f64> {
    check_m(m)?;
    let df = DegreesOfFreedom::new(m - 1)?;
    let t = t_quantile(alpha.upper_two_sided(), df);
    let mf = m as f64;
    let group_mean_sd = libm::sqrt(cov.delta()) / cov.k() as f64;
    Ok(2.0 * SQRT_2 / libm::sqrt(mf * (mf - 1.0)) * group_mean_sd * t * libm::exp(ln_half_gamma_ratio(m)))
}

/// Exact finite-sample `E S_n²` for `m` groups drawn from `cov`:
/// `σ² (m k² − Δ/σ²) / ((n − 1) k)`.
pub fn expected_sn_sq(m: u64, k: u64, cov: &CovarianceSpec) -> Result<f64> {
    check_m(m)?;
    if k as usize != cov.k() {
        return Err(Error::Config("group size does not match the covariance spec"));
    }
    let (mf, kf) = (m as f64, k as f64);
    let n = mf * kf;
    Ok(cov.sigma_sq() * (mf * kf * kf - cov.correlation_sum()) / ((n - 1.0) * kf))
}

/// `2Φ(x) − 1` without cancellation for large `x`.
fn two_sided_mass(x: f64) -> f64 {
    1.0 - libm::erfc(x * FRAC_1_SQRT_2)
}

/// Large-sample coverage of the n-case interval, `2Φ(z_{1-α/2} · s_n / (s_m √k)) − 1`.
///
/// Pass realized `(S_n, S_m)` or their probability limits `(σ, √Δ / k)`.
pub fn coverage_limit_plugin(s_n: f64, s_m: f64, k: u64, alpha: Probability) -> Result<f64> {
    if !(s_n > 0.0) {
        return Err(domain("s_n", s_n));
    }
    if !(s_m > 0.0) {
        return Err(domain("s_m", s_m));
    }
    if k == 0 {
        return Err(domain("group size k", 0.0));
    }
    let z = normal_quantile(alpha.upper_two_sided());
    Ok(two_sided_mass(z * s_n / (s_m * libm::sqrt(k as f64))))
}

/// [`coverage_limit_plugin`] at the equi-correlation limits:
/// `2Φ(z_{1-α/2} / √(1 + (k−1)ρ)) − 1`.
pub fn coverage_limit_equicorr(k: u64, rho: f64, alpha: Probability) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(domain("equi-correlation rho", rho));
    }
    if k == 0 {
        return Err(domain("group size k", 0.0));
    }
    let z = normal_quantile(alpha.upper_two_sided());
    Ok(two_sided_mass(z / libm::sqrt(1.0 + (k as f64 - 1.0) * rho)))
}

/// Limiting n-case coverage for an arbitrary covariance spec, using the
/// plug-in limits `S_n → σ`, `S_m → √Δ / k`.
pub fn coverage_limit(cov: &CovarianceSpec, alpha: Probability) -> Result<f64> {
    match cov.rho() {
        Some(rho) => coverage_limit_equicorr(cov.k() as u64, rho, alpha),
        None => coverage_limit_plugin(cov.sigma(), libm::sqrt(cov.delta()) / cov.k() as f64, cov.k() as u64, alpha),
    }
}

fn ln_ratio_bound(d1: f64, d2: f64) -> f64 {
    0.5 * (libm::log(d1) - libm::log(d2)) + lgamma(0.5 * d1) + lgamma(0.5 * (d2 + 1.0))
        - lgamma(0.5 * d2)
        - lgamma(0.5 * (d1 + 1.0))
}

/// `√d₁ Γ(d₁/2) Γ((d₂+1)/2) / (√d₂ Γ(d₂/2) Γ((d₁+1)/2))`.
///
/// For `d₁ < d₂` the ratio `t_{d₁,1-α/2} / t_{d₂,1-α/2}` exceeds this for
/// every α. `d₁ = d₂` is allowed and gives 1.
pub fn lemma_ratio_bound(d1: DegreesOfFreedom, d2: DegreesOfFreedom) -> Result<f64> {
    if d1 > d2 {
        return Err(domain("d1 (must not exceed d2)", d1.get() as f64));
    }
    Ok(libm::exp(ln_ratio_bound(d1.get() as f64, d2.get() as f64)))
}

/// Degrees of freedom `d₁, d₂` and a scale `λ` relating `t_{d₁}` to `λ t_{d₂}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaPair {
    d1: DegreesOfFreedom,
    d2: DegreesOfFreedom,
    lambda: f64,
}

impl LemmaPair {
    /// `d₁ < d₂` and `λ > 1`.
    pub fn new(d1: DegreesOfFreedom, d2: DegreesOfFreedom, lambda: f64) -> Result<Self> {
        if d1 >= d2 {
            return Err(domain("d1 (must be below d2)", d1.get() as f64));
        }
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(domain("lambda (must exceed 1)", lambda));
        }
        Ok(Self { d1, d2, lambda })
    }

    /// Any positive `λ` and any ordering; for evaluating `h_λ`, `H_λ` and
    /// `r_λ` outside the hypotheses.
    pub fn unrestricted(d1: DegreesOfFreedom, d2: DegreesOfFreedom, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain("lambda", lambda));
        }
        Ok(Self { d1, d2, lambda })
    }

    pub fn d1(&self) -> DegreesOfFreedom {
        self.d1
    }

    pub fn d2(&self) -> DegreesOfFreedom {
        self.d2
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn dfs(&self) -> (f64, f64) {
        (self.d1.get() as f64, self.d2.get() as f64)
    }
}

/// `h_λ(x) = p_{d₁}(x) − p_{d₂}(x/λ)/λ`, the integrand of `H_λ`.
pub fn h_lambda(x: f64, pair: &LemmaPair) -> f64 {
    t_pdf(x, pair.d1) - t_pdf(x / pair.lambda, pair.d2) / pair.lambda
}

/// `H_λ(x) = P(t_{d₁} ≤ x) − P(t_{d₂} ≤ x/λ)`, evaluated as a difference of
/// upper tails so it stays accurate for large `x`.
pub fn big_h_lambda(x: f64, pair: &LemmaPair) -> f64 {
    t_sf(x / pair.lambda, pair.d2) - t_sf(x, pair.d1)
}

/// `C_λ = r_λ(0) = λ / lemma_ratio_bound(d₁, d₂)`.
pub fn c_lambda(pair: &LemmaPair) -> f64 {
    let (d1, d2) = pair.dfs();
    pair.lambda * libm::exp(-ln_ratio_bound(d1, d2))
}

/// `ln r_λ(x)` where `r_λ(x) = p_{d₁}(x) / (p_{d₂}(x/λ)/λ)`.
pub fn log_r_lambda(x: f64, pair: &LemmaPair) -> f64 {
    let (d1, d2) = pair.dfs();
    let l2 = pair.lambda * pair.lambda;
    libm::log(c_lambda(pair)) + 0.5 * (d2 + 1.0) * libm::log1p(x * x / (l2 * d2))
        - 0.5 * (d1 + 1.0) * libm::log1p(x * x / d1)
}

/// The density ratio `r_λ(x)`; `h_λ(x) < 0` exactly where `r_λ(x) < 1`.
pub fn r_lambda(x: f64, pair: &LemmaPair) -> f64 {
    libm::exp(log_r_lambda(x, pair))
}

/// The unique stationary point of `r_λ` on `x > 0`, where it turns from
/// decreasing to increasing.
pub fn critical_x0(pair: &LemmaPair) -> Result<f64> {
    if pair.d1 >= pair.d2 {
        return Err(domain("d1 (must be below d2)", pair.d1.get() as f64));
    }
    if !(pair.lambda > 1.0) {
        return Err(domain("lambda (must exceed 1)", pair.lambda));
    }
    let (d1, d2) = pair.dfs();
    let l2 = pair.lambda * pair.lambda;
    Ok(libm::sqrt(((l2 - 1.0) * d1 * d2 + l2 * d2 - d1) / (d2 - d1)))
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (libm::log(lo), libm::log(hi));
            (0..n).map(|i| libm::exp(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
        }
    }
}

/// A step where `g_factor(m + 1) >= g_factor(m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneViolation {
    pub m: u64,
    pub alpha: f64,
    pub g_m: f64,
    pub g_next: f64,
}

/// Checks `g_factor(m) > g_factor(m + 1)` for `m = 2 .. m_max - 1`.
pub fn check_g_monotone(m_max: u64, alphas: &[Probability]) -> Result<Vec<MonotoneViolation>> {
    let mut out = Vec::new();
    for &alpha in alphas {
        let mut prev = g_factor(2, alpha)?;
        for m in 3..=m_max {
            let g = g_factor(m, alpha)?;
            if !(g < prev) {
                out.push(MonotoneViolation { m: m - 1, alpha: alpha.get(), g_m: prev, g_next: g });
            }
            prev = g;
        }
    }
    Ok(out)
}

/// One evaluation of the quantile-ratio inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileRatioCheck {
    pub d1: u64,
    pub d2: u64,
    pub alpha: f64,
    pub ratio: f64,
    pub bound: f64,
}

impl QuantileRatioCheck {
    pub fn holds(&self) -> bool {
        self.ratio > self.bound
    }
}

/// `t_{d₁,1-α/2} / t_{d₂,1-α/2}` against [`lemma_ratio_bound`] on a grid.
pub fn check_quantile_ratio(
    pairs: &[(DegreesOfFreedom, DegreesOfFreedom)],
    alphas: &[Probability],
) -> Result<Vec<QuantileRatioCheck>> {
    let mut out = Vec::with_capacity(pairs.len() * alphas.len());
    for &(d1, d2) in pairs {
        if d1 >= d2 {
            return Err(domain("d1 (must be below d2)", d1.get() as f64));
        }
        let bound = lemma_ratio_bound(d1, d2)?;
        for &alpha in alphas {
            let q = alpha.upper_two_sided();
            let ratio = t_quantile(q, d1) / t_quantile(q, d2);
            out.push(QuantileRatioCheck { d1: d1.get(), d2: d2.get(), alpha: alpha.get(), ratio, bound });
        }
    }
    Ok(out)
}

/// Grid points where `H_λ(x) >= 0`, returned as `(x, H_λ(x))`.
pub fn check_h_negative(pair: &LemmaPair, xs: &[f64]) -> Vec<(f64, f64)> {
    xs.iter()
        .map(|&x| (x, big_h_lambda(x, pair)))
        .filter(|&(_, h)| !(h < 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn a(p: f64) -> Probability {
        Probability::new(p).unwrap()
    }

    fn df(d: u64) -> DegreesOfFreedom {
        DegreesOfFreedom::new(d).unwrap()
    }

    const T2_975: f64 = 4.302_652_729_749_464;
    const T1_975: f64 = 12.706_204_736_174_7;

    #[test]
    fn g_factor_at_two() {
        let want = T1_975 / core::f64::consts::PI.sqrt();
        assert_abs_diff_eq!(g_factor(2, a(0.05)).unwrap(), want, epsilon = 1e-9);
        assert!(g_factor(1, a(0.05)).is_err());
        for alpha in [0.2, 0.1, 0.05, 0.01] {
            assert!(g_factor(3, a(alpha)).unwrap() < g_factor(2, a(alpha)).unwrap());
        }
    }

    #[test]
    fn expected_length_basics() {
        assert_eq!(expected_length_iid(420, 7, a(0.05), 0.0).unwrap(), 0.0);
        assert_eq!(expected_length_iid(420, 8, a(0.05), 1.0), Err(Error::Partition { n: 420, m: 8 }));
        assert!(expected_length_iid(420, 7, a(0.05), -1.0).is_err());
        let l = expected_length_iid(420, 420, a(0.05), 1.0).unwrap();
        assert_abs_diff_eq!(l, 0.191_713, epsilon = 5e-6);
    }

    #[test]
    fn grouped_reduces_to_iid_without_correlation() {
        for (m, k) in [(2u64, 1usize), (10, 5), (84, 5), (7, 60)] {
            let cov = CovarianceSpec::iid(2.5, k).unwrap();
            let g = expected_length_grouped(m, &cov, a(0.05)).unwrap();
            let i = expected_length_iid(m * k as u64, m, a(0.05), 2.5f64.sqrt()).unwrap();
            assert_abs_diff_eq!(g / i, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn grouped_length_formula_instance() {
        let cov = CovarianceSpec::equi(1.0, 5, 0.5).unwrap();
        let t9 = 2.262_157_162_798_205_5;
        // Γ(5)/Γ(4.5) = 24 / (105√π/16)
        let ratio = 24.0 / (105.0 * core::f64::consts::PI.sqrt() / 16.0);
        let want = 2.0 * SQRT_2 / 90f64.sqrt() * (15f64.sqrt() / 5.0) * t9 * ratio;
        assert_abs_diff_eq!(expected_length_grouped(10, &cov, a(0.05)).unwrap(), want, epsilon = 1e-12);
    }

    #[test]
    fn expected_sn_sq_cases() {
        for (m, k) in [(2u64, 1u64), (10, 7), (100, 10)] {
            let cov = CovarianceSpec::iid(1.7, k as usize).unwrap();
            assert_eq!(expected_sn_sq(m, k, &cov).unwrap(), 1.7);
        }
        let cov = CovarianceSpec::equi(1.0, 10, 1.0).unwrap();
        assert_abs_diff_eq!(expected_sn_sq(100, 10, &cov).unwrap(), 9900.0 / 9990.0, epsilon = 1e-15);
        let cov = CovarianceSpec::equi(1.0, 10, 0.4).unwrap();
        assert_abs_diff_eq!(expected_sn_sq(1_000_000, 10, &cov).unwrap(), 1.0, epsilon = 1e-4);
        assert!(expected_sn_sq(10, 3, &cov).is_err());
    }

    #[test]
    fn coverage_limits() {
        assert_abs_diff_eq!(coverage_limit_plugin(2.0, 1.0, 4, a(0.05)).unwrap(), 0.95, epsilon = 1e-14);
        assert_abs_diff_eq!(coverage_limit_plugin(1.0, 1.0, 4, a(0.05)).unwrap(), 0.672_9, epsilon = 1e-4);
        assert!(coverage_limit_plugin(1.0, 1e300, 4, a(0.05)).unwrap() < 1e-290);
        assert!(coverage_limit_plugin(0.0, 1.0, 4, a(0.05)).is_err());
        assert!(coverage_limit_plugin(1.0, -1.0, 4, a(0.05)).is_err());

        assert_abs_diff_eq!(coverage_limit_equicorr(10, 1.0, a(0.05)).unwrap(), 0.465, epsilon = 1e-3);
        assert_abs_diff_eq!(coverage_limit_equicorr(100, 0.1, a(0.05)).unwrap(), 0.45, epsilon = 5e-3);
        for k in [1, 10, 1000] {
            assert_abs_diff_eq!(coverage_limit_equicorr(k, 0.0, a(0.05)).unwrap(), 0.95, epsilon = 1e-14);
        }
        assert!(coverage_limit_equicorr(10, 1.1, a(0.05)).is_err());
    }

    #[test]
    fn ratio_bound_instances() {
        assert_abs_diff_eq!(lemma_ratio_bound(df(7), df(7)).unwrap(), 1.0, epsilon = 1e-14);
        // Γ(1/2)Γ(3/2) / (√2 Γ(1)Γ(1)) = π / (2√2)
        let b12 = lemma_ratio_bound(df(1), df(2)).unwrap();
        assert_abs_diff_eq!(b12, core::f64::consts::PI / (2.0 * SQRT_2), epsilon = 1e-14);
        assert!(T1_975 / T2_975 > b12);
        assert!(lemma_ratio_bound(df(3), df(2)).is_err());
    }

    #[test]
    fn h_lambda_degenerate_and_instance() {
        let same = LemmaPair::unrestricted(df(4), df(4), 1.0).unwrap();
        for x in [0.01, 1.0, 7.5] {
            assert_eq!(h_lambda(x, &same), 0.0);
        }
        let pair = LemmaPair::new(df(1), df(5), 1.05).unwrap();
        let p1 = 1.0 / (core::f64::consts::PI * 1.01);
        // Γ(3)/(√(5π)Γ(2.5)) with Γ(2.5) = 3√π/4
        let c5 = 2.0 / ((5.0 * core::f64::consts::PI).sqrt() * 0.75 * core::f64::consts::PI.sqrt());
        let u = 0.1 / 1.05;
        let p5 = c5 * (1.0f64 + u * u / 5.0).powf(-3.0);
        let h = h_lambda(0.1, &pair);
        assert!(h < 0.0);
        assert_abs_diff_eq!(h, p1 - p5 / 1.05, epsilon = 1e-14);
    }

    #[test]
    fn critical_point_instance() {
        let pair = LemmaPair::new(df(1), df(2), 1.1).unwrap();
        assert_abs_diff_eq!(critical_x0(&pair).unwrap(), 1.84f64.sqrt(), epsilon = 1e-14);
        let bad = LemmaPair::unrestricted(df(2), df(1), 1.1).unwrap();
        assert!(critical_x0(&bad).is_err());
        assert!(LemmaPair::new(df(1), df(2), 1.0).is_err());
        assert!(LemmaPair::new(df(2), df(2), 1.5).is_err());
    }

    #[test]
    fn c_lambda_is_r_at_zero() {
        let pair = LemmaPair::new(df(2), df(5), 1.05).unwrap();
        assert_abs_diff_eq!(r_lambda(0.0, &pair), c_lambda(&pair), epsilon = 1e-15);
        let at_bound = LemmaPair::new(df(2), df(5), lemma_ratio_bound(df(2), df(5)).unwrap()).unwrap();
        assert_abs_diff_eq!(c_lambda(&at_bound), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn h_far_tail_vanishes() {
        let pair = LemmaPair::new(df(2), df(5), 1.1).unwrap();
        assert!(big_h_lambda(1e6, &pair).abs() < 1e-9);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 200);
        assert_eq!(g.len(), 200);
        assert_abs_diff_eq!(g[0], 1e-3, epsilon = 1e-18);
        assert_abs_diff_eq!(g[199], 1e3, epsilon = 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
