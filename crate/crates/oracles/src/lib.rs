//! Reference computations for tests.
//!
//! Everything here is deliberately computed along a different path than
//! `groupci-core`: adaptive quadrature instead of continued fractions,
//! exact half-integer gamma products instead of a Lanczos sum, plain
//! bisection instead of Newton. Nothing in this crate is fast.

use std::f64::consts::PI;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the 7-point rule on XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gk15(f, a, b);
        // Stop at the tolerance or once the error estimate is at roundoff.
        if err <= tol.max(1e-17) || err <= 50.0 * f64::EPSILON * value.abs() || depth >= 40 {
            return value;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, 0.5 * tol, depth + 1) + recurse(f, mid, b, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    // A few uniform panels up front keep narrow features from hiding
    // between the first-level nodes.
    let panels = 16;
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == panels { b } else { lo + width };
            recurse(&f, lo, hi, tol / panels as f64, 0)
        })
        .sum()
}

/// Root of a monotone function by bisection on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let f_lo = f(lo);
    let increasing = f(hi) > f_lo;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= tol || mid == lo || mid == hi {
            return mid;
        }
        let fm = f(mid);
        if (fm < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ln Γ(x)` for positive integers and half-integers by exact product.
pub fn ln_gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!(twice >= 1.0 && (2.0 * x - twice).abs() < 1e-12, "not a half-integer: {x}");
    let twice = twice as u64;
    if twice % 2 == 0 {
        (1..twice / 2).map(|j| (j as f64).ln()).sum()
    } else {
        let mut acc = 0.5 * PI.ln();
        let mut y = 0.5;
        while y < x - 0.25 {
            acc += y.ln();
            y += 1.0;
        }
        acc
    }
}

const BERNOULLI_OVER_2K_2K1: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// Stirling asymptotic series for `ln Γ(x)`, accurate for `x ≳ 15`.
pub fn ln_gamma_stirling(x: f64) -> f64 {
    let mut acc = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln();
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut pow = inv;
    for c in BERNOULLI_OVER_2K_2K1 {
        acc += c * pow;
        pow *= inv2;
    }
    acc
}

/// `erf(x)` from its Maclaurin series (|x| ≤ 2) or the Laplace continued
/// fraction for `erfc` otherwise.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x <= 2.0 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x2 / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    } else {
        1.0 - erfc_cf(x)
    }
}

fn erfc_cf(x: f64) -> f64 {
    // erfc(x) = exp(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut tail = x;
    for n in (1..200).rev() {
        tail = x + (n as f64 / 2.0) / tail;
    }
    (-x * x).exp() / PI.sqrt() / tail
}

/// Standard normal CDF built on the series `erf`.
pub fn normal_cdf(x: f64) -> f64 {
    if x < -2.0 * std::f64::consts::SQRT_2 {
        0.5 * erfc_cf(-x / std::f64::consts::SQRT_2)
    } else {
        0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
    }
}

/// `Γ((d+1)/2) / Γ(d/2)` by the recursion `R(d)·R(d+1) = d/2`.
pub fn t_norm_ratio(d: u64) -> f64 {
    let mut r = 1.0 / PI.sqrt();
    for j in 1..d {
        r = j as f64 / (2.0 * r);
    }
    r
}

/// Student-t density with the gamma ratio from [`t_norm_ratio`].
pub fn t_pdf(x: f64, d: u64) -> f64 {
    let df = d as f64;
    t_norm_ratio(d) / (PI * df).sqrt() * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0)
}

/// Student-t CDF by quadrature of [`t_pdf`] from 0.
pub fn t_cdf(x: f64, d: u64, tol: f64) -> f64 {
    let half = integrate(|u| t_pdf(u, d), 0.0, x.abs(), tol);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Student-t quantile by bisection on the quadrature CDF.
pub fn t_quantile(p: f64, d: u64, cdf_tol: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    if p < 0.5 {
        return -t_quantile(1.0 - p, d, cdf_tol);
    }
    let mut hi = 1.0;
    while t_cdf(hi, d, cdf_tol) < p {
        hi *= 2.0;
    }
    bisect(|x| t_cdf(x, d, cdf_tol) - p, 0.0, hi, 1e-13 * hi.max(1.0))
}

/// Normal quantile by bisection on [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    bisect(|x| normal_cdf(x) - p, -40.0, 40.0, 1e-15)
}

/// Sample mean and unbiased variance by direct summation.
pub fn mean_var(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Pearson correlation of two equal-length samples.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0);
    cov / (va * vb).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    let mut p = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
        p += 2.0 * sign * (-2.0 * k * k * lambda * lambda).exp();
    }
    (d, p.clamp(0.0, 1.0))
}
