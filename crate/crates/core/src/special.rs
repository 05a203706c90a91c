//! Special functions and the distributions built on them.
//!
//! Everything routes through `libm` so results are bit-identical on every
//! platform, which the Monte Carlo reports depend on.

use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{domain, Error, Result};

/// Integer degrees of freedom, at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreesOfFreedom(u64);

impl DegreesOfFreedom {
    pub fn new(d: u64) -> Result<Self> {
        if d == 0 {
            return Err(domain("degrees of freedom", 0.0));
        }
        Ok(Self(d))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

/// A probability strictly inside (0, 1). Used both for levels `1 - α` and
/// for significance `α` itself.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(Self(p))
        } else {
            Err(domain("probability", p))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }

    /// `1 - α/2` for a two-sided interval at significance `self`.
    pub fn upper_two_sided(self) -> Self {
        Self(1.0 - 0.5 * self.0)
    }
}

// Lanczos approximation, g = 671/128, 14 terms.
const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// `ln Γ(x)` for positive finite `x`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain("ln_gamma argument", x));
    }
    Ok(lgamma(x))
}

pub(crate) fn lgamma(x: f64) -> f64 {
    let shifted = x + LANCZOS_G;
    let head = (x + 0.5) * libm::log(shifted) - shifted;
    let mut series = 0.999_999_999_999_997_092;
    let mut y = x;
    for c in LANCZOS {
        y += 1.0;
        series += c / y;
    }
    head + libm::log(SQRT_2PI * series / x)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(domain("incomplete beta a", a));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(domain("incomplete beta b", b));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("incomplete beta x", x));
    }
    Ok(inc_beta(a, b, x, 1.0 - x))
}

/// `I_x(a, b)` with the caller supplying `y = 1 - x` at full precision.
fn inc_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * libm::log(x) + b * libm::log(y);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, y) / b
    }
}

/// Continued fraction for the incomplete beta, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..20_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    h
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / SQRT_2PI
}

/// Inverse of [`normal_cdf`].
///
/// Acklam's rational approximation followed by two Halley steps against
/// `erfc`, always worked in the lower tail so `1 - p` never loses digits.
pub fn normal_quantile(p: Probability) -> f64 {
    let p = p.get();
    if p > 0.5 {
        return -lower_normal_quantile(1.0 - p);
    }
    lower_normal_quantile(p)
}

fn lower_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if p == 0.5 {
        return 0.0;
    }
    let mut x = if p < 0.024_25 {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let e = 0.5 * libm::erfc(-x * FRAC_1_SQRT_2) - p;
        let u = e * SQRT_2PI * libm::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

fn ln_t_norm(d: f64) -> f64 {
    lgamma(0.5 * (d + 1.0)) - lgamma(0.5 * d) - 0.5 * libm::log(PI * d)
}

/// Student-t density.
pub fn t_pdf(x: f64, d: DegreesOfFreedom) -> f64 {
    let d = d.as_f64();
    libm::exp(ln_t_norm(d) - 0.5 * (d + 1.0) * libm::log1p(x * x / d))
}

/// Upper tail `P(T > x)` for `x >= 0`, accurate when the tail is tiny.
pub(crate) fn t_upper_tail(x: f64, d: DegreesOfFreedom) -> f64 {
    debug_assert!(x >= 0.0);
    if x.is_infinite() {
        return 0.0;
    }
    let d = d.as_f64();
    let x2 = x * x;
    let denom = d + x2;
    0.5 * inc_beta(0.5 * d, 0.5, d / denom, x2 / denom)
}

/// Student-t CDF.
pub fn t_cdf(x: f64, d: DegreesOfFreedom) -> f64 {
    if x >= 0.0 {
        1.0 - t_upper_tail(x, d)
    } else {
        t_upper_tail(-x, d)
    }
}

/// Student-t survival function `P(T > x)`.
pub fn t_sf(x: f64, d: DegreesOfFreedom) -> f64 {
    if x >= 0.0 {
        t_upper_tail(x, d)
    } else {
        1.0 - t_upper_tail(-x, d)
    }
}

/// Inverse of [`t_cdf`].
///
/// Solves `P(T > x) = tail` on `x > 0` with Newton steps safeguarded by a
/// bisection bracket. The starting point is exact for `d <= 2` and a
/// Cornish-Fisher correction of the normal quantile otherwise.
pub fn t_quantile(p: Probability, d: DegreesOfFreedom) -> f64 {
    let p = p.get();
    if p == 0.5 {
        return 0.0;
    }
    let (tail, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };
    sign * upper_t_quantile(tail, d)
}

fn upper_t_quantile(tail: f64, d: DegreesOfFreedom) -> f64 {
    let df = d.as_f64();
    let mut x = match d.get() {
        1 => libm::tan(PI * (0.5 - tail)),
        2 => {
            let a = 1.0 - 2.0 * tail;
            a * libm::sqrt(2.0 / ((1.0 - a) * (1.0 + a)))
        }
        _ => {
            let z = -lower_normal_quantile(tail);
            let z2 = z * z;
            let g1 = (z2 + 1.0) * z / 4.0;
            let g2 = ((5.0 * z2 + 16.0) * z2 + 3.0) * z / 96.0;
            let g3 = (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) * z / 384.0;
            z + g1 / df + g2 / (df * df) + g3 / (df * df * df)
        }
    };
    if !(x.is_finite() && x > 0.0) {
        x = 1.0;
    }

    let mut lo = 0.0;
    let mut hi = x.max(1.0);
    while t_upper_tail(hi, d) > tail {
        lo = hi;
        hi *= 2.0;
    }
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let excess = t_upper_tail(x, d) - tail;
        if excess == 0.0 {
            return x;
        }
        if excess > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = excess / t_pdf(x, d);
        let mut next = x + step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x || hi - lo <= 2.0 * f64::EPSILON * x {
            return next;
        }
        x = next;
    }
    x
}

/// `E χ_{m-1} = √2 · Γ(m/2) / Γ((m-1)/2)`.
pub fn chi_mean_factor(m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain { what: "group count for chi mean", value: m as f64 });
    }
    let m = m as f64;
    Ok(SQRT_2 * libm::exp(lgamma(0.5 * m) - lgamma(0.5 * (m - 1.0))))
}
