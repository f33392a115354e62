//! One-dimensional distributional numerics: standard normal CDF/quantile and
//! the exact piecewise Wasserstein-1 distance between an empirical sample and
//! the standard normal.

use std::f64::consts::PI;

use crate::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Complementary error function. Maclaurin series for small arguments,
/// Lentz-evaluated continued fraction for the tail; absolute error on the
/// resulting normal CDF is far below 1e-10.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1))
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 1.0f64;
    loop {
        term *= -x2 / n;
        let inc = term / (2.0 * n + 1.0);
        sum += inc;
        if inc.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        n += 1.0;
        if n > 200.0 {
            break;
        }
    }
    sum * 2.0 / PI.sqrt()
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 2/2/(x + 3/2/(x + ...))))
    let mut f = x;
    let tiny = 1e-300;
    let mut c = f;
    let mut d = 0.0f64;
    let mut i = 1usize;
    loop {
        let a = i as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
        i += 1;
        if i > 300 {
            break;
        }
    }
    (-x * x).exp() / PI.sqrt() / f
}

/// Standard normal density.
pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, absolute error below 1e-10.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / SQRT_2)
}

/// Upper tail `1 - Phi(t)`, computed without cancellation.
pub fn normal_sf(t: f64) -> f64 {
    0.5 * erfc(t / SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation polished with a
/// Halley step against the high-precision CDF.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    let x = acklam(p);
    // one Halley refinement
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

fn check_sample(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::BadSample("empty sample".into()));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadSample("non-finite sample value".into()));
    }
    Ok(())
}

/// `int_a^b Phi(t) dt` via the antiderivative `t Phi(t) + pdf(t)`.
fn integral_cdf(a: f64, b: f64) -> f64 {
    let anti = |t: f64| t * normal_cdf(t) + normal_pdf(t);
    anti(b) - anti(a)
}

/// `int_{-inf}^{x} Phi(t) dt`, stable for very negative `x`.
fn lower_tail_mass(x: f64) -> f64 {
    x * normal_cdf(x) + normal_pdf(x)
}

/// `int_{x}^{inf} (1 - Phi(t)) dt`, stable for very positive `x`.
fn upper_tail_mass(x: f64) -> f64 {
    -x * normal_sf(x) + normal_pdf(x)
}

/// Exact Wasserstein-1 distance between the empirical CDF of `sample` and
/// the standard normal: the empirical CDF is constant between order
/// statistics, so each piece of `int |F_m - Phi|` has a closed form via the
/// antiderivative of `Phi` and the crossing point `Phi^{-1}(i/m)`.
pub fn w1_to_normal(sample: &[f64]) -> Result<f64> {
    check_sample(sample)?;
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = xs.len();
    let mut total = lower_tail_mass(xs[0]) + upper_tail_mass(xs[m - 1]);
    for i in 1..m {
        let (a, b) = (xs[i - 1], xs[i]);
        if a == b {
            continue;
        }
        let c = i as f64 / m as f64;
        let crossing = normal_quantile(c);
        if crossing <= a {
            // Phi >= c on the whole piece
            total += integral_cdf(a, b) - c * (b - a);
        } else if crossing >= b {
            total += c * (b - a) - integral_cdf(a, b);
        } else {
            total += c * (crossing - a) - integral_cdf(a, crossing);
            total += integral_cdf(crossing, b) - c * (b - crossing);
        }
    }
    Ok(total)
}

/// Kolmogorov-Smirnov distance between the empirical CDF and the standard
/// normal, via the order-statistics formula.
pub fn ks_to_normal(sample: &[f64]) -> Result<f64> {
    check_sample(sample)?;
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let phi = normal_cdf(x);
        d = d.max((i as f64 + 1.0) / m - phi).max(phi - i as f64 / m);
    }
    Ok(d)
}

/// Summary of a sample's distance to the standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub w1: f64,
    pub ks: f64,
    pub sample_size: usize,
    pub sample_mean: f64,
    pub sample_sd: f64,
}

pub fn distance_report(sample: &[f64]) -> Result<DistanceReport> {
    check_sample(sample)?;
    let (mean, sd) = mean_sd(sample);
    Ok(DistanceReport {
        w1: w1_to_normal(sample)?,
        ks: ks_to_normal(sample)?,
        sample_size: sample.len(),
        sample_mean: mean,
        sample_sd: sd,
    })
}

/// Sample mean and standard deviation (n-1 denominator; sd is 0 for n = 1).
pub fn mean_sd(sample: &[f64]) -> (f64, f64) {
    let n = sample.len();
    let mean = sample.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = sample.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, var.sqrt())
}
