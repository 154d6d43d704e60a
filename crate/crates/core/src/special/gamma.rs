use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, require_finite, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Natural logarithm of the gamma function for `x > 0`.
///
/// Lanczos approximation (g = 7, nine coefficients) with the reflection
/// formula below one half.
pub fn ln_gamma(x: f64) -> Result<f64> {
    require_finite("ln_gamma", "x", x)?;
    if x <= 0.0 {
        return Err(domain("ln_gamma", format!("x = {x} must be positive")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx); sin(πx) > 0 on (0, 1/2)
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (x + 0.5) * t.ln() - t + acc.ln()
}

// B_{2k} / (2k (2k-1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Complex log-gamma, correct modulo 2πi.
///
/// Only `exp` of the result is ever used, so the branch of the imaginary part
/// is irrelevant. Poles return a real part of `+inf`.
pub(crate) fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_complex(1.0 - z);
    }
    let mut w = z;
    let mut prod = Complex64::new(1.0, 0.0);
    while w.norm_sqr() < 256.0 {
        prod *= w;
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_TWO_PI + series - prod.ln()
}

/// ln sin(πz) modulo 2πi, stable for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 20.0 {
        return (z * PI).sin().ln();
    }
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin(πz) = -e^{-iπz} (1 - e^{2iπz}) / (2i)
    let i = Complex64::new(0.0, 1.0);
    let small = (i * z * (2.0 * PI)).exp();
    -i * z * PI + (1.0 - small).ln() - Complex64::new(2f64.ln(), PI / 2.0) + Complex64::new(0.0, PI)
}

const MAX_ITER: usize = 100_000;

/// Regularized lower incomplete gamma function P(a, x) = γ(a, x) / Γ(a).
///
/// Power series for `x < a + 1`, Lentz continued fraction for the complement
/// otherwise.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete("reg_lower_gamma", a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(lower_series(a, x))
    } else {
        Ok(1.0 - upper_fraction(a, x))
    }
}

/// Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x).
pub fn reg_upper_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete("reg_upper_gamma", a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - lower_series(a, x))
    } else {
        Ok(upper_fraction(a, x))
    }
}

fn check_incomplete(function: &'static str, a: f64, x: f64) -> Result<()> {
    require_finite(function, "a", a)?;
    if x.is_nan() {
        return Err(domain(function, "x is NaN"));
    }
    if a <= 0.0 {
        return Err(domain(function, format!("a = {a} must be positive")));
    }
    if x < 0.0 {
        return Err(domain(function, format!("x = {x} must be nonnegative")));
    }
    Ok(())
}

fn ln_prefactor(a: f64, x: f64) -> f64 {
    -x + a * x.ln() - ln_gamma_pos(a)
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (sum.ln() + ln_prefactor(a, x)).exp()
}

fn upper_fraction(a: f64, x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (h.ln() + ln_prefactor(a, x)).exp()
}
