//! Modified Bessel function of the first kind for real order `ν ≥ 0`, always
//! returned in the exponentially scaled form `e^{-x} I_ν(x)`.
//!
//! Three regimes:
//! * `ν < 15`, `x ≤ 500`: ascending power series (all terms positive);
//! * `ν < 15`, `x > 500`: Hankel large-argument expansion;
//! * `ν ≥ 15`: Debye uniform expansion in `ν` with thirteen correction terms.
//!
//! The integral representation over `[0, π]` plus the exponential tail is
//! provided separately as an independent evaluation route.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{PricingError, Result};
use crate::quadrature;

const DEBYE_MIN_ORDER: f64 = 15.0;
const SERIES_MAX_ARG: f64 = 500.0;
const DEBYE_TERMS: usize = 14;

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

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the approximation on its accurate half-line.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a
}

fn check_args(function: &'static str, nu: f64, x: f64) -> Result<()> {
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(PricingError::Domain {
            function,
            detail: format!("order must be finite and >= 0, got {nu}"),
        });
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(PricingError::Domain {
            function,
            detail: format!("argument must be finite and >= 0, got {x}"),
        });
    }
    Ok(())
}

/// `e^{-x} I_ν(x)` for `ν ≥ 0`, `x ≥ 0`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    check_args("bessel_i_scaled", nu, x)?;
    Ok(scaled_unchecked(nu, x))
}

/// Kernel without argument validation, for hot loops whose arguments are
/// non-negative by construction.
pub(crate) fn scaled_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if nu >= DEBYE_MIN_ORDER {
        debye(nu, x)
    } else if x <= SERIES_MAX_ARG {
        power_series(nu, x)
    } else {
        hankel(nu, x)
    }
}

fn power_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (nu + k));
        sum += term;
        if term < 1e-17 * sum && k > 0.5 * x {
            break;
        }
    }
    (nu * (0.5 * x).ln() - x - ln_gamma(nu + 1.0) + sum.ln()).exp()
}

fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let j = (2 * k - 1) as f64;
        let next = -term * (mu - j * j) / (8.0 * k as f64 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Coefficients (ascending powers of `p`) of the Debye polynomials `u_k(p)`,
/// generated from `u_{k+1} = ½p²(1−p²)u_k' + ⅛∫₀ᵖ(1−5t²)u_k dt`.
fn debye_polynomials() -> &'static Vec<Vec<f64>> {
    static POLYS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let mut polys: Vec<Vec<f64>> = vec![vec![1.0]];
        for k in 0..DEBYE_TERMS - 1 {
            let u = &polys[k];
            let mut next = vec![0.0; u.len() + 3];
            // ½ p² (1 − p²) u'(p)
            for (i, &c) in u.iter().enumerate().skip(1) {
                let d = c * i as f64;
                next[i + 1] += 0.5 * d;
                next[i + 3] -= 0.5 * d;
            }
            // ⅛ ∫₀ᵖ (1 − 5t²) u(t) dt
            for (i, &c) in u.iter().enumerate() {
                next[i + 1] += c / (8.0 * (i + 1) as f64);
                next[i + 3] -= 5.0 * c / (8.0 * (i + 3) as f64);
            }
            polys.push(next);
        }
        polys
    })
}

fn debye(nu: f64, x: f64) -> f64 {
    let s = nu.hypot(x);
    let p = nu / s;
    // ν·η − x written without cancellation: (s − x) + ν ln(x / (ν + s)).
    let exponent = nu * nu / (s + x) + nu * (x / (nu + s)).ln();
    let mut sum = 0.0;
    let mut scale = 1.0;
    for poly in debye_polynomials() {
        let u = poly.iter().rev().fold(0.0, |acc, &c| acc * p + c);
        let term = u * scale;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && scale < 1.0 {
            break;
        }
        scale /= nu;
    }
    (exponent - 0.5 * (2.0 * PI * nu).ln() - 0.5 * (s / nu).ln()).exp() * sum
}

/// Upper cut-off of the cosine integral: beyond it `e^{x(cos φ − 1)} < e^{-46}`.
pub(crate) fn cosine_cutoff(x: f64) -> f64 {
    let half = 23.0 / x;
    if half >= 1.0 {
        PI
    } else {
        2.0 * half.sqrt().asin()
    }
}

/// Scaled cosine-part integrand `(1/π) e^{x(cos φ − 1)} cos(ν φ)`.
#[inline]
pub(crate) fn cosine_part_integrand(nu: f64, x: f64, phi: f64) -> f64 {
    let half = (0.5 * phi).sin();
    (-2.0 * x * half * half).exp() * (nu * phi).cos() / PI
}

/// Truncation point of the tail integral `∫₀^∞ e^{-2x sinh²(s/2) − ν s} ds`.
pub(crate) fn tail_cutoff(nu: f64, x: f64) -> f64 {
    let g = |s: f64| 2.0 * x * (0.5 * s).sinh().powi(2) + nu * s - 46.0;
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Log-drop from the peak at which the Poisson integrand is cut off.
const POISSON_LOG_DROP: f64 = 36.0;

/// `ln[(x/2)^ν / (√π Γ(ν+½))]`, the prefactor of the Poisson form.
pub(crate) fn poisson_log_prefactor(nu: f64, x: f64) -> f64 {
    nu * (0.5 * x).ln() - 0.5 * PI.ln() - ln_gamma(nu + 0.5)
}

/// Log of the Poisson integrand `e^{x(cos φ − 1)} sin^{2ν} φ`.
#[inline]
pub(crate) fn poisson_log_integrand(nu: f64, x: f64, phi: f64) -> f64 {
    let half = (0.5 * phi).sin();
    -2.0 * x * half * half + 2.0 * nu * phi.sin().ln()
}

/// Intended for `ν > 1`, where the endpoints are smooth zeros.
/// Interval of `[0, π]` outside which the Poisson integrand is below
/// `e^{-36}` of its peak. The integrand is unimodal, so each end is found by
/// bisection.
pub(crate) fn poisson_window(nu: f64, x: f64) -> (f64, f64) {
    let c = if x > 0.0 { ((nu * nu + x * x).sqrt() - nu) / x } else { 0.0 };
    let peak = c.clamp(-1.0, 1.0).acos();
    let floor = poisson_log_integrand(nu, x, peak) - POISSON_LOG_DROP;
    let edge = |inside: f64, outside: f64| {
        if poisson_log_integrand(nu, x, outside) >= floor {
            return outside;
        }
        let (mut a, mut b) = (inside, outside);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if poisson_log_integrand(nu, x, m) >= floor {
                a = m;
            } else {
                b = m;
            }
        }
        b
    };
    (edge(peak, 0.0), edge(peak, PI))
}

/// `e^{-x} I_ν(x)` from the integral representation
/// `I_ν(x) = (1/π)∫₀^π e^{x cos φ} cos νφ dφ − (sin νπ/π)∫₀^∞ e^{−x cosh s − νs} ds`,
/// both parts damped by `e^{-x}` and integrated with panel-doubling
/// Gauss–Legendre.
///
/// For large `ν` and small `x` the two parts nearly cancel; the result then
/// carries an absolute error of order `1e-16 / ν` rather than a relative one.
pub fn bessel_i_integral_form(nu: f64, x: f64) -> Result<f64> {
    check_args("bessel_i_integral_form", nu, x)?;
    let cutoff = cosine_cutoff(x);
    let cosine = quadrature::adaptive(|phi| cosine_part_integrand(nu, x, phi), 0.0, cutoff, 1e-15);
    let tail = if nu.fract() == 0.0 {
        0.0
    } else {
        let upper = tail_cutoff(nu, x);
        let integral = quadrature::adaptive(
            |s| {
                let h = (0.5 * s).sinh();
                (-2.0 * x * h * h - nu * s).exp()
            },
            0.0,
            upper,
            1e-15,
        );
        (nu * PI).sin() / PI * (-2.0 * x).exp() * integral
    };
    Ok(cosine - tail)
}
