//! Special functions shared by the kernel and constant computations.

use std::f64::consts::PI;

pub use statrs::function::erf::{erf, erfc};

/// Scaled complementary error function `e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 4.0 {
        return (x * x).exp() * erfc(x);
    }
    // Continued fraction erfcx(x) = (1/√π) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
    let mut tail = x;
    for k in (1..60).rev() {
        tail = x + 0.5 * k as f64 / tail;
    }
    1.0 / (PI.sqrt() * tail)
}

/// Gaussian `N_t(x) = 1_{t>0} e^{-x²/t} / √(πt)`.
pub fn normal_n(t: f64, x: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (-x * x / t).exp() / (PI * t).sqrt()
}

/// `Erfc(s) = 2∫_s^∞ N_1`, the standard complementary error function.
pub fn erfc_n(s: f64) -> f64 {
    erfc(s)
}

/// One-dimensional heat kernel `(4πt)^{-1/2} e^{-x²/(4t)}`.
pub fn heat_1d(t: f64, x: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// Inverse tangent integral `Ti₂(x) = ∫_0^x tan⁻¹(u)/u du`.
pub fn inverse_tangent_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -inverse_tangent_integral(-x);
    }
    if x > 1.0 {
        // Ti₂(x) = Ti₂(1/x) + (π/2) log x
        return inverse_tangent_integral(1.0 / x) + 0.5 * PI * x.ln();
    }
    if x <= 0.5 {
        let mut s = 0.0;
        let x2 = x * x;
        let mut p = x;
        for k in 0..200 {
            let n = (2 * k + 1) as f64;
            let term = p / (n * n);
            s += if k % 2 == 0 { term } else { -term };
            if term < 1e-18 {
                break;
            }
            p *= x2;
        }
        return s;
    }
    let r = crate::quad::Rule::legendre(40);
    inverse_tangent_integral(0.5)
        + r.integrate(0.5, x, |u| u.atan() / u)
}

/// Smooth cutoff: `1` for `r ≤ inner`, `0` for `r ≥ outer`, septic
/// smoothstep in between (three continuous derivatives).
pub fn cutoff(r: f64, inner: f64, outer: f64) -> f64 {
    if r <= inner {
        return 1.0;
    }
    if r >= outer {
        return 0.0;
    }
    let t = (r - inner) / (outer - inner);
    let t4 = t * t * t * t;
    1.0 - t4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))
}

/// `∫_0^r cutoff(v, inner, outer) dv`.
pub fn cutoff_integral(r: f64, inner: f64, outer: f64) -> f64 {
    if r <= inner {
        return r.max(0.0);
    }
    let w = outer - inner;
    let t = ((r - inner) / w).min(1.0);
    let t4 = t * t * t * t;
    let poly = t - t4 * t * (7.0 - t * (14.0 - t * (10.0 - 2.5 * t)));
    inner + w * poly
}

/// Derivative of [`cutoff`] in `r`.
pub fn cutoff_deriv(r: f64, inner: f64, outer: f64) -> f64 {
    if r <= inner || r >= outer {
        return 0.0;
    }
    let w = outer - inner;
    let t = (r - inner) / w;
    let t3 = t * t * t;
    -140.0 * t3 * (1.0 - t) * (1.0 - t) * (1.0 - t) / w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfcx_is_continuous_across_branches() {
        let a = erfcx(4.0 - 1e-9);
        let b = erfcx(4.0 + 1e-9);
        assert!((a - b).abs() / a < 1e-8);
        assert!((erfcx(0.0) - 1.0).abs() < 1e-14);
        let big = 1e3;
        assert!((erfcx(big) * big * PI.sqrt() - 1.0).abs() < 1e-6);
        assert!((erfcx(-1.0) - 1f64.exp() * erfc(-1.0)).abs() < 1e-12);
    }

    #[test]
    fn ti2_matches_quadrature() {
        for &x in &[0.1, 0.5, 0.9, 1.0, 2.5, 30.0] {
            let q = crate::quad::tanh_sinh(|u: f64| u.atan() / u, 1e-300, x, 1e-13);
            assert!((inverse_tangent_integral(x) - q).abs() < 1e-10, "x={x}");
        }
        // Catalan's constant
        assert!((inverse_tangent_integral(1.0) - 0.915_965_594_177_219).abs() < 1e-12);
    }

    #[test]
    fn cutoff_integral_matches_quadrature() {
        for &r in &[0.2, 0.5, 0.6, 0.8, 1.0, 1.7] {
            let rule = crate::quad::Rule::legendre(40);
            let br: Vec<f64> = [0.0, 0.5, 1.0, r].into_iter().filter(|&b| b < r).chain([r]).collect();
            let q: f64 = br.windows(2).map(|w| rule.integrate(w[0], w[1], |v| cutoff(v, 0.5, 1.0))).sum();
            assert!((cutoff_integral(r, 0.5, 1.0) - q).abs() < 1e-6, "r={r}");
        }
    }

    #[test]
    fn cutoff_endpoints_and_derivative() {
        assert_eq!(cutoff(0.3, 0.5, 1.0), 1.0);
        assert_eq!(cutoff(1.2, 0.5, 1.0), 0.0);
        let h = 1e-6;
        for &r in &[0.55, 0.7, 0.9] {
            let fd = (cutoff(r + h, 0.5, 1.0) - cutoff(r - h, 0.5, 1.0)) / (2.0 * h);
            assert!((fd - cutoff_deriv(r, 0.5, 1.0)).abs() < 1e-6);
        }
    }
}
