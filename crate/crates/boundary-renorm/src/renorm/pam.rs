//! Boundary profile and boundary mass of the elliptic (PAM) tree `⟨2a⟩`.
//!
//! With the reflected kernel, the boundary part of `|∇Kξ_ε|²` has
//! expectation `I_ε(s)` at distance `s` from the face. At `ε = 0` it is the
//! cross term `2∫ (x−e)·(x+e) / (16π²|x−e|³|x+e|³) dx` over the half-space,
//! equal to
//! `1/(8πs)`. For `ε > 0` the profile scales as `I_ε(s) = ε⁻¹ I₁(s/ε)` and
//! `I₁` is a one-dimensional spectral integral.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spectral::{spectra, K_MAX};
use super::Estimate;
use crate::noise::Profile;
use crate::quad::{graded_breaks, Rule};
use crate::{Error, Result};

/// `1/(8πs)`, the unmollified profile.
pub fn pam_profile_i0(s: f64) -> f64 {
    1.0 / (8.0 * PI * s)
}

/// Spherical-coordinate integrand around `e = s e₃`: `R = |x − e|`, `θ` the
/// polar angle. Returns `(full, odd)` integrands with the Jacobian included.
fn spherical_terms(s: f64, r: f64, th: f64) -> (f64, f64) {
    let (st, ct) = th.sin_cos();
    let d2 = r * r + 4.0 * s * r * ct + 4.0 * s * s;
    let d3 = d2 * d2.sqrt();
    let odd = -ct * (2.0 * s + r * ct) * st / d3;
    let full = st * (r * st * st - ct * (2.0 * s + r * ct)) / d3;
    (full, odd)
}

fn half_space_quadrature(s: f64, order: usize, pick: impl Fn((f64, f64)) -> f64) -> f64 {
    let rule = Rule::legendre(order);
    let mut total = 0.0;
    let panels = 12;
    for half in 0..2 {
        for p in 0..panels {
            let lo = half as f64 * PI / 2.0 + PI / 2.0 * p as f64 / panels as f64;
            let hi = lo + PI / 2.0 / panels as f64;
            total += rule.integrate(lo, hi, |th| {
                let ct = th.cos();
                // R = s v / (1 − v), cut at the face when cos θ < 0
                let vmax = if ct >= 0.0 { 1.0 } else { 1.0 / (1.0 - ct) };
                let breaks = [0.0, 0.25 * vmax, 0.5 * vmax, 0.75 * vmax, 0.9 * vmax, vmax];
                let mut inner = 0.0;
                for w in breaks.windows(2) {
                    inner += rule.integrate(w[0], w[1], |v| {
                        let r = s * v / (1.0 - v);
                        let jac = s / ((1.0 - v) * (1.0 - v));
                        pick(spherical_terms(s, r, th)) * jac
                    });
                }
                inner
            });
        }
    }
    total
}

fn profile_zero(s: f64) -> Estimate {
    let f = |o| half_space_quadrature(s, o, |t| t.0) / (4.0 * PI);
    let (c, fine) = (f(16), f(24));
    Estimate::new(fine, (fine - c).abs())
}

/// `∫ (s−x₃)(s+x₃) / (|x−e|³|x+e|³) dx` over the half-space: the part of the
/// ε = 0 profile integrand that is odd in the in-plane reflection.
pub fn pam_odd_part(s: f64) -> Result<Estimate> {
    if !(s > 0.0) {
        return Err(Error::config(format!("s = {s} must be positive")));
    }
    let f = |o| 2.0 * PI * half_space_quadrature(s, o, |t| t.1);
    let (c, fine) = (f(16), f(24));
    Ok(Estimate::new(fine, (fine - c).abs()))
}

/// Panels in `θ ∈ [0, π/2]` for the damping scale `β`: every term carries
/// `e^{−β sin θ}`, so the mass sits within `θ ≲ 1/β`.
fn angle_breaks(beta: f64) -> Vec<f64> {
    let half = PI / 2.0;
    if beta <= 4.0 {
        return vec![0.0, half / 3.0, 2.0 * half / 3.0, half];
    }
    graded_breaks(0.0, half, 0.1 / beta, 1.6)
}

/// `Φ(β)`: the angular part of the profile integrand, `I₁(σ) = (2π²)⁻¹ ∫ ĥ(k) Φ(kσ) dk`.
fn phi_angle(beta: f64, rule: &Rule) -> f64 {
    let mut s = 0.0;
    for w in angle_breaks(beta).windows(2) {
        s += rule.integrate(w[0], w[1], |th| {
            let (sn, cs) = th.sin_cos();
            let e1 = (-beta * sn).exp();
            let (sb, cb) = (beta * cs).sin_cos();
            sn * (e1 * (cs * sn * sb - cs * cs * cb) + e1 * e1 * cs * cs)
        });
    }
    2.0 * s
}

/// `Ψ(B) = ∫₀^B Φ`, the angular part of the mass.
fn psi_angle(big: f64, rule: &Rule) -> f64 {
    let mut s = 0.0;
    for w in angle_breaks(big).windows(2) {
        s += rule.integrate(w[0], w[1], |th| {
            let (sn, cs) = th.sin_cos();
            let e1 = (-big * sn).exp();
            -sn * cs * e1 * (big * cs).sin() - 0.5 * cs * cs * e1 * e1
        });
    }
    PI / 4.0 + 2.0 * s
}

fn k_breaks(scale: f64) -> Vec<f64> {
    let lo = 1e-4 / scale.max(1.0);
    let mut out = vec![0.0];
    out.extend(graded_breaks(lo, K_MAX, lo, 1.5));
    // keep panels narrower than the oscillation period in k
    let width = 4.0 / scale.max(1e-3);
    let mut refined = vec![0.0];
    for x in out.into_iter().skip(1) {
        let last = *refined.last().unwrap();
        let n = ((x - last) / width).ceil().max(1.0) as usize;
        for i in 1..=n {
            refined.push(last + (x - last) * i as f64 / n as f64);
        }
    }
    refined
}

fn spectral_integral(scale: f64, order: usize, profile: Profile, f: impl Fn(f64, &Rule) -> f64 + Sync) -> f64 {
    let sp = spectra(profile);
    let rule = Rule::legendre(order);
    let breaks = k_breaks(scale);
    let panels: Vec<f64> = breaks
        .par_windows(2)
        .map(|w| {
            rule.integrate(w[0], w[1], |k| {
                let h = sp.phi_hat.eval(k);
                if h == 0.0 {
                    0.0
                } else {
                    h * h * f(k, &rule)
                }
            })
        })
        .collect();
    panels.iter().sum::<f64>() / (2.0 * PI * PI)
}

fn unit_profile(sigma: f64, order: usize, profile: Profile) -> f64 {
    spectral_integral(sigma, order, profile, |k, r| phi_angle(k * sigma, r))
}

/// Boundary mass of the unit-scale profile: `M(Y) = ∫₀^Y I₁(σ) dσ`.
pub fn pam_mass_scaled(big_y: f64, profile: Profile) -> Estimate {
    let f = |o| spectral_integral(big_y, o, profile, |k, r| psi_angle(k * big_y, r) / k);
    let (c, fine) = (f(12), f(16));
    Estimate::new(fine, (fine - c).abs())
}

/// Mollified boundary profile `I_ε(s)`, with `ε = 0` the unmollified one.
///
/// For `s < ε/4` the value is returned with a warning: the profile is
/// bounded there and no longer follows the `1/s` law.
pub fn pam_profile_i(eps: f64, s: f64, profile: Profile) -> Result<Estimate> {
    if !(s > 0.0) || !(eps >= 0.0) {
        return Err(Error::config(format!("profile needs s > 0 and ε ≥ 0, got s = {s}, ε = {eps}")));
    }
    if eps == 0.0 {
        return Ok(profile_zero(s));
    }
    let sigma = s / eps;
    let (c, fine) = (unit_profile(sigma, 12, profile), unit_profile(sigma, 16, profile));
    let mut e = Estimate::new(fine / eps, (fine - c).abs() / eps);
    if s < eps / 4.0 {
        e.warning = Some(format!("s = {s} is inside the mollifier's near field (ε = {eps})"));
    }
    Ok(e)
}

/// `m_ε(y₁) = ∫₀^{y₁} I_ε(s) ds`.
pub fn pam_boundary_mass(eps: f64, y1: f64, profile: Profile) -> Result<Estimate> {
    if !(eps > 0.0 && y1 > eps && y1 <= 1.0) {
        return Err(Error::config(format!("boundary mass needs ε < y₁ ≤ 1, got ε = {eps}, y₁ = {y1}")));
    }
    Ok(pam_mass_scaled(y1 / eps, profile))
}

/// Estimate of `a_ρ = lim (M(Y) − log(Y)/(8π))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ARho {
    pub value: f64,
    /// Spread of the last three extrapolants.
    pub spread: f64,
    /// `(Y, M(Y) − log(Y)/(8π))`.
    pub samples: Vec<(f64, f64)>,
}

/// `a_ρ` by Richardson extrapolation of `M(Y) − log Y/(8π)` with an `O(1/Y)`
/// remainder, over `Y = 8, 16, ..., 256`.
pub fn a_rho_estimate(profile: Profile) -> Result<ARho> {
    let ys = [8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
    let samples: Vec<(f64, f64)> = ys
        .iter()
        .map(|&y| (y, pam_mass_scaled(y, profile).value - y.ln() / (8.0 * PI)))
        .collect();
    let rich: Vec<f64> = samples.windows(2).map(|w| 2.0 * w[1].1 - w[0].1).collect();
    let tail = &rich[rich.len() - 3..];
    let spread = tail.iter().cloned().fold(f64::MIN, f64::max) - tail.iter().cloned().fold(f64::MAX, f64::min);
    if !spread.is_finite() || spread > 1e-3 {
        return Err(Error::NonConvergence { what: "a_rho extrapolation".into(), delta: spread });
    }
    Ok(ARho { value: *rich.last().unwrap(), spread, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unmollified_profile_is_inverse_distance() {
        for &s in &[0.25, 0.5, 1.0] {
            let e = pam_profile_i(0.0, s, Profile::StandardBump).unwrap();
            assert!((e.value * 8.0 * PI * s - 1.0).abs() < 1e-6, "s={s} {e:?}");
        }
    }

    #[test]
    fn odd_part_vanishes() {
        let e = pam_odd_part(1.0).unwrap();
        assert!(e.value.abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn psi_is_primitive_of_phi() {
        let rule = Rule::legendre(16);
        for &b in &[0.3, 2.0, 9.0, 40.0] {
            let h = 1e-4;
            let d = (psi_angle(b + h, &rule) - psi_angle(b - h, &rule)) / (2.0 * h);
            assert!((d - phi_angle(b, &rule)).abs() < 1e-6, "β={b}");
        }
        assert!(psi_angle(0.0, &rule).abs() < 1e-12);
    }

    #[test]
    fn profile_far_field_and_mass_consistency() {
        let p = Profile::StandardBump;
        let far = unit_profile(40.0, 16, p);
        assert!((far * 8.0 * PI * 40.0 - 1.0).abs() < 2e-2, "{far}");
        // M(Y) against a direct σ-quadrature of I₁
        let rule = Rule::legendre(12);
        let breaks = [0.0, 0.25, 0.5, 1.0, 2.0, 3.0];
        let direct: f64 = breaks
            .windows(2)
            .map(|w| rule.integrate(w[0], w[1], |s| unit_profile(s, 12, p)))
            .sum();
        let m = pam_mass_scaled(3.0, p).value;
        assert!((direct - m).abs() < 1e-5 * m.abs().max(1.0), "{direct} {m}");
    }

    #[test]
    fn mollified_profile_converges_to_unmollified() {
        let p = Profile::StandardBump;
        let exact = pam_profile_i0(1.0);
        let errs: Vec<f64> = [0.25, 0.125, 0.0625]
            .iter()
            .map(|&e| (pam_profile_i(e, 1.0, p).unwrap().value - exact).abs())
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn near_field_warns() {
        let e = pam_profile_i(0.1, 0.01, Profile::StandardBump).unwrap();
        assert!(e.warning.is_some());
        assert!(pam_boundary_mass(0.1, 0.05, Profile::StandardBump).is_err());
    }

    #[test]
    fn mass_slope_under_halving() {
        // the far-field profile carries an O(ε/s²) correction, so the
        // per-halving increment approaches log 2/(8π) at rate 1/Y
        let p = Profile::StandardBump;
        let m: Vec<f64> = [16.0, 32.0, 64.0].iter().map(|&y| pam_mass_scaled(y, p).value).collect();
        let expect = 2f64.ln() / (8.0 * PI);
        let r1 = (m[1] - m[0]) / expect - 1.0;
        let r2 = (m[2] - m[1]) / expect - 1.0;
        assert!(r2.abs() < 0.01, "{r1} {r2}");
        assert!((r1 / r2 - 2.0).abs() < 0.3, "{r1} {r2}");
    }
}
