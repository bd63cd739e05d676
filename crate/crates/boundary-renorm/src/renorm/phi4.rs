//! Boundary profile and boundary mass of the parabolic (Φ⁴) tree.
//!
//! With the Neumann kernel the boundary part of `E|𝒦 ∗ ξ_ε|²` at distance
//! `s` from the face is `ε⁻¹ I₁(s/ε)`, with `I₁` an integral over the
//! space-time frequency `(ω, k)`. Writing `μ = √(|q|² + iω)` (`q` the
//! in-plane part of `k`) and `A = |k|² + iω`, the integrand is
//! `2 Re[−ik₃ e^{(ik₃−μ)σ} / (μ|A|²)] + k₃² e^{−2 Re μ σ} / (|μ|²|A|²)`
//! against `η̂(ω)² φ̂(k)²`. Unmollified, the profile is `1/(16πs)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::closed::{i0_heat, j0_log_integral};
use super::spectral::{spectra, K_MAX};
use super::Estimate;
use crate::noise::Profile;
use crate::quad::{graded_breaks, two_sided_breaks, Rule};
use crate::{Error, Result};

#[derive(Clone, Copy)]
enum Quantity {
    /// Profile at `σ`.
    Profile(f64),
    /// Mass over `[0, Y]`.
    Mass(f64),
}

impl Quantity {
    fn scale(self) -> f64 {
        match self {
            Quantity::Profile(s) | Quantity::Mass(s) => s,
        }
    }

    fn term(self, k3: f64, mu: Complex64, a_abs2: f64) -> f64 {
        let i = Complex64::new(0.0, 1.0);
        let mu_abs2 = mu.norm_sqr();
        let re_mu = mu.re;
        match self {
            Quantity::Profile(s) => {
                let p1 = -i * k3 * ((i * k3 - mu) * s).exp() / (mu * a_abs2);
                let p2 = k3 * k3 * (-2.0 * re_mu * s).exp() / (mu_abs2 * a_abs2);
                2.0 * p1.re + p2
            }
            Quantity::Mass(y) => {
                let z = i * k3 - mu;
                let t1 = -i * k3 * (1.0 - (z * y).exp()) / (mu * a_abs2 * (mu - i * k3));
                let x = 2.0 * re_mu * y;
                // (1 − e^{−x})/(2 Re μ), stable for small Re μ
                let damp = if x < 1e-8 { y } else { -(-x).exp_m1() / (2.0 * re_mu) };
                let t2 = k3 * k3 * damp / (mu_abs2 * a_abs2);
                2.0 * t1.re + t2
            }
        }
    }
}

fn with_panels(breaks: &[f64], rule: &Rule) -> Vec<(f64, f64)> {
    breaks.windows(2).flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>()).collect()
}

fn unit_integral(q: Quantity, order: usize, profile: Profile) -> f64 {
    let sp = spectra(profile);
    let rule = Rule::legendre(order);
    let scale = q.scale().max(1.0);
    let mut kb = vec![0.0];
    kb.extend(graded_breaks(1e-3 / scale, K_MAX, 1e-3 / scale, 1.25));
    let kappas = with_panels(&kb, &rule);
    // ω = κ² w
    let mut wb = vec![0.0];
    wb.extend(graded_breaks(1e-3, 1e4, 1e-3, 1.25));
    let ws = with_panels(&wb, &rule);
    let parts: Vec<f64> = kappas
        .par_iter()
        .map(|&(kap, wk)| {
            let ph = sp.phi_hat.eval(kap);
            let hs = ph * ph;
            if hs < 1e-30 {
                return 0.0;
            }
            let first = (0.5 / (kap * q.scale())).min(0.2);
            let thetas = with_panels(&two_sided_breaks(0.0, PI, first, 1.5), &rule);
            let k2 = kap * kap;
            let mut acc = 0.0;
            for &(w, ww) in &ws {
                let om = k2 * w;
                if om > K_MAX {
                    break;
                }
                let eh = sp.eta_hat.eval(om);
                if eh == 0.0 {
                    continue;
                }
                let a_abs2 = k2 * k2 + om * om;
                let mut inner = 0.0;
                for &(th, wt) in &thetas {
                    let (sn, cs) = th.sin_cos();
                    let q2 = k2 * sn * sn;
                    let mu = Complex64::new(q2, om).sqrt();
                    inner += wt * sn * q.term(kap * cs, mu, a_abs2);
                }
                acc += ww * k2 * eh * eh * inner;
            }
            // two signs of ω, shell measure 2πκ² sin θ
            wk * 2.0 * 2.0 * PI * k2 * hs * acc
        })
        .collect();
    parts.iter().sum::<f64>() / (2.0 * PI).powi(4)
}

fn refined(q: Quantity, profile: Profile) -> Estimate {
    let coarse = unit_integral(q, 8, profile);
    let fine = unit_integral(q, 12, profile);
    Estimate::new(fine, (fine - coarse).abs())
}

/// Neumann boundary mass of the unit-scale profile over `[0, Y]`.
pub fn phi4_mass_scaled(big_y: f64, profile: Profile) -> Estimate {
    refined(Quantity::Mass(big_y), profile)
}

/// Mollified Neumann boundary profile; `ε = 0` gives the unmollified
/// `1/(16πs)` by direct space-time quadrature.
pub fn phi4_profile_i(eps: f64, s: f64, profile: Profile) -> Result<Estimate> {
    if !(s > 0.0) || !(eps >= 0.0) {
        return Err(Error::config(format!("profile needs s > 0 and ε ≥ 0, got s = {s}, ε = {eps}")));
    }
    if eps == 0.0 {
        return i0_heat(s);
    }
    let e = refined(Quantity::Profile(s / eps), profile);
    let mut out = Estimate::new(e.value / eps, e.refinement_delta / eps);
    if s < eps / 4.0 {
        out.warning = Some(format!("s = {s} is inside the mollifier's near field (ε = {eps})"));
    }
    Ok(out)
}

/// Boundary mass `∫₀^{y₁}` of the Φ⁴ profile. With `robin = Some(c)` the
/// Robin correction `∫_ε^{y₁} J⁰(cs)/s ds` is added.
pub fn phi4_boundary_mass(eps: f64, y1: f64, profile: Profile, robin: Option<f64>) -> Result<Estimate> {
    if !(eps > 0.0 && y1 > eps && y1 <= 1.0) {
        return Err(Error::config(format!("boundary mass needs ε < y₁ ≤ 1, got ε = {eps}, y₁ = {y1}")));
    }
    let mut e = phi4_mass_scaled(y1 / eps, profile);
    if let Some(c) = robin {
        if !(c > 0.0) {
            return Err(Error::config(format!("Robin parameter must be positive, got {c}")));
        }
        e.value += j0_log_integral(eps * c, y1 * c)?;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_field_profile_matches_heat_overlap() {
        let p = Profile::StandardBump;
        let e = refined(Quantity::Profile(20.0), p);
        let target = 1.0 / (16.0 * PI * 20.0);
        assert!((e.value / target - 1.0).abs() < 0.03, "{e:?} {target}");
    }

    #[test]
    fn mass_grows_by_log_two_over_sixteen_pi() {
        let p = Profile::StandardBump;
        let m: Vec<f64> = [8.0, 16.0, 32.0].iter().map(|&y| phi4_mass_scaled(y, p).value).collect();
        let expect = 2f64.ln() / (16.0 * PI);
        let r2 = (m[2] - m[1]) / expect - 1.0;
        assert!(r2.abs() < 0.03, "{m:?}");
    }

    #[test]
    fn robin_correction_is_negative() {
        let p = Profile::StandardBump;
        let n = phi4_boundary_mass(0.125, 0.5, p, None).unwrap();
        let r = phi4_boundary_mass(0.125, 0.5, p, Some(2.0)).unwrap();
        assert!(r.value < n.value);
    }
}
