//! Bulk renormalisation constants from the tree expansions.
//!
//! Kernels are truncated with the smooth cutoff between radii `1/2` and `1`:
//! `K̄ = χ(|x|)/(4π|x|)` and `𝒦̄ = χ(√t)χ(|x|)𝒦`. The noise is mollified by
//! the product `η_ε(t)φ_ε(|x|)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spectral::{poisson_truncated_hat, spectra, Table, K_MAX};
use super::Estimate;
use crate::geometry::Frame;
use crate::noise::{make_mollifier, Mollifier, Profile};
use crate::quad::{graded_breaks, Rule};
use crate::special::{cutoff, cutoff_deriv, cutoff_integral, erf};
use crate::{Error, Result};

const INNER: f64 = 0.5;
const OUTER: f64 = 1.0;

/// Logarithmically divergent trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TreeId {
    /// `∇I(⟨2a⟩)` paired with the Hessian of the covariance.
    Pam4a,
    /// `∇I(∇I(⟨2a⟩)·∇IΞ)·∇IΞ`.
    Pam4b,
    /// The sunset tree `𝒦̄ C_ε²` of Φ⁴.
    Phi4,
}

impl std::str::FromStr for TreeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pam-4a" => Ok(TreeId::Pam4a),
            "pam-4b" => Ok(TreeId::Pam4b),
            "phi4" => Ok(TreeId::Phi4),
            other => Err(Error::config(format!("unknown tree '{other}'"))),
        }
    }
}

/// `Raw` is the bare graph integral; `Drawn` includes the factor 2 from the
/// two ways of contracting the pair of noises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    Raw,
    Drawn,
}

impl Convention {
    fn factor(self) -> f64 {
        match self {
            Convention::Raw => 1.0,
            Convention::Drawn => 2.0,
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Convention::Raw),
            "drawn" => Ok(Convention::Drawn),
            other => Err(Error::config(format!("unknown convention '{other}'"))),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::config(format!("bulk constants need 0 < ε ≤ 1/2, got {eps}")));
    }
    Ok(())
}

fn nodes(breaks: &[f64], rule: &Rule) -> Vec<(f64, f64)> {
    breaks.windows(2).flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>()).collect()
}

fn refine(what: &str, f: impl Fn(usize) -> f64) -> Result<Estimate> {
    let coarse = f(12);
    let fine = f(16);
    Estimate::new(fine, (fine - coarse).abs()).checked(what, 1e-3, 1e-6)
}

/// `E|∇(K̄ ∗ ξ_ε)|²`, by radial quadrature of `∇(K̄ ∗ φ_ε)` in real space.
pub fn ell_pam_2a(eps: f64, profile: Profile) -> Result<Estimate> {
    check_eps(eps)?;
    let m = make_mollifier(profile, eps, Frame::Spatial3)?;
    refine("ell_pam_2a", |n| pam_2a_real(eps, &m, n))
}

fn pam_2a_real(eps: f64, m: &Mollifier, order: usize) -> f64 {
    let rule = Rule::legendre(order);
    let phi = |u: f64| m.phi(u / eps) / eps.powi(3);
    let x = |r: f64| cutoff_integral(r, INNER, OUTER);
    let chi = |r: f64| cutoff(r, INNER, OUTER);
    // radial derivative of K̄ ∗ φ_ε
    let grad = |r: f64| {
        let ubreaks: Vec<f64> = if r < eps { vec![0.0, r, eps] } else { vec![0.0, 0.5 * eps, eps] };
        let mut s = 0.0;
        for w in ubreaks.windows(2) {
            s += rule.integrate(w[0], w[1], |u| {
                let h = (x(r + u) - x((r - u).abs())) / (8.0 * PI * r * u);
                let sg = if r >= u { 1.0 } else { -1.0 };
                let dh = (chi(r + u) - sg * chi((r - u).abs())) / (8.0 * PI * r * u) - h / r;
                4.0 * PI * u * u * phi(u) * dh
            });
        }
        s
    };
    let mut rb: Vec<f64> = (0..=4).map(|i| eps * i as f64 / 4.0).collect();
    rb.extend(graded_breaks(eps, OUTER + eps, eps / 4.0, 1.3).into_iter().skip(1));
    nodes(&rb, &rule).iter().map(|&(r, w)| w * 4.0 * PI * r * r * grad(r).powi(2)).sum()
}

/// Fourier form of [`ell_pam_2a`], `(2π²)⁻¹ ∫ k⁴ K̄̂(k)² φ̂(εk)² dk`.
pub fn ell_pam_2a_fourier(eps: f64, profile: Profile) -> Result<Estimate> {
    check_eps(eps)?;
    let sp = spectra(profile);
    refine("ell_pam_2a_fourier", |n| {
        let rule = Rule::legendre(n);
        let kmax = K_MAX / eps;
        let panels = (kmax / 0.5).ceil() as usize;
        let br: Vec<f64> = (0..=panels).map(|i| kmax * i as f64 / panels as f64).collect();
        nodes(&br, &rule)
            .iter()
            .map(|&(k, w)| {
                let kb = poisson_truncated_hat(k);
                let h = sp.phi_hat.eval(eps * k).powi(2);
                w * k.powi(4) * kb * kb * h
            })
            .sum::<f64>()
            / (2.0 * PI * PI)
    })
}

/// Coefficient `L` of the leading `L/ε` growth of [`ell_pam_2a`]:
/// `(2π²)⁻¹ ∫ φ̂²`.
pub fn ell_pam_2a_leading(profile: Profile) -> f64 {
    let sp = spectra(profile);
    let rule = Rule::legendre(16);
    let br: Vec<f64> = (0..=400).map(|i| K_MAX * i as f64 / 400.0).collect();
    nodes(&br, &rule).iter().map(|&(k, w)| w * sp.phi_hat.eval(k).powi(2)).sum::<f64>() / (2.0 * PI * PI)
}

/// `E(𝒦̄ ∗ ξ_ε)²` by quadrature of `𝒦̄ ∗ (η_ε φ_ε)` in `(t, |x|)`.
pub fn ell_phi_2(eps: f64, profile: Profile) -> Result<Estimate> {
    check_eps(eps)?;
    let m = make_mollifier(profile, eps, Frame::Spacetime4)?;
    refine("ell_phi_2", |n| phi_2_real(eps, &m, n / 2))
}

/// Spherical average of `χ(w) p_s(w)` over the sphere of radius `v` centred
/// at distance `r` from the origin.
fn heat_shell(s: f64, r: f64, v: f64, rule: &Rule) -> f64 {
    let (a, b) = ((r - v).abs(), r + v);
    let norm = (4.0 * PI * s).powf(-1.5);
    let integral = if b <= INNER {
        2.0 * s * norm * ((-a * a / (4.0 * s)).exp() - (-b * b / (4.0 * s)).exp())
    } else {
        rule.integrate(a, b.min(OUTER), |w| cutoff(w, INNER, OUTER) * w * norm * (-w * w / (4.0 * s)).exp())
    };
    integral / (2.0 * r * v)
}

/// Panels on `[0, ε]` clustered around `r` on the scale `width`.
fn shell_breaks(r: f64, eps: f64, width: f64) -> Vec<f64> {
    if r >= eps {
        return vec![0.0, 0.5 * eps, eps];
    }
    let mut out: Vec<f64> = graded_breaks(0.0, r, width, 2.0).into_iter().rev().map(|x| r - x).collect();
    out.extend(graded_breaks(r, eps, width, 2.0).into_iter().skip(1));
    out
}

fn phi_2_real(eps: f64, m: &Mollifier, order: usize) -> f64 {
    let rule = Rule::legendre(order);
    let wrule = Rule::legendre(24);
    let e2 = eps * eps;
    let eta = |tau: f64| m.eta(tau / e2) / e2;
    let phi = |u: f64| m.phi(u / eps) / eps.powi(3);
    let g = |t: f64, r: f64| {
        let hi = t.min(e2);
        if hi <= -e2 {
            return 0.0;
        }
        // graded toward τ = t, where the heat kernel concentrates
        let tb: Vec<f64> = if t < e2 {
            graded_breaks(0.0, hi + e2, 1e-3 * e2, 2.0).into_iter().rev().map(|x| hi - x).collect()
        } else {
            vec![-e2, 0.0, e2]
        };
        let mut total = 0.0;
        for tw in tb.windows(2) {
            total += rule.integrate(tw[0], tw[1], |tau| {
                let s = t - tau;
                if s <= 0.0 {
                    return 0.0;
                }
                let ct = cutoff(s.sqrt(), INNER, OUTER);
                if ct == 0.0 {
                    return 0.0;
                }
                let ub = shell_breaks(r, eps, 0.5 * s.sqrt());
                let mut inner = 0.0;
                for uw in ub.windows(2) {
                    inner += rule.integrate(uw[0], uw[1], |u| {
                        4.0 * PI * u * u * phi(u) * heat_shell(s, r, u, &wrule)
                    });
                }
                eta(tau) * ct * inner
            });
        }
        total
    };
    let mut tb: Vec<f64> = (0..=4).map(|i| -e2 + 2.0 * e2 * i as f64 / 4.0).collect();
    tb.extend(graded_breaks(e2, OUTER * OUTER + e2, e2 / 2.0, 1.35).into_iter().skip(1));
    let tn = nodes(&tb, &rule);
    let parts: Vec<f64> = tn
        .par_iter()
        .map(|&(t, wt)| {
            let scale = t.max(e2).sqrt();
            let mut rb = vec![0.0];
            rb.extend(graded_breaks(0.05 * scale, OUTER + eps, 0.05 * scale, 1.4));
            rb.retain(|&r| r <= 12.0 * scale + 2.0 * eps || r == 0.0);
            if *rb.last().unwrap() < (12.0 * scale + 2.0 * eps).min(OUTER + eps) {
                rb.push((12.0 * scale + 2.0 * eps).min(OUTER + eps));
            }
            wt * nodes(&rb, &rule).iter().map(|&(r, wr)| wr * 4.0 * PI * r * r * g(t, r).powi(2)).sum::<f64>()
        })
        .collect();
    parts.iter().sum()
}

/// Coefficient `L₀` of the leading `L₀/ε` growth of [`ell_phi_2`]:
/// `(2π)⁻⁴ ∫ η̂(ω)² φ̂(k)² / (ω² + k⁴) dω d³k`.
pub fn ell_phi_2_leading(profile: Profile) -> f64 {
    let sp = spectra(profile);
    let rule = Rule::legendre(16);
    let mut kb = vec![0.0];
    kb.extend(graded_breaks(1e-3, K_MAX, 1e-3, 1.2));
    let kn = nodes(&kb, &rule);
    let mut ob = vec![0.0];
    ob.extend(graded_breaks(1e-3, K_MAX, 1e-3, 1.2));
    let on = nodes(&ob, &rule);
    let total: f64 = kn
        .iter()
        .map(|&(k, wk)| {
            let ph = sp.phi_hat.eval(k).powi(2);
            let k4 = k.powi(4);
            let inner: f64 = on.iter().map(|&(om, wo)| wo * sp.eta_hat.eval(om).powi(2) / (om * om + k4)).sum();
            wk * 4.0 * PI * k * k * ph * 2.0 * inner
        })
        .sum();
    total / (2.0 * PI).powi(4)
}

fn sph_j0(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `(j₁(x), j₁(x)/x)`.
fn sph_j1(x: f64) -> (f64, f64) {
    if x.abs() < 1e-3 {
        let q = 1.0 / 3.0 - x * x / 30.0;
        (x * q, q)
    } else {
        let j = x.sin() / (x * x) - x.cos() / x;
        (j, j / x)
    }
}

/// `C'`, `C''` of the covariance of `K̄ ∗ ξ_ε`, and `F'` where
/// `F̂ = −k² K̄̂³ φ̂(εk)²`, at each radius.
fn pam_radial(eps: f64, profile: Profile, radii: &[f64], order: usize) -> Vec<[f64; 3]> {
    let sp = spectra(profile);
    let rule = Rule::legendre(order);
    let kmax = K_MAX / eps;
    let mut kb: Vec<f64> = (0..=400).map(|i| K_MAX * i as f64 / 400.0).collect();
    let extra = ((kmax - K_MAX) / 2.0).ceil() as usize;
    kb.extend((1..=extra).map(|i| K_MAX + (kmax - K_MAX) * i as f64 / extra as f64));
    let coeffs: Vec<(f64, [f64; 3])> = nodes(&kb, &rule)
        .into_iter()
        .filter_map(|(k, w)| {
            let h = sp.phi_hat.eval(eps * k).powi(2);
            if h == 0.0 {
                return None;
            }
            let kb = poisson_truncated_hat(k);
            let c = kb * kb * h;
            let f = -k * k * kb * kb * kb * h;
            let n = w / (2.0 * PI * PI);
            Some((k, [n * k.powi(3) * c, n * k.powi(4) * c, n * k.powi(3) * f]))
        })
        .collect();
    radii
        .par_iter()
        .map(|&r| {
            let mut out = [0.0; 3];
            for &(k, a) in &coeffs {
                let x = k * r;
                let (j1, j1x) = sph_j1(x);
                out[0] -= a[0] * j1;
                out[1] += a[1] * (2.0 * j1x - sph_j0(x));
                out[2] -= a[2] * j1;
            }
            out
        })
        .collect()
}

fn pam_graph(tree: TreeId, eps: f64, profile: Profile, order: usize) -> f64 {
    let rule = Rule::legendre(order);
    let mut rb = vec![0.0];
    rb.extend(graded_breaks(eps / 50.0, OUTER, eps / 50.0, 1.3));
    let rn = nodes(&rb, &rule);
    let radii: Vec<f64> = rn.iter().map(|p| p.0).collect();
    let fields = pam_radial(eps, profile, &radii, order);
    rn.iter()
        .zip(&fields)
        .map(|(&(r, w), &[c1, c2, f1])| {
            let chi = cutoff(r, INNER, OUTER);
            match tree {
                TreeId::Pam4a => w * r * chi * (c2 * c2 + 2.0 * (c1 / r).powi(2)),
                _ => {
                    // 4πr² K̄'
                    let dk = r * cutoff_deriv(r, INNER, OUTER) - chi;
                    w * (-dk * c2) * f1
                }
            }
        })
        .sum()
}

/// Unit-scale autocorrelations of the mollifier and their moments.
struct Autocorrelation {
    /// `η ∗ η` on `[-2, 2]`.
    time: Table,
    /// `φ ∗ φ` as a radial function on `[0, 2]`.
    space: Table,
    /// `∫ τ² (η ∗ η)(τ) dτ`.
    time_var: f64,
    /// `∫ |x|² (φ ∗ φ)(x) dx`.
    space_m2: f64,
    /// `∫ |x|⁴ (φ ∗ φ)(x) dx`.
    space_m4: f64,
}

fn autocorrelation(profile: Profile) -> &'static Autocorrelation {
    static T: OnceLock<Vec<(Profile, Autocorrelation)>> = OnceLock::new();
    let all = T.get_or_init(|| {
        [Profile::StandardBump, Profile::CosineBump]
            .into_iter()
            .map(|p| {
                let m = make_mollifier(p, 1.0, Frame::Spacetime4).expect("unit mollifier");
                let rule = Rule::legendre(32);
                let time = Table::uniform(-2.0, 2.0, 0.002, |tau| {
                    let (lo, hi) = ((tau - 1.0).max(-1.0), (tau + 1.0).min(1.0));
                    if hi <= lo {
                        return 0.0;
                    }
                    let mid = 0.5 * (lo + hi);
                    rule.integrate(lo, mid, |s| m.eta(s) * m.eta(tau - s))
                        + rule.integrate(mid, hi, |s| m.eta(s) * m.eta(tau - s))
                });
                let sp = spectra(p);
                let r16 = Rule::legendre(16);
                let br: Vec<f64> = (0..=800).map(|i| K_MAX * i as f64 / 800.0).collect();
                let kn: Vec<(f64, f64)> = nodes(&br, &r16)
                    .into_iter()
                    .map(|(k, w)| (k, w * k * k * sp.phi_hat.eval(k).powi(2) / (2.0 * PI * PI)))
                    .collect();
                let space = Table::uniform(0.0, 2.0, 0.002, |v| {
                    if v >= 2.0 {
                        return 0.0;
                    }
                    kn.iter().map(|&(k, w)| w * sph_j0(k * v)).sum()
                });
                let fine: Vec<f64> = (0..=64).map(|i| i as f64 / 32.0).collect();
                let m2: f64 = nodes(&fine, &r16).iter().map(|&(r, w)| w * 4.0 * PI * r.powi(4) * m.phi(r)).sum();
                let m4: f64 = nodes(&fine, &r16).iter().map(|&(r, w)| w * 4.0 * PI * r.powi(6) * m.phi(r)).sum();
                let t2: f64 = nodes(&fine, &r16).iter().map(|&(t, w)| w * 2.0 * t * t * m.eta(t)).sum();
                // moments of a self-convolution of a centred isotropic density
                let ac = Autocorrelation {
                    time,
                    space,
                    time_var: 2.0 * t2,
                    space_m2: 2.0 * m2,
                    space_m4: 2.0 * m4 + 2.0 * m2 * m2 + 4.0 * m2 * m2 / 3.0,
                };
                (p, ac)
            })
            .collect()
    });
    &all.iter().find(|e| e.0 == profile).expect("profile table").1
}

/// `E(s) = s erf(s/c) + c e^{−s²/c²}/√π`, a primitive of `erf(s/c)`.
fn erf_primitive(s: f64, c: f64) -> f64 {
    if c == 0.0 {
        return s.abs();
    }
    s * erf(s / c) + c / PI.sqrt() * (-(s * s) / (c * c)).exp()
}

/// `erf(x/c)/x`, the `v → 0` limit of the shell average times `8π`.
fn erf_over_x(x: f64, c: f64) -> f64 {
    if c == 0.0 {
        return 1.0 / x;
    }
    if x < 1e-8 * c {
        return 2.0 / (c * PI.sqrt());
    }
    erf(x / c) / x
}

/// Stationary covariance `erf(r/2√T)/(8πr)` of the unmollified field.
fn heat_covariance(lag: f64, r: f64) -> f64 {
    erf_over_x(r, 2.0 * lag.sqrt()) / (8.0 * PI)
}

/// `∫ f` over `[a, b]` in `panels` pieces, with a breakpoint at `k` where
/// `f` may have a square-root singularity. Pieces next to `k` are
/// integrated in `s` with `x = k ± (k − edge)s²`.
fn integrate_kinked(a: f64, b: f64, k: f64, panels: usize, rule: &Rule, f: impl Fn(f64) -> f64) -> f64 {
    let mut br: Vec<f64> = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
    let inside = k > a && k < b;
    if inside {
        br.retain(|&x| (x - k).abs() > 1e-12 * (b - a));
        br.push(k);
        br.sort_by(f64::total_cmp);
    }
    let mut total = 0.0;
    for w in br.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if inside && hi == k {
            let len = k - lo;
            total += rule.integrate(0.0, 1.0, |s| 2.0 * len * s * f(k - len * s * s));
        } else if inside && lo == k {
            let len = hi - k;
            total += rule.integrate(0.0, 1.0, |s| 2.0 * len * s * f(k + len * s * s));
        } else {
            total += rule.integrate(lo, hi, &f);
        }
    }
    total
}

/// Lags beyond this many `ε²` use the moment expansion of the mollified
/// covariance.
const MOMENT_LAG: f64 = 64.0;

/// Covariance of `𝒦 ∗ ξ_ε` at time lag `t` and distance `r`.
fn phi4_covariance(eps: f64, t: f64, r: f64, ac: &Autocorrelation, rule: &Rule) -> f64 {
    let e2 = eps * eps;
    if t > MOMENT_LAG * e2 {
        // Q + (ε²m₂/6)∂_T Q + ε⁴(σ²/2 + m₄/120)∂²_T Q with ∂_T Q = −p_T/2
        let p = (4.0 * PI * t).powf(-1.5) * (-r * r / (4.0 * t)).exp();
        let dp = p * (r * r / (4.0 * t * t) - 1.5 / t);
        let c2 = ac.time_var / 2.0 + ac.space_m4 / 120.0;
        return heat_covariance(t, r) - e2 * ac.space_m2 / 12.0 * p - e2 * e2 * c2 * dp / 2.0;
    }
    let shell = |lag: f64, v: f64| {
        let c = 2.0 * lag.sqrt();
        if v < 1e-6 * r || r == 0.0 {
            return erf_over_x(v.max(r), c) / (8.0 * PI);
        }
        (erf_primitive(r + v, c) - erf_primitive((r - v).abs(), c)) / (16.0 * PI * r * v)
    };
    integrate_kinked(-2.0, 2.0, t / e2, 6, rule, |tau| {
        let a = ac.time.eval_in(tau).unwrap_or(0.0);
        if a <= 0.0 {
            return 0.0;
        }
        let lag = (t - e2 * tau).abs();
        a * integrate_kinked(0.0, 2.0, r / eps, 4, rule, |v| {
            let rho = ac.space.eval_in(v).unwrap_or(0.0);
            4.0 * PI * v * v * rho * shell(lag, eps * v)
        })
    })
}

/// Raw sunset integral `∫ 𝒦̄ C_ε²` at Gauss order `order`.
pub fn phi4_graph(eps: f64, profile: Profile, order: usize) -> f64 {
    let rule = Rule::legendre(order);
    let ac = autocorrelation(profile);
    let lmin = (1e-4 * eps * eps).ln();
    let panels = ((-lmin) / 0.5).ceil() as usize;
    let mut lb: Vec<f64> = (0..=panels).map(|i| lmin * (1.0 - i as f64 / panels as f64)).collect();
    // the time cutoff switches on at √t = 1/2, the moment expansion at 64ε²
    for edge in [2.0 * INNER.ln(), (MOMENT_LAG * eps * eps).ln()] {
        if edge < 0.0 {
            lb.retain(|&l| (l - edge).abs() > 1e-9);
            lb.push(edge);
        }
    }
    lb.sort_by(f64::total_cmp);
    let ln = nodes(&lb, &rule);
    let parts: Vec<f64> = ln
        .par_iter()
        .map(|&(lam, wl)| {
            let t = lam.exp();
            let ct = cutoff(t.sqrt(), INNER, OUTER);
            if ct == 0.0 {
                return 0.0;
            }
            let mut zb: Vec<f64> = (0..=7).map(|i| 2.0 * i as f64).collect();
            for edge in [INNER / t.sqrt(), OUTER / t.sqrt()] {
                if edge < 14.0 {
                    zb.retain(|&z| z < edge);
                    zb.push(edge);
                }
            }
            let s: f64 = nodes(&zb, &rule)
                .iter()
                .map(|&(z, wz)| {
                    let r = z * t.sqrt();
                    let cr = cutoff(r, INNER, OUTER);
                    if cr == 0.0 {
                        return 0.0;
                    }
                    let weight = 4.0 * PI * z * z * (4.0 * PI).powf(-1.5) * (-z * z / 4.0).exp();
                    let c = phi4_covariance(eps, t, r, ac, &rule);
                    wz * weight * cr * (t * c * c)
                })
                .sum();
            wl * ct * s
        })
        .collect();
    parts.iter().sum()
}

/// Graph constant of `tree` at scale `ε` under `convention`.
pub fn graph_log_constant(tree: TreeId, eps: f64, profile: Profile, convention: Convention) -> Result<Estimate> {
    check_eps(eps)?;
    let what = format!("{tree:?} graph constant");
    let e = match tree {
        TreeId::Phi4 => {
            let coarse = phi4_graph(eps, profile, 8);
            let fine = phi4_graph(eps, profile, 10);
            Estimate::new(fine, (fine - coarse).abs())
        }
        _ => {
            let coarse = pam_graph(tree, eps, profile, 12);
            let fine = pam_graph(tree, eps, profile, 16);
            Estimate::new(fine, (fine - coarse).abs())
        }
    };
    let e = e.checked(&what, 1e-3, 1e-4)?;
    let f = convention.factor();
    Ok(Estimate::new(f * e.value, f * e.refinement_delta))
}

/// Predicted growth of [`graph_log_constant`] per halving of `ε` under the
/// raw convention; `0` for trees that stay bounded.
pub fn graph_log_slope(tree: TreeId) -> f64 {
    match tree {
        TreeId::Pam4a => 2f64.ln() / (32.0 * PI * PI),
        TreeId::Pam4b => 0.0,
        TreeId::Phi4 => {
            let rule = Rule::legendre(24);
            let br: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64).collect();
            let kappa: f64 = nodes(&br, &rule)
                .iter()
                .map(|&(z, w)| {
                    let c = heat_covariance(1.0, z);
                    w * 4.0 * PI * z * z * (4.0 * PI).powf(-1.5) * (-z * z / 4.0).exp() * c * c
                })
                .sum();
            2.0 * kappa * 2f64.ln()
        }
    }
}

/// `ℓ(PAM-2a) + ℓ(PAM-4a) + 4ℓ(PAM-4b)`.
pub fn bulk_constant_pam(eps: f64, profile: Profile, convention: Convention) -> Result<Estimate> {
    let a = ell_pam_2a(eps, profile)?;
    let b = graph_log_constant(TreeId::Pam4a, eps, profile, convention)?;
    let c = graph_log_constant(TreeId::Pam4b, eps, profile, convention)?;
    Ok(Estimate::new(
        a.value + b.value + 4.0 * c.value,
        a.refinement_delta + b.refinement_delta + 4.0 * c.refinement_delta,
    ))
}

/// `ℓ(Φ-2) − 3ℓ(Φ-4)`.
pub fn bulk_constant_phi4(eps: f64, profile: Profile, convention: Convention) -> Result<Estimate> {
    let a = ell_phi_2(eps, profile)?;
    let b = graph_log_constant(TreeId::Phi4, eps, profile, convention)?;
    Ok(Estimate::new(a.value - 3.0 * b.value, a.refinement_delta + 3.0 * b.refinement_delta))
}
