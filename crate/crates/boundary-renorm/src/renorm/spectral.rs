//! Tabulated radial Fourier transforms used by the constant computations.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::noise::Profile;
use crate::quad::Rule;
use crate::special::cutoff;

/// Largest tabulated wave number; transforms of the unit-scale bumps are
/// below `1e-15` beyond it.
pub const K_MAX: f64 = 200.0;
const STEP: f64 = 0.005;

/// Uniformly sampled function with four-point Lagrange interpolation.
#[derive(Debug, Clone)]
pub struct Table {
    x0: f64,
    step: f64,
    values: Vec<f64>,
}

impl Table {
    /// Sample `f` on `x0, x0 + step, ..., x1`.
    pub fn uniform(x0: f64, x1: f64, step: f64, f: impl Fn(f64) -> f64 + Sync) -> Self {
        use rayon::prelude::*;
        let n = ((x1 - x0) / step).round() as usize + 1;
        let values = (0..n).into_par_iter().map(|i| f(x0 + i as f64 * step)).collect();
        Table { x0, step, values }
    }

    fn build(f: impl Fn(f64) -> f64 + Sync) -> Self {
        Self::uniform(0.0, K_MAX, STEP, f)
    }

    /// Upper end of the sampled range.
    pub fn end(&self) -> f64 {
        self.x0 + (self.values.len() - 1) as f64 * self.step
    }

    /// Interpolated value inside the sampled range.
    pub fn eval_in(&self, x: f64) -> Option<f64> {
        if !(x >= self.x0 && x <= self.end()) {
            return None;
        }
        let pos = (x - self.x0) / self.step;
        let n = self.values.len();
        let i = (pos.floor() as usize).clamp(1, n - 3);
        let u = pos - i as f64;
        let (f0, f1, f2, f3) = (
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        );
        // nodes at -1, 0, 1, 2
        let l0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let l1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let l2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let l3 = (u + 1.0) * u * (u - 1.0) / 6.0;
        Some(f0 * l0 + f1 * l1 + f2 * l2 + f3 * l3)
    }

    /// Interpolated value of an even function; zero beyond the table.
    pub fn eval(&self, k: f64) -> f64 {
        self.eval_in(k.abs()).unwrap_or(0.0)
    }
}

/// Fourier data of one mollifier profile at unit scale.
#[derive(Debug)]
pub struct ProfileSpectra {
    /// `φ̂(k)`, with `φ̂(0) = 1`.
    pub phi_hat: Table,
    /// `η̂(ω)`, with `η̂(0) = 1`.
    pub eta_hat: Table,
}

fn nodes_on(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let rule = Rule::legendre(order);
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + (b - a) * p as f64 / panels as f64;
        let hi = a + (b - a) * (p + 1) as f64 / panels as f64;
        out.extend(rule.mapped(lo, hi));
    }
    out
}

/// Cached spectra of `profile`.
pub fn spectra(profile: Profile) -> Arc<ProfileSpectra> {
    static CACHE: OnceLock<Mutex<HashMap<Profile, Arc<ProfileSpectra>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().expect("spectra cache poisoned").get(&profile) {
        return s.clone();
    }
    let nodes = nodes_on(0.0, 1.0, 64, 24);
    let shell: Vec<(f64, f64)> = nodes
        .iter()
        .map(|&(r, w)| (r, w * 4.0 * PI * r * r * profile.raw(r)))
        .collect();
    let line: Vec<(f64, f64)> = nodes.iter().map(|&(t, w)| (t, 2.0 * w * profile.raw(t))).collect();
    let z3: f64 = shell.iter().map(|p| p.1).sum();
    let z1: f64 = line.iter().map(|p| p.1).sum();
    let phi_hat = Table::build(|k| {
        shell
            .iter()
            .map(|&(r, w)| {
                let kr = k * r;
                let sinc = if kr < 1e-8 { 1.0 } else { kr.sin() / kr };
                w * sinc
            })
            .sum::<f64>()
            / z3
    });
    let eta_hat = Table::build(|om| line.iter().map(|&(t, w)| w * (om * t).cos()).sum::<f64>() / z1);
    let s = Arc::new(ProfileSpectra { phi_hat, eta_hat });
    cache.lock().expect("spectra cache poisoned").insert(profile, s.clone());
    s
}

/// Fourier transform `K̄̂(k)` of the truncated Poisson kernel
/// `χ(|x|)/(4π|x|)` with cutoff radii `(0.5, 1)`.
pub fn poisson_truncated_hat(k: f64) -> f64 {
    static T: OnceLock<Table> = OnceLock::new();
    let k = k.abs();
    if k >= K_MAX {
        return 1.0 / (k * k);
    }
    T.get_or_init(|| {
        let nodes = nodes_on(0.0, 1.0, 64, 24);
        Table::build(|k| {
            nodes
                .iter()
                .map(|&(r, w)| {
                    let s = if k * r < 1e-8 { r } else { (k * r).sin() / k };
                    w * cutoff(r, 0.5, 1.0) * s
                })
                .sum::<f64>()
        })
    })
    .eval(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Frame;
    use crate::noise::make_mollifier;

    #[test]
    fn tables_match_direct_transforms() {
        let m = make_mollifier(Profile::StandardBump, 1.0, Frame::Spacetime4).unwrap();
        let s = spectra(Profile::StandardBump);
        for &k in &[0.0, 0.37, 3.3, 17.0, 55.5] {
            assert!((s.phi_hat.eval(k) - m.phi_hat(k)).abs() < 1e-9, "k={k}");
            assert!((s.eta_hat.eval(k) - m.eta_hat(k)).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn truncated_poisson_transform_limits() {
        let rule = Rule::legendre(40);
        let breaks: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        for &k in &[0.7, 12.3, 150.0] {
            let direct = crate::quad::composite(&rule, &breaks, |r| cutoff(r, 0.5, 1.0) * (k * r).sin() / k);
            assert!((poisson_truncated_hat(k) - direct).abs() < 1e-10, "k={k}");
        }
        // the cutoff only contributes at order k⁻⁶
        let big = poisson_truncated_hat(150.0) * 150.0 * 150.0;
        assert!((big - 1.0).abs() < 1e-4, "{big}");
        let small = poisson_truncated_hat(1e-3);
        let zero = poisson_truncated_hat(0.0);
        assert!((small - zero).abs() < 1e-6);
    }
}
