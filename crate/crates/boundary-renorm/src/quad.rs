//! Fixed and adaptive one-dimensional quadrature building blocks.
//!
//! Multi-dimensional integrals in this crate are nested products of these
//! rules on graded panels, which keeps every constant bit-reproducible.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::laguerre::GaussLaguerre;
use gauss_quad::legendre::GaussLegendre;

/// Gauss nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Gauss–Legendre rule with `n` points, cached per `n`.
    pub fn legendre(n: usize) -> Arc<Rule> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("rule cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| {
                let gl = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
                let mut pairs: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (*x, *w)).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                Arc::new(Rule {
                    nodes: pairs.iter().map(|p| p.0).collect(),
                    weights: pairs.iter().map(|p| p.1).collect(),
                })
            })
            .clone()
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, w * h))
    }
}

/// Gauss–Laguerre rule for `∫_0^∞ e^{-u} f(u) du`, cached per `n`.
pub fn laguerre(n: usize) -> Arc<Rule> {
    laguerre_alpha(n, 0)
}

/// Generalised Gauss–Laguerre rule for `∫_0^∞ u^α e^{-u} f(u) du` with
/// integer `α ≥ 0`.
pub fn laguerre_alpha(n: usize, alpha: u32) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("rule cache poisoned");
    guard
        .entry((n, alpha))
        .or_insert_with(|| {
            let gl = GaussLaguerre::new(
                NonZeroUsize::new(n.max(1)).unwrap(),
                (alpha as f64).try_into().unwrap(),
            );
            let mut pairs: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (*x, *w)).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(Rule {
                nodes: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
            })
        })
        .clone()
}

/// Breakpoints `a, a+d, ...` growing geometrically by `ratio` from a first
/// panel of width `first` until `b` is reached.
pub fn graded_breaks(a: f64, b: f64, first: f64, ratio: f64) -> Vec<f64> {
    let mut out = vec![a];
    let mut w = first.min(b - a);
    let mut x = a;
    while x + w < b - 1e-14 * (b - a).abs().max(1.0) {
        x += w;
        out.push(x);
        w *= ratio;
    }
    out.push(b);
    out
}

/// Breakpoints clustered geometrically towards both ends of `[a, b]`.
pub fn two_sided_breaks(a: f64, b: f64, first: f64, ratio: f64) -> Vec<f64> {
    let m = 0.5 * (a + b);
    let mut left = graded_breaks(a, m, first, ratio);
    let right = graded_breaks(a, m, first, ratio);
    for x in right.iter().rev().skip(1) {
        left.push(a + b - x);
    }
    left
}

/// Composite Gauss rule over consecutive panels given by `breaks`.
pub fn composite(rule: &Rule, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut s = 0.0;
    for w in breaks.windows(2) {
        s += rule.integrate(w[0], w[1], &mut f);
    }
    s
}

/// Tanh-sinh quadrature on a finite interval, tolerant of endpoint
/// singularities.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    quadrature::double_exponential::integrate(f, a, b, tol).integral
}

/// `∫_a^∞ f` through the map `x = a + u/(1-u)`.
pub fn semi_infinite(f: impl Fn(f64) -> f64, a: f64, tol: f64) -> f64 {
    tanh_sinh(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let v = 1.0 - u;
            let x = a + u / v;
            let y = f(x) / (v * v);
            if y.is_finite() {
                y
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Adaptive Gauss–Legendre: halves panels until a 10/20-point comparison
/// agrees to `tol` (absolute). Returns the value and the last refinement delta.
pub fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> (f64, f64) {
    let lo = Rule::legendre(10);
    let hi = Rule::legendre(20);
    let coarse = lo.integrate(a, b, f);
    let fine = hi.integrate(a, b, f);
    let delta = (fine - coarse).abs();
    if delta <= tol || depth == 0 {
        return (fine, delta);
    }
    let m = 0.5 * (a + b);
    let (l, dl) = adaptive(f, a, m, 0.5 * tol, depth - 1);
    let (r, dr) = adaptive(f, m, b, 0.5 * tol, depth - 1);
    (l + r, dl + dr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = Rule::legendre(8);
        let v = r.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }

    #[test]
    fn laguerre_moments() {
        let r = laguerre(64);
        let m: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x * x).sum();
        assert!((m - 2.0).abs() < 1e-10);
    }

    #[test]
    fn graded_breaks_cover_interval() {
        let b = graded_breaks(0.0, 10.0, 1e-3, 2.0);
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 10.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        let t = two_sided_breaks(0.0, 1.0, 1e-3, 2.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!((t.last().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = semi_infinite(|x| (-x).exp(), 0.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
        let g = semi_infinite(|x| (-x * x).exp(), 0.0, 1e-12);
        assert!((g - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn adaptive_handles_sqrt() {
        let (v, _) = adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-12, 30);
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }
}
