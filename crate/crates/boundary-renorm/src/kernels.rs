//! Poisson and heat kernels: free, truncated, the half-space Robin kernel
//! and cube kernels built from image series.
//!
//! A reflection in a Robin wall with coefficient `a` is the even image
//! convolved, in the outward normal direction, with the signed measure
//! `ν_a = δ_0 − 2a e^{−ar} dr`. A word of `n` alternating reflections
//! therefore carries `ν_a^{∗n}`, whose Laplace transform is
//! `((s − a)/(s + a))^n`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point3, Point4};
use crate::quad::{laguerre_alpha, Rule};
use crate::special::{cutoff, erfc, erfcx};
use crate::{Error, Result};

/// Largest image order accepted by cube kernels.
pub const MAX_IMAGE_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    PoissonFree,
    PoissonTruncated,
    HeatFree,
    HeatTruncated,
    HalfspaceRobin,
    CubeRobin,
    CubeNeumannGreen,
}

/// How the exponential average `∫_0^∞ 2a e^{−ar}(·) dr` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Averaging {
    /// Exact through `erfcx` for single reflections, Laguerre otherwise.
    Closed,
    /// Gauss–Laguerre in `u = ar` with the given number of nodes.
    Laguerre(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEvaluator {
    pub kind: KernelKind,
    /// Robin coefficient in `∂_n u + a u = 0`; `f64::INFINITY` is Dirichlet.
    pub a: f64,
    pub image_order: usize,
    pub averaging: Averaging,
    /// Inner and outer truncation radii.
    pub radii: (f64, f64),
    pub half_width: f64,
}

impl KernelEvaluator {
    pub fn new(kind: KernelKind) -> Self {
        KernelEvaluator {
            kind,
            a: 0.0,
            image_order: 3,
            averaging: Averaging::Closed,
            radii: (0.5, 1.0),
            half_width: 1.0,
        }
    }

    pub fn with_robin(mut self, a: f64) -> Result<Self> {
        check_robin(a)?;
        self.a = a;
        Ok(self)
    }

    pub fn with_image_order(mut self, m: usize) -> Result<Self> {
        if m > MAX_IMAGE_ORDER {
            return Err(Error::config(format!("image order {m} exceeds the cap {MAX_IMAGE_ORDER}")));
        }
        self.image_order = m;
        Ok(self)
    }

    pub fn with_averaging(mut self, averaging: Averaging) -> Self {
        self.averaging = averaging;
        self
    }

    /// Evaluate the kernel. Poisson kinds ignore the time coordinate.
    pub fn eval(&self, x: &Point4, y: &Point4) -> Result<f64> {
        let d = [x[1] - y[1], x[2] - y[2], x[3] - y[3]];
        let t = x[0] - y[0];
        match self.kind {
            KernelKind::PoissonFree => eval_poisson_free(&d),
            KernelKind::PoissonTruncated => {
                let r = norm3(&d);
                if r == 0.0 {
                    return Err(Error::Singular);
                }
                Ok(cutoff(r, self.radii.0, self.radii.1) / (4.0 * PI * r))
            }
            KernelKind::HeatFree => Ok(eval_heat_free(t, &d)),
            KernelKind::HeatTruncated => Ok(heat_truncated(t, &d, self.radii.0, self.radii.1)),
            KernelKind::HalfspaceRobin => {
                halfspace_robin(self.a, x, y, self.averaging)
            }
            KernelKind::CubeRobin => self.cube_heat(x, y),
            KernelKind::CubeNeumannGreen => {
                let xs = [x[1], x[2], x[3]];
                let ys = [y[1], y[2], y[3]];
                neumann_green(&xs, &ys, self.half_width)
            }
        }
    }

    fn cube_heat(&self, x: &Point4, y: &Point4) -> Result<f64> {
        let l = self.half_width * (1.0 + 1e-12);
        if (1..4).any(|i| x[i].abs() > l || y[i].abs() > l) {
            return Ok(0.0);
        }
        let t = x[0] - y[0];
        if t <= 0.0 {
            return Ok(0.0);
        }
        let m = self.image_order;
        let terms: Vec<Vec<f64>> = (1..4)
            .map(|i| robin_series_1d(t, x[i], y[i], self.a, self.half_width, m, self.averaging))
            .collect();
        let mut s = 0.0;
        for n1 in 0..=m {
            for n2 in 0..=m - n1 {
                for n3 in 0..=m - n1 - n2 {
                    s += terms[0][n1] * terms[1][n2] * terms[2][n3];
                }
            }
        }
        Ok(s)
    }
}

fn check_robin(a: f64) -> Result<()> {
    if a.is_nan() || a < 0.0 {
        return Err(Error::config(format!("Robin coefficient must lie in [0, ∞], got {a}")));
    }
    Ok(())
}

fn norm3(x: &Point3) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// `K(x) = 1/(4π|x|)`.
pub fn eval_poisson_free(x: &Point3) -> Result<f64> {
    let r = norm3(x);
    if r == 0.0 {
        return Err(Error::Singular);
    }
    Ok(1.0 / (4.0 * PI * r))
}

/// `∇K(x) = −x/(4π|x|³)`.
pub fn grad_poisson_free(x: &Point3) -> Result<Point3> {
    let r = norm3(x);
    if r == 0.0 {
        return Err(Error::Singular);
    }
    let c = -1.0 / (4.0 * PI * r * r * r);
    Ok([c * x[0], c * x[1], c * x[2]])
}

/// One-dimensional heat kernel `p_t(x) = (4πt)^{-1/2} e^{-x²/4t}`.
pub fn heat_1d(t: f64, x: f64) -> f64 {
    crate::special::heat_1d(t, x)
}

/// `𝒦(t,x) = 1_{t>0}(4πt)^{-3/2} e^{-|x|²/4t}`.
pub fn eval_heat_free(t: f64, x: &Point3) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    (-r2 / (4.0 * t)).exp() / (4.0 * PI * t).powf(1.5)
}

/// `𝒦̄ = χ(√t)χ(|x|)𝒦`, equal to `𝒦` while both `√t` and `|x|` stay below
/// `inner` and supported in the parabolic ball of radius `outer`.
pub fn heat_truncated(t: f64, x: &Point3, inner: f64, outer: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    cutoff(t.sqrt(), inner, outer) * cutoff(norm3(x), inner, outer) * eval_heat_free(t, x)
}

/// Build a truncated evaluator `K̄` or `𝒦̄`.
pub fn truncate(kind: KernelKind, inner: f64, outer: f64) -> Result<KernelEvaluator> {
    if !(inner > 0.0) || !(inner < outer) {
        return Err(Error::config(format!("truncation radii need 0 < inner < outer, got {inner}, {outer}")));
    }
    let k = match kind {
        KernelKind::PoissonFree | KernelKind::PoissonTruncated => KernelKind::PoissonTruncated,
        KernelKind::HeatFree | KernelKind::HeatTruncated => KernelKind::HeatTruncated,
        other => return Err(Error::config(format!("{other:?} has no truncated form"))),
    };
    let mut e = KernelEvaluator::new(k);
    e.radii = (inner, outer);
    Ok(e)
}

/// `∫_0^∞ a e^{−ar} p_t(c + r) dr` in closed form.
pub fn robin_average_closed(a: f64, t: f64, c: f64) -> f64 {
    if a == 0.0 || t <= 0.0 {
        return 0.0;
    }
    let s = t.sqrt();
    let arg = (c + 2.0 * a * t) / (2.0 * s);
    let v = if arg > -5.0 {
        a * (PI * t).sqrt() * (-c * c / (4.0 * t)).exp() * erfcx(arg)
    } else {
        // erfcx grows like e^{arg²}: combine exponents first
        a * (PI * t).sqrt() * (a * c + a * a * t).exp() * erfc(arg)
    };
    v / (4.0 * PI * t).sqrt()
}

/// `∫ f(R) ν_a^{∗n}(dR)` for `n ≥ 1`.
fn nu_power_average(a: f64, n: usize, nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
    if a == 0.0 {
        return f(0.0);
    }
    if a.is_infinite() {
        return if n % 2 == 0 { f(0.0) } else { -f(0.0) };
    }
    // ν^{∗n} = Σ_k C(n,k)(−2)^k Gamma(k, a)
    let mut s = f(0.0);
    let mut binom = 1.0;
    let mut fact = 1.0;
    for k in 1..=n {
        binom *= (n - k + 1) as f64 / k as f64;
        if k > 1 {
            fact *= (k - 1) as f64;
        }
        let rule = laguerre_alpha(nodes, (k - 1) as u32);
        let mut e = 0.0;
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            e += w * f(u / a);
        }
        s += binom * (-2.0f64).powi(k as i32) * e / fact;
    }
    s
}

/// Terms of the one-dimensional Robin heat kernel on `(−L, L)` grouped by
/// word length `0..=m`.
pub fn robin_series_1d(
    t: f64,
    x: f64,
    y: f64,
    a: f64,
    half_width: f64,
    m: usize,
    averaging: Averaging,
) -> Vec<f64> {
    let mut out = vec![0.0; m + 1];
    if t <= 0.0 {
        return out;
    }
    out[0] = heat_1d(t, x - y);
    let l = half_width;
    let nodes = match averaging {
        Averaging::Closed => 64,
        Averaging::Laguerre(n) => n,
    };
    for start in [1.0f64, -1.0] {
        let mut img = y;
        let mut wall = start;
        for n in 1..=m {
            img = 2.0 * wall * l - img;
            // outward direction of the last wall is `wall`
            let c = wall * (img - x);
            // pruning by Gaussian support
            if c > 0.0 && c * c / (4.0 * t) > 700.0 {
                wall = -wall;
                continue;
            }
            let v = if n == 1 && averaging == Averaging::Closed && a.is_finite() && a > 0.0 {
                heat_1d(t, c) - 2.0 * robin_average_closed(a, t, c)
            } else {
                nu_power_average(a, n, nodes, |r| heat_1d(t, c + r))
            };
            out[n] += v;
            wall = -wall;
        }
    }
    out
}

/// Half-space Robin heat kernel on `{x₃ > 0}`:
/// `𝒦(x−y) + 𝒦(x−y⁰) − ∫_0^∞ 2a e^{−ar}𝒦(x−y^r) dr`.
pub fn eval_halfspace_robin(a: f64, x: &Point4, y: &Point4) -> Result<f64> {
    halfspace_robin(a, x, y, Averaging::Closed)
}

pub fn halfspace_robin(a: f64, x: &Point4, y: &Point4, averaging: Averaging) -> Result<f64> {
    check_robin(a)?;
    if x[3] < 0.0 || y[3] < 0.0 {
        return Err(Error::OutsideDomain(if x[3] < 0.0 { x.to_vec() } else { y.to_vec() }));
    }
    Ok(halfspace_robin_ext(a, x, y, averaging))
}

/// Same formula without the half-space check, smooth across `x₃ = 0`.
pub(crate) fn halfspace_robin_ext(a: f64, x: &Point4, y: &Point4, averaging: Averaging) -> f64 {
    let t = x[0] - y[0];
    if t <= 0.0 {
        return 0.0;
    }
    let trans = heat_1d(t, x[1] - y[1]) * heat_1d(t, x[2] - y[2]);
    let c = x[3] + y[3];
    let direct = heat_1d(t, x[3] - y[3]);
    let image = if a.is_infinite() {
        -heat_1d(t, c)
    } else if a == 0.0 {
        heat_1d(t, c)
    } else {
        match averaging {
            Averaging::Closed => heat_1d(t, c) - 2.0 * robin_average_closed(a, t, c),
            Averaging::Laguerre(n) => {
                let rule = laguerre_alpha(n, 0);
                let avg: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(u, w)| w * heat_1d(t, c + u / a))
                    .sum();
                heat_1d(t, c) - 2.0 * avg
            }
        }
    };
    trans * (direct + image)
}

/// Evaluate a cube kernel of the given kind.
pub fn eval_cube_kernel(kind: KernelKind, a: f64, x: &Point4, y: &Point4, m: usize) -> Result<f64> {
    match kind {
        KernelKind::CubeRobin | KernelKind::CubeNeumannGreen => {}
        other => return Err(Error::config(format!("{other:?} is not a cube kernel"))),
    }
    KernelEvaluator::new(kind).with_robin(a)?.with_image_order(m)?.eval(x, y)
}

/// Mass `∫_D 𝒢_a(t, x, 0, y) dx` by tensor Gauss quadrature.
pub fn cube_heat_mass(a: f64, t: f64, y: &Point3, m: usize) -> Result<f64> {
    let ev = KernelEvaluator::new(KernelKind::CubeRobin).with_robin(a)?.with_image_order(m)?;
    let rule = Rule::legendre(32);
    let breaks = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let pts: Vec<(f64, f64)> = breaks
        .windows(2)
        .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
        .collect();
    let src = [0.0, y[0], y[1], y[2]];
    let mut s = 0.0;
    for &(x1, w1) in &pts {
        for &(x2, w2) in &pts {
            for &(x3, w3) in &pts {
                s += w1 * w2 * w3 * ev.eval(&[t, x1, x2, x3], &src)?;
            }
        }
    }
    Ok(s)
}

/// Neumann Green's function of `−Δ` on `(−L, L)³` with the compensating
/// uniform charge: `−Δ_x G = δ_y − 1/|D|`, `∂_n G = 0`, mean zero.
/// Built from the eight reflections of `y` and an Ewald sum of period `4L`.
pub fn neumann_green(x: &Point3, y: &Point3, half_width: f64) -> Result<f64> {
    let l = half_width;
    for p in [x, y] {
        if p.iter().any(|c| c.abs() > l * (1.0 + 1e-12)) {
            return Err(Error::OutsideDomain(p.to_vec()));
        }
    }
    if norm3(&[x[0] - y[0], x[1] - y[1], x[2] - y[2]]) == 0.0 {
        return Err(Error::Singular);
    }
    let mut s = 0.0;
    for mask in 0..8u32 {
        let mut img = *y;
        for (i, c) in img.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *c = 2.0 * l - *c;
            }
        }
        let d = [x[0] - img[0], x[1] - img[1], x[2] - img[2]];
        s += ewald_periodic(&d, 4.0 * l);
    }
    Ok(s)
}

struct EwaldTable {
    period: f64,
    alpha: f64,
    modes: Vec<([f64; 3], f64)>,
}

fn ewald_table(period: f64) -> &'static EwaldTable {
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<Vec<&'static EwaldTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut g = cache.lock().expect("ewald cache poisoned");
    if let Some(t) = g.iter().find(|t| t.period == period) {
        return t;
    }
    let alpha = 6.0 / period;
    let vol = period.powi(3);
    let k0 = 2.0 * PI / period;
    let mmax = ((2.0 * alpha * 32f64.sqrt()) / k0).ceil() as i64;
    let mut modes = Vec::new();
    for a in -mmax..=mmax {
        for b in -mmax..=mmax {
            for c in -mmax..=mmax {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                let k = [k0 * a as f64, k0 * b as f64, k0 * c as f64];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let w = (-k2 / (4.0 * alpha * alpha)).exp() / (k2 * vol);
                if w > 1e-17 {
                    modes.push((k, w));
                }
            }
        }
    }
    let t: &'static EwaldTable = Box::leak(Box::new(EwaldTable { period, alpha, modes }));
    g.push(t);
    t
}

/// Periodic Green's function of `−Δ` with neutralising background and zero
/// mean over the period cell.
pub fn ewald_periodic(d: &Point3, period: f64) -> f64 {
    let tab = ewald_table(period);
    let alpha = tab.alpha;
    let w: Vec<f64> = d.iter().map(|c| c - period * (c / period).round()).collect();
    let mut real = 0.0;
    for a in -2i32..=2 {
        for b in -2i32..=2 {
            for c in -2i32..=2 {
                let r = norm3(&[
                    w[0] + period * a as f64,
                    w[1] + period * b as f64,
                    w[2] + period * c as f64,
                ]);
                if r > 0.0 {
                    real += erfc(alpha * r) / (4.0 * PI * r);
                }
            }
        }
    }
    let recip: f64 = tab
        .modes
        .iter()
        .map(|(k, wt)| wt * (k[0] * w[0] + k[1] * w[1] + k[2] * w[2]).cos())
        .sum();
    real + recip - 1.0 / (4.0 * alpha * alpha * period.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub x: Point4,
    pub y: Point4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    Pde,
    Boundary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    pub worst: Option<Probe>,
    pub per_probe: Vec<f64>,
}

/// Finite-difference residual of a heat-type kernel. `pde` checks
/// `(∂_t − Δ_x)𝒢` away from the diagonal; `boundary` checks the Robin
/// condition `∂_n𝒢 + a𝒢` on a face (with `∂_n𝒢` for `a = 0` and `𝒢` for
/// `a = ∞`). Half-space probes use the face `x₃ = 0`; cube probes use the
/// face selected by the largest coordinate of `x`.
pub fn kernel_residual(ev: &KernelEvaluator, probes: &[Probe], mode: ResidualMode, step: f64) -> Result<ResidualReport> {
    let mut per = Vec::with_capacity(probes.len());
    for p in probes {
        let dx = [p.x[1] - p.y[1], p.x[2] - p.y[2], p.x[3] - p.y[3]];
        if p.x[0] - p.y[0] <= 0.0 || (norm3(&dx) < 1e-12 && mode == ResidualMode::Pde) {
            return Err(Error::config("probe lies on the diagonal or before the source time"));
        }
        let f = |z: &Point4| -> Result<f64> {
            match ev.kind {
                KernelKind::HalfspaceRobin => Ok(halfspace_robin_ext(ev.a, z, &p.y, ev.averaging)),
                _ => ev.eval(z, &p.y),
            }
        };
        let r = match mode {
            ResidualMode::Pde => {
                let h = step;
                let c = f(&p.x)?;
                let mut lap = 0.0;
                for i in 1..4 {
                    let mut up = p.x;
                    let mut dn = p.x;
                    up[i] += h;
                    dn[i] -= h;
                    lap += (f(&up)? - 2.0 * c + f(&dn)?) / (h * h);
                }
                let mut tp = p.x;
                let mut tm = p.x;
                let ht = h * h;
                tp[0] += ht;
                tm[0] -= ht;
                let dt = (f(&tp)? - f(&tm)?) / (2.0 * ht);
                (dt - lap).abs()
            }
            ResidualMode::Boundary => {
                let (axis, outward) = match ev.kind {
                    KernelKind::HalfspaceRobin => (3, -1.0),
                    _ => {
                        let mut axis = 1;
                        for i in 2..4 {
                            if p.x[i].abs() > p.x[axis].abs() {
                                axis = i;
                            }
                        }
                        (axis, p.x[axis].signum())
                    }
                };
                let val = f(&p.x)?;
                if ev.a.is_infinite() {
                    val.abs()
                } else {
                    let h = step;
                    let mut up = p.x;
                    let mut dn = p.x;
                    up[axis] += h;
                    dn[axis] -= h;
                    let (fu, fd) = match ev.kind {
                        KernelKind::HalfspaceRobin => (f(&up)?, f(&dn)?),
                        // one-sided inside the cube, second order
                        _ => {
                            let mut in1 = p.x;
                            let mut in2 = p.x;
                            in1[axis] -= outward * h;
                            in2[axis] -= outward * 2.0 * h;
                            let d = (3.0 * val - 4.0 * f(&in1)? + f(&in2)?) / (2.0 * h);
                            per.push((d + ev.a * val).abs());
                            continue;
                        }
                    };
                    let dn_val = outward * (fu - fd) / (2.0 * h);
                    (dn_val + ev.a * val).abs()
                }
            }
        };
        per.push(r);
    }
    let (mut max, mut worst) = (0.0, None);
    for (r, p) in per.iter().zip(probes) {
        if *r > max {
            max = *r;
            worst = Some(*p);
        }
    }
    Ok(ResidualReport { max, worst, per_probe: per })
}

/// `sup |𝒢_a − 𝒢_∞|` over probe pairs for the cube heat kernel.
pub fn robin_to_dirichlet_gap(a: f64, probes: &[Probe], m: usize) -> Result<f64> {
    check_robin(a)?;
    if a.is_infinite() {
        return Ok(0.0);
    }
    let ra = KernelEvaluator::new(KernelKind::CubeRobin).with_robin(a)?.with_image_order(m)?;
    let rd = KernelEvaluator::new(KernelKind::CubeRobin).with_robin(f64::INFINITY)?.with_image_order(m)?;
    let mut gap: f64 = 0.0;
    for p in probes {
        gap = gap.max((ra.eval(&p.x, &p.y)? - rd.eval(&p.x, &p.y)?).abs());
    }
    Ok(gap)
}

/// One-dimensional Robin heat kernel on `(−L, L)` from its eigenexpansion,
/// used as an independent check on the image series.
pub fn robin_heat_1d_eigen(t: f64, x: f64, y: f64, a: f64, half_width: f64, modes: usize) -> Result<f64> {
    let eig = crate::solvers::robin_modes_continuum(a, half_width, modes)?;
    let mut s = 0.0;
    for m in &eig {
        s += (-m.k * m.k * t).exp() * m.eval(x) * m.eval(y);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_kernels() {
        assert!((eval_poisson_free(&[1.0, 0.0, 0.0]).unwrap() - 0.0795775).abs() < 1e-7);
        assert!((eval_poisson_free(&[0.0, 2.0, 0.0]).unwrap() - 0.0397887).abs() < 1e-7);
        assert!(eval_poisson_free(&[0.0; 3]).is_err());
        assert_eq!(eval_heat_free(-0.1, &[0.0; 3]), 0.0);
        assert!((eval_heat_free(1.0 / (4.0 * PI), &[0.0; 3]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn truncation() {
        let k = truncate(KernelKind::PoissonFree, 0.5, 1.0).unwrap();
        let x = [0.0, 0.3, 0.0, 0.0];
        let o = [0.0; 4];
        assert_eq!(k.eval(&x, &o).unwrap(), eval_poisson_free(&[0.3, 0.0, 0.0]).unwrap());
        assert_eq!(k.eval(&[0.0, 1.2, 0.0, 0.0], &o).unwrap(), 0.0);
        assert!(truncate(KernelKind::HeatFree, 1.0, 0.5).is_err());
    }

    #[test]
    fn closed_average_matches_laguerre() {
        for &(a, t, c) in &[(0.5, 0.3, 0.4), (2.0, 0.05, 0.1), (10.0, 1.0, 0.0), (100.0, 0.2, 0.6)] {
            let closed = robin_average_closed(a, t, c);
            let rule = laguerre_alpha(64, 0);
            let lag: f64 = rule.nodes.iter().zip(&rule.weights).map(|(u, w)| w * heat_1d(t, c + u / a)).sum();
            assert!((closed - lag).abs() < 1e-6 * lag.abs().max(1e-3), "{a} {t} {c}: {closed} {lag}");
        }
    }

    #[test]
    fn halfspace_limits() {
        let x = [0.4, 0.1, -0.2, 0.3];
        let y = [0.1, 0.0, 0.1, 0.5];
        let t = 0.3;
        let d = eval_heat_free(t, &[0.1, -0.3, -0.2]);
        let i = eval_heat_free(t, &[0.1, -0.3, 0.8]);
        assert!((eval_halfspace_robin(0.0, &x, &y).unwrap() - (d + i)).abs() < 1e-15);
        assert!((eval_halfspace_robin(f64::INFINITY, &x, &y).unwrap() - (d - i)).abs() < 1e-15);
        assert!(eval_halfspace_robin(1.0, &[0.0, 0.0, 0.0, -0.1], &y).is_err());
    }

    #[test]
    fn image_series_matches_eigenexpansion() {
        for &a in &[0.0, 0.7, 3.0, f64::INFINITY] {
            for &(t, x, y) in &[(0.1, 0.3, -0.5), (0.4, 0.9, 0.95), (0.05, -0.99, -0.9)] {
                let img: f64 = robin_series_1d(t, x, y, a, 1.0, 10, Averaging::Closed).iter().sum();
                let eig = robin_heat_1d_eigen(t, x, y, a, 1.0, 400).unwrap();
                assert!((img - eig).abs() < 1e-7, "a={a} t={t}: {img} vs {eig}");
            }
        }
    }

    #[test]
    fn neumann_green_symmetry_and_mean() {
        let x = [0.3, -0.2, 0.5];
        let y = [-0.6, 0.1, 0.2];
        let g1 = neumann_green(&x, &y, 1.0).unwrap();
        let g2 = neumann_green(&y, &x, 1.0).unwrap();
        assert!((g1 - g2).abs() < 1e-10);
        // near the source it looks like the free kernel
        let z = [-0.6 + 1e-3, 0.1, 0.2];
        let g = neumann_green(&z, &y, 1.0).unwrap();
        assert!((g - eval_poisson_free(&[1e-3, 0.0, 0.0]).unwrap()).abs() < 1.0);
        // mean over D vanishes
        let rule = Rule::legendre(12);
        let pts: Vec<(f64, f64)> = [-1.0, 0.0, 1.0]
            .windows(2)
            .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
            .collect();
        let y = [0.05, 0.05, 0.05];
        let mut mean = 0.0;
        for &(a, wa) in &pts {
            for &(b, wb) in &pts {
                for &(c, wc) in &pts {
                    mean += wa * wb * wc * neumann_green(&[a, b, c], &y, 1.0).unwrap();
                }
            }
        }
        assert!(mean.abs() < 2e-2, "mean {mean}");
    }

    #[test]
    fn neumann_green_laplacian() {
        let y = [0.2, -0.1, 0.3];
        let x = [-0.4, 0.5, -0.3];
        let h = 1e-3;
        let c = neumann_green(&x, &y, 1.0).unwrap();
        let mut lap = 0.0;
        for i in 0..3 {
            let mut u = x;
            let mut d = x;
            u[i] += h;
            d[i] -= h;
            lap += (neumann_green(&u, &y, 1.0).unwrap() - 2.0 * c + neumann_green(&d, &y, 1.0).unwrap()) / (h * h);
        }
        assert!((-lap + 0.125).abs() < 1e-4, "lap {lap}");
        // zero normal derivative on a face
        let f = [1.0, 0.2, 0.1];
        let mut i = f;
        i[0] -= h;
        let mut i2 = f;
        i2[0] -= 2.0 * h;
        let d = (3.0 * neumann_green(&f, &y, 1.0).unwrap() - 4.0 * neumann_green(&i, &y, 1.0).unwrap()
            + neumann_green(&i2, &y, 1.0).unwrap())
            / (2.0 * h);
        assert!(d.abs() < 1e-4, "normal derivative {d}");
    }
}
