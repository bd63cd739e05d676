//! Mollifiers, white-noise sampling on padded lattices, and mollification.
//!
//! Randomness is counter based: every lattice line draws from its own
//! ChaCha stream indexed by `(step, line)`, so a sample depends only on the
//! seed and never on the thread schedule.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::geometry::{Field, Frame, Grid};
use crate::quad::Rule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(-1/(1-r²))`
    StandardBump,
    /// `(1 + cos πr)²/4`
    CosineBump,
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard-bump" => Ok(Profile::StandardBump),
            "cosine-bump" => Ok(Profile::CosineBump),
            other => Err(Error::config(format!("unknown mollifier profile '{other}'"))),
        }
    }
}

impl Profile {
    /// Unnormalised radial profile on `[0, 1]`.
    pub fn raw(self, r: f64) -> f64 {
        let r = r.abs();
        if r >= 1.0 {
            return 0.0;
        }
        match self {
            Profile::StandardBump => (-1.0 / (1.0 - r * r)).exp(),
            Profile::CosineBump => {
                let c = 1.0 + (PI * r).cos();
                0.25 * c * c
            }
        }
    }

    fn radial_moment(self, power: i32, dim: usize) -> f64 {
        let rule = Rule::legendre(64);
        let breaks = crate::quad::two_sided_breaks(0.0, 1.0, 0.05, 1.6);
        crate::quad::composite(&rule, &breaks, |r| {
            let shell = match dim {
                1 => 2.0,
                3 => 4.0 * PI * r * r,
                _ => unreachable!(),
            };
            shell * r.powi(power) * self.raw(r)
        })
    }
}

/// Radial bump `ρ` rescaled to `ρ_ε`. In the space-time frame the profile is
/// the product `η(t)φ(|x|)` of a one-dimensional and a radial bump, which
/// is supported in the parabolic unit ball.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mollifier {
    pub profile: Profile,
    pub eps: f64,
    pub frame: Frame,
    /// `1/∫φ` over the spatial unit ball.
    pub norm_space: f64,
    /// `1/∫η` over `[-1, 1]`.
    pub norm_time: f64,
}

pub fn make_mollifier(profile: Profile, eps: f64, frame: Frame) -> Result<Mollifier> {
    if !(eps > 0.0) || eps > 1.0 {
        return Err(Error::config(format!("mollifier scale must lie in (0, 1], got {eps}")));
    }
    Ok(Mollifier {
        profile,
        eps,
        frame,
        norm_space: 1.0 / profile.radial_moment(0, 3),
        norm_time: 1.0 / profile.radial_moment(0, 1),
    })
}

impl Mollifier {
    /// Normalised spatial profile `φ(r)` at unit scale.
    pub fn phi(&self, r: f64) -> f64 {
        self.norm_space * self.profile.raw(r)
    }

    /// Normalised temporal profile `η(t)` at unit scale.
    pub fn eta(&self, t: f64) -> f64 {
        self.norm_time * self.profile.raw(t)
    }

    /// `ρ_ε(x) = ε⁻³φ(|x|/ε)`.
    pub fn spatial(&self, x: &[f64; 3]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        self.phi(r / self.eps) / self.eps.powi(3)
    }

    /// `ρ_ε(t,x) = ε⁻⁵η(t/ε²)φ(|x|/ε)`.
    pub fn spacetime(&self, t: f64, x: &[f64; 3]) -> f64 {
        self.eta(t / (self.eps * self.eps)) / (self.eps * self.eps) * self.spatial(x)
    }

    /// `∫|x|²ρ_ε(x)dx`.
    pub fn second_moment(&self) -> f64 {
        self.eps * self.eps * self.norm_space * self.profile.radial_moment(2, 3)
    }

    /// `∫ρ_ε²`, spatial part only.
    pub fn l2_sq_spatial(&self) -> f64 {
        let rule = Rule::legendre(64);
        let breaks = crate::quad::two_sided_breaks(0.0, 1.0, 0.05, 1.6);
        let v = crate::quad::composite(&rule, &breaks, |r| 4.0 * PI * r * r * self.phi(r).powi(2));
        v / self.eps.powi(3)
    }

    /// Fourier transform of the unit-scale spatial profile, `φ̂(k)`.
    pub fn phi_hat(&self, k: f64) -> f64 {
        let rule = Rule::legendre(48);
        let breaks = crate::quad::two_sided_breaks(0.0, 1.0, 0.02, 1.5);
        let mut panels = breaks;
        // resolve oscillation for large k
        let extra = (k / 8.0).ceil() as usize;
        if extra > 1 {
            let mut refined = Vec::new();
            for w in panels.windows(2) {
                for s in 0..extra {
                    refined.push(w[0] + (w[1] - w[0]) * s as f64 / extra as f64);
                }
            }
            refined.push(1.0);
            panels = refined;
        }
        crate::quad::composite(&rule, &panels, |r| {
            let kr = k * r;
            let sinc = if kr.abs() < 1e-6 { 1.0 - kr * kr / 6.0 } else { kr.sin() / kr };
            4.0 * PI * r * r * self.phi(r) * sinc
        })
    }

    /// Fourier transform of the unit-scale temporal profile, `η̂(ω)`.
    pub fn eta_hat(&self, w: f64) -> f64 {
        let rule = Rule::legendre(48);
        let extra = ((w / 8.0).ceil() as usize).max(1);
        let breaks = crate::quad::two_sided_breaks(0.0, 1.0, 0.02, 1.5);
        let mut s = 0.0;
        for p in breaks.windows(2) {
            for q in 0..extra {
                let a = p[0] + (p[1] - p[0]) * q as f64 / extra as f64;
                let b = p[0] + (p[1] - p[0]) * (q + 1) as f64 / extra as f64;
                s += rule.integrate(a, b, |t| 2.0 * self.eta(t) * (w * t).cos());
            }
        }
        s
    }

    /// Discrete spatial stencil at lattice spacing `h`, normalised to sum 1.
    pub fn stencil(&self, h: f64) -> Result<Stencil> {
        if self.eps < 2.0 * h * (1.0 - 1e-12) {
            return Err(Error::config(format!(
                "mollifier scale {} is below 2h = {} (stencil under-resolved)",
                self.eps,
                2.0 * h
            )));
        }
        let radius = (self.eps / h).ceil() as usize;
        let w = 2 * radius + 1;
        let mut weights = vec![0.0; w * w * w];
        let mut sum = 0.0;
        for a in 0..w {
            for b in 0..w {
                for c in 0..w {
                    let x = [
                        (a as f64 - radius as f64) * h,
                        (b as f64 - radius as f64) * h,
                        (c as f64 - radius as f64) * h,
                    ];
                    let v = self.spatial(&x);
                    weights[(a * w + b) * w + c] = v;
                    sum += v;
                }
            }
        }
        for v in &mut weights {
            *v /= sum;
        }
        Ok(Stencil { radius, weights })
    }

    /// Temporal weights at step `dt`, normalised to sum 1, indices `-R..=R`.
    pub fn time_weights(&self, dt: f64) -> Result<Vec<f64>> {
        let e2 = self.eps * self.eps;
        if dt > 0.5 * e2 {
            return Err(Error::config(format!(
                "time step {dt} does not resolve the temporal mollifier width ε² = {e2}"
            )));
        }
        let radius = (e2 / dt).ceil() as usize;
        let mut w: Vec<f64> = (0..=2 * radius)
            .map(|j| self.eta((j as f64 - radius as f64) * dt / e2))
            .collect();
        let s: f64 = w.iter().sum();
        for v in &mut w {
            *v /= s;
        }
        Ok(w)
    }
}

/// Cubic convolution stencil of side `2·radius + 1`.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub radius: usize,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn at(&self, a: isize, b: isize, c: isize) -> f64 {
        let r = self.radius as isize;
        if a.abs() > r || b.abs() > r || c.abs() > r {
            return 0.0;
        }
        let w = self.side();
        self.weights[(((a + r) as usize) * w + (b + r) as usize) * w + (c + r) as usize]
    }
}

/// White noise on the interior grid extended by `pad` cells on every side.
#[derive(Debug, Clone)]
pub struct NoiseSample {
    pub grid: Grid,
    pub pad: usize,
    pub seed: u64,
    pub frame: Frame,
    /// Values on the padded box, row-major with side `n + 2·pad`.
    pub values: Vec<f64>,
}

impl NoiseSample {
    pub fn side(&self) -> usize {
        self.grid.n + 2 * self.pad
    }

    /// Interior restriction as a [`Field`].
    pub fn interior(&self) -> Field {
        let s = self.side();
        let p = self.pad;
        let mut f = Field::zeros(self.grid);
        for i in 0..self.grid.n {
            for j in 0..self.grid.n {
                for k in 0..self.grid.n {
                    f.data[self.grid.idx(i, j, k)] = self.values[((i + p) * s + j + p) * s + k + p];
                }
            }
        }
        f
    }
}

/// Offset that makes lattice coordinates of padded cells nonnegative.
const CELL_OFFSET: i64 = 1 << 20;

/// Standard normal at one lattice cell. Each `(step, i, j)` line owns a
/// ChaCha stream and each `k` a fixed block of four words in it, so a value
/// depends only on `(seed, step, i, j, k)`, never on the padding or the
/// schedule. Box–Muller keeps the word budget per value fixed.
pub(crate) fn line_normals(seed: u64, step_key: u64, i: i64, j: i64, k0: i64, out: &mut [f64], sd: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ia, ja) = ((i + CELL_OFFSET) as u64, (j + CELL_OFFSET) as u64);
    rng.set_stream((step_key << 42) | (ia << 21) | ja);
    rng.set_word_pos(4 * (k0 + CELL_OFFSET) as u128);
    for v in out.iter_mut() {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        *v = sd * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos();
    }
}

fn gaussian_box(n: usize, pad: usize, seed: u64, step_key: u64, sd: f64) -> Vec<f64> {
    let side = n + 2 * pad;
    let p = pad as i64;
    let mut values = vec![0.0; side * side * side];
    values.par_chunks_mut(side).enumerate().for_each(|(line, chunk)| {
        let i = (line / side) as i64 - p;
        let j = (line % side) as i64 - p;
        line_normals(seed, step_key, i, j, -p, chunk, sd);
    });
    values
}

/// Spatial white noise: i.i.d. `N(0, h⁻³)` per cell on the padded box.
pub fn sample_white_noise_3d(grid: &Grid, pad: usize, seed: u64) -> NoiseSample {
    let sd = grid.h.powf(-1.5);
    NoiseSample { grid: *grid, pad, seed, frame: Frame::Spatial3, values: gaussian_box(grid.n, pad, seed, 0, sd) }
}

/// Space-time white-noise cell averages for one time step: variance
/// `(Δt·h³)⁻¹`.
pub fn sample_spacetime_increment(grid: &Grid, pad: usize, seed: u64, step: usize) -> Result<NoiseSample> {
    let dt = grid.dt.ok_or_else(|| Error::config("space-time noise needs a time step"))?;
    let sd = (dt * grid.h.powi(3)).powf(-0.5);
    Ok(NoiseSample {
        grid: *grid,
        pad,
        seed,
        frame: Frame::Spacetime4,
        values: gaussian_box(grid.n, pad, seed, step as u64 + 1, sd),
    })
}

/// Per-step space-time noise for steps `0..steps`.
pub fn sample_spacetime_increments(grid: &Grid, pad: usize, seed: u64) -> Result<Vec<NoiseSample>> {
    let steps = grid.steps.ok_or_else(|| Error::config("space-time grid needs a step count"))?;
    (0..steps).map(|s| sample_spacetime_increment(grid, pad, seed, s)).collect()
}

/// 3D FFT convolution plan for a cubic box of side `s`.
struct Fft3 {
    s: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    fn new(s: usize) -> Self {
        let mut p = FftPlanner::new();
        Fft3 { s, fwd: p.plan_fft_forward(s), inv: p.plan_fft_inverse(s) }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let s = self.s;
        let plan = if inverse { &self.inv } else { &self.fwd };
        // last axis: contiguous lines
        data.par_chunks_mut(s).for_each(|line| plan.process(line));
        // middle axis
        data.par_chunks_mut(s * s).for_each(|plane| {
            let mut buf = vec![Complex64::new(0.0, 0.0); s];
            for k in 0..s {
                for j in 0..s {
                    buf[j] = plane[j * s + k];
                }
                plan.process(&mut buf);
                for j in 0..s {
                    plane[j * s + k] = buf[j];
                }
            }
        });
        // first axis
        let cols: Vec<Vec<Complex64>> = (0..s * s)
            .into_par_iter()
            .map(|jk| {
                let mut buf: Vec<Complex64> = (0..s).map(|i| data[i * s * s + jk]).collect();
                plan.process(&mut buf);
                buf
            })
            .collect();
        for (jk, col) in cols.into_iter().enumerate() {
            for i in 0..s {
                data[i * s * s + jk] = col[i];
            }
        }
    }
}

/// Spatial mollification of a padded sample by a stencil, returning the
/// interior field. Requires `pad ≥ stencil.radius`.
pub fn mollify_with_stencil(sample: &NoiseSample, stencil: &Stencil) -> Result<Field> {
    if sample.pad < stencil.radius {
        return Err(Error::config(format!(
            "noise padding {} is narrower than the stencil radius {}",
            sample.pad, stencil.radius
        )));
    }
    let s = sample.side();
    let fft = Fft3::new(s);
    let mut a: Vec<Complex64> = sample.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut b = vec![Complex64::new(0.0, 0.0); s * s * s];
    let r = stencil.radius as isize;
    let si = s as isize;
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                let w = stencil.at(x, y, z);
                let (i, j, k) = (x.rem_euclid(si) as usize, y.rem_euclid(si) as usize, z.rem_euclid(si) as usize);
                b[(i * s + j) * s + k] = Complex64::new(w, 0.0);
            }
        }
    }
    fft.transform(&mut a, false);
    fft.transform(&mut b, false);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    fft.transform(&mut a, true);
    let norm = 1.0 / (s * s * s) as f64;
    let g = sample.grid;
    let p = sample.pad;
    let mut out = Field::zeros(g);
    for i in 0..g.n {
        for j in 0..g.n {
            for k in 0..g.n {
                out.data[g.idx(i, j, k)] = a[((i + p) * s + j + p) * s + k + p].re * norm;
            }
        }
    }
    Ok(out)
}

/// `ξ_ε = ρ_ε ∗ ξ` for spatial noise.
pub fn mollify(sample: &NoiseSample, m: &Mollifier) -> Result<Field> {
    if sample.frame != Frame::Spatial3 || m.frame != Frame::Spatial3 {
        return Err(Error::config("mollify expects a spatial sample and a spatial mollifier"));
    }
    let st = m.stencil(sample.grid.h)?;
    mollify_with_stencil(sample, &st)
}

/// Streams space-time mollified noise `ξ_ε(t_n, ·)` step by step. Spatially
/// mollified increments are regenerated from their counters on demand, so
/// only a window of `2R + 1` fields is held.
pub struct SpacetimeNoise {
    grid: Grid,
    pad: usize,
    seed: u64,
    stencil: Stencil,
    weights: Vec<f64>,
    window: std::collections::VecDeque<(usize, Field)>,
}

impl SpacetimeNoise {
    pub fn new(grid: &Grid, m: &Mollifier, seed: u64) -> Result<Self> {
        if m.frame != Frame::Spacetime4 {
            return Err(Error::config("space-time noise needs a parabolic mollifier"));
        }
        let dt = grid.dt.ok_or_else(|| Error::config("space-time noise needs a time step"))?;
        let stencil = m.stencil(grid.h)?;
        let weights = m.time_weights(dt)?;
        Ok(SpacetimeNoise {
            grid: *grid,
            pad: stencil.radius,
            seed,
            stencil,
            weights,
            window: Default::default(),
        })
    }

    fn raw(&self, step: isize) -> Result<Field> {
        // negative steps reuse a disjoint block of streams
        let idx = if step >= 0 { 2 * step as usize } else { 2 * (-step) as usize - 1 };
        let sample = sample_spacetime_increment(&self.grid, self.pad, self.seed, idx)?;
        mollify_with_stencil(&sample, &self.stencil)
    }

    /// Mollified noise at step `n`; calls must use nondecreasing `n`.
    pub fn at_step(&mut self, n: usize) -> Result<Field> {
        let r = (self.weights.len() / 2) as isize;
        let lo = n as isize - r;
        let hi = n as isize + r;
        let mut out = Field::zeros(self.grid);
        for (j, s) in (lo..=hi).enumerate() {
            let key = (s + (1 << 40)) as usize;
            let pos = self.window.iter().position(|(k, _)| *k == key);
            let f = match pos {
                Some(p) => &self.window[p].1,
                None => {
                    let f = self.raw(s)?;
                    self.window.push_back((key, f));
                    &self.window.back().unwrap().1
                }
            };
            let w = self.weights[j];
            for (o, v) in out.data.iter_mut().zip(&f.data) {
                *o += w * v;
            }
        }
        let cutoff = (lo + (1 << 40)) as usize;
        self.window.retain(|(k, _)| *k >= cutoff);
        Ok(out)
    }

    /// Exact variance of `ξ_ε` at a lattice point.
    pub fn point_variance(&self) -> f64 {
        let dt = self.grid.dt.unwrap();
        self.stencil.sum_sq() * self.weights.iter().map(|w| w * w).sum::<f64>() / (dt * self.grid.h.powi(3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_normalised_and_even() {
        let m = make_mollifier(Profile::StandardBump, 0.25, Frame::Spatial3).unwrap();
        let st = m.stencil(1.0 / 16.0).unwrap();
        assert!((st.sum() - 1.0).abs() < 1e-10);
        for &(a, b, c) in &[(1, 2, 3), (0, 4, 1), (3, 3, 0)] {
            let v = st.at(a, b, c);
            assert_eq!(v, st.at(-a, b, c));
            assert_eq!(v, st.at(a, -b, -c));
            assert_eq!(v, st.at(b, a, c));
        }
        assert!(m.stencil(0.2).is_err());
        assert!(make_mollifier(Profile::StandardBump, 0.0, Frame::Spatial3).is_err());
    }

    #[test]
    fn second_moment_scales_quadratically() {
        for p in [Profile::StandardBump, Profile::CosineBump] {
            let a = make_mollifier(p, 0.2, Frame::Spatial3).unwrap().second_moment();
            let b = make_mollifier(p, 0.1, Frame::Spatial3).unwrap().second_moment();
            assert!((a / b - 4.0).abs() < 0.04);
        }
    }

    #[test]
    fn profile_mass_is_one() {
        let m = make_mollifier(Profile::CosineBump, 1.0, Frame::Spatial3).unwrap();
        assert!((m.phi_hat(0.0) - 1.0).abs() < 1e-10);
        assert!((m.eta_hat(0.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn noise_is_deterministic() {
        let g = Grid::new(8, 1.0).unwrap();
        let a = sample_white_noise_3d(&g, 2, 7);
        let b = sample_white_noise_3d(&g, 2, 7);
        let c = sample_white_noise_3d(&g, 2, 8);
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn noise_does_not_depend_on_padding() {
        let g = Grid::new(6, 1.0).unwrap();
        let a = sample_white_noise_3d(&g, 1, 11).interior();
        let b = sample_white_noise_3d(&g, 4, 11).interior();
        assert_eq!(a.data, b.data);
    }

    #[test]
    fn mollify_constant_is_constant() {
        let g = Grid::new(16, 1.0).unwrap();
        let m = make_mollifier(Profile::StandardBump, 0.25, Frame::Spatial3).unwrap();
        let mut s = sample_white_noise_3d(&g, 4, 1);
        for v in &mut s.values {
            *v = 2.5;
        }
        let f = mollify(&s, &m).unwrap();
        assert!(f.data.iter().all(|v| (v - 2.5).abs() < 1e-10));
    }

    #[test]
    fn fft_convolution_matches_direct() {
        let g = Grid::new(10, 1.0).unwrap();
        let m = make_mollifier(Profile::CosineBump, 0.4, Frame::Spatial3).unwrap();
        let st = m.stencil(g.h).unwrap();
        let s = sample_white_noise_3d(&g, st.radius, 3);
        let f = mollify(&s, &m).unwrap();
        let side = s.side() as isize;
        let p = s.pad as isize;
        let r = st.radius as isize;
        for &(i, j, k) in &[(0isize, 0isize, 0isize), (4, 7, 9), (9, 9, 9)] {
            let mut direct = 0.0;
            for a in -r..=r {
                for b in -r..=r {
                    for c in -r..=r {
                        let idx = ((i + p - a) * side + j + p - b) * side + k + p - c;
                        direct += st.at(a, b, c) * s.values[idx as usize];
                    }
                }
            }
            let v = f.at(i as usize, j as usize, k as usize);
            assert!((v - direct).abs() < 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn unpadded_sample_is_rejected() {
        let g = Grid::new(16, 1.0).unwrap();
        let m = make_mollifier(Profile::StandardBump, 0.25, Frame::Spatial3).unwrap();
        let s = sample_white_noise_3d(&g, 1, 1);
        assert!(mollify(&s, &m).is_err());
    }
}
