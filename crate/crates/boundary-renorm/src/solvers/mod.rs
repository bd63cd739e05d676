//! Spectral lattice solvers on the cell-centred grid.
//!
//! Every boundary condition is imposed through a ghost cell: with
//! `∂_n u = c·u` and the face value taken as the average of the ghost and
//! the adjacent interior cell, `u_ghost = g·u_in` with
//! `g = (1 + ch/2)/(1 − ch/2)`. Dirichlet is `g = −1`. The one-dimensional
//! operator is then a symmetric tridiagonal matrix whose eigenbasis gives
//! the three-dimensional operator by tensor products.

mod evolve;

pub use evolve::*;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Field, Grid};
use crate::noise::{line_normals, Mollifier};
use crate::{Error, Result};

/// Boundary condition in the form `∂_n u = coef·u` on every face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet0,
    Robin { coef: f64 },
}

impl BoundaryCondition {
    pub fn neumann() -> Self {
        BoundaryCondition::Robin { coef: 0.0 }
    }

    /// From the kernel convention `∂_n u + a u = 0`, `a ∈ [0, ∞]`.
    pub fn from_robin_a(a: f64) -> Self {
        if a.is_infinite() {
            BoundaryCondition::Dirichlet0
        } else {
            BoundaryCondition::Robin { coef: -a }
        }
    }

    /// Ghost factor `g` with `u_ghost = g·u_in`.
    pub fn ghost_factor(&self, h: f64) -> Result<f64> {
        match *self {
            BoundaryCondition::Dirichlet0 => Ok(-1.0),
            BoundaryCondition::Robin { coef } => {
                if !coef.is_finite() {
                    return Err(Error::config("Robin coefficient must be finite"));
                }
                let den = 1.0 - 0.5 * coef * h;
                if den <= 0.0 {
                    return Err(Error::config(format!(
                        "Robin coefficient {coef} is too large for spacing {h} (needs coef·h < 2)"
                    )));
                }
                Ok((1.0 + 0.5 * coef * h) / den)
            }
        }
    }
}

/// Orthonormal eigenbasis of the one-dimensional `−Δ_h` with ghost closure.
#[derive(Debug, Clone)]
pub struct Basis1D {
    pub n: usize,
    pub h: f64,
    /// Ascending eigenvalues.
    pub evals: Vec<f64>,
    /// `evecs[i * n + m]` is component `i` of mode `m`.
    pub evecs: Vec<f64>,
}

impl Basis1D {
    pub fn new(bc: BoundaryCondition, n: usize, h: f64) -> Result<Self> {
        let g = bc.ghost_factor(h)?;
        let mut evals = Vec::with_capacity(n);
        let mut evecs = vec![0.0; n * n];
        let nf = n as f64;
        if g == 1.0 {
            // cosine modes
            for m in 0..n {
                evals.push(4.0 / (h * h) * (PI * m as f64 / (2.0 * nf)).sin().powi(2));
                let c = if m == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                for i in 0..n {
                    evecs[i * n + m] = c * (PI * m as f64 * (i as f64 + 0.5) / nf).cos();
                }
            }
        } else if g == -1.0 {
            // sine modes
            for m in 0..n {
                let k = (m + 1) as f64;
                evals.push(4.0 / (h * h) * (PI * k / (2.0 * nf)).sin().powi(2));
                let c = if m == n - 1 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                for i in 0..n {
                    evecs[i * n + m] = c * (PI * k * (i as f64 + 0.5) / nf).sin();
                }
            }
        } else {
            let mut a = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                a[(i, i)] = 2.0 / (h * h);
                if i > 0 {
                    a[(i, i - 1)] = -1.0 / (h * h);
                }
                if i + 1 < n {
                    a[(i, i + 1)] = -1.0 / (h * h);
                }
            }
            a[(0, 0)] -= g / (h * h);
            a[(n - 1, n - 1)] -= g / (h * h);
            let eig = SymmetricEigen::new(a);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
            for (m, &src) in order.iter().enumerate() {
                evals.push(eig.eigenvalues[src]);
                // fix the sign so the first nonzero component is positive
                let col = eig.eigenvectors.column(src);
                let sign = col.iter().find(|v| v.abs() > 1e-12).map_or(1.0, |v| v.signum());
                for i in 0..n {
                    evecs[i * n + m] = sign * col[i];
                }
            }
        }
        Ok(Basis1D { n, h, evals, evecs })
    }

    pub fn mode(&self, m: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.evecs[i * self.n + m]).collect()
    }
}

/// Discrete 1D Robin eigenpairs on the cell-centred grid of `grid`, for the
/// kernel convention `∂_n u + a u = 0`.
pub fn robin_eigs_1d(a: f64, n_modes: usize, grid: &Grid) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if a.is_nan() || a < 0.0 {
        return Err(Error::config(format!("Robin coefficient must lie in [0, ∞], got {a}")));
    }
    if n_modes > grid.n {
        return Err(Error::config(format!("{n_modes} modes requested on {} cells", grid.n)));
    }
    let b = Basis1D::new(BoundaryCondition::from_robin_a(a), grid.n, grid.h)?;
    Ok((b.evals[..n_modes].to_vec(), (0..n_modes).map(|m| b.mode(m)).collect()))
}

/// Eigenfunction of `−d²/dx²` on `(−L, L)` with Robin data, `L²`-normalised.
#[derive(Debug, Clone, Copy)]
pub struct ContinuumMode {
    pub k: f64,
    pub even: bool,
    pub norm: f64,
}

impl ContinuumMode {
    pub fn eval(&self, x: f64) -> f64 {
        if self.even {
            self.norm * (self.k * x).cos()
        } else {
            self.norm * (self.k * x).sin()
        }
    }

    pub fn eigenvalue(&self) -> f64 {
        self.k * self.k
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, what: &str) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket(what.to_string()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < 1e-15 * hi.abs().max(1.0) {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The lowest `n` continuum Robin modes: even modes solve `k tan(kL) = a`,
/// odd modes `−k cot(kL) = a`.
pub fn robin_modes_continuum(a: f64, half_width: f64, n: usize) -> Result<Vec<ContinuumMode>> {
    let l = half_width;
    let mut out = Vec::with_capacity(n + 2);
    for j in 0..(n / 2 + 2) {
        let jf = j as f64;
        let (ke, ko) = if a.is_infinite() {
            ((jf + 0.5) * PI / l, (jf + 1.0) * PI / l)
        } else if a == 0.0 {
            (jf * PI / l, (jf + 0.5) * PI / l)
        } else {
            let ke = bisect(|k| k * (k * l).sin() - a * (k * l).cos(), jf * PI / l, (jf + 0.5) * PI / l, "even Robin eigenvalue")?;
            let ko = bisect(|k| k * (k * l).cos() + a * (k * l).sin(), (jf + 0.5) * PI / l, (jf + 1.0) * PI / l, "odd Robin eigenvalue")?;
            (ke, ko)
        };
        let ne = if ke == 0.0 { 2.0 * l } else { l + (2.0 * ke * l).sin() / (2.0 * ke) };
        let no = l - (2.0 * ko * l).sin() / (2.0 * ko);
        out.push(ContinuumMode { k: ke, even: true, norm: 1.0 / ne.sqrt() });
        out.push(ContinuumMode { k: ko, even: false, norm: 1.0 / no.sqrt() });
    }
    out.sort_by(|p, q| p.k.total_cmp(&q.k));
    out.truncate(n);
    Ok(out)
}

/// Tensor-product spectral transform for one grid and boundary condition.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub grid: Grid,
    pub bc: BoundaryCondition,
    pub basis: Arc<Basis1D>,
}

impl Spectral {
    pub fn new(grid: &Grid, bc: BoundaryCondition) -> Result<Self> {
        Ok(Spectral { grid: *grid, bc, basis: Arc::new(Basis1D::new(bc, grid.n, grid.h)?) })
    }

    /// `λ_{m1} + λ_{m2} + λ_{m3}` of `−Δ_h`.
    pub fn eigenvalue(&self, m1: usize, m2: usize, m3: usize) -> f64 {
        let e = &self.basis.evals;
        e[m1] + e[m2] + e[m3]
    }

    /// Transform every line along `axis` by `Vᵀ` (`transpose`) or `V`.
    fn apply_axis(&self, data: &mut [f64], axis: usize, transpose: bool) {
        let n = self.grid.n;
        // column-major view of the row-major eigenvector table is `Vᵀ`
        let vt = DMatrixView::from_slice(&self.basis.evecs, n, n);
        let mut out = vec![0.0; data.len()];
        match axis {
            2 => {
                let x = DMatrixView::from_slice(data, n, n * n);
                let mut y = DMatrixViewMut::from_slice(&mut out, n, n * n);
                if transpose {
                    y.gemm(1.0, &vt, &x, 0.0);
                } else {
                    y.gemm_tr(1.0, &vt, &x, 0.0);
                }
            }
            0 => {
                let x = DMatrixView::from_slice(data, n * n, n);
                let mut y = DMatrixViewMut::from_slice(&mut out, n * n, n);
                if transpose {
                    y.gemm(1.0, &x, &vt.transpose(), 0.0);
                } else {
                    y.gemm(1.0, &x, &vt, 0.0);
                }
            }
            _ => {
                let vv = vt.transpose();
                for (src, dst) in data.chunks(n * n).zip(out.chunks_mut(n * n)) {
                    let x = DMatrixView::from_slice(src, n, n);
                    let mut y = DMatrixViewMut::from_slice(dst, n, n);
                    if transpose {
                        y.gemm(1.0, &x, &vv, 0.0);
                    } else {
                        y.gemm(1.0, &x, &vt, 0.0);
                    }
                }
            }
        }
        data.copy_from_slice(&out);
    }

    /// Modal coefficients `c = (V ⊗ V ⊗ V)ᵀ u`.
    pub fn forward(&self, u: &Field) -> Vec<f64> {
        let mut d = u.data.clone();
        for axis in 0..3 {
            self.apply_axis(&mut d, axis, true);
        }
        d
    }

    pub fn inverse(&self, c: &[f64]) -> Field {
        let mut d = c.to_vec();
        for axis in 0..3 {
            self.apply_axis(&mut d, axis, false);
        }
        Field { grid: self.grid, data: d }
    }

    /// Multiply modal coefficients by `f(λ)` and transform back.
    pub fn filter(&self, u: &Field, f: impl Fn(f64) -> f64 + Sync) -> Field {
        let mut c = self.forward(u);
        let n = self.grid.n;
        c.par_iter_mut().enumerate().for_each(|(idx, v)| {
            let (a, b, d) = (idx / (n * n), (idx / n) % n, idx % n);
            *v *= f(self.eigenvalue(a, b, d));
        });
        self.inverse(&c)
    }
}

/// `Δ_h u` with ghost closure.
pub fn apply_laplacian(u: &Field, bc: BoundaryCondition) -> Result<Field> {
    let g = u.grid;
    let gf = bc.ghost_factor(g.h)?;
    let n = g.n;
    let h2 = g.h * g.h;
    let mut out = Field::zeros(g);
    out.data.par_iter_mut().enumerate().for_each(|(m, o)| {
        let (i, j, k) = g.unidx(m);
        let c = u.data[m];
        let mut s = -6.0 * c;
        for (axis, idx) in [i, j, k].into_iter().enumerate() {
            let stride = match axis {
                0 => n * n,
                1 => n,
                _ => 1,
            };
            s += if idx > 0 { u.data[m - stride] } else { gf * c };
            s += if idx + 1 < n { u.data[m + stride] } else { gf * c };
        }
        *o = s / h2;
    });
    Ok(out)
}

/// Solve `Δ_h Y = ξ − mean(ξ)` with Neumann data and zero mean.
pub fn solve_neumann_poisson(xi: &Field) -> Result<Field> {
    let sp = Spectral::new(&xi.grid, BoundaryCondition::neumann())?;
    let y = sp.filter(xi, |l| if l.abs() < 1e-12 { 0.0 } else { -1.0 / l });
    let check = apply_laplacian(&y, BoundaryCondition::neumann())?;
    let mean = xi.mean();
    let scale = xi.data.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    let res = check
        .data
        .iter()
        .zip(&xi.data)
        .fold(0.0f64, |m, (a, b)| m.max((a - (b - mean)).abs()));
    if res > 1e-9 * scale {
        return Err(Error::NonConvergence { what: "Neumann Poisson residual".into(), delta: res / scale });
    }
    Ok(y)
}

/// Gradient by centred differences, second-order one-sided at the faces.
pub fn grad_field(y: &Field) -> [Field; 3] {
    let g = y.grid;
    let n = g.n;
    let h = g.h;
    let comp = |axis: usize| {
        let stride = match axis {
            0 => n * n,
            1 => n,
            _ => 1,
        };
        let mut out = Field::zeros(g);
        for m in 0..g.len() {
            let (i, j, k) = g.unidx(m);
            let idx = [i, j, k][axis];
            let d = &y.data;
            out.data[m] = if n < 3 {
                if idx == 0 {
                    (d[m + stride] - d[m]) / h
                } else {
                    (d[m] - d[m - stride]) / h
                }
            } else if idx == 0 {
                (-3.0 * d[m] + 4.0 * d[m + stride] - d[m + 2 * stride]) / (2.0 * h)
            } else if idx + 1 == n {
                (3.0 * d[m] - 4.0 * d[m - stride] + d[m - 2 * stride]) / (2.0 * h)
            } else {
                (d[m + stride] - d[m - stride]) / (2.0 * h)
            };
        }
        out
    };
    [comp(0), comp(1), comp(2)]
}

/// Semi-implicit heat step `(I − Δt Δ_h)u⁺ = u + Δt·drift`.
#[derive(Debug, Clone)]
pub struct HeatStepper {
    pub spectral: Spectral,
    pub dt: f64,
}

impl HeatStepper {
    pub fn new(grid: &Grid, bc: BoundaryCondition, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::config("time step must be positive"));
        }
        Ok(HeatStepper { spectral: Spectral::new(grid, bc)?, dt })
    }

    pub fn step(&self, u: &Field, drift: &Field) -> Field {
        let mut rhs = u.clone();
        for (r, d) in rhs.data.iter_mut().zip(&drift.data) {
            *r += self.dt * d;
        }
        let dt = self.dt;
        self.spectral.filter(&rhs, |l| 1.0 / (1.0 + dt * l))
    }
}

pub fn step_semi_implicit(state: &Field, drift: &Field, bc: BoundaryCondition, dt: f64) -> Result<Field> {
    let st = HeatStepper::new(&state.grid, bc, dt)?;
    let next = st.step(state, drift);
    let lap = apply_laplacian(&next, bc)?;
    let mut res: f64 = 0.0;
    let mut scale: f64 = 1e-300;
    for m in 0..next.data.len() {
        let rhs = state.data[m] + dt * drift.data[m];
        scale = scale.max(rhs.abs());
        res = res.max((next.data[m] - dt * lap.data[m] - rhs).abs());
    }
    if res > 1e-10 * scale.max(1.0) {
        return Err(Error::LinearSolve(1));
    }
    Ok(next)
}

/// Parameters of the stationary Gaussian field `Ψ_{ε,a}` solving
/// `(∂_t − Δ)Ψ = ξ_ε` with `∂_nΨ = −3aΨ`.
#[derive(Debug, Clone)]
pub struct PsiParams {
    pub grid: Grid,
    pub mollifier: Mollifier,
    /// `a ∈ [0, ∞]`; the boundary coefficient is `3a`.
    pub a: f64,
    pub seed: u64,
    /// Drop the constant mode when `a = 0`.
    pub exclude_zero_mode: bool,
}

/// Per-mode stationary standard deviations `(q_k/(2λ_k))^{1/2}·h^{−3/2}` with
/// `q_k = φ̂(ε√λ_k)²`.
pub fn stationary_mode_sd(p: &PsiParams) -> Result<(Spectral, Vec<f64>)> {
    if p.a.is_nan() || p.a < 0.0 {
        return Err(Error::config("Robin parameter must lie in [0, ∞]"));
    }
    if p.a == 0.0 && !p.exclude_zero_mode {
        return Err(Error::config("a = 0 has no stationary zero mode; set the zero-mode exclusion flag"));
    }
    let bc = BoundaryCondition::from_robin_a(3.0 * p.a);
    let sp = Spectral::new(&p.grid, bc)?;
    let n = p.grid.n;
    let eps = p.mollifier.eps;
    // cache the radial filter on the distinct eigenvalue sums
    let sd: Vec<f64> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (a, b, c) = (idx / (n * n), (idx / n) % n, idx % n);
            let l = sp.eigenvalue(a, b, c);
            if l < 1e-12 {
                return 0.0;
            }
            let q = p.mollifier.phi_hat(eps * l.sqrt()).powi(2);
            (q / (2.0 * l)).sqrt() * p.grid.h.powf(-1.5)
        })
        .collect();
    Ok((sp, sd))
}

/// One sample of `Ψ_{ε,a}` by spectral synthesis.
pub fn sample_stationary_psi(p: &PsiParams) -> Result<Field> {
    let (sp, sd) = stationary_mode_sd(p)?;
    let n = p.grid.n;
    let mut c = vec![0.0; n * n * n];
    c.par_chunks_mut(n).enumerate().for_each(|(line, chunk)| {
        line_normals(p.seed, 1 << 21, (line / n) as i64, (line % n) as i64, 0, chunk, 1.0);
    });
    for (v, s) in c.iter_mut().zip(&sd) {
        *v *= s;
    }
    Ok(sp.inverse(&c))
}

/// Exact pointwise variance of the synthesised field at one cell.
pub fn stationary_psi_variance(p: &PsiParams, cell: (usize, usize, usize)) -> Result<f64> {
    let (sp, sd) = stationary_mode_sd(p)?;
    let n = p.grid.n;
    let v = &sp.basis.evecs;
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let e = v[cell.0 * n + a] * v[cell.1 * n + b] * v[cell.2 * n + c];
                s += (sd[(a * n + b) * n + c] * e).powi(2);
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Frame;
    use crate::noise::{make_mollifier, Profile};

    #[test]
    fn neumann_and_dirichlet_spectra() {
        let g = Grid::new(64, 1.0).unwrap();
        let (ev, _) = robin_eigs_1d(0.0, 4, &g).unwrap();
        for (k, l) in ev.iter().enumerate() {
            let exact = (k as f64 * PI / 2.0).powi(2);
            assert!((l - exact).abs() < 1e-2 * exact.max(1.0), "{k}: {l}");
        }
        let (ev, _) = robin_eigs_1d(f64::INFINITY, 4, &g).unwrap();
        for (k, l) in ev.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI / 2.0).powi(2);
            assert!((l - exact).abs() < 1e-2 * exact);
        }
    }

    #[test]
    fn robin_spectrum_interlaces_and_matches_roots() {
        let g = Grid::new(64, 1.0).unwrap();
        let (neu, _) = robin_eigs_1d(0.0, 5, &g).unwrap();
        let (dir, _) = robin_eigs_1d(f64::INFINITY, 5, &g).unwrap();
        let (rob, _) = robin_eigs_1d(1.0, 5, &g).unwrap();
        let cont = robin_modes_continuum(1.0, 1.0, 5).unwrap();
        for k in 0..5 {
            assert!(neu[k] < rob[k] && rob[k] < dir[k]);
            assert!((rob[k] - cont[k].eigenvalue()).abs() < 5e-3 * cont[k].eigenvalue().max(1.0));
        }
        let (big, _) = robin_eigs_1d(1e4, 3, &g).unwrap();
        for k in 0..3 {
            assert!((big[k] - dir[k]).abs() < 0.05 * dir[k]);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let b = Basis1D::new(BoundaryCondition::Robin { coef: -2.0 }, 12, 1.0 / 6.0).unwrap();
        for p in 0..12 {
            for q in 0..12 {
                let d: f64 = (0..12).map(|i| b.evecs[i * 12 + p] * b.evecs[i * 12 + q]).sum();
                assert!((d - if p == q { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn poisson_on_a_mode_and_constant() {
        let g = Grid::new(16, 1.0).unwrap();
        let sp = Spectral::new(&g, BoundaryCondition::neumann()).unwrap();
        let mut c = vec![0.0; g.len()];
        c[(2 * 16 + 1) * 16 + 3] = 1.0;
        let mode = sp.inverse(&c);
        let y = solve_neumann_poisson(&mode).unwrap();
        let l = sp.eigenvalue(2, 1, 3);
        for (a, b) in y.data.iter().zip(&mode.data) {
            assert!((a + b / l).abs() < 1e-12);
        }
        let k = Field::from_fn(g, |_| 3.0);
        assert!(solve_neumann_poisson(&k).unwrap().data.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradient_of_linear_field_is_exact() {
        let g = Grid::new(8, 1.0).unwrap();
        let y = Field::from_fn(g, |x| 2.0 * x[0] - x[1] + 0.5 * x[2]);
        let gr = grad_field(&y);
        for (c, want) in gr.iter().zip([2.0, -1.0, 0.5]) {
            assert!(c.data.iter().all(|v| (v - want).abs() < 1e-12));
        }
    }

    #[test]
    fn heat_step_on_modes() {
        let g = Grid::new(12, 1.0).unwrap();
        let sp = Spectral::new(&g, BoundaryCondition::Dirichlet0).unwrap();
        let mut c = vec![0.0; g.len()];
        c[(1 * 12 + 0) * 12 + 2] = 1.0;
        let u = sp.inverse(&c);
        let dt = 0.01;
        let next = step_semi_implicit(&u, &Field::zeros(g), BoundaryCondition::Dirichlet0, dt).unwrap();
        let f = 1.0 / (1.0 + dt * sp.eigenvalue(1, 0, 2));
        for (a, b) in next.data.iter().zip(&u.data) {
            assert!((a - f * b).abs() < 1e-13);
        }
        let one = Field::from_fn(g, |_| 1.0);
        let same = step_semi_implicit(&one, &Field::zeros(g), BoundaryCondition::neumann(), dt).unwrap();
        assert!(same.data.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn robin_coefficient_too_large_is_rejected() {
        assert!(BoundaryCondition::Robin { coef: 40.0 }.ghost_factor(0.1).is_err());
        assert_eq!(BoundaryCondition::Dirichlet0.ghost_factor(0.1).unwrap(), -1.0);
        assert_eq!(BoundaryCondition::neumann().ghost_factor(0.1).unwrap(), 1.0);
    }

    #[test]
    fn psi_variance_decreases_with_a() {
        let g = Grid::new(12, 1.0).unwrap();
        let m = make_mollifier(Profile::StandardBump, 0.4, Frame::Spatial3).unwrap();
        let var = |a: f64| {
            let p = PsiParams { grid: g, mollifier: m.clone(), a, seed: 1, exclude_zero_mode: false };
            stationary_psi_variance(&p, (5, 6, 2)).unwrap()
        };
        let (v1, v10, vinf) = (var(1.0), var(10.0), var(f64::INFINITY));
        assert!(v1 > v10 && v10 > vinf, "{v1} {v10} {vinf}");
        let p = PsiParams { grid: g, mollifier: m, a: 0.0, seed: 1, exclude_zero_mode: false };
        assert!(sample_stationary_psi(&p).is_err());
    }
}
