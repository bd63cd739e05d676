//! Test functions, lattice pairings, weighted Hölder seminorm estimators,
//! the boundary Dirac `δ_∂` and the boundary-correction operator `ℛ`.
//!
//! Seminorm estimates are maxima over a declared sample of scales and
//! points, so they are lower bounds of the true seminorms.

use serde::{Deserialize, Serialize};

use crate::geometry::{Domain, Field, Point3};
use crate::noise::Profile;
use crate::quad::Rule;
use crate::{Error, Result};

/// `ψ_y^λ(x) = λ^{-3}φ(|x − y|/λ)` with the standard bump, normalised to
/// unit lattice mass when paired. `set_dim` rescales to `ψ_y^{λ,S}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Point3,
    pub scale: f64,
    /// Scaled dimension `𝔪` of the set `S`; `None` for the plain rescaling.
    pub set_dim: Option<f64>,
}

impl TestFunction {
    pub fn new(center: Point3, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::config("test-function scale must be positive"));
        }
        Ok(TestFunction { center, scale, set_dim: None })
    }

    /// `ψ^{λ,S} = λ^{3−𝔪}ψ^λ`.
    pub fn with_set_dim(mut self, m: f64) -> Self {
        self.set_dim = Some(m);
        self
    }

    /// Unnormalised profile value.
    pub fn shape(&self, x: &Point3) -> f64 {
        let d = dist(x, &self.center) / self.scale;
        Profile::StandardBump.raw(d)
    }

    fn prefactor(&self) -> f64 {
        self.set_dim.map_or(1.0, |m| self.scale.powf(3.0 - m))
    }

    fn support_inside(&self, half_width: f64) -> bool {
        self.center.iter().all(|c| c.abs() + self.scale <= half_width * (1.0 + 1e-12))
    }
}

fn dist(a: &Point3, b: &Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpretation {
    /// Point values of a function; pairing weights by `h³`.
    Function,
    /// Cell masses; pairing is an unweighted sum.
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDistribution {
    pub field: Field,
    pub interpretation: Interpretation,
}

impl LatticeDistribution {
    pub fn function(field: Field) -> Self {
        LatticeDistribution { field, interpretation: Interpretation::Function }
    }

    fn weight(&self) -> f64 {
        match self.interpretation {
            Interpretation::Function => self.field.grid.cell_volume(),
            Interpretation::Density => 1.0,
        }
    }
}

/// Cells within the support of `ψ` with their normalised weights
/// `ψ(x)/Σψ` (so the lattice mass of `ψ` is exactly one).
fn stencil_of(psi: &TestFunction, field: &Field) -> Result<Vec<(usize, f64)>> {
    let g = field.grid;
    if !psi.support_inside(g.half_width) {
        return Err(Error::config(format!(
            "test function at {:?} with scale {} leaves the grid",
            psi.center, psi.scale
        )));
    }
    let lo = |c: f64| (((c - psi.scale + g.half_width) / g.h).floor().max(0.0)) as usize;
    let hi = |c: f64| ((((c + psi.scale + g.half_width) / g.h).ceil()) as usize).min(g.n);
    let mut cells = Vec::new();
    let mut total = 0.0;
    for i in lo(psi.center[0])..hi(psi.center[0]) {
        for j in lo(psi.center[1])..hi(psi.center[1]) {
            for k in lo(psi.center[2])..hi(psi.center[2]) {
                let v = psi.shape(&g.point(i, j, k));
                if v > 0.0 {
                    cells.push((g.idx(i, j, k), v));
                    total += v;
                }
            }
        }
    }
    if total == 0.0 {
        return Err(Error::config("test function is not resolved by the grid"));
    }
    let pre = psi.prefactor();
    Ok(cells.into_iter().map(|(m, v)| (m, pre * v / total)).collect())
}

/// `u(ψ)` as a lattice sum; a `Function` field pairs with `ψ` normalised to
/// unit lattice integral `Σψh³ = 1`.
pub fn pair(u: &LatticeDistribution, psi: &TestFunction) -> Result<f64> {
    let cells = stencil_of(psi, &u.field)?;
    let s: f64 = cells.iter().map(|(m, w)| u.field.data[*m] * w).sum();
    Ok(match u.interpretation {
        Interpretation::Function => s,
        Interpretation::Density => s / u.field.grid.cell_volume(),
    })
}

/// Boundary set entering the weight `|x|_P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySet {
    Faces,
    Edges,
}

impl BoundarySet {
    pub fn distance(&self, x: &Point3, half_width: f64) -> Result<f64> {
        let d = Domain::new(half_width, crate::geometry::Frame::Spatial3)?;
        match self {
            BoundarySet::Faces => d.dist_to_boundary(x),
            BoundarySet::Edges => d.dist_to_edges(x),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderSample {
    pub lambda: f64,
    pub x: Point3,
    pub contribution: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub eta: f64,
    pub set: BoundarySet,
    pub value: f64,
    pub samples: Vec<HolderSample>,
}

/// `max |u(ψ_x^λ)|·λ^{−α}|x|_P^{α−η}` over admissible samples: `λ ≤ ½|x|_P`,
/// `λ ≥ 4h`, support inside the grid.
pub fn weighted_holder_estimate(
    u: &LatticeDistribution,
    alpha: f64,
    eta: f64,
    set: BoundarySet,
    scales: &[f64],
    points: &[Point3],
) -> Result<HolderEstimate> {
    let g = u.field.grid;
    let mut samples = Vec::new();
    let mut value: f64 = 0.0;
    for x in points {
        let dp = set.distance(x, g.half_width)?;
        for &lambda in scales {
            if lambda > 0.5 * dp || lambda < 4.0 * g.h {
                continue;
            }
            let psi = TestFunction::new(*x, lambda)?;
            if !psi.support_inside(g.half_width) {
                continue;
            }
            let c = pair(u, &psi)?.abs() * lambda.powf(-alpha) * dp.powf(alpha - eta);
            value = value.max(c);
            samples.push(HolderSample { lambda, x: *x, contribution: c });
        }
    }
    if samples.is_empty() {
        return Err(Error::Degenerate("no admissible (x, λ) samples".into()));
    }
    Ok(HolderEstimate { alpha, eta, set, value, samples })
}

/// Dyadic scales `2^{-k}` for `k ∈ [kmin, kmax]`.
pub fn dyadic_scales(kmin: u32, kmax: u32) -> Vec<f64> {
    (kmin..=kmax).map(|k| 0.5f64.powi(k as i32)).collect()
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Quasi-random points stratified by the distance to `P`: for each
/// target distance `d` in `levels`, `per_level` Halton points are pushed to
/// distance exactly `d` from their nearest face.
pub fn stratified_points(levels: &[f64], per_level: usize, half_width: f64) -> Vec<Point3> {
    let mut out = Vec::new();
    let mut idx = 1u64;
    for &d in levels {
        for _ in 0..per_level {
            let mut x = [
                (2.0 * halton(idx, 2) - 1.0) * half_width,
                (2.0 * halton(idx, 3) - 1.0) * half_width,
                (2.0 * halton(idx, 5) - 1.0) * half_width,
            ];
            idx += 1;
            let dom = Domain { half_width, frame: crate::geometry::Frame::Spatial3 };
            let (axis, sign) = dom.nearest_face(&x);
            x[axis] = sign * (half_width - d);
            for (i, c) in x.iter_mut().enumerate() {
                if i != axis {
                    *c = c.clamp(-(half_width - d), half_width - d);
                }
            }
            out.push(x);
        }
    }
    out
}

/// `⟨f δ_∂, φ⟩ = ∫_∂ f φ dS` by tensor Gauss quadrature on the six faces.
pub fn delta_boundary_pair(f: impl Fn(&Point3) -> f64, phi: impl Fn(&Point3) -> f64, half_width: f64) -> f64 {
    let rule = Rule::legendre(24);
    let l = half_width;
    let panels = [-l, -0.5 * l, 0.0, 0.5 * l, l];
    let pts: Vec<(f64, f64)> = panels.windows(2).flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>()).collect();
    let mut s = 0.0;
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            for &(u, wu) in &pts {
                for &(v, wv) in &pts {
                    let mut x = [0.0; 3];
                    x[axis] = sign * l;
                    x[(axis + 1) % 3] = u;
                    x[(axis + 2) % 3] = v;
                    s += wu * wv * f(&x) * phi(&x);
                }
            }
        }
    }
    s
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CorrectionValue {
    pub value: f64,
    /// Set when the declared blow-up exponent lies outside `(−2, −1)`.
    pub contract_warning: bool,
}

/// `(ℛu)(ψ) = Σ u(x)(ψ(x) − ψ(π_∂x))h³`.
pub fn boundary_correction(u: &LatticeDistribution, psi: impl Fn(&Point3) -> f64, eta: f64) -> Result<CorrectionValue> {
    let g = u.field.grid;
    let dom = Domain::new(g.half_width, crate::geometry::Frame::Spatial3)?;
    let w = u.weight();
    let mut s = 0.0;
    for m in 0..g.len() {
        let (i, j, k) = g.unidx(m);
        let x = g.point(i, j, k);
        let p = dom.project_to_boundary(&x)?;
        s += u.field.data[m] * (psi(&x) - psi(&p)) * w;
    }
    Ok(CorrectionValue { value: s, contract_warning: !(eta > -2.0 && eta < -1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;

    #[test]
    fn pairing_normalisation_and_symmetry() {
        let g = Grid::new(32, 1.0).unwrap();
        let one = LatticeDistribution::function(Field::from_fn(g, |_| 1.0));
        let psi = TestFunction::new([0.1, -0.2, 0.3], 0.25).unwrap();
        assert!((pair(&one, &psi).unwrap() - 1.0).abs() < 1e-10);
        let c = [0.0 + g.h / 2.0, g.h / 2.0, g.h / 2.0];
        let psi0 = TestFunction::new(c, 0.3).unwrap();
        let odd = LatticeDistribution::function(Field::from_fn(g, |x| x[0] - c[0]));
        assert!(pair(&odd, &psi0).unwrap().abs() < 1e-12);
        assert!(pair(&one, &TestFunction::new([0.9, 0.0, 0.0], 0.25).unwrap()).is_err());
    }

    #[test]
    fn smooth_pairing_is_second_order() {
        let u = |x: &Point3| (1.3 * x[0]).sin() + x[1] * x[1] + (x[2]).exp();
        let y = [0.1, 0.05, -0.2];
        let mut errs = Vec::new();
        for lam in [0.4, 0.2] {
            let g = Grid::new(128, 1.0).unwrap();
            let f = LatticeDistribution::function(Field::from_fn(g, |x| u(&x)));
            errs.push((pair(&f, &TestFunction::new(y, lam).unwrap()).unwrap() - u(&y)).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    }

    #[test]
    fn holder_of_constant() {
        let g = Grid::new(32, 1.0).unwrap();
        let one = LatticeDistribution::function(Field::from_fn(g, |_| 1.0));
        let pts = stratified_points(&[0.6, 0.8], 4, 1.0);
        let e = weighted_holder_estimate(&one, 0.0, 0.0, BoundarySet::Faces, &dyadic_scales(2, 3), &pts).unwrap();
        assert!((e.value - 1.0).abs() < 1e-6);
        assert!(weighted_holder_estimate(&one, 0.0, 0.0, BoundarySet::Faces, &[0.01], &pts).is_err());
    }

    #[test]
    fn boundary_dirac() {
        assert!((delta_boundary_pair(|_| 1.0, |_| 1.0, 1.0) - 24.0).abs() < 1e-12);
        let inside = |x: &Point3| if x.iter().all(|c| c.abs() < 0.5) { 1.0 } else { 0.0 };
        assert_eq!(delta_boundary_pair(|_| 1.0, inside, 1.0), 0.0);
        // f = 1 + x on the face x3 = 1, φ = indicator of that face: ∫∫(1 + x) = 4
        let face = |x: &Point3| if x[2] == 1.0 { 1.0 } else { 0.0 };
        assert!((delta_boundary_pair(|x| 1.0 + x[0] + 2.0 * x[0] * x[1], face, 1.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn correction_basics() {
        let g = Grid::new(16, 1.0).unwrap();
        let u = LatticeDistribution::function(Field::from_fn(g, |x| 1.0 + x[0] * x[1]));
        let v = boundary_correction(&u, |_| 2.0, -1.5).unwrap();
        assert_eq!(v.value, 0.0);
        let bump = |x: &Point3| Profile::StandardBump.raw(dist(x, &[0.0; 3]) / 0.5);
        let v = boundary_correction(&u, bump, -1.5).unwrap();
        let direct: f64 = (0..g.len())
            .map(|m| {
                let (i, j, k) = g.unidx(m);
                let x = g.point(i, j, k);
                u.field.data[m] * bump(&x) * g.cell_volume()
            })
            .sum();
        assert!((v.value - direct).abs() < 1e-14);
        assert!(boundary_correction(&u, bump, -0.5).unwrap().contract_warning);
    }
}
