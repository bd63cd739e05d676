//! The cube `D = (-L, L)^3`, its faces and edges, the fundamental
//! tetrahedron `Q`, and the cell-centred lattice used by every field.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Point3 = [f64; 3];
/// Space-time point `(t, x1, x2, x3)`.
pub type Point4 = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    Spatial3,
    /// Parabolic scaling `(2,1,1,1)`.
    Spacetime4,
}

impl Frame {
    /// Scaled dimension `|𝔰|`.
    pub fn scaled_dim(self) -> usize {
        match self {
            Frame::Spatial3 => 3,
            Frame::Spacetime4 => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub half_width: f64,
    pub frame: Frame,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { half_width: 1.0, frame: Frame::Spatial3 }
    }
}

impl Domain {
    pub fn new(half_width: f64, frame: Frame) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::config(format!("half_width must be positive, got {half_width}")));
        }
        Ok(Domain { half_width, frame })
    }

    fn check(&self, x: &Point3) -> Result<()> {
        let l = self.half_width * (1.0 + 1e-12);
        if x.iter().any(|c| !c.is_finite() || c.abs() > l) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        Ok(())
    }

    /// Distance to the nearest face.
    pub fn dist_to_boundary(&self, x: &Point3) -> Result<f64> {
        self.check(x)?;
        Ok(x
            .iter()
            .map(|c| (self.half_width - c.abs()).max(0.0))
            .fold(f64::INFINITY, f64::min))
    }

    /// Distance to the 1-skeleton (the twelve edges).
    pub fn dist_to_edges(&self, x: &Point3) -> Result<f64> {
        self.check(x)?;
        let d: Vec<f64> = x.iter().map(|c| (self.half_width - c.abs()).max(0.0)).collect();
        let mut best = f64::INFINITY;
        for i in 0..3 {
            for j in i + 1..3 {
                best = best.min(d[i].hypot(d[j]));
            }
        }
        Ok(best)
    }

    /// Nearest boundary point. Ties go to the lowest axis, and within an
    /// axis to the positive face.
    pub fn project_to_boundary(&self, x: &Point3) -> Result<Point3> {
        self.check(x)?;
        let (axis, sign) = self.nearest_face(x);
        let mut p = *x;
        p[axis] = sign * self.half_width;
        Ok(p)
    }

    /// Axis and sign of the nearest face under the tie rule.
    pub fn nearest_face(&self, x: &Point3) -> (usize, f64) {
        let mut axis = 0;
        let mut best = f64::INFINITY;
        for (i, c) in x.iter().enumerate() {
            let d = self.half_width - c.abs();
            if d < best {
                best = d;
                axis = i;
            }
        }
        let sign = if x[axis] >= 0.0 { 1.0 } else { -1.0 };
        (axis, sign)
    }

    /// Map `x` into `Q = {0 ≤ q3 ≤ q1 ≤ q2 ≤ L}` written in face-distance
    /// coordinates `q_i = L - |x_{σ(i)}|`.
    pub fn canonicalize_to_q(&self, x: &Point3) -> Result<(Point3, SymmetryTag)> {
        self.check(x)?;
        let signs = [sgn(x[0]), sgn(x[1]), sgn(x[2])];
        let d = [
            self.half_width - x[0].abs(),
            self.half_width - x[1].abs(),
            self.half_width - x[2].abs(),
        ];
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        // smallest -> q3, middle -> q1, largest -> q2
        let perm = [order[1], order[2], order[0]];
        let q = [d[perm[0]], d[perm[1]], d[perm[2]]];
        Ok((q, SymmetryTag { signs, perm }))
    }
}

fn sgn(c: f64) -> f64 {
    if c < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Group element recorded by [`Domain::canonicalize_to_q`]: `q_i` is the
/// face distance along axis `perm[i]`, and `signs` restores the octant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryTag {
    pub signs: [f64; 3],
    pub perm: [usize; 3],
}

impl SymmetryTag {
    pub fn apply_inverse(&self, q: &Point3, half_width: f64) -> Point3 {
        let mut x = [0.0; 3];
        for i in 0..3 {
            let axis = self.perm[i];
            x[axis] = self.signs[axis] * (half_width - q[i]);
        }
        x
    }
}

/// Parabolic norm `max(|t|^{1/2}, |x_i|)`.
pub fn parabolic_norm(z: &Point4) -> f64 {
    z[0].abs().sqrt().max(z[1].abs()).max(z[2].abs()).max(z[3].abs())
}

/// Cell-centred lattice with `n` cells per axis on `(-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub half_width: f64,
    pub h: f64,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
}

impl Grid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::config("grid needs at least 2 cells per axis"));
        }
        Domain::new(half_width, Frame::Spatial3)?;
        Ok(Grid { n, half_width, h: 2.0 * half_width / n as f64, dt: None, steps: None })
    }

    /// Space-time grid; explicit stepping needs `dt ≤ c·h²`, the
    /// semi-implicit path passes `stability = None`.
    pub fn spacetime(n: usize, half_width: f64, dt: f64, steps: usize, stability: Option<f64>) -> Result<Self> {
        let mut g = Grid::new(n, half_width)?;
        if !(dt > 0.0) {
            return Err(Error::config("time step must be positive"));
        }
        if let Some(c) = stability {
            if dt > c * g.h * g.h {
                return Err(Error::config(format!(
                    "dt = {dt} exceeds the explicit bound {c}·h² = {}",
                    c * g.h * g.h
                )));
            }
        }
        g.dt = Some(dt);
        g.steps = Some(steps);
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Coordinate of cell centre `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Point3 {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Row-major index, last axis fastest.
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn unidx(&self, m: usize) -> (usize, usize, usize) {
        (m / (self.n * self.n), (m / self.n) % self.n, m % self.n)
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }
}

/// Scalar lattice field on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field { grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point3) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.n {
            for j in 0..grid.n {
                for k in 0..grid.n {
                    data.push(f(grid.point(i, j, k)));
                }
            }
        }
        Field { grid, data }
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.grid.idx(i, j, k)]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
