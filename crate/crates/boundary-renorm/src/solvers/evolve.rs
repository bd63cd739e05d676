use serde::{Deserialize, Serialize};

use super::{BoundaryCondition, HeatStepper};
use crate::geometry::{Field, Frame, Grid};
use crate::noise::{self, Mollifier, SpacetimeNoise};
use crate::norms::{pair, LatticeDistribution, TestFunction};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Blowup { step: usize, t: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observation {
    pub t: f64,
    pub pairings: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// `(Σ_faces u_face² h²)^{1/2}` with face values from the ghost closure.
    pub boundary_trace_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub h: f64,
    pub bc: BoundaryCondition,
    pub c_eps: f64,
    pub observations: Vec<Observation>,
    #[serde(skip)]
    pub snapshots: Vec<Field>,
    pub status: RunStatus,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Observation> {
        self.observations.last()
    }
}

/// Time grid shared by both equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub t_final: f64,
    /// Record every this many steps (the final step is always recorded).
    pub output_every: usize,
    pub keep_snapshots: bool,
}

impl TimeGrid {
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) {
            return Err(Error::config("time grid needs dt > 0 and t_final ≥ 0"));
        }
        Ok((self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize)
    }
}

fn face_trace_norm(u: &Field, bc: BoundaryCondition) -> Result<f64> {
    let g = u.grid;
    let gf = bc.ghost_factor(g.h)?;
    let n = g.n;
    let f = 0.5 * (1.0 + gf);
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            for (i, j, k) in [(0, a, b), (n - 1, a, b), (a, 0, b), (a, n - 1, b), (a, b, 0), (a, b, n - 1)] {
                s += (f * u.at(i, j, k)).powi(2);
            }
        }
    }
    Ok((s * g.h * g.h).sqrt())
}

fn observe(t: f64, u: &Field, bc: BoundaryCondition, probes: &[TestFunction]) -> Result<Observation> {
    let d = LatticeDistribution::function(u.clone());
    let pairings = probes.iter().map(|p| pair(&d, p)).collect::<Result<Vec<_>>>()?;
    Ok(Observation {
        t,
        pairings,
        min: u.min(),
        max: u.max(),
        boundary_trace_norm: face_trace_norm(u, bc)?,
    })
}

struct Recorder<'a> {
    time: TimeGrid,
    bc: BoundaryCondition,
    probes: &'a [TestFunction],
    traj: Trajectory,
}

impl<'a> Recorder<'a> {
    fn new(time: TimeGrid, bc: BoundaryCondition, c_eps: f64, h: f64, probes: &'a [TestFunction]) -> Self {
        Recorder {
            time,
            bc,
            probes,
            traj: Trajectory {
                dt: time.dt,
                h,
                bc,
                c_eps,
                observations: Vec::new(),
                snapshots: Vec::new(),
                status: RunStatus::Ok,
            },
        }
    }

    fn record(&mut self, step: usize, steps: usize, u: &Field) -> Result<()> {
        let every = self.time.output_every.max(1);
        if step % every == 0 || step == steps {
            let t = (step as f64 * self.time.dt).min(self.time.t_final);
            self.traj.observations.push(observe(t, u, self.bc, self.probes)?);
            if self.time.keep_snapshots {
                self.traj.snapshots.push(u.clone());
            }
        }
        Ok(())
    }

    /// Returns false after recording a blow-up.
    fn check(&mut self, step: usize, u: &Field) -> bool {
        if u.is_finite() {
            return true;
        }
        self.traj.status = RunStatus::Blowup { step, t: step as f64 * self.time.dt };
        false
    }
}

/// `ε`-PAM problem `(∂_t − Δ)u = u(ξ_ε − C_ε)` with a frozen potential.
#[derive(Debug, Clone)]
pub struct PamProblem<'a> {
    pub bc: BoundaryCondition,
    pub c_eps: f64,
    /// `ξ_ε` on the grid.
    pub potential: &'a Field,
    pub u0: &'a Field,
    pub time: TimeGrid,
    pub probes: &'a [TestFunction],
}

/// Explicit potential, implicit Laplacian. Requires `Δt·max|ξ_ε − C_ε| ≤ 1/2`
/// so that one step preserves positivity.
pub fn solve_pam(p: &PamProblem) -> Result<Trajectory> {
    let g = p.u0.grid;
    if p.potential.grid != g {
        return Err(Error::config("potential and initial datum live on different grids"));
    }
    let vmax = p.potential.data.iter().fold(0.0f64, |m, v| m.max((v - p.c_eps).abs()));
    if p.time.dt * vmax > 0.5 {
        return Err(Error::config(format!(
            "Δt·max|ξ_ε − C_ε| = {} exceeds 1/2; reduce the time step",
            p.time.dt * vmax
        )));
    }
    let steps = p.time.steps()?;
    let stepper = HeatStepper::new(&g, p.bc, p.time.dt)?;
    let mut rec = Recorder::new(p.time, p.bc, p.c_eps, g.h, p.probes);
    let mut u = p.u0.clone();
    rec.record(0, steps, &u)?;
    let mut drift = Field::zeros(g);
    for step in 1..=steps {
        for ((d, v), x) in drift.data.iter_mut().zip(&u.data).zip(&p.potential.data) {
            *d = v * (x - p.c_eps);
        }
        u = stepper.step(&u, &drift);
        if !rec.check(step, &u) {
            break;
        }
        rec.record(step, steps, &u)?;
    }
    Ok(rec.traj)
}

/// `ξ_ε = ρ_ε ∗ ξ` from a master sample with the given padding.
pub fn pam_potential(grid: &Grid, m: &Mollifier, seed: u64, pad: usize) -> Result<Field> {
    let s = noise::sample_white_noise_3d(grid, pad, seed);
    noise::mollify(&s, m)
}

/// Space-time noise source for Φ⁴₃.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    pub mollifier: Mollifier,
    pub seed: u64,
    /// Multiplies the noise; `−1` gives the mirrored sample.
    pub sign: f64,
}

/// `ε`-Φ⁴₃ problem `(∂_t − Δ)u = −u³ + 3C_ε u + ξ_ε`.
#[derive(Debug, Clone)]
pub struct Phi4Problem<'a> {
    pub bc: BoundaryCondition,
    pub c_eps: f64,
    pub noise: Option<NoiseSpec>,
    pub u0: &'a Field,
    pub time: TimeGrid,
    pub probes: &'a [TestFunction],
}

pub fn solve_phi4(p: &Phi4Problem) -> Result<Trajectory> {
    let arm = Phi4Arm { bc: p.bc, c_eps: p.c_eps };
    let mut out = solve_phi4_coupled(&[arm], p.noise.as_ref(), p.u0, p.time, p.probes)?;
    Ok(out.remove(0))
}

/// Boundary condition and bulk constant of one arm of a coupled Φ⁴₃ run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phi4Arm {
    pub bc: BoundaryCondition,
    pub c_eps: f64,
}

/// Advance several arms in lockstep on one noise realisation. An arm that
/// blows up stops; the others continue.
pub fn solve_phi4_coupled(
    arms: &[Phi4Arm],
    noise: Option<&NoiseSpec>,
    u0: &Field,
    time: TimeGrid,
    probes: &[TestFunction],
) -> Result<Vec<Trajectory>> {
    let g = u0.grid;
    let steps = time.steps()?;
    let steppers = arms.iter().map(|a| HeatStepper::new(&g, a.bc, time.dt)).collect::<Result<Vec<_>>>()?;
    let mut source = match noise {
        Some(ns) => {
            if ns.mollifier.frame != Frame::Spacetime4 {
                return Err(Error::config("Φ⁴₃ noise needs a parabolic mollifier"));
            }
            let sg = Grid::spacetime(g.n, g.half_width, time.dt, steps, None)?;
            Some((SpacetimeNoise::new(&sg, &ns.mollifier, ns.seed)?, ns.sign))
        }
        None => None,
    };
    let mut recs: Vec<Recorder> = arms.iter().map(|a| Recorder::new(time, a.bc, a.c_eps, g.h, probes)).collect();
    let mut states: Vec<Field> = vec![u0.clone(); arms.len()];
    let mut alive = vec![true; arms.len()];
    for r in recs.iter_mut() {
        r.record(0, steps, u0)?;
    }
    let mut drift = Field::zeros(g);
    for step in 1..=steps {
        let xi = match source.as_mut() {
            Some((src, sign)) => Some((src.at_step(step - 1)?, *sign)),
            None => None,
        };
        for (m, arm) in arms.iter().enumerate() {
            if !alive[m] {
                continue;
            }
            let u = &states[m];
            for (d, v) in drift.data.iter_mut().zip(&u.data) {
                *d = -v * v * v + 3.0 * arm.c_eps * v;
            }
            if let Some((xi, sign)) = &xi {
                for (d, x) in drift.data.iter_mut().zip(&xi.data) {
                    *d += sign * x;
                }
            }
            let next = steppers[m].step(u, &drift);
            if !recs[m].check(step, &next) {
                alive[m] = false;
                continue;
            }
            recs[m].record(step, steps, &next)?;
            states[m] = next;
        }
        if !alive.iter().any(|&a| a) {
            break;
        }
    }
    Ok(recs.into_iter().map(|r| r.traj).collect())
}

/// Cole–Hopf-type map `v = u·e^{Y}` between the primal and transformed PAM
/// formulations, for cross-checks on smooth data.
pub fn transform_pam(u: &Field, y: &Field) -> Field {
    let mut v = u.clone();
    for (a, b) in v.data.iter_mut().zip(&y.data) {
        *a *= b.exp();
    }
    v
}
