use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{decreasing, standard_probes, successive_differences, ExperimentRecord, RunRecord, Series};
use crate::geometry::{Field, Frame, Grid};
use crate::noise::{make_mollifier, Profile};
use crate::renorm::{a_rho_estimate, bulk_constant_pam, Convention};
use crate::solvers::{pam_potential, solve_pam, BoundaryCondition, PamProblem, TimeGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PamBc {
    Dirichlet,
    /// `∂_n u = −(a_ρ + |log ε|/(8π))u`.
    RenormalizedRobin,
    NaiveNeumann,
}

impl std::str::FromStr for PamBc {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(PamBc::Dirichlet),
            "robin" | "renormalized-robin" | "renormalized_robin" => Ok(PamBc::RenormalizedRobin),
            "neumann" | "naive-neumann" | "naive_neumann" => Ok(PamBc::NaiveNeumann),
            other => Err(Error::config(format!("unknown boundary mode '{other}'"))),
        }
    }
}

impl PamBc {
    fn label(self) -> &'static str {
        match self {
            PamBc::Dirichlet => "dirichlet",
            PamBc::RenormalizedRobin => "renormalized_robin",
            PamBc::NaiveNeumann => "naive_neumann",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PamConvergence {
    pub bc: PamBc,
    pub eps_ladder: Vec<f64>,
    pub seed: u64,
    /// Cells per axis on `(−1, 1)³`.
    pub n: usize,
    pub t_final: f64,
    pub profile: Profile,
    /// Boundary constant; the quadrature estimate when absent.
    pub a_rho: Option<f64>,
}

impl Default for PamConvergence {
    fn default() -> Self {
        PamConvergence {
            bc: PamBc::Dirichlet,
            eps_ladder: vec![0.25, 0.125, 0.0625, 0.03125],
            seed: 1,
            n: 128,
            t_final: 0.05,
            profile: Profile::StandardBump,
            a_rho: None,
        }
    }
}

/// `u₀ = Π cos(πxᵢ/2)`.
pub(super) fn cosine_datum(g: Grid) -> Field {
    Field::from_fn(g, |x| x.iter().map(|c| (0.5 * PI * c).cos()).product())
}

/// ε-PAM along a ladder coupled through one white-noise sample, with
/// successive-difference series at the probes.
pub fn run_pam_convergence(cfg: &PamConvergence) -> Result<ExperimentRecord> {
    let mut rec = ExperimentRecord::new(&format!("pam-convergence-{}", cfg.bc.label()), cfg, vec![cfg.seed], &cfg.eps_ladder)?;
    if !(cfg.t_final > 0.0) {
        return Err(Error::config("t_final must be positive"));
    }
    let grid = Grid::new(cfg.n, 1.0)?;
    let a_rho = match (cfg.bc, cfg.a_rho) {
        (PamBc::RenormalizedRobin, None) => a_rho_estimate(cfg.profile)?.value,
        (_, a) => a.unwrap_or(0.0),
    };
    let mut potentials = Vec::with_capacity(cfg.eps_ladder.len());
    let mut consts = Vec::with_capacity(cfg.eps_ladder.len());
    let mut vmax: f64 = 0.0;
    for &eps in &cfg.eps_ladder {
        let m = make_mollifier(cfg.profile, eps, Frame::Spatial3)?;
        let pad = m.stencil(grid.h)?.radius;
        let xi = pam_potential(&grid, &m, cfg.seed, pad)?;
        let c = bulk_constant_pam(eps, cfg.profile, Convention::Raw)?.value;
        vmax = vmax.max(xi.data.iter().fold(0.0f64, |a, v| a.max((v - c).abs())));
        potentials.push(xi);
        consts.push(c);
    }
    // one time step for the whole ladder, inside the positivity bound
    let steps = (cfg.t_final * vmax / 0.45).ceil().max(1.0) as usize;
    let time = TimeGrid { dt: cfg.t_final / steps as f64, t_final: cfg.t_final, output_every: steps, keep_snapshots: false };
    let probes = standard_probes();
    let u0 = cosine_datum(grid);
    let mut finals = Vec::new();
    for ((&eps, xi), &c) in cfg.eps_ladder.iter().zip(&potentials).zip(&consts) {
        let (bc, coef) = match cfg.bc {
            PamBc::Dirichlet => (BoundaryCondition::Dirichlet0, f64::NEG_INFINITY),
            PamBc::NaiveNeumann => (BoundaryCondition::neumann(), 0.0),
            PamBc::RenormalizedRobin => {
                let coef = -(a_rho + eps.ln().abs() / (8.0 * PI));
                (BoundaryCondition::Robin { coef }, coef)
            }
        };
        let tr = solve_pam(&PamProblem { bc, c_eps: c, potential: xi, u0: &u0, time, probes: &probes })?;
        let mut run = RunRecord::new(cfg.bc.label(), eps, cfg.seed).with("c_eps", c).with("dt", time.dt);
        if coef.is_finite() {
            run = run.with("robin_coef", coef);
        }
        run.status = tr.status;
        if let Some(o) = tr.last() {
            run = run.with("t", o.t).with("min", o.min).with("max", o.max);
            run.pairings = o.pairings.clone();
        }
        finals.push(run.pairings.clone());
        rec.runs.push(run);
    }
    if rec.blew_up() {
        rec.trend("successive differences decrease", false, "a run blew up; the ladder is partial".into());
        return Ok(rec);
    }
    let d = successive_differences(&finals);
    let mut ok = 0;
    for (j, dj) in d.iter().enumerate() {
        if decreasing(dj) {
            ok += 1;
        }
        rec.series.push(Series { name: format!("d/probe-{j}"), x: cfg.eps_ladder[1..].to_vec(), y: dj.clone() });
    }
    let frac = ok as f64 / d.len().max(1) as f64;
    rec.trend(
        "successive differences decrease",
        d.first().is_some_and(|v| v.len() >= 2) && frac >= 0.8,
        format!("{ok} of {} probes have strictly decreasing d_k", d.len()),
    );
    Ok(rec)
}
