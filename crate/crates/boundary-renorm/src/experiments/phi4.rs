use serde::{Deserialize, Serialize};

use super::{standard_probes, ExperimentRecord, RunRecord, Series};
use crate::geometry::{Field, Frame, Grid};
use crate::noise::{make_mollifier, Profile};
use crate::renorm::{bulk_constant_phi4, i0_heat_closed, Convention, Target};
use crate::solvers::{solve_phi4_coupled, BoundaryCondition, NoiseSpec, Phi4Arm, TimeGrid};
use crate::{Error, Result};

/// Shared lattice and noise settings of the Φ⁴₃ studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Phi4Ladder {
    pub eps_ladder: Vec<f64>,
    pub seed: u64,
    pub n: usize,
    pub steps: usize,
    /// Time step; `ε_min²/8` when absent.
    pub dt: Option<f64>,
    pub profile: Profile,
    /// O(1) part of the boundary coefficient `3(a_ρ + b_ε)`.
    pub a_rho: f64,
}

impl Default for Phi4Ladder {
    fn default() -> Self {
        Phi4Ladder {
            eps_ladder: vec![0.5, 0.25, 0.125],
            seed: 1,
            n: 32,
            steps: 400,
            dt: None,
            profile: Profile::StandardBump,
            a_rho: 0.0,
        }
    }
}

/// `b_ε = 𝓘₀(1)|log ε| − b` for finite `b`, `b_ε ≡ 0` for `b = ∞`.
fn b_eps(eps: f64, b: Target) -> f64 {
    match b {
        Target::Finite(b) => i0_heat_closed(1.0) * eps.ln().abs() - b,
        Target::Infinite => 0.0,
    }
}

/// One boundary arm: its name and the rule producing the condition at ε.
type ArmRule<'a> = (&'a str, Box<dyn Fn(f64) -> BoundaryCondition + 'a>);

/// Run every arm at every ε on shared noise, starting from `u₀ = 0`.
/// Returns the record and the final pairings indexed `[arm][ε]`.
fn run_arms(id: &str, cfg: &Phi4Ladder, config: &impl Serialize, arms: &[ArmRule]) -> Result<(ExperimentRecord, Vec<Vec<Vec<f64>>>)> {
    let mut rec = ExperimentRecord::new(id, config, vec![cfg.seed], &cfg.eps_ladder)?;
    let eps_min = *cfg.eps_ladder.last().unwrap();
    let dt = cfg.dt.unwrap_or(eps_min * eps_min / 8.0);
    if cfg.steps == 0 {
        return Err(Error::config("a Φ⁴₃ run needs at least one step"));
    }
    let grid = Grid::new(cfg.n, 1.0)?;
    let time = TimeGrid { dt, t_final: dt * cfg.steps as f64, output_every: cfg.steps, keep_snapshots: false };
    let probes = standard_probes();
    let u0 = Field::zeros(grid);
    let mut out = vec![Vec::new(); arms.len()];
    for &eps in &cfg.eps_ladder {
        let c = bulk_constant_phi4(eps, cfg.profile, Convention::Raw)?.value;
        let noise = NoiseSpec { mollifier: make_mollifier(cfg.profile, eps, Frame::Spacetime4)?, seed: cfg.seed, sign: 1.0 };
        let specs: Vec<Phi4Arm> = arms.iter().map(|(_, bc)| Phi4Arm { bc: bc(eps), c_eps: c }).collect();
        let trs = solve_phi4_coupled(&specs, Some(&noise), &u0, time, &probes)?;
        for (k, ((name, _), tr)) in arms.iter().zip(trs).enumerate() {
            let mut run = RunRecord::new(*name, eps, cfg.seed).with("c_eps", c).with("dt", dt);
            if let BoundaryCondition::Robin { coef } = specs[k].bc {
                run = run.with("robin_coef", coef);
            }
            run.status = tr.status;
            if let Some(o) = tr.last() {
                run = run.with("t", o.t).with("min", o.min).with("max", o.max).with("trace_norm", o.boundary_trace_norm);
                run.pairings = o.pairings.clone();
            }
            out[k].push(run.pairings.clone());
            rec.runs.push(run);
        }
    }
    Ok((rec, out))
}

/// Mean absolute probe gap between two arms, per ε.
fn gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum::<f64>() / x.len().max(1) as f64)
        .collect()
}

/// Boundary mode of a single Φ⁴₃ ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi4Bc {
    Dirichlet,
    /// `∂_n u = 3(a_ρ + b_ε)u` with `b_ε` from the target `b`.
    Robin,
    /// Homogeneous Neumann, ignoring `a_ρ` and `b`.
    Neumann,
}

impl std::str::FromStr for Phi4Bc {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Phi4Bc::Dirichlet),
            "robin" => Ok(Phi4Bc::Robin),
            "neumann" => Ok(Phi4Bc::Neumann),
            other => Err(Error::config(format!("unknown boundary mode '{other}'"))),
        }
    }
}

/// ε-Φ⁴₃ with one boundary mode along a coupled ladder.
pub fn run_phi4_ladder(cfg: &Phi4Ladder, bc: Phi4Bc, b: Target) -> Result<ExperimentRecord> {
    #[derive(Serialize)]
    struct Snapshot<'a> {
        ladder: &'a Phi4Ladder,
        bc: Phi4Bc,
        b: Target,
    }
    let a = cfg.a_rho;
    let rule: Box<dyn Fn(f64) -> BoundaryCondition> = match bc {
        Phi4Bc::Dirichlet => Box::new(|_| BoundaryCondition::Dirichlet0),
        Phi4Bc::Neumann => Box::new(|_| BoundaryCondition::neumann()),
        Phi4Bc::Robin => Box::new(move |e| BoundaryCondition::Robin { coef: 3.0 * (a + b_eps(e, b)) }),
    };
    let arms: Vec<ArmRule> = vec![("phi4", rule)];
    let (mut rec, out) = run_arms("phi4-ladder", cfg, &Snapshot { ladder: cfg, bc, b }, &arms)?;
    for j in 0..standard_probes().len() {
        let d: Vec<f64> = out[0].windows(2).map(|w| (w[0][j] - w[1][j]).abs()).collect();
        rec.series.push(Series { name: format!("d/probe-{j}"), x: cfg.eps_ladder[1..].to_vec(), y: d });
    }
    Ok(rec)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Phi4Triviality {
    pub ladder: Phi4Ladder,
    /// Limit of the schedule arm; `inf` selects `b_ε ≡ 0`.
    pub b: Target,
}

impl Default for Phi4Triviality {
    fn default() -> Self {
        Phi4Triviality { ladder: Phi4Ladder::default(), b: Target::Finite(0.0) }
    }
}

/// Dirichlet arm, triviality arm (`b_ε ≡ 0`) and the schedule arm for `b`,
/// all on matched noise. Gaps are mean absolute probe differences to the
/// Dirichlet arm.
pub fn run_phi4_triviality(cfg: &Phi4Triviality) -> Result<ExperimentRecord> {
    let a = cfg.ladder.a_rho;
    let b = cfg.b;
    let arms: Vec<ArmRule> = vec![
        ("dirichlet", Box::new(|_| BoundaryCondition::Dirichlet0)),
        ("trivial", Box::new(move |_| BoundaryCondition::Robin { coef: 3.0 * a })),
        ("schedule", Box::new(move |e| BoundaryCondition::Robin { coef: 3.0 * (a + b_eps(e, b)) })),
    ];
    let (mut rec, out) = run_arms("phi4-triviality", &cfg.ladder, cfg, &arms)?;
    let x = cfg.ladder.eps_ladder.clone();
    let g_triv = gap(&out[1], &out[0]);
    let g_sched = gap(&out[2], &out[0]);
    rec.series.push(Series { name: "gap/trivial".into(), x: x.clone(), y: g_triv.clone() });
    rec.series.push(Series { name: "gap/schedule".into(), x, y: g_sched.clone() });
    if rec.blew_up() {
        rec.trend("trivial gap non-increasing", false, "a run blew up; the ladder is partial".into());
        return Ok(rec);
    }
    rec.trend(
        "trivial gap non-increasing",
        g_triv.windows(2).all(|w| w[1] <= w[0]),
        format!("gaps {g_triv:?}"),
    );
    match b {
        Target::Finite(_) => {
            let first = g_sched[0];
            let min = g_sched.iter().cloned().fold(f64::INFINITY, f64::min);
            rec.trend(
                "schedule gap separated from zero",
                min >= 0.5 * first && first > 0.0,
                format!("gaps {g_sched:?}; smallest is {:.3} of the first", min / first),
            );
        }
        Target::Infinite => {
            let worst = g_triv.iter().zip(&g_sched).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            rec.trend("b = inf arm matches the trivial arm", worst == 0.0, format!("largest gap difference {worst:e}"));
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Phi4Ladder {
        Phi4Ladder { eps_ladder: vec![0.5, 0.25], n: 16, steps: 10, ..Default::default() }
    }

    #[test]
    fn infinite_b_reproduces_the_trivial_arm() {
        let rec = run_phi4_triviality(&Phi4Triviality { ladder: tiny(), b: Target::Infinite }).unwrap();
        assert!(rec.find_trend("b = inf arm matches the trivial arm").unwrap().holds);
        assert_eq!(rec.runs.len(), 6);
    }

    #[test]
    fn dirichlet_arm_has_zero_trace() {
        let rec = run_phi4_ladder(&tiny(), Phi4Bc::Dirichlet, Target::Infinite).unwrap();
        assert!(rec.runs.iter().all(|r| r.value("trace_norm") == Some(0.0)));
    }

    #[test]
    fn schedule_coefficient() {
        let e: f64 = 0.125;
        assert!((b_eps(e, Target::Finite(0.01)) - (e.ln().abs() * i0_heat_closed(1.0) - 0.01)).abs() < 1e-16);
        assert_eq!(b_eps(e, Target::Infinite), 0.0);
    }
}
