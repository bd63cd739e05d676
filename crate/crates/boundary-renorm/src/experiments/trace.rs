use serde::{Deserialize, Serialize};

use super::{decreasing, ExperimentRecord, RunRecord, Series};
use crate::geometry::{Field, Frame, Grid};
use crate::noise::{make_mollifier, Profile};
use crate::solvers::{sample_stationary_psi, BoundaryCondition, PsiParams};
use crate::{Error, Result};

/// Centres of the two-dimensional probes on the planes `x₃ = −1 + r`.
const PLANE_PROBES: [[f64; 2]; 3] = [[0.0, 0.0], [0.4, -0.3], [-0.5, 0.2]];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceContinuity {
    pub eps_ladder: Vec<f64>,
    pub seed: u64,
    pub n: usize,
    /// Robin parameter of `Ψ_{ε,a}`; `∞` is Dirichlet.
    pub a: f64,
    /// Heights above the face `x₃ = −1`; all sampled heights up to this.
    pub r_max: f64,
    /// Scale of the plane probes.
    pub lambda: f64,
    pub kappa: f64,
    pub profile: Profile,
}

impl Default for TraceContinuity {
    fn default() -> Self {
        TraceContinuity {
            eps_ladder: vec![0.25, 0.125, 0.0625],
            seed: 1,
            n: 48,
            a: 1.0,
            r_max: 0.25,
            lambda: 0.25,
            kappa: 0.05,
            profile: Profile::StandardBump,
        }
    }
}

/// Pairings of the plane restrictions at the face (`r = 0`, from the ghost
/// closure) and at the cell-centre heights, one row per height.
fn plane_pairings(psi: &Field, bc: BoundaryCondition, r_max: f64, lambda: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    let g = psi.grid;
    let n = g.n;
    let weights: Vec<Vec<(usize, usize, f64)>> = PLANE_PROBES
        .iter()
        .map(|c| {
            let mut w = Vec::new();
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let p = g.point(i, j, 0);
                    let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() / lambda;
                    let v = Profile::StandardBump.raw(d);
                    if v > 0.0 {
                        w.push((i, j, v));
                        total += v;
                    }
                }
            }
            w.iter().map(|&(i, j, v)| (i, j, v / total)).collect()
        })
        .collect();
    let face = 0.5 * (1.0 + bc.ghost_factor(g.h)?);
    let mut rows = Vec::new();
    let mut at = |r: f64, k: usize, f: f64| {
        let p = weights.iter().map(|w| w.iter().map(|&(i, j, v)| v * f * psi.at(i, j, k)).sum()).collect();
        rows.push((r, p));
    };
    at(0.0, 0, face);
    for k in 0..n {
        let r = (k as f64 + 0.5) * g.h;
        if r > r_max {
            break;
        }
        at(r, k, 1.0);
    }
    Ok(rows)
}

/// Largest `|P(r′) − P(r)|/|r′ − r|^κ` over adjacent heights and probes.
fn holder_quotient(rows: &[(f64, Vec<f64>)], kappa: f64) -> f64 {
    rows.windows(2)
        .flat_map(|w| {
            let dr = w[1].0 - w[0].0;
            w[0].1.iter().zip(&w[1].1).map(move |(a, b)| (b - a).abs() / dr.powf(kappa))
        })
        .fold(0.0, f64::max)
}

/// Plane restrictions of `Ψ_{ε,a}` (and of the Dirichlet field on the same
/// noise) near the face `x₃ = −1`.
pub fn run_trace_continuity(cfg: &TraceContinuity) -> Result<ExperimentRecord> {
    let mut rec = ExperimentRecord::new("trace-continuity", cfg, vec![cfg.seed], &cfg.eps_ladder)?;
    if !(cfg.lambda > 0.0 && cfg.kappa > 0.0 && cfg.r_max > 0.0) {
        return Err(Error::config("λ, κ and r_max must be positive"));
    }
    let grid = Grid::new(cfg.n, 1.0)?;
    let scale = cfg.lambda.powf(0.5 + 6.0 * cfg.kappa);
    let mut diag = Vec::new();
    let mut dir_face: f64 = 0.0;
    for &eps in &cfg.eps_ladder {
        let mollifier = make_mollifier(cfg.profile, eps, Frame::Spatial3)?;
        for (arm, a) in [("robin", cfg.a), ("dirichlet", f64::INFINITY)] {
            let p = PsiParams { grid, mollifier: mollifier.clone(), a, seed: cfg.seed, exclude_zero_mode: a == 0.0 };
            let psi = sample_stationary_psi(&p)?;
            let bc = BoundaryCondition::from_robin_a(3.0 * a);
            let rows = plane_pairings(&psi, bc, cfg.r_max, cfg.lambda)?;
            let q = holder_quotient(&rows, cfg.kappa) * scale;
            let mut run = RunRecord::new(arm, eps, cfg.seed).with("holder_diagnostic", q);
            run.pairings = rows[0].1.clone();
            for (j, _) in PLANE_PROBES.iter().enumerate() {
                rec.series.push(Series {
                    name: format!("{arm}/eps={eps}/probe-{j}"),
                    x: rows.iter().map(|r| r.0).collect(),
                    y: rows.iter().map(|r| r.1[j]).collect(),
                });
            }
            if arm == "robin" {
                diag.push(q);
            } else {
                dir_face = dir_face.max(rows[0].1.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            }
            rec.runs.push(run);
        }
    }
    rec.trend("dirichlet trace vanishes", dir_face == 0.0, format!("largest face pairing {dir_face:e}"));
    rec.trend(
        "holder diagnostic finite",
        diag.iter().all(|d| d.is_finite()),
        format!("diagnostics {diag:?}"),
    );
    let changes: Vec<f64> = diag.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    rec.trend(
        "diagnostic changes decrease under halving",
        changes.len() >= 2 && decreasing(&changes),
        format!("changes {changes:?}"),
    );
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_face_is_zero_and_record_is_complete() {
        let cfg = TraceContinuity { eps_ladder: vec![0.5, 0.25], n: 12, ..Default::default() };
        let rec = run_trace_continuity(&cfg).unwrap();
        assert!(rec.find_trend("dirichlet trace vanishes").unwrap().holds);
        assert_eq!(rec.runs.len(), 4);
    }

    #[test]
    fn quotient_of_linear_rows() {
        let rows = vec![(0.0, vec![0.0]), (0.5, vec![1.0]), (1.0, vec![2.0])];
        assert!((holder_quotient(&rows, 1.0) - 2.0).abs() < 1e-15);
    }
}
