use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{fit_log_slope, ExperimentRecord, NamedFit, RunRecord, Series};
use crate::geometry::{Field, Grid, Point4};
use crate::kernels::{
    cube_heat_mass, kernel_residual, robin_to_dirichlet_gap, KernelEvaluator, KernelKind, Probe, ResidualMode,
};
use crate::solvers::{solve_phi4, BoundaryCondition, HeatStepper, Phi4Problem, TimeGrid};
use crate::Result;

/// Probes on the face `x₃ = 0` of the half space.
const HALFSPACE_PROBES: [Probe; 3] = [
    Probe { x: [0.3, 0.1, -0.2, 0.0], y: [0.1, 0.0, 0.1, 0.4] },
    Probe { x: [0.5, -0.3, 0.2, 0.0], y: [0.0, 0.1, 0.0, 0.2] },
    Probe { x: [0.2, 0.0, 0.0, 0.0], y: [0.05, 0.1, -0.1, 0.05] },
];

/// Probes on faces of the cube, the face picked by the largest coordinate.
const CUBE_FACE_PROBES: [Probe; 3] = [
    Probe { x: [0.3, 1.0, 0.2, -0.3], y: [0.0, 0.6, 0.1, 0.2] },
    Probe { x: [0.5, 0.1, -1.0, 0.4], y: [0.1, 0.0, -0.5, 0.3] },
    Probe { x: [0.4, -0.2, 0.3, 1.0], y: [0.0, 0.2, 0.0, 0.7] },
];

/// Interior probe pairs for the Robin-to-Dirichlet gap.
const CUBE_INTERIOR_PROBES: [Probe; 2] = [
    Probe { x: [0.2, 0.7, 0.0, 0.1], y: [0.0, 0.5, 0.1, 0.0] },
    Probe { x: [0.3, -0.8, 0.4, -0.2], y: [0.1, -0.6, 0.2, 0.0] },
];

/// Robin parameters of the gap ladder.
pub const GAP_LADDER: [f64; 4] = [8.0, 16.0, 32.0, 64.0];

/// Boundary residuals, image-order decay, Neumann mass and the
/// Robin-to-Dirichlet rate.
pub fn run_kernel_checks() -> Result<ExperimentRecord> {
    #[derive(Serialize)]
    struct Settings {
        fd_step: f64,
        neumann_lag: f64,
        gap_ladder: [f64; 4],
    }
    let settings = Settings { fd_step: 1e-5, neumann_lag: 0.05, gap_ladder: GAP_LADDER };
    let mut rec = ExperimentRecord::new("kernel-check", &settings, vec![], &[1.0])?;
    let mut worst_half: f64 = 0.0;
    for a in [0.5, 2.0] {
        let ev = KernelEvaluator::new(KernelKind::HalfspaceRobin).with_robin(a)?;
        let r = kernel_residual(&ev, &HALFSPACE_PROBES, ResidualMode::Boundary, settings.fd_step)?;
        worst_half = worst_half.max(r.max);
        rec.runs.push(RunRecord::new("halfspace-residual", 0.0, 0).with("a", a).with("residual", r.max));
    }
    rec.trend("halfspace residual below 1e-6", worst_half <= 1e-6, format!("largest residual {worst_half:e}"));
    let mut dir = Vec::new();
    for m in [1, 3] {
        let ev = KernelEvaluator::new(KernelKind::CubeRobin).with_robin(f64::INFINITY)?.with_image_order(m)?;
        let r = kernel_residual(&ev, &CUBE_FACE_PROBES, ResidualMode::Boundary, settings.fd_step)?;
        dir.push(r.max);
        rec.runs.push(RunRecord::new("cube-dirichlet-residual", 0.0, 0).with("M", m as f64).with("residual", r.max));
    }
    let drop = dir[0] / dir[1];
    rec.trend("dirichlet residual drops 5x from M=1 to M=3", drop >= 5.0, format!("ratio {drop:.3e}"));
    let mass = cube_heat_mass(0.0, settings.neumann_lag, &[0.3, -0.2, 0.5], 3)?;
    rec.runs.push(RunRecord::new("neumann-mass", 0.0, 0).with("mass", mass));
    rec.trend("neumann mass is one", (mass - 1.0).abs() <= 1e-3, format!("mass {mass}"));
    let gaps = GAP_LADDER
        .iter()
        .map(|&a| robin_to_dirichlet_gap(a, &CUBE_INTERIOR_PROBES, 3))
        .collect::<Result<Vec<_>>>()?;
    for (&a, &g) in GAP_LADDER.iter().zip(&gaps) {
        rec.runs.push(RunRecord::new("robin-dirichlet-gap", 0.0, 0).with("a", a).with("gap", g));
    }
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[1] / w[0]).collect();
    rec.series.push(Series { name: "gap-ratio".into(), x: GAP_LADDER[1..].to_vec(), y: ratios.clone() });
    rec.trend(
        "gap halves when a doubles",
        ratios.iter().all(|r| (r - 0.5).abs() <= 0.15),
        format!("ratios {ratios:?}"),
    );
    Ok(rec)
}

/// One line of the kernel probe table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelProbeRow {
    pub kind: KernelKind,
    pub a: f64,
    pub m: usize,
    pub x: Point4,
    pub y: Point4,
    pub value: f64,
}

/// Cube Robin kernel values on a fixed probe table for the given `a` values
/// and image orders.
pub fn kernel_probe_rows(a_values: &[f64], orders: &[usize]) -> Result<Vec<KernelProbeRow>> {
    let mut rows = Vec::new();
    for &a in a_values {
        for &m in orders {
            let ev = KernelEvaluator::new(KernelKind::CubeRobin).with_robin(a)?.with_image_order(m)?;
            for p in CUBE_FACE_PROBES.iter().chain(&CUBE_INTERIOR_PROBES) {
                rows.push(KernelProbeRow { kind: ev.kind, a, m, x: p.x, y: p.y, value: ev.eval(&p.x, &p.y)? });
            }
        }
    }
    Ok(rows)
}

/// `u*(t, x) = e^{−t} w(x)`, `w = (1 + x₁/2) Π cos(πxᵢ/2)`, vanishing on
/// the boundary, and the source `∂_t u* − Δu*`.
fn manufactured(t: f64, x: &[f64; 3]) -> (f64, f64) {
    let c: Vec<f64> = x.iter().map(|v| (0.5 * PI * v).cos()).collect();
    let w = (1.0 + 0.5 * x[0]) * c[0] * c[1] * c[2];
    let lap = -0.75 * PI * PI * w - 0.5 * PI * (0.5 * PI * x[0]).sin() * c[1] * c[2];
    let e = (-t).exp();
    (e * w, e * (-w - lap))
}

fn manufactured_error(n: usize, dt: f64, t_final: f64) -> Result<f64> {
    let g = Grid::new(n, 1.0)?;
    let stepper = HeatStepper::new(&g, BoundaryCondition::Dirichlet0, dt)?;
    let steps = (t_final / dt).round() as usize;
    let mut u = Field::from_fn(g, |x| manufactured(0.0, &x).0);
    for s in 1..=steps {
        let t = s as f64 * dt;
        let f = Field::from_fn(g, |x| manufactured(t, &x).1);
        u = stepper.step(&u, &f);
    }
    let t = steps as f64 * dt;
    let exact = Field::from_fn(g, |x| manufactured(t, &x).0);
    Ok(u.data.iter().zip(&exact.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn ode_error(dt: f64) -> Result<f64> {
    let g = Grid::new(4, 1.0)?;
    let u0 = Field::from_fn(g, |_| 2.0);
    let time = TimeGrid { dt, t_final: 0.5, output_every: usize::MAX, keep_snapshots: true };
    let p = Phi4Problem { bc: BoundaryCondition::neumann(), c_eps: 0.0, noise: None, u0: &u0, time, probes: &[] };
    let tr = solve_phi4(&p)?;
    let exact = 2.0 / (1.0 + 2.0 * 4.0 * 0.5f64).sqrt();
    let last = tr.snapshots.last().expect("final snapshot");
    Ok(last.data.iter().map(|v| (v - exact).abs()).fold(0.0, f64::max))
}

/// Spatial ladder `n ∈ {8, 16, 32}` with `Δt = h²/4` on a manufactured
/// Dirichlet solution, and a `Δt` ladder on the Φ⁴ ODE limit.
pub fn run_solver_orders() -> Result<ExperimentRecord> {
    #[derive(Serialize)]
    struct Settings {
        n: [usize; 3],
        t_final: f64,
        ode_dt: [f64; 3],
    }
    let settings = Settings { n: [8, 16, 32], t_final: 0.05, ode_dt: [4e-3, 2e-3, 1e-3] };
    let mut rec = ExperimentRecord::new("solver-orders", &settings, vec![], &[1.0])?;
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for &n in &settings.n {
        let h = 2.0 / n as f64;
        let e = manufactured_error(n, 0.25 * h * h, settings.t_final)?;
        rec.runs.push(RunRecord::new("manufactured", 0.0, 0).with("h", h).with("error", e));
        hs.push(h);
        errs.push(e.ln());
    }
    let space = fit_log_slope(&hs, &errs)?;
    rec.fits.push(NamedFit { name: "space-order".into(), fit: space });
    rec.trend(
        "O(h^2 + dt) within 20%",
        (space.slope / 2.0 - 1.0).abs() <= 0.2,
        format!("log-error slope in h is {:.3}", space.slope),
    );
    let mut dts = Vec::new();
    let mut oerr = Vec::new();
    for &dt in &settings.ode_dt {
        let e = ode_error(dt)?;
        rec.runs.push(RunRecord::new("phi4-ode", 0.0, 0).with("dt", dt).with("error", e));
        dts.push(dt);
        oerr.push(e.ln());
    }
    let time = fit_log_slope(&dts, &oerr)?;
    rec.fits.push(NamedFit { name: "time-order".into(), fit: time });
    rec.trend(
        "phi4 ODE limit O(dt)",
        (time.slope - 1.0).abs() <= 0.2 && oerr.iter().zip(&dts).all(|(e, dt)| e.exp() <= 5.0 * dt),
        format!("log-error slope in dt is {:.3}", time.slope),
    );
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_source_is_consistent() {
        // finite-difference check of the analytic Laplacian
        let x = [0.3, -0.4, 0.2];
        let h = 1e-4;
        let (u, f) = manufactured(0.0, &x);
        let mut lap = 0.0;
        for i in 0..3 {
            let mut p = x;
            let mut m = x;
            p[i] += h;
            m[i] -= h;
            lap += (manufactured(0.0, &p).0 - 2.0 * u + manufactured(0.0, &m).0) / (h * h);
        }
        assert!((f - (-u - lap)).abs() < 1e-5);
    }

    #[test]
    fn probe_rows_cover_the_table() {
        let rows = kernel_probe_rows(&[1.0, f64::INFINITY], &[1, 3]).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 5);
        assert!(rows.iter().all(|r| r.value.is_finite()));
    }
}
