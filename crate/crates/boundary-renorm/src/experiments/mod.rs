//! Desk-scale studies along ε ladders.
//!
//! Every study returns an [`ExperimentRecord`]. Deterministic quadrature
//! studies are bit-reproducible; Monte Carlo studies are bit-reproducible
//! for equal seeds. Convergence of the stochastic equations is reported as
//! trends over coupled ladders.

mod checks;
mod pam;
mod phi4;
mod profile;
mod trace;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::Point3;
use crate::norms::TestFunction;
use crate::solvers::RunStatus;
use crate::{Error, Result};

pub use checks::{kernel_probe_rows, run_kernel_checks, run_solver_orders, KernelProbeRow};
pub use pam::{run_pam_convergence, PamBc, PamConvergence};
pub use phi4::{run_phi4_ladder, run_phi4_triviality, Phi4Bc, Phi4Ladder, Phi4Triviality};
pub use profile::{run_profile_slopes, Equation, ProfileSlopes};
pub use trace::{run_trace_continuity, TraceContinuity};

/// Fits whose normal matrix is worse conditioned than this are rejected.
pub const MAX_CONDITION: f64 = 1e10;

/// Least-squares fit of `v = slope·log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Condition number of the normal matrix.
    pub condition: f64,
}

/// Ordinary least squares in `log x`.
pub fn fit_log_slope(x: &[f64], v: &[f64]) -> Result<LogFit> {
    if x.len() != v.len() {
        return Err(Error::config("abscissae and values differ in length"));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("a log-slope fit needs at least 3 points, got {n}")));
    }
    if x.iter().any(|&a| !(a > 0.0 && a.is_finite())) || v.iter().any(|a| !a.is_finite()) {
        return Err(Error::config("log-slope fit needs positive finite abscissae and finite values"));
    }
    let lx: Vec<f64> = x.iter().map(|a| a.ln()).collect();
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let mv = v.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sx2: f64 = lx.iter().map(|a| a * a).sum();
    // eigenvalues of [[n, Σlx], [Σlx, Σlx²]]
    let (p, q) = (nf + sx2, nf * sx2 - (nf * mx).powi(2));
    let disc = (p * p - 4.0 * q).max(0.0).sqrt();
    let lo = 0.5 * (p - disc);
    let condition = if lo > 0.0 { 0.5 * (p + disc) / lo } else { f64::INFINITY };
    if sxx <= 1e-14 * nf * (1.0 + mx * mx) || condition > MAX_CONDITION {
        return Err(Error::Degenerate(format!("abscissae are degenerate (condition number {condition:e})")));
    }
    let slope = lx.iter().zip(v).map(|(a, b)| (a - mx) * (b - mv)).sum::<f64>() / sxx;
    let intercept = mv - slope * mx;
    let rss: f64 = lx.iter().zip(v).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(LogFit { slope, intercept, stderr, condition })
}

/// Parse `2^-2..2^-5`, `0.25,0.125` or `2^-2,2^-4`.
pub fn parse_eps_ladder(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::config(format!("cannot parse ε ladder '{spec}'; expected e.g. 2^-2..2^-5 or 0.25,0.125"));
    let power = |s: &str| -> Result<f64> {
        let s = s.trim();
        match s.split_once('^') {
            Some((b, e)) => {
                let b: f64 = b.trim().parse().map_err(|_| bad())?;
                let e: i32 = e.trim().parse().map_err(|_| bad())?;
                Ok(b.powi(e))
            }
            None => s.parse().map_err(|_| bad()),
        }
    };
    let eps = if let Some((a, b)) = spec.split_once("..") {
        let exp = |s: &str| -> Result<(f64, i32)> {
            let (b, e) = s.trim().split_once('^').ok_or_else(bad)?;
            Ok((b.trim().parse().map_err(|_| bad())?, e.trim().parse().map_err(|_| bad())?))
        };
        let (b0, e0) = exp(a)?;
        let (b1, e1) = exp(b)?;
        if b0 != b1 || b0 <= 1.0 {
            return Err(bad());
        }
        let step = if e1 >= e0 { 1 } else { -1 };
        let mut out = Vec::new();
        let mut e = e0;
        loop {
            out.push(b0.powi(e));
            if e == e1 {
                break;
            }
            e += step;
        }
        out
    } else {
        spec.split(',').map(power).collect::<Result<Vec<_>>>()?
    };
    check_ladder(&eps)?;
    Ok(eps)
}

/// Ladders are non-empty, positive and strictly decreasing.
pub fn check_ladder(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::config("ε ladder must be non-empty with positive entries"));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::config(format!("ε ladder {eps:?} is not strictly decreasing")));
    }
    Ok(())
}

/// Probe centres: three interior points, then two near the boundary.
pub const PROBE_CENTERS: [Point3; 5] = [
    [0.0, 0.0, 0.0],
    [0.35, -0.25, 0.15],
    [-0.3, 0.3, -0.35],
    [0.75, 0.1, -0.1],
    [-0.2, -0.05, -0.75],
];

/// Scale of the standard probes.
pub const PROBE_SCALE: f64 = 0.2;

/// The fixed probe set shared by all studies.
pub fn standard_probes() -> Vec<TestFunction> {
    PROBE_CENTERS.iter().map(|&c| TestFunction { center: c, scale: PROBE_SCALE, set_dim: None }).collect()
}

/// One run of one arm at one ε.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub arm: String,
    pub eps: f64,
    pub seed: u64,
    pub status: RunStatus,
    /// Named scalars (time, constants, masses, ...).
    pub values: BTreeMap<String, f64>,
    /// Pairings with the probe set at the final time.
    pub pairings: Vec<f64>,
}

impl RunRecord {
    fn new(arm: impl Into<String>, eps: f64, seed: u64) -> Self {
        RunRecord { arm: arm.into(), eps, seed, status: RunStatus::Ok, values: BTreeMap::new(), pairings: Vec::new() }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// A flat `(x, y)` series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: LogFit,
}

/// A qualitative property of a study and whether it was observed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trend {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub id: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub eps_ladder: Vec<f64>,
    pub runs: Vec<RunRecord>,
    pub series: Vec<Series>,
    pub fits: Vec<NamedFit>,
    pub trends: Vec<Trend>,
}

impl ExperimentRecord {
    fn new(id: &str, config: &impl Serialize, seeds: Vec<u64>, eps_ladder: &[f64]) -> Result<Self> {
        check_ladder(eps_ladder)?;
        Ok(ExperimentRecord {
            id: id.to_string(),
            config: serde_json::to_value(config)?,
            seeds,
            eps_ladder: eps_ladder.to_vec(),
            runs: Vec::new(),
            series: Vec::new(),
            fits: Vec::new(),
            trends: Vec::new(),
        })
    }

    fn trend(&mut self, name: &str, holds: bool, detail: String) {
        self.trends.push(Trend { name: name.to_string(), holds, detail });
    }

    pub fn find_trend(&self, name: &str) -> Option<&Trend> {
        self.trends.iter().find(|t| t.name == name)
    }

    pub fn find_fit(&self, name: &str) -> Option<&LogFit> {
        self.fits.iter().find(|f| f.name == name).map(|f| &f.fit)
    }

    pub fn find_series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn runs_of<'a>(&'a self, arm: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.arm == arm)
    }

    pub fn blew_up(&self) -> bool {
        self.runs.iter().any(|r| matches!(r.status, RunStatus::Blowup { .. }))
    }

    pub fn trends_hold(&self) -> bool {
        self.trends.iter().all(|t| t.holds)
    }
}

/// `true` when `v` strictly decreases.
fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Successive differences `|p_k − p_{k+1}|` of per-ε pairings, one series
/// per probe.
fn successive_differences(pairings: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let probes = pairings.first().map_or(0, |p| p.len());
    (0..probes)
        .map(|j| pairings.windows(2).map(|w| (w[0][j] - w[1][j]).abs()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_log_data() {
        let x = [0.5, 0.25, 0.125, 0.0625];
        let v: Vec<f64> = x.iter().map(|a: &f64| 0.3 * a.ln() - 1.0).collect();
        let f = fit_log_slope(&x, &v).unwrap();
        assert!((f.slope - 0.3).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!(f.stderr < 1e-14);
    }

    #[test]
    fn constant_data_has_zero_slope() {
        let f = fit_log_slope(&[1.0, 2.0, 4.0], &[5.0, 5.0, 5.0]).unwrap();
        assert!(f.slope.abs() < 1e-15);
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        assert!(matches!(fit_log_slope(&[1.0, 2.0], &[0.0, 1.0]), Err(Error::Degenerate(_))));
        assert!(matches!(fit_log_slope(&[2.0, 2.0, 2.0], &[0.0, 1.0, 2.0]), Err(Error::Degenerate(_))));
        assert!(fit_log_slope(&[1.0, -2.0, 3.0], &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn ladder_specs() {
        assert_eq!(parse_eps_ladder("2^-2..2^-5").unwrap(), vec![0.25, 0.125, 0.0625, 0.03125]);
        assert_eq!(parse_eps_ladder("0.5, 2^-2").unwrap(), vec![0.5, 0.25]);
        assert!(parse_eps_ladder("2^-5..2^-2").is_err());
        assert!(parse_eps_ladder("0.1,0.2").is_err());
        assert!(parse_eps_ladder("two").is_err());
    }

    #[test]
    fn probes_fit_in_the_cube() {
        let p = standard_probes();
        assert_eq!(p.len(), 5);
        for t in &p {
            assert!(t.center.iter().all(|c| c.abs() + t.scale <= 1.0));
        }
        let near = |t: &TestFunction| t.center.iter().fold(0.0f64, |m, c| m.max(c.abs())) > 0.7;
        assert_eq!(p.iter().filter(|t| near(t)).count(), 2);
    }
}
