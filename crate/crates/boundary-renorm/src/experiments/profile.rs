use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{fit_log_slope, ExperimentRecord, NamedFit, RunRecord, Series};
use crate::noise::Profile;
use crate::renorm::{i0_heat_closed, pam_mass_scaled, pam_profile_i0, phi4_mass_scaled, Estimate};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    Pam,
    Phi4,
}

impl std::str::FromStr for Equation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pam" => Ok(Equation::Pam),
            "phi4" => Ok(Equation::Phi4),
            other => Err(Error::config(format!("unknown equation '{other}' (expected pam or phi4)"))),
        }
    }
}

impl Equation {
    /// Coefficient of `|log ε|` in the boundary mass: the unit-distance
    /// value of the unmollified profile.
    pub fn reference_slope(self) -> f64 {
        match self {
            Equation::Pam => pam_profile_i0(1.0),
            Equation::Phi4 => i0_heat_closed(1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSlopes {
    pub equation: Equation,
    pub eps_ladder: Vec<f64>,
    pub y1: Vec<f64>,
    pub profile: Profile,
}

impl Default for ProfileSlopes {
    fn default() -> Self {
        ProfileSlopes {
            equation: Equation::Pam,
            eps_ladder: vec![0.0625, 0.03125, 0.015625, 0.0078125],
            y1: vec![0.25, 0.5, 1.0],
            profile: Profile::StandardBump,
        }
    }
}

/// Boundary masses `m_ε(y₁)` over the ladder and `y₁` grid, with fitted
/// slopes in `log(1/ε)` (one fit per `y₁`) and in `log y₁` (one per ε).
pub fn run_profile_slopes(cfg: &ProfileSlopes) -> Result<ExperimentRecord> {
    let mut rec = ExperimentRecord::new(&format!("profile-slopes-{:?}", cfg.equation).to_lowercase(), cfg, vec![], &cfg.eps_ladder)?;
    if cfg.y1.iter().any(|&y| !(y > 0.0 && y <= 1.0)) {
        return Err(Error::config("y₁ values must lie in (0, 1]"));
    }
    // m_ε(y₁) depends only on y₁/ε
    let mut cache: HashMap<u64, Estimate> = HashMap::new();
    let mut mass = |y: f64| -> Estimate {
        cache
            .entry(y.to_bits())
            .or_insert_with(|| match cfg.equation {
                Equation::Pam => pam_mass_scaled(y, cfg.profile),
                Equation::Phi4 => phi4_mass_scaled(y, cfg.profile),
            })
            .clone()
    };
    let mut table: Vec<Vec<Option<f64>>> = vec![vec![None; cfg.y1.len()]; cfg.eps_ladder.len()];
    for (i, &eps) in cfg.eps_ladder.iter().enumerate() {
        for (j, &y1) in cfg.y1.iter().enumerate() {
            if !(y1 > eps) {
                continue;
            }
            let m = mass(y1 / eps);
            table[i][j] = Some(m.value);
            rec.runs.push(
                RunRecord::new("mass", eps, 0)
                    .with("y1", y1)
                    .with("mass", m.value)
                    .with("refinement_delta", m.refinement_delta),
            );
        }
    }
    let mut eps_fits = Vec::new();
    let mut worst_halving: f64 = 0.0;
    let mut halvings = 0;
    for (j, &y1) in cfg.y1.iter().enumerate() {
        let (x, v): (Vec<f64>, Vec<f64>) =
            cfg.eps_ladder.iter().zip(&table).filter_map(|(e, row)| row[j].map(|m| (1.0 / e, m))).unzip();
        if x.len() >= 3 {
            let fit = fit_log_slope(&x, &v)?;
            eps_fits.push((y1, fit));
            rec.fits.push(NamedFit { name: format!("eps-slope/y1={y1}"), fit });
        }
        if x.len() >= 2 {
            let d: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
            let step = cfg.equation.reference_slope() * 2f64.ln();
            for (w, di) in x.windows(2).zip(&d) {
                if (w[1] / w[0] - 2.0).abs() < 1e-12 {
                    worst_halving = worst_halving.max((di / step - 1.0).abs());
                    halvings += 1;
                }
            }
            rec.series.push(Series { name: format!("eps-halving/y1={y1}"), x: x[1..].iter().map(|a| 1.0 / a).collect(), y: d });
        }
    }
    for (i, &eps) in cfg.eps_ladder.iter().enumerate() {
        let (x, v): (Vec<f64>, Vec<f64>) =
            cfg.y1.iter().zip(&table[i]).filter_map(|(y, m)| m.map(|m| (*y, m))).unzip();
        if x.len() >= 3 {
            rec.fits.push(NamedFit { name: format!("y1-slope/eps={eps}"), fit: fit_log_slope(&x, &v)? });
        }
    }
    if halvings > 0 {
        rec.trend(
            "halving differences match the reference slope within 5%",
            worst_halving <= 0.05,
            format!("largest relative deviation {worst_halving:.4} over {halvings} halvings"),
        );
    }
    if eps_fits.len() >= 2 {
        let mut worst: f64 = 0.0;
        for a in 0..eps_fits.len() {
            for b in a + 1..eps_fits.len() {
                let (fa, fb) = (eps_fits[a].1, eps_fits[b].1);
                let bar = 2.0 * (fa.stderr.powi(2) + fb.stderr.powi(2)).sqrt();
                worst = worst.max((fa.slope - fb.slope).abs() / bar.max(f64::MIN_POSITIVE));
            }
        }
        rec.trend(
            "eps-slope independent of y1",
            worst <= 1.0,
            format!("largest slope gap is {worst:.3} combined 2σ error bars"),
        );
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pam_slopes_on_a_short_ladder() {
        let cfg = ProfileSlopes { eps_ladder: vec![0.125, 0.0625, 0.03125], y1: vec![0.5, 1.0], ..Default::default() };
        let rec = run_profile_slopes(&cfg).unwrap();
        let f = rec.find_fit("eps-slope/y1=1").unwrap();
        assert!((f.slope * 8.0 * PI - 1.0).abs() < 0.05, "{f:?}");
        assert_eq!(rec.runs.len(), 6);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = ProfileSlopes { eps_ladder: vec![0.1, 0.2], ..Default::default() };
        assert!(run_profile_slopes(&cfg).is_err());
        let cfg = ProfileSlopes { y1: vec![2.0], ..Default::default() };
        assert!(run_profile_slopes(&cfg).is_err());
    }
}
