//! Renormalisation constants: bulk tree constants, boundary profiles and
//! masses, the heat-kernel overlap `𝒥`, the Robin correction `𝒥⁰_a(1)` and
//! the `c_ε` schedule.
//!
//! Every value here is a deterministic quadrature. Functions that can be
//! refined return an [`Estimate`] carrying the change under refinement.

mod bulk;
mod closed;
mod pam;
mod phi4;
pub mod spectral;

use serde::{Deserialize, Serialize};

pub use bulk::{phi4_graph, 
    bulk_constant_pam, bulk_constant_phi4, ell_pam_2a, ell_pam_2a_fourier, ell_pam_2a_leading, ell_phi_2, ell_phi_2_leading,
    graph_log_constant, graph_log_slope, Convention, TreeId,
};
pub use closed::{
    c_epsilon, c_epsilon_with, check_k, choose_k, erfc_identity_lhs, f_of_c, i0_heat, i0_heat_closed, j0_interp,
    j0_of_a, j0_of_a_tensor, scrj_closed, scrj_closed_variant, scrj_quadrature, CSchedule, Target,
};
pub use pam::{
    a_rho_estimate, pam_boundary_mass, pam_mass_scaled, pam_odd_part, pam_profile_i, pam_profile_i0, ARho,
};
pub use phi4::{phi4_boundary_mass, phi4_mass_scaled, phi4_profile_i};

use crate::noise::Profile;
use crate::{Error, Result};

/// A quadrature value and the change observed under refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub refinement_delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl Estimate {
    pub fn new(value: f64, refinement_delta: f64) -> Self {
        Estimate { value, refinement_delta, warning: None }
    }

    /// Fail when the refinement moved the value by more than `rel` (relative
    /// to `max(|value|, floor)`).
    pub fn checked(self, what: &str, rel: f64, floor: f64) -> Result<Self> {
        if self.refinement_delta > rel * self.value.abs().max(floor) || !self.value.is_finite() {
            return Err(Error::NonConvergence { what: what.to_string(), delta: self.refinement_delta });
        }
        Ok(self)
    }
}

/// One rung of a [`RenormLedger`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub eps: f64,
    pub ell_pam_2a: Estimate,
    pub ell_phi_2: Estimate,
    /// `(tree, value)` under the ledger's convention.
    pub graph_constants: Vec<(TreeId, Estimate)>,
    /// `(y₁, m_ε(y₁))`.
    pub pam_mass: Vec<(f64, Estimate)>,
    /// `(y₁, value)` for the Neumann Φ⁴ boundary mass.
    pub phi4_mass: Vec<(f64, Estimate)>,
    pub b_eps: f64,
    pub c_eps: Option<f64>,
    pub d_eps: Option<f64>,
}

/// Quadrature settings recorded with a ledger.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub profile: Profile,
    pub convention: Convention,
    pub refinement_tolerance: f64,
    pub kernel_cutoff: (f64, f64),
}

/// All constants along one ε ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenormLedger {
    pub entries: Vec<LedgerEntry>,
    pub a_rho: ARho,
    pub k: Option<f64>,
    /// Why the `c_ε` schedule is absent, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_error: Option<String>,
    pub provenance: Provenance,
}

/// Options for [`RenormLedger::build`].
#[derive(Debug, Clone)]
pub struct LedgerOptions {
    pub profile: Profile,
    pub convention: Convention,
    pub y1: Vec<f64>,
    pub b_eps: Vec<f64>,
    pub target: Target,
    /// Skip the space-time Fourier masses, which dominate the run time.
    pub skip_phi4_mass: bool,
}

impl Default for LedgerOptions {
    fn default() -> Self {
        LedgerOptions {
            profile: Profile::StandardBump,
            convention: Convention::Raw,
            y1: vec![0.5],
            b_eps: Vec::new(),
            target: Target::Finite(0.0),
            skip_phi4_mass: false,
        }
    }
}

impl RenormLedger {
    pub fn build(eps: &[f64], opts: &LedgerOptions) -> Result<Self> {
        if eps.is_empty() || eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::config("ε ladder must be non-empty and strictly decreasing"));
        }
        let b_eps = if opts.b_eps.is_empty() { vec![0.0; eps.len()] } else { opts.b_eps.clone() };
        let (schedule, schedule_error) = match c_epsilon(eps, &b_eps, opts.target, None) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let mut entries = Vec::with_capacity(eps.len());
        for (i, &e) in eps.iter().enumerate() {
            let trees = [TreeId::Pam4a, TreeId::Pam4b, TreeId::Phi4]
                .into_iter()
                .map(|t| graph_log_constant(t, e, opts.profile, opts.convention).map(|v| (t, v)))
                .collect::<Result<Vec<_>>>()?;
            let mut pam_mass = Vec::new();
            let mut phi4_mass = Vec::new();
            for &y in &opts.y1 {
                pam_mass.push((y, pam_boundary_mass(e, y, opts.profile)?));
                if !opts.skip_phi4_mass {
                    phi4_mass.push((y, phi4_boundary_mass(e, y, opts.profile, None)?));
                }
            }
            entries.push(LedgerEntry {
                eps: e,
                ell_pam_2a: ell_pam_2a(e, opts.profile)?,
                ell_phi_2: ell_phi_2(e, opts.profile)?,
                graph_constants: trees,
                pam_mass,
                phi4_mass,
                b_eps: b_eps[i],
                c_eps: schedule.as_ref().map(|s| s.c_eps[i]),
                d_eps: schedule.as_ref().map(|s| s.d_eps[i]),
            });
        }
        let ledger = RenormLedger {
            entries,
            a_rho: a_rho_estimate(opts.profile)?,
            k: schedule.as_ref().map(|s| s.k),
            schedule_error,
            provenance: Provenance {
                profile: opts.profile,
                convention: opts.convention,
                refinement_tolerance: 1e-3,
                kernel_cutoff: (0.5, 1.0),
            },
        };
        ledger.validate()?;
        Ok(ledger)
    }

    /// Check the ladder invariants.
    pub fn validate(&self) -> Result<()> {
        let e = &self.entries;
        if e.windows(2).any(|w| !(w[1].eps < w[0].eps)) {
            return Err(Error::Degenerate("ε ladder not strictly decreasing".into()));
        }
        if e.iter().any(|x| !(x.ell_pam_2a.value > 0.0)) {
            return Err(Error::Degenerate("ℓ(PAM-2a) not positive".into()));
        }
        if e.windows(2).any(|w| !(w[1].ell_pam_2a.value > w[0].ell_pam_2a.value)) {
            return Err(Error::Degenerate("ℓ(PAM-2a) not increasing as ε decreases".into()));
        }
        if e.iter().any(|x| x.c_eps.is_some_and(|c| !c.is_finite())) {
            return Err(Error::Degenerate("c_ε not finite".into()));
        }
        Ok(())
    }
}
