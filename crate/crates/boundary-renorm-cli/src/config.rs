//! The TOML run configuration.
//!
//! Every section is optional and every key has a default; unknown keys are
//! rejected. The top-level `seed` is copied into every stochastic section,
//! and command-line flags override the file.

use std::path::{Path, PathBuf};

use boundary_renorm::experiments::{
    parse_eps_ladder, Equation, PamBc, PamConvergence, Phi4Bc, Phi4Ladder, TraceContinuity,
};
use boundary_renorm::noise::Profile;
use boundary_renorm::norms::BoundarySet;
use boundary_renorm::renorm::{Convention, Target};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub out: PathBuf,
    pub closed_forms: ClosedForms,
    pub kernel: KernelCheck,
    pub renorm_profile: RenormProfile,
    pub constants: Constants,
    pub pam: PamConvergence,
    pub phi4: Phi4Ladder,
    pub solve_phi4: SolvePhi4,
    pub triviality: Triviality,
    pub trace: TraceContinuity,
    pub norms: Norms,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            out: PathBuf::from("out"),
            closed_forms: ClosedForms::default(),
            kernel: KernelCheck::default(),
            renorm_profile: RenormProfile::default(),
            constants: Constants::default(),
            pam: PamConvergence::default(),
            phi4: Phi4Ladder::default(),
            solve_phi4: SolvePhi4::default(),
            triviality: Triviality::default(),
            trace: TraceContinuity::default(),
            norms: Norms::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosedForms {
    /// Robin parameters tabulated in `cJ.csv`.
    pub a_values: Vec<f64>,
}

impl Default for ClosedForms {
    fn default() -> Self {
        ClosedForms { a_values: vec![1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 3.0, 10.0, 30.0, 100.0, 1000.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelCheck {
    /// Robin parameters of the probe table; `inf` is Dirichlet.
    pub a_values: Vec<Target>,
    pub orders: Vec<usize>,
}

impl Default for KernelCheck {
    fn default() -> Self {
        KernelCheck { a_values: vec![Target::Finite(1.0), Target::Finite(8.0), Target::Infinite], orders: vec![1, 3] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenormProfile {
    pub equation: Equation,
    pub eps_ladder: Vec<f64>,
    pub y1: Vec<f64>,
    /// Distances of the profile table.
    pub s: Vec<f64>,
    pub profile: Profile,
}

impl Default for RenormProfile {
    fn default() -> Self {
        RenormProfile {
            equation: Equation::Pam,
            eps_ladder: vec![0.0625, 0.03125, 0.015625, 0.0078125],
            y1: vec![0.25, 0.5, 1.0],
            s: vec![0.25, 0.5, 1.0],
            profile: Profile::StandardBump,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    pub eps_ladder: Vec<f64>,
    pub y1: Vec<f64>,
    pub convention: Convention,
    /// Target of the `c_ε` schedule (with `b_ε ≡ 0`).
    pub b: Target,
    /// Include the space-time Neumann Φ⁴ masses.
    pub phi4_mass: bool,
    pub profile: Profile,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            eps_ladder: vec![0.25, 0.125, 0.0625, 0.03125],
            y1: vec![0.5],
            convention: Convention::Raw,
            b: Target::Finite(0.0),
            phi4_mass: true,
            profile: Profile::StandardBump,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolvePhi4 {
    pub bc: Phi4Bc,
    pub b: Target,
}

impl Default for SolvePhi4 {
    fn default() -> Self {
        SolvePhi4 { bc: Phi4Bc::Dirichlet, b: Target::Finite(0.0) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Triviality {
    pub b: Target,
}

impl Default for Triviality {
    fn default() -> Self {
        Triviality { b: Target::Finite(0.0) }
    }
}

/// Field whose weighted Hölder seminorm is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormSource {
    /// `|x|_P^γ` with `γ = power`.
    PowerLaw,
    /// The stationary linear solution with Robin parameter `a`.
    Psi,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Norms {
    pub source: NormSource,
    pub n: usize,
    pub alpha: f64,
    pub eta: f64,
    pub set: BoundarySet,
    pub power: f64,
    pub eps: f64,
    pub a: f64,
    pub scales_kmin: u32,
    pub scales_kmax: u32,
    /// Distances to `P` of the sample points.
    pub levels: Vec<f64>,
    pub per_level: usize,
    pub profile: Profile,
}

impl Default for Norms {
    fn default() -> Self {
        Norms {
            source: NormSource::PowerLaw,
            n: 32,
            alpha: -0.5,
            eta: -0.5,
            set: BoundarySet::Faces,
            power: -0.5,
            eps: 0.125,
            a: 1.0,
            scales_kmin: 2,
            scales_kmax: 4,
            levels: vec![0.75, 0.5, 0.375],
            per_level: 8,
            profile: Profile::StandardBump,
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub eps_ladder: Option<String>,
    pub bc: Option<String>,
    pub b: Option<String>,
    pub profile: Option<String>,
    pub equation: Option<String>,
}

impl Config {
    /// Parse a TOML document; errors carry the line and field.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {}", origin.display(), e.to_string().trim_end())))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Config::from_toml(&text, p)
            }
        }
    }

    /// Apply flags. `--eps-ladder`, `--bc` and `--b` go to the section of
    /// `command`; `--profile` and the seed go everywhere.
    pub fn apply(&mut self, o: &Overrides, command: &str) -> Result<(), CliError> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        self.pam.seed = self.seed;
        self.phi4.seed = self.seed;
        self.trace.seed = self.seed;
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(p) = &o.profile {
            let p: Profile = p.parse()?;
            self.renorm_profile.profile = p;
            self.constants.profile = p;
            self.pam.profile = p;
            self.phi4.profile = p;
            self.trace.profile = p;
            self.norms.profile = p;
        }
        if let Some(e) = &o.equation {
            self.renorm_profile.equation = e.parse()?;
        }
        if let Some(spec) = &o.eps_ladder {
            let ladder = parse_eps_ladder(spec)?;
            match command {
                "renorm-profile" => self.renorm_profile.eps_ladder = ladder,
                "constants" => self.constants.eps_ladder = ladder,
                "solve-pam" => self.pam.eps_ladder = ladder,
                "solve-phi4" | "triviality" => self.phi4.eps_ladder = ladder,
                "trace" => self.trace.eps_ladder = ladder,
                _ => return Err(CliError::Config(format!("--eps-ladder has no effect on {command}"))),
            }
        }
        if let Some(bc) = &o.bc {
            match command {
                "solve-pam" => self.pam.bc = bc.parse::<PamBc>()?,
                "solve-phi4" => self.solve_phi4.bc = bc.parse::<Phi4Bc>()?,
                _ => return Err(CliError::Config(format!("--bc has no effect on {command}"))),
            }
        }
        if let Some(b) = &o.b {
            let b: Target = b.parse()?;
            match command {
                "solve-phi4" => self.solve_phi4.b = b,
                "triviality" => self.triviality.b = b,
                "constants" => self.constants.b = b,
                _ => return Err(CliError::Config(format!("--b has no effect on {command}"))),
            }
        }
        Ok(())
    }
}
