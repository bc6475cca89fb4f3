use std::path::{Path, PathBuf};

use qglt_core::{BoundaryCondition, GridSpec, SearchConfig, SolverTolerances};
use serde::{Deserialize, Serialize};

use crate::args::{Common, FarBc, Format};
use crate::CliError;

pub const CONFIG_ENV: &str = "QGLT_CONFIG";

/// Contents of the TOML file named by `QGLT_CONFIG`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub edges: Option<usize>,
    pub potential: Option<PathBuf>,
    pub gamma: Option<f64>,
    pub h: Option<f64>,
    pub len: Option<f64>,
    pub far_bc: Option<FarBc>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub tol_eig: Option<f64>,
    pub tol_zero: Option<f64>,
    pub search: Option<SearchConfig>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn from_env() -> Result<Self, CliError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }
}

/// Resolved run parameters: flags, then config, then defaults.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub edges: Option<usize>,
    pub potential: Option<PathBuf>,
    pub gamma: f64,
    pub h: f64,
    pub len: f64,
    pub far_bc: FarBc,
    pub format: Format,
    pub jobs: usize,
    pub seed: u64,
    pub tol_eig: f64,
    pub tol_zero: f64,
    #[serde(skip)]
    pub search: SearchConfig,
}

impl Settings {
    pub fn resolve(flags: &Common, config: ConfigFile) -> Self {
        Self {
            edges: flags.edges.or(config.edges),
            potential: flags.potential.clone().or(config.potential),
            gamma: flags.gamma.or(config.gamma).unwrap_or(0.5),
            h: flags.h.or(config.h).unwrap_or(0.01),
            len: flags.len.or(config.len).unwrap_or(30.0),
            far_bc: flags.far_bc.or(config.far_bc).unwrap_or(FarBc::Dirichlet),
            format: flags.format.or(config.format).unwrap_or(Format::Json),
            jobs: flags.jobs.or(config.jobs).unwrap_or(0),
            seed: flags.seed.or(config.seed).unwrap_or(0),
            tol_eig: flags.tol_eig.or(config.tol_eig).unwrap_or(1e-10),
            tol_zero: flags.tol_zero.or(config.tol_zero).unwrap_or(1e-10),
            search: config.search.unwrap_or_default(),
        }
    }

    pub fn tolerances(&self) -> Result<SolverTolerances, CliError> {
        let tol = SolverTolerances { tol_eig: self.tol_eig, tol_zero: self.tol_zero };
        tol.validate().map_err(|e| CliError::Usage(format!("--tol-eig/--tol-zero: {e}")))?;
        Ok(tol)
    }

    pub fn far_bc(&self) -> BoundaryCondition {
        match self.far_bc {
            FarBc::Dirichlet => BoundaryCondition::Dirichlet,
            FarBc::Neumann => BoundaryCondition::Neumann,
        }
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::with_length(self.h, self.len, self.far_bc())
            .map_err(|e| CliError::Usage(format!("--h/--len: {e}")))
    }

    pub fn check_gamma(&self) -> Result<(), CliError> {
        if self.gamma >= 0.5 && self.gamma.is_finite() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("--gamma: {} is below 1/2", self.gamma)))
        }
    }
}
