//! Run configuration: a flat JSON object plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use pefem_core::assembly::Method;
use pefem_core::geometry::CurvedDomain;
use pefem_core::problem::{ProblemData, CATALOG};
use pefem_core::solver::SolverKind;
use pefem_core::study::default_boundary_count;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Pefem,
    Baseline,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Pefem => vec![Method::PeFem],
            MethodChoice::Baseline => vec![Method::Baseline],
            MethodChoice::Both => vec![Method::PeFem, Method::Baseline],
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "pefem" => Some(MethodChoice::Pefem),
            "baseline" => Some(MethodChoice::Baseline),
            "both" => Some(MethodChoice::Both),
            _ => None,
        }
    }
}

/// Everything one invocation needs.
///
/// `out` is where files go, not what is computed, so it is left out of the
/// serialized form and therefore out of the configuration hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `name` or `name:p1,p2,...`, e.g. `ellipse:1.5,1.0`.
    pub domain: String,
    pub degree: usize,
    /// Boundary vertices of the level-0 mesh; the domain default when absent.
    pub n_boundary: Option<usize>,
    /// First refinement level that is reported.
    pub start_level: usize,
    /// Number of consecutive levels, starting at `start_level`.
    pub levels: usize,
    pub problem: String,
    pub method: MethodChoice,
    /// `direct` or `iterative`.
    pub solver: String,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: "disk".into(),
            degree: 1,
            n_boundary: None,
            start_level: 0,
            levels: 4,
            problem: "exp_sin".into(),
            method: MethodChoice::Pefem,
            solver: "direct".into(),
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

/// Parses `name[:p1,p2,...]` into a catalog domain.
pub fn parse_domain(spec: &str) -> Result<CurvedDomain> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n, p),
        None => (spec, ""),
    };
    let params: Vec<f64> = params
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::usage(format!("domain `{spec}`: {e}")))?;
    CurvedDomain::from_name(name.trim(), &params).ok_or_else(|| {
        CliError::usage(format!(
            "unknown domain `{spec}` (expected disk[:r], ellipse[:a,b] or star[:amplitude[,lobes]])"
        ))
    })
}

/// What the subcommand requires of the level range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Mesh,
    Solve,
    Study,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn domain(&self) -> Result<CurvedDomain> {
        parse_domain(&self.domain)
    }

    pub fn n_boundary(&self, domain: &CurvedDomain) -> usize {
        self.n_boundary.unwrap_or_else(|| default_boundary_count(domain))
    }

    pub fn finest_level(&self) -> usize {
        self.start_level + self.levels.saturating_sub(1)
    }

    pub fn solver_kind(&self) -> Result<SolverKind> {
        SolverKind::from_name(&self.solver).ok_or_else(|| {
            CliError::usage(format!(
                "unknown solver `{}` (expected direct or iterative)",
                self.solver
            ))
        })
    }

    pub fn problem_data(&self) -> Result<ProblemData> {
        ProblemData::catalog(&self.problem, self.degree).ok_or_else(|| {
            CliError::usage(format!(
                "unknown problem `{}` (expected one of {})",
                self.problem,
                CATALOG.join(", ")
            ))
        })
    }

    /// Checks the invariants for `purpose` and resolves every name.
    pub fn validate(&self, purpose: Purpose) -> Result<()> {
        self.domain()?;
        if !(1..=3).contains(&self.degree) {
            return Err(CliError::usage(format!("degree {} is not 1, 2 or 3", self.degree)));
        }
        if self.levels == 0 {
            return Err(CliError::usage("at least one level is required"));
        }
        if purpose == Purpose::Study && self.levels < 3 {
            return Err(CliError::usage(format!(
                "{} levels requested; rate studies need at least 3",
                self.levels
            )));
        }
        if purpose != Purpose::Mesh {
            self.solver_kind()?;
            self.problem_data()?;
        }
        Ok(())
    }

    /// Canonical JSON form embedded in reports.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of [`Self::canonical_json`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
