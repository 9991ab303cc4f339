//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::commands::{cmd_convergence, cmd_lemma_check, cmd_mesh, cmd_solve, Outcome, SolveOptions};
use crate::config::{MethodChoice, RunConfig};
use crate::error::{CliError, ExitCode, Result};

#[derive(Debug, Parser)]
#[command(
    name = "pefem",
    version,
    about = "Polynomial-extension FEM for Neumann problems on curved domains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the mesh of every configured level and a geometry report.
    Mesh(Overrides),
    /// Solve on the finest configured level; write VTK and a solve report.
    Solve {
        #[command(flatten)]
        overrides: Overrides,
        /// Also export the operator and load as Matrix Market files.
        #[arg(long)]
        export_matrix: bool,
    },
    /// Measure errors and convergence orders over the configured levels.
    Convergence(Overrides),
    /// Check the Taylor-extension rates and stability bounds.
    LemmaCheck(Overrides),
}

/// Flags that override fields of the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON object with any of the fields below (snake_case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// disk[:r], ellipse[:a,b] or star[:amplitude[,lobes]].
    #[arg(long)]
    pub domain: Option<String>,
    /// Polynomial degree k (1, 2 or 3).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Number of refinement levels.
    #[arg(long)]
    pub levels: Option<usize>,
    /// First reported level.
    #[arg(long)]
    pub start_level: Option<usize>,
    /// Boundary vertices of the coarsest mesh.
    #[arg(long)]
    pub n_boundary: Option<usize>,
    /// constant, poly_k, exp_sin or trig.
    #[arg(long)]
    pub problem: Option<String>,
    /// pefem, baseline or both.
    #[arg(long)]
    pub method: Option<String>,
    /// direct or iterative.
    #[arg(long)]
    pub solver: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Overrides {
    /// The configuration file (or defaults) with every given flag applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.domain {
            c.domain = v.clone();
        }
        if let Some(v) = self.degree {
            c.degree = v;
        }
        if let Some(v) = self.levels {
            c.levels = v;
        }
        if let Some(v) = self.start_level {
            c.start_level = v;
        }
        if let Some(v) = self.n_boundary {
            c.n_boundary = Some(v);
        }
        if let Some(v) = &self.problem {
            c.problem = v.clone();
        }
        if let Some(v) = &self.method {
            c.method = MethodChoice::from_name(v)
                .ok_or_else(|| CliError::usage(format!("unknown method `{v}` (expected pefem, baseline or both)")))?;
        }
        if let Some(v) = &self.solver {
            c.solver = v.clone();
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        Ok(c)
    }
}

/// Runs one parsed command.
pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Mesh(o) => cmd_mesh(&o.resolve()?),
        Command::Solve {
            overrides,
            export_matrix,
        } => cmd_solve(
            &overrides.resolve()?,
            SolveOptions {
                export_matrix: *export_matrix,
            },
        ),
        Command::Convergence(o) => cmd_convergence(&o.resolve()?),
        Command::LemmaCheck(o) => cmd_lemma_check(&o.resolve()?),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::Usage as i32
            } else {
                ExitCode::Success as i32
            };
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.code != ExitCode::Success {
                eprintln!("verification criteria not met");
            }
            outcome.code as i32
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_) | CliError::Parse { .. }) {
                eprintln!("{}", Cli::command().render_usage());
            }
            e.exit_code() as i32
        }
    }
}
