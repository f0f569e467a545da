//! Experiment configuration: JSON file schema, per-command defaults, CLI
//! flag overrides, and resolution into validated core parameters.

use crate::error::{usage, CliError};
use lcsfluct_core::model::ModelParams;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Environment variable consulted for the default output directory.
/// Flags and the config file always win over it.
pub const OUT_DIR_ENV: &str = "LCSFLUCT_OUT";
const OUT_DIR_FALLBACK: &str = "lcsfluct-out";

/// The experiment families the runner knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GammaCurve,
    GammaStar,
    VarianceScan,
    BiasScan,
    Events,
    CouplingPath,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::GammaCurve,
        Command::GammaStar,
        Command::VarianceScan,
        Command::BiasScan,
        Command::Events,
        Command::CouplingPath,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::GammaCurve => "gamma-curve",
            Command::GammaStar => "gamma-star",
            Command::VarianceScan => "variance-scan",
            Command::BiasScan => "bias-scan",
            Command::Events => "events",
            Command::CouplingPath => "coupling-path",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

/// Output formats for `--emit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unsupported format '{other}' (expected csv, json, or svg)")),
        }
    }
}

/// Plain-number mirror of the core model parameters, used in config files
/// and manifests (core parameters only exist in validated form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub k: usize,
    pub d: usize,
    pub beta: f64,
    pub p: f64,
    pub m: usize,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(self.k, self.d, self.beta, self.p, self.m).map_err(CliError::from)
    }

    /// Same parameters with a different window count.
    pub fn with_m(&self, m: usize) -> ModelSpec {
        ModelSpec { m, ..*self }
    }

    /// Same parameters with a different half-stretch length.
    pub fn with_d(&self, d: usize) -> ModelSpec {
        ModelSpec { d, ..*self }
    }
}

/// Equal-length iid pair spec for variance scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IidSpec {
    pub k: usize,
}

/// Raw config file contents; every field optional so partial files merge
/// with per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// When present, must match the CLI subcommand.
    pub command: Option<Command>,
    pub master_seed: Option<u64>,
    pub reps: Option<usize>,
    pub inner_reps: Option<usize>,
    pub threads: Option<usize>,
    pub emit: Option<Vec<Format>>,
    pub output_dir: Option<String>,
    /// Alphabet size for iid-pair experiments.
    pub k: Option<usize>,
    /// Length scale for iid-pair experiments.
    pub n: Option<usize>,
    pub q_grid: Option<Vec<f64>>,
    pub n_grid: Option<Vec<usize>>,
    pub d_grid: Option<Vec<usize>>,
    pub k_grid: Option<Vec<usize>>,
    pub model: Option<ModelSpec>,
    pub iid: Option<IidSpec>,
    /// Band asymmetry ratio for `events`.
    #[serde(alias = "q_e")]
    pub q: Option<f64>,
    pub eps: Option<f64>,
    /// Target mean level for the `gamma-curve` asymmetry solve.
    pub gamma_e: Option<f64>,
}

/// Flag overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<String>,
    pub threads: Option<usize>,
    pub emit: Option<Vec<Format>>,
}

/// Fully resolved configuration: what the runner executes and what the
/// manifest echoes. A report re-parsed from JSON compares equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub command: Command,
    pub master_seed: u64,
    pub reps: usize,
    pub inner_reps: usize,
    /// 0 means "library default pool size".
    pub threads: usize,
    pub emit: Vec<Format>,
    pub output_dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iid: Option<IidSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_e: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| usage(format!("config file {} is not valid: {e}", path.display())))
    }
}

fn default_q_grid() -> Vec<f64> {
    // -0.6 ..= 0.6 in steps of 0.1, exactly symmetric
    (-6..=6).map(|i| i as f64 / 10.0).collect()
}

fn default_model(command: Command) -> ModelSpec {
    match command {
        // variance scans resize m per grid length; d=16 keeps runs long
        Command::VarianceScan => ModelSpec { k: 2, d: 16, beta: 0.75, p: 0.5, m: 16 },
        // bias scans sweep d; m fixed at 16
        Command::BiasScan => ModelSpec { k: 2, d: 64, beta: 0.75, p: 0.5, m: 16 },
        // events need the partition DPs per replicate, so a moderate n
        Command::Events => ModelSpec { k: 2, d: 8, beta: 0.75, p: 0.5, m: 16 },
        Command::CouplingPath => ModelSpec { k: 2, d: 64, beta: 0.75, p: 0.5, m: 16 },
        _ => ModelSpec { k: 2, d: 16, beta: 0.75, p: 0.5, m: 16 },
    }
}

/// Merges defaults, the config file, and flag overrides into a runnable
/// configuration. Precedence: flags > file > environment (output dir only)
/// > built-in defaults.
pub fn resolve(
    command: Command,
    file: Option<&ConfigFile>,
    overrides: &Overrides,
) -> Result<ResolvedConfig, CliError> {
    let empty = ConfigFile::default();
    let file = file.unwrap_or(&empty);
    if let Some(cfg_cmd) = file.command {
        if cfg_cmd != command {
            return Err(usage(format!(
                "config file is for '{cfg_cmd}' but the command line asked for '{command}'"
            )));
        }
    }

    let output_dir = overrides
        .out
        .clone()
        .or_else(|| file.output_dir.clone())
        .or_else(|| std::env::var(OUT_DIR_ENV).ok())
        .unwrap_or_else(|| OUT_DIR_FALLBACK.to_string());

    let default_reps = match command {
        Command::GammaCurve | Command::GammaStar | Command::BiasScan | Command::CouplingPath => 200,
        Command::VarianceScan => 2000,
        Command::Events => 300,
        Command::Selftest => 0,
    };

    let mut cfg = ResolvedConfig {
        command,
        master_seed: overrides.seed.or(file.master_seed).unwrap_or(1702),
        reps: overrides.reps.or(file.reps).unwrap_or(default_reps),
        inner_reps: file.inner_reps.unwrap_or(8),
        threads: overrides.threads.or(file.threads).unwrap_or(0),
        emit: overrides
            .emit
            .clone()
            .or_else(|| file.emit.clone())
            .unwrap_or_else(|| vec![Format::Csv, Format::Json]),
        output_dir,
        k: file.k,
        n: file.n,
        q_grid: file.q_grid.clone(),
        n_grid: file.n_grid.clone(),
        d_grid: file.d_grid.clone(),
        k_grid: file.k_grid.clone(),
        model: file.model,
        iid: file.iid,
        q: file.q,
        eps: file.eps,
        gamma_e: file.gamma_e,
    };

    match command {
        Command::GammaCurve => {
            cfg.k.get_or_insert(2);
            cfg.n.get_or_insert(2000);
            cfg.q_grid.get_or_insert_with(default_q_grid);
        }
        Command::GammaStar => {
            cfg.k_grid.get_or_insert_with(|| vec![2]);
            cfg.n_grid
                .get_or_insert_with(|| vec![1000, 2000, 5000, 10000]);
        }
        Command::VarianceScan => {
            if cfg.iid.is_none() {
                cfg.model.get_or_insert_with(|| default_model(command));
            }
            cfg.n_grid
                .get_or_insert_with(|| vec![512, 1024, 2048, 4096]);
        }
        Command::BiasScan => {
            cfg.model.get_or_insert_with(|| default_model(command));
            cfg.d_grid.get_or_insert_with(|| vec![16, 32, 64]);
        }
        Command::Events => {
            cfg.model.get_or_insert_with(|| default_model(command));
            cfg.q.get_or_insert(0.5);
            cfg.eps.get_or_insert(0.1);
        }
        Command::CouplingPath => {
            cfg.model.get_or_insert_with(|| default_model(command));
        }
        Command::Selftest => {}
    }
    validate(&cfg)?;
    Ok(cfg)
}

/// Structural checks that don't need the owning modules (those run their own
/// validation when the runner builds core objects).
fn validate(cfg: &ResolvedConfig) -> Result<(), CliError> {
    if cfg.emit.is_empty() {
        return Err(usage("emit list must name at least one format"));
    }
    if cfg.command != Command::Selftest && cfg.reps == 0 {
        return Err(usage("reps must be positive"));
    }
    if let Some(grid) = &cfg.n_grid {
        if grid.is_empty() {
            return Err(usage("n_grid must not be empty"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("n_grid must be strictly increasing"));
        }
    }
    if let Some(grid) = &cfg.d_grid {
        if grid.is_empty() {
            return Err(usage("d_grid must not be empty"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("d_grid must be strictly increasing"));
        }
    }
    if let Some(grid) = &cfg.k_grid {
        if grid.is_empty() {
            return Err(usage("k_grid must not be empty"));
        }
    }
    if cfg.command == Command::VarianceScan {
        if let (Some(model), Some(grid)) = (&cfg.model, &cfg.n_grid) {
            for &n in grid {
                if n % (2 * model.d) != 0 || n == 0 {
                    return Err(usage(format!(
                        "n_grid value {n} is not a positive multiple of 2d = {}",
                        2 * model.d
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Output file paths for one command under the resolved output directory.
pub fn artifact_paths(cfg: &ResolvedConfig) -> ArtifactPaths {
    let dir = PathBuf::from(&cfg.output_dir);
    let stem = cfg.command.name();
    ArtifactPaths {
        rows_csv: dir.join(format!("{stem}.rows.csv")),
        report_json: dir.join(format!("{stem}.report.json")),
        plot_svg: dir.join(format!("{stem}.svg")),
        dir,
    }
}

#[derive(Debug, Clone)]
pub struct ArtifactPaths {
    pub dir: PathBuf,
    pub rows_csv: PathBuf,
    pub report_json: PathBuf,
    pub plot_svg: PathBuf,
}
