//! Report types and serialization: pinned CSV schemas, JSON mirroring the
//! full report, and atomic file writes.
//!
//! The rows file is a pure function of (config, master_seed) — no
//! timestamps — so re-runs are byte-comparable. The manifest inside the
//! JSON report carries the timestamp.

use crate::config::{Command, Format, ResolvedConfig};
use crate::error::{io_err, CliError};
use lcsfluct_core::estimate::{EventFrequencies, LevelStat, MeanCurvePoint, VarianceEstimate};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Provenance block: everything needed to reproduce the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: Command,
    pub tool_version: String,
    /// RFC 3339 UTC; informational only, never part of the rows file.
    pub timestamp: String,
    pub master_seed: u64,
    /// Full echo of the resolved configuration.
    pub config: ResolvedConfig,
}

/// One q=0 curve point for a specific alphabet, used by `gamma-star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaStarRow {
    pub k: usize,
    pub n: usize,
    pub reps: usize,
    pub gamma_hat: f64,
    pub stderr: f64,
}

/// One length-scale entry of a bias scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub d: usize,
    pub reps: usize,
    pub inner_reps: usize,
    pub mean_delta: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bias_rate: f64,
    pub rejections: usize,
}

/// One selftest check outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestRow {
    pub check: String,
    pub passed: bool,
}

/// Per-point results, one variant per command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "points", rename_all = "kebab-case")]
pub enum Rows {
    GammaCurve(Vec<MeanCurvePoint>),
    GammaStar(Vec<GammaStarRow>),
    VarianceScan(Vec<VarianceEstimate>),
    BiasScan(Vec<BiasRow>),
    Events(Vec<EventFrequencies>),
    CouplingPath(Vec<LevelStat>),
    Selftest(Vec<SelftestRow>),
}

/// Fitted limit for one alphabet size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarFitSummary {
    pub k: usize,
    pub gamma_star_hat: f64,
    pub gamma_star_stderr: f64,
    pub rate_coeff: f64,
}

/// Derived quantities, one variant per command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Summary {
    GammaCurve {
        gamma_star_hat: f64,
        gamma_star_stderr: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        gamma_e: Option<f64>,
        /// Asymmetry solving the target level, when `gamma_e` was given.
        #[serde(skip_serializing_if = "Option::is_none")]
        solved_q: Option<f64>,
    },
    GammaStar {
        fits: Vec<StarFitSummary>,
    },
    VarianceScan {
        slope: f64,
        intercept: f64,
        slope_stderr: f64,
    },
    BiasScan {
        /// (d, bias_rate) pairs in grid order.
        rates: Vec<(usize, f64)>,
    },
    Events {
        /// Closed-form lower envelope exp(−m·p²/2) on the run-count event.
        envelope: f64,
    },
    CouplingPath {
        drop_mean: f64,
        drop_stderr: f64,
        variance_floor: f64,
        increments: Vec<f64>,
    },
    Selftest {
        passed: usize,
        failed: usize,
    },
}

/// The complete result of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub manifest: Manifest,
    pub rows: Rows,
    pub summary: Summary,
}

/// Floats in CSV carry 10 significant digits (scientific notation).
fn f(v: f64) -> String {
    format!("{v:.9e}")
}

/// RFC-4180 field escaping for free text.
fn text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Rows {
    /// Pinned header for each command's rows file.
    pub fn csv_header(&self) -> &'static str {
        match self {
            Rows::GammaCurve(_) => "q,n,reps,gamma_hat,stderr",
            Rows::GammaStar(_) => "k,n,reps,gamma_hat,stderr",
            Rows::VarianceScan(_) => "n,reps,var_hat,stderr",
            Rows::BiasScan(_) => {
                "d,reps,inner_reps,mean_delta,ci_lo,ci_hi,bias_rate,rejections"
            }
            Rows::Events(_) => {
                "reps,eps,q,freq_enough_blocks,exact_tail,freq_optima_typical,freq_gain_at_opt,bias_rate"
            }
            Rows::CouplingPath(_) => "level,mean,stderr",
            Rows::Selftest(_) => "check,passed",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Rows::GammaCurve(v) => v.len(),
            Rows::GammaStar(v) => v.len(),
            Rows::VarianceScan(v) => v.len(),
            Rows::BiasScan(v) => v.len(),
            Rows::Events(v) => v.len(),
            Rows::CouplingPath(v) => v.len(),
            Rows::Selftest(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// RFC-4180-style CSV: CRLF line endings, mandatory header row,
    /// header-only output when there are no rows.
    pub fn to_csv(&self) -> String {
        let mut lines: Vec<String> = vec![self.csv_header().to_string()];
        match self {
            Rows::GammaCurve(v) => lines.extend(v.iter().map(|r| {
                format!("{},{},{},{},{}", f(r.q), r.n, r.reps, f(r.gamma_hat), f(r.stderr))
            })),
            Rows::GammaStar(v) => lines.extend(v.iter().map(|r| {
                format!("{},{},{},{},{}", r.k, r.n, r.reps, f(r.gamma_hat), f(r.stderr))
            })),
            Rows::VarianceScan(v) => lines.extend(
                v.iter()
                    .map(|r| format!("{},{},{},{}", r.n, r.reps, f(r.var_hat), f(r.stderr))),
            ),
            Rows::BiasScan(v) => lines.extend(v.iter().map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    r.d,
                    r.reps,
                    r.inner_reps,
                    f(r.mean_delta),
                    f(r.ci_lo),
                    f(r.ci_hi),
                    f(r.bias_rate),
                    r.rejections
                )
            })),
            Rows::Events(v) => lines.extend(v.iter().map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    r.reps,
                    f(r.eps),
                    f(r.q),
                    f(r.freq_enough_blocks),
                    f(r.exact_tail),
                    f(r.freq_optima_typical),
                    f(r.freq_gain_at_opt),
                    f(r.bias_rate)
                )
            })),
            Rows::CouplingPath(v) => lines.extend(
                v.iter()
                    .map(|r| format!("{},{},{}", r.level, f(r.mean), f(r.stderr))),
            ),
            Rows::Selftest(v) => lines.extend(
                v.iter()
                    .map(|r| format!("{},{}", text(&r.check), r.passed)),
            ),
        }
        let mut out = lines.join("\r\n");
        out.push_str("\r\n");
        out
    }
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes `bytes` to `path` atomically: temp file in the same directory,
/// flush, then rename. A crash never leaves a partial file at `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .ok_or_else(|| io_err(format!("no parent directory for {}", path.display())))?;
    std::fs::create_dir_all(dir)
        .map_err(|e| io_err(format!("cannot create output dir {}: {e}", dir.display())))?;
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| io_err(format!("bad output file name {}", path.display())))?;
    let tmp = dir.join(format!(".{file_name}.tmp-{}", std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut fh = std::fs::File::create(&tmp)?;
        fh.write_all(bytes)?;
        fh.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(|e| io_err(format!("cannot write {}: {e}", path.display())))
}

/// Writes the requested artifact set. SVG is only produced for the commands
/// that define a plot (mean curve, variance log-log scan, coupling path);
/// for the others the svg request is a no-op.
pub fn emit_report(
    report: &ExperimentReport,
    formats: &[Format],
    paths: &crate::config::ArtifactPaths,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    let mut written = Vec::new();
    for fmt in formats {
        match fmt {
            Format::Csv => {
                write_atomic(&paths.rows_csv, report.rows.to_csv().as_bytes())?;
                written.push(paths.rows_csv.clone());
            }
            Format::Json => {
                write_atomic(&paths.report_json, report.to_json().as_bytes())?;
                written.push(paths.report_json.clone());
            }
            Format::Svg => {
                if let Some(svg) = crate::plot::render(report) {
                    write_atomic(&paths.plot_svg, svg.as_bytes())?;
                    written.push(paths.plot_svg.clone());
                }
            }
        }
    }
    Ok(written)
}
