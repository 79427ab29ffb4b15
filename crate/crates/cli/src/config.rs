//! Run configuration: JSON file and command-line flags merged into
//! [`ModelParams`], with explicit flags taking precedence over file values,
//! unit-suffixed frequency parsing, and the grid grammars used by the sweep
//! commands.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use rydtc_core::params::{Boundary, DriveVariant, ModelParams};

use crate::error::CliError;

/// Conversion factor for the `kHz` suffix. Kilohertz values are ordinary
/// (cyclic) frequencies, so they pick up a factor 2π on top of the 10⁻³
/// megahertz rescaling; `MHz` and `rad_us` values pass through unchanged
/// because the model works in rad·µs⁻¹ with the one-to-one megahertz
/// convention.
const KHZ_TO_RAD_PER_US: f64 = 2e-3 * std::f64::consts::PI;

/// Parse a frequency-like quantity with an optional unit suffix. Bare
/// numbers are taken as rad·µs⁻¹.
pub fn parse_frequency(raw: &str) -> Result<f64, String> {
    let trimmed = raw.trim();
    let (number, scale) = if let Some(stem) = trimmed.strip_suffix("MHz") {
        (stem, 1.0)
    } else if let Some(stem) = trimmed.strip_suffix("kHz") {
        (stem, KHZ_TO_RAD_PER_US)
    } else if let Some(stem) = trimmed.strip_suffix("rad_us") {
        (stem, 1.0)
    } else {
        (trimmed, 1.0)
    };
    number
        .trim()
        .parse::<f64>()
        .map(|value| value * scale)
        .map_err(|_| format!("cannot parse `{raw}` as a frequency"))
}

/// Decay rates refuse bare numbers: the kilohertz convention differs from
/// the megahertz one by a 2π, so silently guessing a unit would corrupt
/// every downstream fit.
pub fn parse_decay_rate(raw: &str) -> Result<f64, String> {
    let trimmed = raw.trim();
    if trimmed.ends_with("MHz") || trimmed.ends_with("kHz") || trimmed.ends_with("rad_us") {
        parse_frequency(trimmed)
    } else {
        Err(format!(
            "decay rate `{raw}` needs an explicit unit suffix (MHz, kHz, or rad_us)"
        ))
    }
}

/// Inclusive float grid `lo:hi:step`, or `lo:hi` with an implied step of 1.
/// Points are built as `lo + k·step` so repeated runs produce identical
/// grids, and the upper end is kept when it lands within a part-per-billion
/// of a grid point. Each point is then snapped to the decimal precision the
/// user wrote (`-0.2:0.2:0.1` yields 0.1, not 0.10000000000000003), which
/// keeps the grid key clean in every downstream CSV.
pub fn parse_grid(raw: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    let (lo, hi, step, decimals) = match parts.as_slice() {
        [a, b] => (parse_num(a)?, parse_num(b)?, 1.0, decimal_places(&[a, b])),
        [a, b, c] => (
            parse_num(a)?,
            parse_num(b)?,
            parse_num(c)?,
            decimal_places(&[a, b, c]),
        ),
        _ => return Err(format!("grid `{raw}` must look like lo:hi or lo:hi:step")),
    };
    if !step.is_finite() || step <= 0.0 {
        return Err(format!("grid `{raw}` needs a positive step"));
    }
    if hi < lo {
        return Err(format!("grid `{raw}` is empty: upper end below lower end"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| {
            let value = lo + step * k as f64;
            match decimals {
                Some(d) => format!("{value:.d$}").parse().unwrap_or(value),
                None => value,
            }
        })
        .collect())
}

/// Longest decimal tail among plainly written numbers, or `None` when any
/// of them uses scientific notation (then no snapping is safe).
fn decimal_places(parts: &[&str]) -> Option<usize> {
    let mut widest = 0;
    for part in parts {
        let trimmed = part.trim();
        if trimmed.contains(['e', 'E']) {
            return None;
        }
        if let Some(tail) = trimmed.split('.').nth(1) {
            widest = widest.max(tail.len());
        }
    }
    Some(widest.min(12))
}

/// Integer range `a:b`, inclusive and ascending. Used for chain sizes, where
/// consecutive values are required because the phase diagram differences
/// n_c between neighbouring sizes.
pub fn parse_size_range(raw: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    let (lo, hi) = match parts.as_slice() {
        [a, b] => (parse_int(a)?, parse_int(b)?),
        [a, b, c] if parse_int(c)? == 1 => (parse_int(a)?, parse_int(b)?),
        [_, _, _] => {
            return Err(format!(
                "size range `{raw}` must step by 1: the diagram differences consecutive sizes"
            ))
        }
        _ => return Err(format!("size range `{raw}` must look like a:b")),
    };
    if hi < lo {
        return Err(format!("size range `{raw}` is empty"));
    }
    Ok((lo..=hi).collect())
}

/// Half-open fit window `a:b` for the decay-rate fit.
pub fn parse_window(raw: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = raw.split(':').collect();
    match parts.as_slice() {
        [a, b] => {
            let (lo, hi) = (parse_int(a)?, parse_int(b)?);
            if hi <= lo {
                Err(format!("fit window `{raw}` is empty"))
            } else {
                Ok((lo, hi))
            }
        }
        _ => Err(format!("fit window `{raw}` must look like a:b")),
    }
}

fn parse_num(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("cannot parse `{s}` as a number"))
}

fn parse_int(s: &str) -> Result<usize, String> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| format!("cannot parse `{s}` as a non-negative integer"))
}

/// A frequency in a JSON config: either a bare number (rad·µs⁻¹) or a
/// string with a unit suffix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FreqSpec {
    Number(f64),
    WithUnit(String),
}

impl FreqSpec {
    fn resolve(&self) -> Result<f64, String> {
        match self {
            FreqSpec::Number(x) => Ok(*x),
            FreqSpec::WithUnit(s) => parse_frequency(s),
        }
    }
}

/// Everything a JSON config file may carry. Unknown keys are rejected so a
/// typo cannot silently fall back to a default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub variant: Option<DriveVariant>,
    pub sites: Option<usize>,
    pub eps: Option<FreqSpec>,
    pub delta: Option<FreqSpec>,
    pub v: Option<FreqSpec>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub boundary: Option<Boundary>,
    /// Decay rate as a suffixed string; bare numbers are rejected for the
    /// same reason as on the command line.
    pub gamma: Option<String>,
    pub nf: Option<usize>,
    pub mode: Option<String>,
    pub grid: Option<usize>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub draws: Option<usize>,
    pub delta_grid: Option<String>,
    pub eps_grid: Option<String>,
    pub l_range: Option<String>,
    pub fit_window: Option<String>,
    pub timings: Option<bool>,
    pub norms: Option<bool>,
    pub audit: Option<bool>,
    pub outdir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
    }
}

/// Model flags shared by every command that runs the physics. The same
/// fields may come from `--config`; explicit flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelFlags {
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Drive protocol: original, improved, or simplified
    #[arg(long)]
    pub variant: Option<DriveVariant>,

    /// Number of atoms
    #[arg(short = 'L', long = "sites", value_name = "N")]
    pub sites: Option<usize>,

    /// Rabi perturbation ε (suffixes: MHz, kHz, rad_us; bare = rad/µs)
    #[arg(long, allow_hyphen_values = true, value_name = "FREQ")]
    pub eps: Option<String>,

    /// Detuning Δ of the driven stage
    #[arg(long, allow_hyphen_values = true, value_name = "FREQ")]
    pub delta: Option<String>,

    /// Nearest-neighbour interaction V
    #[arg(long = "v", allow_hyphen_values = true, value_name = "FREQ")]
    pub v: Option<String>,

    /// Driven-stage duration in µs
    #[arg(long, allow_negative_numbers = true, value_name = "T")]
    pub t1: Option<f64>,

    /// Interaction-stage duration in µs
    #[arg(long, allow_negative_numbers = true, value_name = "T")]
    pub t2: Option<f64>,

    /// Topology: ring or open
    #[arg(long)]
    pub boundary: Option<Boundary>,

    /// Output directory (falls back to $RYDTC_OUT_DIR, then the current dir)
    #[arg(long, value_name = "DIR")]
    pub outdir: Option<PathBuf>,

    /// Worker threads for sweeps (falls back to $RYDTC_THREADS, then all cores)
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

/// Fully merged run configuration: physics parameters plus the context
/// (where to write, how wide to parallelise, and the file config for
/// command-specific extras).
pub struct Resolved {
    pub params: ModelParams,
    pub file: FileConfig,
    pub outdir: PathBuf,
    pub threads: Option<usize>,
}

/// Merge flags over file config over environment over defaults. The
/// returned parameters are *not* yet validated: commands that add fields
/// (e.g. a decay rate) finish the struct first and then validate.
pub fn resolve(flags: &ModelFlags) -> Result<Resolved, CliError> {
    let file = match &flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    let variant = flags
        .variant
        .or(file.variant)
        .unwrap_or(DriveVariant::Original);
    let sites = flags.sites.or(file.sites).unwrap_or(8);
    let mut params = ModelParams::new(variant, sites);

    params.epsilon = merge_freq(flags.eps.as_deref(), file.eps.as_ref(), params.epsilon)?;
    params.delta = merge_freq(flags.delta.as_deref(), file.delta.as_ref(), params.delta)?;
    params.v = merge_freq(flags.v.as_deref(), file.v.as_ref(), params.v)?;
    if let Some(t1) = flags.t1.or(file.t1) {
        params.t1 = t1;
    }
    if let Some(t2) = flags.t2.or(file.t2) {
        params.t2 = t2;
    }
    if let Some(boundary) = flags.boundary.or(file.boundary) {
        params.boundary = boundary;
    }

    let outdir = flags
        .outdir
        .clone()
        .or_else(|| file.outdir.clone())
        .or_else(|| std::env::var_os("RYDTC_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let threads = flags
        .threads
        .or(file.threads)
        .or_else(|| std::env::var("RYDTC_THREADS").ok()?.parse().ok());

    Ok(Resolved {
        params,
        file,
        outdir,
        threads,
    })
}

fn merge_freq(
    flag: Option<&str>,
    file: Option<&FreqSpec>,
    default: f64,
) -> Result<f64, CliError> {
    if let Some(raw) = flag {
        return parse_frequency(raw).map_err(CliError::config);
    }
    if let Some(spec) = file {
        return spec.resolve().map_err(CliError::config);
    }
    Ok(default)
}
