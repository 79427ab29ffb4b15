//! File emission: CSV builders for every artifact, plus the run manifest
//! that records the command, the resolved parameters, and a SHA-256 digest
//! of each file written.
//!
//! Floats are written with Rust's shortest-roundtrip `Display`, so parsing a
//! CSV field back with `str::parse::<f64>()` recovers the exact in-memory
//! value, and re-serialising reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use rydtc_core::lindblad::DissipativeRun;
use rydtc_core::observables::{Spectrum, Trajectory};
use rydtc_core::params::ModelParams;
use rydtc_core::sweep::{NcPoint, PhaseCell};

use crate::error::CliError;

/// What `run_manifest.json` looks like on disk.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    pub started_utc: String,
    pub finished_utc: String,
    /// file name → SHA-256 hex digest of its bytes
    pub outputs: BTreeMap<String, String>,
}

/// Collects artifacts for one run and finishes with the manifest. The
/// manifest itself carries the timestamps, so the data files stay
/// byte-identical across reruns of the same configuration.
pub struct Emitter {
    outdir: PathBuf,
    outputs: BTreeMap<String, String>,
    started: String,
}

impl Emitter {
    pub fn new(outdir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(outdir).map_err(|e| {
            CliError::config(format!("cannot create {}: {e}", outdir.display()))
        })?;
        Ok(Emitter {
            outdir: outdir.to_path_buf(),
            outputs: BTreeMap::new(),
            started: Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
        })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let bytes = contents.as_ref();
        let path = self.outdir.join(name);
        std::fs::write(&path, bytes)?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        println!("wrote {}", path.display());
        Ok(())
    }

    pub fn finish(
        self,
        command: &str,
        params: serde_json::Value,
        seed: Option<u64>,
    ) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_utc: self.started,
            finished_utc: Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
            outputs: self.outputs,
        };
        let path = self.outdir.join("run_manifest.json");
        let mut body = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| CliError::numeric(format!("manifest serialisation: {e}")))?;
        body.push(b'\n');
        std::fs::write(&path, body)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Cycle-indexed trajectory. Row n = 0 is the initial state, whose order
/// parameter is −1 by definition.
pub fn trajectory_csv(traj: &Trajectory, with_norms: bool) -> String {
    let mut out = String::from(if with_norms {
        "n,P,Q,state_norm\n"
    } else {
        "n,P,Q\n"
    });
    for n in 0..=traj.n_f {
        let p = traj.p[n];
        let q = if n == 0 { -1 } else { traj.q[n - 1] };
        if with_norms {
            out.push_str(&format!("{n},{p},{q},{norm}\n", norm = traj.norms[n]));
        } else {
            out.push_str(&format!("{n},{p},{q}\n"));
        }
    }
    out
}

/// Spectrum rows carry the complex amplitude and magnitude; the top peaks
/// are flagged in a rank column (1 = strongest) so column tools can find
/// them without re-sorting.
pub fn spectrum_csv(spectrum: &Spectrum, top: usize) -> String {
    let peaks = spectrum.top_peaks(top);
    let mut rank_by_index: BTreeMap<usize, usize> = BTreeMap::new();
    for (rank, (nu, _)) in peaks.iter().enumerate() {
        if let Some(idx) = spectrum.nu.iter().position(|x| x == nu) {
            rank_by_index.insert(idx, rank + 1);
        }
    }
    let mut out = String::from("nu,re,im,abs,peak_rank\n");
    for (idx, nu) in spectrum.nu.iter().enumerate() {
        let z = spectrum.values[idx];
        let rank = rank_by_index
            .get(&idx)
            .map(|r| r.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{nu},{re},{im},{abs},{rank}\n",
            re = z.re,
            im = z.im,
            abs = spectrum.magnitude[idx],
        ));
    }
    out
}

/// One row per sweep point, sorted by the detuning that generated it. Wall
/// times are only filled in when explicitly requested so that rerunning the
/// same configuration reproduces the file byte for byte; the error column
/// records per-point failures without aborting the sweep.
pub fn scan_csv(points: &[NcPoint], with_timings: bool) -> String {
    let mut out =
        String::from("variant,sites,eps,delta,v,t1,t2,boundary,n_c,censored,wall_time_ms,error\n");
    for pt in points {
        let p = &pt.params;
        let wall = if with_timings {
            pt.wall_ms.to_string()
        } else {
            String::new()
        };
        let error = pt.error.as_deref().unwrap_or("");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            p.variant,
            p.sites,
            p.epsilon,
            p.delta,
            p.v,
            p.t1,
            p.t2,
            p.boundary,
            pt.n_c,
            pt.censored,
            wall,
            error,
        ));
    }
    out
}

/// Phase-diagram cells: δn_c between consecutive sizes plus its sign class.
/// The censored column marks cells whose underlying n_c hit the cycle
/// budget, so their δn_c is a lower-bound artefact rather than a
/// measurement.
pub fn phase_csv(cells: &[PhaseCell]) -> String {
    let mut out = String::from("L,eps,delta_n_c,censored,class\n");
    for cell in cells {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            cell.l, cell.epsilon, cell.delta_n_c, cell.censored, cell.class,
        ));
    }
    out
}

/// Dissipative trajectory: imbalance, its sign, and the trace of the
/// density matrix (unit up to integrator round-off).
pub fn decay_csv(run: &DissipativeRun) -> String {
    let traj = &run.trajectory;
    let mut out = String::from("n,P,Q,trace\n");
    for n in 0..=traj.n_f {
        let q = if n == 0 { -1 } else { traj.q[n - 1] };
        out.push_str(&format!(
            "{n},{p},{q},{trace}\n",
            p = traj.p[n],
            trace = traj.norms[n]
        ));
    }
    out
}

/// The resolved model parameters plus command-specific extras, as the
/// manifest's `params` object.
pub fn manifest_params(
    params: &ModelParams,
    extras: &[(&str, serde_json::Value)],
) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert(
        "model".to_string(),
        serde_json::to_value(params).expect("model parameters serialise"),
    );
    for (key, value) in extras {
        map.insert((*key).to_string(), value.clone());
    }
    serde_json::Value::Object(map)
}
