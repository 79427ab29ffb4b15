//! One function per subcommand. Each resolves its configuration, runs the
//! physics, writes the artifacts through an [`Emitter`], and closes with the
//! run manifest.

use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use rydtc_core::basis::basis_state;
use rydtc_core::lindblad::{evolve_density, fit_decay, DensityState};
use rydtc_core::observables::Trajectory;
use rydtc_core::oracle;
use rydtc_core::params::{DriveVariant, ModelParams};
use rydtc_core::sweep::{phase_diagram, scan_detuning, symmetry_audit, DEFAULT_SWEEP_BUDGET};
use rydtc_core::{compile_cycle, evolve, fourier_spectrum, EvolveMode};

use crate::config::{self, ModelFlags};
use crate::error::CliError;
use crate::output::{self, Emitter};
use crate::svg;

/// Matching tolerance for the closed-form cross-check.
const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Number of drive cycles
    #[arg(long, value_name = "N")]
    pub nf: Option<usize>,
    /// Evolution mode: iterate or spectral
    #[arg(long)]
    pub mode: Option<String>,
    /// Add a state-norm column to the trajectory CSV
    #[arg(long)]
    pub norms: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Number of drive cycles feeding the transform
    #[arg(long, value_name = "N")]
    pub nf: Option<usize>,
    /// Evolution mode: iterate or spectral
    #[arg(long)]
    pub mode: Option<String>,
    /// Frequency-grid size (defaults to nf: the plain DFT grid)
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Detuning grid lo:hi:step, in rad/µs
    #[arg(long = "delta-grid", allow_hyphen_values = true, value_name = "GRID")]
    pub delta_grid: Option<String>,
    /// Cycle budget per point before censoring
    #[arg(long, value_name = "N")]
    pub budget: Option<usize>,
    /// Record wall-clock times (off by default so reruns are byte-identical)
    #[arg(long)]
    pub timings: bool,
    /// Also audit the (Δ,V) → (−Δ,−V) response symmetry across the grid
    #[arg(long)]
    pub audit: bool,
}

#[derive(Debug, Args)]
pub struct PhaseDiagramArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Perturbation grid lo:hi:step, in rad/µs
    #[arg(long = "eps-grid", allow_hyphen_values = true, value_name = "GRID")]
    pub eps_grid: Option<String>,
    /// Chain sizes a:b (consecutive, since δn_c differences neighbours)
    #[arg(long = "L", value_name = "RANGE")]
    pub l_range: Option<String>,
    /// Cycle budget per point before censoring
    #[arg(long, value_name = "N")]
    pub budget: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DissipativeArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Decay rate with a mandatory unit suffix, e.g. 10kHz or 0.01MHz
    #[arg(long, value_name = "RATE")]
    pub gamma: Option<String>,
    /// Number of drive cycles
    #[arg(long, value_name = "N")]
    pub nf: Option<usize>,
    /// Half-open cycle window a:b for the envelope fit
    #[arg(long = "fit-window", value_name = "A:B")]
    pub fit_window: Option<String>,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Number of random parameter draws
    #[arg(long, value_name = "N")]
    pub draws: Option<usize>,
    /// RNG seed
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
    /// Output directory (falls back to $RYDTC_OUT_DIR, then the current dir)
    #[arg(long, value_name = "DIR")]
    pub outdir: Option<PathBuf>,
}

fn parse_mode(raw: Option<&str>) -> Result<EvolveMode, CliError> {
    match raw {
        None => Ok(EvolveMode::Iterate),
        Some(s) => match s.to_ascii_lowercase().as_str() {
            "iterate" => Ok(EvolveMode::Iterate),
            "spectral" => Ok(EvolveMode::Spectral),
            other => Err(CliError::config(format!(
                "unknown mode `{other}` (expected iterate or spectral)"
            ))),
        },
    }
}

fn mode_name(mode: EvolveMode) -> &'static str {
    match mode {
        EvolveMode::Iterate => "iterate",
        EvolveMode::Spectral => "spectral",
    }
}

/// Evolve |g…g⟩ under the compiled cycle. Parameter validation happens at
/// resolve time, so any error here is numeric.
fn run_trajectory(
    params: &ModelParams,
    n_f: usize,
    mode: EvolveMode,
) -> Result<Trajectory, CliError> {
    let prop = compile_cycle(params).map_err(CliError::numeric)?;
    let psi0 = basis_state(0, params.dim());
    evolve(&prop, &psi0, n_f, mode).map_err(CliError::numeric)
}

/// Run sweeps on a dedicated pool when a thread count was requested;
/// otherwise rayon's default (all cores) applies.
fn with_pool<T: Send>(
    threads: Option<usize>,
    work: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::config(format!("cannot build a {n}-thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::numeric(format!("serialisation: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn plot_title(params: &ModelParams, n_f: usize) -> String {
    let mut title = format!(
        "{} drive | L={} eps={} delta={} V={} T1={} T2={}",
        params.variant,
        params.sites,
        params.epsilon,
        params.delta,
        params.v,
        params.t1,
        params.t2,
    );
    if let Some(gamma) = params.gamma {
        title.push_str(&format!(" gamma={gamma}"));
    }
    title.push_str(&format!(" | {n_f} cycles"));
    title
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let rt = config::resolve(&args.model)?;
    rt.params.validate().map_err(CliError::config)?;
    let n_f = args.nf.or(rt.file.nf).unwrap_or(200);
    let mode = parse_mode(args.mode.as_deref().or(rt.file.mode.as_deref()))?;
    let with_norms = args.norms || rt.file.norms.unwrap_or(false);

    let traj = run_trajectory(&rt.params, n_f, mode)?;

    let mut emitter = Emitter::new(&rt.outdir)?;
    emitter.write("trajectory.csv", output::trajectory_csv(&traj, with_norms))?;
    emitter.write(
        "trajectory.svg",
        svg::trajectory(&traj.p, &traj.q, &plot_title(&rt.params, n_f)),
    )?;
    if traj.censored {
        println!("no sign flip within {n_f} cycles (n_c censored at {})", traj.n_c);
    } else {
        println!("first sign flip at cycle {}", traj.n_c + 1);
    }
    emitter.finish(
        "simulate",
        output::manifest_params(
            &rt.params,
            &[
                ("nf", json!(n_f)),
                ("mode", json!(mode_name(mode))),
                ("norms", json!(with_norms)),
                ("n_c", json!(traj.n_c)),
                ("censored", json!(traj.censored)),
            ],
        ),
        None,
    )
}

pub fn spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let rt = config::resolve(&args.model)?;
    rt.params.validate().map_err(CliError::config)?;
    let n_f = args.nf.or(rt.file.nf).unwrap_or(200);
    let mode = parse_mode(args.mode.as_deref().or(rt.file.mode.as_deref()))?;
    let grid = args.grid.or(rt.file.grid);

    let traj = run_trajectory(&rt.params, n_f, mode)?;
    let spec = fourier_spectrum(&traj.p, grid).map_err(CliError::numeric)?;

    let mut emitter = Emitter::new(&rt.outdir)?;
    emitter.write("spectrum.csv", output::spectrum_csv(&spec, 3))?;
    emitter.write(
        "spectrum.svg",
        svg::spectrum(&spec, &plot_title(&rt.params, n_f)),
    )?;
    for (rank, (nu, mag)) in spec.top_peaks(3).iter().enumerate() {
        println!("peak {}: nu = {nu:.6}, |S| = {mag:.6}", rank + 1);
    }
    emitter.finish(
        "spectrum",
        output::manifest_params(
            &rt.params,
            &[
                ("nf", json!(n_f)),
                ("mode", json!(mode_name(mode))),
                ("grid", json!(grid)),
            ],
        ),
        None,
    )
}

pub fn scan(args: ScanArgs) -> Result<(), CliError> {
    let rt = config::resolve(&args.model)?;
    rt.params.validate().map_err(CliError::config)?;
    let grid_spec = args
        .delta_grid
        .clone()
        .or_else(|| rt.file.delta_grid.clone())
        .ok_or_else(|| CliError::config("scan needs --delta-grid lo:hi:step"))?;
    let grid = config::parse_grid(&grid_spec).map_err(CliError::config)?;
    let budget = args.budget.or(rt.file.budget).unwrap_or(DEFAULT_SWEEP_BUDGET);
    let timings = args.timings || rt.file.timings.unwrap_or(false);
    let audit = args.audit || rt.file.audit.unwrap_or(false);

    let points = with_pool(rt.threads, || scan_detuning(&rt.params, &grid, budget))?;
    let censored = points.iter().filter(|pt| pt.censored).count();
    let failed = points.iter().filter(|pt| pt.error.is_some()).count();

    let mut emitter = Emitter::new(&rt.outdir)?;
    emitter.write("scan.csv", output::scan_csv(&points, timings))?;
    if audit {
        let pairs: Vec<(f64, f64)> = grid.iter().map(|&delta| (delta, rt.params.v)).collect();
        let report = with_pool(rt.threads, || symmetry_audit(&rt.params, &pairs, 500))?;
        emitter.write("audit.json", to_pretty_json(&report)?)?;
        println!(
            "symmetry audit: {} pairs, {} violations, worst |dP| = {:.3e}",
            report.checked,
            report.violations.len(),
            report.worst_p_diff
        );
    }
    println!(
        "scanned {} detunings ({censored} censored, {failed} failed)",
        points.len()
    );
    emitter.finish(
        "scan",
        output::manifest_params(
            &rt.params,
            &[
                ("delta_grid", json!(grid_spec)),
                ("budget", json!(budget)),
                ("timings", json!(timings)),
                ("audit", json!(audit)),
            ],
        ),
        None,
    )
}

pub fn phase_diagram_cmd(args: PhaseDiagramArgs) -> Result<(), CliError> {
    let rt = config::resolve(&args.model)?;
    rt.params.validate().map_err(CliError::config)?;
    let eps_spec = args
        .eps_grid
        .clone()
        .or_else(|| rt.file.eps_grid.clone())
        .ok_or_else(|| CliError::config("phase-diagram needs --eps-grid lo:hi:step"))?;
    let l_spec = args
        .l_range
        .clone()
        .or_else(|| rt.file.l_range.clone())
        .ok_or_else(|| CliError::config("phase-diagram needs --L a:b"))?;
    let epsilons = config::parse_grid(&eps_spec).map_err(CliError::config)?;
    let l_values = config::parse_size_range(&l_spec).map_err(CliError::config)?;
    if l_values.len() < 2 {
        return Err(CliError::config(
            "phase-diagram needs at least two chain sizes to difference",
        ));
    }
    // Catch an over-cap size range before burning through the small rows.
    let mut probe = rt.params.clone();
    probe.sites = *l_values.last().expect("non-empty range");
    probe.validate().map_err(CliError::config)?;
    let budget = args.budget.or(rt.file.budget).unwrap_or(DEFAULT_SWEEP_BUDGET);

    let cells = with_pool(rt.threads, || {
        phase_diagram(&rt.params, &epsilons, &l_values, budget)
    })?;
    let censored = cells.iter().filter(|c| c.censored).count();

    let mut emitter = Emitter::new(&rt.outdir)?;
    emitter.write("phase_diagram.csv", output::phase_csv(&cells))?;
    emitter.write(
        "phase_diagram.svg",
        svg::phase(
            &cells,
            &format!("delta n_c class over (eps, L) | {} drive", rt.params.variant),
        ),
    )?;
    println!("phase map: {} cells ({censored} censored)", cells.len());
    emitter.finish(
        "phase-diagram",
        output::manifest_params(
            &rt.params,
            &[
                ("eps_grid", json!(eps_spec)),
                ("l_range", json!(l_spec)),
                ("budget", json!(budget)),
            ],
        ),
        None,
    )
}

pub fn dissipative(args: DissipativeArgs) -> Result<(), CliError> {
    let mut rt = config::resolve(&args.model)?;
    let gamma_raw = args
        .gamma
        .clone()
        .or_else(|| rt.file.gamma.clone())
        .ok_or_else(|| {
            CliError::config("dissipative needs --gamma with a unit suffix (e.g. 10kHz)")
        })?;
    let gamma = config::parse_decay_rate(&gamma_raw).map_err(CliError::config)?;
    rt.params.gamma = Some(gamma);
    rt.params.validate().map_err(CliError::config)?;
    let n_f = args.nf.or(rt.file.nf).unwrap_or(120);
    let window = match args.fit_window.as_deref().or(rt.file.fit_window.as_deref()) {
        Some(raw) => Some(config::parse_window(raw).map_err(CliError::config)?),
        None => None,
    };

    let rho0 = DensityState::ground(rt.params.sites);
    let run = evolve_density(&rt.params, &rho0, n_f).map_err(CliError::numeric)?;
    let fit = fit_decay(&run.trajectory.p, window).map_err(CliError::numeric)?;

    let mut emitter = Emitter::new(&rt.outdir)?;
    emitter.write("decay.csv", output::decay_csv(&run))?;
    emitter.write("decay_fit.json", to_pretty_json(&fit)?)?;
    emitter.write(
        "decay.svg",
        svg::trajectory(
            &run.trajectory.p,
            &run.trajectory.q,
            &plot_title(&rt.params, n_f),
        ),
    )?;
    println!(
        "alpha = {:.6} per cycle (window [{}, {}), {} points, residual {:.3e})",
        fit.alpha, fit.window.0, fit.window.1, fit.n_points, fit.residual
    );
    if run.negativity_warning {
        eprintln!(
            "warning: density matrix went negative beyond round-off (min eigenvalue {:.3e})",
            run.min_eigenvalue_seen
        );
    }
    emitter.finish(
        "dissipative",
        output::manifest_params(
            &rt.params,
            &[
                ("nf", json!(n_f)),
                ("fit_window", json!(window.map(|(a, b)| vec![a, b]))),
            ],
        ),
        None,
    )
}

pub fn oracle_check(args: OracleCheckArgs) -> Result<(), CliError> {
    let flags = ModelFlags {
        config: args.config.clone(),
        outdir: args.outdir.clone(),
        ..ModelFlags::default()
    };
    let rt = config::resolve(&flags)?;
    let draws = args.draws.or(rt.file.draws).unwrap_or(100);
    let seed = args.seed.or(rt.file.seed).unwrap_or(7);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matched = 0usize;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for draw in 0..draws {
        let mut params = ModelParams::new(DriveVariant::Simplified, 2);
        params.epsilon = rng.gen_range(-1.0..1.0);
        params.delta = rng.gen_range(-1.0..1.0);
        params.v = rng.gen_range(-0.3..0.3);
        params.t2 = rng.gen_range(1.0..20.0);
        let factors = oracle::factors(&params);

        let deviation = (|| -> rydtc_core::Result<f64> {
            let pair = {
                let prop = compile_cycle(&params)?;
                evolve(&prop, &basis_state(0, params.dim()), 3, EvolveMode::Iterate)?
            };
            let d2 = (pair.p[2] - oracle::two_atom_p2(&factors)?).abs();
            let d3 = (pair.p[3] - oracle::two_atom_p3(&factors)?).abs();
            let mut triple = params.clone();
            triple.sites = 3;
            let prop = compile_cycle(&triple)?;
            let run = evolve(&prop, &basis_state(0, triple.dim()), 2, EvolveMode::Iterate)?;
            let d4 = (run.p[2] - oracle::three_atom_p2(&factors)?).abs();
            Ok(d2.max(d3).max(d4))
        })()
        .map_err(CliError::numeric)?;

        worst = worst.max(deviation);
        if deviation <= ORACLE_TOL {
            matched += 1;
        } else {
            failures.push(json!({
                "draw": draw,
                "deviation": deviation,
                "params": serde_json::to_value(&params)
                    .map_err(|e| CliError::numeric(format!("serialisation: {e}")))?,
            }));
        }
    }

    println!("{matched}/{draws} matched \u{2264} 1e-8");
    let report = json!({
        "draws": draws,
        "matched": matched,
        "seed": seed,
        "tolerance": ORACLE_TOL,
        "worst_deviation": worst,
        "failures": failures,
    });
    let mut emitter = Emitter::new(&rt.outdir)?;
    emitter.write("oracle_check.json", to_pretty_json(&report)?)?;
    emitter.finish(
        "oracle-check",
        json!({ "draws": draws, "tolerance": ORACLE_TOL }),
        Some(seed),
    )?;
    if matched == draws {
        Ok(())
    } else {
        Err(CliError::numeric(format!(
            "{} of {draws} draws deviated from the closed forms by more than {ORACLE_TOL:.0e}",
            draws - matched
        )))
    }
}
