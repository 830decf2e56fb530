//! `spinchannel` — disorder generation, single transfer runs, and ensemble
//! sweeps from the command line.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid flags or config.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spinchannel::disorder::{self, DisorderParams, DisorderSequence};
use spinchannel::dynamics::{
    find_f_max, occupancy_trace, write_fidelity_trace_csv, DEFAULT_COARSE_PER_TAU,
};
use spinchannel::effective::{detuning_ratio, reduce_with_tol, DEFAULT_GAP_TOL};
use spinchannel::ensemble::{derive_seed, run_sweep, EnsembleSummary, SweepConfig};
use spinchannel::hamiltonian::{build_channel, build_full, ChainSpec};
use spinchannel::spectral::{eigendecompose, write_eigenmap_csv};

#[derive(Parser)]
#[command(
    name = "spinchannel",
    version,
    about = "Quantum-state transfer through XX spin channels with correlated disorder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a normalized disorder sequence (CSV plus JSON sidecar)
    Generate {
        /// Channel length N (at least 2)
        #[arg(long)]
        n: usize,
        /// Spectral exponent alpha >= 0
        #[arg(long)]
        alpha: f64,
        /// Seed for the phase generator
        #[arg(long)]
        seed: u64,
        /// Output CSV path; the sidecar lands next to it as `<stem>.meta.json`
        #[arg(long, default_value = "disorder.csv")]
        out: PathBuf,
    },
    /// Run one transfer sample end-to-end and report F_max
    Transfer {
        /// Channel length N (at least 2)
        #[arg(long)]
        n: usize,
        /// Spectral exponent, or "none" for a noiseless channel
        #[arg(long, default_value = "none")]
        alpha: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Outer coupling for both terminals (units of J)
        #[arg(long, default_value_t = 1e-3)]
        g: f64,
        /// Sender coupling override
        #[arg(long)]
        gs: Option<f64>,
        /// Receiver coupling override
        #[arg(long)]
        gr: Option<f64>,
        /// Sender field (units of J)
        #[arg(long, default_value_t = 0.0)]
        omega_s: f64,
        /// Receiver field (units of J)
        #[arg(long, default_value_t = 0.0)]
        omega_r: f64,
        /// Search window in units of tau = pi/(2 g^2)
        #[arg(long, default_value_t = 20.0)]
        window_mult: f64,
        /// Directory for optional trace/eigenmap files
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Write trace.csv: occupancies t,p_s,p_r,p_ch over [0, 2 tau]
        #[arg(long)]
        trace: bool,
        /// Write eigenmap.csv: k,i,prob over the full (N+2)-site system
        #[arg(long)]
        eigenmap: bool,
        /// Write fidelity.csv: t,F over the full search window
        #[arg(long)]
        fidelity_trace: bool,
        /// Write matrix.csv: row,col,value dump of the full Hamiltonian
        #[arg(long)]
        matrix_dump: bool,
    },
    /// Run a disorder-ensemble sweep from a TOML config
    Sweep {
        /// Sweep config file (see README for the schema)
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: available parallelism)
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory override (also: SPINCHANNEL_OUT env var)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Samples-per-cell override
        #[arg(long)]
        samples: Option<usize>,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<spinchannel::Error> for CliError {
    fn from(e: spinchannel::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate { n, alpha, seed, out } => cmd_generate(n, alpha, seed, out),
        Command::Transfer {
            n,
            alpha,
            seed,
            g,
            gs,
            gr,
            omega_s,
            omega_r,
            window_mult,
            out,
            trace,
            eigenmap,
            fidelity_trace,
            matrix_dump,
        } => cmd_transfer(TransferArgs {
            n,
            alpha,
            seed,
            g_s: gs.unwrap_or(g),
            g_r: gr.unwrap_or(g),
            omega_s,
            omega_r,
            window_mult,
            out,
            trace,
            eigenmap,
            fidelity_trace,
            matrix_dump,
        }),
        Command::Sweep { config, threads, out, samples } => {
            cmd_sweep(config, threads, out, samples)
        }
    }
}

fn cmd_generate(n: usize, alpha: f64, seed: u64, out: PathBuf) -> Result<(), CliError> {
    let params = DisorderParams::new(n, alpha, seed).map_err(|e| CliError::usage(e.to_string()))?;
    let seq = disorder::generate(&params)?;
    seq.write_csv(&out)?;
    println!(
        "wrote {} sites to {} (alpha = {}, seed = {}, normalized)",
        n,
        out.display(),
        alpha,
        seed
    );
    Ok(())
}

struct TransferArgs {
    n: usize,
    alpha: String,
    seed: u64,
    g_s: f64,
    g_r: f64,
    omega_s: f64,
    omega_r: f64,
    window_mult: f64,
    out: PathBuf,
    trace: bool,
    eigenmap: bool,
    fidelity_trace: bool,
    matrix_dump: bool,
}

fn parse_alpha(raw: &str) -> Result<Option<f64>, CliError> {
    if raw.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let alpha: f64 = raw
        .parse()
        .map_err(|_| CliError::usage(format!("--alpha must be a number or \"none\", got {raw:?}")))?;
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(CliError::usage(format!("--alpha must be >= 0, got {alpha}")));
    }
    Ok(Some(alpha))
}

fn cmd_transfer(args: TransferArgs) -> Result<(), CliError> {
    let alpha = parse_alpha(&args.alpha)?;
    if args.window_mult.is_nan() || args.window_mult <= 0.0 {
        return Err(CliError::usage("--window-mult must be > 0"));
    }

    let sequence = match alpha {
        Some(alpha) => {
            let params = DisorderParams::new(args.n, alpha, args.seed)
                .map_err(|e| CliError::usage(e.to_string()))?;
            disorder::generate(&params)?
        }
        None => DisorderSequence::zeros(args.n),
    };
    let spec = ChainSpec::new(
        args.n,
        1.0,
        args.g_s,
        args.g_r,
        args.omega_s,
        args.omega_r,
        sequence,
    )
    .map_err(|e| CliError::usage(e.to_string()))?;

    println!(
        "N = {}  alpha = {}  seed = {}",
        args.n,
        alpha.map_or("none".to_string(), |a| a.to_string()),
        args.seed
    );
    println!(
        "g_s = {}  g_r = {}  omega_s = {}  omega_r = {}",
        spec.g_s, spec.g_r, spec.omega_s, spec.omega_r
    );

    if args.matrix_dump {
        fs::create_dir_all(&args.out)?;
        let path = args.out.join("matrix.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        build_full(&spec)?.write_nonzero_csv(&mut w)?;
        w.flush()?;
        println!("wrote {}", path.display());
    }

    // a decoupled terminal leaves f_r identically zero: report and stop
    if spec.g_s * spec.g_r == 0.0 {
        println!("J_eff = 0 (decoupled terminal; no transfer channel)");
        println!("F_max = 0.5");
        return Ok(());
    }

    let tau = spec.tau()?;
    let channel_eigs = eigendecompose(&build_channel(&spec)?)?;
    match reduce_with_tol(&channel_eigs, &spec, DEFAULT_GAP_TOL * spec.j) {
        Ok(eff) => {
            println!("h_s = {}", eff.h_s);
            println!("h_r = {}", eff.h_r);
            println!("J_eff = {}", eff.j_eff);
            println!("Delta = {}", eff.delta);
            match detuning_ratio(&eff) {
                Ok(r) => println!("|Delta/J_eff| = {r}"),
                Err(_) => println!("|Delta/J_eff| = inf (J_eff = 0)"),
            }
            if !eff.weak_coupling_ok(spec.g_s, spec.g_r) {
                println!(
                    "warning: a terminal sits within 10g of the channel spectrum \
                     (min gaps {:.3e}, {:.3e}); the two-level picture may be unreliable",
                    eff.min_gap_s, eff.min_gap_r
                );
            }
        }
        Err(e) => println!("effective model unavailable: {e}"),
    }

    let full_eigs = eigendecompose(&build_full(&spec)?)?;
    let result = find_f_max(&full_eigs, &spec, args.window_mult, DEFAULT_COARSE_PER_TAU)?;
    println!("tau = {tau}");
    println!("F_max = {}", result.f_max);
    println!("t_star = {}  (t_star/tau = {})", result.t_star, result.t_star / tau);

    if args.trace || args.eigenmap || args.fidelity_trace {
        fs::create_dir_all(&args.out)?;
    }
    if args.trace {
        let trace = occupancy_trace(&full_eigs, &spec, 2.0 * tau, 2000)?;
        let path = args.out.join("trace.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        trace.write_csv(&mut w)?;
        w.flush()?;
        println!("wrote {}", path.display());
    }
    if args.eigenmap {
        let path = args.out.join("eigenmap.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        write_eigenmap_csv(&full_eigs, &mut w)?;
        w.flush()?;
        println!("wrote {}", path.display());
    }
    if args.fidelity_trace {
        let path = args.out.join("fidelity.csv");
        let samples = (args.window_mult * 200.0).ceil() as usize + 1;
        let mut w = BufWriter::new(File::create(&path)?);
        write_fidelity_trace_csv(&full_eigs, &spec, args.window_mult * tau, samples, &mut w)?;
        w.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(
    config_path: PathBuf,
    threads: Option<usize>,
    out: Option<PathBuf>,
    samples: Option<usize>,
) -> Result<(), CliError> {
    let run_config = config::load(&config_path)?;
    let sweep = config::resolve(run_config.clone(), out, samples)?;
    sweep.validate().map_err(|e| CliError::usage(e.to_string()))?;

    if let Some(k) = threads {
        if k == 0 {
            return Err(CliError::usage("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::runtime(e.to_string()))?;
    }

    let summary = run_sweep(&sweep)?;
    print_summary(&summary);

    if run_config.emit_trace || run_config.emit_eigenmap {
        emit_sample_artifacts(&sweep, run_config.emit_trace, run_config.emit_eigenmap)?;
    }
    println!("outputs in {}", sweep.outputs.display());
    Ok(())
}

fn print_summary(summary: &EnsembleSummary) {
    println!("alpha      g  count  fail   mean_F  median_F      sem");
    for group in &summary.groups {
        let fmt = |v: Option<f64>| v.map_or("      --".to_string(), |x| format!("{x:8.4}"));
        println!(
            "{:>5} {:>6}  {:>5} {:>5} {} {}  {}",
            group.alpha,
            group.g,
            group.count,
            group.failures,
            fmt(group.f_max_mean),
            fmt(group.f_max_median),
            fmt(group.f_max_sem),
        );
    }
}

/// Per-sample occupancy traces and eigenmaps, recomputed from the seeds
/// (every sample is a pure function of the config, so nothing needs to be
/// carried over from the sweep itself).
fn emit_sample_artifacts(
    config: &SweepConfig,
    emit_trace: bool,
    emit_eigenmap: bool,
) -> Result<(), CliError> {
    let dir = config.outputs.join("samples");
    fs::create_dir_all(&dir)?;
    for &alpha in &config.alpha_list {
        for &g in &config.g_list {
            for index in 0..config.samples {
                let seed = derive_seed(config.master_seed, alpha, g, index as u64);
                let Ok(params) = DisorderParams::new(config.n, alpha, seed) else { continue };
                let Ok(seq) = disorder::generate(&params) else { continue };
                let Ok(spec) = ChainSpec::new(
                    config.n, config.j, g, g, config.omega_s, config.omega_r, seq,
                ) else {
                    continue;
                };
                let Ok(matrix) = build_full(&spec) else { continue };
                let Ok(full_eigs) = eigendecompose(&matrix) else { continue };

                let tag = format!("alpha{}_g{}_i{}", alpha, g, index);
                if emit_trace {
                    let tau = spec.tau().map_err(|e| CliError::runtime(e.to_string()))?;
                    let trace = occupancy_trace(&full_eigs, &spec, 2.0 * tau, 2000)?;
                    let mut w = BufWriter::new(File::create(dir.join(format!("trace_{tag}.csv")))?);
                    trace.write_csv(&mut w)?;
                    w.flush()?;
                }
                if emit_eigenmap {
                    let mut w =
                        BufWriter::new(File::create(dir.join(format!("eigenmap_{tag}.csv")))?);
                    write_eigenmap_csv(&full_eigs, &mut w)?;
                    w.flush()?;
                }
            }
        }
    }
    println!("wrote per-sample artifacts to {}", dir.display());
    Ok(())
}
