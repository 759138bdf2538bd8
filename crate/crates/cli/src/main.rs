use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use swe_radar::baselines::{MusicParams, MusicSolver};
use swe_radar::compensate::{compensate, GatePolicy};
use swe_radar::io::{parse_bench_spec, parse_dump, parse_scene, write_dump, write_report, Report};
use swe_radar::methods::{Method, MethodSuite};
use swe_radar::metrics::{append_timing_rows, monte_carlo, records_to_csv, timing_records, Executor};
use swe_radar::pipeline::PipelineParams;
use swe_radar::synth::{sigma_for_snr_db, synthesize_wideband};
use swe_radar::transform::dft2;

const EXIT_USAGE: u8 = 1;
const EXIT_EMPTY: u8 = 2;

#[derive(Parser)]
#[command(name = "swe-radar", version, about = "Spatial-wideband FMCW radar simulation and signature estimation")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the wideband IF data of a scene file into a dump.
    Synth {
        scene: PathBuf,
        out: PathBuf,
        /// Complex noise standard deviation.
        #[arg(long, default_value_t = 0.0, conflicts_with = "snr_db")]
        sigma: f64,
        /// Per-sample SNR of a unit target; sets sigma.
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate the scene signature from a dump.
    Estimate {
        dump: PathBuf,
        #[arg(long, default_value = "proposed", value_parser = parse_method)]
        method: Method,
        /// Dictionary oversampling factor.
        #[arg(long)]
        oversample: Option<usize>,
        #[arg(long, value_enum, default_value_t = GateArg::SpectralMask)]
        gate_policy: GateArg,
        /// Spectral-mask bin power fraction.
        #[arg(long)]
        mask_fraction: Option<f64>,
        /// Time-domain threshold magnitude.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Prior target count for music2d and omp2d (default: coarse peak count).
        #[arg(long)]
        num_sources: Option<usize>,
        #[arg(long, value_enum, default_value_t = SolverArg::Subspace)]
        music_solver: SolverArg,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a Monte-Carlo benchmark spec and write CSV records.
    Bench {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the trial count of the bench file.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Skip the runtime column and the timing rows.
        #[arg(long)]
        no_timing: bool,
        /// MUSIC eigensolver for the timing rows.
        #[arg(long, value_enum, default_value_t = SolverArg::Dense)]
        timing_solver: SolverArg,
    },
    /// Export the 2D-DFT power map of a dump as `u,v,power` CSV.
    Map {
        dump: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compensate with this AoA (degrees) before transforming.
        #[arg(long, allow_hyphen_values = true)]
        compensate_deg: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GateArg {
    SpectralMask,
    TimeThreshold,
    Passthrough,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Dense,
    Subspace,
}

impl SolverArg {
    fn solver(self) -> MusicSolver {
        match self {
            SolverArg::Dense => MusicSolver::Dense,
            SolverArg::Subspace => MusicSolver::subspace(),
        }
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: swe_radar::Error| e.to_string())
}

type CmdResult = Result<ExitCode, String>;

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ctx(path: &Path) -> impl Fn(swe_radar::Error) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

fn synth(scene: &Path, out: &Path, sigma: f64, snr_db: Option<f64>, seed: u64) -> CmdResult {
    let s = parse_scene(&read(scene)?).map_err(ctx(scene))?;
    let sigma = snr_db.map_or(sigma, sigma_for_snr_db);
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(format!("sigma must be a non-negative number, got {sigma}"));
    }
    let y = synthesize_wideband(&s.signature().map_err(ctx(scene))?, &s.cfg, sigma, seed);
    write_out(Some(out), &write_dump(&y))?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    dump: &Path,
    method: Method,
    oversample: Option<usize>,
    gate_policy: GateArg,
    mask_fraction: Option<f64>,
    gamma: f64,
    num_sources: Option<usize>,
    music_solver: SolverArg,
    report: Option<&Path>,
) -> CmdResult {
    let y = parse_dump(&read(dump)?).map_err(ctx(dump))?;
    let cfg = *y.cfg();
    let mut params = PipelineParams::for_config(&cfg);
    if let Some(o) = oversample {
        if o == 0 {
            return Err("--oversample must be at least 1".into());
        }
        params.oversample = o;
    }
    params.gate = match (gate_policy, params.gate) {
        (GateArg::SpectralMask, GatePolicy::SpectralMask { mask_fraction: f, neighborhood }) => {
            GatePolicy::SpectralMask {
                mask_fraction: mask_fraction.unwrap_or(f),
                neighborhood,
            }
        }
        (GateArg::SpectralMask, g) => g,
        (GateArg::TimeThreshold, _) => GatePolicy::TimeDomainThreshold { gamma },
        (GateArg::Passthrough, _) => GatePolicy::Passthrough,
    };
    let music = MusicParams {
        solver: music_solver.solver(),
        ..MusicParams::for_config(&cfg)
    };
    let suite = MethodSuite::new(&cfg, params, music).map_err(|e| e.to_string())?;
    let out = if method == Method::Proposed {
        let r = suite.pipeline().estimate(&y).map_err(|e| e.to_string())?;
        Report::from_pipeline(method.label(), &r, &cfg)
    } else {
        let est = suite.run(method, &y, num_sources).map_err(|e| e.to_string())?;
        Report::from_signature(method.label(), &est, &cfg)
    };
    write_out(report, &write_report(&out))?;
    if out.rows.is_empty() {
        eprintln!("no targets detected");
        return Ok(ExitCode::from(EXIT_EMPTY));
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(
    spec_path: &Path,
    out: Option<&Path>,
    trials: Option<usize>,
    seed: u64,
    threads: usize,
    no_timing: bool,
    timing_solver: SolverArg,
) -> CmdResult {
    let mut file = parse_bench_spec(&read(spec_path)?).map_err(ctx(spec_path))?;
    if let Some(t) = trials {
        file.spec.trials = t;
    }
    let cfg = file.spec.cfg;
    let music = MusicParams {
        solver: file.music_solver,
        ..MusicParams::for_config(&cfg)
    };
    let suite = MethodSuite::new(&cfg, PipelineParams::for_config(&cfg), music).map_err(|e| e.to_string())?;
    let exec = if threads == 0 { Executor::Parallel } else { Executor::Threads(threads) };
    let records = monte_carlo(&file.spec, &suite, seed, exec).map_err(|e| e.to_string())?;
    let mut csv = records_to_csv(&records, !no_timing);
    if !no_timing {
        let timed = suite.with_music_params(MusicParams {
            solver: timing_solver.solver(),
            ..music
        });
        let rows = timing_records(&file.spec, &timed, seed).map_err(|e| e.to_string())?;
        append_timing_rows(&mut csv, &rows);
    }
    write_out(out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn map(dump: &Path, out: Option<&Path>, compensate_deg: Option<f64>) -> CmdResult {
    let mut y = parse_dump(&read(dump)?).map_err(ctx(dump))?;
    if let Some(deg) = compensate_deg {
        let w = y.cfg().aoa_to_omega(deg).map_err(|e| e.to_string())?;
        y = compensate(&y, w, &y.cfg().clone());
    }
    write_out(out, &dft2(&y).to_csv())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CmdResult {
    match cli.cmd {
        Command::Synth {
            scene,
            out,
            sigma,
            snr_db,
            seed,
        } => synth(&scene, &out, sigma, snr_db, seed),
        Command::Estimate {
            dump,
            method,
            oversample,
            gate_policy,
            mask_fraction,
            gamma,
            num_sources,
            music_solver,
            report,
        } => estimate(
            &dump,
            method,
            oversample,
            gate_policy,
            mask_fraction,
            gamma,
            num_sources,
            music_solver,
            report.as_deref(),
        ),
        Command::Bench {
            spec,
            out,
            trials,
            seed,
            threads,
            no_timing,
            timing_solver,
        } => bench(&spec, out.as_deref(), trials, seed, threads, no_timing, timing_solver),
        Command::Map {
            dump,
            out,
            compensate_deg,
        } => map(&dump, out.as_deref(), compensate_deg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
