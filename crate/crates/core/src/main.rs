use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stokes_lab::harness::{
    run_experiment, threshold_bisect, verify_suite, ExperimentConfig, HarnessError, InitialData,
    Level, System,
};
use stokes_lab::stokeslet::kernel_l1_check;
use stokes_lab::timestepper::RunStatus;

/// Gravity Stokes internal waves and their nonlocal 1D models.
#[derive(Parser)]
#[command(name = "stokes-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the self-check batteries.
    Verify {
        #[arg(long, default_value = "fast")]
        level: Level,
    },
    /// Run one experiment and write its CSV series and summary.
    Run {
        /// TOML config; without it a single-mode run of `--model` is built.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model: Option<System>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        amplitude: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, env = "STOKES_LAB_OUT")]
        out: Option<PathBuf>,
    },
    /// Bisect the decay/blow-up amplitude threshold of a data family.
    Sweep {
        #[arg(long)]
        model: System,
        #[arg(long, default_value = "single_mode")]
        family: String,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 6)]
        budget: u32,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        /// Horizon a run must survive to count as decay.
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        #[arg(long, env = "STOKES_LAB_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Kernel integrability: L¹ totals at `Y` and `2Y` and decay exponents.
    KernelCheck {
        #[arg(long, default_value_t = 20.0)]
        cutoff: f64,
    },
}

fn run(
    config: Option<PathBuf>,
    model: Option<System>,
    n: Option<usize>,
    amplitude: Option<f64>,
    t_end: Option<f64>,
    out: Option<PathBuf>,
) -> Result<ExitCode, HarnessError> {
    let mut cfg = match &config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => {
            let system = model.ok_or_else(|| {
                HarnessError::Config("either --config or --model is required".into())
            })?;
            let initial = match system {
                System::Graph | System::Contour => InitialData::GraphCos { k: 1, epsilon: 1e-3 },
                _ => InitialData::SingleMode { k: 1, amplitude: 1e-3 },
            };
            ExperimentConfig::new(system.name(), system, 256, initial, 10.0)
        }
    };
    if config.is_some() {
        if let Some(m) = model {
            cfg.system = m;
        }
    }
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(a) = amplitude {
        cfg.initial = cfg.initial.with_amplitude(a);
    }
    if let Some(t) = t_end {
        cfg.cadence *= t / cfg.control.t_end;
        cfg.control.t_end = t;
    }
    if let Some(o) = out {
        cfg.output_dir = o.to_string_lossy().into_owned();
    }
    let (record, paths) = run_experiment(&cfg)?;
    print!("{}", record.summary.to_toml());
    eprintln!("wrote {}", paths.csv.display());
    Ok(match record.status() {
        RunStatus::Completed => ExitCode::SUCCESS,
        RunStatus::BlewUp => ExitCode::from(2),
        RunStatus::UnderResolved => ExitCode::FAILURE,
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    model: System,
    family: &str,
    lo: f64,
    hi: f64,
    budget: u32,
    n: usize,
    t_end: f64,
    out: PathBuf,
) -> Result<ExitCode, HarnessError> {
    let initial = InitialData::named(family)?;
    let name = format!("sweep-{}-{family}", model.name());
    let mut base = ExperimentConfig::new(&name, model, n, initial, t_end);
    base.output_dir = out.to_string_lossy().into_owned();
    let report = threshold_bisect(&base, lo, hi, budget)?;
    let text = toml::to_string(&report).map_err(|e| HarnessError::Io(e.to_string()))?;
    fs::create_dir_all(&out).map_err(|e| HarnessError::Io(format!("{}: {e}", out.display())))?;
    let path = out.join(format!("{name}.toml"));
    fs::write(&path, &text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    print!("{text}");
    eprintln!("wrote {}", path.display());
    Ok(if report.interval.is_some() && report.endpoints_stable != Some(false) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn kernel_check(cutoff: f64) -> Result<ExitCode, HarnessError> {
    let err = |e: stokes_lab::stokeslet::StokesletError| HarnessError::Config(e.to_string());
    let a = kernel_l1_check(cutoff, 1e-8).map_err(err)?;
    let b = kernel_l1_check(2.0 * cutoff, 1e-8).map_err(err)?;
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let d1 = rel(a.s1.total, b.s1.total);
    let d2 = rel(a.s2.total, b.s2.total);
    println!("cutoff {cutoff} vs {}", 2.0 * cutoff);
    println!(
        "S1: L1 {:.10} -> {:.10} (rel {d1:.2e}), decay exponent {:.4}",
        a.s1.total, b.s1.total, a.s1.decay_exponent
    );
    println!(
        "S2: L1 {:.10} -> {:.10} (rel {d2:.2e}), decay exponent {:.4}",
        a.s2.total, b.s2.total, a.s2.decay_exponent
    );
    println!("velocity constant {:.10}", b.velocity_constant());
    let ok = d1 < 0.01 && d2 < 0.01 && a.s1.decay_exponent <= -0.95 && a.s2.decay_exponent <= -0.475;
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    // Exit code 2 means blew_up, so usage errors must not use clap's default.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Verify { level } => {
            let report = verify_suite(level);
            for c in &report.checks {
                println!("{c}");
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Run {
            config,
            model,
            n,
            amplitude,
            t_end,
            out,
        } => run(config, model, n, amplitude, t_end, out),
        Command::Sweep {
            model,
            family,
            lo,
            hi,
            budget,
            n,
            t_end,
            out,
        } => sweep(model, &family, lo, hi, budget, n, t_end, out),
        Command::KernelCheck { cutoff } => kernel_check(cutoff),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
