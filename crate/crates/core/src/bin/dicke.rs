use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dicke_core::experiments::{
    bench_channel, bench_circuits, qpt_sweep, squeeze_sweep, top_half_slope, write_bench_csv,
    write_qpt_csv, write_squeeze_csv, QptConfig, SqueezeConfig, SqueezeGate,
};
use dicke_core::measurement::{husimi_grid, probabilities, sample, sphere_grid, write_husimi_csv};
use dicke_core::oracle::{cross_check, MAX_PARTICLES};
use dicke_core::vqa::{fit, random_init, Ansatz, OptimizerConfig, OptimizerKind, TntCoupling};
use dicke_core::{Circuit, Error};

/// Collective spin simulator in the Dicke basis.
#[derive(Parser, Debug)]
#[command(name = "dicke", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for sampling and random initialization.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a JSON circuit and print P(j, m).
    Run(RunArgs),
    /// Squeezing parameters (dB) over a sweep of gate angles.
    Squeeze(SqueezeArgs),
    /// Variational squeezing optimization.
    Vqa(VqaArgs),
    /// Adiabatic sweep across the LMG transition.
    Qpt(QptArgs),
    /// Husimi Q function of a circuit's output on a sphere grid.
    Husimi(HusimiArgs),
    /// Wall-clock timing against particle number.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    circuit: PathBuf,
    /// Also sample this many shots.
    #[arg(long)]
    shots: Option<u64>,
    /// Cross-check against the full product-space simulator.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args, Debug)]
struct SqueezeArgs {
    #[arg(long, default_value_t = 100)]
    n: u32,
    /// oat, tnt, tat or gms.
    #[arg(long, default_value = "oat")]
    gate: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta_min: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    theta_max: f64,
    #[arg(long, default_value_t = 51)]
    steps: usize,
    /// TNT coupling.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    lambda: f64,
    /// GMS azimuth.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4, allow_hyphen_values = true)]
    phi: f64,
}

#[derive(Args, Debug)]
struct VqaArgs {
    #[arg(long, default_value_t = 100)]
    n: u32,
    /// gd, adam or qng.
    #[arg(long, default_value = "adam")]
    optimizer: String,
    /// Learning rate (default depends on the optimizer).
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-19)]
    tol: f64,
    #[arg(long, default_value_t = 1e-5)]
    eps_fd: f64,
    /// Comma-separated start point or "random".
    #[arg(long, default_value = "0.00195902,0.14166777,0.01656466", allow_hyphen_values = true)]
    init: String,
    /// table1 or appendix-omega.
    #[arg(long, default_value = "appendix-omega")]
    tnt_coupling: String,
}

#[derive(Args, Debug)]
struct QptArgs {
    #[arg(long, default_value_t = 100)]
    n: u32,
    #[arg(long, default_value_t = -0.2, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    r_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    r_max: f64,
    #[arg(long, default_value_t = 357)]
    steps: usize,
}

#[derive(Args, Debug)]
struct HusimiArgs {
    circuit: PathBuf,
    #[arg(long, default_value_t = 51)]
    theta_steps: usize,
    #[arg(long, default_value_t = 100)]
    phi_steps: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 200)]
    n_max: u32,
    #[arg(long, default_value_t = 10)]
    n_min: u32,
    #[arg(long, default_value_t = 10)]
    n_step: u32,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    /// Depolarizing probability after every gate.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Time a single channel application instead of the circuit.
    #[arg(long)]
    channel: bool,
}

/// Failures grouped by exit code.
enum Failure {
    Usage(String),
    Input(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Input(e.to_string()),
            Error::Domain(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numeric(format!("write failed: {e}"))
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    // any defect in the file itself is an input error
    Circuit::from_json(&text).map_err(|e| match e {
        Error::Parse(_) | Error::Domain(_) => Failure::Input(format!("{}: {e}", path.display())),
        other => other.into(),
    })
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::Usage(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, Failure> {
    s.parse().map_err(|e: Error| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let mut out = output(&cli.out)?;
    match cli.command {
        Command::Run(args) => {
            let circuit = load_circuit(&args.circuit)?;
            let state = circuit.run()?;
            probabilities(&state)?.write_csv(&mut out)?;
            if let Some(shots) = args.shots {
                writeln!(out)?;
                sample(&state, shots, cli.seed)?.write_csv(&mut out)?;
            }
            if args.oracle {
                if circuit.n > MAX_PARTICLES {
                    return Err(Failure::Numeric(format!(
                        "--oracle supports at most {MAX_PARTICLES} particles"
                    )));
                }
                let dev = cross_check(&circuit)?;
                eprintln!("oracle max deviation: {dev:e}");
                if dev > 1e-8 {
                    out.flush()?;
                    return Err(Failure::Numeric(format!("oracle deviation {dev:e} exceeds 1e-8")));
                }
            }
        }
        Command::Squeeze(args) => {
            let mut cfg = SqueezeConfig::new(args.n, parse::<SqueezeGate>(&args.gate)?);
            cfg.theta_min = args.theta_min;
            cfg.theta_max = args.theta_max;
            cfg.steps = args.steps;
            cfg.lambda = args.lambda;
            cfg.phi = args.phi;
            write_squeeze_csv(&squeeze_sweep(&cfg)?, &mut out)?;
        }
        Command::Vqa(args) => {
            let kind: OptimizerKind = parse(&args.optimizer)?;
            let coupling: TntCoupling = parse(&args.tnt_coupling)?;
            let ansatz = Ansatz::twisting(args.n, coupling)?;
            let mut cfg = OptimizerConfig::new(kind);
            if let Some(lr) = args.lr {
                cfg.learning_rate = lr;
            }
            cfg.max_iter = args.max_iter;
            cfg.tolerance = args.tol;
            cfg.eps_fd = args.eps_fd;
            let init = if args.init.eq_ignore_ascii_case("random") {
                random_init(ansatz.dim(), cli.seed)
            } else {
                args.init
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Failure::Usage(format!("--init: {e}")))?
            };
            let result = fit(&ansatz, &cfg, &init)?;
            result.write_csv(&mut out)?;
            if let Some(e) = result.aborted {
                out.flush()?;
                return Err(e.into());
            }
            eprintln!("final cost {:e} after {} steps", result.final_cost(), result.cost_history.len() - 1);
        }
        Command::Qpt(args) => {
            let cfg = QptConfig {
                n: args.n,
                lambda: args.lambda,
                r_min: args.r_min,
                r_max: args.r_max,
                steps: args.steps,
            };
            write_qpt_csv(&qpt_sweep(&cfg)?, &mut out)?;
        }
        Command::Husimi(args) => {
            let state = load_circuit(&args.circuit)?.run()?;
            if args.theta_steps == 0 || args.phi_steps == 0 {
                return Err(Failure::Usage("grid needs at least one point per axis".into()));
            }
            let (thetas, phis) = sphere_grid(args.theta_steps, args.phi_steps);
            write_husimi_csv(&husimi_grid(&state, &thetas, &phis)?, &mut out)?;
        }
        Command::Bench(args) => {
            if args.n_max < 10 || args.n_min == 0 || args.n_min > args.n_max || args.n_step == 0 {
                return Err(Failure::Usage("need 1 <= n_min <= n_max, n_max >= 10, n_step >= 1".into()));
            }
            let ns: Vec<u32> = (args.n_min..=args.n_max).step_by(args.n_step as usize).collect();
            let rows = if args.channel {
                bench_channel(&ns, args.repeats)?
            } else {
                bench_circuits(&ns, args.layers, args.noise, args.repeats)?
            };
            write_bench_csv(&rows, &mut out)?;
            if rows.len() >= 2 {
                eprintln!("log-log slope over the upper half of n: {:.3}", top_half_slope(&rows));
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
