//! `qthermo`: figure tables, identity verification and scenario runs as CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qthermo::config::{config_hash, RunConfig};
use qthermo::figures::{fig1, time_series, Figure};
use qthermo::output::{write_table, write_trajectory, Metadata};
use qthermo::trajectory::run;
use qthermo::verify::verify;
use qthermo::{Error, Execution, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Verify,
    Run,
}

#[derive(Debug, Parser)]
#[command(name = "qthermo", version, about = "Correlation-aware thermodynamic ledgers for system-bath models")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially
    #[arg(long)]
    jobs: Option<usize>,
    /// Initial-state coefficient; repeat for several panels
    #[arg(long, allow_negative_numbers = true)]
    xi: Vec<f64>,
    /// Grid points on [0, tmax]
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    tmax: Option<f64>,
    /// Halve the time step (2N - 1 grid points)
    #[arg(long)]
    refine: bool,
}

type Body = Box<dyn FnOnce(&mut dyn Write) -> Result<()>>;

enum Outcome {
    Done,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qthermo: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.steps {
        cfg.jc.steps = n;
    }
    if let Some(t) = cli.tmax {
        cfg.jc.t_max = t;
    }
    if cli.refine {
        cfg.jc = cfg.jc.refined();
    }
    if !cli.xi.is_empty() {
        cfg.figures.xi = Some(cli.xi.clone());
    }
    cfg.jc.validate().map_err(config_error)?;
    for &x in cfg.figures.xi.iter().flatten() {
        cfg.jc.with_xi(x).validate().map_err(config_error)?;
    }
    Ok(cfg)
}

fn execution(jobs: Option<usize>) -> Result<Execution> {
    match jobs {
        Some(0) => Err(Error::Config("--jobs must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("--jobs: {e}")))?;
            Ok(Execution::Parallel)
        }
        _ => Ok(Execution::default()),
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = effective_config(cli)?;
    let exec = execution(cli.jobs)?;
    let hash = config_hash(&cfg);
    let command = format!("{:?}", cli.command).to_lowercase();
    let meta = Metadata::new(&command, &hash).with_seed(cfg.seed);

    // compute before opening the sink so a failed run leaves no partial file
    let mut outcome = Outcome::Done;
    let body: Body = match cli.command {
        Command::Fig1 => {
            let table = fig1(&cfg.jc, cfg.figures.fig1_points, exec)?;
            Box::new(move |w| write_table(w, &meta.with("points", cfg.figures.fig1_points), &table))
        }
        Command::Fig2 | Command::Fig3 | Command::Fig4 => {
            let fig = match cli.command {
                Command::Fig2 => Figure::Fig2,
                Command::Fig3 => Figure::Fig3,
                _ => Figure::Fig4,
            };
            let xis = cfg.figures.xi.clone().unwrap_or_else(|| fig.default_xis().to_vec());
            let table = time_series(fig, &cfg.jc, &xis, exec)?;
            let p = &cfg.jc;
            let meta = meta
                .with("jc", format!("omega0 = {}, omega = {}, g = {}, n = {}, d_fock = {}", p.omega0, p.omega, p.g, p.n, p.fock_dim()))
                .with("grid", format!("{} points on [0, {}]", p.steps, p.t_max))
                .with("xi", format!("{xis:?}"));
            Box::new(move |w| write_table(w, &meta, &table))
        }
        Command::Verify => {
            let report = verify(cfg.verify.instances, cfg.seed, exec);
            if !report.passed {
                outcome = Outcome::VerificationFailed;
            }
            Box::new(move |w| {
                meta.write(w)?;
                w.write_all(report.to_toml().as_bytes()).map_err(|e| Error::Config(format!("write failed: {e}")))
            })
        }
        Command::Run => {
            let spec = cfg.scenario.as_ref().ok_or_else(|| Error::Config("run needs a [scenario] table in --config".into()))?;
            let protocol = spec.build()?;
            let traj = run(&protocol, &hash, exec)?;
            Box::new(move |w| write_trajectory(w, &meta, &traj))
        }
    };
    let mut w = sink(&cli.out)?;
    body(&mut *w)?;
    w.flush().map_err(|e| Error::Config(format!("write failed: {e}")))?;
    Ok(outcome)
}
