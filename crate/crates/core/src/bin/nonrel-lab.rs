use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nonrel_lab::config::{parse_config, Mode, StudyConfig, DEFAULTS_HELP};
use nonrel_lab::output::{run_reports, run_strichartz_pair, ReportOutcome};
use nonrel_lab::LabError;

#[derive(Parser)]
#[command(
    name = "nonrel-lab",
    about = "c-sweep comparison studies, exact coefficient derivations, decay and spacetime-norm probes",
    after_help = DEFAULTS_HELP
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// flat key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// config assignments applied after the file, e.g. --override seed=9
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact slow-flow coefficient tables with adjudication lines
    Derive {
        #[command(flatten)]
        common: Common,
        /// nonlinearity half-degree
        #[arg(long)]
        l: Option<u32>,
    },
    /// One wave-solver run with a diagnostics manifest
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        r: Option<usize>,
        /// solver step at this c (sets dt0 = dt * c^2)
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "T")]
        t_end: Option<f64>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long = "L")]
        box_len: Option<f64>,
        /// comparison norm H^k
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        amplitude: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// write per-sample field CSVs
        #[arg(long)]
        snapshots: bool,
    },
    /// Two-solver c-sweep with log-log slope fits
    Converge {
        #[command(flatten)]
        common: Common,
    },
    /// Band-filtered free-kernel decay fits
    Dispersion {
        #[command(flatten)]
        common: Common,
    },
    /// Spacetime-norm ratio table and admissibility checks
    Strichartz {
        #[command(flatten)]
        common: Common,
        /// time exponent ("inf" allowed); needs --q
        #[arg(long)]
        p: Option<String>,
        /// space exponent ("inf" allowed); needs --p
        #[arg(long)]
        q: Option<String>,
    },
}

fn load(common: &Common, mode: Mode) -> Result<StudyConfig, LabError> {
    let mut cfg = match &common.config {
        Some(path) => parse_config(path)?,
        None => StudyConfig::new(mode),
    };
    cfg.mode = mode;
    for ov in &common.overrides {
        let (k, v) = ov.split_once('=').ok_or_else(|| {
            LabError::config(format!("override \"{ov}\" is not of the form key=value"))
        })?;
        cfg.set(k.trim(), v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_exp(s: &str) -> Result<f64, LabError> {
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    s.parse()
        .map_err(|_| LabError::config(format!("exponent \"{s}\" is not a number or \"inf\"")))
}

fn run(cli: Cli) -> Result<ReportOutcome, LabError> {
    match cli.cmd {
        Cmd::Derive { common, l } => {
            let mut cfg = load(&common, Mode::Derive)?;
            if let Some(l) = l {
                cfg.l = l;
            }
            run_reports(&cfg)
        }
        Cmd::Evolve {
            common,
            c,
            lambda,
            l,
            r,
            dt,
            t_end,
            n,
            box_len,
            k,
            seed,
            amplitude,
            output,
            snapshots,
        } => {
            let mut cfg = load(&common, Mode::Evolve)?;
            if let Some(c) = c {
                cfg.c_list = vec![c];
            }
            if let Some(v) = lambda {
                cfg.lambda = v;
            }
            if let Some(v) = l {
                cfg.l = v;
            }
            if let Some(v) = r {
                cfg.r = v;
            }
            if let Some(v) = dt {
                let c0 = cfg.c_list[0];
                cfg.dt0 = v * c0 * c0;
            }
            if let Some(v) = t_end {
                cfg.t_rule = nonrel_lab::config::TRule::Fixed;
                cfg.t_fixed = v;
            }
            if let Some(v) = n {
                cfg.n = v;
            }
            if let Some(v) = box_len {
                cfg.box_len = v;
            }
            if let Some(v) = k {
                cfg.sobolev_k = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = amplitude {
                cfg.amplitude = v;
            }
            if let Some(v) = output {
                cfg.output_dir = v;
            }
            if snapshots {
                cfg.snapshots = true;
            }
            cfg.validate()?;
            run_reports(&cfg)
        }
        Cmd::Converge { common } => run_reports(&load(&common, Mode::Converge)?),
        Cmd::Dispersion { common } => run_reports(&load(&common, Mode::Dispersion)?),
        Cmd::Strichartz { common, p, q } => {
            let cfg = load(&common, Mode::Strichartz)?;
            match (p, q) {
                (Some(p), Some(q)) => run_strichartz_pair(&cfg, parse_exp(&p)?, parse_exp(&q)?),
                (None, None) => run_reports(&cfg),
                _ => Err(LabError::config("--p and --q must be given together")),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for p in &outcome.paths {
                println!("{}", p.display());
            }
            if let Some(msg) = outcome.aborted {
                eprintln!("solver abort: {msg}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                LabError::Config(_) | LabError::Invalid(_) => 1,
                LabError::Solver(_) => 2,
                LabError::Io(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}
