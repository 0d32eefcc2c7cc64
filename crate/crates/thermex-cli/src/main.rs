//! `thermex`: command-line front end.
//!
//! Every command writes one JSON document (or a short text summary without
//! `--json`). Exit codes: 0 pass, 1 verification failure, 2 input error,
//! 3 domain error.
// `!(x > 0.0)` is meant to catch NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "thermex",
    version,
    about = "Exact relations and effective tensors of 2D thermoelectric composites"
)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Seed for randomized checks and sampling.
    #[arg(long, global = true, default_value_t = thermex::DEFAULT_SEED)]
    pub seed: u64,
    /// Tolerance; each command documents its default.
    #[arg(long, global = true, value_parser = positive_f64)]
    pub tol: Option<f64>,
    /// Random trials per randomized check.
    #[arg(long, global = true, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Print the full JSON document instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Geometry {
    /// Volume fraction of the first phase in a rank-one laminate.
    #[arg(long = "f", default_value_t = 0.5)]
    pub f: f64,
    /// Layer normal `nx,ny` (normalized).
    #[arg(long, default_value = "1,0", value_parser = parse_normal)]
    pub normal: [f64; 2],
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closure, table, chain and key checks over the whole catalog.
    VerifyAlgebras {
        /// Add a spurious element to one entry (negative control).
        #[arg(long, hide = true)]
        corrupt: Option<i32>,
    },
    /// Membership of a tensor in an exact relation.
    Er {
        /// Exact relation id: 7, 8, 9, 13, 17, 19, 20, 21 or 22.
        #[arg(long = "er")]
        er: i32,
        /// Tensor file.
        file: PathBuf,
    },
    /// A random member of an exact relation, as a tensor file.
    ErSample {
        /// Exact relation id: 7, 8, 9, 13, 17, 19, 20, 21 or 22.
        #[arg(long = "er")]
        er: i32,
        /// Coefficient range of the algebra element behind the sample.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Effective tensor of a laminate tree, or of two phases.
    Laminate {
        /// Two phases or a laminate tree.
        file: PathBuf,
        #[command(flatten)]
        geometry: Geometry,
    },
    /// Case classification and effective tensor of two isotropic phases.
    TwoPhase {
        /// Two isotropic phases and an optional microstructure.
        file: PathBuf,
        #[command(flatten)]
        geometry: Geometry,
    },
    /// The isotropic polycrystal of one crystallite.
    Polycrystal {
        /// Crystallite tensor file.
        file: PathBuf,
        /// Report infeasible roots too.
        #[arg(long)]
        all_roots: bool,
    },
    /// Figure of merit.
    Zt {
        /// Tensor file.
        file: PathBuf,
    },
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn parse_normal(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    match v[..] {
        [x, y] if x.is_finite() && y.is_finite() && x.hypot(y) > 0.0 => {
            Ok([x / x.hypot(y), y / x.hypot(y)])
        }
        _ => Err(format!("expected a nonzero normal nx,ny, got {s:?}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = cli.config.clone();
    let result = match cli.command {
        Command::VerifyAlgebras { corrupt } => commands::verify_algebras(&cfg, corrupt),
        Command::Er { er, file } => commands::er(&cfg, er, &file),
        Command::ErSample { er, scale } => commands::er_sample(&cfg, er, scale),
        Command::Laminate { file, geometry } => commands::laminate(&cfg, &file, &geometry),
        Command::TwoPhase { file, geometry } => commands::two_phase(&cfg, &file, &geometry),
        Command::Polycrystal { file, all_roots } => commands::polycrystal(&cfg, &file, all_roots),
        Command::Zt { file } => commands::zt(&file),
    };
    match result {
        Ok(out) => match commands::emit(&cfg, &out) {
            Ok(()) => ExitCode::from(if out.pass { 0 } else { 1 }),
            Err(e) => {
                eprintln!("thermex: {e}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("thermex: {e}");
            ExitCode::from(e.code())
        }
    }
}
