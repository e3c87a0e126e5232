use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sherman_bounds::cli::{parse_interval, run, CliError, Command, ModulusChoice, Report, RunConfig};

/// Certified Sherman-type bounds, divergence sandwiches, majorization checks
/// and Fink-identity verification from JSON or CSV input.
#[derive(Debug, Parser)]
#[command(name = "sherman-bounds", version)]
struct Args {
    /// chain | divergence | majorize | verify-identity
    command: Command,

    #[arg(long)]
    input: PathBuf,

    /// Report destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Function name (chain, verify-identity) or divergence kernel.
    #[arg(long)]
    kernel: Option<String>,

    /// Rényi order.
    #[arg(long)]
    alpha: Option<f64>,

    /// Domain as `a,b`.
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    interval: Option<(f64, f64)>,

    /// `auto` or an explicit strong-convexity modulus.
    #[arg(long, default_value = "auto")]
    modulus: ModulusChoice,

    #[arg(long, default_value_t = 2)]
    order: usize,

    /// Absolute quadrature tolerance.
    #[arg(long = "quad-tol", default_value_t = 1e-9)]
    quad_tol: f64,

    #[arg(long, default_value_t = 10_001)]
    grid: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("SHERMAN_BOUNDS_LOG", "warn")).init();
    let args = Args::parse();
    let config = RunConfig {
        command: args.command,
        input_path: args.input,
        kernel_name: args.kernel,
        alpha: args.alpha,
        interval: args.interval,
        modulus: args.modulus,
        order_n: args.order,
        quad_abs_tol: args.quad_tol,
        grid_size: args.grid,
        seed: args.seed,
        output_path: args.output,
    };
    let report = match run(&config) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("sherman-bounds: {err}");
            Report::from_error(&config, &err)
        }
    };
    let text = report.to_json();
    match &config.output_path {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                let err = CliError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                };
                eprintln!("sherman-bounds: {err}");
                return ExitCode::from(err.exit_code() as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code as u8)
}
