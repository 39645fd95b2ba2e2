//! `geomac` command-line tool: tables, curves, traces and simulations as CSV/JSON.

mod commands;
mod error;
mod params;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use commands::{child_seed, default_file};
use error::CliError;
use params::{CommonArgs, Params};
use table::Table;

#[derive(Parser, Debug)]
#[command(name = "geomac", version, about = "Spatial reuse of ALOHA and grid MAC schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalized maximum range r1 of a grid pattern
    GridRange(CommonArgs),
    /// ALOHA success probability p(r)
    AlohaCurve(CommonArgs),
    /// ALOHA range maximizing r p(r)
    Optimize(CommonArgs),
    /// Large-threshold limit table
    AsymptBeta(CommonArgs),
    /// Large-exponent limit table
    AsymptAlpha(CommonArgs),
    /// Reception contour vertices and summary
    Trace(CommonArgs),
    /// Grid link success with exponential fading along the diagonal
    FadingCurve(CommonArgs),
    /// Multi-hop relaying simulation
    Simulate(CommonArgs),
    /// ALOHA against the grid patterns, normalized to triangular
    Compare(CommonArgs),
    /// Interference, SIR or membership raster
    Field(CommonArgs),
}

impl Command {
    fn parts(&self) -> (&'static str, &CommonArgs) {
        match self {
            Command::GridRange(a) => ("grid-range", a),
            Command::AlohaCurve(a) => ("aloha-curve", a),
            Command::Optimize(a) => ("optimize", a),
            Command::AsymptBeta(a) => ("asympt-beta", a),
            Command::AsymptAlpha(a) => ("asympt-alpha", a),
            Command::Trace(a) => ("trace", a),
            Command::FadingCurve(a) => ("fading-curve", a),
            Command::Simulate(a) => ("simulate", a),
            Command::Compare(a) => ("compare", a),
            Command::Field(a) => ("field", a),
        }
    }
}

type TableFn = fn(&Params) -> Result<Table, CliError>;

fn table_fn(name: &str) -> Option<TableFn> {
    Some(match name {
        "grid-range" => commands::grid_range_table,
        "aloha-curve" => commands::aloha_curve_table,
        "optimize" => commands::optimize_table,
        "asympt-beta" => commands::asympt_beta_table,
        "asympt-alpha" => commands::asympt_alpha_table,
        "fading-curve" => commands::fading_curve_table,
        "compare" => commands::compare_table,
        "field" => commands::field_table,
        _ => return None,
    })
}

fn output_path(name: &str, args: &CommonArgs, params: &Params) -> PathBuf {
    match &args.out {
        Some(p) => p.clone(),
        None => {
            let dir = std::env::var_os("GEOMAC_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| ".".into());
            dir.join(default_file(name, params.format.unwrap_or_default()))
        }
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let (name, args) = cli.command.parts();
    let params = args.resolve()?;
    let out = output_path(name, args, &params);
    let format = params.format.unwrap_or_default();

    let Some(f) = table_fn(name) else {
        if args.sweep_axis.is_some() {
            return Err(CliError::Invalid(format!("{name} does not support sweeps")));
        }
        return match name {
            "trace" => commands::trace(&params, &out),
            _ => commands::simulate(&params, &out),
        };
    };

    let table = match (&args.sweep_axis, args.sweep_values()?) {
        (Some(axis), Some(values)) => {
            if values.is_empty() {
                return Ok(format!("{name}: empty sweep over {axis}, nothing written"));
            }
            let root = params.seed.unwrap_or(0);
            let parts: Vec<Table> = values
                .par_iter()
                .enumerate()
                .map(|(k, &v)| {
                    let mut p = params.clone();
                    p.set_numeric(axis, v)?;
                    p.seed = Some(child_seed(root, k));
                    let col = format!("sweep_{axis}");
                    Ok(f(&p)?.prefixed(&["sweep_index", &col], &[k.to_string(), table::num(v)]))
                })
                .collect::<Result<_, CliError>>()?;
            let mut all = Table::default();
            for t in parts {
                all.append(t)?;
            }
            all
        }
        _ => f(&params)?,
    };
    table.write(&out, format)?;
    Ok(format!("{name}: {} rows -> {}", table.rows.len(), out.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("geomac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
