//! `chamberflow`: command-line front end for the Weyl chamber toolkit.
//!
//! Exit status is 0 on success, 2 when the mathematics refuses (a failed certificate, a
//! direction outside the cone, an infeasible target) and 1 on errors.

mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::{KindArg, ProjectionKind};
use config::RunConfig;
use error::CliError;
use output::{render_json, write_file, Outcome};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "chamberflow", version, about = "Projections, Schottky certificates, limit cones and mixing witnesses in SL(d, R)")]
struct Cli {
    /// JSON run configuration; defaults to the bundled SL(3, R) example.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every sampled grid and corpus, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write the JSON result here (relative paths resolve against CHAMBERFLOW_OUT_DIR).
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Write the CSV table, for commands that produce one.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct MatrixInput {
    /// JSON file with a row-major matrix, or `-` for standard input.
    input: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cartan, Jordan or Iwasawa projection of a matrix.
    Project {
        #[arg(long, value_enum)]
        kind: ProjectionKind,
        #[command(flatten)]
        input: MatrixInput,
    },
    /// The k-th exterior power of a matrix.
    Rep {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        input: MatrixInput,
    },
    /// Certify that a matrix (or its k-th exterior power) is (r, eps)-proximal.
    Certify {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        input: MatrixInput,
    },
    /// Strong Schottky certification and product estimates for words in the generators.
    Schottky {
        #[command(subcommand)]
        action: SchottkyAction,
    },
    /// Hopf coordinates of a matrix.
    Hopf {
        #[command(flatten)]
        input: MatrixInput,
    },
    /// Hopf coordinates of a matrix moved by the Weyl chamber flow.
    Flow {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[command(flatten)]
        input: MatrixInput,
    },
    /// Limit cone sampling and membership.
    Cone {
        #[command(subcommand)]
        action: ConeAction,
    },
    /// Density checks, completion and nonnegative integer approximation.
    Dense {
        #[command(subcommand)]
        action: DenseAction,
    },
    /// Mixing witnesses for the Weyl chamber flow.
    Mix {
        #[command(subcommand)]
        action: MixAction,
    },
}

#[derive(Debug, Subcommand)]
enum SchottkyAction {
    /// Certify a family of words (default: the generators).
    Certify {
        /// Comma-separated words such as `1 2,1,2`.
        #[arg(long)]
        words: Option<String>,
    },
    /// Compare the Jordan projection of a word in the family with its product estimate.
    Estimate {
        #[arg(long)]
        words: Option<String>,
        /// Word in the family letters, such as `1^3 2^5 1^2`.
        #[arg(long)]
        word: String,
    },
}

#[derive(Debug, Subcommand)]
enum ConeAction {
    /// Rays (CSV) and facets (JSON) of the sampled cone.
    Sample {
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value = "jordan")]
        kind: KindArg,
    },
    /// Whether theta lies in the sampled cone with the given facet slack.
    Contains {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, value_enum, default_value = "jordan")]
        kind: KindArg,
    },
}

#[derive(Debug, Subcommand)]
enum DenseAction {
    /// Estimate the covering radius of the generated subgroup.
    Check {
        #[arg(long)]
        eps: Option<f64>,
        input: PathBuf,
    },
    /// Choose at most 2d extra generators making the basis lattice eps-dense.
    Complete {
        #[arg(long)]
        eps: Option<f64>,
        input: PathBuf,
    },
    /// Nonnegative integer combination close to a target.
    Approx {
        #[arg(long)]
        eta: Option<f64>,
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum MixAction {
    /// One witness with Jordan projection near x + t theta.
    Witness {
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Witnesses and overlap points over a grid of times (default: 21 points from T).
    Demo {
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long = "t-grid")]
        t_grid: Option<String>,
        /// Cartan centre of U.
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
        /// Cartan centre of V.
        #[arg(long, allow_hyphen_values = true)]
        v: Option<String>,
        #[arg(long)]
        eta: Option<f64>,
    },
}

fn dispatch(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Project { kind, input } => commands::project(&input.input, kind),
        Command::Rep { k, input } => commands::rep(&input.input, k),
        Command::Certify { r, eps, grid, k, input } => commands::certify(
            &input.input,
            r.unwrap_or(cfg.tol("r")),
            eps.unwrap_or(cfg.tol("eps")),
            grid.unwrap_or(cfg.cap("grid_n") as usize),
            k,
        ),
        Command::Schottky { action } => match action {
            SchottkyAction::Certify { words } => commands::schottky_certify(cfg, words.as_deref()),
            SchottkyAction::Estimate { words, word } => commands::schottky_estimate(cfg, words.as_deref(), &word),
        },
        Command::Hopf { input } => commands::hopf(&input.input),
        Command::Flow { theta, t, input } => commands::flow(&input.input, &theta, t),
        Command::Cone { action } => match action {
            ConeAction::Sample { depth, kind } => commands::cone_sample(cfg, depth, kind),
            ConeAction::Contains { theta, slack, depth, kind } => {
                commands::cone_contains(cfg, depth, kind, &theta, slack.unwrap_or(cfg.tol("slack")))
            }
        },
        Command::Dense { action } => match action {
            DenseAction::Check { eps, input } => commands::dense_check(cfg, &input, eps),
            DenseAction::Complete { eps, input } => commands::dense_complete(cfg, &input, eps),
            DenseAction::Approx { eta, input } => commands::dense_approx(cfg, &input, eta),
        },
        Command::Mix { action } => match action {
            MixAction::Witness { theta, x, t, eta } => commands::mix_witness(cfg, theta.as_deref(), x.as_deref(), t, eta),
            MixAction::Demo { theta, t_grid, u, v, eta } => {
                commands::mix_demo(cfg, theta.as_deref(), t_grid.as_deref(), u.as_deref(), v.as_deref(), eta)
            }
        },
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.json.is_some() {
        cfg.output.json = cli.json.clone();
    }
    if cli.csv.is_some() {
        cfg.output.csv = cli.csv.clone();
    }
    let outcome = dispatch(cli.command, &cfg)?;
    let text = render_json(&outcome.json);
    print!("{text}");
    if let Some(path) = &cfg.output.json {
        write_file(path, &text)?;
    }
    if let (Some(path), Some(table)) = (&cfg.output.csv, &outcome.csv) {
        write_file(path, &table.render())?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) if o.refused => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("{}", render_json(&e.to_json()));
            ExitCode::from(1)
        }
    }
}
