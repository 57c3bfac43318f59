mod commands;
mod input;
mod report;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use report::{Recorder, Status};

#[derive(Parser, Debug)]
#[command(
    name = "forestcalc",
    version,
    about = "Exact forest, cluster, Mayer and fermionic expansion checks"
)]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized sweep.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Enumerate labeled trees on n vertices.
    Trees(TreesArgs),
    /// Weakening matrix and positivity certificate of a weighted forest.
    Weaken(WeakenArgs),
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Polymer activities of a Gaussian box model.
    Cluster(ClusterArgs),
    /// Mayer series of a one-dimensional interval gas.
    Mayer(MayerArgs),
    /// Pressure coefficients of an N-color Grassmann model.
    Fermion(FermionArgs),
    /// Slice kernels, decay fits and generated covariances.
    Propagator(PropagatorArgs),
    /// The full acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Args, Debug, Serialize)]
struct TreesArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    count_only: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum WeakenRule {
    Symmetric,
    Rooted,
}

#[derive(Args, Debug, Serialize)]
struct WeakenArgs {
    /// Links as JSON (inline or file): [[1,2],[2,3]] or {"n": 4, "links": [...]}.
    #[arg(long)]
    forest: String,
    /// One weight per link, as JSON strings "p/q".
    #[arg(long)]
    weights: String,
    #[arg(long, value_enum, default_value_t = WeakenRule::Symmetric)]
    rule: WeakenRule,
    /// Vertex count, if larger than the largest vertex in the forest.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VerifyCommand {
    /// Compare the forest sums with H(1) on random polynomials.
    ForestFormula(ForestFormulaArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RuleChoice {
    All,
    Symmetric,
    Rooted,
    Ordered,
}

#[derive(Args, Debug, Serialize)]
struct ForestFormulaArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    degree: u32,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = RuleChoice::All)]
    rule: RuleChoice,
}

#[derive(Args, Debug, Serialize)]
struct ClusterArgs {
    /// {"boxes": n, "covariance": [["1","1/2"],…], "order": p}, inline or a file.
    #[arg(long)]
    model: String,
    /// Overrides the order in the model file.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    verify: bool,
}

#[derive(Args, Debug, Serialize)]
struct MayerArgs {
    /// `1d:<n>`: n boxes on a line, polymers are intervals.
    #[arg(long)]
    lattice: String,
    #[arg(long)]
    polymer_max: usize,
    /// Activity of every polymer, "p/q".
    #[arg(long)]
    activity: String,
    #[arg(long)]
    grade: usize,
    #[arg(long)]
    verify: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SignChoice {
    Plus,
    Minus,
}

#[derive(Args, Debug, Serialize)]
struct FermionArgs {
    #[arg(long)]
    sites: usize,
    #[arg(long)]
    colors: usize,
    #[arg(long)]
    order: usize,
    /// {"sites": L, "covariance": [[…]], "factorization": {"D": …, "E": …}}.
    #[arg(long)]
    propagator: String,
    /// Sign of the action in the weight e^{±S}.
    #[arg(long, value_enum, default_value_t = SignChoice::Plus)]
    sign: SignChoice,
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    sign_audit: bool,
}

#[derive(Args, Debug, Serialize)]
struct PropagatorArgs {
    #[arg(long)]
    dim: u32,
    #[arg(long)]
    ratio: f64,
    /// Slice index j, or `single` for the band [1/M, 1].
    #[arg(long)]
    slice: String,
    #[arg(long, default_value_t = 0.0)]
    mass: f64,
    /// Fit K for slices 0..=j-max under both prefactor conventions.
    #[arg(long)]
    fit_decay: bool,
    #[arg(long, default_value_t = 5)]
    j_max: u32,
    /// Box centers as JSON [[x, y], …]; emits a rational covariance.
    #[arg(long)]
    emit_covariance: Option<String>,
    /// Rounding denominator for emitted covariances.
    #[arg(long, default_value_t = 1_000_000)]
    denominator: u64,
    /// Largest diagonal shift accepted to restore positivity.
    #[arg(long, default_value_t = 1e-6)]
    shift_tolerance: f64,
    /// Order recorded in the emitted model file.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Also write the emitted model file here.
    #[arg(long)]
    covariance_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SuiteArgs {
    /// Reduced sizes, for a fast smoke run.
    #[arg(long)]
    quick: bool,
}

fn run(cli: &Cli, rec: &mut Recorder) -> anyhow::Result<()> {
    match &cli.command {
        Command::Trees(a) => commands::trees(a, rec),
        Command::Weaken(a) => commands::weaken(a, rec),
        Command::Verify(VerifyCommand::ForestFormula(a)) => commands::forest_formula(a, cli.seed, rec),
        Command::Cluster(a) => commands::cluster(a, rec),
        Command::Mayer(a) => commands::mayer(a, rec),
        Command::Fermion(a) => commands::fermion(a, rec),
        Command::Propagator(a) => commands::propagator(a, rec),
        Command::Suite(a) => suite::run(a.quick, cli.seed, rec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut rec = Recorder::default();
    if let Some(out) = &cli.out {
        rec.artifacts.push(out.display().to_string());
    }
    if let Err(e) = run(&cli, &mut rec) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let config = serde_json::json!({ "command": &cli.command, "seed": cli.seed });
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let report = rec.finish(argv, &config);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{text}"),
    }
    match report.status {
        Status::Pass => ExitCode::SUCCESS,
        Status::Fail => ExitCode::from(1),
    }
}
