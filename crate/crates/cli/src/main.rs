use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chronolab::history::TimeGrid;
use chronolab::scenario::{
    build_mach_zehnder, parse_scenario, run_scenario, AnalysisSpec, LgiMode, LgiSpec, MonogamySpec, Report,
    ScenarioSpec,
};
use clap::{Parser, Subcommand, ValueEnum};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (scenario format 1)");

#[derive(Parser, Debug)]
#[command(name = "chronolab", version = VERSION, about = "Entangled-history scenarios and reports")]
struct Cli {
    /// Override the tolerance of every analysis.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the seed of every seeded analysis.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the restart count of every optimizer.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the consistency analyses of a scenario file.
    Consistency { file: PathBuf },
    /// Run the reduce analyses of a scenario file.
    Reduce { file: PathBuf },
    /// See-saw maximization of the temporal CHSH functional.
    LgiMax {
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Seeded search for a history maximally entangled on both adjacent pairs.
    MonogamySearch {
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Mach-Zehnder interferometer demonstration.
    MzDemo,
    /// Run every analysis of a scenario file.
    Run { file: PathBuf },
}

fn load(path: &Path, keep: Option<&str>) -> Result<ScenarioSpec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut spec = parse_scenario(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(kind) = keep {
        spec.analyses.retain(|a| a.kind() == kind);
        if spec.analyses.is_empty() {
            return Err(format!("{}: no `{kind}` analysis in scenario", path.display()));
        }
    }
    Ok(spec)
}

fn synthetic(name: &str, labels: usize, dim: usize, analysis: AnalysisSpec) -> Result<ScenarioSpec, String> {
    if !(2..=8).contains(&dim) {
        return Err(format!("--dim must be in 2..=8, got {dim}"));
    }
    let grid = TimeGrid::sequential(1, labels, dim).map_err(|e| e.to_string())?;
    Ok(ScenarioSpec {
        name: name.into(),
        bridges: vec![None; labels - 1],
        grid,
        operators: Vec::new(),
        histories: Vec::new(),
        analyses: vec![analysis],
    })
}

fn build(cli: &Cli) -> Result<ScenarioSpec, String> {
    match &cli.command {
        Command::Consistency { file } => load(file, Some("consistency")),
        Command::Reduce { file } => load(file, Some("reduce")),
        Command::Run { file } => load(file, None),
        Command::MzDemo => Ok(build_mach_zehnder()),
        Command::LgiMax { dim } => synthetic(
            "lgi-max",
            2,
            *dim,
            AnalysisSpec::Lgi(LgiSpec {
                mode: LgiMode::Seesaw { restarts: 16, seed: 0, optimize_state: false, restrict_diagonal: false },
                at: None,
                rho: None,
                expected: Some(2.0 * 2f64.sqrt()),
                tol: 1e-6,
            }),
        ),
        Command::MonogamySearch { dim } => synthetic(
            "monogamy-search",
            3,
            *dim,
            AnalysisSpec::Monogamy(MonogamySpec {
                dim: *dim,
                restarts: 64,
                seed: 0,
                threshold: 0.95,
                expected: None,
                tol: 0.0,
            }),
        ),
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Structured => report.to_structured(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.tol.is_some_and(|t| !(t.is_finite() && t >= 0.0)) || cli.restarts == Some(0) {
        eprintln!("error: --tol must be a non-negative number and --restarts at least 1");
        return ExitCode::from(2);
    }
    let mut spec = match build(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    spec.apply_overrides(cli.tol, cli.seed, cli.restarts);
    let report = match run_scenario(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = render(&report, cli.format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
