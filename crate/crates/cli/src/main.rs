use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rtchain::analysis::{analyze, end_to_end_wcrt, AnalysisConfig};
use rtchain::gantt::{render_svg, render_text};
use rtchain::model::{validate, SystemModel, Tick};
use rtchain::report::ReportDocument;
use rtchain::sim::{adversarial_scenario, default_horizon, simulate, sweep_with, JitterPolicy, Scenario, SweepOptions};

/// Exit status contract: 0 success or schedulable, 1 negative verdict,
/// 2 usage or I/O failure.
const EXIT_NEGATIVE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "rtchain",
    version,
    about = "Schedulability analysis for run-to-completion real-time designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum JitterArg {
    Zero,
    Max,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Adversarial,
    Aligned,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum GanttFormat {
    Svg,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model.
    Check { path: PathBuf },
    /// Compute worst-case end-to-end response times.
    Analyze {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        /// Divergence bound for busy windows (default: 10 × hyperperiod).
        #[arg(long)]
        max_window: Option<Tick>,
        /// Include per-job stage bounds.
        #[arg(long)]
        stages: bool,
    },
    /// Run the discrete-event simulator over seeded scenarios.
    Simulate {
        path: PathBuf,
        #[arg(long)]
        duration: Option<Tick>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        scenarios: u64,
        #[arg(long, value_enum, default_value = "random")]
        jitter: JitterArg,
        /// Run only the adversarial phasings.
        #[arg(long)]
        adversarial: bool,
    },
    /// Render a simulated timeline.
    Gantt {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "adversarial")]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        duration: Option<Tick>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "svg")]
        format: GanttFormat,
    },
}

struct Failure(u8, String);

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { path } => cmd_check(&path),
        Command::Analyze {
            path,
            format,
            max_window,
            stages,
        } => cmd_analyze(&path, format, max_window, stages),
        Command::Simulate {
            path,
            duration,
            seed,
            scenarios,
            jitter,
            adversarial,
        } => cmd_simulate(&path, duration, seed, scenarios, jitter, adversarial),
        Command::Gantt {
            path,
            scenario,
            seed,
            duration,
            out,
            format,
        } => cmd_gantt(&path, scenario, seed, duration, out.as_deref(), format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, message)) => {
            eprintln!("{message}");
            ExitCode::from(code)
        }
    }
}

fn load(path: &Path) -> Result<SystemModel, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    rtchain::parse(&text).map_err(|e| Failure(EXIT_NEGATIVE, format!("{}:{e}", path.display())))
}

fn load_valid(path: &Path) -> Result<SystemModel, Failure> {
    let model = load(path)?;
    let report = validate(&model);
    if report.is_clean() {
        Ok(model)
    } else {
        let lines: Vec<String> = report
            .diagnostics
            .iter()
            .map(|d| format!("{}: {d}", path.display()))
            .collect();
        Err(Failure(EXIT_NEGATIVE, lines.join("\n")))
    }
}

fn cmd_check(path: &Path) -> CmdResult {
    let model = load_valid(path)?;
    println!(
        "{}: ok ({} transactions, {} actions, {} events)",
        path.display(),
        model.transactions.len(),
        model.actions().count(),
        model.events().len()
    );
    Ok(0)
}

fn cmd_analyze(path: &Path, format: ReportFormat, max_window: Option<Tick>, stages: bool) -> CmdResult {
    let model = load_valid(path)?;
    if max_window == Some(0) {
        return Err(Failure(EXIT_USAGE, "--max-window must be positive".into()));
    }
    let config = AnalysisConfig { max_window, stages };
    let report = analyze(&model, &config).map_err(|e| Failure(EXIT_NEGATIVE, e.to_string()))?;
    let doc = ReportDocument::new(&model, &config, &report);
    match format {
        ReportFormat::Json => println!("{}", doc.to_json()),
        ReportFormat::Text => print!("{}", doc.to_text()),
    }
    Ok(if report.schedulable() { 0 } else { EXIT_NEGATIVE })
}

fn cmd_simulate(
    path: &Path,
    duration: Option<Tick>,
    seed: u64,
    scenarios: u64,
    jitter: JitterArg,
    adversarial: bool,
) -> CmdResult {
    let model = load_valid(path)?;
    let options = SweepOptions {
        count: if adversarial { 0 } else { scenarios },
        seed,
        duration,
        jitter: match jitter {
            JitterArg::Zero => JitterPolicy::Zero,
            JitterArg::Max => JitterPolicy::Max,
            JitterArg::Random => JitterPolicy::Random,
        },
        adversarial: true,
    };
    let summary = sweep_with(&model, &options).map_err(|e| Failure(EXIT_NEGATIVE, e.to_string()))?;
    println!("model: {}", model.name);
    println!("scenarios: {}", summary.scenarios);
    let config = AnalysisConfig::default();
    let width = summary
        .transactions
        .iter()
        .map(|t| t.transaction.len())
        .max()
        .unwrap_or(0)
        .max(11);
    println!(
        "{:<width$}  {:>8}  {:>8}  {:>8}  {:>9}  {:>6}",
        "transaction", "observed", "wcrt", "deadline", "instances", "misses"
    );
    for t in &summary.transactions {
        let wcrt = end_to_end_wcrt(&model, &t.transaction, &config)
            .ok()
            .and_then(|r| r.wcrt)
            .map_or_else(|| "-".to_owned(), |w| w.to_string());
        let observed = t.max_response.map_or_else(|| "-".to_owned(), |w| w.to_string());
        println!(
            "{:<width$}  {:>8}  {:>8}  {:>8}  {:>9}  {:>6}",
            t.transaction, observed, wcrt, t.deadline, t.instances, t.misses
        );
    }
    let misses = summary.misses();
    println!("deadline misses: {misses}");
    Ok(if misses > 0 { EXIT_NEGATIVE } else { 0 })
}

fn cmd_gantt(
    path: &Path,
    scenario: ScenarioArg,
    seed: u64,
    duration: Option<Tick>,
    out: Option<&Path>,
    format: GanttFormat,
) -> CmdResult {
    let model = load_valid(path)?;
    let horizon = duration.unwrap_or_else(|| default_horizon(&model));
    let (label, mut scenario) = match scenario {
        ScenarioArg::Adversarial => ("adversarial", adversarial_scenario(&model)),
        ScenarioArg::Aligned => ("aligned", Scenario::aligned(&model, horizon, JitterPolicy::Zero)),
        ScenarioArg::Random => ("random", Scenario::random(&model, horizon, seed, JitterPolicy::Random)),
    };
    if let Some(d) = duration {
        scenario.duration = d;
    }
    let trace = simulate(&model, &scenario).map_err(|e| Failure(EXIT_NEGATIVE, e.to_string()))?;
    let body = match format {
        GanttFormat::Svg => render_svg(&trace, &format!("{} ({label} scenario)", model.name)),
        GanttFormat::Text => render_text(&trace),
    };
    match out {
        Some(file) => fs::write(file, body).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", file.display())))?,
        None => print!("{body}"),
    }
    Ok(0)
}
