//! `trajrisk` command-line front end.
//!
//! Exit status: 0 on success, 1 for invalid input or usage, 2 when a
//! numerical routine fails.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trajrisk::cli_io::{
    compare_methods, comparison_text, dump_treering, load_scenario, report_csv, report_json, run_assess,
    run_oracle, AgentPrediction, AssessOptions, Comparison, Scenario,
};
use trajrisk::method::{parse_method_list, Method};
use trajrisk::par::Execution;
use trajrisk::risk_engine::RiskConfig;
use trajrisk::Error;

#[derive(Parser)]
#[command(name = "trajrisk", version, about = "Collision risk for multimodal trajectory predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate risk methods on every agent of a scenario.
    Assess(RunArgs),
    /// Tabulate methods against the exact or sampled reference.
    Compare(RunArgs),
    /// Monte Carlo estimate only.
    Oracle(RunArgs),
    /// Print the generated Dubins moment recursions.
    TreeringDump {
        /// Highest total degree of the tracked position moments.
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Comma separated; `sos` stands for the degree given by --sos-degree.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Absolute error target of the Imhof integration.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 12)]
    halfspaces: usize,
    #[arg(long, default_value_t = 4, value_parser = parse_sos_degree)]
    sos_degree: u8,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; `compare` prints a text table when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

fn parse_sos_degree(s: &str) -> Result<u8, String> {
    match s {
        "2" | "4" | "6" => Ok(s.parse().expect("digit")),
        _ => Err(format!("expected 2, 4 or 6, got `{s}`")),
    }
}

impl RunArgs {
    fn options(&self) -> Result<AssessOptions, Error> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Validation(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(AssessOptions {
            config: RiskConfig {
                imhof_tol: self.tol,
                halfspaces: self.halfspaces,
                mc_samples: self.mc_samples,
                seed: self.seed,
            },
            exec: if self.sequential { Execution::Sequential } else { Execution::Parallel },
            oracle: false,
        })
    }

    fn methods(&self, sc: &Scenario) -> Result<Vec<Method>, Error> {
        let sos = format!("sos-d{}", self.sos_degree);
        let list = match &self.methods {
            Some(l) => l.clone(),
            // Gaussian-only methods cannot evaluate control agents
            None if sc.agents.iter().any(|a| matches!(a, AgentPrediction::Control { .. })) => {
                "chebyshev-quad,chebyshev-halfspace,sos".into()
            }
            None => "imhof,ltz,chebyshev-quad,chebyshev-halfspace,sos".into(),
        };
        let expanded: Vec<&str> = list
            .split(',')
            .map(|m| if m.trim() == "sos" { sos.as_str() } else { m })
            .collect();
        parse_method_list(&expanded.join(","))
    }
}

fn comparison_csv(c: &Comparison) -> String {
    let mut out = String::from("method,is_upper_bound,mean_total,max_abs_diff,total_ms\n");
    for r in &c.rows {
        out.push_str(&format!(
            "{},{},{:e},{},{}\n",
            r.method,
            r.is_upper_bound,
            r.mean_total,
            r.max_abs_diff.map(|d| format!("{d:e}")).unwrap_or_default(),
            r.total_ms
        ));
    }
    out
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Io(e.to_string()))
        }
    }
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Assess(args) => {
            let sc = load_scenario(&args.scenario)?;
            let report = run_assess(&sc, &args.methods(&sc)?, &args.options()?)?;
            let text = match args.format.unwrap_or(Format::Json) {
                Format::Json => report_json(&report) + "\n",
                Format::Csv => report_csv(&report),
            };
            emit(&text, args.out.as_ref())
        }
        Command::Compare(args) => {
            let sc = load_scenario(&args.scenario)?;
            let report = run_assess(&sc, &args.methods(&sc)?, &args.options()?)?;
            let c = compare_methods(&report);
            let text = match args.format {
                None => comparison_text(&c),
                Some(Format::Json) => serde_json::to_string_pretty(&c).expect("comparison serializes") + "\n",
                Some(Format::Csv) => comparison_csv(&c),
            };
            emit(&text, args.out.as_ref())
        }
        Command::Oracle(args) => {
            let sc = load_scenario(&args.scenario)?;
            let report = run_oracle(&sc, &args.options()?)?;
            let text = match args.format.unwrap_or(Format::Json) {
                Format::Json => report_json(&report) + "\n",
                Format::Csv => report_csv(&report),
            };
            emit(&text, args.out.as_ref())
        }
        Command::TreeringDump { order, out } => emit(&dump_treering(order)?, out.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
