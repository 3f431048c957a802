//! `loadshed` command-line front end.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use loadshed_core::calibrate::calibrate_base_case;
use loadshed_core::cascade::{load_scenario_file, run_with_network, RunResult, Scenario};
use loadshed_core::model::{load_case_file, to_json, Network};
use loadshed_core::report::{render_report, render_svg, write_csv, Figure, RunSummary};

#[derive(Debug, Parser)]
#[command(
    name = "loadshed",
    version,
    about = "Cascading outage simulation with line-stress load shedding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write traces, event log and report.
    Run(RunArgs),
    /// Balance the slack unit and size line ratings to a target base loading.
    Calibrate {
        /// Case file to calibrate.
        case: PathBuf,
        /// Base-case loading rate every line should sit at.
        #[arg(long, default_value_t = 0.85)]
        target: f64,
        /// Where to write the calibrated case.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a case file and report every violation.
    Validate { case: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ControllerMode {
    On,
    Off,
    Both,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Scenario file.
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario's controller setting.
    #[arg(long, value_enum)]
    controller: Option<ControllerMode>,
    /// Write traces.csv (always on; kept for explicit invocations).
    #[arg(long)]
    csv: bool,
    /// Also write one SVG chart per trace group.
    #[arg(long)]
    svg: bool,
    /// Write the mismatch history of every power-flow solve to solver.log.
    #[arg(long)]
    dump_solver: bool,
    /// Runs are deterministic; nothing is seeded. Accepted for documentation.
    #[arg(long)]
    seed_free: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => run(&args),
        Command::Calibrate { case, target, out } => {
            let network =
                load_case_file(&case).with_context(|| format!("loading {}", case.display()))?;
            let calibrated = calibrate_base_case(&network, target)?;
            fs::write(&out, to_json(&calibrated) + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "calibrated {} lines to {target} -> {}",
                calibrated.n_line(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { case } => {
            let network =
                load_case_file(&case).with_context(|| format!("loading {}", case.display()))?;
            println!(
                "ok: {} buses, {} lines, {} loads, {} generators",
                network.n_bus(),
                network.n_line(),
                network.loads.len(),
                network.generators.len()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(args: &RunArgs) -> Result<ExitCode> {
    if !args.scenario.is_file() {
        bail!("scenario file not found: {}", args.scenario.display());
    }
    let (scenario, network) = load_scenario_file(&args.scenario)
        .with_context(|| format!("loading {}", args.scenario.display()))?;
    let name = args
        .scenario
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let mode = args.controller.unwrap_or(if scenario.controller.enabled {
        ControllerMode::On
    } else {
        ControllerMode::Off
    });
    let variants: Vec<(&str, bool)> = match mode {
        ControllerMode::On => vec![("controller on", true)],
        ControllerMode::Off => vec![("controller off", false)],
        ControllerMode::Both => vec![("controller on", true), ("controller off", false)],
    };

    // The two variants share only the immutable network.
    let results: Vec<RunResult> = std::thread::scope(|s| {
        let handles: Vec<_> = variants
            .iter()
            .map(|&(_, enabled)| {
                let mut sc: Scenario = scenario.clone();
                sc.controller.enabled = enabled;
                let network: &Network = &network;
                s.spawn(move || run_with_network(network, &sc))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("engine thread panicked"))
            .collect()
    });

    let mut summaries = Vec::new();
    let mut blackout = false;
    for ((label, enabled), result) in variants.iter().zip(&results) {
        let dir = if variants.len() > 1 {
            args.out.join(if *enabled {
                "controller-on"
            } else {
                "controller-off"
            })
        } else {
            args.out.clone()
        };
        fs::create_dir_all(&dir)?;
        write_artifacts(&dir, result, args)?;
        let summary = RunSummary::from_run(*label, result);
        if variants.len() > 1 {
            fs::write(
                dir.join("report.md"),
                render_report(&name, std::slice::from_ref(&summary)),
            )?;
        }
        blackout |= result.blackout;
        summaries.push(summary);
    }
    fs::write(args.out.join("report.md"), render_report(&name, &summaries))?;

    for s in &summaries {
        println!(
            "{}: {} sheds ({:.1} MW), {} relay trips, final max rate {:.3}, final df {:.4} Hz",
            s.label,
            s.sheds.len(),
            s.shed_mw,
            s.trips.len(),
            s.final_max_rate,
            s.final_df
        );
    }
    Ok(if blackout {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn write_artifacts(dir: &Path, result: &RunResult, args: &RunArgs) -> Result<()> {
    let csv = fs::File::create(dir.join("traces.csv"))?;
    write_csv(&result.traces, BufWriter::new(csv))?;

    let log = fs::File::create(dir.join("events.log"))?;
    result.log.write_jsonl(BufWriter::new(log))?;

    if args.svg {
        for fig in Figure::ALL {
            let file = fs::File::create(dir.join(format!("{}.svg", fig.file_stem())))?;
            render_svg(
                &result.traces,
                &fig.selection(&result.traces),
                fig.title(),
                BufWriter::new(file),
            )?;
        }
    }
    if args.dump_solver {
        let mut text = String::new();
        for (t, history) in &result.solver_dumps {
            let parts: Vec<String> = history.iter().map(|m| format!("{m:.3e}")).collect();
            text.push_str(&format!("t={t} {}\n", parts.join(" ")));
        }
        fs::write(dir.join("solver.log"), text)?;
    }
    Ok(())
}
