//! `helilab` — configuration-driven experiment runner for the discrete
//! minimal-surface laboratory.
//!
//! Each subcommand drives one pipeline stage (or the whole staged run) with
//! file-based inputs and outputs under a single output directory. Exit codes:
//! 0 all requested verifications pass, 1 a verification failed, 2 the solver
//! did not converge, 3 configuration or input errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use helilab::config::{Backend, ConfigMap, ExperimentConfig, Stage};
use helilab::mesh::{export_obj, export_ply, import_obj, import_ply, TriMesh};
use helilab::pipeline::{run, run_sweep, verify_mesh, PipelineError, RunOutcome};

#[derive(Parser)]
#[command(name = "helilab", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every stage-driving subcommand.
#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment configuration file (flat key-value text with [sections]).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (meshes/, reports/, summary.txt land here).
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Stages to run, overriding the config (e.g. --stage seed --stage solve).
    #[arg(long = "stage", value_name = "NAME")]
    stages: Vec<String>,

    /// Worker threads (1 is the byte-reproducible reference mode).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,

    /// Deterministic seed recorded in the resolved config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshFormat {
    Obj,
    Ply,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Gradient,
    Newton,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured stage list (default: the full pipeline).
    Run(RunArgs),
    /// Write the helicoidal boundary contour as a GAMMA text file.
    GenBoundary(RunArgs),
    /// Minimise area over the saved seed mesh.
    Solve {
        #[command(flatten)]
        args: RunArgs,
        /// Solver backend, overriding the config.
        #[arg(long)]
        backend: Option<BackendArg>,
    },
    /// Weld the solved disk into its genus-one double.
    Assemble(RunArgs),
    /// Run the verification battery; with --mesh, check an external surface.
    Verify {
        #[command(flatten)]
        args: RunArgs,
        /// Externally produced mesh (.ply or .obj) to verify stand-alone.
        #[arg(long, value_name = "PATH")]
        mesh: Option<PathBuf>,
    },
    /// Re-run the pipeline across the configured radius sweep.
    Sweep(RunArgs),
    /// Convert a mesh between the supported interchange formats.
    Export {
        /// Input mesh (.ply or .obj).
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Output path.
        #[arg(long, value_name = "PATH")]
        output: PathBuf,
        /// Output format.
        #[arg(long, value_enum)]
        format: MeshFormat,
    },
}

fn load_config(args: &RunArgs, forced: Option<Vec<Stage>>) -> Result<ExperimentConfig, i32> {
    let mut map = match &args.config {
        Some(path) => ConfigMap::from_file(path).map_err(report_config)?,
        None => ConfigMap::parse("").unwrap(),
    };
    map.apply_env(std::env::vars());
    if let Some(threads) = args.threads {
        map.set("threads", threads);
    }
    if let Some(seed) = args.seed {
        map.set("seed", seed);
    }
    let mut cfg = ExperimentConfig::from_map(&map).map_err(report_config)?;
    if let Some(stages) = forced {
        cfg.stages = stages;
    } else if !args.stages.is_empty() {
        let mut stages = Vec::new();
        for name in &args.stages {
            stages.push(Stage::parse(name).map_err(report_config)?);
        }
        cfg.stages = stages;
    }
    Ok(cfg)
}

fn report_config(err: impl std::fmt::Display) -> i32 {
    eprintln!("helilab: configuration error: {err}");
    3
}

fn report_pipeline(err: PipelineError) -> i32 {
    eprintln!("helilab: {err}");
    err.exit_code()
}

fn finish(outcome: RunOutcome) -> i32 {
    if let Some(summary) = &outcome.summary {
        print!("{}", summary.to_text());
    }
    outcome.exit_code()
}

fn staged(args: &RunArgs, forced: Option<Vec<Stage>>) -> Result<i32, i32> {
    let cfg = load_config(args, forced)?;
    let outcome = run(&cfg, &args.out).map_err(report_pipeline)?;
    Ok(finish(outcome))
}

fn import_any(path: &Path) -> Result<TriMesh, i32> {
    let loaded = match path.extension().and_then(|e| e.to_str()) {
        Some("obj") => import_obj(path),
        _ => import_ply(path),
    };
    loaded.map_err(|e| {
        eprintln!("helilab: cannot read {}: {e}", path.display());
        3
    })
}

fn execute(cli: Cli) -> Result<i32, i32> {
    match cli.command {
        Command::Run(args) => staged(&args, None),
        Command::GenBoundary(args) => staged(&args, Some(vec![Stage::GenBoundary])),
        Command::Solve { args, backend } => {
            let mut cfg = load_config(&args, Some(vec![Stage::Solve]))?;
            if let Some(choice) = backend {
                cfg.backend = match choice {
                    BackendArg::Gradient => Backend::Gradient,
                    BackendArg::Newton => Backend::Newton,
                };
            }
            let outcome = run(&cfg, &args.out).map_err(report_pipeline)?;
            Ok(finish(outcome))
        }
        Command::Assemble(args) => staged(&args, Some(vec![Stage::Assemble, Stage::Tile])),
        Command::Verify { args, mesh } => match mesh {
            None => staged(&args, Some(vec![Stage::Verify])),
            Some(path) => {
                let cfg = load_config(&args, None)?;
                let mesh = import_any(&path)?;
                let summary =
                    verify_mesh(&mesh, cfg.census_directions, &args.out).map_err(report_pipeline)?;
                let text = summary.to_text();
                std::fs::write(args.out.join("summary.txt"), &text).map_err(report_config)?;
                print!("{text}");
                Ok(if summary.all_pass() { 0 } else { 1 })
            }
        },
        Command::Sweep(args) => {
            let cfg = load_config(&args, None)?;
            let rows = run_sweep(&cfg, &args.out).map_err(report_pipeline)?;
            println!("sweep: {} radii -> {}", rows.len(), args.out.join("sweep.csv").display());
            Ok(0)
        }
        Command::Export { input, output, format } => {
            let mesh = import_any(&input)?;
            let written = match format {
                MeshFormat::Obj => export_obj(&mesh, &output),
                MeshFormat::Ply => export_ply(&mesh, &output),
            };
            written.map_err(|e| {
                eprintln!("helilab: cannot write {}: {e}", output.display());
                3
            })?;
            Ok(0)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let (Ok(code) | Err(code)) = execute(cli);
    std::process::exit(code);
}
