//! `csf-lab`: runs experiment configs and the built-in acceptance fleet.

mod config;
mod experiments;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use csf_core::fleet::{find, CRITERIA};
use rayon::prelude::*;
use serde::Serialize;

use config::ExperimentConfig;
use experiments::{run_builtin, run_config, Outcome};

#[derive(Parser)]
#[command(name = "csf-lab", version, about = "Curve shortening flow experiments")]
struct Cli {
    /// Maximum number of experiments run at once (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; receives `summary.json` and one folder per experiment.
    #[arg(long, global = true, default_value = "csf-out")]
    out: PathBuf,
    /// Multiplies every numerical tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run config files and/or built-in criteria (`all` runs the whole fleet).
    Run {
        #[arg(required = true)]
        targets: Vec<String>,
    },
    /// Print the built-in acceptance configs, one per line.
    List,
    /// Parse and validate config files without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

enum Target {
    Builtin(&'static str),
    Config(String, Box<ExperimentConfig>),
}

impl Target {
    fn name(&self) -> &str {
        match self {
            Target::Builtin(n) => n,
            Target::Config(n, _) => n,
        }
    }
}

fn load_config(path: &Path) -> Result<(String, ExperimentConfig)> {
    let cfg = ExperimentConfig::load(path)?;
    cfg.validate()?;
    let name = cfg
        .name
        .clone()
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "experiment".into()));
    if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
        bail!("invalid experiment name {name:?}");
    }
    Ok((name, cfg))
}

fn resolve_targets(targets: &[String]) -> Result<Vec<Target>> {
    let mut out = Vec::new();
    for t in targets {
        if t == "all" {
            out.extend(CRITERIA.iter().map(|c| Target::Builtin(c.name)));
        } else if let Some(c) = find(t).filter(|_| !Path::new(t).is_file()) {
            out.push(Target::Builtin(c.name));
        } else {
            let (name, cfg) = load_config(Path::new(t)).map_err(|e| e.context(format!("config {t}")))?;
            out.push(Target::Config(name, Box::new(cfg)));
        }
    }
    let mut names: Vec<&str> = out.iter().map(Target::name).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        bail!("experiment name {:?} used twice", w[0]);
    }
    Ok(out)
}

#[derive(Serialize)]
struct Summary<'a> {
    passed: bool,
    tol_scale: f64,
    experiments: &'a [Outcome],
}

fn run(targets: &[String], cli: &Cli) -> Result<ExitCode, ExitCode> {
    if !(cli.tol_scale > 0.0) || !cli.tol_scale.is_finite() {
        eprintln!("error: --tol-scale must be positive");
        return Err(ExitCode::from(2));
    }
    let targets = resolve_targets(targets).map_err(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        targets
            .par_iter()
            .map(|t| {
                let r = match t {
                    Target::Builtin(n) => run_builtin(n, &cli.out, cli.tol_scale),
                    Target::Config(n, cfg) => run_config(cfg, n, &cli.out, cli.tol_scale),
                };
                r.unwrap_or_else(|e| Outcome {
                    name: t.name().to_string(),
                    kind: "error".into(),
                    passed: false,
                    summary: format!("error: {e:#}"),
                    reports: Vec::new(),
                    values: Default::default(),
                    files: Vec::new(),
                    seconds: 0.0,
                })
            })
            .collect()
    });
    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.summary);
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let summary = Summary { passed, tol_scale: cli.tol_scale, experiments: &outcomes };
    let written = std::fs::create_dir_all(&cli.out)
        .map_err(anyhow::Error::from)
        .and_then(|_| Ok(serde_json::to_string_pretty(&summary)?))
        .and_then(|s| Ok(std::fs::write(cli.out.join("summary.json"), s)?));
    if let Err(e) = written {
        eprintln!("error: writing summary: {e:#}");
        return Err(ExitCode::from(1));
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match &cli.command {
        Command::List => {
            for c in &CRITERIA {
                println!("{:>2} {:<22} {}", c.id, c.name, c.description);
            }
            ExitCode::SUCCESS
        }
        Command::Validate { configs } => {
            let mut code = ExitCode::SUCCESS;
            for p in configs {
                match load_config(p) {
                    Ok((name, cfg)) => println!("ok {name} ({})", cfg.kind.as_str()),
                    Err(e) => {
                        eprintln!("error: {}: {e:#}", p.display());
                        code = ExitCode::from(2);
                    }
                }
            }
            code
        }
        Command::Run { targets } => run(targets, &cli).unwrap_or_else(|c| c),
    }
}
