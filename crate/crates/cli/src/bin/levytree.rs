use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Command, FromArgMatches};
use levytree_cli::runner::resolve_threads;
use levytree_cli::{run_experiment, ExperimentConfig, Registry};

/// Flags shared by every experiment subcommand.
#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML experiment config
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed (overrides the config)
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory (overrides the config)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Number of replicas (overrides the config)
    #[arg(long, value_name = "N")]
    replicas: Option<usize>,
    /// Worker threads; falls back to LEVYTREE_THREADS
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

fn command(registry: &Registry) -> Command {
    let mut cmd = Command::new("levytree")
        .about("Pruning and regrafting experiments on conditioned Galton-Watson trees")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for exp in registry.iter() {
        // augment_args would put the struct doc in place of the about text
        cmd = cmd.subcommand(CommonArgs::augment_args(Command::new(exp.name())).about(exp.about()));
    }
    cmd
}

fn run() -> anyhow::Result<()> {
    let registry = Registry::builtin();
    let matches = command(&registry).get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let args = CommonArgs::from_arg_matches(sub)?;

    let mut config = match &args.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if !config.kind.is_empty() && config.kind != name {
        anyhow::bail!(
            "config kind {:?} does not match subcommand {name:?}",
            config.kind
        );
    }
    config.kind = name.to_string();
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(o) = args.out {
        config.output_dir = o;
    }
    if let Some(r) = args.replicas {
        config.replicas = r;
    }
    let threads = resolve_threads(args.threads)?;
    let outcome = run_experiment(&registry, config, threads)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
