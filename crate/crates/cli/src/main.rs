use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failprop_cli::{cmd_cascade, cmd_epidemic, cmd_gen, cmd_sweep, cmd_validate, load_config, output_dir, CliError};

#[derive(Parser)]
#[command(name = "failprop", version, about = "Epidemic and cascade failure-propagation simulator for SDN topologies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo SI/SIS/SIR/SID run.
    Epidemic(RunArgs),
    /// Vertical (controller) or horizontal (data-plane) cascade.
    Cascade(RunArgs),
    /// Outbreak size over a grid of infection rates.
    Sweep(RunArgs),
    /// Generate a topology: `er N P`, `ba N M`, `ring N`, `grid R C`.
    Gen {
        #[arg(required = true, num_args = 1.., value_name = "KIND PARAMS")]
        spec: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a topology file or the topology of a config.
    Validate {
        #[arg(long, conflicts_with_all = ["preset", "topology"])]
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "topology")]
        preset: Option<String>,
        #[arg(long)]
        topology: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in config: fig3-sid, fig5a-vertical, fig5b-horizontal, fig5b-parallel.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the config's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

type Cmd = fn(&failprop_cli::ExperimentConfig, &std::path::Path) -> Result<String, CliError>;

fn run_experiment(args: RunArgs, cmd: Cmd) -> Result<(), CliError> {
    let mut cfg = load_config(args.config.as_deref(), args.preset.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.run.rng_seed = seed;
    }
    let dir = output_dir(args.out, Some(&cfg));
    let line = cmd(&cfg, &dir)?;
    eprintln!("{line}");
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Epidemic(a) => run_experiment(a, cmd_epidemic),
        Command::Cascade(a) => run_experiment(a, cmd_cascade),
        Command::Sweep(a) => run_experiment(a, cmd_sweep),
        Command::Gen { spec, seed, out } => {
            let text = cmd_gen(&spec.join(" "), seed)?;
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Validate { config, preset, topology } => {
            let net = match topology {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::Topology(format!("cannot read {}: {e}", path.display())))?;
                    failprop_core::load_edge_list(&text)
                        .map_err(|e| CliError::Topology(format!("{}: {e}", path.display())))?
                }
                None => load_config(config.as_deref(), preset.as_deref())?.build_network()?,
            };
            let (report, ok) = cmd_validate(&net);
            print!("{report}");
            if ok {
                Ok(())
            } else {
                Err(CliError::Topology("topology has violations".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("failprop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
