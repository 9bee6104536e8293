//! `cmdp-lab`: construct instances, plan, sample, learn, analyze and run
//! experiments from the command line.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid input or
//! configuration, 3 certificate failure.

mod commands;
mod provenance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cmdp-lab", version, about = "Tabular contextual-MDP laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment or family configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Base seed; overrides the configuration's seed where one applies.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for Monte-Carlo runs.
    #[arg(long, global = true, env = "CMDP_LAB_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a hard-instance family and write its instances, classes and certificate.
    Construct(FamilyArgs),
    /// Plan exactly on an instance and write the policy, Q-table and value report.
    Plan(PlanArgs),
    /// Sample expert trajectories or one-step data into a JSON-lines batch.
    Rollout(RolloutArgs),
    /// Direct policy learning: ERM over a policy class.
    Dpl(DplArgs),
    /// Model-based learning: MLE model selection followed by PLAN.
    Mble(ModelArgs),
    /// Fitted Q-iteration over the Q-class built from a model class.
    Fqi(ModelArgs),
    /// Evaluate closed-form sample-size and error bounds.
    Bounds(BoundsArgs),
    /// Natarajan dimension of a policy class.
    Ndim(NdimArgs),
    /// Mixing profile of the concatenated expert-trajectory chain.
    Mixing(MixingArgs),
    /// Recompute a family's certificate with the planner.
    Certify(FamilyArgs),
    /// Sample-complexity curve for an experiment configuration.
    Curve,
    /// Run an experiment configuration end to end.
    Run,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    /// Family kind: tree | dpl_lower | first_round_bandit | permutation_bandit.
    #[arg(long)]
    pub family: Option<String>,
    /// Family parameters as key=value pairs, e.g. `branching=2 depth=3 epsilon=0.3`.
    #[arg(long, num_args = 1..)]
    pub params: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReachabilityArg {
    None,
    Some,
    Every,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Reachability check applied while validating the instance.
    #[arg(long, value_enum, default_value_t = ReachabilityArg::None)]
    pub reachability: ReachabilityArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DataArg {
    Expert,
    OneStep,
}

#[derive(Args, Debug)]
pub struct RolloutArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Behavior policy (expert data only).
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DataArg::Expert)]
    pub data: DataArg,
    /// Trajectories (expert) or context draws (one-step).
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Roll out a single trajectory in this context instead of drawing contexts.
    #[arg(long, conflicts_with = "m")]
    pub context: Option<usize>,
    /// Data distribution for one-step data: a JSON `[s][a]` table; uniform if omitted.
    #[arg(long)]
    pub mu: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DplArgs {
    #[arg(long)]
    pub batch: PathBuf,
    /// Policy class JSON (`{"hypotheses": [...]}`).
    #[arg(long)]
    pub class: PathBuf,
    /// Instance and expert to report exact value and true error against.
    #[arg(long, requires = "expert")]
    pub instance: Option<PathBuf>,
    #[arg(long, requires = "instance")]
    pub expert: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    #[arg(long)]
    pub batch: PathBuf,
    /// Model class JSON.
    #[arg(long)]
    pub class: PathBuf,
    /// Instance to report the learned policy's exact value on.
    #[arg(long)]
    pub instance: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Bound id, or `all` for every bound the inputs support.
    #[arg(long, default_value = "all")]
    pub bound: String,
    /// JSON file of bound inputs; flags below override its fields.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub num_actions: Option<usize>,
    #[arg(long)]
    pub concentratability: Option<f64>,
    #[arg(long)]
    pub class_size: Option<usize>,
    #[arg(long)]
    pub num_contexts: Option<usize>,
    #[arg(long)]
    pub arms: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub approximation_error: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub tau_min: Option<f64>,
}

#[derive(Args, Debug)]
pub struct NdimArgs {
    #[arg(long)]
    pub class: PathBuf,
    #[arg(long, default_value_t = 24)]
    pub max_inputs: usize,
    #[arg(long, default_value_t = 4096)]
    pub max_hypotheses: usize,
    /// Search every input instead of one representative per distinct label column.
    #[arg(long)]
    pub all_inputs: bool,
}

#[derive(Args, Debug)]
pub struct MixingArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub policy: PathBuf,
    /// Chain length N; defaults to 4L.
    #[arg(long)]
    pub chain_len: Option<usize>,
}

/// Joins the error chain, skipping causes already quoted by their parent.
fn render(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", render(&err));
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
