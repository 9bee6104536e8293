//! Subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use cmdp_lab::analysis::{
    all_policy_inputs, assemble_curve, certify_family, distinct_policy_inputs, eval_bound, mixing_profile,
    policy_class_dimension, run_cells, BoundId, BoundInputs, NatarajanCaps,
};
use cmdp_lab::harness::{build_pool, resolve_workers, run_experiment, write_curve_csv, ExperimentConfig, RunOptions};
use cmdp_lab::io::{read_batch, read_instance, read_json, write_batch, write_batch_to, write_instance, write_json, Batch};
use cmdp_lab::planner::context_values;
use cmdp_lab::sampling::data_distribution_for;
use cmdp_lab::{
    build_q_class, dpl_erm, evaluate_policy, fqi, generate_expert_batch, generate_model_batch, model_based_learn,
    optimal, policy_value, rollout, true_error, DataDistribution, Error, Family, FamilySpec, ModelClass, Policy,
    PolicyClass, Reachability, TabularCmdp, ValidationOptions,
};
use serde::Serialize;
use serde_json::json;

use crate::provenance::Provenance;
use crate::{
    BoundsArgs, Cli, Command, DataArg, DplArgs, FamilyArgs, MixingArgs, ModelArgs, NdimArgs, PlanArgs,
    ReachabilityArg, RolloutArgs,
};

/// Maps an error chain to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::CertificateFailed { .. }) => 3,
        Some(Error::Io { .. } | Error::Csv(_)) | None => 1,
        Some(_) => 2,
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Construct(args) => construct(cli, args),
        Command::Plan(args) => plan(cli, args),
        Command::Rollout(args) => rollout_cmd(cli, args),
        Command::Dpl(args) => dpl(cli, args),
        Command::Mble(args) => mble(cli, args),
        Command::Fqi(args) => fqi_cmd(cli, args),
        Command::Bounds(args) => bounds(cli, args),
        Command::Ndim(args) => ndim(cli, args),
        Command::Mixing(args) => mixing(cli, args),
        Command::Certify(args) => certify(cli, args),
        Command::Curve => curve(cli),
        Command::Run => run(cli),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Prints `value` and, when `--out` is given, writes it there too.
fn emit_json<T: Serialize>(cli: &Cli, value: &T) -> Result<()> {
    if let Some(path) = &cli.out {
        write_json(path, value)?;
    }
    print_json(value)
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    let dir = cli.out.as_deref().ok_or_else(|| Error::Config("--out <dir> is required".into()))?;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    Ok(dir)
}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Error::Config(msg.into()))
}

/// Parses `key=value` as a TOML value, falling back to a bare string.
fn param_value(raw: &str) -> Result<(String, toml::Value)> {
    let (key, value) = raw.split_once('=').ok_or_else(|| config_error(format!("parameter \"{raw}\" is not key=value")))?;
    let key = key.trim().replace('-', "_");
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key, parsed))
}

/// Family spec from `--family/--params`, or from `--config` (either a bare
/// family table or a file with a `[family]` section).
fn family_spec(cli: &Cli, args: &FamilyArgs) -> Result<FamilySpec> {
    let table = match (&args.family, &cli.config) {
        (Some(kind), _) => {
            let mut table = toml::Table::new();
            table.insert("kind".into(), toml::Value::String(kind.clone()));
            for raw in &args.params {
                let (key, value) = param_value(raw)?;
                table.insert(key, value);
            }
            table
        }
        (None, Some(path)) => {
            if !args.params.is_empty() {
                return Err(config_error("--params needs --family"));
            }
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            let mut table: toml::Table =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            match table.remove("family") {
                Some(toml::Value::Table(family)) => family,
                Some(_) => return Err(config_error("[family] must be a table")),
                None => table,
            }
        }
        (None, None) => return Err(config_error("give --family <kind> --params ... or --config <file>")),
    };
    toml::Value::Table(table).try_into::<FamilySpec>().map_err(|e| config_error(e.to_string()))
}

fn load_experiment_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_deref().ok_or_else(|| config_error("--config <experiment.toml> is required"))?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    Ok(config)
}

fn load_instance(path: &Path, options: ValidationOptions) -> Result<TabularCmdp> {
    let cmdp = read_instance(path)?;
    cmdp.ensure_valid(options).with_context(|| format!("validating {}", path.display()))?;
    Ok(cmdp)
}

fn load_policy(path: &Path, cmdp: &TabularCmdp) -> Result<Policy> {
    let policy: Policy = read_json(path)?;
    policy.check_for(cmdp).with_context(|| format!("policy {}", path.display()))?;
    Ok(policy)
}

fn construct(cli: &Cli, args: &FamilyArgs) -> Result<()> {
    let spec = family_spec(cli, args)?;
    let family = Family::build(&spec)?;
    let dir = out_dir(cli)?;
    for sub in ["instances", "experts"] {
        let p = dir.join(sub);
        std::fs::create_dir_all(&p).map_err(|e| Error::Io { path: p, source: e })?;
    }
    write_json(&dir.join("spec.json"), &spec)?;
    write_json(&dir.join("certificate.json"), family.certificate())?;
    write_json(&dir.join("policy_class.json"), family.policy_class())?;
    if let Some(mc) = family.model_class() {
        write_json(&dir.join("model_class.json"), mc)?;
    }
    for k in 0..family.num_truths() {
        write_instance(&dir.join(format!("instances/instance_{k}.json")), family.instance(k))?;
        write_json(&dir.join(format!("experts/expert_{k}.json")), family.expert(k))?;
    }
    for w in family.warnings() {
        eprintln!("warning: {w}");
    }
    print_json(&json!({
        "family": family.kind(),
        "truths": family.num_truths(),
        "states": family.instance(0).num_states(),
        "actions": family.instance(0).num_actions(),
        "horizon": family.instance(0).horizon(),
        "contexts": family.instance(0).num_contexts(),
        "policy_class_size": family.policy_class().len(),
        "model_class_size": family.model_class().map(ModelClass::len),
        "warnings": family.warnings(),
        "out": dir,
    }))
}

fn plan(cli: &Cli, args: &PlanArgs) -> Result<()> {
    let options = match args.reachability {
        ReachabilityArg::None => ValidationOptions::default(),
        ReachabilityArg::Some => ValidationOptions::with_reachability(Reachability::AnyContext),
        ReachabilityArg::Every => ValidationOptions::with_reachability(Reachability::EveryContext),
    };
    let cmdp = load_instance(&args.instance, options)?;
    let (v, policy, q) = optimal(&cmdp)?;
    let (report, _) = evaluate_policy(&cmdp, &policy)?;
    let summary = json!({
        "value": v,
        "per_context": context_values(&report, cmdp.initial_dist()),
        "per_context_state": report.per_context_state,
    });
    if cli.out.is_some() {
        let dir = out_dir(cli)?;
        write_json(&dir.join("policy.json"), &policy)?;
        write_json(&dir.join("qtable.json"), &q)?;
        write_json(&dir.join("report.json"), &summary)?;
    }
    print_json(&summary)
}

fn rollout_cmd(cli: &Cli, args: &RolloutArgs) -> Result<()> {
    let cmdp = load_instance(&args.instance, ValidationOptions::default())?;
    let seed = cli.seed.unwrap_or(0);
    let batch = match args.data {
        DataArg::Expert => {
            let path = args.policy.as_deref().ok_or_else(|| config_error("expert data needs --policy"))?;
            let policy = load_policy(path, &cmdp)?;
            match args.context {
                Some(c) => Batch::Trajectories(vec![rollout(&cmdp, &policy, c, seed)?]),
                None => Batch::Trajectories(generate_expert_batch(&cmdp, &policy, args.m, seed)?),
            }
        }
        DataArg::OneStep => {
            if args.context.is_some() {
                return Err(config_error("--context applies to expert data only"));
            }
            let mu: DataDistribution = match &args.mu {
                Some(path) => read_json(path)?,
                None => data_distribution_for(&cmdp, None)?,
            };
            Batch::OneStep(generate_model_batch(&cmdp, &mu, args.m, seed)?)
        }
    };
    match &cli.out {
        Some(path) => write_batch(path, &batch)?,
        None => write_batch_to(std::io::stdout().lock(), &batch)?,
    }
    Ok(())
}

fn write_learner_output(
    cli: &Cli,
    learner: &'static str,
    class: &Path,
    batch: &Path,
    policy: &Policy,
    summary: &serde_json::Value,
) -> Result<()> {
    if cli.out.is_some() {
        let dir = out_dir(cli)?;
        write_json(&dir.join("policy.json"), policy)?;
        write_json(&dir.join("summary.json"), summary)?;
        write_json(&dir.join("provenance.json"), &Provenance::new(learner, class, batch, cli.seed)?)?;
    }
    print_json(summary)
}

fn dpl(cli: &Cli, args: &DplArgs) -> Result<()> {
    let class: PolicyClass = read_json(&args.class)?;
    let trajectories = match read_batch(&args.batch)? {
        Batch::Trajectories(t) => t,
        Batch::OneStep(_) => return Err(anyhow!(Error::Incompatible("dpl needs trajectory data".into()))),
    };
    let out = dpl_erm(&trajectories, &class)?;
    let mut summary = json!({
        "learner": "dpl",
        "index": out.index,
        "empirical_error": out.empirical_error,
        "degenerate": out.degenerate,
        "batch_size": trajectories.len(),
    });
    if let (Some(inst), Some(expert)) = (&args.instance, &args.expert) {
        let cmdp = load_instance(inst, ValidationOptions::default())?;
        let expert = load_policy(expert, &cmdp)?;
        class.check_for(&cmdp)?;
        let v_star = optimal(&cmdp)?.0;
        let v = policy_value(&cmdp, &out.policy)?;
        summary["true_error"] = json!(true_error(&cmdp, &expert, &out.policy)?);
        summary["value"] = json!(v);
        summary["value_error"] = json!((v_star - v).max(0.0));
        summary["expert_gap"] = json!(v_star - policy_value(&cmdp, &expert)?);
    }
    write_learner_output(cli, "dpl", &args.class, &args.batch, &out.policy, &summary)
}

fn report_value(summary: &mut serde_json::Value, instance: &Option<PathBuf>, policy: &Policy) -> Result<()> {
    if let Some(inst) = instance {
        let cmdp = load_instance(inst, ValidationOptions::default())?;
        policy.check_for(&cmdp)?;
        let v_star = optimal(&cmdp)?.0;
        let v = policy_value(&cmdp, policy)?;
        summary["value"] = json!(v);
        summary["value_error"] = json!((v_star - v).max(0.0));
    }
    Ok(())
}

fn mble(cli: &Cli, args: &ModelArgs) -> Result<()> {
    let class: ModelClass = read_json(&args.class)?;
    let batch = read_batch(&args.batch)?;
    let out = model_based_learn(batch.as_ref(), &class)?;
    let mut summary = json!({
        "learner": "mle",
        "index": out.selection.index,
        "log_likelihoods": out.selection.log_likelihoods,
        "degenerate": out.selection.degenerate,
        "batch_size": batch.len(),
    });
    report_value(&mut summary, &args.instance, &out.policy)?;
    write_learner_output(cli, "mle", &args.class, &args.batch, &out.policy, &summary)
}

fn fqi_cmd(cli: &Cli, args: &ModelArgs) -> Result<()> {
    let class: ModelClass = read_json(&args.class)?;
    let samples = match read_batch(&args.batch)? {
        Batch::OneStep(s) => s,
        Batch::Trajectories(t) if t.is_empty() => Vec::new(),
        Batch::Trajectories(_) => return Err(anyhow!(Error::Incompatible("fqi needs one-step data".into()))),
    };
    let q_class = build_q_class(&class)?;
    let out = fqi(&samples, &q_class)?;
    let mut summary = json!({
        "learner": "fqi",
        "selected_per_level": out.selected,
        "degenerate": out.degenerate,
        "batch_size": samples.len(),
    });
    report_value(&mut summary, &args.instance, &out.policy)?;
    if cli.out.is_some() {
        write_json(&out_dir(cli)?.join("qtable.json"), &out.q)?;
    }
    write_learner_output(cli, "fqi", &args.class, &args.batch, &out.policy, &summary)
}

fn bounds(cli: &Cli, args: &BoundsArgs) -> Result<()> {
    let mut inputs: BoundInputs = match &args.inputs {
        Some(path) => read_json(path)?,
        None => BoundInputs::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = args.$field { inputs.$field = v; } )* };
    }
    macro_rules! set_opt {
        ($($field:ident),*) => { $( if args.$field.is_some() { inputs.$field = args.$field; } )* };
    }
    set!(epsilon, delta, horizon, num_actions, alpha, approximation_error);
    set_opt!(d, concentratability, class_size, num_contexts, arms, samples, tau_min);
    let values = if args.bound == "all" {
        let mut values = Vec::new();
        let mut skipped = Vec::new();
        for id in BoundId::ALL {
            match eval_bound(&inputs, id) {
                Ok(v) => values.push(json!(v)),
                Err(e) => skipped.push(json!({ "bound": id, "reason": e.to_string() })),
            }
        }
        json!({ "inputs": inputs, "values": values, "skipped": skipped })
    } else {
        let id: BoundId = args.bound.parse()?;
        json!({ "inputs": inputs, "values": [eval_bound(&inputs, id)?] })
    };
    emit_json(cli, &values)
}

fn ndim(cli: &Cli, args: &NdimArgs) -> Result<()> {
    let class: PolicyClass = read_json(&args.class)?;
    let inputs = if args.all_inputs { all_policy_inputs(&class) } else { distinct_policy_inputs(&class) };
    let caps = NatarajanCaps { max_inputs: args.max_inputs, max_hypotheses: args.max_hypotheses };
    let d = policy_class_dimension(&class, &inputs, caps)?;
    emit_json(cli, &json!({ "dimension": d, "inputs_searched": inputs.len(), "hypotheses": class.len() }))
}

fn mixing(cli: &Cli, args: &MixingArgs) -> Result<()> {
    let cmdp = load_instance(&args.instance, ValidationOptions::default())?;
    let policy = load_policy(&args.policy, &cmdp)?;
    let n = args.chain_len.unwrap_or(4 * cmdp.horizon());
    let profile = mixing_profile(&cmdp, &policy, n)?;
    emit_json(cli, &json!({ "horizon": cmdp.horizon(), "chain_len": n, "bound_8l": 8 * cmdp.horizon(), "profile": profile }))
}

fn certify(cli: &Cli, args: &FamilyArgs) -> Result<()> {
    let spec = family_spec(cli, args)?;
    let report = certify_family(&Family::build(&spec)?)?;
    emit_json(cli, &report)?;
    report.ensure_passed()?;
    Ok(())
}

fn curve(cli: &Cli) -> Result<()> {
    let config = load_experiment_config(cli)?;
    let experiment = config.build_experiment()?;
    certify_family(experiment.family())?.ensure_passed()?;
    let workers = resolve_workers(&RunOptions { workers: cli.workers }, &config)?;
    let eval = &config.evaluation;
    let seed = config.experiment.seed;
    let outcomes = build_pool(workers)?.install(|| run_cells(&experiment, &eval.m_grid, eval.trials, seed))?;
    let errors: Vec<Vec<f64>> = outcomes.iter().map(|row| row.iter().map(|o| o.value_error).collect()).collect();
    let curve = assemble_curve(&experiment, eval.epsilon, eval.delta, seed, &eval.m_grid, &errors);
    match &cli.out {
        Some(path) => cmdp_lab::harness::export_curve(path, &config.experiment.id, &curve)?,
        None => write_curve_csv(std::io::stdout().lock(), &config.experiment.id, &curve)?,
    }
    match curve.m_hat {
        Some(m) => eprintln!("m_hat = {m}"),
        None => eprintln!("m_hat not reached on the grid"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let config = load_experiment_config(cli)?;
    let summary = run_experiment(&config, &RunOptions { workers: cli.workers })?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    if summary.records.is_empty() {
        bail!("no records produced");
    }
    print_json(&json!({
        "experiment_id": config.experiment.id,
        "records": summary.records.len(),
        "certificate_max_deviation": summary.certification.max_deviation,
        "m_hat": summary.curve.m_hat,
        "records_jsonl": summary.records_jsonl,
        "records_csv": summary.records_csv,
        "curve_csv": summary.curve_csv,
        "curve_json": summary.curve_json,
    }))
}
