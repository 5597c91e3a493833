//! Command-line front end: train agents, evaluate them, trace rollouts and
//! dump encoded observations.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crossing_sim::agents::dqn::{Checkpoint, DqnConfig, Trainer, Variant};
use crossing_sim::agents::ttc::TtcPolicy;
use crossing_sim::agents::{ConstantPolicy, Policy, RandomPolicy};
use crossing_sim::env::{Action, EnvConfig, IntersectionEnv, RewardWeights};
use crossing_sim::eval::{emit_report, run_eval};
use crossing_sim::scenarios::ScenarioLibrary;

#[derive(Parser)]
#[command(name = "crossing-sim", about = "Intersection-crossing simulator and agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a DQN agent.
    Train(TrainArgs),
    /// Evaluate an agent over scenarios and write a CSV report.
    Evaluate(EvalArgs),
    /// Step one episode and write a per-step CSV trace.
    Rollout(RolloutArgs),
    /// Print the encoded observation for a scenario state as JSON.
    Encode(EncodeArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Training variant: A1..A5.
    #[arg(long)]
    variant: String,
    #[arg(long, default_value_t = 2_000_000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for checkpoints and the progress log.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    buffer: Option<usize>,
    #[arg(long)]
    log_interval: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// Agent: ttc | random | stop | dqn.
    #[arg(long)]
    agent: String,
    /// Checkpoint JSON (required for --agent dqn).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Comma-separated scenario names, or "all".
    #[arg(long, default_value = "all")]
    scenarios: String,
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disable the occlusion model.
    #[arg(long, default_value_t = false)]
    no_occlusions: bool,
    /// Include the intersection bit in observations.
    #[arg(long, default_value_t = true)]
    ibit: bool,
}

#[derive(Args)]
struct RolloutArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value = "ttc")]
    agent: String,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    no_occlusions: bool,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Steps to simulate (always decelerating) before encoding.
    #[arg(long, default_value_t = 0)]
    steps: usize,
    #[arg(long, default_value_t = false)]
    no_occlusions: bool,
    #[arg(long, default_value_t = true)]
    ibit: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Rollout(a) => rollout(a),
        Command::Encode(a) => encode_cmd(a),
    }
}

fn make_env(name: &str, occlusions: bool, ibit: bool) -> Result<IntersectionEnv, String> {
    let sc = ScenarioLibrary::builtin()
        .get(name)
        .map_err(|e| format!("scenario {name}: {e}"))?;
    Ok(IntersectionEnv::new(
        sc,
        EnvConfig {
            occlusions_enabled: occlusions,
            include_ibit: ibit,
            weights: RewardWeights::default(),
        },
    ))
}

fn make_policy(
    agent: &str,
    checkpoint: &Option<PathBuf>,
    seed: u64,
) -> Result<Box<dyn Policy>, String> {
    match agent {
        "ttc" => Ok(Box::new(TtcPolicy::default())),
        "random" => Ok(Box::new(RandomPolicy::new(seed))),
        "stop" => Ok(Box::new(ConstantPolicy(Action::Decelerate))),
        "dqn" => {
            let path = checkpoint
                .as_ref()
                .ok_or("--checkpoint is required for --agent dqn")?;
            let ckpt = Checkpoint::load(path).map_err(|e| format!("checkpoint: {e}"))?;
            Ok(Box::new(ckpt.policy()))
        }
        other => Err(format!("unknown agent `{other}`")),
    }
}

fn train(a: TrainArgs) -> Result<(), String> {
    let variant = Variant::parse(&a.variant).ok_or(format!("unknown variant `{}`", a.variant))?;
    let mut cfg = DqnConfig { total_steps: a.steps, ..DqnConfig::default() };
    if let Some(lr) = a.lr {
        cfg.lr = lr;
    }
    if let Some(bs) = a.batch_size {
        cfg.batch_size = bs;
    }
    if let Some(cap) = a.buffer {
        cfg.buffer_capacity = cap;
    }
    if let Some(li) = a.log_interval {
        cfg.log_interval = li;
    }
    std::fs::create_dir_all(&a.out).map_err(|e| e.to_string())?;
    let mut trainer = Trainer::new(variant, cfg, a.seed);
    trainer.out_dir = Some(a.out.clone());
    let (ckpt, _) = trainer.train();
    let path = a.out.join("final.json");
    ckpt.save(&path).map_err(|e| e.to_string())?;
    println!("saved {}", path.display());
    Ok(())
}

fn evaluate(a: EvalArgs) -> Result<(), String> {
    let lib = ScenarioLibrary::builtin();
    let names: Vec<String> = if a.scenarios == "all" {
        lib.names().iter().map(|s| s.to_string()).collect()
    } else {
        a.scenarios.split(',').map(|s| s.trim().to_string()).collect()
    };
    // A DQN checkpoint dictates its own observation flags.
    let (occl, ibit) = if a.agent == "dqn" {
        let path = a.checkpoint.as_ref().ok_or("--checkpoint is required for --agent dqn")?;
        let ckpt = Checkpoint::load(path).map_err(|e| format!("checkpoint: {e}"))?;
        (ckpt.occlusions_enabled && !a.no_occlusions, ckpt.include_ibit)
    } else {
        (!a.no_occlusions, a.ibit)
    };
    let mut rows = Vec::new();
    for name in &names {
        let mut env = make_env(name, occl, ibit)?;
        let mut policy = make_policy(&a.agent, &a.checkpoint, a.seed)?;
        rows.push(run_eval(&mut env, policy.as_mut(), &a.agent, a.episodes, a.seed));
    }
    let report = emit_report(&rows);
    match a.out {
        Some(path) => std::fs::write(&path, report).map_err(|e| e.to_string())?,
        None => print!("{report}"),
    }
    Ok(())
}

fn rollout(a: RolloutArgs) -> Result<(), String> {
    let mut env = make_env(&a.scenario, !a.no_occlusions, true)?;
    let mut policy = make_policy(&a.agent, &a.checkpoint, a.seed)?;
    env.reset(a.seed);
    let mut out = String::from(IntersectionEnv::trace_header());
    out.push('\n');
    loop {
        let action = policy.act(&env);
        let w = env.world();
        let (t, s, v) = (w.t, w.ego.s_front, w.ego.v);
        let res = env.step(action);
        out.push_str(&format!(
            "{t:.1},{s:.3},{v:.3},{:.1},{:.4},{:?}\n",
            action.accel(),
            res.reward,
            res.outcome
        ));
        if res.terminal {
            break;
        }
    }
    match a.out {
        Some(path) => std::fs::write(&path, out).map_err(|e| e.to_string())?,
        None => print!("{out}"),
    }
    Ok(())
}

fn encode_cmd(a: EncodeArgs) -> Result<(), String> {
    let mut env = make_env(&a.scenario, !a.no_occlusions, a.ibit)?;
    env.reset(a.seed);
    for _ in 0..a.steps {
        env.step(Action::Decelerate);
    }
    let obs = env.last_observation();
    let json = serde_json::json!({
        "scenario": a.scenario,
        "seed": a.seed,
        "steps": a.steps,
        "include_ibit": a.ibit,
        "observation": obs,
    });
    println!("{}", serde_json::to_string_pretty(&json).unwrap());
    Ok(())
}
