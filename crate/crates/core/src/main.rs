use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maxent_tomo::config::ExperimentConfig;
use maxent_tomo::experiments;

#[derive(Parser)]
#[command(name = "maxent-tomo", version, about = "Maximum-entropy quantum state tomography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity and objective over the (w_z, w_x) plane.
    Landscape(Flags),
    /// Normalizing omega0 over the (w_z, w_x) plane.
    Omega0(Flags),
    /// Random search for a single target.
    Optimize(Flags),
    /// Random search over many random targets.
    Batch(Flags),
    /// Convergence of the collision dynamics against the exact generators.
    Dynamics(Flags),
    /// Success probability of annealing against total time.
    Anneal(Flags),
    /// List the model states and their code-length operators.
    Models(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// INI-like config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append one JSON record per run to this file.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long = "omega-max")]
    omega_max: Option<f64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long)]
    targets: Option<u64>,
    /// Comma-separated total annealing times.
    #[arg(long = "T-list", alias = "t-list")]
    t_list: Option<String>,
    /// per-unit:R, square or fixed:N.
    #[arg(long = "steps-rule")]
    steps_rule: Option<String>,
    /// pauli6 or file:PATH (JSON list of density matrices).
    #[arg(long)]
    models: Option<String>,
    /// Comma-separated 1-based model indices.
    #[arg(long)]
    subset: Option<String>,
    /// theta, pure, mixed or file:PATH.
    #[arg(long)]
    target: Option<String>,
    /// Random target ensemble for batch: pure or mixed.
    #[arg(long)]
    kind: Option<String>,
    /// min:max:step.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// fixed-zero, analytic or free.
    #[arg(long)]
    omega0: Option<String>,
    /// with-replacement or without-replacement.
    #[arg(long)]
    sampling: Option<String>,
    #[arg(long = "dt-list")]
    dt_list: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    /// exact or induced.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    refresh: Option<bool>,
    #[arg(long)]
    beta: Option<f64>,
    /// dimension-corrected or literal.
    #[arg(long = "lambda-scaling")]
    lambda_scaling: Option<String>,
    /// Any other key, as KEY=VALUE.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Flags {
    fn overrides(&self) -> Result<BTreeMap<String, String>, String> {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        put("seed", self.seed.map(|v| v.to_string()));
        put("epsilon", self.epsilon.map(|v| v.to_string()));
        put("alpha", self.alpha.map(|v| v.to_string()));
        put("bits", self.bits.map(|v| v.to_string()));
        put("omega-max", self.omega_max.map(|v| v.to_string()));
        put("budget", self.budget.map(|v| v.to_string()));
        put("theta", self.theta.map(|v| v.to_string()));
        put("targets", self.targets.map(|v| v.to_string()));
        put("t-list", self.t_list.clone());
        put("steps-rule", self.steps_rule.clone());
        put("models", self.models.clone());
        put("subset", self.subset.clone());
        put("target", self.target.clone());
        put("kind", self.kind.clone());
        put("grid", self.grid.clone());
        put("omega0", self.omega0.clone());
        put("sampling", self.sampling.clone());
        put("dt-list", self.dt_list.clone());
        put("tau", self.tau.map(|v| v.to_string()));
        put("method", self.method.clone());
        put("refresh", self.refresh.map(|v| v.to_string()));
        put("beta", self.beta.map(|v| v.to_string()));
        put("lambda-scaling", self.lambda_scaling.clone());
        for pair in &self.set {
            let (k, v) = pair.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got '{pair}'"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(map)
    }
}

fn execute(name: &str, flags: &Flags) -> Result<(), String> {
    let defaults = experiments::defaults(name).map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig::resolve(name, &defaults, flags.config.as_deref(), &flags.overrides()?)
        .map_err(|e| e.to_string())?;
    let mut out: Box<dyn Write> = match &flags.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    experiments::run(&cfg, &mut out, flags.records.as_deref()).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = match &cli.command {
        Command::Landscape(f) => ("landscape", f),
        Command::Omega0(f) => ("omega0", f),
        Command::Optimize(f) => ("optimize", f),
        Command::Batch(f) => ("batch", f),
        Command::Dynamics(f) => ("dynamics", f),
        Command::Anneal(f) => ("anneal", f),
        Command::Models(f) => ("models", f),
    };
    match execute(name, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
