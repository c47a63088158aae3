//! Experiment drivers behind the command-line subcommands.
//!
//! Every driver reads an [`ExperimentConfig`], writes a `#`-prefixed metadata header followed
//! by CSV rows, and optionally appends one JSON record per run to a JSON-lines file.

use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{parse_grid, ExperimentConfig, StepsRule};
use crate::dynamics::{
    anneal_induced, build_h_d, build_h_eff_exact, coherence_phase_error, combined_effective_evolve, exact_evolve,
    quantum_anneal, reduced_first_term_generator, repeated_interaction_evolve, uniform_superposition,
    AnnealSchedule, LambdaScaling, PartnerParams, RegisterSpec,
};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::maxent::{self, Omega0Mode, ParamVector};
use crate::metrics::{fidelity_with_maximally_mixed, relative_entropy, von_neumann_entropy, ObjectiveSpec};
use crate::models::ModelSet;
use crate::search::{landscape_scan, random_search_with, CodingScheme, GridSpec, PlaneAxes, Sampling};
use crate::targets::{gen_target_pure, gen_target_random, TargetKind};

pub const COMMANDS: &[&str] = &["landscape", "omega0", "optimize", "batch", "dynamics", "anneal", "models"];

const PAULI_LABELS: [&str; 6] = ["z+", "z-", "x+", "x-", "y+", "y-"];

const MODEL_KEYS: &[(&str, &str)] = &[("seed", "0"), ("epsilon", "0.1"), ("models", "pauli6"), ("subset", "")];

/// Keys accepted by `command`, with their defaults.
pub fn defaults(command: &str) -> Result<Vec<(&'static str, &'static str)>> {
    let specific: &[(&str, &str)] = match command {
        "landscape" => &[
            ("alpha", "100"),
            ("omega0", "fixed-zero"),
            ("target", "theta"),
            ("theta", "0"),
            ("grid", "-3:3:0.05"),
        ],
        "omega0" => &[("grid", "-3:3:0.05")],
        "optimize" => &[
            ("alpha", "100"),
            ("omega0", "fixed-zero"),
            ("target", "theta"),
            ("theta", "0"),
            ("bits", "12"),
            ("omega-max", "4"),
            ("budget", "20000"),
            ("sampling", "with-replacement"),
        ],
        "batch" => &[
            ("alpha", "100"),
            ("omega0", "fixed-zero"),
            ("targets", "100"),
            ("kind", "mixed"),
            ("bits", "12"),
            ("omega-max", "4"),
            ("budget", "20000"),
            ("sampling", "with-replacement"),
        ],
        "dynamics" => &[
            ("subset", "1,3"),
            ("alpha", "0.1"),
            ("omega0", "fixed-zero"),
            ("target", "mixed"),
            ("theta", "0"),
            ("bits", "2"),
            ("omega-max", "0.25"),
            ("tau", "1"),
            ("dt-list", "0.1,0.05,0.025,0.0125"),
            ("beta", "1"),
            ("lambda-scaling", "dimension-corrected"),
        ],
        "anneal" => &[
            ("subset", "1,3"),
            ("alpha", "100"),
            ("omega0", "analytic"),
            ("target", "theta"),
            ("theta", "0"),
            ("bits", "2"),
            ("omega-max", "1"),
            ("t-list", "1,4,16,64"),
            ("steps-rule", "per-unit:10"),
            ("method", "exact"),
            ("refresh", "true"),
            ("beta", "1"),
            ("lambda-scaling", "dimension-corrected"),
        ],
        "models" => &[],
        other => return Err(Error::Config(format!("unknown command '{other}'"))),
    };
    let mut out: Vec<(&str, &str)> = MODEL_KEYS.to_vec();
    for &(k, v) in specific {
        match out.iter_mut().find(|(key, _)| *key == k) {
            Some(slot) => slot.1 = v,
            None => out.push((k, v)),
        }
    }
    Ok(out)
}

/// Runs `cfg.command`, writing the header and CSV body to `out`. When `records` is given, one
/// JSON object per run is appended to that file.
pub fn run(cfg: &ExperimentConfig, out: &mut dyn Write, records: Option<&Path>) -> Result<()> {
    let (body, recs) = match cfg.command.as_str() {
        "landscape" => cmd_landscape(cfg)?,
        "omega0" => cmd_omega0(cfg)?,
        "optimize" => cmd_optimize(cfg)?,
        "batch" => cmd_batch(cfg)?,
        "dynamics" => cmd_dynamics(cfg)?,
        "anneal" => cmd_anneal(cfg)?,
        "models" => cmd_models(cfg)?,
        other => return Err(Error::Config(format!("unknown command '{other}'"))),
    };
    out.write_all(cfg.header()?.as_bytes())?;
    out.write_all(body.as_bytes())?;
    out.flush()?;
    if let Some(path) = records {
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        for result in recs {
            let record = json!({
                "version": crate::config::VERSION,
                "command": cfg.command,
                "seed": cfg.seed()?,
                "config_sha256": cfg.hash(),
                "config": cfg.values,
                "result": result,
            });
            writeln!(file, "{}", serde_json::to_string(&record)?)?;
        }
    }
    Ok(())
}

type Output = (String, Vec<serde_json::Value>);

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

/// Model set named by `models` and restricted by `subset`.
pub fn load_models(cfg: &ExperimentConfig) -> Result<ModelSet> {
    let name = cfg.raw("models")?.trim();
    let ms = if name == "pauli6" {
        ModelSet::pauli_smoothed(cfg.get("epsilon")?)?
    } else if let Some(path) = name.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)?;
        let states: Vec<DensityMatrix> = serde_json::from_str(&text)?;
        ModelSet::custom(states)?
    } else {
        return Err(Error::Config(format!("models must be 'pauli6' or 'file:PATH', got '{name}'")));
    };
    let subset: Vec<usize> = cfg.list("subset")?;
    if subset.is_empty() {
        Ok(ms)
    } else {
        ms.subset(&subset)
    }
}

fn model_label(cfg: &ExperimentConfig, position: usize) -> Result<String> {
    if cfg.raw("models")?.trim() != "pauli6" {
        return Ok(format!("model{}", position + 1));
    }
    let subset: Vec<usize> = cfg.list("subset")?;
    let original = if subset.is_empty() { position + 1 } else { subset[position] };
    Ok(PAULI_LABELS[original - 1].to_string())
}

/// Target named by `target`: `theta`, `pure`, `mixed` or `file:PATH`.
pub fn load_target(cfg: &ExperimentConfig, dim: usize) -> Result<DensityMatrix> {
    let name = cfg.raw("target")?.trim();
    match name {
        "theta" => {
            if dim != 2 {
                return Err(Error::Config(format!("theta targets are qubit states, models have dimension {dim}")));
            }
            Ok(gen_target_pure(cfg.get("theta")?))
        }
        "pure" | "mixed" => gen_target_random(dim, name.parse()?, cfg.seed()?),
        _ => match name.strip_prefix("file:") {
            Some(path) => {
                let mu: DensityMatrix = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                if mu.dim() != dim {
                    return Err(Error::Dimension { expected: dim, found: mu.dim() });
                }
                Ok(mu)
            }
            None => Err(Error::Config(format!("target must be theta, pure, mixed or file:PATH, got '{name}'"))),
        },
    }
}

fn grid(cfg: &ExperimentConfig) -> Result<GridSpec> {
    let (min, max, step) = parse_grid(cfg.raw("grid")?)?;
    Ok(GridSpec { min, max, step })
}

fn sampling(cfg: &ExperimentConfig) -> Result<Sampling> {
    match cfg.raw("sampling")?.trim() {
        "with-replacement" => Ok(Sampling::WithReplacement),
        "without-replacement" => Ok(Sampling::WithoutReplacement),
        other => Err(Error::Config(format!("unknown sampling '{other}'"))),
    }
}

fn partner_params(cfg: &ExperimentConfig) -> Result<PartnerParams> {
    let scaling = match cfg.raw("lambda-scaling")?.trim() {
        "dimension-corrected" => LambdaScaling::DimensionCorrected,
        "literal" => LambdaScaling::Literal,
        other => return Err(Error::Config(format!("unknown lambda scaling '{other}'"))),
    };
    Ok(PartnerParams { beta: cfg.get("beta")?, scaling })
}

fn objective(cfg: &ExperimentConfig, ms: ModelSet, mu: DensityMatrix) -> Result<ObjectiveSpec> {
    let mode: Omega0Mode = cfg.raw("omega0")?.parse()?;
    ObjectiveSpec::new(ms, mu, cfg.get("alpha")?, mode)
}

fn scheme(cfg: &ExperimentConfig, num_params: usize) -> Result<CodingScheme> {
    CodingScheme::new(cfg.get("bits")?, num_params, cfg.get("omega-max")?)
}

fn pauli_axes(ms: &ModelSet, cfg: &ExperimentConfig) -> Result<PlaneAxes> {
    if cfg.raw("models")?.trim() != "pauli6" || !cfg.list::<usize>("subset")?.is_empty() || ms.len() != 6 {
        return Err(Error::Config("the (w_z, w_x) plane needs the full pauli6 model set".into()));
    }
    Ok(PlaneAxes::pauli_zx())
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

pub fn cmd_landscape(cfg: &ExperimentConfig) -> Result<Output> {
    let ms = load_models(cfg)?;
    let axes = pauli_axes(&ms, cfg)?;
    let mu = load_target(cfg, ms.dim())?;
    let spec = objective(cfg, ms, mu)?;
    let rows = landscape_scan(&spec, &axes, &grid(cfg)?)?;
    let mut body = String::from("w_z,w_x,fidelity,objective,omega0\n");
    let mut best = rows[0];
    for r in &rows {
        let _ = writeln!(body, "{},{},{},{},{}", r.w_z, r.w_x, r.fidelity, r.objective, r.omega0);
        if r.fidelity > best.fidelity {
            best = *r;
        }
    }
    Ok((body, vec![json!({ "points": rows.len(), "max_fidelity_row": best })]))
}

pub fn cmd_omega0(cfg: &ExperimentConfig) -> Result<Output> {
    let ms = load_models(cfg)?;
    let axes = pauli_axes(&ms, cfg)?;
    let values = grid(cfg)?.values()?;
    let points: Vec<(f64, f64)> = values.iter().flat_map(|&a| values.iter().map(move |&b| (a, b))).collect();
    let rows = points
        .par_iter()
        .map(|&(a, b)| {
            let omegas = axes.point(a, b);
            let omega0 = maxent::omega0_normalizing(&ms, &omegas)?;
            let trace = maxent::rho_unnormalized(&ms, &ParamVector::new(omega0, omegas)?)?.trace();
            Ok((a, b, omega0, trace))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut body = String::from("w_z,w_x,omega0,trace\n");
    let mut worst = 0.0f64;
    for (a, b, w0, tr) in &rows {
        let _ = writeln!(body, "{a},{b},{w0},{tr}");
        worst = worst.max((tr - 1.0).abs());
    }
    Ok((body, vec![json!({ "points": rows.len(), "max_trace_deviation": worst })]))
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizeSummary {
    pub entropy: f64,
    pub best_e: f64,
    /// `D(μ; ρ_R(ω_best))`, the cross term against the normalized reconstruction.
    pub d_normalized: f64,
    pub fidelity: f64,
    pub fidelity_mixed: f64,
    pub evaluations: u64,
    pub best_params: Vec<f64>,
    pub best_code: String,
}

fn optimize_one(spec: &ObjectiveSpec, scheme: &CodingScheme, budget: u64, seed: u64, sampling: Sampling) -> Result<(OptimizeSummary, Vec<(u64, f64)>)> {
    let result = random_search_with(spec, scheme, budget, seed, sampling)?;
    let rho_r = spec.reconstruct(&result.best_params)?;
    let mu = spec.target();
    let entropy = von_neumann_entropy(mu);
    let summary = OptimizeSummary {
        entropy,
        best_e: result.best_e,
        d_normalized: entropy + relative_entropy(mu, &rho_r)?,
        fidelity: spec.fidelity_of(&result.best_params)?,
        fidelity_mixed: fidelity_with_maximally_mixed(mu)?,
        evaluations: result.evaluations,
        best_params: result.best_params,
        best_code: result.best_code.bit_string(scheme),
    };
    Ok((summary, result.trajectory))
}

pub fn cmd_optimize(cfg: &ExperimentConfig) -> Result<Output> {
    let ms = load_models(cfg)?;
    let mu = load_target(cfg, ms.dim())?;
    let spec = objective(cfg, ms, mu)?;
    let scheme = scheme(cfg, spec.num_params())?;
    let (s, trajectory) = optimize_one(&spec, &scheme, cfg.get("budget")?, cfg.seed()?, sampling(cfg)?)?;
    let mut body = String::from("entropy,best_e,d_normalized,fidelity,fidelity_mixed,evaluations,best_params,best_code\n");
    let _ = writeln!(
        body,
        "{},{},{},{},{},{},{},{}",
        s.entropy,
        s.best_e,
        s.d_normalized,
        s.fidelity,
        s.fidelity_mixed,
        s.evaluations,
        join(&s.best_params),
        s.best_code
    );
    Ok((body, vec![json!({ "summary": s, "trajectory": trajectory })]))
}

#[derive(Clone, Debug, Serialize)]
pub struct BatchRow {
    pub index: u64,
    pub target_seed: u64,
    #[serde(flatten)]
    pub summary: OptimizeSummary,
}

/// One random target per index, seeded with `seed ^ index`, each searched independently.
pub fn batch_rows(cfg: &ExperimentConfig) -> Result<Vec<BatchRow>> {
    let ms = load_models(cfg)?;
    let kind: TargetKind = cfg.raw("kind")?.parse()?;
    let n: u64 = cfg.get("targets")?;
    let seed = cfg.seed()?;
    let budget: u64 = cfg.get("budget")?;
    let sampling = sampling(cfg)?;
    let mode: Omega0Mode = cfg.raw("omega0")?.parse()?;
    let alpha: f64 = cfg.get("alpha")?;
    let scheme = scheme(cfg, ms.len() + usize::from(mode == Omega0Mode::Free))?;
    (0..n)
        .into_par_iter()
        .map(|index| {
            let target_seed = seed ^ index;
            let mu = gen_target_random(ms.dim(), kind, target_seed)?;
            let spec = ObjectiveSpec::new(ms.clone(), mu, alpha, mode)?;
            let (summary, _) = optimize_one(&spec, &scheme, budget, target_seed, sampling)?;
            Ok(BatchRow { index, target_seed, summary })
        })
        .collect()
}

pub fn cmd_batch(cfg: &ExperimentConfig) -> Result<Output> {
    let rows = batch_rows(cfg)?;
    let mut body = String::from("index,target_seed,entropy,best_e,d_normalized,fidelity,fidelity_mixed,evaluations\n");
    let mut recs = Vec::with_capacity(rows.len());
    for r in &rows {
        let s = &r.summary;
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{}",
            r.index, r.target_seed, s.entropy, s.best_e, s.d_normalized, s.fidelity, s.fidelity_mixed, s.evaluations
        );
        recs.push(to_value(r)?);
    }
    Ok((body, recs))
}

#[derive(Clone, Debug, Serialize)]
pub struct DynamicsRow {
    pub delta_t: f64,
    pub steps: usize,
    /// Frobenius distance between first-term collisions and the exact reduced-generator
    /// evolution.
    pub first_term_error: f64,
    /// Worst coherence phase error of the combined collisions against `H_eff`.
    pub combined_phase_error: f64,
    pub target_copies: u64,
    pub partner_states: u64,
}

pub fn dynamics_rows(cfg: &ExperimentConfig) -> Result<Vec<DynamicsRow>> {
    let ms = load_models(cfg)?;
    let mu = load_target(cfg, ms.dim())?;
    let spec = objective(cfg, ms.clone(), mu.clone())?;
    let reg = RegisterSpec::new(scheme(cfg, spec.num_params())?)?;
    let h = build_h_d(&ms, &reg, spec.omega0_mode())?;
    let tau: f64 = cfg.get("tau")?;
    let params = partner_params(cfg)?;
    let chi0 = uniform_superposition(reg.dim());
    let exact = exact_evolve(&chi0, &reduced_first_term_generator(&h, &mu)?, tau)?;
    let energies = build_h_eff_exact(&spec, &reg)?.diagonal();
    cfg.list::<f64>("dt-list")?
        .into_iter()
        .map(|dt| {
            if dt.is_nan() || dt <= 0.0 {
                return Err(Error::Config(format!("time steps must be positive, got {dt}")));
            }
            let steps = (tau / dt).round() as usize;
            let (first, _) = repeated_interaction_evolve(&chi0, &mu, &h, dt, steps)?;
            let (combined, ledger) = combined_effective_evolve(&chi0, &mu, &h, spec.alpha(), &params, dt, steps)?;
            Ok(DynamicsRow {
                delta_t: dt,
                steps,
                first_term_error: first.op().frobenius_distance(exact.op()),
                combined_phase_error: coherence_phase_error(&chi0, &combined, &energies, steps as f64 * dt)?,
                target_copies: ledger.target_copies_used,
                partner_states: ledger.partner_states_used,
            })
        })
        .collect()
}

pub fn cmd_dynamics(cfg: &ExperimentConfig) -> Result<Output> {
    let rows = dynamics_rows(cfg)?;
    let mut body = String::from("delta_t,steps,first_term_error,combined_phase_error,target_copies,partner_states\n");
    for r in &rows {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{}",
            r.delta_t, r.steps, r.first_term_error, r.combined_phase_error, r.target_copies, r.partner_states
        );
    }
    Ok((body, vec![to_value(&rows)?]))
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnealRow {
    pub total_time: f64,
    pub steps: usize,
    pub success_prob: f64,
    pub target_copies: u64,
    pub partner_states: u64,
}

pub fn anneal_rows(cfg: &ExperimentConfig) -> Result<Vec<AnnealRow>> {
    let ms = load_models(cfg)?;
    let mu = load_target(cfg, ms.dim())?;
    let spec = objective(cfg, ms.clone(), mu)?;
    let reg = RegisterSpec::new(scheme(cfg, spec.num_params())?)?;
    let rule: StepsRule = cfg.raw("steps-rule")?.parse()?;
    let method = cfg.raw("method")?.trim().to_string();
    let refresh = cfg.flag("refresh")?;
    let params = partner_params(cfg)?;
    let h_eff = build_h_eff_exact(&spec, &reg)?;
    let h_d = if method == "induced" { Some(build_h_d(&ms, &reg, spec.omega0_mode())?) } else { None };
    cfg.list::<f64>("t-list")?
        .into_iter()
        .map(|t| {
            let steps = rule.steps(t);
            let mut sched = AnnealSchedule::transverse(t, steps, reg.num_qubits())?;
            sched.trotter_refresh = refresh;
            match (method.as_str(), &h_d) {
                ("exact", _) => {
                    let out = quantum_anneal(&h_eff, &sched)?;
                    Ok(AnnealRow { total_time: t, steps, success_prob: out.success_prob, target_copies: 0, partner_states: 0 })
                }
                ("induced", Some(h)) => {
                    let out = anneal_induced(&spec, h, &params, &sched)?;
                    Ok(AnnealRow {
                        total_time: t,
                        steps,
                        success_prob: out.success_prob,
                        target_copies: out.ledger.target_copies_used,
                        partner_states: out.ledger.partner_states_used,
                    })
                }
                _ => Err(Error::Config(format!("method must be 'exact' or 'induced', got '{method}'"))),
            }
        })
        .collect()
}

pub fn cmd_anneal(cfg: &ExperimentConfig) -> Result<Output> {
    let rows = anneal_rows(cfg)?;
    let mut body = String::from("total_time,steps,success_prob,target_copies,partner_states\n");
    for r in &rows {
        let _ = writeln!(body, "{},{},{},{},{}", r.total_time, r.steps, r.success_prob, r.target_copies, r.partner_states);
    }
    Ok((body, vec![to_value(&rows)?]))
}

pub fn cmd_models(cfg: &ExperimentConfig) -> Result<Output> {
    let ms = load_models(cfg)?;
    let mut body = String::from("index,label,operator,row,col,re,im\n");
    for (i, (model, eta)) in ms.models().iter().zip(&ms.etas()[1..]).enumerate() {
        let label = model_label(cfg, i)?;
        for (name, m) in [("model", model.matrix()), ("eta", eta.matrix())] {
            for r in 0..ms.dim() {
                for c in 0..ms.dim() {
                    let z = m[(r, c)];
                    let _ = writeln!(body, "{},{label},{name},{r},{c},{},{}", i + 1, z.re, z.im);
                }
            }
        }
    }
    Ok((body, vec![json!({ "models": ms.len(), "dim": ms.dim(), "commuting": ms.is_commuting() })]))
}
