//! Fixed-point parameter codes and derivative-free minimization of `E(ω)`.
//!
//! Each parameter is an `n`-bit sign-magnitude word: the leading bit is the sign and the
//! remaining `n − 1` bits are a magnitude `k`, decoded as `±k / (2^(n−1) − 1) · omega_max`.
//! A full code is the concatenation of its words, first parameter first, each most significant
//! bit first. Lexicographic order on codes is therefore numeric order on the concatenated index.
//!
//! Random searches draw from ChaCha8 seeded with the user seed on stream 0; each sampled word
//! is the top `n` bits of one `u32` draw.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxent;
use crate::metrics::{fidelity, ObjectiveSpec};

/// Largest code width `exhaustive_search` will enumerate.
pub const EXHAUSTIVE_BIT_LIMIT: usize = 24;

pub const DEFAULT_BITS: u32 = 12;
pub const DEFAULT_OMEGA_MAX: f64 = 4.0;
pub const DEFAULT_BUDGET: u64 = 20_000;

const SEARCH_STREAM: u64 = 0;
const CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodingScheme {
    bits_per_param: u32,
    num_params: usize,
    omega_max: f64,
}

impl CodingScheme {
    pub fn new(bits_per_param: u32, num_params: usize, omega_max: f64) -> Result<Self> {
        if !(2..=32).contains(&bits_per_param) {
            return Err(Error::Parameter(format!(
                "bits per parameter must be in 2..=32, got {bits_per_param}"
            )));
        }
        if num_params == 0 {
            return Err(Error::Parameter("a code needs at least one parameter".into()));
        }
        if !(omega_max > 0.0 && omega_max.is_finite()) {
            return Err(Error::Parameter(format!("omega_max must be positive, got {omega_max}")));
        }
        Ok(Self { bits_per_param, num_params, omega_max })
    }

    pub fn bits_per_param(&self) -> u32 {
        self.bits_per_param
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn total_bits(&self) -> usize {
        self.bits_per_param as usize * self.num_params
    }

    /// Number of distinct codes, when it fits in a `u64` index.
    pub fn code_count(&self) -> Option<u64> {
        (self.total_bits() < 64).then(|| 1u64 << self.total_bits())
    }

    fn word_mask(&self) -> u32 {
        u32::MAX >> (32 - self.bits_per_param)
    }

    fn max_magnitude(&self) -> u32 {
        (1u32 << (self.bits_per_param - 1)) - 1
    }

    /// Grid spacing between adjacent representable values.
    pub fn resolution(&self) -> f64 {
        self.omega_max / self.max_magnitude() as f64
    }

    pub fn decode_word(&self, word: u32) -> f64 {
        let sign_bit = 1u32 << (self.bits_per_param - 1);
        let k = word & (sign_bit - 1);
        let v = k as f64 / self.max_magnitude() as f64 * self.omega_max;
        if word & sign_bit != 0 {
            -v
        } else {
            v
        }
    }

    /// Nearest representable value, clamped to `±omega_max`. Zero always encodes with sign 0.
    pub fn encode_value(&self, v: f64) -> u32 {
        let k = ((v.abs() / self.omega_max).min(1.0) * self.max_magnitude() as f64).round() as u32;
        if v < 0.0 && k > 0 {
            k | (1u32 << (self.bits_per_param - 1))
        } else {
            k
        }
    }
}

/// One point of the discrete parameter grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamCode {
    words: Vec<u32>,
}

impl ParamCode {
    pub fn new(scheme: &CodingScheme, words: Vec<u32>) -> Result<Self> {
        if words.len() != scheme.num_params {
            return Err(Error::Dimension { expected: scheme.num_params, found: words.len() });
        }
        if words.iter().any(|&w| w & !scheme.word_mask() != 0) {
            return Err(Error::Parameter("code word wider than the scheme allows".into()));
        }
        Ok(Self { words })
    }

    /// Code whose concatenated bit string, read as a binary number, is `index`.
    pub fn from_index(scheme: &CodingScheme, index: u64) -> Result<Self> {
        match scheme.code_count() {
            Some(count) if index < count => {}
            _ => return Err(Error::Parameter(format!("code index {index} out of range"))),
        }
        let n = scheme.bits_per_param;
        let m = scheme.num_params;
        let words = (0..m)
            .map(|i| ((index >> (n as usize * (m - 1 - i))) as u32) & scheme.word_mask())
            .collect();
        Ok(Self { words })
    }

    pub fn index(&self, scheme: &CodingScheme) -> Option<u64> {
        scheme.code_count()?;
        Some(self.words.iter().fold(0u64, |acc, &w| (acc << scheme.bits_per_param) | w as u64))
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    /// The code as a `0`/`1` string.
    pub fn bit_string(&self, scheme: &CodingScheme) -> String {
        let n = scheme.bits_per_param as usize;
        self.words.iter().map(|w| format!("{w:0n$b}")).collect()
    }

    pub fn decode(&self, scheme: &CodingScheme) -> Vec<f64> {
        self.words.iter().map(|&w| scheme.decode_word(w)).collect()
    }
}

pub fn decode(scheme: &CodingScheme, code: &ParamCode) -> Vec<f64> {
    code.decode(scheme)
}

pub fn encode(scheme: &CodingScheme, values: &[f64]) -> Result<ParamCode> {
    if values.len() != scheme.num_params {
        return Err(Error::Dimension { expected: scheme.num_params, found: values.len() });
    }
    Ok(ParamCode { words: values.iter().map(|&v| scheme.encode_value(v)).collect() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_code: ParamCode,
    /// Decoded searched parameters (`ω`, preceded by `ω₀` in free mode).
    pub best_params: Vec<f64>,
    pub best_e: f64,
    pub evaluations: u64,
    /// `(evaluation index, best E so far)` at every strict improvement.
    pub trajectory: Vec<(u64, f64)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sampling {
    /// Independent uniform draws.
    #[default]
    WithReplacement,
    /// Distinct codes; a budget at or above the code count enumerates everything.
    WithoutReplacement,
}

fn check_scheme(spec: &ObjectiveSpec, scheme: &CodingScheme) -> Result<()> {
    if scheme.num_params != spec.num_params() {
        return Err(Error::Dimension { expected: spec.num_params(), found: scheme.num_params });
    }
    Ok(())
}

fn eval_code(spec: &ObjectiveSpec, scheme: &CodingScheme, code: &ParamCode) -> Result<f64> {
    let e = spec.evaluate(&code.decode(scheme))?;
    Ok(if e.is_nan() { f64::INFINITY } else { e })
}

/// Folds evaluated samples in order. Ties on `E` go to the lexicographically smaller code.
struct Tracker {
    best: Option<(f64, ParamCode)>,
    trajectory: Vec<(u64, f64)>,
}

impl Tracker {
    fn new() -> Self {
        Self { best: None, trajectory: Vec::new() }
    }

    fn offer(&mut self, index: u64, e: f64, code: &ParamCode) {
        match &mut self.best {
            None => {
                self.best = Some((e, code.clone()));
                self.trajectory.push((index, e));
            }
            Some((best_e, best_code)) => {
                if e < *best_e {
                    *best_e = e;
                    *best_code = code.clone();
                    self.trajectory.push((index, e));
                } else if e == *best_e && code < best_code {
                    *best_code = code.clone();
                }
            }
        }
    }

    fn finish(self, scheme: &CodingScheme, evaluations: u64) -> SearchResult {
        let (best_e, best_code) = self.best.expect("at least one evaluation");
        SearchResult {
            best_params: best_code.decode(scheme),
            best_code,
            best_e,
            evaluations,
            trajectory: self.trajectory,
        }
    }
}

/// Uniform random search with replacement.
pub fn random_search(spec: &ObjectiveSpec, scheme: &CodingScheme, budget: u64, seed: u64) -> Result<SearchResult> {
    random_search_with(spec, scheme, budget, seed, Sampling::WithReplacement)
}

pub fn random_search_with(
    spec: &ObjectiveSpec,
    scheme: &CodingScheme,
    budget: u64,
    seed: u64,
    sampling: Sampling,
) -> Result<SearchResult> {
    check_scheme(spec, scheme)?;
    if budget == 0 {
        return Err(Error::Parameter("search budget must be at least 1".into()));
    }
    let codes = sample_codes(scheme, budget, seed, sampling);
    let energies: Vec<f64> =
        codes.par_iter().map(|code| eval_code(spec, scheme, code)).collect::<Result<_>>()?;
    let mut tracker = Tracker::new();
    for (i, (code, &e)) in codes.iter().zip(&energies).enumerate() {
        tracker.offer(i as u64, e, code);
    }
    Ok(tracker.finish(scheme, codes.len() as u64))
}

fn sample_codes(scheme: &CodingScheme, budget: u64, seed: u64, sampling: Sampling) -> Vec<ParamCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SEARCH_STREAM);
    let shift = 32 - scheme.bits_per_param;
    let draw = |rng: &mut ChaCha8Rng| ParamCode {
        words: (0..scheme.num_params).map(|_| rng.random::<u32>() >> shift).collect(),
    };
    match (sampling, scheme.code_count()) {
        (Sampling::WithReplacement, _) => (0..budget).map(|_| draw(&mut rng)).collect(),
        (Sampling::WithoutReplacement, Some(count)) => {
            let amount = budget.min(count) as usize;
            rand::seq::index::sample(&mut rng, count as usize, amount)
                .into_iter()
                .map(|i| ParamCode::from_index(scheme, i as u64).expect("index below code count"))
                .collect()
        }
        (Sampling::WithoutReplacement, None) => {
            let mut seen = HashSet::new();
            let mut out = Vec::with_capacity(budget as usize);
            while (out.len() as u64) < budget {
                let code = draw(&mut rng);
                if seen.insert(code.clone()) {
                    out.push(code);
                }
            }
            out
        }
    }
}

/// Exact minimizer over every code; ties go to the lexicographically smallest code.
pub fn exhaustive_search(spec: &ObjectiveSpec, scheme: &CodingScheme) -> Result<SearchResult> {
    check_scheme(spec, scheme)?;
    let bits = scheme.total_bits();
    if bits > EXHAUSTIVE_BIT_LIMIT {
        return Err(Error::Budget { bits, limit: EXHAUSTIVE_BIT_LIMIT });
    }
    let count = 1u64 << bits;
    let chunks = count.div_ceil(CHUNK);
    // Each chunk reports its local records; a global record is always a local one.
    let local: Vec<Vec<(u64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut records = Vec::new();
            let mut best = f64::INFINITY;
            for index in c * CHUNK..((c + 1) * CHUNK).min(count) {
                let code = ParamCode::from_index(scheme, index)?;
                let e = eval_code(spec, scheme, &code)?;
                if e < best || records.is_empty() {
                    best = e;
                    records.push((index, e));
                }
            }
            Ok(records)
        })
        .collect::<Result<_>>()?;
    let mut tracker = Tracker::new();
    for records in local {
        for (index, e) in records {
            tracker.offer(index, e, &ParamCode::from_index(scheme, index)?);
        }
    }
    Ok(tracker.finish(scheme, count))
}

/// Two directions in `ω` space spanning a landscape plane.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneAxes {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl PlaneAxes {
    /// `ω₁ = −ω₂ = ω_z`, `ω₃ = −ω₄ = ω_x`, `ω₅ = ω₆ = 0` for the six Pauli models.
    pub fn pauli_zx() -> Self {
        Self {
            first: vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
            second: vec![0.0, 0.0, 1.0, -1.0, 0.0, 0.0],
        }
    }

    pub fn point(&self, a: f64, b: f64) -> Vec<f64> {
        self.first.iter().zip(&self.second).map(|(x, y)| a * x + b * y).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { min: -3.0, max: 3.0, step: 0.05 }
    }
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.step.is_finite() && self.min <= self.max && self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Parameter(format!("invalid grid {self:?}")));
        }
        let intervals = (self.max - self.min) / self.step;
        let n = (intervals + 1e-9).floor() as usize + 1;
        if n > 1 && (intervals - (n - 1) as f64).abs() < 1e-9 {
            // Range is a whole number of steps: interpolate so both ends and 0 land exactly.
            let last = (n - 1) as f64;
            return Ok((0..n)
                .map(|i| (self.min * (last - i as f64) + self.max * i as f64) / last)
                .collect());
        }
        Ok((0..n).map(|i| self.min + i as f64 * self.step).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LandscapeRow {
    pub w_z: f64,
    pub w_x: f64,
    pub fidelity: f64,
    pub objective: f64,
    pub omega0: f64,
}

/// Fidelity of `ρ_R`, objective and normalizing `ω₀` over a plane of `ω` values.
/// Rows are ordered with the first axis outermost.
pub fn landscape_scan(spec: &ObjectiveSpec, axes: &PlaneAxes, grid: &GridSpec) -> Result<Vec<LandscapeRow>> {
    let m = spec.models().len();
    if axes.first.len() != m || axes.second.len() != m {
        return Err(Error::Dimension { expected: m, found: axes.first.len().min(axes.second.len()) });
    }
    let values = grid.values()?;
    let points: Vec<(f64, f64)> =
        values.iter().flat_map(|&a| values.iter().map(move |&b| (a, b))).collect();
    points
        .par_iter()
        .map(|&(a, b)| {
            let omegas = axes.point(a, b);
            let omega0 = maxent::omega0_normalizing(spec.models(), &omegas)?;
            let w = maxent::ParamVector::new(omega0, omegas)?;
            let rho_r = maxent::rho_normalized(spec.models(), &w)?;
            Ok(LandscapeRow {
                w_z: a,
                w_x: b,
                fidelity: fidelity(spec.target(), &rho_r)?,
                objective: spec.objective(&w.omegas, omega0)?,
                omega0,
            })
        })
        .collect()
}
