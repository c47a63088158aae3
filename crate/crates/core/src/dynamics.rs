//! Register dynamics induced by repeated interactions with fresh partner systems.
//!
//! The register `ℋ_Ω` holds one qubit per code bit; basis state `|j⟩` labels the code whose
//! concatenated bit string is `j`. The interaction Hamiltonian `H_D = Σᵢ ω̂ᵢ ⊗ ηᵢ` is
//! block-diagonal in that basis with blocks `Bⱼ = ω₀(j) I + Σᵢ ωᵢ(j) ηᵢ = ln ρ(ω(j))`.
//!
//! Every collision is simulated on the full compound space: the register state (possibly
//! joined with a spectator system) is tensored with a fresh partner, evolved by the
//! register-controlled unitary `⊕ⱼ Wⱼ` for one interval `δt`, and the partner is traced out.
//!
//! * First term: the partner is a copy of the target `μ` and `Wⱼ = exp(+i Bⱼ δt)`. Because
//!   `tr(Bⱼ μ) = tr(μ ln ρ(ω(j))) = −D`, the coupling is `−H_D`; the reduced generator is then
//!   `diag(D(μ; ρ(ω(j))))`.
//! * Constraint term: the partner is maximally mixed and the generator is a thermal state of
//!   `−H_D` (one copy) or `−(H_D'' + H_D''')` (two copies) scaled by `λ`. With a maximally
//!   mixed partner of dimension `d` the reduced generator picks up a factor `1/d`, so the
//!   default scaling is `λ₁ = −2α Z₁ d` and `λ₂ = α Z₂ d²`, which reproduces
//!   `α (C₁ − I)²` up to the constant `α` (a global phase).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, conjugate_block_diagonal, eig_hermitian, kron, partial_trace_matrix, tensor_product,
    unitary_exp, CMatrix, DensityMatrix, HermitianOperator, Spectrum, Subsystem,
};
use crate::maxent::{self, Omega0Mode, ParamVector};
use crate::metrics::ObjectiveSpec;
use crate::models::ModelSet;
use crate::search::{CodingScheme, ParamCode};
use num_complex::Complex64;

/// Largest register (in qubits) that is simulated densely.
pub const REGISTER_QUBIT_LIMIT: usize = 12;

/// Largest `β · λ` accepted when exponentiating thermal partners.
const MAX_THERMAL_EXPONENT: f64 = 700.0;

const GROUND_GAP_TOL: f64 = 1e-9;

/// Register basis together with the parameter vector each basis state decodes to.
#[derive(Clone, Debug)]
pub struct RegisterSpec {
    scheme: CodingScheme,
    decode_table: Vec<Vec<f64>>,
}

impl RegisterSpec {
    pub fn new(scheme: CodingScheme) -> Result<Self> {
        let bits = scheme.total_bits();
        if bits > REGISTER_QUBIT_LIMIT {
            return Err(Error::Size { bits, limit: REGISTER_QUBIT_LIMIT });
        }
        let decode_table = (0..1u64 << bits)
            .map(|j| ParamCode::from_index(&scheme, j).map(|code| code.decode(&scheme)))
            .collect::<Result<_>>()?;
        Ok(Self { scheme, decode_table })
    }

    pub fn scheme(&self) -> &CodingScheme {
        &self.scheme
    }

    pub fn num_qubits(&self) -> usize {
        self.scheme.total_bits()
    }

    pub fn dim(&self) -> usize {
        self.decode_table.len()
    }

    pub fn decode_table(&self) -> &[Vec<f64>] {
        &self.decode_table
    }

    /// Diagonal register operator `ω̂ᵢ` for searched parameter `i`.
    pub fn parameter_operator(&self, i: usize) -> Result<HermitianOperator> {
        let diag: Vec<f64> = self.decode_table.iter().map(|row| row[i]).collect();
        HermitianOperator::from_real_diagonal(&diag)
    }
}

/// `H_D` on register ⊗ system^copies, stored as its register blocks.
#[derive(Clone, Debug)]
pub struct InteractionHamiltonian {
    blocks: Vec<HermitianOperator>,
    omega0: Vec<f64>,
    system_dim: usize,
    copies: usize,
    models: ModelSet,
    register: RegisterSpec,
    omega0_mode: Omega0Mode,
}

/// Builds `H_D = Σᵢ ω̂ᵢ ⊗ ηᵢ`, including `ω̂₀ ⊗ I` as dictated by `mode`.
pub fn build_h_d(ms: &ModelSet, reg: &RegisterSpec, mode: Omega0Mode) -> Result<InteractionHamiltonian> {
    let expected = ms.len() + usize::from(mode == Omega0Mode::Free);
    if reg.scheme.num_params() != expected {
        return Err(Error::Dimension { expected, found: reg.scheme.num_params() });
    }
    let mut blocks = Vec::with_capacity(reg.dim());
    let mut omega0 = Vec::with_capacity(reg.dim());
    for row in &reg.decode_table {
        let w = match mode {
            Omega0Mode::FixedZero => ParamVector::new(0.0, row.clone())?,
            Omega0Mode::Analytic => ParamVector::new(maxent::omega0_normalizing(ms, row)?, row.clone())?,
            Omega0Mode::Free => ParamVector::new(row[0], row[1..].to_vec())?,
        };
        blocks.push(maxent::exponent(ms, &w)?);
        omega0.push(w.omega0);
    }
    Ok(InteractionHamiltonian {
        blocks,
        omega0,
        system_dim: ms.dim(),
        copies: 1,
        models: ms.clone(),
        register: reg.clone(),
        omega0_mode: mode,
    })
}

impl InteractionHamiltonian {
    pub fn blocks(&self) -> &[HermitianOperator] {
        &self.blocks
    }

    pub fn register(&self) -> &RegisterSpec {
        &self.register
    }

    pub fn models(&self) -> &ModelSet {
        &self.models
    }

    pub fn omega0_mode(&self) -> Omega0Mode {
        self.omega0_mode
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// Dimension of the system factor (all copies together).
    pub fn system_dim(&self) -> usize {
        self.system_dim.pow(self.copies as u32)
    }

    pub fn dim(&self) -> usize {
        self.register.dim() * self.system_dim()
    }

    /// `H_D^(u'') + H_D^(u''')` on register ⊗ system ⊗ system.
    pub fn two_copy(&self) -> Result<Self> {
        if self.copies != 1 {
            return Err(Error::Parameter("two_copy expects a single-copy Hamiltonian".into()));
        }
        let id = HermitianOperator::identity(self.system_dim);
        let blocks = self
            .blocks
            .iter()
            .map(|b| tensor_product(b, &id).add(&tensor_product(&id, b)))
            .collect::<Result<_>>()?;
        Ok(Self { blocks, copies: 2, ..self.clone() })
    }

    /// Dense operator assembled term by term as `Σ_copies Σᵢ ω̂ᵢ ⊗ (… ⊗ ηᵢ ⊗ …)`.
    pub fn dense(&self) -> Result<HermitianOperator> {
        let d = self.system_dim;
        let mut terms: Vec<(HermitianOperator, HermitianOperator)> = Vec::new();
        terms.push((HermitianOperator::from_real_diagonal(&self.omega0)?, HermitianOperator::identity(d)));
        let offset = usize::from(self.omega0_mode == Omega0Mode::Free);
        for (i, eta) in self.models.etas()[1..].iter().enumerate() {
            terms.push((self.register.parameter_operator(offset + i)?, eta.clone()));
        }
        let mut total = HermitianOperator::zeros(self.dim());
        for position in 0..self.copies {
            for (omega_hat, eta) in &terms {
                let mut factor = HermitianOperator::identity(1);
                for p in 0..self.copies {
                    let f = if p == position { eta.clone() } else { HermitianOperator::identity(d) };
                    factor = tensor_product(&factor, &f);
                }
                total = total.add(&tensor_product(omega_hat, &factor))?;
            }
        }
        Ok(total)
    }

    fn spectra(&self) -> Result<Vec<Spectrum>> {
        self.blocks.iter().map(eig_hermitian).collect()
    }
}

/// Assembles `⊕ⱼ Mⱼ` as a dense matrix.
pub fn assemble_block_diagonal(blocks: &[CMatrix]) -> CMatrix {
    let b = blocks[0].nrows();
    let mut out = CMatrix::zeros(b * blocks.len(), b * blocks.len());
    for (j, m) in blocks.iter().enumerate() {
        out.view_mut((j * b, j * b), (b, b)).copy_from(m);
    }
    out
}

/// Counts of consumed partner systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyLedger {
    /// Copies of the target state `μ`.
    pub target_copies_used: u64,
    /// Target-independent partners: maximally mixed ancillas and thermal generator states.
    pub partner_states_used: u64,
}

/// Partners consumed by one constraint step: three maximally mixed ancillas (`u'`, `u''`,
/// `u'''`) and the two thermal generator states.
pub const PARTNERS_PER_CONSTRAINT_STEP: u64 = 5;

fn check_state(chi: &DensityMatrix, dim: usize) -> Result<()> {
    if chi.dim() != dim {
        return Err(Error::Dimension { expected: dim, found: chi.dim() });
    }
    Ok(())
}

fn check_interval(delta_t: f64) -> Result<()> {
    if !(delta_t >= 0.0 && delta_t.is_finite()) {
        return Err(Error::Parameter(format!("time step must be finite and non-negative, got {delta_t}")));
    }
    Ok(())
}

fn single_copy(h: &InteractionHamiltonian) -> Result<()> {
    if h.copies != 1 {
        return Err(Error::Parameter("expected a single-copy interaction Hamiltonian".into()));
    }
    Ok(())
}

/// `tr_P[U (X ⊗ σ) U†]` with `U = ⊕ⱼ (I_S ⊗ Wⱼ)`; `x` lives on register ⊗ spectator.
fn collide(x: &CMatrix, spectator_dim: usize, unitaries: &[CMatrix], partner: &CMatrix) -> CMatrix {
    let compound = kron(x, partner);
    let evolved = if spectator_dim == 1 {
        conjugate_block_diagonal(&compound, unitaries)
    } else {
        let id = CMatrix::identity(spectator_dim, spectator_dim);
        let lifted: Vec<CMatrix> = unitaries.iter().map(|w| kron(&id, w)).collect();
        conjugate_block_diagonal(&compound, &lifted)
    };
    partial_trace_matrix(&evolved, (x.nrows(), partner.nrows()), Subsystem::First)
        .expect("compound dimensions are consistent by construction")
}

fn phase_unitaries(spectra: &[Spectrum], phase: impl Fn(f64) -> f64) -> Vec<CMatrix> {
    spectra.iter().map(|s| s.map_complex(|l| Complex64::from_polar(1.0, phase(l)))).collect()
}

/// First-term collisions with fresh copies of `μ`.
struct FirstTerm {
    spectra: Vec<Spectrum>,
    mu: CMatrix,
}

impl FirstTerm {
    fn new(h: &InteractionHamiltonian, mu: &DensityMatrix) -> Result<Self> {
        single_copy(h)?;
        check_state(mu, h.system_dim)?;
        Ok(Self { spectra: h.spectra()?, mu: mu.matrix().clone() })
    }

    /// Coupling `−scale · H_D` for `dt`: `Wⱼ = exp(+i scale Bⱼ dt)`.
    fn unitaries(&self, scale: f64, dt: f64) -> Vec<CMatrix> {
        phase_unitaries(&self.spectra, |l| scale * l * dt)
    }

    fn collide(&self, x: &CMatrix, spectator_dim: usize, scale: f64, dt: f64) -> CMatrix {
        collide(x, spectator_dim, &self.unitaries(scale, dt), &self.mu)
    }
}

/// How the thermal-partner coupling constants are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaScaling {
    /// `λ₁ = −2α Z₁ d`, `λ₂ = α Z₂ d²`; the reduced dynamics is `α (C₁ − I)²`.
    #[default]
    DimensionCorrected,
    /// `λ₁ = −2α Z₁`, `λ₂ = α Z₂`; the reduced dynamics is `α (C₁²/d² − 2C₁/d + I)`.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartnerParams {
    pub beta: f64,
    pub scaling: LambdaScaling,
}

impl Default for PartnerParams {
    fn default() -> Self {
        Self { beta: 1.0, scaling: LambdaScaling::DimensionCorrected }
    }
}

/// Thermal state of `−H` at inverse temperature `β`: `exp(β H) / Z` and `Z = tr exp(β H)`.
pub fn thermal_partner(h: &InteractionHamiltonian, beta: f64) -> Result<(DensityMatrix, f64)> {
    let (blocks, z) = thermal_blocks(&h.spectra()?, beta)?;
    let m = assemble_block_diagonal(&blocks) * c(1.0 / z);
    Ok((DensityMatrix::new(HermitianOperator::new(m)?)?, z))
}

fn thermal_blocks(spectra: &[Spectrum], beta: f64) -> Result<(Vec<CMatrix>, f64)> {
    if !beta.is_finite() {
        return Err(Error::Parameter(format!("beta must be finite, got {beta}")));
    }
    let mut z = 0.0;
    let mut blocks = Vec::with_capacity(spectra.len());
    for s in spectra {
        for &l in &s.eigenvalues {
            if beta * l > MAX_THERMAL_EXPONENT {
                return Err(Error::Numerical(format!("exp({}) overflows the thermal partner", beta * l)));
            }
            z += (beta * l).exp();
        }
        blocks.push(s.map_complex(|l| c((beta * l).exp())));
    }
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Numerical(format!("partition function is {z}")));
    }
    Ok((blocks, z))
}

/// `tr_system exp(H)`: `C₁` for a single-copy Hamiltonian, `C₂` for a two-copy one.
pub fn constraint_operator(h: &InteractionHamiltonian) -> Result<HermitianOperator> {
    let diag = h
        .spectra()?
        .iter()
        .map(|s| s.eigenvalues.iter().map(|l| l.exp()).sum())
        .collect::<Vec<f64>>();
    HermitianOperator::from_real_diagonal(&diag)
}

/// `α (C₁ − I)²`, the register operator of the trace penalty.
pub fn constraint_generator(h: &InteractionHamiltonian, alpha: f64) -> Result<HermitianOperator> {
    single_copy(h)?;
    let diag: Vec<f64> = constraint_operator(h)?.diagonal().iter().map(|c1| alpha * (c1 - 1.0).powi(2)).collect();
    HermitianOperator::from_real_diagonal(&diag)
}

/// Precomputed thermal-partner collisions for the trace penalty.
struct ConstraintTerm {
    one: Vec<Spectrum>,
    two: Vec<Spectrum>,
    z1: f64,
    z2: f64,
    lambda1: f64,
    lambda2: f64,
    beta: f64,
    mixed1: CMatrix,
    mixed2: CMatrix,
}

impl ConstraintTerm {
    fn new(h: &InteractionHamiltonian, alpha: f64, params: &PartnerParams) -> Result<Self> {
        single_copy(h)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be finite and non-negative, got {alpha}")));
        }
        let one = h.spectra()?;
        let two = h.two_copy()?.spectra()?;
        let (_, z1) = thermal_blocks(&one, params.beta)?;
        let (_, z2) = thermal_blocks(&two, params.beta)?;
        let d = h.system_dim as f64;
        let (k1, k2) = match params.scaling {
            LambdaScaling::DimensionCorrected => (d, d * d),
            LambdaScaling::Literal => (1.0, 1.0),
        };
        Ok(Self {
            one,
            two,
            z1,
            z2,
            lambda1: -2.0 * alpha * z1 * k1,
            lambda2: alpha * z2 * k2,
            beta: params.beta,
            mixed1: DensityMatrix::maximally_mixed(h.system_dim).matrix().clone(),
            mixed2: DensityMatrix::maximally_mixed(h.system_dim * h.system_dim).matrix().clone(),
        })
    }

    /// Steps (a) and (b) for `dt` with couplings scaled by `scale`. Step (c), the trivial
    /// Hamiltonian `α I`, only contributes a global phase and leaves the state untouched.
    fn collide(&self, x: &CMatrix, spectator_dim: usize, scale: f64, dt: f64) -> CMatrix {
        let (beta, l1, l2, z1, z2) = (self.beta, self.lambda1, self.lambda2, self.z1, self.z2);
        let w1 = phase_unitaries(&self.one, |l| -scale * l1 * (beta * l).exp() / z1 * dt);
        let x = collide(x, spectator_dim, &w1, &self.mixed1);
        let w2 = phase_unitaries(&self.two, |l| -scale * l2 * (beta * l).exp() / z2 * dt);
        collide(&x, spectator_dim, &w2, &self.mixed2)
    }
}

/// Reduced first-order generator of the first-term collisions:
/// `−tr_system(H_D (I ⊗ μ)) = diag(D(μ; ρ(ω(j))))`.
pub fn reduced_first_term_generator(h: &InteractionHamiltonian, mu: &DensityMatrix) -> Result<HermitianOperator> {
    single_copy(h)?;
    check_state(mu, h.system_dim)?;
    let diag = h
        .blocks
        .iter()
        .map(|b| b.trace_product(mu.op()).map(|t| -t))
        .collect::<Result<Vec<f64>>>()?;
    HermitianOperator::from_real_diagonal(&diag)
}

/// `χ ← tr_system[U (χ ⊗ μ) U†]` with a fresh `μ` every step.
pub fn repeated_interaction_evolve(
    chi0: &DensityMatrix,
    mu: &DensityMatrix,
    h: &InteractionHamiltonian,
    delta_t: f64,
    steps: usize,
) -> Result<(DensityMatrix, CopyLedger)> {
    check_state(chi0, h.register.dim())?;
    check_interval(delta_t)?;
    let first = FirstTerm::new(h, mu)?;
    let unitaries = first.unitaries(1.0, delta_t);
    let mut chi = chi0.matrix().clone();
    for _ in 0..steps {
        chi = collide(&chi, 1, &unitaries, &first.mu);
    }
    let ledger = CopyLedger { target_copies_used: steps as u64, partner_states_used: 0 };
    Ok((DensityMatrix::from_evolved(chi), ledger))
}

/// Penalty-term collisions only.
pub fn constraint_term_evolve(
    chi0: &DensityMatrix,
    h: &InteractionHamiltonian,
    alpha: f64,
    params: &PartnerParams,
    delta_t: f64,
    steps: usize,
) -> Result<(DensityMatrix, CopyLedger)> {
    check_state(chi0, h.register.dim())?;
    check_interval(delta_t)?;
    let term = ConstraintTerm::new(h, alpha, params)?;
    let mut chi = chi0.matrix().clone();
    for _ in 0..steps {
        chi = term.collide(&chi, 1, 1.0, delta_t);
    }
    let ledger = CopyLedger { target_copies_used: 0, partner_states_used: PARTNERS_PER_CONSTRAINT_STEP * steps as u64 };
    Ok((DensityMatrix::from_evolved(chi), ledger))
}

/// First-term and penalty collisions interleaved, one target copy per step.
pub fn combined_effective_evolve(
    chi0: &DensityMatrix,
    mu: &DensityMatrix,
    h: &InteractionHamiltonian,
    alpha: f64,
    params: &PartnerParams,
    delta_t: f64,
    steps: usize,
) -> Result<(DensityMatrix, CopyLedger)> {
    check_state(chi0, h.register.dim())?;
    check_interval(delta_t)?;
    let first = FirstTerm::new(h, mu)?;
    let term = ConstraintTerm::new(h, alpha, params)?;
    let unitaries = first.unitaries(1.0, delta_t);
    let mut chi = chi0.matrix().clone();
    for _ in 0..steps {
        chi = collide(&chi, 1, &unitaries, &first.mu);
        chi = term.collide(&chi, 1, 1.0, delta_t);
    }
    let ledger = CopyLedger {
        target_copies_used: steps as u64,
        partner_states_used: PARTNERS_PER_CONSTRAINT_STEP * steps as u64,
    };
    Ok((DensityMatrix::from_evolved(chi), ledger))
}

/// `exp(−i G τ) χ exp(+i G τ)`.
pub fn exact_evolve(chi0: &DensityMatrix, generator: &HermitianOperator, tau: f64) -> Result<DensityMatrix> {
    check_state(chi0, generator.dim())?;
    let u = unitary_exp(generator, tau)?;
    Ok(DensityMatrix::from_evolved(&u * chi0.matrix() * u.adjoint()))
}

/// Largest deviation, over all coherences `j ≠ k`, of the phase of `χ_jk(τ) / χ_jk(0)` from
/// `−(e_j − e_k) τ`, wrapped into `[−π, π]`. Coherences of `chi0` below `1e-12` are skipped.
pub fn coherence_phase_error(chi0: &DensityMatrix, chi: &DensityMatrix, energies: &[f64], tau: f64) -> Result<f64> {
    let n = energies.len();
    check_state(chi0, n)?;
    check_state(chi, n)?;
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let before = chi0.matrix()[(j, k)];
            if j == k || before.norm() < 1e-12 {
                continue;
            }
            let expected = -(energies[j] - energies[k]) * tau;
            let diff = (chi.matrix()[(j, k)] / before).arg() - expected;
            let wrapped = (diff + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            worst = worst.max(wrapped.abs());
        }
    }
    Ok(worst)
}

/// Diagonal register operator with `E(ω(j))` on `|j⟩`.
pub fn build_h_eff_exact(spec: &ObjectiveSpec, reg: &RegisterSpec) -> Result<HermitianOperator> {
    if reg.scheme.num_params() != spec.num_params() {
        return Err(Error::Dimension { expected: spec.num_params(), found: reg.scheme.num_params() });
    }
    let diag = reg.decode_table.iter().map(|row| spec.evaluate(row)).collect::<Result<Vec<f64>>>()?;
    HermitianOperator::from_real_diagonal(&diag)
}

/// Uniform superposition over all register basis states.
pub fn uniform_superposition(dim: usize) -> DensityMatrix {
    DensityMatrix::from_evolved(CMatrix::from_element(dim, dim, c(1.0 / dim as f64)))
}

/// `V = −Σ_b X_b` on `num_qubits` qubits.
pub fn transverse_field(num_qubits: usize) -> HermitianOperator {
    let dim = 1usize << num_qubits;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for b in 0..num_qubits {
            m[(i, i ^ (1 << b))] = c(-1.0);
        }
    }
    HermitianOperator::symmetrized(m)
}

/// Linear schedule `H_QA(t) = (t/T) H_eff + (1 − t/T) V`.
#[derive(Clone, Debug)]
pub struct AnnealSchedule {
    total_time: f64,
    steps: usize,
    driver: HermitianOperator,
    ground: DensityMatrix,
    /// Replace the target copy after every step. Without refresh a single copy stays coupled
    /// to the register for the whole run.
    pub trotter_refresh: bool,
}

impl AnnealSchedule {
    pub fn new(total_time: f64, steps: usize, driver: HermitianOperator) -> Result<Self> {
        if !(total_time >= 0.0 && total_time.is_finite()) {
            return Err(Error::Schedule(format!("total time must be finite and non-negative, got {total_time}")));
        }
        if steps == 0 {
            return Err(Error::Schedule("at least one step is required".into()));
        }
        let spec = eig_hermitian(&driver)?;
        let n = spec.eigenvalues.len();
        if n > 1 && spec.eigenvalues[n - 2] - spec.eigenvalues[n - 1] < GROUND_GAP_TOL {
            return Err(Error::Schedule("driver ground state is degenerate".into()));
        }
        let v = spec.eigenvectors.column(n - 1);
        let ground = DensityMatrix::from_evolved(v * v.adjoint());
        Ok(Self { total_time, steps, driver, ground, trotter_refresh: true })
    }

    /// Transverse-field driver on the register.
    pub fn transverse(total_time: f64, steps: usize, num_qubits: usize) -> Result<Self> {
        Self::new(total_time, steps, transverse_field(num_qubits))
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn delta_t(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    pub fn driver(&self) -> &HermitianOperator {
        &self.driver
    }

    pub fn driver_ground_state(&self) -> &DensityMatrix {
        &self.ground
    }

    /// Schedule fraction `t/T` at the midpoint of step `k`.
    fn fraction(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.steps as f64
    }
}

#[derive(Clone, Debug)]
pub struct AnnealOutcome {
    pub final_state: DensityMatrix,
    pub success_prob: f64,
}

/// Register indices whose `H_eff` entry is minimal.
pub fn ground_codes(h_eff: &HermitianOperator) -> Vec<usize> {
    let diag = h_eff.diagonal();
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * min.abs().max(1.0);
    diag.iter().enumerate().filter(|(_, &e)| e <= min + tol).map(|(j, _)| j).collect()
}

/// Population of `chi` on the minimizing codes of `h_eff`.
pub fn success_probability(h_eff: &HermitianOperator, chi: &DensityMatrix) -> f64 {
    ground_codes(h_eff).into_iter().map(|j| chi.matrix()[(j, j)].re).sum()
}

fn check_diagonal(h_eff: &HermitianOperator, dim: usize) -> Result<()> {
    if h_eff.dim() != dim {
        return Err(Error::Dimension { expected: dim, found: h_eff.dim() });
    }
    if !h_eff.is_diagonal(1e-12) {
        return Err(Error::InvalidOperator("problem Hamiltonian must be diagonal".into()));
    }
    Ok(())
}

/// Integrates `dχ/dt = −i[H_QA(t), χ]` from the driver ground state with one exact exponential
/// of the midpoint Hamiltonian per step.
pub fn quantum_anneal(h_eff: &HermitianOperator, sched: &AnnealSchedule) -> Result<AnnealOutcome> {
    check_diagonal(h_eff, sched.driver.dim())?;
    let dt = sched.delta_t();
    let mut chi = sched.ground.matrix().clone();
    if dt > 0.0 {
        for k in 0..sched.steps {
            let s = sched.fraction(k);
            let h = h_eff.scale(s).add(&sched.driver.scale(1.0 - s))?;
            let u = unitary_exp(&h, dt)?;
            chi = &u * chi * u.adjoint();
        }
    }
    let final_state = DensityMatrix::from_evolved(chi);
    let success_prob = success_probability(h_eff, &final_state);
    Ok(AnnealOutcome { final_state, success_prob })
}

#[derive(Clone, Debug)]
pub struct InducedAnnealOutcome {
    pub final_state: DensityMatrix,
    pub success_prob: f64,
    pub ledger: CopyLedger,
}

/// Annealing where the problem Hamiltonian is induced by collisions rather than applied
/// directly: each step applies the scaled driver, then first-term and penalty collisions with
/// couplings scaled by `t/T`.
pub fn anneal_induced(
    spec: &ObjectiveSpec,
    h: &InteractionHamiltonian,
    params: &PartnerParams,
    sched: &AnnealSchedule,
) -> Result<InducedAnnealOutcome> {
    let r = h.register.dim();
    if sched.driver.dim() != r {
        return Err(Error::Dimension { expected: r, found: sched.driver.dim() });
    }
    if spec.omega0_mode() != h.omega0_mode {
        return Err(Error::Parameter("objective and interaction Hamiltonian use different omega0 modes".into()));
    }
    let h_eff = build_h_eff_exact(spec, &h.register)?;
    let first = FirstTerm::new(h, spec.target())?;
    let term = ConstraintTerm::new(h, spec.alpha(), params)?;
    let dt = sched.delta_t();
    let d = h.system_dim;
    let mut ledger = CopyLedger::default();

    let (mut state, spectator) = if sched.trotter_refresh {
        (sched.ground.matrix().clone(), 1)
    } else {
        ledger.target_copies_used = 1;
        (kron(sched.ground.matrix(), spec.target().matrix()), d)
    };
    let spectator_id = CMatrix::identity(spectator, spectator);
    for k in 0..sched.steps {
        let s = sched.fraction(k);
        let uv = kron(&unitary_exp(&sched.driver, (1.0 - s) * dt)?, &spectator_id);
        state = &uv * state * uv.adjoint();
        if sched.trotter_refresh {
            state = first.collide(&state, 1, s, dt);
            ledger.target_copies_used += 1;
        } else {
            state = conjugate_block_diagonal(&state, &first.unitaries(s, dt));
        }
        state = term.collide(&state, spectator, s, dt);
        ledger.partner_states_used += PARTNERS_PER_CONSTRAINT_STEP;
    }
    if !sched.trotter_refresh {
        state = partial_trace_matrix(&state, (r, d), Subsystem::First)?;
    }
    let final_state = DensityMatrix::from_evolved(state);
    let success_prob = success_probability(&h_eff, &final_state);
    Ok(InducedAnnealOutcome { final_state, success_prob, ledger })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::exp_hermitian;
    use crate::metrics::{cross_term_d, DEFAULT_ALPHA};
    use crate::search::exhaustive_search;
    use crate::targets::{gen_target_random, TargetKind};

    fn pair_models() -> ModelSet {
        ModelSet::pauli_smoothed(0.1).unwrap().subset(&[1, 3]).unwrap()
    }

    fn register(n: u32, m: usize, wmax: f64) -> RegisterSpec {
        RegisterSpec::new(CodingScheme::new(n, m, wmax).unwrap()).unwrap()
    }

    #[test]
    fn register_guard() {
        let s = CodingScheme::new(7, 2, 1.0).unwrap();
        assert!(matches!(RegisterSpec::new(s), Err(Error::Size { bits: 14, limit: 12 })));
    }

    #[test]
    fn decode_table_matches_codes() {
        let reg = register(3, 2, 1.5);
        for (j, row) in reg.decode_table().iter().enumerate() {
            let code = ParamCode::from_index(reg.scheme(), j as u64).unwrap();
            assert_eq!(row, &code.decode(reg.scheme()));
        }
    }

    #[test]
    fn h_d_for_maximally_mixed_model() {
        let ms = ModelSet::custom(vec![DensityMatrix::maximally_mixed(2)]).unwrap();
        let reg = register(2, 1, 1.0);
        let h = build_h_d(&ms, &reg, Omega0Mode::FixedZero).unwrap();
        let omegas: Vec<f64> = reg.decode_table().iter().map(|r| r[0]).collect();
        let expected = tensor_product(
            &HermitianOperator::from_real_diagonal(&omegas).unwrap(),
            &HermitianOperator::identity(2).scale(2f64.ln()),
        );
        assert!(h.dense().unwrap().frobenius_distance(&expected) < 1e-14);
    }

    #[test]
    fn dense_h_d_is_block_diagonal_with_expected_blocks() {
        let ms = pair_models();
        let reg = register(2, 2, 1.0);
        for mode in [Omega0Mode::FixedZero, Omega0Mode::Analytic] {
            let h = build_h_d(&ms, &reg, mode).unwrap();
            let dense = h.dense().unwrap();
            let blocks: Vec<CMatrix> = h.blocks().iter().map(|b| b.matrix().clone()).collect();
            assert!((dense.matrix() - assemble_block_diagonal(&blocks)).norm() < 1e-13);
            for (j, block) in h.blocks().iter().enumerate() {
                // per-block eigenvalues against Σ ωᵢ ηᵢ built independently
                let w = reg.decode_table()[j].clone();
                let k = maxent::weighted_etas(&ms, &w).unwrap();
                let shift = if mode == Omega0Mode::Analytic { maxent::omega0_normalizing(&ms, &w).unwrap() } else { 0.0 };
                let a = eig_hermitian(block).unwrap().eigenvalues;
                let b = eig_hermitian(&k).unwrap().eigenvalues;
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y - shift).abs() < 1e-12);
                }
            }
            // commutes with every register projector ⊗ I
            for j in 0..reg.dim() {
                let p = DensityMatrix::basis_state(reg.dim(), j).unwrap();
                let proj = tensor_product(p.op(), &HermitianOperator::identity(2));
                let comm = crate::linalg::commutator(&dense, &proj).unwrap();
                assert!(comm.norm() < 1e-13);
            }
        }
        // ω̂ᵢ commute
        let a = reg.parameter_operator(0).unwrap();
        let b = reg.parameter_operator(1).unwrap();
        assert!(crate::linalg::commutator(&a, &b).unwrap().norm() == 0.0);
    }

    #[test]
    fn h_d_size_and_param_checks() {
        let reg = register(2, 2, 1.0);
        assert!(build_h_d(&ModelSet::pauli_smoothed(0.1).unwrap(), &reg, Omega0Mode::FixedZero).is_err());
        assert!(build_h_d(&pair_models(), &reg, Omega0Mode::Free).is_err());
    }

    #[test]
    fn reduced_generator_matches_cross_term() {
        let ms = pair_models();
        let reg = register(2, 2, 1.3);
        let h = build_h_d(&ms, &reg, Omega0Mode::FixedZero).unwrap();
        let mu = gen_target_random(2, TargetKind::Mixed, 3).unwrap();
        let g = reduced_first_term_generator(&h, &mu).unwrap();
        assert!(g.is_diagonal(0.0));
        for (j, row) in reg.decode_table().iter().enumerate() {
            let rho = maxent::rho_unnormalized(&ms, &ParamVector::new(0.0, row.clone()).unwrap()).unwrap();
            assert!((g.diagonal()[j] - cross_term_d(&mu, &rho).unwrap()).abs() < 1e-12);
        }
        assert_eq!(g.diagonal()[0], 0.0);
        // literal route: −tr_system(H_D (I ⊗ μ)) on the dense operator
        let dense = h.dense().unwrap();
        let lifted = kron(&CMatrix::identity(reg.dim(), reg.dim()), mu.matrix());
        let literal = partial_trace_matrix(&(dense.matrix() * lifted), (reg.dim(), 2), Subsystem::First).unwrap();
        assert!((literal * c(-1.0) - g.matrix()).norm() < 1e-12);
    }

    #[test]
    fn reduced_generator_for_maximally_mixed_target() {
        let ms = ModelSet::custom(vec![HermitianOperator::from_real_diagonal(&[0.8, 0.2]).unwrap()].into_iter().map(|o| DensityMatrix::new(o).unwrap()).collect()).unwrap();
        let reg = register(3, 1, 2.0);
        let h = build_h_d(&ms, &reg, Omega0Mode::FixedZero).unwrap();
        let g = reduced_first_term_generator(&h, &DensityMatrix::maximally_mixed(2)).unwrap();
        let tr_eta = ms.etas()[1].trace();
        for (j, row) in reg.decode_table().iter().enumerate() {
            assert!((g.diagonal()[j] + row[0] * tr_eta / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_states_are_stationary() {
        let ms = pair_models();
        let reg = register(2, 2, 1.0);
        let h = build_h_d(&ms, &reg, Omega0Mode::FixedZero).unwrap();
        let mu = gen_target_random(2, TargetKind::Mixed, 1).unwrap();
        let chi = DensityMatrix::basis_state(reg.dim(), 6).unwrap();
        let (out, ledger) = repeated_interaction_evolve(&chi, &mu, &h, 0.1, 10).unwrap();
        assert!(out.op().frobenius_distance(chi.op()) < 1e-12);
        assert_eq!(ledger.target_copies_used, 10);
        let (out, _) = constraint_term_evolve(&chi, &h, 2.0, &PartnerParams::default(), 0.1, 10).unwrap();
        assert!(out.op().frobenius_distance(chi.op()) < 1e-12);
        let (out, _) = combined_effective_evolve(&chi, &mu, &h, 2.0, &PartnerParams::default(), 0.1, 10).unwrap();
        assert!(out.op().frobenius_distance(chi.op()) < 1e-12);
    }

    #[test]
    fn zero_steps_is_identity() {
        let ms = pair_models();
        let reg = register(2, 2, 1.0);
        let h = build_h_d(&ms, &reg, Omega0Mode::FixedZero).unwrap();
        let chi = uniform_superposition(reg.dim());
        let mu = gen_target_random(2, TargetKind::Pure, 1).unwrap();
        let (out, ledger) = repeated_interaction_evolve(&chi, &mu, &h, 0.0, 0).unwrap();
        assert_eq!(out, chi);
        assert_eq!(ledger, CopyLedger::default());
        assert!(repeated_interaction_evolve(&chi, &mu, &h, -0.1, 1).is_err());
    }

    #[test]
    fn evolutions_preserve_trace_and_positivity() {
        let ms = pair_models();
        let reg = register(2, 2, 1.0);
        let h = build_h_d(&ms, &reg, Omega0Mode::FixedZero).unwrap();
        let chi = uniform_superposition(reg.dim());
        let mu = gen_target_random(2, TargetKind::Mixed, 8).unwrap();
        let (out, _) = combined_effective_evolve(&chi, &mu, &h, 0.5, &PartnerParams::default(), 0.05, 40).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-8);
        assert!(out.min_eigenvalue() >= -1e-7);
    }

    #[test]
    fn thermal_partner_examples() {
        let ms = pair_models();
        let reg = register(2, 2, 1.0);
        let h = build_h_d(&ms, &reg, Omega0Mode::FixedZero).unwrap();
        let (xi, z) = thermal_partner(&h, 0.0).unwrap();
        assert!((z - h.dim() as f64).abs() < 1e-12);
        assert!(xi.op().frobenius_distance(DensityMatrix::maximally_mixed(h.dim()).op()) < 1e-14);

        let diag_models = ModelSet::custom(vec![
            DensityMatrix::new(HermitianOperator::from_real_diagonal(&[0.7, 0.3]).unwrap()).unwrap(),
        ])
        .unwrap();
        let reg1 = register(2, 1, 1.0);
        let hd = build_h_d(&diag_models, &reg1, Omega0Mode::FixedZero).unwrap();
        let lams = hd.dense().unwrap().diagonal();
        let total: f64 = lams.iter().map(|l| l.exp()).sum();
        let (xi, z) = thermal_partner(&hd, 1.0).unwrap();
        assert!((z - total).abs() < 1e-12);
        for (k, l) in lams.iter().enumerate() {
            assert!((xi.op().diagonal()[k] - l.exp() / total).abs() < 1e-14);
        }
        assert!(matches!(thermal_partner(&h, 1e4), Err(Error::Numerical(_))));
    }

    #[test]
    fn two_copy_partition_factorizes_for_a_single_code() {
        // n = 2, omega_max = 1: code 01 is the only one with ω = +1, so restrict to one code by
        // checking per-block traces, which is what the partition function sums.
        let ms = pair_models();
        let reg = register(2, 2, 1.0);
        let h = build_h_d(&ms, &reg, Omega0Mode::FixedZero).unwrap();
        let two = h.two_copy().unwrap();
        for (b1, b2) in h.blocks().iter().zip(two.blocks()) {
            let z1 = exp_hermitian(b1).unwrap().trace();
            let z2 = exp_hermitian(b2).unwrap().trace();
            assert!((z2 - z1 * z1).abs() < 1e-10 * z2);
        }
    }

    #[test]
    fn constraint_operator_identities() {
        let ms = pair_models();
        let reg = register(2, 2, 1.0);
        let h = build_h_d(&ms, &reg, Omega0Mode::FixedZero).unwrap();
        let c1 = constraint_operator(&h).unwrap().diagonal();
        let c2 = constraint_operator(&h.two_copy().unwrap()).unwrap().diagonal();
        for (j, row) in reg.decode_table().iter().enumerate() {
            let rho = maxent::rho_unnormalized(&ms, &ParamVector::new(0.0, row.clone()).unwrap()).unwrap();
            assert!((c1[j] - rho.trace()).abs() < 1e-9);
            assert!((c2[j] - c1[j] * c1[j]).abs() < 1e-9);
        }
        let analytic = build_h_d(&ms, &reg, Omega0Mode::Analytic).unwrap();
        assert!(constraint_operator(&analytic).unwrap().diagonal().iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn h_eff_examples() {
        let ms = pair_models();
        let mu = gen_target_random(2, TargetKind::Pure, 2).unwrap();
        let spec = ObjectiveSpec::new(ms, mu, DEFAULT_ALPHA, Omega0Mode::FixedZero).unwrap();
        let reg = register(3, 2, 1.5);
        let heff = build_h_eff_exact(&spec, &reg).unwrap();
        for (j, row) in reg.decode_table().iter().enumerate() {
            assert_eq!(heff.diagonal()[j], spec.evaluate(row).unwrap());
        }
        let ex = exhaustive_search(&spec, reg.scheme()).unwrap();
        let ground = ground_codes(&heff);
        assert_eq!(ground[0] as u64, ex.best_code.index(reg.scheme()).unwrap());

        let single = ModelSet::custom(vec![DensityMatrix::maximally_mixed(2)]).unwrap();
        let spec = ObjectiveSpec::new(single, DensityMatrix::maximally_mixed(2), 0.0, Omega0Mode::FixedZero).unwrap();
        let reg = register(4, 1, 2.0);
        let heff = build_h_eff_exact(&spec, &reg).unwrap();
        for (j, row) in reg.decode_table().iter().enumerate() {
            assert!((heff.diagonal()[j] + row[0] * 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn anneal_constant_problem_always_succeeds() {
        let heff = HermitianOperator::identity(8).scale(3.0);
        let sched = AnnealSchedule::transverse(5.0, 50, 3).unwrap();
        let out = quantum_anneal(&heff, &sched).unwrap();
        assert!((out.success_prob - 1.0).abs() < 1e-10);
    }

    #[test]
    fn anneal_without_time_stays_uniform() {
        let heff = HermitianOperator::from_real_diagonal(&[3.0, 1.0, 2.0, 5.0]).unwrap();
        let sched = AnnealSchedule::transverse(0.0, 1, 2).unwrap();
        let out = quantum_anneal(&heff, &sched).unwrap();
        assert!((out.success_prob - 0.25).abs() < 1e-12);
    }

    #[test]
    fn degenerate_driver_rejected() {
        let r = AnnealSchedule::new(1.0, 10, HermitianOperator::identity(4));
        assert!(matches!(r, Err(Error::Schedule(_))));
        assert!(AnnealSchedule::transverse(1.0, 0, 2).is_err());
        let heff = HermitianOperator::new(transverse_field(2).into_matrix()).unwrap();
        let sched = AnnealSchedule::transverse(1.0, 4, 2).unwrap();
        assert!(matches!(quantum_anneal(&heff, &sched), Err(Error::InvalidOperator(_))));
    }

    #[test]
    fn single_model_anneal_converges() {
        // m = 1, n = 2: codes decode to {0, +w, −0, −w}.
        let ms = ModelSet::pauli_smoothed(0.1).unwrap().subset(&[1]).unwrap();
        let mu = ms.models()[0].clone();
        let spec = ObjectiveSpec::new(ms, mu, 1.0, Omega0Mode::FixedZero).unwrap();
        let reg = register(2, 1, 1.0);
        let heff = build_h_eff_exact(&spec, &reg).unwrap();
        let mut last = 0.0;
        for t in [1.0, 4.0, 16.0, 64.0] {
            let sched = AnnealSchedule::transverse(t, (t * 20.0) as usize, 2).unwrap();
            let p = quantum_anneal(&heff, &sched).unwrap().success_prob;
            assert!(p >= last - 0.02, "T = {t}: {p} < {last}");
            last = p;
        }
        assert!(last > 0.9);
    }
}
