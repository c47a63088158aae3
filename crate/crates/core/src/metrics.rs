//! Entropies, fidelity and the tomography objective `E(ω)`.

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, eigenvalues_hermitian, log_hermitian, sqrt_psd, trace_product, DensityMatrix,
    HermitianOperator, LOG_EIGENVALUE_FLOOR,
};
use crate::maxent::{self, log_sum_exp, Omega0Mode, ParamVector};
use crate::models::ModelSet;

/// Default weight of the trace penalty.
pub const DEFAULT_ALPHA: f64 = 100.0;

const SUPPORT_TOL: f64 = 1e-10;

/// `S(ρ) = −Σ λ ln λ`, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    eigenvalues_hermitian(rho.op())
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}

/// `D(μ; ρ) = −tr(μ ln ρ)` for a positive definite, not necessarily normalized, `ρ`.
pub fn cross_term_d(mu: &DensityMatrix, rho_pos: &HermitianOperator) -> Result<f64> {
    let ln_rho = log_hermitian(rho_pos)?;
    Ok(-mu.op().trace_product(&ln_rho)?)
}

/// Quantum relative entropy `tr(μ ln μ) − tr(μ ln ρ)`.
///
/// `ρ` may be singular as long as `μ` has no weight on its kernel.
pub fn relative_entropy(mu: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    if mu.dim() != rho.dim() {
        return Err(Error::Dimension { expected: mu.dim(), found: rho.dim() });
    }
    let spec = eig_hermitian(rho.op())?;
    let mut cross = 0.0;
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        let v = spec.eigenvectors.column(k);
        let weight = (v.adjoint() * mu.matrix() * v)[(0, 0)].re;
        if lam <= LOG_EIGENVALUE_FLOOR {
            if weight > SUPPORT_TOL {
                return Err(Error::Domain { eigenvalue: lam });
            }
        } else {
            cross -= weight * lam.ln();
        }
    }
    Ok(cross - von_neumann_entropy(mu))
}

/// Uhlmann fidelity `[tr √(√μ ρ √μ)]²`.
pub fn fidelity(mu: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    if mu.dim() != rho.dim() {
        return Err(Error::Dimension { expected: mu.dim(), found: rho.dim() });
    }
    let product = sqrt_psd(mu.op())?.matrix() * sqrt_psd(rho.op())?.matrix();
    let nuclear: f64 = product.singular_values().iter().sum();
    Ok(nuclear * nuclear)
}

/// Everything needed to evaluate `E(ω) = D(μ; ρ(ω)) + α (tr ρ(ω) − 1)²`.
#[derive(Clone, Debug)]
pub struct ObjectiveSpec {
    models: ModelSet,
    target: DensityMatrix,
    alpha: f64,
    omega0_mode: Omega0Mode,
    // tr(μ ηᵢ) for i = 1..m
    eta_expectations: Vec<f64>,
}

impl ObjectiveSpec {
    pub fn new(models: ModelSet, target: DensityMatrix, alpha: f64, omega0_mode: Omega0Mode) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be finite and non-negative, got {alpha}")));
        }
        if target.dim() != models.dim() {
            return Err(Error::Dimension { expected: models.dim(), found: target.dim() });
        }
        let eta_expectations = models.etas()[1..]
            .iter()
            .map(|eta| trace_product(target.matrix(), eta.matrix()).re)
            .collect();
        Ok(Self { models, target, alpha, omega0_mode, eta_expectations })
    }

    pub fn models(&self) -> &ModelSet {
        &self.models
    }

    pub fn target(&self) -> &DensityMatrix {
        &self.target
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega0_mode(&self) -> Omega0Mode {
        self.omega0_mode
    }

    /// Number of searched parameters: `m`, plus one for `ω₀` in [`Omega0Mode::Free`].
    pub fn num_params(&self) -> usize {
        self.models.len() + usize::from(self.omega0_mode == Omega0Mode::Free)
    }

    /// Splits a searched parameter vector into `(ω₀, ω)`, resolving `ω₀` by mode.
    pub fn resolve(&self, params: &[f64]) -> Result<ParamVector> {
        if params.len() != self.num_params() {
            return Err(Error::Dimension { expected: self.num_params(), found: params.len() });
        }
        let (omega0, omegas) = match self.omega0_mode {
            Omega0Mode::FixedZero => (0.0, params.to_vec()),
            Omega0Mode::Analytic => (maxent::omega0_normalizing(&self.models, params)?, params.to_vec()),
            Omega0Mode::Free => (params[0], params[1..].to_vec()),
        };
        Ok(ParamVector { omega0, omegas })
    }

    /// `E` at `(ω₀, ω)`. `FixedZero` ignores `omega0` and uses 0, `Analytic` replaces it with the
    /// normalizing value (the penalty then vanishes), `Free` uses it as given.
    pub fn objective(&self, omegas: &[f64], omega0: f64) -> Result<f64> {
        if omegas.len() != self.models.len() {
            return Err(Error::Dimension { expected: self.models.len(), found: omegas.len() });
        }
        // ln ρ(ω) is the exponent itself, so D is linear in ω.
        let linear: f64 = omegas.iter().zip(&self.eta_expectations).map(|(w, e)| w * e).sum();
        let ev = eigenvalues_hermitian(&maxent::weighted_etas(&self.models, omegas)?);
        let lse = log_sum_exp(&ev);
        Ok(match self.omega0_mode {
            Omega0Mode::Analytic => lse - linear,
            Omega0Mode::FixedZero | Omega0Mode::Free => {
                let w0 = if self.omega0_mode == Omega0Mode::FixedZero { 0.0 } else { omega0 };
                let trace = (w0 + lse).exp();
                -w0 - linear + self.alpha * (trace - 1.0) * (trace - 1.0)
            }
        })
    }

    /// `E` at a searched parameter vector.
    pub fn evaluate(&self, params: &[f64]) -> Result<f64> {
        if params.len() != self.num_params() {
            return Err(Error::Dimension { expected: self.num_params(), found: params.len() });
        }
        match self.omega0_mode {
            Omega0Mode::Free => self.objective(&params[1..], params[0]),
            _ => self.objective(params, 0.0),
        }
    }

    /// The tomography output `ρ_R` for a searched parameter vector.
    pub fn reconstruct(&self, params: &[f64]) -> Result<DensityMatrix> {
        maxent::rho_normalized(&self.models, &self.resolve(params)?)
    }

    /// `F(μ, ρ_R)` for a searched parameter vector.
    pub fn fidelity_of(&self, params: &[f64]) -> Result<f64> {
        fidelity(&self.target, &self.reconstruct(params)?)
    }
}

/// Fidelity of `mu` with the maximally mixed state of its dimension.
pub fn fidelity_with_maximally_mixed(mu: &DensityMatrix) -> Result<f64> {
    fidelity(mu, &DensityMatrix::maximally_mixed(mu.dim()))
}

/// `tr(μ ηᵢ)`, the mean code lengths of `μ` under each model.
pub fn mean_code_lengths(ms: &ModelSet, mu: &DensityMatrix) -> Vec<f64> {
    ms.etas()[1..].iter().map(|eta| trace_product(mu.matrix(), eta.matrix()).re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxent::rho_unnormalized;
    use crate::targets::{gen_target_pure, gen_target_random, TargetKind};
    use rand::{Rng, SeedableRng};

    fn diag(p: f64) -> DensityMatrix {
        DensityMatrix::new(HermitianOperator::from_real_diagonal(&[p, 1.0 - p]).unwrap()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&gen_target_pure(0.3)).abs() < 1e-9);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)) - 2f64.ln()).abs() < 1e-15);
        let expected = -0.95 * 0.95f64.ln() - 0.05 * 0.05f64.ln();
        assert!((von_neumann_entropy(&diag(0.95)) - expected).abs() < 1e-14);
    }

    #[test]
    fn cross_term_examples() {
        let mu = gen_target_random(2, TargetKind::Mixed, 4).unwrap();
        let half = HermitianOperator::identity(2).scale(0.5);
        assert!((cross_term_d(&mu, &half).unwrap() - 2f64.ln()).abs() < 1e-14);
        let mu0 = gen_target_pure(0.0);
        assert!((cross_term_d(&mu0, diag(0.95).op()).unwrap() + 0.95f64.ln()).abs() < 1e-14);
        for seed in 0..10 {
            let mu = gen_target_random(3, TargetKind::Mixed, seed).unwrap();
            assert!((cross_term_d(&mu, mu.op()).unwrap() - von_neumann_entropy(&mu)).abs() < 1e-10);
        }
        assert!(matches!(cross_term_d(&mu0, mu0.op()), Err(Error::Domain { .. })));
    }

    #[test]
    fn relative_entropy_examples() {
        let r1 = diag(0.95);
        assert!(relative_entropy(&r1, &r1).unwrap().abs() < 1e-14);
        let mu0 = gen_target_pure(0.0);
        assert!((relative_entropy(&mu0, &r1).unwrap() + 0.95f64.ln()).abs() < 1e-14);
        let half = DensityMatrix::maximally_mixed(2);
        let expected = -(2f64.ln()) + ((1.0 / 0.95f64).ln() + (1.0 / 0.05f64).ln()) / 2.0;
        assert!((relative_entropy(&half, &r1).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_support() {
        let p0 = gen_target_pure(0.0);
        assert!(relative_entropy(&p0, &p0).unwrap().abs() < 1e-12);
        let p1 = gen_target_pure(std::f64::consts::FRAC_PI_2);
        assert!(matches!(relative_entropy(&p0, &p1), Err(Error::Domain { .. })));
    }

    #[test]
    fn relative_entropy_nonnegative_on_random_pairs() {
        for seed in 0..1000 {
            let mu = gen_target_random(2, TargetKind::Mixed, seed).unwrap();
            let rho = gen_target_random(2, TargetKind::Mixed, 10_000 + seed).unwrap();
            let r = relative_entropy(&mu, &rho).unwrap();
            let dist = mu.op().frobenius_distance(rho.op());
            assert!(r >= -1e-10);
            if r < 1e-8 {
                assert!(dist < 1e-6, "zero relative entropy at distance {dist}");
            }
            if dist < 1e-6 {
                assert!(r < 1e-8);
            }
        }
    }

    #[test]
    fn fidelity_examples() {
        let mu = gen_target_random(2, TargetKind::Mixed, 1).unwrap();
        assert!((fidelity(&mu, &mu).unwrap() - 1.0).abs() < 1e-9);
        let mu0 = gen_target_pure(0.0);
        assert!((fidelity(&mu0, &DensityMatrix::maximally_mixed(2)).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&mu0, &diag(0.95)).unwrap() - 0.95).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded() {
        for seed in 0..200 {
            let kind = if seed % 2 == 0 { TargetKind::Pure } else { TargetKind::Mixed };
            let a = gen_target_random(3, kind, seed).unwrap();
            let b = gen_target_random(3, TargetKind::Mixed, 500 + seed).unwrap();
            let f = fidelity(&a, &b).unwrap();
            assert!((0.0..=1.0 + 1e-9).contains(&f));
            assert!((f - fidelity(&b, &a).unwrap()).abs() < 1e-9);
            let dist = a.op().frobenius_distance(b.op());
            assert_eq!((f - 1.0).abs() < 1e-8, dist < 1e-6);
        }
    }

    fn pauli_spec(mu: DensityMatrix, mode: Omega0Mode) -> ObjectiveSpec {
        ObjectiveSpec::new(ModelSet::pauli_smoothed(0.1).unwrap(), mu, DEFAULT_ALPHA, mode).unwrap()
    }

    #[test]
    fn objective_examples() {
        let spec = pauli_spec(gen_target_pure(0.0), Omega0Mode::FixedZero);
        let e = spec.objective(&[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 0.0).unwrap();
        assert!((e + 0.95f64.ln()).abs() < 1e-12);
        let e = spec.objective(&[0.0; 6], 0.0).unwrap();
        assert!((e - 100.0).abs() < 1e-12);
    }

    #[test]
    fn objective_matches_compositional_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for mode in [Omega0Mode::FixedZero, Omega0Mode::Analytic, Omega0Mode::Free] {
            for seed in 0..30 {
                let mu = gen_target_random(2, TargetKind::Mixed, seed).unwrap();
                let spec = pauli_spec(mu.clone(), mode);
                let params: Vec<f64> = (0..spec.num_params()).map(|_| rng.random_range(-1.5..1.5)).collect();
                let w = spec.resolve(&params).unwrap();
                let rho = rho_unnormalized(spec.models(), &w).unwrap();
                let tr = rho.trace();
                let oracle = cross_term_d(&mu, &rho).unwrap() + DEFAULT_ALPHA * (tr - 1.0).powi(2);
                let e = spec.evaluate(&params).unwrap();
                assert!((e - oracle).abs() < 1e-8 * oracle.abs().max(1.0), "{mode:?}: {e} vs {oracle}");
            }
        }
    }

    #[test]
    fn analytic_objective_is_bounded_by_entropy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        for seed in 0..50 {
            let mu = gen_target_random(2, TargetKind::Mixed, 100 + seed).unwrap();
            let spec = pauli_spec(mu.clone(), Omega0Mode::Analytic);
            let s = von_neumann_entropy(&mu);
            for _ in 0..20 {
                let params: Vec<f64> = (0..6).map(|_| rng.random_range(-4.0..4.0)).collect();
                assert!(spec.evaluate(&params).unwrap() >= s - 1e-9);
            }
        }
    }

    #[test]
    fn analytic_objective_attains_entropy_when_representable() {
        let ms = ModelSet::pauli_smoothed(0.1).unwrap();
        let w = ParamVector::new(0.0, vec![-0.7, 0.2, 0.4, -0.1, 0.0, 0.3]).unwrap();
        let mu = maxent::rho_normalized(&ms, &w).unwrap();
        let spec = ObjectiveSpec::new(ms, mu.clone(), DEFAULT_ALPHA, Omega0Mode::Analytic).unwrap();
        assert!((spec.evaluate(&w.omegas).unwrap() - von_neumann_entropy(&mu)).abs() < 1e-6);
    }

    #[test]
    fn negative_alpha_rejected() {
        let r = ObjectiveSpec::new(
            ModelSet::pauli_smoothed(0.1).unwrap(),
            gen_target_pure(0.0),
            -1.0,
            Omega0Mode::FixedZero,
        );
        assert!(matches!(r, Err(Error::Parameter(_))));
    }
}
