//! Model sets: full-rank states `ρᵢ` and their log operators `ηᵢ = −ln ρᵢ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c, commutator, eig_hermitian, log_hermitian, CMatrix, DensityMatrix, HermitianOperator,
};

/// Smallest eigenvalue a model may have and still count as full rank.
pub const FULL_RANK_TOL: f64 = 1e-12;

const COMMUTE_TOL: f64 = 1e-10;

/// Ordered models `ρ₁..ρ_m` together with `η₀ = I` and `ηᵢ = −ln ρᵢ`.
#[derive(Clone, Debug)]
pub struct ModelSet {
    dim: usize,
    models: Vec<DensityMatrix>,
    etas: Vec<HermitianOperator>,
    epsilon: Option<f64>,
}

impl ModelSet {
    /// Builds a model set from arbitrary full-rank states of a common dimension.
    pub fn custom(states: Vec<DensityMatrix>) -> Result<Self> {
        let dim = states
            .first()
            .map(DensityMatrix::dim)
            .ok_or_else(|| Error::Parameter("model set must not be empty".into()))?;
        let mut etas = Vec::with_capacity(states.len() + 1);
        etas.push(HermitianOperator::identity(dim));
        for (i, rho) in states.iter().enumerate() {
            if rho.dim() != dim {
                return Err(Error::Dimension { expected: dim, found: rho.dim() });
            }
            let min = eig_hermitian(rho.op())?.min_eigenvalue();
            if min < FULL_RANK_TOL {
                return Err(Error::Rank { index: i + 1, eigenvalue: min });
            }
            etas.push(log_hermitian(rho.op())?.scale(-1.0));
        }
        Ok(Self { dim, models: states, etas, epsilon: None })
    }

    /// The six smoothed Pauli eigenstate models in the order z+, z−, x+, x−, y+, y−.
    pub fn pauli_smoothed(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let a = 1.0 - epsilon;
        let i = Complex64::i();
        let half = |m: [Complex64; 4]| {
            DensityMatrix::from_matrix(CMatrix::from_row_slice(2, 2, &m) * c(0.5))
        };
        let states = vec![
            half([c(2.0 - epsilon), c(0.0), c(0.0), c(epsilon)])?,
            half([c(epsilon), c(0.0), c(0.0), c(2.0 - epsilon)])?,
            half([c(1.0), c(a), c(a), c(1.0)])?,
            half([c(1.0), c(-a), c(-a), c(1.0)])?,
            half([c(1.0), -i * a, i * a, c(1.0)])?,
            half([c(1.0), i * a, -i * a, c(1.0)])?,
        ];
        let mut set = Self::custom(states)?;
        set.epsilon = Some(epsilon);
        Ok(set)
    }

    /// Keeps the models at the given 1-based indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut models = Vec::with_capacity(indices.len());
        for &i in indices {
            if i == 0 || i > self.len() {
                return Err(Error::Parameter(format!("model index {i} out of range 1..={}", self.len())));
            }
            models.push(self.models[i - 1].clone());
        }
        let mut set = Self::custom(models)?;
        set.epsilon = self.epsilon;
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of models `m`.
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn models(&self) -> &[DensityMatrix] {
        &self.models
    }

    /// `η₀ = I` followed by `η₁..η_m`.
    pub fn etas(&self) -> &[HermitianOperator] {
        &self.etas
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// True when every pair of models commutes (Frobenius norm of the commutator < 1e-10).
    pub fn is_commuting(&self) -> bool {
        self.models.iter().enumerate().all(|(i, a)| {
            self.models[i + 1..]
                .iter()
                .all(|b| commutator(a.op(), b.op()).map(|m| m.norm() < COMMUTE_TOL).unwrap_or(false))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::exp_hermitian;

    #[test]
    fn pauli_models_match_closed_form() {
        let ms = ModelSet::pauli_smoothed(0.1).unwrap();
        assert_eq!(ms.len(), 6);
        let r1 = ms.models()[0].matrix();
        assert!((r1[(0, 0)].re - 0.95).abs() < 1e-15 && (r1[(1, 1)].re - 0.05).abs() < 1e-15);
        let r3 = ms.models()[2].matrix();
        assert!((r3[(0, 1)].re - 0.45).abs() < 1e-15 && (r3[(1, 0)].re - 0.45).abs() < 1e-15);
        let r5 = ms.models()[4].matrix();
        assert!((r5[(0, 1)] - Complex64::new(0.0, -0.45)).norm() < 1e-15);
        let total: f64 = ms.models().iter().map(|m| m.trace()).sum();
        assert!((total - 6.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_models_are_pairwise_complements() {
        for eps in [0.01, 0.1, 0.5] {
            let ms = ModelSet::pauli_smoothed(eps).unwrap();
            for pair in ms.models().chunks(2) {
                let sum = pair[0].op().add(pair[1].op()).unwrap();
                assert!(sum.frobenius_distance(&HermitianOperator::identity(2)) < 1e-14);
            }
            for rho in ms.models() {
                assert!(rho.min_eigenvalue() >= eps / 4.0);
            }
        }
    }

    #[test]
    fn etas_round_trip() {
        let ms = ModelSet::pauli_smoothed(0.1).unwrap();
        assert_eq!(ms.etas()[0], HermitianOperator::identity(2));
        for (rho, eta) in ms.models().iter().zip(&ms.etas()[1..]) {
            let back = exp_hermitian(&eta.scale(-1.0)).unwrap();
            assert!(back.frobenius_distance(rho.op()) < 1e-9);
        }
    }

    #[test]
    fn epsilon_bounds() {
        for eps in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(ModelSet::pauli_smoothed(eps), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn custom_examples() {
        let a = DensityMatrix::new(HermitianOperator::from_real_diagonal(&[0.95, 0.05]).unwrap()).unwrap();
        let b = DensityMatrix::new(HermitianOperator::from_real_diagonal(&[0.05, 0.95]).unwrap()).unwrap();
        let ms = ModelSet::custom(vec![a, b]).unwrap();
        assert_eq!(ms.len(), 2);

        let pure = DensityMatrix::basis_state(2, 0).unwrap();
        assert!(matches!(ModelSet::custom(vec![pure]), Err(Error::Rank { index: 1, .. })));

        let ms = ModelSet::custom(vec![DensityMatrix::maximally_mixed(2)]).unwrap();
        let expected = HermitianOperator::identity(2).scale(2f64.ln());
        assert!(ms.etas()[1].frobenius_distance(&expected) < 1e-14);
    }

    #[test]
    fn custom_rejects_mixed_dims_and_empty() {
        assert!(ModelSet::custom(vec![]).is_err());
        let r = ModelSet::custom(vec![DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(3)]);
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }

    #[test]
    fn commutation() {
        let diag = |p: f64| DensityMatrix::new(HermitianOperator::from_real_diagonal(&[p, 1.0 - p]).unwrap()).unwrap();
        assert!(ModelSet::custom(vec![diag(0.2), diag(0.7), diag(0.9)]).unwrap().is_commuting());
        assert!(!ModelSet::pauli_smoothed(0.1).unwrap().is_commuting());
        assert!(ModelSet::custom(vec![diag(0.3)]).unwrap().is_commuting());
    }

    #[test]
    fn subset_keeps_order() {
        let ms = ModelSet::pauli_smoothed(0.1).unwrap();
        let sub = ms.subset(&[3, 1]).unwrap();
        assert_eq!(sub.models()[0], ms.models()[2]);
        assert_eq!(sub.models()[1], ms.models()[0]);
        assert!(ms.subset(&[7]).is_err());
    }
}
