//! Target state generators.
//!
//! Random targets draw from ChaCha8 seeded with `seed` on stream 1, so they never share a
//! stream with a search using the same seed (searches use stream 0).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, DensityMatrix, HermitianOperator};

pub(crate) const TARGET_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    /// Haar-random pure state.
    Pure,
    /// Hilbert–Schmidt ensemble: `G G† / tr(G G†)` with complex Gaussian `G`.
    Mixed,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Pure => "pure",
            TargetKind::Mixed => "mixed",
        }
    }
}

impl std::str::FromStr for TargetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pure" => Ok(TargetKind::Pure),
            "mixed" => Ok(TargetKind::Mixed),
            other => Err(Error::Parameter(format!("unknown target kind '{other}'"))),
        }
    }
}

/// Real pure qubit state `cos θ |0⟩ + sin θ |1⟩` as a projector.
pub fn gen_target_pure(theta: f64) -> DensityMatrix {
    let (s, co) = theta.sin_cos();
    let m = CMatrix::from_row_slice(2, 2, &[c(co * co), c(s * co), c(s * co), c(s * s)]);
    DensityMatrix::from_evolved(m)
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn gen_target_random(dim: usize, kind: TargetKind, seed: u64) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::Parameter(format!("target dimension must be at least 2, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TARGET_STREAM);
    match kind {
        TargetKind::Pure => {
            let psi: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(&mut rng)).collect();
            DensityMatrix::pure(&psi)
        }
        TargetKind::Mixed => {
            let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut rng));
            let w = HermitianOperator::new(&g * g.adjoint())?;
            DensityMatrix::normalize(&w)
        }
    }
}
