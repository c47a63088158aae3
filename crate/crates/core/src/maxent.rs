//! The maximum-entropy parameterization `ρ(ω) = exp(ω₀ I + Σᵢ ωᵢ ηᵢ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, eig_hermitian, eigenvalues_hermitian, DensityMatrix, HermitianOperator,
};
use crate::models::ModelSet;

/// How the normalization parameter `ω₀` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Omega0Mode {
    /// `ω₀ = 0`; normalization is left to the trace penalty.
    #[default]
    FixedZero,
    /// `ω₀ = −ln tr exp(Σ ωᵢ ηᵢ)`, so `ρ(ω)` always has unit trace.
    Analytic,
    /// `ω₀` is searched over like every other parameter.
    Free,
}

impl Omega0Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Omega0Mode::FixedZero => "fixed-zero",
            Omega0Mode::Analytic => "analytic",
            Omega0Mode::Free => "free",
        }
    }
}

impl std::str::FromStr for Omega0Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed-zero" | "fixed_zero" | "zero" => Ok(Omega0Mode::FixedZero),
            "analytic" => Ok(Omega0Mode::Analytic),
            "free" => Ok(Omega0Mode::Free),
            other => Err(Error::Parameter(format!("unknown omega0 mode '{other}'"))),
        }
    }
}

/// `(ω₀, ω₁..ω_m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub omega0: f64,
    pub omegas: Vec<f64>,
}

impl ParamVector {
    pub fn new(omega0: f64, omegas: Vec<f64>) -> Result<Self> {
        if !omega0.is_finite() || omegas.iter().any(|w| !w.is_finite()) {
            return Err(Error::Parameter("parameters must be finite".into()));
        }
        Ok(Self { omega0, omegas })
    }

    pub fn zeros(m: usize) -> Self {
        Self { omega0: 0.0, omegas: vec![0.0; m] }
    }
}

fn check_len(ms: &ModelSet, omegas: &[f64]) -> Result<()> {
    if omegas.len() != ms.len() {
        return Err(Error::Dimension { expected: ms.len(), found: omegas.len() });
    }
    Ok(())
}

/// `Σᵢ ωᵢ ηᵢ` for `i ≥ 1`.
pub fn weighted_etas(ms: &ModelSet, omegas: &[f64]) -> Result<HermitianOperator> {
    check_len(ms, omegas)?;
    let mut m = crate::linalg::CMatrix::zeros(ms.dim(), ms.dim());
    for (w, eta) in omegas.iter().zip(&ms.etas()[1..]) {
        m += eta.matrix() * c(*w);
    }
    HermitianOperator::new(m)
}

/// The exponent `ω₀ I + Σᵢ ωᵢ ηᵢ`, i.e. `ln ρ(ω)`.
pub fn exponent(ms: &ModelSet, w: &ParamVector) -> Result<HermitianOperator> {
    weighted_etas(ms, &w.omegas)?.add(&HermitianOperator::identity(ms.dim()).scale(w.omega0))
}

/// `ρ(ω)` without normalization. Positive definite, trace arbitrary.
pub fn rho_unnormalized(ms: &ModelSet, w: &ParamVector) -> Result<HermitianOperator> {
    let k = exponent(ms, w)?;
    let spec = eig_hermitian(&k)?;
    if spec.max_eigenvalue() > f64::MAX_EXP as f64 * std::f64::consts::LN_2 {
        return Err(Error::Numerical(format!(
            "exp overflows for exponent eigenvalue {}",
            spec.max_eigenvalue()
        )));
    }
    Ok(HermitianOperator::symmetrized(spec.map_complex(|l| c(l.exp()))))
}

/// `ln tr exp(Σᵢ ωᵢ ηᵢ)`, evaluated as a log-sum-exp over the spectrum.
pub fn log_trace_exp(ms: &ModelSet, omegas: &[f64]) -> Result<f64> {
    let ev = eigenvalues_hermitian(&weighted_etas(ms, omegas)?);
    Ok(log_sum_exp(&ev))
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// The `ω₀` that makes `ρ(ω)` unit trace: `−ln tr exp(Σᵢ ωᵢ ηᵢ)`.
pub fn omega0_normalizing(ms: &ModelSet, omegas: &[f64]) -> Result<f64> {
    log_trace_exp(ms, omegas).map(|l| -l)
}

/// `ρ_R(ω) = ρ(ω) / tr ρ(ω)`. Independent of `ω₀`.
pub fn rho_normalized(ms: &ModelSet, w: &ParamVector) -> Result<DensityMatrix> {
    let k = weighted_etas(ms, &w.omegas)?;
    let spec = eig_hermitian(&k)?;
    let shift = spec.max_eigenvalue();
    let z: f64 = spec.eigenvalues.iter().map(|l| (l - shift).exp()).sum();
    let m = spec.map_complex(|l| c((l - shift).exp() / z));
    Ok(DensityMatrix::from_evolved(m))
}
