//! Maximum-entropy quantum state tomography.
//!
//! Target states are approximated by `ρ(ω) = exp(ω₀ I + Σᵢ ωᵢ ηᵢ)` with `ηᵢ = −ln ρᵢ` built
//! from a set of full-rank model states. Fitting the classical parameters `ω` means minimizing
//! `E(ω) = −tr(μ ln ρ(ω)) + α (tr ρ(ω) − 1)²`, either classically (random or exhaustive search
//! over fixed-point codes) or by simulating the register dynamics whose effective Hamiltonian
//! has `E` on its diagonal and annealing into its ground state.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod maxent;
pub mod metrics;
pub mod models;
pub mod search;
pub mod targets;

pub use error::{Error, Result};
pub use linalg::{DensityMatrix, HermitianOperator, Spectrum};
pub use maxent::{Omega0Mode, ParamVector};
pub use metrics::ObjectiveSpec;
pub use models::ModelSet;
pub use search::{CodingScheme, ParamCode, SearchResult};
