use thiserror::Error;

use crate::grid::Representation;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids do not match")]
    GridMismatch,

    #[error("expected a {expected} representation, found {found}")]
    WrongRepresentation {
        expected: Representation,
        found: Representation,
    },

    #[error("amplitude array has {found} samples, grid has {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("wavefunction has zero norm")]
    ZeroNorm,

    #[error("state does not fit the grid: {0}")]
    GridTooSmall(String),

    #[error("density matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("density matrix has trace {0} (expected 1)")]
    InvalidTrace(f64),

    #[error("|psi| at the reference point is {0:e}; pick a state that does not vanish at q = 0")]
    ReferenceTooSmall(f64),

    #[error("state is not pure (purity {0})")]
    NotPure(f64),

    #[error("negative variance {0:e}; input is not a physical state")]
    NegativeVariance(f64),

    #[error("filter transmits nothing (transmitted fraction {0:e})")]
    ZeroTransmission(f64),

    #[error("offset {value} is not a multiple of the lattice spacing {spacing}")]
    OffsetOffLattice { value: f64, spacing: f64 },

    #[error(
        "q = 0 is not a lattice point; displacement-indexed devices need a grid through the origin"
    )]
    OriginOffLattice,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt} exceeds the stability bound {bound}")]
    StabilityBound { dt: f64, bound: f64 },

    #[error("evolution became unstable at step {step} (mass drift {drift:e})")]
    MassDrift { step: usize, drift: f64 },

    #[error("wavefunction reached the grid edge at step {step} (amplitude {amplitude:e})")]
    EdgeBreach { step: usize, amplitude: f64 },

    #[error("unphysical distribution: {0}")]
    Unphysical(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by files, schemas or arguments rather than by
    /// the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Json(_)
                | Error::Format(_)
                | Error::InvalidGrid(_)
                | Error::InvalidParameter(_)
                | Error::LengthMismatch { .. }
                | Error::GridMismatch
                | Error::WrongRepresentation { .. }
                | Error::OffsetOffLattice { .. }
                | Error::OriginOffLattice
                | Error::StabilityBound { .. }
                | Error::GridTooSmall(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
