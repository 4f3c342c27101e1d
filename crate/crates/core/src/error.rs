use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: u32, right: u32 },

    #[error("level must be positive")]
    ZeroLevel,

    #[error("element is zero in Q(zeta_{0}) and has no inverse")]
    NotInvertible(u32),

    #[error("non-holomorphic series E^(2)_{{(0,0)}} excluded")]
    NonHolomorphic,

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("invalid relation instance: {0}")]
    InvalidInstance(String),

    #[error("tau must lie in the upper half-plane (got Im tau = {0})")]
    NotUpperHalfPlane(f64),

    #[error("point lies on the lattice Z tau + Z")]
    LatticePoint,

    #[error("weight {0} has no absolutely convergent lattice sum (need k >= 3)")]
    LatticeWeight(u32),

    #[error("finite-difference step {h} too large for lattice distance {distance}")]
    StepTooLarge { h: f64, distance: f64 },

    #[error("matrix is not in SL2(Z) (determinant {0})")]
    NotUnimodular(i64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Parse(String),
}
