use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    /// Applying a symbol left an imaginary part larger than the round-trip tolerance.
    #[error("symbol `{symbol}` does not map real fields to real fields (imaginary residue {residue:e})")]
    SymbolParity { symbol: String, residue: f64 },

    #[error("numerical blow-up at t={t}")]
    NumericalBlowup { t: f64 },

    #[error("time step {dt} violates the RK4 stability guard (dt*omega_max = {product:.3} > 2.8)")]
    Stability { dt: f64, product: f64 },

    #[error("cavitation at t={t}: min(1+eta) = {min_depth} fell below the floor {floor}")]
    Cavitation { t: f64, min_depth: f64, floor: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series has {len} samples, at least 3 are required")]
    InsufficientData { len: usize },

    /// RHS of an inequality vanished while its LHS did not; this points at a bug, not a counterexample.
    #[error("inconsistent estimate `{estimate}`: lhs={lhs:e} with rhs={rhs:e}")]
    Inconsistency { estimate: String, lhs: f64, rhs: f64 },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
