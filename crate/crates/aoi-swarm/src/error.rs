use thiserror::Error;

/// Errors raised by configuration validation and the learning stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The transmit window is too short to deliver a single packet, so the
    /// per-frame cluster capacity floor(R*Lc / (k*M*v)) comes out to zero.
    #[error(
        "cluster capacity is zero: rate {rate_bps} b/s over a {cell_size_m} m cell at \
         {velocity_mps} m/s cannot deliver one {packet_bits}-bit packet per frame \
         ({duplex} duplex); raise the transmission rate"
    )]
    CapacityTooLow {
        rate_bps: f64,
        cell_size_m: f64,
        velocity_mps: f64,
        packet_bits: f64,
        duplex: &'static str,
    },

    /// Joint action spaces grow as (5*C)^U; past the cap a centralized
    /// learner cannot be trained in any reasonable time (the dimensionality
    /// curse), so the run is refused instead of silently thrashing.
    #[error(
        "joint action space has {size} entries for {uavs} UAVs x {clusters} clusters, above \
         the cap of {cap} (dimensionality curse); set `joint_space_cap` higher to override"
    )]
    JointSpaceTooLarge {
        size: u128,
        uavs: usize,
        clusters: usize,
        cap: u128,
    },

    #[error("discrete state space too large: {0} state-action pairs exceed the cap of {1}")]
    StateCapExceeded(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("action mask has no valid entry")]
    NoValidAction,

    #[error("unsupported checkpoint version {0} (expected {1})")]
    CheckpointVersion(u32, u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("failed to parse {path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
