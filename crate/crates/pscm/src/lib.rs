//! Probabilistically shaped coded modulation (PSCM) for square QAM.
//!
//! The crate implements the full link-level chain for shaped QAM over AWGN:
//!
//! - [`constellation`] — Gray-labeled QAM constellations, sign/amplitude bit
//!   decomposition, energies, entropies, Maxwell-Boltzmann distributions and
//!   the power-preserving scaling factor.
//! - [`shaping`] — enumerative sphere shaping: a fixed-length distribution
//!   matcher that bijectively indexes the 2^k lowest-energy amplitude
//!   sequences, plus exact amplitude-probability computation.
//! - [`framing`] — the integer code-block arrangement (frame multipliers via
//!   LCM), rate bookkeeping, and the scatter/gather between FEC codewords and
//!   mapper-ready symbol labels.
//! - [`ldpc`] — sparse binary parity-check codes: seeded progressive edge
//!   growth construction, alist I/O, systematic encoding and iterative
//!   belief-propagation decoding (sum-product and scaled min-sum).
//! - [`channel`] — symbol mapping, AWGN, Eb/N0 bookkeeping and prior-aware
//!   bitwise LLR demapping (exact log-MAP and max-log).
//! - [`sim`] — the end-to-end Monte Carlo BLER harness with deterministic
//!   parallel execution and CSV/JSON result output.

pub mod channel;
pub mod constellation;
pub mod framing;
pub mod ldpc;
pub mod shaping;
pub mod sim;

pub use channel::{awgn, ebno_to_sigma2, DemapKernel, Demapper, NoiseSpec};
pub use constellation::ShapedConstellation;
pub use framing::{assemble, disassemble, CodeBlockLayout, Disassembled, Interleaver};
pub use ldpc::{DecodeConfig, DecodeKernel, DecodeOutput, ParityCheckCode};
pub use shaping::{Deshaped, EssCodebook};
pub use sim::{BlerRecord, ExperimentConfig, ShapingMode, SweepResult};

/// Errors produced by constructors and operations across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported QAM order {0}: expected one of 4, 16, 64, 256")]
    UnsupportedOrder(usize),

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("target entropy {target} bits outside (0, {max}] bits")]
    EntropyTargetOutOfRange { target: f64, max: f64 },

    #[error(
        "target entropy {target} bits unreachable: the Maxwell-Boltzmann family on this \
         constellation has entropy infimum {floor} bits (equal mass on the minimal-energy points)"
    )]
    EntropyTargetUnreachable { target: f64, floor: f64 },

    #[error("shaped distribution has zero energy")]
    ZeroShapedEnergy,

    #[error("shaper parameters rejected: {0}")]
    ShaperParams(String),

    #[error("code block layout rejected: {0}")]
    Layout(String),

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("alist parse error at line {line}: {message}")]
    AlistParse { line: usize, message: String },

    #[error("LDPC construction failed: {0}")]
    CodeConstruction(String),

    #[error("non-finite LLR at position {0}")]
    NonFiniteLlr(usize),

    #[error("noise specification rejected: {0}")]
    NoiseSpec(String),

    #[error("experiment configuration rejected: {0}")]
    Config(String),

    #[error("constellation table parse error at line {line}: {message}")]
    TableParse { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
