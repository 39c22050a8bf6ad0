//! Achievable-rate upper bounds and decoding-complexity lower bounds for
//! LDPC ensembles over parallel memoryless binary-input output-symmetric
//! channels, with specializations to randomly and intentionally punctured
//! codes, plus the threshold solvers (capacity limit, ML bound, density
//! evolution) that drive the comparison tables.

pub mod bounds_rate;
pub mod channel;
pub mod code_entropy;
pub mod complexity;
pub mod degree;
pub mod error;
pub mod parallel;
pub mod quad;
pub mod thresholds;

pub use bounds_rate::{
    punctured_design_rate, rate_bound_bec, rate_bound_ip, rate_bound_parallel, rate_bound_rp,
    BoundResult,
};
pub use channel::{ChannelModel, DiscreteMbios, EffectiveChannel, Mbios, NumericControls};
pub use code_entropy::{BitAssignment, ParityCheckMatrix};
pub use complexity::{ComplexityBound, ComplexityVariant};
pub use degree::{design_rate, DegreePolynomial, EnsembleSpec, Perspective, Side};
pub use error::{Error, Result};
pub use parallel::{ParallelAssignment, PuncturingSpec};
pub use thresholds::de::DEControls;
pub use thresholds::{
    capacity_limit, de_threshold, ml_threshold, table_report, ChannelFamily, ThresholdRow,
};
