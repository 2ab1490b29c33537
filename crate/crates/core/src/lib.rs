//! Continuous-time quantum walks `U(t) = exp(−itA)` on weighted graphs:
//! detection and certification of fractional revival, perfect state
//! transfer and periodicity, with the eigenvalue number theory behind them.

pub mod exec;
pub mod graph;
pub mod number;
pub mod report;
pub mod spectral;
pub mod suite;
pub mod walk;

pub use exec::Execution;
pub use graph::{parse_graph_spec, WeightedGraph};
pub use spectral::SpectralDecomposition;
pub use walk::{DetectionConfig, FrCertificate};
