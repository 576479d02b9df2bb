//! Classical simulation of boson sampling with partially distinguishable and
//! lossy photons.
//!
//! The sampler mixes exact permanent-based sampling of a bounded number of
//! indistinguishable photons with independent propagation of the rest. The
//! [`oracle`] module computes exact output tables for small systems, and
//! [`bounds`] and [`costmodel`] give the error and runtime trade-offs against
//! point truncation.

pub mod bounds;
pub mod costmodel;
pub mod error;
pub mod interferometer;
pub mod oracle;
pub mod permanent;
pub mod sampler;
pub mod stats;
pub mod types;

pub use error::{Error, Result};
pub use interferometer::{fourier, haar_random, load_matrix, save_matrix};
pub use oracle::{gram_distribution, ideal_distribution, lossy_mixture_distribution, mixture_distribution, GramMatrix};
pub use permanent::{permanent_naive, permanent_ryser};
pub use sampler::{sample_batch, SamplerConfig};
pub use types::{CMatrix, FockVector, Interferometer, NoiseModel, OutcomeDistribution, OutputSample, TruncationLevel};
