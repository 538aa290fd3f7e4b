//! Technological relatedness networks and coherent diversification of firm
//! patent portfolios.
//!
//! The pipeline runs from raw patent-family records to a firms ×
//! technologies matrix ([`ingest`]), projects it onto technology ×
//! technology relatedness matrices ([`relatedness`]), scores each firm's
//! portfolio ([`coherence`]) and relates the scores to labor productivity
//! ([`econometrics`]). [`synth`] generates populations with planted product
//! lines so that the whole chain can be checked without proprietary data.

pub mod coherence;
pub mod econometrics;
pub mod ingest;
pub mod ipc;
pub mod matrix;
pub mod pipeline;
pub mod relatedness;
pub mod synth;

pub use matrix::BipartiteMatrix;
pub use relatedness::RelatednessMatrix;
