pub mod bart;
pub mod bvar;
pub mod config;
pub mod copula;
pub mod data;
pub mod marginals;
pub mod metrics;
pub mod microsim;
pub mod pipeline;
pub mod regression;
pub mod rng;
pub mod stats;
pub mod svg;
