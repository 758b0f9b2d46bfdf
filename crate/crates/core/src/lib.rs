//! Verifiable rule-based rewards and molecular tooling for training
//! property-prediction reasoning models.
//!
//! Chemistry (`molgraph`, `patterns`, `descriptors`, `retrieval`,
//! `promptkit`) works in `f64`. The reward, advantage and metric arithmetic
//! is generic over [`Scalar`]; the aliases below fix it to `f64`.

pub mod config;
pub mod curation;
pub mod dataset;
pub mod descriptors;
pub mod evalmetrics;
pub mod grpo;
pub mod molgraph;
pub mod patterns;
pub mod promptkit;
pub mod retrieval;
pub mod reward;
pub mod scalar;
pub mod service;

pub use scalar::Scalar;

/// Version of the request/response and export schemas.
pub const PROTOCOL_VERSION: u32 = 1;
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub type RewardWeights = reward::RewardWeights<f64>;
pub type RewardBreakdown = reward::RewardBreakdown<f64>;
pub type RewardRequest = reward::RewardRequest<f64>;
pub type RewardConfig = reward::RewardConfig<f64>;
pub type RewardEngine = reward::RewardEngine<f64>;
pub type RolloutGroup = grpo::RolloutGroup<f64>;
pub type AdvantageSet = grpo::AdvantageSet<f64>;
pub type ScoredPrediction = evalmetrics::ScoredPrediction<f64>;
pub type MetricsTable = evalmetrics::MetricsTable<f64>;
