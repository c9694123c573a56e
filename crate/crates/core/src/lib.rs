//! Counterfactual explanations for group recommendations.
//!
//! Given a group, its interaction history I_G and a recommended item t, find
//! a small set of items E ⊆ I_G such that t leaves the group's top-m list once
//! E is removed from every member's history.
//!
//! Computations are generic over a [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod metrics;
pub mod pareto;
pub mod recommender;
pub mod scalar;
pub mod search;
pub mod synth;

pub use dataset::{Group, GroupInteractions, ItemId, ItemSet, RatingsDataset, UserId};
pub use error::{BudgetExhausted, Error, Result};
pub use recommender::{CallMeter, GroupRecommender, RecommendationList, UserKnn};
pub use scalar::Scalar;
pub use search::{explain_target, Explanation, Method, RunRequest, SearchConfig};

pub type Dataset = RatingsDataset<f64>;
pub type Recommendations = RecommendationList<f64>;
pub type MetricVector = metrics::ItemMetricVector<f64>;
pub type Report = eval::ExplanationReport<f64>;
pub type Knn<'a> = UserKnn<'a, f64>;
