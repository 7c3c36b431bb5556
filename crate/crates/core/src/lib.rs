//! RANKING greedy matching on general graphs, with the structural oracles,
//! bucketed rank vectors and gain-sharing functions used to analyse it.

pub mod engine;
pub mod error;
pub mod gain;
pub mod graph;
pub mod oracles;
pub mod rank;

pub use engine::{run_ranking, views_agree, Engine, View};
pub use error::{Error, Result};
pub use graph::{Graph, Matching, Vertex};
pub use rank::{BucketedRankVector, EdgeProbeTime, Permutation, Rank};
