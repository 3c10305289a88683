//! Hybrid policy search: a canonical Evolution Strategy over flat policy
//! genomes, a TD3 learner trained on population rollouts, actor injection,
//! and genetic drift regularization of the actor loss.

pub mod envs;
pub mod error;
pub mod es;
pub mod genome;
pub mod gradcheck;
pub mod harness;
pub mod injection;
pub mod nn;
pub mod rng;
pub mod td3;

pub use error::{Error, Result};
