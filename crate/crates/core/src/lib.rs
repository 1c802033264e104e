//! Clock-driven spiking neural network simulator with adaptive synaptic
//! plasticity (ASP), power-law STDP and isolated weight decay, for
//! unsupervised digit recognition in changing environments.

pub mod config;
pub mod dataio;
pub mod encoding;
pub mod error;
pub mod pipeline;
pub mod plasticity;
pub mod selfcheck;
pub mod sim;
pub mod trainer;
pub mod weightmap;

pub use error::{Result, SimError};
