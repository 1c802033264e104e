//! Fixed-timestep leaky integrate-and-fire engine.

mod network;
mod neuron;
mod presentation;
mod spikes;
mod weights;

pub use network::{Network, NetworkParams, SimClock, StepResult};
pub use neuron::{
    apply_homeostasis, update_membrane, Homeostasis, LifKernel, LifParams, NeuronState,
};
pub use presentation::{run_presentation, PresentationParams, PresentationResult, StepHook};
pub use spikes::SpikeSet;
pub use weights::{clamp_weights, WeightMatrix};
