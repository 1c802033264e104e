//! Synaptic traces and weight-update rules: adaptive synaptic plasticity
//! (recovery plus activity-modulated decay), power-law STDP, and isolated
//! weight decay.

mod config;
mod learner;
mod rules;
mod traces;

pub use config::{DecayMode, PlasticityConfig, Rule, TAU_LEAK_EXPONENT_CAP};
pub use learner::Learner;
pub use rules::{
    asp_decay_step, asp_recovery_dw, asp_recovery_update, compute_tau_leak,
    isolated_decay_update, stdp_powerlaw_dw, stdp_powerlaw_update, IsolatedTrace, WeightDelta,
};
pub use traces::{bump_traces, decay_traces, TraceDecay, TraceState};
