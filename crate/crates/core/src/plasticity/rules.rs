//! Weight-update rules.
//!
//! * ASP recovery, on each postsynaptic spike:
//!   `dw = k1 / (post + 1) * [(pre_rec - offset) - k / 2^pre_acc]`
//! * ASP decay, every step, with a per-neuron leak time constant
//!   `tau_leak = k2 * (post + 1) * 2^(theta / theta_norm)`:
//!   exponential `w *= exp(-alpha dt / tau_leak)` or
//!   linear `w = max(0, w - alpha_lin dt / tau_leak)`.
//! * Power-law STDP, on each postsynaptic spike:
//!   `dw = eta * (pre_rec - offset) * (w_max - w)^mu`.
//! * Isolated decay, every step and independent of the postsynaptic side:
//!   `tau_leak_iso dw/dt = -alpha_iso w + P(t) [input spiked]`.

use super::config::{DecayMode, PlasticityConfig, TAU_LEAK_EXPONENT_CAP};
use super::traces::TraceState;
use crate::sim::{SpikeSet, WeightMatrix};

/// Additive change to one excitatory neuron's incoming weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDelta {
    pub row: usize,
    pub delta: Vec<f64>,
}

impl WeightDelta {
    /// Adds the delta to its row and clamps the row to `[0, w_max]`.
    pub fn apply(&self, weights: &mut WeightMatrix, w_max: f64) {
        weights.update_row(self.row, w_max, |i, w| w + self.delta[i]);
    }
}

/// ASP recovery increment for a single synapse.
#[inline]
pub fn asp_recovery_dw(pre_rec: f64, pre_acc: f64, post: f64, cfg: &PlasticityConfig) -> f64 {
    let eta = cfg.k1_const / (post + 1.0);
    eta * ((pre_rec - cfg.offset) - cfg.k_const * (-pre_acc).exp2())
}

pub fn asp_recovery_update(row: usize, traces: &TraceState, cfg: &PlasticityConfig) -> WeightDelta {
    let post = traces.post[row];
    let delta = traces
        .pre_rec
        .iter()
        .zip(&traces.pre_acc)
        .map(|(&rec, &acc)| asp_recovery_dw(rec, acc, post, cfg))
        .collect();
    WeightDelta { row, delta }
}

#[inline]
pub fn stdp_powerlaw_dw(pre_rec: f64, w: f64, cfg: &PlasticityConfig) -> f64 {
    cfg.eta_stdp * (pre_rec - cfg.offset) * (cfg.w_max - w).max(0.0).powf(cfg.mu)
}

pub fn stdp_powerlaw_update(
    row: usize,
    weights_row: &[f64],
    traces: &TraceState,
    cfg: &PlasticityConfig,
) -> WeightDelta {
    let delta = traces
        .pre_rec
        .iter()
        .zip(weights_row)
        .map(|(&rec, &w)| stdp_powerlaw_dw(rec, w, cfg))
        .collect();
    WeightDelta { row, delta }
}

/// Leak time constant (ms) of every synapse onto one excitatory neuron.
#[inline]
pub fn compute_tau_leak(post_j: f64, theta_j: f64, cfg: &PlasticityConfig) -> f64 {
    let exponent = (theta_j / cfg.theta_norm).min(TAU_LEAK_EXPONENT_CAP);
    cfg.k2_const * (post_j + 1.0) * exponent.exp2()
}

/// One decay-phase step over all rows. Each row shares a single `tau_leak`.
pub fn asp_decay_step(
    weights: &mut WeightMatrix,
    traces: &TraceState,
    thetas: &[f64],
    dt: f64,
    cfg: &PlasticityConfig,
    mode: DecayMode,
) {
    debug_assert_eq!(thetas.len(), weights.rows());
    for (j, &theta) in thetas.iter().enumerate() {
        let tau = compute_tau_leak(traces.post[j], theta, cfg);
        match mode {
            DecayMode::Exponential => weights.scale_row(j, (-cfg.alpha * dt / tau).exp()),
            DecayMode::Linear => weights.subtract_row(j, cfg.alpha_lin * dt / tau),
        }
    }
}

/// Presynaptic trace for the isolated-decay rule: +1 per spike, decays with
/// `tau_trace_iso`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolatedTrace {
    pub p: Vec<f64>,
}

impl IsolatedTrace {
    pub fn new(n_input: usize) -> Self {
        Self { p: vec![0.0; n_input] }
    }
}

/// One step of isolated decay: trace decay and bump, homogeneous exponential
/// leak of every weight, then `dt * P / tau_leak_iso` onto the synapses of
/// each firing input. Every row receives the same update.
pub fn isolated_decay_update(
    weights: &mut WeightMatrix,
    trace: &mut IsolatedTrace,
    input_spikes: &SpikeSet,
    dt: f64,
    cfg: &PlasticityConfig,
) {
    let trace_decay = (-dt / cfg.tau_trace_iso).exp();
    trace.p.iter_mut().for_each(|p| *p *= trace_decay);
    for &i in input_spikes.indices() {
        trace.p[i] += 1.0;
    }
    weights.scale_all((-cfg.alpha_iso * dt / cfg.tau_leak_iso).exp());
    if input_spikes.is_empty() {
        return;
    }
    let gain = dt / cfg.tau_leak_iso;
    for j in 0..weights.rows() {
        weights.update_entries(j, input_spikes.indices(), cfg.w_max, |i, w| w + gain * trace.p[i]);
    }
}
