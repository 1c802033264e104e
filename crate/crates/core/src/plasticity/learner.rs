use super::config::{PlasticityConfig, Rule};
use super::rules::{
    asp_decay_step, asp_recovery_update, isolated_decay_update, stdp_powerlaw_update,
    IsolatedTrace,
};
use super::traces::{TraceDecay, TraceState};
use crate::error::Result;
use crate::sim::{Network, StepHook, StepResult};

/// Per-step plasticity driver for training.
///
/// Each step: traces decay then bump; every excitatory neuron that fired gets
/// a recovery update (read from the post-bump traces) with its row clamped;
/// then the decay phase runs for every synapse regardless of spiking.
#[derive(Debug, Clone)]
pub struct Learner {
    cfg: PlasticityConfig,
    pub traces: TraceState,
    pub iso_trace: IsolatedTrace,
    trace_decay: TraceDecay,
    dt: f64,
    thetas: Vec<f64>,
}

impl Learner {
    pub fn new(cfg: PlasticityConfig, n_input: usize, n_exc: usize, dt: f64) -> Self {
        Self {
            cfg,
            traces: TraceState::new(n_input, n_exc),
            iso_trace: IsolatedTrace::new(n_input),
            trace_decay: TraceDecay::new(&cfg, dt),
            dt,
            thetas: vec![0.0; n_exc],
        }
    }

    pub fn config(&self) -> &PlasticityConfig {
        &self.cfg
    }

    pub fn step(&mut self, net: &mut Network, step: &StepResult) {
        let cfg = &self.cfg;
        match cfg.rule {
            Rule::None => {}
            Rule::IsolatedDecay => {
                isolated_decay_update(
                    &mut net.weights,
                    &mut self.iso_trace,
                    &step.input_spikes,
                    self.dt,
                    cfg,
                );
            }
            Rule::AspExponential | Rule::AspLinear | Rule::StdpPowerLaw => {
                self.trace_decay.apply(&mut self.traces);
                self.traces.bump(&step.input_spikes, &step.exc_spikes);
                for &j in step.exc_spikes.indices() {
                    let delta = if cfg.rule == Rule::StdpPowerLaw {
                        let row = net.weights.row_values(j);
                        stdp_powerlaw_update(j, &row, &self.traces, cfg)
                    } else {
                        asp_recovery_update(j, &self.traces, cfg)
                    };
                    delta.apply(&mut net.weights, cfg.w_max);
                }
                if let Some(mode) = cfg.rule.decay_mode() {
                    for (t, n) in self.thetas.iter_mut().zip(&net.exc) {
                        *t = n.theta;
                    }
                    asp_decay_step(&mut net.weights, &self.traces, &self.thetas, self.dt, cfg, mode);
                }
            }
        }
    }
}

impl StepHook for Learner {
    fn on_step(&mut self, net: &mut Network, step: &StepResult) -> Result<()> {
        self.step(net, step);
        Ok(())
    }
}
