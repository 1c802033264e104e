//! Two-layer excitatory/inhibitory network with one-to-one forward coupling and
//! all-but-one lateral inhibition.
//!
//! Internal connections (excitatory to inhibitory, inhibitory back to
//! excitatory) deliver spikes with a one-step delay: the inhibitory layer at
//! step `t` sees excitatory spikes of step `t-1`, and the excitatory layer at
//! step `t` sees inhibitory spikes of step `t-1`.

use rand::Rng;

use super::neuron::{Homeostasis, LifKernel, LifParams, NeuronState};
use super::spikes::SpikeSet;
use super::weights::WeightMatrix;
use crate::error::{Result, SimError};

/// Fixed-step simulation clock. `now` is always `step * dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimClock {
    dt: f64,
    step: u64,
}

impl SimClock {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SimError::Config(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self { dt, step: 0 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn now(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn tick(&mut self) {
        self.step += 1;
    }

    /// Number of whole steps spanning `duration_ms`; errors unless it is an
    /// exact multiple of `dt`.
    pub fn steps_for(&self, duration_ms: f64) -> Result<u64> {
        let n = (duration_ms / self.dt).round();
        if n < 0.0 || ((n * self.dt) - duration_ms).abs() > 1e-9 * duration_ms.abs().max(1.0) {
            return Err(SimError::Config(format!(
                "duration {duration_ms} ms is not a multiple of dt={} ms",
                self.dt
            )));
        }
        Ok(n as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    pub dt: f64,
    pub exc: LifParams,
    pub inh: LifParams,
    /// Current injected into inhibitory neuron `j` per spike of excitatory `j`.
    pub w_exc_to_inh: f64,
    /// Current removed from every other excitatory neuron per inhibitory spike.
    pub w_inh: f64,
    pub theta_plus: f64,
    pub tau_theta: f64,
    pub w_max: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            dt: 0.5,
            exc: LifParams::excitatory(),
            inh: LifParams::inhibitory(),
            w_exc_to_inh: 200.0,
            w_inh: 15.0,
            theta_plus: 0.05,
            tau_theta: 1e7,
            w_max: 1.0,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        SimClock::new(self.dt)?;
        self.exc.validate()?;
        self.inh.validate()?;
        if !(self.theta_plus > 0.0) || !(self.tau_theta > 0.0) {
            return Err(SimError::Config(
                "theta_plus and tau_theta must be > 0".into(),
            ));
        }
        if !(self.w_max > 0.0) {
            return Err(SimError::Config("w_max must be > 0".into()));
        }
        if self.w_inh < 0.0 || self.w_exc_to_inh < 0.0 {
            return Err(SimError::Config(
                "inhibitory coupling strengths must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepResult {
    pub exc_spikes: SpikeSet,
    pub inh_spikes: SpikeSet,
    pub input_spikes: SpikeSet,
}

#[derive(Debug, Clone)]
pub struct Network {
    params: NetworkParams,
    n_input: usize,
    pub exc: Vec<NeuronState>,
    pub inh: Vec<NeuronState>,
    pub weights: WeightMatrix,
    clock: SimClock,
    exc_kernel: LifKernel,
    inh_kernel: LifKernel,
    homeostasis: Homeostasis,
    homeostasis_enabled: bool,
    // Spikes from the previous step, consumed by the opposite layer.
    last_exc: SpikeSet,
    last_inh: SpikeSet,
    drive: Vec<f64>,
}

impl Network {
    pub fn new(params: NetworkParams, weights: WeightMatrix) -> Result<Self> {
        params.validate()?;
        let n_exc = weights.rows();
        let n_input = weights.cols();
        if n_exc == 0 || n_input == 0 {
            return Err(SimError::Config("network needs at least one input and one excitatory neuron".into()));
        }
        let dense = weights.to_dense();
        if let Some(w) = dense.iter().find(|w| !(0.0..=params.w_max).contains(*w)) {
            return Err(SimError::Config(format!(
                "initial weight {w} outside [0, {}]",
                params.w_max
            )));
        }
        Ok(Self {
            n_input,
            exc: vec![NeuronState::at_rest(&params.exc); n_exc],
            inh: vec![NeuronState::at_rest(&params.inh); n_exc],
            weights,
            clock: SimClock::new(params.dt)?,
            exc_kernel: LifKernel::new(params.exc, params.dt),
            inh_kernel: LifKernel::new(params.inh, params.dt),
            homeostasis: Homeostasis::new(params.theta_plus, params.tau_theta, params.dt),
            homeostasis_enabled: true,
            last_exc: SpikeSet::new(n_exc),
            last_inh: SpikeSet::new(n_exc),
            drive: vec![0.0; n_exc],
            params,
        })
    }

    /// Weights drawn uniformly from `[0, init_frac * w_max]`.
    pub fn with_random_weights<R: Rng>(
        params: NetworkParams,
        n_input: usize,
        n_exc: usize,
        init_frac: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let hi = init_frac * params.w_max;
        let data = (0..n_input * n_exc)
            .map(|_| rng.random::<f64>() * hi)
            .collect();
        Self::new(params, WeightMatrix::from_vec(n_exc, n_input, data))
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    pub fn n_exc(&self) -> usize {
        self.exc.len()
    }

    pub fn clock(&self) -> &SimClock {
        &self.clock
    }

    pub fn dt(&self) -> f64 {
        self.params.dt
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.exc.iter().map(|n| n.theta).collect()
    }

    pub fn set_thetas(&mut self, thetas: &[f64]) -> Result<()> {
        if thetas.len() != self.n_exc() {
            return Err(SimError::Dimension(format!(
                "{} thetas for {} neurons",
                thetas.len(),
                self.n_exc()
            )));
        }
        for (n, &t) in self.exc.iter_mut().zip(thetas) {
            n.theta = t.max(0.0);
        }
        Ok(())
    }

    /// Disables threshold adaptation (used for labeling and inference).
    pub fn set_homeostasis(&mut self, enabled: bool) {
        self.homeostasis_enabled = enabled;
    }

    /// Decays every current and adds this step's synaptic input: weighted
    /// input spikes plus delayed lateral inhibition for excitatory neurons,
    /// delayed one-to-one drive for inhibitory neurons.
    pub fn integrate_synaptic_current(&mut self, input_spikes: &SpikeSet) -> Result<()> {
        if input_spikes.len() != self.n_input {
            return Err(SimError::Config(format!(
                "input spike vector has length {}, network has {} inputs",
                input_spikes.len(),
                self.n_input
            )));
        }
        self.drive.iter_mut().for_each(|d| *d = 0.0);
        for &i in input_spikes.indices() {
            self.weights.accumulate_column(i, &mut self.drive);
        }
        let n_inh_active = self.last_inh.count() as f64;
        let w_inh = self.params.w_inh;
        let decay = self.exc_kernel.current_decay();
        for (j, n) in self.exc.iter_mut().enumerate() {
            let own = if self.last_inh.contains(j) { 1.0 } else { 0.0 };
            n.i_syn = n.i_syn * decay + self.drive[j] - w_inh * (n_inh_active - own);
        }
        let decay = self.inh_kernel.current_decay();
        for n in self.inh.iter_mut() {
            n.i_syn *= decay;
        }
        for &j in self.last_exc.indices() {
            self.inh[j].i_syn += self.params.w_exc_to_inh;
        }
        Ok(())
    }

    /// Advances the network one step, writing spikes into `out`.
    pub fn advance_into(&mut self, input_spikes: &SpikeSet, out: &mut StepResult) -> Result<()> {
        let now = self.clock.now();
        self.integrate_synaptic_current(input_spikes)?;

        out.exc_spikes.reset(self.exc.len());
        for (j, n) in self.exc.iter_mut().enumerate() {
            let spiked = self.exc_kernel.update_membrane(n, now)?;
            if self.homeostasis_enabled {
                n.theta = self.homeostasis.apply(n.theta, spiked);
            }
            if spiked {
                out.exc_spikes.push(j);
            }
        }

        out.inh_spikes.reset(self.inh.len());
        for (j, n) in self.inh.iter_mut().enumerate() {
            if self.inh_kernel.update_membrane(n, now)? {
                out.inh_spikes.push(j);
            }
        }

        out.input_spikes.clone_from(input_spikes);
        self.last_exc.clone_from(&out.exc_spikes);
        self.last_inh.clone_from(&out.inh_spikes);
        self.clock.tick();
        Ok(())
    }

    pub fn advance_timestep(&mut self, input_spikes: &SpikeSet) -> Result<StepResult> {
        let mut out = StepResult::default();
        self.advance_into(input_spikes, &mut out)?;
        Ok(out)
    }
}
