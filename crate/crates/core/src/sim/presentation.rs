//! Stimulus presentation: a Poisson-coded image for `duration` ms followed by
//! `rest` ms of silence, retried with boosted rates when the excitatory layer
//! stays (almost) quiet.

use log::debug;
use rand::Rng;

use super::network::{Network, StepResult};
use super::spikes::SpikeSet;
use crate::encoding::{PoissonEncoder, RateImage};
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresentationParams {
    pub duration_ms: f64,
    pub rest_ms: f64,
    pub min_spikes: u32,
    pub rate_boost: f64,
    pub max_retries: u32,
}

impl Default for PresentationParams {
    fn default() -> Self {
        Self {
            duration_ms: 350.0,
            rest_ms: 150.0,
            min_spikes: 5,
            rate_boost: 32.0,
            max_retries: 8,
        }
    }
}

/// Called after every simulated step, including rest steps.
pub trait StepHook {
    fn on_step(&mut self, net: &mut Network, step: &StepResult) -> Result<()>;
}

/// No plasticity.
impl StepHook for () {
    fn on_step(&mut self, _: &mut Network, _: &StepResult) -> Result<()> {
        Ok(())
    }
}

impl<H: StepHook + ?Sized> StepHook for &mut H {
    fn on_step(&mut self, net: &mut Network, step: &StepResult) -> Result<()> {
        (**self).on_step(net, step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresentationResult {
    /// Excitatory spikes per neuron during the stimulus window of the final attempt.
    pub spike_counts: Vec<u32>,
    /// `(step within stimulus window, neuron)` for the final attempt.
    pub spike_log: Vec<(u32, u32)>,
    pub retries: u32,
    /// Set when every attempt stayed below `min_spikes`.
    pub degenerate: bool,
}

impl PresentationResult {
    pub fn total_spikes(&self) -> u32 {
        self.spike_counts.iter().sum()
    }
}

pub fn run_presentation<R: Rng, H: StepHook>(
    net: &mut Network,
    image: &RateImage,
    params: &PresentationParams,
    rng: &mut R,
    mut hook: H,
) -> Result<PresentationResult> {
    if !(params.duration_ms > 0.0) {
        return Err(SimError::Config("presentation duration must be > 0".into()));
    }
    if image.len() != net.n_input() {
        return Err(SimError::Config(format!(
            "image has {} inputs, network has {}",
            image.len(),
            net.n_input()
        )));
    }
    let stim_steps = net.clock().steps_for(params.duration_ms)?;
    let rest_steps = net.clock().steps_for(params.rest_ms)?;
    let dt = net.dt();
    let n_exc = net.n_exc();

    let mut rates = image.clone();
    let mut input = SpikeSet::new(net.n_input());
    let silence = SpikeSet::new(net.n_input());
    let mut step = StepResult::default();
    let mut retries = 0;

    loop {
        let encoder = PoissonEncoder::new(&rates, dt);
        let mut counts = vec![0u32; n_exc];
        let mut log = Vec::new();
        for s in 0..stim_steps {
            encoder.sample(rng, &mut input);
            net.advance_into(&input, &mut step)?;
            for &j in step.exc_spikes.indices() {
                counts[j] += 1;
                log.push((s as u32, j as u32));
            }
            hook.on_step(net, &step)?;
        }
        for _ in 0..rest_steps {
            net.advance_into(&silence, &mut step)?;
            hook.on_step(net, &step)?;
        }

        let total: u32 = counts.iter().sum();
        if total >= params.min_spikes || retries >= params.max_retries {
            let degenerate = total < params.min_spikes;
            if degenerate {
                debug!("presentation degenerate after {retries} retries ({total} spikes)");
            }
            return Ok(PresentationResult {
                spike_counts: counts,
                spike_log: log,
                retries,
                degenerate,
            });
        }
        retries += 1;
        rates.boost += params.rate_boost;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::RngStream;
    use crate::sim::{NetworkParams, WeightMatrix};

    struct CountSteps(u64);
    impl StepHook for CountSteps {
        fn on_step(&mut self, _: &mut Network, _: &StepResult) -> Result<()> {
            self.0 += 1;
            Ok(())
        }
    }

    #[test]
    fn silent_image_retries_until_degenerate() {
        let w = WeightMatrix::from_vec(2, 4, vec![0.5; 8]);
        let mut net = Network::new(NetworkParams::default(), w).unwrap();
        let img = RateImage::new(vec![0.0; 4]);
        let params = PresentationParams::default();
        let mut rng = RngStream::new(1);
        let mut steps = CountSteps(0);
        let r = run_presentation(&mut net, &img, &params, rng.rng(), &mut steps).unwrap();
        assert_eq!(r.total_spikes(), 0);
        assert!(r.degenerate);
        assert_eq!(r.retries, params.max_retries);
        assert_eq!(steps.0, (params.max_retries as u64 + 1) * 1000);
    }

    #[test]
    fn stimulus_window_step_count() {
        let w = WeightMatrix::from_vec(1, 1, vec![0.0]);
        let mut net = Network::new(NetworkParams::default(), w).unwrap();
        let params = PresentationParams {
            duration_ms: 350.0,
            rest_ms: 0.0,
            min_spikes: 0,
            ..Default::default()
        };
        let mut steps = CountSteps(0);
        let mut rng = RngStream::new(1);
        run_presentation(&mut net, &RateImage::new(vec![10.0]), &params, rng.rng(), &mut steps)
            .unwrap();
        assert_eq!(steps.0, 700);
        assert_eq!(net.clock().step(), 700);
    }

    #[test]
    fn zero_duration_rejected() {
        let w = WeightMatrix::from_vec(1, 1, vec![0.0]);
        let mut net = Network::new(NetworkParams::default(), w).unwrap();
        let params = PresentationParams {
            duration_ms: 0.0,
            ..Default::default()
        };
        let mut rng = RngStream::new(1);
        assert!(run_presentation(&mut net, &RateImage::new(vec![1.0]), &params, rng.rng(), ()).is_err());
    }
}
