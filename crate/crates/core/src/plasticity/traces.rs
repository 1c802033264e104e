use super::config::PlasticityConfig;
use crate::sim::SpikeSet;

/// Synaptic traces: recent and accumulative presynaptic traces per input,
/// postsynaptic trace per excitatory neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceState {
    pub pre_rec: Vec<f64>,
    pub pre_acc: Vec<f64>,
    pub post: Vec<f64>,
}

impl TraceState {
    pub fn new(n_input: usize, n_exc: usize) -> Self {
        Self {
            pre_rec: vec![0.0; n_input],
            pre_acc: vec![0.0; n_input],
            post: vec![0.0; n_exc],
        }
    }

    /// First-order decay of every trace over `dt`.
    pub fn decay(&mut self, dt: f64, cfg: &PlasticityConfig) {
        TraceDecay::new(cfg, dt).apply(self);
    }

    /// `pre_rec := 1` and `pre_acc += 1` for firing inputs, `post += 1` for
    /// firing excitatory neurons.
    pub fn bump(&mut self, input_spikes: &SpikeSet, exc_spikes: &SpikeSet) {
        for &i in input_spikes.indices() {
            self.pre_rec[i] = 1.0;
            self.pre_acc[i] += 1.0;
        }
        for &j in exc_spikes.indices() {
            self.post[j] += 1.0;
        }
    }
}

/// Per-step decay factors for a fixed `dt`.
#[derive(Debug, Clone, Copy)]
pub struct TraceDecay {
    rec: f64,
    acc: f64,
    post: f64,
}

impl TraceDecay {
    pub fn new(cfg: &PlasticityConfig, dt: f64) -> Self {
        Self {
            rec: (-dt / cfg.tau_rec).exp(),
            acc: (-dt / cfg.tau_acc).exp(),
            post: (-dt / cfg.tau_post_trace).exp(),
        }
    }

    #[inline]
    pub fn apply(&self, t: &mut TraceState) {
        t.pre_rec.iter_mut().for_each(|x| *x *= self.rec);
        t.pre_acc.iter_mut().for_each(|x| *x *= self.acc);
        t.post.iter_mut().for_each(|x| *x *= self.post);
    }
}

pub fn decay_traces(traces: &TraceState, dt: f64, cfg: &PlasticityConfig) -> TraceState {
    let mut t = traces.clone();
    t.decay(dt, cfg);
    t
}

pub fn bump_traces(traces: &TraceState, input_spikes: &SpikeSet, exc_spikes: &SpikeSet) -> TraceState {
    let mut t = traces.clone();
    t.bump(input_spikes, exc_spikes);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E_INV: f64 = 0.367_879_441_171_442_33;

    #[test]
    fn accumulative_trace_decays_over_its_time_constant() {
        let cfg = PlasticityConfig::reference();
        let mut t = TraceState::new(1, 1);
        t.pre_acc[0] = 1.0;
        let t = decay_traces(&t, 40.0, &cfg);
        assert!((t.pre_acc[0] - E_INV).abs() < 1e-15);
    }

    #[test]
    fn post_trace_closed_form_vs_fine_steps() {
        let cfg = PlasticityConfig::reference();
        let mut t = TraceState::new(1, 1);
        t.post[0] = 2.0;
        let out = decay_traces(&t, 80.0, &cfg);
        assert!((out.post[0] - 2.0 * E_INV).abs() < 1e-15);
        let mut x = 2.0f64;
        let h = 80.0 / 100_000.0;
        for _ in 0..100_000 {
            x -= h * x / 80.0;
        }
        assert!((x - out.post[0]).abs() < 1e-5);
    }

    #[test]
    fn zero_traces_stay_zero() {
        let t = TraceState::new(3, 2);
        assert_eq!(decay_traces(&t, 0.5, &PlasticityConfig::default()), t);
    }

    #[test]
    fn bump_semantics() {
        let mut t = TraceState::new(2, 2);
        t.pre_rec[0] = 0.7;
        t.pre_acc[0] = 2.3;
        let b = bump_traces(&t, &SpikeSet::from_indices(2, vec![0]), &SpikeSet::from_indices(2, vec![1]));
        assert_eq!(b.pre_rec[0], 1.0);
        assert!((b.pre_acc[0] - 3.3).abs() < 1e-15);
        assert_eq!(b.post, vec![0.0, 1.0]);
        assert_eq!(bump_traces(&t, &SpikeSet::new(2), &SpikeSet::new(2)), t);
    }

    proptest! {
        #[test]
        fn decay_partition_invariance(x in 0.0f64..10.0, n in 1usize..200, dt in 0.01f64..5.0) {
            let cfg = PlasticityConfig::reference();
            let mut stepped = TraceState { pre_rec: vec![x], pre_acc: vec![x], post: vec![x] };
            for _ in 0..n {
                stepped.decay(dt, &cfg);
            }
            let once = decay_traces(&TraceState { pre_rec: vec![x], pre_acc: vec![x], post: vec![x] }, n as f64 * dt, &cfg);
            for (a, b) in [(stepped.pre_rec[0], once.pre_rec[0]), (stepped.pre_acc[0], once.pre_acc[0]), (stepped.post[0], once.post[0])] {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
}
