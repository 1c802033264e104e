//! Leaky integrate-and-fire neurons with a single current accumulator.
//!
//! Both the synaptic current and the membrane are advanced with the exact
//! exponential-Euler solution of their linear ODEs over one step:
//!
//! ```text
//! tau_current * dI/dt = -I                     (plus instantaneous jumps)
//! tau_mem     * dV/dt = (v_rest - V) + R * I
//! ```
//!
//! The current is held constant across the step when solving for V.

use crate::error::{Result, SimError};

/// Per-population neuron constants. Potentials in mV, times in ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifParams {
    pub tau_mem: f64,
    pub v_rest: f64,
    pub v_reset: f64,
    pub v_thresh: f64,
    pub refractory: f64,
    /// Time constant of the synaptic current accumulator.
    pub tau_post_current: f64,
    /// Membrane resistance: mV of steady-state depolarisation per unit current.
    pub resistance: f64,
}

impl LifParams {
    pub fn excitatory() -> Self {
        Self {
            tau_mem: 100.0,
            v_rest: -65.0,
            v_reset: -65.0,
            v_thresh: -52.0,
            refractory: 5.0,
            tau_post_current: 2.0,
            resistance: 8.0,
        }
    }

    pub fn inhibitory() -> Self {
        Self {
            tau_mem: 10.0,
            v_rest: -60.0,
            v_reset: -45.0,
            v_thresh: -40.0,
            refractory: 2.0,
            tau_post_current: 2.0,
            resistance: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if !(self.tau_mem > 0.0) {
            return bad("tau_mem must be > 0");
        }
        if !(self.tau_post_current > 0.0) {
            return bad("tau_post_current must be > 0");
        }
        if !(self.v_reset <= self.v_thresh) {
            return bad("v_reset must not exceed v_thresh");
        }
        if !(self.refractory >= 0.0) {
            return bad("refractory must be >= 0");
        }
        if !self.resistance.is_finite() {
            return bad("resistance must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronState {
    pub v_mem: f64,
    pub i_syn: f64,
    pub refractory_until: f64,
    /// Homeostatic threshold offset, mV.
    pub theta: f64,
    pub spike_count: u64,
}

impl NeuronState {
    pub fn at_rest(params: &LifParams) -> Self {
        Self {
            v_mem: params.v_rest,
            i_syn: 0.0,
            refractory_until: f64::NEG_INFINITY,
            theta: 0.0,
            spike_count: 0,
        }
    }

    pub fn is_refractory(&self, now: f64) -> bool {
        now < self.refractory_until
    }
}

/// Step factors for one population, precomputed for a fixed `dt`.
#[derive(Debug, Clone, Copy)]
pub struct LifKernel {
    pub params: LifParams,
    pub dt: f64,
    mem_decay: f64,
    current_decay: f64,
}

impl LifKernel {
    pub fn new(params: LifParams, dt: f64) -> Self {
        Self {
            params,
            dt,
            mem_decay: (-dt / params.tau_mem).exp(),
            current_decay: (-dt / params.tau_post_current).exp(),
        }
    }

    #[inline]
    pub fn current_decay(&self) -> f64 {
        self.current_decay
    }

    /// Advances one neuron's membrane; returns whether it spiked at `now`.
    #[inline]
    pub fn update_membrane(&self, n: &mut NeuronState, now: f64) -> Result<bool> {
        let p = &self.params;
        if n.is_refractory(now) {
            n.v_mem = p.v_reset;
            return Ok(false);
        }
        let v_inf = p.v_rest + p.resistance * n.i_syn;
        n.v_mem = v_inf + (n.v_mem - v_inf) * self.mem_decay;
        if !n.v_mem.is_finite() {
            return Err(SimError::Numerical {
                what: "v_mem".into(),
                time_ms: now,
            });
        }
        if n.v_mem >= p.v_thresh + n.theta {
            n.v_mem = p.v_reset;
            n.refractory_until = now + p.refractory;
            n.spike_count += 1;
            return Ok(true);
        }
        Ok(false)
    }
}

/// Single-neuron membrane update with factors computed on the spot.
pub fn update_membrane(
    neuron: &NeuronState,
    params: &LifParams,
    dt: f64,
    now: f64,
) -> Result<(NeuronState, bool)> {
    if !(dt > 0.0) {
        return Err(SimError::Config("dt must be > 0".into()));
    }
    let mut n = *neuron;
    let spiked = LifKernel::new(*params, dt).update_membrane(&mut n, now)?;
    Ok((n, spiked))
}

/// Homeostatic threshold: exponential decay, plus a fixed increment on spike.
#[derive(Debug, Clone, Copy)]
pub struct Homeostasis {
    pub theta_plus: f64,
    pub tau_theta: f64,
    decay: f64,
}

impl Homeostasis {
    pub fn new(theta_plus: f64, tau_theta: f64, dt: f64) -> Self {
        Self {
            theta_plus,
            tau_theta,
            decay: (-dt / tau_theta).exp(),
        }
    }

    #[inline]
    pub fn apply(&self, theta: f64, spiked: bool) -> f64 {
        let t = theta * self.decay + if spiked { self.theta_plus } else { 0.0 };
        t.max(0.0)
    }
}

pub fn apply_homeostasis(
    neuron: &NeuronState,
    spiked: bool,
    dt: f64,
    theta_plus: f64,
    tau_theta: f64,
) -> f64 {
    Homeostasis::new(theta_plus, tau_theta, dt).apply(neuron.theta, spiked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exc() -> LifParams {
        LifParams::excitatory()
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let p = exc();
        let n = NeuronState::at_rest(&p);
        let (out, spiked) = update_membrane(&n, &p, 0.5, 0.0).unwrap();
        assert!(!spiked);
        assert_eq!(out.v_mem, p.v_rest);
    }

    #[test]
    fn above_threshold_spikes_and_resets() {
        let p = exc();
        let mut n = NeuronState::at_rest(&p);
        n.theta = 2.0;
        n.v_mem = p.v_thresh + n.theta + 1.0;
        // Hold the potential above threshold through the step with a matching current.
        n.i_syn = (n.v_mem - p.v_rest) / p.resistance;
        let (out, spiked) = update_membrane(&n, &p, 0.5, 10.0).unwrap();
        assert!(spiked);
        assert_eq!(out.v_mem, p.v_reset);
        assert_eq!(out.refractory_until, 10.0 + p.refractory);
        assert_eq!(out.spike_count, 1);
    }

    #[test]
    fn decay_over_one_time_constant() {
        let p = exc();
        let mut n = NeuronState::at_rest(&p);
        n.v_mem = p.v_rest + 10.0;
        let (out, _) = update_membrane(&n, &p, p.tau_mem, 0.0).unwrap();
        let expected = p.v_rest + 10.0 * (-1.0f64).exp();
        assert!((out.v_mem - expected).abs() < 1e-12);

        // Fine-step cross-check: 10^4 substeps of forward Euler converge to the same value.
        let steps = 10_000;
        let h = p.tau_mem / steps as f64;
        let mut v = p.v_rest + 10.0;
        for _ in 0..steps {
            v += h * (p.v_rest - v) / p.tau_mem;
        }
        assert!((v - expected).abs() < 1e-3);
    }

    #[test]
    fn refractory_neuron_is_clamped_and_silent() {
        let p = exc();
        let mut n = NeuronState::at_rest(&p);
        n.refractory_until = 5.0;
        n.i_syn = 1e6;
        let (out, spiked) = update_membrane(&n, &p, 0.5, 4.5).unwrap();
        assert!(!spiked);
        assert_eq!(out.v_mem, p.v_reset);
    }

    #[test]
    fn non_finite_membrane_is_a_fault() {
        let p = exc();
        let mut n = NeuronState::at_rest(&p);
        n.i_syn = f64::NAN;
        assert!(matches!(
            update_membrane(&n, &p, 0.5, 0.0),
            Err(SimError::Numerical { .. })
        ));
    }

    #[test]
    fn homeostasis_examples() {
        let p = exc();
        let mut n = NeuronState::at_rest(&p);
        assert_eq!(apply_homeostasis(&n, false, 0.5, 0.05, 1e7), 0.0);
        let t = apply_homeostasis(&n, true, 0.5, 0.05, 1e7);
        assert!((t - 0.05).abs() < 1e-12);
        n.theta = 1.0;
        let t = apply_homeostasis(&n, false, 1e7, 0.05, 1e7);
        assert!((t - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn default_params_validate() {
        exc().validate().unwrap();
        LifParams::inhibitory().validate().unwrap();
        let mut p = exc();
        p.v_reset = p.v_thresh + 1.0;
        assert!(p.validate().is_err());
    }
}
