//! Scalar-oracle self-check: the engine against straight-line scalar
//! reimplementations and closed forms, with one named result per check.

use crate::encoding::RngStream;
use crate::plasticity::{
    asp_recovery_dw, compute_tau_leak, Learner, PlasticityConfig, Rule, TraceState,
};
use crate::sim::{Homeostasis, LifParams, Network, NetworkParams, SpikeSet, WeightMatrix};
use rand::Rng;

// Reference trace constants (ms) the closed-form check compares against.
const REF_TAU_REC: f64 = 4.0;
const REF_TAU_ACC: f64 = 40.0;
const REF_TAU_POST: f64 = 80.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Straight-line state of a 1x1 network under the ASP exponential rule.
#[derive(Debug, Clone, Copy, Default)]
struct Scalar {
    v: f64,
    i: f64,
    refr_until: f64,
    theta: f64,
    pre_rec: f64,
    pre_acc: f64,
    post: f64,
    w: f64,
}

/// Engine vs scalar recomputation over `steps` steps of a scripted input
/// train; returns the largest absolute difference over all state variables.
pub fn engine_vs_scalar(cfg: &PlasticityConfig, steps: usize, seed: u64) -> crate::Result<(f64, u64)> {
    let cfg = PlasticityConfig {
        rule: Rule::AspExponential,
        ..*cfg
    };
    let exc = LifParams {
        resistance: 5.0,
        tau_post_current: 5.0,
        ..LifParams::excitatory()
    };
    let params = NetworkParams {
        exc,
        theta_plus: 0.5,
        tau_theta: 200.0,
        ..NetworkParams::default()
    };
    let w0 = 0.9;
    let mut net = Network::new(params, WeightMatrix::from_vec(1, 1, vec![w0]))?;
    let mut learner = Learner::new(cfg, 1, 1, params.dt);

    let dt = params.dt;
    let mut s = Scalar {
        v: exc.v_rest,
        refr_until: f64::NEG_INFINITY,
        w: w0,
        ..Default::default()
    };
    let mut rng = RngStream::new(seed);
    let mut input = SpikeSet::new(1);
    let mut max_err = 0.0f64;
    let mut post_spikes = 0u64;
    for k in 0..steps {
        // Bursts of dense input alternate with silence.
        let fire = (k / 400) % 2 == 0 && rng.rng().random::<f64>() < 0.6;
        input.clear();
        if fire {
            input.push(0);
        }
        let out = net.advance_timestep(&input)?;
        learner.step(&mut net, &out);

        let now = k as f64 * dt;
        s.i = s.i * (-dt / exc.tau_post_current).exp() + if fire { s.w } else { 0.0 };
        let mut spiked = false;
        if now < s.refr_until {
            s.v = exc.v_reset;
        } else {
            let v_inf = exc.v_rest + exc.resistance * s.i;
            s.v = v_inf + (s.v - v_inf) * (-dt / exc.tau_mem).exp();
            if s.v >= exc.v_thresh + s.theta {
                spiked = true;
                s.v = exc.v_reset;
                s.refr_until = now + exc.refractory;
            }
        }
        s.theta = (s.theta * (-dt / params.tau_theta).exp() + if spiked { params.theta_plus } else { 0.0 }).max(0.0);
        s.pre_rec *= (-dt / cfg.tau_rec).exp();
        s.pre_acc *= (-dt / cfg.tau_acc).exp();
        s.post *= (-dt / cfg.tau_post_trace).exp();
        if fire {
            s.pre_rec = 1.0;
            s.pre_acc += 1.0;
        }
        if spiked {
            post_spikes += 1;
            s.post += 1.0;
            let eta = cfg.k1_const / (s.post + 1.0);
            let dw = eta * ((s.pre_rec - cfg.offset) - cfg.k_const * 2f64.powf(-s.pre_acc));
            s.w = (s.w + dw).clamp(0.0, cfg.w_max);
        }
        let tau_leak = cfg.k2_const * (s.post + 1.0) * 2f64.powf((s.theta / cfg.theta_norm).min(64.0));
        s.w *= (-cfg.alpha * dt / tau_leak).exp();

        if spiked != out.exc_spikes.contains(0) {
            return Ok((f64::INFINITY, post_spikes));
        }
        let n = &net.exc[0];
        let t = &learner.traces;
        for (a, b) in [
            (n.v_mem, s.v),
            (n.i_syn, s.i),
            (n.theta, s.theta),
            (t.pre_rec[0], s.pre_rec),
            (t.pre_acc[0], s.pre_acc),
            (t.post[0], s.post),
            (net.weights.get(0, 0), s.w),
        ] {
            max_err = max_err.max((a - b).abs());
        }
    }
    Ok((max_err, post_spikes))
}

/// Largest relative error of `steps` engine trace decays against
/// `exp(-t / tau)` with the reference time constants.
pub fn trace_closed_form_error(cfg: &PlasticityConfig, dt: f64, steps: usize) -> f64 {
    let mut t = TraceState::new(1, 1);
    t.pre_rec[0] = 1.0;
    t.pre_acc[0] = 1.0;
    t.post[0] = 1.0;
    let mut worst = 0.0f64;
    for k in 1..=steps {
        t.decay(dt, cfg);
        let time = k as f64 * dt;
        for (got, tau) in [(t.pre_rec[0], REF_TAU_REC), (t.pre_acc[0], REF_TAU_ACC), (t.post[0], REF_TAU_POST)] {
            let want = (-time / tau).exp();
            if want > 1e-280 {
                worst = worst.max(((got - want) / want).abs());
            }
        }
    }
    worst
}

/// Runs every check against `cfg`.
pub fn run_selfcheck(cfg: &PlasticityConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();

    match engine_vs_scalar(cfg, 10_000, 11) {
        Ok((err, spikes)) => out.push(CheckResult::new(
            "engine_vs_scalar",
            err <= 1e-9 && spikes > 0,
            format!("max abs difference {err:.3e} over 10000 steps, {spikes} post spikes"),
        )),
        Err(e) => out.push(CheckResult::new("engine_vs_scalar", false, e.to_string())),
    }

    let err = trace_closed_form_error(cfg, 0.5, 2000);
    out.push(CheckResult::new(
        "trace_closed_form",
        err <= 1e-12,
        format!("max relative error {err:.3e} against tau_rec={REF_TAU_REC}, tau_acc={REF_TAU_ACC}, tau_post_trace={REF_TAU_POST}"),
    ));

    out.push(CheckResult::new(
        "trace_ratios",
        cfg.trace_ratios_hold(),
        format!(
            "tau_acc/tau_rec={}, tau_post_trace/tau_acc={}",
            cfg.tau_acc / cfg.tau_rec,
            cfg.tau_post_trace / cfg.tau_acc
        ),
    ));

    let mut split = TraceState::new(1, 1);
    split.pre_acc[0] = 3.0;
    let mut whole = split.clone();
    for _ in 0..8 {
        split.decay(0.125, cfg);
    }
    whole.decay(1.0, cfg);
    let rel = ((split.pre_acc[0] - whole.pre_acc[0]) / whole.pre_acc[0]).abs();
    out.push(CheckResult::new(
        "trace_partition",
        rel <= 1e-12,
        format!("8 x 0.125 ms vs 1 ms relative difference {rel:.3e}"),
    ));

    // Recovery spot values: fresh pre spike, no accumulation, no post history.
    let got = asp_recovery_dw(1.0, 0.0, 0.0, cfg);
    let want = cfg.k1_const * ((1.0 - cfg.offset) - cfg.k_const);
    let got_acc = asp_recovery_dw(0.0, 3.0, 1.0, cfg);
    let want_acc = cfg.k1_const / 2.0 * (-cfg.offset - cfg.k_const / 8.0);
    out.push(CheckResult::new(
        "recovery_spot",
        (got - want).abs() <= 1e-15 && (got_acc - want_acc).abs() <= 1e-15,
        format!("dw(1,0,0)={got}, dw(0,3,1)={got_acc}"),
    ));

    let got = compute_tau_leak(1.0, 2.0 * cfg.theta_norm, cfg);
    let want = cfg.k2_const * 2.0 * 4.0;
    out.push(CheckResult::new(
        "tau_leak_spot",
        (got - want).abs() <= 1e-12 * want,
        format!("tau_leak(post=1, theta=2 theta_norm)={got}"),
    ));

    let h = Homeostasis::new(0.05, 1e7, 0.5);
    let t1 = h.apply(0.0, true);
    let t2 = h.apply(1.0, false);
    out.push(CheckResult::new(
        "homeostasis_spot",
        (t1 - 0.05).abs() <= 1e-15 && (t2 - (-0.5f64 / 1e7).exp()).abs() <= 1e-15,
        format!("theta after spike {t1}, one quiet step from 1 mV {t2}"),
    ));

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass() {
        for c in run_selfcheck(&PlasticityConfig::default()) {
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn reference_preset_passes() {
        for c in run_selfcheck(&PlasticityConfig::reference()) {
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn perturbed_tau_acc_fails_trace_check() {
        let cfg = PlasticityConfig {
            tau_acc: 41.0,
            ..PlasticityConfig::default()
        };
        let results = run_selfcheck(&cfg);
        let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert!(failed.contains(&"trace_closed_form"), "{failed:?}");
        assert!(results.iter().find(|c| c.name == "engine_vs_scalar").unwrap().passed);
    }
}
