use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    AspExponential,
    AspLinear,
    StdpPowerLaw,
    IsolatedDecay,
    None,
}

impl Rule {
    pub fn is_asp(self) -> bool {
        matches!(self, Rule::AspExponential | Rule::AspLinear)
    }

    pub fn decay_mode(self) -> Option<DecayMode> {
        match self {
            Rule::AspExponential => Some(DecayMode::Exponential),
            Rule::AspLinear => Some(DecayMode::Linear),
            _ => None,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::AspExponential => "asp_exponential",
            Rule::AspLinear => "asp_linear",
            Rule::StdpPowerLaw => "stdp_powerlaw",
            Rule::IsolatedDecay => "isolated_decay",
            Rule::None => "none",
        })
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "asp_exponential" | "asp_exp" | "asp" => Rule::AspExponential,
            "asp_linear" | "asp_lin" => Rule::AspLinear,
            "stdp_powerlaw" | "stdp" => Rule::StdpPowerLaw,
            "isolated_decay" | "isolated" => Rule::IsolatedDecay,
            "none" => Rule::None,
            other => return Err(format!("unknown plasticity rule '{other}'")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayMode {
    Exponential,
    Linear,
}

/// Learning-rule selector and every constant the rules use. Times in ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasticityConfig {
    pub rule: Rule,
    pub tau_rec: f64,
    pub tau_acc: f64,
    pub tau_post_trace: f64,
    pub offset: f64,
    pub k_const: f64,
    pub k1_const: f64,
    pub k2_const: f64,
    pub alpha: f64,
    pub alpha_lin: f64,
    pub w_max: f64,
    /// Scale (mV) of the homeostatic threshold in the leak time constant exponent.
    pub theta_norm: f64,
    pub tau_leak_iso: f64,
    pub alpha_iso: f64,
    pub tau_trace_iso: f64,
    pub eta_stdp: f64,
    pub mu: f64,
}

/// Cap on the leak-time-constant exponent `theta / theta_norm`.
pub const TAU_LEAK_EXPONENT_CAP: f64 = 64.0;

impl PlasticityConfig {
    /// Reference constants (alpha = 0.01).
    pub fn reference() -> Self {
        Self {
            rule: Rule::AspExponential,
            tau_rec: 4.0,
            tau_acc: 40.0,
            tau_post_trace: 80.0,
            offset: 0.2,
            k_const: 0.01,
            k1_const: 0.01,
            k2_const: 1e2,
            alpha: 0.01,
            alpha_lin: 0.01,
            w_max: 1.0,
            theta_norm: 1.0,
            tau_leak_iso: 200.0,
            alpha_iso: 0.01,
            tau_trace_iso: 20.0,
            eta_stdp: 0.01,
            mu: 1.0,
        }
    }

    /// Reference constants with the nominal exponential decay rate
    /// (alpha = 1e-4).
    pub fn nominal() -> Self {
        Self {
            alpha: 1e-4,
            ..Self::reference()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "reference" => Some(Self::reference()),
            "nominal" => Some(Self::nominal()),
            _ => None,
        }
    }

    pub fn with_rule(self, rule: Rule) -> Self {
        Self { rule, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let taus = [
            ("tau_rec", self.tau_rec),
            ("tau_acc", self.tau_acc),
            ("tau_post_trace", self.tau_post_trace),
            ("tau_leak_iso", self.tau_leak_iso),
            ("tau_trace_iso", self.tau_trace_iso),
            ("theta_norm", self.theta_norm),
            ("k2_const", self.k2_const),
            ("w_max", self.w_max),
        ];
        for (name, v) in taus {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::Config(format!("plasticity.{name} must be > 0, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.offset) {
            return Err(SimError::Config(format!(
                "plasticity.offset must be in [0, 1), got {}",
                self.offset
            )));
        }
        let rates = [
            ("alpha", self.alpha),
            ("alpha_lin", self.alpha_lin),
            ("alpha_iso", self.alpha_iso),
            ("k_const", self.k_const),
            ("k1_const", self.k1_const),
            ("eta_stdp", self.eta_stdp),
            ("mu", self.mu),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(SimError::Config(format!("plasticity.{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Whether the trace time constants are the table defaults, in which case
    /// `tau_acc = 10 tau_rec` and `tau_post_trace = 2 tau_acc` must hold.
    pub fn uses_default_trace_constants(&self) -> bool {
        let d = Self::reference();
        self.tau_rec == d.tau_rec && self.tau_acc == d.tau_acc && self.tau_post_trace == d.tau_post_trace
    }

    pub fn trace_ratios_hold(&self) -> bool {
        (self.tau_acc - 10.0 * self.tau_rec).abs() <= 1e-12 * self.tau_acc
            && (self.tau_post_trace - 2.0 * self.tau_acc).abs() <= 1e-12 * self.tau_post_trace
    }
}

impl Default for PlasticityConfig {
    fn default() -> Self {
        Self::nominal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_defaults() {
        let c = PlasticityConfig::reference();
        assert_eq!(c.tau_rec, 4.0);
        assert_eq!(c.tau_acc, 40.0);
        assert_eq!(c.tau_post_trace, 80.0);
        assert_eq!(c.offset, 0.2);
        assert_eq!(c.k_const, 0.01);
        assert_eq!(c.k1_const, 0.01);
        assert_eq!(c.k2_const, 100.0);
        assert_eq!(c.alpha, 0.01);
        assert_eq!(c.alpha_lin, 0.01);
        assert!(c.uses_default_trace_constants() && c.trace_ratios_hold());
        c.validate().unwrap();
    }

    #[test]
    fn default_is_nominal() {
        let c = PlasticityConfig::default();
        assert_eq!(c.alpha, 1e-4);
        assert_eq!(c.alpha_lin, 0.01);
    }

    #[test]
    fn rule_names_round_trip() {
        for r in [
            Rule::AspExponential,
            Rule::AspLinear,
            Rule::StdpPowerLaw,
            Rule::IsolatedDecay,
            Rule::None,
        ] {
            assert_eq!(r.to_string().parse::<Rule>().unwrap(), r);
        }
        assert!("hebbian".parse::<Rule>().is_err());
    }

    #[test]
    fn offset_out_of_range_rejected() {
        let mut c = PlasticityConfig::default();
        c.offset = 1.0;
        assert!(c.validate().is_err());
        c.offset = 0.2;
        c.tau_acc = 0.0;
        assert!(c.validate().is_err());
    }
}
