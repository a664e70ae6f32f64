//! Regret certification for computed strategies.
//!
//! Regret at a value `v` is the best deviation utility minus the utility of the
//! strategy's own bid. Values outside `supp F` are reported separately.

mod continuous;
mod discrete;
mod monte_carlo;
mod properties;

pub use continuous::epsilon_bne_check_ccfpa;
pub use discrete::epsilon_bne_check_cdfpa;
pub use monte_carlo::{monte_carlo_regret, monte_carlo_utility, UtilityEstimate};
pub use properties::{monotone_no_overbid_check, MonotoneReport};

use serde::Serialize;

use crate::dist::Cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Grid,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretSample {
    pub value: f64,
    pub regret: f64,
    pub in_support: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub method: Method,
    /// Largest regret over values in the support.
    pub max_regret: f64,
    /// `max_regret` as an exact `p/q` string when computed in rational arithmetic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_regret_exact: Option<String>,
    pub argmax_value: f64,
    pub argmax_bid: f64,
    /// Largest regret over grid values outside the support.
    pub out_of_support_max_regret: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Standard error of the Monte Carlo estimate at the argmax.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub samples: Vec<RegretSample>,
}

impl RegretReport {
    fn new(method: Method) -> Self {
        Self {
            method,
            max_regret: 0.0,
            max_regret_exact: None,
            argmax_value: 0.0,
            argmax_bid: 0.0,
            out_of_support_max_regret: 0.0,
            trials: None,
            seed: None,
            std_error: None,
            samples: Vec::new(),
        }
    }

    /// Record a sample; returns whether it became the in-support maximum.
    fn record(&mut self, value: f64, regret: f64, deviation: f64, in_support: bool) -> bool {
        let regret = regret.max(0.0);
        self.samples.push(RegretSample { value, regret, in_support });
        if !in_support {
            self.out_of_support_max_regret = self.out_of_support_max_regret.max(regret);
            return false;
        }
        if regret > self.max_regret || self.samples.iter().filter(|s| s.in_support).count() == 1 {
            self.max_regret = regret;
            self.argmax_value = value;
            self.argmax_bid = deviation;
            return true;
        }
        false
    }
}

const SUPPORT_PROBE: f64 = 1.0 / (1u64 << 20) as f64;

/// `v ∈ supp F`, probed at `v ± 2⁻²⁰`.
pub(crate) fn in_support(cdf: &dyn Cdf, v: f64) -> bool {
    let hi = (v + SUPPORT_PROBE).min(1.0);
    let lo = (v - SUPPORT_PROBE).max(0.0);
    cdf.eval_f64(hi) > cdf.eval_f64(lo)
}
