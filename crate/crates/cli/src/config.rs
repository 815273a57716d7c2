//! Run configuration: one TOML file per scenario.
//!
//! Every physical quantity carries its unit in the key name (`*_dbm`,
//! `*_mhz`, `*_m`, `*_db`), unknown keys are rejected, and dB/dBm values
//! convert to linear exactly once, at parse time. The parsed struct
//! serializes back to an equivalent file, which the binary emits next to
//! its outputs as the effective configuration of the run.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use pbcov::fading::{FadingSpec, QosSpec, ThresholdMethod};
use pbcov::linkmodel::{db_to_linear, dbm_to_watts, Modulation, RfConfig};
use pbcov::simkit::SimPlan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub rf: RfSection,
    pub qos: QosSection,
    pub fading: FadingSection,
    pub sweep: SweepSection,
    pub sim: SimSection,
    #[serde(default)]
    pub search: SearchSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfSection {
    pub tx_power_dbm: f64,
    pub carrier_mhz: f64,
    pub path_loss_exp: f64,
    /// Fraction of each symbol spent backscattering.
    pub switching_loss: f64,
    pub samples_per_symbol: u32,
    pub noise_dbm: f64,
    pub structural_mode_re: f64,
    pub structural_mode_im: f64,
    pub reflection0_re: f64,
    pub reflection0_im: f64,
    pub reflection1_re: f64,
    pub reflection1_im: f64,
    pub bd_gain_dbi: f64,
    pub pol_mismatch_forward: f64,
    pub pol_mismatch_back: f64,
    /// `"ook"` or `"fsk"`.
    pub modulation: String,
    /// Harvest floor; omit for unconstrained tags.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit_power_dbm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosSection {
    pub gamma_th_db: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSection {
    pub kappa_forward: f64,
    pub kappa_back: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub m_list: Vec<u32>,
    pub s_list: Vec<u32>,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub d_step_m: f64,
    /// Harvest-floor sweep for the circuit-power command.
    #[serde(default)]
    pub circuit_power_dbm_list: Vec<f64>,
    /// Disk draws per swept radius in the random-placement benchmark.
    #[serde(default = "default_random_realizations")]
    pub random_realizations: usize,
}

fn default_random_realizations() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub trials_per_point: usize,
    pub seed: u64,
    pub cell_size_m: f64,
    pub half_extent_m: f64,
    pub confidence_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub grid_step_r_m: f64,
    pub grid_step_d_m: f64,
}

impl Default for SearchSection {
    fn default() -> SearchSection {
        SearchSection { grid_step_r_m: 0.05, grid_step_d_m: 0.1 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Linear-unit RF configuration. The harvest floor defaults to zero
    /// when `circuit_power_dbm` is omitted.
    pub fn rf_config(&self) -> Result<RfConfig, String> {
        let rf = &self.rf;
        let modulation = match rf.modulation.as_str() {
            "ook" => Modulation::Ook,
            "fsk" => Modulation::Fsk,
            other => return Err(format!("modulation must be \"ook\" or \"fsk\", got {other:?}")),
        };
        let cfg = RfConfig {
            tx_power_w: dbm_to_watts(rf.tx_power_dbm),
            carrier_hz: rf.carrier_mhz * 1.0e6,
            path_loss_exp: rf.path_loss_exp,
            switching_loss: rf.switching_loss,
            samples_per_symbol: rf.samples_per_symbol,
            noise_w: dbm_to_watts(rf.noise_dbm),
            structural_mode: Complex64::new(rf.structural_mode_re, rf.structural_mode_im),
            reflection: [
                Complex64::new(rf.reflection0_re, rf.reflection0_im),
                Complex64::new(rf.reflection1_re, rf.reflection1_im),
            ],
            bd_gain: db_to_linear(rf.bd_gain_dbi),
            pol_mismatch_forward: rf.pol_mismatch_forward,
            pol_mismatch_back: rf.pol_mismatch_back,
            modulation,
            circuit_power_w: rf.circuit_power_dbm.map_or(0.0, dbm_to_watts),
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn fading_spec(&self) -> FadingSpec {
        FadingSpec {
            kappa_forward: self.fading.kappa_forward,
            kappa_back: self.fading.kappa_back,
        }
    }

    pub fn gamma_th_linear(&self) -> f64 {
        db_to_linear(self.qos.gamma_th_db)
    }

    pub fn qos_spec(&self) -> Result<QosSpec, String> {
        QosSpec::new(
            self.gamma_th_linear(),
            self.qos.epsilon,
            &self.fading_spec(),
            ThresholdMethod::Closed,
        )
        .map_err(|e| e.to_string())
    }

    pub fn sim_plan(&self) -> SimPlan {
        SimPlan {
            trials_per_point: self.sim.trials_per_point,
            seed: self.sim.seed,
            cell_size_m: self.sim.cell_size_m,
            half_extent_m: self.sim.half_extent_m,
            confidence_z: self.sim.confidence_z,
        }
    }

    /// Cross-field checks that serde cannot express. Runs before any
    /// command so a broken file fails as a usage error, not mid-sweep.
    pub fn validate_semantics(&self) -> Result<(), String> {
        if self.scenario.is_empty() || self.scenario.contains(['/', '\\']) {
            return Err("scenario must be a non-empty name without path separators".into());
        }
        let sweep = &self.sweep;
        if sweep.m_list.is_empty() {
            return Err("sweep.m_list must not be empty".into());
        }
        if sweep.m_list.contains(&0) {
            return Err("sweep.m_list entries must be positive".into());
        }
        if sweep.s_list.is_empty() || sweep.s_list.contains(&0) {
            return Err("sweep.s_list entries must be positive".into());
        }
        if !(sweep.d_step_m > 0.0) {
            return Err(format!("sweep.d_step_m must be positive, got {}", sweep.d_step_m));
        }
        if !(sweep.d_min_m >= 0.0) || !(sweep.d_max_m >= sweep.d_min_m) {
            return Err(format!(
                "sweep distances must satisfy 0 <= d_min_m <= d_max_m, got [{}, {}]",
                sweep.d_min_m, sweep.d_max_m
            ));
        }
        if !(self.qos.epsilon > 0.0 && self.qos.epsilon < 1.0) {
            return Err(format!("qos.epsilon must lie in (0, 1), got {}", self.qos.epsilon));
        }
        if !(self.search.grid_step_r_m > 0.0) || !(self.search.grid_step_d_m > 0.0) {
            return Err("search grid steps must be positive".into());
        }
        Ok(())
    }
}

// --------------------------------------------------------------------------
