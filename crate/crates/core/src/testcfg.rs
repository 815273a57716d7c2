//! Shared unit-test fixture: the 915 MHz reference parameter set used by
//! most numeric tests (27 dBm PBs, OOK, Nakagami shape 4 on both hops).

use num_complex::Complex64;

use crate::linkmodel::{dbm_to_watts, db_to_linear, Modulation, RfConfig};

pub fn baseline_rf() -> RfConfig {
    let a = Complex64::new(0.6047, 0.5042);
    RfConfig {
        tx_power_w: dbm_to_watts(27.0),
        carrier_hz: 915.0e6,
        path_loss_exp: 2.4,
        switching_loss: 0.49,
        samples_per_symbol: 20,
        noise_w: dbm_to_watts(-110.0),
        structural_mode: a,
        reflection: [a, -a / a.norm()],
        bd_gain: db_to_linear(2.1),
        pol_mismatch_forward: 0.8,
        pol_mismatch_back: 0.8,
        modulation: Modulation::Ook,
        circuit_power_w: 0.0,
    }
}
