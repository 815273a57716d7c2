//! Shared integration-test fixture: the 915 MHz reference parameter set
//! (27 dBm PBs, OOK, Nakagami shape 4 on both hops, 5 dB SNR target at 5%
//! outage).

use num_complex::Complex64;

use pbcov::fading::{FadingSpec, QosSpec, ThresholdMethod};
use pbcov::linkmodel::{db_to_linear, dbm_to_watts, Modulation, RfConfig};

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

pub fn baseline_fading() -> FadingSpec {
    FadingSpec { kappa_forward: 4.0, kappa_back: 4.0 }
}

pub fn baseline_qos() -> QosSpec {
    QosSpec::new(db_to_linear(5.0), 0.05, &baseline_fading(), ThresholdMethod::Closed)
        .expect("reference QoS is well-posed")
}
