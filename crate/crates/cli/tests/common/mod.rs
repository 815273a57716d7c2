//! Shared fixtures for the binary tests: a compiled-binary handle and a
//! reduced scenario that keeps every subcommand to seconds.

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pbcov"))
}

/// Write `text` as a scenario file inside `dir` and return its path.
pub fn write_toml(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, text).expect("scenario file writes");
    path
}

/// Small sweep over two ring sizes: three curve points, two harvest
/// floors, the minimum placement realizations, coarse grids.
pub const SCENARIO: &str = r#"
scenario = "smoke"

[rf]
tx_power_dbm = 27.0
carrier_mhz = 915.0
path_loss_exp = 2.4
switching_loss = 0.49
samples_per_symbol = 20
noise_dbm = -110.0
structural_mode_re = 0.6047
structural_mode_im = 0.5042
reflection0_re = 0.6047
reflection0_im = 0.5042
reflection1_re = -0.76804426568303175
reflection1_im = -0.64039675666840517
bd_gain_dbi = 2.1
pol_mismatch_forward = 0.8
pol_mismatch_back = 0.8
modulation = "ook"

[qos]
gamma_th_db = 5.0
epsilon = 0.05

[fading]
kappa_forward = 4.0
kappa_back = 4.0

[sweep]
m_list = [4, 6]
s_list = [1]
d_min_m = 0.0
d_max_m = 30.0
d_step_m = 15.0
circuit_power_dbm_list = [-30.0, -25.0]
random_realizations = 50

[sim]
trials_per_point = 4000
seed = 9
cell_size_m = 5.0
half_extent_m = 150.0
confidence_z = 3.0

[search]
grid_step_r_m = 0.2
grid_step_d_m = 0.5
"#;
