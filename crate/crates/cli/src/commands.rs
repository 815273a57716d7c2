//! Subcommand drivers.
//!
//! Each driver turns one parsed [`RunConfig`] into one CSV (plus JSON
//! sidecar) in the output directory. Drivers are plain functions so the
//! integration tests can call them without spawning the binary; the binary
//! adds flag handling and exit-code policy on top.
//!
//! Determinism contract: given the same configuration and seed, every
//! driver emits byte-identical CSV. Anything that varies between runs of
//! the same configuration (wall time, toolchain revision) goes in the
//! sidecar only.

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use pbcov::fading::{equivalent_threshold, QosSpec, ThresholdMethod};
use pbcov::linkmodel::{dbm_to_watts, link_budget_factor, Placement, RfConfig};
use pbcov::planner::{self, GcdQuery, GcdResult, SolveMethod};
use pbcov::quartic::{self, CoverageQuartic};
use pbcov::simkit;

use crate::config::RunConfig;
use crate::output::{col, col_bool, git_hash, write_csv, write_sidecar};

pub struct CommandOutcome {
    /// Some scan hit its search ceiling; worth a warning, and exit code 3
    /// under `--strict`.
    pub truncated: bool,
    pub csv_path: PathBuf,
}

type CmdResult = Result<CommandOutcome, Box<dyn Error>>;

// ---------------------------------------------------------------- helpers

fn method_name(m: SolveMethod) -> &'static str {
    match m {
        SolveMethod::ClosedForm => "closed-form",
        SolveMethod::NumericScan => "numeric-scan",
        SolveMethod::ChiApprox => "chi-approx",
    }
}

fn build_query(config: &RunConfig, rf: &RfConfig, m: u32, s: u32) -> Result<GcdQuery, pbcov::Error> {
    let mut query = GcdQuery::new(
        rf.clone(),
        Placement::Ring { m_total: m, d: 0.0, serving: s },
        config.qos_spec().map_err(pbcov::Error::InvalidConfig)?,
        config.fading_spec(),
    )?;
    query.grid_step_r = config.search.grid_step_r_m;
    query.grid_step_d = config.search.grid_step_d_m;
    query.validate()?;
    Ok(query)
}

// Closed-form optimum for the serving counts where the sector-edge fading
// law is exact and nothing clips the harvest.
fn closed_candidate(
    rf: &RfConfig,
    config: &RunConfig,
    m: u32,
    s: u32,
) -> Result<Option<(f64, f64)>, pbcov::Error> {
    if s > 2 || rf.circuit_power_w != 0.0 {
        return Ok(None);
    }
    let thr = equivalent_threshold(
        config.gamma_th_linear(),
        config.qos.epsilon,
        s as f64 * config.fading.kappa_forward,
        config.fading.kappa_back,
        ThresholdMethod::Closed,
    )?;
    let reach =
        quartic::coverage_reach(s as f64 * link_budget_factor(rf), thr, rf.path_loss_exp);
    let d = quartic::optimal_pb_distance(m, reach);
    let roots = CoverageQuartic::for_sector(m, d, reach)?.solve();
    Ok(Some((d, roots.coverage_radius)))
}

// Infinite-ring limits for the S-scaled budget: the horizontal/vertical
// asymptotes of the coverage-vs-radius curve.
fn asymptote(
    rf: &RfConfig,
    config: &RunConfig,
    s: u32,
) -> Result<quartic::RingOptimum, pbcov::Error> {
    let thr = equivalent_threshold(
        config.gamma_th_linear(),
        config.qos.epsilon,
        s as f64 * config.fading.kappa_forward,
        config.fading.kappa_back,
        ThresholdMethod::Closed,
    )?;
    let reach =
        quartic::coverage_reach(s as f64 * link_budget_factor(rf), thr, rf.path_loss_exp);
    quartic::asymptotic_limits(reach)
}

fn sidecar_meta(
    config: &RunConfig,
    command: &str,
    rf: &RfConfig,
    qos: &QosSpec,
    rows: usize,
    runtime_ms: u128,
) -> serde_json::Value {
    serde_json::json!({
        "command": command,
        "scenario": config.scenario,
        "seed": config.sim.seed,
        "trials_per_point": config.sim.trials_per_point,
        "git_hash": git_hash(),
        "search": {
            "grid_step_r_m": config.search.grid_step_r_m,
            "grid_step_d_m": config.search.grid_step_d_m,
            "crossing_refine_m": 1.0e-5,
        },
        "conversions": {
            "tx_power_w": rf.tx_power_w,
            "noise_w": rf.noise_w,
            "circuit_power_w": rf.circuit_power_w,
            "bd_gain_linear": rf.bd_gain,
            "gamma_th_linear": qos.gamma_th,
            "gamma_eq_th_single_serving": qos.gamma_eq_th,
        },
        "rows": rows,
        "runtime_ms": runtime_ms,
    })
}

// ------------------------------------------------------------ solve-dstar

/// Optimal ring radius and peak coverage per (M, S), solved numerically and
/// cross-checked against the closed forms where they apply. Disagreement
/// beyond two grid steps is flagged in the CSV and on stderr, but does not
/// fail the run.
pub fn solve_dstar(config: &RunConfig, out_dir: &Path) -> CmdResult {
    let start = Instant::now();
    let rf = config.rf_config()?;
    let qos = config.qos_spec()?;
    let mut rows = Vec::new();
    let mut truncated = false;
    for &m in &config.sweep.m_list {
        for &s in &config.sweep.s_list {
            if s == 0 || s > m {
                continue;
            }
            let query = build_query(config, &rf, m, s)?;
            let res = planner::optimize_d(&query)?;
            truncated |= res.truncated;
            let closed = closed_candidate(&rf, config, m, s)?;
            let (closed_d, closed_r, disagrees) = match closed {
                Some((d, r)) => {
                    let off = (res.pb_distance - d).abs() > 2.0 * query.grid_step_d;
                    if off {
                        eprintln!(
                            "warning: M={m} S={s}: numeric optimum {:.3} m vs closed {:.3} m",
                            res.pb_distance, d
                        );
                    }
                    (col(d), col(r), col_bool(off))
                }
                None => (String::new(), String::new(), String::new()),
            };
            rows.push(vec![
                config.scenario.clone(),
                m.to_string(),
                s.to_string(),
                col(res.pb_distance),
                col(res.coverage_radius),
                method_name(res.method).to_string(),
                col_bool(res.gap_detected),
                closed_d,
                closed_r,
                disagrees,
            ]);
        }
    }
    let csv_path = out_dir.join(format!("{}-solve-dstar.csv", config.scenario));
    write_csv(
        &csv_path,
        &[
            "scenario",
            "m",
            "s",
            "d_star_m",
            "gcd_m",
            "method",
            "gap",
            "closed_d_star_m",
            "closed_gcd_m",
            "disagrees",
        ],
        &rows,
    )?;
    let meta = sidecar_meta(config, "solve-dstar", &rf, &qos, rows.len(), start.elapsed().as_millis());
    write_sidecar(&csv_path, &meta)?;
    Ok(CommandOutcome { truncated, csv_path })
}

// -------------------------------------------------------------- gcd-curve

/// Coverage radius versus ring radius per (M, S), with the infinite-ring
/// asymptotes as constant columns. `overlay` adds a Monte Carlo estimate
/// of each point (slow: one simulated bisection per row).
pub fn gcd_curve(config: &RunConfig, out_dir: &Path, overlay: bool) -> CmdResult {
    let start = Instant::now();
    let rf = config.rf_config()?;
    let qos = config.qos_spec()?;
    let fading = config.fading_spec();
    let plan = config.sim_plan();
    let sweep = &config.sweep;
    let n_steps = ((sweep.d_max_m - sweep.d_min_m) / sweep.d_step_m + 1e-9).floor() as usize;

    let mut rows = Vec::new();
    let mut truncated = false;
    for &m in &sweep.m_list {
        for &s in &sweep.s_list {
            if s == 0 || s > m {
                continue;
            }
            let query = build_query(config, &rf, m, s)?;
            let asym = asymptote(&rf, config, s)?;
            for k in 0..=n_steps {
                let d = sweep.d_min_m + k as f64 * sweep.d_step_m;
                let res = planner::gcd_at(&query, d)?;
                truncated |= res.truncated;
                let mut row = vec![
                    config.scenario.clone(),
                    m.to_string(),
                    s.to_string(),
                    col(d),
                    col(res.coverage_radius),
                    col_bool(res.gap_detected),
                    col_bool(res.truncated),
                    col(asym.pb_distance),
                    col(asym.coverage_radius),
                ];
                if overlay {
                    let placement = Placement::Ring { m_total: m, d, serving: s };
                    let mc = simkit::empirical_gcd(&placement, &rf, &fading, &qos, &plan)?;
                    row.push(col(mc));
                }
                rows.push(row);
            }
        }
    }
    let mut header = vec![
        "scenario",
        "m",
        "s",
        "d_m",
        "gcd_m",
        "gap",
        "truncated",
        "asym_d_m",
        "asym_gcd_m",
    ];
    if overlay {
        header.push("gcd_mc_m");
    }
    let csv_path = out_dir.join(format!("{}-gcd-curve.csv", config.scenario));
    write_csv(&csv_path, &header, &rows)?;
    let meta = sidecar_meta(config, "gcd-curve", &rf, &qos, rows.len(), start.elapsed().as_millis());
    write_sidecar(&csv_path, &meta)?;
    Ok(CommandOutcome { truncated, csv_path })
}

// ----------------------------------------------------------- circuit-power

/// Optimum and coverage under a swept harvest floor. The first row of each
/// (M, S) group is the unconstrained baseline (`xi_dbm = "off"`); rows
/// whose floor kills all coverage report a zero radius rather than erroring.
pub fn circuit_power(config: &RunConfig, out_dir: &Path) -> CmdResult {
    let start = Instant::now();
    let base_rf = config.rf_config()?;
    let qos = config.qos_spec()?;
    let mut rows = Vec::new();
    let mut truncated = false;
    for &m in &config.sweep.m_list {
        for &s in &config.sweep.s_list {
            if s == 0 || s > m {
                continue;
            }
            let floors = std::iter::once(None)
                .chain(config.sweep.circuit_power_dbm_list.iter().copied().map(Some));
            for xi_dbm in floors {
                let mut rf = base_rf.clone();
                rf.circuit_power_w = xi_dbm.map_or(0.0, dbm_to_watts);
                let query = build_query(config, &rf, m, s)?;
                let res: GcdResult = planner::optimize_d(&query)?;
                truncated |= res.truncated;
                rows.push(vec![
                    config.scenario.clone(),
                    m.to_string(),
                    s.to_string(),
                    xi_dbm.map_or_else(|| "off".to_string(), col),
                    col(res.pb_distance),
                    col(res.coverage_radius),
                    method_name(res.method).to_string(),
                    col_bool(res.zero_coverage),
                ]);
            }
        }
    }
    let csv_path = out_dir.join(format!("{}-circuit-power.csv", config.scenario));
    write_csv(
        &csv_path,
        &["scenario", "m", "s", "xi_dbm", "d_star_m", "gcd_m", "method", "zero_coverage"],
        &rows,
    )?;
    let meta =
        sidecar_meta(config, "circuit-power", &base_rf, &qos, rows.len(), start.elapsed().as_millis());
    write_sidecar(&csv_path, &meta)?;
    Ok(CommandOutcome { truncated, csv_path })
}

// --------------------------------------------------------- compare-schemes

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    /// Effective configuration the partial results belong to; a mismatch
    /// discards the checkpoint.
    config_toml: String,
    rows: Vec<Vec<String>>,
}

/// Single-tier ring versus two-tier splits and random uniform-disk drops,
/// one row per M. Long-running: progress is checkpointed after every row,
/// and a rerun with the same configuration resumes where it stopped. The
/// final CSV is identical whether or not the run was interrupted.
pub fn compare_schemes(config: &RunConfig, out_dir: &Path) -> CmdResult {
    let start = Instant::now();
    let rf = config.rf_config()?;
    let qos = config.qos_spec()?;
    let fading = config.fading_spec();
    let plan = config.sim_plan();
    let alpha = link_budget_factor(&rf);
    let reach = quartic::coverage_reach(alpha, qos.gamma_eq_th, rf.path_loss_exp);

    let checkpoint_path = out_dir.join(format!("{}-compare-schemes.checkpoint.json", config.scenario));
    let effective = config.to_toml();
    let mut rows: Vec<Vec<String>> = match fs::read_to_string(&checkpoint_path) {
        Ok(text) => match serde_json::from_str::<Checkpoint>(&text) {
            Ok(ck) if ck.config_toml == effective && ck.rows.len() <= config.sweep.m_list.len() => {
                eprintln!("resuming from checkpoint: {} of {} rows done", ck.rows.len(), config.sweep.m_list.len());
                ck.rows
            }
            _ => Vec::new(),
        },
        Err(_) => Vec::new(),
    };

    for &m in config.sweep.m_list.iter().skip(rows.len()) {
        let d_star = quartic::optimal_pb_distance(m, reach);
        let two_tier = if m >= 6 {
            Some(simkit::compare_two_tier(m, &rf, &qos)?)
        } else {
            None
        };

        let symmetric = Placement::Ring { m_total: m, d: d_star, serving: 1 };
        let sym_area =
            simkit::total_coverage_area(&symmetric, &rf, &fading, &qos, &plan)?.total_area_m2;
        let mut best_area = f64::NEG_INFINITY;
        let mut best_radius = 0.0;
        for k in 1..=20 {
            let disk_radius = 1.5 * d_star * k as f64 / 20.0;
            let stats = simkit::random_placement_area(
                m,
                disk_radius,
                config.sweep.random_realizations,
                &rf,
                &qos,
                &plan,
            )?;
            if stats.mean_m2 > best_area {
                best_area = stats.mean_m2;
                best_radius = disk_radius;
            }
        }
        let advantage_pct = if best_area > 0.0 {
            100.0 * (sym_area - best_area) / best_area
        } else {
            0.0
        };

        let (tt_gcd, tt_m1, tt_din, tt_dout, tt_rot, single_gcd) = match two_tier {
            Some(r) => (
                col(r.best_two_tier_gcd),
                r.best_inner_count.to_string(),
                col(r.best_inner_d),
                col(r.best_outer_d),
                col(r.best_rotation_rad),
                col(r.single_tier_gcd),
            ),
            None => {
                // No two-tier split exists; score the single tier the same
                // way the comparison would have.
                let single = simkit::worst_case_gcd(
                    &symmetric,
                    &rf,
                    &qos,
                    3.0 * quartic::asymptotic_limits(reach)?.coverage_radius,
                )?;
                (String::new(), String::new(), String::new(), String::new(), String::new(), col(single))
            }
        };
        rows.push(vec![
            config.scenario.clone(),
            m.to_string(),
            col(d_star),
            single_gcd,
            tt_gcd,
            tt_m1,
            tt_din,
            tt_dout,
            tt_rot,
            col(sym_area),
            col(best_area),
            col(best_radius),
            col(advantage_pct),
        ]);
        let ck = Checkpoint { config_toml: effective.clone(), rows: rows.clone() };
        fs::write(&checkpoint_path, serde_json::to_string(&ck)?)?;
    }

    let csv_path = out_dir.join(format!("{}-compare-schemes.csv", config.scenario));
    write_csv(
        &csv_path,
        &[
            "scenario",
            "m",
            "single_tier_d_m",
            "single_tier_gcd_m",
            "two_tier_gcd_m",
            "two_tier_inner_m1",
            "two_tier_inner_d_m",
            "two_tier_outer_d_m",
            "two_tier_rotation_rad",
            "symmetric_area_m2",
            "random_best_area_m2",
            "random_best_disk_radius_m",
            "area_advantage_pct",
        ],
        &rows,
    )?;
    let _ = fs::remove_file(&checkpoint_path);
    let meta =
        sidecar_meta(config, "compare-schemes", &rf, &qos, rows.len(), start.elapsed().as_millis());
    write_sidecar(&csv_path, &meta)?;
    Ok(CommandOutcome { truncated: false, csv_path })
}
