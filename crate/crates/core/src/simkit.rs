//! Monte Carlo validation and scheme benchmarks.
//!
//! Everything here measures coverage the hard way: draw fading, count
//! failures, or rasterize the plane and test every cell. The planner's
//! closed forms and scans are the fast path; this module is the referee.
//!
//! Determinism is load-bearing. Trials run in fixed-size blocks with one
//! RNG substream per block, grid cells are pure functions of their index,
//! and random layouts derive their seed from the plan seed and realization
//! index, so every result is independent of thread count and scheduling.

use std::f64::consts::PI;

use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{self, FadingSpec, QosSpec};
use crate::linkmodel::{self, Placement, PolarPoint, RfConfig};
use crate::quartic;
use crate::rng::substream;

/// Trials per RNG substream; failure counts are summed over blocks, so the
/// estimate is identical however the blocks are scheduled.
const TRIAL_BLOCK: usize = 4096;

/// Coarse radial march step (m) used to bracket coverage crossings before
/// bisection.
const MARCH_STEP: f64 = 1.0;

// ------------------------------------------------------------------- plan

/// Simulation budget and spatial raster shared by the estimators.
#[derive(Debug, Clone)]
pub struct SimPlan {
    /// Fading draws per evaluated point.
    pub trials_per_point: usize,
    /// Master seed; everything below derives from it.
    pub seed: u64,
    /// Raster cell side (m) for coverage maps.
    pub cell_size_m: f64,
    /// Coverage maps span `[-half_extent_m, half_extent_m]` on both axes.
    /// Must exceed the largest feasible coverage radius, or the map errors
    /// with [`Error::GridTooSmall`].
    pub half_extent_m: f64,
    /// z-multiplier for binomial confidence bands.
    pub confidence_z: f64,
}

impl SimPlan {
    pub fn new(seed: u64) -> SimPlan {
        SimPlan {
            trials_per_point: 20_000,
            seed,
            cell_size_m: 0.5,
            half_extent_m: 250.0,
            confidence_z: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials_per_point < 1_000 {
            return Err(Error::InvalidConfig(format!(
                "need at least 1000 trials per point, got {}",
                self.trials_per_point
            )));
        }
        if !(self.cell_size_m > 0.0 && self.cell_size_m.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "cell size must be positive, got {}",
                self.cell_size_m
            )));
        }
        if !(self.half_extent_m >= 2.0 * self.cell_size_m) {
            return Err(Error::InvalidConfig(format!(
                "grid half-extent {} too small for cell size {}",
                self.half_extent_m, self.cell_size_m
            )));
        }
        if !(self.confidence_z > 0.0 && self.confidence_z.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "confidence multiplier must be positive, got {}",
                self.confidence_z
            )));
        }
        Ok(())
    }
}

// ----------------------------------------------------------------- outage

/// Empirical outage probability with its binomial confidence band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub probability: f64,
    /// `z * sqrt(p (1 - p) / n)` half-width.
    pub band: f64,
    pub trials: usize,
}

/// Estimate the outage probability at one location by direct simulation.
///
/// Each trial draws one unit-mean gamma power gain per serving PB and one
/// for the backscatter link; the forward gains combine weighted by the
/// deterministic path attenuations, so a sector-edge pair reproduces the
/// doubled-shape law the analysis uses. A trial fails when the faded SNR
/// drops below `gamma_th`.
pub fn simulate_outage(
    p: PolarPoint,
    placement: &Placement,
    cfg: &RfConfig,
    fading: &FadingSpec,
    gamma_th: f64,
    plan: &SimPlan,
) -> Result<OutageEstimate> {
    plan.validate()?;
    fading.validate()?;
    cfg.validate()?;
    if !(gamma_th >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "SNR threshold must be >= 0, got {gamma_th}"
        )));
    }
    let gamma_eq = linkmodel::equivalent_snr_saturating(p, placement, cfg);
    let weights = linkmodel::serving_path_weights(p, placement, cfg)?;
    let weight_sum: f64 = weights.iter().sum();
    let gx = Gamma::new(fading.kappa_forward, 1.0 / fading.kappa_forward)
        .expect("fading spec validated");
    let gy =
        Gamma::new(fading.kappa_back, 1.0 / fading.kappa_back).expect("fading spec validated");

    let n = plan.trials_per_point;
    let failures: u64 = (0..n.div_ceil(TRIAL_BLOCK))
        .into_par_iter()
        .map(|block| {
            let mut rng = substream(plan.seed, block as u64);
            let in_block = TRIAL_BLOCK.min(n - block * TRIAL_BLOCK);
            let mut fails = 0u64;
            for _ in 0..in_block {
                let mut forward = 0.0;
                for w in &weights {
                    forward += w * gx.sample(&mut rng);
                }
                let y = gy.sample(&mut rng);
                if gamma_eq * (forward / weight_sum) * y < gamma_th {
                    fails += 1;
                }
            }
            fails
        })
        .sum();

    let probability = failures as f64 / n as f64;
    let band = plan.confidence_z * (probability * (1.0 - probability) / n as f64).sqrt();
    Ok(OutageEstimate { probability, band, trials: n })
}

/// Simulated guaranteed coverage radius of a ring: march the sector edge
/// outward until the empirical outage exceeds the QoS target, then bisect
/// the bracket. All outage evaluations share the plan seed, so the radial
/// outage profile is a fixed function and the crossing is well defined.
pub fn empirical_gcd(
    placement: &Placement,
    cfg: &RfConfig,
    fading: &FadingSpec,
    qos: &QosSpec,
    plan: &SimPlan,
) -> Result<f64> {
    let (m_total, _) = match *placement {
        Placement::Ring { m_total, serving, .. } => (m_total, serving),
        _ => {
            return Err(Error::NotApplicable(
                "empirical GCD is defined for symmetric rings".into(),
            ))
        }
    };
    let edge = PI / m_total as f64;
    let outage = |r: f64| -> Result<f64> {
        let p = PolarPoint { r, theta_o: edge };
        Ok(simulate_outage(p, placement, cfg, fading, qos.gamma_th, plan)?.probability)
    };

    let alpha = linkmodel::link_budget_factor(cfg);
    let reach = quartic::coverage_reach(alpha, qos.gamma_eq_th, cfg.path_loss_exp);
    let r_upper = 3.0 * quartic::asymptotic_limits(reach)?.coverage_radius;

    let mut lo = 0.0;
    let mut hi = None;
    let mut r = MARCH_STEP;
    while r <= r_upper {
        if outage(r)? > qos.epsilon {
            hi = Some(r);
            break;
        }
        lo = r;
        r += MARCH_STEP;
    }
    let Some(mut hi) = hi else {
        return Ok(r_upper);
    };
    for _ in 0..7 {
        let mid = 0.5 * (lo + hi);
        if outage(mid)? > qos.epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ----------------------------------------------------------- coverage map

/// Rasterized coverage of one placement.
#[derive(Debug, Clone)]
pub struct CoverageMap {
    pub cell_size_m: f64,
    pub half_extent_m: f64,
    /// Cells per axis; vectors below are row-major `n * n`.
    pub cells_per_axis: usize,
    /// Per-cell outage. Exact (closed product-fading CDF) when the run uses
    /// one serving PB and integer fading shapes; otherwise the deterministic
    /// indicator `1 - covered`, which bounds it.
    pub outage: Vec<f64>,
    /// Per-cell QoS verdict: equivalent SNR meets the derived threshold.
    pub covered: Vec<bool>,
    pub total_area_m2: f64,
    /// Distance from the reader to the nearest uncovered cell center: the
    /// raster estimate of the guaranteed coverage radius.
    pub gcd_empirical: f64,
}

impl CoverageMap {
    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.cells_per_axis + ix
    }
}

struct GridGeom {
    n: usize,
    cell: f64,
    half: f64,
}

impl GridGeom {
    fn new(plan: &SimPlan) -> GridGeom {
        let n = (2.0 * plan.half_extent_m / plan.cell_size_m).ceil() as usize;
        GridGeom { n, cell: plan.cell_size_m, half: plan.half_extent_m }
    }

    fn center(&self, idx: usize) -> [f64; 2] {
        let ix = idx % self.n;
        let iy = idx / self.n;
        [
            -self.half + (ix as f64 + 0.5) * self.cell,
            -self.half + (iy as f64 + 0.5) * self.cell,
        ]
    }

    fn on_boundary(&self, idx: usize) -> bool {
        let ix = idx % self.n;
        let iy = idx / self.n;
        ix == 0 || iy == 0 || ix == self.n - 1 || iy == self.n - 1
    }
}

// Covered verdict for every cell, plus the boundary flag. Exact placement
// geometry: nearest-PB serving sets are recomputed per cell, never reduced
// to a sector.
fn coverage_cells(
    placement: &Placement,
    cfg: &RfConfig,
    qos: &QosSpec,
    plan: &SimPlan,
) -> Result<(GridGeom, Vec<bool>)> {
    plan.validate()?;
    placement.validate()?;
    cfg.validate()?;
    let geom = GridGeom::new(plan);
    let pbs = placement.pb_positions();
    let serving = placement.serving();
    let covered: Vec<bool> = (0..geom.n * geom.n)
        .into_par_iter()
        .map(|idx| {
            let snr = linkmodel::equivalent_snr_at_xy(geom.center(idx), &pbs, serving, cfg)
                .expect("placement validated");
            snr >= qos.gamma_eq_th
        })
        .collect();
    if covered.iter().enumerate().any(|(idx, &c)| c && geom.on_boundary(idx)) {
        return Err(Error::GridTooSmall);
    }
    Ok((geom, covered))
}

/// Total coverage area of an arbitrary placement: rasterize the plane and
/// test the equivalent SNR of every cell center against the QoS threshold.
/// This is the metric that credits detached covered regions beyond the
/// guaranteed radius, which is what the scheme comparisons need.
pub fn total_coverage_area(
    placement: &Placement,
    cfg: &RfConfig,
    fading: &FadingSpec,
    qos: &QosSpec,
    plan: &SimPlan,
) -> Result<CoverageMap> {
    fading.validate()?;
    let (geom, covered) = coverage_cells(placement, cfg, qos, plan)?;
    let pbs = placement.pb_positions();
    let serving = placement.serving();

    // Closed per-cell outage applies when the fading law at every cell is
    // the plain two-gamma product with integer shapes.
    let kx = fading.kappa_forward.round();
    let ky = fading.kappa_back.round();
    let closed_law = serving == 1
        && (fading.kappa_forward - kx).abs() < 1e-9
        && (fading.kappa_back - ky).abs() < 1e-9
        && kx >= 1.0
        && ky >= 1.0;
    let outage: Vec<f64> = (0..geom.n * geom.n)
        .into_par_iter()
        .map(|idx| {
            if !closed_law {
                return if covered[idx] { 0.0 } else { 1.0 };
            }
            let snr = linkmodel::equivalent_snr_at_xy(geom.center(idx), &pbs, serving, cfg)
                .expect("placement validated");
            if snr <= 0.0 {
                1.0
            } else {
                fading::product_cdf_closed(qos.gamma_th / snr, kx as u32, ky as u32)
            }
        })
        .collect();

    let count = covered.iter().filter(|&&c| c).count();
    let gcd_empirical = covered
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(idx, _)| {
            let [x, y] = geom.center(idx);
            x.hypot(y)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(CoverageMap {
        cell_size_m: geom.cell,
        half_extent_m: geom.half,
        cells_per_axis: geom.n,
        outage,
        covered,
        total_area_m2: count as f64 * geom.cell * geom.cell,
        gcd_empirical: if gcd_empirical.is_finite() { gcd_empirical } else { 0.0 },
    })
}

// ------------------------------------------------------ scheme comparison

/// Guaranteed coverage radius of an arbitrary placement, measured directly
/// from its geometry: for every angle on a fine grid, march outward to the
/// first radius whose equivalent SNR misses the threshold, and keep the
/// minimum over angles. Deterministic; used where no sector reduction
/// exists.
pub fn worst_case_gcd(
    placement: &Placement,
    cfg: &RfConfig,
    qos: &QosSpec,
    r_upper: f64,
) -> Result<f64> {
    placement.validate()?;
    cfg.validate()?;
    if !(r_upper > 0.0 && r_upper.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "search ceiling must be finite and positive, got {r_upper}"
        )));
    }
    let pbs = placement.pb_positions();
    let serving = placement.serving();
    let n_angles = (32 * placement.m_total()).max(256);
    let gcd = (0..n_angles)
        .into_par_iter()
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / n_angles as f64;
            let dir = [theta.cos(), theta.sin()];
            let covered = |r: f64| {
                let snr =
                    linkmodel::equivalent_snr_at_xy([r * dir[0], r * dir[1]], &pbs, serving, cfg)
                        .expect("placement validated");
                snr >= qos.gamma_eq_th
            };
            if !covered(0.0) {
                return 0.0;
            }
            let mut lo = 0.0;
            let mut r = MARCH_STEP;
            while r <= r_upper {
                if !covered(r) {
                    let mut hi = r;
                    while hi - lo > 1e-3 {
                        let mid = 0.5 * (lo + hi);
                        if covered(mid) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    return 0.5 * (lo + hi);
                }
                lo = r;
                r += MARCH_STEP;
            }
            r_upper
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(gcd)
}

/// Outcome of the single-tier versus two-tier benchmark.
#[derive(Debug, Clone, Copy)]
pub struct TwoTierReport {
    pub single_tier_d: f64,
    pub single_tier_gcd: f64,
    pub best_two_tier_gcd: f64,
    pub best_inner_count: u32,
    pub best_inner_d: f64,
    pub best_outer_d: f64,
    pub best_rotation_rad: f64,
}

/// Compare the optimal single-tier ring of `m_total` PBs against two-tier
/// splits of the same budget. The inner tier takes the closed optimum for
/// its own count; the outer-tier radius sweeps a bracket around the
/// single-tier optimum and the relative rotation sweeps one outer sector.
/// Both schemes are scored by [`worst_case_gcd`] with single-PB serving.
pub fn compare_two_tier(
    m_total: u32,
    cfg: &RfConfig,
    qos: &QosSpec,
) -> Result<TwoTierReport> {
    if m_total < 6 {
        return Err(Error::InvalidConfig(format!(
            "two-tier split needs at least 6 PBs, got {m_total}"
        )));
    }
    let alpha = linkmodel::link_budget_factor(cfg);
    let reach = quartic::coverage_reach(alpha, qos.gamma_eq_th, cfg.path_loss_exp);
    let r_upper = 3.0 * quartic::asymptotic_limits(reach)?.coverage_radius;
    let d_single = quartic::optimal_pb_distance(m_total, reach);
    let single = Placement::Ring { m_total, d: d_single, serving: 1 };
    let single_gcd = worst_case_gcd(&single, cfg, qos, r_upper)?;

    let mut best = TwoTierReport {
        single_tier_d: d_single,
        single_tier_gcd: single_gcd,
        best_two_tier_gcd: f64::NEG_INFINITY,
        best_inner_count: 0,
        best_inner_d: 0.0,
        best_outer_d: 0.0,
        best_rotation_rad: 0.0,
    };
    for m_inner in 3..=m_total - 3 {
        let m_outer = m_total - m_inner;
        let d_inner = quartic::optimal_pb_distance(m_inner, reach);
        for factor in [0.8, 0.9, 1.0, 1.1, 1.2, 1.3] {
            let d_outer = factor * d_single;
            for k in 0..5 {
                let rotation = PI / m_outer as f64 * k as f64 / 4.0;
                let placement = Placement::TwoRing {
                    m_inner,
                    d_inner,
                    m_outer,
                    d_outer,
                    rotation,
                    serving: 1,
                };
                let gcd = worst_case_gcd(&placement, cfg, qos, r_upper)?;
                if gcd > best.best_two_tier_gcd {
                    best = TwoTierReport {
                        best_two_tier_gcd: gcd,
                        best_inner_count: m_inner,
                        best_inner_d: d_inner,
                        best_outer_d: d_outer,
                        best_rotation_rad: rotation,
                        ..best
                    };
                }
            }
        }
    }
    Ok(best)
}

// ------------------------------------------------------- random placement

/// Coverage-area statistics over random uniform-disk deployments.
#[derive(Debug, Clone, Copy)]
pub struct AreaStats {
    pub mean_m2: f64,
    pub std_m2: f64,
    pub min_m2: f64,
    pub median_m2: f64,
    pub max_m2: f64,
    pub n_realizations: usize,
}

// splitmix64 step: spreads realization indices into independent RNG seeds.
fn realization_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Total coverage area statistics for `m_total` PBs dropped uniformly in a
/// disk of radius `max_radius`, nearest-PB serving. Each realization gets
/// its own derived seed, so the statistics are reproducible and independent
/// of evaluation order. `max_radius = 0` degenerates to every PB at the
/// reader.
pub fn random_placement_area(
    m_total: u32,
    max_radius: f64,
    n_realizations: usize,
    cfg: &RfConfig,
    qos: &QosSpec,
    plan: &SimPlan,
) -> Result<AreaStats> {
    if n_realizations < 50 {
        return Err(Error::InvalidConfig(format!(
            "need at least 50 realizations for stable statistics, got {n_realizations}"
        )));
    }
    if !(max_radius >= 0.0 && max_radius.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "disk radius must be finite and >= 0, got {max_radius}"
        )));
    }
    let cell_area = plan.cell_size_m * plan.cell_size_m;
    let areas: Vec<f64> = (0..n_realizations)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let placement = if max_radius == 0.0 {
                Placement::Ring { m_total, d: 0.0, serving: 1 }
            } else {
                Placement::RandomDisk {
                    m_total,
                    max_radius,
                    seed: realization_seed(plan.seed, k as u64),
                    serving: 1,
                }
            };
            let (_, covered) = coverage_cells(&placement, cfg, qos, plan)?;
            Ok(covered.iter().filter(|&&c| c).count() as f64 * cell_area)
        })
        .collect::<Result<_>>()?;

    let n = areas.len() as f64;
    let mean = areas.iter().sum::<f64>() / n;
    let var = if areas.len() > 1 {
        areas.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = areas;
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(AreaStats {
        mean_m2: mean,
        std_m2: var.sqrt(),
        min_m2: sorted[0],
        median_m2: sorted[sorted.len() / 2],
        max_m2: *sorted.last().unwrap(),
        n_realizations: sorted.len(),
    })
}

// --------------------------------------------------------------------------
