//! Coverage planning over symmetric PB rings.
//!
//! The coverage radius of a ring is decided on the sector edge: by symmetry
//! the equivalent SNR of a BD at fixed radius is worst at angle `pi/M`, so a
//! radius is covered exactly when the edge SNR meets the fading-derived
//! threshold. The planner turns that into two searches:
//!
//! * [`gcd_at`] scans the edge outward at a fixed ring radius `d` and
//!   bisects the first down-crossing: the guaranteed coverage radius.
//! * [`optimize_d`] sweeps `d`, maximizes the coverage radius, refines the
//!   winner by golden section, and cross-checks the closed forms from
//!   [`quartic`](crate::quartic) whenever they apply (one or two serving
//!   PBs, no energy floor), reporting which route produced the answer.
//!
//! Serving counts above two lose the constant threshold: the effective
//! forward fading shape then depends on the per-PB path weights at every
//! `(r, d)` pair, so thresholds are inverted on demand and memoized by a
//! quantized shape key ([`ThresholdTable`] internals). The full-ring case
//! additionally has a closed approximation ([`chi_scaled_optimum`]) that
//! rescales the single-PB budget by the serving gain ratio and iterates the
//! closed optimum to a fixed point.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{self, FadingSpec, QosSpec, ThresholdMethod};
use crate::linkmodel::{self, Placement, PolarPoint, RfConfig};
use crate::quartic::{self, CoverageQuartic};

/// Crossing refinement width (m): the coverage radius is bisected until the
/// bracketing interval is this tight. Must stay well below the square of
/// the d-grid step: the coverage peak is flat to second order in d, so
/// objective noise `tol` smears the radius-optimizer's argmax over a
/// plateau of half-width `sqrt(4 tol (1 - T^2) r_max)`, which for small
/// rings reaches 0.33 m at 1e-3 but stays under half a grid step at 1e-5.
const R_REFINE_TOL: f64 = 1e-5;

/// Quantization of the effective forward shape used as the threshold cache
/// key. The threshold's sensitivity to the shape is well under one, so the
/// induced error sits far below [`R_REFINE_TOL`].
const SHAPE_QUANTUM: f64 = 1e-4;

/// Effective shapes this close to the singular lattice of the series CDF
/// (shape differences near integers) are nudged onto or away from it; the
/// perturbation is invisible at the crossing resolution and keeps every
/// threshold inversion on a fast analytic path.
const SHAPE_SNAP_BAND: f64 = 2e-3;

/// Coverage improvements smaller than this (m) do not displace an earlier
/// candidate: on plateaus the smallest ring radius wins.
const PLATEAU_TOL: f64 = 1e-9;

// ------------------------------------------------------------------ types

/// One planning problem: scenario, QoS target, and search resolution.
#[derive(Debug, Clone)]
pub struct GcdQuery {
    pub config: RfConfig,
    /// Must be a symmetric ring; its stored radius is a placeholder that
    /// [`gcd_at`] and [`optimize_d`] override.
    pub placement: Placement,
    pub qos: QosSpec,
    pub fading: FadingSpec,
    /// Radial search ceiling (m).
    pub r_upper: f64,
    /// Radial scan resolution (m).
    pub grid_step_r: f64,
    /// Ring-radius scan resolution (m).
    pub grid_step_d: f64,
    /// Record the scanned `(r, gamma_eq)` pairs in the result.
    pub trace: bool,
}

/// Which route produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Closed-form optimum, validated by the numeric scan.
    ClosedForm,
    /// Grid scan plus bisection / golden-section refinement.
    NumericScan,
    /// Full-ring serving-gain rescaling iterated to a fixed point.
    ChiApprox,
}

/// Outcome of a coverage query.
#[derive(Debug, Clone)]
pub struct GcdResult {
    /// Ring radius the result refers to (m); for optimization queries, the
    /// optimizer's answer.
    pub pb_distance: f64,
    /// Guaranteed coverage radius (m).
    pub coverage_radius: f64,
    /// Coverage resumes at some radius beyond the guaranteed one.
    pub gap_detected: bool,
    /// The scan hit `r_upper` without finding the edge of coverage; enlarge
    /// the ceiling to resolve.
    pub truncated: bool,
    /// Even a BD at the reader fails the QoS (the energy floor swallows the
    /// whole harvest).
    pub zero_coverage: bool,
    pub method: SolveMethod,
    /// Scanned `(r, gamma_eq)` pairs up to the crossing, when requested.
    pub snr_trace: Option<Vec<(f64, f64)>>,
}

impl GcdQuery {
    /// Query with default search geometry: the radial ceiling is three
    /// times the infinite-ring coverage radius of the single-PB budget, and
    /// the grid steps are 0.05 m in `r`, 0.1 m in `d`.
    pub fn new(
        config: RfConfig,
        placement: Placement,
        qos: QosSpec,
        fading: FadingSpec,
    ) -> Result<GcdQuery> {
        let alpha = linkmodel::link_budget_factor(&config);
        let reach = quartic::coverage_reach(alpha, qos.gamma_eq_th, config.path_loss_exp);
        let r_upper = 3.0 * quartic::asymptotic_limits(reach)?.coverage_radius;
        let query = GcdQuery {
            config,
            placement,
            qos,
            fading,
            r_upper,
            grid_step_r: 0.05,
            grid_step_d: 0.1,
            trace: false,
        };
        query.validate()?;
        Ok(query)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.placement.validate()?;
        if !matches!(self.placement, Placement::Ring { .. }) {
            return Err(Error::NotApplicable(
                "the ring planner needs a symmetric ring placement".into(),
            ));
        }
        self.fading.validate()?;
        if !(self.qos.gamma_th > 0.0 && self.qos.gamma_eq_th > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "QoS thresholds must be positive, got {} / {}",
                self.qos.gamma_th, self.qos.gamma_eq_th
            )));
        }
        if !(self.qos.epsilon > 0.0 && self.qos.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "outage target must be in (0, 1), got {}",
                self.qos.epsilon
            )));
        }
        if !(self.r_upper > 0.0 && self.r_upper.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "search ceiling must be finite and positive, got {}",
                self.r_upper
            )));
        }
        for (axis, step) in [("r", self.grid_step_r), ("d", self.grid_step_d)] {
            if !(step > 0.0 && step <= self.r_upper / 100.0) {
                return Err(Error::InvalidConfig(format!(
                    "{axis} grid step {step} outside (0, r_upper/100]"
                )));
            }
        }
        Ok(())
    }

    fn ring_params(&self) -> (u32, u32) {
        match self.placement {
            Placement::Ring { m_total, serving, .. } => (m_total, serving),
            _ => unreachable!("validated as a ring"),
        }
    }
}

// ------------------------------------------------------------- thresholds

// Memoized threshold inversions keyed by the quantized effective forward
// shape. Shared across a whole optimization sweep; reads vastly outnumber
// writes once warm.
struct ThresholdTable<'a> {
    query: &'a GcdQuery,
    cache: RwLock<HashMap<i64, f64>>,
}

impl<'a> ThresholdTable<'a> {
    fn new(query: &'a GcdQuery) -> ThresholdTable<'a> {
        ThresholdTable { query, cache: RwLock::new(HashMap::new()) }
    }

    // Keep the inversion on an analytic path: integer pairs snap onto the
    // exact finite sum, and everything else is nudged clear of the series
    // route's singular band (shape differences within 1e-3 of an integer).
    fn regularized_shape(&self, k_sum: f64) -> f64 {
        let kb = self.query.fading.kappa_back;
        if (kb - kb.round()).abs() < 1e-9 {
            let nearest = k_sum.round();
            if (k_sum - nearest).abs() < SHAPE_SNAP_BAND {
                return nearest.max(1.0);
            }
        }
        let diff = k_sum - kb;
        let nearest = diff.round();
        if (diff - nearest).abs() < SHAPE_SNAP_BAND {
            let side = if diff >= nearest { 1.0 } else { -1.0 };
            kb + nearest + side * SHAPE_SNAP_BAND
        } else {
            k_sum
        }
    }

    fn threshold_for_shape(&self, k_sum: f64) -> f64 {
        let key = (self.regularized_shape(k_sum) / SHAPE_QUANTUM).round() as i64;
        if let Some(v) = self.cache.read().expect("threshold cache poisoned").get(&key) {
            return *v;
        }
        let shape = key as f64 * SHAPE_QUANTUM;
        let thr = fading::equivalent_threshold(
            self.query.qos.gamma_th,
            self.query.qos.epsilon,
            shape,
            self.query.fading.kappa_back,
            ThresholdMethod::Closed,
        )
        .expect("regularized shape stays on an analytic path");
        self.cache.write().expect("threshold cache poisoned").insert(key, thr);
        thr
    }
}

// -------------------------------------------------------------- edge scan

fn scan_core(query: &GcdQuery, d: f64, table: &ThresholdTable, want_trace: bool) -> GcdResult {
    let (m_total, serving) = query.ring_params();
    let cfg = &query.config;
    let edge_angle = PI / m_total as f64;

    let gamma_at = |r: f64| linkmodel::ring_edge_snr(cfg, m_total, serving, d, r);
    let threshold_at = |r: f64| -> f64 {
        if serving <= 2 {
            // At the sector edge the serving pair is exactly equidistant,
            // so the forward shape is an exact multiple.
            table.threshold_for_shape(serving as f64 * query.fading.kappa_forward)
        } else {
            let placement = Placement::Ring { m_total, d, serving };
            let k_sum = fading::effective_forward_shape(
                PolarPoint { r, theta_o: edge_angle },
                &placement,
                cfg,
                &query.fading,
            )
            .expect("ring placement validated");
            table.threshold_for_shape(k_sum)
        }
    };
    let pass = |r: f64| gamma_at(r) >= threshold_at(r);

    let blank = |method: SolveMethod| GcdResult {
        pb_distance: d,
        coverage_radius: 0.0,
        gap_detected: false,
        truncated: false,
        zero_coverage: false,
        method,
        snr_trace: None,
    };

    // A BD at the reader fails only when the energy floor already swallows
    // the harvest at forward distance d; nothing is covered then.
    if !pass(0.0) {
        return GcdResult { zero_coverage: true, ..blank(SolveMethod::NumericScan) };
    }

    let step = query.grid_step_r;
    let n = (query.r_upper / step).ceil() as usize;
    let mut trace = want_trace.then(Vec::new);
    let mut prev = 0.0;
    let mut bracket = None;
    for k in 1..=n {
        let r = (k as f64 * step).min(query.r_upper);
        if let Some(t) = trace.as_mut() {
            t.push((r, gamma_at(r)));
        }
        if !pass(r) {
            bracket = Some((prev, r));
            break;
        }
        prev = r;
    }

    let (coverage_radius, truncated) = match bracket {
        None => (query.r_upper, true),
        Some((mut lo, mut hi)) => {
            while hi - lo > R_REFINE_TOL {
                let mid = 0.5 * (lo + hi);
                if pass(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (0.5 * (lo + hi), false)
        }
    };

    // Past the guaranteed radius, coverage can resume as a detached ring;
    // only geometries with a non-monotone edge SNR can do that.
    let mut gap_detected = false;
    if !truncated && !quartic::edge_snr_is_monotone(m_total, d) {
        let start = (coverage_radius / step).ceil() as usize + 1;
        for k in start..=n {
            if pass((k as f64 * step).min(query.r_upper)) {
                gap_detected = true;
                break;
            }
        }
    }

    GcdResult {
        pb_distance: d,
        coverage_radius,
        gap_detected,
        truncated,
        zero_coverage: false,
        method: SolveMethod::NumericScan,
        snr_trace: trace,
    }
}

/// Guaranteed coverage radius of the ring at radius `d`: the first radius
/// along the sector edge where the equivalent SNR drops below the fading
/// threshold, bisected to millimeter resolution. `truncated` is set when
/// coverage extends past the query ceiling; `zero_coverage` when even the
/// reader's own location fails.
pub fn gcd_at(query: &GcdQuery, d: f64) -> Result<GcdResult> {
    query.validate()?;
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ring radius must be finite and nonnegative, got {d}"
        )));
    }
    let table = ThresholdTable::new(query);
    Ok(scan_core(query, d, &table, query.trace))
}

/// [`gcd_at`] under an explicit energy floor. The clipping already lives in
/// the link model, so the scan is identical; this entry point exists for
/// callers whose intent is the floor study, and with a zero floor it
/// coincides with [`gcd_at`] exactly.
pub fn gcd_under_energy_floor(query: &GcdQuery, d: f64) -> Result<GcdResult> {
    gcd_at(query, d)
}

// ------------------------------------------------------------ optimization

// Generous budget bound for the ring-radius search ceiling: `serving`
// equidistant PBs can at most multiply the single-PB budget by `serving`.
fn search_reach_bound(query: &GcdQuery, table: &ThresholdTable) -> f64 {
    let (_, serving) = query.ring_params();
    let alpha = linkmodel::link_budget_factor(&query.config);
    let thr = table.threshold_for_shape(serving as f64 * query.fading.kappa_forward);
    quartic::coverage_reach(serving as f64 * alpha, thr, query.config.path_loss_exp)
}

/// Ring radius maximizing the guaranteed coverage radius.
///
/// Scans a `d` grid up to 1.2 times the infinite-ring optimum for a
/// generous budget bound, keeps the best cell (ties go to the smaller
/// radius), and golden-sections inside it. When the closed forms apply
/// (one or two serving PBs, no energy floor) and agree with the scan to
/// within two grid steps, the closed answer is returned instead, flagged
/// [`SolveMethod::ClosedForm`].
pub fn optimize_d(query: &GcdQuery) -> Result<GcdResult> {
    query.validate()?;
    let (m_total, serving) = query.ring_params();
    let table = ThresholdTable::new(query);

    let d_upper = 1.2 * quartic::asymptotic_limits(search_reach_bound(query, &table))?.pb_distance;
    let n = (d_upper / query.grid_step_d).ceil() as usize;
    let grid: Vec<GcdResult> = (0..=n)
        .into_par_iter()
        .map(|k| scan_core(query, k as f64 * query.grid_step_d, &table, false))
        .collect();

    let mut best = grid[0].clone();
    for cand in &grid[1..] {
        if cand.coverage_radius > best.coverage_radius + PLATEAU_TOL {
            best = cand.clone();
        }
    }
    if best.truncated {
        return Ok(best);
    }

    // Golden-section refinement inside the winning cell. Ties keep the
    // left (smaller d) interval, matching the plateau rule.
    let step = query.grid_step_d;
    let mut lo = (best.pb_distance - step).max(0.0);
    let mut hi = (best.pb_distance + step).min(d_upper);
    let ratio = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = scan_core(query, x1, &table, false);
    let mut f2 = scan_core(query, x2, &table, false);
    for _ in 0..40 {
        for cand in [&f1, &f2] {
            if cand.coverage_radius > best.coverage_radius + PLATEAU_TOL
                || (cand.coverage_radius > best.coverage_radius - PLATEAU_TOL
                    && cand.pb_distance < best.pb_distance)
            {
                best = cand.clone();
            }
        }
        if f1.coverage_radius >= f2.coverage_radius {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = scan_core(query, x1, &table, false);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = scan_core(query, x2, &table, false);
        }
    }

    // Closed-form cross-validation for the serving counts with a constant
    // threshold and an untouched (unclipped) budget.
    if serving <= 2 && query.config.circuit_power_w == 0.0 {
        let alpha = linkmodel::link_budget_factor(&query.config);
        let thr = table.threshold_for_shape(serving as f64 * query.fading.kappa_forward);
        let reach =
            quartic::coverage_reach(serving as f64 * alpha, thr, query.config.path_loss_exp);
        let d_closed = quartic::optimal_pb_distance(m_total, reach);
        if (best.pb_distance - d_closed).abs() <= 2.0 * query.grid_step_d {
            let roots = CoverageQuartic::for_sector(m_total, d_closed, reach)?.solve();
            if roots.coverage_radius <= query.r_upper {
                return Ok(GcdResult {
                    pb_distance: d_closed,
                    coverage_radius: roots.coverage_radius,
                    gap_detected: roots.has_gap(),
                    truncated: false,
                    zero_coverage: false,
                    method: SolveMethod::ClosedForm,
                    snr_trace: None,
                });
            }
        }
    }
    Ok(best)
}

/// Closed approximation of the full-ring optimum: rescale the single-PB
/// budget by the serving gain ratio at the current optimum, re-solve the
/// closed optimum, and iterate. Converges in a handful of rounds because
/// the gain ratio varies slowly around the optimum. Full-ring serving with
/// no energy floor only.
pub fn chi_scaled_optimum(query: &GcdQuery) -> Result<GcdResult> {
    query.validate()?;
    let (m_total, serving) = query.ring_params();
    if serving != m_total {
        return Err(Error::NotApplicable(format!(
            "gain-ratio rescaling covers full-ring serving only, got {serving} of {m_total}"
        )));
    }
    if query.config.circuit_power_w != 0.0 {
        return Err(Error::NotApplicable(
            "gain-ratio rescaling assumes an unclipped budget".into(),
        ));
    }
    let table = ThresholdTable::new(query);
    let alpha = linkmodel::link_budget_factor(&query.config);
    let edge_angle = PI / m_total as f64;

    // Seed from the single-PB optimum, then let the gain ratio and the
    // shape-dependent threshold settle jointly.
    let thr_single = table.threshold_for_shape(query.fading.kappa_forward);
    let reach = quartic::coverage_reach(alpha, thr_single, query.config.path_loss_exp);
    let mut d = quartic::optimal_pb_distance(m_total, reach);
    let mut r = CoverageQuartic::for_sector(m_total, d, reach)?.solve().coverage_radius;
    for _ in 0..4 {
        let placement = Placement::Ring { m_total, d, serving };
        let k_sum = fading::effective_forward_shape(
            PolarPoint { r, theta_o: edge_angle },
            &placement,
            &query.config,
            &query.fading,
        )?;
        let thr = table.threshold_for_shape(k_sum);
        let chi = linkmodel::serving_gain_ratio(&query.config, m_total, d, r);
        let reach = quartic::coverage_reach(chi * alpha, thr, query.config.path_loss_exp);
        d = quartic::optimal_pb_distance(m_total, reach);
        r = CoverageQuartic::for_sector(m_total, d, reach)?.solve().coverage_radius;
    }
    Ok(GcdResult {
        pb_distance: d,
        coverage_radius: r,
        gap_detected: false,
        truncated: false,
        zero_coverage: false,
        method: SolveMethod::ChiApprox,
        snr_trace: None,
    })
}

// ----------------------------------------------------------- verification

/// Angular SNR profile outcome at fixed `(d, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WorstAngle {
    /// Sector-relative angle minimizing the equivalent SNR.
    Angle(f64),
    /// The profile is flat (collapsed ring): every angle ties.
    FlatProfile,
}

/// Scan the equivalent SNR across one sector at fixed radii and return the
/// worst angle. Certifies the sector-edge reduction the planner relies on.
pub fn worst_case_angle(query: &GcdQuery, d: f64, r: f64, n_angles: u32) -> Result<WorstAngle> {
    query.validate()?;
    if n_angles < 32 {
        return Err(Error::InvalidConfig(format!(
            "angle grid too coarse to certify a minimum: {n_angles} < 32"
        )));
    }
    let (m_total, serving) = query.ring_params();
    let placement = Placement::Ring { m_total, d, serving };
    let half = PI / m_total as f64;
    let mut worst = (f64::INFINITY, 0.0);
    let mut flattest = f64::NEG_INFINITY;
    for i in 0..=n_angles {
        let theta = -half + 2.0 * half * i as f64 / n_angles as f64;
        let snr = linkmodel::equivalent_snr_saturating(
            PolarPoint { r, theta_o: theta },
            &placement,
            &query.config,
        );
        if snr < worst.0 {
            worst = (snr, theta);
        }
        flattest = flattest.max(snr);
    }
    if flattest - worst.0 <= 1e-9 * flattest.abs() {
        Ok(WorstAngle::FlatProfile)
    } else {
        Ok(WorstAngle::Angle(worst.1))
    }
}

// --------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testcfg::baseline_rf;

    const REACH_ONE: f64 = 3861174.8579640052;

    fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
        assert!(
            (got - want).abs() <= tol,
            "{what}: got {got:.6}, want {want:.6}, err {:.2e}",
            (got - want).abs()
        );
    }

    fn baseline_query(m_total: u32, serving: u32) -> GcdQuery {
        let fading = FadingSpec { kappa_forward: 4.0, kappa_back: 4.0 };
        let qos =
            QosSpec::new(10f64.powf(0.5), 0.05, &fading, ThresholdMethod::Closed).unwrap();
        GcdQuery::new(
            baseline_rf(),
            Placement::Ring { m_total, d: 0.0, serving },
            qos,
            fading,
        )
        .unwrap()
    }

    #[test]
    fn collapsed_ring_matches_biquadratic_radius() {
        let q = baseline_query(6, 1);
        let res = gcd_at(&q, 0.0).unwrap();
        assert_close(res.coverage_radius, REACH_ONE.powf(0.25), 1e-3, "collapsed radius");
        assert!(!res.gap_detected && !res.truncated && !res.zero_coverage);
    }

    #[test]
    fn baseline_ring_radii_match_references() {
        let one = gcd_at(&baseline_query(6, 1), 50.0).unwrap();
        assert_close(one.coverage_radius, 62.4267188148, 1.5e-3, "single serving");
        let two = gcd_at(&baseline_query(6, 2), 50.0).unwrap();
        assert_close(two.coverage_radius, 73.8900329188, 1.5e-3, "paired serving");
        // One extra serving PB buys roughly a fifth more radius here.
        let gain = two.coverage_radius / one.coverage_radius;
        assert!((1.15..1.25).contains(&gain), "pairing gain {gain:.3}");
    }

    #[test]
    fn optimum_matches_closed_form_for_single_and_paired() {
        let one = optimize_d(&baseline_query(6, 1)).unwrap();
        assert_eq!(one.method, SolveMethod::ClosedForm);
        assert_close(one.pb_distance, 54.2907069558, 1e-6, "single optimum");
        assert_close(one.coverage_radius, 62.6895085508, 1e-6, "single peak radius");
        assert!(!one.gap_detected);

        let two = optimize_d(&baseline_query(6, 2)).unwrap();
        assert_eq!(two.method, SolveMethod::ClosedForm);
        assert_close(two.pb_distance, 66.1708170917, 1e-6, "paired optimum");
        assert_close(two.coverage_radius, 76.4074781208, 1e-6, "paired peak radius");
    }

    #[test]
    fn two_pb_ring_optimum_is_the_reader() {
        let res = optimize_d(&baseline_query(2, 1)).unwrap();
        assert_eq!(res.pb_distance, 0.0, "two PBs collapse onto the reader");
        assert_close(res.coverage_radius, REACH_ONE.powf(0.25), 1e-3, "collapsed radius");
    }

    #[test]
    fn numeric_search_tracks_closed_form_in_the_gap_regime() {
        // 13 PBs: the gap onset binds. The closed route reports the exact
        // onset; the scan must land within two grid steps of it.
        let q = baseline_query(13, 1);
        let res = optimize_d(&q).unwrap();
        let want = quartic::optimal_pb_distance(13, REACH_ONE);
        assert_close(res.pb_distance, want, 2.0 * q.grid_step_d, "onset-limited optimum");
        // Local maximality on both sides.
        let here = gcd_at(&q, res.pb_distance).unwrap().coverage_radius;
        for factor in [0.999, 1.001] {
            let near = gcd_at(&q, res.pb_distance * factor).unwrap().coverage_radius;
            assert!(near <= here + 1e-6, "not a local max: {near} > {here}");
        }
    }

    #[test]
    fn gap_is_flagged_past_the_onset_radius() {
        let q = baseline_query(20, 1);
        let onset = quartic::gap_onset_distance(20, REACH_ONE).unwrap();
        let gapped = gcd_at(&q, onset * 1.03).unwrap();
        assert!(gapped.gap_detected, "detached ring expected past the onset");
        let clean = gcd_at(&q, onset * 0.9).unwrap();
        assert!(!clean.gap_detected, "no gap below the onset");
        assert!(gapped.coverage_radius < clean.coverage_radius);
    }

    #[test]
    fn full_ring_numeric_and_rescaled_paths_agree() {
        let q = baseline_query(6, 6);
        let numeric = optimize_d(&q).unwrap();
        assert_eq!(numeric.method, SolveMethod::NumericScan);
        let approx = chi_scaled_optimum(&q).unwrap();
        assert_eq!(approx.method, SolveMethod::ChiApprox);
        let rel = (numeric.pb_distance - approx.pb_distance).abs() / numeric.pb_distance;
        assert!(rel < 0.05, "rescaled optimum off by {:.1}%", 100.0 * rel);
        let rel_r =
            (numeric.coverage_radius - approx.coverage_radius).abs() / numeric.coverage_radius;
        assert!(rel_r < 0.05, "rescaled radius off by {:.1}%", 100.0 * rel_r);
        // Serving everything cannot do worse than serving the pair.
        let paired = optimize_d(&baseline_query(6, 2)).unwrap();
        assert!(numeric.coverage_radius >= paired.coverage_radius - 1e-3);
    }

    #[test]
    fn energy_floor_caps_coverage() {
        let mut cfg = baseline_rf();
        cfg.tx_power_w = linkmodel::dbm_to_watts(35.0);
        cfg.circuit_power_w = linkmodel::dbm_to_watts(-30.0);
        let fading = FadingSpec { kappa_forward: 4.0, kappa_back: 4.0 };
        let qos =
            QosSpec::new(10f64.powf(0.5), 0.05, &fading, ThresholdMethod::Closed).unwrap();
        let q = GcdQuery::new(
            cfg.clone(),
            Placement::Ring { m_total: 6, d: 0.0, serving: 1 },
            qos,
            fading,
        )
        .unwrap();

        // The floor turns off harvest beyond a fixed forward distance, so
        // the edge coverage cannot outrun that circle.
        let d = 20.0;
        let floor_reach =
            (cfg.tx_power_w * cfg.reference_path_gain() * cfg.bd_gain * cfg.pol_mismatch_forward
                / cfg.circuit_power_w)
                .powf(1.0 / cfg.path_loss_exp);
        let t = (PI / 6.0).cos();
        let cap = d * t + (d * d * (t * t - 1.0) + floor_reach * floor_reach).sqrt();
        let res = gcd_under_energy_floor(&q, d).unwrap();
        assert!(res.coverage_radius < cap, "radius {} beyond cap {cap}", res.coverage_radius);
        assert!(res.coverage_radius > 0.8 * cap, "floor not binding as expected");

        // Absurd floor: nothing is covered anywhere.
        let mut dead_cfg = cfg;
        dead_cfg.circuit_power_w = 1.0;
        let dead_q = GcdQuery { config: dead_cfg, ..q.clone() };
        let dead = gcd_under_energy_floor(&dead_q, 20.0).unwrap();
        assert!(dead.zero_coverage && dead.coverage_radius == 0.0);

        // Zero floor coincides with the plain scan.
        let mut free_cfg = q.config.clone();
        free_cfg.circuit_power_w = 0.0;
        let free_q = GcdQuery { config: free_cfg, ..q };
        let a = gcd_at(&free_q, 20.0).unwrap();
        let b = gcd_under_energy_floor(&free_q, 20.0).unwrap();
        assert_eq!(a.coverage_radius, b.coverage_radius);
    }

    #[test]
    fn worst_angle_sits_on_the_sector_edge() {
        let q1 = baseline_query(6, 1);
        match worst_case_angle(&q1, 50.0, 40.0, 64).unwrap() {
            WorstAngle::Angle(theta) => {
                assert_close(theta.abs(), PI / 6.0, 1e-9, "single-serving worst angle")
            }
            WorstAngle::FlatProfile => panic!("profile is not flat at d=50"),
        }
        let qm = baseline_query(6, 6);
        match worst_case_angle(&qm, 50.0, 40.0, 64).unwrap() {
            WorstAngle::Angle(theta) => {
                assert_close(theta.abs(), PI / 6.0, 1e-9, "full-ring worst angle")
            }
            WorstAngle::FlatProfile => panic!("profile is not flat at d=50"),
        }
        assert_eq!(
            worst_case_angle(&q1, 0.0, 40.0, 64).unwrap(),
            WorstAngle::FlatProfile,
            "collapsed ring is rotationally symmetric"
        );
    }

    #[test]
    fn coverage_grows_with_power_serving_and_ring_size() {
        let base = gcd_at(&baseline_query(6, 1), 50.0).unwrap().coverage_radius;

        let mut hot_cfg = baseline_rf();
        hot_cfg.tx_power_w = linkmodel::dbm_to_watts(30.0);
        let fading = FadingSpec { kappa_forward: 4.0, kappa_back: 4.0 };
        let qos =
            QosSpec::new(10f64.powf(0.5), 0.05, &fading, ThresholdMethod::Closed).unwrap();
        let hot = GcdQuery::new(
            hot_cfg,
            Placement::Ring { m_total: 6, d: 0.0, serving: 1 },
            qos,
            fading,
        )
        .unwrap();
        assert!(gcd_at(&hot, 50.0).unwrap().coverage_radius > base, "more power");

        assert!(
            gcd_at(&baseline_query(6, 2), 50.0).unwrap().coverage_radius > base,
            "more serving PBs"
        );
        let opt6 = optimize_d(&baseline_query(6, 1)).unwrap().coverage_radius;
        let opt7 = optimize_d(&baseline_query(7, 1)).unwrap().coverage_radius;
        assert!(opt7 > opt6, "more PBs at the optimum");
    }

    #[test]
    fn coverage_curve_has_no_jumps_below_the_gap_regime() {
        // Small rings keep a monotone edge SNR, so the coverage radius must
        // vary smoothly with the ring radius.
        let q = baseline_query(6, 1);
        let mut prev = gcd_at(&q, 40.0).unwrap().coverage_radius;
        let mut d = 40.1;
        while d <= 60.0 {
            let cur = gcd_at(&q, d).unwrap().coverage_radius;
            assert!(
                (cur - prev).abs() <= 5.0 * q.grid_step_r,
                "jump at d={d}: {prev} -> {cur}"
            );
            prev = cur;
            d += 0.1;
        }
    }

    #[test]
    fn trace_records_the_scanned_prefix() {
        let mut q = baseline_query(6, 1);
        q.trace = true;
        let res = gcd_at(&q, 50.0).unwrap();
        let trace = res.snr_trace.expect("trace requested");
        assert!(!trace.is_empty());
        // The trace covers exactly the scanned prefix: its last grid point
        // is the first failing radius, one step past the crossing at most.
        let (last_r, _) = *trace.last().unwrap();
        assert!(last_r >= res.coverage_radius && last_r <= res.coverage_radius + q.grid_step_r);
        // SNR decays along the edge for a small ring, once past the
        // clamped sub-decimeter radii where only the forward hop moves.
        for pair in trace.windows(2) {
            if pair[0].0 >= 2.0 * linkmodel::MIN_LINK_DISTANCE {
                assert!(pair[1].1 < pair[0].1, "edge SNR must decay at r={}", pair[0].0);
            }
        }
    }
}
