//! Coverage geometry along the worst-case direction.
//!
//! A BD on the sector edge at radius `r` sees its nearest PB at distance
//! `l`, with `l^2 = d^2 + r^2 - 2 d r cos(pi/M)`. Folding the link budget
//! and the fading margin into one number `reach` (the largest squared range
//! product `(r l)^2` the budget supports), the edge coverage condition
//! becomes a quartic inequality in `r`:
//!
//! ```text
//! f(r) = r^4 - 2 d T r^3 + d^2 r^2 - reach <= 0,    T = cos(pi/M).
//! ```
//!
//! Everything here is geometry on `f`: its positive roots (generically one
//! or three; three means the covered region splits into an inner disk and a
//! detached ring), the ring radius that maximizes the innermost root, the
//! crossover PB count where the binding constraint changes, and the
//! infinite-ring limits of both optima.
//!
//! The derivative `f'(r) = 2r (2r^2 - 3 d T r + d^2)` factors in closed
//! form, so the solver brackets every root between explicit critical points
//! instead of running a generic quartic method: each bracket is bisected to
//! machine precision and cannot miss or invent roots.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Positive roots closer than this (relative) collapse into one root.
const REPEATED_ROOT_TOL: f64 = 1e-6;

fn sector_cosine(m_total: u32) -> f64 {
    assert!(m_total >= 1, "ring needs at least one PB");
    match m_total {
        // Exact values; cos(pi/2) in doubles carries a 6e-17 residue that
        // would otherwise leak into the degenerate-ring branches.
        1 => -1.0,
        2 => 0.0,
        m => (std::f64::consts::PI / m as f64).cos(),
    }
}

// ----------------------------------------------------------- quartic core

/// Edge coverage condition in standard form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageQuartic {
    /// PB ring radius (m).
    pub pb_distance: f64,
    /// Cosine of the half-sector angle `pi / M`.
    pub edge_cosine: f64,
    /// Largest supportable squared range product `(r l)^2` (m^4). Equals
    /// the fourth power of the coverage radius of a collapsed ring (d = 0).
    pub reach: f64,
}

/// Sign structure of the quartic on `r > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootStructure {
    /// Distinct positive roots, ascending. Tangencies count once.
    pub positive_roots: Vec<f64>,
    /// Largest radius such that every BD within it is covered: the root
    /// below the first strictly uncovered interval.
    pub coverage_radius: f64,
    /// First uncovered open interval `(end of disk, start of ring)`, when
    /// the covered set is disconnected.
    pub gap: Option<(f64, f64)>,
}

impl RootStructure {
    pub fn has_gap(&self) -> bool {
        self.gap.is_some()
    }
}

impl CoverageQuartic {
    /// Coverage condition for a symmetric ring of `m_total` PBs at radius
    /// `pb_distance` with link budget `reach`.
    pub fn for_sector(m_total: u32, pb_distance: f64, reach: f64) -> Result<CoverageQuartic> {
        if m_total < 1 {
            return Err(Error::InvalidConfig("ring needs at least one PB".into()));
        }
        if !(pb_distance >= 0.0 && pb_distance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "PB distance must be finite and nonnegative, got {pb_distance}"
            )));
        }
        if !(reach > 0.0 && reach.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "reach must be finite and positive, got {reach}"
            )));
        }
        Ok(CoverageQuartic { pb_distance, edge_cosine: sector_cosine(m_total), reach })
    }

    /// `f(r)`; negative means covered at radius `r`.
    pub fn eval(&self, r: f64) -> f64 {
        let d = self.pb_distance;
        r * r * ((r - 2.0 * d * self.edge_cosine) * r + d * d) - self.reach
    }

    // Positive critical points of f beyond r = 0, ascending: the roots of
    // 2r^2 - 3dTr + d^2. Their product d^2/2 is positive, so they are
    // either both positive (T > 0, discriminant >= 0) or irrelevant.
    fn positive_critical_pair(&self) -> Option<(f64, f64)> {
        let d = self.pb_distance;
        let t = self.edge_cosine;
        if d <= 0.0 || t <= 0.0 {
            return None;
        }
        let disc = d * d * (9.0 * t * t - 8.0);
        if disc <= 0.0 {
            return None;
        }
        let s = disc.sqrt();
        Some(((3.0 * d * t - s) / 4.0, (3.0 * d * t + s) / 4.0))
    }

    // Bisection to machine precision; the bracket must have opposing signs
    // (zero counts as either).
    fn bisect_root(&self, mut lo: f64, mut hi: f64) -> f64 {
        let neg_at_lo = self.eval(lo) <= 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.eval(mid) <= 0.0) == neg_at_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All positive roots and the coverage classification.
    ///
    /// `f(0) < 0` and `f` grows without bound, so there is always at least
    /// one positive root; with a positive local max and a negative local
    /// min the covered region is an inner disk plus a detached ring.
    pub fn solve(&self) -> RootStructure {
        let mut hi = self.pb_distance + self.reach.powf(0.25) + 1.0;
        while self.eval(hi) <= 0.0 {
            hi *= 2.0;
        }

        let mut roots: Vec<f64> = Vec::with_capacity(3);
        match self.positive_critical_pair() {
            None => roots.push(self.bisect_root(0.0, hi)),
            Some((rc_max, rc_min)) => {
                let f_max = self.eval(rc_max);
                let f_min = self.eval(rc_min);
                if f_max > 0.0 {
                    roots.push(self.bisect_root(0.0, rc_max));
                    if f_min < 0.0 {
                        roots.push(self.bisect_root(rc_max, rc_min));
                        roots.push(self.bisect_root(rc_min, hi));
                    } else if f_min == 0.0 {
                        roots.push(rc_min);
                    }
                    // f_min > 0: f stays positive past the local max.
                } else {
                    if f_max == 0.0 {
                        roots.push(rc_max);
                    }
                    roots.push(self.bisect_root(rc_min, hi));
                }
            }
        }

        // Merge near-tangent pairs; the analysis treats them as one root.
        let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
        for r in roots {
            match merged.last_mut() {
                Some(prev) if r - *prev <= REPEATED_ROOT_TOL * r => *prev = 0.5 * (*prev + r),
                _ => merged.push(r),
            }
        }

        let mut coverage_radius = *merged.last().expect("at least one positive root");
        let mut gap = None;
        for pair in merged.windows(2) {
            if self.eval(0.5 * (pair[0] + pair[1])) > 0.0 {
                coverage_radius = pair[0];
                gap = Some((pair[0], pair[1]));
                break;
            }
        }
        RootStructure { positive_roots: merged, coverage_radius, gap }
    }
}

/// Link budget expressed as the quartic's constant term: the largest
/// squared range product `(r l)^2` at which the deterministic equivalent
/// SNR still meets its threshold.
pub fn coverage_reach(alpha_eff: f64, gamma_eq_th: f64, path_loss_exp: f64) -> f64 {
    assert!(alpha_eff > 0.0 && gamma_eq_th > 0.0 && path_loss_exp > 0.0);
    (alpha_eff / gamma_eq_th).powf(2.0 / path_loss_exp)
}

// ------------------------------------------------------------ ring optima

/// A ring radius together with the edge coverage radius it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingOptimum {
    /// PB ring radius (m).
    pub pb_distance: f64,
    /// Coverage radius achieved at that ring radius (m).
    pub coverage_radius: f64,
}

/// Whether the edge SNR decays monotonically with radius for every BD, so
/// the covered set is always a single disk. Holds exactly when the cubic
/// `f'` has no positive roots beyond zero: discriminant `9 T^2 - 8 < 0`
/// (every ring of at most 9 PBs), a collapsed ring, or a half-plane ring
/// whose critical points fall on the negative axis.
pub fn edge_snr_is_monotone(m_total: u32, pb_distance: f64) -> bool {
    let t = sector_cosine(m_total);
    pb_distance == 0.0 || t <= 0.0 || 9.0 * t * t < 8.0
}

/// Ring radius maximizing the smooth peak of the coverage radius, valid
/// while the peak is the binding constraint (it always is for rings of at
/// most 9 PBs). Completing the square in the quartic gives both the
/// maximizer and the peak value in closed form.
pub fn peak_limited_optimum(m_total: u32, reach: f64) -> RingOptimum {
    assert!(reach > 0.0, "reach must be positive");
    let t = sector_cosine(m_total);
    if t <= 0.0 {
        // One or two PBs: the optimum collapses onto the reader.
        return RingOptimum { pb_distance: 0.0, coverage_radius: reach.powf(0.25) };
    }
    let r_max = (reach / (1.0 - t * t)).powf(0.25);
    RingOptimum { pb_distance: t * r_max, coverage_radius: r_max }
}

/// Ring radius at which the quartic first acquires a repeated positive
/// root: the onset of a coverage gap, and the binding constraint for large
/// rings. Undefined below 10 PBs, where no gap can form.
pub fn gap_onset_distance(m_total: u32, reach: f64) -> Result<f64> {
    assert!(reach > 0.0, "reach must be positive");
    if m_total < 10 {
        return Err(Error::NotApplicable(format!(
            "a coverage gap needs a ring of at least 10 PBs, got {m_total}"
        )));
    }
    let t2 = sector_cosine(m_total).powi(2);
    let slack = 9.0 * t2 - 8.0;
    // Side conditions of the double-root characterization. All hold for
    // every ring size this branch accepts; violations are programmer error.
    assert!(slack > 0.0, "repeated root impossible: 9 T^2 <= 8");
    assert!(
        1.0 + 3.0 * t2 * t2 - 4.0 * t2 < 0.0,
        "repeated-root pairing condition violated"
    );
    let csc_sq = 1.0 / (1.0 - t2);
    let bracket = (reach * reach * t2 * slack.powi(3)).sqrt()
        + reach * (27.0 * t2 * t2 - 36.0 * t2 + 8.0);
    let d4 = -0.5 * csc_sq * bracket;
    assert!(d4 > 0.0, "onset distance must be real and positive");
    // Equality would make the repeated root triple, which needs the
    // critical points themselves to merge; integer ring sizes never land
    // on that boundary.
    assert!((d4 - 12.0 * reach).abs() > 1e-6 * reach, "triple-root boundary hit");
    Ok(d4.powf(0.25))
}

/// Ring size above which the gap onset, not the smooth peak, limits the
/// optimal ring radius: the crossover of the two closed forms. The cosine
/// at the crossover is the reciprocal of the positive real root of
/// `4 x^6 + 2 x^2 - 7`.
pub fn regime_crossover_m() -> f64 {
    let poly = |x: f64| 4.0 * x.powi(6) + 2.0 * x * x - 7.0;
    let (mut lo, mut hi) = (1.0_f64, 1.5_f64);
    debug_assert!(poly(lo) < 0.0 && poly(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if poly(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let omega = 0.5 * (lo + hi);
    std::f64::consts::PI / (1.0 / omega).acos()
}

/// Optimal ring radius for a given ring size: the binding one of the two
/// closed forms. Small rings (at most 9 PBs) cannot form a gap, so the
/// smooth peak always wins there; past the crossover size the gap onset
/// takes over. Taking the minimum of the two is equivalent to the
/// crossover comparison and stays exact at every integer ring size.
pub fn optimal_pb_distance(m_total: u32, reach: f64) -> f64 {
    let peak = peak_limited_optimum(m_total, reach).pb_distance;
    match gap_onset_distance(m_total, reach) {
        Ok(onset) => peak.min(onset),
        Err(_) => peak,
    }
}

/// Infinite-ring limits: the optimal ring radius converges to
/// `2 reach^{1/4}`, and the coverage radius to the value below. The
/// coverage expression contains cube roots of negative reals whose
/// imaginary parts cancel only under principal branches, so it is evaluated
/// in complex arithmetic and checked for a real result. These limits upper
/// bound every finite ring.
pub fn asymptotic_limits(reach: f64) -> Result<RingOptimum> {
    if !(reach > 0.0 && reach.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "reach must be finite and positive, got {reach}"
        )));
    }
    let s = Complex64::new(reach, 0.0);
    let sqrt_s = s.sqrt();
    // Principal cube root of -reach^{3/2}: magnitude reach^{1/2}, phase pi/3.
    let w = (-(s.powf(1.5))).powf(1.0 / 3.0);
    let disk = ((sqrt_s + w).powu(2) / w).sqrt();
    let ring = ((4.0 * s + s.powu(2) / w.powu(2) + w.powu(2)) / sqrt_s).sqrt();
    let r = s.powf(0.25) + (disk + ring) / 6.0_f64.sqrt();
    let residual = r.im.abs() / r.re.abs();
    if !(residual < 1e-9) {
        return Err(Error::NumericalInstability(residual));
    }
    Ok(RingOptimum { pb_distance: 2.0 * reach.powf(0.25), coverage_radius: r.re })
}

// --------------------------------------------------------------------------
