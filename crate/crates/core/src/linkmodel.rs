//! RF link budget and network geometry.
//!
//! The reader sits at the origin. Power beacons (PBs) illuminate backscatter
//! devices (BDs); a BD reflects the carrier back to the reader with one of
//! two reflection coefficients per symbol. The deterministic part of the
//! end-to-end SNR for a BD at back-link distance `r` served by PBs at
//! forward distances `l_m` is
//!
//! ```text
//! gamma_eq = (sum_m P beta0 G_T chi_f / l_m^delta  -  xi)+  *  B(r)
//! B(r)     = eta beta0 G_T chi_b |b0 - b1|^2 L mod / (r^delta N0)
//! ```
//!
//! with `beta0 = (lambda / 4 pi)^2`, baseband levels `b_i = A - G_i`, `mod`
//! the modulation factor (1 for OOK, 4/pi^2 for FSK), and `xi` an optional
//! BD energy floor subtracted from the harvested forward power before
//! clipping at zero. With `xi = 0` the whole product collapses to
//! `sum_m alpha / (r^delta l_m^delta)` where [`link_budget_factor`] returns
//! `alpha`.
//!
//! Positions use either sector-relative polar coordinates (symmetric rings,
//! where everything is periodic with the sector angle `2 pi / M`) or raw
//! Cartesian coordinates (arbitrary placements).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::substream;
use rand::Rng;

/// Free-space propagation speed, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Shortest link distance the far-field path-loss model accepts, meters.
pub const MIN_LINK_DISTANCE: f64 = 0.1;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

// ------------------------------------------------------------ configuration

/// Backscatter symbol alphabet at the BD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Ook,
    Fsk,
}

/// Static RF parameters of one deployment.
///
/// Linear units throughout: watts, hertz, meters, dimensionless gains.
/// Decibel conversions belong to the caller (see [`dbm_to_watts`] and
/// [`db_to_linear`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RfConfig {
    /// PB transmit power, W.
    pub tx_power_w: f64,
    /// Carrier frequency, Hz.
    pub carrier_hz: f64,
    /// Path-loss exponent `delta`.
    pub path_loss_exp: f64,
    /// BD switching efficiency `eta` in (0, 1].
    pub switching_loss: f64,
    /// Reader samples per BD symbol, `L`.
    pub samples_per_symbol: u32,
    /// Noise power at the reader, W.
    pub noise_w: f64,
    /// BD structural mode `A`.
    pub structural_mode: Complex64,
    /// BD reflection coefficients `G_0`, `G_1` (|G_i| <= 1).
    pub reflection: [Complex64; 2],
    /// BD antenna gain `G_T`, linear.
    pub bd_gain: f64,
    /// Polarization mismatch on the PB->BD link, (0, 1].
    pub pol_mismatch_forward: f64,
    /// Polarization mismatch on the BD->reader link, (0, 1].
    pub pol_mismatch_back: f64,
    pub modulation: Modulation,
    /// BD circuit energy floor `xi`, W. Zero disables the floor.
    pub circuit_power_w: f64,
}

impl RfConfig {
    /// Validate ranges and the modulation-depth invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tx_power_w > 0.0) {
            return bad(format!("tx power must be positive, got {}", self.tx_power_w));
        }
        if !(self.carrier_hz > 0.0) {
            return bad(format!("carrier must be positive, got {}", self.carrier_hz));
        }
        if !(self.path_loss_exp >= 2.0 && self.path_loss_exp <= 4.0) {
            return bad(format!(
                "path-loss exponent must lie in [2, 4], got {}",
                self.path_loss_exp
            ));
        }
        if !(self.switching_loss > 0.0 && self.switching_loss <= 1.0) {
            return bad(format!("switching loss must be in (0, 1], got {}", self.switching_loss));
        }
        if self.samples_per_symbol == 0 {
            return bad("samples per symbol must be at least 1".into());
        }
        if !(self.noise_w > 0.0) {
            return bad(format!("noise power must be positive, got {}", self.noise_w));
        }
        for (i, g) in self.reflection.iter().enumerate() {
            if g.norm() > 1.0 + 1e-12 {
                return bad(format!("|G_{i}| = {} exceeds 1", g.norm()));
            }
        }
        if !(self.bd_gain > 0.0) {
            return bad(format!("BD gain must be positive, got {}", self.bd_gain));
        }
        for (name, chi) in [
            ("forward", self.pol_mismatch_forward),
            ("back", self.pol_mismatch_back),
        ] {
            if !(chi > 0.0 && chi <= 1.0) {
                return bad(format!("{name} polarization mismatch must be in (0, 1], got {chi}"));
            }
        }
        if self.circuit_power_w < 0.0 {
            return bad(format!("circuit power must be >= 0, got {}", self.circuit_power_w));
        }
        if self.mod_depth_sq() <= 0.0 {
            return bad("reflection coefficients coincide: zero modulation depth".into());
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// One-meter free-space path gain `beta0 = (lambda / 4 pi)^2`.
    pub fn reference_path_gain(&self) -> f64 {
        let x = self.wavelength() / (4.0 * std::f64::consts::PI);
        x * x
    }

    /// Baseband symbol levels `b_i = A - G_i`.
    pub fn baseband_levels(&self) -> [Complex64; 2] {
        [
            self.structural_mode - self.reflection[0],
            self.structural_mode - self.reflection[1],
        ]
    }

    /// Squared modulation depth `|b_0 - b_1|^2`.
    pub fn mod_depth_sq(&self) -> f64 {
        let [b0, b1] = self.baseband_levels();
        (b0 - b1).norm_sqr()
    }

    fn modulation_factor(&self) -> f64 {
        match self.modulation {
            Modulation::Ook => 1.0,
            Modulation::Fsk => 4.0 / (std::f64::consts::PI * std::f64::consts::PI),
        }
    }

    /// Forward received power at distance `l` from one PB, before the
    /// energy floor: `P beta0 G_T chi_f / l^delta`.
    pub fn forward_power_w(&self, l: f64) -> f64 {
        self.tx_power_w * self.reference_path_gain() * self.bd_gain * self.pol_mismatch_forward
            / l.powf(self.path_loss_exp)
    }

    /// Back-link SNR factor `B(r)`: multiply by the net forward power to get
    /// the equivalent SNR.
    pub fn back_factor(&self, r: f64) -> f64 {
        self.switching_loss
            * self.reference_path_gain()
            * self.bd_gain
            * self.pol_mismatch_back
            * self.mod_depth_sq()
            * self.samples_per_symbol as f64
            * self.modulation_factor()
            / (r.powf(self.path_loss_exp) * self.noise_w)
    }
}

/// Distance-independent SNR scale `alpha`: with no energy floor,
/// `gamma_eq = sum_m alpha / (r^delta l_m^delta)`.
pub fn link_budget_factor(cfg: &RfConfig) -> f64 {
    let beta0 = cfg.reference_path_gain();
    cfg.tx_power_w
        * cfg.switching_loss
        * beta0
        * beta0
        * cfg.samples_per_symbol as f64
        * cfg.mod_depth_sq()
        * cfg.bd_gain
        * cfg.bd_gain
        * cfg.pol_mismatch_forward
        * cfg.pol_mismatch_back
        * cfg.modulation_factor()
        / cfg.noise_w
}

// ----------------------------------------------------------------- geometry

/// BD location in sector-relative polar form: back-link distance `r` and
/// angle `theta_o` measured from the bisector of the nearest PB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta_o: f64,
}

impl PolarPoint {
    /// Reduce `theta_o` into the principal sector `[-pi/M, pi/M]`.
    pub fn canonical(self, m_total: u32) -> PolarPoint {
        let sector = 2.0 * std::f64::consts::PI / m_total as f64;
        let k = (self.theta_o / sector).round();
        PolarPoint {
            r: self.r,
            theta_o: self.theta_o - k * sector,
        }
    }
}

/// PB deployment layout. `serving` is the number of nearest PBs a BD
/// combines energy from (`S`).
#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    /// `m_total` PBs equally spaced on a circle of radius `d`.
    Ring { m_total: u32, d: f64, serving: u32 },
    /// `m_total` PBs drawn uniformly from a disk of radius `max_radius`;
    /// `seed` pins the realization.
    RandomDisk {
        m_total: u32,
        max_radius: f64,
        seed: u64,
        serving: u32,
    },
    /// Two concentric rings, the outer rotated by `rotation` radians.
    TwoRing {
        m_inner: u32,
        d_inner: f64,
        m_outer: u32,
        d_outer: f64,
        rotation: f64,
        serving: u32,
    },
    /// Arbitrary fixed PB coordinates.
    Explicit { positions: Vec<[f64; 2]>, serving: u32 },
}

impl Placement {
    pub fn m_total(&self) -> u32 {
        match *self {
            Placement::Ring { m_total, .. } | Placement::RandomDisk { m_total, .. } => m_total,
            Placement::TwoRing { m_inner, m_outer, .. } => m_inner + m_outer,
            Placement::Explicit { ref positions, .. } => positions.len() as u32,
        }
    }

    pub fn serving(&self) -> u32 {
        match *self {
            Placement::Ring { serving, .. }
            | Placement::RandomDisk { serving, .. }
            | Placement::TwoRing { serving, .. }
            | Placement::Explicit { serving, .. } => serving,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m_total();
        let s = self.serving();
        if m == 0 {
            return Err(Error::InvalidConfig("placement needs at least one PB".into()));
        }
        if s == 0 || s > m {
            return Err(Error::InvalidConfig(format!(
                "serving count {s} outside 1..={m}"
            )));
        }
        match *self {
            Placement::Ring { d, .. } => {
                if d < 0.0 {
                    return Err(Error::InvalidConfig(format!("ring radius {d} negative")));
                }
            }
            Placement::RandomDisk { max_radius, .. } => {
                if !(max_radius > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "disk radius must be positive, got {max_radius}"
                    )));
                }
            }
            Placement::TwoRing {
                m_inner,
                d_inner,
                m_outer,
                d_outer,
                rotation,
                ..
            } => {
                if m_inner == 0 || m_outer == 0 {
                    return Err(Error::InvalidConfig("both rings need PBs".into()));
                }
                if d_inner < 0.0 || d_outer < 0.0 {
                    return Err(Error::InvalidConfig("ring radii must be >= 0".into()));
                }
                if !(0.0..=2.0 * std::f64::consts::PI).contains(&rotation) {
                    return Err(Error::InvalidConfig(format!(
                        "rotation {rotation} outside [0, 2 pi]"
                    )));
                }
            }
            Placement::Explicit { ref positions, .. } => {
                if let Some(bad) = positions.iter().find(|p| !(p[0].is_finite() && p[1].is_finite()))
                {
                    return Err(Error::InvalidConfig(format!(
                        "non-finite PB coordinate [{}, {}]",
                        bad[0], bad[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Cartesian PB coordinates, reader at the origin. Ring PB 0 lies on the
    /// +x axis. Random layouts are fully determined by their seed.
    pub fn pb_positions(&self) -> Vec<[f64; 2]> {
        match *self {
            Placement::Ring { m_total, d, .. } => (0..m_total)
                .map(|k| {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 / m_total as f64;
                    [d * ang.cos(), d * ang.sin()]
                })
                .collect(),
            Placement::RandomDisk {
                m_total,
                max_radius,
                seed,
                ..
            } => {
                let mut rng = substream(seed, 0);
                (0..m_total)
                    .map(|_| {
                        let r = max_radius * rng.random::<f64>().sqrt();
                        let ang = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                        [r * ang.cos(), r * ang.sin()]
                    })
                    .collect()
            }
            Placement::TwoRing {
                m_inner,
                d_inner,
                m_outer,
                d_outer,
                rotation,
                ..
            } => {
                let mut pts = Vec::with_capacity((m_inner + m_outer) as usize);
                for k in 0..m_inner {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 / m_inner as f64;
                    pts.push([d_inner * ang.cos(), d_inner * ang.sin()]);
                }
                for k in 0..m_outer {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 / m_outer as f64 + rotation;
                    pts.push([d_outer * ang.cos(), d_outer * ang.sin()]);
                }
                pts
            }
            Placement::Explicit { ref positions, .. } => positions.clone(),
        }
    }
}

/// Distance from a BD at `p` to the ring PB `pb_offset` sectors away from
/// its nearest PB (law of cosines). Zero is allowed; callers that cannot
/// handle collocated nodes check [`MIN_LINK_DISTANCE`] themselves.
pub fn pb_bd_distance(p: PolarPoint, d: f64, pb_offset: i64, m_total: u32) -> f64 {
    let p = p.canonical(m_total);
    let ang = p.theta_o - 2.0 * std::f64::consts::PI * pb_offset as f64 / m_total as f64;
    (d * d + p.r * p.r - 2.0 * d * p.r * ang.cos()).max(0.0).sqrt()
}

/// Ring PB indices sorted by angular distance from `theta_o`, nearest first.
/// Ties resolve toward the lower absolute index so results are stable.
pub fn serving_offsets(theta_o: f64, m_total: u32, serving: u32) -> Vec<i64> {
    let m = m_total as i64;
    let sector = 2.0 * std::f64::consts::PI / m_total as f64;
    let mut idx: Vec<i64> = (0..m).map(|k| if k <= m / 2 { k } else { k - m }).collect();
    idx.sort_by(|&a, &b| {
        let da = (theta_o - sector * a as f64).abs();
        let db = (theta_o - sector * b as f64).abs();
        da.partial_cmp(&db)
            .unwrap()
            .then(a.abs().cmp(&b.abs()))
            .then(b.cmp(&a))
    });
    idx.truncate(serving as usize);
    idx
}

// ------------------------------------------------------------- SNR queries

// Shared core. `clamp` substitutes MIN_LINK_DISTANCE for shorter links
// instead of failing, which keeps dense sweeps total.
fn snr_from_squared_dists(
    cfg: &RfConfig,
    r: f64,
    forward_sq: impl Iterator<Item = f64>,
    clamp: bool,
) -> Result<f64> {
    let dmin_sq = MIN_LINK_DISTANCE * MIN_LINK_DISTANCE;
    let half_exp = 0.5 * cfg.path_loss_exp;
    let fwd_unit =
        cfg.tx_power_w * cfg.reference_path_gain() * cfg.bd_gain * cfg.pol_mismatch_forward;
    let mut harvested = 0.0;
    for lsq in forward_sq {
        let lsq = if lsq < dmin_sq {
            if !clamp {
                return Err(Error::DegenerateGeometry(format!(
                    "PB-BD distance {:.4} m below the {MIN_LINK_DISTANCE} m model floor",
                    lsq.sqrt()
                )));
            }
            dmin_sq
        } else {
            lsq
        };
        harvested += fwd_unit / lsq.powf(half_exp);
    }
    let r_eff = if r < MIN_LINK_DISTANCE {
        if !clamp {
            return Err(Error::DegenerateGeometry(format!(
                "BD-reader distance {r:.4} m below the {MIN_LINK_DISTANCE} m model floor"
            )));
        }
        MIN_LINK_DISTANCE
    } else {
        r
    };
    let net = (harvested - cfg.circuit_power_w).max(0.0);
    Ok(net * cfg.back_factor(r_eff))
}

fn ring_snr(
    cfg: &RfConfig,
    m_total: u32,
    serving: u32,
    d: f64,
    p: PolarPoint,
    clamp: bool,
) -> Result<f64> {
    let p = p.canonical(m_total);
    let sector = 2.0 * std::f64::consts::PI / m_total as f64;
    let offsets = serving_offsets(p.theta_o, m_total, serving);
    let dists_sq = offsets.into_iter().map(move |k| {
        let ang = p.theta_o - sector * k as f64;
        (d * d + p.r * p.r - 2.0 * d * p.r * ang.cos()).max(0.0)
    });
    snr_from_squared_dists(cfg, p.r, dists_sq, clamp)
}

fn xy_snr(
    cfg: &RfConfig,
    xy: [f64; 2],
    pbs: &[[f64; 2]],
    serving: u32,
    clamp: bool,
) -> Result<f64> {
    let mut dists_sq: Vec<f64> = pbs
        .iter()
        .map(|pb| {
            let dx = xy[0] - pb[0];
            let dy = xy[1] - pb[1];
            dx * dx + dy * dy
        })
        .collect();
    dists_sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists_sq.truncate(serving as usize);
    let r = (xy[0] * xy[0] + xy[1] * xy[1]).sqrt();
    snr_from_squared_dists(cfg, r, dists_sq.into_iter(), clamp)
}

/// Deterministic equivalent SNR at `p` under `placement`.
///
/// For [`Placement::Ring`], `p.theta_o` is sector-relative and reduced
/// automatically. For the other layouts `p` is absolute polar (angle from
/// the +x axis). Errors with [`Error::DegenerateGeometry`] when any involved
/// link is shorter than [`MIN_LINK_DISTANCE`]; use
/// [`equivalent_snr_saturating`] for sweeps that must stay total.
pub fn equivalent_snr(p: PolarPoint, placement: &Placement, cfg: &RfConfig) -> Result<f64> {
    snr_impl(p, placement, cfg, false)
}

/// Like [`equivalent_snr`], but clamps sub-floor link distances to the model
/// floor instead of failing. Monotone in the clamped inputs, so planners can
/// scan arbitrarily dense grids without special cases near nodes.
pub fn equivalent_snr_saturating(p: PolarPoint, placement: &Placement, cfg: &RfConfig) -> f64 {
    snr_impl(p, placement, cfg, true).expect("saturating SNR is total")
}

fn snr_impl(p: PolarPoint, placement: &Placement, cfg: &RfConfig, clamp: bool) -> Result<f64> {
    placement.validate()?;
    if !(p.r > 0.0) && !clamp {
        return Err(Error::DegenerateGeometry(format!(
            "BD-reader distance must be positive, got {}",
            p.r
        )));
    }
    match *placement {
        Placement::Ring { m_total, d, serving } => ring_snr(cfg, m_total, serving, d, p, clamp),
        _ => {
            let xy = [p.r * p.theta_o.cos(), p.r * p.theta_o.sin()];
            xy_snr(cfg, xy, &placement.pb_positions(), placement.serving(), clamp)
        }
    }
}

/// Equivalent SNR at a Cartesian point for an explicit PB list (the `serving`
/// nearest PBs combine). Used by coverage-map scans over arbitrary layouts.
pub fn equivalent_snr_at_xy(
    xy: [f64; 2],
    pbs: &[[f64; 2]],
    serving: u32,
    cfg: &RfConfig,
) -> Result<f64> {
    if pbs.is_empty() || serving == 0 || serving as usize > pbs.len() {
        return Err(Error::InvalidConfig(format!(
            "serving count {serving} outside 1..={}",
            pbs.len()
        )));
    }
    xy_snr(cfg, xy, pbs, serving, true)
}

/// Forward path weights `1 / l_m^delta` of the serving PBs at `p`: the
/// relative contribution of each serving PB to the harvested power, nearest
/// first. Fading statistics only consume weight ratios, so sub-floor link
/// distances clamp to the model floor here.
pub fn serving_path_weights(
    p: PolarPoint,
    placement: &Placement,
    cfg: &RfConfig,
) -> Result<Vec<f64>> {
    placement.validate()?;
    let dists_sq: Vec<f64> = match *placement {
        Placement::Ring { m_total, d, serving } => {
            let p = p.canonical(m_total);
            let sector = 2.0 * std::f64::consts::PI / m_total as f64;
            serving_offsets(p.theta_o, m_total, serving)
                .into_iter()
                .map(|k| {
                    let ang = p.theta_o - sector * k as f64;
                    (d * d + p.r * p.r - 2.0 * d * p.r * ang.cos()).max(0.0)
                })
                .collect()
        }
        _ => {
            let xy = [p.r * p.theta_o.cos(), p.r * p.theta_o.sin()];
            let mut ds: Vec<f64> = placement
                .pb_positions()
                .iter()
                .map(|pb| {
                    let dx = xy[0] - pb[0];
                    let dy = xy[1] - pb[1];
                    dx * dx + dy * dy
                })
                .collect();
            ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ds.truncate(placement.serving() as usize);
            ds
        }
    };
    let dmin_sq = MIN_LINK_DISTANCE * MIN_LINK_DISTANCE;
    let half_exp = 0.5 * cfg.path_loss_exp;
    Ok(dists_sq.into_iter().map(|lsq| lsq.max(dmin_sq).powf(-half_exp)).collect())
}

/// Edge-of-sector SNR for a ring, the coverage-limiting direction. The
/// `serving` nearest PBs pair up at angular offsets `pi/M, pi/M, 3 pi/M,
/// 3 pi/M, ...` from an edge BD, so the sum walks odd multiples directly.
pub fn ring_edge_snr(cfg: &RfConfig, m_total: u32, serving: u32, d: f64, r: f64) -> f64 {
    debug_assert!(serving >= 1 && serving <= m_total);
    let half_exp = 0.5 * cfg.path_loss_exp;
    let fwd_unit =
        cfg.tx_power_w * cfg.reference_path_gain() * cfg.bd_gain * cfg.pol_mismatch_forward;
    let dmin_sq = MIN_LINK_DISTANCE * MIN_LINK_DISTANCE;
    let mut harvested = 0.0;
    for j in 0..serving as u64 {
        let ang = (2 * (j / 2) + 1) as f64 * std::f64::consts::PI / m_total as f64;
        let lsq = (d * d + r * r - 2.0 * d * r * ang.cos()).max(dmin_sq);
        harvested += fwd_unit / lsq.powf(half_exp);
    }
    let net = (harvested - cfg.circuit_power_w).max(0.0);
    net * cfg.back_factor(r.max(MIN_LINK_DISTANCE))
}

/// Ratio of all-PB to single-PB equivalent SNR for an edge BD (no energy
/// floor). Scales `alpha` when a full-ring deployment is reduced to an
/// effective single-PB problem.
pub fn serving_gain_ratio(cfg: &RfConfig, m_total: u32, d: f64, r: f64) -> f64 {
    let mut unfloored = cfg.clone();
    unfloored.circuit_power_w = 0.0;
    ring_edge_snr(&unfloored, m_total, m_total, d, r) / ring_edge_snr(&unfloored, m_total, 1, d, r)
}

// --------------------------------------------------------------------------
