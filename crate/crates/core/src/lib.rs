//! Coverage analysis and power-beacon placement planning for bistatic
//! backscatter networks.
//!
//! The scenario: a reader sits at the origin, `M` power beacons (PBs) stand
//! on a circle of radius `d` around it with equal angular spacing, and
//! battery-free backscatter devices (BDs) anywhere in the plane modulate the
//! PB carriers back to the reader. A BD at back-link distance `r` whose
//! nearest serving PB is at forward distance `l` sees a double-fading link
//! whose average SNR scales as `alpha / (r^delta * l^delta)`.
//!
//! The crate answers two questions about that geometry:
//!
//! * **Guaranteed coverage distance (GCD)** — the largest radius within which
//!   *every* point meets an outage target `P(SNR < gamma_th) <= epsilon`.
//! * **Optimal beacon radius `d*`** — the PB circle radius that maximizes the
//!   GCD, via closed forms where they hold and a grid-plus-refinement search
//!   everywhere.
//!
//! Modules:
//!
//! * [`linkmodel`] — RF configuration, geometry, and deterministic
//!   equivalent-SNR evaluation (single PB, multi-PB, energy-floor clipping).
//! * [`fading`] — Nakagami-m power fading as unit-mean gamma variates:
//!   product-distribution CDFs, outage probability, threshold conversion.
//! * [`quartic`] — the coverage boundary as a quartic in `r`: root structure,
//!   closed-form optima, the regime-crossover beacon count, and asymptotics.
//! * [`planner`] — numeric GCD search and beacon-radius optimization.
//! * [`simkit`] — Monte Carlo validation: outage sampling, empirical GCD,
//!   coverage-area maps, placement-scheme comparisons.

pub mod error;
pub mod fading;
pub mod linkmodel;
pub mod planner;
pub mod quartic;
pub mod rng;
pub mod simkit;
pub mod special;

#[cfg(test)]
pub(crate) mod testcfg;

pub use error::{Error, Result};
