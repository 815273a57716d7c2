//! Double-fading statistics and outage probability.
//!
//! Both hops fade independently with Nakagami-m envelopes, so the *power*
//! gains are unit-mean gamma variates: `X ~ Gamma(k, 1/k)` on the forward
//! hop and `Y ~ Gamma(k', 1/k')` on the back hop. The instantaneous SNR is
//! `gamma_eq * X * Y`, which turns every outage question into the CDF of a
//! product of gamma variates:
//!
//! ```text
//! P(SNR < g_th) = F_XY(g_th / gamma_eq)
//! ```
//!
//! Three CDF routes live here, deliberately kept independent of each other:
//!
//! * [`product_cdf_closed`] — finite Bessel-K sum, exact for integer shapes;
//! * [`product_cdf_general`] — regularized 1F2 series for real shapes whose
//!   difference stays away from integers;
//! * [`EmpiricalCdf`] — sorted Monte Carlo samples, the fallback and the
//!   referee when the analytic routes disagree.
//!
//! When several PBs serve one BD, the weighted sum of forward gamma gains is
//! moment-matched back to a single gamma ([`gamma_sum_approx`]), after which
//! the product machinery applies unchanged.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linkmodel::{self, Placement, PolarPoint, RfConfig};
use crate::rng::substream;
use crate::special::{
    bessel_k_scaled, gamma as gamma_fn, hyper_1f2_regularized, integrate_gl64, ln_gamma,
    reg_lower_gamma,
};

/// Shape difference below which the general series is treated as singular.
pub const SHAPE_DIFF_GUARD: f64 = 1e-3;

/// Shapes this close to an integer take the exact integer path.
const INTEGER_SNAP: f64 = 1e-9;

// Seed for the internal deterministic fallback sampler; any fixed value
// works, it only must never change between runs.
const FALLBACK_SEED: u64 = 0x00D1_57A7_1C5E_ED00;
const FALLBACK_SAMPLES: usize = 1_000_000;

// ----------------------------------------------------------------- types

/// Gamma distribution in shape/scale form; mean is `shape * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub shape: f64,
    pub scale: f64,
}

impl GammaParams {
    /// Unit-mean parameterization of a Nakagami-m power gain.
    pub fn unit_mean(kappa: f64) -> GammaParams {
        GammaParams { shape: kappa, scale: 1.0 / kappa }
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }
}

/// Fading shapes of the two hops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    /// Nakagami shape on each PB->BD link.
    pub kappa_forward: f64,
    /// Nakagami shape on the BD->reader link.
    pub kappa_back: f64,
}

impl FadingSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, k) in [("forward", self.kappa_forward), ("back", self.kappa_back)] {
            if !(k >= 0.5 && k.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} fading shape must be >= 0.5, got {k}"
                )));
            }
        }
        Ok(())
    }
}

/// Outage target and its SNR-domain conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosSpec {
    /// Instantaneous SNR threshold, linear.
    pub gamma_th: f64,
    /// Largest tolerable outage probability.
    pub epsilon: f64,
    /// Deterministic-SNR threshold: coverage holds iff
    /// `gamma_eq >= gamma_eq_th`, single serving PB.
    pub gamma_eq_th: f64,
}

impl QosSpec {
    /// Build the QoS spec, converting the outage target into an equivalent
    /// deterministic-SNR threshold for the single-PB fading law.
    pub fn new(
        gamma_th: f64,
        epsilon: f64,
        fading: &FadingSpec,
        method: ThresholdMethod,
    ) -> Result<QosSpec> {
        let gamma_eq_th =
            equivalent_threshold(gamma_th, epsilon, fading.kappa_forward, fading.kappa_back, method)?;
        Ok(QosSpec { gamma_th, epsilon, gamma_eq_th })
    }
}

// ------------------------------------------------------------- sampling

/// One gamma draw.
pub fn sample_gamma(params: GammaParams, rng: &mut impl Rng) -> f64 {
    Gamma::new(params.shape, params.scale)
        .expect("gamma parameters validated upstream")
        .sample(rng)
}

/// Deterministic product-of-gammas samples (unit-mean shapes `kx`, `ky`).
/// Work splits into fixed blocks, one RNG substream each, so the output is
/// identical for any thread count.
pub fn product_gamma_samples(kx: f64, ky: f64, n: usize, seed: u64) -> Vec<f64> {
    const BLOCK: usize = 1 << 16;
    let gx = Gamma::new(kx, 1.0 / kx).expect("kx > 0");
    let gy = Gamma::new(ky, 1.0 / ky).expect("ky > 0");
    (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = substream(seed, b as u64);
            let take = BLOCK.min(n - b * BLOCK);
            let mut out = Vec::with_capacity(take);
            for _ in 0..take {
                out.push(gx.sample(&mut rng) * gy.sample(&mut rng));
            }
            out
        })
        .collect()
}

/// Moment-matched single-gamma approximation of `sum_i Gamma(shape_i,
/// scale_i)`: the result preserves the exact mean and variance of the sum
/// (and is exact, not approximate, when all scales coincide).
pub fn gamma_sum_approx(parts: &[GammaParams]) -> Result<GammaParams> {
    if parts.is_empty() {
        return Err(Error::InvalidConfig("gamma sum needs at least one part".into()));
    }
    let mut mean = 0.0;
    let mut var = 0.0;
    for p in parts {
        if !(p.shape > 0.0 && p.scale > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma parts need positive shape and scale, got {p:?}"
            )));
        }
        mean += p.shape * p.scale;
        var += p.shape * p.scale * p.scale;
    }
    Ok(GammaParams { shape: mean * mean / var, scale: var / mean })
}

// ------------------------------------------------------------ CDF routes

/// Product CDF `P(XY <= u)` for unit-mean gammas with integer shapes:
/// a finite sum of modified Bessel-K terms.
pub fn product_cdf_closed(u: f64, kx: u32, ky: u32) -> f64 {
    assert!(kx >= 1 && ky >= 1, "closed product CDF needs integer shapes >= 1");
    if u <= 0.0 {
        return 0.0;
    }
    let prod = (kx as f64) * (ky as f64) * u;
    let arg = 2.0 * prod.sqrt();
    let ln_prod = prod.ln();
    let ln_gamma_ky = ln_gamma(ky as f64);
    let mut sum = 0.0;
    for n in 0..kx {
        let order = (ky as i64 - n as i64).unsigned_abs() as u32;
        // 2 prod^((ky+n)/2) K_{|ky-n|}(arg) / (n! (ky-1)!), assembled in log
        // space against the scaled Bessel so extreme arguments stay finite.
        let ln_coef = 0.5 * (ky + n) as f64 * ln_prod
            - ln_gamma(n as f64 + 1.0)
            - ln_gamma_ky
            + std::f64::consts::LN_2
            - arg;
        sum += (ln_coef.exp()) * bessel_k_scaled(order, arg);
    }
    (1.0 - sum).clamp(0.0, 1.0)
}

/// Product CDF for real shapes via the regularized 1F2 series.
///
/// Rejects shape pairs whose difference sits within [`SHAPE_DIFF_GUARD`] of
/// an integer (the cosecant prefactor is singular there); callers fall back
/// to the empirical route. Large series arguments hand over to quadrature
/// internally: the two bracket terms cancel catastrophically in doubles.
pub fn product_cdf_general(u: f64, kx: f64, ky: f64) -> Result<f64> {
    assert!(kx > 0.0 && ky > 0.0, "shapes must be positive");
    if u <= 0.0 {
        return Ok(0.0);
    }
    let diff = kx - ky;
    if (diff - diff.round()).abs() < SHAPE_DIFF_GUARD {
        return Err(Error::SingularParameterization(diff, SHAPE_DIFF_GUARD));
    }
    let w = kx * ky * u;
    if w > 40.0 {
        return Ok(product_cdf_quadrature(u, kx, ky));
    }
    let t_ky = gamma_fn(ky) * w.powf(ky) * hyper_1f2_regularized(ky, ky + 1.0, ky - kx + 1.0, w);
    let t_kx = gamma_fn(kx) * w.powf(kx) * hyper_1f2_regularized(kx, kx + 1.0, kx - ky + 1.0, w);
    let bracket = t_ky - t_kx;
    // Residual precision check; if the subtraction ate the mantissa, use the
    // slower integral instead of returning noise.
    if bracket.abs() < 1e-7 * t_ky.abs().max(t_kx.abs()) {
        return Ok(product_cdf_quadrature(u, kx, ky));
    }
    let pref = std::f64::consts::PI
        / ((std::f64::consts::PI * diff).sin() * gamma_fn(kx) * gamma_fn(ky));
    Ok((pref * bracket).clamp(0.0, 1.0))
}

/// Product CDF by direct integration: `E_Y[P(kx, kx u / Y)]` with fixed
/// Gauss-Legendre panels. Deterministic, shape-agnostic, ~1e-9 absolute;
/// serves as the independent referee for the analytic routes.
pub fn product_cdf_quadrature(u: f64, kx: f64, ky: f64) -> f64 {
    assert!(kx > 0.0 && ky > 0.0, "shapes must be positive");
    if u <= 0.0 {
        return 0.0;
    }
    let ln_norm = ky * ky.ln() - ln_gamma(ky);
    let density = |y: f64| (ln_norm + (ky - 1.0) * y.ln() - ky * y).exp();
    let integrand = |y: f64| reg_lower_gamma(kx, kx * u / y) * density(y);
    // First panel substitutes y = t^2 to flatten the y^(ky-1) endpoint.
    let first = integrate_gl64(0.0, 1.0, |t| 2.0 * t * integrand(t * t));
    let y_hi = (50.0 + 10.0 * ky.sqrt()) / ky;
    let mut total = first;
    let mut edges = vec![1.0, 2.0, 5.0, 12.0, y_hi];
    edges.retain(|&e| e < y_hi);
    edges.push(y_hi);
    for pair in edges.windows(2) {
        if pair[1] > pair[0] {
            total += integrate_gl64(pair[0], pair[1], integrand);
        }
    }
    total.clamp(0.0, 1.0)
}

/// Product CDF with automatic route selection: exact Bessel sum for integer
/// shapes, 1F2 series otherwise, deterministic empirical sampling when the
/// series is singular.
pub fn product_cdf(u: f64, kx: f64, ky: f64) -> f64 {
    let (rx, ry) = (kx.round(), ky.round());
    if (kx - rx).abs() < INTEGER_SNAP && (ky - ry).abs() < INTEGER_SNAP && rx >= 1.0 && ry >= 1.0 {
        return product_cdf_closed(u, rx as u32, ry as u32);
    }
    match product_cdf_general(u, kx, ky) {
        Ok(p) => p,
        Err(Error::SingularParameterization(..)) => {
            EmpiricalCdf::product_of_gammas(kx, ky, FALLBACK_SAMPLES, FALLBACK_SEED).cdf(u)
        }
        Err(e) => unreachable!("general product CDF only signals singularity: {e}"),
    }
}

// ------------------------------------------------------------- empirical

/// Sorted-sample empirical distribution with interpolated quantiles.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> EmpiricalCdf {
        assert!(!samples.is_empty(), "empirical CDF needs samples");
        samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        EmpiricalCdf { sorted: samples }
    }

    /// Empirical law of `X * Y` for unit-mean gamma factors.
    pub fn product_of_gammas(kx: f64, ky: f64, n: usize, seed: u64) -> EmpiricalCdf {
        EmpiricalCdf::from_samples(product_gamma_samples(kx, ky, n, seed))
    }

    /// Step CDF: fraction of samples `< x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|s| *s < x);
        below as f64 / self.sorted.len() as f64
    }

    /// Quantile with linear interpolation between order statistics.
    pub fn quantile(&self, q: f64) -> f64 {
        assert!((0.0..=1.0).contains(&q), "quantile level outside [0, 1]");
        let pos = q * (self.sorted.len() - 1) as f64;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        if i + 1 == self.sorted.len() {
            self.sorted[i]
        } else {
            self.sorted[i] * (1.0 - frac) + self.sorted[i + 1] * frac
        }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

// ------------------------------------------------------------- threshold

/// How to invert the fading law when converting an outage target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMethod {
    /// Analytic CDF (Bessel sum or 1F2 series) inverted by bisection.
    Closed,
    /// Quantile of `samples` sorted Monte Carlo products.
    Empirical { samples: usize, seed: u64 },
}

/// Convert an outage target into a deterministic-SNR threshold:
/// `gamma_eq_th = gamma_th / F_XY^{-1}(epsilon)`. Coverage at a point then
/// reduces to `gamma_eq >= gamma_eq_th`.
pub fn equivalent_threshold(
    gamma_th: f64,
    epsilon: f64,
    kappa_x: f64,
    kappa_y: f64,
    method: ThresholdMethod,
) -> Result<f64> {
    if !(gamma_th > 0.0) {
        return Err(Error::InvalidConfig(format!("gamma_th must be positive, got {gamma_th}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be in (0, 1), got {epsilon}")));
    }
    let u_eps = match method {
        ThresholdMethod::Closed => invert_product_cdf(epsilon, kappa_x, kappa_y)?,
        ThresholdMethod::Empirical { samples, seed } => {
            if samples < 1000 {
                return Err(Error::InvalidConfig(format!(
                    "empirical threshold needs >= 1000 samples, got {samples}"
                )));
            }
            EmpiricalCdf::product_of_gammas(kappa_x, kappa_y, samples, seed).quantile(epsilon)
        }
    };
    Ok(gamma_th / u_eps)
}

// Bisection on the (monotone) product CDF. The singular-parameterization
// error of the series route propagates to the caller.
fn invert_product_cdf(epsilon: f64, kx: f64, ky: f64) -> Result<f64> {
    let (rx, ry) = (kx.round(), ky.round());
    let integer = (kx - rx).abs() < INTEGER_SNAP && (ky - ry).abs() < INTEGER_SNAP;
    let eval = |u: f64| -> Result<f64> {
        if integer {
            Ok(product_cdf_closed(u, rx as u32, ry as u32))
        } else {
            product_cdf_general(u, kx, ky)
        }
    };
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    for _ in 0..80 {
        if eval(hi)? >= epsilon {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? < epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------- outage

/// Effective forward fading shape at `p`: the weighted sum of per-PB gamma
/// gains moment-matched to one gamma. Scale-free in the weights, so only
/// the serving geometry matters. Equals `kappa_forward` exactly for S = 1
/// and `2 kappa_forward` for two equidistant serving PBs.
pub fn effective_forward_shape(
    p: PolarPoint,
    placement: &Placement,
    cfg: &RfConfig,
    fading: &FadingSpec,
) -> Result<f64> {
    let weights = linkmodel::serving_path_weights(p, placement, cfg)?;
    if weights.len() == 1 {
        return Ok(fading.kappa_forward);
    }
    let parts: Vec<GammaParams> = weights
        .iter()
        .map(|w| GammaParams { shape: fading.kappa_forward, scale: w / fading.kappa_forward })
        .collect();
    Ok(gamma_sum_approx(&parts)?.shape)
}

/// Outage probability at `p`: the probability that the double-faded SNR
/// falls below `gamma_th`. Exact for a single serving PB with integer
/// shapes; multi-PB serving moment-matches the forward sum first.
pub fn outage_probability(
    p: PolarPoint,
    placement: &Placement,
    cfg: &RfConfig,
    fading: &FadingSpec,
    gamma_th: f64,
) -> Result<f64> {
    fading.validate()?;
    if !(gamma_th > 0.0) {
        return Err(Error::InvalidConfig(format!("gamma_th must be positive, got {gamma_th}")));
    }
    let gamma_eq = linkmodel::equivalent_snr(p, placement, cfg)?;
    if gamma_eq <= 0.0 {
        // Energy floor swallowed the harvest: the link is down regardless
        // of fading.
        return Ok(1.0);
    }
    let k_sum = effective_forward_shape(p, placement, cfg, fading)?;
    Ok(product_cdf(gamma_th / gamma_eq, k_sum, fading.kappa_back))
}

// --------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testcfg::baseline_rf;

    fn assert_abs(got: f64, want: f64, tol: f64, what: &str) {
        assert!(
            (got - want).abs() <= tol,
            "{what}: got {got:.12}, want {want:.12}, abs err {:.2e} > {tol:.1e}",
            (got - want).abs()
        );
    }

    fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
        let rel = ((got - want) / want).abs();
        assert!(
            rel <= tol,
            "{what}: got {got:.12e}, want {want:.12e}, rel {rel:.2e}"
        );
    }

    #[test]
    fn closed_cdf_matches_reference_values() {
        // Reference values computed with mpmath at 50 digits.
        let table_44 = [
            (0.05, 0.00112000957028876),
            (0.1, 0.00812735160468842),
            (0.218, 0.055696313609735),
            (0.3, 0.108872700473437),
            (0.5, 0.267572898155048),
            (1.0, 0.61572601031335),
            (2.0, 0.906838818236149),
        ];
        for (u, want) in table_44 {
            assert_rel(product_cdf_closed(u, 4, 4), want, 1e-10, &format!("F44({u})"));
        }
        let table_84 = [
            (0.1, 0.0025055041888994),
            (0.27, 0.0507288896674511),
            (0.5, 0.210505573087869),
            (1.0, 0.598583757611348),
        ];
        for (u, want) in table_84 {
            assert_rel(product_cdf_closed(u, 8, 4), want, 1e-10, &format!("F84({u})"));
        }
    }

    #[test]
    fn closed_cdf_rayleigh_squared_identity() {
        // Shape (1,1) collapses to 1 - 2 sqrt(u) K1(2 sqrt(u)).
        for u in [0.1f64, 0.5, 1.0, 3.0] {
            let direct =
                1.0 - 2.0 * u.sqrt() * crate::special::bessel_k(1, 2.0 * u.sqrt());
            assert_rel(product_cdf_closed(u, 1, 1), direct, 1e-12, &format!("F11({u})"));
        }
        assert_rel(product_cdf_closed(0.1, 1, 1), 0.233433138846432, 1e-10, "F11 golden");
    }

    #[test]
    fn closed_cdf_is_symmetric_and_monotone() {
        let mut prev = 0.0;
        for i in 0..250 {
            let u = 0.02 * i as f64;
            let f = product_cdf_closed(u, 3, 5);
            let flipped = product_cdf_closed(u, 5, 3);
            assert_abs(f, flipped, 1e-12, &format!("symmetry at u={u}"));
            assert!(f >= prev && f <= 1.0, "monotone CDF violated at u={u}");
            prev = f;
        }
        assert!(prev > 0.99, "CDF should be near 1 by u=5");
    }

    #[test]
    fn closed_cdf_agrees_with_quadrature() {
        for (kx, ky) in [(1u32, 1u32), (4, 4), (8, 4), (2, 7)] {
            for i in 1..=40 {
                let u = 0.08 * i as f64;
                let a = product_cdf_closed(u, kx, ky);
                let b = product_cdf_quadrature(u, kx as f64, ky as f64);
                assert_abs(a, b, 2e-9, &format!("closed vs quad ({kx},{ky}) u={u}"));
            }
        }
    }

    #[test]
    fn general_cdf_matches_reference_values() {
        // Reference values computed with mpmath quadrature at 50 digits for
        // shapes (3.6, 4.0).
        let table = [
            (0.05, 0.00156626691285352),
            (0.1, 0.0101673381775553),
            (0.2, 0.0522448845451674),
            (0.3, 0.118484617443696),
            (0.5, 0.278533131701036),
            (0.8, 0.501896043011441),
            (1.0, 0.618735622156641),
            (1.5, 0.808434353889917),
            (2.0, 0.903463778472186),
            (3.0, 0.974137580751983),
        ];
        for (u, want) in table {
            let got = product_cdf_general(u, 3.6, 4.0).unwrap();
            assert_abs(got, want, 1e-8, &format!("F(3.6,4)({u})"));
        }
    }

    #[test]
    fn general_cdf_tracks_empirical_cdf() {
        // Acceptance-style check: series vs one million sorted products.
        let emp = EmpiricalCdf::product_of_gammas(3.6, 4.0, 1_000_000, 424_242);
        for i in 1..=30 {
            let u = 0.1 * i as f64;
            let analytic = product_cdf_general(u, 3.6, 4.0).unwrap();
            assert_abs(
                analytic,
                emp.cdf(u),
                0.005,
                &format!("series vs empirical at u={u}"),
            );
        }
    }

    #[test]
    fn general_cdf_rejects_near_integer_shape_differences() {
        for (kx, ky) in [(4.0, 4.0), (4.0004, 4.0), (3.9995, 3.0), (5.2, 4.2005)] {
            match product_cdf_general(0.5, kx, ky) {
                Err(Error::SingularParameterization(..)) => {}
                other => panic!("({kx},{ky}) should be singular, got {other:?}"),
            }
        }
        // The dispatcher still answers there, via sampling or the exact sum.
        let p = product_cdf(0.5, 4.0004, 4.0);
        assert_abs(p, product_cdf_closed(0.5, 4, 4), 0.01, "dispatcher fallback");
    }

    #[test]
    fn quadrature_handles_half_integer_shapes() {
        // ky < 1 exercises the endpoint substitution.
        let got = product_cdf_quadrature(0.5, 2.0, 0.5);
        let emp = EmpiricalCdf::product_of_gammas(2.0, 0.5, 400_000, 7).cdf(0.5);
        assert_abs(got, emp, 0.004, "quadrature vs sampling at shape 0.5");
    }

    #[test]
    fn threshold_conversion_matches_reference_quantiles() {
        // gamma_th = 5 dB, epsilon = 0.05; quantiles from mpmath.
        let gamma_th = 10f64.powf(0.5);
        let got = equivalent_threshold(gamma_th, 0.05, 4.0, 4.0, ThresholdMethod::Closed).unwrap();
        assert_rel(got, 15.223287169864533, 1e-9, "threshold (4,4)");
        let got2 = equivalent_threshold(gamma_th, 0.05, 8.0, 4.0, ThresholdMethod::Closed).unwrap();
        assert_rel(got2, 11.776646340992289, 1e-9, "threshold (8,4)");
        // Round trip: F(gamma_th / threshold) = epsilon.
        assert_abs(
            product_cdf_closed(gamma_th / got, 4, 4),
            0.05,
            1e-10,
            "quantile round trip",
        );
        // Non-integer shapes ride the series route.
        let got3 =
            equivalent_threshold(gamma_th, 0.05, 3.6, 4.0, ThresholdMethod::Closed).unwrap();
        assert_rel(got3, gamma_th / 0.195981389942454, 1e-6, "threshold (3.6,4)");
    }

    #[test]
    fn empirical_threshold_converges_to_closed_form() {
        let gamma_th = 10f64.powf(0.5);
        let closed =
            equivalent_threshold(gamma_th, 0.05, 4.0, 4.0, ThresholdMethod::Closed).unwrap();
        let emp = equivalent_threshold(
            gamma_th,
            0.05,
            4.0,
            4.0,
            ThresholdMethod::Empirical { samples: 10_000_000, seed: 20_240_915 },
        )
        .unwrap();
        assert_rel(emp, closed, 0.01, "empirical vs closed threshold");
    }

    #[test]
    fn empirical_quantile_and_cdf_are_inverse() {
        let emp = EmpiricalCdf::product_of_gammas(4.0, 4.0, 200_000, 3);
        for q in [0.05, 0.25, 0.5, 0.9] {
            let x = emp.quantile(q);
            assert_abs(emp.cdf(x), q, 2e-3, &format!("cdf(quantile({q}))"));
        }
        assert!(emp.quantile(0.0) <= emp.quantile(1.0));
    }

    #[test]
    fn gamma_sampler_matches_analytic_cdf() {
        // KS distance between 1e6 draws of Gamma(4, 1/4) and P(4, 4x).
        let n = 1_000_000usize;
        let params = GammaParams::unit_mean(4.0);
        let mut samples: Vec<f64> = (0..16)
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut rng = substream(99, b);
                (0..n / 16).map(move |_| sample_gamma(params, &mut rng)).collect::<Vec<_>>()
            })
            .collect();
        samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, x) in samples.iter().enumerate() {
            let analytic = reg_lower_gamma(4.0, 4.0 * x);
            let hi = (i + 1) as f64 / n as f64;
            let lo = i as f64 / n as f64;
            ks = ks.max((analytic - hi).abs()).max((analytic - lo).abs());
        }
        assert!(ks < 0.002, "KS distance {ks:.5} exceeds 0.002");
        let mean = samples.iter().sum::<f64>() / n as f64;
        assert_abs(mean, 1.0, 0.005, "unit mean");
    }

    #[test]
    fn sum_approx_preserves_moments_and_identical_parts() {
        // Two identical parts: exact, shape doubles, scale unchanged.
        let p = GammaParams { shape: 4.0, scale: 0.25 };
        let sum = gamma_sum_approx(&[p, p]).unwrap();
        assert_rel(sum.shape, 8.0, 1e-14, "identical-pair shape");
        assert_rel(sum.scale, 0.25, 1e-14, "identical-pair scale");

        // Mixed parts: moments still match exactly by construction.
        let parts = [
            GammaParams { shape: 4.0, scale: 0.3 },
            GammaParams { shape: 2.5, scale: 0.11 },
            GammaParams { shape: 7.0, scale: 0.02 },
        ];
        let approx = gamma_sum_approx(&parts).unwrap();
        let mean: f64 = parts.iter().map(GammaParams::mean).sum();
        let var: f64 = parts.iter().map(GammaParams::variance).sum();
        assert_rel(approx.mean(), mean, 1e-14, "sum mean");
        assert_rel(approx.variance(), var, 1e-14, "sum variance");
    }

    #[test]
    fn effective_shape_doubles_on_the_sector_edge() {
        let cfg = baseline_rf();
        let fading = FadingSpec { kappa_forward: 4.0, kappa_back: 4.0 };
        let m = 6;
        let edge = PolarPoint { r: 40.0, theta_o: std::f64::consts::PI / m as f64 };

        let one = Placement::Ring { m_total: m, d: 50.0, serving: 1 };
        assert_eq!(effective_forward_shape(edge, &one, &cfg, &fading).unwrap(), 4.0);

        let two = Placement::Ring { m_total: m, d: 50.0, serving: 2 };
        let k2 = effective_forward_shape(edge, &two, &cfg, &fading).unwrap();
        assert_rel(k2, 8.0, 1e-12, "edge pair shape");

        // Off the edge the pair is unbalanced: shape in (kappa, 2 kappa).
        let off = PolarPoint { r: 40.0, theta_o: 0.1 };
        let k_off = effective_forward_shape(off, &two, &cfg, &fading).unwrap();
        assert!(k_off > 4.0 && k_off < 8.0, "unbalanced pair shape {k_off}");
    }

    #[test]
    fn outage_probability_closed_path_baseline() {
        let cfg = baseline_rf();
        let fading = FadingSpec { kappa_forward: 4.0, kappa_back: 4.0 };
        let gamma_th = 10f64.powf(0.5);
        let place = Placement::Ring { m_total: 6, d: 50.0, serving: 1 };
        let p = PolarPoint { r: 40.0, theta_o: std::f64::consts::PI / 6.0 };
        let gamma_eq = linkmodel::equivalent_snr(p, &place, &cfg).unwrap();
        let want = product_cdf_closed(gamma_th / gamma_eq, 4, 4);
        let got = outage_probability(p, &place, &cfg, &fading, gamma_th).unwrap();
        assert_rel(got, want, 1e-12, "single-PB outage");
        // Outage worsens with distance.
        let farther = outage_probability(
            PolarPoint { r: 60.0, theta_o: std::f64::consts::PI / 6.0 },
            &place,
            &cfg,
            &fading,
            gamma_th,
        )
        .unwrap();
        assert!(farther > got, "outage must grow with r");
    }

    #[test]
    fn outage_is_one_when_energy_floor_kills_the_link() {
        let mut cfg = baseline_rf();
        cfg.circuit_power_w = 1.0; // absurd floor, nothing harvests 1 W here
        let fading = FadingSpec { kappa_forward: 4.0, kappa_back: 4.0 };
        let place = Placement::Ring { m_total: 6, d: 50.0, serving: 1 };
        let p = PolarPoint { r: 10.0, theta_o: 0.0 };
        let got = outage_probability(p, &place, &cfg, &fading, 3.16).unwrap();
        assert_eq!(got, 1.0);
    }
}
