//! Scalar special functions used by the fading and outage math.
//!
//! Everything here is self-contained double-precision code: log-gamma
//! (Lanczos), the regularized lower incomplete gamma (series / continued
//! fraction), modified Bessel K of integer order (series below 2.0, a
//! continued-fraction evaluation above, upward recurrence for higher orders),
//! a regularized 1F2 hypergeometric series, and fixed-order Gauss-Legendre
//! nodes. The Bessel path targets 1e-10 relative accuracy; the inline tests
//! pin it against 50-digit reference values.

use std::sync::OnceLock;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// ------------------------------------------------------------------ gamma

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma needs x > 0, got {x}");
    // Lanczos approximation, g = 7, 9 coefficients.
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection keeps the approximation in its accurate range.
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function for any real `x` that is not a pole (0, -1, -2, ...).
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 {
        return ln_gamma(x).exp();
    }
    assert!(
        x.fract() != 0.0,
        "gamma pole at non-positive integer {x}"
    );
    // Reflection: gamma(x) * gamma(1-x) = pi / sin(pi x).
    std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
}

// ------------------------------------------------- incomplete gamma P(a, x)

/// Regularized lower incomplete gamma `P(a, x)` for `a > 0`, `x >= 0`.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "P(a,x) needs a > 0, x >= 0");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

// Series representation, converges fast for x < a + 1.
fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

// Continued fraction for Q(a, x) = 1 - P(a, x), modified Lentz.
fn gamma_cf(a: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

// ------------------------------------------------------- modified Bessel K

/// Modified Bessel function of the second kind, integer order, `x > 0`.
///
/// Orders 0 and 1 come from the power series for `x <= 2` and a
/// continued-fraction evaluation for `x > 2`; higher orders use the upward
/// recurrence `K_{n+1} = K_{n-1} + (2n/x) K_n`, which is stable because K
/// grows with order.
pub fn bessel_k(order: u32, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k needs x > 0, got {x}");
    let (k0, k1) = if x <= 2.0 {
        (bessel_k0_series(x), bessel_k1_series(x))
    } else {
        bessel_k01_cf(x)
    };
    match order {
        0 => k0,
        1 => k1,
        n => {
            let mut km = k0;
            let mut k = k1;
            for j in 1..n {
                let next = km + (2.0 * j as f64 / x) * k;
                km = k;
                k = next;
            }
            k
        }
    }
}

/// Exponentially scaled variant `e^x K_order(x)`, safe far into the tail
/// where the bare function underflows.
pub fn bessel_k_scaled(order: u32, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k_scaled needs x > 0, got {x}");
    let (k0, k1) = if x <= 2.0 {
        let e = x.exp();
        (e * bessel_k0_series(x), e * bessel_k1_series(x))
    } else {
        let (k0, k1) = bessel_k01_cf_scaled(x);
        (k0, k1)
    };
    match order {
        0 => k0,
        1 => k1,
        n => {
            let mut km = k0;
            let mut k = k1;
            for j in 1..n {
                let next = km + (2.0 * j as f64 / x) * k;
                km = k;
                k = next;
            }
            k
        }
    }
}

fn bessel_k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    // I0 and the harmonic-weighted companion sum, accumulated together.
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut h = 0.0;
    let mut hsum = 0.0;
    for k in 1..64 {
        term *= q / ((k * k) as f64);
        h += 1.0 / k as f64;
        i0 += term;
        hsum += term * h;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -((0.5 * x).ln() + EULER_GAMMA) * i0 + hsum
}

fn bessel_k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0; // q^k / (k! (k+1)!)
    let mut i1sum = 1.0;
    let mut psum = -2.0 * EULER_GAMMA + 1.0; // psi(1) + psi(2) at k = 0
    let mut wsum = psum;
    let mut h = 0.0; // harmonic number H_k
    for k in 1..64 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        h += 1.0 / kf;
        // psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
        psum = -2.0 * EULER_GAMMA + 2.0 * h + 1.0 / (kf + 1.0);
        i1sum += term;
        wsum += term * psum;
        if term < 1e-18 * i1sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1sum;
    1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * wsum
}

fn bessel_k01_cf(x: f64) -> (f64, f64) {
    let (k0, k1) = bessel_k01_cf_scaled(x);
    let e = (-x).exp();
    (e * k0, e * k1)
}

// Continued-fraction evaluation of e^x K0 and e^x K1 for x > 2 (order-0 seed
// of the standard Steed/Lentz scheme); accurate to machine precision there.
fn bessel_k01_cf_scaled(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0_f64;
    let mut q2 = 1.0_f64;
    let mut a = -a1;
    let mut c = a1;
    let mut q = c;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-16 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

// ----------------------------------------------------- regularized 1F2 sum

/// Regularized hypergeometric series
/// `sum_k (a)_k z^k / (k! Gamma(b + k) Gamma(c + k))`.
///
/// `b` and `c` must stay away from non-positive integers; the caller guards
/// that. Converges for every finite `z` (the series is entire).
pub fn hyper_1f2_regularized(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0 / (gamma(b) * gamma(c));
    let mut sum = term;
    let mut quiet = 0;
    for k in 0..20_000 {
        let kf = k as f64;
        term *= (a + kf) * z / ((kf + 1.0) * (b + kf) * (c + kf));
        sum += term;
        // Terms may grow before they decay; require a few consecutive
        // negligible terms before trusting convergence.
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    sum
}

// ------------------------------------------------------- Gauss-Legendre

/// Nodes and weights of the `N`-point Gauss-Legendre rule on [-1, 1].
fn gauss_legendre_64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 64;
        let mut nodes = vec![0.0; N];
        let mut weights = vec![0.0; N];
        for i in 0..(N + 1) / 2 {
            // Newton iteration from the Chebyshev-angle initial guess.
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..N {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
                }
                pp = N as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[N - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[N - 1 - i] = weights[i];
        }
        (nodes, weights)
    })
}

/// Integrate `f` over `[lo, hi]` with the cached 64-point rule.
pub fn integrate_gl64(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre_64();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

// --------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
        let rel = if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        };
        assert!(
            rel <= tol,
            "{what}: got {got:.17e}, want {want:.17e}, rel err {rel:.3e} > {tol:.1e}"
        );
    }

    #[test]
    fn ln_gamma_matches_reference_values() {
        // Reference values computed with mpmath at 50 digits.
        let table = [
            (0.5, 0.57236494292470009),
            (1.0, 0.0),
            (3.6, 1.3129233085764161),
            (4.0, 1.791759469228055),
            (8.2, 8.9309291059103496),
            (11.31, 15.837984334531408),
            (0.07, 2.6227537606032155),
            (25.0, 54.784729398112319),
        ];
        for (x, want) in table {
            if want == 0.0 {
                assert!(ln_gamma(x).abs() < 1e-14, "ln_gamma(1) should be 0");
            } else {
                assert_rel(ln_gamma(x), want, 1e-13, &format!("ln_gamma({x})"));
            }
        }
    }

    #[test]
    fn gamma_handles_negative_arguments() {
        // gamma(-0.5) = -2 sqrt(pi); gamma(-2.5) = -8 sqrt(pi)/15.
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert_rel(gamma(-0.5), -2.0 * sqrt_pi, 1e-13, "gamma(-0.5)");
        assert_rel(gamma(-2.5), -8.0 * sqrt_pi / 15.0, 1e-13, "gamma(-2.5)");
        assert_rel(gamma(5.0), 24.0, 1e-13, "gamma(5)");
    }

    #[test]
    fn incomplete_gamma_matches_reference_values() {
        // Reference values computed with mpmath at 50 digits.
        let table = [
            (0.5, 0.3, 0.56142197391900014),
            (1.0, 1.0, 0.63212055882855768),
            (2.5, 0.1, 0.00088613878881244249),
            (4.0, 4.0, 0.56652987963329107),
            (4.0, 16.0, 0.99990685838705736),
            (8.0, 2.0, 0.0010967189678587027),
            (11.7, 9.3, 0.25561373320091611),
        ];
        for (a, x, want) in table {
            assert_rel(reg_lower_gamma(a, x), want, 1e-12, &format!("P({a},{x})"));
        }
    }

    #[test]
    fn incomplete_gamma_is_a_cdf_in_x() {
        assert_eq!(reg_lower_gamma(3.0, 0.0), 0.0);
        let mut prev = 0.0;
        for i in 1..200 {
            let x = i as f64 * 0.25;
            let p = reg_lower_gamma(3.0, x);
            assert!(p >= prev && p <= 1.0, "P(3,{x}) not monotone in [0,1]");
            prev = p;
        }
        assert!(prev > 1.0 - 1e-12, "P(3, 50) should be ~1");
    }

    #[test]
    fn bessel_k_matches_reference_values() {
        // Reference values computed with mpmath at 50 digits, spanning both
        // sides of the series/continued-fraction split at x = 2.
        let table = [
            (0, 0.1, 2.4270690247020166),
            (0, 0.5, 0.92441907122766586),
            (0, 1.0, 0.42102443824070833),
            (0, 2.0, 0.11389387274953344),
            (0, 2.5, 0.062347553200366186),
            (0, 5.0, 0.0036910983340425943),
            (0, 10.0, 1.7780062316167652e-5),
            (0, 30.0, 2.1324774964630564e-14),
            (1, 0.1, 9.8538447808706061),
            (1, 0.5, 1.6564411200033009),
            (1, 1.0, 0.60190723019723457),
            (1, 2.0, 0.13986588181652243),
            (1, 2.5, 0.073890816347747064),
            (1, 5.0, 0.0040446134454521642),
            (1, 10.0, 1.8648773453825585e-5),
            (1, 30.0, 2.1677320018915494e-14),
            (2, 0.1, 199.50396464211414),
            (2, 0.5, 7.5501835512408694),
            (2, 1.0, 1.6248388986351775),
            (2, 2.0, 0.25375975456605586),
            (2, 2.5, 0.12146020627856384),
            (2, 5.0, 0.00530894371222346),
            (2, 10.0, 2.1509817006932769e-5),
            (2, 30.0, 2.2769929632558263e-14),
            (3, 0.1, 7990.0124304654362),
            (3, 0.5, 62.057909529930256),
            (3, 1.0, 7.1012628247379445),
            (3, 2.0, 0.64738539094863415),
            (3, 2.5, 0.2682271463934492),
            (3, 5.0, 0.0082917684152309322),
            (3, 10.0, 2.7252700256598692e-5),
            (3, 30.0, 2.4713310636589929e-14),
            (4, 0.1, 479600.24979256828),
            (4, 0.5, 752.24509791040395),
            (4, 1.0, 44.232415847062845),
            (4, 2.0, 2.1959159274119583),
            (4, 2.5, 0.76520535762284192),
            (4, 5.0, 0.015259065810500579),
            (4, 10.0, 3.7861437160891984e-5),
            (4, 30.0, 2.7712591759876249e-14),
            (6, 0.1, 3838080599.8333854),
            (6, 0.5, 242711.83461983827),
            (6, 1.0, 3653.8383118594699),
            (6, 2.0, 49.351161430394296),
            (6, 2.5, 11.632742520769015),
            (6, 5.0, 0.080671613234564294),
            (6, 10.0, 9.5403287146204263e-5),
            (6, 30.0, 3.841370346183967e-14),
        ];
        for (n, x, want) in table {
            assert_rel(bessel_k(n, x), want, 1e-10, &format!("K_{n}({x})"));
        }
    }

    #[test]
    fn bessel_k_recurrence_consistency() {
        // K_{n+1} - K_{n-1} - (2n/x) K_n must vanish for any x, including
        // across the series/continued-fraction split.
        for &x in &[0.3, 1.7, 2.0, 2.0001, 3.9, 12.5] {
            for n in 1..8u32 {
                let lhs = bessel_k(n + 1, x);
                let rhs = bessel_k(n - 1, x) + (2.0 * n as f64 / x) * bessel_k(n, x);
                assert_rel(lhs, rhs, 1e-9, &format!("recurrence n={n} x={x}"));
            }
        }
    }

    #[test]
    fn scaled_bessel_consistent_and_underflow_free() {
        for &x in &[0.4, 1.9, 2.3, 8.0, 40.0] {
            for n in 0..6u32 {
                assert_rel(
                    bessel_k_scaled(n, x),
                    bessel_k(n, x) * x.exp(),
                    1e-12,
                    &format!("scaled K_{n}({x})"),
                );
            }
        }
        // Far past the underflow point of the bare function.
        let big = bessel_k_scaled(2, 900.0);
        assert!(bessel_k(2, 900.0) == 0.0, "bare K underflows at x=900");
        // e^x K_n(x) ~ sqrt(pi / 2x) for large x, any fixed order.
        assert_rel(
            big,
            (std::f64::consts::PI / 1800.0).sqrt(),
            1e-2,
            "asymptotic magnitude",
        );
    }

    #[test]
    fn hyper_series_reduces_to_known_cases() {
        // 1F2(a; a, c; z) regularized = sum z^k/(k! G(c+k) G(a+k)/(a)_k ...)
        // Cross-check against a direct high-precision-style term sum done
        // with independent arithmetic: compare to exp via
        // sum_k z^k / (k! Gamma(k+1)) = sum z^k/(k!)^2 ... instead use the
        // identity 1F2 regularized with b=c=1: sum z^k (a)_k/(k!)^3 is not
        // elementary, so pin plain numeric references generated by brute
        // force with 200-term Kahan summation at small z.
        let brute = |a: f64, b: f64, c: f64, z: f64| {
            let mut total = 0.0_f64;
            let mut poch = 1.0;
            let mut fact = 1.0;
            let mut zk = 1.0;
            for k in 0..200 {
                let kf = k as f64;
                if k > 0 {
                    poch *= a + kf - 1.0;
                    fact *= kf;
                    zk *= z;
                }
                let term = poch * zk / (fact * gamma(b + kf) * gamma(c + kf));
                total += term;
                // Factorials overflow long after convergence; stop once the
                // tail is far below the accumulated value.
                if k > 8 && term.abs() < 1e-30 * total.abs() {
                    break;
                }
            }
            total
        };
        for &(a, b, c, z) in &[
            (4.0, 5.0, 1.4, 0.8),
            (3.6, 4.6, 0.6, 2.3),
            (8.2, 9.2, -3.2, 5.0),
            (4.0, 5.0, -3.2, 11.0),
        ] {
            assert_rel(
                hyper_1f2_regularized(a, b, c, z),
                brute(a, b, c, z),
                1e-11,
                &format!("1F2r({a};{b},{c};{z})"),
            );
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // A 64-point rule is exact through degree 127.
        let got = integrate_gl64(0.0, 2.0, |x| 7.0 * x.powi(6) - 3.0 * x.powi(2) + 1.0);
        let want = 2.0_f64.powi(7) - 2.0_f64.powi(3) + 2.0;
        assert_rel(got, want, 1e-13, "poly integral");
        let gauss = integrate_gl64(-8.0, 8.0, |x| (-0.5 * x * x).exp());
        assert_rel(gauss, (2.0 * std::f64::consts::PI).sqrt(), 1e-12, "gaussian");
    }
}
