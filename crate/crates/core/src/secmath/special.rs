//! Log-gamma and the regularized incomplete beta function.
//!
//! These back the binomial tail evaluation for validator counts beyond the
//! range where summing terms directly is sensible.

/// Lanczos approximation (g = 7, 9 coefficients), accurate to ~1e-13 over
/// the positive reals; large arguments go through the reflection-free branch.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a+b).
fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
///
/// Continued fraction (modified Lentz), switching through the symmetry
/// I_x(a,b) = 1 − I_{1−x}(b,a) so the fraction always converges quickly.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "beta_inc requires a, b > 0");
    assert!((0.0..=1.0).contains(&x), "beta_inc requires x in [0,1]");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_bt = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_bt - a.ln()).exp() * beta_cf(a, b, x)
    } else {
        // symmetric form; evaluated directly so the boundary x equal to the
        // threshold cannot bounce between the two branches
        1.0 - (ln_bt - b.ln()).exp() * beta_cf(b, a, 1.0 - x)
    }
}

/// Continued fraction for the incomplete beta, evaluated with Lentz's method.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    // Large a, b need iterations on the order of sqrt(min(a, b)) near the
    // distribution center; 10^6 covers n up to 10^9 comfortably.
    const MAX_ITER: usize = 1_000_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;

        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `stirlerr(x) = ln(x!) - ln(sqrt(2 pi x) (x/e)^x)`: the Stirling series
/// remainder. Series for x >= 16, exact log-gamma below.
pub(crate) fn stirlerr(x: f64) -> f64 {
    if x < 16.0 {
        return ln_gamma(x + 1.0) - 0.5 * (2.0 * std::f64::consts::PI * x).ln() - x * x.ln()
            + x;
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let x2 = x * x;
    (S0 - (S1 - (S2 - (S3 - S4 / x2) / x2) / x2) / x2) / x
}

/// `bd0(x, m) = x ln(x/m) + m - x`, evaluated through a series in
/// `(x - m)/(x + m)` when the two are close so the deviance never passes
/// through a large cancelling intermediate.
pub(crate) fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1u32;
        loop {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1;
        }
    }
    x * (x / m).ln() + m - x
}

/// Log of the binomial pmf `C(n,k) p^k (1-p)^(n-k)` in the saddlepoint
/// (deviance) form, which stays accurate to ~1e-13 relative even for n on
/// the order of 10^9 because the exponent is assembled from small terms.
pub fn ln_binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    assert!(n >= 1 && k <= n);
    assert!((0.0..=1.0).contains(&p));
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if k == 0 {
        return nf * (-p).ln_1p();
    }
    if k == n {
        return nf * p.ln();
    }
    let kf = k as f64;
    let nk = (n - k) as f64;
    let lc = stirlerr(nf) - stirlerr(kf) - stirlerr(nk) - bd0(kf, nf * p) - bd0(nk, nf * q);
    lc + 0.5 * (nf / (2.0 * std::f64::consts::PI * kf * nk)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values computed with an independent arbitrary-precision
    // implementation.
    #[test]
    fn ln_gamma_reference_values() {
        assert_relative_eq!(ln_gamma(0.5), 0.5723649429247, max_relative = 1e-12);
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-13);
        assert_relative_eq!(ln_gamma(3.7), 1.428072326665388, max_relative = 1e-12);
        assert_relative_eq!(ln_gamma(10.0), 12.801827480081469, max_relative = 1e-12);
        assert_relative_eq!(ln_gamma(100.5), 361.43554046777757, max_relative = 1e-12);
        assert_relative_eq!(ln_gamma(1e6), 12815504.569147611, max_relative = 1e-12);
        assert_relative_eq!(ln_gamma(9e8), 17656114779.76971, max_relative = 1e-12);
    }

    #[test]
    fn beta_inc_reference_values() {
        assert_relative_eq!(
            beta_inc(0.5, 0.5, 0.25),
            0.33333333333333337,
            max_relative = 1e-11
        );
        assert_relative_eq!(beta_inc(2.0, 3.0, 0.4), 0.5248, max_relative = 1e-11);
        assert_relative_eq!(
            beta_inc(10.0, 5.0, 0.7),
            0.5842011862193499,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            beta_inc(100.0, 200.0, 0.3),
            0.10884306564491161,
            max_relative = 1e-10
        );
        assert_relative_eq!(beta_inc(5.0, 5.0, 0.5), 0.5, max_relative = 1e-12);
        assert_relative_eq!(beta_inc(1.0, 1.0, 0.123), 0.123, max_relative = 1e-12);
        assert_relative_eq!(
            beta_inc(3.5, 0.5, 0.9),
            0.40708382206558924,
            max_relative = 1e-11
        );
    }

    #[test]
    fn beta_inc_large_arguments() {
        // Binomial-tail scale arguments. The log-space prefactor limits the
        // continued fraction to ~1e-8 relative error up here; the binomial
        // CDF uses the deviance-based path for full precision instead.
        assert_relative_eq!(
            beta_inc(1e6, 2e6, 0.3333),
            0.4513147049783692,
            max_relative = 1e-7
        );
        assert_relative_eq!(
            beta_inc(879366.0, 120635.0, 0.875),
            1.8095401595923286e-40,
            max_relative = 1e-7
        );
    }

    #[test]
    fn ln_binomial_pmf_matches_direct_evaluation() {
        // small cases against the plain product formula
        for n in [5u64, 20, 40] {
            for k in 0..=n {
                for &p in &[0.125f64, 0.5, 0.9] {
                    let mut direct = 1.0f64;
                    for j in 0..k {
                        direct *= (n - j) as f64 / (j + 1) as f64;
                    }
                    direct *= p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
                    assert_relative_eq!(
                        ln_binomial_pmf(k, n, p).exp(),
                        direct,
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn bd0_series_matches_direct_form() {
        // just outside the series window the direct form is exact enough
        for &(x, m) in &[(100.0f64, 100.5), (1e9, 1.0001e9), (5.0, 5.2)] {
            let series = bd0(x, m);
            let direct = x * (x / m).ln() + m - x;
            assert_relative_eq!(series, direct, max_relative = 1e-6);
        }
        assert_eq!(bd0(7.0, 7.0), 0.0);
    }

    #[test]
    fn stirlerr_series_matches_the_log_gamma_form() {
        let direct = |x: f64| {
            ln_gamma(x + 1.0) - 0.5 * (2.0 * std::f64::consts::PI * x).ln() - x * x.ln() + x
        };
        // the log-gamma form cancels ~x ln x digits, so compare only where
        // it is still sharp
        for x in [16.0, 20.0, 50.0] {
            assert_relative_eq!(stirlerr(x), direct(x), max_relative = 1e-10);
        }
        // three-term asymptotics at larger x
        let x = 1000.0f64;
        let expect = 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3)) + 1.0 / (1260.0 * x.powi(5));
        assert_relative_eq!(stirlerr(x), expect, max_relative = 1e-12);
        assert_relative_eq!(stirlerr(1e8), 1.0 / (12.0 * 1e8), max_relative = 1e-10);
    }

    #[test]
    fn beta_inc_bounds_and_symmetry() {
        for &(a, b) in &[(2.0, 7.0), (0.3, 0.9), (50.0, 3.0)] {
            assert_eq!(beta_inc(a, b, 0.0), 0.0);
            assert_eq!(beta_inc(a, b, 1.0), 1.0);
            for &x in &[0.1, 0.45, 0.8] {
                let forward = beta_inc(a, b, x);
                let reflected = 1.0 - beta_inc(b, a, 1.0 - x);
                assert_relative_eq!(forward, reflected, epsilon = 1e-12);
            }
        }
    }
}
