//! Jacobi and Gegenbauer polynomials by forward three-term recurrence.

/// Jacobi polynomial `P_n^{(a,b)}(x)`, `a, b > -1`.
pub fn jacobi_poly(n: u32, a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > -1.0 && b > -1.0, "jacobi_poly: a={a}, b={b}");
    if n == 0 {
        return 1.0;
    }
    let ab = a + b;
    let mut prev = 1.0;
    let mut cur = 0.5 * (a - b) + 0.5 * (ab + 2.0) * x;
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + ab;
        let a1 = 2.0 * k * (k + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c;
        let next = ((a2 + a3 * x) * cur - a4 * prev) / a1;
        prev = cur;
        cur = next;
    }
    cur
}

/// Gegenbauer polynomial `C_n^λ(x)`, `λ > 0`.
pub fn gegenbauer_poly(n: u32, lambda: f64, x: f64) -> f64 {
    debug_assert!(lambda > 0.0, "gegenbauer_poly: lambda={lambda}");
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lambda * x;
    for k in 2..=n {
        let k = k as f64;
        let next = (2.0 * x * (k + lambda - 1.0) * cur - (k + 2.0 * lambda - 2.0) * prev) / k;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::ln_gamma;
    use proptest::prelude::*;

    fn pochhammer(x: f64, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (x + j as f64))
    }

    fn factorial(k: u32) -> f64 {
        (1..=k).fold(1.0, |acc, j| acc * j as f64)
    }

    fn binomial(top: f64, k: u32) -> f64 {
        pochhammer(top - k as f64 + 1.0, k) / factorial(k)
    }

    /// Σ_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^{n-s}, with Σ|term|
    /// returned as the rounding-error scale of the sum.
    fn jacobi_series(n: u32, a: f64, b: f64, x: f64) -> (f64, f64) {
        let nf = n as f64;
        let terms: Vec<f64> = (0..=n)
            .map(|s| {
                binomial(nf + a, n - s)
                    * binomial(nf + b, s)
                    * (0.5 * (x - 1.0)).powi(s as i32)
                    * (0.5 * (x + 1.0)).powi((n - s) as i32)
            })
            .collect();
        (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
    }

    /// Σ_k (-1)^k (λ)_{n-k} (2x)^{n-2k} / (k! (n-2k)!), with Σ|term|.
    fn gegenbauer_series(n: u32, lambda: f64, x: f64) -> (f64, f64) {
        let terms: Vec<f64> = (0..=n / 2)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * pochhammer(lambda, n - k) * (2.0 * x).powi((n - 2 * k) as i32)
                    / (factorial(k) * factorial(n - 2 * k))
            })
            .collect();
        (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn degree_zero_is_one() {
        assert_eq!(jacobi_poly(0, 0.3, 2.0, -0.7), 1.0);
        assert_eq!(gegenbauer_poly(0, 1.2, 0.4), 1.0);
    }

    #[test]
    fn jacobi_frozen_value() {
        // exact rational from the hypergeometric series
        assert!((jacobi_poly(2, 0.5, 1.3, 0.2) - (-0.6978)).abs() < 1e-14);
        assert!((jacobi_series(2, 0.5, 1.3, 0.2).0 - (-0.6978)).abs() < 1e-14);
    }

    #[test]
    fn gegenbauer_frozen_value() {
        let expected = 2.080956967936;
        assert!(rel(gegenbauer_poly(3, 1.618, -0.4), expected) < 1e-13);
    }

    #[test]
    fn jacobi_endpoint() {
        for n in 0..=50u32 {
            for &(a, b) in &[(0.0, 0.0), (2.0, 1.118), (0.5, 3.25), (7.0, 0.6)] {
                let expected =
                    (ln_gamma(n as f64 + a + 1.0) - ln_gamma(n as f64 + 1.0) - ln_gamma(a + 1.0)).exp();
                let got = jacobi_poly(n, a, b, 1.0);
                assert!(rel(got, expected) < 1e-12, "n={n} a={a} b={b}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn gegenbauer_endpoint() {
        for n in 0..=50u32 {
            for &lambda in &[0.25, 1.0, 1.618, 3.5] {
                let expected = (ln_gamma(2.0 * lambda + n as f64)
                    - ln_gamma(n as f64 + 1.0)
                    - ln_gamma(2.0 * lambda))
                .exp();
                assert!(rel(gegenbauer_poly(n, lambda, 1.0), expected) < 1e-12);
            }
        }
    }

    #[test]
    fn parity() {
        for n in 0..12 {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            let (x, l) = (0.37, 2.2);
            assert!((gegenbauer_poly(n, l, -x) - s * gegenbauer_poly(n, l, x)).abs() < 1e-12);
            // P_n^{(a,b)}(-x) = (-1)^n P_n^{(b,a)}(x)
            let (a, b) = (0.4, 1.9);
            assert!((jacobi_poly(n, a, b, -x) - s * jacobi_poly(n, b, a, x)).abs() < 1e-11);
        }
    }

    proptest! {
        #[test]
        fn jacobi_recurrence_matches_series(
            n in 0u32..=20, a in -0.9f64..6.0, b in -0.9f64..6.0, x in -1.0f64..1.0
        ) {
            let rec = jacobi_poly(n, a, b, x);
            let (ser, abs_sum) = jacobi_series(n, a, b, x);
            prop_assert!((rec - ser).abs() <= 1e-10 * ser.abs() + 1e-14 * abs_sum, "rec={} ser={}", rec, ser);
        }

        #[test]
        fn gegenbauer_recurrence_matches_series(
            n in 0u32..=20, lambda in 0.05f64..6.0, x in -1.0f64..1.0
        ) {
            let rec = gegenbauer_poly(n, lambda, x);
            let (ser, abs_sum) = gegenbauer_series(n, lambda, x);
            prop_assert!((rec - ser).abs() <= 1e-10 * ser.abs() + 1e-14 * abs_sum, "rec={} ser={}", rec, ser);
        }

        #[test]
        fn gegenbauer_jacobi_bridge(n in 0u32..=20, lambda in 0.1f64..5.0, x in -1.0f64..1.0) {
            // C_n^λ = (2λ)_n / (λ+½)_n · P_n^{(λ-½, λ-½)}
            let ratio = (ln_gamma(2.0 * lambda + n as f64) - ln_gamma(2.0 * lambda)
                - ln_gamma(lambda + 0.5 + n as f64) + ln_gamma(lambda + 0.5)).exp();
            let c = gegenbauer_poly(n, lambda, x);
            let p = jacobi_poly(n, lambda - 0.5, lambda - 0.5, x);
            let scale = gegenbauer_poly(n, lambda, 1.0).abs();
            prop_assert!((c - ratio * p).abs() <= 1e-12 * scale.max(1.0));
        }
    }
}
