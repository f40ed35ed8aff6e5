//! Clebsch-Gordan coefficients `C^{c,γ}_{a,α; b,β}` with factorials
//! continued to real arguments through `x! = Γ(x + 1)`.
//!
//! Two algebraically equivalent routes are provided. [`cg_continued`] uses
//! the transformed series whose first lower parameter is `-2a`; it is the
//! one the interbasis code relies on because every square-root factor stays
//! positive for the oscillator arguments. [`cg_direct_form`] uses the
//! untransformed series and is kept as a cross-check.

use super::gamma::{is_gamma_pole, SignedLog};
use super::hyper::{hyp3f2_regularized_scaled, non_positive_integer, Hyp3F2Spec, INTEGER_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CGArgs {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub c: f64,
    pub gamma: f64,
}

impl CGArgs {
    pub fn new(a: f64, alpha: f64, b: f64, beta: f64, c: f64, gamma: f64) -> Self {
        CGArgs { a, alpha, b, beta, c, gamma }
    }

    /// Checks that `a+b-c`, `a-α`, `b-β` are non-negative integers.
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("a+b-c", self.a + self.b - self.c),
            ("a-alpha", self.a - self.alpha),
            ("b-beta", self.b - self.beta),
        ];
        for (name, value) in checks {
            if non_positive_integer(-value).is_none() {
                return Err(Error::InvalidCoupling(format!(
                    "{name} = {value} is not a non-negative integer in {self:?}"
                )));
            }
        }
        Ok(())
    }

    fn projections_add_up(&self) -> bool {
        (self.gamma - self.alpha - self.beta).abs() <= INTEGER_TOLERANCE
    }

    /// Standard triangle violation `c < |a - b|` by an integer amount.
    fn violates_triangle(&self) -> bool {
        let gap = self.c - (self.a - self.b).abs();
        gap < -INTEGER_TOLERANCE && (gap - gap.round()).abs() <= INTEGER_TOLERANCE
    }
}

/// Product of factorials `Π num! / Π den!`. A pole in the denominator makes the
/// product vanish; a pole in the numerator is outside the continuation.
fn factorial_ratio(num: &[f64], den: &[f64], args: &CGArgs) -> Result<SignedLog> {
    if den.iter().any(|&x| is_gamma_pole(x + 1.0)) {
        return Ok(SignedLog::ZERO);
    }
    let mut acc = SignedLog::ONE;
    for &x in num {
        acc *= SignedLog::factorial(x).map_err(|_| {
            Error::InvalidCoupling(format!("factorial of {x} diverges for {args:?}"))
        })?;
    }
    for &x in den {
        acc = acc / SignedLog::factorial(x)?;
    }
    Ok(acc)
}

fn checked_sqrt(x: SignedLog, args: &CGArgs) -> Result<SignedLog> {
    if x.sign < 0.0 {
        return Err(Error::InvalidCoupling(format!("negative radicand for {args:?}")));
    }
    Ok(x.sqrt())
}

/// Continued CG coefficient via the `-2a` series:
///
/// ```text
/// δ_{γ,α+β} √[ (2c+1)(b+c-a)!(b-β)!(c+γ)!(c-γ)!
///            / ((a+b-c)!(a-b+c)!(a+b+c+1)!(a+α)!(a-α)!(b+β)!) ]
///   · (2a)! / (c-a-β)! · ₃F₂(-a-b+c, -a+α, b-a+c+1; -2a, c-a-β+1 | 1)
/// ```
///
/// The `1/(c-a-β)!` factor is folded into the regularized ₃F₂.
pub fn cg_continued(args: CGArgs) -> Result<f64> {
    args.validate()?;
    if !args.projections_add_up() || args.violates_triangle() {
        return Ok(0.0);
    }
    let CGArgs { a, alpha, b, beta, c, gamma } = args;

    let radicand = SignedLog::from_f64(2.0 * c + 1.0)
        * factorial_ratio(
            &[b + c - a, b - beta, c + gamma, c - gamma],
            &[a + b - c, a - b + c, a + b + c + 1.0, a + alpha, a - alpha, b + beta],
            &args,
        )?;
    if radicand.is_zero() {
        return Ok(0.0);
    }
    let prefactor = checked_sqrt(radicand, &args)? * factorial_ratio(&[2.0 * a], &[], &args)?;

    let spec = Hyp3F2Spec::new([-a - b + c, -a + alpha, b - a + c + 1.0], [-2.0 * a, c - a - beta + 1.0])?;
    let series = hyp3f2_regularized_scaled(&spec)?;
    Ok((prefactor * series).to_f64())
}

/// Continued CG coefficient via the untransformed series
///
/// ```text
/// ₃F₂(-a-b+c, -a+α, -b-β; c-a-β+1, c-b+α+1 | 1)
/// ```
///
/// Fails with a divergence where `c-b+α` is a negative integer, a case the
/// `-2a` route handles.
pub fn cg_direct_form(args: CGArgs) -> Result<f64> {
    args.validate()?;
    if !args.projections_add_up() || args.violates_triangle() {
        return Ok(0.0);
    }
    let CGArgs { a, alpha, b, beta, c, gamma } = args;

    let radicand = SignedLog::from_f64(2.0 * c + 1.0)
        * factorial_ratio(
            &[a + alpha, b - beta, c + gamma, c - gamma, a - b + c, c - a + b],
            &[a + b - c, a + b + c + 1.0, a - alpha, b + beta],
            &args,
        )?;
    if radicand.is_zero() {
        return Ok(0.0);
    }
    let lower_first = c - b + alpha + 1.0;
    let prefactor = checked_sqrt(radicand, &args)? / SignedLog::gamma(lower_first)?;

    let spec = Hyp3F2Spec::new([-a - b + c, -a + alpha, -b - beta], [lower_first, c - a - beta + 1.0])?;
    let series = hyp3f2_regularized_scaled(&spec)?;
    Ok((prefactor * series).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fact(x: f64) -> f64 {
        let n = x.round();
        assert!(n >= 0.0 && (x - n).abs() < 1e-12, "fact({x})");
        (1..=n as u64).fold(1.0, |acc, k| acc * k as f64)
    }

    /// Racah's single-sum formula for (half-)integer arguments.
    fn racah(a: f64, al: f64, b: f64, be: f64, c: f64, ga: f64) -> f64 {
        if (ga - al - be).abs() > 1e-12 || c > a + b || c < (a - b).abs() {
            return 0.0;
        }
        if al.abs() > a || be.abs() > b || ga.abs() > c {
            return 0.0;
        }
        let tri = (2.0 * c + 1.0) * fact(c + a - b) * fact(c - a + b) * fact(a + b - c) / fact(a + b + c + 1.0);
        let proj = fact(c + ga) * fact(c - ga) * fact(a - al) * fact(a + al) * fact(b - be) * fact(b + be);
        let mut sum = 0.0;
        for k in 0..=((a + b - c).round() as i64) {
            let k = k as f64;
            let d = [a + b - c - k, a - al - k, b + be - k, c - b + al + k, c - a - be + k];
            if d.iter().any(|&x| x < -1e-12) {
                continue;
            }
            let sign = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign / (fact(k) * d.iter().map(|&x| fact(x)).product::<f64>());
        }
        (tri * proj).sqrt() * sum
    }

    fn half_integers(max2: i32) -> impl Iterator<Item = f64> {
        (0..=max2).map(|k| k as f64 / 2.0)
    }

    fn projections(j: f64) -> impl Iterator<Item = f64> {
        let n = (2.0 * j).round() as i32;
        (0..=n).map(move |k| -j + k as f64)
    }

    #[test]
    fn zero_momentum_coupling() {
        for &(a, alpha) in &[(0.0, 0.0), (1.0, -1.0), (2.5, 0.5), (1.37, 0.37), (3.118, -1.882)] {
            let v = cg_continued(CGArgs::new(a, alpha, 0.0, 0.0, a, alpha)).unwrap();
            assert!((v - 1.0).abs() < 1e-13, "a={a}: {v}");
        }
    }

    #[test]
    fn singlet_of_two_unit_spins() {
        let v = cg_continued(CGArgs::new(1.0, 0.0, 1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((v + 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((racah(1.0, 0.0, 1.0, 0.0, 0.0, 0.0) + 1.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn continued_value_matches_interbasis_quadrature() {
        // W^0_{0,2}(√5/2) from a 400×400 hemisphere overlap; the phase factor is 1.
        let nu = 5f64.sqrt() / 2.0;
        let a = (2.0 + nu) / 2.0;
        let v = cg_continued(CGArgs::new(a, nu / 2.0, a, nu / 2.0, nu, nu)).unwrap();
        assert!((v - (-0.6360098247570339)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn integer_tables_against_racah() {
        let mut worst = 0.0f64;
        for a in half_integers(6) {
            for b in half_integers(6) {
                let mut c = (a - b).abs();
                while c <= a + b + 1e-9 {
                    for alpha in projections(a) {
                        for beta in projections(b) {
                            let gamma = alpha + beta;
                            if gamma.abs() > c + 1e-9 {
                                continue;
                            }
                            let args = CGArgs::new(a, alpha, b, beta, c, gamma);
                            let got = cg_continued(args).unwrap();
                            let expected = racah(a, alpha, b, beta, c, gamma);
                            worst = worst.max((got - expected).abs());
                        }
                    }
                    c += 1.0;
                }
            }
        }
        assert!(worst < 1e-12, "worst deviation {worst:e}");
    }

    #[test]
    fn orthogonality_of_integer_tables() {
        for a in half_integers(6) {
            for b in half_integers(6) {
                let cs: Vec<f64> = {
                    let mut v = Vec::new();
                    let mut c = (a - b).abs();
                    while c <= a + b + 1e-9 {
                        v.push(c);
                        c += 1.0;
                    }
                    v
                };
                for gamma in projections(a + b) {
                    let pairs: Vec<(f64, f64)> = projections(a)
                        .flat_map(|al| projections(b).map(move |be| (al, be)))
                        .filter(|(al, be)| (al + be - gamma).abs() < 1e-9)
                        .collect();
                    let rows: Vec<f64> = cs.iter().copied().filter(|c| gamma.abs() <= c + 1e-9).collect();
                    assert_eq!(rows.len(), pairs.len());
                    for &c1 in &rows {
                        for &c2 in &rows {
                            let dot: f64 = pairs
                                .iter()
                                .map(|&(al, be)| {
                                    cg_continued(CGArgs::new(a, al, b, be, c1, gamma)).unwrap()
                                        * cg_continued(CGArgs::new(a, al, b, be, c2, gamma)).unwrap()
                                })
                                .sum();
                            let expected = if c1 == c2 { 1.0 } else { 0.0 };
                            assert!((dot - expected).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn projection_mismatch_is_zero() {
        assert_eq!(cg_continued(CGArgs::new(1.0, 1.0, 1.0, 0.0, 2.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn non_integer_differences_are_rejected() {
        for args in [
            CGArgs::new(1.0, 0.0, 1.0, 0.0, 0.5, 0.0),
            CGArgs::new(1.3, 0.0, 1.0, 0.0, 1.3, 0.0),
            CGArgs::new(1.0, 0.0, 1.0, 0.4, 1.0, 0.4),
            CGArgs::new(1.0, 0.0, 1.0, 0.0, 3.0, 0.0),
        ] {
            assert!(matches!(cg_continued(args), Err(Error::InvalidCoupling(_))), "{args:?}");
        }
    }

    #[test]
    fn direct_form_fails_where_transformed_form_does_not() {
        let args = CGArgs::new(1.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        assert!(cg_direct_form(args).is_err());
        assert!(cg_continued(args).is_ok());
    }

    proptest! {
        #[test]
        fn both_routes_agree_on_oscillator_arguments(
            n in 0u32..8, n1_frac in 0.0f64..1.0, m_idx in 0u32..9, nu in 0.55f64..4.0
        ) {
            let n1 = ((n1_frac * (n as f64 + 1.0)).floor() as u32).min(n);
            let m = -(n as i32) + 2 * (m_idx % (n + 1)) as i32;
            let nf = n as f64;
            let a = (nf + nu) / 2.0;
            let args = CGArgs::new(a, (nu + m as f64) / 2.0, a, (nu - m as f64) / 2.0, n1 as f64 + nu, nu);
            let transformed = cg_continued(args).unwrap();
            if let Ok(direct) = cg_direct_form(args) {
                prop_assert!((transformed - direct).abs() <= 1e-10, "{} vs {}", transformed, direct);
            }
        }
    }
}
