//! Terminating ₃F₂ at unit argument, always in the form regularized by the
//! second lower parameter.
//!
//! The regularized series
//!
//! ```text
//! Σ_k (u₁)_k (u₂)_k (u₃)_k / [ (e₁)_k k! Γ(e₂ + k) ]
//! ```
//!
//! is finite when `e₂` is a non-positive integer: the leading terms vanish
//! through `1/Γ`, which is how the interbasis closed forms absorb the
//! `1/Γ(e₂)` prefactors that would otherwise be `0·∞`.

use super::gamma::SignedLog;
use crate::error::{Error, Result};

/// Absolute tolerance for "this parameter is an integer".
pub const INTEGER_TOLERANCE: f64 = 1e-9;

/// Longest series we agree to sum.
pub const MAX_TERMS: usize = 500;

/// If `x` is a non-positive integer (within [`INTEGER_TOLERANCE`]), returns `-x`.
pub fn non_positive_integer(x: f64) -> Option<usize> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() <= INTEGER_TOLERANCE {
        Some((-r) as usize)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp3F2Spec {
    pub upper: [f64; 3],
    pub lower: [f64; 2],
}

impl Hyp3F2Spec {
    pub fn new(upper: [f64; 3], lower: [f64; 2]) -> Result<Self> {
        let spec = Hyp3F2Spec { upper, lower };
        let n = spec.termination().ok_or_else(|| {
            Error::InvalidSeries(format!("no upper parameter of {upper:?} is a non-positive integer"))
        })?;
        if n > MAX_TERMS {
            return Err(Error::InvalidSeries(format!("termination length {n} exceeds {MAX_TERMS}")));
        }
        Ok(spec)
    }

    /// Index of the last possibly non-zero term.
    pub fn termination(&self) -> Option<usize> {
        self.upper.iter().filter_map(|&u| non_positive_integer(u)).min()
    }
}

/// `mant · 2^exp2`, renormalized after every product so long Pochhammer
/// chains never overflow and never pay the rounding of a log/exp round trip.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mant: f64,
    exp2: i32,
}

impl Scaled {
    fn new(x: f64) -> Self {
        let (mant, exp2) = libm::frexp(x);
        Scaled { mant, exp2 }
    }

    fn from_signed_log(x: SignedLog) -> Self {
        if x.is_zero() {
            return Scaled { mant: 0.0, exp2: 0 };
        }
        let exp2 = (x.ln_abs / std::f64::consts::LN_2).floor() as i32;
        let mant = x.sign * (x.ln_abs - exp2 as f64 * std::f64::consts::LN_2).exp();
        Scaled { mant, exp2 }
    }

    fn mul(self, x: f64) -> Self {
        let (mant, e) = libm::frexp(self.mant * x);
        Scaled { mant, exp2: self.exp2 + e }
    }

    fn times(self, other: Scaled) -> Self {
        let (mant, e) = libm::frexp(self.mant * other.mant);
        Scaled { mant, exp2: self.exp2 + other.exp2 + e }
    }

    fn is_zero(&self) -> bool {
        self.mant == 0.0
    }
}

/// The regularized sum as a sign/log pair, safe against overflow of the
/// individual terms.
pub fn hyp3f2_regularized_scaled(spec: &Hyp3F2Spec) -> Result<SignedLog> {
    let last = spec
        .termination()
        .ok_or_else(|| Error::InvalidSeries("series does not terminate".into()))?;
    let [u1, u2, u3] = spec.upper;
    let [e1, e2] = spec.lower;

    // 1/Γ(e₂ + k) by upward recursion; zero while e₂ + k sits on a pole.
    let pole = non_positive_integer(e2);
    let mut rgamma = match pole {
        Some(_) => Scaled { mant: 0.0, exp2: 0 },
        None => Scaled::from_signed_log(SignedLog::rgamma(e2)),
    };

    let mut terms = Vec::with_capacity(last + 1);
    let mut coeff = Scaled::new(1.0);
    for k in 0..=last {
        if k > 0 {
            let j = (k - 1) as f64;
            if non_positive_integer(e1 + j) == Some(0) {
                return Err(Error::Divergence { param: e1, term: k });
            }
            coeff = coeff.mul((u1 + j) * (u2 + j) * (u3 + j) / ((e1 + j) * k as f64));
            if coeff.is_zero() {
                break;
            }
            rgamma = match pole {
                Some(p) if k <= p => Scaled { mant: 0.0, exp2: 0 },
                Some(p) if k == p + 1 => Scaled::new(1.0),
                _ => rgamma.mul(1.0 / (e2 + j)),
            };
        }
        terms.push(coeff.times(rgamma));
    }

    let top = terms.iter().filter(|t| !t.is_zero()).map(|t| t.exp2).max();
    let Some(top) = top else {
        return Ok(SignedLog::ZERO);
    };
    // compensated summation in forward order
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for t in &terms {
        let x = libm::ldexp(t.mant, t.exp2 - top) - carry;
        let next = sum + x;
        carry = (next - sum) - x;
        sum = next;
    }
    Ok(SignedLog::from_f64(sum) * SignedLog { ln_abs: top as f64 * std::f64::consts::LN_2, sign: 1.0 })
}

/// `₃F₂(u; e₁, e₂ | 1) / Γ(e₂)` for a terminating series.
pub fn hyp3f2_terminating_regularized(spec: &Hyp3F2Spec) -> Result<f64> {
    Ok(hyp3f2_regularized_scaled(spec)?.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::rgamma;
    use proptest::prelude::*;

    fn poch(x: f64, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (x + j as f64))
    }

    /// Plain Pochhammer products, no regularization tricks: only valid when
    /// no lower parameter is a non-positive integer. Also returns Σ|term|,
    /// which bounds the rounding error of any summation order.
    fn direct_3f2(u: [f64; 3], e: [f64; 2], last: usize) -> (f64, f64) {
        let mut fact = 1.0;
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        for k in 0..=last {
            if k > 0 {
                fact *= k as f64;
            }
            let t = poch(u[0], k) * poch(u[1], k) * poch(u[2], k) / (poch(e[0], k) * poch(e[1], k) * fact);
            sum += t;
            abs_sum += t.abs();
        }
        (sum, abs_sum)
    }

    #[test]
    fn single_term_series() {
        let spec = Hyp3F2Spec::new([0.0, 2.5, -3.2], [1.7, 2.25]).unwrap();
        let got = hyp3f2_terminating_regularized(&spec).unwrap();
        assert!((got - rgamma(2.25)).abs() < 1e-15);
    }

    #[test]
    fn two_term_series() {
        let (u2, u3, e1, e2) = (0.8, -2.3, 1.9, 0.35);
        let spec = Hyp3F2Spec::new([-1.0, u2, u3], [e1, e2]).unwrap();
        let expected = rgamma(e2) - u2 * u3 / (e1 * (e2 * rgamma(e2).recip()));
        let got = hyp3f2_terminating_regularized(&spec).unwrap();
        assert!((got - expected).abs() < 1e-14, "{got} vs {expected}");
    }

    #[test]
    fn interbasis_parameters_with_pole_in_second_lower() {
        // n = 2, m = 0, n1 = 0, n2 = 2, ν = 1.25: e₂ = (n1 - n2 + m)/2 + 1 = 0.
        // Reference from a 40-digit direct Pochhammer sum: -18/13.
        let nu = 1.25;
        let spec = Hyp3F2Spec::new([-2.0, -1.0, nu + 1.0], [-2.0 - nu, 0.0]).unwrap();
        let got = hyp3f2_terminating_regularized(&spec).unwrap();
        assert!((got + 18.0 / 13.0).abs() < 1e-14, "{got}");
    }

    #[test]
    fn divergent_first_lower_parameter() {
        let spec = Hyp3F2Spec::new([-3.0, 1.5, 2.0], [-1.0, 0.7]).unwrap();
        assert!(matches!(
            hyp3f2_terminating_regularized(&spec),
            Err(Error::Divergence { term: 2, .. })
        ));
        // -N upper cuts the series before the pole is reached
        let spec = Hyp3F2Spec::new([-1.0, 1.5, 2.0], [-1.0, 0.7]).unwrap();
        assert!(hyp3f2_terminating_regularized(&spec).is_ok());
    }

    #[test]
    fn non_terminating_is_rejected() {
        assert!(matches!(
            Hyp3F2Spec::new([0.5, 1.5, 2.0], [1.0, 1.0]),
            Err(Error::InvalidSeries(_))
        ));
        assert!(Hyp3F2Spec::new([-501.0, 1.0, 1.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn huge_terms_do_not_overflow() {
        let spec = Hyp3F2Spec::new([-400.0, 350.5, 420.25], [1.5, 0.75]).unwrap();
        let scaled = hyp3f2_regularized_scaled(&spec).unwrap();
        assert!(scaled.ln_abs.is_finite() && scaled.ln_abs > 700.0);
    }

    proptest! {
        #[test]
        fn matches_direct_sum(
            n in 0usize..12, u2 in -4.0f64..4.0, u3 in -4.0f64..4.0,
            e1 in 0.3f64..5.0, e2 in 0.3f64..5.0
        ) {
            let spec = Hyp3F2Spec::new([-(n as f64), u2, u3], [e1, e2]).unwrap();
            let got = hyp3f2_terminating_regularized(&spec).unwrap();
            let (sum, abs_sum) = direct_3f2([-(n as f64), u2, u3], [e1, e2], n);
            let expected = sum * rgamma(e2);
            let bound = 1e-12 * expected.abs() + 1e-14 * abs_sum * rgamma(e2).abs();
            prop_assert!((got - expected).abs() <= bound, "{} vs {}", got, expected);
        }

        #[test]
        fn pfaff_saalschutz(n in 0usize..15, a in -3.0f64..3.0, b in -3.0f64..3.0, c in 0.2f64..4.0) {
            // ₃F₂(-N, a, b; c, 1+a+b-c-N | 1) = (c-a)_N (c-b)_N / ((c)_N (c-a-b)_N)
            let e2 = 1.0 + a + b - c - n as f64;
            prop_assume!(non_positive_integer(e2).is_none() && (e2 - e2.round()).abs() > 1e-3);
            prop_assume!((c - a - b - (c - a - b).round()).abs() > 1e-3);
            let spec = Hyp3F2Spec::new([-(n as f64), a, b], [c, e2]).unwrap();
            let got = hyp3f2_terminating_regularized(&spec).unwrap() / rgamma(e2);
            let expected = poch(c - a, n) * poch(c - b, n) / (poch(c, n) * poch(c - a - b, n));
            let (_, abs_sum) = direct_3f2([-(n as f64), a, b], [c, e2], n);
            let bound = 1e-12 * expected.abs() + 1e-14 * abs_sum;
            prop_assert!((got - expected).abs() <= bound, "{} vs {}", got, expected);
        }
    }
}
