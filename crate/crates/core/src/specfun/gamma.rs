//! Log-gamma with sign tracking, and a small signed log-space number used
//! wherever long products of gamma factors would overflow.

use crate::error::{Error, Result};

/// Distance from a non-positive integer below which `x` counts as a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Returns `true` when `x` is within [`POLE_TOLERANCE`] of 0, -1, -2, ...
pub fn is_gamma_pole(x: f64) -> bool {
    x <= POLE_TOLERANCE && (x - x.round()).abs() <= POLE_TOLERANCE
}

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
///
/// Negative non-integer arguments go through the reflection formula inside
/// `lgamma_r`, so the sign alternates between consecutive poles.
pub fn log_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("log_gamma of {x}")));
    }
    if is_gamma_pole(x) {
        return Err(Error::Pole(x));
    }
    let (ln_abs, sign) = libm::lgamma_r(x);
    Ok((ln_abs, if sign < 0 { -1.0 } else { 1.0 }))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    libm::lgamma_r(x).0
}

/// `1/Γ(x)`, which is entire: exactly zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    match log_gamma_signed(x) {
        Ok((ln_abs, sign)) => sign * (-ln_abs).exp(),
        Err(_) => 0.0,
    }
}

/// A real number stored as `sign · exp(ln_abs)`. Zero is `sign == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub ln_abs: f64,
    pub sign: f64,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog { ln_abs: 0.0, sign: 1.0 };
    pub const ZERO: SignedLog = SignedLog { ln_abs: f64::NEG_INFINITY, sign: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog { ln_abs: x.abs().ln(), sign: x.signum() }
        }
    }

    /// `Γ(x)`; errors at the poles.
    pub fn gamma(x: f64) -> Result<Self> {
        let (ln_abs, sign) = log_gamma_signed(x)?;
        Ok(SignedLog { ln_abs, sign })
    }

    /// `x! = Γ(x + 1)` continued to real `x`.
    pub fn factorial(x: f64) -> Result<Self> {
        Self::gamma(x + 1.0)
    }

    /// `1/Γ(x)`, zero at the poles.
    pub fn rgamma(x: f64) -> Self {
        match log_gamma_signed(x) {
            Ok((ln_abs, sign)) => SignedLog { ln_abs: -ln_abs, sign },
            Err(_) => Self::ZERO,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        SignedLog { ln_abs: -self.ln_abs, sign: self.sign }
    }

    /// Principal square root; the caller guarantees a non-negative value.
    pub fn sqrt(self) -> Self {
        debug_assert!(self.sign >= 0.0, "square root of a negative SignedLog");
        if self.is_zero() {
            return Self::ZERO;
        }
        SignedLog { ln_abs: 0.5 * self.ln_abs, sign: 1.0 }
    }

    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

impl std::ops::Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.is_zero() || rhs.is_zero() {
            return SignedLog::ZERO;
        }
        SignedLog { ln_abs: self.ln_abs + rhs.ln_abs, sign: self.sign * rhs.sign }
    }
}

impl std::ops::Div for SignedLog {
    type Output = SignedLog;

    fn div(self, rhs: SignedLog) -> SignedLog {
        self * rhs.recip()
    }
}

impl std::ops::MulAssign for SignedLog {
    fn mul_assign(&mut self, rhs: SignedLog) {
        *self = *self * rhs;
    }
}
