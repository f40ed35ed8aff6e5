//! Model parameters, the spectrum, quantum-number bookkeeping and the
//! normalized eigenfunctions of the three separable bases.
//!
//! All three bases share the inner product `∫ conj(f) g sinθ dθ dφ` over the
//! upper hemisphere; the radius enters only through `ν` and the energy scale.

use std::f64::consts::{FRAC_PI_2, LN_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convert, AnglePair, SpherePoint, SphereSystem};
use crate::specfun::{gegenbauer_poly, jacobi_poly, ln_gamma};

/// Oscillator strength `α`, sphere radius `R` and the derived index
/// `ν = √(α²R⁴ + ¼)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    alpha: f64,
    radius: f64,
    nu: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, radius: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        let c = alpha * radius * radius;
        Ok(ModelParams { alpha, radius, nu: (c * c + 0.25).sqrt() })
    }

    /// Parameters with the given index on a sphere of radius `radius`.
    pub fn from_nu(nu: f64, radius: f64) -> Result<Self> {
        if !(nu > 0.5 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must exceed 1/2, got {nu}")));
        }
        let alpha = ((nu - 0.5) * (nu + 0.5)).sqrt() / (radius * radius);
        ModelParams::new(alpha, radius).map(|p| ModelParams { nu, ..p })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `α²R⁴`, the dimensionless strength of the potential.
    pub fn coupling(&self) -> f64 {
        let c = self.alpha * self.radius * self.radius;
        c * c
    }

    pub fn energy(&self, n: u32) -> f64 {
        energy(n, self)
    }

    /// `2R²E + α²R⁴ + ¼`.
    pub fn epsilon(&self, n: u32) -> f64 {
        2.0 * self.radius * self.radius * self.energy(n) + self.coupling() + 0.25
    }
}

/// `E_n = [(n+1)(n+2) + (2ν−1)(n+1)] / 2R²`.
pub fn energy(n: u32, params: &ModelParams) -> f64 {
    let k = n as f64 + 1.0;
    (k * (k + 1.0) + (2.0 * params.nu - 1.0) * k) / (2.0 * params.radius * params.radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisTag {
    /// Separated in `(θ, φ)`: quantum numbers `(n_r, m)`.
    B1,
    /// Separated in `(θ', φ')`: quantum numbers `(n1, n2)`.
    B2,
    /// Separated in `(θ'', φ'')`: quantum numbers `(l1, l2)`.
    B3,
}

impl BasisTag {
    pub const ALL: [BasisTag; 3] = [BasisTag::B1, BasisTag::B2, BasisTag::B3];

    pub fn native_system(self) -> SphereSystem {
        match self {
            BasisTag::B1 => SphereSystem::S1,
            BasisTag::B2 => SphereSystem::S2,
            BasisTag::B3 => SphereSystem::S3,
        }
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasisTag::B1 => "b1",
            BasisTag::B2 => "b2",
            BasisTag::B3 => "b3",
        };
        f.write_str(s)
    }
}

impl FromStr for BasisTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "b1" | "1" => Ok(BasisTag::B1),
            "b2" | "2" => Ok(BasisTag::B2),
            "b3" | "3" => Ok(BasisTag::B3),
            other => Err(Error::InvalidParameter(format!("unknown basis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "lowercase")]
pub enum BasisState {
    B1 { n_r: u32, m: i32 },
    B2 { n1: u32, n2: u32 },
    B3 { l1: u32, l2: u32 },
}

impl BasisState {
    /// The `B1` state of principal number `n` and azimuthal number `m`.
    pub fn b1_from_level(n: u32, m: i32) -> Result<Self> {
        let am = m.unsigned_abs();
        if am > n || !(n - am).is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("no b1 state with n={n}, m={m}")));
        }
        Ok(BasisState::B1 { n_r: (n - am) / 2, m })
    }

    pub fn tag(&self) -> BasisTag {
        match self {
            BasisState::B1 { .. } => BasisTag::B1,
            BasisState::B2 { .. } => BasisTag::B2,
            BasisState::B3 { .. } => BasisTag::B3,
        }
    }

    /// Principal quantum number.
    pub fn principal(&self) -> u32 {
        match *self {
            BasisState::B1 { n_r, m } => 2 * n_r + m.unsigned_abs(),
            BasisState::B2 { n1, n2 } => n1 + n2,
            BasisState::B3 { l1, l2 } => l1 + l2,
        }
    }

    /// Separation constant of the second symmetry operator: `A = n1+ν+½` for
    /// `B2`, `B = l1+ν+½` for `B3`, `|m|` for `B1`.
    pub fn separation_constant(&self, nu: f64) -> f64 {
        match *self {
            BasisState::B1 { m, .. } => m.unsigned_abs() as f64,
            BasisState::B2 { n1, .. } => n1 as f64 + nu + 0.5,
            BasisState::B3 { l1, .. } => l1 as f64 + nu + 0.5,
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BasisState::B1 { n_r, m } => write!(f, "b1(n_r={n_r},m={m})"),
            BasisState::B2 { n1, n2 } => write!(f, "b2(n1={n1},n2={n2})"),
            BasisState::B3 { l1, l2 } => write!(f, "b3(l1={l1},l2={l2})"),
        }
    }
}

/// Accepts `b1:0,2` as well as the `Display` form `b1(n_r=0,m=2)`.
impl FromStr for BasisState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse basis state {s:?}"));
        let s = s.trim();
        let split = s.find([':', '(']).ok_or_else(bad)?;
        let tag: BasisTag = s[..split].parse()?;
        let body = s[split + 1..].trim_end_matches(')');
        let parts: Vec<&str> = body.split(',').map(|p| p.rsplit('=').next().unwrap_or(p).trim()).collect();
        let [a, b] = parts.as_slice() else { return Err(bad()) };
        let unsigned = |x: &str| x.parse::<u32>().map_err(|_| bad());
        Ok(match tag {
            BasisTag::B1 => BasisState::B1 { n_r: unsigned(a)?, m: b.parse().map_err(|_| bad())? },
            BasisTag::B2 => BasisState::B2 { n1: unsigned(a)?, n2: unsigned(b)? },
            BasisTag::B3 => BasisState::B3 { l1: unsigned(a)?, l2: unsigned(b)? },
        })
    }
}

/// Every state of level `n`: `B1` by ascending `m`, `B2` by ascending `n1`,
/// `B3` by ascending `l1`.
pub fn enumerate_level(n: u32, tag: BasisTag) -> Vec<BasisState> {
    match tag {
        BasisTag::B1 => (0..=n)
            .map(|k| {
                let m = 2 * k as i32 - n as i32;
                BasisState::B1 { n_r: (n - m.unsigned_abs()) / 2, m }
            })
            .collect(),
        BasisTag::B2 => (0..=n).map(|n1| BasisState::B2 { n1, n2: n - n1 }).collect(),
        BasisTag::B3 => (0..=n).map(|l1| BasisState::B3 { l1, l2: n - l1 }).collect(),
    }
}

fn z_norm(n_r: u32, am: u32, nu: f64) -> f64 {
    let (nr, am) = (n_r as f64, am as f64);
    let ln = (2.0 * (2.0 * nr + am + nu + 1.0)).ln() + ln_gamma(nr + 1.0) + ln_gamma(nr + am + nu + 1.0)
        - ln_gamma(nr + am + 1.0)
        - ln_gamma(nr + nu + 1.0);
    (0.5 * ln).exp()
}

fn s_norm(n: u32, a: f64) -> f64 {
    let lambda = a + 0.5;
    let nf = n as f64;
    let ln = ln_gamma(nf + 1.0) + (nf + lambda).ln() + 2.0 * ln_gamma(lambda)
        - PI.ln()
        - (1.0 - 2.0 * lambda) * LN_2
        - ln_gamma(nf + 2.0 * lambda);
    (0.5 * ln).exp()
}

/// Normalized polar factor of a `B1` state on `θ ∈ (0, π/2)`:
/// `N (sinθ)^{|m|+½} (cosθ)^{ν+½} P_{n_r}^{(|m|,ν)}(cos2θ)`, with
/// `∫₀^{π/2} Z² dθ = 1`.
pub fn z_theta(n_r: u32, m: i32, nu: f64, theta: f64) -> f64 {
    let am = m.unsigned_abs();
    z_norm(n_r, am, nu) * z_shape(n_r, am, nu, theta)
}

fn z_shape(n_r: u32, am: u32, nu: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    s.powf(am as f64 + 0.5) * c.powf(nu + 0.5) * jacobi_poly(n_r, am as f64, nu, (2.0 * theta).cos())
}

/// `N (sinφ)^{½+a} C_n^{a+½}(cosφ)` on `(0, π)`, normalized so that
/// `∫₀^π S² dφ = 1`.
pub fn s_func(n: u32, a: f64, phi: f64) -> f64 {
    s_norm(n, a) * s_shape(n, a, phi)
}

fn s_shape(n: u32, a: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    s.powf(0.5 + a) * gegenbauer_poly(n, a + 0.5, c)
}

/// A basis state with its normalization constants resolved, ready for
/// repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Wavefunction {
    state: BasisState,
    nu: f64,
    norms: [f64; 2],
}

impl Wavefunction {
    pub fn new(state: BasisState, nu: f64) -> Result<Self> {
        if !(nu >= 0.5 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be at least 1/2, got {nu}")));
        }
        let norms = match state {
            BasisState::B1 { n_r, m } => [z_norm(n_r, m.unsigned_abs(), nu) / TAU.sqrt(), 1.0],
            BasisState::B2 { n1, n2 } => [s_norm(n2, n1 as f64 + nu + 0.5), s_norm(n1, nu)],
            BasisState::B3 { l1, l2 } => [s_norm(l1, nu), s_norm(l2, l1 as f64 + nu + 0.5)],
        };
        Ok(Wavefunction { state, nu, norms })
    }

    pub fn state(&self) -> BasisState {
        self.state
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Value at a point given in the state's own chart.
    fn eval_native(&self, p: &AnglePair) -> Complex64 {
        let (a, b) = (p.first(), p.second());
        let nu = self.nu;
        match self.state {
            BasisState::B1 { n_r, m } => {
                let radial = self.norms[0] * z_shape(n_r, m.unsigned_abs(), nu, a) / a.sin().sqrt();
                Complex64::from_polar(radial, m as f64 * b)
            }
            BasisState::B2 { n1, n2 } => {
                let big_a = n1 as f64 + nu + 0.5;
                let v = self.norms[0] * s_shape(n2, big_a, a) * self.norms[1] * s_shape(n1, nu, b) / a.sin().sqrt();
                Complex64::new(v, 0.0)
            }
            BasisState::B3 { l1, l2 } => {
                let big_b = l1 as f64 + nu + 0.5;
                let v = self.norms[0] * s_shape(l1, nu, b + FRAC_PI_2) * self.norms[1] * s_shape(l2, big_b, a)
                    / a.sin().sqrt();
                Complex64::new(v, 0.0)
            }
        }
    }

    /// Value at a point in any chart, converted to the native one first.
    pub fn eval(&self, p: &AnglePair) -> Result<Complex64> {
        let native = self.state.tag().native_system();
        if p.system() == native {
            return Ok(self.eval_native(p));
        }
        Ok(self.eval_native(&convert(*p, native)?))
    }

    pub fn eval_point(&self, p: &SpherePoint) -> Result<Complex64> {
        Ok(self.eval_native(&p.in_system(self.state.tag().native_system())?))
    }

    /// Value at `(θ, φ)` with the azimuth taken modulo `2π`.
    pub fn eval_s1(&self, theta: f64, phi: f64) -> Result<Complex64> {
        self.eval(&AnglePair::s1_wrapped(theta, phi)?)
    }
}

/// `Ψ_state(p)` for a point in any chart or in embedded form.
pub fn eval_wavefunction(state: BasisState, params: &ModelParams, p: impl Into<SpherePoint>) -> Result<Complex64> {
    Wavefunction::new(state, params.nu)?.eval_point(&p.into())
}
