//! Expansion coefficients between the three bases of one energy level.
//!
//! Every coefficient is available through two closed routes (a terminating
//! ₃F₂ and an analytically continued Clebsch–Gordan coefficient) and one
//! numerical route (hemisphere quadrature of the overlap). Matrices follow a
//! single convention: row `i` lists the expansion of the `i`-th `from` state
//! over the `to` states, so `M[i][j] = ⟨Ψ_to(j) | Ψ_from(i)⟩`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{enumerate_level, BasisState, BasisTag, ModelParams, Wavefunction};
use crate::error::{Error, Result};
use crate::geometry::AnglePair;
use crate::quadrature::{check_convergence, integrate_hemisphere, HemisphereGrid, HemisphereIntegral, DEFAULT_ORDER};
use crate::specfun::{cg_continued, hyp3f2_regularized_scaled, CGArgs, Hyp3F2Spec, SignedLog};

/// Which way `(−1)^x` is continued to non-integer `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseBranch {
    /// `(−1)^x = e^{+iπx}`
    Positive,
    /// `(−1)^x = e^{−iπx}`
    Negative,
}

/// The branch that matches the quadrature overlaps. It is decided by the
/// entry `n1 = 1, n2 = 0, m = 1`, whose exponent is `−½`.
pub const PHASE_BRANCH: PhaseBranch = PhaseBranch::Positive;

impl PhaseBranch {
    pub fn flipped(self) -> Self {
        match self {
            PhaseBranch::Positive => PhaseBranch::Negative,
            PhaseBranch::Negative => PhaseBranch::Positive,
        }
    }

    /// `(−1)^x` on this branch; exact when `2x` is an integer.
    pub fn pow(self, x: f64) -> Complex64 {
        let twice = 2.0 * x;
        let z = if (twice - twice.round()).abs() < 1e-12 {
            match (twice.round() as i64).rem_euclid(4) {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            }
        } else {
            Complex64::from_polar(1.0, PI * x)
        };
        match self {
            PhaseBranch::Positive => z,
            PhaseBranch::Negative => z.conj(),
        }
    }
}

impl fmt::Display for PhaseBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseBranch::Positive => "exp(+i*pi*x)",
            PhaseBranch::Negative => "exp(-i*pi*x)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    ClosedForm,
    Cg,
    Numeric,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::ClosedForm, Route::Cg, Route::Numeric];
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::ClosedForm => "closed",
            Route::Cg => "cg",
            Route::Numeric => "numeric",
        })
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "closed" | "closed_form" | "3f2" => Ok(Route::ClosedForm),
            "cg" => Ok(Route::Cg),
            "numeric" | "quadrature" => Ok(Route::Numeric),
            other => Err(Error::InvalidParameter(format!("unknown route {other:?}"))),
        }
    }
}

/// Largest level accepted by the closed routes.
pub const MAX_LEVEL_CLOSED: u32 = 12;
/// Largest level accepted by the quadrature route.
pub const MAX_LEVEL_NUMERIC: u32 = 8;

fn parity_allowed(n: u32, m: i32) -> bool {
    let am = m.unsigned_abs();
    am <= n && (n - am).is_multiple_of(2)
}

fn ln_fact(x: f64) -> Result<SignedLog> {
    SignedLog::factorial(x)
}

/// `∫₀^{2π} (sinφ)^k C_n^λ(cosφ) e^{−imφ} dφ` in closed form.
pub fn gegenbauer_fourier_integral(k: u32, n: u32, lambda: f64, m: i32) -> Result<Complex64> {
    gegenbauer_fourier_integral_branch(k, n, lambda, m, PHASE_BRANCH)
}

pub fn gegenbauer_fourier_integral_branch(
    k: u32,
    n: u32,
    lambda: f64,
    m: i32,
    branch: PhaseBranch,
) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let total = (n + k) as i64;
    let m64 = m as i64;
    if m64.abs() > total || (total - m64) % 2 != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (kf, nf, mf) = (k as f64, n as f64, m as f64);
    let half_up = (nf + kf - mf) / 2.0;
    let pref = SignedLog::from_f64(2f64.powi(1 - k as i32) * PI)
        * SignedLog::gamma(lambda + nf)?
        * ln_fact(kf)?
        / (ln_fact(nf)? * SignedLog::gamma(lambda)?)
        * SignedLog::rgamma(half_up + 1.0);
    if pref.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let spec = Hyp3F2Spec::new([-nf, -half_up, lambda], [-lambda - nf + 1.0, (kf - nf + mf) / 2.0 + 1.0])?;
    let value = (pref * hyp3f2_regularized_scaled(&spec)?).to_f64();
    Ok(branch.pow((nf - mf) / 2.0) * value)
}

/// Real amplitude of `W^m_{n1 n2}` from the terminating ₃F₂.
fn amplitude_3f2(n1: u32, n2: u32, m: i32, nu: f64) -> Result<f64> {
    let n = n1 + n2;
    if !parity_allowed(n, m) {
        return Ok(0.0);
    }
    let (n1f, n2f, nf, mf) = (n1 as f64, n2 as f64, n as f64, m as f64);
    let minus = (nf - mf) / 2.0;
    let plus = (nf + mf) / 2.0;
    let radicand = SignedLog::from_f64(2.0 * (n1f + nu + 0.5))
        * ln_fact(n1f)?
        * SignedLog::gamma(n1f + 2.0 * nu + 1.0)?
        * ln_fact(plus)?
        / (ln_fact(n2f)?
            * SignedLog::gamma(nf + n1f + 2.0 * nu + 2.0)?
            * SignedLog::gamma(minus + nu + 1.0)?
            * SignedLog::gamma(plus + nu + 1.0)?
            * ln_fact(minus)?);
    let pref = radicand.sqrt() * SignedLog::gamma(nf + nu + 1.0)?;
    let spec = Hyp3F2Spec::new([-n2f, -minus, n1f + nu + 1.0], [-nf - nu, (n1f - n2f + mf) / 2.0 + 1.0])?;
    Ok((pref * hyp3f2_regularized_scaled(&spec)?).to_f64())
}

fn level_coupling(n1: u32, n2: u32, m: i32, nu: f64) -> CGArgs {
    let n = (n1 + n2) as f64;
    let half = (n + nu) / 2.0;
    CGArgs::new(half, (nu + m as f64) / 2.0, half, (nu - m as f64) / 2.0, n1 as f64 + nu, nu)
}

/// Real amplitude of `W^m_{n1 n2}` from the continued Clebsch–Gordan
/// coefficient.
fn amplitude_cg(n1: u32, n2: u32, m: i32, nu: f64) -> Result<f64> {
    if !parity_allowed(n1 + n2, m) {
        return Ok(0.0);
    }
    cg_continued(level_coupling(n1, n2, m, nu))
}

fn amplitude(route: Route, n1: u32, n2: u32, m: i32, nu: f64) -> Result<f64> {
    match route {
        Route::ClosedForm => amplitude_3f2(n1, n2, m, nu),
        Route::Cg => amplitude_cg(n1, n2, m, nu),
        Route::Numeric => Err(Error::InvalidParameter("the numeric route has no closed amplitude".into())),
    }
}

fn w_phase(n1: u32, m: i32, branch: PhaseBranch) -> Complex64 {
    branch.pow((m.unsigned_abs() as f64 - m as f64 - n1 as f64) / 2.0)
}

fn w_closed(route: Route, n1: u32, n2: u32, m: i32, nu: f64, branch: PhaseBranch) -> Result<Complex64> {
    if !parity_allowed(n1 + n2, m) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(w_phase(n1, m, branch) * amplitude(route, n1, n2, m, nu)?)
}

/// Coefficient of `Ψ_{n m}` in the expansion of the `B2` state `Ψ_{n1 n2}`,
/// from the terminating ₃F₂.
pub fn w_coeff_3f2(n1: u32, n2: u32, m: i32, nu: f64) -> Result<Complex64> {
    w_coeff_3f2_branch(n1, n2, m, nu, PHASE_BRANCH)
}

pub fn w_coeff_3f2_branch(n1: u32, n2: u32, m: i32, nu: f64, branch: PhaseBranch) -> Result<Complex64> {
    w_closed(Route::ClosedForm, n1, n2, m, nu, branch)
}

/// Same coefficient as [`w_coeff_3f2`], through the continued Clebsch–Gordan
/// coefficient.
pub fn w_coeff_cg(n1: u32, n2: u32, m: i32, nu: f64) -> Result<Complex64> {
    w_coeff_cg_branch(n1, n2, m, nu, PHASE_BRANCH)
}

pub fn w_coeff_cg_branch(n1: u32, n2: u32, m: i32, nu: f64, branch: PhaseBranch) -> Result<Complex64> {
    w_closed(Route::Cg, n1, n2, m, nu, branch)
}

/// Coefficient of the `B2` state `Ψ_{n1, n−n1}` in the expansion of `Ψ_{n m}`.
pub fn w_inverse(n: u32, m: i32, n1: u32, nu: f64) -> Result<Complex64> {
    w_inverse_branch(n, m, n1, nu, PHASE_BRANCH)
}

pub fn w_inverse_branch(n: u32, m: i32, n1: u32, nu: f64, branch: PhaseBranch) -> Result<Complex64> {
    if n1 > n {
        return Err(Error::InvalidParameter(format!("n1 = {n1} exceeds n = {n}")));
    }
    if !parity_allowed(n, m) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let phase = branch.pow((m.unsigned_abs() as f64 - m as f64 + n1 as f64) / 2.0);
    Ok(phase * amplitude_cg(n1, n - n1, m, nu)?)
}

fn basis3_phase(n: u32, m: i32, branch: PhaseBranch) -> Complex64 {
    branch.pow(n as f64 + m as f64 / 2.0)
}

/// Coefficient of `Ψ_{n m}` in the expansion of the `B3` state `Ψ_{l1 l2}`.
pub fn w_basis3(l1: u32, l2: u32, m: i32, nu: f64) -> Result<Complex64> {
    w_basis3_branch(l1, l2, m, nu, PHASE_BRANCH)
}

pub fn w_basis3_branch(l1: u32, l2: u32, m: i32, nu: f64, branch: PhaseBranch) -> Result<Complex64> {
    w_basis3_route(Route::ClosedForm, l1, l2, m, nu, branch)
}

fn w_basis3_route(route: Route, l1: u32, l2: u32, m: i32, nu: f64, branch: PhaseBranch) -> Result<Complex64> {
    let w = w_closed(route, l1, l2, m, nu, branch)?;
    Ok(basis3_phase(l1 + l2, m, branch) * w)
}

/// Coefficient of the `B2` state `Ψ_{n1, n−n1}` in the expansion of the `B3`
/// state `Ψ_{l1 l2}`, as a bilinear sum of Clebsch–Gordan coefficients over
/// the allowed `m`.
pub fn u_coeff(l1: u32, l2: u32, n1: u32, nu: f64) -> Result<Complex64> {
    u_coeff_branch(l1, l2, n1, nu, PHASE_BRANCH)
}

pub fn u_coeff_branch(l1: u32, l2: u32, n1: u32, nu: f64, branch: PhaseBranch) -> Result<Complex64> {
    u_coeff_route(Route::Cg, l1, l2, n1, nu, branch)
}

fn u_coeff_route(route: Route, l1: u32, l2: u32, n1: u32, nu: f64, branch: PhaseBranch) -> Result<Complex64> {
    let n = l1 + l2;
    if n1 > n {
        return Err(Error::InvalidParameter(format!("n1 = {n1} exceeds l1 + l2 = {n}")));
    }
    let n2 = n - n1;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        let m = 2 * k as i32 - n as i32;
        let term = amplitude(route, l1, l2, m, nu)? * amplitude(route, n1, n2, m, nu)?;
        sum += branch.pow(m as f64 / 2.0) * term;
    }
    Ok(branch.pow(l2 as f64 + (l1 + n1) as f64 / 2.0) * sum)
}

/// `⟨Ψ_a | Ψ_b⟩` by hemisphere quadrature at `order` and `2·order`.
pub fn overlap_numeric(a: BasisState, b: BasisState, params: &ModelParams, order: usize) -> Result<HemisphereIntegral> {
    let wa = Wavefunction::new(a, params.nu())?;
    let wb = Wavefunction::new(b, params.nu())?;
    integrate_hemisphere(|p| Ok(wa.eval(p)?.conj() * wb.eval(p)?), order)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientOptions {
    pub branch: PhaseBranch,
    /// Coarse per-axis order of the numeric route.
    pub quad_order: usize,
}

impl Default for CoefficientOptions {
    fn default() -> Self {
        CoefficientOptions { branch: PHASE_BRANCH, quad_order: DEFAULT_ORDER }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub n: u32,
    pub from: BasisTag,
    pub to: BasisTag,
    pub route: Route,
    pub branch: PhaseBranch,
    pub nu: f64,
    /// `from` states in canonical order.
    pub rows: Vec<BasisState>,
    /// `to` states in canonical order.
    pub cols: Vec<BasisState>,
    /// Largest `|fine − coarse|` over the entries (numeric route only).
    pub error_estimate: Option<f64>,
    entries: Vec<Complex64>,
}

impl CoefficientMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim() + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let d = self.dim();
        &self.entries[i * d..(i + 1) * d]
    }

    fn square_product(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += a[i * d + k] * b[k * d + j];
                }
                out[i * d + j] = acc;
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> CoefficientMatrix {
        let d = self.dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.get(i, j).conj();
            }
        }
        CoefficientMatrix {
            from: self.to,
            to: self.from,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            entries,
            ..self.clone()
        }
    }

    /// `‖M M† − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let adj = self.conj_transpose();
        let prod = Self::square_product(&self.entries, &adj.entries, d);
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[i * d + j] - target).norm());
            }
        }
        worst
    }

    /// The expansion of `self.from` over `other.to` obtained by chaining
    /// `self` and `other`.
    pub fn then(&self, other: &CoefficientMatrix) -> Result<CoefficientMatrix> {
        if self.to != other.from || self.n != other.n {
            return Err(Error::InvalidParameter(format!(
                "cannot chain {}->{} (n={}) with {}->{} (n={})",
                self.from, self.to, self.n, other.from, other.to, other.n
            )));
        }
        let entries = Self::square_product(&self.entries, &other.entries, self.dim());
        Ok(CoefficientMatrix {
            to: other.to,
            cols: other.cols.clone(),
            entries,
            error_estimate: None,
            ..self.clone()
        })
    }

    /// Largest entrywise `|a − b|`; the matrices must describe the same map.
    pub fn max_abs_diff(&self, other: &CoefficientMatrix) -> Result<f64> {
        if self.from != other.from || self.to != other.to || self.n != other.n {
            return Err(Error::InvalidParameter("matrices describe different expansions".into()));
        }
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `Σ_j M[i][j] Ψ_to(j)(p)`, which reproduces `Ψ_from(i)(p)`.
    pub fn synthesize(&self, i: usize, p: &AnglePair) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &state) in self.cols.iter().enumerate() {
            let c = self.get(i, j);
            if c != Complex64::new(0.0, 0.0) {
                acc += c * Wavefunction::new(state, self.nu)?.eval(p)?;
            }
        }
        Ok(acc)
    }
}

/// Coefficient `⟨Ψ_to | Ψ_from⟩` for two states of one level from a closed
/// route.
fn closed_entry(route: Route, from: BasisState, to: BasisState, nu: f64, branch: PhaseBranch) -> Result<Complex64> {
    use BasisState::*;
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    Ok(match (from, to) {
        (a, b) if a.tag() == b.tag() => {
            if a == b {
                one
            } else {
                z
            }
        }
        (B2 { n1, n2 }, B1 { m, .. }) => w_closed(route, n1, n2, m, nu, branch)?,
        (B1 { m, .. }, B2 { n1, n2 }) => w_closed(route, n1, n2, m, nu, branch)?.conj(),
        (B3 { l1, l2 }, B1 { m, .. }) => w_basis3_route(route, l1, l2, m, nu, branch)?,
        (B1 { m, .. }, B3 { l1, l2 }) => w_basis3_route(route, l1, l2, m, nu, branch)?.conj(),
        (B3 { l1, l2 }, B2 { n1, .. }) => u_coeff_route(route, l1, l2, n1, nu, branch)?,
        (B2 { n1, .. }, B3 { l1, l2 }) => u_coeff_route(route, l1, l2, n1, nu, branch)?.conj(),
        _ => unreachable!("every tag pair is covered"),
    })
}

/// The full expansion matrix of level `n` from basis `from` into basis `to`.
pub fn coefficient_matrix(n: u32, from: BasisTag, to: BasisTag, nu: f64, route: Route) -> Result<CoefficientMatrix> {
    coefficient_matrix_with(n, from, to, nu, route, &CoefficientOptions::default())
}

pub fn coefficient_matrix_with(
    n: u32,
    from: BasisTag,
    to: BasisTag,
    nu: f64,
    route: Route,
    opts: &CoefficientOptions,
) -> Result<CoefficientMatrix> {
    let limit = if route == Route::Numeric { MAX_LEVEL_NUMERIC } else { MAX_LEVEL_CLOSED };
    if n > limit {
        return Err(Error::InvalidParameter(format!("level {n} exceeds the {route} route limit {limit}")));
    }
    if !(nu >= 0.5 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be at least 1/2, got {nu}")));
    }
    let rows = enumerate_level(n, from);
    let cols = enumerate_level(n, to);
    let (entries, error_estimate) = match route {
        Route::Numeric => {
            let (e, err) = numeric_entries(&rows, &cols, nu, opts.quad_order)?;
            (e, Some(err))
        }
        _ => {
            let mut e = Vec::with_capacity(rows.len() * cols.len());
            for &r in &rows {
                for &c in &cols {
                    e.push(closed_entry(route, r, c, nu, opts.branch)?);
                }
            }
            (e, None)
        }
    };
    Ok(CoefficientMatrix { n, from, to, route, branch: opts.branch, nu, rows, cols, error_estimate, entries })
}

fn tabulate_level(grid: &HemisphereGrid, states: &[BasisState], nu: f64) -> Result<Vec<Vec<Complex64>>> {
    states
        .iter()
        .map(|&s| {
            let w = Wavefunction::new(s, nu)?;
            grid.tabulate(|p| w.eval(p))
        })
        .collect()
}

fn numeric_entries(
    rows: &[BasisState],
    cols: &[BasisState],
    nu: f64,
    order: usize,
) -> Result<(Vec<Complex64>, f64)> {
    let mut estimates = Vec::with_capacity(2);
    for q in [order, 2 * order] {
        let grid = HemisphereGrid::new(q)?;
        let from = tabulate_level(&grid, rows, nu)?;
        let to = tabulate_level(&grid, cols, nu)?;
        let mut e = Vec::with_capacity(rows.len() * cols.len());
        for f in &from {
            for t in &to {
                e.push(grid.inner_product(t, f));
            }
        }
        estimates.push(e);
    }
    let mut worst = 0.0f64;
    let mut out = Vec::with_capacity(estimates[1].len());
    for (&coarse, &fine) in estimates[0].iter().zip(&estimates[1]) {
        let checked = check_convergence(coarse, fine, order)?;
        worst = worst.max(checked.error_estimate);
        out.push(checked.value);
    }
    Ok((out, worst))
}
