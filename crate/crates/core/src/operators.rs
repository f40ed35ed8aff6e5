//! Finite-difference realizations of the Hamiltonian, the angular momentum
//! components, the separation operators and the cubic-algebra generators,
//! all acting on fields given in `(θ, φ)`.
//!
//! Angular momentum uses `L_i = −ε_{ikj} s_k ∂_j`, which in `(θ, φ)` reads
//!
//! ```text
//! L1 =  sinφ ∂θ + cotθ cosφ ∂φ
//! L2 = −cosφ ∂θ + cotθ sinφ ∂φ
//! L3 = −∂φ
//! ```
//!
//! Products of first-order operators are expanded exactly into first and
//! second partials, so each primitive operator costs one stencil. Operator
//! polynomials in the algebra checks are applied by nesting.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisState, ModelParams, Wavefunction};
use crate::error::{Error, Result};
use crate::geometry::{convert, AnglePair, SphereSystem};
use crate::quadrature::HemisphereGrid;

pub const MIN_STEP: f64 = 1e-5;
pub const MAX_STEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Central2,
    Central4,
}

impl Scheme {
    fn order(self) -> i32 {
        match self {
            Scheme::Central2 => 2,
            Scheme::Central4 => 4,
        }
    }

    /// Offsets (in units of h) and weights of the first-derivative stencil.
    fn first(self) -> &'static [(f64, f64)] {
        match self {
            Scheme::Central2 => &[(-1.0, -0.5), (1.0, 0.5)],
            Scheme::Central4 => &[(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)],
        }
    }

    /// Off-centre part of the second-derivative stencil and its centre weight.
    fn second(self) -> (&'static [(f64, f64)], f64) {
        match self {
            Scheme::Central2 => (&[(-1.0, 1.0), (1.0, 1.0)], -2.0),
            Scheme::Central4 => (
                &[(-2.0, -1.0 / 12.0), (-1.0, 16.0 / 12.0), (1.0, 16.0 / 12.0), (2.0, -1.0 / 12.0)],
                -30.0 / 12.0,
            ),
        }
    }

    fn reach(self) -> f64 {
        match self {
            Scheme::Central2 => 1.0,
            Scheme::Central4 => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StencilConfig {
    h: f64,
    scheme: Scheme,
    richardson: bool,
}

impl Default for StencilConfig {
    fn default() -> Self {
        StencilConfig { h: 1e-3, scheme: Scheme::Central4, richardson: true }
    }
}

impl StencilConfig {
    pub fn new(h: f64, scheme: Scheme, richardson: bool) -> Result<Self> {
        if !(MIN_STEP..=MAX_STEP).contains(&h) {
            return Err(Error::InvalidParameter(format!("step {h} outside [{MIN_STEP}, {MAX_STEP}]")));
        }
        Ok(StencilConfig { h, scheme, richardson })
    }

    /// Coarser step for nested (commutator) applications, where every level
    /// of differencing divides the rounding noise by another power of h.
    pub fn nested() -> Self {
        StencilConfig { h: MAX_STEP, ..Self::default() }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn richardson(&self) -> bool {
        self.richardson
    }

    /// Farthest a stencil node reaches from the centre, in radians.
    pub fn reach(&self) -> f64 {
        self.h * self.scheme.reach()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorTag {
    H,
    J1,
    J2,
    S1,
    S2,
    S3Def,
    S3Commutator,
    L1,
    L2,
    L3,
}

impl OperatorTag {
    pub const ALL: [OperatorTag; 10] = [
        OperatorTag::H,
        OperatorTag::J1,
        OperatorTag::J2,
        OperatorTag::S1,
        OperatorTag::S2,
        OperatorTag::S3Def,
        OperatorTag::S3Commutator,
        OperatorTag::L1,
        OperatorTag::L2,
        OperatorTag::L3,
    ];

    fn is_first_order(self) -> bool {
        matches!(self, OperatorTag::S1 | OperatorTag::L1 | OperatorTag::L2 | OperatorTag::L3)
    }
}

/// A complex function of `(θ, φ)` on the upper hemisphere.
pub trait ScalarField {
    fn value(&self, theta: f64, phi: f64) -> Result<Complex64>;
}

impl<F> ScalarField for F
where
    F: Fn(f64, f64) -> Result<Complex64>,
{
    fn value(&self, theta: f64, phi: f64) -> Result<Complex64> {
        self(theta, phi)
    }
}

impl ScalarField for Wavefunction {
    fn value(&self, theta: f64, phi: f64) -> Result<Complex64> {
        self.eval_s1(theta, phi)
    }
}

/// `O f` viewed as a field in its own right, for nesting.
pub struct Applied<'a> {
    pub tag: OperatorTag,
    pub field: &'a dyn ScalarField,
    pub cfg: StencilConfig,
    pub params: ModelParams,
}

impl ScalarField for Applied<'_> {
    fn value(&self, theta: f64, phi: f64) -> Result<Complex64> {
        apply_at(self.tag, self.field, theta, phi, &self.cfg, &self.params)
    }
}

/// Value and partial derivatives of a field at one point.
#[derive(Debug, Clone, Copy, Default)]
struct Jet {
    f: Complex64,
    t: Complex64,
    p: Complex64,
    tt: Complex64,
    tp: Complex64,
    pp: Complex64,
}

impl Jet {
    fn richardson(fine: Jet, coarse: Jet, order: i32) -> Jet {
        let k = 2f64.powi(order);
        let r = |a: Complex64, b: Complex64| (a * k - b) / (k - 1.0);
        Jet {
            f: fine.f,
            t: r(fine.t, coarse.t),
            p: r(fine.p, coarse.p),
            tt: r(fine.tt, coarse.tt),
            tp: r(fine.tp, coarse.tp),
            pp: r(fine.pp, coarse.pp),
        }
    }
}

fn jet_at_step(f: &dyn ScalarField, theta: f64, phi: f64, h: f64, scheme: Scheme, second: bool) -> Result<Jet> {
    let f0 = f.value(theta, phi)?;
    let mut jet = Jet { f: f0, ..Default::default() };
    for &(o, w) in scheme.first() {
        jet.t += f.value(theta + o * h, phi)? * w;
        jet.p += f.value(theta, phi + o * h)? * w;
    }
    jet.t /= h;
    jet.p /= h;
    if second {
        let (offsets, centre) = scheme.second();
        jet.tt = f0 * centre;
        jet.pp = f0 * centre;
        for &(o, w) in offsets {
            jet.tt += f.value(theta + o * h, phi)? * w;
            jet.pp += f.value(theta, phi + o * h)? * w;
        }
        jet.tt /= h * h;
        jet.pp /= h * h;
        for &(a, wa) in scheme.first() {
            for &(b, wb) in scheme.first() {
                jet.tp += f.value(theta + a * h, phi + b * h)? * (wa * wb);
            }
        }
        jet.tp /= h * h;
    }
    Ok(jet)
}

fn jet(f: &dyn ScalarField, theta: f64, phi: f64, cfg: &StencilConfig, second: bool) -> Result<Jet> {
    if theta - cfg.reach() <= 0.0 || theta + cfg.reach() >= FRAC_PI_2 {
        return Err(Error::StencilOutOfDomain { theta });
    }
    let coarse = jet_at_step(f, theta, phi, cfg.h, cfg.scheme, second)?;
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = jet_at_step(f, theta, phi, 0.5 * cfg.h, cfg.scheme, second)?;
    Ok(Jet::richardson(fine, coarse, cfg.scheme.order()))
}

/// A first-order operator `a ∂θ + b ∂φ`, with the partials of its
/// coefficients.
#[derive(Debug, Clone, Copy)]
struct VectorField {
    a: f64,
    b: f64,
    a_t: f64,
    a_p: f64,
    b_t: f64,
    b_p: f64,
}

impl VectorField {
    fn angular(i: usize, theta: f64, phi: f64) -> VectorField {
        let (sp, cp) = phi.sin_cos();
        let (st, ct) = theta.sin_cos();
        let cot = ct / st;
        let csc2 = 1.0 / (st * st);
        match i {
            1 => VectorField { a: sp, b: cot * cp, a_t: 0.0, a_p: cp, b_t: -csc2 * cp, b_p: -cot * sp },
            2 => VectorField { a: -cp, b: cot * sp, a_t: 0.0, a_p: sp, b_t: -csc2 * sp, b_p: cot * cp },
            _ => VectorField { a: 0.0, b: -1.0, a_t: 0.0, a_p: 0.0, b_t: 0.0, b_p: 0.0 },
        }
    }

    fn apply(&self, j: &Jet) -> Complex64 {
        j.t * self.a + j.p * self.b
    }

    /// `(self ∘ other) f` from the jet of `f`.
    fn compose(&self, other: &VectorField, j: &Jet) -> Complex64 {
        let along_theta = j.t * other.a_t + j.tt * other.a + j.p * other.b_t + j.tp * other.b;
        let along_phi = j.t * other.a_p + j.tp * other.a + j.p * other.b_p + j.pp * other.b;
        along_theta * self.a + along_phi * self.b
    }
}

/// Unit-sphere embedding of `(θ, φ)`.
fn embed(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

fn apply_at(
    tag: OperatorTag,
    f: &dyn ScalarField,
    theta: f64,
    phi: f64,
    cfg: &StencilConfig,
    params: &ModelParams,
) -> Result<Complex64> {
    if tag == OperatorTag::S3Commutator {
        let s1 = |t: f64, p: f64| apply_at(OperatorTag::S1, f, t, p, cfg, params);
        let s2 = |t: f64, p: f64| apply_at(OperatorTag::S2, f, t, p, cfg, params);
        let a = apply_at(OperatorTag::S1, &s2, theta, phi, cfg, params)?;
        let b = apply_at(OperatorTag::S2, &s1, theta, phi, cfg, params)?;
        return Ok(a - b);
    }
    let j = jet(f, theta, phi, cfg, !tag.is_first_order())?;
    let l1 = VectorField::angular(1, theta, phi);
    let l2 = VectorField::angular(2, theta, phi);
    let l3 = VectorField::angular(3, theta, phi);
    let g = params.coupling();
    let [s1, s2, s3] = embed(theta, phi);
    let (x2, y2, z2) = (s1 * s1, s2 * s2, s3 * s3);
    Ok(match tag {
        OperatorTag::L1 => l1.apply(&j),
        OperatorTag::L2 => l2.apply(&j),
        OperatorTag::L3 | OperatorTag::S1 => l3.apply(&j),
        OperatorTag::H => {
            let (st, ct) = theta.sin_cos();
            let laplacian = j.tt + j.t * (ct / st) + j.pp / (st * st);
            let r2 = params.radius() * params.radius();
            let potential = 0.5 * params.alpha() * params.alpha() * r2 * (x2 + y2) / z2;
            -laplacian / (2.0 * r2) + j.f * potential
        }
        OperatorTag::J1 => l1.compose(&l1, &j) - j.f * (g * (y2 + z2) / z2),
        OperatorTag::J2 => l2.compose(&l2, &j) - j.f * (g * (x2 + z2) / z2),
        OperatorTag::S2 => l1.compose(&l1, &j) - l2.compose(&l2, &j) - j.f * (g * (y2 - x2) / z2),
        OperatorTag::S3Def => {
            (l1.compose(&l2, &j) + l2.compose(&l1, &j)) * 2.0 + j.f * (4.0 * g * s1 * s2 / z2)
        }
        OperatorTag::S3Commutator => unreachable!(),
    })
}

fn to_s1(p: &AnglePair) -> Result<AnglePair> {
    convert(*p, SphereSystem::S1)
}

/// `(O f)(p)` for a point in any chart (converted to `(θ, φ)` first).
pub fn apply_operator(
    tag: OperatorTag,
    f: &dyn ScalarField,
    p: &AnglePair,
    cfg: &StencilConfig,
    params: &ModelParams,
) -> Result<Complex64> {
    let q = to_s1(p)?;
    apply_at(tag, f, q.first(), q.second(), cfg, params)
}

/// `(O₁ O₂ ⋯ O_k f)(θ, φ)`; the rightmost operator acts first.
pub fn apply_product(
    ops: &[OperatorTag],
    f: &dyn ScalarField,
    theta: f64,
    phi: f64,
    cfg: &StencilConfig,
    params: &ModelParams,
) -> Result<Complex64> {
    match ops.split_first() {
        None => f.value(theta, phi),
        Some((&outer, [])) => apply_at(outer, f, theta, phi, cfg, params),
        Some((&outer, rest)) => {
            let inner = |t: f64, p: f64| apply_product(rest, f, t, p, cfg, params);
            apply_at(outer, &inner, theta, phi, cfg, params)
        }
    }
}

/// Reproducible sample points with `θ` in `(lo, hi)`, uniform in `φ`.
pub fn interior_samples(count: usize, theta_lo: f64, theta_hi: f64, seed: u64) -> Result<Vec<AnglePair>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| AnglePair::new(SphereSystem::S1, rng.gen_range(theta_lo..theta_hi), rng.gen_range(0.0..TAU)))
        .collect()
}

/// Polar band for eigen-equation residuals.
pub const EIGEN_BAND: (f64, f64) = (0.15, FRAC_PI_2 - 0.15);
/// Narrower band for the nested commutator checks.
pub const ALGEBRA_BAND: (f64, f64) = (0.3, FRAC_PI_2 - 0.3);

const SAMPLE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSample {
    pub theta: f64,
    pub phi: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `max |O f − λ f| / max |f|` over the samples.
    pub max_rel_residual: f64,
    pub points: Vec<ResidualSample>,
}

/// Residual of the eigen-relation `O Ψ = λ Ψ` at `sample_points` interior
/// points, where `O` is the product `ops` (rightmost acts first).
pub fn residual_report(
    ops: &[OperatorTag],
    state: BasisState,
    expected_eigenvalue: impl Into<Complex64>,
    params: &ModelParams,
    cfg: &StencilConfig,
    sample_points: usize,
) -> Result<ResidualReport> {
    let lambda = expected_eigenvalue.into();
    let w = Wavefunction::new(state, params.nu())?;
    let samples = interior_samples(sample_points, EIGEN_BAND.0, EIGEN_BAND.1, SAMPLE_SEED)?;
    let mut points = Vec::with_capacity(samples.len());
    let mut scale = 0.0f64;
    for p in &samples {
        let (t, ph) = (p.first(), p.second());
        let f = w.value(t, ph)?;
        let of = apply_product(ops, &w, t, ph, cfg, params)?;
        scale = scale.max(f.norm());
        points.push(ResidualSample { theta: t, phi: ph, residual: (of - lambda * f).norm() });
    }
    let worst = points.iter().map(|s| s.residual).fold(0.0, f64::max);
    let max_rel_residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(ResidualReport { max_rel_residual, points })
}

/// Least-squares eigenvalue `Σ conj(f) O f / Σ |f|²` over interior samples.
pub fn estimate_eigenvalue(
    ops: &[OperatorTag],
    state: BasisState,
    params: &ModelParams,
    cfg: &StencilConfig,
    sample_points: usize,
) -> Result<Complex64> {
    let w = Wavefunction::new(state, params.nu())?;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for p in interior_samples(sample_points, EIGEN_BAND.0, EIGEN_BAND.1, SAMPLE_SEED)? {
        let f = w.value(p.first(), p.second())?;
        num += f.conj() * apply_product(ops, &w, p.first(), p.second(), cfg, params)?;
        den += f.norm_sqr();
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraIdentity {
    /// `2{L1,L2} + 4α²R⁴ s1 s2 / s3² = [S1, S2]`
    S3DefEqCommutator,
    /// `[S3, S1] = 4 S2`
    CommS3S1Eq4S2,
    /// `[S3, S2] = 16R² H S1 + 8 S1³ + 4(4α²R⁴ − 1) S1`
    CommS3S2Cubic,
}

impl AlgebraIdentity {
    pub const ALL: [AlgebraIdentity; 3] =
        [AlgebraIdentity::S3DefEqCommutator, AlgebraIdentity::CommS3S1Eq4S2, AlgebraIdentity::CommS3S2Cubic];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `max |LHS − RHS| / max(|LHS|, |RHS|)` over fields and samples.
    pub max_rel_residual: f64,
    pub samples: usize,
}

/// Coefficient of `H S1` in the cubic relation.
pub fn cubic_hamiltonian_coefficient(params: &ModelParams) -> f64 {
    16.0 * params.radius() * params.radius()
}

fn identity_sides(
    identity: AlgebraIdentity,
    f: &dyn ScalarField,
    theta: f64,
    phi: f64,
    params: &ModelParams,
    cfg: &StencilConfig,
    hamiltonian_coefficient: f64,
) -> Result<(Complex64, Complex64)> {
    use OperatorTag::*;
    let ap = |ops: &[OperatorTag]| apply_product(ops, f, theta, phi, cfg, params);
    Ok(match identity {
        AlgebraIdentity::S3DefEqCommutator => (ap(&[S3Def])?, ap(&[S3Commutator])?),
        AlgebraIdentity::CommS3S1Eq4S2 => (ap(&[S3Def, S1])? - ap(&[S1, S3Def])?, ap(&[S2])? * 4.0),
        AlgebraIdentity::CommS3S2Cubic => {
            let lhs = ap(&[S3Def, S2])? - ap(&[S2, S3Def])?;
            let rhs = ap(&[H, S1])? * hamiltonian_coefficient
                + ap(&[S1, S1, S1])? * 8.0
                + ap(&[S1])? * (4.0 * (4.0 * params.coupling() - 1.0));
            (lhs, rhs)
        }
    })
}

/// Relative residual of an algebra identity over `fields` at
/// `sample_points` points of the inner band.
pub fn algebra_identity_check(
    identity: AlgebraIdentity,
    fields: &[&dyn ScalarField],
    params: &ModelParams,
    cfg: &StencilConfig,
    sample_points: usize,
) -> Result<IdentityReport> {
    cubic_relation_check(identity, fields, params, cfg, sample_points, cubic_hamiltonian_coefficient(params))
}

/// [`algebra_identity_check`] with an explicit `H S1` coefficient in the
/// cubic relation (ignored by the other identities).
pub fn cubic_relation_check(
    identity: AlgebraIdentity,
    fields: &[&dyn ScalarField],
    params: &ModelParams,
    cfg: &StencilConfig,
    sample_points: usize,
    hamiltonian_coefficient: f64,
) -> Result<IdentityReport> {
    let samples = interior_samples(sample_points, ALGEBRA_BAND.0, ALGEBRA_BAND.1, SAMPLE_SEED)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for f in fields {
        for p in &samples {
            let (l, r) = identity_sides(identity, *f, p.first(), p.second(), params, cfg, hamiltonian_coefficient)?;
            worst = worst.max((l - r).norm());
            scale = scale.max(l.norm()).max(r.norm());
        }
    }
    let max_rel_residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(IdentityReport { max_rel_residual, samples: samples.len() * fields.len() })
}

/// `|⟨f, H g⟩ − ⟨H f, g⟩| / max(|⟨f, H g⟩|, 1)` on a hemisphere grid. Near
/// the rim and the pole the step shrinks so the stencil stays inside.
pub fn hermiticity_defect(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    params: &ModelParams,
    cfg: &StencilConfig,
    order: usize,
) -> Result<f64> {
    let grid = HemisphereGrid::new(order)?;
    let mut forward = Complex64::new(0.0, 0.0);
    let mut backward = Complex64::new(0.0, 0.0);
    for (p, &w) in grid.points().iter().zip(grid.weights()) {
        let (t, ph) = (p.first(), p.second());
        let room = t.min(FRAC_PI_2 - t) / (2.0 * cfg.scheme.reach());
        let local = if room < cfg.h { StencilConfig::new(room.max(MIN_STEP), cfg.scheme, cfg.richardson)? } else { *cfg };
        forward += f.value(t, ph)?.conj() * apply_at(OperatorTag::H, g, t, ph, &local, params)? * w;
        backward += apply_at(OperatorTag::H, f, t, ph, &local, params)?.conj() * g.value(t, ph)? * w;
    }
    Ok((forward - backward).norm() / forward.norm().max(1.0))
}
