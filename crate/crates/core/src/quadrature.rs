//! Gauss–Legendre rules and the tensor-product hemisphere integrator that
//! serves as the numerical oracle for norms and overlaps.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{AnglePair, SphereSystem};

/// Coarse per-axis order; the reported value comes from twice this.
pub const DEFAULT_ORDER: usize = 128;

/// `|coarse − fine| ≤ CONVERGENCE_TOLERANCE · (1 + |fine|)` or the integral
/// is reported as not converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

const NEWTON_TOLERANCE: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights on `(-1, 1)`, ascending.
fn reference_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    if order == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi's asymptotic guess for the i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos() * (1.0 - (n - 1.0) / (8.0 * n * n * n));
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= NEWTON_TOLERANCE * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[order - 1 - i] = x;
        weights[order - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule with `order` nodes mapped onto `(lo, hi)`.
pub fn gauss_legendre(order: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidParameter("quadrature order must be at least 1".into()));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("bad interval ({lo}, {hi})")));
    }
    let (x, w) = reference_rule(order);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    Ok(QuadratureRule {
        nodes: x.iter().map(|x| mid + half * x).collect(),
        weights: w.iter().map(|w| half * w).collect(),
        lo,
        hi,
    })
}

/// Weighted sum of `f` over the nodes, in node order.
pub fn integrate_1d<T, F>(mut f: F, rule: &QuadratureRule) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
    F: FnMut(f64) -> T,
{
    rule.iter().fold(T::default(), |acc, (x, w)| acc + f(x) * w)
}

/// Tensor rule on `θ ∈ (0, π/2)`, `φ ∈ (0, 2π)` with the `sinθ` of the
/// surface measure folded into the weights.
#[derive(Debug, Clone)]
pub struct HemisphereGrid {
    pub order: usize,
    points: Vec<AnglePair>,
    weights: Vec<f64>,
}

impl HemisphereGrid {
    pub fn new(order: usize) -> Result<Self> {
        let theta = gauss_legendre(order, 0.0, FRAC_PI_2)?;
        let phi = gauss_legendre(order, 0.0, TAU)?;
        let mut points = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for (t, wt) in theta.iter() {
            let st = t.sin();
            for (p, wp) in phi.iter() {
                points.push(AnglePair::new(SphereSystem::S1, t, p)?);
                weights.push(wt * wp * st);
            }
        }
        Ok(HemisphereGrid { order, points, weights })
    }

    pub fn points(&self) -> &[AnglePair] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ w f(p)`, in grid order.
    pub fn integrate<F>(&self, mut f: F) -> Result<Complex64>
    where
        F: FnMut(&AnglePair) -> Result<Complex64>,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, &w) in self.points.iter().zip(&self.weights) {
            acc += f(p)? * w;
        }
        Ok(acc)
    }

    /// `Σ w conj(a) b` over two tabulations of this grid.
    pub fn inner_product(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        debug_assert_eq!(a.len(), self.len());
        debug_assert_eq!(b.len(), self.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for ((x, y), &w) in a.iter().zip(b).zip(&self.weights) {
            acc += x.conj() * y * w;
        }
        acc
    }

    /// Evaluate `f` at every grid point.
    pub fn tabulate<F>(&self, f: F) -> Result<Vec<Complex64>>
    where
        F: FnMut(&AnglePair) -> Result<Complex64>,
    {
        self.points.iter().map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HemisphereIntegral {
    /// Estimate at the finer order.
    pub value: Complex64,
    /// `|fine − coarse|`.
    pub error_estimate: f64,
    pub coarse_order: usize,
}

/// Compare a coarse and a doubled-order estimate. Errors when they differ by
/// more than [`CONVERGENCE_TOLERANCE`]` · (1 + |fine|)`.
pub fn check_convergence(coarse: Complex64, fine: Complex64, coarse_order: usize) -> Result<HemisphereIntegral> {
    let diff = (fine - coarse).norm();
    if !diff.is_finite() || diff > CONVERGENCE_TOLERANCE * (1.0 + fine.norm()) {
        return Err(Error::NotConverged { value: fine.norm(), difference: diff });
    }
    Ok(HemisphereIntegral { value: fine, error_estimate: diff, coarse_order })
}

/// `∫∫ f sinθ dθ dφ` over the upper hemisphere at `order` and `2·order` per
/// axis.
pub fn integrate_hemisphere<F>(mut f: F, order: usize) -> Result<HemisphereIntegral>
where
    F: FnMut(&AnglePair) -> Result<Complex64>,
{
    let coarse = HemisphereGrid::new(order)?.integrate(&mut f)?;
    let fine = HemisphereGrid::new(2 * order)?.integrate(&mut f)?;
    check_convergence(coarse, fine, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let r = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_eq!(r.weights, vec![2.0]);
    }

    #[test]
    fn three_point_nodes() {
        let r = gauss_legendre(3, -1.0, 1.0).unwrap();
        let x = (0.6f64).sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15 && r.nodes[1] == 0.0 && (r.nodes[2] - x).abs() < 1e-15);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        for order in 3..12 {
            let r = gauss_legendre(order, -1.0, 1.0).unwrap();
            let v: f64 = integrate_1d(|x| x.powi(4), &r);
            assert!((v - 0.4).abs() < 1e-14, "order {order}: {v}");
            let top = 2 * order - 1;
            let v: f64 = integrate_1d(|x| x.powi(top as i32 - 1) + x.powi(top as i32), &r);
            assert!((v - 2.0 / top as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn sine_integral() {
        let r = gauss_legendre(32, 0.0, PI).unwrap();
        let v: f64 = integrate_1d(f64::sin, &r);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn complex_integrand() {
        let r = gauss_legendre(40, 0.0, TAU).unwrap();
        let v: Complex64 = integrate_1d(|p| Complex64::from_polar(1.0, 3.0 * p), &r);
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn rules_are_ordered_positive_and_sum_to_length() {
        for order in (1..=1024).step_by(17).chain([256, 512, 1024]) {
            let r = gauss_legendre(order, 0.0, 3.0).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0), "order {order}");
            assert!(r.nodes.windows(2).all(|p| p[0] < p[1]), "order {order}");
            assert!(r.nodes[0] > 0.0 && r.nodes[order - 1] < 3.0);
            let total: f64 = r.weights.iter().sum();
            assert!((total - 3.0).abs() <= 1e-12 * 3.0, "order {order}: {total}");
        }
    }

    #[test]
    fn hemisphere_area() {
        let i = integrate_hemisphere(|_| Ok(Complex64::new(1.0, 0.0)), 16).unwrap();
        assert!((i.value.re - TAU).abs() < 1e-13 && i.value.im == 0.0);
    }

    #[test]
    fn azimuthal_orthogonality() {
        let i = integrate_hemisphere(|p| Ok(Complex64::from_polar(p.first().cos(), 2.0 * p.second())), 32).unwrap();
        assert!(i.value.norm() < 1e-12);
    }

    #[test]
    fn rough_integrand_is_flagged() {
        // a kink in θ that Gauss–Legendre resolves slowly
        let r = integrate_hemisphere(|p| Ok(Complex64::new((p.first() - 0.7).abs().sqrt(), 0.0)), 8);
        assert!(matches!(r, Err(Error::NotConverged { .. })));
    }

    #[test]
    fn zero_order_rejected() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
    }
}
