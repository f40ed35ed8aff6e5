//! The three spherical charts of the upper hemisphere and the embedded
//! Cartesian triple they share:
//!
//! ```text
//! s1 = R sinθ cosφ = R cosθ'       = R sinθ'' sinφ''
//! s2 = R sinθ sinφ = R sinθ' cosφ' = R cosθ''
//! s3 = R cosθ      = R sinθ' sinφ' = R sinθ'' cosφ''
//! ```
//!
//! Every chart is restricted to `s3 > 0`, where the oscillator potential is
//! finite.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for "this point lies on the sphere".
pub const ON_SPHERE_TOLERANCE: f64 = 1e-12;

/// Distance from the axis (relative to R) below which a chart's pole is hit.
const POLE_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SphereSystem {
    /// `(θ, φ)`, polar axis along `s3`.
    S1,
    /// `(θ', φ')`, polar axis along `s1`.
    S2,
    /// `(θ'', φ'')`, polar axis along `s2`.
    S3,
}

impl SphereSystem {
    pub const ALL: [SphereSystem; 3] = [SphereSystem::S1, SphereSystem::S2, SphereSystem::S3];
}

impl std::fmt::Display for SphereSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SphereSystem::S1 => "s1",
            SphereSystem::S2 => "s2",
            SphereSystem::S3 => "s3",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for SphereSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s1" | "1" => Ok(SphereSystem::S1),
            "s2" | "2" => Ok(SphereSystem::S2),
            "s3" | "3" => Ok(SphereSystem::S3),
            other => Err(Error::InvalidParameter(format!("unknown coordinate system {other:?}"))),
        }
    }
}

/// A point of the hemisphere in one of the three charts. Construct through
/// [`AnglePair::new`], which enforces the chart's open ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair {
    system: SphereSystem,
    first: f64,
    second: f64,
}

impl AnglePair {
    pub fn new(system: SphereSystem, first: f64, second: f64) -> Result<Self> {
        let ok = match system {
            SphereSystem::S1 => first > 0.0 && first < FRAC_PI_2 && (0.0..TAU).contains(&second),
            SphereSystem::S2 => first > 0.0 && first < PI && second > 0.0 && second < PI,
            SphereSystem::S3 => first > 0.0 && first < PI && second > -FRAC_PI_2 && second < FRAC_PI_2,
        };
        if !ok || !first.is_finite() || !second.is_finite() {
            return Err(Error::OutOfDomain(format!("{system} angles ({first}, {second})")));
        }
        Ok(AnglePair { system, first, second })
    }

    /// `(θ, φ)` with the azimuth reduced into `[0, 2π)` first.
    pub fn s1_wrapped(theta: f64, phi: f64) -> Result<Self> {
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        AnglePair::new(SphereSystem::S1, theta, phi)
    }

    pub fn system(&self) -> SphereSystem {
        self.system
    }

    /// Polar angle of the chart.
    pub fn first(&self) -> f64 {
        self.first
    }

    /// Azimuthal angle of the chart.
    pub fn second(&self) -> f64 {
        self.second
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedPoint {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl EmbeddedPoint {
    /// Validates that the triple lies on the sphere of the given radius and
    /// in the upper hemisphere.
    pub fn new(s1: f64, s2: f64, s3: f64, radius: f64) -> Result<Self> {
        let p = EmbeddedPoint { s1, s2, s3 };
        let r2 = radius * radius;
        if (p.norm_sq() - r2).abs() > ON_SPHERE_TOLERANCE * r2 {
            return Err(Error::OutOfDomain(format!("({s1}, {s2}, {s3}) is not on the sphere of radius {radius}")));
        }
        if s3 <= 0.0 {
            return Err(Error::OutOfDomain(format!("s3 = {s3} is not in the upper hemisphere")));
        }
        Ok(p)
    }

    pub fn norm_sq(&self) -> f64 {
        self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3
    }

    pub fn radius(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// Anything that names a point of the hemisphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Angles(AnglePair),
    Embedded(EmbeddedPoint),
}

impl From<AnglePair> for SpherePoint {
    fn from(p: AnglePair) -> Self {
        SpherePoint::Angles(p)
    }
}

impl From<EmbeddedPoint> for SpherePoint {
    fn from(e: EmbeddedPoint) -> Self {
        SpherePoint::Embedded(e)
    }
}

impl SpherePoint {
    /// The point in the requested chart.
    pub fn in_system(&self, target: SphereSystem) -> Result<AnglePair> {
        match self {
            SpherePoint::Angles(p) => convert(*p, target),
            SpherePoint::Embedded(e) => from_embedded(*e, target),
        }
    }
}

pub fn to_embedded(p: AnglePair, radius: f64) -> Result<EmbeddedPoint> {
    let (a, b) = (p.first, p.second);
    let (s1, s2, s3) = match p.system {
        SphereSystem::S1 => (a.sin() * b.cos(), a.sin() * b.sin(), a.cos()),
        SphereSystem::S2 => (a.cos(), a.sin() * b.cos(), a.sin() * b.sin()),
        SphereSystem::S3 => (a.sin() * b.sin(), a.cos(), a.sin() * b.cos()),
    };
    if s3 <= 0.0 {
        return Err(Error::OutOfDomain(format!("{p:?} maps to s3 = {s3}")));
    }
    Ok(EmbeddedPoint { s1: radius * s1, s2: radius * s2, s3: radius * s3 })
}

pub fn from_embedded(e: EmbeddedPoint, target: SphereSystem) -> Result<AnglePair> {
    let r = e.radius();
    if e.s3 <= 0.0 || r == 0.0 {
        return Err(Error::OutOfDomain(format!("{e:?} is not in the upper hemisphere")));
    }
    let (x, y, z) = (e.s1 / r, e.s2 / r, e.s3 / r);
    // (axis, the two remaining coordinates in azimuth order)
    let (axis, u, v) = match target {
        SphereSystem::S1 => (z, x, y),
        SphereSystem::S2 => (x, y, z),
        SphereSystem::S3 => (y, z, x),
    };
    let rho = u.hypot(v);
    if rho <= POLE_TOLERANCE {
        return Err(Error::CoordinateSingularity(format!("{e:?} is a pole of chart {target}")));
    }
    let polar = rho.atan2(axis);
    let azimuth = v.atan2(u);
    let azimuth = match target {
        SphereSystem::S1 if azimuth < 0.0 => azimuth + TAU,
        _ => azimuth,
    };
    AnglePair::new(target, polar, azimuth)
        .map_err(|_| Error::OutOfDomain(format!("{e:?} falls on the boundary of chart {target}")))
}

/// Re-express a point in another chart (through the unit sphere).
pub fn convert(p: AnglePair, target: SphereSystem) -> Result<AnglePair> {
    if p.system == target {
        return Ok(p);
    }
    from_embedded(to_embedded(p, 1.0)?, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn equator_is_excluded() {
        assert!(matches!(AnglePair::new(SphereSystem::S1, FRAC_PI_2, 0.0), Err(Error::OutOfDomain(_))));
        assert!(EmbeddedPoint::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn direct_substitution() {
        let e = to_embedded(AnglePair::new(SphereSystem::S1, FRAC_PI_4, FRAC_PI_2).unwrap(), 1.0).unwrap();
        let h = 0.5f64.sqrt();
        assert!(close(e.s1, 0.0, 1e-15) && close(e.s2, h, 1e-15) && close(e.s3, h, 1e-15));

        let e = to_embedded(AnglePair::new(SphereSystem::S2, FRAC_PI_2, FRAC_PI_2).unwrap(), 1.0).unwrap();
        assert!(close(e.s1, 0.0, 1e-15) && close(e.s2, 0.0, 1e-15) && close(e.s3, 1.0, 1e-15));

        let e = to_embedded(AnglePair::new(SphereSystem::S3, 1.0, 0.3).unwrap(), 2.0).unwrap();
        assert!(close(e.s1, 2.0 * 1f64.sin() * 0.3f64.sin(), 1e-15));
        assert!(close(e.s2, 2.0 * 1f64.cos(), 1e-15));
    }

    #[test]
    fn north_pole_is_singular_for_s1() {
        let e = EmbeddedPoint::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(from_embedded(e, SphereSystem::S1), Err(Error::CoordinateSingularity(_))));
        assert!(from_embedded(e, SphereSystem::S2).is_ok());
        assert!(from_embedded(e, SphereSystem::S3).is_ok());
    }

    #[test]
    fn inverse_to_s2() {
        let h = 0.5f64.sqrt();
        let e = EmbeddedPoint::new(0.0, h, h, 1.0).unwrap();
        let p = from_embedded(e, SphereSystem::S2).unwrap();
        assert!(close(p.first(), FRAC_PI_2, 1e-15) && close(p.second(), FRAC_PI_4, 1e-15));

        let q = convert(AnglePair::new(SphereSystem::S1, FRAC_PI_4, FRAC_PI_2).unwrap(), SphereSystem::S2).unwrap();
        assert!(close(q.first(), FRAC_PI_2, 1e-15) && close(q.second(), FRAC_PI_4, 1e-15));
    }

    #[test]
    fn off_sphere_rejected() {
        assert!(EmbeddedPoint::new(0.6, 0.0, 0.8 + 1e-9, 1.0).is_err());
        assert!(EmbeddedPoint::new(3.0, 0.0, 4.0, 5.0).is_ok());
    }

    #[test]
    fn azimuth_wraps() {
        let p = AnglePair::s1_wrapped(0.4, 0.3 + TAU).unwrap();
        assert!(close(p.second(), 0.3, 1e-14));
        let p = AnglePair::s1_wrapped(0.4, -0.3).unwrap();
        assert!(close(p.second(), TAU - 0.3, 1e-14));
    }

    #[test]
    fn ten_thousand_roundtrips() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut done = 0;
        while done < 10_000 {
            // uniform on the hemisphere: cosθ uniform in (0, 1)
            let z: f64 = rng.gen_range(1e-6..1.0);
            let phi: f64 = rng.gen_range(0.0..TAU);
            let p = AnglePair::new(SphereSystem::S1, z.acos(), phi).unwrap();
            for &x in &SphereSystem::ALL {
                let Ok(q) = convert(p, x) else { continue };
                for &y in &SphereSystem::ALL {
                    let Ok(r) = convert(q, y) else { continue };
                    let back = convert(r, SphereSystem::S1).unwrap();
                    assert!(close(back.first(), p.first(), 1e-10), "{p:?} via {x} {y}");
                    let dphi = (back.second() - p.second()).abs();
                    assert!(dphi.min(TAU - dphi) <= 1e-10 * (1.0 + 1.0 / p.first().sin()));
                }
            }
            done += 1;
        }
    }

    proptest! {
        #[test]
        fn norm_is_preserved(theta in 1e-6f64..FRAC_PI_2 - 1e-6, phi in 0.0f64..TAU, radius in 0.1f64..1e3) {
            let e = to_embedded(AnglePair::new(SphereSystem::S1, theta, phi).unwrap(), radius).unwrap();
            prop_assert!((e.norm_sq() - radius * radius).abs() <= ON_SPHERE_TOLERANCE * radius * radius);
        }

        #[test]
        fn roundtrip_in_every_chart(theta in 1e-3f64..FRAC_PI_2 - 1e-3, phi in 0.0f64..TAU) {
            let p = AnglePair::new(SphereSystem::S1, theta, phi).unwrap();
            for &x in &SphereSystem::ALL {
                let q = convert(p, x).unwrap();
                let back = convert(q, SphereSystem::S1).unwrap();
                prop_assert!((back.first() - theta).abs() <= 1e-10);
                let d = (back.second() - phi).abs();
                prop_assert!(d.min(TAU - d) <= 1e-10);
                let e = to_embedded(q, 1.0).unwrap();
                let again = from_embedded(e, x).unwrap();
                prop_assert!((again.first() - q.first()).abs() <= 1e-12);
                prop_assert!((again.second() - q.second()).abs() <= 1e-12);
            }
        }

        #[test]
        fn path_independence(theta in 1e-3f64..FRAC_PI_2 - 1e-3, phi in 0.0f64..TAU) {
            let p = AnglePair::new(SphereSystem::S1, theta, phi).unwrap();
            let direct = convert(convert(p, SphereSystem::S2).unwrap(), SphereSystem::S3).unwrap();
            let via_s1 = convert(
                convert(convert(p, SphereSystem::S2).unwrap(), SphereSystem::S1).unwrap(),
                SphereSystem::S3,
            ).unwrap();
            prop_assert!((direct.first() - via_s1.first()).abs() <= 1e-10);
            prop_assert!((direct.second() - via_s1.second()).abs() <= 1e-10);
        }

        #[test]
        fn primed_chart_relations(theta in 1e-3f64..FRAC_PI_2 - 1e-3, phi in 0.0f64..TAU) {
            // cosθ' = sinθ cosφ,  cosφ' = sinθ sinφ / √(1 - sin²θ cos²φ)
            let p = AnglePair::new(SphereSystem::S1, theta, phi).unwrap();
            let q = convert(p, SphereSystem::S2).unwrap();
            prop_assert!((q.first().cos() - theta.sin() * phi.cos()).abs() <= 1e-12);
            let rhs = theta.sin() * phi.sin() / (1.0 - (theta.sin() * phi.cos()).powi(2)).sqrt();
            prop_assert!((q.second().cos() - rhs).abs() <= 1e-10);
        }
    }
}
