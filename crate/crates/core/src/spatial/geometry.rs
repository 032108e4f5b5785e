use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderGeometry {
    pub radius: f64,
    pub height: f64,
}

impl Default for CylinderGeometry {
    fn default() -> Self {
        Self {
            radius: 0.3,
            height: 1.0,
        }
    }
}

impl CylinderGeometry {
    pub fn new(radius: f64, height: f64) -> Result<Self> {
        let g = Self { radius, height };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::param("radius", "must be finite and > 0"));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::param("height", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Point on the lateral surface; the cylinder axis is the vertical `z` axis.
    pub fn to_cartesian(&self, p: SurfacePoint) -> [f64; 3] {
        [self.radius * p.phi.cos(), self.radius * p.phi.sin(), p.z]
    }

    /// Tangent-plane offset `b − a` as (arc length, height).
    pub fn tangent_offset(&self, a: SurfacePoint, b: SurfacePoint) -> [f64; 2] {
        [self.radius * angle_diff(b.phi, a.phi), b.z - a.z]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub phi: f64,
    pub z: f64,
}

impl SurfacePoint {
    pub fn new(phi: f64, z: f64) -> Self {
        Self {
            phi: wrap_angle(phi),
            z,
        }
    }
}

/// Angle in `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// `a − b` wrapped to `(−π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LosParams {
    /// Largest angular separation around the axis.
    pub theta_max: f64,
    /// Largest straight-line distance.
    pub d_max: f64,
    /// Robot body radius used for occlusion.
    pub eps_occ: f64,
}

impl Default for LosParams {
    fn default() -> Self {
        Self {
            theta_max: PI / 2.0,
            d_max: 0.5,
            eps_occ: 0.02,
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Whether `a` and `b` see each other.
///
/// A third robot occludes when it projects strictly between the two endpoints and lies
/// within `eps_occ` of the chord.
pub fn line_of_sight(
    a: SurfacePoint,
    b: SurfacePoint,
    others: &[SurfacePoint],
    geometry: &CylinderGeometry,
    los: &LosParams,
) -> bool {
    if angle_diff(a.phi, b.phi).abs() > los.theta_max {
        return false;
    }
    // Fixed endpoint order keeps the floating-point result symmetric.
    let (a, b) = if (a.phi, a.z) <= (b.phi, b.z) { (a, b) } else { (b, a) };
    let (pa, pb) = (geometry.to_cartesian(a), geometry.to_cartesian(b));
    let chord = sub(pb, pa);
    let len2 = dot(chord, chord);
    if len2.sqrt() > los.d_max {
        return false;
    }
    if len2 == 0.0 {
        return true;
    }
    let occluded = |p: &SurfacePoint| {
        let w = sub(geometry.to_cartesian(*p), pa);
        let t = dot(w, chord) / len2;
        if t <= 0.0 || t >= 1.0 {
            return false;
        }
        let foot = [pa[0] + t * chord[0], pa[1] + t * chord[1], pa[2] + t * chord[2]];
        let off = sub(geometry.to_cartesian(*p), foot);
        dot(off, off).sqrt() <= los.eps_occ
    };
    !others.iter().any(occluded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn los(a: SurfacePoint, b: SurfacePoint, others: &[SurfacePoint]) -> bool {
        line_of_sight(a, b, others, &CylinderGeometry::default(), &LosParams::default())
    }

    #[test]
    fn opposite_sides_never_see_each_other() {
        assert!(!los(SurfacePoint::new(0.0, 0.5), SurfacePoint::new(PI, 0.5), &[]));
    }

    #[test]
    fn midpoint_robot_occludes() {
        let a = SurfacePoint::new(1.0, 0.40);
        let b = SurfacePoint::new(1.0, 0.41);
        assert!(!los(a, b, &[SurfacePoint::new(1.0, 0.405)]));
        assert!(los(a, b, &[]));
    }

    #[test]
    fn five_millimetre_neighbours_see_each_other() {
        let a = SurfacePoint::new(2.0, 0.3);
        let b = SurfacePoint::new(2.0, 0.305);
        // The far spoke lies beyond `b`, not between.
        assert!(los(a, b, &[SurfacePoint::new(2.0, 0.31)]));
    }

    #[test]
    fn distance_limit() {
        assert!(!los(SurfacePoint::new(0.0, 0.0), SurfacePoint::new(0.0, 0.6), &[]));
        assert!(los(SurfacePoint::new(0.0, 0.0), SurfacePoint::new(0.0, 0.49), &[]));
    }

    #[test]
    fn angle_helpers() {
        assert!((wrap_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert!((angle_diff(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert_eq!(angle_diff(PI, 0.0), PI);
    }

    proptest! {
        #[test]
        fn los_is_symmetric(
            pa in (0.0f64..TAU, 0.0f64..1.0), pb in (0.0f64..TAU, 0.0f64..1.0),
            others in proptest::collection::vec((0.0f64..TAU, 0.0f64..1.0), 0..4),
        ) {
            let a = SurfacePoint::new(pa.0, pa.1);
            let b = SurfacePoint::new(pb.0, pb.1);
            let others: Vec<_> = others.into_iter().map(|(p, z)| SurfacePoint::new(p, z)).collect();
            prop_assert_eq!(los(a, b, &others), los(b, a, &others));
        }
    }
}
