//! Vertical catenoidal barrier annuli used as obstacles for constrained
//! Plateau solves and as probes for the annular intersection test.

use std::f64::consts::PI;

use super::{GeometryError, Point3};

/// A piece of vertical catenoid `rho = neck * cosh((z - center.z)/neck)`
/// about the vertical line through `center`, clipped to the band
/// `|z - center.z| <= clip_half_height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatenoidBarrier {
    pub center: Point3,
    pub neck: f64,
    pub clip_half_height: f64,
}

impl CatenoidBarrier {
    /// Radius of the catenoid at signed height `dz` from the waist.
    pub fn radius_at(&self, dz: f64) -> f64 {
        self.neck * (dz / self.neck).cosh()
    }

    /// Radius of the two clip circles bounding the annulus.
    pub fn clip_radius(&self) -> f64 {
        self.radius_at(self.clip_half_height)
    }

    /// Horizontal distance from `p` to the barrier axis.
    pub fn axial_distance(&self, p: Point3) -> f64 {
        (p.x - self.center.x).hypot(p.y - self.center.y)
    }

    /// Signed radial clearance from the catenoid surface: positive outside
    /// the hourglass, negative inside.  Only meaningful within the clip
    /// band; returns `None` outside it.
    pub fn signed_clearance(&self, p: Point3) -> Option<f64> {
        let dz = p.z - self.center.z;
        if dz.abs() > self.clip_half_height {
            None
        } else {
            Some(self.axial_distance(p) - self.radius_at(dz))
        }
    }

    /// Depth by which `p` violates a keep-outside constraint with clearance
    /// `margin`; zero when `p` is outside the fattened hourglass or outside
    /// the clip band.
    pub fn keep_outside_violation(&self, p: Point3, margin: f64) -> f64 {
        match self.signed_clearance(p) {
            Some(c) if c < margin => margin - c,
            _ => 0.0,
        }
    }

    /// Whether the segment `[a, b]` crosses the barrier surface within the
    /// clip band (sign change of the radial clearance along the segment).
    pub fn segment_crosses(&self, a: Point3, b: Point3) -> bool {
        const STEPS: usize = 16;
        let mut prev: Option<f64> = None;
        for i in 0..=STEPS {
            let t = i as f64 / STEPS as f64;
            if let Some(c) = self.signed_clearance(a + t * (b - a)) {
                if let Some(p) = prev {
                    if p.signum() != c.signum() {
                        return true;
                    }
                }
                prev = Some(c);
            } else {
                prev = None;
            }
        }
        false
    }
}

/// Construct the standard barrier for a contour of rim radius `rim_radius`:
/// a unit-pitch catenoid waisted at `(0, rim_radius/2, 0)` with neck radius
/// `neck`, clipped to the half-slab band `|z| <= pi/2`.
///
/// Errors with [`GeometryError::BarrierInfeasible`] when the clip circles
/// (radius `neck * cosh(pi/(2 neck))`) would come within `margin` of either
/// the axis or the rim, so the annulus no longer sits cleanly inside the
/// region between the two sheets.
pub fn catenoid_annulus(
    rim_radius: f64,
    neck: f64,
    margin: f64,
) -> Result<CatenoidBarrier, GeometryError> {
    if !(neck > 0.0) {
        return Err(GeometryError::InvalidParameter { name: "neck", value: neck });
    }
    if !(rim_radius > 0.0) {
        return Err(GeometryError::InvalidParameter { name: "rim_radius", value: rim_radius });
    }
    let barrier = CatenoidBarrier {
        center: Point3::new(0.0, rim_radius / 2.0, 0.0),
        neck,
        clip_half_height: PI / 2.0,
    };
    let clip_radius = barrier.clip_radius();
    let available = rim_radius / 2.0 - margin;
    if clip_radius >= available {
        return Err(GeometryError::BarrierInfeasible { clip_radius, available });
    }
    Ok(barrier)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn clip_radius_of_unit_neck() {
        // cosh(pi/2) = 2.5091784786580567.
        let b = catenoid_annulus(6.0 * PI, 1.0, 0.25).unwrap();
        assert_relative_eq!(b.clip_radius(), 2.509_178_478_658_056_7, epsilon = 1e-12);
        assert_relative_eq!(b.center.y, 3.0 * PI);
    }

    #[test]
    fn feasibility_threshold() {
        // At rim radius 6pi there is ample clearance for a unit neck...
        assert!(catenoid_annulus(6.0 * PI, 1.0, 0.25).is_ok());
        // ...but a rim barely wider than twice the clip radius fails.
        assert!(matches!(
            catenoid_annulus(5.0, 1.0, 0.25),
            Err(GeometryError::BarrierInfeasible { .. })
        ));
        // Tiny necks flare enormously at the clip height and also fail at
        // moderate rim radii: cosh grows faster than the neck shrinks.
        assert!(catenoid_annulus(6.0 * PI, 0.2, 0.25).is_err());
        assert!(catenoid_annulus(6.0 * PI, -1.0, 0.25).is_err());
    }

    #[test]
    fn clearance_signs() {
        let b = catenoid_annulus(6.0 * PI, 1.0, 0.25).unwrap();
        // The waist circle itself has zero clearance.
        let on_waist = b.center + Point3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(b.signed_clearance(on_waist).unwrap(), 0.0, epsilon = 1e-14);
        // The barrier axis is deep inside at every height in the band.
        assert!(b.signed_clearance(b.center).unwrap() < 0.0);
        assert!(b.signed_clearance(b.center + Point3::new(0.0, 0.0, 1.5)).unwrap() < 0.0);
        // Outside the clip band there is no constraint.
        assert_eq!(b.signed_clearance(b.center + Point3::new(0.0, 0.0, 2.0)), None);
        assert_eq!(b.keep_outside_violation(b.center, 0.1), 0.1 + b.neck);
        assert_eq!(b.keep_outside_violation(b.center + Point3::new(5.0, 0.0, 0.0), 0.1), 0.0);
    }

    #[test]
    fn segment_crossing_detection() {
        let b = catenoid_annulus(6.0 * PI, 1.0, 0.25).unwrap();
        let inside = b.center;
        let outside = b.center + Point3::new(6.0, 0.0, 0.0);
        assert!(b.segment_crosses(inside, outside));
        assert!(!b.segment_crosses(outside, outside + Point3::new(1.0, 0.0, 0.0)));
        // A segment passing above the clip band does not cross.
        let high_a = b.center + Point3::new(-6.0, 0.0, 3.0);
        let high_b = b.center + Point3::new(6.0, 0.0, 3.0);
        assert!(!b.segment_crosses(high_a, high_b));
    }
}
