//! Helicoid geometry: parametrisation, ambient symmetries, side and angle
//! functions for the open region above the surface, boundary contours, and
//! catenoidal barrier annuli.

mod barrier;
mod boundary;

pub use barrier::{catenoid_annulus, CatenoidBarrier};
pub use boundary::{boundary_curve, BoundaryCurve, BoundaryTag, PieceGeom, PieceKind};

use std::f64::consts::PI;
use thiserror::Error;

/// Ambient points and vectors are plain `nalgebra` 3-vectors.
pub type Point3 = nalgebra::Vector3<f64>;

pub const TAU: f64 = 2.0 * PI;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    /// The queried point lies on the vertical axis where angular quantities
    /// are undefined.
    #[error("point lies on the vertical axis; angular data undefined")]
    OnAxis,
    /// The queried point lies strictly below the surface, outside the closed
    /// upper region where the angle function is defined.
    #[error("point lies outside the closure of the upper region")]
    OutsideDomain,
    /// A barrier of the requested size does not fit between the axis and the
    /// outer rim with the requested clearance.
    #[error("barrier infeasible: clip radius {clip_radius:.4} exceeds available clearance {available:.4}")]
    BarrierInfeasible { clip_radius: f64, available: f64 },
    /// A constructor argument was out of range.
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// The standard helicoid `F(u, v) = (u cos v, u sin v, v)`.
///
/// Ruled by horizontal lines through the vertical axis; the parameter `u` is
/// the signed distance from the axis along the ruling at height/angle `v`.
pub fn helicoid_point(u: f64, v: f64) -> Point3 {
    Point3::new(u * v.cos(), u * v.sin(), v)
}

/// Unit normal of the helicoid at `F(u, v)`, oriented so that at the origin
/// it points along `-y` (into the lower region).  Its negative points into
/// the upper region for every `(u, v)`.
pub fn helicoid_normal(u: f64, v: f64) -> Point3 {
    let s = (1.0 + u * u).sqrt();
    Point3::new(v.sin() / s, -v.cos() / s, u / s)
}

/// Gauss curvature of the helicoid at parameter `u`: `K = -1/(1+u^2)^2`.
pub fn helicoid_gauss_curvature(u: f64) -> f64 {
    let d = 1.0 + u * u;
    -1.0 / (d * d)
}

/// Squared norm of the second fundamental form of the helicoid at `u`:
/// `|A|^2 = 2/(1+u^2)^2` (minimal, so `|A|^2 = -2K`).
pub fn helicoid_shape_norm_sq(u: f64) -> f64 {
    let d = 1.0 + u * u;
    2.0 / (d * d)
}

/// Orientation-preserving and -reversing symmetries of the helicoid used
/// throughout: vertical screw motions and the three coordinate-axis flips.
///
/// `RotX` and `RotZ` preserve the helicoid pointwise as a set; `RotY`
/// (their composition) preserves each of the two complementary regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymmetryElement {
    Identity,
    /// Rotate by `s` about the vertical axis while translating by `s`
    /// vertically; for every `s` this preserves the helicoid.
    Screw(f64),
    /// Rotation by pi about the x-axis.
    RotX,
    /// Rotation by pi about the y-axis.
    RotY,
    /// Rotation by pi about the z-axis.
    RotZ,
}

impl SymmetryElement {
    /// Whether the element preserves the two sides of the helicoid (maps the
    /// upper region to itself) or swaps them.
    pub fn preserves_sides(self) -> bool {
        !matches!(self, SymmetryElement::RotX | SymmetryElement::RotZ)
    }
}

/// Apply a symmetry element to an ambient point.
pub fn apply_symmetry(sym: SymmetryElement, p: Point3) -> Point3 {
    match sym {
        SymmetryElement::Identity => p,
        SymmetryElement::Screw(s) => {
            let (sin, cos) = s.sin_cos();
            Point3::new(p.x * cos - p.y * sin, p.x * sin + p.y * cos, p.z + s)
        }
        SymmetryElement::RotX => Point3::new(p.x, -p.y, -p.z),
        SymmetryElement::RotY => Point3::new(-p.x, p.y, -p.z),
        SymmetryElement::RotZ => Point3::new(-p.x, -p.y, p.z),
    }
}

/// Branch gap of an off-axis point: the angular distance, in `[0, 2pi)`,
/// from the helicoid sheet directly below.  Values in `(0, pi)` are the
/// upper region, `(pi, 2pi)` the lower, and `0`/`pi` the surface itself.
pub fn branch_gap(p: Point3) -> Result<f64, GeometryError> {
    let r = p.x.hypot(p.y);
    if r == 0.0 {
        return Err(GeometryError::OnAxis);
    }
    let phi = p.y.atan2(p.x);
    Ok((phi - p.z).rem_euclid(TAU))
}

/// Which side of the helicoid an ambient point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The open region containing the positive y-axis.
    Upper,
    /// The open region containing the negative y-axis.
    Lower,
    /// On the helicoid itself (within angular tolerance).
    OnSurface,
    /// On the vertical axis, which belongs to the surface.
    OnAxis,
}

/// Classify a point against the helicoid with an angular tolerance `tol`
/// (radians) for the on-surface band.
pub fn side_of_helicoid(p: Point3, tol: f64) -> Side {
    match branch_gap(p) {
        Err(_) => Side::OnAxis,
        Ok(g) => {
            if g < tol || g > TAU - tol || (g - PI).abs() < tol {
                Side::OnSurface
            } else if g < PI {
                Side::Upper
            } else {
                Side::Lower
            }
        }
    }
}

/// Angular depth by which `p` penetrates the closed lower region; zero when
/// `p` lies in the closure of the upper region.  Used as the containment
/// penalty for solves confined to the upper side.
pub fn upper_region_violation(p: Point3) -> f64 {
    match branch_gap(p) {
        Err(_) => 0.0,
        Ok(g) => {
            if g <= PI {
                0.0
            } else {
                (g - PI).min(TAU - g)
            }
        }
    }
}

/// The global angle function on the closure of the upper region (minus the
/// axis): the continuous branch `theta` of the cylindrical angle with
/// `theta(x, 0, 0) = 0` for `x > 0` and `theta - pi <= z <= theta`.
///
/// On the upper sheet of the helicoid through `p` it equals `z`, and on the
/// lower sheet `z + pi`.  Errors with [`GeometryError::OutsideDomain`] when
/// `p` lies strictly below the surface.
pub fn angle_function(p: Point3) -> Result<f64, GeometryError> {
    let g = branch_gap(p)?;
    // Tolerate tiny numerical excursions below either sheet.
    const SLACK: f64 = 1e-9;
    if g <= PI + SLACK {
        Ok(p.z + g.min(PI))
    } else if g >= TAU - SLACK {
        Ok(p.z)
    } else {
        Err(GeometryError::OutsideDomain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn helicoid_point_basics() {
        assert_eq!(helicoid_point(0.0, 0.0), Point3::new(0.0, 0.0, 0.0));
        let p = helicoid_point(2.0, PI / 2.0);
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.z, PI / 2.0);
        // Negative u reaches the antipodal ruling point at the same height.
        let q = helicoid_point(-2.0, PI / 2.0);
        assert_abs_diff_eq!(q.y, -2.0, epsilon = 1e-15);
    }

    #[test]
    fn helicoid_normal_is_unit_and_orthogonal() {
        for &(u, v) in &[(0.0, 0.0), (1.5, 0.7), (-3.0, 2.2), (10.0, -5.0)] {
            let n = helicoid_normal(u, v);
            assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-14);
            let du = Point3::new(v.cos(), v.sin(), 0.0);
            let dv = Point3::new(-u * v.sin(), u * v.cos(), 1.0);
            assert_abs_diff_eq!(n.dot(&du), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(n.dot(&dv), 0.0, epsilon = 1e-14);
        }
        // At the origin the normal is -y, so the upper region lies along -n.
        let n0 = helicoid_normal(0.0, 0.0);
        assert_relative_eq!(n0, Point3::new(0.0, -1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn screw_motion_preserves_helicoid() {
        for &s in &[0.3, -1.1, PI, 7.0] {
            for &(u, v) in &[(1.0, 0.0), (-2.0, 1.3), (0.5, -4.0)] {
                let moved = apply_symmetry(SymmetryElement::Screw(s), helicoid_point(u, v));
                assert_relative_eq!(moved, helicoid_point(u, v + s), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn flips_compose_as_expected() {
        let p = Point3::new(0.3, -1.2, 2.5);
        // The y-flip is the composition of the x-flip and the z-flip.
        let via_composition =
            apply_symmetry(SymmetryElement::RotZ, apply_symmetry(SymmetryElement::RotX, p));
        assert_eq!(via_composition, apply_symmetry(SymmetryElement::RotY, p));
        // Each flip is an involution.
        for sym in [SymmetryElement::RotX, SymmetryElement::RotY, SymmetryElement::RotZ] {
            assert_eq!(apply_symmetry(sym, apply_symmetry(sym, p)), p);
        }
    }

    #[test]
    fn x_and_z_flips_preserve_surface_but_swap_sides() {
        let on_surface = helicoid_point(1.7, 0.9);
        for sym in [SymmetryElement::RotX, SymmetryElement::RotZ] {
            let q = apply_symmetry(sym, on_surface);
            assert_eq!(side_of_helicoid(q, 1e-9), Side::OnSurface);
            assert!(!sym.preserves_sides());
        }
        let above = Point3::new(0.0, 2.0, 0.0);
        assert_eq!(side_of_helicoid(above, 1e-9), Side::Upper);
        assert_eq!(
            side_of_helicoid(apply_symmetry(SymmetryElement::RotX, above), 1e-9),
            Side::Lower
        );
        assert_eq!(
            side_of_helicoid(apply_symmetry(SymmetryElement::RotY, above), 1e-9),
            Side::Upper
        );
    }

    #[test]
    fn side_classification() {
        // The positive y-axis is in the upper region, negative in the lower.
        assert_eq!(side_of_helicoid(Point3::new(0.0, 1.0, 0.0), 1e-9), Side::Upper);
        assert_eq!(side_of_helicoid(Point3::new(0.0, -1.0, 0.0), 1e-9), Side::Lower);
        // Points on the surface.
        assert_eq!(side_of_helicoid(helicoid_point(3.0, 1.1), 1e-9), Side::OnSurface);
        assert_eq!(side_of_helicoid(Point3::new(0.0, 0.0, 0.4), 1e-9), Side::OnAxis);
        // The screw motion preserves both open regions.
        let p = Point3::new(0.4, 1.0, 0.2);
        assert_eq!(side_of_helicoid(p, 1e-9), Side::Upper);
        for &s in &[0.5, 2.0, -3.3, 11.0] {
            assert_eq!(
                side_of_helicoid(apply_symmetry(SymmetryElement::Screw(s), p), 1e-9),
                Side::Upper
            );
        }
    }

    #[test]
    fn angle_function_normalisation() {
        // theta = 0 on the positive x-axis, pi on the negative x-axis.
        assert_abs_diff_eq!(angle_function(Point3::new(2.0, 0.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(angle_function(Point3::new(-2.0, 0.0, 0.0)).unwrap(), PI);
        // Continuous branch: just above the positive x-axis theta is small.
        let theta = angle_function(Point3::new(2.0, 0.1, 0.0)).unwrap();
        assert!(theta > 0.0 && theta < 0.1);
        // On the sheet through p the angle equals the height.
        let p = helicoid_point(2.0, 5.0);
        assert_relative_eq!(angle_function(p).unwrap(), 5.0, epsilon = 1e-12);
        // The slab bound theta - pi <= z <= theta holds in the upper region.
        let q = apply_symmetry(SymmetryElement::Screw(4.0), Point3::new(0.3, 0.8, 0.3));
        let th = angle_function(q).unwrap();
        assert!(th - PI <= q.z + 1e-12 && q.z <= th + 1e-12);
    }

    #[test]
    fn angle_function_rejects_lower_region_and_axis() {
        assert_eq!(
            angle_function(Point3::new(0.0, -1.0, 0.0)),
            Err(GeometryError::OutsideDomain)
        );
        assert_eq!(angle_function(Point3::new(0.0, 0.0, 1.0)), Err(GeometryError::OnAxis));
    }

    #[test]
    fn angle_function_is_screw_equivariant() {
        let p = Point3::new(0.7, 1.9, 0.3);
        let base = angle_function(p).unwrap();
        for &s in &[0.4, -2.0, 9.0] {
            let moved = angle_function(apply_symmetry(SymmetryElement::Screw(s), p)).unwrap();
            assert_relative_eq!(moved, base + s, epsilon = 1e-12);
        }
    }

    #[test]
    fn violation_depth_vanishes_on_closed_upper_region() {
        assert_eq!(upper_region_violation(Point3::new(0.0, 2.0, 0.0)), 0.0);
        assert_eq!(upper_region_violation(helicoid_point(1.0, 0.3)), 0.0);
        // Deep in the lower region the depth is pi/2 at most.
        let depth = upper_region_violation(Point3::new(0.0, -2.0, 0.0));
        assert_relative_eq!(depth, PI / 2.0, epsilon = 1e-12);
        // Just below the surface the depth is small.
        let eps: f64 = 1e-3;
        let just_below = Point3::new((eps / 2.0).cos() * 2.0, -(eps / 2.0).sin() * 2.0, 0.0);
        let d = upper_region_violation(just_below);
        assert!(d > 0.0 && d < eps, "depth {d}");
    }
}
