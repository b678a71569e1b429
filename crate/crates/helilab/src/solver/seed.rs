//! Seed surfaces for the two-quadrant Plateau problem.
//!
//! The seed consists of two structured quadrant sheets pushed slightly into
//! the upper region, with a small corner block removed from each near the
//! origin and replaced by a single "bridge" membrane.  The bridge's rim
//! follows the two cut staircases and the four contour stubs through both
//! origin visits, and its interior cones down to an apex on the positive
//! y-axis.  The result is one embedded disk spanning the full contour,
//! equivariant under the y-flip, with the origin double point kept as two
//! distinct vertices.  A large apex amplitude (`Bump`) seeds the
//! handle-forming neck; a small one (`None`) is the infinitesimal joining.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::SolverError;
use crate::geometry::{helicoid_normal, helicoid_point, PieceGeom, Point3};
use crate::mesh::{TriMesh, VertexRole};

/// How the seed connects the two sheets through the upper region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HandleSeed {
    /// Infinitesimal joining: the bridge apex sits barely off the origin.
    None,
    /// A neck of the given amplitude reaching toward the positive y-axis,
    /// where the handle's closed geodesic midpoint lives.
    Bump { amplitude: f64 },
}

/// Seed construction parameters.
#[derive(Debug, Clone, Copy)]
pub struct SeedParams {
    /// Rim radius of the boundary contour.
    pub radius: f64,
    /// Quadrant height (turn angle) of the contour.
    pub height: f64,
    /// Grid cells along the ruling direction on each quadrant.
    pub nu: usize,
    /// Grid cells along the turning direction on each quadrant.
    pub nv: usize,
    /// Ruling extent of the corner block replaced by the bridge.
    pub bridge_u: f64,
    /// Turning extent of the corner block (kept below pi/2 so the bridge
    /// cone stays in the upper region).
    pub bridge_v: f64,
    /// Peak offset pushing sheet interiors into the upper region.
    pub offset: f64,
    pub handle: HandleSeed,
}

impl SeedParams {
    /// Reasonable defaults for a contour of the given size.
    pub fn new(radius: f64, height: f64, nu: usize, nv: usize) -> SeedParams {
        SeedParams {
            radius,
            height,
            nu,
            nv,
            bridge_u: (0.15 * radius).clamp(0.8, 2.5),
            bridge_v: (0.4 * height).min(0.42 * PI),
            offset: 0.05 * height.min(radius),
            handle: HandleSeed::None,
        }
    }

    pub fn with_handle(mut self, handle: HandleSeed) -> SeedParams {
        self.handle = handle;
        self
    }
}

/// Build the seed disk.  See the module docs for the construction.
pub fn initial_disk(params: &SeedParams) -> Result<TriMesh, SolverError> {
    let &SeedParams { radius, height, nu, nv, bridge_u, bridge_v, offset, handle } = params;
    if !(radius > 0.0 && height > 0.0) || nu < 4 || nv < 4 {
        return Err(SolverError::BadSeedParameters(
            "radius/height must be positive and nu/nv at least 4".into(),
        ));
    }
    let du = radius / nu as f64;
    let dv = height / nv as f64;
    let bi = ((bridge_u / du).round() as usize).clamp(1, nu - 2);
    let bj = ((bridge_v / dv).round() as usize).clamp(1, nv - 2);
    if bj as f64 * dv >= 0.48 * PI {
        return Err(SolverError::BadSeedParameters(format!(
            "bridge_v = {:.3} reaches too far around the axis (must stay below pi/2)",
            bj as f64 * dv
        )));
    }
    let apex_height = match handle {
        HandleSeed::None => (0.75 * (bi as f64 * du).min(bj as f64 * dv)).max(2.0 * du.min(dv)),
        HandleSeed::Bump { amplitude } => {
            if !(amplitude > 0.0) {
                return Err(SolverError::BadSeedParameters("bump amplitude must be positive".into()));
            }
            amplitude
        }
    };

    let mut positions: Vec<Point3> = Vec::new();
    let mut roles: Vec<VertexRole> = Vec::new();
    let mut attr: Vec<Option<(usize, f64)>> = Vec::new();
    let push = |p: Point3, role: VertexRole, a: Option<(usize, f64)>,
                    positions: &mut Vec<Point3>,
                    roles: &mut Vec<VertexRole>,
                    attr: &mut Vec<Option<(usize, f64)>>|
     -> usize {
        positions.push(p);
        roles.push(role);
        attr.push(a);
        positions.len() - 1
    };

    // Smooth interior offset into the upper region, vanishing at the
    // contour; the bridge rim region gets a proportionally small push.
    let taper = |i: usize, j: usize| -> f64 {
        let su = (PI * i as f64 / nu as f64).sin();
        let sv = (PI * j as f64 / nv as f64).sin();
        offset * (su * sv).powf(0.75)
    };

    // --- Quadrant grids -------------------------------------------------
    // Sheet 1 covers positive rulings (u in (0,R), v in (0,h)); sheet 2 is
    // its y-flip image.  Vertex (i, j) is kept unless it sits strictly
    // inside the removed corner block.
    let mut q1: HashMap<(usize, usize), usize> = HashMap::new();
    let mut q2: HashMap<(usize, usize), usize> = HashMap::new();
    for sheet in 0..2 {
        for j in 0..=nv {
            for i in 0..=nu {
                if i < bi && j < bj {
                    continue; // inside the removed corner block
                }
                let u = i as f64 * du;
                let v = j as f64 * dv;
                let (role, a) = classify_grid_vertex(sheet, i, j, nu, nv, bi, bj, u, v, radius, height);
                let p = if sheet == 0 {
                    helicoid_point(u, v) - taper(i, j) * helicoid_normal(u, v)
                } else {
                    helicoid_point(-u, -v) - taper(i, j) * helicoid_normal(-u, -v)
                };
                let idx = push(p, role, a, &mut positions, &mut roles, &mut attr);
                if sheet == 0 {
                    q1.insert((i, j), idx);
                } else {
                    q2.insert((i, j), idx);
                }
            }
        }
    }

    // --- Bridge rim loop ------------------------------------------------
    // Cyclic vertex list: staircase cut of sheet 1, upper axis stub down to
    // the first origin visit, negative-x stub, staircase cut of sheet 2,
    // lower axis stub to the second origin visit, positive-x stub.  The
    // second half is exactly the y-flip of the first.
    let mut loop_idx: Vec<usize> = Vec::new();
    let staircase = |sheet: usize, q: &HashMap<(usize, usize), usize>| -> Vec<usize> {
        let _ = sheet;
        let mut out = Vec::new();
        for j in 0..=bj {
            out.push(q[&(bi, j)]);
        }
        for i in (0..bi).rev() {
            out.push(q[&(i, bj)]);
        }
        out
    };
    // Sheet-1 staircase: from (bi, 0) up to (0, bj) = axis point (0,0,v_bj).
    loop_idx.extend(staircase(0, &q1));
    // Upper axis stub: (0,0,v_j) for j = bj-1 .. 1, then the origin (o1).
    for j in (1..bj).rev() {
        let v = j as f64 * dv;
        let idx = push(
            Point3::new(0.0, 0.0, v),
            VertexRole::BoundaryFixed,
            Some((2, (height - v) / height)),
            &mut positions,
            &mut roles,
            &mut attr,
        );
        loop_idx.push(idx);
    }
    let o1 = push(
        Point3::zeros(),
        VertexRole::OriginDouble,
        Some((2, 1.0)),
        &mut positions,
        &mut roles,
        &mut attr,
    );
    loop_idx.push(o1);
    // Negative-x stub: (-u_i, 0, 0) for i = 1 .. bi-1 (endpoint is sheet 2's
    // staircase start).
    for i in 1..bi {
        let u = i as f64 * du;
        let idx = push(
            Point3::new(-u, 0.0, 0.0),
            VertexRole::BoundaryFixed,
            Some((3, u / radius)),
            &mut positions,
            &mut roles,
            &mut attr,
        );
        loop_idx.push(idx);
    }
    // Sheet-2 staircase: from (-u_bi, 0, 0) to (0, 0, -v_bj).
    loop_idx.extend(staircase(1, &q2));
    // Lower axis stub and the second origin visit (o2).
    for j in (1..bj).rev() {
        let v = j as f64 * dv;
        let idx = push(
            Point3::new(0.0, 0.0, -v),
            VertexRole::BoundaryFixed,
            Some((6, (height - v) / height)),
            &mut positions,
            &mut roles,
            &mut attr,
        );
        loop_idx.push(idx);
    }
    let o2 = push(
        Point3::zeros(),
        VertexRole::OriginDouble,
        Some((6, 1.0)),
        &mut positions,
        &mut roles,
        &mut attr,
    );
    loop_idx.push(o2);
    // Positive-x stub back to the sheet-1 staircase start.
    for i in 1..bi {
        let u = i as f64 * du;
        let idx = push(
            Point3::new(u, 0.0, 0.0),
            VertexRole::BoundaryFixed,
            Some((7, u / radius)),
            &mut positions,
            &mut roles,
            &mut attr,
        );
        loop_idx.push(idx);
    }
    let m = loop_idx.len();
    debug_assert_eq!(m % 2, 0);

    // --- Bridge membrane ------------------------------------------------
    // Concentric rings from the rim toward an apex on the positive y-axis.
    // The shrink profile is sublinear so a large amplitude forms a rounded
    // neck instead of a sharp cone.
    let apex_pos = Point3::new(0.0, apex_height, 0.0);
    let rings = ((bi + bj).max(3)).min(24);
    let mut ring_idx: Vec<Vec<usize>> = Vec::new();
    for k in 1..rings {
        let t = k as f64 / rings as f64;
        let shrink = (1.0 - t).powf(0.8);
        let mut ring = Vec::with_capacity(m);
        for &l in &loop_idx {
            let p = apex_pos + shrink * (positions[l] - apex_pos);
            ring.push(push(p, VertexRole::Free, None, &mut positions, &mut roles, &mut attr));
        }
        ring_idx.push(ring);
    }
    let apex = push(apex_pos, VertexRole::Free, None, &mut positions, &mut roles, &mut attr);

    // --- Faces ----------------------------------------------------------
    let mut faces: Vec<[usize; 3]> = Vec::new();
    // Quadrant cells (skipping the removed corner block).
    for sheet in 0..2 {
        let q = if sheet == 0 { &q1 } else { &q2 };
        for j in 0..nv {
            for i in 0..nu {
                if i < bi && j < bj {
                    continue;
                }
                let a = q[&(i, j)];
                let b = q[&(i + 1, j)];
                let c = q[&(i, j + 1)];
                let d = q[&(i + 1, j + 1)];
                if (i + j) % 2 == 0 {
                    faces.push([a, b, d]);
                    faces.push([a, d, c]);
                } else {
                    faces.push([a, b, c]);
                    faces.push([b, d, c]);
                }
            }
        }
    }
    // Bridge strips: rim -> ring 1 -> ... -> apex.  Strip triangles run
    // along the rim direction so they share cut edges with quadrant faces
    // in opposite orientation.
    let layer = |k: usize, loop_idx: &[usize], ring_idx: &[Vec<usize>]| -> Vec<usize> {
        if k == 0 {
            loop_idx.to_vec()
        } else {
            ring_idx[k - 1].clone()
        }
    };
    for k in 0..rings - 1 {
        let inner = layer(k, &loop_idx, &ring_idx);
        let outer = layer(k + 1, &loop_idx, &ring_idx);
        for i in 0..m {
            let a = inner[i];
            let b = inner[(i + 1) % m];
            let c = outer[i];
            let d = outer[(i + 1) % m];
            faces.push([a, b, d]);
            faces.push([a, d, c]);
        }
    }
    let last = layer(rings - 1, &loop_idx, &ring_idx);
    for i in 0..m {
        faces.push([last[i], last[(i + 1) % m], apex]);
    }

    // --- Symmetry pairing ------------------------------------------------
    let mut partner = vec![usize::MAX; positions.len()];
    for j in 0..=nv {
        for i in 0..=nu {
            if let (Some(&a), Some(&b)) = (q1.get(&(i, j)), q2.get(&(i, j))) {
                partner[a] = b;
                partner[b] = a;
            }
        }
    }
    let half = m / 2;
    for i in 0..m {
        partner[loop_idx[i]] = loop_idx[(i + half) % m];
        for ring in &ring_idx {
            partner[ring[i]] = ring[(i + half) % m];
        }
    }
    partner[apex] = apex;
    debug_assert!(partner.iter().all(|&p| p != usize::MAX));

    let mesh = TriMesh {
        positions,
        faces,
        roles,
        boundary_pieces: contour_pieces_for(radius, height),
        boundary_attr: attr,
        origin_pair: Some((o1, o2)),
        rot_y_partner: Some(partner),
    };
    mesh.half_edges().map_err(SolverError::InvalidSeedMesh)?;
    Ok(mesh)
}

/// The eight analytic contour pieces in traversal order (matching the
/// piece indices used in boundary attributes).
fn contour_pieces_for(radius: f64, height: f64) -> Vec<PieceGeom> {
    let origin = Point3::zeros();
    vec![
        PieceGeom::HelicalArc { radius, v0: 0.0, v1: height },
        PieceGeom::Segment { a: helicoid_point(radius, height), b: Point3::new(0.0, 0.0, height) },
        PieceGeom::Segment { a: Point3::new(0.0, 0.0, height), b: origin },
        PieceGeom::Segment { a: origin, b: Point3::new(-radius, 0.0, 0.0) },
        PieceGeom::HelicalArc { radius: -radius, v0: 0.0, v1: -height },
        PieceGeom::Segment { a: helicoid_point(-radius, -height), b: Point3::new(0.0, 0.0, -height) },
        PieceGeom::Segment { a: Point3::new(0.0, 0.0, -height), b: origin },
        PieceGeom::Segment { a: origin, b: Point3::new(radius, 0.0, 0.0) },
    ]
}

/// Role and boundary attribute of quadrant grid vertex (i, j).
#[allow(clippy::too_many_arguments)]
fn classify_grid_vertex(
    sheet: usize,
    i: usize,
    j: usize,
    nu: usize,
    nv: usize,
    bi: usize,
    bj: usize,
    u: f64,
    v: f64,
    radius: f64,
    height: f64,
) -> (VertexRole, Option<(usize, f64)>) {
    // Contour pieces by index: see `contour_pieces_for`.
    let on_rim = i == nu;
    let on_top = j == nv;
    let on_axis = i == 0 && j >= bj;
    let on_xseg = j == 0 && i >= bi;
    if !(on_rim || on_top || on_axis || on_xseg) {
        return (VertexRole::Free, None);
    }
    let a = if sheet == 0 {
        if on_rim {
            (0, v / height) // outer helical arc
        } else if on_top {
            (1, (radius - u) / radius) // top edge toward the axis
        } else if on_axis {
            (2, (height - v) / height) // upper axis segment downward
        } else {
            (7, u / radius) // positive-x ruling outward
        }
    } else if on_rim {
        (4, v / height) // lower helical arc
    } else if on_top {
        (5, (radius - u) / radius) // bottom edge toward the axis
    } else if on_axis {
        (6, (height - v) / height) // lower axis segment upward
    } else {
        (3, u / radius) // negative-x ruling outward
    };
    (VertexRole::BoundaryFixed, Some(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_symmetry, upper_region_violation, SymmetryElement};
    use crate::mesh::{self_intersects, VertexRole};

    fn params() -> SeedParams {
        SeedParams::new(6.0 * PI, PI, 36, 14)
    }

    #[test]
    fn seed_is_a_disk_spanning_the_contour() {
        for handle in [HandleSeed::None, HandleSeed::Bump { amplitude: 1.8 }] {
            let m = initial_disk(&params().with_handle(handle)).unwrap();
            assert_eq!(m.euler_characteristic().unwrap(), 1, "{handle:?}");
            assert_eq!(m.genus_with_boundary().unwrap(), (0, 1), "{handle:?}");
            let (o1, o2) = m.origin_pair.unwrap();
            assert_ne!(o1, o2);
            assert_eq!(m.positions[o1], m.positions[o2]);
            assert_eq!(m.roles[o1], VertexRole::OriginDouble);
            // Both origin vertices are on the single boundary loop.
            let he = m.half_edges().unwrap();
            assert_eq!(he.boundary_loops.len(), 1);
            assert!(he.boundary_loops[0].contains(&o1) && he.boundary_loops[0].contains(&o2));
        }
    }

    #[test]
    fn seed_respects_the_upper_region() {
        let m = initial_disk(&params().with_handle(HandleSeed::Bump { amplitude: 1.5 })).unwrap();
        for (v, p) in m.positions.iter().enumerate() {
            let depth = upper_region_violation(*p);
            assert!(
                depth < 1e-9,
                "vertex {v} at {p:?} penetrates the lower region by {depth:.2e}"
            );
        }
    }

    #[test]
    fn seed_is_equivariant() {
        let m = initial_disk(&params().with_handle(HandleSeed::Bump { amplitude: 1.2 })).unwrap();
        let partner = m.rot_y_partner.as_ref().unwrap();
        let mut fixed = 0;
        for v in 0..m.vertex_count() {
            let w = partner[v];
            assert_eq!(partner[w], v, "pairing must be an involution");
            let image = apply_symmetry(SymmetryElement::RotY, m.positions[v]);
            assert!(
                (image - m.positions[w]).norm() < 1e-12,
                "vertex {v} image off by {:.2e}",
                (image - m.positions[w]).norm()
            );
            if w == v {
                fixed += 1;
            }
        }
        // Only the apex is fixed by the flip.
        assert_eq!(fixed, 1);
    }

    #[test]
    fn seed_is_embedded() {
        let none = initial_disk(&params()).unwrap();
        assert!(self_intersects(&none, 1e-9).is_empty());
        let bump = initial_disk(&params().with_handle(HandleSeed::Bump { amplitude: 1.8 })).unwrap();
        assert!(self_intersects(&bump, 1e-9).is_empty());
    }

    #[test]
    fn boundary_vertices_sit_on_the_contour() {
        let m = initial_disk(&params()).unwrap();
        for v in 0..m.vertex_count() {
            if m.roles[v] == VertexRole::Free {
                continue;
            }
            let (piece, t) = m.boundary_attr[v].expect("boundary vertex without attribute");
            let on_curve = m.boundary_pieces[piece].eval(t);
            assert!(
                (on_curve - m.positions[v]).norm() < 1e-10,
                "vertex {v}: attr ({piece}, {t:.4}) evaluates {:.2e} away",
                (on_curve - m.positions[v]).norm()
            );
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut p = params();
        p.nu = 2;
        assert!(initial_disk(&p).is_err());
        let mut p = params();
        p.bridge_v = 2.0; // reaches past pi/2 around the axis
        assert!(initial_disk(&p).is_err());
        let p = params().with_handle(HandleSeed::Bump { amplitude: -1.0 });
        assert!(initial_disk(&p).is_err());
    }
}
