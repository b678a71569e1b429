//! Assembly of the closed-up surfaces: reflect a solved disk across the
//! vertical axis to one fundamental piece, tile fundamental pieces by the
//! screw motion, and trace the shortest closed geodesic through the handle.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{apply_symmetry, helicoid_point, PieceGeom, Point3, SymmetryElement};
use crate::mesh::{MeshError, SurfaceProjector, TriMesh, VertexRole};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("weld mismatch: {0}")]
    WeldMismatch(String),
    #[error("the two origin vertices are not connected through the interior; no handle present")]
    NoHandle,
    #[error("mesh error: {0}")]
    Mesh(#[from] MeshError),
}

fn rot_z(p: Point3) -> Point3 {
    Point3::new(-p.x, -p.y, p.z)
}

/// Canonical exact key for a coordinate (collapses `-0.0` onto `0.0`).
fn exact_key(p: Point3) -> (u64, u64, u64) {
    ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits(), (p.z + 0.0).to_bits())
}

/// Double a solved disk by the half-turn about the vertical axis, welding
/// the two copies along the shared axis and horizontal-ruling segments.
/// All four origin corner visits merge into a single interior vertex whose
/// link closes up through both sheets, which is what makes the result a
/// genus-one surface rather than two disks pinched at a point.
pub fn assemble_m(d: &TriMesh) -> Result<TriMesh, AssemblyError> {
    let Some((o1, o2)) = d.origin_pair else {
        return Err(AssemblyError::WeldMismatch(
            "input has no origin double point; a degenerate no-handle spanning surface \
             cannot be doubled into a genus-one piece"
                .into(),
        ));
    };
    let (lo, hi) = d.bounds();
    let scale = (hi - lo).norm().max(1.0);
    let tol = 1e-9 * scale;
    if d.positions[o1].norm() > tol || d.positions[o2].norm() > tol {
        return Err(AssemblyError::WeldMismatch(
            "origin double-point vertices are not at the origin".into(),
        ));
    }
    let n = d.vertex_count();

    let on_weld = |p: Point3| -> bool {
        let on_x_axis = p.y.abs() <= tol && p.z.abs() <= tol;
        let on_z_axis = p.x.abs() <= tol && p.y.abs() <= tol;
        on_x_axis || on_z_axis
    };

    // D-side indices: drop o2 (merged into o1), keep everything else.
    let mut map_d = vec![usize::MAX; n];
    let mut positions: Vec<Point3> = Vec::with_capacity(2 * n);
    for v in 0..n {
        if v == o2 {
            continue;
        }
        map_d[v] = positions.len();
        positions.push(d.positions[v]);
    }
    map_d[o2] = map_d[o1];

    // Weld lookup for the reflected copy, by exact canonical position.
    let mut weld: HashMap<(u64, u64, u64), usize> = HashMap::new();
    for v in 0..n {
        if d.roles[v] != VertexRole::Free && on_weld(d.positions[v]) {
            weld.insert(exact_key(d.positions[v]), map_d[v]);
        }
    }

    let mut map_c = vec![usize::MAX; n];
    for v in 0..n {
        if v == o1 || v == o2 {
            map_c[v] = map_d[o1];
            continue;
        }
        let q = rot_z(d.positions[v]);
        if d.roles[v] != VertexRole::Free && on_weld(q) {
            match weld.get(&exact_key(q)) {
                Some(&idx) => map_c[v] = idx,
                None => {
                    return Err(AssemblyError::WeldMismatch(format!(
                        "axis vertex {v} at {:?} has no counterpart within tolerance",
                        q
                    )));
                }
            }
        } else {
            map_c[v] = positions.len();
            positions.push(q);
        }
    }

    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(2 * d.faces.len());
    for f in &d.faces {
        faces.push([map_d[f[0]], map_d[f[1]], map_d[f[2]]]);
    }
    // The half-turn fixes the weld lines pointwise, so the reflected copy
    // traverses them in the same direction as the original; its faces are
    // flipped to restore a coherent orientation.
    for f in &d.faces {
        faces.push([map_c[f[0]], map_c[f[2]], map_c[f[1]]]);
    }

    // Boundary of the doubled piece: both helical arcs and both horizontal
    // edges, in each copy.
    let mut boundary_pieces = Vec::new();
    let mut piece_map_d = vec![None; d.boundary_pieces.len()];
    let mut piece_map_c = vec![None; d.boundary_pieces.len()];
    for (i, piece) in d.boundary_pieces.iter().enumerate() {
        let survives = match *piece {
            PieceGeom::HelicalArc { .. } => true,
            PieceGeom::Segment { a, b } => !(on_weld(a) && on_weld(b)),
            PieceGeom::CircleArc { .. } => true,
        };
        if !survives {
            continue;
        }
        piece_map_d[i] = Some(boundary_pieces.len());
        boundary_pieces.push(*piece);
        let reflected = match *piece {
            PieceGeom::HelicalArc { radius, v0, v1 } => {
                PieceGeom::HelicalArc { radius: -radius, v0, v1 }
            }
            PieceGeom::Segment { a, b } => PieceGeom::Segment { a: rot_z(a), b: rot_z(b) },
            PieceGeom::CircleArc { center, radius, a0, a1 } => PieceGeom::CircleArc {
                center: rot_z(center),
                radius,
                a0: a0 + std::f64::consts::PI,
                a1: a1 + std::f64::consts::PI,
            },
        };
        piece_map_c[i] = Some(boundary_pieces.len());
        boundary_pieces.push(reflected);
    }

    let nm = positions.len();
    let mut boundary_attr = vec![None; nm];
    for v in 0..n {
        if let Some((piece, t)) = d.boundary_attr[v] {
            if let Some(pd) = piece_map_d[piece] {
                boundary_attr[map_d[v]] = Some((pd, t));
                if map_c[v] >= nm {
                    continue;
                }
                if map_c[v] != map_d[v] {
                    if let Some(pc) = piece_map_c[piece] {
                        boundary_attr[map_c[v]] = Some((pc, t));
                    }
                }
            }
        }
    }

    // Symmetry pairing carries over: the y-flip commutes with the
    // half-turn, so each copy pairs within itself.
    let rot_y_partner = d.rot_y_partner.as_ref().map(|partner| {
        let mut out = vec![usize::MAX; nm];
        for v in 0..n {
            out[map_d[v]] = map_d[partner[v]];
            out[map_c[v]] = map_c[partner[v]];
        }
        out
    });

    let mut m = TriMesh {
        positions,
        faces,
        roles: vec![VertexRole::Free; nm],
        boundary_pieces,
        boundary_attr,
        origin_pair: None,
        rot_y_partner,
    };
    // Roles follow the topology of the welded result; the weld lines are
    // now interior.
    let he = m.half_edges().map_err(|e| {
        AssemblyError::WeldMismatch(format!("welded surface is not a manifold: {e}"))
    })?;
    for v in 0..nm {
        if he.boundary_vertex[v] {
            m.roles[v] = VertexRole::BoundaryFixed;
        } else {
            m.boundary_attr[v] = None;
        }
    }
    Ok(m)
}

/// Screw motion by angle/height `s` on the unit-pitch axis.
fn screw(s: f64, p: Point3) -> Point3 {
    let (sin, cos) = s.sin_cos();
    Point3::new(p.x * cos - p.y * sin, p.x * sin + p.y * cos, p.z + s)
}

/// Tile an odd number of screw-motion copies of a fundamental piece,
/// welding consecutive copies along their shared horizontal boundary
/// lines.  `half_turn` is the quadrant height `h`; consecutive copies are
/// related by the screw motion through `2h`.
pub fn tile_screw(m: &TriMesh, half_turn: f64, n_copies: usize) -> Result<TriMesh, AssemblyError> {
    if n_copies % 2 == 0 {
        return Err(AssemblyError::WeldMismatch(
            "tiling must use an odd number of copies to stay symmetric about z = 0".into(),
        ));
    }
    if n_copies == 1 {
        return Ok(m.clone());
    }
    let k_max = (n_copies as i64 - 1) / 2;
    let (lo, hi) = m.bounds();
    let scale = (hi - lo).norm().max(1.0);
    let tol = 1e-7 * scale;
    let quant = |p: Point3| -> (i64, i64, i64) {
        let q = 4.0 * tol;
        ((p.x / q).round() as i64, (p.y / q).round() as i64, (p.z / q).round() as i64)
    };
    let n = m.vertex_count();

    let mut positions: Vec<Point3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    // Positions already placed on potential weld planes, for stitching.
    let mut seam: HashMap<(i64, i64, i64), usize> = HashMap::new();

    for k in -k_max..=k_max {
        let s = 2.0 * half_turn * k as f64;
        let mut map = vec![usize::MAX; n];
        for v in 0..n {
            let p = screw(s, m.positions[v]);
            // Boundary vertices on a shared horizontal line weld onto an
            // existing vertex when one is present.
            let near_seam = m.roles[v] != VertexRole::Free
                && ((p.z - (2.0 * k as f64 + 1.0) * half_turn).abs() <= tol
                    || (p.z - (2.0 * k as f64 - 1.0) * half_turn).abs() <= tol);
            if near_seam {
                if let Some(&idx) = seam.get(&quant(p)) {
                    if (positions[idx] - p).norm() <= 8.0 * tol {
                        map[v] = idx;
                        continue;
                    }
                }
            }
            map[v] = positions.len();
            positions.push(p);
            if near_seam {
                seam.insert(quant(p), map[v]);
            }
        }
        for f in &m.faces {
            faces.push([map[f[0]], map[f[1]], map[f[2]]]);
        }
    }

    let nm = positions.len();
    let mut tiled = TriMesh {
        positions,
        faces,
        roles: vec![VertexRole::Free; nm],
        boundary_pieces: Vec::new(),
        boundary_attr: vec![None; nm],
        origin_pair: None,
        rot_y_partner: None,
    };
    let he = tiled.half_edges().map_err(|e| {
        AssemblyError::WeldMismatch(format!("tiled surface is not a manifold: {e}"))
    })?;
    for v in 0..nm {
        if he.boundary_vertex[v] {
            tiled.roles[v] = VertexRole::BoundaryFixed;
        }
    }
    Ok(tiled)
}

/// The handle loop of a solved disk: a closed curve through the origin
/// double point, crossing the surface's interior twice.
#[derive(Debug, Clone)]
pub struct GeodesicReport {
    /// Loop vertices from one origin visit to the other (both endpoints
    /// sit at the origin, closing the loop).
    pub polyline: Vec<Point3>,
    pub length: f64,
    /// Point at half arc length.
    pub midpoint: Point3,
    /// How far the loop ventures from the origin.
    pub max_distance_from_origin: f64,
    /// Set when the loop never leaves a few mesh cells around the origin:
    /// the "handle" is a degenerate membrane rather than a genuine neck,
    /// and no meaningful closed geodesic exists at the mesh scale.
    pub degenerate: bool,
}

/// Shortest closed geodesic through the handle.
///
/// The loop closes up through the identified origin double point, so on
/// the disk it runs from one origin vertex to the other.  A direct
/// shortest path is not topologically trapped on the disk: unconstrained
/// shortening slides it off the handle and collapses it at the origin.
/// The genuine handle geodesic is equivariant under the y-axis flip and
/// bisected by the symmetry axis, so the search bakes that in: Dijkstra
/// routes one half from the origin to the flip-fixed interior vertex,
/// mirrors it for the other half, and the curve-shortening sweeps keep
/// the loop flip-symmetric with its center pinned to the axis.
pub fn shortest_closed_geodesic(d: &TriMesh) -> Result<GeodesicReport, AssemblyError> {
    let Some((o1, o2)) = d.origin_pair else {
        return Err(AssemblyError::NoHandle);
    };
    let Some(partner) = d.rot_y_partner.as_ref() else {
        return Err(AssemblyError::NoHandle);
    };
    let n = d.vertex_count();
    let neighbors = d.vertex_neighbors();

    // The flip-fixed interior vertex sits on the symmetry axis at the top
    // of the handle; take the farthest one from the origin if several.
    let waypoint = (0..n)
        .filter(|&v| partner[v] == v && d.roles[v] == VertexRole::Free)
        .max_by(|&a, &b| {
            d.positions[a].norm().partial_cmp(&d.positions[b].norm()).unwrap()
        })
        .ok_or(AssemblyError::NoHandle)?;

    // Dijkstra from o1 to the waypoint; only interior vertices may be
    // crossed, so a connection that exists only through the boundary
    // reports NoHandle.
    let passable = |v: usize| v == o1 || v == o2 || d.roles[v] == VertexRole::Free;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = std::collections::BinaryHeap::new();
    dist[o1] = 0.0;
    heap.push((std::cmp::Reverse(ordered(0.0)), o1));
    while let Some((std::cmp::Reverse(dv), v)) = heap.pop() {
        let dv = dv.0;
        if dv > dist[v] {
            continue;
        }
        if v == waypoint {
            break;
        }
        for &w in &neighbors[v] {
            if !passable(w) {
                continue;
            }
            let cand = dv + (d.positions[v] - d.positions[w]).norm();
            if cand < dist[w] {
                dist[w] = cand;
                prev[w] = v;
                heap.push((std::cmp::Reverse(ordered(cand)), w));
            }
        }
    }
    if !dist[waypoint].is_finite() {
        return Err(AssemblyError::NoHandle);
    }
    let mut half = Vec::new();
    let mut v = waypoint;
    while v != usize::MAX {
        half.push(v);
        v = prev[v];
    }
    half.reverse();

    // Close with the mirrored half: waypoint -> flip(path) -> o2.
    let mut path: Vec<Point3> = half.iter().map(|&v| d.positions[v]).collect();
    for &v in half.iter().rev().skip(1) {
        path.push(d.positions[partner[v]]);
    }

    // Subdivide once for smoothing headroom, then shorten on-surface with
    // the loop's flip symmetry enforced every sweep.
    let mut curve = Vec::with_capacity(2 * path.len());
    for i in 0..path.len() - 1 {
        curve.push(path[i]);
        curve.push(0.5 * (path[i] + path[i + 1]));
    }
    curve.push(*path.last().unwrap());

    let flip = |p: Point3| apply_symmetry(SymmetryElement::RotY, p);
    let projector = SurfaceProjector::new(d);
    let len = curve.len();
    const SHORTENING_ITERATIONS: usize = 200;
    for _ in 0..SHORTENING_ITERATIONS {
        for i in 1..len - 1 {
            let target = 0.5 * (curve[i - 1] + curve[i + 1]);
            curve[i] = projector.project(target);
        }
        // Symmetrize: index i mirrors index len-1-i under the flip, and
        // the center vertex stays on the symmetry axis.
        for i in 1..len - 1 {
            let j = len - 1 - i;
            if i < j {
                let q = 0.5 * (curve[i] + flip(curve[j]));
                curve[i] = projector.project(q);
                curve[j] = flip(curve[i]);
            } else if i == j {
                let q = 0.5 * (curve[i] + flip(curve[i]));
                curve[i] = projector.project(q);
            }
        }
    }

    let mut length = 0.0;
    let mut max_distance_from_origin: f64 = 0.0;
    for (i, p) in curve.iter().enumerate() {
        if i > 0 {
            length += (p - curve[i - 1]).norm();
        }
        max_distance_from_origin = max_distance_from_origin.max(p.norm());
    }
    // Point at half arc length.
    let mut midpoint = curve[0];
    let mut acc = 0.0;
    for i in 1..curve.len() {
        let seg = (curve[i] - curve[i - 1]).norm();
        if acc + seg >= 0.5 * length {
            let t = (0.5 * length - acc) / seg.max(1e-300);
            midpoint = curve[i - 1] + t * (curve[i] - curve[i - 1]);
            break;
        }
        acc += seg;
    }
    let degenerate = max_distance_from_origin < 3.0 * d.mean_edge_length();
    Ok(GeodesicReport { polyline: curve, length, midpoint, max_distance_from_origin, degenerate })
}

/// Total-order wrapper for finite path lengths in the priority queue.
fn ordered(x: f64) -> OrderedF64 {
    OrderedF64(x)
}

#[derive(PartialEq, PartialOrd)]
struct OrderedF64(f64);

impl Eq for OrderedF64 {}

#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).expect("path lengths are finite")
    }
}

/// Write a geodesic polyline as CSV rows `x,y,z,s` with running arc
/// length.
pub fn geodesic_csv(report: &GeodesicReport) -> String {
    let mut out = String::from("x,y,z,s\n");
    let mut s = 0.0;
    for (i, p) in report.polyline.iter().enumerate() {
        if i > 0 {
            s += (p - report.polyline[i - 1]).norm();
        }
        out.push_str(&format!("{:.9e},{:.9e},{:.9e},{:.9e}\n", p.x, p.y, p.z, s));
    }
    out
}

/// Quantized membership set over mesh vertex positions, for setwise
/// symmetry checks with tolerance.
pub fn position_set(mesh: &TriMesh, cell: f64) -> PositionSet {
    let mut map = HashMap::new();
    for (i, p) in mesh.positions.iter().enumerate() {
        map.entry(cell_of(*p, cell)).or_insert_with(Vec::new).push(i);
    }
    PositionSet { map, cell, positions: mesh.positions.clone() }
}

fn cell_of(p: Point3, cell: f64) -> (i64, i64, i64) {
    ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64)
}

pub struct PositionSet {
    map: HashMap<(i64, i64, i64), Vec<usize>>,
    cell: f64,
    positions: Vec<Point3>,
}

impl PositionSet {
    /// Whether some stored position lies within `tol` of `p`.
    pub fn contains(&self, p: Point3, tol: f64) -> bool {
        let (cx, cy, cz) = cell_of(p, self.cell);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = self.map.get(&(cx + dx, cy + dy, cz + dz)) {
                        if list.iter().any(|&i| (self.positions[i] - p).norm() <= tol) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Reference boundary of the doubled fundamental piece: the four helical
/// arcs and four horizontal edges of both quadrant contours.
pub fn doubled_boundary_pieces(radius: f64, height: f64) -> Vec<PieceGeom> {
    let mut out = vec![
        PieceGeom::HelicalArc { radius, v0: 0.0, v1: height },
        PieceGeom::Segment { a: helicoid_point(radius, height), b: Point3::new(0.0, 0.0, height) },
        PieceGeom::HelicalArc { radius: -radius, v0: 0.0, v1: -height },
        PieceGeom::Segment {
            a: helicoid_point(-radius, -height),
            b: Point3::new(0.0, 0.0, -height),
        },
    ];
    let reflected: Vec<PieceGeom> = out
        .iter()
        .map(|piece| match *piece {
            PieceGeom::HelicalArc { radius, v0, v1 } => {
                PieceGeom::HelicalArc { radius: -radius, v0, v1 }
            }
            PieceGeom::Segment { a, b } => PieceGeom::Segment { a: rot_z(a), b: rot_z(b) },
            other => other,
        })
        .collect();
    out.extend(reflected);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build::{helicoid_double_patch, helicoid_patch};
    use crate::solver::{initial_disk, HandleSeed, SeedParams};
    use std::f64::consts::PI;

    fn seed() -> TriMesh {
        let params = SeedParams::new(4.0 * PI, PI, 28, 12)
            .with_handle(HandleSeed::Bump { amplitude: 1.5 });
        initial_disk(&params).unwrap()
    }

    #[test]
    fn doubling_produces_a_genus_one_piece() {
        let m = assemble_m(&seed()).unwrap();
        assert_eq!(m.euler_characteristic().unwrap(), -1);
        assert_eq!(m.genus_with_boundary().unwrap(), (1, 1));
    }

    #[test]
    fn doubled_piece_is_setwise_symmetric() {
        let m = assemble_m(&seed()).unwrap();
        let cell = 0.05;
        let set = position_set(&m, cell);
        for sym in [SymmetryElement::RotX, SymmetryElement::RotY, SymmetryElement::RotZ] {
            for p in &m.positions {
                let q = apply_symmetry(sym, *p);
                assert!(set.contains(q, 1e-9), "{sym:?} image of {p:?} missing");
            }
        }
    }

    #[test]
    fn doubling_rejects_a_no_handle_spanner() {
        // A plain double-quadrant patch spans the contour without the
        // doubled origin; reflecting it would close into a genus-zero
        // surface, which the weld rule rejects.
        let q = helicoid_double_patch(4.0 * PI, PI, 24, 10);
        assert!(matches!(assemble_m(&q), Err(AssemblyError::WeldMismatch(_))));
    }

    #[test]
    fn tiling_arithmetic_and_interior_lines() {
        let m = assemble_m(&seed()).unwrap();
        let chi_m = m.euler_characteristic().unwrap();

        let same = tile_screw(&m, PI, 1).unwrap();
        assert_eq!(same.vertex_count(), m.vertex_count());
        assert_eq!(same.face_count(), m.face_count());

        let tiled = tile_screw(&m, PI, 3).unwrap();
        // Each of the two welds glues along a contractible polyline.
        assert_eq!(tiled.euler_characteristic().unwrap(), 3 * chi_m - 2);

        // The formerly-open horizontal lines at z = +-pi are now interior
        // except at their rim endpoints.
        let radius = 4.0 * PI;
        let he = tiled.half_edges().unwrap();
        let mut interior_on_line = 0;
        for v in 0..tiled.vertex_count() {
            let p = tiled.positions[v];
            if (p.z.abs() - PI).abs() < 1e-7 && p.x.hypot(p.y) < radius - 1e-6 {
                assert!(!he.boundary_vertex[v], "line vertex {v} at {p:?} still on boundary");
                interior_on_line += 1;
            }
        }
        assert!(interior_on_line > 10);

        // Screw-shifting the bottom fundamental piece lands inside the
        // tiled set.
        let set = position_set(&tiled, 0.05);
        for p in &m.positions {
            let q = screw(-2.0 * PI, *p);
            assert!(set.contains(screw(2.0 * PI, q), 1e-6));
            assert!(set.contains(q, 1e-6), "screw image of {p:?} missing");
        }
    }

    /// A handle in isolation: a tube around the circle through the origin
    /// in the y-z plane, with the tube radius pinched to zero at the
    /// origin.  The pinch carries the origin double point (two cap
    /// vertices at the same position), and the flip about the y-axis maps
    /// the tube to itself, so this is exactly the structure the geodesic
    /// search relies on -- with a genuine tunnel, unlike a raw seed whose
    /// membrane still touches down at the origin.
    fn pinched_torus(loop_radius: f64, tube_radius: f64, nt: usize, np: usize) -> TriMesh {
        assert!(nt % 2 == 0 && np % 2 == 0);
        let center = |t: f64| {
            Point3::new(0.0, loop_radius * (1.0 - t.cos()), loop_radius * t.sin())
        };
        let mut positions = vec![Point3::zeros(), Point3::zeros()];
        let ring = |i: usize, j: usize| 2 + (i - 1) * np + j;
        for i in 1..nt {
            let t = 2.0 * PI * i as f64 / nt as f64;
            let rho = tube_radius * (0.5 * t).sin();
            let radial = Point3::new(0.0, -t.cos(), t.sin());
            for j in 0..np {
                let phi = 2.0 * PI * j as f64 / np as f64;
                positions
                    .push(center(t) + rho * (phi.cos() * radial + phi.sin() * Point3::x()));
            }
        }
        let mut faces = Vec::new();
        for j in 0..np {
            let jn = (j + 1) % np;
            faces.push([0, ring(1, j), ring(1, jn)]);
            faces.push([1, ring(nt - 1, jn), ring(nt - 1, j)]);
        }
        for i in 1..nt - 1 {
            for j in 0..np {
                let jn = (j + 1) % np;
                faces.push([ring(i, j), ring(i + 1, j), ring(i + 1, jn)]);
                faces.push([ring(i, j), ring(i + 1, jn), ring(i, jn)]);
            }
        }
        let n = positions.len();
        // Flip about the y-axis: t -> 2pi - t, phi -> -phi.
        let mut partner = vec![usize::MAX; n];
        partner[0] = 1;
        partner[1] = 0;
        for i in 1..nt {
            for j in 0..np {
                partner[ring(i, j)] = ring(nt - i, (np - j) % np);
            }
        }
        TriMesh {
            positions,
            faces,
            roles: vec![VertexRole::Free; n],
            boundary_pieces: Vec::new(),
            boundary_attr: vec![None; n],
            origin_pair: Some((0, 1)),
            rot_y_partner: Some(partner),
        }
    }

    #[test]
    fn handle_geodesic_threads_the_tunnel() {
        let d = pinched_torus(1.0, 0.3, 24, 12);
        let report = shortest_closed_geodesic(&d).unwrap();
        assert!(!report.degenerate, "max distance {}", report.max_distance_from_origin);
        // The loop winds once through the handle; its length is a bit
        // under the circumference of the core circle.
        assert!(report.length > 3.0 && report.length < 8.0, "length {}", report.length);
        // Bisected by the origin and the y-axis point of the handle: the
        // midpoint sits high on the positive y-axis.
        assert!(
            report.midpoint.x.abs() < 0.3 && report.midpoint.z.abs() < 0.3,
            "midpoint {:?}",
            report.midpoint
        );
        assert!(report.midpoint.y > 1.2, "midpoint {:?}", report.midpoint);
        // Setwise symmetric under the y-flip.
        let tol = 2.0 * d.mean_edge_length();
        for p in &report.polyline {
            let img = apply_symmetry(SymmetryElement::RotY, *p);
            let nearest = report
                .polyline
                .iter()
                .map(|q| (q - img).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < tol, "flip image of {p:?} off the loop by {nearest}");
        }

        // Length is stable under refinement.
        let refined = d.refine().unwrap();
        let fine = shortest_closed_geodesic(&refined).unwrap();
        assert!(
            (fine.length - report.length).abs() < 0.02 * report.length,
            "coarse {} vs fine {}",
            report.length,
            fine.length
        );
    }

    #[test]
    fn seed_handle_is_degenerate_at_mesh_scale() {
        // On a raw seed the membrane still touches down at the origin, so
        // the shortest nontrivial loop is confined to a few cells around
        // it; the report flags this rather than inventing a neck.
        let report = shortest_closed_geodesic(&seed()).unwrap();
        assert!(report.degenerate, "max distance {}", report.max_distance_from_origin);
    }

    #[test]
    fn geodesic_requires_an_interior_connection() {
        // Two disjoint sheets carrying the origin markers: connected only
        // through their boundaries (not at all), so there is no handle.
        let a = helicoid_patch(0.5, 3.0, 0.1, 1.4, 8, 8);
        let b = helicoid_patch(0.5, 3.0, 1.8, 3.0, 8, 8);
        let na = a.vertex_count();
        let mut positions = a.positions.clone();
        positions.extend_from_slice(&b.positions);
        let mut roles = a.roles.clone();
        roles.extend_from_slice(&b.roles);
        let mut faces = a.faces.clone();
        faces.extend(b.faces.iter().map(|f| [f[0] + na, f[1] + na, f[2] + na]));
        let mut attr = a.boundary_attr.clone();
        attr.extend(vec![None; b.vertex_count()]);
        let split = TriMesh {
            positions,
            faces,
            roles,
            boundary_pieces: Vec::new(),
            boundary_attr: attr,
            origin_pair: Some((0, na)),
            rot_y_partner: None,
        };
        assert!(matches!(shortest_closed_geodesic(&split), Err(AssemblyError::NoHandle)));
    }
}
