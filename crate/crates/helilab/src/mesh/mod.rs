//! Triangle meshes with half-edge connectivity, vertex roles, uniform
//! refinement with exact boundary re-projection, curvature fields, spatial
//! self-intersection tests, and OBJ / binary-PLY round-tripping.

mod curvature;
mod intersect;
mod io;

pub mod build;

pub use curvature::{curvature_field, CurvatureField, StencilStatus};
pub use intersect::{self_intersects, IntersectionWitness, SurfaceProjector};
pub use io::{
    export_obj, export_ply, import_obj, import_ply, read_obj, read_ply, write_obj, write_ply,
    MeshIoError,
};

use crate::geometry::{PieceGeom, Point3};
use thiserror::Error;

/// Role of a mesh vertex in constrained solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexRole {
    /// Interior vertex, free to move.
    Free,
    /// Pinned to the boundary contour.
    BoundaryFixed,
    /// One of the two coincident boundary vertices at the contour's double
    /// point.  Never merged with its partner.
    OriginDouble,
}

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("mesh has no faces")]
    Empty,
    #[error("face {face} references vertex {vertex} out of range")]
    FaceIndexOutOfRange { face: usize, vertex: usize },
    #[error("face {face} is degenerate (repeated vertex index)")]
    DegenerateFace { face: usize },
    #[error("edge ({a}, {b}) borders {count} faces; surface is non-manifold")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("edge ({a}, {b}) is traversed twice in the same direction; orientation is inconsistent")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),
    #[error("non-manifold vertex {0} (umbrella is not a single fan)")]
    NonManifoldVertex(usize),
}

/// Triangle mesh.  Faces are counter-clockwise as seen from the chosen
/// surface orientation.  Optional side data track the boundary contour
/// parametrisation (for exact refinement), the origin double point, and a
/// vertex pairing under the y-flip symmetry.
#[derive(Debug, Clone, Default)]
pub struct TriMesh {
    pub positions: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
    pub roles: Vec<VertexRole>,
    /// Analytic boundary pieces referred to by `boundary_attr`.
    pub boundary_pieces: Vec<PieceGeom>,
    /// `(piece, parameter)` of each boundary vertex on the analytic
    /// contour, when known; `None` for free vertices.
    pub boundary_attr: Vec<Option<(usize, f64)>>,
    /// The two vertices sitting at the contour's origin double point.
    pub origin_pair: Option<(usize, usize)>,
    /// Involution pairing each vertex with its image under the y-flip, when
    /// the mesh is built equivariantly.
    pub rot_y_partner: Option<Vec<usize>>,
}

/// Half-edge connectivity derived from a face list.
///
/// Half-edge `h` belongs to face `h / 3`; `vert[h]` is its source vertex
/// and `next[h]` the following half-edge of the same face.  `twin[h]` is
/// `usize::MAX` on boundary half-edges.
#[derive(Debug, Clone)]
pub struct HalfEdges {
    pub next: Vec<usize>,
    pub twin: Vec<usize>,
    pub vert: Vec<usize>,
    pub edge_count: usize,
    pub boundary_loops: Vec<Vec<usize>>,
    pub boundary_vertex: Vec<bool>,
}

pub const NO_TWIN: usize = usize::MAX;

impl TriMesh {
    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Build and validate half-edge connectivity.
    pub fn half_edges(&self) -> Result<HalfEdges, MeshError> {
        if self.faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = self.positions.len();
        let nh = 3 * self.faces.len();
        let mut vert = vec![0usize; nh];
        let mut next = vec![0usize; nh];
        for (f, tri) in self.faces.iter().enumerate() {
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] {
                return Err(MeshError::DegenerateFace { face: f });
            }
            for k in 0..3 {
                let v = tri[k];
                if v >= nv {
                    return Err(MeshError::FaceIndexOutOfRange { face: f, vertex: v });
                }
                vert[3 * f + k] = v;
                next[3 * f + k] = 3 * f + (k + 1) % 3;
            }
        }
        // Match twins through a directed-edge map; a well-oriented manifold
        // surface has each directed edge at most once and each undirected
        // edge at most twice with opposite directions.
        let mut edge_map: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::with_capacity(nh);
        for h in 0..nh {
            let a = vert[h];
            let b = vert[next[h]];
            if edge_map.insert((a, b), h).is_some() {
                return Err(MeshError::InconsistentOrientation { a, b });
            }
        }
        let mut twin = vec![NO_TWIN; nh];
        let mut undirected: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::with_capacity(nh);
        for h in 0..nh {
            let a = vert[h];
            let b = vert[next[h]];
            let key = (a.min(b), a.max(b));
            *undirected.entry(key).or_insert(0) += 1;
            if let Some(&t) = edge_map.get(&(b, a)) {
                twin[h] = t;
            }
        }
        for (&(a, b), &count) in &undirected {
            if count > 2 {
                return Err(MeshError::NonManifoldEdge { a, b, count });
            }
        }
        let edge_count = undirected.len();

        // Chain boundary half-edges into loops by walking around terminal
        // vertices, and detect isolated / non-manifold vertices.
        let mut boundary_vertex = vec![false; nv];
        let mut outgoing_boundary: std::collections::HashMap<usize, Vec<usize>> =
            std::collections::HashMap::new();
        for h in 0..nh {
            if twin[h] == NO_TWIN {
                boundary_vertex[vert[h]] = true;
                boundary_vertex[vert[next[h]]] = true;
                outgoing_boundary.entry(vert[h]).or_default().push(h);
            }
        }
        // A manifold-with-boundary vertex has at most one outgoing boundary
        // half-edge; more means two fans meet at the vertex.
        for (&v, hs) in &outgoing_boundary {
            if hs.len() > 1 {
                return Err(MeshError::NonManifoldVertex(v));
            }
        }
        let mut incident = vec![0usize; nv];
        for &v in &vert {
            incident[v] += 1;
        }
        if let Some(v) = (0..nv).find(|&v| incident[v] == 0) {
            return Err(MeshError::IsolatedVertex(v));
        }

        let mut visited = vec![false; nh];
        let mut boundary_loops = Vec::new();
        for h0 in 0..nh {
            if twin[h0] != NO_TWIN || visited[h0] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut h = h0;
            loop {
                visited[h] = true;
                cycle.push(vert[h]);
                // Advance to the unique boundary half-edge leaving the tip.
                let tip = vert[next[h]];
                let next_h = outgoing_boundary
                    .get(&tip)
                    .and_then(|hs| hs.first())
                    .copied()
                    .ok_or(MeshError::NonManifoldVertex(tip))?;
                h = next_h;
                if h == h0 {
                    break;
                }
            }
            boundary_loops.push(cycle);
        }

        Ok(HalfEdges { next, twin, vert, edge_count, boundary_loops, boundary_vertex })
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> Result<i64, MeshError> {
        let he = self.half_edges()?;
        Ok(self.vertex_count() as i64 - he.edge_count as i64 + self.face_count() as i64)
    }

    /// Genus and boundary-loop count of an orientable surface with
    /// boundary, from `chi = 2 - 2g - b`.
    pub fn genus_with_boundary(&self) -> Result<(i64, usize), MeshError> {
        let he = self.half_edges()?;
        let chi = self.vertex_count() as i64 - he.edge_count as i64 + self.face_count() as i64;
        let b = he.boundary_loops.len() as i64;
        let two_g = 2 - b - chi;
        debug_assert!(two_g % 2 == 0, "chi and b of an orientable surface have matching parity");
        Ok(((two_g / 2).max(0), b as usize))
    }

    pub fn face_normal(&self, f: usize) -> Point3 {
        let [a, b, c] = self.faces[f];
        (self.positions[b] - self.positions[a]).cross(&(self.positions[c] - self.positions[a]))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_normal(f).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Barycentric lumped vertex areas (one third of each incident face).
    pub fn vertex_areas(&self) -> Vec<f64> {
        let mut areas = vec![0.0; self.vertex_count()];
        for f in 0..self.faces.len() {
            let a = self.face_area(f) / 3.0;
            for &v in &self.faces[f] {
                areas[v] += a;
            }
        }
        areas
    }

    /// Area-weighted unit vertex normals.
    pub fn vertex_normals(&self) -> Vec<Point3> {
        let mut normals = vec![Point3::zeros(); self.vertex_count()];
        for f in 0..self.faces.len() {
            let n = self.face_normal(f);
            for &v in &self.faces[f] {
                normals[v] += n;
            }
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 1e-300 {
                *n /= len;
            }
        }
        normals
    }

    pub fn mean_edge_length(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for tri in &self.faces {
            for k in 0..3 {
                sum += (self.positions[tri[(k + 1) % 3]] - self.positions[tri[k]]).norm();
                count += 1;
            }
        }
        sum / count.max(1) as f64
    }

    /// One-ring neighbour lists (by undirected adjacency).
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.vertex_count()];
        for tri in &self.faces {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                if !nbrs[a].contains(&b) {
                    nbrs[a].push(b);
                }
                if !nbrs[b].contains(&a) {
                    nbrs[b].push(a);
                }
            }
        }
        nbrs
    }

    /// Uniform 1-to-4 refinement.  Midpoints of boundary edges whose
    /// endpoints carry parameters on the same analytic piece are evaluated
    /// exactly on the contour; all side data (roles, boundary attributes,
    /// symmetry pairing, origin pair) are carried over.
    pub fn refine(&self) -> Result<TriMesh, MeshError> {
        let he = self.half_edges()?;
        let nv = self.vertex_count();
        let mut midpoint: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut positions = self.positions.clone();
        let mut roles = self.roles.clone();
        let mut attr = self.boundary_attr.clone();

        let nh = 3 * self.faces.len();
        let mut edge_is_boundary: std::collections::HashMap<(usize, usize), bool> =
            std::collections::HashMap::new();
        for h in 0..nh {
            let a = he.vert[h];
            let b = he.vert[he.next[h]];
            let key = (a.min(b), a.max(b));
            let entry = edge_is_boundary.entry(key).or_insert(false);
            *entry |= he.twin[h] == NO_TWIN;
        }

        let mut mid_of = |a: usize, b: usize,
                          positions: &mut Vec<Point3>,
                          roles: &mut Vec<VertexRole>,
                          attr: &mut Vec<Option<(usize, f64)>>|
         -> usize {
            let key = (a.min(b), a.max(b));
            if let Some(&m) = midpoint.get(&key) {
                return m;
            }
            let on_boundary = edge_is_boundary.get(&key).copied().unwrap_or(false);
            let mut pos = 0.5 * (positions[a] + positions[b]);
            let mut m_attr = None;
            let mut role = VertexRole::Free;
            if on_boundary {
                role = VertexRole::BoundaryFixed;
                if let (Some((pa, ta)), Some((pb, tb))) = (attr[a], attr[b]) {
                    if pa == pb && pa < self.boundary_pieces.len() {
                        let piece = &self.boundary_pieces[pa];
                        // On closed pieces the seam edge wraps in parameter.
                        let mut tm = 0.5 * (ta + tb);
                        if piece.is_closed() && (ta - tb).abs() > 0.5 {
                            tm = (tm + 0.5).rem_euclid(1.0);
                        }
                        pos = piece.eval(tm);
                        m_attr = Some((pa, tm));
                    }
                }
            }
            let m = positions.len();
            positions.push(pos);
            roles.push(role);
            attr.push(m_attr);
            midpoint.insert(key, m);
            m
        };

        let mut faces = Vec::with_capacity(4 * self.faces.len());
        for tri in &self.faces {
            let [a, b, c] = *tri;
            let ab = mid_of(a, b, &mut positions, &mut roles, &mut attr);
            let bc = mid_of(b, c, &mut positions, &mut roles, &mut attr);
            let ca = mid_of(c, a, &mut positions, &mut roles, &mut attr);
            faces.push([a, ab, ca]);
            faces.push([ab, b, bc]);
            faces.push([ca, bc, c]);
            faces.push([ab, bc, ca]);
        }

        // Carry the symmetry pairing to midpoints through the edge map.
        let rot_y_partner = self.rot_y_partner.as_ref().map(|pairing| {
            let mut new_pairing = vec![usize::MAX; positions.len()];
            new_pairing[..nv].copy_from_slice(pairing);
            for (&(a, b), &m) in &midpoint {
                let (pa, pb) = (pairing[a], pairing[b]);
                let key = (pa.min(pb), pa.max(pb));
                if let Some(&pm) = midpoint.get(&key) {
                    new_pairing[m] = pm;
                } else {
                    new_pairing[m] = m;
                }
            }
            new_pairing
        });

        Ok(TriMesh {
            positions,
            faces,
            roles,
            boundary_pieces: self.boundary_pieces.clone(),
            boundary_attr: attr,
            origin_pair: self.origin_pair,
            rot_y_partner,
        })
    }

    /// Bounding box of all vertices as `(min, max)`.
    pub fn bounds(&self) -> (Point3, Point3) {
        let mut lo = Point3::from_element(f64::INFINITY);
        let mut hi = Point3::from_element(f64::NEG_INFINITY);
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }
}

/// Cotangent-weight Laplacian triplets (positive semi-definite convention:
/// diagonal positive, off-diagonal negative).  Cotangents are clamped to
/// `[-clamp, clamp]` to tame sliver triangles; `clamp <= 0` disables
/// clamping.
pub fn cotan_laplacian_triplets(mesh: &TriMesh, clamp: f64) -> Vec<(usize, usize, f64)> {
    let mut triplets = Vec::with_capacity(12 * mesh.faces.len());
    for tri in &mesh.faces {
        for k in 0..3 {
            let i = tri[k];
            let j = tri[(k + 1) % 3];
            let o = tri[(k + 2) % 3];
            let u = mesh.positions[i] - mesh.positions[o];
            let v = mesh.positions[j] - mesh.positions[o];
            let cross = u.cross(&v).norm();
            let mut cot = if cross > 1e-300 { u.dot(&v) / cross } else { 0.0 };
            if clamp > 0.0 {
                cot = cot.clamp(-clamp, clamp);
            }
            let w = 0.5 * cot;
            triplets.push((i, i, w));
            triplets.push((j, j, w));
            triplets.push((i, j, -w));
            triplets.push((j, i, -w));
        }
    }
    triplets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::helicoid_point;
    use approx::assert_relative_eq;

    #[test]
    fn disk_invariants() {
        let m = build::fan_disk(1.0, 24, 4);
        let he = m.half_edges().unwrap();
        assert_eq!(he.boundary_loops.len(), 1);
        assert_eq!(m.euler_characteristic().unwrap(), 1);
        assert_eq!(m.genus_with_boundary().unwrap(), (0, 1));
        // The fan disk approximates a unit disk in area.
        assert_relative_eq!(m.total_area(), std::f64::consts::PI, max_relative = 0.02);
    }

    #[test]
    fn sphere_and_torus_invariants() {
        let s = build::icosphere(1.0, 2);
        assert_eq!(s.euler_characteristic().unwrap(), 2);
        assert_eq!(s.genus_with_boundary().unwrap(), (0, 0));
        let t = build::torus_grid(2.0, 0.5, 24, 12);
        assert_eq!(t.euler_characteristic().unwrap(), 0);
        assert_eq!(t.genus_with_boundary().unwrap(), (1, 0));
    }

    #[test]
    fn annulus_has_two_boundary_loops() {
        let a = build::cylinder_grid(1.0, -0.5, 0.5, 24, 6);
        let he = a.half_edges().unwrap();
        assert_eq!(he.boundary_loops.len(), 2);
        assert_eq!(a.euler_characteristic().unwrap(), 0);
        assert_eq!(a.genus_with_boundary().unwrap(), (0, 2));
    }

    #[test]
    fn rejects_nonmanifold_and_misoriented_input() {
        // Three faces sharing one edge.
        let m = TriMesh {
            positions: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
                Point3::new(1.0, 1.0, 1.0),
            ],
            faces: vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]],
            roles: vec![VertexRole::Free; 5],
            ..Default::default()
        };
        assert!(matches!(
            m.half_edges(),
            Err(MeshError::NonManifoldEdge { .. }) | Err(MeshError::InconsistentOrientation { .. })
        ));
        // Two faces traversing a shared edge in the same direction.
        let m2 = TriMesh {
            positions: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(1.0, 1.0, 0.0),
            ],
            faces: vec![[0, 1, 2], [0, 1, 3]],
            roles: vec![VertexRole::Free; 4],
            ..Default::default()
        };
        assert_eq!(
            m2.half_edges().unwrap_err(),
            MeshError::InconsistentOrientation { a: 0, b: 1 }
        );
    }

    #[test]
    fn refinement_preserves_topology_and_boundary() {
        let m = build::fan_disk(1.0, 16, 3);
        let r = m.refine().unwrap();
        assert_eq!(r.face_count(), 4 * m.face_count());
        assert_eq!(r.euler_characteristic().unwrap(), 1);
        assert_eq!(r.genus_with_boundary().unwrap(), (0, 1));
        // Boundary midpoints were re-projected onto the unit circle, so the
        // refined disk's area is strictly closer to pi.
        let err0 = (m.total_area() - std::f64::consts::PI).abs();
        let err1 = (r.total_area() - std::f64::consts::PI).abs();
        assert!(err1 < 0.3 * err0, "refinement errors {err0:.2e} -> {err1:.2e}");
        for (i, role) in r.roles.iter().enumerate() {
            if *role == VertexRole::BoundaryFixed {
                assert_relative_eq!(r.positions[i].x.hypot(r.positions[i].y), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cotan_laplacian_annihilates_linear_functions_on_flat_interior() {
        let m = build::unit_square_grid(8);
        let triplets = cotan_laplacian_triplets(&m, 0.0);
        let lap = crate::linalg::Csr::from_triplets(m.vertex_count(), &triplets);
        // Apply to the linear field f = 3x - 2y + 0.5 and check interior rows.
        let f: Vec<f64> = m.positions.iter().map(|p| 3.0 * p.x - 2.0 * p.y + 0.5).collect();
        let mut lf = vec![0.0; f.len()];
        lap.matvec(&f, &mut lf);
        let he = m.half_edges().unwrap();
        for v in 0..m.vertex_count() {
            if !he.boundary_vertex[v] {
                assert!(lf[v].abs() < 1e-12, "interior residual {} at {v}", lf[v]);
            }
        }
    }

    #[test]
    fn helicoid_patch_mesh_lies_on_surface() {
        let m = build::helicoid_patch(0.5, 4.0, 0.2, 2.0, 24, 24);
        for p in &m.positions {
            let r = p.x.hypot(p.y);
            let expected = helicoid_point(r, p.z);
            assert_relative_eq!(*p, expected, epsilon = 1e-10);
        }
        assert_eq!(m.genus_with_boundary().unwrap(), (0, 1));
    }
}
