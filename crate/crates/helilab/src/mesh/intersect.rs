//! Mesh self-intersection detection: an AABB tree culls candidate face
//! pairs, and edge-against-triangle tests confirm genuine crossings.
//! Face pairs that share vertices (by index or by position, e.g. along weld
//! seams and at the origin double point) are exempt.

use super::TriMesh;
use crate::geometry::Point3;

/// A confirmed crossing between two faces.
#[derive(Debug, Clone, Copy)]
pub struct IntersectionWitness {
    pub face_a: usize,
    pub face_b: usize,
    /// Representative point on the intersection segment.
    pub point: Point3,
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Point3,
    hi: Point3,
}

impl Aabb {
    fn of_face(mesh: &TriMesh, f: usize) -> Aabb {
        let [a, b, c] = mesh.faces[f];
        let (pa, pb, pc) = (mesh.positions[a], mesh.positions[b], mesh.positions[c]);
        Aabb { lo: pa.inf(&pb).inf(&pc), hi: pa.sup(&pb).sup(&pc) }
    }

    fn merge(self, other: Aabb) -> Aabb {
        Aabb { lo: self.lo.inf(&other.lo), hi: self.hi.sup(&other.hi) }
    }

    fn overlaps(&self, other: &Aabb, pad: f64) -> bool {
        (0..3).all(|k| self.lo[k] - pad <= other.hi[k] && other.lo[k] - pad <= self.hi[k])
    }

    fn distance_sq_to(&self, p: Point3) -> f64 {
        (0..3)
            .map(|k| {
                let d = (self.lo[k] - p[k]).max(0.0).max(p[k] - self.hi[k]);
                d * d
            })
            .sum()
    }
}

enum BvhNode {
    Leaf { faces: Vec<usize>, bbox: Aabb },
    Inner { left: Box<BvhNode>, right: Box<BvhNode>, bbox: Aabb },
}

impl BvhNode {
    fn bbox(&self) -> Aabb {
        match self {
            BvhNode::Leaf { bbox, .. } | BvhNode::Inner { bbox, .. } => *bbox,
        }
    }

    fn build(mesh: &TriMesh, mut faces: Vec<usize>) -> BvhNode {
        let bbox = faces
            .iter()
            .map(|&f| Aabb::of_face(mesh, f))
            .reduce(Aabb::merge)
            .expect("nonempty face set");
        if faces.len() <= 8 {
            return BvhNode::Leaf { faces, bbox };
        }
        let extent = bbox.hi - bbox.lo;
        let axis = if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        };
        let centroid = |f: usize| {
            let [a, b, c] = mesh.faces[f];
            (mesh.positions[a][axis] + mesh.positions[b][axis] + mesh.positions[c][axis]) / 3.0
        };
        faces.sort_by(|&a, &b| centroid(a).partial_cmp(&centroid(b)).unwrap());
        let right = faces.split_off(faces.len() / 2);
        BvhNode::Inner {
            left: Box::new(BvhNode::build(mesh, faces)),
            right: Box::new(BvhNode::build(mesh, right)),
            bbox,
        }
    }

    fn query<'a>(&'a self, target: &Aabb, pad: f64, out: &mut Vec<usize>) {
        if !self.bbox().overlaps(target, pad) {
            return;
        }
        match self {
            BvhNode::Leaf { faces, .. } => out.extend_from_slice(faces),
            BvhNode::Inner { left, right, .. } => {
                left.query(target, pad, out);
                right.query(target, pad, out);
            }
        }
    }
}

/// Closest point on triangle `(a, b, c)` to `p`.
fn closest_point_on_triangle(p: Point3, a: Point3, b: Point3, c: Point3) -> Point3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + (d1 / (d1 - d3)) * ab;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + (d2 / (d2 - d6)) * ac;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Accelerated closest-point queries against a mesh surface; used to keep
/// curves on the surface during intrinsic shortening.
pub struct SurfaceProjector {
    positions: Vec<Point3>,
    faces: Vec<[usize; 3]>,
    root: BvhNode,
}

impl SurfaceProjector {
    pub fn new(mesh: &TriMesh) -> SurfaceProjector {
        assert!(!mesh.faces.is_empty(), "cannot project onto an empty mesh");
        let root = BvhNode::build(mesh, (0..mesh.faces.len()).collect());
        SurfaceProjector {
            positions: mesh.positions.clone(),
            faces: mesh.faces.clone(),
            root,
        }
    }

    /// Closest point of the surface to `p`.
    pub fn project(&self, p: Point3) -> Point3 {
        let mut best = f64::INFINITY;
        let mut best_point = p;
        self.search(&self.root, p, &mut best, &mut best_point);
        best_point
    }

    fn search(&self, node: &BvhNode, p: Point3, best: &mut f64, best_point: &mut Point3) {
        if node.bbox().distance_sq_to(p) >= *best {
            return;
        }
        match node {
            BvhNode::Leaf { faces, .. } => {
                for &f in faces {
                    let [a, b, c] = self.faces[f];
                    let q = closest_point_on_triangle(
                        p,
                        self.positions[a],
                        self.positions[b],
                        self.positions[c],
                    );
                    let d = (q - p).norm_squared();
                    if d < *best {
                        *best = d;
                        *best_point = q;
                    }
                }
            }
            BvhNode::Inner { left, right, .. } => {
                // Visit the nearer child first for tighter pruning.
                let dl = left.bbox().distance_sq_to(p);
                let dr = right.bbox().distance_sq_to(p);
                let (first, second) = if dl <= dr { (left, right) } else { (right, left) };
                self.search(first, p, best, best_point);
                self.search(second, p, best, best_point);
            }
        }
    }
}

/// Find genuine self-intersections.  `weld_tol` is the distance below which
/// two vertices count as the same point (sanctioned contacts along weld
/// seams and at the origin double point are not intersections).
pub fn self_intersects(mesh: &TriMesh, weld_tol: f64) -> Vec<IntersectionWitness> {
    if mesh.faces.len() < 2 {
        return Vec::new();
    }
    let tree = BvhNode::build(mesh, (0..mesh.faces.len()).collect());
    let mut witnesses = Vec::new();
    let mut candidates = Vec::new();
    for fa in 0..mesh.faces.len() {
        candidates.clear();
        tree.query(&Aabb::of_face(mesh, fa), weld_tol, &mut candidates);
        for &fb in &candidates {
            if fb <= fa {
                continue;
            }
            if faces_adjacent(mesh, fa, fb, weld_tol) {
                continue;
            }
            if let Some(point) = tri_tri_cross(mesh, fa, fb) {
                witnesses.push(IntersectionWitness { face_a: fa, face_b: fb, point });
            }
        }
    }
    witnesses
}

fn faces_adjacent(mesh: &TriMesh, fa: usize, fb: usize, tol: f64) -> bool {
    for &va in &mesh.faces[fa] {
        for &vb in &mesh.faces[fb] {
            if va == vb || (mesh.positions[va] - mesh.positions[vb]).norm() <= tol {
                return true;
            }
        }
    }
    false
}

/// Transversal triangle-triangle crossing: any edge of one triangle that
/// pierces the interior of the other.  Returns a point on the crossing.
fn tri_tri_cross(mesh: &TriMesh, fa: usize, fb: usize) -> Option<Point3> {
    let ta: Vec<Point3> = mesh.faces[fa].iter().map(|&v| mesh.positions[v]).collect();
    let tb: Vec<Point3> = mesh.faces[fb].iter().map(|&v| mesh.positions[v]).collect();
    let mut hits = Vec::new();
    for k in 0..3 {
        if let Some(p) = segment_triangle(ta[k], ta[(k + 1) % 3], &tb) {
            hits.push(p);
        }
        if let Some(p) = segment_triangle(tb[k], tb[(k + 1) % 3], &ta) {
            hits.push(p);
        }
    }
    if hits.is_empty() {
        None
    } else {
        let sum: Point3 = hits.iter().sum();
        Some(sum / hits.len() as f64)
    }
}

/// Watertight-enough segment/triangle intersection (strictly transversal;
/// grazing contacts within 1e-12 of edges are ignored on purpose).
fn segment_triangle(a: Point3, b: Point3, tri: &[Point3]) -> Option<Point3> {
    const EPS: f64 = 1e-12;
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let dir = b - a;
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < EPS * e1.norm() * e2.norm() {
        return None; // parallel or degenerate
    }
    let inv = 1.0 / det;
    let s = a - tri[0];
    let u = inv * s.dot(&h);
    if u <= EPS || u >= 1.0 - EPS {
        return None;
    }
    let q = s.cross(&e1);
    let v = inv * dir.dot(&q);
    if v <= EPS || u + v >= 1.0 - EPS {
        return None;
    }
    let t = inv * e2.dot(&q);
    if t <= EPS || t >= 1.0 - EPS {
        return None;
    }
    Some(a + t * dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build, VertexRole};

    #[test]
    fn clean_surfaces_have_no_self_intersections() {
        assert!(self_intersects(&build::icosphere(1.0, 2), 1e-9).is_empty());
        assert!(self_intersects(&build::fan_disk(1.0, 24, 4), 1e-9).is_empty());
        assert!(self_intersects(&build::helicoid_patch(0.2, 3.0, 0.0, 6.0, 24, 48), 1e-9).is_empty());
    }

    #[test]
    fn crossing_sheets_are_detected() {
        // Two grids crossing at right angles, merged into one (disconnected)
        // mesh with disjoint index ranges.
        let horizontal = build::grid_patch(
            |u, v| Point3::new(u, v, 0.0),
            -1.0,
            1.0,
            -1.0,
            1.0,
            8,
            8,
        );
        // Offset vertically so no grid vertex lands exactly on the other
        // sheet's plane (strictly transversal crossings).
        let vertical = build::grid_patch(
            |u, v| Point3::new(u, 0.3, v),
            -1.0,
            1.0,
            -1.07,
            0.93,
            8,
            8,
        );
        let offset = horizontal.positions.len();
        let mut positions = horizontal.positions.clone();
        positions.extend_from_slice(&vertical.positions);
        let mut faces = horizontal.faces.clone();
        faces.extend(vertical.faces.iter().map(|f| [f[0] + offset, f[1] + offset, f[2] + offset]));
        let merged = TriMesh {
            roles: vec![VertexRole::Free; positions.len()],
            boundary_attr: vec![None; positions.len()],
            positions,
            faces,
            ..Default::default()
        };
        let witnesses = self_intersects(&merged, 1e-9);
        assert!(!witnesses.is_empty());
        // Witnesses lie on the geometric intersection line z = 0, y = 0.3.
        for w in &witnesses {
            assert!(w.point.z.abs() < 1e-9 && (w.point.y - 0.3).abs() < 1e-9);
        }
    }

    #[test]
    fn coincident_vertices_are_sanctioned_contact() {
        // Two triangles touching at one shared position with distinct
        // indices: a weld-style contact, not an intersection.
        let m = TriMesh {
            positions: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 0.0), // coincident with vertex 0
                Point3::new(-1.0, 0.0, 1.0),
                Point3::new(0.0, -1.0, 1.0),
            ],
            faces: vec![[0, 1, 2], [3, 4, 5]],
            roles: vec![VertexRole::Free; 6],
            boundary_attr: vec![None; 6],
            ..Default::default()
        };
        assert!(self_intersects(&m, 1e-9).is_empty());
    }
}
