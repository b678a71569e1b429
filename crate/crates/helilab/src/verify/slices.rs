//! Plane-slice structure: intersections of a surface with the rotated
//! half-strips that foliate the upper region, and horizontal level sets
//! extracted by marching triangles.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::geometry::Point3;
use crate::mesh::TriMesh;

use super::VerifyError;

/// How a traced curve terminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    /// On the vertical axis.
    Axis,
    /// On the outer rim (near the truncation radius).
    Rim,
    /// Clipped by the half-strip window rather than by the mesh.
    WindowCut,
    /// On some other part of the mesh boundary.
    Boundary,
}

#[derive(Debug, Clone)]
pub struct SliceCurve {
    /// Points in ambient space along the traced curve.
    pub points: Vec<Point3>,
    /// Radial coordinate of each point inside the slice half-plane.
    pub t: Vec<f64>,
    pub start: EndpointKind,
    pub end: EndpointKind,
}

impl SliceCurve {
    /// Whether the curve is a graph over the radial direction of the
    /// half-plane (monotone `t`).
    pub fn is_radial_graph(&self) -> bool {
        let eps = 1e-9;
        let increasing = self.t.windows(2).all(|w| w[1] >= w[0] - eps);
        let decreasing = self.t.windows(2).all(|w| w[1] <= w[0] + eps);
        increasing || decreasing
    }
}

#[derive(Debug, Clone)]
pub struct SliceReport {
    pub theta: f64,
    pub curves: Vec<SliceCurve>,
    /// Curve endpoints lying on the vertical axis.
    pub axis_endpoints: usize,
    /// Set when the intersection is a single curve that is a graph over
    /// the radial direction.
    pub single_graph: bool,
}

/// Intersect the surface with the half-strip at angle `theta`: the
/// vertical half-plane in direction `(cos theta, sin theta)` restricted
/// to heights `(theta - pi, theta)`, which is one leaf of the foliation
/// of the upper region.
pub fn axis_slice_analysis(mesh: &TriMesh, theta: f64) -> Result<SliceReport, VerifyError> {
    let (lo, hi) = mesh.bounds();
    let scale = (hi - lo).norm().max(1.0);
    let tol = 1e-9 * scale;
    let normal = Point3::new(-theta.sin(), theta.cos(), 0.0);
    let radial = Point3::new(theta.cos(), theta.sin(), 0.0);

    let side: Vec<f64> = mesh.positions.iter().map(|p| p.dot(&normal)).collect();
    // Only vertices that could actually contribute on the positive-radius
    // side matter for transversality.
    for (v, &s) in side.iter().enumerate() {
        if s.abs() < tol && mesh.positions[v].dot(&radial) > tol {
            return Err(VerifyError::NonTransverse { theta });
        }
    }

    // Marching over faces: a crossing segment per face with a sign
    // change, keyed by the crossed edges for stitching.
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut segments: Vec<((usize, usize), (usize, usize))> = Vec::new();
    let mut cut_points: HashMap<(usize, usize), Point3> = HashMap::new();
    for f in &mesh.faces {
        let mut cuts = Vec::new();
        for e in 0..3 {
            let (a, b) = (f[e], f[(e + 1) % 3]);
            if side[a] * side[b] < 0.0 {
                let t = side[a] / (side[a] - side[b]);
                let p = mesh.positions[a] + t * (mesh.positions[b] - mesh.positions[a]);
                cut_points.insert(key(a, b), p);
                cuts.push(key(a, b));
            }
        }
        if cuts.len() == 2 {
            segments.push((cuts[0], cuts[1]));
        }
    }

    // Stitch segments into chains over the edge-key graph.
    let chains = stitch(&segments);

    let r_max = mesh
        .positions
        .iter()
        .map(|p| p.x.hypot(p.y))
        .fold(0.0_f64, f64::max);
    let mean_edge = mesh.mean_edge_length();
    let z_lo = theta - PI;
    let z_hi = theta;

    // Clip each chain to the half-strip window and classify endpoints.
    let mut curves = Vec::new();
    for chain in &chains {
        let pts: Vec<Point3> = chain.keys.iter().map(|k| cut_points[k]).collect();
        // The window exists to pick one leaf of the foliation; adjacent
        // leaves are a full turn away, so a lenient band keeps curves
        // that graze the strip edges (the surface touches them where it
        // meets the boundary) in one piece.
        let w_tol = 1e-3;
        let inside = |p: &Point3| {
            p.dot(&radial) > tol && p.z > z_lo - w_tol && p.z < z_hi + w_tol
        };
        let mut run: Vec<Point3> = Vec::new();
        let mut runs: Vec<(Vec<Point3>, bool, bool)> = Vec::new();
        let mut clipped_start = false;
        for (i, p) in pts.iter().enumerate() {
            if inside(p) {
                if run.is_empty() && i > 0 {
                    run.push(window_crossing(&pts[i - 1], p, radial, z_lo, z_hi, tol));
                    clipped_start = true;
                }
                run.push(*p);
            } else if !run.is_empty() {
                run.push(window_crossing(&pts[i - 1], p, radial, z_lo, z_hi, tol));
                runs.push((std::mem::take(&mut run), clipped_start, true));
                clipped_start = false;
            }
        }
        if !run.is_empty() {
            let closed_back = chain.closed && runs.is_empty() && pts.iter().all(inside);
            runs.push((run, clipped_start, false));
            if closed_back {
                // A closed loop fully inside the window stays one curve.
            }
        }
        for (points, cut_start, cut_end) in runs {
            if points.len() < 2 {
                continue;
            }
            let t: Vec<f64> = points.iter().map(|p| p.dot(&radial)).collect();
            // Near the axis the sheet hugs the window's top edge, so a
            // clipped end at small radius still terminates on the axis
            // for counting purposes.
            let classify = |p: &Point3, cut: bool| {
                if p.x.hypot(p.y) < 1.5 * mean_edge {
                    EndpointKind::Axis
                } else if cut {
                    EndpointKind::WindowCut
                } else if p.x.hypot(p.y) > r_max - 1.5 * mean_edge {
                    EndpointKind::Rim
                } else {
                    EndpointKind::Boundary
                }
            };
            let start = classify(points.first().unwrap(), cut_start);
            let end = classify(points.last().unwrap(), cut_end);
            curves.push(SliceCurve { points, t, start, end });
        }
    }

    // A vertex lying close to (but not on) the plane spawns zero-length
    // chains through its one-ring; they carry no curve structure.
    let sliver = 1e-3 * mean_edge;
    curves.retain(|c| {
        c.points
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .sum::<f64>()
            > sliver
    });

    let axis_endpoints = curves
        .iter()
        .map(|c| {
            usize::from(c.start == EndpointKind::Axis) + usize::from(c.end == EndpointKind::Axis)
        })
        .sum();
    let single_graph = curves.len() == 1 && curves[0].is_radial_graph();
    Ok(SliceReport { theta, curves, axis_endpoints, single_graph })
}

fn window_crossing(
    outside: &Point3,
    inside: &Point3,
    radial: Point3,
    z_lo: f64,
    z_hi: f64,
    tol: f64,
) -> Point3 {
    // Bisect the segment to the window boundary.
    let mut a = *outside;
    let mut b = *inside;
    for _ in 0..40 {
        let m = 0.5 * (a + b);
        let is_in = m.dot(&radial) > tol && m.z > z_lo - 1e-3 && m.z < z_hi + 1e-3;
        if is_in {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

struct Chain {
    keys: Vec<(usize, usize)>,
    closed: bool,
}

/// Stitch undirected segments between node keys into maximal chains.
fn stitch(segments: &[((usize, usize), (usize, usize))]) -> Vec<Chain> {
    let mut adjacency: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(i);
        adjacency.entry(*b).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();
    // Open chains first, starting from degree-one nodes.
    let mut starts: Vec<(usize, usize)> = adjacency
        .iter()
        .filter(|(_, inc)| inc.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    starts.sort_unstable();
    for start in starts {
        if adjacency[&start].iter().all(|&i| used[i]) {
            continue;
        }
        chains.push(walk(start, segments, &adjacency, &mut used, false));
    }
    // Remaining segments form loops.
    for i in 0..segments.len() {
        if !used[i] {
            chains.push(walk(segments[i].0, segments, &adjacency, &mut used, true));
        }
    }
    chains
}

fn walk(
    start: (usize, usize),
    segments: &[((usize, usize), (usize, usize))],
    adjacency: &HashMap<(usize, usize), Vec<usize>>,
    used: &mut [bool],
    closed: bool,
) -> Chain {
    let mut keys = vec![start];
    let mut node = start;
    loop {
        let next = adjacency[&node]
            .iter()
            .copied()
            .find(|&i| !used[i]);
        let Some(i) = next else { break };
        used[i] = true;
        let (a, b) = segments[i];
        node = if a == node { b } else { a };
        keys.push(node);
    }
    Chain { keys, closed }
}

#[derive(Debug, Clone)]
pub struct LevelComponent {
    pub points: Vec<Point3>,
    pub closed: bool,
    /// Component hugging the outer truncation rim; excluded from topology
    /// classification.
    pub rim_artifact: bool,
    /// Passes through this many vertices of the in-plane axis lines.
    pub axis_crossings: usize,
}

#[derive(Debug, Clone)]
pub struct LevelSetReport {
    pub level: f64,
    /// Polylines along mesh edges lying exactly in the level plane (the
    /// in-plane axis lines at level zero).
    pub axis_polylines: Vec<Vec<Point3>>,
    pub components: Vec<LevelComponent>,
    /// Vertices where a crossing curve meets an in-plane polyline.
    pub singular_points: Vec<Point3>,
}

impl LevelSetReport {
    /// Components that represent surface topology (rim artifacts
    /// excluded).
    pub fn principal_components(&self) -> Vec<&LevelComponent> {
        self.components.iter().filter(|c| !c.rim_artifact).collect()
    }
}

/// Node identifiers for level-set stitching: a crossing on an edge or a
/// vertex lying exactly in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    Edge(usize, usize),
    Vertex(usize),
}

/// Horizontal level set by marching triangles.  Vertices within snapping
/// tolerance of the plane are treated as lying on it, which is what lets
/// the level through the in-plane welded axis lines come out as explicit
/// polylines with the crossing curves merged at shared vertices.
pub fn level_set(mesh: &TriMesh, level: f64) -> Result<LevelSetReport, VerifyError> {
    let (lo, hi) = mesh.bounds();
    let scale = (hi - lo).norm().max(1.0);
    let snap = 1e-9 * scale;
    let n = mesh.vertex_count();
    let mut s = vec![0.0_f64; n];
    for v in 0..n {
        let d = mesh.positions[v].z - level;
        s[v] = if d.abs() < snap { 0.0 } else { d };
    }

    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut plane_edges: Vec<(usize, usize)> = Vec::new();
    let mut segments: Vec<(Node, Node)> = Vec::new();
    let mut cut_points: HashMap<Node, Point3> = HashMap::new();
    for f in &mesh.faces {
        let on: Vec<usize> = (0..3).filter(|&e| s[f[e]] == 0.0).collect();
        if on.len() == 3 {
            return Err(VerifyError::LevelOnVertex { level });
        }
        if on.len() == 2 {
            plane_edges.push(key(f[on[0]], f[on[1]]));
            continue;
        }
        let mut nodes = Vec::new();
        if on.len() == 1 {
            let v = f[on[0]];
            let others: Vec<usize> = (0..3).filter(|&e| e != on[0]).map(|e| f[e]).collect();
            if s[others[0]] * s[others[1]] < 0.0 {
                nodes.push(Node::Vertex(v));
                cut_points.insert(Node::Vertex(v), mesh.positions[v]);
            } else {
                continue;
            }
        }
        for e in 0..3 {
            let (a, b) = (f[e], f[(e + 1) % 3]);
            if s[a] * s[b] < 0.0 {
                let t = s[a] / (s[a] - s[b]);
                let p = mesh.positions[a] + t * (mesh.positions[b] - mesh.positions[a]);
                let node = Node::Edge(key(a, b).0, key(a, b).1);
                cut_points.insert(node, p);
                nodes.push(node);
            }
        }
        if nodes.len() == 2 {
            segments.push((nodes[0], nodes[1]));
        }
    }

    // In-plane polylines from the collected plane edges.
    plane_edges.sort_unstable();
    plane_edges.dedup();
    let axis_polylines = stitch_vertex_paths(&plane_edges, mesh);
    let mut on_polyline = vec![false; n];
    for (a, b) in &plane_edges {
        on_polyline[*a] = true;
        on_polyline[*b] = true;
    }

    // Stitch crossing segments into components.
    let mut adjacency: HashMap<Node, Vec<usize>> = HashMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(i);
        adjacency.entry(*b).or_default().push(i);
    }
    let r_max = mesh
        .positions
        .iter()
        .map(|p| p.x.hypot(p.y))
        .fold(0.0_f64, f64::max);
    let mut used = vec![false; segments.len()];
    let mut components = Vec::new();
    let mut singular_points = Vec::new();
    let component_from = |start: Node, used: &mut Vec<bool>, closed_hint: bool| {
        let mut nodes = vec![start];
        let mut node = start;
        loop {
            let next = adjacency[&node].iter().copied().find(|&i| !used[i]);
            let Some(i) = next else { break };
            used[i] = true;
            let (a, b) = segments[i];
            node = if a == node { b } else { a };
            nodes.push(node);
        }
        let closed = closed_hint && nodes.len() > 2 && nodes.first() == nodes.last();
        let points: Vec<Point3> = nodes.iter().map(|k| cut_points[k]).collect();
        let axis_crossings = nodes
            .iter()
            .filter(|k| matches!(k, Node::Vertex(v) if on_polyline[*v]))
            .count();
        let rim_artifact = points
            .iter()
            .all(|p| p.x.hypot(p.y) > 0.9 * r_max);
        (LevelComponent { points, closed, rim_artifact, axis_crossings }, nodes)
    };
    let mut open_starts: Vec<Node> = adjacency
        .iter()
        .filter(|(_, inc)| inc.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    open_starts.sort_unstable();
    for start in open_starts {
        if adjacency[&start].iter().all(|&i| used[i]) {
            continue;
        }
        let (component, nodes) = component_from(start, &mut used, false);
        record_singular(&nodes, &on_polyline, &cut_points, &mut singular_points);
        components.push(component);
    }
    for i in 0..segments.len() {
        if !used[i] {
            let (component, nodes) = component_from(segments[i].0, &mut used, true);
            record_singular(&nodes, &on_polyline, &cut_points, &mut singular_points);
            components.push(component);
        }
    }

    Ok(LevelSetReport { level, axis_polylines, components, singular_points })
}

fn record_singular(
    nodes: &[Node],
    on_polyline: &[bool],
    cut_points: &HashMap<Node, Point3>,
    singular_points: &mut Vec<Point3>,
) {
    for k in nodes {
        if matches!(k, Node::Vertex(v) if on_polyline[*v]) {
            singular_points.push(cut_points[k]);
        }
    }
}

/// Stitch a set of mesh edges into maximal vertex paths.
fn stitch_vertex_paths(edges: &[(usize, usize)], mesh: &TriMesh) -> Vec<Vec<Point3>> {
    let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, (a, b)) in edges.iter().enumerate() {
        adjacency.entry(*a).or_default().push(i);
        adjacency.entry(*b).or_default().push(i);
    }
    let mut used = vec![false; edges.len()];
    let mut paths = Vec::new();
    let mut starts: Vec<usize> = adjacency
        .iter()
        .filter(|(_, inc)| inc.len() == 1)
        .map(|(v, _)| *v)
        .collect();
    starts.sort_unstable();
    let trace = |start: usize, used: &mut Vec<bool>| {
        let mut path = vec![start];
        let mut v = start;
        loop {
            let next = adjacency[&v].iter().copied().find(|&i| !used[i]);
            let Some(i) = next else { break };
            used[i] = true;
            let (a, b) = edges[i];
            v = if a == v { b } else { a };
            path.push(v);
        }
        path.iter().map(|&v| mesh.positions[v]).collect::<Vec<_>>()
    };
    for start in starts {
        if adjacency[&start].iter().all(|&i| used[i]) {
            continue;
        }
        paths.push(trace(start, &mut used));
    }
    for i in 0..edges.len() {
        if !used[i] {
            used[i] = true;
            let mut path = trace(edges[i].1, &mut used);
            let mut full = vec![mesh.positions[edges[i].0]];
            full.append(&mut path);
            paths.push(full);
        }
    }
    paths
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_m;
    use crate::mesh::build::{helicoid_double_patch, helicoid_patch};
    use std::f64::consts::PI;
    use crate::mesh::VertexRole;
    use crate::solver::{initial_disk, HandleSeed, SeedParams};

    /// A helicoid quadrant sheet pushed strictly into the upper region:
    /// the exact helicoid lies on the window boundary of its own leaves,
    /// so the control must sit inside like a genuine spanning surface.
    fn pushed_sheet(radius: f64, height: f64, nu: usize, nv: usize) -> TriMesh {
        crate::mesh::build::grid_patch(
            |u, v| {
                let shift = 0.1 * (PI * v / height).sin() * (PI * u / radius).sin();
                let n = Point3::new(v.sin(), -v.cos(), u) / (1.0 + u * u).sqrt();
                crate::geometry::helicoid_point(u, v) - shift * n
            },
            0.0,
            radius,
            0.0,
            height,
            nu,
            nv,
        )
    }

    #[test]
    fn pushed_sheet_slice_is_a_single_radial_graph() {
        let sheet = pushed_sheet(4.0 * PI, PI, 40, 16);
        let report = axis_slice_analysis(&sheet, 0.4 * PI).unwrap();
        assert_eq!(report.curves.len(), 1, "curves: {}", report.curves.len());
        assert!(report.single_graph);
        // The leaf meets the sheet just under the ruling at its own
        // height, ending near the axis and at the rim.
        let curve = &report.curves[0];
        for p in &curve.points {
            assert!((p.z - 0.4 * PI).abs() < 0.3, "slice point {p:?} off the ruling");
        }
        assert!(report.axis_endpoints >= 1);
    }

    #[test]
    fn slice_window_outside_the_height_range_is_empty() {
        let sheet = pushed_sheet(2.0 * PI, PI, 24, 10);
        // Window (2.5 pi, 3.5 pi) is entirely above the meshed heights.
        let report = axis_slice_analysis(&sheet, 3.5 * PI).unwrap();
        assert!(report.curves.is_empty());
    }

    #[test]
    fn slice_through_vertices_is_rejected() {
        let patch = helicoid_double_patch(2.0 * PI, PI, 24, 10);
        // theta = 0 puts the whole x-axis boundary piece in the plane.
        assert!(matches!(
            axis_slice_analysis(&patch, 0.0),
            Err(VerifyError::NonTransverse { .. })
        ));
    }

    #[test]
    fn helicoid_level_set_is_one_open_curve() {
        let patch = helicoid_patch(0.3, 6.0, 0.2, 2.8, 24, 24);
        let report = level_set(&patch, 1.3).unwrap();
        let principal = report.principal_components();
        assert_eq!(principal.len(), 1);
        assert!(!principal[0].closed);
        assert!(report.axis_polylines.is_empty());
        // The level of a helicoid is a straight ruling segment.
        let pts = &principal[0].points;
        for p in pts {
            assert!((p.z - 1.3).abs() < 1e-9);
            let angle = p.y.atan2(p.x);
            // Crossing points sit on edge chords, so they deviate from
            // the exact ruling at second order in the grid spacing.
            assert!((angle - 1.3).abs() < 2e-2, "point {p:?} off the ruling");
        }
    }

    #[test]
    fn closed_level_curve_on_a_tube() {
        // Vertical cylinder of radius 1: the level at mid-height is a
        // single closed circle.
        let n = 40;
        let rows = 10;
        let mut positions = Vec::new();
        for i in 0..rows {
            let z = i as f64 * 0.21;
            for j in 0..n {
                let a = 2.0 * PI * j as f64 / n as f64;
                positions.push(Point3::new(a.cos(), a.sin(), z));
            }
        }
        let mut faces = Vec::new();
        for i in 0..rows - 1 {
            for j in 0..n {
                let jn = (j + 1) % n;
                let (a, b, c, d) =
                    (i * n + j, i * n + jn, (i + 1) * n + j, (i + 1) * n + jn);
                faces.push([a, b, d]);
                faces.push([a, d, c]);
            }
        }
        let count = positions.len();
        let tube = TriMesh {
            positions,
            faces,
            roles: vec![VertexRole::Free; count],
            boundary_pieces: Vec::new(),
            boundary_attr: vec![None; count],
            origin_pair: None,
            rot_y_partner: None,
        };
        let report = level_set(&tube, 1.0).unwrap();
        assert_eq!(report.components.len(), 1);
        assert!(report.components[0].closed);
        for p in &report.components[0].points {
            // Chord sag: crossing points on diagonal edges sit slightly
            // inside the circle.
            assert!((p.x.hypot(p.y) - 1.0).abs() < 5e-3);
        }
    }

    #[test]
    fn zero_level_of_a_helicoid_band_contains_the_axis_line() {
        // The patch's bottom edge is the horizontal line through the
        // origin, lying exactly in the zero level: it comes out as an
        // in-plane polyline, with no crossing components (the rest of the
        // surface stays strictly above).
        let patch = helicoid_double_patch(2.0 * PI, PI, 24, 10);
        let report = level_set(&patch, 0.0).unwrap();
        assert_eq!(report.axis_polylines.len(), 1);
        assert!(report.components.is_empty());
        let line = &report.axis_polylines[0];
        let reach = line.iter().map(|p| p.x.hypot(p.y)).fold(0.0_f64, f64::max);
        assert!((reach - 2.0 * PI).abs() < 1e-9, "reach {reach}");
        for p in line {
            assert!(p.z.abs() < 1e-12 && p.y.abs() < 1e-12, "axis point {p:?}");
        }
    }

    #[test]
    fn coplanar_handle_faces_force_a_level_perturbation() {
        // The raw seed's bridge contains faces lying exactly in z = 0, so
        // the exact zero level is rejected; a perturbed level extracts
        // ordinary crossing curves.
        let params = SeedParams::new(2.0 * PI, PI, 20, 10)
            .with_handle(HandleSeed::Bump { amplitude: 1.0 });
        let d = initial_disk(&params).unwrap();
        let m = assemble_m(&d).unwrap();
        assert!(matches!(level_set(&m, 0.0), Err(VerifyError::LevelOnVertex { .. })));
        let report = level_set(&m, 0.01).unwrap();
        assert!(!report.components.is_empty());
    }
}
