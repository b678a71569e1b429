//! Vertical-tangent censuses: for a horizontal direction `(a, b)` the
//! height-like function `f = a x + b y` restricted to the surface has a
//! critical point exactly where the surface normal is parallel to
//! `(a, b, 0)`.  The censuses count clusters of such tangencies per
//! direction and compare against the structural bounds.

use std::f64::consts::PI;

use crate::geometry::Point3;
use crate::mesh::{TriMesh, VertexRole};

/// Angular detection threshold: discrete normals never hit the parallel
/// condition exactly, so a vertex is flagged when its normal lies within
/// this angle of the direction line.
pub const TANGENCY_THRESHOLD: f64 = 1.5 * PI / 180.0;

/// A connected group of flagged vertices for one direction.
#[derive(Debug, Clone)]
pub struct TangencyCluster {
    pub centroid: Point3,
    /// Cylindrical angle of the centroid.
    pub theta: f64,
    pub z: f64,
    /// Value of `f = a x + b y` at the centroid; its sign identifies the
    /// side of the plane `f = 0`.
    pub f_value: f64,
    pub size: usize,
    /// Whether the cluster sits on the vertical axis (within a couple of
    /// mesh cells).
    pub on_axis: bool,
    /// Raised when the normal variation inside the cluster spans a large
    /// fraction of the detection threshold, so the count may be resolving
    /// a single degenerate tangency as several.
    pub near_degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct DirectionCensus {
    /// Direction angle in `[0, pi)`; the direction `(cos, sin)` and its
    /// negation define the same vertical plane.
    pub angle: f64,
    pub clusters: Vec<TangencyCluster>,
}

impl DirectionCensus {
    pub fn interior_cluster_count(&self) -> usize {
        self.clusters.iter().filter(|c| !c.on_axis).count()
    }
}

#[derive(Debug, Clone)]
pub struct CensusReport {
    pub directions: Vec<DirectionCensus>,
    /// Maximum number of off-axis clusters over all directions.
    pub max_interior_clusters: usize,
    /// Largest |z| over all recorded clusters.
    pub max_abs_z: f64,
}

impl CensusReport {
    /// Per-direction CSV rows.
    pub fn csv(&self) -> String {
        let mut out = String::from("direction_index,angle,clusters,off_axis_clusters,max_abs_z\n");
        for (i, d) in self.directions.iter().enumerate() {
            let max_z = d
                .clusters
                .iter()
                .map(|c| c.z.abs())
                .fold(0.0_f64, f64::max);
            out.push_str(&format!(
                "{},{:.9e},{},{},{:.9e}\n",
                i,
                d.angle,
                d.clusters.len(),
                d.interior_cluster_count(),
                max_z
            ));
        }
        out
    }
}

/// Flag and cluster the vertices whose normal is within the threshold of
/// the line spanned by `(a, b, 0)`, restricted to vertices accepted by
/// `eligible`.
fn tangency_clusters(
    mesh: &TriMesh,
    normals: &[Point3],
    neighbors: &[Vec<usize>],
    a: f64,
    b: f64,
    axis_tol: f64,
    eligible: &dyn Fn(usize) -> bool,
) -> Vec<TangencyCluster> {
    let n = mesh.vertex_count();
    let cos_thresh = TANGENCY_THRESHOLD.cos();
    let mut flagged = vec![false; n];
    let mut angle_off = vec![0.0_f64; n];
    for v in 0..n {
        if !eligible(v) {
            continue;
        }
        let nu = normals[v];
        let dot = (nu.x * a + nu.y * b).abs().min(1.0);
        if dot >= cos_thresh {
            flagged[v] = true;
            angle_off[v] = dot.acos();
        }
    }
    let mut clusters = Vec::new();
    let mut seen = vec![false; n];
    for start in 0..n {
        if !flagged[start] || seen[start] {
            continue;
        }
        let mut members = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            members.push(v);
            for &w in &neighbors[v] {
                if flagged[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        let mut centroid = Point3::zeros();
        let mut min_off = f64::INFINITY;
        let mut max_off = 0.0_f64;
        for &v in &members {
            centroid += mesh.positions[v];
            min_off = min_off.min(angle_off[v]);
            max_off = max_off.max(angle_off[v]);
        }
        centroid /= members.len() as f64;
        clusters.push(TangencyCluster {
            centroid,
            theta: centroid.y.atan2(centroid.x),
            z: centroid.z,
            f_value: a * centroid.x + b * centroid.y,
            size: members.len(),
            on_axis: centroid.x.hypot(centroid.y) < axis_tol,
            near_degenerate: max_off - min_off > 0.5 * TANGENCY_THRESHOLD,
        });
    }
    clusters
}

/// Census of interior vertical tangencies over a half-circle of
/// directions.
pub fn vertical_tangent_census(mesh: &TriMesh, n_dirs: usize) -> CensusReport {
    let normals = mesh.vertex_normals();
    let neighbors = mesh.vertex_neighbors();
    let axis_tol = 2.0 * mesh.mean_edge_length();
    let interior = |v: usize| mesh.roles[v] == VertexRole::Free;
    let mut directions = Vec::with_capacity(n_dirs);
    let mut max_interior = 0;
    let mut max_abs_z = 0.0_f64;
    for k in 0..n_dirs {
        let angle = PI * k as f64 / n_dirs as f64;
        let clusters = tangency_clusters(
            mesh,
            &normals,
            &neighbors,
            angle.cos(),
            angle.sin(),
            axis_tol,
            &interior,
        );
        for c in &clusters {
            max_abs_z = max_abs_z.max(c.z.abs());
        }
        let census = DirectionCensus { angle, clusters };
        max_interior = max_interior.max(census.interior_cluster_count());
        directions.push(census);
    }
    CensusReport { directions, max_interior_clusters: max_interior, max_abs_z }
}

#[derive(Debug, Clone)]
pub struct SlabCensusReport {
    pub z_lo: f64,
    /// `(total clusters, off-axis clusters)` per direction.
    pub per_direction: Vec<(usize, usize)>,
    pub max_total: usize,
    pub max_off_axis: usize,
}

/// Tangency census restricted to the open slab `(z_lo, z_lo + pi)` of a
/// tiled surface, counting interior and on-axis clusters alike; returns
/// the maxima over the sampled directions.
pub fn slab_census(mesh: &TriMesh, z_lo: f64, n_dirs: usize) -> SlabCensusReport {
    let normals = mesh.vertex_normals();
    let neighbors = mesh.vertex_neighbors();
    let axis_tol = 2.0 * mesh.mean_edge_length();
    let z_hi = z_lo + PI;
    let in_slab = |v: usize| {
        let z = mesh.positions[v].z;
        mesh.roles[v] == VertexRole::Free && z > z_lo && z < z_hi
    };
    let mut per_direction = Vec::with_capacity(n_dirs);
    let mut max_total = 0;
    let mut max_off_axis = 0;
    for k in 0..n_dirs {
        let angle = PI * k as f64 / n_dirs as f64;
        let clusters = tangency_clusters(
            mesh,
            &normals,
            &neighbors,
            angle.cos(),
            angle.sin(),
            axis_tol,
            &in_slab,
        );
        let total = clusters.len();
        let off_axis = clusters.iter().filter(|c| !c.on_axis).count();
        max_total = max_total.max(total);
        max_off_axis = max_off_axis.max(off_axis);
        per_direction.push((total, off_axis));
    }
    SlabCensusReport { z_lo, per_direction, max_total, max_off_axis }
}
