//! Outer-region behavior: the pitch of the upper sheet's height
//! function, crossings of catenoid obstacle annuli, and curvature /
//! horizontality profiles used by the radius sweeps.

use std::f64::consts::PI;

use crate::geometry::CatenoidBarrier;
use crate::mesh::{curvature_field, StencilStatus, TriMesh, VertexRole};

use super::VerifyError;

#[derive(Debug, Clone)]
pub struct PitchReport {
    /// Least-squares slope of the height function against the angle.
    pub slope: f64,
    pub intercept: f64,
    /// Largest deviation of a sample from the fitted line.
    pub max_residual: f64,
    /// `(radius, angle, height)` samples on the upper sheet.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Height of the mesh over the horizontal point `(x, y)`, by barycentric
/// lookup in the vertical projection; all hits are returned.
fn heights_over(mesh: &TriMesh, x: f64, y: f64) -> Vec<f64> {
    let mut hits = Vec::new();
    for f in &mesh.faces {
        let [a, b, c] = [mesh.positions[f[0]], mesh.positions[f[1]], mesh.positions[f[2]]];
        let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        if det.abs() < 1e-300 {
            continue;
        }
        let l1 = ((x - a.x) * (c.y - a.y) - (c.x - a.x) * (y - a.y)) / det;
        let l2 = ((b.x - a.x) * (y - a.y) - (x - a.x) * (b.y - a.y)) / det;
        let l0 = 1.0 - l1 - l2;
        let eps = -1e-12;
        if l0 >= eps && l1 >= eps && l2 >= eps {
            hits.push(l0 * a.z + l1 * b.z + l2 * c.z);
        }
    }
    hits.sort_by(|p, q| p.partial_cmp(q).unwrap());
    hits.dedup_by(|p, q| (*p - *q).abs() < 1e-9);
    hits
}

/// Estimate the pitch of the upper sheet: sample the height function
/// `f(r, theta)` on radial circles in `[r_min, R]` for angles inside the
/// sheet's range, and fit `f` linearly in `theta`.  The pitch of the
/// standard helicoid is exactly 1.
pub fn pitch_estimate(
    mesh: &TriMesh,
    r_min: f64,
    height: f64,
) -> Result<PitchReport, VerifyError> {
    let r_max = mesh
        .positions
        .iter()
        .map(|p| p.x.hypot(p.y))
        .fold(0.0_f64, f64::max);
    if !(r_min < r_max) {
        return Err(VerifyError::SheetAmbiguity(format!(
            "inner radius {r_min} is not below the mesh radius {r_max}"
        )));
    }
    let n_r = 8;
    let n_theta = 25;
    let mut samples = Vec::new();
    for i in 0..n_r {
        let r = r_min + (0.98 * r_max - r_min) * i as f64 / (n_r - 1) as f64;
        for j in 1..n_theta {
            let theta = height * j as f64 / n_theta as f64;
            let hits = heights_over(mesh, r * theta.cos(), r * theta.sin());
            // The upper sheet passes near height theta; the opposite
            // sheet lives over the antipodal angle and never projects
            // here.
            let near: Vec<f64> =
                hits.into_iter().filter(|z| (z - theta).abs() < 0.5 * PI).collect();
            match near.len() {
                1 => samples.push((r, theta, near[0])),
                0 => {
                    return Err(VerifyError::SheetAmbiguity(format!(
                        "no sheet over r = {r}, theta = {theta}"
                    )))
                }
                k => {
                    return Err(VerifyError::SheetAmbiguity(format!(
                        "{k} sheets over r = {r}, theta = {theta}"
                    )))
                }
            }
        }
    }
    // Least squares f = slope * theta + intercept.
    let n = samples.len() as f64;
    let st: f64 = samples.iter().map(|s| s.1).sum();
    let sf: f64 = samples.iter().map(|s| s.2).sum();
    let stt: f64 = samples.iter().map(|s| s.1 * s.1).sum();
    let stf: f64 = samples.iter().map(|s| s.1 * s.2).sum();
    let slope = (n * stf - st * sf) / (n * stt - st * st);
    let intercept = (sf - slope * st) / n;
    let max_residual = samples
        .iter()
        .map(|s| (s.2 - slope * s.1 - intercept).abs())
        .fold(0.0_f64, f64::max);
    Ok(PitchReport { slope, intercept, max_residual, samples })
}

/// Whether the surface crosses each barrier's clipped catenoid annulus:
/// true when some mesh edge passes from inside to outside the hourglass
/// within the clip band.
pub fn annular_intersection_test(mesh: &TriMesh, barriers: &[CatenoidBarrier]) -> Vec<bool> {
    let mut edges = std::collections::HashSet::new();
    for f in &mesh.faces {
        for e in 0..3 {
            let (a, b) = (f[e], f[(e + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    barriers
        .iter()
        .map(|barrier| {
            edges
                .iter()
                .any(|&(a, b)| barrier.segment_crosses(mesh.positions[a], mesh.positions[b]))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct HorizontalityBin {
    pub r_lo: f64,
    pub r_hi: f64,
    /// Largest angle between a vertex normal and the vertical, radians.
    pub max_angle: f64,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct CurvatureReport {
    /// Largest second-fundamental-form norm over interior vertices with a
    /// trustworthy stencil.
    pub max_shape_norm: f64,
    /// Normal-vs-vertical profile binned by distance to the vertical
    /// axis.
    pub bins: Vec<HorizontalityBin>,
}

/// Curvature magnitude and horizontality profile of the interior.
pub fn curvature_report(mesh: &TriMesh, n_bins: usize) -> CurvatureReport {
    let field = curvature_field(mesh);
    let r_max = mesh
        .positions
        .iter()
        .map(|p| p.x.hypot(p.y))
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let mut max_shape_norm = 0.0_f64;
    let mut bins: Vec<HorizontalityBin> = (0..n_bins)
        .map(|i| HorizontalityBin {
            r_lo: r_max * i as f64 / n_bins as f64,
            r_hi: r_max * (i + 1) as f64 / n_bins as f64,
            max_angle: 0.0,
            count: 0,
        })
        .collect();
    for v in 0..mesh.vertex_count() {
        if mesh.roles[v] != VertexRole::Free {
            continue;
        }
        if matches!(field.status[v], StencilStatus::Ok | StencilStatus::WideStencil) {
            max_shape_norm = max_shape_norm.max(field.shape_norm[v]);
        }
        let r = mesh.positions[v].x.hypot(mesh.positions[v].y);
        let i = ((r / r_max * n_bins as f64) as usize).min(n_bins - 1);
        let angle = field.normal[v].z.abs().min(1.0).acos();
        bins[i].max_angle = bins[i].max_angle.max(angle);
        bins[i].count += 1;
    }
    CurvatureReport { max_shape_norm, bins }
}
