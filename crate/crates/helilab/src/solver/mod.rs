//! Constrained Plateau solver: seed construction, penalised area
//! minimisation confined to the upper region, symmetry projection, and
//! Newton refinement of (possibly unstable) equilibria.

pub mod seed;

pub use seed::{initial_disk, HandleSeed, SeedParams};

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{upper_region_violation, CatenoidBarrier, Point3};
use crate::linalg::{cg_solve, minres_solve, Csr};
use crate::mesh::{cotan_laplacian_triplets, curvature_field, MeshError, TriMesh, VertexRole};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("bad seed parameters: {0}")]
    BadSeedParameters(String),
    #[error("seed construction produced an invalid mesh: {0}")]
    InvalidSeedMesh(MeshError),
    #[error("mesh error during solve: {0}")]
    Mesh(#[from] MeshError),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
}

/// Settings for [`minimize_area`] and [`newton_refine`].
#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub max_iterations: usize,
    /// Convergence threshold on the pointwise mean-curvature residual
    /// (gradient of area per unit vertex area).
    pub tolerance: f64,
    /// Implicit time step, in units of the total area; larger steps move
    /// further toward the harmonic solution per iteration.
    pub step: f64,
    /// Quadratic penalty weight confining the surface to the closed upper
    /// region between the two half-turn sheets.
    pub containment_weight: f64,
    /// Quadratic penalty weight keeping the surface outside a catenoid
    /// barrier, when one is supplied.
    pub barrier_weight: f64,
    /// Clearance margin for the barrier penalty.
    pub barrier_margin: f64,
    pub cg_tolerance: f64,
    pub cg_max_iterations: usize,
    /// Print per-iteration progress to stderr.
    pub trace: bool,
}

impl Default for SolveConfig {
    fn default() -> SolveConfig {
        SolveConfig {
            max_iterations: 300,
            tolerance: 1e-5,
            step: 0.5,
            containment_weight: 10.0,
            barrier_weight: 10.0,
            barrier_margin: 0.05,
            cg_tolerance: 1e-10,
            cg_max_iterations: 4000,
            trace: false,
        }
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub mesh: TriMesh,
    pub iterations: usize,
    pub area_history: Vec<f64>,
    /// Final pointwise mean-curvature residual (inf norm over free
    /// vertices, including penalty forces).
    pub residual: f64,
    /// Final penalty energy (containment plus barrier).
    pub penalty: f64,
    pub converged: bool,
    /// Stability classification, when a caller has run the spectral check.
    pub stability: Option<crate::jacobi::Stability>,
}

fn is_free(role: VertexRole) -> bool {
    role == VertexRole::Free
}

/// Map from vertex index to reduced (free-only) index, plus the list of
/// free vertices in order.
fn free_index_map(mesh: &TriMesh) -> (Vec<Option<usize>>, Vec<usize>) {
    let mut map = vec![None; mesh.vertex_count()];
    let mut free = Vec::new();
    for (v, &role) in mesh.roles.iter().enumerate() {
        if is_free(role) {
            map[v] = Some(free.len());
            free.push(v);
        }
    }
    (map, free)
}

/// Split full-mesh Laplacian triplets into the free-free block and the
/// free-fixed coupling (as a map from free row to fixed-column terms).
fn split_triplets(
    triplets: &[(usize, usize, f64)],
    map: &[Option<usize>],
) -> (Vec<(usize, usize, f64)>, HashMap<usize, Vec<(usize, f64)>>) {
    let mut ff = Vec::new();
    let mut fb: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    for &(r, c, w) in triplets {
        match (map[r], map[c]) {
            (Some(rf), Some(cf)) => ff.push((rf, cf, w)),
            (Some(rf), None) => fb.entry(rf).or_default().push((c, w)),
            _ => {}
        }
    }
    (ff, fb)
}

/// Penalty energy of a vertex configuration (areas frozen).
fn penalty_energy(
    positions: &[Point3],
    areas: &[f64],
    cfg: &SolveConfig,
    barrier: Option<&CatenoidBarrier>,
) -> f64 {
    let mut e = 0.0;
    for (p, &a) in positions.iter().zip(areas) {
        // Arc-length penetration depth (radius times angular depth): the
        // angular depth alone has a 1/r gradient that blows up at the
        // axis, right where the welded contour segments live.
        let c = upper_region_violation(*p) * p.x.hypot(p.y);
        e += cfg.containment_weight * a * c * c;
        if let Some(b) = barrier {
            let d = b.keep_outside_violation(*p, cfg.barrier_margin);
            e += cfg.barrier_weight * a * d * d;
        }
    }
    e
}

/// Gradient of the penalty energy with respect to each vertex position.
fn penalty_gradient(
    positions: &[Point3],
    areas: &[f64],
    cfg: &SolveConfig,
    barrier: Option<&CatenoidBarrier>,
) -> Vec<Point3> {
    use std::f64::consts::{PI, TAU};
    let mut grad = vec![Point3::zeros(); positions.len()];
    for (v, (p, &a)) in positions.iter().zip(areas).enumerate() {
        let r2 = p.x * p.x + p.y * p.y;
        if r2 > 0.0 {
            if let Ok(g) = crate::geometry::branch_gap(*p) {
                if g > PI {
                    let r = r2.sqrt();
                    let (viol, sign) =
                        if g - PI <= TAU - g { (g - PI, 1.0) } else { (TAU - g, -1.0) };
                    // Depth d = r * viol; grad d = viol * e_r + sign * r * grad(gap),
                    // and r * grad(gap) = (-y/r, x/r, -r) stays bounded at the axis.
                    let e_r = Point3::new(p.x / r, p.y / r, 0.0);
                    let rdg = Point3::new(-p.y / r, p.x / r, -r);
                    let d = r * viol;
                    let dd = viol * e_r + sign * rdg;
                    grad[v] += cfg.containment_weight * a * 2.0 * d * dd;
                }
            }
        }
        if let Some(b) = barrier {
            let d = b.keep_outside_violation(*p, cfg.barrier_margin);
            if d > 0.0 {
                let dz = p.z - b.center.z;
                let horiz = Point3::new(p.x - b.center.x, p.y - b.center.y, 0.0);
                let hn = horiz.norm();
                let e_r = if hn > 1e-12 { horiz / hn } else { Point3::new(1.0, 0.0, 0.0) };
                // Gradient of the radial clearance.
                let dclear = e_r - (dz / b.neck).sinh() * Point3::new(0.0, 0.0, 1.0);
                grad[v] += cfg.barrier_weight * a * 2.0 * d * (-dclear);
            }
        }
    }
    grad
}

/// Average each symmetry pair into exact equivariance under the y-flip.
/// Vertices paired with themselves are projected onto the flip's fixed
/// line (the y-axis).  Non-free vertices are left untouched; meshes built
/// without pairing data pass through unchanged.
pub fn project_equivariant(positions: &mut [Point3], mesh: &TriMesh) {
    let Some(partner) = &mesh.rot_y_partner else { return };
    let flip = |p: Point3| Point3::new(-p.x, p.y, -p.z);
    for v in 0..positions.len() {
        if !is_free(mesh.roles[v]) {
            continue;
        }
        let w = partner[v];
        if w == v {
            positions[v] = Point3::new(0.0, positions[v].y, 0.0);
        } else if v < w && is_free(mesh.roles[w]) {
            let avg = 0.5 * (positions[v] + flip(positions[w]));
            positions[v] = avg;
            positions[w] = flip(avg);
        }
    }
}

/// Pointwise residual: inf norm over free vertices of the normal component
/// of the area gradient (the discrete mean curvature) plus penalty force,
/// per unit vertex area.  The tangential component of the gradient is
/// parametrisation drift, not geometry, and is excluded.
///
/// The contour's origin double point is a genuine corner singularity of
/// the spanning surface: the curvature blows up like 1/d with the distance
/// d to the corner, so the raw pointwise residual forms an O(1) halo there
/// at every resolution.  When the mesh carries an origin pair the residual
/// is therefore weighted by min(1, (d/d0)^3) with d0 a quarter of the
/// surface extent — vertices inside one stencil of the corner are dropped
/// outright — which restores a norm that vanishes under refinement while
/// still controlling the far field at full strength.
fn residual_inf(
    mesh: &TriMesh,
    cfg: &SolveConfig,
    barrier: Option<&CatenoidBarrier>,
) -> f64 {
    let n = mesh.vertex_count();
    let areas = mesh.vertex_areas();
    let normals = mesh.vertex_normals();
    let triplets = cotan_laplacian_triplets(mesh, 20.0);
    let lap = Csr::from_triplets(n, &triplets);
    let mut lx = vec![Point3::zeros(); n];
    let mut xs = vec![0.0; n];
    let mut ys = vec![0.0; n];
    for axis in 0..3 {
        for v in 0..n {
            xs[v] = mesh.positions[v][axis];
        }
        lap.matvec(&xs, &mut ys);
        for v in 0..n {
            lx[v][axis] = ys[v];
        }
    }
    let corner_cut = mesh.origin_pair.map(|(o1, _)| {
        let corner = mesh.positions[o1];
        let extent = mesh
            .positions
            .iter()
            .map(|p| (p - corner).norm())
            .fold(0.0_f64, f64::max);
        (corner, 1.5 * mesh.mean_edge_length(), 0.25 * extent)
    });
    let pgrad = penalty_gradient(&mesh.positions, &areas, cfg, barrier);
    let mut worst: f64 = 0.0;
    for v in 0..n {
        if is_free(mesh.roles[v]) {
            let mut weight = 1.0;
            if let Some((corner, cut, d0)) = corner_cut {
                let d = (mesh.positions[v] - corner).norm();
                if d < cut {
                    continue;
                }
                weight = (d / d0).powi(3).min(1.0);
            }
            let force =
                (lx[v] + pgrad[v]).dot(&normals[v]).abs() / (2.0 * areas[v].max(1e-300));
            worst = worst.max(weight * force);
        }
    }
    worst
}

/// Minimise area over free vertices by damped implicit mean-curvature
/// steps, with quadratic penalties confining the surface to the upper
/// region and outside an optional catenoid barrier.  Each accepted step is
/// projected back to exact y-flip equivariance.
pub fn minimize_area(
    mesh: &TriMesh,
    cfg: &SolveConfig,
    barrier: Option<&CatenoidBarrier>,
) -> Result<SolveResult, SolverError> {
    let mut current = mesh.clone();
    let (map, free) = free_index_map(&current);
    let nf = free.len();
    if nf == 0 {
        return Err(SolverError::BadSeedParameters("mesh has no free vertices".into()));
    }

    let neighbors = current.vertex_neighbors();
    let mut area_history = vec![current.total_area()];
    let mut step = cfg.step;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iterations {
        iterations += 1;
        // Recover from aggressive backtracking in earlier iterations.
        step = step.max(1e-3 * cfg.step);
        let areas = current.vertex_areas();
        let area = current.total_area();
        let normals = current.vertex_normals();
        let triplets = cotan_laplacian_triplets(&current, 20.0);
        let (ff, fb) = split_triplets(&triplets, &map);
        let pgrad = penalty_gradient(&current.positions, &areas, cfg, barrier);
        let energy = area + penalty_energy(&current.positions, &areas, cfg, barrier);

        // Defect correction: the clamped operator keeps the implicit
        // system well conditioned, but its gradient is wrong on sliver
        // triangles whose cotangents exceed the clamp (the line search
        // then rejects every step).  Treat the clamp difference applied
        // to the current positions explicitly, so the small-step limit is
        // the true area gradient.
        let defect: Vec<Point3> = {
            let exact = cotan_laplacian_triplets(&current, 1e9);
            let lc = Csr::from_triplets(current.vertex_count(), &triplets);
            let lt = Csr::from_triplets(current.vertex_count(), &exact);
            let n = current.vertex_count();
            let mut d = vec![Point3::zeros(); n];
            let mut xs = vec![0.0; n];
            let mut yc = vec![0.0; n];
            let mut yt = vec![0.0; n];
            for axis in 0..3 {
                for v in 0..n {
                    xs[v] = current.positions[v][axis];
                }
                lc.matvec(&xs, &mut yc);
                lt.matvec(&xs, &mut yt);
                for v in 0..n {
                    d[v][axis] = yt[v] - yc[v];
                }
            }
            d
        };

        let mut accepted = false;
        for _back in 0..20 {
            // Implicit step: (M + dt L) x' = M x - dt * penalty gradient,
            // with fixed vertices folded into the right-hand side.
            let dt = step * area;
            let mut sys = ff.clone();
            for t in sys.iter_mut() {
                t.2 *= dt;
            }
            for (rf, &v) in free.iter().enumerate() {
                sys.push((rf, rf, areas[v]));
            }
            let op = Csr::from_triplets(nf, &sys);
            let diag = op.diagonal();

            let mut candidate = current.positions.clone();
            let mut ok = true;
            for axis in 0..3 {
                let mut rhs = vec![0.0; nf];
                for (rf, &v) in free.iter().enumerate() {
                    rhs[rf] = areas[v] * current.positions[v][axis]
                        - dt * (pgrad[v][axis] + defect[v][axis]);
                }
                for (rf, terms) in &fb {
                    for &(c, w) in terms {
                        rhs[*rf] -= dt * w * current.positions[c][axis];
                    }
                }
                let mut x: Vec<f64> =
                    free.iter().map(|&v| current.positions[v][axis]).collect();
                let out =
                    cg_solve(&op, &rhs, &mut x, Some(&diag), cfg.cg_tolerance, cfg.cg_max_iterations);
                if out.indefinite {
                    ok = false;
                    break;
                }
                for (rf, &v) in free.iter().enumerate() {
                    candidate[v][axis] = x[rf];
                }
            }
            if !ok {
                step *= 0.5;
                continue;
            }
            // Keep only the normal component of each move: tangential
            // motion is parametrisation drift, and near the contour's
            // corners (above all the origin double point) it drags
            // vertices into the corner and degenerates the triangles.
            // Penalty forces are genuine ambient forces, though, so where
            // a vertex is pressed by a constraint the component along the
            // (tangential part of the) constraint force survives too —
            // a flat sheet facing a sideways barrier must be allowed to
            // slide off it.
            for &v in &free {
                let d = candidate[v] - current.positions[v];
                let nrm = normals[v];
                let mut keep = d.dot(&nrm) * nrm;
                if pgrad[v].norm_squared() > 0.0 {
                    let mut t = pgrad[v] - pgrad[v].dot(&nrm) * nrm;
                    let tn = t.norm();
                    if tn > 1e-14 {
                        t /= tn;
                        keep += d.dot(&t) * t;
                    }
                }
                candidate[v] = current.positions[v] + keep;
            }
            project_equivariant(&mut candidate, &current);

            let mut trial = current.clone();
            trial.positions = candidate;
            let trial_areas = trial.vertex_areas();
            let trial_energy = trial.total_area()
                + penalty_energy(&trial.positions, &trial_areas, cfg, barrier);
            // Allow a bounded per-iteration energy rise: near the
            // contour corners the clamped operator and the true area
            // disagree at sliver scale, and a strictly monotone test
            // deadlocks the whole flow on those few vertices.
            if trial_energy <= energy + 1e-6 * (1.0 + energy.abs()) {
                current = trial;
                accepted = true;
                step = (step * 1.5).min(cfg.step.max(4.0));
                break;
            }
            step *= 0.5;
        }
        if accepted {
            // Tangential regularisation: pull each free vertex toward its
            // neighbour centroid within the tangent plane.  This is the
            // standard companion of normal-motion flows — it redistributes
            // the parametrisation without moving the surface (to first
            // order), and keeps the triangles near the contour corners
            // from degenerating as the neck tightens.
            let normals = current.vertex_normals();
            let mut smoothed = current.positions.clone();
            for &v in &free {
                let nbrs = &neighbors[v];
                if nbrs.is_empty() {
                    continue;
                }
                let mut c = Point3::zeros();
                for &w in nbrs {
                    c += current.positions[w];
                }
                c /= nbrs.len() as f64;
                let d = c - current.positions[v];
                let tangential = d - d.dot(&normals[v]) * normals[v];
                smoothed[v] += 0.3 * tangential;
            }
            project_equivariant(&mut smoothed, &current);
            current.positions = smoothed;
        }
        area_history.push(current.total_area());
        let res = residual_inf(&current, cfg, barrier);
        if cfg.trace {
            eprintln!(
                "minimize_area it {iterations}: area {:.9} residual {res:.3e} step {step:.3e} accepted {accepted}",
                current.total_area()
            );
        }
        if res <= cfg.tolerance {
            converged = true;
            break;
        }
        if !accepted {
            break;
        }
    }

    let residual = residual_inf(&current, cfg, barrier);
    let areas = current.vertex_areas();
    let penalty = penalty_energy(&current.positions, &areas, cfg, barrier);
    Ok(SolveResult {
        mesh: current,
        iterations,
        area_history,
        residual,
        penalty,
        converged,
        stability: None,
    })
}

/// Newton refinement of an equilibrium by normal offsets.  Solves the
/// linearised minimal-surface equation with the (possibly indefinite)
/// second-variation operator `L - |A|^2 M` via MINRES, with Levenberg
/// damping, so saddle-point equilibria are reachable as well as minima.
pub fn newton_refine(
    mesh: &TriMesh,
    cfg: &SolveConfig,
) -> Result<SolveResult, SolverError> {
    let mut current = mesh.clone();
    let n = current.vertex_count();
    let (map, free) = free_index_map(&current);
    let nf = free.len();
    if nf == 0 {
        return Err(SolverError::BadSeedParameters("mesh has no free vertices".into()));
    }

    let residual_vec = |m: &TriMesh| -> (Vec<f64>, Vec<Point3>, f64) {
        let areas = m.vertex_areas();
        let normals = m.vertex_normals();
        let triplets = cotan_laplacian_triplets(m, 20.0);
        let lap = Csr::from_triplets(n, &triplets);
        let mut lx = vec![Point3::zeros(); n];
        let mut xs = vec![0.0; n];
        let mut ys = vec![0.0; n];
        for axis in 0..3 {
            for v in 0..n {
                xs[v] = m.positions[v][axis];
            }
            lap.matvec(&xs, &mut ys);
            for v in 0..n {
                lx[v][axis] = ys[v];
            }
        }
        let mut r = vec![0.0; nf];
        let mut worst: f64 = 0.0;
        for (rf, &v) in free.iter().enumerate() {
            r[rf] = lx[v].dot(&normals[v]);
            worst = worst.max(r[rf].abs() / (2.0 * areas[v].max(1e-300)));
        }
        (r, normals, worst)
    };

    let mut area_history = vec![current.total_area()];
    let (mut r, mut normals, mut res) = residual_vec(&current);
    let mut damping = 1e-4;
    let mut converged = res <= cfg.tolerance;
    let mut iterations = 0;

    while !converged && iterations < cfg.max_iterations {
        iterations += 1;
        let areas = current.vertex_areas();
        let shape = curvature_field(&current).shape_norm;
        let triplets = cotan_laplacian_triplets(&current, 20.0);
        let (mut ff, _) = split_triplets(&triplets, &map);
        for (rf, &v) in free.iter().enumerate() {
            ff.push((rf, rf, -areas[v] * shape[v] * shape[v]));
        }

        let rnorm = crate::linalg::norm(&r);
        let mut accepted = false;
        for _try in 0..12 {
            let mut sys = ff.clone();
            for (rf, &v) in free.iter().enumerate() {
                sys.push((rf, rf, damping * areas[v]));
            }
            let op = Csr::from_triplets(nf, &sys);
            let rhs: Vec<f64> = r.iter().map(|&ri| -ri).collect();
            let mut phi = vec![0.0; nf];
            let out = minres_solve(&op, &rhs, &mut phi, 1e-10, 4000);
            if !out.residual.is_finite() {
                return Err(SolverError::LinearSolve(
                    "MINRES produced a non-finite residual".into(),
                ));
            }

            let mut candidate = current.positions.clone();
            for (rf, &v) in free.iter().enumerate() {
                candidate[v] += phi[rf] * normals[v];
            }
            project_equivariant(&mut candidate, &current);
            let mut trial = current.clone();
            trial.positions = candidate;
            let (tr, tnormals, tres) = residual_vec(&trial);
            if crate::linalg::norm(&tr) < rnorm * (1.0 - 1e-8) || tres < res {
                current = trial;
                r = tr;
                normals = tnormals;
                res = tres;
                damping = (damping * 0.25).max(1e-10);
                accepted = true;
                break;
            }
            damping = (damping * 8.0).min(1e6);
        }
        area_history.push(current.total_area());
        if res <= cfg.tolerance {
            converged = true;
        }
        if !accepted {
            break;
        }
    }

    Ok(SolveResult {
        mesh: current,
        iterations,
        area_history,
        residual: res,
        penalty: 0.0,
        converged,
        stability: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::helicoid_point;
    use crate::mesh::build::{catenoid_band, fan_disk, helicoid_patch};
    use std::f64::consts::PI;

    #[test]
    fn flat_disk_area_matches_the_circle() {
        // A cone over the rim relaxes to the flat disk of area pi r^2.
        let mut m = fan_disk(2.0, 48, 6);
        // Lift the interior into a shallow cone.
        for v in 0..m.vertex_count() {
            if m.roles[v] == VertexRole::Free {
                let r = m.positions[v].x.hypot(m.positions[v].y);
                m.positions[v].z = 0.4 * (2.0 - r);
            }
        }
        let cfg = SolveConfig {
            tolerance: 1e-7,
            containment_weight: 0.0,
            ..SolveConfig::default()
        };
        let out = minimize_area(&m, &cfg, None).unwrap();
        assert!(out.converged, "residual {}", out.residual);
        let exact = PI * 4.0;
        let got = out.mesh.total_area();
        assert!(
            (got - exact).abs() < 0.01 * exact,
            "area {got} vs {exact}"
        );
        // Monotone decrease.
        for w in out.area_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn perturbed_helicoid_patch_relaxes_back() {
        let mut m = helicoid_patch(0.3, 3.0, 0.2, 2.6, 18, 18);
        let normals = m.vertex_normals();
        for v in 0..m.vertex_count() {
            if m.roles[v] == VertexRole::Free {
                let p = m.positions[v];
                m.positions[v] += 0.08 * (1.3 * p.z).sin() * (0.7 * p.x).cos() * normals[v];
            }
        }
        let cfg = SolveConfig {
            tolerance: 1e-4,
            containment_weight: 0.0,
            max_iterations: 60,
            ..SolveConfig::default()
        };
        let rough = minimize_area(&m, &cfg, None).unwrap();
        assert!(rough.residual < 1e-2, "descent residual {}", rough.residual);
        // Newton polishes the near-minimal surface to equilibrium.
        let polish = SolveConfig { tolerance: 1e-8, ..cfg };
        let out = newton_refine(&rough.mesh, &polish).unwrap();
        assert!(out.converged, "residual {}", out.residual);
        // Every vertex returns close to the exact ruled surface.
        let mut worst: f64 = 0.0;
        for p in &out.mesh.positions {
            // Nearest helicoid point along the ruling through (angle z).
            let u = p.x.hypot(p.y);
            let q = helicoid_point(u, p.z);
            let d = (p - q).norm().min((p - helicoid_point(-u, p.z)).norm());
            worst = worst.max(d);
        }
        assert!(worst < 3.0e-3, "max deviation {worst}");
    }

    #[test]
    fn equivariant_projection_is_idempotent_and_symmetric() {
        let params = SeedParams::new(4.0 * PI, PI, 24, 12);
        let m = initial_disk(&params.with_handle(HandleSeed::Bump { amplitude: 1.0 })).unwrap();
        let mut pos = m.positions.clone();
        // Break the symmetry, then project.
        for p in pos.iter_mut() {
            p.x += 1e-3 * (p.y + 0.37).sin();
        }
        project_equivariant(&mut pos, &m);
        let partner = m.rot_y_partner.as_ref().unwrap();
        for v in 0..pos.len() {
            if m.roles[v] != VertexRole::Free {
                continue;
            }
            let w = partner[v];
            if m.roles[w] != VertexRole::Free {
                continue;
            }
            let img = Point3::new(-pos[w].x, pos[w].y, -pos[w].z);
            assert!((pos[v] - img).norm() < 1e-14);
        }
        let before = pos.clone();
        project_equivariant(&mut pos, &m);
        for (a, b) in before.iter().zip(&pos) {
            assert!((a - b).norm() < 1e-15, "projection must be idempotent");
        }
    }

    #[test]
    fn newton_holds_an_unstable_catenoid_band() {
        // The band |z| <= 1.3 of the unit catenoid is an unstable
        // equilibrium; gradient descent would abandon it, Newton holds it.
        let c = 1.3;
        let m = catenoid_band(1.0, -c, c, 48, 16);
        let cfg = SolveConfig { tolerance: 1e-8, max_iterations: 40, ..SolveConfig::default() };
        let out = newton_refine(&m, &cfg).unwrap();
        assert!(out.converged, "residual {}", out.residual);
        // The refined surface stays a catenoid: radius matches the profile.
        let mut worst: f64 = 0.0;
        for p in &out.mesh.positions {
            let rho = p.x.hypot(p.y);
            worst = worst.max((rho - (p.z).cosh()).abs());
        }
        assert!(worst < 0.02, "profile deviation {worst}");
    }

    #[test]
    fn barrier_penalty_pushes_the_surface_outside() {
        // Relax a disk spanning a horizontal circle with a catenoid
        // barrier poking through its middle: the solution must bulge to
        // clear the hourglass instead of staying flat.
        let m = fan_disk(2.0, 40, 6);
        let b = CatenoidBarrier {
            center: Point3::zeros(),
            neck: 0.5,
            clip_half_height: 0.3,
        };
        let cfg = SolveConfig {
            containment_weight: 0.0,
            barrier_weight: 500.0,
            barrier_margin: 0.05,
            max_iterations: 150,
            tolerance: 1e-4,
            ..SolveConfig::default()
        };
        let out = minimize_area(&m, &cfg, Some(&b)).unwrap();
        let mut worst: f64 = 0.0;
        for p in &out.mesh.positions {
            worst = worst.max(b.keep_outside_violation(*p, 0.0));
        }
        assert!(worst < 0.05, "deepest barrier penetration {worst}");
        assert!(out.mesh.total_area() > PI * 4.0 + 1e-3, "surface must deform off the flat disk");
    }
}

