//! Discrete stability (second-variation) operator of a minimal surface:
//! assembly, first eigenpair with Dirichlet conditions, stability
//! classification, eigenfunction normal pushes, and a mountain-pass driver
//! locating an unstable equilibrium between two spanning surfaces.

use thiserror::Error;

use crate::linalg::{smallest_generalized_eigenpair, Csr};
use crate::mesh::{
    cotan_laplacian_triplets, curvature_field, MeshError, StencilStatus, TriMesh, VertexRole,
};
use crate::solver::{newton_refine, SolveConfig, SolveResult, SolverError};

#[derive(Debug, Error)]
pub enum JacobiError {
    #[error("mesh error: {0}")]
    Mesh(#[from] MeshError),
    #[error("eigenvalue iteration did not converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },
    #[error("normal push step too large: relative deviation {deviation:.3} exceeds 30%")]
    StepTooLarge { deviation: f64 },
    #[error("mountain pass path collapsed: {0}")]
    PathCollapse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Assembled second-variation operator `K = L - |A|^2 M` over the free
/// vertices (Dirichlet rows eliminated), with its lumped mass.
pub struct JacobiOperator {
    /// Stiffness minus potential, reduced to free vertices.
    pub stiffness: Csr,
    /// Lumped vertex areas of the free vertices.
    pub mass: Vec<f64>,
    /// Free vertex indices, in reduced order.
    pub free: Vec<usize>,
    /// Squared second-fundamental-form norm per free vertex (the potential
    /// before mass weighting).
    pub potential: Vec<f64>,
    /// Total vertex count of the source mesh.
    pub full_size: usize,
    /// Vertices whose curvature stencil degenerated and whose potential was
    /// copied from the nearest valid neighbor.
    pub patched_vertices: Vec<usize>,
}

/// First Dirichlet eigenpair of the stability operator.
#[derive(Debug, Clone)]
pub struct JacobiSpectrum {
    pub lambda1: f64,
    /// Eigenfunction over all mesh vertices: zero on the boundary,
    /// positive in the interior, normalized to maximum 1.
    pub u1: Vec<f64>,
    /// Relative Rayleigh-quotient residual of the returned pair.
    pub residual: f64,
}

/// Outcome of [`classify_stability`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    StrictlyStable,
    NearDegenerate,
    Unstable,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stability::StrictlyStable => "strictly_stable",
            Stability::NearDegenerate => "near_degenerate",
            Stability::Unstable => "unstable",
        };
        f.write_str(s)
    }
}

/// Assemble the stability operator of `mesh`: cotangent stiffness minus the
/// mass-weighted potential `|A|^2 = k1^2 + k2^2`, restricted to free
/// vertices (Dirichlet conditions on every pinned vertex).
pub fn assemble_jacobi(mesh: &TriMesh) -> Result<JacobiOperator, JacobiError> {
    mesh.half_edges()?;
    let n = mesh.vertex_count();
    let areas = mesh.vertex_areas();
    let field = curvature_field(mesh);
    let neighbors = mesh.vertex_neighbors();

    let mut map = vec![None; n];
    let mut free = Vec::new();
    for v in 0..n {
        if mesh.roles[v] == VertexRole::Free {
            map[v] = Some(free.len());
            free.push(v);
        }
    }
    if free.is_empty() {
        return Err(JacobiError::Precondition("mesh has no free vertices".into()));
    }

    // Potential per free vertex; degenerate stencils borrow the nearest
    // valid neighbor's value.
    let mut potential = Vec::with_capacity(free.len());
    let mut patched = Vec::new();
    for &v in &free {
        let value = if field.status[v] == StencilStatus::Degenerate {
            patched.push(v);
            neighbors[v]
                .iter()
                .copied()
                .find(|&w| field.status[w] != StencilStatus::Degenerate)
                .map(|w| field.shape_norm[w] * field.shape_norm[w])
                .unwrap_or(0.0)
        } else {
            field.shape_norm[v] * field.shape_norm[v]
        };
        potential.push(value);
    }

    let mut triplets = Vec::new();
    for (r, c, w) in cotan_laplacian_triplets(mesh, 20.0) {
        if let (Some(rf), Some(cf)) = (map[r], map[c]) {
            triplets.push((rf, cf, w));
        }
    }
    let mass: Vec<f64> = free.iter().map(|&v| areas[v]).collect();
    for (rf, (&q, &m)) in potential.iter().zip(&mass).enumerate() {
        triplets.push((rf, rf, -q * m));
    }

    Ok(JacobiOperator {
        stiffness: Csr::from_triplets(free.len(), &triplets),
        mass,
        free,
        potential,
        full_size: n,
        patched_vertices: patched,
    })
}

/// Smallest Dirichlet eigenpair of the assembled operator, to 1e-8
/// relative tolerance, sign-fixed positive and max-normalized.
pub fn first_eigenpair(op: &JacobiOperator) -> Result<JacobiSpectrum, JacobiError> {
    const TOL: f64 = 1e-8;
    let (lambda, mut u) =
        smallest_generalized_eigenpair(&op.stiffness, &op.mass, TOL, 600);

    // Rayleigh-quotient consistency check of the returned pair.
    let nf = u.len();
    let mut ku = vec![0.0; nf];
    op.stiffness.matvec(&u, &mut ku);
    let num: f64 = u.iter().zip(&ku).map(|(&a, &b)| a * b).sum();
    let den: f64 = u.iter().zip(&op.mass).map(|(&a, &m)| a * a * m).sum();
    let rq = num / den;
    let scale = op.stiffness.inf_norm().max(1.0);
    let residual = (rq - lambda).abs() / lambda.abs().max(TOL * scale);
    if residual > 1e-6 {
        return Err(JacobiError::NoConvergence { residual });
    }

    // Fix the sign so the interior is positive, then normalize to max 1.
    let sum: f64 = u.iter().sum();
    if sum < 0.0 {
        for x in u.iter_mut() {
            *x = -*x;
        }
    }
    let max = u.iter().cloned().fold(f64::MIN, f64::max).max(1e-300);
    let mut full = vec![0.0; op.full_size];
    for (rf, &v) in op.free.iter().enumerate() {
        full[v] = u[rf] / max;
    }
    Ok(JacobiSpectrum { lambda1: rq, u1: full, residual })
}

/// Classify an equilibrium by the sign of its first eigenvalue, with a
/// near-degenerate band of half-width `tol` times the mean potential
/// magnitude (falling back to the mean stiffness diagonal on flat meshes).
pub fn classify_stability(mesh: &TriMesh, tol: f64) -> Result<Stability, JacobiError> {
    let op = assemble_jacobi(mesh)?;
    let spectrum = first_eigenpair(&op)?;
    let mean_potential =
        op.potential.iter().sum::<f64>() / op.potential.len() as f64;
    let scale = if mean_potential > 1e-12 {
        mean_potential
    } else {
        let d = op.stiffness.diagonal();
        let m: f64 = d.iter().sum::<f64>() / d.len() as f64;
        let a: f64 = op.mass.iter().sum::<f64>() / op.mass.len() as f64;
        m / a.max(1e-300)
    };
    let band = tol * scale;
    Ok(if spectrum.lambda1 > band {
        Stability::StrictlyStable
    } else if spectrum.lambda1 < -band {
        Stability::Unstable
    } else {
        Stability::NearDegenerate
    })
}

/// Verification record of a normal push.
#[derive(Debug, Clone)]
pub struct NormalPushReport {
    /// Largest relative deviation between the measured normal mean
    /// curvature and the first-order prediction `-t lambda1 u1`, over
    /// vertices where the eigenfunction is appreciable.
    pub max_relative_deviation: f64,
    /// Sign of the measured normal mean curvature at the eigenfunction
    /// maximum (`-1` when it points back against the push, as it must for
    /// a stable equilibrium pushed outward).
    pub curvature_sign: f64,
}

/// Push a mesh along its first eigenfunction: `x -> x + t u(x) nu(x)`.
/// Verifies to first order that the resulting normal mean curvature equals
/// `-t lambda1 u1`, and errors with [`JacobiError::StepTooLarge`] when the
/// quadratic term dominates.
pub fn normal_push(
    mesh: &TriMesh,
    t: f64,
    spectrum: &JacobiSpectrum,
) -> Result<(TriMesh, NormalPushReport), JacobiError> {
    let n = mesh.vertex_count();
    if spectrum.u1.len() != n {
        return Err(JacobiError::Precondition("eigenfunction length mismatch".into()));
    }
    let normals = mesh.vertex_normals();
    let mut pushed = mesh.clone();
    for v in 0..n {
        pushed.positions[v] += t * spectrum.u1[v] * normals[v];
    }
    if t == 0.0 {
        return Ok((pushed, NormalPushReport { max_relative_deviation: 0.0, curvature_sign: 0.0 }));
    }

    // Measured normal mean curvature of the pushed mesh, compared against
    // the first-order prediction.
    let areas = pushed.vertex_areas();
    let pnormals = pushed.vertex_normals();
    let lap = Csr::from_triplets(n, &cotan_laplacian_triplets(&pushed, 20.0));
    let mut lx = vec![0.0; n];
    let mut xs = vec![0.0; n];
    let mut ys = vec![0.0; n];
    let mut measured = vec![0.0; n];
    for axis in 0..3 {
        for v in 0..n {
            xs[v] = pushed.positions[v][axis];
        }
        lap.matvec(&xs, &mut ys);
        for v in 0..n {
            lx[v] += ys[v] * pnormals[v][axis];
        }
    }
    // Normal component of the surface Laplacian of position (twice the
    // mean curvature), the quantity whose linearisation is the stability
    // operator.
    for v in 0..n {
        measured[v] = -lx[v] / areas[v].max(1e-300);
    }

    let mut worst: f64 = 0.0;
    let mut sign_at_max = 0.0;
    let mut best_u = 0.0;
    for v in 0..n {
        if mesh.roles[v] != VertexRole::Free || spectrum.u1[v] < 0.2 {
            continue;
        }
        let predicted = -t * spectrum.lambda1 * spectrum.u1[v];
        let dev = (measured[v] - predicted).abs() / predicted.abs().max(1e-300);
        worst = worst.max(dev);
        if spectrum.u1[v] > best_u {
            best_u = spectrum.u1[v];
            sign_at_max = measured[v].signum();
        }
    }
    if worst > 0.3 {
        return Err(JacobiError::StepTooLarge { deviation: worst });
    }
    Ok((pushed, NormalPushReport { max_relative_deviation: worst, curvature_sign: sign_at_max }))
}

/// Settings for [`mountain_pass`].
#[derive(Debug, Clone, Copy)]
pub struct MountainPassConfig {
    /// Number of interior slices along the path.
    pub slices: usize,
    /// Require both endpoints to classify strictly stable.  Disable for
    /// synthetic paths whose endpoints are barriers rather than equilibria.
    pub check_endpoints: bool,
    /// Tolerance handed to the endpoint classification.
    pub stability_tol: f64,
    /// Newton settings for refining the maximal-area slice.
    pub solve: SolveConfig,
}

impl Default for MountainPassConfig {
    fn default() -> MountainPassConfig {
        MountainPassConfig {
            slices: 16,
            check_endpoints: true,
            stability_tol: 1e-3,
            solve: SolveConfig::default(),
        }
    }
}

/// Locate an unstable equilibrium between two spanning surfaces sharing a
/// boundary: sweep a linear path of slices between them, take the
/// maximal-area slice, and refine it by Newton iteration.  The returned
/// result carries the stability classification of the refined surface.
pub fn mountain_pass(
    d_low: &TriMesh,
    d_high: &TriMesh,
    cfg: &MountainPassConfig,
) -> Result<SolveResult, JacobiError> {
    if d_low.faces != d_high.faces || d_low.roles != d_high.roles {
        return Err(JacobiError::Precondition(
            "path endpoints must share connectivity and boundary roles".into(),
        ));
    }
    let n = d_low.vertex_count();
    let mut separation: f64 = 0.0;
    for v in 0..n {
        if d_low.roles[v] == VertexRole::Free {
            separation = separation.max((d_low.positions[v] - d_high.positions[v]).norm());
        } else if (d_low.positions[v] - d_high.positions[v]).norm() > 1e-9 {
            return Err(JacobiError::Precondition(
                "path endpoints must share their boundary".into(),
            ));
        }
    }
    let scale = d_low.mean_edge_length();
    if separation < 1e-6 * scale.max(1e-300) {
        return Err(JacobiError::Precondition(
            "path endpoints coincide; their interiors must be disjoint".into(),
        ));
    }
    if cfg.check_endpoints {
        for (name, m) in [("low", d_low), ("high", d_high)] {
            let class = classify_stability(m, cfg.stability_tol)?;
            if class != Stability::StrictlyStable {
                return Err(JacobiError::Precondition(format!(
                    "{name} endpoint classifies {class}, not strictly_stable"
                )));
            }
        }
    }
    if cfg.slices < 3 {
        return Err(JacobiError::PathCollapse("need at least 3 slices".into()));
    }

    // Linear sweep; the area profile along it must rise over a pass.
    let mut best: Option<(f64, TriMesh)> = None;
    for k in 0..=cfg.slices {
        let s = k as f64 / cfg.slices as f64;
        let mut slice = d_low.clone();
        for v in 0..n {
            slice.positions[v] =
                (1.0 - s) * d_low.positions[v] + s * d_high.positions[v];
        }
        let area = slice.total_area();
        if best.as_ref().map_or(true, |(a, _)| area > *a) {
            best = Some((area, slice));
        }
    }
    let (best_area, ridge) = best.unwrap();
    if best_area <= d_low.total_area().max(d_high.total_area()) + 1e-12 {
        return Err(JacobiError::PathCollapse(
            "no interior area maximum along the path".into(),
        ));
    }

    let mut result = newton_refine(&ridge, &cfg.solve)?;
    let class = classify_stability(&result.mesh, cfg.stability_tol)?;
    result.stability = Some(class);
    Ok(result)
}
