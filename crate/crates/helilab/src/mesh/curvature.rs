//! Per-vertex curvature estimation: cotangent mean-curvature vectors,
//! angle-defect Gauss curvature, and principal curvatures from local
//! quadric fits.

use nalgebra::{DMatrix, DVector, Matrix2};

use super::{cotan_laplacian_triplets, TriMesh};
use crate::geometry::Point3;
use crate::linalg::Csr;

/// Quality of the quadric-fit stencil at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilStatus {
    /// One-ring fit with enough well-conditioned samples.
    Ok,
    /// The one-ring was too small; the fit used the two-ring.
    WideStencil,
    /// Not enough samples even in the two-ring, or the normal was
    /// degenerate; only Laplacian quantities are reliable here.
    Degenerate,
    /// Boundary vertex: the angle defect is meaningless and fits are
    /// one-sided.
    Boundary,
}

/// Per-vertex curvature data.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    /// Area-weighted unit normals.
    pub normal: Vec<Point3>,
    /// Pointwise mean-curvature vector `H n` (cotangent formula divided by
    /// twice the lumped vertex area).
    pub mean_vector: Vec<Point3>,
    /// Signed mean curvature relative to the vertex normal.
    pub mean: Vec<f64>,
    /// Pointwise Gauss curvature `k1 k2` from the quadric fit (falls back
    /// to the angle defect per area where the fit degenerates).
    pub gauss: Vec<f64>,
    /// Raw angle defect `2 pi - sum of incident angles`.  Summed over the
    /// interior this is an exact discrete Gauss-Bonnet quantity, but it is
    /// not a reliable pointwise density on irregular-valence meshes.
    pub angle_defect: Vec<f64>,
    /// Principal curvatures `(k1, k2)` with `k1 >= k2`, from quadric fits.
    pub principal: Vec<(f64, f64)>,
    /// Norm of the second fundamental form `sqrt(k1^2 + k2^2)`.
    pub shape_norm: Vec<f64>,
    pub status: Vec<StencilStatus>,
}

/// Estimate curvature everywhere on the mesh.
pub fn curvature_field(mesh: &TriMesh) -> CurvatureField {
    let n = mesh.vertex_count();
    let normal = mesh.vertex_normals();
    let areas = mesh.vertex_areas();
    let he = mesh.half_edges().ok();
    let boundary: Vec<bool> = match &he {
        Some(h) => h.boundary_vertex.clone(),
        None => vec![false; n],
    };

    // Cotangent mean-curvature vectors.
    let lap = Csr::from_triplets(n, &cotan_laplacian_triplets(mesh, 0.0));
    let mut coords = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut lcoords = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (i, p) in mesh.positions.iter().enumerate() {
        coords[0][i] = p.x;
        coords[1][i] = p.y;
        coords[2][i] = p.z;
    }
    for k in 0..3 {
        lap.matvec(&coords[k], &mut lcoords[k]);
    }
    let mut mean_vector = vec![Point3::zeros(); n];
    for i in 0..n {
        let denom = (2.0 * areas[i]).max(1e-300);
        mean_vector[i] = Point3::new(lcoords[0][i], lcoords[1][i], lcoords[2][i]) / denom;
    }

    // Angle-defect Gauss curvature.
    let mut defect = vec![std::f64::consts::TAU; n];
    for tri in &mesh.faces {
        for k in 0..3 {
            let v = tri[k];
            let a = mesh.positions[tri[(k + 1) % 3]] - mesh.positions[v];
            let b = mesh.positions[tri[(k + 2) % 3]] - mesh.positions[v];
            let cos = (a.dot(&b) / (a.norm() * b.norm()).max(1e-300)).clamp(-1.0, 1.0);
            defect[v] -= cos.acos();
        }
    }
    // Quadric fits for the shape operator.  The quadric has 6 unknowns, so
    // a well-posed fit wants a comfortably larger stencil; one-rings of
    // valence below 8 are widened to the two-ring.
    let nbrs = mesh.vertex_neighbors();
    let mut principal = vec![(0.0, 0.0); n];
    let mut shape_norm = vec![0.0; n];
    let mut status = vec![StencilStatus::Ok; n];
    let mut gauss = vec![0.0; n];
    for v in 0..n {
        let mut stencil: Vec<usize> = nbrs[v].clone();
        let mut st = StencilStatus::Ok;
        if stencil.len() < 8 {
            let mut wide = stencil.clone();
            for &u in &stencil {
                for &w in &nbrs[u] {
                    if w != v && !wide.contains(&w) {
                        wide.push(w);
                    }
                }
            }
            stencil = wide;
            st = StencilStatus::WideStencil;
        }
        if boundary[v] {
            st = StencilStatus::Boundary;
        }
        match fit_shape_operator(mesh, &normal, v, &stencil) {
            Some((k1, k2)) => {
                principal[v] = (k1, k2);
                shape_norm[v] = (k1 * k1 + k2 * k2).sqrt();
                gauss[v] = k1 * k2;
                status[v] = st;
            }
            None => {
                status[v] = StencilStatus::Degenerate;
                gauss[v] = if boundary[v] { 0.0 } else { defect[v] / areas[v].max(1e-300) };
            }
        }
    }

    let mean = (0..n).map(|i| mean_vector[i].dot(&normal[i])).collect();
    CurvatureField {
        normal,
        mean_vector,
        mean,
        gauss,
        angle_defect: defect,
        principal,
        shape_norm,
        status,
    }
}

/// Least-squares quadric `h = c0 + c1 x + c2 y + (a x^2 + 2 b x y + c y^2)/2`
/// over the stencil in the tangent frame of `v`; principal curvatures are
/// the eigenvalues of the fitted Hessian.
fn fit_shape_operator(
    mesh: &TriMesh,
    normals: &[Point3],
    v: usize,
    stencil: &[usize],
) -> Option<(f64, f64)> {
    if stencil.len() < 5 {
        return None;
    }
    let nrm = normals[v];
    if nrm.norm() < 0.5 {
        return None;
    }
    // Tangent frame.
    let helper = if nrm.x.abs() < 0.9 { Point3::new(1.0, 0.0, 0.0) } else { Point3::new(0.0, 1.0, 0.0) };
    let e1 = nrm.cross(&helper).normalize();
    let e2 = nrm.cross(&e1);

    let m = stencil.len();
    let scale = stencil
        .iter()
        .map(|&u| (mesh.positions[u] - mesh.positions[v]).norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    let mut a = DMatrix::zeros(m, 6);
    let mut b = DVector::zeros(m);
    for (row, &u) in stencil.iter().enumerate() {
        let d = (mesh.positions[u] - mesh.positions[v]) / scale;
        let x = d.dot(&e1);
        let y = d.dot(&e2);
        let h = d.dot(&nrm);
        a[(row, 0)] = 1.0;
        a[(row, 1)] = x;
        a[(row, 2)] = y;
        a[(row, 3)] = 0.5 * x * x;
        a[(row, 4)] = x * y;
        a[(row, 5)] = 0.5 * y * y;
        b[row] = h;
    }
    let svd = a.svd(true, true);
    let coeffs = svd.solve(&b, 1e-10).ok()?;
    // Undo the normalisation: curvature scales as 1/length.
    let hess = Matrix2::new(coeffs[3], coeffs[4], coeffs[4], coeffs[5]) / scale;
    let eig = hess.symmetric_eigenvalues();
    let (k1, k2) = (eig[0].max(eig[1]), eig[0].min(eig[1]));
    if k1.is_finite() && k2.is_finite() {
        Some((k1, k2))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{helicoid_gauss_curvature, helicoid_shape_norm_sq};
    use crate::mesh::build;
    use approx::assert_relative_eq;

    #[test]
    fn flat_grid_has_no_curvature() {
        let m = build::unit_square_grid(10);
        let f = curvature_field(&m);
        let he = m.half_edges().unwrap();
        for v in 0..m.vertex_count() {
            if !he.boundary_vertex[v] {
                assert!(f.mean_vector[v].norm() < 1e-10);
                assert!(f.gauss[v].abs() < 1e-9);
                assert!(f.shape_norm[v] < 1e-8);
            }
        }
    }

    #[test]
    fn sphere_curvatures() {
        let r = 2.0;
        let m = build::icosphere(r, 4);
        let f = curvature_field(&m);
        let mut mean_vals = Vec::new();
        let mut gauss_vals = Vec::new();
        for v in 0..m.vertex_count() {
            mean_vals.push(f.mean_vector[v].norm());
            gauss_vals.push(f.gauss[v]);
            // Principal curvatures are equal and of magnitude 1/r.
            let (k1, k2) = f.principal[v];
            assert_relative_eq!(k1.abs(), 1.0 / r, max_relative = 0.08);
            assert_relative_eq!(k2.abs(), 1.0 / r, max_relative = 0.08);
        }
        let mean_avg: f64 = mean_vals.iter().sum::<f64>() / mean_vals.len() as f64;
        let gauss_avg: f64 = gauss_vals.iter().sum::<f64>() / gauss_vals.len() as f64;
        assert_relative_eq!(mean_avg, 1.0 / r, max_relative = 0.02);
        assert_relative_eq!(gauss_avg, 1.0 / (r * r), max_relative = 0.03);
    }

    #[test]
    fn angle_defect_satisfies_gauss_bonnet_exactly() {
        use std::f64::consts::TAU;
        // On closed polyhedra the total angle defect is 2 pi chi, as an
        // identity independent of mesh quality.
        let sphere = build::icosphere(1.3, 2);
        let defect_sum: f64 = curvature_field(&sphere).angle_defect.iter().sum();
        assert_relative_eq!(defect_sum, TAU * 2.0, epsilon = 1e-9);
        let torus = build::torus_grid(2.0, 0.6, 20, 10);
        let defect_sum: f64 = curvature_field(&torus).angle_defect.iter().sum();
        assert_relative_eq!(defect_sum, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn helicoid_patch_curvatures_match_analytic_profile() {
        // Away from the boundary, Gauss curvature is -1/(1+u^2)^2, the mean
        // curvature vanishes, and |A|^2 = 2/(1+u^2)^2.
        let m = build::helicoid_patch(0.5, 3.0, 0.0, 2.0, 40, 40);
        let f = curvature_field(&m);
        let he = m.half_edges().unwrap();
        let mut checked = 0;
        for v in 0..m.vertex_count() {
            if he.boundary_vertex[v] || f.status[v] != StencilStatus::Ok {
                continue;
            }
            let u = m.positions[v].x.hypot(m.positions[v].y);
            assert_relative_eq!(f.gauss[v], helicoid_gauss_curvature(u), max_relative = 0.08);
            assert!(f.mean_vector[v].norm() < 0.05, "mean {}", f.mean_vector[v].norm());
            let b2 = f.shape_norm[v] * f.shape_norm[v];
            assert_relative_eq!(b2, helicoid_shape_norm_sq(u), max_relative = 0.15);
            checked += 1;
        }
        assert!(checked > 500, "only {checked} interior vertices checked");
    }

    #[test]
    fn catenoid_band_is_minimal_pointwise() {
        let m = build::catenoid_band(1.0, -1.0, 1.0, 48, 24);
        let f = curvature_field(&m);
        let he = m.half_edges().unwrap();
        for v in 0..m.vertex_count() {
            if !he.boundary_vertex[v] {
                assert!(f.mean_vector[v].norm() < 0.03, "H = {}", f.mean_vector[v].norm());
            }
        }
    }
}
