//! Reference mesh constructors used by tests, oracles, and synthetic
//! experiments: disks, spheres, tori, cylinders, flat grids, and exact
//! helicoid / catenoid patches.

use std::f64::consts::TAU;

use super::{TriMesh, VertexRole};
use crate::geometry::{helicoid_point, PieceGeom, Point3};

/// Flat disk of the given radius in the `z = 0` plane, triangulated as
/// concentric rings around a centre vertex.  Boundary vertices carry
/// circle-arc parameters so refinement re-projects onto the rim.
pub fn fan_disk(radius: f64, n_ring: usize, n_radial: usize) -> TriMesh {
    assert!(n_ring >= 3 && n_radial >= 1);
    let mut positions = vec![Point3::zeros()];
    let mut roles = vec![VertexRole::Free];
    let mut attr = vec![None];
    let ring_index = |k: usize, i: usize| 1 + (k - 1) * n_ring + (i % n_ring);
    for k in 1..=n_radial {
        let r = radius * k as f64 / n_radial as f64;
        for i in 0..n_ring {
            let ang = TAU * i as f64 / n_ring as f64;
            positions.push(Point3::new(r * ang.cos(), r * ang.sin(), 0.0));
            if k == n_radial {
                roles.push(VertexRole::BoundaryFixed);
                attr.push(Some((0, i as f64 / n_ring as f64)));
            } else {
                roles.push(VertexRole::Free);
                attr.push(None);
            }
        }
    }
    let mut faces = Vec::new();
    for i in 0..n_ring {
        faces.push([0, ring_index(1, i), ring_index(1, i + 1)]);
    }
    for k in 1..n_radial {
        for i in 0..n_ring {
            let a = ring_index(k, i);
            let b = ring_index(k, i + 1);
            let c = ring_index(k + 1, i);
            let d = ring_index(k + 1, i + 1);
            faces.push([a, d, b]);
            faces.push([a, c, d]);
        }
    }
    TriMesh {
        positions,
        faces,
        roles,
        boundary_pieces: vec![PieceGeom::CircleArc {
            center: Point3::zeros(),
            radius,
            a0: 0.0,
            a1: TAU,
        }],
        boundary_attr: attr,
        origin_pair: None,
        rot_y_partner: None,
    }
}

/// Icosahedron subdivided `subdiv` times and projected to a sphere.
pub fn icosphere(radius: f64, subdiv: usize) -> TriMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let positions: Vec<Point3> = raw
        .iter()
        .map(|&(x, y, z)| Point3::new(x, y, z).normalize() * radius)
        .collect();
    let faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    let mut mesh = TriMesh {
        roles: vec![VertexRole::Free; positions.len()],
        boundary_attr: vec![None; positions.len()],
        positions,
        faces,
        ..Default::default()
    };
    for _ in 0..subdiv {
        mesh = mesh.refine().expect("icosphere refinement");
        for p in &mut mesh.positions {
            let n = p.norm();
            *p *= radius / n;
        }
    }
    mesh
}

/// Structured torus with major radius `big` and minor radius `small`.
pub fn torus_grid(big: f64, small: f64, nu: usize, nv: usize) -> TriMesh {
    let mut positions = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let v = TAU * j as f64 / nv as f64;
            let r = big + small * v.cos();
            positions.push(Point3::new(r * u.cos(), r * u.sin(), small * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::new();
    for i in 0..nu {
        for j in 0..nv {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i, j + 1);
            let d = idx(i + 1, j + 1);
            faces.push([a, b, d]);
            faces.push([a, d, c]);
        }
    }
    TriMesh {
        roles: vec![VertexRole::Free; positions.len()],
        boundary_attr: vec![None; positions.len()],
        positions,
        faces,
        ..Default::default()
    }
}

/// Open cylinder of the given radius between heights `z0 < z1`.
pub fn cylinder_grid(radius: f64, z0: f64, z1: f64, n_angular: usize, n_axial: usize) -> TriMesh {
    surface_of_revolution(|_z| radius, z0, z1, n_angular, n_axial)
}

/// Catenoid `rho = neck cosh(z/neck)` between heights `z0 < z1`.
pub fn catenoid_band(neck: f64, z0: f64, z1: f64, n_angular: usize, n_axial: usize) -> TriMesh {
    surface_of_revolution(|z| neck * (z / neck).cosh(), z0, z1, n_angular, n_axial)
}

/// Surface of revolution `rho = profile(z)` about the vertical axis with
/// both rim circles pinned as boundary.
pub fn surface_of_revolution(
    profile: impl Fn(f64) -> f64,
    z0: f64,
    z1: f64,
    n_angular: usize,
    n_axial: usize,
) -> TriMesh {
    assert!(n_angular >= 3 && n_axial >= 1 && z1 > z0);
    let mut positions = Vec::new();
    let mut roles = Vec::new();
    let mut attr = Vec::new();
    for j in 0..=n_axial {
        let z = z0 + (z1 - z0) * j as f64 / n_axial as f64;
        let rho = profile(z);
        for i in 0..n_angular {
            let ang = TAU * i as f64 / n_angular as f64;
            positions.push(Point3::new(rho * ang.cos(), rho * ang.sin(), z));
            let on_rim = j == 0 || j == n_axial;
            roles.push(if on_rim { VertexRole::BoundaryFixed } else { VertexRole::Free });
            attr.push(if on_rim {
                Some((if j == 0 { 0 } else { 1 }, i as f64 / n_angular as f64))
            } else {
                None
            });
        }
    }
    let idx = |i: usize, j: usize| j * n_angular + (i % n_angular);
    let mut faces = Vec::new();
    for j in 0..n_axial {
        for i in 0..n_angular {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i, j + 1);
            let d = idx(i + 1, j + 1);
            faces.push([a, b, d]);
            faces.push([a, d, c]);
        }
    }
    let pieces = vec![
        PieceGeom::CircleArc {
            center: Point3::new(0.0, 0.0, z0),
            radius: profile(z0),
            a0: 0.0,
            a1: TAU,
        },
        PieceGeom::CircleArc {
            center: Point3::new(0.0, 0.0, z1),
            radius: profile(z1),
            a0: 0.0,
            a1: TAU,
        },
    ];
    TriMesh {
        positions,
        faces,
        roles,
        boundary_pieces: pieces,
        boundary_attr: attr,
        origin_pair: None,
        rot_y_partner: None,
    }
}

/// Unit square `[0,1]^2` in the `z = 0` plane with an `n x n` cell grid.
pub fn unit_square_grid(n: usize) -> TriMesh {
    grid_patch(
        |u, v| Point3::new(u, v, 0.0),
        0.0,
        1.0,
        0.0,
        1.0,
        n,
        n,
    )
}

/// Exact helicoid patch `F(u, v)` over `[u0, u1] x [v0, v1]`.
pub fn helicoid_patch(u0: f64, u1: f64, v0: f64, v1: f64, nu: usize, nv: usize) -> TriMesh {
    grid_patch(helicoid_point, u0, u1, v0, v1, nu, nv)
}

/// Structured graph patch over a parameter rectangle; the four sides are
/// marked boundary-fixed (without analytic piece data).
pub fn grid_patch(
    f: impl Fn(f64, f64) -> Point3,
    u0: f64,
    u1: f64,
    v0: f64,
    v1: f64,
    nu: usize,
    nv: usize,
) -> TriMesh {
    assert!(nu >= 1 && nv >= 1);
    let mut positions = Vec::with_capacity((nu + 1) * (nv + 1));
    let mut roles = Vec::new();
    for j in 0..=nv {
        let v = v0 + (v1 - v0) * j as f64 / nv as f64;
        for i in 0..=nu {
            let u = u0 + (u1 - u0) * i as f64 / nu as f64;
            positions.push(f(u, v));
            let on_boundary = i == 0 || i == nu || j == 0 || j == nv;
            roles.push(if on_boundary { VertexRole::BoundaryFixed } else { VertexRole::Free });
        }
    }
    let idx = |i: usize, j: usize| j * (nu + 1) + i;
    let mut faces = Vec::new();
    for j in 0..nv {
        for i in 0..nu {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i, j + 1);
            let d = idx(i + 1, j + 1);
            // Alternate the diagonal for isotropy.
            if (i + j) % 2 == 0 {
                faces.push([a, b, d]);
                faces.push([a, d, c]);
            } else {
                faces.push([a, b, c]);
                faces.push([b, d, c]);
            }
        }
    }
    let n = positions.len();
    TriMesh {
        positions,
        faces,
        roles,
        boundary_pieces: Vec::new(),
        boundary_attr: vec![None; n],
        origin_pair: None,
        rot_y_partner: None,
    }
}

/// Flat unit-radius disk sampled on a square grid clipped to the circle;
/// better interior regularity than [`fan_disk`] for spectral tests.
pub fn grid_disk(radius: f64, n: usize) -> TriMesh {
    // Sample the closed disk by mapping the square conformally-ish: use
    // polar rings with count proportional to radius for near-uniform size.
    let rings = n.max(2);
    let mut positions = vec![Point3::zeros()];
    let mut roles = vec![VertexRole::Free];
    let mut attr = vec![None];
    let mut ring_start = vec![0usize; rings + 1];
    ring_start[0] = 0;
    for k in 1..=rings {
        let r = radius * k as f64 / rings as f64;
        let count = 6 * k;
        ring_start[k] = positions.len();
        for i in 0..count {
            let ang = TAU * i as f64 / count as f64;
            positions.push(Point3::new(r * ang.cos(), r * ang.sin(), 0.0));
            if k == rings {
                roles.push(VertexRole::BoundaryFixed);
                attr.push(Some((0, i as f64 / count as f64)));
            } else {
                roles.push(VertexRole::Free);
                attr.push(None);
            }
        }
    }
    // Triangulate between consecutive rings (counts 6k and 6(k+1)) by
    // greedy angular sweep.
    let mut faces = Vec::new();
    for i in 0..6 {
        faces.push([0, 1 + i, 1 + (i + 1) % 6]);
    }
    for k in 1..rings {
        let inner = ring_start[k];
        let outer = ring_start[k + 1];
        let n_in = 6 * k;
        let n_out = 6 * (k + 1);
        let mut i = 0usize; // inner cursor
        let mut j = 0usize; // outer cursor
        // March around both rings, always advancing the cursor that trails
        // in angle, emitting a triangle per step.
        while i < n_in || j < n_out {
            let ang_in = (i + 1) as f64 / n_in as f64;
            let ang_out = (j + 1) as f64 / n_out as f64;
            let vi = inner + i % n_in;
            let vj = outer + j % n_out;
            if j < n_out && (i >= n_in || ang_out <= ang_in) {
                let vj1 = outer + (j + 1) % n_out;
                faces.push([vi, vj, vj1]);
                j += 1;
            } else {
                let vi1 = inner + (i + 1) % n_in;
                faces.push([vi, vj, vi1]);
                i += 1;
            }
        }
    }
    TriMesh {
        positions,
        faces,
        roles,
        boundary_pieces: vec![PieceGeom::CircleArc {
            center: Point3::zeros(),
            radius,
            a0: 0.0,
            a1: TAU,
        }],
        boundary_attr: attr,
        origin_pair: None,
        rot_y_partner: None,
    }
}

/// Rectangular strip in the vertical plane `y = y0`, spanning
/// `x in [x0, x1]`, `z in [z0, z1]`.
pub fn vertical_strip(y0: f64, x0: f64, x1: f64, z0: f64, z1: f64, nx: usize, nz: usize) -> TriMesh {
    grid_patch(|x, z| Point3::new(x, y0, z), x0, x1, z0, z1, nx, nz)
}

/// Half-period exact helicoid `F(u, v)`, `u in [-radius, radius]`,
/// `v in [0, height]` — the classical control surface.
pub fn helicoid_double_patch(radius: f64, height: f64, nu: usize, nv: usize) -> TriMesh {
    grid_patch(helicoid_point, -radius, radius, 0.0, height, nu, nv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn grid_disk_is_a_disk() {
        let d = grid_disk(1.0, 10);
        assert_eq!(d.euler_characteristic().unwrap(), 1);
        assert_eq!(d.genus_with_boundary().unwrap(), (0, 1));
        assert_relative_eq!(d.total_area(), PI, max_relative = 0.01);
        // All faces consistently oriented upward.
        for f in 0..d.face_count() {
            assert!(d.face_normal(f).z > 0.0, "face {f} flipped");
        }
    }

    #[test]
    fn catenoid_band_is_minimal_scale() {
        // The discrete catenoid's area approaches the analytic value
        // pi (z + neck sinh(2z/neck)/2) evaluated between the rims.
        let c = catenoid_band(1.0, -1.0, 1.0, 64, 32);
        let exact = PI * (2.0 + (2.0_f64).sinh());
        assert_relative_eq!(c.total_area(), exact, max_relative = 5e-3);
    }

    #[test]
    fn revolution_rims_are_boundary() {
        let c = cylinder_grid(2.0, 0.0, 1.0, 16, 4);
        let he = c.half_edges().unwrap();
        for (v, role) in c.roles.iter().enumerate() {
            assert_eq!(he.boundary_vertex[v], *role == VertexRole::BoundaryFixed);
        }
    }
}
