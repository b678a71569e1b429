//! Python bindings for the helilab minimal-surface laboratory.
//!
//! The module mirrors the pipeline's main types and operations: boundary
//! contour generation, seed surfaces, the constrained Plateau solver,
//! stability classification, symmetric assembly and tiling, the census
//! checks, and the full configuration-driven experiment runner.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use helilab::assembly::{assemble_m, shortest_closed_geodesic, tile_screw};
use helilab::config::{ConfigMap, ExperimentConfig};
use helilab::geometry::boundary_curve;
use helilab::jacobi::classify_stability;
use helilab::mesh::{export_obj, export_ply, import_obj, import_ply, TriMesh};
use helilab::pipeline;
use helilab::solver::{initial_disk, minimize_area, HandleSeed, SeedParams, SolveConfig};
use helilab::verify::slab_census;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A triangulated surface with vertex roles and boundary structure.
#[pyclass(name = "Mesh")]
#[derive(Clone)]
struct PyMesh {
    inner: TriMesh,
}

#[pymethods]
impl PyMesh {
    /// Load a mesh from a `.ply` (binary) or `.obj` (text) file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<PyMesh> {
        let loaded = match path.extension().and_then(|e| e.to_str()) {
            Some("obj") => import_obj(&path),
            _ => import_ply(&path),
        };
        loaded
            .map(|inner| PyMesh { inner })
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }

    /// Write the mesh; the extension picks the format (`.ply` or `.obj`).
    fn save(&self, path: PathBuf) -> PyResult<()> {
        let written = match path.extension().and_then(|e| e.to_str()) {
            Some("obj") => export_obj(&self.inner, &path),
            _ => export_ply(&self.inner, &path),
        };
        written.map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn face_count(&self) -> usize {
        self.inner.face_count()
    }

    fn euler_characteristic(&self) -> PyResult<i64> {
        self.inner.euler_characteristic().map_err(value_err)
    }

    /// `(genus, boundary_loops)` of the surface.
    fn genus_with_boundary(&self) -> PyResult<(i64, usize)> {
        self.inner.genus_with_boundary().map_err(value_err)
    }

    fn positions(&self) -> Vec<(f64, f64, f64)> {
        self.inner.positions.iter().map(|p| (p.x, p.y, p.z)).collect()
    }

    fn faces(&self) -> Vec<(usize, usize, usize)> {
        self.inner.faces.iter().map(|f| (f[0], f[1], f[2])).collect()
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    /// Uniform 1-to-4 refinement.
    fn refine(&self) -> PyResult<PyMesh> {
        self.inner.refine().map(|inner| PyMesh { inner }).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(vertices={}, faces={})",
            self.inner.vertex_count(),
            self.inner.face_count()
        )
    }
}

/// Helicoidal boundary contour in the GAMMA text format.
#[pyfunction]
#[pyo3(signature = (radius, height, samples=96, smoothing=0.0))]
fn boundary_gamma(radius: f64, height: f64, samples: usize, smoothing: f64) -> PyResult<String> {
    let curve = boundary_curve(radius, height, samples, smoothing).map_err(value_err)?;
    Ok(curve.to_gamma_text())
}

/// Two-quadrant seed surface spanning the contour, optionally with a
/// handle-surgery bump of the given amplitude at the origin.
#[pyfunction]
#[pyo3(signature = (radius, height, nu=48, nv=24, handle=0.0))]
fn seed_disk(radius: f64, height: f64, nu: usize, nv: usize, handle: f64) -> PyResult<PyMesh> {
    let mut params = SeedParams::new(radius, height, nu, nv);
    if handle > 0.0 {
        params = params.with_handle(HandleSeed::Bump { amplitude: handle });
    }
    initial_disk(&params).map(|inner| PyMesh { inner }).map_err(runtime_err)
}

/// Constrained area minimisation with the surface confined to the closed
/// upper region. Returns `(mesh, converged, iterations, residual)`.
#[pyfunction]
#[pyo3(signature = (seed, max_iterations=300, tolerance=1e-2))]
fn solve_plateau(
    seed: &PyMesh,
    max_iterations: usize,
    tolerance: f64,
) -> PyResult<(PyMesh, bool, usize, f64)> {
    let cfg = SolveConfig { max_iterations, tolerance, ..SolveConfig::default() };
    let result = minimize_area(&seed.inner, &cfg, None).map_err(runtime_err)?;
    Ok((
        PyMesh { inner: result.mesh },
        result.converged,
        result.iterations,
        result.residual,
    ))
}

/// Second-variation classification: `strictly_stable`, `near_degenerate`,
/// or `unstable`.
#[pyfunction]
#[pyo3(signature = (mesh, tol=1e-8))]
fn stability(mesh: &PyMesh, tol: f64) -> PyResult<String> {
    classify_stability(&mesh.inner, tol).map(|s| s.to_string()).map_err(runtime_err)
}

/// Weld the solved disk and its half-turn image into the genus-one piece.
#[pyfunction]
fn assemble(disk: &PyMesh) -> PyResult<PyMesh> {
    assemble_m(&disk.inner).map(|inner| PyMesh { inner }).map_err(runtime_err)
}

/// Screw-periodic tiling of the assembled piece (`copies` must be odd).
#[pyfunction]
fn tile(assembled: &PyMesh, half_turn: f64, copies: usize) -> PyResult<PyMesh> {
    tile_screw(&assembled.inner, half_turn, copies)
        .map(|inner| PyMesh { inner })
        .map_err(runtime_err)
}

/// Length of the shortest closed geodesic through the handle, or `None`
/// when the handle is degenerate at the mesh scale.
#[pyfunction]
fn handle_geodesic_length(disk: &PyMesh) -> PyResult<Option<f64>> {
    let report = shortest_closed_geodesic(&disk.inner).map_err(runtime_err)?;
    Ok(if report.degenerate { None } else { Some(report.length) })
}

/// Maximum vertical-tangency count over sampled horizontal directions for
/// the height-pi slab starting at `z_lo`.
#[pyfunction]
#[pyo3(signature = (mesh, z_lo, directions=180))]
fn slab_census_max(mesh: &PyMesh, z_lo: f64, directions: usize) -> usize {
    slab_census(&mesh.inner, z_lo, directions).max_total
}

/// Run the staged experiment pipeline from configuration text.
///
/// Returns `(exit_code, summary_text)`; the summary is empty when the
/// verify stage was not requested.
#[pyfunction]
fn run_experiment(config_text: &str, out_dir: PathBuf) -> PyResult<(i32, String)> {
    let map = ConfigMap::parse(config_text).map_err(value_err)?;
    let cfg = ExperimentConfig::from_map(&map).map_err(value_err)?;
    match pipeline::run(&cfg, &out_dir) {
        Ok(outcome) => {
            let text = outcome.summary.as_ref().map(|s| s.to_text()).unwrap_or_default();
            Ok((outcome.exit_code(), text))
        }
        Err(err) => {
            let code = err.exit_code();
            if code == 3 {
                Err(value_err(err))
            } else {
                Ok((code, format!("error: {err}\n")))
            }
        }
    }
}

#[pymodule]
fn helilab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_function(wrap_pyfunction!(boundary_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(seed_disk, m)?)?;
    m.add_function(wrap_pyfunction!(solve_plateau, m)?)?;
    m.add_function(wrap_pyfunction!(stability, m)?)?;
    m.add_function(wrap_pyfunction!(assemble, m)?)?;
    m.add_function(wrap_pyfunction!(tile, m)?)?;
    m.add_function(wrap_pyfunction!(handle_geodesic_length, m)?)?;
    m.add_function(wrap_pyfunction!(slab_census_max, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
