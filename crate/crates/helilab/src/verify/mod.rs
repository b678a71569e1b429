//! Property checks on constructed surfaces: tangent-plane censuses,
//! slice and level-set structure, asymptotic pitch, obstacle crossing,
//! and curvature profiles, plus the plain-text PASS/FAIL summary they
//! feed.

pub mod asymptotics;
pub mod census;
pub mod report;
pub mod slices;

pub use asymptotics::{
    annular_intersection_test, curvature_report, pitch_estimate, CurvatureReport,
    HorizontalityBin, PitchReport,
};
pub use census::{
    slab_census, vertical_tangent_census, CensusReport, DirectionCensus, SlabCensusReport,
    TangencyCluster,
};
pub use report::{CheckLine, Summary};
pub use slices::{
    axis_slice_analysis, level_set, EndpointKind, LevelComponent, LevelSetReport, SliceCurve,
    SliceReport,
};

use thiserror::Error;

use crate::mesh::MeshError;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("slice plane at angle {theta} passes through mesh vertices; perturb the angle")]
    NonTransverse { theta: f64 },
    #[error("level plane z = {level} lies on a coplanar face; perturb the level")]
    LevelOnVertex { level: f64 },
    #[error("sheet ambiguity: {0}")]
    SheetAmbiguity(String),
    #[error("mesh error: {0}")]
    Mesh(#[from] MeshError),
}
