//! Run configuration: a flat key-value text format with `[section]`
//! headers, environment-variable overrides, and numeric values that may be
//! written as multiples of pi (`6*pi`, `pi/2`, `0.3*pi`).
//!
//! # Grammar
//!
//! ```text
//! file     = { line }
//! line     = blank | comment | section | entry
//! comment  = "#" ...
//! section  = "[" name "]"            ; prefixes following keys as name.key
//! entry    = key "=" value           ; key is [a-z0-9_]+, value is free text
//! ```
//!
//! Keys are addressed as `section.key` (keys before any section header have
//! no prefix).  An environment variable `HELILAB_<SECTION>_<KEY>` (upper
//! case, `.` replaced by `_`) overrides the corresponding entry; section
//! names never contain underscores, so the first `_` after the prefix
//! splits section from key.
//!
//! Numeric values are parsed by [`parse_number`], which accepts plain
//! literals and products/quotients involving the token `pi`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value` or `[section]`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("config key `{key}`: cannot parse `{value}` as {wanted}")]
    BadValue { key: String, value: String, wanted: &'static str },
    #[error("config key `{key}`: {reason}")]
    BadParameter { key: String, reason: String },
    #[error("unknown pipeline stage `{0}` (expected one of gen-boundary, seed, solve, refine, assemble, tile, verify)")]
    UnknownStage(String),
    #[error("cannot read config file: {0}")]
    Io(String),
}

/// Parse a numeric literal that may use the `pi` token: `6*pi`, `pi/2`,
/// `-0.3*pi`, `2*pi/3`, or a plain number.  Factors are combined left to
/// right with `*` and `/`.
pub fn parse_number(text: &str) -> Option<f64> {
    let mut value = 1.0;
    let mut rest = text.trim();
    let mut negate = false;
    if let Some(r) = rest.strip_prefix('-') {
        negate = true;
        rest = r.trim_start();
    }
    let mut divide = false;
    let mut first = true;
    while !rest.is_empty() {
        if !first {
            divide = match rest.as_bytes()[0] {
                b'*' => false,
                b'/' => true,
                _ => return None,
            };
            rest = rest[1..].trim_start();
        }
        let end = rest
            .find(|c: char| c == '*' || c == '/')
            .unwrap_or(rest.len());
        let token = rest[..end].trim();
        let factor = if token.eq_ignore_ascii_case("pi") {
            PI
        } else {
            token.parse::<f64>().ok()?
        };
        if divide {
            value /= factor;
        } else {
            value *= factor;
        }
        rest = rest[end..].trim_start();
        first = false;
    }
    if first {
        return None; // empty input
    }
    Some(if negate { -value } else { value })
}

/// One pipeline stage, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    GenBoundary,
    Seed,
    Solve,
    Refine,
    Assemble,
    Tile,
    Verify,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::GenBoundary,
        Stage::Seed,
        Stage::Solve,
        Stage::Refine,
        Stage::Assemble,
        Stage::Tile,
        Stage::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::GenBoundary => "gen-boundary",
            Stage::Seed => "seed",
            Stage::Solve => "solve",
            Stage::Refine => "refine",
            Stage::Assemble => "assemble",
            Stage::Tile => "tile",
            Stage::Verify => "verify",
        }
    }

    pub fn parse(name: &str) -> Result<Stage, ConfigError> {
        Stage::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| ConfigError::UnknownStage(name.to_string()))
    }
}

/// Raw parsed key-value store with typed accessors.
#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<ConfigMap, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed { line: idx + 1, text: line.to_string() });
            };
            let key = key.trim();
            if key.is_empty()
                || !key.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
            {
                return Err(ConfigError::Malformed { line: idx + 1, text: line.to_string() });
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            entries.insert(full, value.trim().to_string());
        }
        Ok(ConfigMap { entries })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<ConfigMap, ConfigError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.as_ref().display())))?;
        ConfigMap::parse(&text)
    }

    /// Apply `HELILAB_`-prefixed overrides from an iterator of environment
    /// pairs (use [`std::env::vars`] in production, a literal list in tests).
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) {
        for (name, value) in vars {
            let Some(rest) = name.strip_prefix("HELILAB_") else { continue };
            if rest.is_empty() {
                continue;
            }
            let key = match rest.split_once('_') {
                Some((section, key)) => {
                    format!("{}.{}", section.to_ascii_lowercase(), key.to_ascii_lowercase())
                }
                None => rest.to_ascii_lowercase(),
            };
            self.entries.insert(key, value);
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_number(v).ok_or_else(|| ConfigError::BadValue {
                key: key.to_string(),
                value: v.to_string(),
                wanted: "a number (pi token allowed)",
            }),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: v.to_string(),
                wanted: "a non-negative integer",
            }),
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: v.to_string(),
                wanted: "a non-negative integer",
            }),
        }
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(ConfigError::BadValue {
                key: key.to_string(),
                value: v.to_string(),
                wanted: "a boolean",
            }),
        }
    }

    /// Comma-separated list of numbers (pi token allowed per element).
    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|item| {
                    parse_number(item).ok_or_else(|| ConfigError::BadValue {
                        key: key.to_string(),
                        value: item.trim().to_string(),
                        wanted: "a number (pi token allowed)",
                    })
                })
                .collect(),
        }
    }
}

/// Solver backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Implicit gradient descent on area (robust, finds minima).
    Gradient,
    /// Newton refinement of an equilibrium (reaches saddle points too).
    Newton,
}

/// Fully resolved parameters for one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Rim radius of the boundary contour.
    pub radius: f64,
    /// Quadrant height (turn angle along the arcs).
    pub height: f64,
    /// Samples per helical arc in the boundary polyline.
    pub boundary_samples: usize,
    /// Corner rounding radius (0 keeps exact corners).
    pub smoothing: f64,
    /// Grid resolution of each seed quadrant.
    pub nu: usize,
    pub nv: usize,
    /// Amplitude of the handle-seeding neck bump; 0 means the
    /// infinitesimal joining (obstacle-style seed).
    pub handle_amplitude: f64,
    /// Neck radius of the catenoid barrier family; 0 disables barriers.
    pub barrier_neck: f64,
    /// Confine the solve outside the barrier (obstacle run) instead of
    /// merely testing against it afterwards.
    pub obstacle: bool,
    pub backend: Backend,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub step: f64,
    pub containment_weight: f64,
    /// Refinement rounds applied by the `refine` stage.
    pub refine_rounds: usize,
    /// Iteration budget for the post-refinement re-solve.
    pub refine_iterations: usize,
    /// Copies in the screw-motion tiling (odd).
    pub tile_copies: usize,
    /// Direction count for tangency censuses.
    pub census_directions: usize,
    /// Level-set heights to extract, as fractions of the height.
    pub level_fractions: Vec<f64>,
    /// Radii for the sweep harness.
    pub sweep_radii: Vec<f64>,
    pub stages: Vec<Stage>,
    pub threads: usize,
    pub seed: u64,
    pub trace: bool,
}

impl ExperimentConfig {
    /// Resolve an experiment from a parsed map, filling defaults and
    /// validating ranges.
    pub fn from_map(map: &ConfigMap) -> Result<ExperimentConfig, ConfigError> {
        let radius = map.f64("run.radius", 6.0 * PI)?;
        let height = map.f64("run.height", PI)?;
        let boundary_samples = map.usize("boundary.samples", 96)?;
        let smoothing = map.f64("boundary.smoothing", 0.0)?;
        let nu = map.usize("mesh.nu", 48)?;
        let nv = map.usize("mesh.nv", 24)?;
        let handle_amplitude = map.f64("seed.handle", 0.25 * height.min(radius))?;
        let barrier_neck = map.f64("barrier.neck", 1.0)?;
        let obstacle = map.bool("barrier.obstacle", false)?;
        let backend = match map.get("solver.backend").unwrap_or("gradient") {
            "gradient" => Backend::Gradient,
            "newton" => Backend::Newton,
            other => {
                return Err(ConfigError::BadValue {
                    key: "solver.backend".into(),
                    value: other.into(),
                    wanted: "`gradient` or `newton`",
                })
            }
        };
        let max_iterations = map.usize("solver.max_iterations", 300)?;
        let tolerance = map.f64("solver.tolerance", 1e-2)?;
        let step = map.f64("solver.step", 0.5)?;
        let containment_weight = map.f64("solver.containment_weight", 10.0)?;
        let refine_rounds = map.usize("refine.rounds", 1)?;
        let refine_iterations = map.usize("refine.iterations", 60)?;
        let tile_copies = map.usize("tile.copies", 3)?;
        let census_directions = map.usize("verify.directions", 180)?;
        let level_fractions = map.f64_list("verify.levels", &[0.0, 0.3])?;
        let sweep_radii = map.f64_list("sweep.radii", &[4.0 * PI, 6.0 * PI, 8.0 * PI])?;
        let stages = match map.get("run.stages") {
            None => Stage::ALL.to_vec(),
            Some(list) => {
                let mut stages = Vec::new();
                for name in list.split(',') {
                    stages.push(Stage::parse(name.trim())?);
                }
                stages
            }
        };
        let threads = map.usize("threads", 1)?;
        let seed = map.u64("seed", 0)?;
        let trace = map.bool("run.trace", false)?;

        let check_positive = |key: &str, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::BadParameter {
                    key: key.to_string(),
                    reason: format!("must be positive and finite, got {value}"),
                })
            }
        };
        check_positive("run.radius", radius)?;
        check_positive("run.height", height)?;
        check_positive("solver.tolerance", tolerance)?;
        check_positive("solver.step", step)?;
        if boundary_samples < 64 {
            return Err(ConfigError::BadParameter {
                key: "boundary.samples".into(),
                reason: format!("need at least 64 samples per arc, got {boundary_samples}"),
            });
        }
        if nu < 4 || nv < 4 {
            return Err(ConfigError::BadParameter {
                key: "mesh.nu".into(),
                reason: format!("grid must be at least 4x4, got {nu}x{nv}"),
            });
        }
        if smoothing < 0.0 || handle_amplitude < 0.0 || barrier_neck < 0.0 {
            return Err(ConfigError::BadParameter {
                key: "boundary.smoothing".into(),
                reason: "smoothing, seed.handle and barrier.neck must be non-negative".into(),
            });
        }
        if tile_copies % 2 == 0 {
            return Err(ConfigError::BadParameter {
                key: "tile.copies".into(),
                reason: format!("copy count must be odd, got {tile_copies}"),
            });
        }
        if census_directions < 36 {
            return Err(ConfigError::BadParameter {
                key: "verify.directions".into(),
                reason: format!("need at least 36 directions, got {census_directions}"),
            });
        }
        if threads == 0 {
            return Err(ConfigError::BadParameter {
                key: "threads".into(),
                reason: "thread count must be at least 1".into(),
            });
        }

        Ok(ExperimentConfig {
            radius,
            height,
            boundary_samples,
            smoothing,
            nu,
            nv,
            handle_amplitude,
            barrier_neck,
            obstacle,
            backend,
            max_iterations,
            tolerance,
            step,
            containment_weight,
            refine_rounds,
            refine_iterations,
            tile_copies,
            census_directions,
            level_fractions,
            sweep_radii,
            stages,
            threads,
            seed,
            trace,
        })
    }

    /// Defaults for the canonical run, without a config file.
    pub fn default_run() -> ExperimentConfig {
        ExperimentConfig::from_map(&ConfigMap::default()).expect("defaults are valid")
    }

    /// Re-serialise the resolved configuration (records the effective
    /// parameters of a run, including env overrides).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "radius = {:.17e}", self.radius);
        let _ = writeln!(s, "height = {:.17e}", self.height);
        let stages: Vec<&str> = self.stages.iter().map(|st| st.name()).collect();
        let _ = writeln!(s, "stages = {}", stages.join(","));
        let _ = writeln!(s, "\n[boundary]");
        let _ = writeln!(s, "samples = {}", self.boundary_samples);
        let _ = writeln!(s, "smoothing = {:.17e}", self.smoothing);
        let _ = writeln!(s, "\n[mesh]");
        let _ = writeln!(s, "nu = {}", self.nu);
        let _ = writeln!(s, "nv = {}", self.nv);
        let _ = writeln!(s, "\n[seed]");
        let _ = writeln!(s, "handle = {:.17e}", self.handle_amplitude);
        let _ = writeln!(s, "\n[barrier]");
        let _ = writeln!(s, "neck = {:.17e}", self.barrier_neck);
        let _ = writeln!(s, "obstacle = {}", self.obstacle);
        let _ = writeln!(s, "\n[solver]");
        let backend = match self.backend {
            Backend::Gradient => "gradient",
            Backend::Newton => "newton",
        };
        let _ = writeln!(s, "backend = {backend}");
        let _ = writeln!(s, "max_iterations = {}", self.max_iterations);
        let _ = writeln!(s, "tolerance = {:.17e}", self.tolerance);
        let _ = writeln!(s, "step = {:.17e}", self.step);
        let _ = writeln!(s, "containment_weight = {:.17e}", self.containment_weight);
        let _ = writeln!(s, "\n[refine]");
        let _ = writeln!(s, "rounds = {}", self.refine_rounds);
        let _ = writeln!(s, "iterations = {}", self.refine_iterations);
        let _ = writeln!(s, "\n[tile]");
        let _ = writeln!(s, "copies = {}", self.tile_copies);
        let _ = writeln!(s, "\n[verify]");
        let _ = writeln!(s, "directions = {}", self.census_directions);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pi_token_arithmetic() {
        assert_relative_eq!(parse_number("6*pi").unwrap(), 6.0 * PI);
        assert_relative_eq!(parse_number("pi/2").unwrap(), PI / 2.0);
        assert_relative_eq!(parse_number("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_relative_eq!(parse_number("-0.3 * pi").unwrap(), -0.3 * PI);
        assert_relative_eq!(parse_number("12.5").unwrap(), 12.5);
        assert_relative_eq!(parse_number("pi").unwrap(), PI);
        assert!(parse_number("").is_none());
        assert!(parse_number("pie").is_none());
        assert!(parse_number("2 + pi").is_none());
    }

    #[test]
    fn sections_comments_and_defaults() {
        let text = "\
# canonical run at reduced resolution
threads = 2

[run]
radius = 4*pi
height = pi
stages = gen-boundary, seed

[mesh]
nu = 12
nv = 8
";
        let map = ConfigMap::parse(text).unwrap();
        let cfg = ExperimentConfig::from_map(&map).unwrap();
        assert_relative_eq!(cfg.radius, 4.0 * PI);
        assert_relative_eq!(cfg.height, PI);
        assert_eq!(cfg.threads, 2);
        assert_eq!(cfg.stages, vec![Stage::GenBoundary, Stage::Seed]);
        assert_eq!((cfg.nu, cfg.nv), (12, 8));
        // Untouched keys fall back to defaults.
        assert_eq!(cfg.tile_copies, 3);
        assert_eq!(cfg.census_directions, 180);
        assert_relative_eq!(cfg.sweep_radii[0], 4.0 * PI);
    }

    #[test]
    fn env_overrides_win() {
        let mut map = ConfigMap::parse("[run]\nradius = 4*pi\n").unwrap();
        map.apply_env([
            ("HELILAB_RUN_RADIUS".to_string(), "8*pi".to_string()),
            ("HELILAB_SOLVER_MAX_ITERATIONS".to_string(), "7".to_string()),
            ("HELILAB_THREADS".to_string(), "3".to_string()),
            ("PATH".to_string(), "/usr/bin".to_string()),
        ]);
        let cfg = ExperimentConfig::from_map(&map).unwrap();
        assert_relative_eq!(cfg.radius, 8.0 * PI);
        assert_eq!(cfg.max_iterations, 7);
        assert_eq!(cfg.threads, 3);
    }

    #[test]
    fn malformed_and_invalid_inputs_error() {
        assert!(matches!(
            ConfigMap::parse("radius 6*pi"),
            Err(ConfigError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            ConfigMap::parse("Bad-Key = 1"),
            Err(ConfigError::Malformed { .. })
        ));

        let map = ConfigMap::parse("[run]\nradius = six\n").unwrap();
        assert!(matches!(
            ExperimentConfig::from_map(&map),
            Err(ConfigError::BadValue { .. })
        ));

        let map = ConfigMap::parse("[run]\nradius = -2\n").unwrap();
        assert!(matches!(
            ExperimentConfig::from_map(&map),
            Err(ConfigError::BadParameter { .. })
        ));

        let map = ConfigMap::parse("[tile]\ncopies = 4\n").unwrap();
        assert!(matches!(
            ExperimentConfig::from_map(&map),
            Err(ConfigError::BadParameter { .. })
        ));

        let map = ConfigMap::parse("[run]\nstages = solve, fly\n").unwrap();
        assert!(matches!(
            ExperimentConfig::from_map(&map),
            Err(ConfigError::UnknownStage(_))
        ));
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = ExperimentConfig::default_run();
        let map = ConfigMap::parse(&cfg.to_text()).unwrap();
        let back = ExperimentConfig::from_map(&map).unwrap();
        assert_relative_eq!(back.radius, cfg.radius);
        assert_relative_eq!(back.height, cfg.height);
        assert_eq!(back.stages, cfg.stages);
        assert_eq!(back.backend, cfg.backend);
        assert_eq!(back.tile_copies, cfg.tile_copies);
    }
}
