//! The eight-piece boundary contour spanning two opposite helicoidal
//! quadrants: two helical arcs at the outer rim, two horizontal edges, two
//! vertical axis segments, and the two horizontal half-rulings through the
//! origin.  The contour passes through the origin twice (once between the
//! upper axis segment and the negative-x ruling, once between the lower axis
//! segment and the positive-x ruling); the two visits are kept as distinct
//! samples throughout.

use std::fmt::Write as _;

use super::{helicoid_point, GeometryError, Point3};

/// Which of the eight contour pieces a sample belongs to, in traversal
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PieceKind {
    /// Outer helical arc on the positive-ruling quadrant.
    ArcUpper,
    /// Horizontal edge from the top of the upper arc to the axis.
    EdgeTop,
    /// Axis segment from the top edge down to the origin.
    AxisUpper,
    /// Horizontal half-ruling from the origin in the negative-x direction.
    SegNegX,
    /// Outer helical arc on the negative-ruling quadrant.
    ArcLower,
    /// Horizontal edge from the bottom of the lower arc to the axis.
    EdgeBottom,
    /// Axis segment from the bottom edge up to the origin.
    AxisLower,
    /// Horizontal half-ruling from the origin in the positive-x direction.
    SegPosX,
}

impl PieceKind {
    pub const ALL: [PieceKind; 8] = [
        PieceKind::ArcUpper,
        PieceKind::EdgeTop,
        PieceKind::AxisUpper,
        PieceKind::SegNegX,
        PieceKind::ArcLower,
        PieceKind::EdgeBottom,
        PieceKind::AxisLower,
        PieceKind::SegPosX,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PieceKind::ArcUpper => "arc-upper",
            PieceKind::EdgeTop => "edge-top",
            PieceKind::AxisUpper => "axis-upper",
            PieceKind::SegNegX => "seg-negx",
            PieceKind::ArcLower => "arc-lower",
            PieceKind::EdgeBottom => "edge-bottom",
            PieceKind::AxisLower => "axis-lower",
            PieceKind::SegPosX => "seg-posx",
        }
    }

    fn from_label(s: &str) -> Option<PieceKind> {
        PieceKind::ALL.iter().copied().find(|k| k.label() == s)
    }
}

/// Analytic geometry of a contour piece, parametrised over `t` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceGeom {
    /// `F(radius, v)` for `v` from `v0` to `v1` (signed `radius` selects the
    /// quadrant).
    HelicalArc { radius: f64, v0: f64, v1: f64 },
    /// Straight segment from `a` to `b`.
    Segment { a: Point3, b: Point3 },
    /// Horizontal circular arc about `center` from angle `a0` to `a1`.
    CircleArc { center: Point3, radius: f64, a0: f64, a1: f64 },
}

impl PieceGeom {
    pub fn eval(&self, t: f64) -> Point3 {
        match *self {
            PieceGeom::HelicalArc { radius, v0, v1 } => {
                helicoid_point(radius, v0 + t * (v1 - v0))
            }
            PieceGeom::Segment { a, b } => a + t * (b - a),
            PieceGeom::CircleArc { center, radius, a0, a1 } => {
                let ang = a0 + t * (a1 - a0);
                center + Point3::new(radius * ang.cos(), radius * ang.sin(), 0.0)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            PieceGeom::HelicalArc { radius, v0, v1 } => {
                (v1 - v0).abs() * (1.0 + radius * radius).sqrt()
            }
            PieceGeom::Segment { a, b } => (b - a).norm(),
            PieceGeom::CircleArc { radius, a0, a1, .. } => (a1 - a0).abs() * radius,
        }
    }

    /// Whether the piece closes on itself (parameter 1 returns to
    /// parameter 0), as a full circle does.
    pub fn is_closed(&self) -> bool {
        (self.eval(0.0) - self.eval(1.0)).norm() < 1e-9 * (1.0 + self.length())
    }
}

/// Sample tag: either the `k`-th corner visit (0..8, in traversal order) or
/// an interior sample of a piece.  Corner visits 3 and 7 are the two passes
/// through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Corner(u8),
    Interior(PieceKind),
}

impl BoundaryTag {
    fn label(self) -> String {
        match self {
            BoundaryTag::Corner(k) => format!("corner{k}"),
            BoundaryTag::Interior(p) => p.label().to_string(),
        }
    }

    fn from_label(s: &str) -> Option<BoundaryTag> {
        if let Some(rest) = s.strip_prefix("corner") {
            rest.parse::<u8>().ok().filter(|&k| k < 8).map(BoundaryTag::Corner)
        } else {
            PieceKind::from_label(s).map(BoundaryTag::Interior)
        }
    }
}

/// Closed polygonal sampling of the two-quadrant boundary contour.
///
/// Vertices are listed in traversal order starting at the outer corner
/// `(R, 0, 0)`; the polyline closes from the last vertex back to the first.
/// Each vertex carries a tag and its `(piece, parameter)` coordinates on the
/// analytic contour.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub radius: f64,
    pub height: f64,
    pub smoothing: f64,
    /// Requested segment count along each helical arc.
    pub arc_samples: usize,
    pub vertices: Vec<Point3>,
    pub tags: Vec<BoundaryTag>,
    /// `(piece index, parameter)` of each sample on the analytic contour.
    pub params: Vec<(usize, f64)>,
    pub pieces: [PieceGeom; 8],
}

/// Build the contour for rim radius `radius`, quadrant height `height`,
/// `arc_samples` segments on each helical arc (other pieces sampled at
/// matching density), and optional corner rounding radius `smoothing`
/// applied at the six non-origin corners.
pub fn boundary_curve(
    radius: f64,
    height: f64,
    arc_samples: usize,
    smoothing: f64,
) -> Result<BoundaryCurve, GeometryError> {
    if !(radius > 0.0) {
        return Err(GeometryError::InvalidParameter { name: "radius", value: radius });
    }
    if !(height > 0.0) {
        return Err(GeometryError::InvalidParameter { name: "height", value: height });
    }
    if arc_samples < 2 {
        return Err(GeometryError::InvalidParameter {
            name: "arc_samples",
            value: arc_samples as f64,
        });
    }
    let pieces = contour_pieces(radius, height);
    let min_len = pieces.iter().map(|p| p.length()).fold(f64::INFINITY, f64::min);
    if smoothing < 0.0 || smoothing >= 0.45 * min_len {
        return Err(GeometryError::InvalidParameter { name: "smoothing", value: smoothing });
    }

    let arc_len = pieces[0].length();
    let density = arc_samples as f64 / arc_len;
    let counts: Vec<usize> = pieces
        .iter()
        .map(|p| ((p.length() * density).round() as usize).max(1))
        .collect();

    let mut vertices = Vec::new();
    let mut tags = Vec::new();
    let mut params = Vec::new();
    for (pi, piece) in pieces.iter().enumerate() {
        let n = counts[pi];
        for s in 0..n {
            let t = s as f64 / n as f64;
            vertices.push(piece.eval(t));
            tags.push(if s == 0 {
                BoundaryTag::Corner(pi as u8)
            } else {
                BoundaryTag::Interior(piece_kind(pi))
            });
            params.push((pi, t));
        }
    }

    let mut curve = BoundaryCurve {
        radius,
        height,
        smoothing,
        arc_samples,
        vertices,
        tags,
        params,
        pieces,
    };
    if smoothing > 0.0 {
        round_corners(&mut curve);
    }
    Ok(curve)
}

fn piece_kind(index: usize) -> PieceKind {
    PieceKind::ALL[index]
}

fn contour_pieces(radius: f64, height: f64) -> [PieceGeom; 8] {
    let origin = Point3::zeros();
    let c2 = helicoid_point(radius, height);
    let c5 = helicoid_point(-radius, -height);
    [
        PieceGeom::HelicalArc { radius, v0: 0.0, v1: height },
        PieceGeom::Segment { a: c2, b: Point3::new(0.0, 0.0, height) },
        PieceGeom::Segment { a: Point3::new(0.0, 0.0, height), b: origin },
        PieceGeom::Segment { a: origin, b: Point3::new(-radius, 0.0, 0.0) },
        PieceGeom::HelicalArc { radius: -radius, v0: 0.0, v1: -height },
        PieceGeom::Segment { a: c5, b: Point3::new(0.0, 0.0, -height) },
        PieceGeom::Segment { a: Point3::new(0.0, 0.0, -height), b: origin },
        PieceGeom::Segment { a: origin, b: Point3::new(radius, 0.0, 0.0) },
    ]
}

/// Quadratic-blend rounding of the six non-origin corners.  Samples within
/// arc distance `smoothing` of such a corner are repositioned on a Bezier
/// blend between the two adjacent pieces; the two origin visits stay sharp
/// so the double point survives.
fn round_corners(curve: &mut BoundaryCurve) {
    let r = curve.smoothing;
    let n = curve.vertices.len();
    let lengths: Vec<f64> = curve.pieces.iter().map(|p| p.length()).collect();
    for corner in 0..8u8 {
        // Corner visits 3 and 7 are the origin double point: never rounded.
        if corner == 3 || corner == 7 {
            continue;
        }
        let inc = (corner as usize + 7) % 8; // incoming piece
        let out = corner as usize; // outgoing piece
        let p_in = curve.pieces[inc].eval(1.0 - r / lengths[inc]);
        let p_out = curve.pieces[out].eval(r / lengths[out]);
        let apex = curve.pieces[out].eval(0.0);
        for i in 0..n {
            let (pi, t) = curve.params[i];
            let blend_t = if pi == inc {
                let d = (1.0 - t) * lengths[inc];
                if d < r { Some(0.5 * (1.0 - d / r)) } else { None }
            } else if pi == out {
                let d = t * lengths[out];
                if d < r { Some(0.5 * (1.0 + d / r)) } else { None }
            } else {
                None
            };
            if let Some(s) = blend_t {
                let q = (1.0 - s) * (1.0 - s) * p_in + 2.0 * s * (1.0 - s) * apex + s * s * p_out;
                curve.vertices[i] = q;
            }
        }
    }
}

impl BoundaryCurve {
    /// Number of corner-tagged samples (8: the six outer/axis corners plus
    /// the two origin visits).
    pub fn corner_count(&self) -> usize {
        self.tags.iter().filter(|t| matches!(t, BoundaryTag::Corner(_))).count()
    }

    /// Number of geometrically distinct corner positions (7: the origin is
    /// visited twice).
    pub fn distinct_corner_count(&self) -> usize {
        let mut pts: Vec<Point3> = self
            .vertices
            .iter()
            .zip(&self.tags)
            .filter(|(_, t)| matches!(t, BoundaryTag::Corner(_)))
            .map(|(p, _)| *p)
            .collect();
        let mut distinct = 0;
        while let Some(p) = pts.pop() {
            pts.retain(|q| (q - p).norm() > 1e-12);
            distinct += 1;
        }
        distinct
    }

    /// Total polyline length (closing edge included).
    pub fn polyline_length(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| (self.vertices[(i + 1) % n] - self.vertices[i]).norm()).sum()
    }

    /// Serialize to the plain-text interchange format: a header line
    /// `GAMMA <radius> <height> <smoothing> <arc_samples>` followed by one
    /// `x y z tag` line per sample in traversal order.
    pub fn to_gamma_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "GAMMA {:.17e} {:.17e} {:.17e} {}",
            self.radius, self.height, self.smoothing, self.arc_samples
        );
        for (p, tag) in self.vertices.iter().zip(&self.tags) {
            let _ = writeln!(out, "{:.17e} {:.17e} {:.17e} {}", p.x, p.y, p.z, tag.label());
        }
        out
    }

    /// Parse the plain-text interchange format produced by
    /// [`BoundaryCurve::to_gamma_text`].
    pub fn from_gamma_text(text: &str) -> Result<BoundaryCurve, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or("empty input")?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("GAMMA") {
            return Err("missing GAMMA header".into());
        }
        let radius: f64 = parse_field(fields.next(), "radius")?;
        let height: f64 = parse_field(fields.next(), "height")?;
        let smoothing: f64 = parse_field(fields.next(), "smoothing")?;
        let arc_samples: usize = parse_field(fields.next(), "arc_samples")?;

        let pieces = contour_pieces(radius, height);
        let mut vertices = Vec::new();
        let mut tags = Vec::new();
        for (ln, line) in lines.enumerate() {
            let mut fields = line.split_whitespace();
            let x: f64 = parse_field(fields.next(), "x")?;
            let y: f64 = parse_field(fields.next(), "y")?;
            let z: f64 = parse_field(fields.next(), "z")?;
            let tag = fields
                .next()
                .and_then(BoundaryTag::from_label)
                .ok_or_else(|| format!("bad tag on sample line {}", ln + 1))?;
            vertices.push(Point3::new(x, y, z));
            tags.push(tag);
        }
        if vertices.is_empty() {
            return Err("no sample lines".into());
        }
        // Parameters are reconstructed by projecting each sample back onto
        // its tagged piece (corner visit k starts piece k).
        let mut params = Vec::with_capacity(vertices.len());
        let mut current_piece = 0usize;
        for tag in &tags {
            match tag {
                BoundaryTag::Corner(k) => {
                    current_piece = *k as usize;
                    params.push((current_piece, 0.0));
                }
                BoundaryTag::Interior(_) => {
                    let idx = params.len();
                    let t = project_param(&pieces[current_piece], vertices[idx]);
                    params.push((current_piece, t));
                }
            }
        }
        Ok(BoundaryCurve {
            radius,
            height,
            smoothing,
            arc_samples,
            vertices,
            tags,
            params,
            pieces,
        })
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, name: &str) -> Result<T, String> {
    field
        .ok_or_else(|| format!("missing field {name}"))?
        .parse()
        .map_err(|_| format!("malformed field {name}"))
}

fn project_param(piece: &PieceGeom, p: Point3) -> f64 {
    match *piece {
        PieceGeom::HelicalArc { v0, v1, .. } => ((p.z - v0) / (v1 - v0)).clamp(0.0, 1.0),
        PieceGeom::Segment { a, b } => {
            let d = b - a;
            let len2 = d.norm_squared();
            if len2 == 0.0 {
                0.0
            } else {
                ((p - a).dot(&d) / len2).clamp(0.0, 1.0)
            }
        }
        PieceGeom::CircleArc { center, a0, a1, .. } => {
            let ang = (p.y - center.y).atan2(p.x - center.x);
            ((ang - a0) / (a1 - a0)).clamp(0.0, 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_symmetry, side_of_helicoid, Side, SymmetryElement};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gamma() -> BoundaryCurve {
        boundary_curve(6.0 * PI, PI, 64, 0.0).unwrap()
    }

    #[test]
    fn corner_structure() {
        let c = gamma();
        // Eight corner visits at seven distinct positions: the origin is a
        // double point of the contour.
        assert_eq!(c.corner_count(), 8);
        assert_eq!(c.distinct_corner_count(), 7);
        let origin_visits: Vec<_> = c
            .tags
            .iter()
            .zip(&c.vertices)
            .filter(|(t, _)| matches!(t, BoundaryTag::Corner(3) | BoundaryTag::Corner(7)))
            .map(|(_, p)| *p)
            .collect();
        assert_eq!(origin_visits.len(), 2);
        assert_relative_eq!(origin_visits[0].norm(), 0.0);
        assert_relative_eq!(origin_visits[1].norm(), 0.0);
    }

    #[test]
    fn arc_endpoints_and_membership() {
        let r = 6.0 * PI;
        let c = gamma();
        // Upper arc runs from (R,0,0) to F(R,h); lower from (-R,0,0) to F(-R,-h).
        assert_relative_eq!(c.pieces[0].eval(0.0), Point3::new(r, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(c.pieces[0].eval(1.0), helicoid_point(r, PI), epsilon = 1e-12);
        assert_relative_eq!(c.pieces[4].eval(0.0), Point3::new(-r, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(c.pieces[4].eval(1.0), helicoid_point(-r, -PI), epsilon = 1e-12);
        // Every sample lies on the helicoid (the contour is drawn on it).
        for &p in &c.vertices {
            let side = side_of_helicoid(p, 1e-9);
            assert!(matches!(side, Side::OnSurface | Side::OnAxis), "sample off surface: {p:?}");
        }
    }

    #[test]
    fn y_flip_invariance_as_a_set() {
        let c = gamma();
        for &p in &c.vertices {
            let q = apply_symmetry(SymmetryElement::RotY, p);
            let nearest = c
                .vertices
                .iter()
                .map(|&v| (v - q).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9, "image of {p:?} not on contour (dist {nearest:.2e})");
        }
    }

    #[test]
    fn sampling_density_tracks_length() {
        let c = gamma();
        let n = c.vertices.len();
        // Closed polyline, uniform-ish spacing: max edge no more than 3x min.
        let mut min_e = f64::INFINITY;
        let mut max_e: f64 = 0.0;
        for i in 0..n {
            // The two zero-length "edges" between coincident origin visits do
            // not occur because distinct pieces always advance.
            let e = (c.vertices[(i + 1) % n] - c.vertices[i]).norm();
            min_e = min_e.min(e);
            max_e = max_e.max(e);
        }
        assert!(min_e > 0.0);
        assert!(max_e / min_e < 3.0, "spacing ratio {}", max_e / min_e);
    }

    #[test]
    fn smoothing_rounds_outer_corners_only() {
        let sharp = boundary_curve(10.0, PI, 48, 0.0).unwrap();
        let smooth = boundary_curve(10.0, PI, 48, 0.5).unwrap();
        assert_eq!(sharp.vertices.len(), smooth.vertices.len());
        // Rounding shortens the polyline.
        assert!(smooth.polyline_length() < sharp.polyline_length());
        // Origin visits stay exactly at the origin.
        for (tag, p) in smooth.tags.iter().zip(&smooth.vertices) {
            if matches!(tag, BoundaryTag::Corner(3) | BoundaryTag::Corner(7)) {
                assert_eq!(p.norm(), 0.0);
            }
        }
        // Outer corner visit 0 has moved off the sharp corner.
        let c0 = smooth
            .tags
            .iter()
            .position(|t| matches!(t, BoundaryTag::Corner(0)))
            .unwrap();
        assert!((smooth.vertices[c0] - Point3::new(10.0, 0.0, 0.0)).norm() > 1e-3);
    }

    #[test]
    fn gamma_text_round_trip() {
        let c = gamma();
        let text = c.to_gamma_text();
        let back = BoundaryCurve::from_gamma_text(&text).unwrap();
        assert_eq!(back.vertices.len(), c.vertices.len());
        assert_eq!(back.tags, c.tags);
        for (a, b) in c.vertices.iter().zip(&back.vertices) {
            assert_eq!(a, b, "positions must survive the text round trip bit-for-bit");
        }
        assert_eq!(back.radius, c.radius);
        assert_eq!(back.height, c.height);
        assert_eq!(back.arc_samples, c.arc_samples);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(boundary_curve(-1.0, PI, 32, 0.0).is_err());
        assert!(boundary_curve(10.0, 0.0, 32, 0.0).is_err());
        assert!(boundary_curve(10.0, PI, 1, 0.0).is_err());
        assert!(boundary_curve(10.0, PI, 32, 500.0).is_err());
        assert!(BoundaryCurve::from_gamma_text("nonsense").is_err());
    }
}
