//! Mesh interchange: Wavefront OBJ (text) and binary little-endian PLY.
//!
//! PLY stores positions as doubles plus a per-vertex role byte, so a PLY
//! round trip is bitwise exact including roles.  OBJ is plain `v`/`f`
//! lines; on import, vertex roles are reconstructed from boundary topology.

use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{TriMesh, VertexRole};
use crate::geometry::Point3;

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed binary payload: {0}")]
    Binary(String),
    #[error("unsupported feature: {0}")]
    Unsupported(String),
}

fn role_to_byte(role: VertexRole) -> u8 {
    match role {
        VertexRole::Free => 0,
        VertexRole::BoundaryFixed => 1,
        VertexRole::OriginDouble => 2,
    }
}

fn role_from_byte(b: u8) -> Result<VertexRole, MeshIoError> {
    match b {
        0 => Ok(VertexRole::Free),
        1 => Ok(VertexRole::BoundaryFixed),
        2 => Ok(VertexRole::OriginDouble),
        other => Err(MeshIoError::Binary(format!("unknown vertex role byte {other}"))),
    }
}

/// Write OBJ text to any sink.
pub fn write_obj(mesh: &TriMesh, mut out: impl Write) -> Result<(), MeshIoError> {
    writeln!(out, "# {} vertices, {} faces", mesh.vertex_count(), mesh.face_count())?;
    for p in &mesh.positions {
        writeln!(out, "v {:.9} {:.9} {:.9}", p.x, p.y, p.z)?;
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

/// Read OBJ text (triangles only; polygonal faces are fanned).
pub fn read_obj(mut input: impl Read) -> Result<TriMesh, MeshIoError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut positions = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let mut coord = |name: &str| -> Result<f64, MeshIoError> {
                    fields
                        .next()
                        .ok_or_else(|| MeshIoError::Parse {
                            line: ln + 1,
                            message: format!("missing {name}"),
                        })?
                        .parse()
                        .map_err(|_| MeshIoError::Parse {
                            line: ln + 1,
                            message: format!("bad {name}"),
                        })
                };
                let (x, y, z) = (coord("x")?, coord("y")?, coord("z")?);
                positions.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let idx: Result<Vec<usize>, MeshIoError> = fields
                    .map(|tok| {
                        let first = tok.split('/').next().unwrap_or(tok);
                        first
                            .parse::<usize>()
                            .map_err(|_| MeshIoError::Parse {
                                line: ln + 1,
                                message: format!("bad face index {tok:?}"),
                            })
                            .and_then(|v| {
                                if v == 0 {
                                    Err(MeshIoError::Parse {
                                        line: ln + 1,
                                        message: "obj indices are 1-based".into(),
                                    })
                                } else {
                                    Ok(v - 1)
                                }
                            })
                    })
                    .collect();
                let idx = idx?;
                if idx.len() < 3 {
                    return Err(MeshIoError::Parse {
                        line: ln + 1,
                        message: "face with fewer than 3 vertices".into(),
                    });
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {} // ignore normals, texcoords, groups, etc.
        }
    }
    let n = positions.len();
    let mut mesh = TriMesh {
        positions,
        faces,
        roles: vec![VertexRole::Free; n],
        boundary_attr: vec![None; n],
        ..Default::default()
    };
    // Reconstruct boundary roles from topology when the mesh is valid.
    if let Ok(he) = mesh.half_edges() {
        for v in 0..n {
            if he.boundary_vertex[v] {
                mesh.roles[v] = VertexRole::BoundaryFixed;
            }
        }
    }
    Ok(mesh)
}

/// Write binary little-endian PLY with double precision positions and a
/// role byte per vertex.
pub fn write_ply(mesh: &TriMesh, mut out: impl Write) -> Result<(), MeshIoError> {
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\n\
         element vertex {}\n\
         property double x\nproperty double y\nproperty double z\n\
         property uchar role\n\
         element face {}\n\
         property list uchar int vertex_indices\n\
         end_header\n",
        mesh.vertex_count(),
        mesh.face_count()
    )?;
    for (p, role) in mesh.positions.iter().zip(&mesh.roles) {
        out.write_all(&p.x.to_le_bytes())?;
        out.write_all(&p.y.to_le_bytes())?;
        out.write_all(&p.z.to_le_bytes())?;
        out.write_all(&[role_to_byte(*role)])?;
    }
    for f in &mesh.faces {
        out.write_all(&[3u8])?;
        for &v in f {
            out.write_all(&(v as i32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read the binary PLY dialect produced by [`write_ply`].
pub fn read_ply(mut input: impl Read) -> Result<TriMesh, MeshIoError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let header_end = find_header_end(&bytes)
        .ok_or_else(|| MeshIoError::Binary("missing end_header".into()))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| MeshIoError::Binary("non-utf8 header".into()))?;
    let mut n_vertex = None;
    let mut n_face = None;
    let mut has_role = false;
    for line in header.lines() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["format", fmt, _] if *fmt != "binary_little_endian" => {
                return Err(MeshIoError::Unsupported(format!("ply format {fmt}")));
            }
            ["element", "vertex", n] => n_vertex = n.parse::<usize>().ok(),
            ["element", "face", n] => n_face = n.parse::<usize>().ok(),
            ["property", "uchar", "role"] => has_role = true,
            _ => {}
        }
    }
    let n_vertex = n_vertex.ok_or_else(|| MeshIoError::Binary("missing vertex element".into()))?;
    let n_face = n_face.ok_or_else(|| MeshIoError::Binary("missing face element".into()))?;

    let mut cursor = header_end;
    let mut take = |n: usize| -> Result<&[u8], MeshIoError> {
        if cursor + n > bytes.len() {
            return Err(MeshIoError::Binary("truncated payload".into()));
        }
        let s = &bytes[cursor..cursor + n];
        cursor += n;
        Ok(s)
    };
    let mut positions = Vec::with_capacity(n_vertex);
    let mut roles = Vec::with_capacity(n_vertex);
    for _ in 0..n_vertex {
        let mut coords = [0.0f64; 3];
        for c in &mut coords {
            *c = f64::from_le_bytes(take(8)?.try_into().unwrap());
        }
        positions.push(Point3::new(coords[0], coords[1], coords[2]));
        roles.push(if has_role { role_from_byte(take(1)?[0])? } else { VertexRole::Free });
    }
    let mut faces = Vec::with_capacity(n_face);
    for _ in 0..n_face {
        let count = take(1)?[0] as usize;
        if count != 3 {
            return Err(MeshIoError::Unsupported(format!("{count}-gon face in ply")));
        }
        let mut tri = [0usize; 3];
        for t in &mut tri {
            let v = i32::from_le_bytes(take(4)?.try_into().unwrap());
            if v < 0 || v as usize >= n_vertex {
                return Err(MeshIoError::Binary(format!("face index {v} out of range")));
            }
            *t = v as usize;
        }
        faces.push(tri);
    }
    let n = positions.len();
    Ok(TriMesh {
        positions,
        faces,
        roles,
        boundary_attr: vec![None; n],
        ..Default::default()
    })
}

fn find_header_end(bytes: &[u8]) -> Option<usize> {
    let needle = b"end_header\n";
    bytes
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + needle.len())
}

/// Write a mesh to `path`, selecting the format from the extension
/// (`.obj` or `.ply`).
pub fn export_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), MeshIoError> {
    let file = std::fs::File::create(path)?;
    write_obj(mesh, io::BufWriter::new(file))
}

pub fn import_obj(path: impl AsRef<Path>) -> Result<TriMesh, MeshIoError> {
    let file = std::fs::File::open(path)?;
    read_obj(io::BufReader::new(file))
}

pub fn export_ply(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), MeshIoError> {
    let file = std::fs::File::create(path)?;
    write_ply(mesh, io::BufWriter::new(file))
}

pub fn import_ply(path: impl AsRef<Path>) -> Result<TriMesh, MeshIoError> {
    let file = std::fs::File::open(path)?;
    read_ply(io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build;

    #[test]
    fn ply_round_trip_is_bitwise_exact() {
        let mut m = build::helicoid_patch(0.3, 2.0, 0.1, 1.9, 12, 12);
        m.roles[5] = VertexRole::OriginDouble;
        let mut buf = Vec::new();
        write_ply(&m, &mut buf).unwrap();
        let back = read_ply(buf.as_slice()).unwrap();
        assert_eq!(back.faces, m.faces);
        assert_eq!(back.roles, m.roles);
        for (a, b) in m.positions.iter().zip(&back.positions) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
            assert_eq!(a.z.to_bits(), b.z.to_bits());
        }
    }

    #[test]
    fn obj_round_trip_preserves_topology() {
        let m = build::fan_disk(1.0, 16, 3);
        let mut buf = Vec::new();
        write_obj(&m, &mut buf).unwrap();
        let back = read_obj(buf.as_slice()).unwrap();
        assert_eq!(back.faces, m.faces);
        assert_eq!(back.vertex_count(), m.vertex_count());
        // Boundary roles are reconstructed from topology.
        assert_eq!(back.roles, m.roles);
        for (a, b) in m.positions.iter().zip(&back.positions) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn obj_accepts_slash_indices_and_polygons() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\n";
        let m = read_obj(text.as_bytes()).unwrap();
        assert_eq!(m.face_count(), 2);
    }

    #[test]
    fn malformed_inputs_error_cleanly() {
        assert!(read_obj("v 1 2\n".as_bytes()).is_err());
        assert!(read_obj("f 0 1 2\n".as_bytes()).is_err());
        assert!(read_ply(b"ply\nformat ascii 1.0\nend_header\n".as_slice()).is_err());
        assert!(read_ply(b"garbage".as_slice()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = build::icosphere(1.0, 1);
        let p_obj = dir.path().join("m.obj");
        let p_ply = dir.path().join("m.ply");
        export_obj(&m, &p_obj).unwrap();
        export_ply(&m, &p_ply).unwrap();
        assert_eq!(import_obj(&p_obj).unwrap().faces, m.faces);
        assert_eq!(import_ply(&p_ply).unwrap().faces, m.faces);
    }
}
