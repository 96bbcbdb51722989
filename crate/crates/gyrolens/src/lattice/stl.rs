//! Binary STL serialization of triangle meshes.
//!
//! Layout: an 80-byte zero-padded header naming the tool, an unsigned
//! 32-bit little-endian triangle count, then 50 bytes per triangle (unit
//! normal and three vertices as little-endian IEEE-754 32-bit floats, plus
//! two zero attribute bytes). Total size is therefore 84 + 50·n bytes.
//!
//! Meshes are modeled in meters; print files are conventionally dimensioned
//! in millimeters, so coordinates are scaled by 1000 on the way out.

use std::fs;
use std::path::Path;

use super::mesh::TriangleMesh;
use crate::Result;

const HEADER_TEXT: &[u8] = b"gyrolens 0.1.0 binary STL";

/// Serializes the mesh to an in-memory binary STL image, in millimeters.
pub fn stl_bytes(mesh: &TriangleMesh) -> Vec<u8> {
    let n = mesh.n_triangles();
    let mut out = Vec::with_capacity(84 + 50 * n);
    let mut header = [0u8; 80];
    header[..HEADER_TEXT.len()].copy_from_slice(HEADER_TEXT);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    let vertices = mesh.vertices();
    for tri in mesh.triangles() {
        let a = &vertices[tri[0] as usize];
        let b = &vertices[tri[1] as usize];
        let c = &vertices[tri[2] as usize];
        let cross = (b - a).cross(&(c - a));
        let norm = cross.norm();
        let unit = if norm > 0.0 { cross / norm } else { cross };
        for x in [unit.x, unit.y, unit.z] {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
        for p in [a, b, c] {
            for x in [p.x, p.y, p.z] {
                out.extend_from_slice(&((x * 1000.0) as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&[0u8, 0u8]);
    }
    out
}

/// Writes the mesh to `path` as binary STL and returns the byte count.
pub fn export_stl<P: AsRef<Path>>(mesh: &TriangleMesh, path: P) -> Result<u64> {
    let bytes = stl_bytes(mesh);
    fs::write(path, &bytes)?;
    Ok(bytes.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    fn two_triangle_mesh() -> TriangleMesh {
        TriangleMesh::from_parts(
            vec![
                Point3::new(0.001, 0.0, 0.0),
                Point3::new(0.0, 0.002, 0.0),
                Point3::new(0.0, 0.0, 0.003),
            ],
            vec![[0, 1, 2], [0, 2, 1]],
        )
    }

    #[test]
    fn empty_mesh_serializes_to_a_bare_header() {
        let bytes = stl_bytes(&TriangleMesh::empty());
        assert_eq!(bytes.len(), 84);
        assert_eq!(&bytes[80..84], &[0, 0, 0, 0], "triangle count must be zero");
    }

    #[test]
    fn size_is_84_plus_50_per_triangle() {
        let bytes = stl_bytes(&two_triangle_mesh());
        assert_eq!(bytes.len(), 184);
        assert_eq!(
            u32::from_le_bytes(bytes[80..84].try_into().unwrap()),
            2,
            "count field must match the triangle count"
        );
    }

    #[test]
    fn header_names_the_tool_and_is_zero_padded() {
        let bytes = stl_bytes(&TriangleMesh::empty());
        assert!(bytes.starts_with(HEADER_TEXT));
        assert!(
            bytes[HEADER_TEXT.len()..80].iter().all(|&b| b == 0),
            "header padding must be zeros"
        );
    }

    #[test]
    fn coordinates_are_written_in_millimeters() {
        let bytes = stl_bytes(&two_triangle_mesh());
        // First triangle record starts at byte 84; its first vertex follows
        // the 12-byte normal.
        let x = f32::from_le_bytes(bytes[96..100].try_into().unwrap());
        assert_eq!(x, 1.0, "0.001 m must serialize as 1.0 mm");
    }

    #[test]
    fn export_is_byte_identical_across_writes() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = two_triangle_mesh();
        let p1 = dir.path().join("a.stl");
        let p2 = dir.path().join("b.stl");
        let n1 = export_stl(&mesh, &p1).unwrap();
        let n2 = export_stl(&mesh, &p2).unwrap();
        assert_eq!(n1, 184);
        assert_eq!(n1, n2);
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn unwritable_path_reports_an_io_error() {
        let err = export_stl(&TriangleMesh::empty(), "/no/such/dir/out.stl").unwrap_err();
        assert!(matches!(err, crate::Error::Io(_)));
    }
}
