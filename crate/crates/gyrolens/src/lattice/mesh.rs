//! Indexed triangle mesh with watertightness and volume checks.

use std::collections::HashMap;

use nalgebra::Point3;

/// Triangle mesh with shared vertices. Extraction guarantees outward-facing
/// winding, so a closed solid has positive signed volume.
#[derive(Debug, Clone, Default)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn empty() -> Self {
        Self::default()
    }

    pub(crate) fn from_parts(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Self {
        Self {
            vertices,
            triangles,
        }
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    fn triangle_vertices(&self, tri: &[u32; 3]) -> (Point3<f64>, Point3<f64>, Point3<f64>) {
        (
            self.vertices[tri[0] as usize],
            self.vertices[tri[1] as usize],
            self.vertices[tri[2] as usize],
        )
    }

    /// Total surface area, m².
    pub fn surface_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|tri| {
                let (a, b, c) = self.triangle_vertices(tri);
                (b - a).cross(&(c - a)).norm() / 2.0
            })
            .sum()
    }

    /// Signed enclosed volume by the divergence theorem, m³. Positive for a
    /// closed surface with outward-facing triangles.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|tri| {
                let (a, b, c) = self.triangle_vertices(tri);
                a.coords.dot(&b.coords.cross(&c.coords)) / 6.0
            })
            .sum()
    }

    /// True iff every undirected edge is shared by exactly two triangles,
    /// once in each direction, and no triangle is degenerate. The empty mesh
    /// is watertight.
    pub fn is_watertight(&self) -> bool {
        let mut edges: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
        for tri in &self.triangles {
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] {
                return false;
            }
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let entry = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
                if a < b {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        edges.values().all(|&(fwd, back)| fwd == 1 && back == 1)
    }

    /// One-line statistics report as CSV.
    pub fn stats_csv(&self) -> String {
        format!(
            "n_vertices,n_triangles,area_m2,volume_m3,watertight\n{},{},{:.9e},{:.9e},{}\n",
            self.n_vertices(),
            self.n_triangles(),
            self.surface_area(),
            self.signed_volume(),
            self.is_watertight()
        )
    }
}
