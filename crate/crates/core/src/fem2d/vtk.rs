//! Legacy VTK ASCII export of triangle meshes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::fem2d::mesh::TriMesh;

const VTK_TRIANGLE: u8 = 5;

/// Unstructured grid with a per-vertex `boundary` flag and a per-cell
/// `region` code.
pub fn to_vtk_string(mesh: &TriMesh, title: &str) -> String {
    let n = mesh.vertex_count();
    let m = mesh.triangle_count();
    let mut s = String::with_capacity(64 * (n + m));
    let title = title.lines().next().unwrap_or("");
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n} double");
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:e} {:e} 0", v[0], v[1]);
    }
    let _ = writeln!(s, "CELLS {m} {}", 4 * m);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {m}");
    for _ in 0..m {
        let _ = writeln!(s, "{VTK_TRIANGLE}");
    }
    let _ = writeln!(s, "POINT_DATA {n}\nSCALARS boundary int 1\nLOOKUP_TABLE default");
    for &b in &mesh.boundary {
        let _ = writeln!(s, "{}", u8::from(b));
    }
    let _ = writeln!(s, "CELL_DATA {m}\nSCALARS region int 1\nLOOKUP_TABLE default");
    for r in &mesh.regions {
        let _ = writeln!(s, "{}", r.code());
    }
    s
}

pub fn write_vtk(mesh: &TriMesh, title: &str, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(to_vtk_string(mesh, title).as_bytes())?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem2d::mesh::{mesh_rectilinear, MeshOptions};
    use crate::geometry::RectilinearPolygon;

    #[test]
    fn square_layout() {
        let m = mesh_rectilinear(&RectilinearPolygon::unit_square(), &MeshOptions::uniform(0.5)).unwrap();
        let s = to_vtk_string(&m, "square");
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");
        assert_eq!(lines[4], "POINTS 9 double");
        assert_eq!(lines[14], "CELLS 8 32");
        assert!(s.contains("CELL_TYPES 8\n5\n"));
        assert!(s.contains("POINT_DATA 9\nSCALARS boundary int 1"));
        // only the centre vertex is interior
        let flags: Vec<&str> = s.split("LOOKUP_TABLE default\n").nth(1).unwrap().lines().take(9).collect();
        assert_eq!(flags.iter().filter(|f| **f == "0").count(), 1);
    }
}
