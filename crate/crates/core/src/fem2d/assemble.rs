use crate::error::{Error, Result};
use crate::fem2d::mesh::TriMesh;
use crate::fem2d::sparse::SparseSymMatrix;

/// P1 stiffness `∫∇φᵢ·∇φⱼ` and consistent mass `∫φᵢφⱼ` matrices.
pub fn assemble(mesh: &TriMesh) -> Result<(SparseSymMatrix, SparseSymMatrix)> {
    let n = mesh.vertex_count();
    let mut k_trip = Vec::with_capacity(6 * mesh.triangle_count());
    let mut m_trip = Vec::with_capacity(6 * mesh.triangle_count());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.vertices[i]);
        let area = mesh.triangle_area(t);
        if !(area > 0.0) {
            return Err(Error::DegenerateTriangle { index: t, area });
        }
        // ∇φ_a = (y_b − y_c, x_c − x_b) / 2A for (a, b, c) cyclic
        let grads: [[f64; 2]; 3] = std::array::from_fn(|a| {
            let b = p[(a + 1) % 3];
            let c = p[(a + 2) % 3];
            [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)]
        });
        for a in 0..3 {
            for b in 0..3 {
                let (i, j) = (tri[a], tri[b]);
                if j > i {
                    continue;
                }
                let k = area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                let m = if a == b { area / 6.0 } else { area / 12.0 };
                k_trip.push((i, j, k));
                m_trip.push((i, j, m));
            }
        }
    }
    Ok((
        SparseSymMatrix::from_lower_triplets(n, k_trip),
        SparseSymMatrix::from_lower_triplets(n, m_trip),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem2d::mesh::{mesh_rectilinear, MeshOptions};
    use crate::geometry::{build_dumbbell, DumbbellParams, RectilinearPolygon};

    #[test]
    fn unit_square_identities() {
        let m = mesh_rectilinear(&RectilinearPolygon::unit_square(), &MeshOptions::uniform(1.0 / 8.0)).unwrap();
        let (k, mass) = assemble(&m).unwrap();
        assert!((mass.sum_entries() - 1.0).abs() < 1e-12);
        let ones = vec![1.0; m.vertex_count()];
        assert!(k.matvec(&ones).iter().all(|v| v.abs() < 1e-12));
        let x: Vec<f64> = m.vertices.iter().map(|v| v[0]).collect();
        assert!((k.inner(&x, &x) - 1.0).abs() < 1e-12);
        assert!(k.is_symmetric(0.0) && mass.is_symmetric(0.0));
    }

    #[test]
    fn dumbbell_patch_test() {
        let p = DumbbellParams::new(0.25, 0.05).unwrap();
        let poly = build_dumbbell(&p);
        let m = mesh_rectilinear(&poly, &MeshOptions::dumbbell(&p, 0.125, 2)).unwrap();
        let (k, mass) = assemble(&m).unwrap();
        assert!((mass.sum_entries() - poly.area()).abs() < 1e-12);
        // v = 2x - 3y has |∇v|² = 13
        let v: Vec<f64> = m.vertices.iter().map(|q| 2.0 * q[0] - 3.0 * q[1]).collect();
        assert!((k.inner(&v, &v) - 13.0 * poly.area()).abs() < 1e-11);
    }

    #[test]
    fn degenerate_triangle_is_reported() {
        let m = mesh_rectilinear(&RectilinearPolygon::unit_square(), &MeshOptions::uniform(0.5)).unwrap();
        let mut bad = m.clone();
        bad.triangles[3] = [0, 1, 2];
        let err = assemble(&bad).unwrap_err();
        assert!(matches!(err, Error::DegenerateTriangle { .. }), "{err}");
    }
}
