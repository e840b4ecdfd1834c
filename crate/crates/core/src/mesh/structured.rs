//! Structured simplicial meshes of the unit square and cube.

use super::{MeshElement, PolytopicMesh};
use crate::geometry::Simplex;
use crate::{Error, Point, Result};

/// `n × n` squares, each cut along its main diagonal: `2n²` triangles.
pub fn unit_square_triangles(n: usize) -> Result<PolytopicMesh> {
    if n == 0 {
        return Err(Error::Mesh("grid size must be positive".into()));
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 / n as f64, j as f64 / n as f64, 0.0));
        }
    }
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            for t in [vec![a, b, c], vec![a, c, d]] {
                elements.push(MeshElement {
                    loops: vec![t.clone()],
                    fine: vec![t],
                });
            }
        }
    }
    PolytopicMesh::new(2, vertices, elements)
}

/// `n³` cubes, each split into six tetrahedra along the main diagonal.
pub fn unit_cube_tets(n: usize) -> Result<PolytopicMesh> {
    if n == 0 {
        return Err(Error::Mesh("grid size must be positive".into()));
    }
    let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point::new(i as f64 * h, j as f64 * h, k as f64 * h));
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut elements = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut tet = vec![id(c[0], c[1], c[2])];
                    for &axis in &perm {
                        c[axis] += 1;
                        tet.push(id(c[0], c[1], c[2]));
                    }
                    elements.push(tet_element(&vertices, tet));
                }
            }
        }
    }
    PolytopicMesh::new(3, vertices, elements)
}

/// Structured mesh at refinement `level`: `32·4^level` triangles in 2D,
/// `6·8^level` tetrahedra in 3D.
pub fn structured_mesh(dim: usize, level: u32) -> Result<PolytopicMesh> {
    match dim {
        2 => unit_square_triangles(4 << level),
        3 => unit_cube_tets(1 << level),
        _ => Err(Error::Mesh(format!("unsupported dimension {dim}"))),
    }
}

/// Positively oriented tetrahedron with outward face loops.
pub(crate) fn tet_element(pts: &[Point], mut tet: Vec<usize>) -> MeshElement {
    let vol = Simplex::new(tet.iter().map(|&v| pts[v]).collect()).signed_volume();
    if vol < 0.0 {
        tet.swap(2, 3);
    }
    let [a, b, c, d] = [tet[0], tet[1], tet[2], tet[3]];
    MeshElement {
        loops: vec![vec![a, c, b], vec![a, b, d], vec![a, d, c], vec![b, c, d]],
        fine: vec![tet],
    }
}
