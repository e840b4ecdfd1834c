//! JSON mesh files.
//!
//! Planar meshes list each cell as a counter-clockwise vertex loop.
//! Solid meshes list oriented face loops under `faces` and each cell as
//! the indices of its outward faces; a face shared by two cells is listed
//! once per cell. `fine_of` optionally gives each cell's fine simplices.

use super::{MeshElement, PolytopicMesh};
use crate::{Error, Point, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct MeshFile {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    faces: Option<Vec<Vec<usize>>>,
    cells: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fine_of: Option<Vec<Vec<Vec<usize>>>>,
}

pub fn mesh_from_json(text: &str) -> Result<PolytopicMesh> {
    let file: MeshFile = serde_json::from_str(text)?;
    let dim = file.dim;
    if dim != 2 && dim != 3 {
        return Err(Error::Mesh(format!("unsupported dimension {dim}")));
    }
    let mut vertices = Vec::with_capacity(file.vertices.len());
    for (i, v) in file.vertices.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::Mesh(format!(
                "vertex {i}: expected {dim} coordinates, found {}",
                v.len()
            )));
        }
        vertices.push(Point::new(v[0], v[1], if dim == 3 { v[2] } else { 0.0 }));
    }
    if let Some(f) = &file.fine_of {
        if f.len() != file.cells.len() {
            return Err(Error::Mesh(format!(
                "fine_of has {} entries for {} cells",
                f.len(),
                file.cells.len()
            )));
        }
    }
    let mut elements = Vec::with_capacity(file.cells.len());
    for (c, cell) in file.cells.iter().enumerate() {
        let loops = if dim == 2 {
            vec![cell.clone()]
        } else {
            let faces = file
                .faces
                .as_ref()
                .ok_or_else(|| Error::Mesh("solid mesh needs a faces list".into()))?;
            cell.iter()
                .map(|&f| {
                    faces.get(f).cloned().ok_or_else(|| {
                        Error::Mesh(format!("cell {c}: face index {f} out of range"))
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        let fine = file
            .fine_of
            .as_ref()
            .map(|f| f[c].clone())
            .unwrap_or_default();
        elements.push(MeshElement { loops, fine });
    }
    PolytopicMesh::new(dim, vertices, elements)
}

pub fn mesh_to_json(mesh: &PolytopicMesh) -> Result<String> {
    let dim = mesh.dim();
    let vertices = mesh
        .vertices()
        .iter()
        .map(|p| p.as_slice()[..dim].to_vec())
        .collect();
    let (faces, cells) = if dim == 2 {
        (
            None,
            mesh.elements().iter().map(|e| e.loops[0].clone()).collect(),
        )
    } else {
        let mut faces = Vec::new();
        let mut cells = Vec::with_capacity(mesh.len());
        for e in mesh.elements() {
            let mut ids = Vec::with_capacity(e.loops.len());
            for lp in &e.loops {
                ids.push(faces.len());
                faces.push(lp.clone());
            }
            cells.push(ids);
        }
        (Some(faces), cells)
    };
    let fine_of = if mesh.elements().iter().any(|e| !e.fine.is_empty()) {
        Some(mesh.elements().iter().map(|e| e.fine.clone()).collect())
    } else {
        None
    };
    Ok(serde_json::to_string_pretty(&MeshFile {
        dim,
        vertices,
        faces,
        cells,
        fine_of,
    })?)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolytopicMesh> {
    mesh_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_mesh(mesh: &PolytopicMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, mesh_to_json(mesh)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_mesh;

    #[test]
    fn square_file() {
        let m =
            mesh_from_json(r#"{"dim":2,"vertices":[[0,0],[1,0],[1,1],[0,1]],"cells":[[0,1,2,3]]}"#)
                .unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.boundary_faces().count(), 4);
    }

    #[test]
    fn corrupt_index_names_cell() {
        let e =
            mesh_from_json(r#"{"dim":2,"vertices":[[0,0],[1,0],[1,1]],"cells":[[0,1,2],[0,2,9]]}"#)
                .unwrap_err();
        assert!(e.to_string().contains("cell 1"), "{e}");
    }

    #[test]
    fn round_trip_is_exact() {
        for dim in [2, 3] {
            let m = structured_mesh(dim, 1).unwrap();
            let back = mesh_from_json(&mesh_to_json(&m).unwrap()).unwrap();
            assert_eq!(back.elements(), m.elements());
            assert_eq!(back.vertices(), m.vertices());
            assert_eq!(back.faces(), m.faces());
        }
    }
}
