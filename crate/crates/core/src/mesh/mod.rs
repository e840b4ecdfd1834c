//! Polytopic meshes: connectivity, file I/O, structured generation and
//! agglomeration.

mod agglomerate;
mod io;
mod structured;

pub use agglomerate::agglomerate;
pub use io::{load_mesh, mesh_from_json, mesh_to_json, save_mesh};
pub use structured::{structured_mesh, unit_cube_tets, unit_square_triangles};

use crate::geometry::{newell_normal, Polytope, Simplex};
use crate::{Error, Point, Result};
use std::collections::HashMap;

/// One element: its boundary loops in global vertex ids (a single
/// counter-clockwise loop in 2D, outward face loops in 3D) and the fine
/// simplices it is made of.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshElement {
    pub loops: Vec<Vec<usize>>,
    pub fine: Vec<Vec<usize>>,
}

/// A mesh face: a segment in 2D or a planar polygon in 3D, oriented
/// outward from `owner`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshFace {
    pub vertices: Vec<usize>,
    pub owner: usize,
    pub neighbor: Option<usize>,
    /// Unit normal pointing out of `owner`.
    pub normal: Point,
    pub measure: f64,
}

/// Reference from an element to one of its faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceRef {
    pub face: usize,
    /// The element owns the face orientation; otherwise the normal flips.
    pub owner: bool,
}

#[derive(Clone, Debug)]
pub struct PolytopicMesh {
    dim: usize,
    vertices: Vec<Point>,
    elements: Vec<MeshElement>,
    polytopes: Vec<Polytope>,
    faces: Vec<MeshFace>,
    element_faces: Vec<Vec<FaceRef>>,
    convex: Vec<bool>,
}

impl PolytopicMesh {
    /// Build a mesh and derive its face connectivity.
    pub fn new(dim: usize, vertices: Vec<Point>, elements: Vec<MeshElement>) -> Result<Self> {
        let mut polytopes = Vec::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            for lp in &e.loops {
                if let Some(&v) = lp.iter().find(|&&v| v >= vertices.len()) {
                    return Err(Error::Mesh(format!(
                        "cell {i}: vertex index {v} out of range"
                    )));
                }
            }
            for s in &e.fine {
                if s.len() != dim + 1 || s.iter().any(|&v| v >= vertices.len()) {
                    return Err(Error::Mesh(format!("cell {i}: invalid fine simplex {s:?}")));
                }
            }
            polytopes.push(
                element_polytope(dim, &vertices, e)
                    .map_err(|err| Error::Mesh(format!("cell {i}: {err}")))?,
            );
        }
        let convex = polytopes.iter().map(is_convex).collect();
        let mut mesh = PolytopicMesh {
            dim,
            vertices,
            elements,
            polytopes,
            faces: Vec::new(),
            element_faces: Vec::new(),
            convex,
        };
        mesh.derive_faces()?;
        mesh.check_nonmatching()?;
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[MeshElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Element `e` as a standalone polytope with local vertex numbering.
    pub fn polytope(&self, e: usize) -> &Polytope {
        &self.polytopes[e]
    }

    pub fn faces(&self) -> &[MeshFace] {
        &self.faces
    }

    pub fn element_faces(&self, e: usize) -> &[FaceRef] {
        &self.element_faces[e]
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = &MeshFace> {
        self.faces.iter().filter(|f| f.neighbor.is_some())
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = &MeshFace> {
        self.faces.iter().filter(|f| f.neighbor.is_none())
    }

    /// Outward unit normal of face `r` as seen from its element.
    pub fn outward_normal(&self, r: FaceRef) -> Point {
        let n = self.faces[r.face].normal;
        if r.owner {
            n
        } else {
            -n
        }
    }

    /// Element across face `r`, if any.
    pub fn across(&self, r: FaceRef) -> Option<usize> {
        let f = &self.faces[r.face];
        if r.owner {
            f.neighbor
        } else {
            Some(f.owner)
        }
    }

    /// Whether element `e` is convex (non-convex agglomerates are flagged).
    pub fn is_convex(&self, e: usize) -> bool {
        self.convex[e]
    }

    pub fn total_measure(&self) -> f64 {
        self.polytopes.iter().map(|p| p.measure()).sum()
    }

    /// Element adjacency through interior faces, sorted and deduplicated.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for f in self.interior_faces() {
            let n = f.neighbor.unwrap();
            adj[f.owner].push(n);
            adj[n].push(f.owner);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    fn derive_faces(&mut self) -> Result<()> {
        let pts = &self.vertices;
        // Canonical key: sorted vertex set of the face.
        let mut groups: HashMap<Vec<usize>, Vec<(usize, Vec<usize>)>> = HashMap::new();
        let mut order: Vec<Vec<usize>> = Vec::new();
        for (e, el) in self.elements.iter().enumerate() {
            for f in element_face_loops(self.dim, el) {
                let mut key = f.clone();
                key.sort_unstable();
                let g = groups.entry(key.clone()).or_default();
                if g.is_empty() {
                    order.push(key);
                }
                g.push((e, f));
            }
        }
        let mut element_faces = vec![Vec::new(); self.elements.len()];
        let mut faces = Vec::with_capacity(order.len());
        for key in order {
            let g = &groups[&key];
            if g.len() > 2 {
                let cells: Vec<usize> = g.iter().map(|x| x.0).collect();
                return Err(Error::Mesh(format!(
                    "non-manifold face {key:?} shared by cells {cells:?}"
                )));
            }
            let (owner, lp) = &g[0];
            let neighbor = if g.len() == 2 {
                let (other, lq) = &g[1];
                if other == owner {
                    return Err(Error::Mesh(format!(
                        "cell {owner}: face {key:?} listed twice"
                    )));
                }
                if !is_reversed_cycle(lp, lq) {
                    return Err(Error::Mesh(format!(
                        "orientation mismatch on face {key:?} between cells {owner} and {other}"
                    )));
                }
                Some(*other)
            } else {
                None
            };
            let (normal, measure) = face_geometry(self.dim, pts, lp);
            let id = faces.len();
            element_faces[*owner].push(FaceRef {
                face: id,
                owner: true,
            });
            if let Some(n) = neighbor {
                element_faces[n].push(FaceRef {
                    face: id,
                    owner: false,
                });
            }
            faces.push(MeshFace {
                vertices: lp.clone(),
                owner: *owner,
                neighbor,
                normal,
                measure,
            });
        }
        self.faces = faces;
        self.element_faces = element_faces;
        Ok(())
    }

    /// Reject boundary faces that overlap another boundary face from the
    /// opposite side, which signals non-matching interfaces.
    fn check_nonmatching(&self) -> Result<()> {
        let bnd: Vec<usize> = (0..self.faces.len())
            .filter(|&i| self.faces[i].neighbor.is_none())
            .collect();
        let diam = {
            let (lo, hi) = bounds(&self.vertices);
            (hi - lo).norm()
        };
        let tol = 1e-10 * diam;
        let boxes: Vec<(Point, Point)> = bnd
            .iter()
            .map(|&i| {
                bounds(
                    &self.faces[i]
                        .vertices
                        .iter()
                        .map(|&v| self.vertices[v])
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let mut idx: Vec<usize> = (0..bnd.len()).collect();
        idx.sort_by(|&a, &b| boxes[a].0.x.total_cmp(&boxes[b].0.x));
        for (pos, &a) in idx.iter().enumerate() {
            for &b in &idx[pos + 1..] {
                if boxes[b].0.x > boxes[a].1.x + tol {
                    break;
                }
                let overlap = (0..3).all(|k| {
                    boxes[a].0[k] <= boxes[b].1[k] + tol && boxes[b].0[k] <= boxes[a].1[k] + tol
                });
                if !overlap {
                    continue;
                }
                let (fa, fb) = (&self.faces[bnd[a]], &self.faces[bnd[b]]);
                if fa.normal.dot(&fb.normal) > -1.0 + 1e-10 {
                    continue;
                }
                if (self.vertices[fb.vertices[0]] - self.vertices[fa.vertices[0]])
                    .dot(&fa.normal)
                    .abs()
                    > tol
                {
                    continue;
                }
                if self.face_overlaps(fa, fb, tol) || self.face_overlaps(fb, fa, tol) {
                    return Err(Error::Mesh(format!(
                        "non-matching face: boundary face {} of cell {} overlaps boundary face {} of cell {}",
                        bnd[a], fa.owner, bnd[b], fb.owner
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether a sample point of `g` lies strictly inside `f`.
    fn face_overlaps(&self, f: &MeshFace, g: &MeshFace, tol: f64) -> bool {
        let p = |v: usize| self.vertices[v];
        let mut samples: Vec<Point> = g.vertices.iter().map(|&v| p(v)).collect();
        let n = g.vertices.len();
        for i in 0..n {
            samples.push(0.5 * (p(g.vertices[i]) + p(g.vertices[(i + 1) % n])));
        }
        for i in 1..n.saturating_sub(1) {
            samples.push((p(g.vertices[0]) + p(g.vertices[i]) + p(g.vertices[i + 1])) / 3.0);
        }
        samples
            .iter()
            .any(|x| strictly_inside(self.dim, &self.vertices, &f.vertices, &f.normal, x, tol))
    }
}

fn bounds(pts: &[Point]) -> (Point, Point) {
    let mut lo = Point::repeat(f64::INFINITY);
    let mut hi = Point::repeat(f64::NEG_INFINITY);
    for p in pts {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn strictly_inside(
    dim: usize,
    pts: &[Point],
    lp: &[usize],
    normal: &Point,
    x: &Point,
    tol: f64,
) -> bool {
    if dim == 2 {
        let (a, b) = (pts[lp[0]], pts[lp[1]]);
        let t = b - a;
        let len = t.norm();
        let s = (x - a).dot(&t) / len;
        let off = (x - a - t * (s / len)).norm();
        return off <= tol && s > tol && s < len - tol;
    }
    // Distance to every edge must exceed the tolerance.
    let n = lp.len();
    for i in 0..n {
        let (a, b) = (pts[lp[i]], pts[lp[(i + 1) % n]]);
        let t = b - a;
        let s = ((x - a).dot(&t) / t.norm_squared()).clamp(0.0, 1.0);
        if (x - a - t * s).norm() <= tol {
            return false;
        }
    }
    // Winding number of the projected loop around `x`.
    let (u, v) = plane_axes(normal);
    let proj = |p: &Point| ((p - x).dot(&u), (p - x).dot(&v));
    let mut angle = 0.0;
    for i in 0..n {
        let (ax, ay) = proj(&pts[lp[i]]);
        let (bx, by) = proj(&pts[lp[(i + 1) % n]]);
        angle += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    angle.abs() > std::f64::consts::PI
}

fn plane_axes(n: &Point) -> (Point, Point) {
    let helper = if n.x.abs() < 0.9 {
        Point::x()
    } else {
        Point::y()
    };
    let u = n.cross(&helper).normalize();
    (u, n.cross(&u))
}

fn is_reversed_cycle(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a.len();
    if n == 2 {
        return a[0] == b[1] && a[1] == b[0];
    }
    let Some(start) = b.iter().position(|&v| v == a[0]) else {
        return false;
    };
    (0..n).all(|i| a[i] == b[(start + n - i) % n])
}

/// Faces of an element as vertex loops: edges of the loop in 2D.
fn element_face_loops(dim: usize, el: &MeshElement) -> Vec<Vec<usize>> {
    if dim == 2 {
        let lp = &el.loops[0];
        (0..lp.len())
            .map(|i| vec![lp[i], lp[(i + 1) % lp.len()]])
            .collect()
    } else {
        el.loops.clone()
    }
}

fn face_geometry(dim: usize, pts: &[Point], lp: &[usize]) -> (Point, f64) {
    if dim == 2 {
        let t = pts[lp[1]] - pts[lp[0]];
        let len = t.norm();
        (Point::new(t.y / len, -t.x / len, 0.0), len)
    } else {
        let n = newell_normal(pts, lp);
        let len = n.norm();
        (n / len, 0.5 * len)
    }
}

fn element_polytope(dim: usize, pts: &[Point], el: &MeshElement) -> Result<Polytope> {
    if dim == 2 && el.loops.len() != 1 {
        return Err(Error::Mesh("planar cell needs exactly one loop".into()));
    }
    let mut local = HashMap::new();
    let mut verts = Vec::new();
    let mut loops = Vec::with_capacity(el.loops.len());
    for lp in &el.loops {
        let mut out = Vec::with_capacity(lp.len());
        for &v in lp {
            let id = *local.entry(v).or_insert_with(|| {
                verts.push(pts[v]);
                verts.len() - 1
            });
            out.push(id);
        }
        loops.push(out);
    }
    let mut p = Polytope::new(dim, verts, loops)?;
    if !el.fine.is_empty() {
        let fine = el
            .fine
            .iter()
            .map(|s| Simplex::new(s.iter().map(|&v| pts[v]).collect()))
            .collect();
        p = p.with_fine(fine);
    }
    Ok(p)
}

fn is_convex(p: &Polytope) -> bool {
    let v = p.vertices();
    let tol = 1e-10 * p.diameter();
    if p.dim() == 2 {
        let lp = &p.faces()[0];
        let n = lp.len();
        return (0..n).all(|i| {
            let a = v[lp[i]];
            let b = v[lp[(i + 1) % n]];
            let c = v[lp[(i + 2) % n]];
            let (s, t) = (b - a, c - b);
            s.x * t.y - s.y * t.x >= -tol * (s.norm() + t.norm())
        });
    }
    if p.euler_characteristic() != 2 {
        return false;
    }
    let used = p.used_vertices();
    (0..p.faces().len()).all(|f| {
        let (n, _) = p.face_normal(f);
        let o = v[p.faces()[f][0]];
        used.iter().all(|&u| (v[u] - o).dot(&n) <= tol)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts2(c: &[[f64; 2]]) -> Vec<Point> {
        c.iter().map(|p| Point::new(p[0], p[1], 0.0)).collect()
    }

    #[test]
    fn single_square() {
        let m = PolytopicMesh::new(
            2,
            pts2(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
            vec![MeshElement {
                loops: vec![vec![0, 1, 2, 3]],
                fine: vec![],
            }],
        )
        .unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.boundary_faces().count(), 4);
        assert_eq!(m.interior_faces().count(), 0);
    }

    #[test]
    fn two_triangles_share_diagonal() {
        let m = PolytopicMesh::new(
            2,
            pts2(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
            vec![
                MeshElement {
                    loops: vec![vec![0, 1, 2]],
                    fine: vec![],
                },
                MeshElement {
                    loops: vec![vec![0, 2, 3]],
                    fine: vec![],
                },
            ],
        )
        .unwrap();
        assert_eq!(m.interior_faces().count(), 1);
        assert_eq!(m.boundary_faces().count(), 4);
        let f = m.interior_faces().next().unwrap();
        assert_eq!((f.owner, f.neighbor), (0, Some(1)));
        assert!((f.normal - Point::new(-1.0, 1.0, 0.0).normalize()).norm() < 1e-15);
    }

    #[test]
    fn errors_are_named() {
        let p = pts2(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [2.0, 0.5]]);
        let bad = PolytopicMesh::new(
            2,
            p.clone(),
            vec![MeshElement {
                loops: vec![vec![0, 1, 7]],
                fine: vec![],
            }],
        );
        assert!(bad.unwrap_err().to_string().contains("cell 0"));
        // Three consistently oriented triangles.
        let r = PolytopicMesh::new(
            2,
            pts2(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, -1.0]]),
            vec![
                MeshElement {
                    loops: vec![vec![0, 1, 2]],
                    fine: vec![],
                },
                MeshElement {
                    loops: vec![vec![0, 2, 3]],
                    fine: vec![],
                },
                MeshElement {
                    loops: vec![vec![4, 1, 0]],
                    fine: vec![],
                },
            ],
        );
        assert!(r.is_ok());
        // Hanging vertex: square on the left, two triangles on the right
        // split the shared edge at its midpoint.
        let pts = pts2(&[
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [1.0, 0.5],
            [2.0, 0.5],
        ]);
        let r = PolytopicMesh::new(
            2,
            pts,
            vec![
                MeshElement {
                    loops: vec![vec![0, 1, 2, 3]],
                    fine: vec![],
                },
                MeshElement {
                    loops: vec![vec![1, 5, 4]],
                    fine: vec![],
                },
                MeshElement {
                    loops: vec![vec![4, 5, 2]],
                    fine: vec![],
                },
            ],
        );
        assert!(r.unwrap_err().to_string().contains("non-matching"));
    }

    #[test]
    fn orientation_mismatch_and_nonmanifold() {
        let p = pts2(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, 0.0]]);
        // Two copies of the same triangle.
        let r = PolytopicMesh::new(
            2,
            p,
            vec![
                MeshElement {
                    loops: vec![vec![0, 1, 2]],
                    fine: vec![],
                },
                MeshElement {
                    loops: vec![vec![0, 1, 2]],
                    fine: vec![],
                },
            ],
        );
        assert!(r.unwrap_err().to_string().contains("orientation mismatch"));
    }
}
