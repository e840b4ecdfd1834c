use super::polytope::{newell_normal, Polytope};
use crate::{Error, Point, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;
use std::ops::Range;

/// One facet of the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct FacetNode {
    /// Dimension of the facet; the empty facet has dimension -1.
    pub dim: i8,
    /// Vertex indices of the facet. For faces and edges this follows the
    /// boundary loop, so `vertices[0]` is the facet's first vertex.
    pub vertices: Vec<usize>,
    /// Range into [`FacetLattice::edges`] of the edges leaving this node.
    pub child_edges: Range<usize>,
}

/// Boundary-inclusion edge from a facet to one of its boundary facets.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeEdge {
    pub parent: usize,
    pub child: usize,
    /// Unit outward co-normal of the child inside the parent's affine hull.
    /// Zero for edges into the empty facet.
    pub conormal: Point,
    /// A point of the child facet.
    pub anchor: Point,
}

/// Affine frame of a facet: `origin + span(spans)`.
#[derive(Clone, Debug)]
pub struct HyperplaneFrame {
    pub origin: Point,
    pub spans: Vec<Point>,
}

/// Node and edge counts under both conventions for the empty facet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeCounts {
    /// Facets of dimension `0..=d`.
    pub facets: usize,
    /// Edges between facets of dimension `0..=d`.
    pub incidences: usize,
    /// Number of vertices, i.e. edges into the empty facet when it is present.
    pub empty_incidences: usize,
}

impl LatticeCounts {
    pub fn with_empty(&self) -> (usize, usize) {
        (self.facets + 1, self.incidences + self.empty_incidences)
    }

    pub fn without_empty(&self) -> (usize, usize) {
        (self.facets, self.incidences)
    }
}

/// The facet DAG of a polytope. Node 0 is the polytope itself and nodes are
/// listed parents before children.
#[derive(Clone, Debug)]
pub struct FacetLattice {
    dim: usize,
    points: Vec<Point>,
    nodes: Vec<FacetNode>,
    edges: Vec<LatticeEdge>,
    empty: Option<usize>,
    diameter: f64,
}

/// Build the facet lattice of `polytope`, optionally with the empty facet.
pub fn build_facet_lattice(polytope: &Polytope, include_empty: bool) -> Result<FacetLattice> {
    let pts = polytope.vertices().to_vec();
    let mut b = Builder {
        pts: &pts,
        nodes: Vec::new(),
        pending: Vec::new(),
    };
    if polytope.dim() == 2 {
        let lp = &polytope.faces()[0];
        let n = lp.len();
        b.push_node(2, lp.clone());
        let mut vmap = HashMap::new();
        let edge_ids: Vec<usize> = (0..n)
            .map(|i| b.push_node(1, vec![lp[i], lp[(i + 1) % n]]))
            .collect();
        for &v in lp {
            vmap.insert(v, b.push_node(0, vec![v]));
        }
        let z = Point::z();
        for (i, &e) in edge_ids.iter().enumerate() {
            let (a, c) = (lp[i], lp[(i + 1) % n]);
            let t = (pts[c] - pts[a]).normalize();
            b.pending.push((0, e, t.cross(&z), pts[a]));
            b.edge_to_vertices(e, a, c, &vmap);
        }
    } else {
        let faces = polytope.faces();
        let top_vertices = polytope.used_vertices();
        b.push_node(3, top_vertices);
        let face_ids: Vec<usize> = faces.iter().map(|f| b.push_node(2, f.clone())).collect();
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_order = Vec::new();
        for f in faces {
            for i in 0..f.len() {
                let (a, c) = (f[i], f[(i + 1) % f.len()]);
                let key = (a.min(c), a.max(c));
                if let std::collections::hash_map::Entry::Vacant(slot) = edge_map.entry(key) {
                    let id = b.push_node(1, vec![a, c]);
                    slot.insert(id);
                    edge_order.push(id);
                }
            }
        }
        let mut vmap = HashMap::new();
        for &e in &edge_order {
            for k in 0..2 {
                let v = b.nodes[e].vertices[k];
                if let std::collections::hash_map::Entry::Vacant(slot) = vmap.entry(v) {
                    slot.insert(b.push_node(0, vec![v]));
                }
            }
        }
        for (fi, f) in faces.iter().enumerate() {
            let nrm = newell_normal(&pts, f).normalize();
            b.pending.push((0, face_ids[fi], nrm, pts[f[0]]));
            for i in 0..f.len() {
                let (a, c) = (f[i], f[(i + 1) % f.len()]);
                let t = (pts[c] - pts[a]).normalize();
                let e = edge_map[&(a.min(c), a.max(c))];
                b.pending.push((face_ids[fi], e, t.cross(&nrm), pts[a]));
            }
        }
        for &e in &edge_order {
            let (a, c) = (b.nodes[e].vertices[0], b.nodes[e].vertices[1]);
            b.edge_to_vertices(e, a, c, &vmap);
        }
    }
    let mut empty = None;
    if include_empty {
        let id = b.push_node(-1, Vec::new());
        for v in 0..b.nodes.len() {
            if b.nodes[v].dim == 0 {
                let p = pts[b.nodes[v].vertices[0]];
                b.pending.push((v, id, Point::zeros(), p));
            }
        }
        empty = Some(id);
    }
    // Stable sort keeps the per-parent child order of insertion.
    let mut pending = std::mem::take(&mut b.pending);
    pending.sort_by_key(|e| e.0);
    let mut nodes = b.nodes;
    let mut edges = Vec::with_capacity(pending.len());
    let mut start = 0;
    for (idx, node) in nodes.iter_mut().enumerate() {
        while start < pending.len() && pending[start].0 < idx {
            start += 1;
        }
        let begin = edges.len();
        while start < pending.len() && pending[start].0 == idx {
            let (parent, child, conormal, anchor) = pending[start];
            edges.push(LatticeEdge {
                parent,
                child,
                conormal,
                anchor,
            });
            start += 1;
        }
        node.child_edges = begin..edges.len();
    }
    Ok(FacetLattice {
        dim: polytope.dim(),
        points: pts.clone(),
        nodes,
        edges,
        empty,
        diameter: polytope.diameter(),
    })
}

/// `(|V|, |E|)` of the lattice as built, with the empty facet if present.
pub fn lattice_counts(lattice: &FacetLattice) -> (usize, usize) {
    (lattice.nodes.len(), lattice.edges.len())
}

struct Builder<'a> {
    pts: &'a [Point],
    nodes: Vec<FacetNode>,
    pending: Vec<(usize, usize, Point, Point)>,
}

impl Builder<'_> {
    fn push_node(&mut self, dim: i8, vertices: Vec<usize>) -> usize {
        self.nodes.push(FacetNode {
            dim,
            vertices,
            child_edges: 0..0,
        });
        self.nodes.len() - 1
    }

    fn edge_to_vertices(&mut self, e: usize, a: usize, c: usize, vmap: &HashMap<usize, usize>) {
        let t = (self.pts[c] - self.pts[a]).normalize();
        self.pending.push((e, vmap[&a], -t, self.pts[a]));
        self.pending.push((e, vmap[&c], t, self.pts[c]));
    }
}

impl FacetLattice {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn nodes(&self) -> &[FacetNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[LatticeEdge] {
        &self.edges
    }

    pub fn node(&self, id: usize) -> &FacetNode {
        &self.nodes[id]
    }

    pub fn children(&self, id: usize) -> &[LatticeEdge] {
        &self.edges[self.nodes[id].child_edges.clone()]
    }

    /// Id of the polytope itself.
    pub fn top(&self) -> usize {
        0
    }

    pub fn empty(&self) -> Option<usize> {
        self.empty
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Counts under both empty-facet conventions.
    pub fn counts(&self) -> LatticeCounts {
        let facets = self.nodes.iter().filter(|n| n.dim >= 0).count();
        let vertices = self.nodes.iter().filter(|n| n.dim == 0).count();
        let incidences = self
            .edges
            .iter()
            .filter(|e| self.nodes[e.child].dim >= 0)
            .count();
        LatticeCounts {
            facets,
            incidences,
            empty_incidences: vertices,
        }
    }

    /// Number of facets of dimension `k`.
    pub fn count_dim(&self, k: i8) -> usize {
        self.nodes.iter().filter(|n| n.dim == k).count()
    }

    /// Signed distance from `x` to the hyperplane of the child of `edge`
    /// within the parent's hull, positive along the outward co-normal.
    pub fn signed_distance(&self, edge: usize, x: &Point) -> f64 {
        let e = &self.edges[edge];
        (e.anchor - x).dot(&e.conormal)
    }

    /// Affine frame of node `id`.
    pub fn frame(&self, id: usize) -> Result<HyperplaneFrame> {
        let node = &self.nodes[id];
        let k = node.dim.max(0) as usize;
        let origin = self.points[node.vertices[0]];
        let tol = 1e-10 * self.diameter;
        let mut spans: Vec<Point> = Vec::with_capacity(k);
        let mut ortho: Vec<Point> = Vec::with_capacity(k);
        for &v in &node.vertices[1..] {
            if spans.len() == k {
                break;
            }
            let s = self.points[v] - origin;
            let mut r = s;
            for q in &ortho {
                r -= q * q.dot(&r);
            }
            let len = r.norm();
            if len > tol {
                spans.push(s);
                ortho.push(r / len);
            }
        }
        if spans.len() < k {
            return Err(Error::DegenerateFacet { facet: id });
        }
        Ok(HyperplaneFrame { origin, spans })
    }

    /// Distance from `x` to the affine hull of node `id` by the normal
    /// equations `A t = f`, together with the operation count used.
    pub fn least_squares_distance(&self, id: usize, x: &Point) -> Result<(f64, u64)> {
        let fr = self.frame(id)?;
        let k = fr.spans.len();
        let d = self.dim as u64;
        let r0 = fr.origin - x;
        if k == 0 {
            return Ok((r0.norm(), 3 * d));
        }
        let a = DMatrix::from_fn(k, k, |i, j| fr.spans[i].dot(&fr.spans[j]));
        let f = DVector::from_fn(k, |i, _| -fr.spans[i].dot(&r0));
        let t = a
            .lu()
            .solve(&f)
            .ok_or(Error::DegenerateFacet { facet: id })?;
        let mut r = r0;
        for i in 0..k {
            r += fr.spans[i] * t[i];
        }
        let kk = k as u64;
        let flops = kk * kk * (2 * d - 1) + kk * 2 * d + kk * kk * kk + 2 * kk * d + 3 * d;
        Ok((r.norm(), flops))
    }
}
