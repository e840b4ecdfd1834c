use crate::{Error, Point, Result};

/// Relative planarity tolerance for 3D faces.
pub const PLANARITY_TOL: f64 = 1e-12;

/// A simplex given by its `d + 1` corner points.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub points: Vec<Point>,
}

impl Simplex {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    /// Signed measure of a triangle in the plane or a tetrahedron in space.
    pub fn signed_volume(&self) -> f64 {
        let p = &self.points;
        match p.len() {
            3 => {
                let a = p[1] - p[0];
                let b = p[2] - p[0];
                0.5 * (a.x * b.y - a.y * b.x)
            }
            4 => (p[1] - p[0]).dot(&(p[2] - p[0]).cross(&(p[3] - p[0]))) / 6.0,
            _ => 0.0,
        }
    }

    pub fn centroid(&self) -> Point {
        let mut c = Point::zeros();
        for p in &self.points {
            c += p;
        }
        c / self.points.len() as f64
    }
}

/// Unnormalised Newell normal of a closed loop; its length is twice the area.
pub fn newell_normal(points: &[Point], lp: &[usize]) -> Point {
    let mut n = Point::zeros();
    for (i, &a) in lp.iter().enumerate() {
        let p = points[a];
        let q = points[lp[(i + 1) % lp.len()]];
        n.x += (p.y - q.y) * (p.z + q.z);
        n.y += (p.z - q.z) * (p.x + q.x);
        n.z += (p.x - q.x) * (p.y + q.y);
    }
    n
}

/// A closed polygon (`dim == 2`) or polyhedron (`dim == 3`) with flat facets.
///
/// In 2D `faces` holds exactly one counter-clockwise vertex loop. In 3D every
/// entry is a planar face loop ordered counter-clockwise when seen from
/// outside. An optional list of fine simplices records how the polytope was
/// agglomerated.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Point>,
    faces: Vec<Vec<usize>>,
    fine: Option<Vec<Simplex>>,
}

impl Polytope {
    /// Polygon from planar coordinates listed counter-clockwise.
    pub fn polygon(points: &[[f64; 2]]) -> Result<Self> {
        let vertices = points.iter().map(|p| Point::new(p[0], p[1], 0.0)).collect();
        Self::new(2, vertices, vec![(0..points.len()).collect()])
    }

    /// Polyhedron from coordinates and outward face loops.
    pub fn polyhedron(points: &[[f64; 3]], faces: Vec<Vec<usize>>) -> Result<Self> {
        let vertices = points
            .iter()
            .map(|p| Point::new(p[0], p[1], p[2]))
            .collect();
        Self::new(3, vertices, faces)
    }

    /// Validating constructor.
    pub fn new(dim: usize, vertices: Vec<Point>, faces: Vec<Vec<usize>>) -> Result<Self> {
        let p = Self {
            dim,
            vertices,
            faces,
            fine: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Attach the fine simplices this polytope was agglomerated from.
    pub fn with_fine(mut self, fine: Vec<Simplex>) -> Self {
        self.fine = Some(fine);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn fine(&self) -> Option<&[Simplex]> {
        self.fine.as_deref()
    }

    /// Vertex indices actually referenced by faces, in first-use order.
    pub fn used_vertices(&self) -> Vec<usize> {
        let mut seen = vec![false; self.vertices.len()];
        let mut out = Vec::new();
        for f in &self.faces {
            for &v in f {
                if !seen[v] {
                    seen[v] = true;
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn diameter(&self) -> f64 {
        let used = self.used_vertices();
        let mut d: f64 = 0.0;
        for (i, &a) in used.iter().enumerate() {
            for &b in &used[i + 1..] {
                d = d.max((self.vertices[a] - self.vertices[b]).norm());
            }
        }
        d
    }

    /// Axis-aligned bounds over the referenced vertices.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for v in self.used_vertices() {
            let p = self.vertices[v];
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if self.dim == 2 {
            lo.z = 0.0;
            hi.z = 0.0;
        }
        (lo, hi)
    }

    /// Average of the referenced vertices.
    pub fn vertex_centroid(&self) -> Point {
        let used = self.used_vertices();
        let mut c = Point::zeros();
        for &v in &used {
            c += self.vertices[v];
        }
        c / used.len() as f64
    }

    /// Area (2D) or volume (3D).
    pub fn measure(&self) -> f64 {
        let v = &self.vertices;
        if self.dim == 2 {
            let lp = &self.faces[0];
            let mut a = 0.0;
            for i in 0..lp.len() {
                let p = v[lp[i]];
                let q = v[lp[(i + 1) % lp.len()]];
                a += p.x * q.y - q.x * p.y;
            }
            0.5 * a
        } else {
            let mut vol = 0.0;
            for f in &self.faces {
                let o = v[f[0]];
                for i in 1..f.len() - 1 {
                    vol += o.dot(&v[f[i]].cross(&v[f[i + 1]]));
                }
            }
            vol / 6.0
        }
    }

    /// Unit outward normal and area of face `f` (3D) or edge `f` (2D).
    pub fn face_normal(&self, f: usize) -> (Point, f64) {
        if self.dim == 2 {
            let lp = &self.faces[0];
            let a = self.vertices[lp[f]];
            let b = self.vertices[lp[(f + 1) % lp.len()]];
            let t = b - a;
            let len = t.norm();
            (Point::new(t.y, -t.x, 0.0) / len, len)
        } else {
            let n = newell_normal(&self.vertices, &self.faces[f]);
            let len = n.norm();
            (n / len, 0.5 * len)
        }
    }

    /// Number of codimension-one facets.
    pub fn facet_count(&self) -> usize {
        if self.dim == 2 {
            self.faces[0].len()
        } else {
            self.faces.len()
        }
    }

    /// Euler characteristic `v - e + f` of the boundary surface (3D only).
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for f in &self.faces {
            for i in 0..f.len() {
                let a = f[i];
                let b = f[(i + 1) % f.len()];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.used_vertices().len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Apply a coordinate map to every vertex and fine simplex.
    pub fn map_points(&self, f: impl Fn(&Point) -> Point) -> Polytope {
        Polytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(&f).collect(),
            faces: self.faces.clone(),
            fine: self.fine.as_ref().map(|fine| {
                fine.iter()
                    .map(|s| Simplex::new(s.points.iter().map(&f).collect()))
                    .collect()
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidPolytope(format!(
                "dimension {} unsupported",
                self.dim
            )));
        }
        if self.dim == 2 && self.faces.len() != 1 {
            return Err(Error::InvalidPolytope(
                "a polygon needs exactly one vertex loop".into(),
            ));
        }
        if self.faces.is_empty() {
            return Err(Error::InvalidPolytope("no faces".into()));
        }
        for (i, p) in self.vertices.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidPolytope(format!("vertex {i} is not finite")));
            }
        }
        for (fi, f) in self.faces.iter().enumerate() {
            if f.len() < 3 {
                return Err(face_err(fi, "fewer than 3 vertices"));
            }
            for &v in f {
                if v >= self.vertices.len() {
                    return Err(face_err(fi, &format!("dangling vertex index {v}")));
                }
            }
            let mut sorted = f.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != f.len() {
                return Err(face_err(fi, "repeated vertex index"));
            }
        }
        let diam = self.diameter();
        if diam <= 0.0 {
            return Err(Error::InvalidPolytope("zero diameter".into()));
        }
        if self.dim == 2 {
            self.validate_polygon(diam)
        } else {
            self.validate_polyhedron(diam)
        }
    }

    fn validate_polygon(&self, diam: f64) -> Result<()> {
        let lp = &self.faces[0];
        let n = lp.len();
        let v = &self.vertices;
        if v.iter().any(|p| p.z != 0.0) {
            return Err(Error::InvalidPolytope("planar vertex with z != 0".into()));
        }
        if self.measure() <= 1e-14 * diam * diam {
            return Err(Error::InvalidPolytope(
                "loop is not counter-clockwise (signed area <= 0)".into(),
            ));
        }
        let eps = 1e-14 * diam * diam;
        let seg = |i: usize| (v[lp[i]], v[lp[(i + 1) % n]]);
        for i in 0..n {
            let (a, b) = seg(i);
            let (_, c) = seg((i + 1) % n);
            let u = b - a;
            let w = c - b;
            if cross2(&u, &w).abs() <= eps && u.dot(&w) < 0.0 {
                return Err(Error::InvalidPolytope(format!(
                    "loop folds back at vertex {}",
                    lp[(i + 1) % n]
                )));
            }
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (p, q) = seg(j);
                if segments_touch(&a, &b, &p, &q, eps) {
                    return Err(Error::InvalidPolytope(format!(
                        "loop self-intersects between edges {i} and {j}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_polyhedron(&self, diam: f64) -> Result<()> {
        let v = &self.vertices;
        for (fi, f) in self.faces.iter().enumerate() {
            let n = newell_normal(v, f);
            let len = n.norm();
            if len <= 1e-14 * diam * diam {
                return Err(face_err(fi, "zero area"));
            }
            let n = n / len;
            let o = v[f[0]];
            for &k in f {
                if (v[k] - o).dot(&n).abs() > PLANARITY_TOL * diam {
                    return Err(face_err(fi, "non-planar"));
                }
            }
        }
        let mut directed = std::collections::HashMap::new();
        for f in &self.faces {
            for i in 0..f.len() {
                *directed.entry((f[i], f[(i + 1) % f.len()])).or_insert(0i32) += 1;
            }
        }
        for (&(a, b), &c) in &directed {
            if directed.get(&(b, a)).copied().unwrap_or(0) != c {
                return Err(Error::InvalidPolytope(format!(
                    "surface not closed or inconsistently oriented at edge ({a}, {b})"
                )));
            }
        }
        if self.measure() <= 0.0 {
            return Err(Error::InvalidPolytope("faces are oriented inward".into()));
        }
        Ok(())
    }
}

fn face_err(face: usize, reason: &str) -> Error {
    Error::InvalidFace {
        face,
        reason: reason.to_string(),
    }
}

fn cross2(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn orient(a: &Point, b: &Point, c: &Point, eps: f64) -> i32 {
    let o = cross2(&(b - a), &(c - a));
    if o > eps {
        1
    } else if o < -eps {
        -1
    } else {
        0
    }
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: &Point, b: &Point, p: &Point, q: &Point, eps: f64) -> bool {
    let o1 = orient(a, b, p, eps);
    let o2 = orient(a, b, q, eps);
    let o3 = orient(p, q, a, eps);
    let o4 = orient(p, q, b, eps);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, p))
        || (o2 == 0 && on_segment(a, b, q))
        || (o3 == 0 && on_segment(p, q, a))
        || (o4 == 0 && on_segment(p, q, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_measure_and_normals() {
        let sq = Polytope::polygon(&[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        assert_eq!(sq.measure(), 4.0);
        let (n, len) = sq.face_normal(0);
        assert_eq!(n, Point::new(0.0, -1.0, 0.0));
        assert_eq!(len, 2.0);
    }

    #[test]
    fn clockwise_loop_rejected() {
        let r = Polytope::polygon(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);
        assert!(matches!(r, Err(Error::InvalidPolytope(_))));
    }

    #[test]
    fn bowtie_rejected() {
        let r = Polytope::polygon(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(r.is_err());
    }

    #[test]
    fn pinched_loop_rejected() {
        // Two triangles meeting at (1, 1).
        let r = Polytope::polygon(&[
            [0.0, 0.0],
            [1.0, 1.0],
            [2.0, 0.0],
            [2.0, 2.0],
            [1.0, 1.0 + 1e-300],
            [0.0, 2.0],
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn collinear_vertices_accepted() {
        let p = Polytope::polygon(&[[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
            .unwrap();
        assert!((p.measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dangling_and_nonplanar_faces_named() {
        let pts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let r = Polytope::polyhedron(
            &pts,
            vec![vec![0, 2, 1], vec![0, 1, 9], vec![0, 3, 2], vec![1, 2, 3]],
        );
        assert!(matches!(r, Err(Error::InvalidFace { face: 1, .. })));

        let pts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.1],
            [0.0, 1.0, 0.0],
            [0.5, 0.5, 1.0],
        ];
        let r = Polytope::polyhedron(
            &pts,
            vec![
                vec![0, 3, 2, 1],
                vec![0, 1, 4],
                vec![1, 2, 4],
                vec![2, 3, 4],
                vec![3, 0, 4],
            ],
        );
        assert!(matches!(r, Err(Error::InvalidFace { face: 0, .. })));
    }

    #[test]
    fn tetrahedron_volume_and_euler() {
        let pts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let t = Polytope::polyhedron(
            &pts,
            vec![vec![0, 2, 1], vec![0, 1, 3], vec![0, 3, 2], vec![1, 2, 3]],
        )
        .unwrap();
        assert!((t.measure() - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(t.euler_characteristic(), 2);
        let inward = Polytope::polyhedron(
            &pts,
            vec![vec![0, 1, 2], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]],
        );
        assert!(inward.is_err());
    }
}
