//! Constructors for the standard polytope families.

use super::polytope::{newell_normal, Polytope};
use crate::{Point, Result};
use std::f64::consts::PI;

/// Regular `n`-gon with unit circumradius and a vertex at `(1, 0)`.
pub fn regular_polygon(n: usize) -> Result<Polytope> {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    Polytope::polygon(&pts)
}

/// Reference simplex spanned by the origin and the unit vectors.
pub fn simplex(d: usize) -> Result<Polytope> {
    match d {
        2 => Polytope::polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        3 => convex_polyhedron(
            vec![
                Point::new(0.0, 0.0, 0.0),
                Point::new(1.0, 0.0, 0.0),
                Point::new(0.0, 1.0, 0.0),
                Point::new(0.0, 0.0, 1.0),
            ],
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        ),
        _ => Err(crate::Error::InvalidInput(format!(
            "simplex dimension {d} unsupported"
        ))),
    }
}

/// Hypercube `(-1, 1)^d`.
pub fn hypercube(d: usize) -> Result<Polytope> {
    match d {
        2 => Polytope::polygon(&[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]),
        3 => {
            let v: Vec<Point> = (0..8)
                .map(|i| {
                    let s = |b: usize| if i & b != 0 { 1.0 } else { -1.0 };
                    Point::new(s(1), s(2), s(4))
                })
                .collect();
            convex_polyhedron(
                v,
                vec![
                    vec![0, 1, 3, 2],
                    vec![4, 5, 7, 6],
                    vec![0, 1, 5, 4],
                    vec![2, 3, 7, 6],
                    vec![0, 2, 6, 4],
                    vec![1, 3, 7, 5],
                ],
            )
        }
        _ => Err(crate::Error::InvalidInput(format!(
            "hypercube dimension {d} unsupported"
        ))),
    }
}

/// Prism over the regular `n`-gon with height one.
pub fn prism(n: usize) -> Result<Polytope> {
    let mut v = Vec::with_capacity(2 * n);
    for z in [0.0, 1.0] {
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            v.push(Point::new(t.cos(), t.sin(), z));
        }
    }
    let mut faces = vec![(0..n).rev().collect::<Vec<_>>(), (n..2 * n).collect()];
    for k in 0..n {
        let k1 = (k + 1) % n;
        faces.push(vec![k, k1, n + k1, n + k]);
    }
    Polytope::new(3, v, faces)
}

/// Pyramid over the regular `n`-gon with apex `(0, 0, 1)`.
pub fn pyramid(n: usize) -> Result<Polytope> {
    let mut v: Vec<Point> = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            Point::new(t.cos(), t.sin(), 0.0)
        })
        .collect();
    v.push(Point::new(0.0, 0.0, 1.0));
    let mut faces = vec![(0..n).rev().collect::<Vec<_>>()];
    for k in 0..n {
        faces.push(vec![k, (k + 1) % n, n]);
    }
    Polytope::new(3, v, faces)
}

/// Orient every face loop of a convex polyhedron outward, then validate.
pub fn convex_polyhedron(vertices: Vec<Point>, mut faces: Vec<Vec<usize>>) -> Result<Polytope> {
    let mut c = Point::zeros();
    for p in &vertices {
        c += p;
    }
    c /= vertices.len() as f64;
    for f in &mut faces {
        let n = newell_normal(&vertices, f);
        if n.dot(&(vertices[f[0]] - c)) < 0.0 {
            f.reverse();
        }
    }
    Polytope::new(3, vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_polygon_area() {
        for n in 3..20 {
            let p = regular_polygon(n).unwrap();
            let exact = 0.5 * n as f64 * (2.0 * PI / n as f64).sin();
            assert!((p.measure() - exact).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn family_volumes() {
        assert!((hypercube(3).unwrap().measure() - 8.0).abs() < 1e-14);
        assert!((simplex(3).unwrap().measure() - 1.0 / 6.0).abs() < 1e-15);
        for n in 3..9 {
            let base = 0.5 * n as f64 * (2.0 * PI / n as f64).sin();
            assert!((prism(n).unwrap().measure() - base).abs() < 1e-14);
            assert!((pyramid(n).unwrap().measure() - base / 3.0).abs() < 1e-14);
            assert_eq!(prism(n).unwrap().euler_characteristic(), 2);
        }
    }
}
