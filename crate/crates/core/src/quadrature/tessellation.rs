use super::gauss::{duffy_simplex_rule, gauss_legendre_1d};
use crate::geometry::{Polytope, Simplex};
use crate::homint::MonomialSet;
use crate::{Error, Point, Result};
use std::io::Write;

/// Points and weights of a composite rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Total degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Write `x, y, z, w` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "y", "z", "w"])?;
        for (p, &wt) in self.points.iter().zip(&self.weights) {
            wr.write_record([p.x, p.y, p.z, wt].map(|v| format!("{v:e}")))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// How a polytope is split into simplices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TessellationMode {
    /// Fan from the first vertex.
    FanFirstVertex,
    /// Fan from the centroid.
    FanCentroid,
    /// Fine simplices stored with an agglomerated element.
    Inherited,
}

#[derive(Clone, Debug)]
pub struct SubTessellation {
    pub simplices: Vec<Simplex>,
    pub mode: TessellationMode,
}

impl SubTessellation {
    pub fn measure(&self) -> f64 {
        self.simplices.iter().map(|s| s.signed_volume()).sum()
    }
}

/// Split `p` into positively oriented simplices. Degenerate fan simplices
/// (from collinear or coplanar vertices) are dropped.
pub fn subtessellate(p: &Polytope, mode: TessellationMode) -> Result<SubTessellation> {
    let v = p.vertices();
    let scale = p.diameter().powi(p.dim() as i32);
    let mut raw: Vec<Simplex> = Vec::new();
    match (mode, p.dim()) {
        (TessellationMode::Inherited, _) => {
            let fine = p
                .fine()
                .ok_or_else(|| Error::InvalidInput("polytope carries no fine simplices".into()))?;
            raw.extend(fine.iter().cloned());
        }
        (TessellationMode::FanFirstVertex, 2) => {
            let lp = &p.faces()[0];
            for i in 1..lp.len() - 1 {
                raw.push(Simplex::new(vec![v[lp[0]], v[lp[i]], v[lp[i + 1]]]));
            }
        }
        (TessellationMode::FanCentroid, 2) => {
            let lp = &p.faces()[0];
            let c = area_centroid(p);
            for i in 0..lp.len() {
                raw.push(Simplex::new(vec![c, v[lp[i]], v[lp[(i + 1) % lp.len()]]]));
            }
        }
        (mode, _) => {
            let (apex, skip) = match mode {
                TessellationMode::FanFirstVertex => {
                    let a = p.faces()[0][0];
                    (v[a], Some(a))
                }
                _ => (p.vertex_centroid(), None),
            };
            for f in p.faces() {
                if skip.is_some_and(|a| f.contains(&a)) {
                    continue;
                }
                for i in 1..f.len() - 1 {
                    raw.push(Simplex::new(vec![apex, v[f[0]], v[f[i]], v[f[i + 1]]]));
                }
            }
        }
    }
    let mut simplices = Vec::with_capacity(raw.len());
    for (index, s) in raw.into_iter().enumerate() {
        let vol = s.signed_volume();
        if vol < -1e-13 * scale {
            return Err(Error::NegativeSimplex { index, volume: vol });
        }
        if vol > 1e-13 * scale {
            simplices.push(s);
        }
    }
    Ok(SubTessellation { simplices, mode })
}

fn area_centroid(p: &Polytope) -> Point {
    let v = p.vertices();
    let lp = &p.faces()[0];
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    let o = v[lp[0]];
    for i in 0..lp.len() {
        let s = v[lp[i]] - o;
        let t = v[lp[(i + 1) % lp.len()]] - o;
        let cr = s.x * t.y - t.x * s.y;
        a += cr;
        cx += (s.x + t.x) * cr;
        cy += (s.y + t.y) * cr;
    }
    o + Point::new(cx / (3.0 * a), cy / (3.0 * a), 0.0)
}

/// `(q+1)^d`-point rule on a `d`-simplex.
pub fn simplex_rule(s: &Simplex, q: usize) -> QuadratureRule {
    let d = s.points.len() - 1;
    let r = duffy_simplex_rule(q, d);
    let p0 = s.points[0];
    let edges: Vec<Point> = s.points[1..].iter().map(|p| p - p0).collect();
    let jac = match d {
        2 => (edges[0].x * edges[1].y - edges[0].y * edges[1].x).abs(),
        _ => edges[0].dot(&edges[1].cross(&edges[2])).abs(),
    };
    let points = r
        .points
        .iter()
        .map(|x| {
            let mut y = p0;
            for k in 0..d {
                y += edges[k] * x[k];
            }
            y
        })
        .collect();
    QuadratureRule {
        dim: d,
        points,
        weights: r.weights.iter().map(|w| w * jac).collect(),
        degree: r.degree,
    }
}

/// Duffy rule on a triangle embedded in space (for planar faces).
pub fn triangle_rule_3d(a: &Point, b: &Point, c: &Point, q: usize) -> QuadratureRule {
    let r = duffy_simplex_rule(q, 2);
    let (u, v) = (b - a, c - a);
    let jac = u.cross(&v).norm();
    QuadratureRule {
        dim: 2,
        points: r.points.iter().map(|x| a + u * x.x + v * x.y).collect(),
        weights: r.weights.iter().map(|w| w * jac).collect(),
        degree: r.degree,
    }
}

/// `n`-point Gauss rule on the segment `[a, b]`.
pub fn segment_rule(a: &Point, b: &Point, n: usize) -> QuadratureRule {
    let g = gauss_legendre_1d(n);
    let half = 0.5 * (b - a).norm();
    QuadratureRule {
        dim: 1,
        points: g
            .nodes
            .iter()
            .map(|t| a + (b - a) * (0.5 * (1.0 + t)))
            .collect(),
        weights: g.weights.iter().map(|w| w * half).collect(),
        degree: g.degree(),
    }
}

/// Concatenate per-simplex rules exact to degree `p_int`.
pub fn tessellation_rule(t: &SubTessellation, p_int: usize) -> QuadratureRule {
    let q = (p_int + 2) / 2;
    let mut out = QuadratureRule {
        dim: t.simplices.first().map_or(0, |s| s.points.len() - 1),
        points: Vec::new(),
        weights: Vec::new(),
        degree: usize::MAX,
    };
    for s in &t.simplices {
        let r = simplex_rule(s, q);
        out.degree = out.degree.min(r.degree);
        out.points.extend(r.points);
        out.weights.extend(r.weights);
    }
    out
}

/// Composite rule on `p` exact to total degree `p_int`.
pub fn polytope_rule(p: &Polytope, p_int: usize, mode: TessellationMode) -> Result<QuadratureRule> {
    Ok(tessellation_rule(&subtessellate(p, mode)?, p_int))
}

/// `Σ_i w_i f(x_i)`.
pub fn integrate(rule: &QuadratureRule, f: impl Fn(&Point) -> f64) -> Result<f64> {
    let mut s = 0.0;
    for (index, (x, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { index });
        }
        s += w * v;
    }
    Ok(s)
}

/// Moments `∫ x^α` for every `α` of `set`, with the operation count.
///
/// Per point, powers up to the largest exponent cost `d (p - 1)` products;
/// each monomial then costs `d - 1` products plus one weighted accumulation.
pub fn monomial_moments(rule: &QuadratureRule, set: &MonomialSet) -> (Vec<f64>, u64) {
    let d = set.dim();
    let pmax = set.indices().iter().map(|a| a.degree()).max().unwrap_or(0) as usize;
    let mut acc = vec![0.0; set.len()];
    let mut pw = vec![vec![1.0; pmax + 1]; d];
    for (x, &w) in rule.points.iter().zip(&rule.weights) {
        for k in 0..d {
            for e in 1..=pmax {
                pw[k][e] = pw[k][e - 1] * x[k];
            }
        }
        for (i, a) in set.indices().iter().enumerate() {
            let mut v = pw[0][a.get(0) as usize];
            for k in 1..d {
                v *= pw[k][a.get(k) as usize];
            }
            acc[i] += w * v;
        }
    }
    let n = rule.len() as u64;
    let flops = n * (d as u64 * pmax.saturating_sub(1) as u64 + (d as u64 + 1) * set.len() as u64);
    (acc, flops)
}
