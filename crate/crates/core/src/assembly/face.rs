use super::TransportData;
use crate::basis::{basis_index_map, BoundingBoxMap, Normalization};
use crate::geometry::Polytope;
use crate::mesh::{FaceRef, PolytopicMesh};
use crate::quadrature::{segment_rule, triangle_rule_3d, QuadratureRule};
use crate::{Point, Result};
use nalgebra::{DMatrix, DVector};

/// Rule on a face loop: `q` Gauss points on a segment, or a fan of
/// `(q+1)²`-point triangle rules about the first vertex in 3D. Fan
/// triangles turning against `normal` get negative weights, so non-convex
/// planar faces are integrated exactly for polynomials.
pub(crate) fn loop_rule(
    dim: usize,
    pts: &[Point],
    lp: &[usize],
    normal: &Point,
    q: usize,
) -> QuadratureRule {
    if dim == 2 {
        return segment_rule(&pts[lp[0]], &pts[lp[1]], q);
    }
    let mut out = QuadratureRule {
        dim: 2,
        points: Vec::new(),
        weights: Vec::new(),
        degree: 2 * q,
    };
    let a = pts[lp[0]];
    for k in 1..lp.len() - 1 {
        let (b, c) = (pts[lp[k]], pts[lp[k + 1]]);
        let s = (b - a).cross(&(c - a)).dot(normal);
        if s == 0.0 {
            continue;
        }
        let r = triangle_rule_3d(&a, &b, &c, q);
        out.points.extend(r.points);
        out.weights.extend(r.weights.iter().map(|w| w * s.signum()));
    }
    out
}

/// Rule on boundary facet `f` of a standalone polytope.
pub fn face_rule(kappa: &Polytope, f: usize, q: usize) -> QuadratureRule {
    let (normal, _) = kappa.face_normal(f);
    let lp = &kappa.faces()[0];
    if kappa.dim() == 2 {
        let seg = [lp[f], lp[(f + 1) % lp.len()]];
        loop_rule(2, kappa.vertices(), &seg, &normal, q)
    } else {
        loop_rule(3, kappa.vertices(), &kappa.faces()[f], &normal, q)
    }
}

/// Upwind contributions of one face to the block row of `element`.
#[derive(Clone, Debug, PartialEq)]
pub enum FaceCoupling {
    /// `b·n = 0`.
    Tangential,
    /// Outflow: `∫ |b·n| φ_j φ_i` on the diagonal block.
    Outflow(DMatrix<f64>),
    /// Interior inflow: `−∫ |b·n| φ_j^nbr φ_i` in the block of `neighbor`.
    Inflow {
        neighbor: usize,
        block: DMatrix<f64>,
    },
    /// Boundary inflow: `∫ |b·n| g φ_i` on the right-hand side.
    InflowData(DVector<f64>),
}

/// Face coupling of `element` across face `r`; the rule has `p + 1` points
/// per direction.
pub fn face_coupling(
    mesh: &PolytopicMesh,
    element: usize,
    r: FaceRef,
    data: &TransportData,
    p: usize,
    norm: Normalization,
    maps: &[BoundingBoxMap],
) -> Result<FaceCoupling> {
    let d = mesh.dim();
    let n = mesh.outward_normal(r);
    let bn = data.wind.dot(&n);
    if bn.abs() <= 1e-14 * data.wind.norm() {
        return Ok(FaceCoupling::Tangential);
    }
    let face = &mesh.faces()[r.face];
    let rule = loop_rule(d, mesh.vertices(), &face.vertices, &face.normal, p + 1);
    let basis = basis_index_map(p, d);
    let nb = basis.len();
    let (mut v, mut w, mut g) = (Vec::new(), Vec::new(), Vec::new());
    let abs = bn.abs();
    if bn > 0.0 {
        let mut m = DMatrix::zeros(nb, nb);
        for (x, wt) in rule.points.iter().zip(&rule.weights) {
            basis.eval(norm, &maps[element].to_reference(x), &mut v, &mut g);
            for i in 0..nb {
                for j in 0..nb {
                    m[(i, j)] += wt * abs * v[i] * v[j];
                }
            }
        }
        return Ok(FaceCoupling::Outflow(m));
    }
    match mesh.across(r) {
        Some(nbr) => {
            let mut m = DMatrix::zeros(nb, nb);
            for (x, wt) in rule.points.iter().zip(&rule.weights) {
                basis.eval(norm, &maps[element].to_reference(x), &mut v, &mut g);
                basis.eval(norm, &maps[nbr].to_reference(x), &mut w, &mut g);
                for i in 0..nb {
                    for j in 0..nb {
                        m[(i, j)] -= wt * abs * w[j] * v[i];
                    }
                }
            }
            Ok(FaceCoupling::Inflow {
                neighbor: nbr,
                block: m,
            })
        }
        None => {
            let mut rhs = DVector::zeros(nb);
            for (x, wt) in rule.points.iter().zip(&rule.weights) {
                basis.eval(norm, &maps[element].to_reference(x), &mut v, &mut g);
                let gx = (data.inflow)(x);
                for i in 0..nb {
                    rhs[i] += wt * abs * gx * v[i];
                }
            }
            Ok(FaceCoupling::InflowData(rhs))
        }
    }
}
