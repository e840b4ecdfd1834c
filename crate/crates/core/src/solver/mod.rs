//! Flow-ordered block forward substitution with an iterative fallback.

mod gmres;

pub use gmres::solve_iterative;

use crate::assembly::{element_rule, GlobalSystem};
use crate::basis::{basis_index_map, bounding_box, Normalization};
use crate::mesh::PolytopicMesh;
use crate::{Error, Point, Result};
use nalgebra::{DMatrix, DVector, LU};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::Write;

/// Elements in dependency order together with the upwind edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowOrder {
    pub order: Vec<usize>,
    /// `(upwind, downwind)` pairs.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlowResult {
    Order(FlowOrder),
    /// Elements forming a dependency cycle, each upwind of the next.
    Cycle(Vec<usize>),
}

/// Dependency graph of the upwind coupling for a constant wind `b`.
/// Faces with `b·n = 0` carry no dependency; ties are broken by element id.
pub fn flow_order(mesh: &PolytopicMesh, b: &Point) -> FlowResult {
    let n = mesh.len();
    let tol = 1e-14 * b.norm();
    let mut edges = Vec::new();
    for f in mesh.interior_faces() {
        let nb = f.neighbor.unwrap();
        let bn = b.dot(&f.normal);
        if bn > tol {
            edges.push((f.owner, nb));
        } else if bn < -tol {
            edges.push((nb, f.owner));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut out = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(a, c) in &edges {
        out[a].push(c);
        indeg[c] += 1;
    }
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&e| indeg[e] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(e)) = heap.pop() {
        order.push(e);
        for &c in &out[e] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                heap.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        return FlowResult::Order(FlowOrder { order, edges });
    }
    // Walk upwind among the stuck elements until one repeats.
    let mut pred = vec![usize::MAX; n];
    for &(a, c) in &edges {
        if indeg[a] > 0 && indeg[c] > 0 && pred[c] == usize::MAX {
            pred[c] = a;
        }
    }
    let start = (0..n).find(|&e| indeg[e] > 0).unwrap();
    let mut seen = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut e = start;
    while seen[e] == usize::MAX {
        seen[e] = path.len();
        path.push(e);
        e = pred[e];
    }
    let mut cycle = path[seen[e]..].to_vec();
    cycle.reverse();
    FlowResult::Cycle(cycle)
}

pub(crate) fn factor_block(
    m: &DMatrix<f64>,
    element: usize,
) -> Result<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let lu = m.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    if max.is_nan() || max <= 0.0 || diag.iter().any(|&x| x <= 1e-14 * max) {
        return Err(Error::SingularBlock { element });
    }
    Ok(lu)
}

/// Solve by one sweep in flow order, or iteratively without an order.
pub fn solve(system: &GlobalSystem, order: Option<&FlowOrder>) -> Result<DVector<f64>> {
    let Some(order) = order else {
        return solve_iterative(system, 1e-13, 10 * system.n_elements).map(|(x, _)| x);
    };
    let nb = system.block_size;
    let mut x = DVector::zeros(system.n_dofs());
    for &e in &order.order {
        let mut r = system.rhs.rows(e * nb, nb).into_owned();
        let mut diag = None;
        for (c, m) in system.row(e) {
            if c == e {
                diag = Some(m);
            } else {
                r -= m * x.rows(c * nb, nb);
            }
        }
        let lu = factor_block(diag.expect("diagonal block present"), e)?;
        let y = lu.solve(&r).ok_or(Error::SingularBlock { element: e })?;
        x.rows_mut(e * nb, nb).copy_from(&y);
    }
    Ok(x)
}

/// `‖A x − b‖ / ‖b‖` (or the absolute residual when `b = 0`).
pub fn relative_residual(system: &GlobalSystem, x: &DVector<f64>) -> f64 {
    let r = (system.matvec(x) - &system.rhs).norm();
    let s = system.rhs.norm();
    if s > 0.0 {
        r / s
    } else {
        r
    }
}

/// `u_h(x)` on element `e`.
pub fn evaluate(
    mesh: &PolytopicMesh,
    coeffs: &DVector<f64>,
    p: usize,
    norm: Normalization,
    e: usize,
    x: &Point,
) -> Result<f64> {
    let basis = basis_index_map(p, mesh.dim());
    let map = bounding_box(mesh.polytope(e))?;
    let (mut v, mut g) = (Vec::new(), Vec::new());
    basis.eval(norm, &map.to_reference(x), &mut v, &mut g);
    let nb = basis.len();
    Ok((0..nb).map(|i| coeffs[e * nb + i] * v[i]).sum())
}

/// `(Σ_κ ∫_κ (u_h − u)²)^{1/2}` with rules exact to degree `2p + 2`.
pub fn broken_l2_error(
    mesh: &PolytopicMesh,
    coeffs: &DVector<f64>,
    exact: impl Fn(&Point) -> f64,
    p: usize,
    norm: Normalization,
) -> Result<f64> {
    let basis = basis_index_map(p, mesh.dim());
    let nb = basis.len();
    let (mut v, mut g) = (Vec::new(), Vec::new());
    let mut total = 0.0;
    for e in 0..mesh.len() {
        let kappa = mesh.polytope(e);
        let map = bounding_box(kappa)?;
        let rule = element_rule(kappa, p + 1)?;
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            basis.eval(norm, &map.to_reference(x), &mut v, &mut g);
            let uh: f64 = (0..nb).map(|i| coeffs[e * nb + i] * v[i]).sum();
            let diff = uh - exact(x);
            total += w * diff * diff;
        }
    }
    Ok(total.max(0.0).sqrt())
}

/// `element, basis_index, value` rows.
pub fn write_solution_csv<W: Write>(coeffs: &DVector<f64>, block_size: usize, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["element", "basis_index", "value"])?;
    for (k, v) in coeffs.iter().enumerate() {
        wr.write_record([
            (k / block_size).to_string(),
            (k % block_size).to_string(),
            format!("{v:e}"),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
