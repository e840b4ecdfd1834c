use super::monomials::{monomial_set, MonomialSet, MultiIndex};
use crate::geometry::FacetLattice;
use crate::{Error, Point, Result};
use std::io::Write;

/// Choice of the reference point `x_F` on each facet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RefPoint {
    /// First vertex of every facet.
    #[default]
    FirstVertex,
    /// Origin on the polytope itself, first vertex below.
    OriginAtTop,
    /// Vertex average of every facet.
    Centroid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntegrationOptions {
    /// Skip boundary facets at zero distance from the reference point.
    pub pruning: bool,
    pub refpoint: RefPoint,
    pub counters: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            pruning: true,
            refpoint: RefPoint::FirstVertex,
            counters: true,
        }
    }
}

/// Operation counters of one table computation.
///
/// `flops` follows the per-facet cost model: a facet of dimension `k ≥ 1`
/// with `m` contributing boundary facets costs `2m + 4d` per multi-index
/// (`2m + d` on the polytope when the origin is its reference point) and a
/// vertex costs one. Distance evaluation is tallied separately.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub flops: u64,
    pub flops_by_dim: [u64; 4],
    pub distance_flops: u64,
    pub facet_visits: u64,
    pub pruned_skips: u64,
}

/// Facet id, reference point and contributing `(distance, child)` pairs.
type Found = (usize, Point, Vec<(f64, usize)>);

#[derive(Clone, Debug)]
struct PlanNode {
    node: usize,
    dim: usize,
    x: Point,
    /// `(distance, slot)` of every contributing boundary facet.
    children: Vec<(f64, usize)>,
    origin_top: bool,
    cost: u64,
}

/// Integrals `I(F, α)` of every visited facet `F` and every `α ∈ J`.
#[derive(Clone, Debug)]
pub struct MonomialTable {
    set: MonomialSet,
    opts: IntegrationOptions,
    plan: Vec<PlanNode>,
    slot_of: Vec<Option<usize>>,
    values: Vec<Vec<f64>>,
    counters: OpCounters,
}

/// Evaluate `I(F, J)` for the polytope and all facets the recursion needs.
pub fn compute_integrals(
    lattice: &FacetLattice,
    set: &MonomialSet,
    opts: IntegrationOptions,
) -> Result<MonomialTable> {
    if set.dim() != lattice.dim() {
        return Err(Error::NotDownwardClosed(format!(
            "set has {} variables, polytope dimension is {}",
            set.dim(),
            lattice.dim()
        )));
    }
    let (plan, slot_of, mut counters) = build_plan(lattice, opts);
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); plan.len()];
    fill(&plan, &mut values, set, 0);
    if opts.counters {
        charge(&plan, &mut counters, set.len() as u64);
    } else {
        counters = OpCounters::default();
    }
    Ok(MonomialTable {
        set: set.clone(),
        opts,
        plan,
        slot_of,
        values,
        counters,
    })
}

/// Extend a total-degree table from `from` to `to`, computing only the new
/// multi-indices. The result equals a fresh computation bit for bit.
pub fn extend_integrals(
    table: &MonomialTable,
    lattice: &FacetLattice,
    from: usize,
    to: usize,
) -> Result<MonomialTable> {
    if table.set.total_degree() != Some(from) {
        return Err(Error::NotDownwardClosed(format!(
            "table is not complete through degree {from}"
        )));
    }
    if to < from {
        return Err(Error::DegreeRegression { from, to });
    }
    let mut t = table.clone();
    if to == from {
        return Ok(t);
    }
    debug_assert_eq!(t.slot_of.len(), lattice.nodes().len());
    let old = t.set.len();
    t.set = monomial_set(to, lattice.dim());
    fill(&t.plan, &mut t.values, &t.set, old);
    if t.opts.counters {
        charge(&t.plan, &mut t.counters, (t.set.len() - old) as u64);
    }
    Ok(t)
}

fn build_plan(
    lattice: &FacetLattice,
    opts: IntegrationOptions,
) -> (Vec<PlanNode>, Vec<Option<usize>>, OpCounters) {
    let d = lattice.dim();
    let nodes = lattice.nodes();
    let pts = lattice.points();
    let tol = 1e-14 * lattice.diameter();
    let mut counters = OpCounters::default();

    let refpoint = |id: usize| -> (Point, Option<usize>) {
        let node = &nodes[id];
        match opts.refpoint {
            RefPoint::OriginAtTop if id == lattice.top() => (Point::zeros(), None),
            RefPoint::Centroid if node.dim > 0 => {
                let mut c = Point::zeros();
                for &v in &node.vertices {
                    c += pts[v];
                }
                (c / node.vertices.len() as f64, None)
            }
            _ => (pts[node.vertices[0]], Some(node.vertices[0])),
        }
    };

    // Depth-first discovery of the facets the recursion touches.
    let mut visited = vec![false; nodes.len()];
    let mut found: Vec<Found> = Vec::new();
    let mut stack = vec![lattice.top()];
    visited[lattice.top()] = true;
    while let Some(id) = stack.pop() {
        let (x, vertex) = refpoint(id);
        let mut kids = Vec::new();
        if nodes[id].dim > 0 {
            for (off, e) in lattice.children(id).iter().enumerate() {
                let child = &nodes[e.child];
                let touches = vertex.is_some_and(|v| child.vertices.contains(&v));
                let mut dist = 0.0;
                if !touches {
                    dist = lattice.signed_distance(nodes[id].child_edges.start + off, &x);
                    counters.distance_flops += 3 * d as u64 - 1;
                    if dist.abs() <= tol {
                        dist = 0.0;
                    }
                }
                if dist == 0.0 && opts.pruning {
                    counters.pruned_skips += 1;
                    continue;
                }
                kids.push((dist, e.child));
                if !visited[e.child] {
                    visited[e.child] = true;
                    stack.push(e.child);
                }
            }
        }
        found.push((id, x, kids));
    }

    // Children before parents; ties by node id for a stable layout.
    found.sort_by_key(|(id, _, _)| (nodes[*id].dim, *id));
    let mut slot_of = vec![None; nodes.len()];
    for (slot, (id, _, _)) in found.iter().enumerate() {
        slot_of[*id] = Some(slot);
    }
    let plan = found
        .into_iter()
        .map(|(id, x, kids)| {
            let dim = nodes[id].dim as usize;
            let origin_top = id == lattice.top() && opts.refpoint == RefPoint::OriginAtTop;
            let m = kids.len() as u64;
            let cost = if dim == 0 {
                1
            } else if origin_top {
                2 * m + d as u64
            } else {
                2 * m + 4 * d as u64
            };
            PlanNode {
                node: id,
                dim,
                x,
                children: kids
                    .into_iter()
                    .map(|(dist, c)| (dist, slot_of[c].unwrap()))
                    .collect(),
                origin_top,
                cost,
            }
        })
        .collect();
    counters.facet_visits = slot_of.iter().filter(|s| s.is_some()).count() as u64;
    (plan, slot_of, counters)
}

fn charge(plan: &[PlanNode], counters: &mut OpCounters, n: u64) {
    for p in plan {
        counters.flops += p.cost * n;
        counters.flops_by_dim[p.dim] += p.cost * n;
    }
}

/// Fill positions `start..` of every planned facet, children first.
fn fill(plan: &[PlanNode], values: &mut [Vec<f64>], set: &MonomialSet, start: usize) {
    let d = set.dim();
    for (slot, p) in plan.iter().enumerate() {
        let mut cur = std::mem::take(&mut values[slot]);
        cur.resize(set.len(), 0.0);
        for &i in set.order() {
            if i < start {
                continue;
            }
            let a = set.get(i);
            if p.dim == 0 {
                cur[i] = match (0..d).find(|&k| a.get(k) > 0) {
                    None => 1.0,
                    Some(k) => p.x[k] * cur[set.down(i, k).unwrap()],
                };
                continue;
            }
            let mut s1 = 0.0;
            for &(dist, c) in &p.children {
                s1 += dist * values[c][i];
            }
            let mut s2 = 0.0;
            if !p.origin_top {
                for k in 0..d {
                    if let Some(j) = set.down(i, k) {
                        s2 += a.get(k) as f64 * p.x[k] * cur[j];
                    }
                }
            }
            cur[i] = (s1 + s2) / (p.dim as f64 + a.degree() as f64);
        }
        values[slot] = cur;
    }
}

impl MonomialTable {
    pub fn set(&self) -> &MonomialSet {
        &self.set
    }

    pub fn options(&self) -> IntegrationOptions {
        self.opts
    }

    pub fn counters(&self) -> &OpCounters {
        &self.counters
    }

    /// Integrals over the polytope itself, indexed like the set.
    pub fn top_values(&self) -> &[f64] {
        &self.values[self.slot_of[0].expect("polytope is always visited")]
    }

    /// `∫_P x^α`.
    pub fn integral(&self, a: &MultiIndex) -> Option<f64> {
        self.set.position(a).map(|i| self.top_values()[i])
    }

    /// `I(F, α)` for a visited facet.
    pub fn value(&self, node: usize, a: &MultiIndex) -> Option<f64> {
        let slot = self.slot_of.get(node).copied().flatten()?;
        self.set.position(a).map(|i| self.values[slot][i])
    }

    /// Lattice node ids of the visited facets.
    pub fn visited(&self) -> Vec<usize> {
        self.plan.iter().map(|p| p.node).collect()
    }

    /// Write `facet_id, dim, alpha, value` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["facet_id", "dim", "alpha", "value"])?;
        for (slot, p) in self.plan.iter().enumerate() {
            for (i, a) in self.set.indices().iter().enumerate() {
                wr.write_record([
                    p.node.to_string(),
                    p.dim.to_string(),
                    a.to_string(),
                    format!("{:e}", self.values[slot][i]),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Raw bit patterns of every stored value, for exact comparisons.
    pub fn bits(&self) -> Vec<(usize, Vec<u64>)> {
        self.plan
            .iter()
            .zip(&self.values)
            .map(|(p, v)| (p.node, v.iter().map(|x| x.to_bits()).collect()))
            .collect()
    }
}

/// Per-dimension operation prediction of the cost model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlopPrediction {
    /// Facet terms `(2m(F) + 4d)|J|` grouped by facet dimension, with the
    /// polytope term replaced by `(2m + d)|J|`.
    pub by_dim: [u64; 4],
    /// Sum of `by_dim`.
    pub total: u64,
    /// `(2|E| + 4d|V|)|J|` without the polytope simplification.
    pub unsimplified: u64,
}

/// Predicted operation count for `n_j` multi-indices.
///
/// `|V|` counts facets of dimension `0..=d` and `|E|` includes one edge from
/// each vertex to the empty facet, whether or not the lattice stores it.
pub fn flop_prediction(lattice: &FacetLattice, n_j: u64) -> FlopPrediction {
    let d = lattice.dim() as u64;
    let mut by_dim = [0u64; 4];
    let mut unsimplified = 0;
    for (id, node) in lattice.nodes().iter().enumerate() {
        if node.dim < 0 {
            continue;
        }
        let m = if node.dim == 0 {
            1
        } else {
            lattice.children(id).len() as u64
        };
        let generic = (2 * m + 4 * d) * n_j;
        unsimplified += generic;
        by_dim[node.dim as usize] += if id == lattice.top() {
            (2 * m + d) * n_j
        } else {
            generic
        };
    }
    FlopPrediction {
        by_dim,
        total: by_dim.iter().sum(),
        unsimplified,
    }
}
