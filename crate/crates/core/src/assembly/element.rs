use super::{AssemblyPath, TransportData};
use crate::basis::{basis_index_map, bounding_box, LegendreProductTables, Normalization};
use crate::geometry::{build_facet_lattice, Polytope};
use crate::homint::{compute_integrals, monomial_set, IntegrationOptions, MonomialSet, MultiIndex};
use crate::quadrature::{polytope_rule, QuadratureRule, TessellationMode};
use crate::{Error, Point, Result};
use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ElementCounters {
    /// Operations of the main assembly loop.
    pub main_flops: u64,
    /// Monomial integration operations (quadrature-free path).
    pub integration_flops: u64,
    pub distance_flops: u64,
    /// Innermost reconstruction visits (quadrature-free path).
    pub reconstruction_visits: u64,
    pub quadrature_points: usize,
}

/// Dense volume matrix `A_κ`: row `i` tests with `φ_i`, column `j` is the
/// trial function `φ_j`.
#[derive(Clone, Debug)]
pub struct ElementMatrix {
    pub matrix: DMatrix<f64>,
    pub element: usize,
    pub path: AssemblyPath,
    pub counters: ElementCounters,
    /// The rule was not exact to degree `2p`.
    pub underintegrated: bool,
}

/// Default volume rule exact to degree `2p`: the stored fine simplices of
/// an agglomerate, the simplex itself, or a fan about the centroid.
pub fn element_rule(kappa: &Polytope, p: usize) -> Result<QuadratureRule> {
    let mode = if kappa.fine().is_some() {
        TessellationMode::Inherited
    } else if kappa.used_vertices().len() == kappa.dim() + 1 {
        TessellationMode::FanFirstVertex
    } else {
        TessellationMode::FanCentroid
    };
    polytope_rule(kappa, 2 * p, mode)
}

/// Algorithm with pre-evaluated basis values at the rule points.
pub fn element_matrix_quadrature(
    kappa: &Polytope,
    element: usize,
    data: &TransportData,
    p: usize,
    rule: &QuadratureRule,
    norm: Normalization,
) -> Result<ElementMatrix> {
    let d = kappa.dim();
    let map = bounding_box(kappa)?;
    let basis = basis_index_map(p, d);
    let n = basis.len();
    let c = data.reaction(element);
    let b = data.wind;
    let nq = rule.points.len();
    let mut phi = vec![0.0; nq * n];
    let mut grad = vec![[0.0; 3]; nq * n];
    let (mut v, mut g) = (Vec::new(), Vec::new());
    for (q, x) in rule.points.iter().enumerate() {
        basis.eval(norm, &map.to_reference(x), &mut v, &mut g);
        for i in 0..n {
            phi[q * n + i] = v[i];
            for k in 0..d {
                grad[q * n + i][k] = g[i][k] / map.scale[k];
            }
        }
    }
    let mut a = vec![0.0; n * n];
    let mut visits = 0u64;
    for q in 0..nq {
        let w = rule.weights[q];
        let ph = &phi[q * n..(q + 1) * n];
        let gr = &grad[q * n..(q + 1) * n];
        for i in 0..n {
            for j in 0..n {
                let mut bg = b[0] * gr[i][0];
                for k in 1..d {
                    bg += b[k] * gr[i][k];
                }
                let integrand = (c * ph[i] - bg) * ph[j];
                a[i * n + j] += w * integrand;
                visits += 1;
            }
        }
    }
    if let Some(index) = a.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(ElementMatrix {
        matrix: DMatrix::from_row_slice(n, n, &a),
        element,
        path: AssemblyPath::Quadrature,
        counters: ElementCounters {
            main_flops: 2 * (d as u64 + 2) * visits,
            quadrature_points: nq,
            ..Default::default()
        },
        underintegrated: rule.degree < 2 * p,
    })
}

/// `Q_d(p)`: the number of `(i, j, α)` with `0 ≤ α ≤ α^(i) + α^(j)`.
pub fn q_count(p: usize, d: usize) -> u64 {
    let set = monomial_set(p, d);
    let mut total = 0u64;
    for ai in set.indices() {
        for aj in set.indices() {
            total += (0..d)
                .map(|k| (ai.get(k) + aj.get(k) + 1) as u64)
                .product::<u64>();
        }
    }
    total
}

/// Visit every `α` in the box `0 ≤ α ≤ hi` in lexicographic order.
fn for_box(hi: &[u32], mut f: impl FnMut(&[u32])) {
    let d = hi.len();
    let mut a = [0u32; 3];
    loop {
        f(&a[..d]);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if a[k] < hi[k] {
                a[k] += 1;
                break;
            }
            a[k] = 0;
        }
    }
}

/// Element-independent part of the reconstruction: for every `(i, j)` and
/// every `α` in its box, the slot of `α` in `{|α| ≤ 2p}`, the product
/// `Π_k C` and the `d` derivative products `C'_k Π_{ℓ≠k} C`.
#[derive(Clone, Debug)]
pub struct ReconstructionPlan {
    p: usize,
    d: usize,
    n: usize,
    norm: Normalization,
    set: MonomialSet,
    offsets: Vec<usize>,
    slots: Vec<u32>,
    cprod: Vec<f64>,
    dterm: Vec<f64>,
}

impl ReconstructionPlan {
    pub fn new(p: usize, d: usize, tables: &LegendreProductTables) -> Result<Self> {
        if tables.degree() < p {
            return Err(Error::UnsupportedDegree(p));
        }
        let basis = basis_index_map(p, d);
        let set = monomial_set(2 * p, d);
        let n = basis.len();
        let q = q_count(p, d) as usize;
        let mut offsets = Vec::with_capacity(n * n + 1);
        let mut slots = Vec::with_capacity(q);
        let mut cprod = Vec::with_capacity(q);
        let mut dterm = Vec::with_capacity(q * d);
        offsets.push(0);
        for i in 0..n {
            let ai = basis.alpha(i);
            for j in 0..n {
                let aj = basis.alpha(j);
                let hi: Vec<u32> = (0..d).map(|k| ai.get(k) + aj.get(k)).collect();
                for_box(&hi, |a| {
                    let mi = |k: usize| ai.get(k) as usize;
                    let mj = |k: usize| aj.get(k) as usize;
                    let cs: Vec<f64> = (0..d)
                        .map(|k| tables.c(mi(k), mj(k), a[k] as usize))
                        .collect();
                    slots.push(
                        set.position(&MultiIndex::new(a))
                            .expect("box lies in the degree-2p set") as u32,
                    );
                    cprod.push(cs.iter().product());
                    for k in 0..d {
                        let mut t = tables.cprime(mi(k), mj(k), a[k] as usize);
                        for (l, cl) in cs.iter().enumerate() {
                            if l != k {
                                t *= cl;
                            }
                        }
                        dterm.push(t);
                    }
                });
                offsets.push(slots.len());
            }
        }
        Ok(Self {
            p,
            d,
            n,
            norm: tables.normalization(),
            set,
            offsets,
            slots,
            cprod,
            dterm,
        })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    /// The monomial family `{|α| ≤ 2p}` integrated per element.
    pub fn monomials(&self) -> &MonomialSet {
        &self.set
    }

    /// Total reconstruction visits per element, `Q_d(p)`.
    pub fn visits(&self) -> u64 {
        self.slots.len() as u64
    }

    /// `A_ij = Σ_α c_α I(κ̂, α)` with `c_α = (c Π C − Σ_k b̂_k C'_k Π C) |J|`.
    fn reconstruct(&self, integrals: &[f64], c: f64, bh: &Point, det: f64) -> (Vec<f64>, u64) {
        let d = self.d;
        let mut a = vec![0.0; self.n * self.n];
        let mut visits = 0u64;
        for (entry, out) in a.iter_mut().enumerate() {
            let mut acc = 0.0;
            for t in self.offsets[entry]..self.offsets[entry + 1] {
                let dt = &self.dterm[t * d..(t + 1) * d];
                let mut s = bh[0] * dt[0];
                for k in 1..d {
                    s += bh[k] * dt[k];
                }
                let coeff = (c * self.cprod[t] - s) * det;
                acc += coeff * integrals[self.slots[t] as usize];
                visits += 1;
            }
            *out = acc;
        }
        (a, visits)
    }
}

struct MappedIntegrals {
    values: Vec<f64>,
    flops: u64,
    distance_flops: u64,
    bh: Point,
    det: f64,
}

fn mapped_integrals(
    kappa: &Polytope,
    set: &MonomialSet,
    data: &TransportData,
    opts: IntegrationOptions,
) -> Result<MappedIntegrals> {
    let map = bounding_box(kappa)?;
    let khat = map.map_polytope(kappa);
    let lattice = build_facet_lattice(&khat, false)?;
    let table = compute_integrals(&lattice, set, opts)?;
    Ok(MappedIntegrals {
        values: table.top_values().to_vec(),
        flops: table.counters().flops,
        distance_flops: table.counters().distance_flops,
        bh: map.scale_wind(&data.wind),
        det: map.det,
    })
}

fn finish(
    a: Vec<f64>,
    n: usize,
    element: usize,
    counters: ElementCounters,
) -> Result<ElementMatrix> {
    if let Some(index) = a.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(ElementMatrix {
        matrix: DMatrix::from_row_slice(n, n, &a),
        element,
        path: AssemblyPath::QuadratureFree,
        counters,
        underintegrated: false,
    })
}

/// Quadrature-free volume matrix using a precomputed plan; each visit
/// costs `2(d+1)` for the coefficient and 2 for the accumulation.
pub fn element_matrix_qfree(
    kappa: &Polytope,
    element: usize,
    data: &TransportData,
    plan: &ReconstructionPlan,
    opts: IntegrationOptions,
) -> Result<ElementMatrix> {
    if kappa.dim() != plan.d {
        return Err(Error::InvalidInput(format!(
            "plan is for d = {}, element has d = {}",
            plan.d,
            kappa.dim()
        )));
    }
    let m = mapped_integrals(kappa, &plan.set, data, opts)?;
    let (a, visits) = plan.reconstruct(&m.values, data.reaction(element), &m.bh, m.det);
    let d = plan.d as u64;
    finish(
        a,
        plan.n,
        element,
        ElementCounters {
            main_flops: (2 * (d + 1) + 2) * visits,
            integration_flops: m.flops,
            distance_flops: m.distance_flops,
            reconstruction_visits: visits,
            quadrature_points: 0,
        },
    )
}

/// Quadrature-free volume matrix evaluating the coefficient formula inside
/// the loop at `(d+1)² + 2` operations per visit.
pub fn element_matrix_qfree_inline(
    kappa: &Polytope,
    element: usize,
    data: &TransportData,
    p: usize,
    tables: &LegendreProductTables,
    opts: IntegrationOptions,
) -> Result<ElementMatrix> {
    if tables.degree() < p {
        return Err(Error::UnsupportedDegree(p));
    }
    let d = kappa.dim();
    let basis = basis_index_map(p, d);
    let set = monomial_set(2 * p, d);
    let n = basis.len();
    let m = mapped_integrals(kappa, &set, data, opts)?;
    let c = data.reaction(element);
    let mut a = vec![0.0; n * n];
    let mut visits = 0u64;
    for i in 0..n {
        let ai = basis.alpha(i);
        for j in 0..n {
            let aj = basis.alpha(j);
            let hi: Vec<u32> = (0..d).map(|k| ai.get(k) + aj.get(k)).collect();
            let mut acc = 0.0;
            for_box(&hi, |al| {
                let cc =
                    |k: usize| tables.c(ai.get(k) as usize, aj.get(k) as usize, al[k] as usize);
                let mut prod = 1.0;
                for k in 0..d {
                    prod *= cc(k);
                }
                let mut s = 0.0;
                for k in 0..d {
                    let mut t = m.bh[k]
                        * tables.cprime(ai.get(k) as usize, aj.get(k) as usize, al[k] as usize);
                    for l in 0..d {
                        if l != k {
                            t *= cc(l);
                        }
                    }
                    s += t;
                }
                let coeff = (c * prod - s) * m.det;
                acc += coeff * m.values[set.position(&MultiIndex::new(al)).unwrap()];
                visits += 1;
            });
            a[i * n + j] = acc;
        }
    }
    let d = d as u64;
    finish(
        a,
        n,
        element,
        ElementCounters {
            main_flops: ((d + 1) * (d + 1) + 2) * visits,
            integration_flops: m.flops,
            distance_flops: m.distance_flops,
            reconstruction_visits: visits,
            quadrature_points: 0,
        },
    )
}
