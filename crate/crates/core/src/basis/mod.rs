//! Tensor Legendre bases on element bounding boxes and the coefficient
//! tables of their products.

mod bbox;
mod legendre;
mod tables;

pub use bbox::{bounding_box, BoundingBoxMap};
pub use legendre::{legendre_all, legendre_eval, Normalization};
pub use tables::{build_product_tables, LegendreProductTables, MAX_TABLE_DEGREE};

use crate::homint::{monomial_set, MonomialSet, MultiIndex};

/// Graded-lex bijection between basis positions and multi-indices `|α| ≤ p`.
#[derive(Clone, Debug)]
pub struct BasisIndexMap {
    p: usize,
    set: MonomialSet,
}

pub fn basis_index_map(p: usize, d: usize) -> BasisIndexMap {
    BasisIndexMap {
        p,
        set: monomial_set(p, d),
    }
}

impl BasisIndexMap {
    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn alpha(&self, i: usize) -> MultiIndex {
        self.set.get(i)
    }

    pub fn index(&self, a: &MultiIndex) -> Option<usize> {
        self.set.position(a)
    }

    pub fn set(&self) -> &MonomialSet {
        &self.set
    }

    /// Values and reference gradients of every basis function at `xh`.
    pub fn eval(
        &self,
        norm: Normalization,
        xh: &crate::Point,
        vals: &mut Vec<f64>,
        grads: &mut Vec<[f64; 3]>,
    ) {
        let d = self.dim();
        let mut l = [Vec::new(), Vec::new(), Vec::new()];
        let mut dl = [Vec::new(), Vec::new(), Vec::new()];
        for k in 0..d {
            let (v, g) = legendre_all(self.p, xh[k], norm);
            l[k] = v;
            dl[k] = g;
        }
        vals.clear();
        grads.clear();
        for a in self.set.indices() {
            let mut v = 1.0;
            let mut g = [1.0; 3];
            for k in 0..d {
                let e = a.get(k) as usize;
                v *= l[k][e];
                for (j, gj) in g.iter_mut().enumerate().take(d) {
                    *gj *= if j == k { dl[k][e] } else { l[k][e] };
                }
            }
            for gj in g.iter_mut().skip(d) {
                *gj = 0.0;
            }
            vals.push(v);
            grads.push(g);
        }
    }
}
