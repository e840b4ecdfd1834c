use crate::{Error, Result};
use std::collections::HashMap;
use std::fmt;

/// Exponent tuple `α` of the monomial `x^α` in `d ≤ 3` variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    exps: [u32; 3],
    dim: u8,
}

impl MultiIndex {
    pub fn new(exps: &[u32]) -> Self {
        assert!(
            (1..=3).contains(&exps.len()),
            "multi-index length must be 1..=3"
        );
        let mut e = [0; 3];
        e[..exps.len()].copy_from_slice(exps);
        Self {
            exps: e,
            dim: exps.len() as u8,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn get(&self, k: usize) -> u32 {
        self.exps[k]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.exps[..self.dim as usize]
    }

    /// `self - e_k`, if non-negative.
    pub fn lower(&self, k: usize) -> Option<Self> {
        if self.exps[k] == 0 {
            return None;
        }
        let mut m = *self;
        m.exps[k] -= 1;
        Some(m)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.as_slice().iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

const NONE: u32 = u32::MAX;

/// A downward-closed set of multi-indices with fast lookup of `α - e_k`.
#[derive(Clone, Debug)]
pub struct MonomialSet {
    dim: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    down: Vec<[u32; 3]>,
    order: Vec<usize>,
    total_degree: Option<usize>,
}

/// All multi-indices with `|α| ≤ p` in `d` variables, graded-lex ordered:
/// by degree, then by decreasing leading exponents.
pub fn monomial_set(p: usize, d: usize) -> MonomialSet {
    let mut indices = Vec::with_capacity(total_degree_len(p, d));
    for deg in 0..=p as u32 {
        let mut cur = vec![0u32; d];
        graded(&mut cur, 0, deg, &mut indices);
    }
    let mut s =
        MonomialSet::from_indices(d, indices).expect("total-degree sets are downward closed");
    s.total_degree = Some(p);
    s
}

fn graded(cur: &mut Vec<u32>, k: usize, rem: u32, out: &mut Vec<MultiIndex>) {
    if k + 1 == cur.len() {
        cur[k] = rem;
        out.push(MultiIndex::new(cur));
        return;
    }
    for a in (0..=rem).rev() {
        cur[k] = a;
        graded(cur, k + 1, rem - a, out);
    }
}

/// `binom(p + d, d)`.
pub(crate) fn total_degree_len(p: usize, d: usize) -> usize {
    let mut r: usize = 1;
    for i in 1..=d {
        r = r * (p + i) / i;
    }
    r
}

impl MonomialSet {
    /// Validate downward closure of an arbitrary list.
    pub fn from_indices(dim: usize, indices: Vec<MultiIndex>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(indices.len());
        for (i, a) in indices.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::NotDownwardClosed(format!("{a} has wrong length")));
            }
            if lookup.insert(*a, i).is_some() {
                return Err(Error::NotDownwardClosed(format!("{a} listed twice")));
            }
        }
        let mut down = Vec::with_capacity(indices.len());
        for a in &indices {
            let mut row = [NONE; 3];
            for (k, slot) in row.iter_mut().enumerate().take(dim) {
                if let Some(b) = a.lower(k) {
                    match lookup.get(&b) {
                        Some(&j) => *slot = j as u32,
                        None => {
                            return Err(Error::NotDownwardClosed(format!(
                                "{a} present but {b} missing"
                            )))
                        }
                    }
                }
            }
            down.push(row);
        }
        let mut order: Vec<usize> = (0..indices.len()).collect();
        order.sort_by_key(|&i| indices[i].degree());
        Ok(Self {
            dim,
            indices,
            lookup,
            down,
            order,
            total_degree: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> MultiIndex {
        self.indices[i]
    }

    pub fn position(&self, a: &MultiIndex) -> Option<usize> {
        self.lookup.get(a).copied()
    }

    /// Position of `α_i - e_k`.
    pub fn down(&self, i: usize, k: usize) -> Option<usize> {
        let j = self.down[i][k];
        (j != NONE).then_some(j as usize)
    }

    /// Positions sorted by degree (a valid evaluation order).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `Some(p)` when the set is exactly `{|α| ≤ p}` in graded-lex order.
    pub fn total_degree(&self) -> Option<usize> {
        self.total_degree
    }
}
