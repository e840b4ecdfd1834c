//! Discontinuous Galerkin transport matrices: element volume terms by
//! quadrature or by quadrature-free reconstruction, upwind face terms and
//! the global block system.

mod element;
mod face;
mod global;

pub use element::{
    element_matrix_qfree, element_matrix_qfree_inline, element_matrix_quadrature, element_rule,
    q_count, ElementCounters, ElementMatrix, ReconstructionPlan,
};
pub use face::{face_coupling, face_rule, FaceCoupling};
pub use global::{assemble_global, AssemblyOptions, AssemblyStats, GlobalSystem};

use crate::{Error, Point, Result};
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Which path produced the volume matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AssemblyPath {
    Quadrature,
    QuadratureFree,
}

impl fmt::Display for AssemblyPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssemblyPath::Quadrature => "quadrature",
            AssemblyPath::QuadratureFree => "qfree",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reaction {
    Constant(f64),
    PerElement(Vec<f64>),
}

/// Coefficients of `b·∇u + c u = f` with inflow datum `g`.
#[derive(Clone)]
pub struct TransportData {
    pub wind: Point,
    pub reaction: Reaction,
    pub source: ScalarFn,
    pub inflow: ScalarFn,
}

impl fmt::Debug for TransportData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransportData")
            .field("wind", &self.wind)
            .field("reaction", &self.reaction)
            .finish_non_exhaustive()
    }
}

impl TransportData {
    /// A zero wind is accepted for element-level work; flow ordering
    /// rejects it.
    pub fn new(
        wind: Point,
        reaction: Reaction,
        source: ScalarFn,
        inflow: ScalarFn,
    ) -> Result<Self> {
        if !wind.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("wind must be finite".into()));
        }
        let ok = match &reaction {
            Reaction::Constant(c) => c.is_finite(),
            Reaction::PerElement(v) => v.iter().all(|c| c.is_finite()),
        };
        if !ok {
            return Err(Error::InvalidInput("reaction coefficient must be finite".into()));
        }
        Ok(Self {
            wind,
            reaction,
            source,
            inflow,
        })
    }

    /// Constant data with closures for `f` and `g`.
    pub fn constant(
        wind: Point,
        c: f64,
        f: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        g: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(wind, Reaction::Constant(c), Arc::new(f), Arc::new(g))
    }

    pub fn reaction(&self, element: usize) -> f64 {
        match &self.reaction {
            Reaction::Constant(c) => *c,
            Reaction::PerElement(v) => v[element],
        }
    }
}
