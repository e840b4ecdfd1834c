//! Recursive exact integration of monomial families over a facet lattice.

mod monomials;
mod table;

pub use monomials::{monomial_set, MonomialSet, MultiIndex};
pub use table::{
    compute_integrals, extend_integrals, flop_prediction, FlopPrediction, IntegrationOptions,
    MonomialTable, OpCounters, RefPoint,
};
