//! Polytopes in two and three dimensions and their facet lattices.

mod lattice;
mod polytope;
pub mod shapes;

pub use lattice::{
    build_facet_lattice, lattice_counts, FacetLattice, FacetNode, HyperplaneFrame, LatticeCounts,
    LatticeEdge,
};
pub use polytope::{newell_normal, Polytope, Simplex};
