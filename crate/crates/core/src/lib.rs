//! Exact integration of monomials over polygons and polyhedra by recursive
//! reduction over the facet lattice, and quadrature-free assembly of
//! discontinuous Galerkin transport matrices built on top of it.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: polytopes, facet lattices, signed distances.
//! * [`homint`]: the recursive monomial integrator.
//! * [`quadrature`]: Gauss–Legendre and Duffy rules on sub-tessellations.
//! * [`basis`]: Legendre tensor bases and product coefficient tables.
//! * [`assembly`]: element, face and global DG matrices.
//! * [`mesh`]: mesh I/O, structured meshes and agglomeration.
//! * [`solver`]: flow-ordered block sweeps and an iterative fallback.
//! * [`bench`]: benchmark records shared by the command-line harness.

pub mod assembly;
pub mod basis;
pub mod bench;
pub mod error;
pub mod geometry;
pub mod homint;
pub mod mesh;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};

/// Coordinates are stored as 3-vectors; planar data keeps `z = 0`.
pub type Point = nalgebra::Vector3<f64>;

/// Run `f` inside a dedicated rayon pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()?;
    Ok(pool.install(f))
}
