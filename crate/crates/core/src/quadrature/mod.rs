//! Gauss–Legendre and Duffy rules composed over simplicial sub-tessellations.

mod gauss;
mod tessellation;

pub use gauss::{duffy_simplex_rule, gauss_legendre_1d, GaussLegendre};
pub use tessellation::{
    integrate, monomial_moments, polytope_rule, segment_rule, simplex_rule, subtessellate,
    tessellation_rule, triangle_rule_3d, QuadratureRule, SubTessellation, TessellationMode,
};
