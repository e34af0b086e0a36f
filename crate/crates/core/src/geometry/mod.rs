//! Exact integer and rational plane geometry.

mod arcs;
mod hull;
mod vector;
mod zonotope;

pub use arcs::{Arc, ArcSet, LengthVsPi};
pub use hull::{
    convex_hull, hull_contains_origin, nice_vector, normalize_growth_set, separating_halfplane,
    Degeneracy, HalfPlane, LatticePolygon, Normalization, UnimodularMap,
};
pub use vector::{Direction, IntVec2};
pub use zonotope::build_zonotope;
