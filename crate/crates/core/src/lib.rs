//! Exact evaluation of how well a nonnegative activity matrix supports a
//! nonnegative linear readout.
//!
//! For an `m × n` state matrix `C`, the representation error is the mean,
//! over all desired outputs `d ∈ [0,1]^m`, of the squared distance from
//! `d` to the conical hull of the columns of `C`. [`evaluate`] computes it
//! exactly by partitioning the hypercube into regions that share a nearest
//! cone face and integrating a quadratic polynomial over each region;
//! [`ir_num`] estimates the same quantity by midpoint-rule quadrature with
//! an NNLS fit at every sample.

pub mod cone;
pub mod encode;
pub mod error;
pub mod evaluator;
pub mod facets;
pub mod integrate;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod region;
pub mod report;
pub mod tolerance;

pub use cone::{
    adjacent_cone, adjacent_facets, cone_contains, cone_sub_elements, coni_facets,
    facet_normal_outward, AdjacentCone, Cone, StateMatrix,
};
pub use encode::{bin_spikes, SlotConfig, SpikeTrain};
pub use error::{Error, Result};
pub use evaluator::{
    evaluate, output_volume, region_report, EvalConfig, EvaluationResult, Method, RegionRecord,
};
pub use integrate::{region_integral, simplex_integral, squared_distance, Simplex};
pub use linalg::{gram_schmidt, normal_vector, simplex_volume, OrthonormalBasis, Vector};
pub use oracle::{
    convergence_study, ir_num, nnls, residual_sq, ConvergenceRow, NnlsSolver, QuadratureResult,
    WeightVector,
};
pub use region::{
    build_region, hypercube_intersect, polytope_facets, triangulate_polytope, RegionPolytope,
};
pub use tolerance::Tolerances;
