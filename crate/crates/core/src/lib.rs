//! Necessary conditions and constructions for 2-designs over finite fields
//! with a prescribed automorphism group.
//!
//! The pipeline: point orbits of a matrix group, the sigma table of the point
//! partition, enumeration of tactical decomposition matrices, the cubic
//! filter for `q = 2`, and orbit-selection construction with verification.

pub mod construct;
pub mod error;
pub mod field;
pub mod group;
pub mod params;
pub mod refine;
pub mod tactical;

pub use construct::{
    build_km_system, induced_matrix, search_designs, verify_design, ConstructOptions,
    ConstructStats, Decomposition, DesignInstance, DesignReport, DesignViolation,
    KramerMesnerSystem,
};
pub use error::{Error, Result};
pub use field::{
    canonicalize_point, enumerate_points, enumerate_subspaces, gauss_binom, gauss_binom_ext, rref,
    FieldSpec, ProjectivePoint, Subspace,
};
pub use group::{
    close_group, point_orbits, sigma_table, subspace_orbits, GfMatrix, MatrixGroup,
    PointOrbitPartition, SigmaTable, SubspaceOrbit, SubspaceOrbitPartition,
};
pub use params::DesignParams;
pub use refine::{all_bounds, bounds, filter, first_violation, triple_sum, FilterReport, TripleBound};
pub use tactical::{
    candidate_profiles, check_equations, profiles_within, enumerate_rho, enumerate_rho_with, row_symmetries,
    BlockOrbitProfile, EnumOptions, ProfileOptions, SearchStats, TacticalMatrix, Violation,
};
