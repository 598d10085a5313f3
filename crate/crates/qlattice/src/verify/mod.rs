//! Numerical verification of the family identities.
//!
//! Each check compares two independently computed sides of an identity and
//! reports the worst normalized residual; the suite in [`suite`] runs every
//! applicable check for a configured list of families, deterministically for
//! a fixed seed.

pub mod checks;
pub mod orth;
pub mod structure;
pub mod suite;

use std::collections::BTreeMap;

use crate::families::FamilySpec;
use crate::report::CxPair;

pub use checks::{
    check_derivative_structure, check_mean_product_identity, check_pair_sum_polynomiality,
    check_pearson, check_product_rule, check_sode, check_structure_relation,
    check_summation_by_parts, check_ttrr, check_x_product_mean, extract_ttrr,
    solve_structure_relation, SolvedCoeffs,
};
pub use orth::{
    check_orthogonality_continuous_aw, check_orthogonality_derived,
    check_orthogonality_discrete, OrthogonalityGram, QuadConfig,
};
pub use structure::{closed_coeffs, compare_with_display};
pub use suite::{run_suite, SuiteConfig};

pub(crate) fn params_of(spec: &FamilySpec) -> BTreeMap<String, CxPair> {
    spec.params().iter().map(|(k, &v)| (k.clone(), CxPair::from(v))).collect()
}

/// Pinned default tolerances, one per check class.
pub mod tol {
    pub const PEARSON: f64 = 1e-10;
    pub const SODE: f64 = 1e-7;
    pub const TTRR: f64 = 1e-8;
    pub const STRUCTURE: f64 = 1e-7;
    pub const DERIVATIVE: f64 = 1e-9;
    pub const RODRIGUES_REPRESENTATION: f64 = 1e-6;
    pub const RODRIGUES_RATIO: f64 = 1e-8;
    pub const ORTHOGONALITY: f64 = 1e-8;
    pub const QUADRATURE: f64 = 1e-5;
    pub const IDENTITIES: f64 = 1e-9;
    /// Closed-form displays count as matching below this relative deviation.
    pub const DISPLAY_MATCH: f64 = 1e-6;
}
