//! Counting recoverable supports: exhaustive enumeration for small `n`,
//! closed-form values and bounds, and the structural identities between
//! neighbouring sizes.

mod curve;
mod enumerate;
mod formulas;
mod gaussian;

pub use curve::{binomial, total_pairs, CountCurve, CurveSource};
pub use enumerate::{enumerate_lambda, CensusOptions, DEFAULT_GUARD};
pub use formulas::{
    adjacency_ratio, donoho_necessary_bound, heuristic_xi_bound, lambda_size_l_minus_1,
    lower_bound_simple, mb_lambda_maximal, regular_section_lower_bound, xi_coherence_regime,
    xi_maximal, xi_size_m_minus_1, BoundKind, BoundRecord,
};
pub use gaussian::expected_gaussian_maximal;
