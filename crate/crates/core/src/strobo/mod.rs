//! Stroboscopical properties of generalized shifts.

mod rho;
pub mod sequence;

pub use rho::{
    build_rho, build_rho_all_periodic, build_rho_aperiodic, verify_uniform_convergence, AperiodicPart, ChainType,
    ClassPlan, ConvergenceFailure, ConvergenceOutcome, PeriodicPart, RhoKind, RhoMap,
};
pub use sequence::{
    congruence_refine, congruence_subsequence, gap_refine, gap_subsequence, has_growing_gaps, ResidueTable,
    SequenceKind, SequenceSpec, DEFAULT_PREFIX,
};

use crate::index_maps::{decide_injective, decide_periodic_free, FunctionalMap, Verdict};

/// Strobo and uniform strobo both hold exactly for injective maps.
pub fn decide_strobo(map: &FunctionalMap) -> Verdict {
    decide_injective(map)
}

pub fn decide_uniform_strobo(map: &FunctionalMap) -> Verdict {
    decide_injective(map)
}

/// Strong strobo: injective and without periodic points.
pub fn decide_strong_strobo(map: &FunctionalMap) -> Verdict {
    decide_injective(map).and(decide_periodic_free(map))
}
