//! Joint measurability, compatibility regions, and incompatibility criteria
//! for observables.

mod coexist;
mod criteria;
mod joint;

pub use coexist::{
    check_coexistent, check_weakly_coexistent, CoexistenceReport, COEXISTENCE_BINARIZATION_CAP,
    WEAK_COEXISTENCE_OUTCOME_CAP,
};
pub use criteria::{
    commutator_bound, discrepancy, has_projection_in_range, is_informationally_complete,
    jordan_criterion, jordan_product, miyadera_imai, mur_test, unsharpness, zhu_criterion,
    JordanOutcome, MiyaderaImaiOutcome, MurReport, JORDAN_MAX_OBSERVABLES, RANGE_SCAN_CAP,
};
pub use joint::{
    build_postprocess_joint, build_toss_joint, check_joint, cloner_bound, degree_of_compatibility,
    degree_of_compatibility_parallel, postprocessing_order, qp_degree_closed_form,
    region_formula_qp, region_formula_qp_margin, region_membership, Degree, JointObservable,
    JointVerdict, NoiseMode, NoiseSpec, OrderOutcome, JOINT_OUTCOME_CAP,
};

#[cfg(test)]
mod tests;
