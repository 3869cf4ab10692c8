//! Faces of the psd cone, facial reduction, minimal cones, singularity
//! degrees and the exact gap certifier.

mod certify;
mod chain;
mod cone;
mod face;
mod probe;
mod singdeg;

pub use certify::{certify_gap, replay, solve_diagonal_lp, CertValue, GapCertificate, ReducedDual};
pub use chain::{eliminate, relint_point, replay_steps, Constraint, Elimination, Rule, TraceStep};
pub use cone::{constraint_list, minimal_cone, MinimalCone, Which};
pub use face::{in_span, is_regularized, verify_fr_sequence, Face, FaceChain, FrSequence};
pub use probe::{weak_infeasibility_probe, ProbeTrace, PROBE_STOP};
pub use singdeg::{
    bounds_check, claim_check, recognize, singularity_degree, BoundsReport, ClaimReport, DegreeBound, DegreeKind,
    SingularityDegree, StrictDualCheck,
};
