//! Exact decoupling of linear periodic discrete-time systems via cyclic
//! representations and Hermite forms over the ring of proper stable
//! rational functions.

pub mod cyclic;
pub mod error;
pub mod fixtures;
pub mod hermite;
pub mod periodic;
pub mod poly;
pub mod qmat;
pub mod ratfun;
pub mod ratmat;
pub mod roots;
pub mod selem;
pub mod nonsquare;
pub mod square;

pub use cyclic::{build_cyclic, CyclicBundle};
pub use error::{Error, Result};
pub use periodic::{DecouplingReport, FeedbackLaw, MarkovSequence, PeriodicSystem};
pub use hermite::{cyclic_hermite_form, hermite_form_s, hermite_form_s_with, verify_hermite, ColumnOp, HermiteResult, PivotStrategy};
pub use poly::{Poly, Q};
pub use qmat::QMat;
pub use ratfun::RatFun;
pub use ratmat::{invariant_factor_orders, unimodular_kind, RatMat, UnimodularKind};
pub use selem::{is_member_s, s_divide, s_gcd, s_normal_form, s_order, SElem};
pub use nonsquare::{
    decouple_nonsquare, CandidateLists, CompensatorParts, DecouplingInvariants, IntegerList, NonsquareOptions,
    NonsquareOutcome,
};
pub use square::{decouple_square, realize_compensator, Convention, RealizationResult, SquareOutcome};
