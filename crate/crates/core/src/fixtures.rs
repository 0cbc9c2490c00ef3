//! The three worked period-2 systems used throughout the tests, benches and
//! CLI fixtures.

use crate::periodic::{FeedbackLaw, PeriodicSystem};
use crate::qmat::QMat;

fn qm(rows: &[&[i64]]) -> QMat {
    QMat::from_i64(rows)
}

/// Unstable two-state, two-input, two-output system.
pub fn example1_raw() -> PeriodicSystem {
    PeriodicSystem::new(
        vec![2, 2],
        2,
        2,
        vec![qm(&[&[2, 0], &[0, 1]]), qm(&[&[1, 0], &[1, 1]])],
        vec![qm(&[&[1, 1], &[0, 1]]), qm(&[&[0, 1], &[1, 1]])],
        vec![QMat::identity(2), QMat::identity(2)],
        vec![QMat::zeros(2, 2), QMat::zeros(2, 2)],
    )
    .expect("example 1 shapes")
}

/// Stabilizing gains for [`example1_raw`].
pub fn example1_stabilizing_law() -> FeedbackLaw {
    FeedbackLaw {
        f: vec![qm(&[&[-1, 1], &[0, -1]]), qm(&[&[0, 0], &[-1, 0]])],
        g: vec![QMat::identity(2), QMat::identity(2)],
    }
}

/// [`example1_raw`] closed with [`example1_stabilizing_law`].
pub fn example1_stabilized() -> PeriodicSystem {
    example1_raw().apply_feedback(&example1_stabilizing_law()).expect("example 1 feedback")
}

/// Stable system with three inputs, two outputs and state dimensions (3, 2).
pub fn example2() -> PeriodicSystem {
    PeriodicSystem::new(
        vec![3, 2],
        3,
        2,
        vec![QMat::zeros(2, 3), qm(&[&[1, 0], &[0, 1], &[0, 0]])],
        vec![qm(&[&[0, 1, 0], &[0, 0, 1]]), qm(&[&[0, 0, 0], &[0, 0, 1], &[0, 0, 1]])],
        vec![qm(&[&[0, 0, 0], &[-4, 0, 1]]), QMat::zeros(2, 2)],
        vec![qm(&[&[1, 0, 0], &[1, 1, 0]]), qm(&[&[1, 0, 0], &[0, 1, 0]])],
    )
    .expect("example 2 shapes")
}

/// Stable system with three inputs, two outputs and state dimensions (2, 3).
///
/// `A(1)` must be 2x3; its third column is zero, which is what the
/// input-to-state transfer matrix of this system requires.
pub fn example3() -> PeriodicSystem {
    PeriodicSystem::new(
        vec![2, 3],
        3,
        2,
        vec![qm(&[&[0, 0], &[0, 0], &[0, 1]]), qm(&[&[1, 0, 0], &[0, 0, 0]])],
        vec![qm(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]), qm(&[&[1, 0, 0], &[0, 0, 1]])],
        vec![qm(&[&[0, 0], &[1, 0]]), qm(&[&[0, 0, 0], &[1, 0, 0]])],
        vec![qm(&[&[1, 0, 0], &[0, 0, 0]]), qm(&[&[1, 0, 0], &[0, 1, 0]])],
    )
    .expect("example 3 shapes")
}
