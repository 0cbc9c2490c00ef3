//! Generators and property checks shared by the property suites and the
//! acceptance target.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use perdec_core::cyclic::{cycle_signal, shift_tau};
use perdec_core::hermite::{hermite_form_s_with, verify_hermite, PivotStrategy};
use perdec_core::poly::{q, qr};
use perdec_core::roots::is_schur_stable;
use perdec_core::{
    build_cyclic, invariant_factor_orders, Error, s_divide, s_gcd, PeriodicSystem, Poly, QMat, RatFun, RatMat, SElem, Q,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// `(z - r) / z` for a root `r`; outside the disk this has order 1, inside
/// it is a unit.
fn zero_factor(r: Q) -> RatFun {
    RatFun::new(Poly::linear_root(r), Poly::z()).unwrap()
}

/// `z / (z - r)` for `|r| < 1`, a unit.
fn pole_factor(r: Q) -> RatFun {
    RatFun::new(Poly::z(), Poly::linear_root(r)).unwrap()
}

fn pool() -> Vec<RatFun> {
    vec![
        RatFun::z_inv(q(1), 1),
        zero_factor(q(2)),
        zero_factor(q(-3)),
        zero_factor(q(1)),
        zero_factor(qr(1, 2)),
        pole_factor(qr(1, 3)),
        pole_factor(qr(-1, 2)),
    ]
}

/// Up to three pool factors times a small nonzero constant.
pub fn s_elem() -> impl Strategy<Value = SElem> {
    let n = pool().len();
    (prop::collection::vec(0..n, 0..=3), -3i64..=3).prop_map(|(picks, c)| {
        let c = if c == 0 { 1 } else { c };
        let pool = pool();
        let f = picks.iter().fold(RatFun::from_i64(c), |f, &k| &f * &pool[k]);
        SElem::new(f).expect("pool elements lie in S")
    })
}

/// Like [`s_elem`] but zero with some probability.
pub fn s_elem_or_zero() -> impl Strategy<Value = SElem> {
    prop_oneof![1 => Just(SElem::zero()), 3 => s_elem()]
}

pub fn s_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RatMat> {
    prop::collection::vec(s_elem_or_zero(), rows * cols)
        .prop_map(move |v| RatMat::from_fn(rows, cols, |i, j| v[i * cols + j].value().clone()))
}

/// Products of elementary matrices over S: unit scalings and additions of
/// multiples of one column to another.
pub fn unimodular(n: usize) -> impl Strategy<Value = RatMat> {
    let op = (0..n, 0..n, s_elem_or_zero(), prop::bool::ANY);
    prop::collection::vec(op, 1..5).prop_map(move |ops| {
        let mut u = RatMat::identity(n);
        for (a, b, f, scale) in ops {
            if a == b || scale {
                let unit = SElem::new(pole_factor(qr(1, 4))).unwrap();
                u.scale_col(a, unit.value());
            } else {
                u.add_col_multiple(a, b, f.value());
            }
        }
        u
    })
}

fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = QMat> {
    prop::collection::vec(-2i64..=2, rows * cols).prop_map(move |v| {
        QMat::from_rows((0..rows).map(|i| (0..cols).map(|j| q(v[i * cols + j])).collect()).collect())
    })
}

/// Random systems with `T` in 1..=3 and all dimensions at most 3.
pub fn small_system() -> impl Strategy<Value = PeriodicSystem> {
    (1usize..=3, 1usize..=3, 1usize..=3)
        .prop_flat_map(|(t, m, p)| (prop::collection::vec(1usize..=3, t), Just(m), Just(p)))
        .prop_flat_map(|(dims, m, p)| {
            let t = dims.len();
            let a: Vec<_> = (0..t).map(|k| small_matrix(dims[(k + 1) % t], dims[k])).collect();
            let b: Vec<_> = (0..t).map(|k| small_matrix(dims[(k + 1) % t], m)).collect();
            let c: Vec<_> = (0..t).map(|k| small_matrix(p, dims[k])).collect();
            let d: Vec<_> = (0..t).map(|_| small_matrix(p, m)).collect();
            (Just(dims), Just(m), Just(p), a, b, c, d)
        })
        .prop_map(|(dims, m, p, a, b, c, d)| PeriodicSystem::new(dims, m, p, a, b, c, d).unwrap())
}

fn fail(msg: impl Into<String>) -> TestCaseError {
    TestCaseError::fail(msg.into())
}

/// Irrational factors with zeros on both sides of the circle have no normal
/// form over the rationals; such cases are discarded, not failed.
fn algebra_err(e: Error) -> TestCaseError {
    match e {
        Error::UnsupportedFactor(f) => TestCaseError::reject(format!("unsupported factor {f}")),
        e => fail(e.to_string()),
    }
}

type Check = Result<(), TestCaseError>;

// Algebra properties.

pub fn order_additivity(x: &SElem, y: &SElem) -> Check {
    let xy = x * y;
    let ord = |v: &SElem| v.order().map_err(algebra_err);
    prop_assert_eq!(ord(&xy)?, ord(x)? + ord(y)?);
    Ok(())
}

pub fn division_contract(x: &SElem, y: &SElem) -> Check {
    let (qt, r) = s_divide(x, y).map_err(algebra_err)?;
    prop_assert_eq!(&(&(&qt * y) + &r), x);
    prop_assert!(r.is_zero() || r.order().map_err(algebra_err)? < y.order().map_err(algebra_err)?);
    Ok(())
}

pub fn gcd_divides(x: &SElem, y: &SElem) -> Check {
    let g = s_gcd(x, y).map_err(algebra_err)?;
    prop_assert!(g.divides(x) && g.divides(y));
    prop_assert_eq!(&g.normal_form().map_err(algebra_err)?.0, &g);
    Ok(())
}

pub fn hermite_postconditions(m: &RatMat) -> Check {
    for strategy in [PivotStrategy::MinOrder, PivotStrategy::FirstNonzero] {
        let res = hermite_form_s_with(m, strategy).map_err(algebra_err)?;
        verify_hermite(m, &res).map_err(|e| match e {
            Error::UnsupportedFactor(_) => algebra_err(e),
            e => fail(format!("{strategy:?}: {e}")),
        })?;
    }
    Ok(())
}

/// For square nonsingular input the Hermite form is unique.
pub fn hermite_uniqueness(m: &RatMat) -> Check {
    if m.determinant().unwrap().is_zero() {
        return Ok(());
    }
    let a = hermite_form_s_with(m, PivotStrategy::MinOrder).map_err(algebra_err)?;
    let b = hermite_form_s_with(m, PivotStrategy::FirstNonzero).map_err(algebra_err)?;
    prop_assert_eq!(a.h, b.h);
    Ok(())
}

/// `left` and `right` are unimodular of matching sizes.
pub fn invariant_orders_invariance(m: &RatMat, left: &RatMat, right: &RatMat) -> Check {
    let before = invariant_factor_orders(m).map_err(algebra_err)?;
    let after = invariant_factor_orders(&(&(left * m) * right)).map_err(algebra_err)?;
    prop_assert_eq!(before, after);
    Ok(())
}

// Structural properties.

/// `det(zI - A_bar) = +-det(z^T I - Psi(0)) z^(sum n - T n(0))`, with both
/// sides multiplied through when the exponent is negative.
pub fn char_poly_identity(sys: &PeriodicSystem) -> Check {
    let b = build_cyclic(sys, 0);
    let lhs = b.a_bar.char_poly();
    let (psi, _) = sys.monodromy(0);
    let t = sys.period();
    let shift = sys.total_states() as i64 - (t * sys.n(0)) as i64;
    let lhs = lhs.shift((-shift).max(0) as usize);
    let rhs = psi.char_poly().compose_power(t).shift(shift.max(0) as usize);
    prop_assert!(lhs == rhs || lhs == rhs.scale(&q(-1)), "{lhs:?} vs {rhs:?}");
    Ok(())
}

/// One shift is a block rotation, and `T` shifts return to the start.
pub fn shift_laws(sys: &PeriodicSystem) -> Check {
    let b0 = build_cyclic(sys, 0);
    let b1 = shift_tau(&b0);
    prop_assert_eq!(&b1, &build_cyclic(sys, 1));
    let mut b = b0.clone();
    for _ in 0..sys.period() {
        b = shift_tau(&b);
    }
    prop_assert_eq!(b.tau, sys.period() as i64);
    b.tau = 0;
    prop_assert_eq!(&b, &b0);
    Ok(())
}

fn to_f64(m: &QMat) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].to_f64().unwrap())
}

/// Monodromy test, cyclic-matrix test and a floating-point eigenvalue
/// oracle must agree (the oracle is skipped near the unit circle).
pub fn stability_equivalence(sys: &PeriodicSystem) -> Check {
    let by_monodromy = sys.is_stable();
    let a_bar = build_cyclic(sys, 0).a_bar;
    let by_cyclic = is_schur_stable(&a_bar.char_poly());
    prop_assert_eq!(by_monodromy, by_cyclic);
    let (psi, _) = sys.monodromy(0);
    if psi.rows() > 0 {
        let radius = to_f64(&psi).complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max);
        if (radius - 1.0).abs() > 1e-6 {
            prop_assert_eq!(by_monodromy, radius < 1.0, "spectral radius {}", radius);
        }
    }
    Ok(())
}

/// The two output-reachability tests agree.
pub fn output_reachability_equivalence(sys: &PeriodicSystem) -> Check {
    let w = build_cyclic(sys, 0).w_bar;
    prop_assert_eq!(sys.output_reachable(), w.normal_rank() == sys.outputs() * sys.period());
    Ok(())
}

/// Full row normal rank of the cyclic transfer implies the rank test. The
/// converse fails in general (see the periodic-model unit tests).
pub fn output_reachability_implication(sys: &PeriodicSystem) -> Check {
    let w = build_cyclic(sys, 0).w_bar;
    if w.normal_rank() == sys.outputs() * sys.period() {
        prop_assert!(sys.output_reachable());
    }
    Ok(())
}

/// An impulse on input `j` at time `t0` produces `M_i(t0 + i)` column `j`.
pub fn impulse_consistency(sys: &PeriodicSystem) -> Check {
    let h = 2 * sys.period() + 2;
    let markov = sys.markov(h);
    for t0 in 0..sys.period() as i64 {
        for j in 0..sys.inputs() {
            let mut u = vec![q(0); sys.inputs()];
            u[j] = q(1);
            let x0 = vec![q(0); sys.n(t0)];
            let ys = sys.simulate(&x0, &[u], t0, h + 1).map_err(|e| fail(e.to_string()))?;
            for (i, y) in ys.iter().enumerate() {
                prop_assert_eq!(y, &markov.get(i, t0 + i as i64).col(j));
            }
        }
    }
    Ok(())
}

/// The cyclic system driven by the cycled input reproduces the cycled
/// output of the periodic system.
pub fn cycled_simulation(sys: &PeriodicSystem, seed: &[i64]) -> Check {
    let steps = 8;
    let t = sys.period();
    let b = build_cyclic(sys, 0);
    let ns = sys.total_states();
    let lifted = PeriodicSystem::new(
        vec![ns],
        sys.inputs() * t,
        sys.outputs() * t,
        vec![b.a_bar.clone()],
        vec![b.b_bar.clone()],
        vec![b.c_bar.clone()],
        vec![b.d_bar.clone()],
    )
    .map_err(|e| fail(e.to_string()))?;
    let pick = |k: usize| q(seed[k % seed.len()]);
    let inputs: Vec<Vec<Q>> = (0..steps).map(|k| (0..sys.inputs()).map(|j| pick(3 * k + j)).collect()).collect();
    let x0: Vec<Q> = (0..sys.n(0)).map(|i| pick(i + 7)).collect();
    let mut x0_bar = vec![q(0); ns];
    x0_bar[..x0.len()].clone_from_slice(&x0);
    let ys = sys.simulate(&x0, &inputs, 0, steps).map_err(|e| fail(e.to_string()))?;
    let ys_bar = lifted.simulate(&x0_bar, &cycle_signal(&inputs, 0, t), 0, steps).map_err(|e| fail(e.to_string()))?;
    prop_assert_eq!(ys_bar, cycle_signal(&ys, 0, t));
    Ok(())
}

pub fn structural_suite(sys: &PeriodicSystem) -> Check {
    char_poly_identity(sys)?;
    shift_laws(sys)?;
    stability_equivalence(sys)?;
    output_reachability_implication(sys)?;
    impulse_consistency(sys)?;
    cycled_simulation(sys, &[1, -2, 0, 3, 1, -1, 2])
}
