//! Cyclic (lifted) time-invariant representation of a periodic system.

use num_traits::Zero;

use crate::error::Result;
use crate::hermite::{cyclic_hermite_form, CyclicHermite};
use crate::periodic::PeriodicSystem;
use crate::poly::{Poly, Q};
use crate::qmat::QMat;
use crate::ratfun::RatFun;
use crate::ratmat::{resolvent, RatMat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicBundle {
    pub tau: i64,
    pub period: usize,
    pub m: usize,
    pub p: usize,
    /// `n(tau), ..., n(tau + T - 1)`.
    pub state_blocks: Vec<usize>,
    pub a_bar: QMat,
    pub b_bar: QMat,
    pub c_bar: QMat,
    pub d_bar: QMat,
    pub w_bar: RatMat,
    pub s_bar: RatMat,
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut off = vec![0];
    for s in sizes {
        off.push(off.last().unwrap() + s);
    }
    off
}

pub fn build_cyclic(sys: &PeriodicSystem, tau: i64) -> CyclicBundle {
    let t = sys.period();
    let (m, p) = (sys.inputs(), sys.outputs());
    let state_blocks: Vec<usize> = (0..t as i64).map(|k| sys.n(tau + k)).collect();
    let so = offsets(&state_blocks);
    let ns = so[t];
    let mut a_bar = QMat::zeros(ns, ns);
    let mut b_bar = QMat::zeros(ns, m * t);
    let mut c_bar = QMat::zeros(p * t, ns);
    let mut d_bar = QMat::zeros(p * t, m * t);
    for k in 0..t {
        let time = tau + k as i64;
        let next = (k + 1) % t;
        a_bar.set_block(so[next], so[k], sys.a(time));
        b_bar.set_block(so[next], k * m, sys.b(time));
        c_bar.set_block(k * p, so[k], sys.c(time));
        d_bar.set_block(k * p, k * m, sys.d(time));
    }
    let s_bar = &resolvent(&a_bar) * &RatMat::from_qmat(&b_bar);
    let w_bar = &(&RatMat::from_qmat(&c_bar) * &s_bar) + &RatMat::from_qmat(&d_bar);
    CyclicBundle { tau, period: t, m, p, state_blocks, a_bar, b_bar, c_bar, d_bar, w_bar, s_bar }
}

/// Sampled transfer function `H_i(w, tau)` as a matrix in `w = z^T`.
pub fn sampled_transfer(sys: &PeriodicSystem, i: usize, tau: i64) -> RatMat {
    let t = sys.period();
    assert!(i < t, "sampled transfer index out of range");
    let (psi, _) = sys.monodromy(tau);
    let res = &RatMat::from_qmat(sys.c(tau)) * &resolvent(&psi);
    if i == 0 {
        let phi = sys.transition(tau, tau - t as i64 + 1).expect("forward range");
        let tail = RatMat::from_qmat(&(&phi * sys.b(tau)));
        &(&res * &tail) + &RatMat::from_qmat(sys.d(tau))
    } else {
        let phi = sys.transition(tau, tau - i as i64 + 1).expect("forward range");
        let tail = RatMat::from_qmat(&(&phi * sys.b(tau - i as i64)));
        (&res * &tail).scale(&RatFun::from_poly(Poly::z()))
    }
}

/// Assembles the cyclic transfer matrix from sampled transfer functions:
/// block `(i, j)` is `H_s(z^T, tau + i) z^(-s)` with `s = (i - j) mod T`.
pub fn cyclic_from_sampled(sys: &PeriodicSystem, tau: i64) -> RatMat {
    let t = sys.period();
    let (m, p) = (sys.inputs(), sys.outputs());
    let mut w = RatMat::zeros(p * t, m * t);
    for i in 0..t {
        for j in 0..t {
            let s = (i + t - j) % t;
            let h = sampled_transfer(sys, s, tau + i as i64).compose_power(t);
            let block = h.scale(&RatFun::z_inv(Q::from_integer(1.into()), s));
            w.set_block(i * p, j * m, &block);
        }
    }
    w
}

fn rotate_q(mat: &QMat, rows: &[usize], cols: &[usize]) -> QMat {
    let (ro, co) = (offsets(rows), offsets(cols));
    let t = rows.len();
    let new_rows: Vec<usize> = (0..t).map(|i| rows[(i + 1) % t]).collect();
    let new_cols: Vec<usize> = (0..t).map(|j| cols[(j + 1) % t]).collect();
    let (nro, nco) = (offsets(&new_rows), offsets(&new_cols));
    let mut out = QMat::zeros(mat.rows(), mat.cols());
    for i in 0..t {
        for j in 0..t {
            let (oi, oj) = ((i + 1) % t, (j + 1) % t);
            let block = mat.submatrix(ro[oi], co[oj], rows[oi], cols[oj]);
            out.set_block(nro[i], nco[j], &block);
        }
    }
    out
}

fn rotate_r(mat: &RatMat, rows: &[usize], cols: &[usize]) -> RatMat {
    let (ro, co) = (offsets(rows), offsets(cols));
    let t = rows.len();
    let new_rows: Vec<usize> = (0..t).map(|i| rows[(i + 1) % t]).collect();
    let new_cols: Vec<usize> = (0..t).map(|j| cols[(j + 1) % t]).collect();
    let (nro, nco) = (offsets(&new_rows), offsets(&new_cols));
    let mut out = RatMat::zeros(mat.rows(), mat.cols());
    for i in 0..t {
        for j in 0..t {
            let (oi, oj) = ((i + 1) % t, (j + 1) % t);
            let block = mat.submatrix(ro[oi], co[oj], rows[oi], cols[oj]);
            out.set_block(nro[i], nco[j], &block);
        }
    }
    out
}

/// The bundle at `tau + 1`, obtained by cyclically permuting blocks.
pub fn shift_tau(b: &CyclicBundle) -> CyclicBundle {
    let t = b.period;
    let sb = &b.state_blocks;
    let ib = vec![b.m; t];
    let ob = vec![b.p; t];
    CyclicBundle {
        tau: b.tau + 1,
        period: t,
        m: b.m,
        p: b.p,
        state_blocks: (0..t).map(|k| sb[(k + 1) % t]).collect(),
        a_bar: rotate_q(&b.a_bar, sb, sb),
        b_bar: rotate_q(&b.b_bar, sb, &ib),
        c_bar: rotate_q(&b.c_bar, &ob, sb),
        d_bar: rotate_q(&b.d_bar, &ob, &ib),
        w_bar: rotate_r(&b.w_bar, &ob, &ib),
        s_bar: rotate_r(&b.s_bar, sb, &ib),
    }
}

fn is_function_of_power(f: &RatFun, t: usize) -> bool {
    let only_multiples =
        |p: &Poly| p.coeffs().iter().enumerate().all(|(k, c)| c.is_zero() || k % t == 0);
    only_multiples(f.num()) && only_multiples(f.den())
}

/// True iff `m` (of size `pT x mT`) is block diagonal at infinity and every
/// block `(i, j)` is a function of `z^T` times `z^(-((i - j) mod T))`.
pub fn check_cyclic_structure(mat: &RatMat, p: usize, m: usize, t: usize) -> bool {
    if mat.rows() != p * t || mat.cols() != m * t {
        return false;
    }
    let Ok(inf) = mat.value_at_infinity() else {
        return false;
    };
    for ((r, c), e) in mat.entries() {
        let (i, j) = (r / p, c / m);
        if i != j && !inf[(r, c)].is_zero() {
            return false;
        }
        let s = (i + t - j) % t;
        let lifted = e * &RatFun::z_pow(Q::from_integer(1.into()), s as i64);
        if !is_function_of_power(&lifted, t) {
            return false;
        }
    }
    true
}

/// Cycles a signal given from time 0: at time `k`, the block with index
/// `(k - tau) mod T` carries `v(k)` and the others are zero.
pub fn cycle_signal(v: &[Vec<Q>], tau: i64, t: usize) -> Vec<Vec<Q>> {
    v.iter()
        .enumerate()
        .map(|(k, x)| {
            let q = x.len();
            let slot = (k as i64 - tau).rem_euclid(t as i64) as usize;
            let mut out = vec![Q::zero(); q * t];
            out[slot * q..(slot + 1) * q].clone_from_slice(x);
            out
        })
        .collect()
}

/// Block-respecting Hermite form of the bundle's cyclic transfer matrix.
pub fn cyclic_hermite(b: &CyclicBundle) -> Result<CyclicHermite> {
    cyclic_hermite_form(&b.w_bar, b.p, b.m, b.period)
}
