//! Decoupling of square systems by regular periodic state feedback, and
//! realization of cyclic compensators as state feedback.

use crate::cyclic::{build_cyclic, cyclic_hermite, CyclicBundle};
use crate::error::{Error, Result};
use crate::hermite::CyclicHermite;
use crate::periodic::{DecouplingReport, FeedbackLaw, PeriodicSystem};
use crate::qmat::QMat;
use crate::ratmat::RatMat;

/// How the target matrix relates to the compensator `Z = V^(-1) L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// The target is the unimodular `U` itself; `V = U^(-1)`, `L = I`.
    Unimodular,
    /// The target is `V`, and `L` is supplied.
    Nonsquare,
}

#[derive(Clone, Debug)]
pub struct RealizationResult {
    pub k_bar: QMat,
    pub f_bar: QMat,
    pub g_bar: QMat,
    pub law: FeedbackLaw,
    /// True if `F = +V(inf)^(-1) K` was needed instead of the minus sign.
    pub sign_flipped: bool,
}

pub(crate) fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut off = vec![0];
    for s in sizes {
        off.push(off.last().unwrap() + s);
    }
    off
}

/// True iff `m` vanishes outside its diagonal blocks.
pub fn is_block_diagonal_q(m: &QMat, row_sizes: &[usize], col_sizes: &[usize]) -> bool {
    let (ro, co) = (offsets(row_sizes), offsets(col_sizes));
    for bi in 0..row_sizes.len() {
        for bj in 0..col_sizes.len() {
            if bi == bj {
                continue;
            }
            for i in ro[bi]..ro[bi + 1] {
                for j in co[bj]..co[bj + 1] {
                    if !num_traits::Zero::is_zero(&m[(i, j)]) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Every `p x p` block of `delta` is diagonal.
pub fn square_solvable(delta: &RatMat, p: usize, t: usize) -> bool {
    if delta.rows() != p * t || delta.cols() != p * t {
        return false;
    }
    delta.entries().all(|((i, j), e)| i % p == j % p || e.is_zero())
}

/// Solves `V(z) - V(inf) = K S(z)` for a constant `K` whose nonzero entries
/// are confined to the diagonal blocks (input block `k`, state block `k`).
pub fn solve_k(v: &RatMat, bundle: &CyclicBundle) -> Result<QMat> {
    let ns: usize = bundle.state_blocks.iter().sum();
    let v_inf = v.value_at_infinity()?;
    let strict = v - &RatMat::from_qmat(&v_inf);
    let rows = v.rows();
    let depth = ns.max(1);
    let coeffs = strict.expand_at_infinity(depth)?;
    let mut krylov_parts = Vec::with_capacity(depth);
    let mut x = bundle.b_bar.clone();
    for _ in 0..depth {
        krylov_parts.push(x.clone());
        x = &bundle.a_bar * &x;
    }
    let krylov = QMat::hstack(&krylov_parts.iter().collect::<Vec<_>>());
    let rhs = QMat::hstack(&coeffs[1..].iter().collect::<Vec<_>>());
    let so = offsets(&bundle.state_blocks);
    let m = rows / bundle.period;
    let mut k_bar = QMat::zeros(rows, ns);
    let mut constrained_ok = true;
    for r in 0..rows {
        let blk = r / m;
        let sub = krylov.submatrix(so[blk], 0, so[blk + 1] - so[blk], krylov.cols());
        let target = QMat::column_vector(rhs.row(r));
        match sub.transpose().solve(&target) {
            Some(sol) => {
                for (k, c) in (so[blk]..so[blk + 1]).enumerate() {
                    k_bar[(r, c)] = sol[(k, 0)].clone();
                }
            }
            None => {
                constrained_ok = false;
                break;
            }
        }
    }
    if !constrained_ok {
        return match krylov.transpose().solve(&rhs.transpose()) {
            Some(_) => Err(Error::NotBlockDiagonal),
            None => Err(Error::NoConstantSolution(
                "no constant K matches the impulse coefficients".into(),
            )),
        };
    }
    if (&RatMat::from_qmat(&k_bar) * &bundle.s_bar) != strict {
        return Err(Error::NoConstantSolution("K S(z) does not reproduce V(z) - V(inf)".into()));
    }
    Ok(k_bar)
}

/// Extracts the per-time law from block-diagonal cyclic gains.
pub fn law_from_cyclic(f_bar: &QMat, g_bar: &QMat, bundle: &CyclicBundle) -> FeedbackLaw {
    let t = bundle.period;
    let so = offsets(&bundle.state_blocks);
    let m = f_bar.rows() / t;
    let q = g_bar.cols() / t;
    let mut f = vec![QMat::zeros(0, 0); t];
    let mut g = vec![QMat::zeros(0, 0); t];
    for k in 0..t {
        let time = (bundle.tau + k as i64).rem_euclid(t as i64) as usize;
        f[time] = f_bar.submatrix(k * m, so[k], m, bundle.state_blocks[k]);
        g[time] = g_bar.submatrix(k * m, k * q, m, q);
    }
    FeedbackLaw { f, g }
}

/// `(I - F S(z))^(-1) G`, the compensator realized by cyclic gains.
pub fn realized_compensator(f_bar: &QMat, g_bar: &QMat, bundle: &CyclicBundle) -> Result<RatMat> {
    let n = f_bar.rows();
    let fs = &RatMat::from_qmat(f_bar) * &bundle.s_bar;
    let inner = &RatMat::identity(n) - &fs;
    Ok(&inner.inverse()? * &RatMat::from_qmat(g_bar))
}

/// Realizes the compensator `Z = V^(-1) L` as `F = -V(inf)^(-1) K`,
/// `G = V(inf)^(-1) L` and verifies `(I - F S)^(-1) G = Z` exactly.
pub fn realize_compensator(
    target: &RatMat,
    l_bar: Option<&RatMat>,
    bundle: &CyclicBundle,
    convention: Convention,
) -> Result<RealizationResult> {
    let t = bundle.period;
    let (v, l, z) = match convention {
        Convention::Unimodular => {
            let n = target.rows();
            (target.inverse()?, RatMat::identity(n), target.clone())
        }
        Convention::Nonsquare => {
            let l = l_bar
                .ok_or_else(|| Error::DimensionMismatch("nonsquare realization needs L".into()))?
                .clone();
            let z = &target.inverse()? * &l;
            (target.clone(), l, z)
        }
    };
    let m = v.rows() / t;
    let q = l.cols() / t;
    let v_inf = v.value_at_infinity()?;
    if !is_block_diagonal_q(&v_inf, &vec![m; t], &vec![m; t]) {
        return Err(Error::NotBlockDiagonal);
    }
    let v_inf_inv = v_inf.inverse()?;
    let l_const = l.value_at_infinity()?;
    if RatMat::from_qmat(&l_const) != l {
        return Err(Error::DimensionMismatch("L must be constant".into()));
    }
    let k_bar = solve_k(&v, bundle)?;
    let g_bar = &v_inf_inv * &l_const;
    if !is_block_diagonal_q(&g_bar, &vec![m; t], &vec![q; t]) {
        return Err(Error::NotBlockDiagonal);
    }
    let base = &v_inf_inv * &k_bar;
    for (flip, f_bar) in [(false, -&base), (true, base.clone())] {
        if realized_compensator(&f_bar, &g_bar, bundle).is_ok_and(|r| r == z) {
            let law = law_from_cyclic(&f_bar, &g_bar, bundle);
            return Ok(RealizationResult { k_bar, f_bar, g_bar, law, sign_flipped: flip });
        }
    }
    Err(Error::VerificationFailed("realized compensator differs from the target".into()))
}

#[derive(Clone, Debug)]
pub struct SquareOutcome {
    pub bundle: CyclicBundle,
    pub hermite: CyclicHermite,
    pub realization: RealizationResult,
    pub closed: PeriodicSystem,
    pub report: DecouplingReport,
}

impl SquareOutcome {
    pub fn law(&self) -> &FeedbackLaw {
        &self.realization.law
    }
}

pub fn decouple_square(sys: &PeriodicSystem, tau: i64, horizon: Option<usize>) -> Result<SquareOutcome> {
    if sys.inputs() != sys.outputs() {
        return Err(Error::DimensionMismatch(format!(
            "square decoupling needs m = p, got m = {}, p = {}",
            sys.inputs(),
            sys.outputs()
        )));
    }
    if !sys.is_stable() {
        return Err(Error::NotStable);
    }
    if !sys.output_reachable() {
        return Err(Error::NotOutputReachable);
    }
    let (p, t) = (sys.outputs(), sys.period());
    let bundle = build_cyclic(sys, tau);
    let hermite = cyclic_hermite(&bundle)?;
    let delta = &hermite.result.h;
    if !square_solvable(delta, p, t) {
        return Err(Error::NotSolvable(
            "a block of the cyclic Hermite form is not diagonal".into(),
        ));
    }
    let realization = realize_compensator(&hermite.result.u, None, &bundle, Convention::Unimodular)?;
    let closed = sys.apply_feedback(&realization.law)?;
    if &build_cyclic(&closed, tau).w_bar != delta {
        return Err(Error::VerificationFailed(
            "closed-loop cyclic transfer differs from the Hermite form".into(),
        ));
    }
    let report = closed.verify_decoupled(horizon);
    if !report.is_decoupled() {
        return Err(Error::VerificationFailed(format!("closed loop not decoupled: {report:?}")));
    }
    Ok(SquareOutcome { bundle, hermite, realization, closed, report })
}
