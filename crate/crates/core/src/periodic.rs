//! Linear periodic discrete-time systems
//! `x(t+1) = A(t) x(t) + B(t) u(t)`, `y(t) = C(t) x(t) + D(t) u(t)`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::Q;
use crate::qmat::QMat;
use crate::roots::is_schur_stable;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicSystem {
    period: usize,
    dims: Vec<usize>,
    m: usize,
    p: usize,
    a: Vec<QMat>,
    b: Vec<QMat>,
    c: Vec<QMat>,
    d: Vec<QMat>,
}

/// `u(t) = F(t) x(t) + G(t) v(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeedbackLaw {
    pub f: Vec<QMat>,
    pub g: Vec<QMat>,
}

impl FeedbackLaw {
    /// `F = 0`, `G = I` for the given system.
    pub fn identity(sys: &PeriodicSystem) -> Self {
        FeedbackLaw {
            f: (0..sys.period).map(|t| QMat::zeros(sys.m, sys.dims[t])).collect(),
            g: (0..sys.period).map(|_| QMat::identity(sys.m)).collect(),
        }
    }

    pub fn period(&self) -> usize {
        self.f.len()
    }

    pub fn is_regular(&self) -> bool {
        self.g.iter().all(|g| g.is_square() && g.rank() == g.rows())
    }

    /// Applies `self` to a system and then `inner` to the result: the law
    /// `u = (F1 + G1 F2) x + G1 G2 v`.
    pub fn then(&self, inner: &FeedbackLaw) -> Result<FeedbackLaw> {
        if self.period() != inner.period() {
            return Err(Error::LengthMismatch(self.period(), inner.period()));
        }
        let mut f = Vec::new();
        let mut g = Vec::new();
        for t in 0..self.period() {
            f.push(self.f[t].try_add(&self.g[t].try_mul(&inner.f[t])?)?);
            g.push(self.g[t].try_mul(&inner.g[t])?);
        }
        Ok(FeedbackLaw { f, g })
    }
}

/// `M_i(t)` for `i = 0..=horizon`, `t = 0..T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovSequence {
    period: usize,
    entries: Vec<Vec<QMat>>,
}

impl MarkovSequence {
    pub fn horizon(&self) -> usize {
        self.entries.len() - 1
    }

    /// `M_i(t)` for any integer `t`.
    pub fn get(&self, i: usize, t: i64) -> &QMat {
        &self.entries[i][t.rem_euclid(self.period as i64) as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Offending {
    pub i: usize,
    pub t: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecouplingReport {
    pub diagonal: bool,
    pub offending: Option<Offending>,
    pub stable: bool,
    pub output_reachable: bool,
}

impl DecouplingReport {
    pub fn is_decoupled(&self) -> bool {
        self.diagonal && self.stable && self.output_reachable
    }
}

impl PeriodicSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dims: Vec<usize>,
        m: usize,
        p: usize,
        a: Vec<QMat>,
        b: Vec<QMat>,
        c: Vec<QMat>,
        d: Vec<QMat>,
    ) -> Result<Self> {
        let period = dims.len();
        if period == 0 {
            return Err(Error::DimensionMismatch("period must be positive".into()));
        }
        for (name, v) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if v.len() != period {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has {} matrices, period is {period}",
                    v.len()
                )));
            }
        }
        for t in 0..period {
            let (n, n1) = (dims[t], dims[(t + 1) % period]);
            let checks = [
                ("A", &a[t], (n1, n)),
                ("B", &b[t], (n1, m)),
                ("C", &c[t], (p, n)),
                ("D", &d[t], (p, m)),
            ];
            for (name, mat, want) in checks {
                if mat.shape() != want {
                    return Err(Error::DimensionMismatch(format!(
                        "{name}({t}) is {}x{}, expected {}x{}",
                        mat.rows(),
                        mat.cols(),
                        want.0,
                        want.1
                    )));
                }
            }
        }
        Ok(PeriodicSystem { period, dims, m, p, a, b, c, d })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_states(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn inputs(&self) -> usize {
        self.m
    }

    pub fn outputs(&self) -> usize {
        self.p
    }

    fn idx(&self, t: i64) -> usize {
        t.rem_euclid(self.period as i64) as usize
    }

    pub fn n(&self, t: i64) -> usize {
        self.dims[self.idx(t)]
    }

    pub fn a(&self, t: i64) -> &QMat {
        &self.a[self.idx(t)]
    }

    pub fn b(&self, t: i64) -> &QMat {
        &self.b[self.idx(t)]
    }

    pub fn c(&self, t: i64) -> &QMat {
        &self.c[self.idx(t)]
    }

    pub fn d(&self, t: i64) -> &QMat {
        &self.d[self.idx(t)]
    }

    /// `Phi(t, tau) = A(t-1) ... A(tau)`.
    pub fn transition(&self, t: i64, tau: i64) -> Result<QMat> {
        if t < tau {
            return Err(Error::BadRange { t, tau });
        }
        let mut phi = QMat::identity(self.n(tau));
        for s in tau..t {
            phi = self.a(s) * &phi;
        }
        Ok(phi)
    }

    /// Monodromy matrix `Psi(tau) = Phi(tau + T, tau)` and the core spectrum
    /// size `min_t n(t)`.
    pub fn monodromy(&self, tau: i64) -> (QMat, usize) {
        let psi = self.transition(tau + self.period as i64, tau).expect("forward range");
        (psi, *self.dims.iter().min().unwrap())
    }

    pub fn is_stable(&self) -> bool {
        let (psi, _) = self.monodromy(0);
        psi.rows() == 0 || is_schur_stable(&psi.char_poly())
    }

    /// `M_0(t) = D(t)`, `M_i(t) = C(t) Phi(t, t-i+1) B(t-i)`.
    pub fn markov(&self, horizon: usize) -> MarkovSequence {
        let mut entries = Vec::with_capacity(horizon + 1);
        entries.push(self.d.clone());
        for i in 1..=horizon as i64 {
            let row = (0..self.period as i64)
                .map(|t| {
                    let phi = self.transition(t, t - i + 1).expect("forward range");
                    &(self.c(t) * &phi) * self.b(t - i)
                })
                .collect();
            entries.push(row);
        }
        MarkovSequence { period: self.period, entries }
    }

    /// `R(t) = [B(t-1), Phi(t, t-1) B(t-2), ..., Phi(t, t-T+1) B(t-T)]`.
    pub fn reach_block(&self, t: i64) -> QMat {
        let parts: Vec<QMat> = (1..=self.period as i64)
            .map(|k| &self.transition(t, t - k + 1).expect("forward range") * self.b(t - k))
            .collect();
        QMat::hstack(&parts.iter().collect::<Vec<_>>())
    }

    /// `R_n(t) = [R(t), Psi(t) R(t), ..., Psi^(n-1)(t) R(t)]` with `n = n(t)`.
    pub fn reachability_matrix(&self, t: i64) -> QMat {
        let r = self.reach_block(t);
        let (psi, _) = self.monodromy(t);
        let mut parts = vec![r];
        for _ in 1..self.n(t) {
            let next = &psi * parts.last().unwrap();
            parts.push(next);
        }
        QMat::hstack(&parts.iter().collect::<Vec<_>>())
    }

    /// `rank [D(t), C(t) R_n(t)] = p` for every `t`.
    pub fn output_reachable(&self) -> bool {
        (0..self.period as i64).all(|t| {
            let crn = self.c(t) * &self.reachability_matrix(t);
            QMat::hstack(&[self.d(t), &crn]).rank() == self.p
        })
    }

    /// Closed loop `(A + BF, BG, C + DF, DG)`; the input count becomes the
    /// column count of `G`.
    pub fn apply_feedback(&self, law: &FeedbackLaw) -> Result<PeriodicSystem> {
        if law.f.len() != self.period || law.g.len() != self.period {
            return Err(Error::LengthMismatch(law.f.len().min(law.g.len()), self.period));
        }
        let q = law.g[0].cols();
        let (mut a, mut b, mut c, mut d) = (vec![], vec![], vec![], vec![]);
        for t in 0..self.period {
            let (f, g) = (&law.f[t], &law.g[t]);
            if f.shape() != (self.m, self.dims[t]) || g.rows() != self.m || g.cols() != q {
                return Err(Error::DimensionMismatch(format!(
                    "feedback at t = {t}: F is {}x{}, G is {}x{}",
                    f.rows(),
                    f.cols(),
                    g.rows(),
                    g.cols()
                )));
            }
            a.push(self.a[t].try_add(&self.b[t].try_mul(f)?)?);
            b.push(self.b[t].try_mul(g)?);
            c.push(self.c[t].try_add(&self.d[t].try_mul(f)?)?);
            d.push(self.d[t].try_mul(g)?);
        }
        PeriodicSystem::new(self.dims.clone(), q, self.p, a, b, c, d)
    }

    /// Exact forward recursion from `x0` at time `t0`; `inputs[k]` is
    /// `u(t0 + k)`. Returns `y(t0), ..., y(t0 + steps - 1)`.
    pub fn simulate(&self, x0: &[Q], inputs: &[Vec<Q>], t0: i64, steps: usize) -> Result<Vec<Vec<Q>>> {
        if x0.len() != self.n(t0) {
            return Err(Error::DimensionMismatch(format!(
                "x0 has length {}, n({t0}) = {}",
                x0.len(),
                self.n(t0)
            )));
        }
        let mut x = QMat::column_vector(x0.to_vec());
        let mut ys = Vec::with_capacity(steps);
        for k in 0..steps {
            let t = t0 + k as i64;
            let u = match inputs.get(k) {
                Some(u) if u.len() == self.m => QMat::column_vector(u.clone()),
                Some(u) => {
                    return Err(Error::DimensionMismatch(format!(
                        "input at step {k} has length {}, expected {}",
                        u.len(),
                        self.m
                    )))
                }
                None => QMat::zeros(self.m, 1),
            };
            let y = &(self.c(t) * &x) + &(self.d(t) * &u);
            ys.push(y.col(0));
            x = &(self.a(t) * &x) + &(self.b(t) * &u);
        }
        Ok(ys)
    }

    /// `2 * sum n(t) + T`.
    pub fn default_horizon(&self) -> usize {
        2 * self.total_states() + self.period
    }

    /// Checks that every Markov parameter up to `horizon` is diagonal, and
    /// reports stability and output reachability.
    pub fn verify_decoupled(&self, horizon: Option<usize>) -> DecouplingReport {
        let h = horizon.unwrap_or_else(|| self.default_horizon());
        let markov = self.markov(h);
        let mut offending = None;
        'outer: for i in 0..=h {
            for t in 0..self.period {
                let mi = markov.get(i, t as i64);
                for row in 0..mi.rows() {
                    for col in 0..mi.cols() {
                        if row != col && !mi[(row, col)].is_zero() {
                            offending = Some(Offending { i, t, row, col });
                            break 'outer;
                        }
                    }
                }
            }
        }
        DecouplingReport {
            diagonal: offending.is_none(),
            offending,
            stable: self.is_stable(),
            output_reachable: self.output_reachable(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn qm(rows: &[&[i64]]) -> QMat {
        QMat::from_i64(rows)
    }

    #[test]
    fn transitions_and_monodromy() {
        let raw = example1_raw();
        assert_eq!(raw.transition(0, 0).unwrap(), QMat::identity(2));
        assert_eq!(raw.transition(2, 0).unwrap(), qm(&[&[2, 0], &[2, 1]]));
        assert_eq!(raw.transition(-1, 0), Err(Error::BadRange { t: -1, tau: 0 }));
        assert!(example1_stabilized().transition(2, 0).unwrap().is_zero());
        let (psi, core) = example2().monodromy(0);
        assert_eq!((psi, core), (QMat::zeros(3, 3), 2));
    }

    #[test]
    fn stability() {
        assert!(!example1_raw().is_stable());
        assert!(example1_stabilized().is_stable());
        assert!(example2().is_stable());
        assert!(example3().is_stable());
    }

    #[test]
    fn markov_and_reachability() {
        let mk = example2().markov(3);
        assert_eq!(mk.get(0, 0), &qm(&[&[1, 0, 0], &[1, 1, 0]]));
        assert_eq!(example1_stabilized().markov(1).get(1, 0), &qm(&[&[0, 1], &[1, 1]]));
        assert!(example1_stabilized().output_reachable());
        assert!(example2().output_reachable());
        assert!(example3().output_reachable());
    }

    #[test]
    fn feedback_composition() {
        let s = example1_stabilized();
        assert_eq!(s.a(0), &qm(&[&[1, 0], &[0, 0]]));
        assert_eq!(s.a(1), &qm(&[&[0, 0], &[0, 1]]));
        let same = example2().apply_feedback(&FeedbackLaw::identity(&example2())).unwrap();
        assert_eq!(same, example2());
    }

    #[test]
    fn undecoupled_loop_is_reported() {
        let r = example1_stabilized().verify_decoupled(None);
        assert!(!r.diagonal);
        assert_eq!(r.offending, Some(Offending { i: 1, t: 0, row: 0, col: 1 }));
        assert!(r.stable && r.output_reachable);
    }

    #[test]
    fn rank_test_is_weaker_than_full_transfer_rank() {
        // Every output is pointwise reachable, yet W(z) = [[1, 1], [1/z, 1/z]] is singular.
        let sys = PeriodicSystem::new(
            vec![1],
            2,
            2,
            vec![qm(&[&[0]])],
            vec![qm(&[&[1, 1]])],
            vec![qm(&[&[0], &[1]])],
            vec![qm(&[&[1, 1], &[0, 0]])],
        )
        .unwrap();
        assert!(sys.output_reachable());
        assert_eq!(crate::cyclic::build_cyclic(&sys, 0).w_bar.normal_rank(), 1);
    }
}
