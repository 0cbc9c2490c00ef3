//! Decoupling of systems with more inputs than outputs by nonregular
//! periodic state feedback.

use std::fmt;

use num_traits::{One, Zero};

use crate::cyclic::{build_cyclic, cyclic_hermite, CyclicBundle};
use crate::error::{Error, Result};
use crate::hermite::CyclicHermite;
use crate::periodic::{DecouplingReport, FeedbackLaw, PeriodicSystem};
use crate::poly::{Poly, Q};
use crate::qmat::QMat;
use crate::ratfun::RatFun;
use crate::ratmat::{invariant_factor_orders, RatMat};
use crate::selem::{s_order, SElem};
use crate::square::{is_block_diagonal_q, offsets, realize_compensator, Convention, RealizationResult};

/// A finite list of nonnegative integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerList(pub Vec<usize>);

impl IntegerList {
    pub fn new(values: Vec<usize>) -> Self {
        IntegerList(values)
    }

    pub fn zeros(len: usize) -> Self {
        IntegerList(vec![0; len])
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    /// Positions (zero-based) of the nonzero elements.
    pub fn index_set(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, _)| i).collect()
    }

    /// Elementwise `self <= other`.
    pub fn sublist_le(&self, other: &IntegerList) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(a, b)| a <= b))
    }

    pub fn add(&self, other: &IntegerList) -> Result<IntegerList> {
        self.check_len(other)?;
        Ok(IntegerList(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// Elementwise difference; `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &IntegerList) -> Result<Option<IntegerList>> {
        self.check_len(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(IntegerList))
    }

    /// Pads both lists with zeros to equal length, sorts them nondecreasing
    /// and compares prefix sums.
    pub fn dominates(&self, other: &IntegerList) -> bool {
        let l = self.len().max(other.len());
        let prep = |x: &IntegerList| {
            let mut v = x.0.clone();
            v.resize(l, 0);
            v.sort_unstable();
            v
        };
        let (a, b) = (prep(self), prep(other));
        let (mut sa, mut sb) = (0, 0);
        for i in 0..l {
            sa += a[i];
            sb += b[i];
            if sa < sb {
                return false;
            }
        }
        true
    }

    pub fn concat(lists: &[IntegerList]) -> IntegerList {
        IntegerList(lists.iter().flat_map(|l| l.0.iter().copied()).collect())
    }

    /// Elements sorted nondecreasing.
    pub fn sorted(&self) -> IntegerList {
        let mut v = self.0.clone();
        v.sort_unstable();
        IntegerList(v)
    }

    fn check_len(&self, other: &IntegerList) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(())
    }
}

impl From<Vec<usize>> for IntegerList {
    fn from(v: Vec<usize>) -> Self {
        IntegerList(v)
    }
}

impl fmt::Display for IntegerList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Highest-order diagonal entries of the cyclic Hermite form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstDecoupling {
    /// `d[i][j]`, monic with all zeros outside the open disk.
    pub d: Vec<Vec<Poly>>,
    pub delta: Vec<IntegerList>,
    /// Row of the selected entry for column `j` of column-block `i`.
    pub selected_rows: Vec<Vec<usize>>,
}

/// For each column-block `i` and column `j < p`, picks the highest-order
/// entry among the diagonal positions `(k p + j, i m + j)` (ties to the
/// lowest `k`) and splits it as `d / z^delta` in normal form.
pub fn first_decoupling_data(delta_bar: &RatMat, p: usize, m: usize, t: usize) -> Result<FirstDecoupling> {
    if delta_bar.rows() != p * t || delta_bar.cols() != m * t {
        return Err(Error::DimensionMismatch(format!(
            "Hermite form is {}x{}, expected {}x{}",
            delta_bar.rows(),
            delta_bar.cols(),
            p * t,
            m * t
        )));
    }
    let mut out = FirstDecoupling { d: vec![], delta: vec![], selected_rows: vec![] };
    for i in 0..t {
        let (mut d, mut delta, mut rows) = (vec![], vec![], vec![]);
        for j in 0..p {
            let col = i * m + j;
            let mut best: Option<(usize, usize)> = None;
            for k in 0..t {
                let e = &delta_bar[(k * p + j, col)];
                if e.is_zero() {
                    continue;
                }
                let o = s_order(e)?;
                if best.is_none_or(|(bo, _)| o > bo) {
                    best = Some((o, k * p + j));
                }
            }
            let (o, row) = best.ok_or(Error::ZeroColumn(col))?;
            let (nf, _) = SElem::new(delta_bar[(row, col)].clone())?.normal_form()?;
            d.push(nf.value().num().monic());
            delta.push(o);
            rows.push(row);
        }
        out.d.push(d);
        out.delta.push(IntegerList(delta));
        out.selected_rows.push(rows);
    }
    Ok(out)
}

/// Drops the extra columns of each column-block and annuls every diagonal
/// entry except the selected ones.
pub fn build_delta_star(delta_bar: &RatMat, selected_rows: &[Vec<usize>], p: usize, m: usize, t: usize) -> Result<RatMat> {
    let cols: Vec<usize> = (0..t).flat_map(|i| (0..p).map(move |j| i * m + j)).collect();
    let rows: Vec<usize> = (0..p * t).collect();
    let mut star = delta_bar.select(&rows, &cols);
    for i in 0..t {
        for j in 0..p {
            for k in 0..t {
                let row = k * p + j;
                if row != selected_rows[i][j] {
                    star[(row, i * p + j)] = RatFun::zero();
                }
            }
        }
    }
    if star.determinant()?.is_zero() {
        return Err(Error::SingularDeltaStar);
    }
    Ok(star)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractorData {
    pub interactor: RatMat,
    pub f: Vec<Vec<Poly>>,
    pub phi: Vec<IntegerList>,
}

/// Inverts the pruned form and reads off, per column, the monic least common
/// denominator and the second decoupling order.
pub fn interactor_data(delta_star: &RatMat, p: usize, t: usize) -> Result<InteractorData> {
    let interactor = delta_star.inverse()?;
    if (&interactor * delta_star) != RatMat::identity(p * t) {
        return Err(Error::VerificationFailed("interactor times pruned form is not I".into()));
    }
    let (mut f, mut phi) = (vec![], vec![]);
    for i in 0..t {
        let (mut fi, mut phii) = (vec![], vec![]);
        for j in 0..p {
            let col = i * p + j;
            let mut lcd = Poly::one();
            let mut excess = 0usize;
            for r in 0..p * t {
                let e = &interactor[(r, col)];
                if e.is_zero() {
                    continue;
                }
                lcd = Poly::lcm(&lcd, e.den());
                excess = excess.max(e.num().deg().saturating_sub(e.den().deg()));
            }
            let lcd = lcd.monic();
            phii.push(lcd.deg() + excess);
            fi.push(lcd);
        }
        f.push(fi);
        phi.push(IntegerList(phii));
    }
    Ok(InteractorData { interactor, f, phi })
}

/// `Phi diag(f_ij / z^(delta_ij + eps_ij))` and the invariant-factor orders
/// of each of its `p`-row blocks.
pub fn omega_of(
    interactor: &RatMat,
    f: &[Vec<Poly>],
    delta: &[IntegerList],
    epsilon: &[IntegerList],
    p: usize,
    t: usize,
) -> Result<(RatMat, Vec<IntegerList>)> {
    let mut diag = Vec::with_capacity(p * t);
    for i in 0..t {
        for j in 0..p {
            let k = delta[i].0[j] + epsilon[i].0[j];
            diag.push(RatFun::new(f[i][j].clone(), Poly::monomial(Q::one(), k))?);
        }
    }
    let z1 = interactor * &RatMat::diagonal(&diag);
    z1.check_over_s()?;
    let mut omega = Vec::with_capacity(t);
    for i in 0..t {
        let mut orders = invariant_factor_orders(&z1.submatrix(i * p, 0, p, p * t))?;
        orders.resize(p, 0);
        omega.push(IntegerList(orders));
    }
    Ok((z1, omega))
}

/// A chain of pure delays driven by one extra input inside the unobservable
/// subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayChain {
    /// Column-block (time offset from `tau`) of the driving input.
    pub block: usize,
    /// Index among the `m - p` extra inputs of that block.
    pub input: usize,
    pub length: usize,
    /// Length of the initial subchain not reached by any other input.
    pub free_length: usize,
}

impl DelayChain {
    pub fn is_free(&self) -> bool {
        self.free_length == self.length
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardForm {
    /// Basis of the unobservable subspace in cyclic state coordinates:
    /// the chain vectors first, then a completion.
    pub unobservable_basis: QMat,
    pub chains: Vec<DelayChain>,
    pub sigma: Vec<IntegerList>,
    pub sigma_free: Vec<IntegerList>,
}

fn col_vec(m: &QMat, j: usize) -> QMat {
    QMat::column_vector(m.col(j))
}

/// Unobservable subspace of `(A, C)` as basis columns.
pub fn unobservable_subspace(bundle: &CyclicBundle) -> QMat {
    let ns = bundle.a_bar.rows();
    let mut parts = vec![bundle.c_bar.clone()];
    for _ in 1..ns.max(1) {
        let next = parts.last().unwrap() * &bundle.a_bar;
        parts.push(next);
    }
    QMat::vstack(&parts.iter().collect::<Vec<_>>()).nullspace()
}

/// Chain lengths from Brunovsky-style scanning: at each power, every live
/// generator contributes its next vector unless it is zero or depends on
/// `base` and the vectors kept so far.
fn chain_lengths(a: &QMat, gens: &[Option<QMat>], base: &[QMat], steps: usize) -> (Vec<usize>, Vec<QMat>) {
    let mut current: Vec<Option<QMat>> = gens.to_vec();
    let mut kept: Vec<QMat> = Vec::new();
    let mut lengths = vec![0usize; gens.len()];
    let rank_of = |vs: &[&QMat]| if vs.is_empty() { 0 } else { QMat::hstack(vs).rank() };
    let mut have = rank_of(&base.iter().collect::<Vec<_>>());
    for _ in 0..steps {
        for c in 0..gens.len() {
            let Some(v) = current[c].take() else { continue };
            if v.is_zero() {
                continue;
            }
            let mut trial: Vec<&QMat> = base.iter().chain(&kept).collect();
            trial.push(&v);
            if rank_of(&trial) == have {
                continue;
            }
            have += 1;
            lengths[c] += 1;
            current[c] = Some(a * &v);
            kept.push(v);
        }
    }
    (lengths, kept)
}

/// Reachability indices of the unobservable part with respect to the extra
/// inputs, and the free prefix of each delay chain.
///
/// Extra-input columns outside the unobservable subspace start no chain.
/// The free lengths are the same indices computed modulo the smallest
/// invariant subspace containing the main-input columns that lie in the
/// unobservable subspace, which is where the main inputs couple in.
pub fn standard_form(bundle: &CyclicBundle) -> StandardForm {
    let (m, p, t) = (bundle.m, bundle.p, bundle.period);
    let ns = bundle.a_bar.rows();
    let nbar = unobservable_subspace(bundle);
    let rn = nbar.rank();
    let in_n = |v: &QMat| !v.is_zero() && QMat::hstack(&[&nbar, v]).rank() == rn;
    let extra: Vec<(usize, usize)> = (0..t).flat_map(|k| (0..m - p).map(move |e| (k, e))).collect();
    let gens: Vec<Option<QMat>> = extra
        .iter()
        .map(|&(k, e)| Some(col_vec(&bundle.b_bar, k * m + p + e)).filter(|b| in_n(b)))
        .collect();
    let (lengths, kept) = chain_lengths(&bundle.a_bar, &gens, &[], ns);
    let main_gens: Vec<Option<QMat>> = (0..m * t)
        .filter(|c| c % m < p)
        .map(|c| Some(col_vec(&bundle.b_bar, c)).filter(|b| in_n(b)))
        .collect();
    let (_, coupled_space) = chain_lengths(&bundle.a_bar, &main_gens, &[], ns);
    let (free, _) = chain_lengths(&bundle.a_bar, &gens, &coupled_space, ns);
    let mut basis = kept;
    for j in 0..nbar.cols() {
        let v = col_vec(&nbar, j);
        let mut trial: Vec<&QMat> = basis.iter().collect();
        trial.push(&v);
        if QMat::hstack(&trial).rank() > basis.len() {
            basis.push(v);
        }
    }
    let basis = if basis.is_empty() { QMat::zeros(ns, 0) } else { QMat::hstack(&basis.iter().collect::<Vec<_>>()) };
    let mut chains = Vec::new();
    let mut sigma = vec![IntegerList::zeros(m - p); t];
    let mut sigma_free = vec![IntegerList::zeros(m - p); t];
    for (c, &(k, e)) in extra.iter().enumerate() {
        let free_length = free[c].min(lengths[c]);
        sigma[k].0[e] = lengths[c];
        sigma_free[k].0[e] = free_length;
        if lengths[c] > 0 {
            chains.push(DelayChain { block: k, input: e, length: lengths[c], free_length });
        }
    }
    StandardForm { unobservable_basis: basis, chains, sigma, sigma_free }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecouplingInvariants {
    pub d: Vec<Vec<Poly>>,
    pub delta: Vec<IntegerList>,
    pub sigma: Vec<IntegerList>,
    pub sigma_free: Vec<IntegerList>,
    pub f: Vec<Vec<Poly>>,
    pub phi: Vec<IntegerList>,
    pub delta_star: RatMat,
    pub interactor: RatMat,
    pub selected_rows: Vec<Vec<usize>>,
    pub chains: Vec<DelayChain>,
}

impl DecouplingInvariants {
    /// Computes every invariant from the cyclic Hermite form and the cyclic
    /// representation of the system it belongs to.
    pub fn compute(delta_bar: &RatMat, bundle: &CyclicBundle) -> Result<Self> {
        let (p, m, t) = (bundle.p, bundle.m, bundle.period);
        let first = first_decoupling_data(delta_bar, p, m, t)?;
        let delta_star = build_delta_star(delta_bar, &first.selected_rows, p, m, t)?;
        let inter = interactor_data(&delta_star, p, t)?;
        let sf = standard_form(bundle);
        Ok(DecouplingInvariants {
            d: first.d,
            delta: first.delta,
            sigma: sf.sigma,
            sigma_free: sf.sigma_free,
            f: inter.f,
            phi: inter.phi,
            delta_star,
            interactor: inter.interactor,
            selected_rows: first.selected_rows,
            chains: sf.chains,
        })
    }

    pub fn period(&self) -> usize {
        self.delta.len()
    }

    pub fn outputs(&self) -> usize {
        self.delta.first().map_or(0, IntegerList::len)
    }
}

/// A connection of an extra input to an external input terminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Connection {
    pub block: usize,
    /// Index among the extra inputs of the block.
    pub input: usize,
    /// Output channel of the block.
    pub output: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateLists {
    pub epsilon: Vec<IntegerList>,
    pub eta: Vec<IntegerList>,
    pub eta_star: Vec<IntegerList>,
    pub omega: Vec<IntegerList>,
    /// Which element of `eta` fills each nonzero position of `eta_star`.
    pub connections: Vec<Connection>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolvabilityFailure {
    LengthMismatch { block: usize },
    NotMultipleOfPeriod { block: usize },
    BelowSecondOrders { block: usize },
    BelowEtaStar { block: usize },
    EtaAboveSigma { block: usize },
    IndexSetMismatch { block: usize },
    EtaStarNotSelection { block: usize },
    NotDominant,
    SumMismatch { epsilon: usize, eta: usize, omega: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolvabilityCheck {
    pub failures: Vec<SolvabilityFailure>,
}

impl SolvabilityCheck {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn is_selection(sel: &IntegerList, from: &IntegerList) -> bool {
    let mut pool = from.0.clone();
    for &v in sel.0.iter().filter(|&&v| v != 0) {
        match pool.iter().position(|&x| x == v) {
            Some(k) => {
                pool.swap_remove(k);
            }
            None => return false,
        }
    }
    true
}

/// Checks the solvability conditions. The elementwise conditions are checked
/// per block; the sums and the dominance are checked over the concatenation
/// of all blocks, since the chains of one block may serve another.
pub fn solvability_check(inv: &DecouplingInvariants, cand: &CandidateLists, t: usize) -> SolvabilityCheck {
    use SolvabilityFailure::*;
    let mut failures = Vec::new();
    let p = inv.outputs();
    let extra = inv.sigma.first().map_or(0, IntegerList::len);
    for i in 0..inv.period() {
        let (eps, eta, star) = (&cand.epsilon[i], &cand.eta[i], &cand.eta_star[i]);
        if eps.len() != p || star.len() != p || eta.len() != extra || cand.omega[i].len() != p {
            failures.push(LengthMismatch { block: i });
            continue;
        }
        if eps.0.iter().any(|e| e % t != 0) {
            failures.push(NotMultipleOfPeriod { block: i });
        }
        let reached = inv.delta[i].add(eps).expect("equal lengths");
        if !inv.phi[i].sublist_le(&reached).unwrap_or(false) {
            failures.push(BelowSecondOrders { block: i });
        }
        if !star.sublist_le(&reached).unwrap_or(false) {
            failures.push(BelowEtaStar { block: i });
        }
        if !eta.sublist_le(&inv.sigma[i]).unwrap_or(false) {
            failures.push(EtaAboveSigma { block: i });
        }
        if star.index_set() != eps.index_set() {
            failures.push(IndexSetMismatch { block: i });
        }
        if !is_selection(star, eta) {
            failures.push(EtaStarNotSelection { block: i });
        }
    }
    let (eps, eta, omega) =
        (IntegerList::concat(&cand.epsilon), IntegerList::concat(&cand.eta), IntegerList::concat(&cand.omega));
    if !eta.dominates(&omega) {
        failures.push(NotDominant);
    }
    if eps.sum() != eta.sum() || eta.sum() != omega.sum() {
        failures.push(SumMismatch { epsilon: eps.sum(), eta: eta.sum(), omega: omega.sum() });
    }
    SolvabilityCheck { failures }
}

/// `phi - delta`, raised elementwise to the next multiple of `t`.
pub fn initial_epsilon(inv: &DecouplingInvariants, t: usize) -> Vec<IntegerList> {
    inv.phi
        .iter()
        .zip(&inv.delta)
        .map(|(phi, delta)| {
            IntegerList(phi.0.iter().zip(&delta.0).map(|(f, d)| f.saturating_sub(*d).div_ceil(t) * t).collect())
        })
        .collect()
}

/// All lists `eta` with `eta <= bound` elementwise and the given total, in
/// lexicographic order of the concatenated tuple.
fn eta_lists(bound: &[IntegerList], total: usize) -> Vec<Vec<IntegerList>> {
    let flat = IntegerList::concat(bound).0;
    let width = bound.first().map_or(0, IntegerList::len);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(flat.len());
    fn go(flat: &[usize], rest: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let k = cur.len();
        if k == flat.len() {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let tail: usize = flat[k + 1..].iter().sum();
        for v in 0..=flat[k].min(rest) {
            if rest - v > tail {
                continue;
            }
            cur.push(v);
            go(flat, rest - v, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    go(&flat, total, &mut cur, &mut raw);
    for r in raw {
        out.push(if width == 0 {
            vec![IntegerList::default(); bound.len()]
        } else {
            r.chunks(width).map(|c| IntegerList(c.to_vec())).collect()
        });
    }
    out
}

/// Assigns distinct nonzero elements of `eta` to the positions of `index`,
/// each not exceeding the cap at its position. First match in lexicographic
/// order of element indices.
fn assign_eta_star(eta: &IntegerList, index: &[usize], cap: &IntegerList) -> Option<Vec<usize>> {
    fn go(eta: &IntegerList, index: &[usize], cap: &IntegerList, used: &mut Vec<usize>) -> bool {
        let k = used.len();
        if k == index.len() {
            return true;
        }
        for e in 0..eta.len() {
            let v = eta.0[e];
            if v == 0 || v > cap.0[index[k]] || used.contains(&e) {
                continue;
            }
            used.push(e);
            if go(eta, index, cap, used) {
                return true;
            }
            used.pop();
        }
        false
    }
    let mut used = Vec::new();
    go(eta, index, cap, &mut used).then_some(used)
}

/// Candidate lists passing the solvability check when the chains marked in
/// `connected` may be used over their full length and all others over their
/// free prefix.
pub fn candidate_lists(inv: &DecouplingInvariants, t: usize, connected: &[(usize, usize)]) -> Result<Vec<CandidateLists>> {
    let p = inv.outputs();
    let epsilon = initial_epsilon(inv, t);
    let (_, omega) = omega_of(&inv.interactor, &inv.f, &inv.delta, &epsilon, p, t)?;
    let mut bound = inv.sigma_free.clone();
    for &(k, e) in connected {
        bound[k].0[e] = inv.sigma[k].0[e];
    }
    let total: usize = epsilon.iter().map(IntegerList::sum).sum();
    let mut out = Vec::new();
    'eta: for eta in eta_lists(&bound, total) {
        let mut eta_star = Vec::with_capacity(t);
        let mut connections = Vec::new();
        for i in 0..t {
            let index = epsilon[i].index_set();
            let cap = inv.delta[i].add(&epsilon[i])?;
            let Some(picks) = assign_eta_star(&eta[i], &index, &cap) else { continue 'eta };
            let mut star = IntegerList::zeros(p);
            for (&pos, &e) in index.iter().zip(&picks) {
                star.0[pos] = eta[i].0[e];
                connections.push(Connection { block: i, input: e, output: pos });
            }
            eta_star.push(star);
        }
        let cand = CandidateLists { epsilon: epsilon.clone(), eta, eta_star, omega: omega.clone(), connections };
        if solvability_check(inv, &cand, t).holds() {
            out.push(cand);
        }
    }
    Ok(out)
}

/// Selections of coupled chains to connect, smallest first: the empty
/// selection, then subsets in increasing bitmask order.
fn chain_selections(inv: &DecouplingInvariants) -> impl Iterator<Item = Vec<(usize, usize)>> + '_ {
    let coupled: Vec<(usize, usize)> =
        inv.chains.iter().filter(|c| !c.is_free()).map(|c| (c.block, c.input)).collect();
    let n = coupled.len().min(usize::BITS as usize - 1);
    (0usize..1 << n).map(move |mask| (0..n).filter(|b| mask >> b & 1 == 1).map(|b| coupled[b]).collect())
}

/// Default iteration bound for the coupled-chain search.
pub const DEFAULT_STEP10_BOUND: usize = 64;

/// First candidate lists in the deterministic search order.
pub fn search_candidate_lists(inv: &DecouplingInvariants, t: usize, bound: usize) -> Result<CandidateLists> {
    let mut found = None;
    search_with(inv, t, bound, |c| {
        found = Some(c.clone());
        Ok(true)
    })?;
    found.ok_or(Error::NotFound)
}

/// Feeds candidates to `accept` until it returns true. Errors with
/// `BoundExceeded` if the selection budget ran out first, `NotFound` if the
/// search was exhausted.
fn search_with(
    inv: &DecouplingInvariants,
    t: usize,
    bound: usize,
    mut accept: impl FnMut(&CandidateLists) -> Result<bool>,
) -> Result<()> {
    let coupled = inv.chains.iter().filter(|c| !c.is_free()).count();
    let total = 1usize.checked_shl(coupled as u32).unwrap_or(usize::MAX);
    for (iter, sel) in chain_selections(inv).enumerate() {
        if iter >= bound {
            return Err(Error::BoundExceeded(bound));
        }
        for cand in candidate_lists(inv, t, &sel)? {
            if accept(&cand)? {
                return Ok(());
            }
        }
    }
    if total > bound {
        return Err(Error::BoundExceeded(bound));
    }
    Err(Error::NotFound)
}

#[derive(Clone, Debug)]
pub struct CompensatorParts {
    /// `Phi diag(f / z^(delta + eps))`.
    pub z1: RatMat,
    /// Decoupled cyclic transfer the compensator produces.
    pub target: RatMat,
    /// Constant connection of the extra inputs to the external inputs.
    pub extra_gain: QMat,
    pub v11: RatMat,
    pub v12: RatMat,
    pub v21: RatMat,
    pub v22: RatMat,
    /// Rows of the compensator acting on the main inputs.
    pub z_main: RatMat,
    /// Rows of the compensator acting on the extra inputs.
    pub z2: RatMat,
    pub v_bar: RatMat,
    pub z_bar: RatMat,
    pub l_bar: QMat,
    pub realization: RealizationResult,
}

fn main_and_extra(m: usize, p: usize, t: usize) -> (Vec<usize>, Vec<usize>) {
    let main = (0..t).flat_map(|k| (0..p).map(move |a| k * m + a)).collect();
    let extra = (0..t).flat_map(|k| (p..m).map(move |a| k * m + a)).collect();
    (main, extra)
}

/// Finds a constant `X` with `X lhs = rhs` whose nonzero entries are confined
/// to the diagonal blocks given by the row and column block sizes.
pub fn solve_block_constant(lhs: &RatMat, rhs: &RatMat, row_blocks: &[usize], col_blocks: &[usize]) -> Result<Option<QMat>> {
    let depth = 2 * lhs.rows() + 2;
    let l = lhs.expand_at_infinity(depth)?;
    let r = rhs.expand_at_infinity(depth)?;
    let lflat = QMat::hstack(&l.iter().collect::<Vec<_>>());
    let rflat = QMat::hstack(&r.iter().collect::<Vec<_>>());
    let (ro, co) = (offsets(row_blocks), offsets(col_blocks));
    let mut x = QMat::zeros(rhs.rows(), lhs.rows());
    for b in 0..row_blocks.len() {
        let sub = lflat.submatrix(co[b], 0, col_blocks[b], lflat.cols()).transpose();
        for row in ro[b]..ro[b + 1] {
            let Some(sol) = sub.solve(&QMat::column_vector(rflat.row(row))) else {
                return Ok(None);
            };
            for k in 0..col_blocks[b] {
                x[(row, co[b] + k)] = sol[(k, 0)].clone();
            }
        }
    }
    Ok((&(&RatMat::from_qmat(&x) * lhs) == rhs).then_some(x))
}

/// Extends each `m x q` diagonal block of `g` to a nonsingular matrix with
/// unit vectors and inverts it, giving `P` with `P G = [I; 0]` per block.
fn left_completion(g: &QMat, m: usize, q: usize, t: usize) -> Result<QMat> {
    let mut p_bar = QMat::zeros(m * t, m * t);
    for k in 0..t {
        let gk = g.submatrix(k * m, k * q, m, q);
        let mut cols = vec![gk.clone()];
        let mut rank = gk.rank();
        if rank < q {
            return Err(Error::ConstructionFailed { step: 12, reason: format!("G block {k} has rank {rank} < {q}") });
        }
        for e in 0..m {
            if rank == m {
                break;
            }
            let mut unit = QMat::zeros(m, 1);
            unit[(e, 0)] = Q::one();
            let mut trial = cols.clone();
            trial.push(unit);
            let stacked = QMat::hstack(&trial.iter().collect::<Vec<_>>());
            if stacked.rank() > rank {
                rank += 1;
                cols = trial;
            }
        }
        let full = QMat::hstack(&cols.iter().collect::<Vec<_>>());
        p_bar.set_block(k * m, k * m, &full.inverse()?);
    }
    Ok(p_bar)
}

/// Extra-input gains in search order: the pattern given by the chain
/// connections first, then every matrix with entries in {0, 1, -1} on the
/// block-diagonal positions, up to `cap` candidates.
fn extra_gains(cand: &CandidateLists, m: usize, p: usize, t: usize, cap: usize) -> Vec<QMat> {
    let e = m - p;
    let mut pattern = QMat::zeros(e * t, p * t);
    for c in &cand.connections {
        pattern[(c.block * e + c.input, c.block * p + c.output)] = Q::one();
    }
    let slots: Vec<(usize, usize)> =
        (0..t).flat_map(|k| (0..e).flat_map(move |r| (0..p).map(move |c| (k * e + r, k * p + c)))).collect();
    let values = [Q::zero(), Q::one(), -Q::one()];
    let mut out = vec![pattern.clone()];
    let mut digits = vec![0usize; slots.len()];
    'outer: loop {
        if out.len() >= cap {
            break;
        }
        let mut g = QMat::zeros(e * t, p * t);
        for (s, &d) in slots.iter().zip(&digits) {
            g[*s] = values[d].clone();
        }
        if g != pattern {
            out.push(g);
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < values.len() {
                continue 'outer;
            }
            *d = 0;
        }
        break;
    }
    out
}

/// Upper limit on extra-input gains tried per candidate.
pub const EXTRA_GAIN_CAP: usize = 4096;

/// Builds and verifies a compensator for the system whose cyclic transfer
/// is already the Hermite form `delta_bar`.
///
/// The target closed loop is `D + N`, where `D` carries `f / z^(delta + eps)`
/// at the selected diagonal positions and `N` holds the annulled ones. Extra inputs are tied to the
/// external inputs through a constant gain `Ge`; the main rows solve
/// `Delta_main Z_main = D + N - Delta_extra Ge`.
pub fn build_compensator(
    inv: &DecouplingInvariants,
    cand: &CandidateLists,
    delta_bar: &RatMat,
    bundle: &CyclicBundle,
) -> Result<CompensatorParts> {
    let (p, m, t) = (bundle.p, bundle.m, bundle.period);
    let fail = |step: u32, reason: String| Error::ConstructionFailed { step, reason };
    let (z1, _) = omega_of(&inv.interactor, &inv.f, &inv.delta, &cand.epsilon, p, t)?;
    let (main, extra) = main_and_extra(m, p, t);
    let rows: Vec<usize> = (0..p * t).collect();
    let delta_main = delta_bar.select(&rows, &main);
    let delta_extra = delta_bar.select(&rows, &extra);
    let mut selected = RatMat::zeros(p * t, p * t);
    for i in 0..t {
        for j in 0..p {
            let k = inv.delta[i].0[j] + cand.epsilon[i].0[j];
            selected[(inv.selected_rows[i][j], i * p + j)] = RatFun::new(inv.f[i][j].clone(), Poly::monomial(Q::one(), k))?;
        }
    }
    let target = &selected + &(&delta_main - &inv.delta_star);
    let main_inv = delta_main
        .inverse()
        .map_err(|_| fail(11, "delegated-case: main columns of the Hermite form are singular".into()))?;
    let mut last = fail(11, "no extra-input gain yields a realizable compensator".into());
    for ge in extra_gains(cand, m, p, t, EXTRA_GAIN_CAP) {
        let rhs = &target - &(&delta_extra * &RatMat::from_qmat(&ge));
        let z_main = &main_inv * &rhs;
        if !z_main.is_over_s() {
            continue;
        }
        let mut z_bar = RatMat::zeros(m * t, p * t);
        for (k, &r) in main.iter().enumerate() {
            z_bar.set_block(r, 0, &z_main.submatrix(k, 0, 1, p * t));
        }
        for (k, &r) in extra.iter().enumerate() {
            z_bar.set_block(r, 0, &RatMat::from_qmat(&ge.submatrix(k, 0, 1, p * t)));
        }
        match finish_compensator(&z_bar, bundle) {
            Ok((v_bar, l_bar, realization)) => {
                let vp = v_bar.select(&main, &main);
                return Ok(CompensatorParts {
                    z1,
                    target,
                    extra_gain: ge.clone(),
                    v11: vp,
                    v12: v_bar.select(&main, &extra),
                    v21: v_bar.select(&extra, &main),
                    v22: v_bar.select(&extra, &extra),
                    z_main,
                    z2: RatMat::from_qmat(&ge),
                    v_bar,
                    z_bar,
                    l_bar,
                    realization,
                });
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Realizes `Z` by state feedback: solves `F (S Z) = Z - Z(inf)` for a
/// block-diagonal `F`, forms `V = P (I - F S)` with `P G = L`, checks
/// `V Z = L` and realizes `V^(-1) L` through the generic route.
fn finish_compensator(z_bar: &RatMat, bundle: &CyclicBundle) -> Result<(RatMat, QMat, RealizationResult)> {
    let (p, m, t) = (bundle.p, bundle.m, bundle.period);
    let fail = |step: u32, reason: &str| Error::ConstructionFailed { step, reason: reason.into() };
    let g_bar = z_bar.value_at_infinity()?;
    if !is_block_diagonal_q(&g_bar, &vec![m; t], &vec![p; t]) {
        return Err(fail(12, "Z(inf) is not block diagonal"));
    }
    let strict = z_bar - &RatMat::from_qmat(&g_bar);
    let sz = &bundle.s_bar * z_bar;
    let f_bar = solve_block_constant(&sz, &strict, &vec![m; t], &bundle.state_blocks)?
        .ok_or_else(|| fail(13, "no block-diagonal constant feedback realizes Z"))?;
    let p_bar = left_completion(&g_bar, m, p, t)?;
    let l_bar = &p_bar * &g_bar;
    let fs = &RatMat::from_qmat(&f_bar) * &bundle.s_bar;
    let v_bar = &RatMat::from_qmat(&p_bar) * &(&RatMat::identity(m * t) - &fs);
    let l_rat = RatMat::from_qmat(&l_bar);
    if (&v_bar * z_bar) != l_rat {
        return Err(fail(12, "V Z differs from L"));
    }
    let realization = realize_compensator(&v_bar, Some(&l_rat), bundle, Convention::Nonsquare)?;
    Ok((v_bar, l_bar, realization))
}

#[derive(Clone, Debug)]
pub struct NonsquareOptions {
    pub tau: i64,
    pub horizon: Option<usize>,
    pub step10_bound: usize,
}

impl Default for NonsquareOptions {
    fn default() -> Self {
        NonsquareOptions { tau: 0, horizon: None, step10_bound: DEFAULT_STEP10_BOUND }
    }
}

#[derive(Clone, Debug)]
pub struct NonsquareOutcome {
    pub bundle: CyclicBundle,
    pub hermite: CyclicHermite,
    /// Feedback realizing the Hermite transformation.
    pub hermite_law: FeedbackLaw,
    pub invariants: DecouplingInvariants,
    pub candidates: CandidateLists,
    pub parts: CompensatorParts,
    /// Composite law applied to the given system.
    pub law: FeedbackLaw,
    pub closed: PeriodicSystem,
    pub report: DecouplingReport,
    /// Whether the closed-loop monodromy matrix is nilpotent.
    pub nilpotent: bool,
}

fn is_nilpotent(sys: &PeriodicSystem, tau: i64) -> bool {
    let (psi, _) = sys.monodromy(tau);
    psi.rows() == 0 || psi.pow(psi.rows()).is_zero()
}

/// Full synthesis for `m > p`: Hermite form and its realization, invariants,
/// candidate search and compensator construction, then closed-loop checks.
pub fn decouple_nonsquare(sys: &PeriodicSystem, opts: &NonsquareOptions) -> Result<NonsquareOutcome> {
    let (m, p, t) = (sys.inputs(), sys.outputs(), sys.period());
    if m <= p {
        return Err(Error::DimensionMismatch(format!(
            "nonsquare decoupling needs m > p, got m = {m}, p = {p}; use square decoupling"
        )));
    }
    if !sys.is_stable() {
        return Err(Error::NotStable);
    }
    if !sys.output_reachable() {
        return Err(Error::NotOutputReachable);
    }
    let tau = opts.tau;
    let bundle = build_cyclic(sys, tau);
    let hermite = cyclic_hermite(&bundle)?;
    let delta_bar = hermite.result.h.clone();
    let hermite_law = realize_compensator(&hermite.result.u, None, &bundle, Convention::Unimodular)?.law;
    let transformed = sys.apply_feedback(&hermite_law)?;
    let tbundle = build_cyclic(&transformed, tau);
    if tbundle.w_bar != delta_bar {
        return Err(Error::VerificationFailed("transformed cyclic transfer differs from the Hermite form".into()));
    }
    let invariants = DecouplingInvariants::compute(&delta_bar, &tbundle)?;
    let mut chosen = None;
    let mut last_err = None;
    let searched = search_with(&invariants, t, opts.step10_bound, |cand| {
        match build_compensator(&invariants, cand, &delta_bar, &tbundle) {
            Ok(parts) => {
                chosen = Some((cand.clone(), parts));
                Ok(true)
            }
            Err(e) => {
                last_err = Some(e);
                Ok(false)
            }
        }
    });
    let (candidates, parts) = match (chosen, searched) {
        (Some(c), _) => c,
        (None, Err(Error::NotFound)) => return Err(last_err.unwrap_or(Error::NotFound)),
        (None, Err(e)) => return Err(e),
        (None, Ok(())) => return Err(Error::NotFound),
    };
    let law = hermite_law.then(&parts.realization.law)?;
    if law.g.iter().any(|g| g.shape() != (m, p)) {
        return Err(Error::VerificationFailed("composite law is not m x p".into()));
    }
    let closed = sys.apply_feedback(&law)?;
    if build_cyclic(&closed, tau).w_bar != parts.target {
        return Err(Error::VerificationFailed("closed-loop cyclic transfer differs from the target".into()));
    }
    let report = closed.verify_decoupled(opts.horizon);
    if !report.is_decoupled() {
        return Err(Error::VerificationFailed(format!("closed loop not decoupled: {report:?}")));
    }
    let nilpotent = is_nilpotent(&closed, tau);
    Ok(NonsquareOutcome {
        bundle,
        hermite,
        hermite_law,
        invariants,
        candidates,
        parts,
        law,
        closed,
        report,
        nilpotent,
    })
}
