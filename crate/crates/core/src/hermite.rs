//! Column Hermite forms over S.

use crate::error::{Error, Result};
use crate::ratfun::RatFun;
use crate::ratmat::RatMat;
use crate::selem::{s_divide, SElem};

/// Elementary column operations, logged in the order applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnOp {
    Swap(usize, usize),
    /// Column is multiplied by a unit of S.
    Scale { col: usize, unit: RatFun },
    /// `dst += factor * src` with `factor` in S.
    AddMultiple { src: usize, dst: usize, factor: RatFun },
}

#[derive(Clone, Debug)]
pub struct HermiteResult {
    pub h: RatMat,
    pub u: RatMat,
    pub ops: Vec<ColumnOp>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotStrategy {
    /// Minimal order first, ties to the lowest column.
    #[default]
    MinOrder,
    FirstNonzero,
}

/// Applies column operations to a matrix and to its accumulated transform.
pub struct ColumnReducer {
    pub h: RatMat,
    pub u: RatMat,
    pub ops: Vec<ColumnOp>,
}

impl ColumnReducer {
    pub fn new(m: &RatMat) -> Self {
        ColumnReducer { h: m.clone(), u: RatMat::identity(m.cols()), ops: Vec::new() }
    }

    pub fn finish(self) -> HermiteResult {
        HermiteResult { h: self.h, u: self.u, ops: self.ops }
    }

    fn entry(&self, row: usize, col: usize) -> SElem {
        SElem::new(self.h[(row, col)].clone()).expect("entries stay in S")
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        if a != b {
            self.h.swap_cols(a, b);
            self.u.swap_cols(a, b);
            self.ops.push(ColumnOp::Swap(a, b));
        }
    }

    pub fn scale(&mut self, col: usize, unit: RatFun) {
        if !unit.is_one() {
            self.h.scale_col(col, &unit);
            self.u.scale_col(col, &unit);
            self.ops.push(ColumnOp::Scale { col, unit });
        }
    }

    pub fn add_multiple(&mut self, src: usize, dst: usize, factor: RatFun) {
        if !factor.is_zero() {
            self.h.add_col_multiple(src, dst, &factor);
            self.u.add_col_multiple(src, dst, &factor);
            self.ops.push(ColumnOp::AddMultiple { src, dst, factor });
        }
    }

    /// Quotient that reduces entry `(row, col)` modulo entry `(row, modulus)`.
    pub fn quotient(&self, row: usize, col: usize, modulus: usize) -> Result<SElem> {
        Ok(s_divide(&self.entry(row, col), &self.entry(row, modulus))?.0)
    }

    /// Replaces entry `(row, col)` by its residue modulo `(row, modulus)`.
    pub fn reduce_entry(&mut self, row: usize, col: usize, modulus: usize) -> Result<()> {
        if self.h[(row, col)].is_zero() {
            return Ok(());
        }
        let q = self.quotient(row, col, modulus)?;
        self.add_multiple(modulus, col, -q.value());
        Ok(())
    }

    /// Euclid along `row` over the columns `cands`, leaving a single nonzero
    /// entry in normal form at column `target` (which must be in `cands`).
    /// Returns false if the row vanishes on `cands`.
    pub fn eliminate_row(
        &mut self,
        row: usize,
        target: usize,
        cands: &[usize],
        strategy: PivotStrategy,
    ) -> Result<bool> {
        debug_assert!(cands.contains(&target));
        let mut last: Option<usize> = None;
        let piv = loop {
            let nz: Vec<usize> =
                cands.iter().copied().filter(|&j| !self.h[(row, j)].is_zero()).collect();
            let Some(&first) = nz.first() else {
                return Ok(false);
            };
            let piv = match strategy {
                // Remainders have lower order than the previous pivot, so
                // moving off it keeps the descent strict.
                PivotStrategy::FirstNonzero => {
                    nz.iter().copied().find(|&j| Some(j) != last).unwrap_or(first)
                }
                PivotStrategy::MinOrder => {
                    let mut best = (usize::MAX, first);
                    for &j in &nz {
                        let o = self.entry(row, j).order()?;
                        if o < best.0 {
                            best = (o, j);
                        }
                    }
                    best.1
                }
            };
            if nz.len() == 1 {
                break piv;
            }
            for &j in &nz {
                if j != piv {
                    self.reduce_entry(row, j, piv)?;
                }
            }
            last = Some(piv);
        };
        self.swap(piv, target);
        let (_, unit) = self.entry(row, target).normal_form()?;
        self.scale(target, unit.value().inv()?);
        Ok(true)
    }
}

pub fn hermite_form_s(m: &RatMat) -> Result<HermiteResult> {
    hermite_form_s_with(m, PivotStrategy::MinOrder)
}

/// Lower triangular (echelon) form `H = M U` with diagonal entries in normal
/// form and entries left of each diagonal entry reduced modulo it.
pub fn hermite_form_s_with(m: &RatMat, strategy: PivotStrategy) -> Result<HermiteResult> {
    m.check_over_s()?;
    let mut red = ColumnReducer::new(m);
    let mut c = 0;
    for row in 0..m.rows() {
        if c == m.cols() {
            break;
        }
        let cands: Vec<usize> = (c..m.cols()).collect();
        if red.eliminate_row(row, c, &cands, strategy)? {
            for j in 0..c {
                red.reduce_entry(row, j, c)?;
            }
            c += 1;
        }
    }
    Ok(red.finish())
}

/// Checks the defining properties of a Hermite form result against `m`.
pub fn verify_hermite(m: &RatMat, res: &HermiteResult) -> Result<()> {
    let fail = |s: &str| Err(Error::VerificationFailed(s.into()));
    if (m * &res.u) != res.h {
        return fail("M U != H");
    }
    res.u.check_over_s()?;
    let det = res.u.determinant()?;
    if det.is_zero() || !SElem::new(det)?.is_unit() {
        return fail("det U is not a unit of S");
    }
    if !res.h.is_lower_triangular() {
        return fail("H is not lower triangular");
    }
    let mut c = 0;
    for row in 0..res.h.rows() {
        if c == res.h.cols() || res.h[(row, c)].is_zero() {
            if (c..res.h.cols()).any(|j| !res.h[(row, j)].is_zero()) {
                return fail("H is not in echelon form");
            }
            continue;
        }
        let d = SElem::new(res.h[(row, c)].clone())?;
        if d.normal_form()?.0 != d {
            return fail("diagonal entry not in normal form");
        }
        for j in 0..c {
            let e = SElem::new(res.h[(row, j)].clone())?;
            if !e.is_zero() && s_divide(&e, &d)?.0 != SElem::zero() {
                return fail("entry left of diagonal is not a residue");
            }
        }
        c += 1;
    }
    Ok(())
}

/// A reduction that was skipped because it would break block structure at
/// infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedReduction {
    pub row: usize,
    pub col: usize,
    pub modulus: usize,
}

#[derive(Clone, Debug)]
pub struct CyclicHermite {
    pub result: HermiteResult,
    pub skipped: Vec<SkippedReduction>,
}

/// Block-respecting Hermite form of a `pT x mT` cyclic transfer matrix.
///
/// First each diagonal block is brought to Hermite form with pivots on its
/// own diagonal, using only that block's columns. Then every row is reduced,
/// by additions of column multiples alone, modulo the within-block diagonal
/// entry of another block (minimal order, ties to the lowest block); if none
/// is nonzero the row's own diagonal entry is used. Quotients across blocks
/// must be strictly proper so that `U` stays block diagonal at infinity;
/// other cross-block reductions are skipped and reported.
pub fn cyclic_hermite_form(w: &RatMat, p: usize, m: usize, t: usize) -> Result<CyclicHermite> {
    if w.rows() != p * t || w.cols() != m * t {
        return Err(Error::DimensionMismatch(format!(
            "cyclic matrix {}x{} with p = {p}, m = {m}, T = {t}",
            w.rows(),
            w.cols()
        )));
    }
    if p > m {
        return Err(Error::DimensionMismatch(format!("p = {p} exceeds m = {m}")));
    }
    w.check_over_s()?;
    let mut red = ColumnReducer::new(w);
    for k in 0..t {
        for a in 0..p {
            let row = k * p + a;
            let target = k * m + a;
            let cands: Vec<usize> = (target..(k + 1) * m).collect();
            if red.eliminate_row(row, target, &cands, PivotStrategy::MinOrder)? {
                for j in k * m..target {
                    red.reduce_entry(row, j, target)?;
                }
            }
        }
    }
    let mut skipped = Vec::new();
    for k in 0..t {
        for a in 0..p {
            let row = k * p + a;
            let mut modulus: Option<(usize, usize)> = None;
            for l in (0..t).filter(|&l| l != k) {
                let c = l * m + a;
                if red.h[(row, c)].is_zero() {
                    continue;
                }
                let o = s_order_of(&red.h[(row, c)])?;
                if modulus.is_none_or(|(bo, _)| o < bo) {
                    modulus = Some((o, c));
                }
            }
            let modulus = match modulus {
                Some((_, c)) => c,
                None if !red.h[(row, k * m + a)].is_zero() => k * m + a,
                None => continue,
            };
            let mblock = modulus / m;
            for col in 0..m * t {
                if col == modulus || red.h[(row, col)].is_zero() {
                    continue;
                }
                let q = red.quotient(row, col, modulus)?;
                if col / m != mblock && !q.value().is_strictly_proper() {
                    skipped.push(SkippedReduction { row, col, modulus });
                    continue;
                }
                red.add_multiple(modulus, col, -q.value());
            }
        }
    }
    Ok(CyclicHermite { result: red.finish(), skipped })
}

fn s_order_of(f: &RatFun) -> Result<usize> {
    crate::selem::s_order(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    fn zi(k: usize) -> RatFun {
        RatFun::z_inv(q(1), k)
    }

    #[test]
    fn identity_is_fixed() {
        let r = hermite_form_s(&RatMat::identity(3)).unwrap();
        assert_eq!(r.h, RatMat::identity(3));
        assert_eq!(r.u, RatMat::identity(3));
        assert!(r.ops.is_empty());
    }

    #[test]
    fn row_gcd() {
        let m = RatMat::from_rows(vec![vec![zi(1), zi(2)]]);
        let r = hermite_form_s(&m).unwrap();
        assert_eq!(r.h, RatMat::from_rows(vec![vec![zi(1), RatFun::zero()]]));
        verify_hermite(&m, &r).unwrap();
    }

    #[test]
    fn strategies_agree_on_square_nonsingular() {
        let m = RatMat::from_rows(vec![
            vec![zi(1), RatFun::one()],
            vec![zi(2), &RatFun::one() - &RatFun::z_inv(q(2), 1)],
        ]);
        let a = hermite_form_s_with(&m, PivotStrategy::MinOrder).unwrap();
        let b = hermite_form_s_with(&m, PivotStrategy::FirstNonzero).unwrap();
        verify_hermite(&m, &a).unwrap();
        verify_hermite(&m, &b).unwrap();
        assert_eq!(a.h, b.h);
    }
}
