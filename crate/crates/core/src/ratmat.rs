//! Dense matrices of rational functions.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::One;

use crate::error::{Error, Result};
use crate::poly::{Poly, Q};
use crate::qmat::QMat;
use crate::ratfun::RatFun;
use crate::selem::{is_member_s, s_gcd, SElem};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<RatFun>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat { rows, cols, data: vec![RatFun::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = RatFun::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RatFun) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<RatFun>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        RatMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_qmat(m: &QMat) -> Self {
        RatMat::from_fn(m.rows(), m.cols(), |i, j| RatFun::constant(m[(i, j)].clone()))
    }

    /// Builds a matrix from entry strings such as `"1 - 4z^-2"`.
    pub fn parse(rows: &[&[&str]]) -> std::result::Result<Self, String> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|e| e.parse::<RatFun>()).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(RatMat::from_rows(rows))
    }

    pub fn diagonal(entries: &[RatFun]) -> Self {
        let n = entries.len();
        let mut m = RatMat::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &RatFun)> {
        self.data.iter().enumerate().map(move |(k, e)| ((k / self.cols, k % self.cols), e))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(RatFun::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|((i, j), e)| i == j || e.is_zero())
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.entries().all(|((i, j), e)| j <= i || e.is_zero())
    }

    /// True iff all entries outside the diagonal blocks vanish. Block sizes
    /// are given for rows and columns separately and must have equal count.
    pub fn is_block_diagonal(&self, row_sizes: &[usize], col_sizes: &[usize]) -> bool {
        let rb = block_index(row_sizes);
        let cb = block_index(col_sizes);
        if rb.len() != self.rows || cb.len() != self.cols {
            return false;
        }
        self.entries().all(|((i, j), e)| rb[i] == cb[j] || e.is_zero())
    }

    pub fn transpose(&self) -> RatMat {
        RatMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map(&self, f: impl Fn(&RatFun) -> RatFun) -> RatMat {
        RatMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, c: &RatFun) -> RatMat {
        self.map(|e| e * c)
    }

    pub fn compose_power(&self, k: usize) -> RatMat {
        self.map(|e| e.compose_power(k))
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> RatMat {
        RatMat::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> RatMat {
        RatMat::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &RatMat) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    pub fn hstack(parts: &[&RatMat]) -> RatMat {
        let rows = parts.first().map_or(0, |p| p.rows);
        let mut out = RatMat::zeros(rows, parts.iter().map(|p| p.cols).sum());
        let mut c = 0;
        for p in parts {
            assert_eq!(p.rows, rows);
            out.set_block(0, c, p);
            c += p.cols;
        }
        out
    }

    pub fn vstack(parts: &[&RatMat]) -> RatMat {
        let cols = parts.first().map_or(0, |p| p.cols);
        let mut out = RatMat::zeros(parts.iter().map(|p| p.rows).sum(), cols);
        let mut r = 0;
        for p in parts {
            assert_eq!(p.cols, cols);
            out.set_block(r, 0, p);
            r += p.rows;
        }
        out
    }

    pub fn block_diagonal(blocks: &[RatMat]) -> RatMat {
        let mut out =
            RatMat::zeros(blocks.iter().map(|b| b.rows).sum(), blocks.iter().map(|b| b.cols).sum());
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    pub fn try_mul(&self, rhs: &RatMat) -> Result<RatMat> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = RatMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = &out[(i, j)] + &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, rhs: &RatMat) -> Result<RatMat> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(RatMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// First entry outside S, if any.
    pub fn first_non_s_entry(&self) -> Option<(usize, usize)> {
        self.entries().find(|(_, e)| !is_member_s(e)).map(|(ij, _)| ij)
    }

    pub fn is_over_s(&self) -> bool {
        self.first_non_s_entry().is_none()
    }

    pub fn check_over_s(&self) -> Result<()> {
        match self.first_non_s_entry() {
            Some((i, j)) => Err(Error::NotOverS(i, j)),
            None => Ok(()),
        }
    }

    pub fn is_proper(&self) -> bool {
        self.data.iter().all(RatFun::is_proper)
    }

    pub fn value_at_infinity(&self) -> Result<QMat> {
        let mut out = QMat::zeros(self.rows, self.cols);
        for ((i, j), e) in self.entries() {
            out[(i, j)] = e.value_at_infinity().map_err(|_| Error::ImproperEntry(i, j))?;
        }
        Ok(out)
    }

    /// Coefficient matrices `M_0, ..., M_n` of the expansion `sum M_j z^(-j)`.
    pub fn expand_at_infinity(&self, n: usize) -> Result<Vec<QMat>> {
        let mut out = vec![QMat::zeros(self.rows, self.cols); n + 1];
        for ((i, j), e) in self.entries() {
            let c = e.expand_at_infinity(n).map_err(|_| Error::ImproperEntry(i, j))?;
            for (k, v) in c.into_iter().enumerate() {
                out[k][(i, j)] = v;
            }
        }
        Ok(out)
    }

    /// Rank over the field of rational functions.
    pub fn normal_rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(p) = (rank..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(rank, p);
            let piv = m[(rank, c)].clone();
            for i in rank + 1..m.rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] / &piv;
                for j in c..m.cols {
                    let t = &f * &m[(rank, j)];
                    m[(i, j)] = &m[(i, j)] - &t;
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn scale_col(&mut self, c: usize, f: &RatFun) {
        for i in 0..self.rows {
            self[(i, c)] = &self[(i, c)] * f;
        }
    }

    /// Column `dst` += `f` * column `src`.
    pub fn add_col_multiple(&mut self, src: usize, dst: usize, f: &RatFun) {
        for i in 0..self.rows {
            if !self[(i, src)].is_zero() {
                let t = &self[(i, src)] * f;
                self[(i, dst)] = &self[(i, dst)] + &t;
            }
        }
    }

    pub fn inverse(&self) -> Result<RatMat> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMat::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&i| !a[(i, c)].is_zero()).ok_or(Error::SingularMatrix)?;
            a.swap_rows(c, p);
            inv.swap_rows(c, p);
            let piv_inv = a[(c, c)].inv()?;
            for j in 0..n {
                a[(c, j)] = &a[(c, j)] * &piv_inv;
                inv[(c, j)] = &inv[(c, j)] * &piv_inv;
            }
            for i in 0..n {
                if i == c || a[(i, c)].is_zero() {
                    continue;
                }
                let f = a[(i, c)].clone();
                for j in 0..n {
                    let t = &f * &a[(c, j)];
                    a[(i, j)] = &a[(i, j)] - &t;
                    let t = &f * &inv[(c, j)];
                    inv[(i, j)] = &inv[(i, j)] - &t;
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by fraction-free elimination on the row-cleared
    /// polynomial matrix.
    pub fn determinant(&self) -> Result<RatFun> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(RatFun::one());
        }
        let mut scale = Poly::one();
        let mut m: Vec<Vec<Poly>> = Vec::with_capacity(n);
        for i in 0..n {
            let row: Vec<&RatFun> = (0..n).map(|j| &self[(i, j)]).collect();
            let l = row.iter().fold(Poly::one(), |acc, e| Poly::lcm(&acc, e.den()));
            m.push(row.iter().map(|e| &e.num().clone() * &l.div_exact(e.den()).unwrap()).collect());
            scale = &scale * &l;
        }
        let det = bareiss(m);
        RatFun::new(det, scale)
    }

    /// All `k x k` minors, with their row and column index sets.
    pub fn minors(&self, k: usize) -> Result<Vec<(Vec<usize>, Vec<usize>, RatFun)>> {
        let mut out = Vec::new();
        for rs in combinations(self.rows, k) {
            for cs in combinations(self.cols, k) {
                let d = self.select(&rs, &cs).determinant()?;
                out.push((rs.clone(), cs, d));
            }
        }
        Ok(out)
    }

    /// Renders every entry in `z^-1` notation as an aligned grid.
    pub fn to_grid(&self) -> String {
        let cells: Vec<Vec<String>> =
            (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].to_string()).collect()).collect();
        let mut widths = vec![1; self.cols];
        for row in &cells {
            for (j, s) in row.iter().enumerate() {
                widths[j] = widths[j].max(s.chars().count());
            }
        }
        let mut out = String::new();
        for row in &cells {
            let line: Vec<String> =
                row.iter().enumerate().map(|(j, s)| format!("{s:>w$}", w = widths[j])).collect();
            out.push_str(&format!("[ {} ]\n", line.join("  ")));
        }
        out
    }
}

/// `(zI - A)^(-1)` by Faddeev-LeVerrier.
pub fn resolvent(a: &QMat) -> RatMat {
    let n = a.rows();
    let (chi, adj) = a.char_poly_and_adjugate();
    RatMat::from_fn(n, n, |i, j| {
        let coeffs: Vec<Q> = (0..n).map(|e| adj[n - 1 - e][(i, j)].clone()).collect();
        RatFun::new(Poly::new(coeffs), chi.clone()).expect("monic characteristic polynomial")
    })
}

fn block_index(sizes: &[usize]) -> Vec<usize> {
    sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect()
}

fn bareiss(mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    let mut sign = Q::one();
    let mut prev = Poly::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return Poly::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = t.div_exact(&prev).expect("Bareiss division is exact");
            }
        }
        prev = m[k][k].clone();
    }
    m[n - 1][n - 1].scale(&sign)
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Orders of the invariant factors over S, from determinantal divisors.
pub fn invariant_factor_orders(m: &RatMat) -> Result<Vec<usize>> {
    m.check_over_s()?;
    let mut orders = Vec::new();
    let mut prev = 0usize;
    for k in 1..=m.rows.min(m.cols) {
        let mut g: Option<SElem> = None;
        for (_, _, d) in m.minors(k)? {
            if d.is_zero() {
                continue;
            }
            let d = SElem::new(d)?;
            g = Some(match g {
                None => d.normal_form()?.0,
                Some(g) => s_gcd(&g, &d)?,
            });
            if g.as_ref().is_some_and(|g| g.order() == Ok(prev)) {
                break;
            }
        }
        let Some(g) = g else { break };
        let gk = g.order()?;
        orders.push(gk - prev);
        prev = gk;
    }
    Ok(orders)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnimodularKind {
    Unimodular,
    RowUnimodular,
    ColumnUnimodular,
    None,
}

pub fn unimodular_kind(m: &RatMat) -> Result<UnimodularKind> {
    m.check_over_s()?;
    let k = m.rows.min(m.cols);
    let mut g: Option<SElem> = None;
    for (_, _, d) in m.minors(k)? {
        if d.is_zero() {
            continue;
        }
        let d = SElem::new(d)?;
        g = Some(match g {
            None => d.normal_form()?.0,
            Some(g) => s_gcd(&g, &d)?,
        });
        if g.as_ref().is_some_and(SElem::is_unit) {
            break;
        }
    }
    if !g.is_some_and(|g| g.is_unit()) {
        return Ok(UnimodularKind::None);
    }
    Ok(match m.rows.cmp(&m.cols) {
        std::cmp::Ordering::Equal => UnimodularKind::Unimodular,
        std::cmp::Ordering::Less => UnimodularKind::RowUnimodular,
        std::cmp::Ordering::Greater => UnimodularKind::ColumnUnimodular,
    })
}

impl Index<(usize, usize)> for RatMat {
    type Output = RatFun;
    fn index(&self, (i, j): (usize, usize)) -> &RatFun {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut RatFun {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on shape mismatch; see [`RatMat::try_mul`].
impl Mul for &RatMat {
    type Output = RatMat;
    fn mul(self, rhs: &RatMat) -> RatMat {
        self.try_mul(rhs).expect("matrix product shape")
    }
}

impl Add for &RatMat {
    type Output = RatMat;
    fn add(self, rhs: &RatMat) -> RatMat {
        self.try_add(rhs).expect("matrix sum shape")
    }
}

impl Sub for &RatMat {
    type Output = RatMat;
    fn sub(self, rhs: &RatMat) -> RatMat {
        self + &(-rhs)
    }
}

impl Neg for &RatMat {
    type Output = RatMat;
    fn neg(self) -> RatMat {
        self.map(|e| -e)
    }
}

impl fmt::Display for RatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_grid())
    }
}

impl fmt::Debug for RatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMat {}x{}\n{}", self.rows, self.cols, self.to_grid())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    fn zi(k: usize) -> RatFun {
        RatFun::z_inv(q(1), k)
    }

    #[test]
    fn inverse_and_determinant() {
        let d = RatMat::diagonal(&[zi(1), zi(1)]);
        let inv = d.inverse().unwrap();
        assert_eq!(inv, RatMat::diagonal(&[RatFun::from_poly(Poly::z()), RatFun::from_poly(Poly::z())]));
        let m = RatMat::from_rows(vec![vec![RatFun::one(), zi(1)], vec![zi(1), RatFun::one()]]);
        assert_eq!(m.determinant().unwrap(), &RatFun::one() - &zi(2));
        assert_eq!(&m * &m.inverse().unwrap(), RatMat::identity(2));
        let sing = RatMat::from_rows(vec![vec![zi(1), zi(2)], vec![RatFun::one(), zi(1)]]);
        assert_eq!(sing.inverse(), Err(Error::SingularMatrix));
        assert!(sing.determinant().unwrap().is_zero());
        assert_eq!(sing.normal_rank(), 1);
    }

    #[test]
    fn invariant_orders_and_kinds() {
        let m = RatMat::from_rows(vec![vec![zi(1), zi(2)]]);
        assert_eq!(invariant_factor_orders(&m).unwrap(), vec![1]);
        assert_eq!(unimodular_kind(&m).unwrap(), UnimodularKind::None);
        let m = RatMat::from_rows(vec![vec![RatFun::one(), zi(2)]]);
        assert_eq!(unimodular_kind(&m).unwrap(), UnimodularKind::RowUnimodular);
        assert_eq!(invariant_factor_orders(&RatMat::identity(3)).unwrap(), vec![0, 0, 0]);
        assert_eq!(unimodular_kind(&RatMat::identity(3)).unwrap(), UnimodularKind::Unimodular);
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
    }
}
