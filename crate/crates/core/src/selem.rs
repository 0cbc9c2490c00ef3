//! The ring S of proper rational functions with all poles in the open unit disk.
//!
//! S is a Euclidean domain with degree function [`SElem::order`]. Every nonzero
//! element factors as `n * u` with `u` a unit and `n = e / z^k` in normal form,
//! where `e` is monic with all zeros outside the open disk and `k` is the order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::{Poly, Q};
use crate::qmat::QMat;
use crate::ratfun::RatFun;
use crate::roots::{count_inside, is_schur_stable, split_stability};

/// True iff `f` is proper and every pole has modulus < 1.
///
/// Root location is exact, so this never fails.
pub fn is_member_s(f: &RatFun) -> bool {
    f.is_proper() && is_schur_stable(f.den())
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SElem(RatFun);

impl SElem {
    pub fn new(f: RatFun) -> Result<Self> {
        if is_member_s(&f) {
            Ok(SElem(f))
        } else {
            Err(Error::NotOverS(0, 0))
        }
    }

    #[allow(dead_code)]
    pub(crate) fn new_unchecked(f: RatFun) -> Self {
        debug_assert!(is_member_s(&f));
        SElem(f)
    }

    pub fn zero() -> Self {
        SElem(RatFun::zero())
    }

    pub fn one() -> Self {
        SElem(RatFun::one())
    }

    pub fn constant(c: Q) -> Self {
        SElem(RatFun::constant(c))
    }

    /// `z^(-k)`
    pub fn z_inv(k: usize) -> Self {
        SElem(RatFun::z_inv(Q::from_integer(1.into()), k))
    }

    pub fn value(&self) -> &RatFun {
        &self.0
    }

    pub fn into_value(self) -> RatFun {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn order(&self) -> Result<usize> {
        s_order(&self.0)
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.order() == Ok(0)
    }

    pub fn normal_form(&self) -> Result<(SElem, SElem)> {
        s_normal_form(&self.0)
    }

    pub fn divide(&self, y: &SElem) -> Result<(SElem, SElem)> {
        s_divide(self, y)
    }

    /// Exact quotient `self / y` if it lies in S.
    pub fn divide_exact(&self, y: &SElem) -> Option<SElem> {
        let f = self.0.checked_div(&y.0).ok()?;
        is_member_s(&f).then_some(SElem(f))
    }

    pub fn divides(&self, x: &SElem) -> bool {
        x.divide_exact(self).is_some()
    }
}

/// `deg den - deg num + deg(unstable part of num)`.
pub fn s_order(f: &RatFun) -> Result<usize> {
    if f.is_zero() {
        return Err(Error::ZeroElement);
    }
    let dn = f.num().deg();
    let unstable = dn - count_inside(f.num());
    Ok(f.den().deg() - dn + unstable)
}

/// `f = n * u` with `n = e / z^k` and `u` a unit of S.
pub fn s_normal_form(f: &RatFun) -> Result<(SElem, SElem)> {
    let k = s_order(f)?;
    let e = split_stability(f.num())?.unstable;
    let n = RatFun::new(e, Poly::monomial(Q::from_integer(1.into()), k))?;
    let u = f.checked_div(&n)?;
    debug_assert!(is_member_s(&u) && s_order(&u) == Ok(0));
    Ok((SElem(n), SElem(u)))
}

/// Euclidean division `x = q y + r` with the residue `r = f / z^(k-1)`,
/// `deg f <= k - 1`, where `k = ord y`; `r = 0` when `y` is a unit.
pub fn s_divide(x: &SElem, y: &SElem) -> Result<(SElem, SElem)> {
    if y.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    if x.is_zero() {
        return Ok((SElem::zero(), SElem::zero()));
    }
    let k = y.order()?;
    if k == 0 {
        return Ok((SElem(&x.0 / &y.0), SElem::zero()));
    }
    let (n, _) = y.normal_form()?;
    let e = n.0.num().clone();
    let de = e.deg();
    let (a, b) = (x.0.num(), x.0.den());
    let db = b.deg();
    // P(f) = a z^(k-1) - f b must be divisible by e and have degree < db + de.
    let az = a.shift(k - 1);
    let zb: Vec<Poly> = (0..k).map(|j| b.shift(j)).collect();
    let zb_mod_e: Vec<Poly> = zb.iter().map(|p| p.rem(&e)).collect();
    let az_mod_e = az.rem(&e);
    let high: Vec<usize> = (db + de..db + k).collect();
    let neq = de + high.len();
    let mut m = QMat::zeros(neq, k);
    let mut rhs = QMat::zeros(neq, 1);
    for row in 0..de {
        for j in 0..k {
            m[(row, j)] = zb_mod_e[j].coeff(row);
        }
        rhs[(row, 0)] = az_mod_e.coeff(row);
    }
    for (i, &d) in high.iter().enumerate() {
        let row = de + i;
        for j in 0..k {
            m[(row, j)] = zb[j].coeff(d);
        }
        rhs[(row, 0)] = az.coeff(d);
    }
    let sol = m.solve(&rhs).ok_or_else(|| {
        Error::VerificationFailed("residue system in S is inconsistent".into())
    })?;
    let f = Poly::new(sol.col(0));
    let r = RatFun::new(f, Poly::monomial(Q::from_integer(1.into()), k - 1))?;
    let qf = (&x.0 - &r).checked_div(&y.0)?;
    if !is_member_s(&qf) {
        return Err(Error::VerificationFailed("quotient left S".into()));
    }
    Ok((SElem(qf), SElem(r)))
}

/// Greatest common divisor in normal form.
pub fn s_gcd(x: &SElem, y: &SElem) -> Result<SElem> {
    let (mut a, mut b) = (x.clone(), y.clone());
    if a.is_zero() && b.is_zero() {
        return Err(Error::ZeroElement);
    }
    while !b.is_zero() {
        let (_, r) = s_divide(&a, &b)?;
        a = b;
        b = r;
    }
    Ok(a.normal_form()?.0)
}

impl Add for &SElem {
    type Output = SElem;
    fn add(self, rhs: &SElem) -> SElem {
        SElem(&self.0 + &rhs.0)
    }
}

impl Sub for &SElem {
    type Output = SElem;
    fn sub(self, rhs: &SElem) -> SElem {
        SElem(&self.0 - &rhs.0)
    }
}

impl Mul for &SElem {
    type Output = SElem;
    fn mul(self, rhs: &SElem) -> SElem {
        SElem(&self.0 * &rhs.0)
    }
}

impl Neg for &SElem {
    type Output = SElem;
    fn neg(self) -> SElem {
        SElem(-&self.0)
    }
}

impl From<SElem> for RatFun {
    fn from(s: SElem) -> RatFun {
        s.0
    }
}

impl TryFrom<RatFun> for SElem {
    type Error = Error;
    fn try_from(f: RatFun) -> Result<SElem> {
        SElem::new(f)
    }
}

impl fmt::Display for SElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for SElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SElem({:?})", self.0)
    }
}

impl Zero for SElem {
    fn zero() -> Self {
        SElem::zero()
    }
    fn is_zero(&self) -> bool {
        SElem::is_zero(self)
    }
}

impl Add for SElem {
    type Output = SElem;
    fn add(self, rhs: SElem) -> SElem {
        &self + &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{q, qr};

    fn rf(num: &[i64], den: &[i64]) -> RatFun {
        RatFun::new(Poly::from_i64(num), Poly::from_i64(den)).unwrap()
    }

    fn s(num: &[i64], den: &[i64]) -> SElem {
        SElem::new(rf(num, den)).unwrap()
    }

    #[test]
    fn membership() {
        assert!(is_member_s(&RatFun::z_inv(q(1), 1)));
        assert!(!is_member_s(&rf(&[0, 0, 1], &[-4, 0, 1])));
        assert!(!is_member_s(&RatFun::from_poly(Poly::z())));
        // pole on the unit circle is not stable
        assert!(!is_member_s(&rf(&[1], &[-1, 1])));
    }

    #[test]
    fn orders() {
        assert_eq!(SElem::one().order(), Ok(0));
        assert_eq!(SElem::z_inv(1).order(), Ok(1));
        assert_eq!(s(&[-4, 0, 1], &[0, 0, 1]).order(), Ok(2));
        assert_eq!(SElem::zero().order(), Err(Error::ZeroElement));
    }

    #[test]
    fn normal_forms() {
        let (n, u) = SElem::new(RatFun::z_inv(q(2), 1)).unwrap().normal_form().unwrap();
        assert_eq!(n, SElem::z_inv(1));
        assert_eq!(u, SElem::constant(q(2)));
        let h = s(&[-4, 0, 1], &[0, 0, 1]);
        assert_eq!(h.normal_form().unwrap(), (h.clone(), SElem::one()));
        let unit = SElem::new(RatFun::new(Poly::new(vec![qr(-1, 2), q(1)]), Poly::z()).unwrap()).unwrap();
        let (n, u) = unit.normal_form().unwrap();
        assert_eq!(n, SElem::one());
        assert_eq!(u, unit);
    }

    #[test]
    fn division() {
        let (qq, r) = SElem::z_inv(2).divide(&SElem::z_inv(1)).unwrap();
        assert_eq!((qq, r), (SElem::z_inv(1), SElem::zero()));
        let (qq, r) = SElem::z_inv(1).divide(&SElem::z_inv(2)).unwrap();
        assert_eq!((qq, r), (SElem::zero(), SElem::z_inv(1)));
        let (qq, r) = s(&[-2, 1], &[0, 1]).divide(&SElem::z_inv(1)).unwrap();
        assert_eq!((qq, r), (SElem::constant(q(-2)), SElem::one()));
        assert_eq!(SElem::one().divide(&SElem::zero()), Err(Error::ZeroDivisor));
    }

    #[test]
    fn gcds() {
        assert_eq!(s_gcd(&SElem::z_inv(1), &SElem::z_inv(2)).unwrap(), SElem::z_inv(1));
        assert_eq!(s_gcd(&SElem::one(), &SElem::z_inv(3)).unwrap(), SElem::one());
        let a = s(&[-4, 0, 1], &[0, 0, 1]);
        let b = s(&[-2, 1], &[0, 1]);
        assert_eq!(s_gcd(&a, &b).unwrap(), b);
        assert_eq!(s_gcd(&b, &a).unwrap(), b);
    }
}
