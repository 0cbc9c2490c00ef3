//! Rational functions in `z` over the rationals, kept in reduced form.

use std::fmt;
use std::str::FromStr;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{fmt_q, parse_q, Poly, Q};

/// `num / den` with `gcd(num, den) = 1` and `den` monic. Zero is `0 / 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFun::zero();
        }
        let g = Poly::gcd(&num, &den);
        let num = num.div_exact(&g).unwrap();
        let den = den.div_exact(&g).unwrap();
        let l = den.lead();
        let inv = Q::one() / l;
        RatFun { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn zero() -> Self {
        RatFun { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFun::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        RatFun { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn from_i64(c: i64) -> Self {
        RatFun::constant(crate::poly::q(c))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFun { num: p, den: Poly::one() }
    }

    /// `c * z^(-k)`
    pub fn z_inv(c: Q, k: usize) -> Self {
        if c.is_zero() {
            return RatFun::zero();
        }
        RatFun { num: Poly::constant(c), den: Poly::monomial(Q::one(), k) }
    }

    /// `c * z^k` for any integer `k`.
    pub fn z_pow(c: Q, k: i64) -> Self {
        if k >= 0 {
            RatFun::from_poly(Poly::monomial(c, k as usize))
        } else {
            RatFun::z_inv(c, (-k) as usize)
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// `deg den - deg num`; `None` for zero.
    pub fn relative_degree(&self) -> Option<i64> {
        self.num.degree().map(|dn| self.den.deg() as i64 - dn as i64)
    }

    pub fn is_proper(&self) -> bool {
        self.relative_degree().is_none_or(|r| r >= 0)
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.relative_degree().is_none_or(|r| r > 0)
    }

    /// Limit as `z -> infinity`.
    pub fn value_at_infinity(&self) -> Result<Q> {
        match self.relative_degree() {
            None => Ok(Q::zero()),
            Some(r) if r > 0 => Ok(Q::zero()),
            Some(0) => Ok(self.num.lead() / self.den.lead()),
            Some(_) => Err(Error::ImproperEntry(0, 0)),
        }
    }

    /// Coefficients `h_0, h_1, ..., h_n` of the expansion
    /// `sum_j h_j z^(-j)` at infinity of a proper function.
    pub fn expand_at_infinity(&self, n: usize) -> Result<Vec<Q>> {
        if !self.is_proper() {
            return Err(Error::ImproperEntry(0, 0));
        }
        let mut out = vec![Q::zero(); n + 1];
        if self.is_zero() {
            return Ok(out);
        }
        // Work with coefficients in z^-1: num(z)/den(z) = a(w)/b(w), w = 1/z,
        // with a, b the reversed coefficient lists padded to deg den.
        let d = self.den.deg();
        let b: Vec<Q> = (0..=d).map(|k| self.den.coeff(d - k)).collect();
        let a: Vec<Q> = (0..=d).map(|k| self.num.coeff(d - k)).collect();
        let b0 = b[0].clone();
        for j in 0..=n {
            let mut acc = a.get(j).cloned().unwrap_or_else(Q::zero);
            for k in 1..=j.min(d) {
                acc -= &b[k] * &out[j - k];
            }
            out[j] = acc / &b0;
        }
        Ok(out)
    }

    /// `f(z^k)`
    pub fn compose_power(&self, k: usize) -> RatFun {
        RatFun::reduce(self.num.compose_power(k), self.den.compose_power(k))
    }

    pub fn inv(&self) -> Result<RatFun> {
        if self.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        Ok(RatFun::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn scale(&self, c: &Q) -> RatFun {
        RatFun::reduce(self.num.scale(c), self.den.clone())
    }

    pub fn checked_div(&self, rhs: &RatFun) -> Result<RatFun> {
        Ok(self * &rhs.inv()?)
    }

    pub fn eval(&self, x: &Q) -> Option<Q> {
        let d = self.den.eval(x);
        (!d.is_zero()).then(|| self.num.eval(x) / d)
    }

    pub fn pow(&self, e: usize) -> RatFun {
        RatFun { num: self.num.pow(e), den: self.den.pow(e) }
    }
}

/// Parses sums of terms `c`, `c z^k`, `z^k` (integer `k`, coefficient an
/// integer or `p/q`), or a quotient `(...)/(...)` of two such sums.
impl FromStr for RatFun {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.ends_with(')') {
            let chars: Vec<char> = s.chars().collect();
            let mut depth = 0;
            let mut open = None;
            for i in (0..chars.len()).rev() {
                match chars[i] {
                    ')' => depth += 1,
                    '(' => {
                        depth -= 1;
                        if depth == 0 {
                            open = Some(i);
                            break;
                        }
                    }
                    _ => {}
                }
            }
            let open = open.ok_or_else(|| format!("unbalanced parentheses in {s:?}"))?;
            let inner: String = chars[open + 1..chars.len() - 1].iter().collect();
            if open == 0 {
                return inner.parse();
            }
            if chars[open - 1] != '/' {
                return Err(format!("expected '/' before '(' in {s:?}"));
            }
            let n: RatFun = chars[..open - 1].iter().collect::<String>().parse()?;
            let d: RatFun = inner.parse()?;
            return n.checked_div(&d).map_err(|e| e.to_string());
        }
        parse_laurent(&s)
    }
}

fn parse_laurent(s: &str) -> std::result::Result<RatFun, String> {
    if s.is_empty() {
        return Err("empty expression".into());
    }
    let bytes: Vec<char> = s.chars().collect();
    let mut terms = Vec::new();
    let mut start = 0;
    for i in 1..bytes.len() {
        if (bytes[i] == '+' || bytes[i] == '-') && bytes[i - 1] != '^' {
            terms.push(bytes[start..i].iter().collect::<String>());
            start = i;
        }
    }
    terms.push(bytes[start..].iter().collect::<String>());
    let mut acc = RatFun::zero();
    for term in terms {
        let bad = || format!("cannot parse term {term:?}");
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-Q::one(), b),
            None => (Q::one(), term.strip_prefix('+').unwrap_or(&term)),
        };
        let (coef, exp) = match body.find('z') {
            None => (body, 0i64),
            Some(k) => {
                let e = match &body[k + 1..] {
                    "" => 1,
                    r => r.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?,
                };
                (body[..k].trim_end_matches('*'), e)
            }
        };
        let c = if coef.is_empty() { Q::one() } else { parse_q(coef).ok_or_else(bad)? };
        acc = &acc + &RatFun::z_pow(sign * c, exp);
    }
    Ok(acc)
}

impl Default for RatFun {
    fn default() -> Self {
        RatFun::zero()
    }
}

impl From<Poly> for RatFun {
    fn from(p: Poly) -> Self {
        RatFun::from_poly(p)
    }
}

impl From<Q> for RatFun {
    fn from(c: Q) -> Self {
        RatFun::constant(c)
    }
}

impl Add for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFun::reduce(&self.num + &rhs.num, self.den.clone());
        }
        RatFun::reduce(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl Mul for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() || rhs.is_zero() {
            return RatFun::zero();
        }
        RatFun::reduce(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

/// Panics on a zero divisor; use [`RatFun::checked_div`] for a `Result`.
impl Div for &RatFun {
    type Output = RatFun;
    fn div(self, rhs: &RatFun) -> RatFun {
        self.checked_div(rhs).expect("rational function division by zero")
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun { num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RatFun {
            type Output = RatFun;
            fn $m(self, rhs: RatFun) -> RatFun {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        -&self
    }
}

/// Writes `sum c_k z^(k - shift)` using `z^-j` for negative powers.
fn fmt_laurent(p: &Poly, shift: usize) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    let mut first = true;
    for k in (0..p.coeffs().len()).rev() {
        let c = &p.coeffs()[k];
        if c.is_zero() {
            continue;
        }
        let e = k as i64 - shift as i64;
        let neg = c.is_negative();
        let a = c.abs();
        if first {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        first = false;
        let mon = match e {
            0 => String::new(),
            1 => "z".into(),
            _ => format!("z^{e}"),
        };
        if mon.is_empty() {
            s.push_str(&fmt_q(&a));
        } else if a.is_one() {
            s.push_str(&mon);
        } else {
            s.push_str(&format!("{}{mon}", fmt_q(&a)));
        }
    }
    s
}

/// Renders with negative powers of `z`, e.g. `1 - 4z^-2` or `1/(1 - 4z^-2)`.
impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.den.deg();
        let den_is_monomial = self.den.coeffs().iter().filter(|c| !c.is_zero()).count() == 1;
        if den_is_monomial {
            return write!(f, "{}", fmt_laurent(&self.num, d));
        }
        let n = fmt_laurent(&self.num, d);
        let dd = fmt_laurent(&self.den, d);
        let wrap = |s: String| if s.contains(' ') { format!("({s})") } else { s };
        write!(f, "{}/{}", wrap(n), wrap(dd))
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/({})", self.num, self.den)
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
    fn field_arithmetic() {
        assert_eq!(&zi(1) + &zi(1), RatFun::z_inv(q(2), 1));
        let hermite_diag = &RatFun::one() - &RatFun::z_inv(q(4), 2);
        let interactor = RatFun::new(Poly::from_i64(&[0, 0, 1]), Poly::from_i64(&[-4, 0, 1])).unwrap();
        assert!((&hermite_diag * &interactor).is_one());
        let quo = &zi(1) / &zi(2);
        assert_eq!(quo, RatFun::from_poly(Poly::z()));
        assert!(!quo.is_proper());
        assert_eq!(zi(1).checked_div(&RatFun::zero()), Err(Error::ZeroDivisor));
    }

    #[test]
    fn rendering() {
        let h = &RatFun::one() - &RatFun::z_inv(q(4), 2);
        assert_eq!(h.to_string(), "1 - 4z^-2");
        assert_eq!(RatFun::from_poly(Poly::z()).to_string(), "z");
        assert_eq!(h.inv().unwrap().to_string(), "1/(1 - 4z^-2)");
        assert_eq!((-zi(1)).to_string(), "-z^-1");
    }

    #[test]
    fn parsing_round_trips() {
        for text in ["1 - 4z^-2", "z^-1", "-z^-1", "0", "1/(1 - 4z^-2)", "z", "1/2z^-1 + 3"] {
            let f: RatFun = text.parse().unwrap();
            let g: RatFun = f.to_string().parse().unwrap();
            assert_eq!(f, g, "{text}");
        }
        let f: RatFun = "(z^2)/(z^2 - 4)".parse().unwrap();
        assert_eq!(f, rf_i(&[0, 0, 1], &[-4, 0, 1]));
        assert!("z^".parse::<RatFun>().is_err());
    }

    fn rf_i(n: &[i64], d: &[i64]) -> RatFun {
        RatFun::new(Poly::from_i64(n), Poly::from_i64(d)).unwrap()
    }

    #[test]
    fn expansion_at_infinity() {
        // z / (z - 1/2) = 1 + (1/2) z^-1 + (1/4) z^-2 + ...
        let f = RatFun::new(Poly::z(), Poly::new(vec![crate::poly::qr(-1, 2), q(1)])).unwrap();
        let e = f.expand_at_infinity(3).unwrap();
        assert_eq!(e, vec![q(1), crate::poly::qr(1, 2), crate::poly::qr(1, 4), crate::poly::qr(1, 8)]);
        assert_eq!(zi(2).expand_at_infinity(3).unwrap(), vec![q(0), q(0), q(1), q(0)]);
        assert!(RatFun::from_poly(Poly::z()).expand_at_infinity(2).is_err());
    }
}
