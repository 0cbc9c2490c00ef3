//! Exact root location with respect to the open unit disk.
//!
//! Roots are never computed numerically. A square-free factor `q(z)` is
//! mapped by `z = (1 + w) / (1 - w)` to a polynomial whose roots in the open
//! left half-plane are exactly the roots of `q` inside the disk; those are
//! counted with a Sturm chain (Cauchy index of the real and imaginary parts
//! along the imaginary axis). Roots on the imaginary axis, and root pairs
//! `w, -w`, are split off first through `gcd(P(w), P(-w))`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::{Poly, Q};

/// `p = lead * stable * unstable` with both factors monic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilitySplit {
    pub lead: Q,
    /// Every root has modulus < 1.
    pub stable: Poly,
    /// Every root has modulus >= 1.
    pub unstable: Poly,
}

/// Yun's square-free decomposition of a nonzero polynomial: returns
/// `(factor, multiplicity)` pairs of monic, pairwise coprime, square-free
/// factors whose product (with multiplicities) is `p.monic()`.
pub fn squarefree_decomposition(p: &Poly) -> Vec<(Poly, usize)> {
    let f = p.monic();
    let mut out = Vec::new();
    if f.is_constant() {
        return out;
    }
    let df = f.derivative();
    let a0 = Poly::gcd(&f, &df);
    let mut b = f.div_exact(&a0).unwrap();
    let c = df.div_exact(&a0).unwrap_or_else(|| df.div_rem(&a0).0);
    let mut d = &c - &b.derivative();
    let mut i = 1;
    while !b.is_constant() {
        let a = Poly::gcd(&b, &d);
        let b_next = b.div_exact(&a).unwrap();
        let c_next = d.div_exact(&a).unwrap();
        d = &c_next - &b_next.derivative();
        if !a.is_constant() {
            out.push((a, i));
        }
        b = b_next;
        i += 1;
    }
    out
}

const DIVISOR_SEARCH_LIMIT: u64 = 2_000_000;

fn positive_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    let small = n.to_u64()?;
    let mut out = Vec::new();
    let mut k = 1u64;
    while k.saturating_mul(k) <= small {
        if k > DIVISOR_SEARCH_LIMIT {
            return None;
        }
        if small % k == 0 {
            out.push(BigInt::from(k));
            if k != small / k {
                out.push(BigInt::from(small / k));
            }
        }
        k += 1;
    }
    Some(out)
}

/// Distinct rational roots (rational root theorem). Returns only the roots
/// it can certify; coefficient sizes beyond the divisor search limit make it
/// return the roots found so far (zero roots are always found).
pub fn rational_roots(p: &Poly) -> Vec<Q> {
    let mut roots = Vec::new();
    if p.is_constant() {
        return roots;
    }
    let mut work = p.clone();
    if work.coeff(0).is_zero() {
        roots.push(Q::zero());
        while work.coeff(0).is_zero() {
            work = work.div_exact(&Poly::z()).unwrap();
        }
    }
    if work.is_constant() {
        return roots;
    }
    let ints = work.to_primitive_integer();
    let (Some(num_divs), Some(den_divs)) =
        (positive_divisors(&ints[0]), positive_divisors(ints.last().unwrap()))
    else {
        return roots;
    };
    let mut seen: Vec<Q> = Vec::new();
    for a in &num_divs {
        for b in &den_divs {
            if !a.gcd(b).is_one() {
                continue;
            }
            for sign in [1, -1] {
                let cand = Q::new(a * BigInt::from(sign), b.clone());
                if seen.contains(&cand) {
                    continue;
                }
                seen.push(cand.clone());
                if work.eval(&cand).is_zero() {
                    roots.push(cand);
                }
            }
        }
    }
    roots
}

fn sign_at_pos_inf(p: &Poly) -> i32 {
    if p.is_zero() {
        0
    } else if p.lead().is_positive() {
        1
    } else {
        -1
    }
}

fn sign_at_neg_inf(p: &Poly) -> i32 {
    let s = sign_at_pos_inf(p);
    if p.deg() % 2 == 1 {
        -s
    } else {
        s
    }
}

fn sign_at(p: &Poly, x: &Q) -> i32 {
    let v = p.eval(x);
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

fn variations(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut v = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            v += 1;
        }
        last = s;
    }
    v
}

/// Generalized Sturm chain `f0, f1, -rem(f0, f1), ...`.
fn sturm_chain(f0: &Poly, f1: &Poly) -> Vec<Poly> {
    let mut chain = vec![f0.clone(), f1.clone()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            break;
        }
        let r = -&chain[n - 2].rem(&chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(r);
    }
    chain
}

/// Cauchy index of `f1 / f0` over the whole real line.
fn cauchy_index(f0: &Poly, f1: &Poly) -> i64 {
    let chain = sturm_chain(f0, f1);
    let lo = variations(chain.iter().map(sign_at_neg_inf));
    let hi = variations(chain.iter().map(sign_at_pos_inf));
    lo as i64 - hi as i64
}

/// Number of distinct real roots of a square-free `p` in `(-inf, 0)`, given `p(0) != 0`.
fn negative_real_roots(p: &Poly) -> usize {
    let chain = sturm_chain(p, &p.derivative());
    let lo = variations(chain.iter().map(sign_at_neg_inf));
    let at0 = variations(chain.iter().map(|c| sign_at(c, &Q::zero())));
    lo - at0
}

/// `(1 - w)^n q((1 + w) / (1 - w))` for `n = deg q`.
fn cayley(qp: &Poly) -> Poly {
    let n = qp.deg();
    let plus = Poly::from_i64(&[1, 1]);
    let minus = Poly::from_i64(&[1, -1]);
    let mut acc = Poly::zero();
    for (k, c) in qp.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let term = &plus.pow(k) * &minus.pow(n - k);
        acc = &acc + &term.scale(c);
    }
    acc
}

/// Roots with negative real part of a polynomial with no root on the
/// imaginary axis and no pair `w, -w`.
fn left_half_plane_count(p: &Poly) -> usize {
    let k = p.deg();
    if k == 0 {
        return 0;
    }
    let (work, extra) = if k.is_multiple_of(2) {
        (p * &Poly::from_i64(&[1, 1]), 1)
    } else {
        (p.clone(), 0)
    };
    let mut re = Vec::new();
    let mut im = Vec::new();
    for (j, c) in work.coeffs().iter().enumerate() {
        match j % 4 {
            0 => re.push((j, c.clone())),
            1 => im.push((j, c.clone())),
            2 => re.push((j, -c)),
            _ => im.push((j, -c)),
        }
    }
    let build = |terms: Vec<(usize, Q)>| {
        let mut v = vec![Q::zero(); work.deg() + 1];
        for (j, c) in terms {
            v[j] = c;
        }
        Poly::new(v)
    };
    let (re, im) = (build(re), build(im));
    let idx = cauchy_index(&im, &re);
    let total = work.deg() as i64;
    ((total + idx) / 2) as usize - extra
}

/// Number of roots of a square-free polynomial strictly inside the unit disk.
pub fn count_inside_squarefree(p: &Poly) -> usize {
    let mut work = p.monic();
    for r in [Q::one(), -Q::one()] {
        if work.degree().is_some_and(|d| d > 0) && work.eval(&r).is_zero() {
            work = work.div_exact(&Poly::linear_root(r)).unwrap();
        }
    }
    if work.is_constant() {
        return 0;
    }
    let pw = cayley(&work);
    let sym = Poly::gcd(&pw, &pw.reflect());
    let mut inside = 0;
    if !sym.is_constant() {
        // sym is even with sym(0) != 0, so sym(w) = e(w^2).
        let e = Poly::new(sym.coeffs().iter().step_by(2).cloned().collect());
        let on_axis = 2 * negative_real_roots(&e);
        inside += (sym.deg() - on_axis) / 2;
    }
    let rest = pw.div_exact(&sym).expect("gcd divides");
    inside + left_half_plane_count(&rest)
}

/// Number of roots strictly inside the unit disk, counted with multiplicity.
pub fn count_inside(p: &Poly) -> usize {
    squarefree_decomposition(p)
        .iter()
        .map(|(f, m)| m * count_inside_squarefree(f))
        .sum()
}

/// True iff every root of the nonzero polynomial `p` has modulus < 1.
pub fn is_schur_stable(p: &Poly) -> bool {
    count_inside(p) == p.deg()
}

/// Splits `p` into its stable and unstable monic factors.
pub fn split_stability(p: &Poly) -> Result<StabilitySplit> {
    if p.is_zero() {
        return Err(Error::ZeroElement);
    }
    let lead = p.lead();
    let mut stable = Poly::one();
    let mut unstable = Poly::one();
    for (factor, mult) in squarefree_decomposition(p) {
        let mut rest = factor.clone();
        for r in rational_roots(&factor) {
            let lin = Poly::linear_root(r.clone());
            rest = rest.div_exact(&lin).unwrap();
            let lin = lin.pow(mult);
            if r.abs() < Q::one() {
                stable = &stable * &lin;
            } else {
                unstable = &unstable * &lin;
            }
        }
        if rest.is_constant() {
            continue;
        }
        let inside = count_inside_squarefree(&rest);
        if inside == rest.deg() {
            stable = &stable * &rest.pow(mult);
        } else if inside == 0 {
            unstable = &unstable * &rest.pow(mult);
        } else {
            return Err(Error::UnsupportedFactor(rest.to_string()));
        }
    }
    Ok(StabilitySplit { lead, stable, unstable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{q, qr};

    fn from_roots(roots: &[Q]) -> Poly {
        roots
            .iter()
            .fold(Poly::one(), |acc, r| &acc * &Poly::linear_root(r.clone()))
    }

    #[test]
    fn yun_recombines() {
        let p = &from_roots(&[q(1), q(1), q(2), qr(1, 3), qr(1, 3), qr(1, 3)]) * &Poly::from_i64(&[1, 0, 1]);
        let parts = squarefree_decomposition(&p);
        let back = parts.iter().fold(Poly::one(), |acc, (f, m)| &acc * &f.pow(*m));
        assert_eq!(back, p.monic());
        assert!(parts.iter().any(|(_, m)| *m == 3));
    }

    #[test]
    fn counts_simple_cases() {
        assert_eq!(count_inside(&from_roots(&[qr(1, 2)])), 1);
        assert_eq!(count_inside(&from_roots(&[q(2)])), 0);
        assert_eq!(count_inside(&from_roots(&[q(1), q(-1), qr(-1, 2)])), 1);
        // z^2 + 1: both roots on the circle.
        assert_eq!(count_inside(&Poly::from_i64(&[1, 0, 1])), 0);
        // z^2 + 1/4: roots +-i/2.
        assert_eq!(count_inside(&Poly::new(vec![qr(1, 4), q(0), q(1)])), 2);
        // z^2 - 2: +-sqrt 2, irreducible and outside.
        assert_eq!(count_inside(&Poly::from_i64(&[-2, 0, 1])), 0);
        // z^2 - 1/2: +-1/sqrt 2 inside.
        assert_eq!(count_inside(&Poly::new(vec![qr(-1, 2), q(0), q(1)])), 2);
        // z^3 triple root at zero.
        assert_eq!(count_inside(&Poly::from_i64(&[0, 0, 0, 1])), 3);
    }

    #[test]
    fn counts_reciprocal_pairs() {
        // (z - 2)(z - 1/2) has roots w and -w after the Cayley map.
        assert_eq!(count_inside(&from_roots(&[q(2), qr(1, 2)])), 1);
        // z^2 - 3z + 1: roots (3 +- sqrt5)/2, a reciprocal pair.
        assert_eq!(count_inside(&Poly::from_i64(&[1, -3, 1])), 1);
        // z^2 + z + 1: primitive cube roots of unity.
        assert_eq!(count_inside(&Poly::from_i64(&[1, 1, 1])), 0);
    }

    #[test]
    fn split_examples() {
        let s = split_stability(&Poly::from_i64(&[-4, 0, 1])).unwrap();
        assert_eq!((s.lead, s.stable, s.unstable), (q(1), Poly::one(), Poly::from_i64(&[-4, 0, 1])));
        let s = split_stability(&Poly::from_i64(&[0, 0, 0, 1])).unwrap();
        assert_eq!(s.stable, Poly::from_i64(&[0, 0, 0, 1]));
        assert!(s.unstable.is_one());
        let s = split_stability(&Poly::from_i64(&[0, -1, 2])).unwrap();
        assert_eq!(s.lead, q(2));
        assert_eq!(s.stable, Poly::new(vec![q(0), qr(-1, 2), q(1)]));
        assert!(s.unstable.is_one());
    }

    #[test]
    fn mixed_irreducible_factor_is_rejected() {
        // z^2 - 2z - 1 has roots 1 +- sqrt2: one inside, one outside.
        let err = split_stability(&Poly::from_i64(&[-1, -2, 1])).unwrap_err();
        assert!(matches!(err, Error::UnsupportedFactor(_)));
    }
}
