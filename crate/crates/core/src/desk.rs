//! Finite certificates for reducedness and for the intersection property
//! `A = A[1/f] ∩ A[1/g]` of a monomial regular sequence.

use crate::error::{Error, Result};
use crate::gf;
use crate::ring::{Elem, Exps, Ring, RingKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reducedness {
    Reduced,
    /// A nonzero element with a vanishing power.
    Nilpotent(Elem),
}

/// `F_q[T]/(g)` is reduced iff `g` is squarefree. Otherwise the class of
/// the radical of `g` is a nonzero nilpotent.
pub fn is_reduced_univariate(ring: &Ring) -> Result<Reducedness> {
    let RingKind::Univariate(u) = ring.kind() else {
        return Err(Error::InvalidRing("expected a univariate quotient".into()));
    };
    let gr = ring.coeffs();
    let rad = gf::poly_radical(gr, &u.modulus);
    if rad.len() == u.modulus.len() {
        Ok(Reducedness::Reduced)
    } else {
        Ok(Reducedness::Nilpotent(ring.from_dense(&rad)))
    }
}

/// Reducedness of any supported ring. A monomial quotient is reduced iff
/// every generator already equals its support monomial at the smallest
/// lattice step; otherwise that support monomial is nilpotent and nonzero.
pub fn reducedness(ring: &Ring) -> Result<Reducedness> {
    match ring.kind() {
        RingKind::Field => Ok(Reducedness::Reduced),
        RingKind::Univariate(_) => is_reduced_univariate(ring),
        RingKind::Frac(spec) => {
            for g in &spec.quotient {
                let support: Exps = g.iter().map(|&a| (a > 0) as i64).collect();
                let h = ring.monomial(support, ring.coeffs().one())?;
                if !h.is_zero() {
                    return Ok(Reducedness::Nilpotent(h));
                }
            }
            Ok(Reducedness::Reduced)
        }
    }
}

/// Smallest `k >= 1` with `x^k = 0`, searching up to `bound`.
pub fn nilpotency_index(ring: &Ring, x: &Elem, bound: u64) -> Option<u64> {
    let mut y = x.clone();
    for k in 1..=bound {
        if y.is_zero() {
            return Some(k);
        }
        y = ring.mul(&y, x);
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Intersection {
    /// `h` with `h f^m = a` and `h g^n = b`.
    Member(Elem),
    /// `a g^n != b f^m`.
    Refuted,
    NotApplicable(String),
}

fn monomial_exps(ring: &Ring, x: &Elem) -> Option<Exps> {
    let (k, c) = x.as_monomial()?;
    ring.coeffs().is_unit(c).then(|| k.clone())
}

/// Exact division of every term of `a` by the monomial `d`.
fn divide_by_monomial(ring: &Ring, a: &Elem, d: &Elem) -> Option<Elem> {
    let (dk, dc) = d.as_monomial()?;
    let ci = ring.coeffs().inv(dc)?;
    let mut out = ring.zero();
    for (k, c) in a.terms() {
        let exps: Exps = k.iter().zip(dk.iter()).map(|(a, b)| a - b).collect();
        if exps.iter().any(|&e| e < 0) {
            return None;
        }
        out = ring.add(&out, &ring.monomial(exps, ring.coeffs().mul(c, &ci)).ok()?);
    }
    Some(out)
}

/// Decides an instance of `a / f^m = b / g^n` in `A[1/f] ∩ A[1/g]` for a
/// monomial regular sequence `(f, g)` of a polynomial frac ring.
pub fn intersection_witness(
    ring: &Ring,
    f: &Elem,
    g: &Elem,
    a: &Elem,
    m: u32,
    b: &Elem,
    n: u32,
) -> Result<Intersection> {
    let na = |s: &str| Ok(Intersection::NotApplicable(s.to_string()));
    let RingKind::Frac(spec) = ring.kind() else {
        return na("ring is not a polynomial frac ring");
    };
    if spec.laurent || !spec.quotient.is_empty() {
        return na("ring must be a polynomial ring without quotient");
    }
    let (Some(fk), Some(gk)) = (monomial_exps(ring, f), monomial_exps(ring, g)) else {
        return na("f and g must be monomials");
    };
    if fk.iter().all(|&e| e == 0) || gk.iter().all(|&e| e == 0) {
        return na("f and g must be non-units");
    }
    if fk.iter().zip(gk.iter()).any(|(&x, &y)| x > 0 && y > 0) {
        return na("f and g share a variable, not a regular sequence");
    }
    let fm = ring.pow(f, m as u64);
    let gn = ring.pow(g, n as u64);
    if ring.mul(a, &gn) != ring.mul(b, &fm) {
        return Ok(Intersection::Refuted);
    }
    let h = divide_by_monomial(ring, a, &fm)
        .ok_or_else(|| Error::NotDivisible(format!("{} by {}", ring.format(a), ring.format(&fm))))?;
    if ring.mul(&h, &gn) != *b {
        return Err(Error::NotDivisible(format!("{} by {}", ring.format(b), ring.format(&gn))));
    }
    Ok(Intersection::Member(h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uq(s: &str) -> Reducedness {
        is_reduced_univariate(&Ring::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn reducedness_examples() {
        let r = Ring::parse("uq base=(ff p=3 e=1) var=t modulus=t^2").unwrap();
        assert_eq!(uq("uq base=(ff p=3 e=1) var=t modulus=t^2"), Reducedness::Nilpotent(r.var(0)));
        assert_eq!(uq("uq base=(ff p=3 e=1) var=u modulus=u*(u-1)"), Reducedness::Reduced);
        let r = Ring::parse("uq base=(ff p=2 e=1) var=T modulus=T^2+1").unwrap();
        assert_eq!(
            is_reduced_univariate(&r).unwrap(),
            Reducedness::Nilpotent(r.parse_elem("T+1").unwrap())
        );
        let s = Ring::parse("frac base=(ff p=3 e=1) vars=x,t depth_p=0 depth_2=0 laurent=false mod=t^2").unwrap();
        assert_eq!(reducedness(&s).unwrap(), Reducedness::Nilpotent(s.parse_elem("t").unwrap()));
        let s = Ring::parse("frac base=(ff p=3 e=1) vars=x,t depth_p=0 depth_2=0 laurent=false mod=x*t").unwrap();
        assert_eq!(reducedness(&s).unwrap(), Reducedness::Reduced);
    }

    #[test]
    fn intersection_examples() {
        let r = Ring::parse("frac base=(ff p=3 e=1) vars=x,y depth_p=0 depth_2=0 laurent=false").unwrap();
        let e = |s: &str| r.parse_elem(s).unwrap();
        assert_eq!(
            intersection_witness(&r, &e("x"), &e("y"), &e("x^2*y"), 1, &e("x*y^2"), 1).unwrap(),
            Intersection::Member(e("x*y"))
        );
        assert_eq!(
            intersection_witness(&r, &e("x"), &e("y"), &e("y"), 1, &e("y^2"), 1).unwrap(),
            Intersection::Refuted
        );
        assert!(matches!(
            intersection_witness(&r, &e("x"), &e("x^2"), &e("x"), 1, &e("x"), 1).unwrap(),
            Intersection::NotApplicable(_)
        ));
    }
}
