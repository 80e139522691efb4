//! Newton lifting of simple roots over truncated ramified Witt rings, and
//! root adjunction for polynomials whose derivative is not a unit.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ramified::{RamifiedBase, RamifiedWitt};
use crate::ring::{Elem, Ring};
use crate::witt::WittVector;

/// Find `r` with `f(r) = 0 mod pi^prec` and `r = initial mod pi`.
#[derive(Clone, Debug)]
pub struct HenselProblem {
    /// `c_0 .. c_deg`, low degree first.
    pub coeffs: Vec<RamifiedWitt>,
    pub initial: RamifiedWitt,
    pub prec: usize,
}

/// One Newton step: the working precision and the verified `pi`-order of
/// `f(r)` after the step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HenselStep {
    pub prec: usize,
    pub order: usize,
}

#[derive(Clone, Debug)]
pub struct HenselResult {
    pub root: RamifiedWitt,
    pub steps: Vec<HenselStep>,
}

/// Horner evaluation.
pub fn eval_poly(coeffs: &[RamifiedWitt], x: &RamifiedWitt) -> Result<RamifiedWitt> {
    let mut acc = coeffs.last().ok_or_else(|| Error::Mismatch("empty polynomial".into()))?.clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.mul(x)?.add(c)?;
    }
    Ok(acc)
}

pub fn derivative(coeffs: &[RamifiedWitt]) -> Result<Vec<RamifiedWitt>> {
    if coeffs.len() < 2 {
        let c = &coeffs[0];
        return Ok(vec![RamifiedWitt::zero(c.base(), c.ring(), c.prec())?]);
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| {
            let k = RamifiedWitt::from_int(c.base(), c.ring(), c.prec(), k as i64)?;
            c.mul(&k)
        })
        .collect()
}

fn at_prec(coeffs: &[RamifiedWitt], prec: usize) -> Result<Vec<RamifiedWitt>> {
    coeffs.iter().map(|c| c.with_prec(prec)).collect()
}

fn unit_check(d: &RamifiedWitt) -> Result<()> {
    d.ring()
        .inverse(&d.reduce_mod_pi())
        .map(|_| ())
        .map_err(|_| Error::DerivativeNotUnit(format!("f'(r) = {} mod pi", d.ring().format(&d.reduce_mod_pi()))))
}

/// Newton iteration with precision doubled each step. Every step checks
/// that the `pi`-order of `f(r)` reached the new working precision, and
/// the result carries a certificate at the full precision.
pub fn hensel_lift(prob: &HenselProblem) -> Result<HenselResult> {
    let n = prob.prec;
    if prob.coeffs.len() < 2 {
        return Err(Error::Mismatch("polynomial must have degree at least 1".into()));
    }
    let lowest = prob.coeffs.iter().map(RamifiedWitt::prec).min().unwrap();
    if lowest < n {
        return Err(Error::Mismatch(format!("coefficients known only to precision {lowest}")));
    }
    let coeffs = at_prec(&prob.coeffs, n)?;
    let deriv = derivative(&coeffs)?;

    let mut r = prob.initial.with_prec(1)?;
    let f0 = eval_poly(&at_prec(&coeffs, 1)?, &r)?;
    if !f0.reduce_mod_pi().is_zero() {
        return Err(Error::NoConvergence("the seed is not a root modulo pi".into()));
    }
    unit_check(&eval_poly(&at_prec(&deriv, 1)?, &r)?)?;

    let mut steps = vec![HenselStep { prec: 1, order: 1 }];
    let mut ord = 1;
    while ord < n {
        let target = (2 * ord).min(n);
        let c = at_prec(&coeffs, target)?;
        let d = at_prec(&deriv, target)?;
        r = r.with_prec(target)?;
        let fr = eval_poly(&c, &r)?;
        let dr = eval_poly(&d, &r)?;
        unit_check(&dr)?;
        r = r.sub(&fr.mul(&dr.inv()?)?)?;
        let order = eval_poly(&c, &r)?.pi_order()?;
        steps.push(HenselStep { prec: target, order });
        if order < target {
            return Err(Error::NoConvergence(format!(
                "order {order} after a step at precision {target}, expected at least {target}"
            )));
        }
        ord = target;
    }
    let residual = eval_poly(&coeffs, &r)?;
    if residual.digit_expand(n)?.digits.iter().any(|d| !d.is_zero()) {
        return Err(Error::NoConvergence("final residual has nonzero digits".into()));
    }
    Ok(HenselResult { root: r, steps })
}

/// A root of a monic `f` over `W(F_q)` that reduces to `[seed]` but whose
/// derivative there is not a unit. When `g(Y) = f([seed] + Y)` is
/// Eisenstein, the root is `[seed] + pi_g` in the ramified extension cut
/// out by `g`; the new base is returned with the root over `ring`.
pub fn adjoin_root(
    field: &Arc<Ring>,
    coeffs: &[WittVector],
    seed: &Elem,
    ring: &Arc<Ring>,
    prec: usize,
) -> Result<(Arc<RamifiedBase>, RamifiedWitt)> {
    let deg = coeffs.len() - 1;
    if deg < 1 || !coeffs[deg].sub(&WittVector::one(field, coeffs[deg].len()))?.is_zero() {
        return Err(Error::Mismatch("polynomial must be monic of degree at least 1".into()));
    }
    let n = coeffs.iter().map(WittVector::len).min().unwrap();
    let t = WittVector::teichmuller(field, seed.clone(), n);
    // Taylor shift by synthetic division
    let mut g: Vec<WittVector> = coeffs.iter().map(|c| c.truncate(n)).collect::<Result<_>>()?;
    for i in 0..deg {
        for j in (i..deg).rev() {
            g[j] = g[j].add(&t.mul(&g[j + 1])?)?;
        }
    }
    g.truncate(deg);
    let name = format!("adjoin root of degree {deg} near [{}] over {}", field.format(seed), field.descriptor());
    let base = RamifiedBase::new(&name, field.clone(), g)?;
    let s = RamifiedWitt::teichmuller(&base, ring, prec, ring.from_coef(field.constant_coef(seed)))?;
    let root = s.add(&RamifiedWitt::pi(&base, ring, prec)?)?;
    Ok((base, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::ramified::RwEval;

    #[test]
    fn linear_root() {
        let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
        let r = Ring::parse("ff p=3 e=1").unwrap();
        let ev = RwEval { base: &b, ring: &r, prec: 6, allow_x: true };
        let coeffs = ev.eval(&parse_expr("X - (2 + pi)").unwrap()).unwrap();
        let seed = RamifiedWitt::teichmuller(&b, &r, 6, r.from_int(2)).unwrap();
        let res = hensel_lift(&HenselProblem { coeffs: coeffs.clone(), initial: seed, prec: 6 }).unwrap();
        assert!(eval_poly(&coeffs, &res.root).unwrap().is_zero());
        let orders: Vec<usize> = res.steps.iter().map(|s| s.order).collect();
        assert_eq!(orders, [1, 2, 4, 6]);
    }

    #[test]
    fn sign_pair() {
        let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
        let r = Ring::parse("ff p=3 e=1").unwrap();
        let ev = RwEval { base: &b, ring: &r, prec: 8, allow_x: true };
        let coeffs = ev.eval(&parse_expr("X^2 - (1 + pi)").unwrap()).unwrap();
        let lift = |s: i64| {
            let seed = RamifiedWitt::teichmuller(&b, &r, 8, r.from_int(s)).unwrap();
            hensel_lift(&HenselProblem { coeffs: coeffs.clone(), initial: seed, prec: 8 })
                .unwrap()
                .root
        };
        assert_eq!(lift(1).neg().unwrap(), lift(2));
    }

    #[test]
    fn adjoined_root_is_exact() {
        let f = Ring::parse("ff p=2 e=1").unwrap();
        let mut c = vec![WittVector::zero(&f, 3); 5];
        c[0] = WittVector::one(&f, 3).neg().unwrap();
        c[1] = WittVector::from_int(&f, 3, -2);
        c[4] = WittVector::one(&f, 3);
        let (base, a) = adjoin_root(&f, &c, &f.one(), &f, 8).unwrap();
        assert_eq!(base.f(), 4);
        let coeffs: Vec<RamifiedWitt> = c.iter().map(|w| RamifiedWitt::from_witt(&base, w.clone(), 8).unwrap()).collect();
        assert!(eval_poly(&coeffs, &a).unwrap().is_zero());
        let rw = RwEval { base: &base, ring: &f, prec: 8, allow_x: false };
        let lhs = a.pow(4).unwrap().sub(&rw.eval_constant(&parse_expr("1").unwrap()).unwrap()).unwrap();
        assert!(lhs.pi_order().unwrap() >= 4);
    }
}
