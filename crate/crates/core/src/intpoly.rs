//! Sparse multivariate polynomials with exact integer coefficients.
//!
//! Exponent vectors are packed into a single `u128` with a fixed bit width
//! per variable; variable 0 occupies the highest bits, so comparing packed
//! keys is lexicographic comparison of exponent vectors. Callers size the
//! layout for the largest degree they will ever form, which keeps packed
//! addition carry-free.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    pub nvars: usize,
    pub bits: u32,
}

impl Layout {
    /// A layout holding per-variable degrees up to `max_deg`, if it fits.
    pub fn new(nvars: usize, max_deg: u64) -> Option<Layout> {
        let bits = (64 - max_deg.leading_zeros()).max(1);
        (nvars as u32 * bits <= 128).then_some(Layout { nvars, bits })
    }

    fn shift(&self, var: usize) -> u32 {
        (self.nvars - 1 - var) as u32 * self.bits
    }

    pub fn exp(&self, key: u128, var: usize) -> u64 {
        ((key >> self.shift(var)) & ((1u128 << self.bits) - 1)) as u64
    }

    pub fn pack(&self, exps: &[u64]) -> u128 {
        exps.iter()
            .enumerate()
            .fold(0u128, |acc, (i, &e)| acc | ((e as u128) << self.shift(i)))
    }

    pub fn unpack(&self, key: u128) -> Vec<u64> {
        (0..self.nvars).map(|i| self.exp(key, i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    pub layout: Layout,
    pub terms: BTreeMap<u128, BigInt>,
}

impl IntPoly {
    pub fn zero(layout: Layout) -> Self {
        IntPoly {
            layout,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(layout: Layout, c: BigInt) -> Self {
        let mut p = IntPoly::zero(layout);
        if !c.is_zero() {
            p.terms.insert(0, c);
        }
        p
    }

    pub fn var(layout: Layout, i: usize) -> Self {
        let mut p = IntPoly::zero(layout);
        let mut e = vec![0; layout.nvars];
        e[i] = 1;
        p.terms.insert(layout.pack(&e), BigInt::one());
        p
    }

    /// `c * v^k` for a single variable.
    pub fn monomial(layout: Layout, i: usize, k: u64, c: BigInt) -> Self {
        let mut e = vec![0; layout.nvars];
        e[i] = k;
        let mut p = IntPoly::zero(layout);
        if !c.is_zero() {
            p.terms.insert(layout.pack(&e), c);
        }
        p
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_coef_bits(&self) -> u64 {
        self.terms.values().map(|c| c.bits()).max().unwrap_or(0)
    }

    pub fn add_assign_scaled(&mut self, other: &IntPoly, s: &BigInt) {
        for (k, c) in &other.terms {
            let v = self.terms.entry(*k).or_default();
            *v += c * s;
            if v.is_zero() {
                self.terms.remove(k);
            }
        }
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let mut r = self.clone();
        r.add_assign_scaled(other, &BigInt::one());
        r
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let mut r = self.clone();
        r.add_assign_scaled(other, &-BigInt::one());
        r
    }

    pub fn scale(&self, s: &BigInt) -> IntPoly {
        if s.is_zero() {
            return IntPoly::zero(self.layout);
        }
        IntPoly {
            layout: self.layout,
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
        }
    }

    pub fn neg(&self) -> IntPoly {
        self.scale(&-BigInt::one())
    }

    /// Product, failing once the result would exceed `budget` terms.
    pub fn mul(&self, other: &IntPoly, budget: usize) -> Result<IntPoly> {
        let mut acc: HashMap<u128, BigInt> = HashMap::new();
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (ka, ca) in &small.terms {
            for (kb, cb) in &large.terms {
                let v = acc.entry(ka + kb).or_default();
                *v += ca * cb;
            }
            if acc.len() > budget {
                return Err(Error::TermBudgetExceeded {
                    terms: acc.len() as u128,
                    budget,
                });
            }
        }
        Ok(IntPoly {
            layout: self.layout,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn pow(&self, mut n: u64, budget: usize) -> Result<IntPoly> {
        let mut acc = IntPoly::constant(self.layout, BigInt::one());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, budget)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base, budget)?;
            }
        }
        Ok(acc)
    }

    /// Exact division by an integer; `None` if some coefficient is not divisible.
    pub fn div_exact(&self, d: &BigInt) -> Option<IntPoly> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            terms.insert(*k, q);
        }
        Some(IntPoly {
            layout: self.layout,
            terms,
        })
    }

    /// Coefficients reduced to `[0, m)`, zero terms dropped, descending key order.
    pub fn reduce_mod(&self, m: u64) -> Vec<(u128, u64)> {
        let mb = BigInt::from(m);
        self.terms
            .iter()
            .rev()
            .filter_map(|(k, c)| {
                let r = c.mod_floor(&mb);
                (!r.is_zero()).then(|| (*k, u64::try_from(r).unwrap()))
            })
            .collect()
    }

    /// Evaluates at an integer point.
    pub fn eval(&self, point: &[BigInt]) -> BigInt {
        let maxdeg: Vec<u64> = (0..self.layout.nvars)
            .map(|i| self.terms.keys().map(|&k| self.layout.exp(k, i)).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<BigInt>> = (0..self.layout.nvars)
            .map(|i| {
                let mut v = vec![BigInt::one()];
                for _ in 0..maxdeg[i] {
                    let next = v.last().unwrap() * &point[i];
                    v.push(next);
                }
                v
            })
            .collect();
        let mut total = BigInt::zero();
        for (k, c) in &self.terms {
            let mut t = c.clone();
            for (i, pw) in powers.iter().enumerate() {
                let e = self.layout.exp(*k, i);
                if e > 0 {
                    t *= &pw[e as usize];
                }
            }
            total += t;
        }
        total
    }

    /// Text in descending monomial order: `-X_0*Y_0 + X_1 + 3*Y_1^2`.
    pub fn format(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (k, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = (0..self.layout.nvars)
                .filter_map(|i| match self.layout.exp(*k, i) {
                    0 => None,
                    1 => Some(names[i].clone()),
                    e => Some(format!("{}^{}", names[i], e)),
                })
                .collect();
            let mag = c.abs();
            let body = match (mono.is_empty(), mag.is_one()) {
                (true, _) => mag.to_string(),
                (false, true) => mono.join("*"),
                (false, false) => format!("{}*{}", mag, mono.join("*")),
            };
            let neg = c.is_negative();
            match (idx, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        out
    }

    /// Parses the output of [`IntPoly::format`].
    pub fn parse(layout: Layout, names: &[String], src: &str) -> Result<IntPoly> {
        let src = src.trim();
        let mut poly = IntPoly::zero(layout);
        if src == "0" {
            return Ok(poly);
        }
        let mut rest = src;
        let mut sign = 1;
        if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r;
        }
        loop {
            let (term, next) = match (rest.find(" + "), rest.find(" - ")) {
                (None, None) => (rest, None),
                (a, b) => {
                    let i = a.unwrap_or(usize::MAX).min(b.unwrap_or(usize::MAX));
                    let s = if rest[i..].starts_with(" - ") { -1 } else { 1 };
                    (&rest[..i], Some((s, &rest[i + 3..])))
                }
            };
            let mut coef = BigInt::from(sign);
            let mut exps = vec![0u64; layout.nvars];
            for factor in term.split('*') {
                let factor = factor.trim();
                if factor.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                    let n: BigInt = factor
                        .parse()
                        .map_err(|_| Error::parse(factor, "bad coefficient"))?;
                    coef *= n;
                    continue;
                }
                let (name, e) = match factor.split_once('^') {
                    Some((n, e)) => (
                        n,
                        e.parse::<u64>().map_err(|_| Error::parse(factor, "bad exponent"))?,
                    ),
                    None => (factor, 1),
                };
                let i = names
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
                exps[i] += e;
                if exps[i] >> layout.bits != 0 {
                    return Err(Error::parse(factor, "exponent too large for table layout"));
                }
            }
            poly.add_assign_scaled(
                &IntPoly {
                    layout,
                    terms: BTreeMap::from([(layout.pack(&exps), BigInt::one())]),
                },
                &coef,
            );
            match next {
                None => break,
                Some((s, r)) => {
                    sign = s;
                    rest = r;
                }
            }
        }
        Ok(poly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        ["X_0", "Y_0"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn binomial_square() {
        let l = Layout::new(2, 8).unwrap();
        let s = IntPoly::var(l, 0).add(&IntPoly::var(l, 1));
        let sq = s.pow(2, 100).unwrap();
        assert_eq!(sq.format(&names()), "X_0^2 + 2*X_0*Y_0 + Y_0^2");
        let diff = sq.sub(&IntPoly::monomial(l, 0, 2, 1.into()));
        assert_eq!(diff.format(&names()), "2*X_0*Y_0 + Y_0^2");
        assert!(sq.div_exact(&BigInt::from(2)).is_none());
    }

    #[test]
    fn format_parse_round_trip() {
        let l = Layout::new(2, 30).unwrap();
        let x = IntPoly::var(l, 0);
        let y = IntPoly::var(l, 1);
        let p = x.sub(&y).pow(5, 100).unwrap().scale(&BigInt::from(-7));
        let text = p.format(&names());
        assert_eq!(IntPoly::parse(l, &names(), &text).unwrap(), p);
        assert_eq!(p.eval(&[BigInt::from(3), BigInt::from(1)]), BigInt::from(-7 * 32));
    }

    #[test]
    fn budget_is_enforced() {
        let l = Layout::new(2, 60).unwrap();
        let s = IntPoly::var(l, 0).add(&IntPoly::var(l, 1));
        assert!(matches!(s.pow(40, 10), Err(Error::TermBudgetExceeded { .. })));
    }
}
