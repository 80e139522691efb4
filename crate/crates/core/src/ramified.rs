//! Ramified Witt vectors `W_pi(A) = W(A) (x)_{W(F_q)} V` in the free-basis
//! model: an element is `r_0 + r_1 pi + ... + r_{f-1} pi^{f-1}` with
//! `r_i` in `W_n(A)`, and `pi^f = -(e_{f-1} pi^{f-1} + ... + e_0)` from the
//! Eisenstein polynomial.
//!
//! Each value carries a `pi`-adic precision `N` and is stored at Witt length
//! `n = ceil(N / f) + 1`; the extra coordinate absorbs the loss of one Witt
//! coordinate in [`RamifiedWitt::divide_by_pi`]. Inside one precision the
//! arithmetic is exact arithmetic of the ring `W_n(A)[pi]/(E)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{self, Expr, Parser, Token};
use crate::ring::{self, Elem, Ring, RingKind};
use crate::witt::WittVector;

/// Witt length used for `pi`-adic precision `prec` over a degree-`f` base.
pub fn witt_len(prec: usize, f: usize) -> usize {
    prec.div_ceil(f) + 1
}

#[derive(Debug, PartialEq, Eq)]
pub struct RamifiedBase {
    name: String,
    field: Arc<Ring>,
    coeffs: Vec<WittVector>,
    u_inv: WittVector,
    level: usize,
}

pub const DEFAULT_BASE_LEVEL: usize = 16;

impl RamifiedBase {
    /// A base from the Witt coefficients `e_0 .. e_{f-1}` over `F_q`.
    pub fn new(name: &str, field: Arc<Ring>, coeffs: Vec<WittVector>) -> Result<Arc<RamifiedBase>> {
        if !matches!(field.kind(), RingKind::Field) {
            return Err(Error::InvalidRing("ramified bases live over a finite field".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::NotEisenstein("degree must be at least 1".into()));
        }
        let level = coeffs.iter().map(WittVector::len).min().unwrap();
        if level < 2 {
            return Err(Error::NotEisenstein("coefficients need Witt length at least 2".into()));
        }
        let coeffs: Vec<WittVector> = coeffs
            .iter()
            .map(|c| c.truncate(level))
            .collect::<Result<_>>()?;
        for (i, c) in coeffs.iter().enumerate() {
            if c.ring() != &field {
                return Err(Error::Mismatch("coefficients must lie over the base field".into()));
            }
            if !c.coords()[0].is_zero() {
                return Err(Error::NotEisenstein(format!("e_{i} is not divisible by p")));
            }
        }
        if coeffs[0].coords()[1].is_zero() {
            return Err(Error::NotEisenstein("e_0 is divisible by p^2".into()));
        }
        let u = coeffs[0].divide_by_p()?;
        let u_inv = u.inverse()?;
        Ok(Arc::new(RamifiedBase {
            name: name.to_string(),
            field,
            coeffs,
            u_inv,
            level,
        }))
    }

    /// A base from integer coefficients `e_0 .. e_{f-1}` (monic, low first).
    pub fn from_integers(field: &Arc<Ring>, low: &[i64], level: usize) -> Result<Arc<RamifiedBase>> {
        let coeffs = low
            .iter()
            .map(|&c| WittVector::from_int(field, level, c))
            .collect();
        let mut all = low.to_vec();
        all.push(1);
        let name = format!("{} E={}", field.descriptor().replacen("ff", "rb", 1), int_poly_text(&all));
        let name = if level == DEFAULT_BASE_LEVEL {
            name
        } else {
            format!("{name} level={level}")
        };
        RamifiedBase::new(&name, field.clone(), coeffs)
    }

    /// The unramified base, `E = X - p`.
    pub fn unramified(field: &Arc<Ring>, level: usize) -> Result<Arc<RamifiedBase>> {
        Self::from_integers(field, &[-(field.p() as i64)], level)
    }

    /// `rb p=.. e=.. [modulus=..] E=<monic integer polynomial in X> [level=..]`.
    pub fn parse(src: &str) -> Result<Arc<RamifiedBase>> {
        let mut toks = expr::tokenize(src)?;
        match toks.first() {
            Some(Token::Ident(s)) if s == "rb" => toks[0] = Token::Ident("ff".into()),
            _ => return Err(Error::parse(src, "expected rb")),
        }
        let (field, used) = ring::parse_descriptor_prefix(&toks)?;
        let field = Arc::new(field);
        let prime = field.p();
        let mut p = Parser::new(&toks[used..]);
        p.expect_key("E")?;
        let poly = expr::eval_dense_int(&p.expr()?, "X")?;
        let level = if p.is_key("level") {
            p.expect_key("level")?;
            p.expect_int()? as usize
        } else {
            DEFAULT_BASE_LEVEL
        };
        p.expect_end()?;
        if poly.len() < 2 || *poly.last().unwrap() != 1 {
            return Err(Error::NotEisenstein("E must be monic of degree at least 1".into()));
        }
        let pp = prime as i64;
        if poly[..poly.len() - 1].iter().any(|c| c % pp != 0) {
            return Err(Error::NotEisenstein("non-leading coefficients must be divisible by p".into()));
        }
        if poly[0] % (pp * pp) == 0 {
            return Err(Error::NotEisenstein("constant term must not be divisible by p^2".into()));
        }
        Self::from_integers(&field, &poly[..poly.len() - 1], level)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn field(&self) -> &Arc<Ring> {
        &self.field
    }
    pub fn f(&self) -> usize {
        self.coeffs.len()
    }
    pub fn p(&self) -> u64 {
        self.field.p()
    }
    pub fn e(&self) -> usize {
        self.field.e()
    }
    pub fn q(&self) -> u64 {
        self.field.q()
    }
    pub fn level(&self) -> usize {
        self.level
    }
    pub fn coeffs(&self) -> &[WittVector] {
        &self.coeffs
    }

    /// Largest supported `pi`-adic precision.
    pub fn max_prec(&self) -> usize {
        (self.level - 1) * self.f()
    }

    fn embed(&self, w: &WittVector, ring: &Arc<Ring>, n: usize) -> WittVector {
        let coords = w.coords()[..n]
            .iter()
            .map(|c| ring.from_coef(self.field.constant_coef(c)))
            .collect();
        WittVector::new(ring.clone(), coords).expect("n >= 1")
    }

    fn coeff_in(&self, i: usize, ring: &Arc<Ring>, n: usize) -> WittVector {
        self.embed(&self.coeffs[i], ring, n)
    }

    fn u_inv_in(&self, ring: &Arc<Ring>, n: usize) -> WittVector {
        self.embed(&self.u_inv, ring, n)
    }
}

impl fmt::Display for RamifiedBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `X^2 - 3` style text, highest degree first, for integer coefficient lists.
fn int_poly_text(low: &[i64]) -> String {
    let mut out = String::new();
    for (d, &c) in low.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match d {
            0 => String::new(),
            1 => "X".to_string(),
            _ => format!("X^{d}"),
        };
        let mag = c.unsigned_abs();
        let body = match (mono.is_empty(), mag) {
            (true, _) => mag.to_string(),
            (false, 1) => mono,
            (false, _) => format!("{mag}*{mono}"),
        };
        if out.is_empty() {
            if c < 0 {
                out.push('-');
            }
        } else {
            out.push(if c < 0 { '-' } else { '+' });
        }
        out.push_str(&body);
    }
    out
}

/// An element of `W_pi(A)` with its `pi`-adic precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamifiedWitt {
    base: Arc<RamifiedBase>,
    ring: Arc<Ring>,
    coords: Vec<WittVector>,
    prec: usize,
}

impl RamifiedWitt {
    pub fn new(
        base: &Arc<RamifiedBase>,
        ring: &Arc<Ring>,
        coords: Vec<WittVector>,
        prec: usize,
    ) -> Result<Self> {
        Self::check_prec(base, prec)?;
        if ring.coeffs() != base.field.coeffs() || ring.is_lift() {
            return Err(Error::Mismatch("coefficient ring must be an algebra over the base field".into()));
        }
        if coords.len() != base.f() {
            return Err(Error::Mismatch(format!("expected {} components", base.f())));
        }
        let n = witt_len(prec, base.f());
        for c in &coords {
            if c.len() != n || c.ring() != ring {
                return Err(Error::Mismatch(format!(
                    "components must be Witt vectors of length {n} over the coefficient ring"
                )));
            }
        }
        Ok(RamifiedWitt {
            base: base.clone(),
            ring: ring.clone(),
            coords,
            prec,
        })
    }

    fn check_prec(base: &RamifiedBase, prec: usize) -> Result<()> {
        if prec == 0 {
            return Err(Error::Mismatch("precision must be at least 1".into()));
        }
        if prec > base.max_prec() {
            return Err(Error::BudgetExceeded(format!(
                "precision {prec} exceeds the base maximum {}",
                base.max_prec()
            )));
        }
        Ok(())
    }

    fn from_r0(base: &Arc<RamifiedBase>, ring: &Arc<Ring>, r0: WittVector, prec: usize) -> Self {
        let n = r0.len();
        let mut coords = vec![r0];
        coords.extend((1..base.f()).map(|_| WittVector::zero(ring, n)));
        RamifiedWitt {
            base: base.clone(),
            ring: ring.clone(),
            coords,
            prec,
        }
    }

    pub fn zero(base: &Arc<RamifiedBase>, ring: &Arc<Ring>, prec: usize) -> Result<Self> {
        Self::check_prec(base, prec)?;
        let n = witt_len(prec, base.f());
        Ok(Self::from_r0(base, ring, WittVector::zero(ring, n), prec))
    }

    pub fn from_int(base: &Arc<RamifiedBase>, ring: &Arc<Ring>, prec: usize, m: i64) -> Result<Self> {
        Self::check_prec(base, prec)?;
        let n = witt_len(prec, base.f());
        Ok(Self::from_r0(base, ring, WittVector::from_int(ring, n, m), prec))
    }

    pub fn one(base: &Arc<RamifiedBase>, ring: &Arc<Ring>, prec: usize) -> Result<Self> {
        Self::from_int(base, ring, prec, 1)
    }

    /// The Teichmüller representative `[a]`.
    pub fn teichmuller(base: &Arc<RamifiedBase>, ring: &Arc<Ring>, prec: usize, a: Elem) -> Result<Self> {
        Self::check_prec(base, prec)?;
        let n = witt_len(prec, base.f());
        Ok(Self::from_r0(base, ring, WittVector::teichmuller(ring, a, n), prec))
    }

    /// The uniformizer.
    pub fn pi(base: &Arc<RamifiedBase>, ring: &Arc<Ring>, prec: usize) -> Result<Self> {
        let mut z = Self::zero(base, ring, prec)?;
        let n = z.witt_len();
        if base.f() == 1 {
            z.coords[0] = base.coeff_in(0, ring, n).neg()?;
        } else {
            z.coords[1] = WittVector::one(ring, n);
        }
        Ok(z)
    }

    /// The `W(A)`-multiple `w * 1`.
    pub fn from_witt(base: &Arc<RamifiedBase>, w: WittVector, prec: usize) -> Result<Self> {
        Self::check_prec(base, prec)?;
        let n = witt_len(prec, base.f());
        let ring = w.ring().clone();
        let w = if w.len() >= n { w.truncate(n)? } else { w.extend(n) };
        Ok(Self::from_r0(base, &ring, w, prec))
    }

    pub fn base(&self) -> &Arc<RamifiedBase> {
        &self.base
    }
    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }
    pub fn coords(&self) -> &[WittVector] {
        &self.coords
    }
    pub fn prec(&self) -> usize {
        self.prec
    }
    pub fn witt_len(&self) -> usize {
        self.coords[0].len()
    }
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(WittVector::is_zero)
    }

    /// Changes the precision: truncation when lowering, zero padding of the
    /// Witt coordinates when raising (the caller vouches for exactness).
    pub fn with_prec(&self, prec: usize) -> Result<Self> {
        Self::check_prec(&self.base, prec)?;
        let n = witt_len(prec, self.base.f());
        let coords = self
            .coords
            .iter()
            .map(|c| if n <= c.len() { c.truncate(n) } else { Ok(c.extend(n)) })
            .collect::<Result<Vec<_>>>()?;
        Ok(RamifiedWitt {
            base: self.base.clone(),
            ring: self.ring.clone(),
            coords,
            prec,
        })
    }

    fn align(&self, other: &RamifiedWitt) -> Result<(RamifiedWitt, RamifiedWitt)> {
        if self.base != other.base {
            return Err(Error::Mismatch("different ramified bases".into()));
        }
        if self.ring != other.ring {
            return Err(Error::Mismatch("different coefficient rings".into()));
        }
        let prec = self.prec.min(other.prec);
        Ok((self.with_prec(prec)?, other.with_prec(prec)?))
    }

    fn same_shape(&self, coords: Vec<WittVector>) -> RamifiedWitt {
        RamifiedWitt {
            base: self.base.clone(),
            ring: self.ring.clone(),
            coords,
            prec: self.prec,
        }
    }

    pub fn add(&self, other: &RamifiedWitt) -> Result<RamifiedWitt> {
        let (a, b) = self.align(other)?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| add_w(x, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(a.same_shape(coords))
    }

    pub fn neg(&self) -> Result<RamifiedWitt> {
        let coords = self
            .coords
            .iter()
            .map(|x| if x.is_zero() { Ok(x.clone()) } else { x.neg() })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.same_shape(coords))
    }

    pub fn sub(&self, other: &RamifiedWitt) -> Result<RamifiedWitt> {
        self.add(&other.neg()?)
    }

    pub fn mul(&self, other: &RamifiedWitt) -> Result<RamifiedWitt> {
        let (a, b) = self.align(other)?;
        let f = self.base.f();
        let n = a.witt_len();
        let zero = WittVector::zero(&self.ring, n);
        let mut c = vec![zero; 2 * f - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                c[i + j] = add_w(&c[i + j], &x.mul(y)?)?;
            }
        }
        for k in (f..2 * f - 1).rev() {
            if c[k].is_zero() {
                continue;
            }
            let t = c[k].clone();
            for i in 0..f {
                let e = self.base.coeff_in(i, &self.ring, n);
                if e.is_zero() {
                    continue;
                }
                c[k - f + i] = sub_w(&c[k - f + i], &e.mul(&t)?)?;
            }
        }
        c.truncate(f);
        Ok(a.same_shape(c))
    }

    /// Multiplication by `pi`, by the companion matrix of `E`.
    pub fn mul_by_pi(&self) -> Result<RamifiedWitt> {
        let f = self.base.f();
        let n = self.witt_len();
        let top = &self.coords[f - 1];
        let mut out = Vec::with_capacity(f);
        for i in 0..f {
            let e = self.base.coeff_in(i, &self.ring, n);
            let et = if top.is_zero() || e.is_zero() {
                WittVector::zero(&self.ring, n)
            } else {
                e.mul(top)?
            };
            let prev = if i == 0 {
                WittVector::zero(&self.ring, n)
            } else {
                self.coords[i - 1].clone()
            };
            out.push(sub_w(&prev, &et)?);
        }
        Ok(self.same_shape(out))
    }

    pub fn pow(&self, mut k: u64) -> Result<RamifiedWitt> {
        let mut acc = Self::one(&self.base, &self.ring, self.prec)?;
        let mut b = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b)?;
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(&b)?;
            }
        }
        Ok(acc)
    }

    /// The residue in `A = W_pi(A) / pi`.
    pub fn reduce_mod_pi(&self) -> Elem {
        self.coords[0].coords()[0].clone()
    }

    /// The `y` with `pi * y = x` mod `pi^N`, at precision `N - 1`.
    pub fn divide_by_pi(&self) -> Result<RamifiedWitt> {
        if !self.reduce_mod_pi().is_zero() {
            return Err(Error::NotDivisible(format!(
                "residue {} is nonzero",
                self.ring.format(&self.reduce_mod_pi())
            )));
        }
        if self.prec < 2 {
            return Err(Error::DepthExhausted("pi-adic precision exhausted".into()));
        }
        let f = self.base.f();
        let n = self.witt_len();
        let d = self.coords[0].divide_by_p()?;
        let top = if d.is_zero() {
            WittVector::zero(&self.ring, n)
        } else {
            self.base.u_inv_in(&self.ring, n - 1).mul(&d)?.neg()?.extend(n)
        };
        let mut y = vec![WittVector::zero(&self.ring, n); f];
        for i in (1..f).rev() {
            let e = self.base.coeff_in(i, &self.ring, n);
            let et = if e.is_zero() || top.is_zero() {
                WittVector::zero(&self.ring, n)
            } else {
                e.mul(&top)?
            };
            y[i - 1] = add_w(&self.coords[i], &et)?;
        }
        y[f - 1] = top;
        self.same_shape(y).with_prec(self.prec - 1)
    }

    /// `pi`-adic order, capped at the precision.
    pub fn pi_order(&self) -> Result<usize> {
        let mut y = self.clone();
        for k in 0..self.prec {
            if y.is_zero() {
                return Ok(self.prec);
            }
            if !y.reduce_mod_pi().is_zero() {
                return Ok(k);
            }
            if k + 1 == self.prec {
                break;
            }
            y = y.divide_by_pi()?;
        }
        Ok(self.prec)
    }

    /// Equality modulo `pi^m` (`m` at most the common precision).
    pub fn eq_mod(&self, other: &RamifiedWitt, m: usize) -> Result<bool> {
        let (a, b) = self.align(other)?;
        if m <= a.prec && a.with_prec(m)? == b.with_prec(m)? {
            return Ok(true);
        }
        let d = self.sub(other)?;
        if m > d.prec {
            return Err(Error::Mismatch(format!("precision {} below {m}", d.prec)));
        }
        Ok(d.with_prec(m)?.pi_order()? >= m)
    }

    /// Multiplicative inverse by Newton iteration from the Teichmüller lift
    /// of the inverse residue. The error ideal is nilpotent in the
    /// truncated ring, so the iteration terminates with an exact inverse.
    pub fn inv(&self) -> Result<RamifiedWitt> {
        let a = self.ring.inverse(&self.reduce_mod_pi())?;
        let mut y = Self::teichmuller(&self.base, &self.ring, self.prec, a)?;
        let one = Self::one(&self.base, &self.ring, self.prec)?;
        let cap = usize::BITS - (self.base.f() * self.witt_len()).leading_zeros() + 3;
        for _ in 0..cap {
            let err = one.sub(&self.mul(&y)?)?;
            if err.is_zero() {
                return Ok(y);
            }
            y = y.add(&y.mul(&err)?)?;
        }
        Err(Error::NoConvergence("unit inversion did not terminate".into()))
    }

    /// `F_pi^k`: the `e k`-th power of the Witt Frobenius on each component.
    pub fn frobenius_pi(&self, k: i64) -> Result<RamifiedWitt> {
        let s = k * self.base.e() as i64;
        let coords = self
            .coords
            .iter()
            .map(|c| c.frobenius_pow(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.same_shape(coords))
    }

    /// The first `m` Teichmüller digits: `x = sum [a_i] pi^i` mod `pi^m`.
    pub fn digit_expand(&self, m: usize) -> Result<DigitExpansion> {
        if m > self.prec {
            return Err(Error::Mismatch(format!("precision {} below {m}", self.prec)));
        }
        let mut digits = Vec::with_capacity(m);
        let mut x = self.with_prec(m)?;
        for i in 0..m {
            if x.is_zero() {
                digits.resize(m, self.ring.zero());
                break;
            }
            let a = x.reduce_mod_pi();
            digits.push(a.clone());
            if i + 1 < m {
                let t = Self::teichmuller(&self.base, &self.ring, x.prec, a)?;
                x = x.sub(&t)?.divide_by_pi()?;
            }
        }
        Ok(DigitExpansion {
            ring: self.ring.clone(),
            digits,
        })
    }

    /// `sum [a_i] pi^i` at precision equal to the number of digits.
    pub fn assemble(base: &Arc<RamifiedBase>, d: &DigitExpansion) -> Result<RamifiedWitt> {
        let m = d.digits.len();
        let mut acc = Self::zero(base, &d.ring, m)?;
        for a in d.digits.iter().rev() {
            acc = acc.mul_by_pi()?;
            if !a.is_zero() {
                acc = acc.add(&Self::teichmuller(base, &d.ring, m, a.clone())?)?;
            }
        }
        Ok(acc)
    }
}

fn add_w(x: &WittVector, y: &WittVector) -> Result<WittVector> {
    if x.is_zero() {
        Ok(y.clone())
    } else if y.is_zero() {
        Ok(x.clone())
    } else {
        x.add(y)
    }
}

fn sub_w(x: &WittVector, y: &WittVector) -> Result<WittVector> {
    if y.is_zero() {
        Ok(x.clone())
    } else {
        add_w(x, &y.neg()?)
    }
}

/// Teichmüller digits `a_0 .. a_{N-1}` of an element of `W_pi(A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitExpansion {
    pub ring: Arc<Ring>,
    pub digits: Vec<Elem>,
}

/// Evaluation of expressions in `W_pi(A)`: integers map to integers, `p`
/// and `pi` to themselves, ring variables and `[a]` to Teichmüller
/// representatives, and `X` (when allowed) to a polynomial variable.
/// The result is a polynomial in `X`, low degree first.
pub struct RwEval<'a> {
    pub base: &'a Arc<RamifiedBase>,
    pub ring: &'a Arc<Ring>,
    pub prec: usize,
    pub allow_x: bool,
}

type VPoly = Vec<RamifiedWitt>;

impl RwEval<'_> {
    fn constant(&self, x: RamifiedWitt) -> VPoly {
        vec![x]
    }

    fn teich(&self, e: &Expr) -> Result<VPoly> {
        let a = self.ring.eval(e)?;
        Ok(self.constant(RamifiedWitt::teichmuller(self.base, self.ring, self.prec, a)?))
    }

    fn add(&self, a: &VPoly, b: &VPoly) -> Result<VPoly> {
        let n = a.len().max(b.len());
        let zero = RamifiedWitt::zero(self.base, self.ring, self.prec)?;
        (0..n)
            .map(|i| a.get(i).unwrap_or(&zero).add(b.get(i).unwrap_or(&zero)))
            .collect()
    }

    fn neg(&self, a: &VPoly) -> Result<VPoly> {
        a.iter().map(RamifiedWitt::neg).collect()
    }

    fn mul(&self, a: &VPoly, b: &VPoly) -> Result<VPoly> {
        let mut out = vec![RamifiedWitt::zero(self.base, self.ring, self.prec)?; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&x.mul(y)?)?;
            }
        }
        Ok(out)
    }

    pub fn eval(&self, e: &Expr) -> Result<VPoly> {
        match e {
            Expr::Int(n) => {
                let m = i64::try_from(*n).map_err(|_| Error::parse(n.to_string(), "integer too large"))?;
                Ok(self.constant(RamifiedWitt::from_int(self.base, self.ring, self.prec, m)?))
            }
            Expr::Var(s) if s == "p" => Ok(self.constant(RamifiedWitt::from_int(
                self.base,
                self.ring,
                self.prec,
                self.base.p() as i64,
            )?)),
            Expr::Var(s) if s == "pi" => Ok(self.constant(RamifiedWitt::pi(self.base, self.ring, self.prec)?)),
            Expr::Var(s) if s == "X" && self.allow_x => Ok(vec![
                RamifiedWitt::zero(self.base, self.ring, self.prec)?,
                RamifiedWitt::one(self.base, self.ring, self.prec)?,
            ]),
            Expr::Var(_) => self.teich(e),
            Expr::Teich(a) => self.teich(a),
            Expr::Add(a, b) => self.add(&self.eval(a)?, &self.eval(b)?),
            Expr::Sub(a, b) => self.add(&self.eval(a)?, &self.neg(&self.eval(b)?)?),
            Expr::Mul(a, b) => self.mul(&self.eval(a)?, &self.eval(b)?),
            Expr::Neg(a) => self.neg(&self.eval(a)?),
            Expr::Pow(a, r) => {
                if !r.is_integer() {
                    // Teichmüller representatives are multiplicative, so a
                    // rational power of a ring monomial is its representative
                    return match a.as_ref() {
                        Expr::Var(s) if s != "p" && s != "pi" && s != "X" => self.teich(e),
                        Expr::Teich(inner) => self.teich(&Expr::Pow(inner.clone(), *r)),
                        _ => Err(Error::LatticeViolation(format!(
                            "rational power ({}/{}) of a non-Teichmüller term",
                            r.num, r.den
                        ))),
                    };
                }
                let base = self.eval(a)?;
                if r.num < 0 {
                    if base.len() != 1 {
                        return Err(Error::NotAUnit("polynomial in X".into()));
                    }
                    let inv = base[0].inv()?;
                    return Ok(self.constant(inv.pow(r.num.unsigned_abs())?));
                }
                let mut acc = self.constant(RamifiedWitt::one(self.base, self.ring, self.prec)?);
                for _ in 0..r.num {
                    acc = self.mul(&acc, &base)?;
                }
                Ok(acc)
            }
        }
    }

    /// Evaluates an expression that must not involve `X`.
    pub fn eval_constant(&self, e: &Expr) -> Result<RamifiedWitt> {
        let mut v = self.eval(e)?;
        while v.len() > 1 && v.last().unwrap().is_zero() {
            v.pop();
        }
        if v.len() != 1 {
            return Err(Error::Mismatch("expected an element, found a polynomial in X".into()));
        }
        Ok(v.pop().unwrap())
    }
}

/// The image of a polynomial in the ring variables with `V`-coefficients
/// given by digit strings: `sum_t (sum_j [d_{t,j}] pi^j) [m_t]`.
pub fn embed_terms(
    base: &Arc<RamifiedBase>,
    ring: &Arc<Ring>,
    prec: usize,
    terms: &[(Vec<Elem>, Elem)],
) -> Result<RamifiedWitt> {
    let mut acc = RamifiedWitt::zero(base, ring, prec)?;
    for (digits, mono) in terms {
        if mono.as_monomial().is_none() {
            return Err(Error::Mismatch("embedded terms must be monomials".into()));
        }
        let d: Vec<Elem> = digits
            .iter()
            .map(|c| ring.from_coef(base.field.constant_coef(c)))
            .collect();
        let coef = if d.is_empty() {
            RamifiedWitt::zero(base, ring, prec)?
        } else {
            let mut d = d;
            d.resize(d.len().max(prec), ring.zero());
            d.truncate(prec);
            RamifiedWitt::assemble(base, &DigitExpansion { ring: ring.clone(), digits: d })?
        };
        let m = RamifiedWitt::teichmuller(base, ring, prec, mono.clone())?;
        acc = acc.add(&coef.mul(&m)?)?;
    }
    Ok(acc)
}

/// `a_n = prod_{k=-n}^{n} F_pi^k(a)`.
pub fn twisted_product(a: &RamifiedWitt, n: usize) -> Result<RamifiedWitt> {
    let mut acc = a.clone();
    for k in 1..=n as i64 {
        acc = acc.mul(&a.frobenius_pi(k)?)?;
        acc = acc.mul(&a.frobenius_pi(-k)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Arc<Ring> {
        Ring::parse("ff p=3 e=1").unwrap()
    }

    #[test]
    fn base_examples() {
        let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
        assert_eq!(b.f(), 2);
        assert_eq!(b.name(), "rb p=3 e=1 E=X^2-3");
        assert_eq!(RamifiedBase::parse(b.name()).unwrap(), b);
        assert!(matches!(RamifiedBase::parse("rb p=3 e=1 E=X^2-X"), Err(Error::NotEisenstein(_))));
        assert!(matches!(RamifiedBase::parse("rb p=3 e=1 E=X^2-9"), Err(Error::NotEisenstein(_))));
        let u = RamifiedBase::parse("rb p=3 e=1 E=X-3").unwrap();
        assert_eq!(u.f(), 1);
    }

    #[test]
    fn pi_squared_is_p() {
        let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
        let r = f3();
        let pi = RamifiedWitt::pi(&b, &r, 6).unwrap();
        let three = RamifiedWitt::from_int(&b, &r, 6, 3).unwrap();
        assert_eq!(pi.mul(&pi).unwrap(), three);
        assert_eq!(three.digit_expand(6).unwrap().digits, [0, 0, 1, 0, 0, 0].map(|d| r.from_int(d)));
        let back = three.divide_by_pi().unwrap().divide_by_pi().unwrap();
        assert!(back.eq_mod(&RamifiedWitt::one(&b, &r, 4).unwrap(), 4).unwrap());
        assert!(three.reduce_mod_pi().is_zero());
        let t = RamifiedWitt::teichmuller(&b, &r, 6, r.from_int(2)).unwrap();
        assert!(matches!(t.divide_by_pi(), Err(Error::NotDivisible(_))));
    }

    #[test]
    fn one_plus_pi_digits_and_inverse() {
        let b = RamifiedBase::parse("rb p=2 e=1 E=X^3-2").unwrap();
        let r = Ring::parse("ff p=2 e=1").unwrap();
        let x = RamifiedWitt::one(&b, &r, 9)
            .unwrap()
            .add(&RamifiedWitt::pi(&b, &r, 9).unwrap())
            .unwrap();
        let d = x.digit_expand(9).unwrap();
        assert_eq!(d.digits[..3], [r.one(), r.one(), r.zero()]);
        assert_eq!(RamifiedWitt::assemble(&b, &d).unwrap(), x);
        let y = x.inv().unwrap();
        assert_eq!(x.mul(&y).unwrap(), RamifiedWitt::one(&b, &r, 9).unwrap());
    }

    #[test]
    fn unramified_matches_witt_core() {
        let r = f3();
        let b = RamifiedBase::unramified(&r, 8).unwrap();
        let w = WittVector::from_int(&r, 4, 7);
        let v = WittVector::from_int(&r, 4, 5);
        let x = RamifiedWitt::from_witt(&b, w.clone(), 3).unwrap();
        let y = RamifiedWitt::from_witt(&b, v.clone(), 3).unwrap();
        assert_eq!(x.mul(&y).unwrap().coords()[0], w.mul(&v).unwrap());
        assert_eq!(x.add(&y).unwrap().coords()[0], w.add(&v).unwrap());
        assert_eq!(RamifiedWitt::pi(&b, &r, 3).unwrap(), RamifiedWitt::from_int(&b, &r, 3, 3).unwrap());
    }

    #[test]
    fn twisted_product_of_a_monomial() {
        let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
        let r = Ring::parse("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=true").unwrap();
        let x = RamifiedWitt::teichmuller(&b, &r, 4, r.var(0)).unwrap();
        let a1 = twisted_product(&x, 1).unwrap();
        let expected = r.parse_elem("x^(13/3)").unwrap();
        assert_eq!(a1, RamifiedWitt::teichmuller(&b, &r, 4, expected).unwrap());
        assert_eq!(twisted_product(&x, 0).unwrap(), x);
    }

    #[test]
    fn expressions() {
        let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
        let r = Ring::parse("frac base=(ff p=3 e=1) vars=x,y depth_p=0 depth_2=0 laurent=false").unwrap();
        let ev = RwEval { base: &b, ring: &r, prec: 6, allow_x: false };
        let lhs = ev.eval_constant(&expr::parse_expr("(x + y) * (x - y)").unwrap()).unwrap();
        let rhs = ev.eval_constant(&expr::parse_expr("x^2 - y^2").unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let pi = ev.eval_constant(&expr::parse_expr("pi").unwrap()).unwrap();
        assert_eq!(pi.frobenius_pi(1).unwrap(), pi);
        let ev = RwEval { allow_x: true, ..ev };
        let poly = ev.eval(&expr::parse_expr("X^2 - (p + x)").unwrap()).unwrap();
        assert_eq!(poly.len(), 3);
    }
}
