//! Presented characteristic-`p` coefficient rings with canonical forms.
//!
//! Three kinds are supported:
//!
//! * finite fields `F_q` (`ff p=.. e=.. [modulus=..]`),
//! * fractional-exponent (Laurent) polynomial rings over `F_q` whose exponents
//!   live in the lattice `(1/B)Z`, `B = 2^a p^m`, optionally modulo a monomial
//!   ideal (`frac base=(..) vars=.. depth_p=m depth_2=a laurent=.. [mod=..]`),
//! * univariate quotients `F_q[T]/(g)` with `g` monic (`uq base=(..) var=T modulus=..`).
//!
//! Elements are sparse maps from exponent vectors to coefficients and are
//! always stored fully reduced, so structural equality is ring equality.
//! Exponents of fractional rings are stored as numerators over `B`.
//!
//! Every ring can also be *lifted* to coefficients in `GR(p^k, e)`; the lift
//! is torsion-free mod `p^k` and is what the ghost-lift Witt engine computes in.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::expr::{self, Expr, Parser, Rational, Token};
use crate::gf::{self, Coef, GaloisRing};
use crate::linalg::Matrix;

pub type Exps = SmallVec<[i64; 4]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FracSpec {
    pub vars: Vec<String>,
    pub depth_p: u32,
    pub depth_2: u32,
    pub laurent: bool,
    /// Monomial ideal generators, as numerators over `denom`.
    pub quotient: Vec<Exps>,
    pub denom: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnivSpec {
    pub var: String,
    /// Monic modulus, low degree first.
    pub modulus: Vec<Coef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Field,
    Frac(FracSpec),
    Univariate(UnivSpec),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    gr: GaloisRing,
    kind: RingKind,
}

/// A canonical ring element. Only meaningful together with its [`Ring`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    terms: BTreeMap<Exps, Coef>,
}

impl Elem {
    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Coef)> {
        self.terms.iter()
    }
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    /// The single term of a monomial.
    pub fn as_monomial(&self) -> Option<(&Exps, &Coef)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }
}

/// Depth reached by an iterated operation: finite, or unbounded as far as
/// the structure of the ring guarantees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    Finite(u32),
    Unbounded,
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(d) => write!(f, "{d}"),
            Depth::Unbounded => write!(f, "unbounded"),
        }
    }
}

impl Ring {
    // ------------------------------------------------------------------
    // construction

    pub fn finite_field(p: u64, e: usize, modulus: Option<Vec<u64>>, gen: &str) -> Result<Ring> {
        Ok(Ring {
            gr: GaloisRing::field(p, e, modulus, gen)?,
            kind: RingKind::Field,
        })
    }

    pub fn frac(
        base: &Ring,
        vars: &[&str],
        depth_p: u32,
        depth_2: u32,
        laurent: bool,
    ) -> Result<Ring> {
        let RingKind::Field = base.kind else {
            return Err(Error::InvalidRing("base of a frac ring must be a finite field".into()));
        };
        if vars.is_empty() {
            return Err(Error::InvalidRing("at least one variable required".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) || (base.gr.e() > 1 && *v == base.gr.gen_name()) {
                return Err(Error::InvalidRing(format!("duplicate variable `{v}`")));
            }
        }
        let denom = 2i64
            .checked_pow(depth_2)
            .and_then(|a| (base.p() as i64).checked_pow(depth_p).and_then(|b| a.checked_mul(b)))
            .filter(|&d| d < 1 << 40)
            .ok_or_else(|| Error::InvalidRing("exponent denominator bound too large".into()))?;
        Ok(Ring {
            gr: base.gr.clone(),
            kind: RingKind::Frac(FracSpec {
                vars: vars.iter().map(|s| s.to_string()).collect(),
                depth_p,
                depth_2,
                laurent,
                quotient: Vec::new(),
                denom,
            }),
        })
    }

    /// Validates a raw denominator bound `B` and splits it into `(a, m)`
    /// with `B = 2^a p^m`.
    pub fn split_denominator(p: u64, bound: u64) -> Result<(u32, u32)> {
        if bound == 0 {
            return Err(Error::InvalidRing("denominator bound must be positive".into()));
        }
        let mut b = bound;
        let mut m = 0;
        let mut a = 0;
        while b.is_multiple_of(p) {
            b /= p;
            m += 1;
        }
        while b.is_multiple_of(2) {
            b /= 2;
            a += 1;
        }
        if b != 1 {
            return Err(Error::InvalidRing(format!(
                "denominator bound {bound} is not of the form 2^a * {p}^m"
            )));
        }
        Ok((a, m))
    }

    /// Adds monomial ideal generators to a frac ring.
    pub fn with_monomial_quotient(mut self, gens: Vec<Exps>) -> Result<Ring> {
        let RingKind::Frac(spec) = &mut self.kind else {
            return Err(Error::InvalidRing("monomial quotients need a frac ring".into()));
        };
        if spec.laurent && !gens.is_empty() {
            return Err(Error::InvalidRing(
                "monomial quotients of Laurent rings are trivial".into(),
            ));
        }
        for g in &gens {
            if g.len() != spec.vars.len() || g.iter().any(|&x| x < 0) {
                return Err(Error::InvalidRing("bad monomial generator".into()));
            }
        }
        spec.quotient = gens;
        Ok(self)
    }

    pub fn univariate(base: &Ring, var: &str, modulus: Vec<Coef>) -> Result<Ring> {
        let RingKind::Field = base.kind else {
            return Err(Error::InvalidRing("base of a uq ring must be a finite field".into()));
        };
        let mut modulus = modulus;
        gf::poly_trim(&base.gr, &mut modulus);
        if modulus.len() < 2 {
            return Err(Error::InvalidRing("modulus must have degree at least 1".into()));
        }
        let modulus = gf::poly_monic(&base.gr, &modulus);
        if base.gr.e() > 1 && var == base.gr.gen_name() {
            return Err(Error::InvalidRing(format!("duplicate variable `{var}`")));
        }
        Ok(Ring {
            gr: base.gr.clone(),
            kind: RingKind::Univariate(UnivSpec {
                var: var.to_string(),
                modulus,
            }),
        })
    }

    /// The torsion-free lift with coefficients in `GR(p^k, e)`.
    pub fn lift(&self, k: u32) -> Ring {
        Ring {
            gr: self.gr.lift(k),
            kind: self.kind.clone(),
        }
    }

    /// The residue field `F_q` as a ring.
    pub fn base_field(&self) -> Ring {
        Ring {
            gr: self.gr.lift(1),
            kind: RingKind::Field,
        }
    }

    // ------------------------------------------------------------------
    // accessors

    pub fn p(&self) -> u64 {
        self.gr.p()
    }
    pub fn q(&self) -> u64 {
        self.gr.q()
    }
    pub fn e(&self) -> usize {
        self.gr.e()
    }
    pub fn coeffs(&self) -> &GaloisRing {
        &self.gr
    }
    pub fn kind(&self) -> &RingKind {
        &self.kind
    }
    pub fn is_lift(&self) -> bool {
        !self.gr.is_field()
    }

    fn nvars(&self) -> usize {
        match &self.kind {
            RingKind::Field => 0,
            RingKind::Frac(s) => s.vars.len(),
            RingKind::Univariate(_) => 1,
        }
    }

    /// Exponent denominator bound `B` (1 for rings with integer exponents).
    pub fn denom(&self) -> i64 {
        match &self.kind {
            RingKind::Frac(s) => s.denom,
            _ => 1,
        }
    }

    /// Names of the ring variables (not including the field generator).
    pub fn var_names(&self) -> Vec<String> {
        match &self.kind {
            RingKind::Field => Vec::new(),
            RingKind::Frac(s) => s.vars.clone(),
            RingKind::Univariate(u) => vec![u.var.clone()],
        }
    }

    /// True when the ring is known to be an integral domain.
    pub fn is_domain(&self) -> bool {
        match &self.kind {
            RingKind::Field => true,
            RingKind::Frac(s) => s.quotient.is_empty(),
            RingKind::Univariate(u) => {
                if self.e() == 1 {
                    let m: Vec<u64> = u.modulus.iter().map(|c| c[0]).collect();
                    gf::is_irreducible_fp(self.p(), &m)
                } else {
                    // no factor of degree <= deg/2 over F_q
                    univariate_irreducible(&self.gr, &u.modulus)
                }
            }
        }
    }

    /// Degree of the univariate modulus, if any.
    pub fn modulus_degree(&self) -> Option<usize> {
        match &self.kind {
            RingKind::Univariate(u) => Some(u.modulus.len() - 1),
            _ => None,
        }
    }

    // ------------------------------------------------------------------
    // elements

    pub fn zero(&self) -> Elem {
        Elem::default()
    }

    pub fn from_coef(&self, c: Coef) -> Elem {
        let mut terms = BTreeMap::new();
        if !self.gr.is_zero(&c) {
            terms.insert(SmallVec::from_elem(0, self.nvars()), c);
        }
        Elem { terms }
    }

    pub fn one(&self) -> Elem {
        self.normalize_univariate(self.from_coef(self.gr.one()))
    }

    pub fn from_int(&self, n: i64) -> Elem {
        self.normalize_univariate(self.from_coef(self.gr.from_int(n)))
    }

    /// Constant term of an element (zero if absent).
    pub fn constant_coef(&self, x: &Elem) -> Coef {
        let key: Exps = SmallVec::from_elem(0, self.nvars());
        x.terms.get(&key).cloned().unwrap_or_else(|| self.gr.zero())
    }

    /// The `i`-th ring variable.
    pub fn var(&self, i: usize) -> Elem {
        let mut exps: Exps = SmallVec::from_elem(0, self.nvars());
        exps[i] = self.denom();
        self.monomial(exps, self.gr.one())
            .expect("variables are always in the lattice")
    }

    /// The monomial `c * x^exps` (numerators over `B`), reduced.
    pub fn monomial(&self, exps: Exps, c: Coef) -> Result<Elem> {
        self.check_exps(&exps)?;
        let mut terms = BTreeMap::new();
        if !self.gr.is_zero(&c) {
            terms.insert(exps, c);
        }
        Ok(self.normalize(Elem { terms }))
    }

    fn check_exps(&self, exps: &Exps) -> Result<()> {
        if exps.len() != self.nvars() {
            return Err(Error::Mismatch("exponent vector length".into()));
        }
        match &self.kind {
            RingKind::Frac(s) => {
                if !s.laurent && exps.iter().any(|&x| x < 0) {
                    return Err(Error::NegativeExponent);
                }
            }
            RingKind::Univariate(_) => {
                if exps[0] < 0 {
                    return Err(Error::NegativeExponent);
                }
            }
            RingKind::Field => {}
        }
        Ok(())
    }

    fn in_quotient(spec: &FracSpec, exps: &Exps) -> bool {
        spec.quotient
            .iter()
            .any(|g| g.iter().zip(exps.iter()).all(|(a, b)| b >= a))
    }

    fn normalize_univariate(&self, x: Elem) -> Elem {
        self.normalize(x)
    }

    fn normalize(&self, mut x: Elem) -> Elem {
        match &self.kind {
            RingKind::Field => x,
            RingKind::Frac(spec) => {
                if !spec.quotient.is_empty() {
                    x.terms.retain(|k, _| !Self::in_quotient(spec, k));
                }
                x
            }
            RingKind::Univariate(u) => {
                let d = (u.modulus.len() - 1) as i64;
                if x.terms.keys().all(|k| k[0] < d) {
                    return x;
                }
                let dense = self.to_dense(&x);
                let r = gf::poly_rem_monic(&self.gr, &dense, &u.modulus);
                self.from_dense(&r)
            }
        }
    }

    /// Dense coefficient list of a univariate element.
    pub fn to_dense(&self, x: &Elem) -> Vec<Coef> {
        let top = x.terms.keys().map(|k| k[0]).max().unwrap_or(-1);
        let mut v = vec![self.gr.zero(); (top + 1) as usize];
        for (k, c) in &x.terms {
            v[k[0] as usize] = c.clone();
        }
        v
    }

    pub fn from_dense(&self, v: &[Coef]) -> Elem {
        let terms = v
            .iter()
            .enumerate()
            .filter(|(_, c)| !self.gr.is_zero(c))
            .map(|(i, c)| (smallvec![i as i64], c.clone()))
            .collect();
        Elem { terms }
    }

    // ------------------------------------------------------------------
    // arithmetic

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let mut terms = a.terms.clone();
        for (k, c) in &b.terms {
            match terms.get_mut(k) {
                Some(v) => {
                    *v = self.gr.add(v, c);
                    if self.gr.is_zero(v) {
                        terms.remove(k);
                    }
                }
                None => {
                    terms.insert(k.clone(), c.clone());
                }
            }
        }
        Elem { terms }
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        Elem {
            terms: a.terms.iter().map(|(k, c)| (k.clone(), self.gr.neg(c))).collect(),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &Elem, c: &Coef) -> Elem {
        let terms = a
            .terms
            .iter()
            .map(|(k, v)| (k.clone(), self.gr.mul(v, c)))
            .filter(|(_, v)| !self.gr.is_zero(v))
            .collect();
        Elem { terms }
    }

    pub fn scale_int(&self, a: &Elem, n: i64) -> Elem {
        self.scale(a, &self.gr.from_int(n))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        if let RingKind::Univariate(u) = &self.kind {
            let prod = gf::poly_mul(&self.gr, &self.to_dense(a), &self.to_dense(b));
            return self.from_dense(&gf::poly_rem_monic(&self.gr, &prod, &u.modulus));
        }
        let quotient = match &self.kind {
            RingKind::Frac(s) if !s.quotient.is_empty() => Some(s),
            _ => None,
        };
        let mut terms: BTreeMap<Exps, Coef> = BTreeMap::new();
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                let k: Exps = ka.iter().zip(kb.iter()).map(|(x, y)| x + y).collect();
                if let Some(spec) = quotient {
                    if Self::in_quotient(spec, &k) {
                        continue;
                    }
                }
                let c = self.gr.mul(ca, cb);
                match terms.get_mut(&k) {
                    Some(v) => *v = self.gr.add(v, &c),
                    None => {
                        terms.insert(k, c);
                    }
                }
            }
        }
        terms.retain(|_, v| !self.gr.is_zero(v));
        Elem { terms }
    }

    pub fn square(&self, a: &Elem) -> Elem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &Elem, mut n: u64) -> Elem {
        if let Some((k, c)) = a.as_monomial() {
            if !matches!(self.kind, RingKind::Univariate(_)) {
                // monomials power without expansion
                let exps: Exps = k.iter().map(|&x| x * n as i64).collect();
                let mut terms = BTreeMap::new();
                let c = self.gr.pow(c, n);
                if !self.gr.is_zero(&c) {
                    terms.insert(exps, c);
                }
                return self.normalize(Elem { terms });
            }
        }
        let p = self.p();
        if self.gr.is_field() && !matches!(self.kind, RingKind::Univariate(_)) && n >= p {
            // x^n = prod Frob^i(x)^(d_i) over the base-p digits d_i of n
            let mut acc = self.one();
            let mut frob = a.clone();
            while n > 0 {
                let d = n % p;
                if d > 0 {
                    acc = self.mul(&acc, &self.pow(&frob, d));
                }
                n /= p;
                if n > 0 {
                    frob = self.frob_once(&frob);
                }
            }
            return acc;
        }
        let mut base = a.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Signed power; negative exponents require a unit.
    pub fn pow_signed(&self, a: &Elem, n: i64) -> Result<Elem> {
        if n >= 0 {
            Ok(self.pow(a, n as u64))
        } else {
            Ok(self.pow(&self.inverse(a)?, n.unsigned_abs()))
        }
    }

    pub fn is_one(&self, a: &Elem) -> bool {
        *a == self.one()
    }

    /// Multiplicative inverse of a unit: nonzero field elements, Laurent
    /// monomials, and residues coprime to a univariate modulus.
    pub fn inverse(&self, a: &Elem) -> Result<Elem> {
        let fail = || Error::NotAUnit(self.format(a));
        match &self.kind {
            RingKind::Univariate(u) => {
                if !self.gr.is_field() {
                    return Err(Error::NotAUnit("inversion in a lifted quotient".into()));
                }
                if a.is_zero() {
                    return Err(fail());
                }
                let (g, s) = gf::poly_xgcd_inv(&self.gr, &self.to_dense(a), &u.modulus);
                if g.len() != 1 {
                    return Err(fail());
                }
                Ok(self.from_dense(&gf::poly_rem_monic(&self.gr, &s, &u.modulus)))
            }
            RingKind::Field | RingKind::Frac(_) => {
                let (k, c) = a.as_monomial().ok_or_else(fail)?;
                let laurent = matches!(&self.kind, RingKind::Frac(s) if s.laurent);
                if k.iter().any(|&x| x != 0) && !laurent {
                    return Err(fail());
                }
                let ci = self.gr.inv(c).ok_or_else(fail)?;
                let exps: Exps = k.iter().map(|&x| -x).collect();
                self.monomial(exps, ci)
            }
        }
    }

    // ------------------------------------------------------------------
    // Frobenius

    /// `Frob^k(x)`; negative `k` takes iterated `p`-th roots.
    pub fn frobenius(&self, x: &Elem, k: i64) -> Result<Elem> {
        let mut y = x.clone();
        if k >= 0 {
            for _ in 0..k {
                y = self.frob_once(&y);
            }
        } else {
            for _ in 0..k.unsigned_abs() {
                y = self.pth_root(&y)?;
            }
        }
        Ok(y)
    }

    fn frob_once(&self, x: &Elem) -> Elem {
        debug_assert!(self.gr.is_field());
        let p = self.p() as i64;
        match &self.kind {
            RingKind::Univariate(_) => self.pow(x, self.p()),
            _ => {
                let terms = x
                    .terms
                    .iter()
                    .map(|(k, c)| (k.iter().map(|&e| e * p).collect(), self.gr.frob(c)))
                    .collect();
                self.normalize(Elem { terms })
            }
        }
    }

    /// A `p`-th root of `x`.
    ///
    /// Fractional rings: exact within the lattice, `DepthExhausted` when an
    /// exponent numerator is not divisible by `p`. Univariate quotients:
    /// the canonical representative is tried first; if it is not a `p`-th
    /// power the `F_p`-linear Frobenius system is solved, `NoRoot` if the
    /// residue class has no root at all.
    pub fn pth_root(&self, x: &Elem) -> Result<Elem> {
        let p = self.p() as i64;
        match &self.kind {
            RingKind::Field => Ok(self.from_coef(self.gr.pth_root(&self.constant_coef(x)))),
            RingKind::Frac(_) => {
                let mut terms = BTreeMap::new();
                for (k, c) in &x.terms {
                    if k.iter().any(|&e| e % p != 0) {
                        return Err(Error::DepthExhausted(format!(
                            "{} has no p-th root inside the exponent lattice",
                            self.format(x)
                        )));
                    }
                    terms.insert(k.iter().map(|&e| e / p).collect(), self.gr.pth_root(c));
                }
                Ok(Elem { terms })
            }
            RingKind::Univariate(_) => {
                if x.terms.keys().all(|k| k[0] % p == 0) {
                    let terms = x
                        .terms
                        .iter()
                        .map(|(k, c)| (smallvec![k[0] / p], self.gr.pth_root(c)))
                        .collect();
                    return Ok(Elem { terms });
                }
                let m = self.frobenius_matrix();
                let sol = m
                    .solve(&self.to_fp_vector(x))
                    .ok_or_else(|| Error::NoRoot(self.format(x)))?;
                Ok(self.from_fp_vector(&sol))
            }
        }
    }

    /// Dimension over `F_p` of a univariate quotient.
    pub fn fp_dimension(&self) -> Option<usize> {
        self.modulus_degree().map(|d| d * self.e())
    }

    /// Coordinates over `F_p` in the basis `T^i u^j` (index `i*e + j`).
    pub fn to_fp_vector(&self, x: &Elem) -> Vec<u64> {
        let d = self.modulus_degree().expect("univariate ring");
        let e = self.e();
        let mut v = vec![0u64; d * e];
        for (k, c) in &x.terms {
            for j in 0..e {
                v[k[0] as usize * e + j] = c[j];
            }
        }
        v
    }

    pub fn from_fp_vector(&self, v: &[u64]) -> Elem {
        let e = self.e();
        let dense: Vec<Coef> = v.chunks(e).map(SmallVec::from_slice).collect();
        let mut dense = dense;
        gf::poly_trim(&self.gr, &mut dense);
        self.from_dense(&dense)
    }

    /// Matrix of the Frobenius of a univariate quotient as an `F_p`-linear map.
    pub fn frobenius_matrix(&self) -> Matrix {
        let n = self.fp_dimension().expect("univariate ring");
        let columns: Vec<Vec<u64>> = (0..n)
            .map(|idx| {
                let mut b = vec![0u64; n];
                b[idx] = 1;
                let img = self.frob_once(&self.from_fp_vector(&b));
                self.to_fp_vector(&img)
            })
            .collect();
        Matrix::from_columns(self.p(), n, &columns)
    }

    /// How many successive `p`-th roots the lattice admits for generic
    /// elements: `depth_p` for frac rings (plus `depth_2` when `p = 2`).
    pub fn perfection_depth(&self) -> Depth {
        match &self.kind {
            RingKind::Field => Depth::Unbounded,
            RingKind::Frac(s) => {
                if self.p() == 2 {
                    Depth::Finite(s.depth_p + s.depth_2)
                } else {
                    Depth::Finite(s.depth_p)
                }
            }
            RingKind::Univariate(_) => Depth::Finite(0),
        }
    }

    // ------------------------------------------------------------------
    // lifting between a ring and its Galois-ring lift

    /// Reduction mod `p` of an element of a lifted ring (`self` is the lift).
    pub fn reduce_mod_p(&self, x: &Elem) -> Elem {
        let terms = x
            .terms
            .iter()
            .map(|(k, c)| (k.clone(), self.gr.reduce_mod_p(c)))
            .filter(|(_, c)| c.iter().any(|&d| d != 0))
            .collect();
        Elem { terms }
    }

    /// Divides every coefficient of `x` (in a lift) by `p^j` and reduces
    /// mod `p`; `None` if the division is not exact mod `p^{j+1}`.
    pub fn div_pow_p_mod_p(&self, x: &Elem, j: u32) -> Option<Elem> {
        let mut terms = BTreeMap::new();
        for (k, c) in &x.terms {
            let d = self.gr.div_pow_p_mod_p(c, j)?;
            if d.iter().any(|&v| v != 0) {
                terms.insert(k.clone(), d);
            }
        }
        Some(Elem { terms })
    }

    /// Multiplies by the integer `p^j` (in a lift).
    pub fn mul_pow_p(&self, x: &Elem, j: u32) -> Elem {
        let s = self.p().pow(j);
        let terms = x
            .terms
            .iter()
            .map(|(k, c)| (k.clone(), self.gr.scale(c, s)))
            .filter(|(_, c)| c.iter().any(|&d| d != 0))
            .collect();
        Elem { terms }
    }

    /// Applies a coefficient map (for field automorphisms/embeddings) and a
    /// monomial substitution is not needed: elements of a ring and its lift
    /// share their term data.
    pub fn reinterpret(&self, x: &Elem) -> Elem {
        x.clone()
    }

    // ------------------------------------------------------------------
    // enumeration and sampling

    /// All elements of a finite ring (field or univariate quotient).
    pub fn elements(&self) -> Option<Vec<Elem>> {
        let n = match &self.kind {
            RingKind::Field => self.e(),
            RingKind::Univariate(_) => self.fp_dimension()?,
            RingKind::Frac(_) => return None,
        };
        let p = self.p();
        let total = p.checked_pow(n as u32)?;
        if total > 1 << 20 {
            return None;
        }
        Some(
            (0..total)
                .map(|mut idx| {
                    let v: Vec<u64> = (0..n)
                        .map(|_| {
                            let d = idx % p;
                            idx /= p;
                            d
                        })
                        .collect();
                    match &self.kind {
                        RingKind::Field => self.from_coef(SmallVec::from_vec(v)),
                        _ => self.from_fp_vector(&v),
                    }
                })
                .collect(),
        )
    }

    /// A random element with at most `max_terms` terms and exponents whose
    /// absolute value is at most `max_exp` (in units of the variable, i.e.
    /// numerators up to `max_exp * B`).
    pub fn random_elem<R: Rng>(&self, rng: &mut R, max_terms: usize, max_exp: i64) -> Elem {
        match &self.kind {
            RingKind::Field => self.from_coef(self.gr.random(rng)),
            RingKind::Univariate(u) => {
                let d = u.modulus.len() - 1;
                let dense: Vec<Coef> = (0..d).map(|_| self.gr.random(rng)).collect();
                let mut dense = dense;
                gf::poly_trim(&self.gr, &mut dense);
                self.from_dense(&dense)
            }
            RingKind::Frac(s) => {
                let nt = rng.gen_range(0..=max_terms);
                let lo = if s.laurent { -max_exp * s.denom } else { 0 };
                let hi = max_exp * s.denom;
                let mut acc = self.zero();
                for _ in 0..nt {
                    let exps: Exps = (0..s.vars.len()).map(|_| rng.gen_range(lo..=hi)).collect();
                    let c = self.gr.random(rng);
                    acc = self.add(&acc, &self.monomial(exps, c).unwrap());
                }
                acc
            }
        }
    }

    // ------------------------------------------------------------------
    // text

    /// Evaluates an element expression (the free expression algebra maps
    /// homomorphically into the ring).
    pub fn eval(&self, e: &Expr) -> Result<Elem> {
        match e {
            Expr::Int(n) => Ok(self.from_int((*n % self.gr.char_modulus()) as i64)),
            Expr::Var(s) => {
                if let Some(i) = self.var_names().iter().position(|v| v == s) {
                    Ok(self.var(i))
                } else if self.e() > 1 && s == self.gr.gen_name() {
                    Ok(self.normalize(self.from_coef(self.gr.generator())))
                } else {
                    Err(Error::UnknownVariable(s.clone()))
                }
            }
            Expr::Add(a, b) => Ok(self.add(&self.eval(a)?, &self.eval(b)?)),
            Expr::Sub(a, b) => Ok(self.sub(&self.eval(a)?, &self.eval(b)?)),
            Expr::Mul(a, b) => Ok(self.mul(&self.eval(a)?, &self.eval(b)?)),
            Expr::Neg(a) => Ok(self.neg(&self.eval(a)?)),
            Expr::Teich(a) => self.eval(a),
            Expr::Pow(a, r) => {
                let base = self.eval(a)?;
                if r.is_integer() {
                    return self.pow_signed(&base, r.num);
                }
                self.rational_power(&base, *r)
            }
        }
    }

    fn rational_power(&self, base: &Elem, r: Rational) -> Result<Elem> {
        let RingKind::Frac(_) = &self.kind else {
            return Err(Error::LatticeViolation(format!("^({}/{})", r.num, r.den)));
        };
        if base.is_zero() {
            return if r.num > 0 {
                Ok(self.zero())
            } else {
                Err(Error::NotAUnit("0".into()))
            };
        }
        let (k, c) = base
            .as_monomial()
            .filter(|(_, c)| self.gr.is_one(c))
            .ok_or_else(|| {
                Error::LatticeViolation(format!(
                    "rational power of the non-monomial {}",
                    self.format(base)
                ))
            })?;
        let _ = c;
        let mut exps = Exps::new();
        for &x in k.iter() {
            let n = x * r.num;
            if n % r.den != 0 {
                return Err(Error::LatticeViolation(format!(
                    "{}/{}",
                    n,
                    r.den * self.denom()
                )));
            }
            exps.push(n / r.den);
        }
        self.monomial(exps, self.gr.one())
    }

    pub fn parse_elem(&self, src: &str) -> Result<Elem> {
        self.eval(&expr::parse_expr(src)?)
    }

    fn format_exponent(&self, num: i64) -> String {
        let r = Rational::new(num, self.denom());
        if r.den == 1 {
            if r.num >= 0 {
                r.num.to_string()
            } else {
                format!("({})", r.num)
            }
        } else {
            format!("({}/{})", r.num, r.den)
        }
    }

    fn format_monomial(&self, k: &Exps) -> String {
        let names = self.var_names();
        let mut parts = Vec::new();
        for (i, &x) in k.iter().enumerate() {
            if x == 0 {
                continue;
            }
            if x == self.denom() {
                parts.push(names[i].clone());
            } else {
                parts.push(format!("{}^{}", names[i], self.format_exponent(x)));
            }
        }
        parts.join("*")
    }

    /// Canonical text: terms in the fixed monomial order, joined by ` + `.
    pub fn format(&self, x: &Elem) -> String {
        if x.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = x
            .terms
            .iter()
            .map(|(k, c)| {
                let mono = self.format_monomial(k);
                let cs = self.gr.format(c);
                if mono.is_empty() {
                    cs
                } else if self.gr.is_one(c) {
                    mono
                } else if cs.contains(' ') {
                    format!("({cs})*{mono}")
                } else {
                    format!("{cs}*{mono}")
                }
            })
            .collect();
        parts.join(" + ")
    }

    /// Parses a ring descriptor (see the module docs for the grammar).
    pub fn parse(src: &str) -> Result<Arc<Ring>> {
        let toks = expr::tokenize(src)?;
        let mut p = Parser::new(&toks);
        let r = Self::parse_from(&mut p)?;
        p.expect_end()?;
        Ok(Arc::new(r))
    }

    fn parse_from(p: &mut Parser<'_>) -> Result<Ring> {
        let head = p.expect_ident()?;
        match head.as_str() {
            "ff" => {
                p.expect_key("p")?;
                let prime = p.expect_int()?;
                p.expect_key("e")?;
                let e = p.expect_int()? as usize;
                if p.is_key("modulus") {
                    p.expect_key("modulus")?;
                    let ex = p.expr()?;
                    let gen = single_var(&ex).unwrap_or_else(|| "u".into());
                    let dense = expr::eval_dense_int(&ex, &gen)?;
                    let m: Vec<u64> = dense
                        .iter()
                        .map(|&c| c.rem_euclid(prime.max(1) as i64) as u64)
                        .collect();
                    Ring::finite_field(prime, e, Some(m), &gen)
                } else {
                    Ring::finite_field(prime, e, None, "u")
                }
            }
            "frac" => {
                let base = Self::parse_base(p)?;
                p.expect_key("vars")?;
                let mut vars = vec![p.expect_ident()?];
                while p.eat_sym(',') {
                    vars.push(p.expect_ident()?);
                }
                p.expect_key("depth_p")?;
                let dp = p.expect_int()? as u32;
                p.expect_key("depth_2")?;
                let d2 = p.expect_int()? as u32;
                p.expect_key("laurent")?;
                let laurent = match p.expect_ident()?.as_str() {
                    "true" => true,
                    "false" => false,
                    other => return Err(Error::parse(other, "expected true or false")),
                };
                let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
                let ring = Ring::frac(&base, &names, dp, d2, laurent)?;
                if p.is_key("mod") {
                    p.expect_key("mod")?;
                    let mut gens = Vec::new();
                    loop {
                        let ex = p.expr()?;
                        let m = ring.eval(&ex)?;
                        let (k, _) = m.as_monomial().ok_or_else(|| {
                            Error::InvalidRing("quotient generators must be monomials".into())
                        })?;
                        gens.push(k.clone());
                        if !p.eat_sym(',') {
                            break;
                        }
                    }
                    ring.with_monomial_quotient(gens)
                } else {
                    Ok(ring)
                }
            }
            "uq" => {
                let base = Self::parse_base(p)?;
                p.expect_key("var")?;
                let var = p.expect_ident()?;
                p.expect_key("modulus")?;
                let ex = p.expr()?;
                // evaluate in F_q[var]
                let tmp = Ring::frac(&base, &[var.as_str()], 0, 0, false)?;
                let g = tmp.eval(&ex)?;
                let mut dense = vec![base.gr.zero(); 1];
                for (k, c) in g.terms() {
                    let i = (k[0] / tmp.denom()) as usize;
                    if dense.len() <= i {
                        dense.resize(i + 1, base.gr.zero());
                    }
                    dense[i] = c.clone();
                }
                gf::poly_trim(&base.gr, &mut dense);
                if dense.last().map(|c| base.gr.is_one(c)) != Some(true) {
                    return Err(Error::InvalidRing("univariate modulus must be monic".into()));
                }
                Ring::univariate(&base, &var, dense)
            }
            other => Err(Error::parse(other, "expected ff, frac or uq")),
        }
    }

    fn parse_base(p: &mut Parser<'_>) -> Result<Ring> {
        p.expect_key("base")?;
        p.expect_sym('(')?;
        let base = Self::parse_from(p)?;
        p.expect_sym(')')?;
        Ok(base)
    }

    /// Canonical descriptor text.
    pub fn descriptor(&self) -> String {
        let ff = |gr: &GaloisRing| {
            if gr.e() == 1 {
                format!("ff p={} e=1", gr.p())
            } else {
                let m = gf::format_dense(gr.modulus(), gr.gen_name()).replace(' ', "");
                format!("ff p={} e={} modulus={}", gr.p(), gr.e(), m)
            }
        };
        match &self.kind {
            RingKind::Field => ff(&self.gr),
            RingKind::Frac(s) => {
                let mut out = format!(
                    "frac base=({}) vars={} depth_p={} depth_2={} laurent={}",
                    ff(&self.gr),
                    s.vars.join(","),
                    s.depth_p,
                    s.depth_2,
                    s.laurent
                );
                if !s.quotient.is_empty() {
                    let gens: Vec<String> = s
                        .quotient
                        .iter()
                        .map(|k| {
                            let m = self.format_monomial(k);
                            if m.is_empty() {
                                "1".into()
                            } else {
                                m
                            }
                        })
                        .collect();
                    out.push_str(&format!(" mod={}", gens.join(",")));
                }
                out
            }
            RingKind::Univariate(u) => {
                let g = self.from_dense(&u.modulus);
                // the modulus itself reduces to zero, so print it term by term
                let parts: Vec<String> = g
                    .terms()
                    .map(|(k, c)| {
                        let mono = match k[0] {
                            0 => String::new(),
                            1 => u.var.clone(),
                            n => format!("{}^{}", u.var, n),
                        };
                        let cs = self.gr.format(c);
                        match (mono.is_empty(), self.gr.is_one(c)) {
                            (true, _) => cs,
                            (false, true) => mono,
                            (false, false) if cs.contains(' ') => format!("({cs})*{mono}"),
                            (false, false) => format!("{cs}*{mono}"),
                        }
                    })
                    .collect();
                format!(
                    "uq base=({}) var={} modulus={}",
                    ff(&self.gr),
                    u.var,
                    parts.join("+").replace(' ', "")
                )
            }
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

fn single_var(e: &Expr) -> Option<String> {
    match e {
        Expr::Var(s) => Some(s.clone()),
        Expr::Int(_) => None,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => single_var(a).or_else(|| single_var(b)),
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Teich(a) => single_var(a),
    }
}

fn univariate_irreducible(gr: &GaloisRing, g: &[Coef]) -> bool {
    let deg = g.len() - 1;
    let q = gr.q();
    let elems = gr.elements();
    for d in 1..=deg / 2 {
        let count = q.pow(d as u32);
        for mut n in 0..count {
            let mut cand: Vec<Coef> = Vec::with_capacity(d + 1);
            for _ in 0..d {
                cand.push(elems[(n % q) as usize].clone());
                n /= q;
            }
            cand.push(gr.one());
            if gf::poly_rem_monic(gr, g, &cand).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Convenience: the token stream position after a descriptor, for callers
/// that embed descriptors in larger grammars.
pub fn parse_descriptor_prefix(toks: &[Token]) -> Result<(Ring, usize)> {
    let mut p = Parser::new(toks);
    let r = Ring::parse_from(&mut p)?;
    Ok((r, p.pos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(s: &str) -> Arc<Ring> {
        Ring::parse(s).unwrap()
    }

    #[test]
    fn make_ring_examples() {
        let f3 = ring("ff p=3 e=1");
        assert_eq!(f3.q(), 3);
        let f4 = ring("ff p=2 e=2 modulus=u^2+u+1");
        assert_eq!(f4.q(), 4);
        let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=1 laurent=true");
        assert_eq!(r.denom(), 18);
        assert!(matches!(Ring::parse("ff p=4 e=1"), Err(Error::NotPrime(4))));
        assert!(matches!(
            Ring::parse("ff p=2 e=2 modulus=u^2+1"),
            Err(Error::ReducibleModulus(_))
        ));
        assert!(matches!(Ring::parse("ff p=3"), Err(Error::Parse { .. })));
        assert_eq!(Ring::split_denominator(3, 18).unwrap(), (1, 2));
        assert!(Ring::split_denominator(3, 10).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        for s in [
            "ff p=3 e=1",
            "ff p=2 e=2 modulus=1+u+u^2",
            "frac base=(ff p=3 e=1) vars=x,y depth_p=2 depth_2=1 laurent=true",
            "frac base=(ff p=3 e=1) vars=x,t depth_p=0 depth_2=0 laurent=false mod=t^2",
            "uq base=(ff p=3 e=1) var=T modulus=T^9",
            "uq base=(ff p=2 e=1) var=T modulus=1+T^2",
        ] {
            let r = ring(s);
            assert_eq!(r.descriptor(), s);
            assert_eq!(*ring(&r.descriptor()), *r);
        }
    }

    #[test]
    fn eval_examples() {
        let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=0 depth_2=0 laurent=false");
        assert!(r.parse_elem("x + 2*x").unwrap().is_zero());
        let r = ring("uq base=(ff p=2 e=1) var=T modulus=T^4");
        assert_eq!(r.format(&r.parse_elem("(T+1)^2").unwrap()), "1 + T^2");
        let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=0 laurent=false");
        assert_eq!(r.format(&r.parse_elem("x^(1/3) * x^(1/9)").unwrap()), "x^(4/9)");
        assert!(matches!(r.parse_elem("x^(1/27)"), Err(Error::LatticeViolation(_))));
        assert!(matches!(r.parse_elem("x^(-1)"), Err(Error::NotAUnit(_))));
        assert!(matches!(r.parse_elem("y"), Err(Error::UnknownVariable(_))));
        assert!(matches!(r.parse_elem("x^(-1/3)"), Err(Error::NegativeExponent)));
    }

    #[test]
    fn frobenius_examples() {
        let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=false");
        let x = r.var(0);
        assert_eq!(r.format(&r.frobenius(&x, -1).unwrap()), "x^(1/3)");
        let f4 = ring("ff p=2 e=2 modulus=u^2+u+1");
        let u = f4.parse_elem("u").unwrap();
        assert_eq!(f4.frobenius(&u, 1).unwrap(), f4.mul(&u, &u));
        assert_eq!(f4.frobenius(&u, 2).unwrap(), u);
        let r0 = ring("frac base=(ff p=3 e=1) vars=x depth_p=0 depth_2=0 laurent=false");
        assert!(matches!(r0.frobenius(&r0.var(0), -1), Err(Error::DepthExhausted(_))));
    }

    #[test]
    fn univariate_roots_fall_back_to_linear_algebra() {
        // F_3[T]/(T^3 - T) is reduced, so Frobenius is bijective even though
        // the representative T is not a cube.
        let r = ring("uq base=(ff p=3 e=1) var=T modulus=T^3-T");
        let t = r.var(0);
        let root = r.pth_root(&t).unwrap();
        assert_eq!(r.frobenius(&root, 1).unwrap(), t);
        let r = ring("uq base=(ff p=3 e=1) var=T modulus=T^9");
        assert!(matches!(r.pth_root(&t), Err(Error::NoRoot(_))));
    }

    #[test]
    fn quotient_kills_ideal_monomials() {
        let r = ring("frac base=(ff p=3 e=1) vars=x,t depth_p=0 depth_2=0 laurent=false mod=t^2");
        let t = r.parse_elem("t").unwrap();
        assert!(r.mul(&t, &t).is_zero());
        assert!(r.parse_elem("x*t^2 + 1").map(|v| r.is_one(&v)).unwrap());
    }

    #[test]
    fn inverses() {
        let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=1 laurent=true");
        let a = r.parse_elem("2*x^(1/6)").unwrap();
        let ai = r.inverse(&a).unwrap();
        assert!(r.is_one(&r.mul(&a, &ai)));
        assert!(r.inverse(&r.parse_elem("1 + x").unwrap()).is_err());
        let u = ring("uq base=(ff p=3 e=1) var=T modulus=T^2+1");
        let a = u.parse_elem("T + 1").unwrap();
        assert!(u.is_one(&u.mul(&a, &u.inverse(&a).unwrap())));
    }

    #[test]
    fn char_p_binomial_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in [
            "frac base=(ff p=3 e=2) vars=x,y depth_p=1 depth_2=1 laurent=true",
            "uq base=(ff p=5 e=1) var=T modulus=T^4+T+2",
            "frac base=(ff p=2 e=1) vars=x,t depth_p=1 depth_2=0 laurent=false mod=t^2",
        ] {
            let r = ring(s);
            for _ in 0..50 {
                let x = r.random_elem(&mut rng, 4, 2);
                let y = r.random_elem(&mut rng, 4, 2);
                let lhs = r.frobenius(&r.add(&x, &y), 1).unwrap();
                let rhs = r.add(&r.frobenius(&x, 1).unwrap(), &r.frobenius(&y, 1).unwrap());
                assert_eq!(lhs, rhs);
                assert_eq!(r.frobenius(&x, 1).unwrap(), r.pow(&x, r.p()));
            }
        }
    }
}
