//! Truncated `p`-typical Witt vectors `W_n(A)` over a characteristic-`p`
//! ring `A`, stored as their `n` coordinates.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, ToPrimitive};

use crate::engine::{default_engine, WittEngine};
use crate::error::{Error, Result};
use crate::gf::Coef;
use crate::ring::{Elem, Ring, RingKind};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WittVector {
    ring: Arc<Ring>,
    coords: Vec<Elem>,
}

impl WittVector {
    pub fn new(ring: Arc<Ring>, coords: Vec<Elem>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Mismatch("Witt vectors have length at least 1".into()));
        }
        Ok(WittVector { ring, coords })
    }

    pub fn zero(ring: &Arc<Ring>, n: usize) -> Self {
        WittVector {
            ring: ring.clone(),
            coords: vec![ring.zero(); n],
        }
    }

    pub fn one(ring: &Arc<Ring>, n: usize) -> Self {
        Self::teichmuller(ring, ring.one(), n)
    }

    /// `(a, 0, ..., 0)`.
    pub fn teichmuller(ring: &Arc<Ring>, a: Elem, n: usize) -> Self {
        let mut coords = vec![ring.zero(); n];
        coords[0] = a;
        WittVector {
            ring: ring.clone(),
            coords,
        }
    }

    /// The image of the integer `m`. Over `F_p` the Witt coordinates of an
    /// integer are its Teichmüller digits, computed here mod `p^n`.
    pub fn from_int(ring: &Arc<Ring>, n: usize, m: i64) -> Self {
        let p = BigInt::from(ring.p());
        let modulus = Pow::pow(&p, n as u32);
        let mut rest = BigInt::from(m).mod_floor(&modulus);
        let mut coords = Vec::with_capacity(n);
        for _ in 0..n {
            let digit = rest.mod_floor(&p);
            coords.push(ring.from_int(digit.to_i64().unwrap()));
            // Teichmüller representative of the digit mod p^n
            let teich = digit.modpow(&Pow::pow(&p, (n - 1) as u32), &modulus);
            rest = ((rest - teich).mod_floor(&modulus)) / &p;
        }
        WittVector {
            ring: ring.clone(),
            coords,
        }
    }

    /// The residue mod `p^n` of the integer this vector is the image of,
    /// when every coordinate lies in the prime field. Over `F_p` the vector
    /// is `sum p^i [a_i]`, and `[a] = a^(p^(n-1)) mod p^n`.
    pub fn to_int(&self) -> Option<BigInt> {
        let p = self.ring.p();
        let digits: Vec<u64> = self
            .coords
            .iter()
            .map(|c| (0..p).find(|&k| self.ring.from_int(k as i64) == *c))
            .collect::<Option<_>>()?;
        let n = self.len() as u32;
        let pb = BigInt::from(p);
        let modulus = Pow::pow(&pb, n);
        let exp = Pow::pow(&pb, n - 1);
        let mut acc = BigInt::from(0);
        for (i, d) in digits.iter().enumerate() {
            let teich = BigInt::from(*d).modpow(&exp, &modulus);
            acc += Pow::pow(&pb, i as u32) * teich;
        }
        Some(acc.mod_floor(&modulus))
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }
    pub fn coords(&self) -> &[Elem] {
        &self.coords
    }
    pub fn len(&self) -> usize {
        self.coords.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Elem::is_zero)
    }

    fn check(&self, other: &WittVector) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Mismatch(format!(
                "lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        if self.ring != other.ring {
            return Err(Error::Mismatch("coefficient rings differ".into()));
        }
        Ok(())
    }

    pub fn add_with(&self, other: &WittVector, engine: &dyn WittEngine) -> Result<WittVector> {
        self.check(other)?;
        let coords = engine.add(&self.ring, &self.coords, &other.coords)?;
        WittVector::new(self.ring.clone(), coords)
    }

    pub fn mul_with(&self, other: &WittVector, engine: &dyn WittEngine) -> Result<WittVector> {
        self.check(other)?;
        let coords = engine.mul(&self.ring, &self.coords, &other.coords)?;
        WittVector::new(self.ring.clone(), coords)
    }

    pub fn neg_with(&self, engine: &dyn WittEngine) -> Result<WittVector> {
        let coords = engine.neg(&self.ring, &self.coords)?;
        WittVector::new(self.ring.clone(), coords)
    }

    pub fn add(&self, other: &WittVector) -> Result<WittVector> {
        self.check(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        self.add_with(other, default_engine().as_ref())
    }

    /// Product through the default engine, with exact shortcuts for
    /// Teichmüller and integer factors.
    pub fn mul(&self, other: &WittVector) -> Result<WittVector> {
        self.check(other)?;
        if let Some(c) = other.teichmuller_digit() {
            return Ok(self.scale_teichmuller(c));
        }
        if let Some(c) = self.teichmuller_digit() {
            return Ok(other.scale_teichmuller(c));
        }
        if let Some(w) = self.mul_integer(other)?.or(other.mul_integer(self)?) {
            return Ok(w);
        }
        self.mul_with(other, default_engine().as_ref())
    }

    /// `a` when this is `[a]`.
    fn teichmuller_digit(&self) -> Option<&Elem> {
        self.coords[1..].iter().all(Elem::is_zero).then_some(&self.coords[0])
    }

    /// `[c] x = (c x_0, c^p x_1, c^(p^2) x_2, ...)` over any ring.
    fn scale_teichmuller(&self, c: &Elem) -> WittVector {
        let mut cp = c.clone();
        let mut coords = Vec::with_capacity(self.len());
        for (i, x) in self.coords.iter().enumerate() {
            if i > 0 {
                cp = self.ring.pow(&cp, self.ring.p());
            }
            coords.push(self.ring.mul(&cp, x));
        }
        WittVector { ring: self.ring.clone(), coords }
    }

    /// `other * self` when `self` is the image of `p^k u` with
    /// `u = +-1 mod p^(n-k)`, using `p x = V F x` in characteristic `p`.
    fn mul_integer(&self, other: &WittVector) -> Result<Option<WittVector>> {
        if self.ring.is_lift() {
            return Ok(None);
        }
        let Some(m) = self.to_int() else {
            return Ok(None);
        };
        let n = self.len();
        if m == BigInt::from(0) {
            return Ok(Some(WittVector::zero(&self.ring, n)));
        }
        let p = BigInt::from(self.ring.p());
        let (mut u, mut k) = (m, 0usize);
        while (&u % &p) == BigInt::from(0) {
            u /= &p;
            k += 1;
        }
        let rest: BigInt = Pow::pow(&p, (n - k) as u32);
        let u = u.mod_floor(&rest);
        let mut x = if u == BigInt::from(1) % &rest {
            other.clone()
        } else if u == (&rest - 1u32) {
            other.neg()?
        } else {
            return Ok(None);
        };
        for _ in 0..k {
            x = x.frobenius_map().verschiebung();
        }
        Ok(Some(x))
    }

    pub fn neg(&self) -> Result<WittVector> {
        if self.ring.p() % 2 == 1 {
            // -1 = [-1] for odd p
            return Ok(self.scale_teichmuller(&self.ring.from_int(-1)));
        }
        self.neg_with(default_engine().as_ref())
    }

    pub fn sub(&self, other: &WittVector) -> Result<WittVector> {
        self.add(&other.neg()?)
    }

    /// `F^k`, coordinatewise `Frob^k`; negative `k` needs perfection depth.
    pub fn frobenius_pow(&self, k: i64) -> Result<WittVector> {
        let coords = self
            .coords
            .iter()
            .map(|c| self.ring.frobenius(c, k))
            .collect::<Result<Vec<_>>>()?;
        WittVector::new(self.ring.clone(), coords)
    }

    /// The Witt Frobenius `(a_0^p, a_1^p, ...)`.
    pub fn frobenius_map(&self) -> WittVector {
        self.frobenius_pow(1).expect("forward Frobenius always exists")
    }

    /// `(0, a_0, ..., a_{n-2})`.
    pub fn verschiebung(&self) -> WittVector {
        let mut coords = Vec::with_capacity(self.len());
        coords.push(self.ring.zero());
        coords.extend_from_slice(&self.coords[..self.len() - 1]);
        WittVector {
            ring: self.ring.clone(),
            coords,
        }
    }

    /// `p * x`, which over a ring of characteristic `p` is `V(F(x))`.
    pub fn mul_p(&self) -> WittVector {
        self.frobenius_map().verschiebung()
    }

    /// The projection to `A`: the zeroth coordinate.
    pub fn project(&self) -> Elem {
        self.coords[0].clone()
    }

    /// Multiplicative inverse, by Newton iteration from `[a_0^{-1}]`. The
    /// error lies in the nilpotent ideal `V W_n`, so the iteration ends with
    /// an exact inverse.
    pub fn inverse(&self) -> Result<WittVector> {
        let a = self.ring.inverse(&self.coords[0])?;
        let n = self.len();
        if let Some(m) = self.to_int() {
            let p = BigInt::from(self.ring.p());
            let modulus = Pow::pow(&p, n as u32);
            // a_0 is a unit, so m is prime to p
            let inv = m.modinv(&modulus).expect("unit mod p^n");
            if let Some(k) = inv.to_i64() {
                return Ok(WittVector::from_int(&self.ring, n, k));
            }
        }
        let one = WittVector::one(&self.ring, n);
        let mut y = WittVector::teichmuller(&self.ring, a, n);
        for _ in 0..=n {
            let err = one.sub(&self.mul(&y)?)?;
            if err.is_zero() {
                return Ok(y);
            }
            y = y.add(&y.mul(&err)?)?;
        }
        Err(Error::NoConvergence("Witt inversion did not terminate".into()))
    }

    /// The `y` of length `n - 1` with `p * y = x` (truncated), i.e.
    /// `(a_1^{1/p}, ..., a_{n-1}^{1/p})`.
    pub fn divide_by_p(&self) -> Result<WittVector> {
        if !self.coords[0].is_zero() {
            return Err(Error::NotDivisible(format!(
                "zeroth coordinate {} is nonzero",
                self.ring.format(&self.coords[0])
            )));
        }
        if self.len() < 2 {
            return Err(Error::NotDivisible("length 1 leaves no coordinates".into()));
        }
        let coords = self.coords[1..]
            .iter()
            .map(|c| self.ring.pth_root(c))
            .collect::<Result<Vec<_>>>()?;
        WittVector::new(self.ring.clone(), coords)
    }

    /// First `m` coordinates.
    pub fn truncate(&self, m: usize) -> Result<WittVector> {
        if m == 0 || m > self.len() {
            return Err(Error::Mismatch(format!("cannot truncate length {} to {m}", self.len())));
        }
        WittVector::new(self.ring.clone(), self.coords[..m].to_vec())
    }

    /// Pads with zero coordinates up to length `m`.
    pub fn extend(&self, m: usize) -> WittVector {
        let mut coords = self.coords.clone();
        coords.resize(m.max(self.len()), self.ring.zero());
        WittVector {
            ring: self.ring.clone(),
            coords,
        }
    }

    /// Applies a ring homomorphism coordinatewise.
    pub fn map(&self, phi: &RingHom) -> Result<WittVector> {
        if *phi.source != *self.ring {
            return Err(Error::Mismatch("homomorphism source differs from the coefficient ring".into()));
        }
        let coords = self
            .coords
            .iter()
            .map(|c| phi.apply(c))
            .collect::<Result<Vec<_>>>()?;
        WittVector::new(phi.target.clone(), coords)
    }
}

/// A ring homomorphism `A -> B` between presented rings with the same
/// coefficient field, given by the images of the variables and an optional
/// power of the Frobenius applied to coefficients.
#[derive(Clone, Debug)]
pub struct RingHom {
    source: Arc<Ring>,
    target: Arc<Ring>,
    images: Vec<Elem>,
    coef_frobenius: u32,
}

impl RingHom {
    /// Validates that the assignment respects the relations of `source`.
    pub fn new(
        source: Arc<Ring>,
        target: Arc<Ring>,
        images: Vec<Elem>,
        coef_frobenius: u32,
    ) -> Result<RingHom> {
        if source.coeffs() != target.coeffs() {
            return Err(Error::Mismatch("source and target coefficient fields differ".into()));
        }
        if images.len() != source.var_names().len() {
            return Err(Error::Mismatch("one image per source variable required".into()));
        }
        let hom = RingHom {
            source,
            target,
            images,
            coef_frobenius,
        };
        hom.check_relations()?;
        Ok(hom)
    }

    pub fn identity(ring: &Arc<Ring>) -> RingHom {
        let images = (0..ring.var_names().len()).map(|i| ring.var(i)).collect();
        RingHom {
            source: ring.clone(),
            target: ring.clone(),
            images,
            coef_frobenius: 0,
        }
    }

    /// The absolute Frobenius `x -> x^p` of `ring`.
    pub fn frobenius(ring: &Arc<Ring>) -> RingHom {
        let images = (0..ring.var_names().len())
            .map(|i| ring.pow(&ring.var(i), ring.p()))
            .collect();
        RingHom {
            source: ring.clone(),
            target: ring.clone(),
            images,
            coef_frobenius: 1,
        }
    }

    fn check_relations(&self) -> Result<()> {
        match self.source.kind() {
            RingKind::Field => Ok(()),
            RingKind::Univariate(u) => {
                let g = self.source.from_dense(&u.modulus);
                // evaluate g at the image, without reducing it in the source
                let mut acc = self.target.zero();
                for (k, c) in g.terms() {
                    let t = self.target.pow(&self.images[0], k[0] as u64);
                    acc = self.target.add(&acc, &self.target.scale(&t, &self.coef(c)));
                }
                if acc.is_zero() {
                    Ok(())
                } else {
                    Err(Error::RelationViolated(format!(
                        "modulus maps to {}",
                        self.target.format(&acc)
                    )))
                }
            }
            RingKind::Frac(spec) => {
                if spec.laurent {
                    for (i, img) in self.images.iter().enumerate() {
                        self.target.inverse(img).map_err(|_| {
                            Error::RelationViolated(format!(
                                "{} must map to a unit",
                                spec.vars[i]
                            ))
                        })?;
                    }
                }
                for gen in &spec.quotient {
                    let img = self.monomial_image(gen)?;
                    if !img.is_zero() {
                        return Err(Error::RelationViolated(format!(
                            "quotient generator maps to {}",
                            self.target.format(&img)
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    fn coef(&self, c: &Coef) -> Coef {
        let gr = self.source.coeffs();
        (0..self.coef_frobenius).fold(c.clone(), |acc, _| gr.frob(&acc))
    }

    /// Image of `x^{k/B}` for one variable.
    fn var_power(&self, i: usize, num: i64) -> Result<Elem> {
        let b = self.source.denom();
        let img = &self.images[i];
        if num % b == 0 {
            return self.target.pow_signed(img, num / b);
        }
        // fractional: strip p-power denominators by p-th roots
        let p = self.source.p() as i64;
        let g = crate::expr::gcd(num.unsigned_abs(), b as u64) as i64;
        let (n, mut d) = (num / g, b / g);
        let mut base = img.clone();
        while d % p == 0 {
            base = self.target.pth_root(&base)?;
            d /= p;
        }
        if d == 1 {
            return self.target.pow_signed(&base, n);
        }
        // remaining 2-power denominators need a monomial image
        let (k, c) = base.as_monomial().ok_or_else(|| {
            Error::Mismatch("fractional power of a non-monomial image".into())
        })?;
        if !self.target.coeffs().is_one(c) {
            return Err(Error::Mismatch("fractional power of a non-monic monomial image".into()));
        }
        let mut exps = k.clone();
        for e in exps.iter_mut() {
            let v = *e * n;
            if v % d != 0 {
                return Err(Error::LatticeViolation(format!("{v}/{d}")));
            }
            *e = v / d;
        }
        self.target.monomial(exps, self.target.coeffs().one())
    }

    fn monomial_image(&self, exps: &[i64]) -> Result<Elem> {
        let mut acc = self.target.one();
        for (i, &e) in exps.iter().enumerate() {
            if e != 0 {
                acc = self.target.mul(&acc, &self.var_power(i, e)?);
            }
        }
        Ok(acc)
    }

    pub fn apply(&self, x: &Elem) -> Result<Elem> {
        let mut acc = self.target.zero();
        for (k, c) in x.terms() {
            let m = self.monomial_image(k)?;
            acc = self.target.add(&acc, &self.target.scale(&m, &self.coef(c)));
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::engine;

    fn ring(s: &str) -> Arc<Ring> {
        Ring::parse(s).unwrap()
    }

    fn wv(r: &Arc<Ring>, coords: &[&str]) -> WittVector {
        WittVector::new(r.clone(), coords.iter().map(|c| r.parse_elem(c).unwrap()).collect()).unwrap()
    }

    #[test]
    fn small_sums() {
        let f2 = ring("ff p=2 e=1");
        for name in ["structural", "ghost-lift", "auto"] {
            let e = engine(name).unwrap();
            let one = wv(&f2, &["1", "0"]);
            assert_eq!(one.add_with(&one, e.as_ref()).unwrap(), wv(&f2, &["0", "1"]));
            let f3 = ring("ff p=3 e=1");
            let s = wv(&f3, &["1", "0"]).add_with(&wv(&f3, &["2", "0"]), e.as_ref()).unwrap();
            assert!(s.is_zero());
            let r = ring("frac base=(ff p=2 e=1) vars=x depth_p=0 depth_2=0 laurent=false");
            let x = wv(&r, &["x", "0"]);
            assert_eq!(x.add_with(&x, e.as_ref()).unwrap(), wv(&r, &["0", "x^2"]));
        }
    }

    #[test]
    fn integers_and_negation_at_two() {
        let f2 = ring("ff p=2 e=1");
        let minus_one = WittVector::from_int(&f2, 3, -1);
        assert_eq!(minus_one, wv(&f2, &["1", "1", "1"]));
        assert_eq!(WittVector::one(&f2, 3).neg().unwrap(), minus_one);
        assert_eq!(WittVector::from_int(&f2, 3, 2), wv(&f2, &["0", "1", "0"]));
    }

    #[test]
    fn integer_inverse_matches_newton() {
        let f5 = ring("ff p=5 e=1");
        for k in [1i64, 2, 7, -3, 124] {
            let w = WittVector::from_int(&f5, 3, k);
            assert_eq!(w.to_int().unwrap(), BigInt::from(k).mod_floor(&BigInt::from(125)));
            let inv = w.inverse().unwrap();
            assert!(w.mul(&inv).unwrap().sub(&WittVector::one(&f5, 3)).unwrap().is_zero());
        }
        let x = ring("frac base=(ff p=5 e=1) vars=x depth_p=0 depth_2=0 laurent=true");
        assert!(wv(&x, &["x", "1"]).to_int().is_none());
    }

    #[test]
    fn shortcut_products_match_engine() {
        let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=true");
        let e = engine("ghost-lift").unwrap();
        let x = wv(&r, &["x + 1", "x^(1/3)", "2*x^2"]);
        let factors = [
            wv(&r, &["x^(-1) + 2", "0", "0"]),
            WittVector::from_int(&r, 3, 3),
            WittVector::from_int(&r, 3, -9),
            WittVector::from_int(&r, 3, 26),
            WittVector::from_int(&r, 3, 5),
        ];
        for f in &factors {
            assert_eq!(x.mul(f).unwrap(), x.mul_with(f, e.as_ref()).unwrap());
            assert_eq!(f.mul(&x).unwrap(), x.mul_with(f, e.as_ref()).unwrap());
        }
    }

    #[test]
    fn divide_by_p_examples() {
        let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=false");
        let a = r.parse_elem("x + 1").unwrap();
        let t = WittVector::teichmuller(&r, a, 3);
        let y = t.mul_p().divide_by_p().unwrap();
        assert_eq!(y, t.truncate(2).unwrap());
        assert!(matches!(
            wv(&r, &["x", "0"]).divide_by_p(),
            Err(Error::NotDivisible(_))
        ));
        assert!(WittVector::zero(&r, 3).divide_by_p().unwrap().is_zero());
    }

    #[test]
    fn functor_examples() {
        let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=0 depth_2=0 laurent=false");
        let x = wv(&r, &["x + 1", "x^2"]);
        assert_eq!(x.map(&RingHom::identity(&r)).unwrap(), x);
        assert_eq!(x.map(&RingHom::frobenius(&r)).unwrap(), x.frobenius_map());
        let kill = RingHom::new(r.clone(), r.clone(), vec![r.zero()], 0).unwrap();
        assert!(WittVector::teichmuller(&r, r.var(0), 2).map(&kill).unwrap().is_zero());
        let q = ring("uq base=(ff p=3 e=1) var=T modulus=T^2");
        assert!(matches!(
            RingHom::new(q.clone(), q.clone(), vec![q.one()], 0),
            Err(Error::RelationViolated(_))
        ));
        let q_to_r = RingHom::new(q.clone(), q.clone(), vec![q.zero()], 0).unwrap();
        assert!(q_to_r.apply(&q.var(0)).unwrap().is_zero());
    }
}
