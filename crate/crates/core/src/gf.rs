//! Coefficient arithmetic in Galois rings `GR(p^k, e) = (Z/p^k)[u]/(m(u))`.
//!
//! With `k = 1` this is the finite field `F_q`, `q = p^e`. Larger `k` gives
//! the torsion-free-mod-`p^k` lift used by the ghost-lift Witt engine; the
//! defining polynomial is the canonical lift of the field modulus (digits in
//! `[0, p)`), so reduction mod `p` is digitwise.

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Coordinates of a Galois ring element in the basis `1, u, ..., u^{e-1}`.
pub type Coef = SmallVec<[u64; 4]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaloisRing {
    p: u64,
    k: u32,
    e: usize,
    m: u64,
    /// Monic defining polynomial, low degree first, length `e + 1`.
    modulus: Vec<u64>,
    gen: String,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl GaloisRing {
    /// Builds `F_{p^e}`. When `modulus` is absent and `e > 1` the first
    /// irreducible monic polynomial in lexicographic order is used.
    pub fn field(p: u64, e: usize, modulus: Option<Vec<u64>>, gen: &str) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= 1 << 31 {
            return Err(Error::InvalidRing(format!("prime {p} too large")));
        }
        if e == 0 {
            return Err(Error::InvalidRing("extension degree must be at least 1".into()));
        }
        let size = (p as f64).powi(e as i32);
        if size > (1u64 << 20) as f64 {
            return Err(Error::InvalidRing(format!("field of size {p}^{e} exceeds 2^20")));
        }
        let modulus = match modulus {
            Some(mut m) => {
                for c in m.iter_mut() {
                    *c %= p;
                }
                while m.len() > 1 && *m.last().unwrap() == 0 {
                    m.pop();
                }
                if m.len() != e + 1 || m[e] != 1 {
                    return Err(Error::InvalidRing(format!(
                        "modulus must be monic of degree {e}"
                    )));
                }
                if !is_irreducible_fp(p, &m) {
                    return Err(Error::ReducibleModulus(format_dense(&m, gen)));
                }
                m
            }
            None if e == 1 => vec![0, 1],
            None => first_irreducible(p, e),
        };
        Ok(GaloisRing {
            p,
            k: 1,
            e,
            m: p,
            modulus,
            gen: gen.to_string(),
        })
    }

    /// The Galois ring `GR(p^k, e)` lifting this field.
    pub fn lift(&self, k: u32) -> Self {
        let m = self.p.checked_pow(k).expect("lift modulus overflow");
        assert!(m < 1 << 62, "lift modulus too large");
        GaloisRing {
            k,
            m,
            ..self.clone()
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn e(&self) -> usize {
        self.e
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    /// The characteristic `p^k`.
    pub fn char_modulus(&self) -> u64 {
        self.m
    }
    /// Residue field size `q = p^e`.
    pub fn q(&self) -> u64 {
        self.p.pow(self.e as u32)
    }
    pub fn gen_name(&self) -> &str {
        &self.gen
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn is_field(&self) -> bool {
        self.k == 1
    }

    pub fn zero(&self) -> Coef {
        SmallVec::from_elem(0, self.e)
    }
    pub fn one(&self) -> Coef {
        let mut c = self.zero();
        c[0] = 1;
        c
    }
    pub fn from_int(&self, n: i64) -> Coef {
        let mut c = self.zero();
        c[0] = n.rem_euclid(self.m as i64) as u64;
        c
    }
    /// The generator `u` (only meaningful for `e > 1`).
    pub fn generator(&self) -> Coef {
        let mut c = self.zero();
        if self.e > 1 {
            c[1] = 1;
        } else {
            // u is the root of the linear modulus u + m0.
            c[0] = (self.m - self.modulus[0] % self.m) % self.m;
        }
        c
    }

    pub fn is_zero(&self, a: &Coef) -> bool {
        a.iter().all(|&c| c == 0)
    }
    pub fn is_one(&self, a: &Coef) -> bool {
        a[0] == 1 && a[1..].iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Coef, b: &Coef) -> Coef {
        a.iter()
            .zip(b.iter())
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= self.m {
                    s - self.m
                } else {
                    s
                }
            })
            .collect()
    }

    pub fn sub(&self, a: &Coef, b: &Coef) -> Coef {
        a.iter()
            .zip(b.iter())
            .map(|(&x, &y)| if x >= y { x - y } else { x + self.m - y })
            .collect()
    }

    pub fn neg(&self, a: &Coef) -> Coef {
        a.iter()
            .map(|&x| if x == 0 { 0 } else { self.m - x })
            .collect()
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    pub fn scale(&self, a: &Coef, s: u64) -> Coef {
        let s = s % self.m;
        a.iter().map(|&x| self.mulmod(x, s)).collect()
    }

    pub fn mul(&self, a: &Coef, b: &Coef) -> Coef {
        if self.e == 1 {
            let mut c = self.zero();
            c[0] = self.mulmod(a[0], b[0]);
            return c;
        }
        let e = self.e;
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + self.mulmod(x, y)) % self.m;
            }
        }
        // u^e = -(m_0 + ... + m_{e-1} u^{e-1})
        for top in (e..2 * e - 1).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &mi) in self.modulus[..e].iter().enumerate() {
                let t = self.mulmod(c, mi);
                let idx = top - e + i;
                prod[idx] = (prod[idx] + self.m - t) % self.m;
            }
        }
        prod.truncate(e);
        SmallVec::from_vec(prod)
    }

    pub fn pow(&self, a: &Coef, mut n: u64) -> Coef {
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

    /// True when the reduction mod `p` is nonzero.
    pub fn is_unit(&self, a: &Coef) -> bool {
        a.iter().any(|&c| c % self.p != 0)
    }

    pub fn inv(&self, a: &Coef) -> Option<Coef> {
        if !self.is_unit(a) {
            return None;
        }
        // |GR(p^k, e)^x| = q^{k-1} (q - 1)
        let q = self.q();
        let order = q.pow(self.k - 1) * (q - 1);
        Some(self.pow(a, order - 1))
    }

    /// The `p`-th power map (the Frobenius on `F_q`).
    pub fn frob(&self, a: &Coef) -> Coef {
        self.pow(a, self.p)
    }

    /// Unique `p`-th root in `F_q`; identity for prime fields.
    pub fn pth_root(&self, a: &Coef) -> Coef {
        debug_assert!(self.is_field());
        if self.e == 1 {
            return a.clone();
        }
        self.pow(a, self.q() / self.p)
    }

    /// Digitwise canonical lift of a field element into this ring.
    pub fn lift_coef(&self, a: &Coef) -> Coef {
        a.clone()
    }

    /// Reduction mod `p` (digitwise).
    pub fn reduce_mod_p(&self, a: &Coef) -> Coef {
        a.iter().map(|&c| c % self.p).collect()
    }

    /// Exact division of every digit by `p^j`, then reduction mod `p`.
    /// Returns `None` if some digit of `a mod p^{j+1}` is not divisible by `p^j`.
    pub fn div_pow_p_mod_p(&self, a: &Coef, j: u32) -> Option<Coef> {
        let pj = self.p.pow(j);
        let pj1 = pj * self.p;
        let mut out = self.zero();
        for (o, &c) in out.iter_mut().zip(a.iter()) {
            let c = c % pj1;
            if !c.is_multiple_of(pj) {
                return None;
            }
            *o = c / pj;
        }
        Some(out)
    }

    /// Every element of `F_q`, in counting order of the digit vector.
    pub fn elements(&self) -> Vec<Coef> {
        assert!(self.is_field());
        let q = self.q();
        (0..q)
            .map(|mut n| {
                let mut c = self.zero();
                for d in c.iter_mut() {
                    *d = n % self.p;
                    n /= self.p;
                }
                c
            })
            .collect()
    }

    pub fn random<R: rand::Rng>(&self, rng: &mut R) -> Coef {
        (0..self.e).map(|_| rng.gen_range(0..self.m)).collect()
    }

    /// Canonical text: `3` for prime fields, `1 + 2*u + u^2` otherwise.
    pub fn format(&self, a: &Coef) -> String {
        if self.e == 1 {
            return a[0].to_string();
        }
        format_dense(a, &self.gen)
    }
}

pub(crate) fn format_dense(a: &[u64], var: &str) -> String {
    let mut parts = Vec::new();
    for (i, &c) in a.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        parts.push(match (c, mono.is_empty()) {
            (_, true) => c.to_string(),
            (1, false) => mono,
            (_, false) => format!("{c}*{mono}"),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

// ---------------------------------------------------------------------------
// Dense polynomials over a Galois ring, low degree first.

pub fn poly_trim(gr: &GaloisRing, a: &mut Vec<Coef>) {
    while a.last().is_some_and(|c| gr.is_zero(c)) {
        a.pop();
    }
}

pub fn poly_deg(a: &[Coef]) -> Option<usize> {
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

pub fn poly_mul(gr: &GaloisRing, a: &[Coef], b: &[Coef]) -> Vec<Coef> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![gr.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if gr.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = gr.mul(x, y);
            out[i + j] = gr.add(&out[i + j], &t);
        }
    }
    let mut out = out;
    poly_trim(gr, &mut out);
    out
}

/// Remainder of `a` by a monic `b`.
pub fn poly_rem_monic(gr: &GaloisRing, a: &[Coef], b: &[Coef]) -> Vec<Coef> {
    let mut r = a.to_vec();
    poly_trim(gr, &mut r);
    let db = b.len() - 1;
    while r.len() > db {
        let top = r.len() - 1;
        let c = r[top].clone();
        if !gr.is_zero(&c) {
            for i in 0..db {
                let t = gr.mul(&c, &b[i]);
                r[top - db + i] = gr.sub(&r[top - db + i], &t);
            }
        }
        r.pop();
        poly_trim(gr, &mut r);
    }
    r
}

/// Quotient and remainder over a field.
pub fn poly_divrem(gr: &GaloisRing, a: &[Coef], b: &[Coef]) -> (Vec<Coef>, Vec<Coef>) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    let lead_inv = gr.inv(b.last().unwrap()).expect("leading coefficient not a unit");
    let mut r = a.to_vec();
    poly_trim(gr, &mut r);
    let db = b.len() - 1;
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![gr.zero(); r.len() - db];
    while r.len() > db {
        let top = r.len() - 1;
        let c = gr.mul(&r[top], &lead_inv);
        q[top - db] = c.clone();
        for i in 0..=db {
            let t = gr.mul(&c, &b[i]);
            r[top - db + i] = gr.sub(&r[top - db + i], &t);
        }
        r.pop();
        poly_trim(gr, &mut r);
    }
    poly_trim(gr, &mut q);
    (q, r)
}

pub fn poly_monic(gr: &GaloisRing, a: &[Coef]) -> Vec<Coef> {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let inv = gr.inv(l).expect("leading coefficient not a unit");
            a.iter().map(|c| gr.mul(c, &inv)).collect()
        }
    }
}

/// Monic gcd over a field.
pub fn poly_gcd(gr: &GaloisRing, a: &[Coef], b: &[Coef]) -> Vec<Coef> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly_trim(gr, &mut a);
    poly_trim(gr, &mut b);
    while !b.is_empty() {
        let (_, r) = poly_divrem(gr, &a, &b);
        a = b;
        b = r;
    }
    poly_monic(gr, &a)
}

pub fn poly_deriv(gr: &GaloisRing, a: &[Coef]) -> Vec<Coef> {
    let mut d: Vec<Coef> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| gr.scale(c, i as u64))
        .collect();
    poly_trim(gr, &mut d);
    d
}

/// Extended gcd over a field: returns `(g, s)` with `s*a ≡ g (mod b)`.
pub fn poly_xgcd_inv(gr: &GaloisRing, a: &[Coef], b: &[Coef]) -> (Vec<Coef>, Vec<Coef>) {
    let mut r0 = b.to_vec();
    let mut r1 = a.to_vec();
    poly_trim(gr, &mut r0);
    poly_trim(gr, &mut r1);
    let mut s0: Vec<Coef> = Vec::new();
    let mut s1: Vec<Coef> = vec![gr.one()];
    while !r1.is_empty() {
        let (q, r) = poly_divrem(gr, &r0, &r1);
        let qs = poly_mul(gr, &q, &s1);
        let mut s2 = poly_sub(gr, &s0, &qs);
        poly_trim(gr, &mut s2);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    // r0 = s0 * a (mod b)
    let lead = gr.inv(r0.last().unwrap()).unwrap();
    let g = r0.iter().map(|c| gr.mul(c, &lead)).collect();
    let s = s0.iter().map(|c| gr.mul(c, &lead)).collect();
    (g, s)
}

pub fn poly_sub(gr: &GaloisRing, a: &[Coef], b: &[Coef]) -> Vec<Coef> {
    let n = a.len().max(b.len());
    let z = gr.zero();
    let mut out: Vec<Coef> = (0..n)
        .map(|i| gr.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
        .collect();
    poly_trim(gr, &mut out);
    out
}

/// `p`-th root of a polynomial whose derivative vanishes: `sum c_i T^{pi}`
/// maps to `sum c_i^{1/p} T^i`.
pub fn poly_pth_root(gr: &GaloisRing, a: &[Coef]) -> Vec<Coef> {
    let p = gr.p() as usize;
    let mut out: Vec<Coef> = a
        .iter()
        .step_by(p)
        .map(|c| gr.pth_root(c))
        .collect();
    poly_trim(gr, &mut out);
    out
}

/// Product of the distinct monic irreducible factors of `g`.
pub fn poly_radical(gr: &GaloisRing, g: &[Coef]) -> Vec<Coef> {
    let g = poly_monic(gr, g);
    if g.len() <= 1 {
        return g;
    }
    let d = poly_deriv(gr, &g);
    if d.is_empty() {
        return poly_radical(gr, &poly_pth_root(gr, &g));
    }
    let c = poly_gcd(gr, &g, &d);
    let (s, _) = poly_divrem(gr, &g, &c);
    if c.len() <= 1 {
        return s;
    }
    let rc = poly_radical(gr, &c);
    // lcm(s, rad(c))
    let h = poly_gcd(gr, &s, &rc);
    let (rc_over_h, _) = poly_divrem(gr, &rc, &h);
    poly_monic(gr, &poly_mul(gr, &s, &rc_over_h))
}

fn fp_poly(p: u64, a: &[u64]) -> Vec<Coef> {
    a.iter().map(|&c| SmallVec::from_elem(c % p, 1)).collect()
}

/// Brute-force irreducibility over `F_p`: no monic factor of degree
/// `1..=deg/2`.
pub fn is_irreducible_fp(p: u64, m: &[u64]) -> bool {
    let gr = GaloisRing {
        p,
        k: 1,
        e: 1,
        m: p,
        modulus: vec![0, 1],
        gen: String::new(),
    };
    let f = fp_poly(p, m);
    let deg = f.len() - 1;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for n in 0..count {
            let mut cand: Vec<Coef> = Vec::with_capacity(d + 1);
            let mut x = n;
            for _ in 0..d {
                cand.push(SmallVec::from_elem(x % p, 1));
                x /= p;
            }
            cand.push(SmallVec::from_elem(1, 1));
            let r = poly_rem_monic(&gr, &f, &cand);
            if r.is_empty() {
                return false;
            }
        }
    }
    true
}

fn first_irreducible(p: u64, e: usize) -> Vec<u64> {
    let count = p.pow(e as u32);
    for n in 0..count {
        let mut m = Vec::with_capacity(e + 1);
        let mut x = n;
        for _ in 0..e {
            m.push(x % p);
            x /= p;
        }
        m.push(1);
        if is_irreducible_fp(p, &m) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_arithmetic() {
        let f4 = GaloisRing::field(2, 2, Some(vec![1, 1, 1]), "u").unwrap();
        let u = f4.generator();
        // u^2 = u + 1, u^3 = 1, u^4 = u
        assert_eq!(f4.mul(&u, &u), Coef::from_vec(vec![1, 1]));
        assert!(f4.is_one(&f4.pow(&u, 3)));
        assert_eq!(f4.pow(&u, 4), u);
        assert_eq!(f4.pth_root(&f4.frob(&u)), u);
    }

    #[test]
    fn reducible_modulus_rejected() {
        // u^2 + 1 = (u + 1)^2 over F_2
        assert!(matches!(
            GaloisRing::field(2, 2, Some(vec![1, 0, 1]), "u"),
            Err(Error::ReducibleModulus(_))
        ));
        assert!(matches!(GaloisRing::field(4, 1, None, "u"), Err(Error::NotPrime(4))));
    }

    #[test]
    fn default_modulus_is_irreducible() {
        let f9 = GaloisRing::field(3, 2, None, "u").unwrap();
        assert!(is_irreducible_fp(3, f9.modulus()));
        // every nonzero element has an inverse
        for a in f9.elements().into_iter().skip(1) {
            let inv = f9.inv(&a).unwrap();
            assert!(f9.is_one(&f9.mul(&a, &inv)));
        }
    }

    #[test]
    fn galois_ring_units() {
        let gr = GaloisRing::field(3, 2, None, "u").unwrap().lift(3);
        let a: Coef = SmallVec::from_vec(vec![4, 7]);
        let inv = gr.inv(&a).unwrap();
        assert!(gr.is_one(&gr.mul(&a, &inv)));
        assert!(gr.inv(&SmallVec::from_vec(vec![3, 6])).is_none());
    }

    #[test]
    fn radical_in_characteristic_p() {
        let f2 = GaloisRing::field(2, 1, None, "u").unwrap();
        let c = |v: &[u64]| -> Vec<Coef> { v.iter().map(|&x| SmallVec::from_elem(x, 1)).collect() };
        // T^2 + 1 = (T + 1)^2
        assert_eq!(poly_radical(&f2, &c(&[1, 0, 1])), c(&[1, 1]));
        // T^2 (T+1)^4
        let g = poly_mul(&f2, &c(&[0, 0, 1]), &c(&[1, 0, 0, 0, 1]));
        assert_eq!(poly_radical(&f2, &g), c(&[0, 1, 1]));
    }
}
