//! Frobenius diagnostics: perfection reports, the finite semiperfect tower
//! model `F_p[u]/(u^{p^M})`, and truncated Fontaine sequences.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::Coef;
use crate::hensel;
use crate::linalg::Matrix;
use crate::ramified::RamifiedWitt;
use crate::ring::{Depth, Elem, Exps, Ring, RingKind};
use crate::witt::WittVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectionReport {
    pub ring: String,
    pub injective_up_to: Depth,
    pub surjective_up_to: Depth,
    pub kernel_generators: Vec<Elem>,
    /// `(reason, element)` for each failure.
    pub witnesses: Vec<(String, Elem)>,
    /// Every witness and generator re-checked.
    pub verified: bool,
    text: String,
}

impl PerfectionReport {
    pub fn render(&self) -> &str {
        &self.text
    }
}

fn ring_generators(ring: &Ring) -> Vec<Elem> {
    let mut gens: Vec<Elem> = (0..ring.var_names().len()).map(|i| ring.var(i)).collect();
    if ring.e() > 1 {
        gens.push(ring.from_coef(ring.coeffs().generator()));
    }
    if gens.is_empty() {
        gens.push(ring.one());
    }
    gens
}

/// A random element with integer exponents in the generators.
fn random_integral(ring: &Ring, rng: &mut ChaCha8Rng) -> Elem {
    let gens = ring_generators(ring);
    let mut acc = ring.zero();
    for _ in 0..rng.gen_range(1..=3) {
        let mut t = ring.from_coef(ring.coeffs().random(rng));
        for g in &gens {
            t = ring.mul(&t, &ring.pow(g, rng.gen_range(0..3)));
        }
        acc = ring.add(&acc, &t);
    }
    acc
}

/// F_p-basis of the Frobenius kernel and the ideal generators found for it,
/// monomials first.
fn univariate_kernel(ring: &Ring) -> Vec<Elem> {
    let n = ring.fp_dimension().unwrap();
    let d = ring.modulus_degree().unwrap();
    let kernel: Vec<Elem> = ring
        .frobenius_matrix()
        .kernel()
        .iter()
        .map(|v| ring.from_fp_vector(v))
        .collect();
    let mut gens: Vec<Elem> = Vec::new();
    let mut span: Vec<Vec<u64>> = Vec::new();
    let in_span = |span: &Vec<Vec<u64>>, x: &Elem| {
        !span.is_empty()
            && Matrix::from_columns(ring.p(), n, span)
                .solve(&ring.to_fp_vector(x))
                .is_some()
    };
    let candidates = (0..d)
        .map(|i| ring.pow(&ring.var(0), i as u64))
        .filter(|m| ring.pow(m, ring.p()).is_zero())
        .chain(kernel.iter().cloned());
    for c in candidates {
        if c.is_zero() || in_span(&span, &c) {
            continue;
        }
        // span of the ideal (c): c * T^i * u^j
        for i in 0..d {
            let t = ring.mul(&c, &ring.pow(&ring.var(0), i as u64));
            for j in 0..ring.e() {
                let u = ring.from_coef(ring.coeffs().pow(&ring.coeffs().generator(), j as u64));
                span.push(ring.to_fp_vector(&ring.mul(&t, &u)));
            }
        }
        gens.push(c);
    }
    gens
}

fn monomial_kernel(ring: &Ring, quotient: &[Exps]) -> Vec<Elem> {
    let p = ring.p() as i64;
    let mut gens: Vec<Exps> = quotient
        .iter()
        .map(|g| g.iter().map(|&a| (a + p - 1) / p).collect())
        .collect();
    gens.sort();
    gens.dedup();
    let minimal: Vec<Exps> = gens
        .iter()
        .filter(|g| {
            !gens
                .iter()
                .any(|h| h != *g && h.iter().zip(g.iter()).all(|(a, b)| a <= b))
        })
        .cloned()
        .collect();
    minimal
        .into_iter()
        .filter_map(|k| ring.monomial(k, ring.coeffs().one()).ok())
        .filter(|m| !m.is_zero())
        .collect()
}

/// Injectivity and surjectivity of Frobenius, up to `budget` iterations.
pub fn perfection_report(ring: &Ring, budget: u32, seed: u64) -> PerfectionReport {
    let mut witnesses = Vec::new();
    let (injective_up_to, kernel_generators) = if ring.is_domain() {
        (Depth::Unbounded, Vec::new())
    } else {
        let gens = match ring.kind() {
            RingKind::Univariate(_) => univariate_kernel(ring),
            RingKind::Frac(s) => monomial_kernel(ring, &s.quotient),
            RingKind::Field => Vec::new(),
        };
        if let Some(g) = gens.first() {
            witnesses.push(("kernel of Frobenius".to_string(), g.clone()));
            (Depth::Finite(0), gens)
        } else {
            (Depth::Unbounded, gens)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = ring_generators(ring);
    samples.extend((0..8).map(|_| random_integral(ring, &mut rng)));
    let mut surjective_up_to = Depth::Unbounded;
    'outer: for k in 0..budget {
        for s in &samples {
            let Ok(y) = ring.frobenius(s, -(k as i64)) else { continue };
            if ring.pth_root(&y).is_err() {
                surjective_up_to = Depth::Finite(k);
                witnesses.push((format!("no p-th root after {k} roots"), y));
                break 'outer;
            }
        }
    }

    let verified = witnesses.iter().all(|(why, w)| {
        if why.starts_with("kernel") {
            !w.is_zero() && ring.pow(w, ring.p()).is_zero()
        } else {
            ring.pth_root(w).is_err()
        }
    }) && kernel_generators
        .iter()
        .all(|g| ring.pow(g, ring.p()).is_zero());

    let mut text = String::new();
    let _ = writeln!(text, "RING: {}", ring.descriptor());
    let _ = writeln!(text, "BUDGET: {budget}");
    let _ = writeln!(text, "INJECTIVE_UP_TO: {injective_up_to}");
    let _ = writeln!(text, "SURJECTIVE_UP_TO: {surjective_up_to}");
    let gens: Vec<String> = kernel_generators.iter().map(|g| ring.format(g)).collect();
    let _ = writeln!(text, "KERNEL_GENERATORS: {}", if gens.is_empty() { "none".into() } else { gens.join(", ") });
    for (why, w) in &witnesses {
        let _ = writeln!(text, "WITNESS: {} ({why})", ring.format(w));
    }
    let _ = writeln!(text, "PERFECT: {}", injective_up_to == Depth::Unbounded && surjective_up_to == Depth::Unbounded);
    let _ = writeln!(text, "VERDICT: {}", if verified { "PASS" } else { "FAIL" });
    PerfectionReport {
        ring: ring.descriptor(),
        injective_up_to,
        surjective_up_to,
        kernel_generators,
        witnesses,
        verified,
        text,
    }
}

/// `F_p[u]/(u^{p^M})`, the reduction of `Z[T]/(T^{p^M} - p)`.
pub fn tower_model(p: u64, depth: u32) -> Result<Arc<Ring>> {
    let size = p.checked_pow(depth).filter(|&s| s <= MAX_TOWER_SIZE).ok_or_else(|| {
        Error::BudgetExceeded(format!("p^M = {p}^{depth} exceeds {MAX_TOWER_SIZE}"))
    })?;
    let field = Ring::finite_field(p, 1, None, "u")?;
    let mut modulus: Vec<Coef> = vec![field.coeffs().zero(); size as usize + 1];
    modulus[size as usize] = field.coeffs().one();
    Ok(Arc::new(Ring::univariate(&field, "u", modulus)?))
}

pub const MAX_TOWER_SIZE: u64 = 3125;

#[derive(Clone, Debug)]
pub struct TowerReport {
    pub p: u64,
    pub depth: u32,
    /// `(item, passed, detail)`.
    pub items: Vec<(String, bool, String)>,
}

impl TowerReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|(_, ok, _)| *ok)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "MODEL: F_{}[u]/(u^{}) as the reduction of Z[T]/(T^{} - p), a finite stage of the tower",
            self.p,
            self.p.pow(self.depth),
            self.p.pow(self.depth)
        );
        for (name, ok, detail) in &self.items {
            let _ = writeln!(s, "{name}: {} ({detail})", if *ok { "PASS" } else { "FAIL" });
        }
        let _ = writeln!(s, "VERDICT: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

/// Checks the tower model at depth `M` against depth `M - 1`.
pub fn semiperfect_tower_check(p: u64, depth: u32) -> Result<TowerReport> {
    if depth == 0 {
        return Err(Error::Mismatch("depth must be at least 1".into()));
    }
    let a = tower_model(p, depth)?;
    let lower = tower_model(p, depth - 1)?;
    let n = p.pow(depth) as usize;
    let m = n / p as usize;
    let u = a.var(0);
    let pi = a.pow(&u, m as u64);
    let mut items = Vec::new();

    let pi_p = a.pow(&pi, p);
    items.push(("pi^p = 0".to_string(), pi_p.is_zero(), format!("pi = {}", a.format(&pi))));

    // (a) kernel of Frobenius equals (pi): same dimension, and the ideal lies in it
    let kernel_dim = a.frobenius_matrix().kernel().len();
    let ideal: Vec<Elem> = (0..n - m).map(|i| a.mul(&pi, &a.pow(&u, i as u64))).collect();
    let ideal_in_kernel = ideal.iter().all(|x| a.pow(x, p).is_zero());
    let gens = univariate_kernel(&a);
    items.push((
        "kernel(Frob) = (pi)".to_string(),
        kernel_dim == n - m && ideal_in_kernel && gens == vec![pi.clone()],
        format!("dim kernel {kernel_dim}, dim (pi) {}", n - m),
    ));

    // (b) x mod pi -> x^p is injective on A/(pi) with image the image of Frobenius
    let images: Vec<Vec<u64>> = (0..m)
        .map(|i| a.to_fp_vector(&a.pow(&a.pow(&u, i as u64), p)))
        .collect();
    let map_rank = Matrix::from_columns(p, n, &images).rank();
    let frob_rank = a.frobenius_matrix().rank();
    let well_defined = ideal.iter().all(|x| a.pow(x, p).is_zero());
    let mut rng = ChaCha8Rng::seed_from_u64(p * 1000 + depth as u64);
    let multiplicative = (0..16).all(|_| {
        let x = lower.random_elem(&mut rng, 3, m as i64);
        let y = lower.random_elem(&mut rng, 3, m as i64);
        let up = |z: &Elem| a.from_dense(&lower.to_dense(z));
        let lhs = a.pow(&up(&lower.mul(&x, &y)), p);
        let rhs = a.mul(&a.pow(&up(&x), p), &a.pow(&up(&y), p));
        lhs == rhs
    });
    items.push((
        "A/(pi) -> Frob(A) isomorphism".to_string(),
        well_defined && multiplicative && map_rank == m && frob_rank == m,
        format!("rank {map_rank}, dim A/(pi) {m}, rank Frob {frob_rank}"),
    ));

    // (c) every element of the lower model gets a p-th root one level up
    let mut acquired = true;
    for i in 0..m {
        let image = a.pow(&u, (p as usize * i) as u64);
        match a.pth_root(&image) {
            Ok(r) if a.pow(&r, p) == image => {}
            _ => acquired = false,
        }
    }
    items.push((
        "cross-level p-th roots".to_string(),
        acquired,
        format!("{m} basis elements of the depth-{} model", depth - 1),
    ));

    // (d) the root a of X^{p^2} - pX - [c] satisfies (a^p)^p = c mod p
    let (ok, detail) = lemma_root_check(p)?;
    items.push(("(a^p)^p = [c] mod p".to_string(), ok, detail));
    Ok(TowerReport { p, depth, items })
}

/// Adjoins a root of `X^{p^2} - pX - [c]` for `c = -1` and checks that
/// `a^{p^2} - [c]` is divisible by `p`.
pub fn lemma_root_check(p: u64) -> Result<(bool, String)> {
    let field = Arc::new(Ring::finite_field(p, 1, None, "u")?);
    let deg = (p * p) as usize;
    let level = 3;
    let c = field.from_int(-1);
    let mut coeffs = vec![WittVector::zero(&field, level); deg + 1];
    coeffs[0] = WittVector::teichmuller(&field, c.clone(), level).neg()?;
    coeffs[1] = WittVector::from_int(&field, level, -(p as i64));
    coeffs[deg] = WittVector::one(&field, level);
    let seed = field.frobenius(&c, -2)?;
    let prec = 2 * deg;
    let (base, root) = hensel::adjoin_root(&field, &coeffs, &seed, &field, prec)?;
    let fc: Vec<RamifiedWitt> = coeffs
        .iter()
        .map(|w| RamifiedWitt::from_witt(&base, w.clone(), prec))
        .collect::<Result<_>>()?;
    let residual = hensel::eval_poly(&fc, &root)?;
    let ap = root.pow(p)?.pow(p)?;
    let diff = ap.sub(&RamifiedWitt::teichmuller(&base, &field, prec, c)?)?;
    let ord = diff.pi_order()?;
    let ok = residual.is_zero() && root.reduce_mod_pi() == seed && ord >= deg;
    Ok((ok, format!("ramification {deg}, pi-order of (a^p)^p - [c] is {ord}, p has order {deg}")))
}

/// A compatible sequence `(a_0, a_1, ..)` with `a_{i+1}^p = a_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FontaineElement {
    ring: Arc<Ring>,
    seq: Vec<Elem>,
}

impl FontaineElement {
    pub fn new(ring: &Arc<Ring>, seq: Vec<Elem>) -> Result<Self> {
        if seq.is_empty() {
            return Err(Error::Mismatch("empty sequence".into()));
        }
        for i in 0..seq.len() - 1 {
            if ring.pow(&seq[i + 1], ring.p()) != seq[i] {
                return Err(Error::IncompatibleSequence(i));
            }
        }
        Ok(FontaineElement { ring: ring.clone(), seq })
    }

    /// The sequence of iterated `p`-th roots of `a_0`.
    pub fn from_roots(ring: &Arc<Ring>, a0: Elem, len: usize) -> Result<Self> {
        let mut seq = vec![a0];
        for _ in 1..len {
            let next = ring.pth_root(seq.last().unwrap())?;
            seq.push(next);
        }
        Self::new(ring, seq)
    }

    pub fn constant(ring: &Arc<Ring>, a: &Elem, len: usize) -> Result<Self> {
        Self::new(ring, vec![a.clone(); len])
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }
    pub fn seq(&self) -> &[Elem] {
        &self.seq
    }

    fn zip(&self, other: &Self, op: impl Fn(&Elem, &Elem) -> Elem) -> Result<Self> {
        if self.ring != other.ring || self.seq.len() != other.seq.len() {
            return Err(Error::Mismatch("Fontaine sequences differ in ring or length".into()));
        }
        let seq = self.seq.iter().zip(&other.seq).map(|(a, b)| op(a, b)).collect();
        Ok(FontaineElement { ring: self.ring.clone(), seq })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| self.ring.add(a, b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| self.ring.mul(a, b))
    }

    pub fn neg(&self) -> Self {
        let seq = self.seq.iter().map(|a| self.ring.neg(a)).collect();
        FontaineElement { ring: self.ring.clone(), seq }
    }

    /// Drops `a_0`: the inverse of Frobenius.
    pub fn shift_forward(&self) -> Result<Self> {
        if self.seq.len() < 2 {
            return Err(Error::DepthExhausted("sequence too short to shift".into()));
        }
        Ok(FontaineElement { ring: self.ring.clone(), seq: self.seq[1..].to_vec() })
    }

    /// Prepends `a_0^p` and drops the last term: Frobenius.
    pub fn shift_backward(&self) -> Self {
        let mut seq = vec![self.ring.pow(&self.seq[0], self.ring.p())];
        seq.extend_from_slice(&self.seq[..self.seq.len() - 1]);
        FontaineElement { ring: self.ring.clone(), seq }
    }

    pub fn truncate(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.seq.len() {
            return Err(Error::Mismatch(format!("cannot truncate length {} to {len}", self.seq.len())));
        }
        Ok(FontaineElement { ring: self.ring.clone(), seq: self.seq[..len].to_vec() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports() {
        let f9 = Ring::parse("ff p=3 e=2 modulus=u^2+1").unwrap();
        let r = perfection_report(&f9, 4, 1);
        assert_eq!((r.injective_up_to, r.surjective_up_to), (Depth::Unbounded, Depth::Unbounded));
        let fx = Ring::parse("frac base=(ff p=3 e=1) vars=x depth_p=0 depth_2=0 laurent=false").unwrap();
        let r = perfection_report(&fx, 4, 1);
        assert_eq!(r.surjective_up_to, Depth::Finite(0));
        assert_eq!(r.witnesses[0].1, fx.var(0));
        let t = Ring::parse("uq base=(ff p=3 e=1) var=T modulus=T^9").unwrap();
        let r = perfection_report(&t, 4, 1);
        assert_eq!(r.kernel_generators, vec![t.parse_elem("T^3").unwrap()]);
        assert_eq!(r.surjective_up_to, Depth::Finite(0));
        assert!(r.verified);
        assert!(r.render().ends_with("VERDICT: PASS\n"));
        let d = Ring::parse("frac base=(ff p=2 e=1) vars=x,y depth_p=2 depth_2=1 laurent=true").unwrap();
        assert_eq!(perfection_report(&d, 6, 1).surjective_up_to, Depth::Finite(3));
    }

    #[test]
    fn tower_small() {
        for (p, m) in [(3, 1), (2, 2), (2, 3)] {
            let r = semiperfect_tower_check(p, m).unwrap();
            assert!(r.passed(), "{}", r.render());
        }
        assert!(matches!(semiperfect_tower_check(7, 5), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn fontaine_basics() {
        let r = tower_model(2, 2).unwrap();
        let u = r.var(0);
        let seq = vec![r.zero(), r.pow(&u, 2), u.clone()];
        let x = FontaineElement::new(&r, seq).unwrap();
        assert!(matches!(
            FontaineElement::new(&r, vec![u.clone(), u.clone()]),
            Err(Error::IncompatibleSequence(0))
        ));
        let one = FontaineElement::constant(&r, &r.one(), 3).unwrap();
        assert_eq!(x.mul(&one).unwrap(), x);
        let back = x.shift_forward().unwrap().shift_backward();
        assert_eq!(back, x.truncate(2).unwrap());
    }
}
