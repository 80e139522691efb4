//! The verification suite: named checks, each a self-contained property
//! test over desk-scale data, selected by a substring filter.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec;
use crate::desk::{self, Intersection, Reducedness};
use crate::engine;
use crate::error::Result;
use crate::expr::parse_expr;
use crate::ghost;
use crate::gf::Coef;
use crate::hensel::{self, HenselProblem};
use crate::lab::{self, FontaineElement};
use crate::ramified::{self, RamifiedBase, RamifiedWitt, RwEval};
use crate::ring::{Depth, Elem, Ring};
use crate::structural::{self, Kind};
use crate::witt::WittVector;

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn pass(detail: impl Into<String>) -> Self {
        Outcome { passed: true, detail: detail.into() }
    }
    fn fail(detail: impl Into<String>) -> Self {
        Outcome { passed: false, detail: detail.into() }
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Ok(Outcome::fail(format!($($fmt)+)));
        }
    };
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    /// The statement being checked, in one line.
    fn claim(&self) -> &'static str;
    fn run(&self, seed: u64) -> Result<Outcome>;
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: &'static str,
    pub claim: &'static str,
    pub outcome: Outcome,
    pub millis: u128,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub seed: u64,
    pub filter: Option<String>,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome.passed)
    }

    /// One line per check. Timings are left out unless asked for so that
    /// reruns are byte-identical.
    pub fn render(&self, timings: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "SEED: {}", self.seed);
        if self.checks.is_empty() {
            let _ = writeln!(
                s,
                "NOTE: no check matches filter `{}`",
                self.filter.as_deref().unwrap_or("")
            );
        }
        for c in &self.checks {
            let verdict = if c.outcome.passed { "PASS" } else { "FAIL" };
            let time = if timings { format!(" [{} ms]", c.millis) } else { String::new() };
            let _ = writeln!(s, "{verdict} {} | {} | {}{time}", c.name, c.claim, c.outcome.detail);
            if !c.outcome.passed {
                let _ = writeln!(
                    s,
                    "  reproduce: wittforge verify examples --filter {} --seed {}",
                    c.name, self.seed
                );
            }
        }
        let _ = writeln!(s, "VERDICT: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

/// All registered checks, in a fixed order.
pub fn checks() -> Vec<Box<dyn Check>> {
    vec![
        Box::new(StructuralIntegrity),
        Box::new(GhostOracle),
        Box::new(SmallWittRings),
        Box::new(WittIdentities),
        Box::new(RamifiedLayer),
        Box::new(FrobeniusPi),
        Box::new(SqrtFrobenius),
        Box::new(SemiperfectTower),
        Box::new(ReducedNormalization),
        Box::new(DeskCertificates),
        Box::new(FontaineRing),
        Box::new(DeterminismCodecs),
    ]
}

pub fn check_names() -> Vec<&'static str> {
    checks().iter().map(|c| c.name()).collect()
}

pub fn run_check(check: &dyn Check, seed: u64) -> CheckReport {
    let t = Instant::now();
    let outcome = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check.run(seed))) {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => Outcome::fail(format!("error: {e}")),
        Err(_) => Outcome::fail("panicked"),
    };
    CheckReport {
        name: check.name(),
        claim: check.claim(),
        outcome,
        millis: t.elapsed().as_millis(),
    }
}

/// Runs the checks whose name or claim contains `filter`.
pub fn run_suite(filter: Option<&str>, seed: u64) -> SuiteReport {
    let selected: Vec<Box<dyn Check>> = checks()
        .into_iter()
        .filter(|c| filter.is_none_or(|f| c.name().contains(f) || c.claim().contains(f)))
        .collect();
    // checks are independent; results come back in registry order
    let checks = std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|c| s.spawn(move || run_check(c.as_ref(), seed)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("run_check catches panics")).collect()
    });
    SuiteReport {
        seed,
        filter: filter.map(str::to_string),
        checks,
    }
}

fn ring(s: &str) -> Result<Arc<Ring>> {
    Ring::parse(s)
}

fn random_witt(ring: &Arc<Ring>, rng: &mut ChaCha8Rng, n: usize, terms: usize, exp: i64) -> WittVector {
    let coords = (0..n).map(|_| ring.random_elem(rng, terms, exp)).collect();
    WittVector::new(ring.clone(), coords).expect("n >= 1")
}

/// Like [`random_witt`] with every coordinate a `p^depth`-th power, so that
/// operations taking `p`-th roots stay inside the exponent lattice.
fn rooted_witt(ring: &Arc<Ring>, rng: &mut ChaCha8Rng, n: usize, terms: usize, exp: i64) -> WittVector {
    let w = random_witt(ring, rng, n, terms, exp);
    match ring.perfection_depth() {
        Depth::Finite(d) if d > 0 => {
            let e = ring.p().pow(d);
            let coords = w.coords().iter().map(|c| ring.pow(c, e)).collect();
            WittVector::new(ring.clone(), coords).expect("n >= 1")
        }
        _ => w,
    }
}

fn from_u64s(ring: &Arc<Ring>, v: &[u64]) -> WittVector {
    WittVector::new(ring.clone(), v.iter().map(|&c| ring.from_int(c as i64)).collect()).expect("n >= 1")
}

// ---------------------------------------------------------------------------

struct StructuralIntegrity;

impl Check for StructuralIntegrity {
    fn name(&self) -> &'static str {
        "structural-integrity"
    }
    fn claim(&self) -> &'static str {
        "ghost identities hold exactly for p in {2,3,5}, levels <= 4; p=2 level-1 tables match"
    }
    fn run(&self, _seed: u64) -> Result<Outcome> {
        let (s2, _) = structural::generate(2, Kind::Sum, 1, structural::DEFAULT_TERM_BUDGET)?;
        let (p2, _) = structural::generate(2, Kind::Product, 1, structural::DEFAULT_TERM_BUDGET)?;
        let s1 = s2.dump().lines().nth(1).unwrap_or("").to_string();
        let p1 = p2.dump().lines().nth(1).unwrap_or("").to_string();
        ensure!(s1 == "S_1 = -X_0*Y_0 + X_1 + Y_1", "p=2 sum table: {s1}");
        ensure!(p1 == "P_1 = X_0^2*Y_1 + Y_0^2*X_1 + 2*X_1*Y_1", "p=2 product table: {p1}");

        let mut verified = Vec::new();
        let mut missing = Vec::new();
        for p in [2u64, 3, 5] {
            for kind in Kind::ALL {
                let mut level = 4;
                let table = loop {
                    match structural::generate(p, kind, level, structural::DEFAULT_TERM_BUDGET) {
                        Ok((t, _)) => break Some(t),
                        Err(e) if e.is_exhaustion() => {
                            missing.push(format!("{}{}@L{level}: {e}", kind.symbol(), p));
                            if level == 0 {
                                break None;
                            }
                            level -= 1;
                        }
                        Err(e) => return Err(e),
                    }
                };
                if let Some(t) = table {
                    t.verify(50_000_000)?;
                    verified.push(format!("{}{}@L{}", kind.symbol(), p, t.level()));
                }
            }
        }
        let detail = format!("verified {}", verified.join(" "));
        if missing.is_empty() {
            Ok(Outcome::pass(detail))
        } else {
            Ok(Outcome::fail(format!("{detail}; out of budget: {}", missing.join("; "))))
        }
    }
}

// ---------------------------------------------------------------------------

struct GhostOracle;

impl Check for GhostOracle {
    fn name(&self) -> &'static str {
        "ghost-oracle-equivalence"
    }
    fn claim(&self) -> &'static str {
        "1000 random add/mul per (p, n), p in {2,3,5}, n <= 4, agree with the integer ghost route"
    }
    fn run(&self, seed: u64) -> Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let structural = engine::engine("structural")?;
        let ghost_lift = engine::engine("ghost-lift")?;
        let mut count = 0;
        for p in [2u64, 3, 5] {
            let f = ring(&format!("ff p={p} e=1"))?;
            for n in 1..=4usize {
                for _ in 0..1000 {
                    let xs: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
                    let ys: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
                    let big = |v: &[u64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
                    let (gx, gy) = (ghost::ghost(p, &big(&xs)), ghost::ghost(p, &big(&ys)));
                    let x = from_u64s(&f, &xs);
                    let y = from_u64s(&f, &ys);
                    for mul in [false, true] {
                        let g: Vec<BigInt> = gx
                            .iter()
                            .zip(&gy)
                            .map(|(a, b)| if mul { a * b } else { a + b })
                            .collect();
                        let coords = ghost::from_ghost(p, &g)?;
                        let modp = BigInt::from(p);
                        let expect: Vec<u64> = coords
                            .iter()
                            .map(|c| ((c % &modp + &modp) % &modp).to_u64().unwrap())
                            .collect();
                        let expect = from_u64s(&f, &expect);
                        for e in [&structural, &ghost_lift] {
                            let got = if mul { x.mul_with(&y, e.as_ref())? } else { x.add_with(&y, e.as_ref())? };
                            ensure!(
                                got == expect,
                                "p={p} n={n} {} via {}: {} vs ghost {}",
                                if mul { "mul" } else { "add" },
                                e.name(),
                                codec::format_witt(&got),
                                codec::format_witt(&expect)
                            );
                        }
                        count += 1;
                    }
                }
            }
        }
        Ok(Outcome::pass(format!("{count} instances, structural and ghost-lift engines")))
    }
}

// ---------------------------------------------------------------------------

struct SmallWittRings;

impl Check for SmallWittRings {
    fn name(&self) -> &'static str {
        "witt-fp-structure"
    }
    fn claim(&self) -> &'static str {
        "W_n(F_p), p <= 5, n <= 3: ring axioms, p^n elements, 1 has additive order p^n"
    }
    fn run(&self, seed: u64) -> Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in [2u64, 3, 5] {
            let f = ring(&format!("ff p={p} e=1"))?;
            for n in 1..=3usize {
                let size = p.pow(n as u32);
                let all: Vec<WittVector> = (0..size)
                    .map(|k| {
                        let digits: Vec<u64> = (0..n).map(|i| (k / p.pow(i as u32)) % p).collect();
                        from_u64s(&f, &digits)
                    })
                    .collect();
                // integers 0 .. p^n - 1 hit every element exactly once
                let mut ints: Vec<WittVector> = (0..size as i64).map(|k| WittVector::from_int(&f, n, k)).collect();
                ints.sort_by_key(|w| w.coords().to_vec());
                let mut sorted = all.clone();
                sorted.sort_by_key(|w| w.coords().to_vec());
                ensure!(ints == sorted, "p={p} n={n}: integers do not enumerate W_n(F_p)");
                let zero = WittVector::zero(&f, n);
                let one = WittVector::one(&f, n);
                let mut acc = one.clone();
                let mut order = 1;
                while !acc.is_zero() {
                    acc = acc.add(&one)?;
                    order += 1;
                }
                ensure!(order == size, "p={p} n={n}: additive order of 1 is {order}");
                for a in &all {
                    ensure!(a.add(&zero)? == *a && a.mul(&one)? == *a, "identities fail");
                    ensure!(a.add(&a.neg()?)?.is_zero(), "additive inverse fails for {}", codec::format_witt(a));
                }
                // integer arithmetic mod p^n is the oracle for every pair
                for i in 0..size as i64 {
                    for j in 0..size as i64 {
                        let (a, b) = (&ints_by(&f, n, i), &ints_by(&f, n, j));
                        let m = size as i64;
                        ensure!(
                            a.add(b)? == WittVector::from_int(&f, n, (i + j) % m)
                                && a.mul(b)? == WittVector::from_int(&f, n, (i * j) % m),
                            "p={p} n={n}: arithmetic of {i} and {j} disagrees with Z/{m}"
                        );
                    }
                }
                for _ in 0..200 {
                    let pick = |rng: &mut ChaCha8Rng| all[rng.gen_range(0..all.len())].clone();
                    let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
                    ensure!(a.add(&b)?.add(&c)? == a.add(&b.add(&c)?)?, "additive associativity");
                    ensure!(a.mul(&b)?.mul(&c)? == a.mul(&b.mul(&c)?)?, "multiplicative associativity");
                    ensure!(a.mul(&b.add(&c)?)? == a.mul(&b)?.add(&a.mul(&c)?)?, "distributivity");
                    ensure!(a.mul(&b)? == b.mul(&a)? && a.add(&b)? == b.add(&a)?, "commutativity");
                }
            }
        }
        Ok(Outcome::pass("p in {2,3,5}, n in {1,2,3}, exhaustive against Z/p^n"))
    }
}

fn ints_by(f: &Arc<Ring>, n: usize, k: i64) -> WittVector {
    WittVector::from_int(f, n, k)
}

// ---------------------------------------------------------------------------

struct WittIdentities;

impl Check for WittIdentities {
    fn name(&self) -> &'static str {
        "witt-identities"
    }
    fn claim(&self) -> &'static str {
        "FV = p, F is the coordinatewise p-th power and a ring map, project[a] = a, p | x iff a_0 = 0"
    }
    fn run(&self, seed: u64) -> Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let configs = [
            ("ff p=2 e=1", 3),
            ("ff p=3 e=1", 3),
            ("ff p=5 e=1", 2),
            ("ff p=2 e=2 modulus=u^2+u+1", 3),
            ("frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=0 laurent=true", 3),
            ("uq base=(ff p=2 e=1) var=T modulus=T^4", 3),
        ];
        for (desc, n) in configs {
            let f = ring(desc)?;
            let p = f.p();
            for _ in 0..1000 {
                let x = rooted_witt(&f, &mut rng, n, 2, 1);
                let y = rooted_witt(&f, &mut rng, n, 2, 1);
                let mut px = WittVector::zero(&f, n);
                for _ in 0..p {
                    px = px.add(&x)?;
                }
                ensure!(x.verschiebung().frobenius_map() == px, "{desc}: FV != p on {}", codec::format_witt(&x));
                let fx = x.frobenius_map();
                let powered: Vec<Elem> = x.coords().iter().map(|c| f.pow(c, p)).collect();
                ensure!(fx.coords() == powered.as_slice(), "{desc}: F is not the coordinatewise power");
                ensure!(
                    x.add(&y)?.frobenius_map() == fx.add(&y.frobenius_map())?
                        && x.mul(&y)?.frobenius_map() == fx.mul(&y.frobenius_map())?,
                    "{desc}: F is not a ring map"
                );
                let a = x.coords()[0].clone();
                ensure!(WittVector::teichmuller(&f, a.clone(), n).project() == a, "{desc}: project[a] != a");
                // divisibility by p needs p-th roots of the higher coordinates
                if f.perfection_depth() == Depth::Finite(0) {
                    continue;
                }
                if a.is_zero() {
                    let z = x.divide_by_p()?;
                    ensure!(z.extend(n).mul_p() == x, "{desc}: p * (x/p) != x");
                } else {
                    ensure!(x.divide_by_p().is_err(), "{desc}: divided a unit-digit vector by p");
                }
                let z = px.coords()[0].is_zero();
                ensure!(z && px.divide_by_p().is_ok(), "{desc}: p*x has nonzero a_0");
            }
        }
        Ok(Outcome::pass("1000 samples over each of 6 coefficient rings"))
    }
}

// ---------------------------------------------------------------------------

fn random_rw(
    base: &Arc<RamifiedBase>,
    ring: &Arc<Ring>,
    prec: usize,
    rng: &mut ChaCha8Rng,
    exp: i64,
    rooted: bool,
) -> Result<RamifiedWitt> {
    let n = ramified::witt_len(prec, base.f());
    let sample = if rooted { rooted_witt } else { random_witt };
    let coords = (0..base.f()).map(|_| sample(ring, rng, n, 2, exp)).collect();
    RamifiedWitt::new(base, ring, coords, prec)
}

struct RamifiedLayer;

impl Check for RamifiedLayer {
    fn name(&self) -> &'static str {
        "ramified-layer"
    }
    fn claim(&self) -> &'static str {
        "pi^f = unit * p; digit round trips for N <= 12; residue of F_pi is the q-power of the residue"
    }
    fn run(&self, seed: u64) -> Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cases = [
            ("rb p=3 e=1 E=X^2-3", "frac base=(ff p=3 e=1) vars=x depth_p=6 depth_2=0 laurent=true"),
            ("rb p=2 e=1 E=X^3-2", "frac base=(ff p=2 e=1) vars=x depth_p=6 depth_2=0 laurent=true"),
            (
                "rb p=3 e=2 modulus=u^2+1 E=X^2-3",
                "frac base=(ff p=3 e=2 modulus=u^2+1) vars=x depth_p=6 depth_2=0 laurent=true",
            ),
        ];
        let mut trips = 0;
        for (bdesc, rdesc) in cases {
            let base = RamifiedBase::parse(bdesc)?;
            let r = ring(rdesc)?;
            let f = base.f();
            let n = 12;
            let pi_f = RamifiedWitt::pi(&base, &r, n)?.pow(f as u64)?;
            let p = RamifiedWitt::from_int(&base, &r, n, base.p() as i64)?;
            let mut u = pi_f.clone();
            for _ in 0..f {
                u = u.divide_by_pi()?;
            }
            ensure!(r.inverse(&u.reduce_mod_pi()).is_ok(), "{bdesc}: pi^f / pi^f is not a unit");
            let mut v = p.clone();
            for _ in 0..f {
                v = v.divide_by_pi()?;
            }
            ensure!(v.eq_mod(&u, n - f)?, "{bdesc}: p and pi^f differ by more than a unit");
            ensure!(p.pi_order()? == f, "{bdesc}: ord_pi(p) != f");
            for prec in 1..=n {
                for _ in 0..4 {
                    let x = random_rw(&base, &r, prec, &mut rng, 2, true)?;
                    let d = x.digit_expand(prec)?;
                    ensure!(d == x.digit_expand(prec)?, "{bdesc}: digit expansion not deterministic");
                    let back = RamifiedWitt::assemble(&base, &d)?;
                    ensure!(back.eq_mod(&x, prec)?, "{bdesc}: round trip fails at N={prec}: {}", codec::format_rw(&x));
                    trips += 1;
                }
            }
            for _ in 0..100 {
                let x = random_rw(&base, &r, 4, &mut rng, 2, true)?;
                let lhs = x.frobenius_pi(1)?.reduce_mod_pi();
                let rhs = r.frobenius(&x.reduce_mod_pi(), base.e() as i64)?;
                ensure!(lhs == rhs, "{bdesc}: residue of F_pi x is not the q-power");
            }
        }
        Ok(Outcome::pass(format!("3 bases, {trips} digit round trips, 300 residue samples")))
    }
}

// ---------------------------------------------------------------------------

struct FrobeniusPi;

impl Check for FrobeniusPi {
    fn name(&self) -> &'static str {
        "frobenius-pi-suite"
    }
    fn claim(&self) -> &'static str {
        "F_pi[x_i] = [x_i^q], F_pi(pi) = pi, twisted product recurrence n <= 3, F_pi^k(a) = a^(q^k) mod pi"
    }
    fn run(&self, _seed: u64) -> Result<Outcome> {
        let base = RamifiedBase::parse("rb p=3 e=1 E=X^2-3")?;
        let r = ring("frac base=(ff p=3 e=1) vars=x,y depth_p=5 depth_2=0 laurent=true")?;
        let n = 6;
        let ev = RwEval { base: &base, ring: &r, prec: n, allow_x: false };
        let q = base.q();
        for v in ["x", "y"] {
            let lhs = ev.eval_constant(&parse_expr(v)?)?.frobenius_pi(1)?;
            let rhs = ev.eval_constant(&parse_expr(&format!("{v}^{q}"))?)?;
            ensure!(lhs == rhs, "F_pi[{v}] != [{v}^{q}]");
        }
        let pi = RamifiedWitt::pi(&base, &r, n)?;
        ensure!(pi.frobenius_pi(1)? == pi && pi.frobenius_pi(-1)? == pi, "F_pi moves pi");

        // the recurrence runs at N = 6 on a one-variable sample
        let n = 6;
        let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=5 depth_2=0 laurent=true")?;
        let a = embed_sample(&base, &r, n)?;
        let mut prev = ramified::twisted_product(&a, 0)?;
        ensure!(prev == a, "a_0 != a");
        for k in 0..3i64 {
            let next = ramified::twisted_product(&a, (k + 1) as usize)?;
            let lhs = prev
                .frobenius_pi(1)?
                .mul(&a.frobenius_pi(-k)?)?
                .mul(&a.frobenius_pi(-(k + 1))?)?;
            ensure!(lhs.eq_mod(&next, n)?, "recurrence fails at n={k}");
            let reduced: Elem = (-(k + 1)..=(k + 1))
                .map(|j| r.frobenius(&a.reduce_mod_pi(), j * base.e() as i64))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .fold(r.one(), |acc, t| r.mul(&acc, t));
            ensure!(next.reduce_mod_pi() == reduced, "residue of a_{} is not the twisted product of residues", k + 1);
            prev = next;
        }
        let abar = a.reduce_mod_pi();
        for k in -2..=2i64 {
            let lhs = a.frobenius_pi(k)?.reduce_mod_pi();
            ensure!(lhs == r.frobenius(&abar, k * base.e() as i64)?, "F_pi^{k}(a) != a^(q^{k}) mod pi");
        }
        Ok(Outcome::pass("q=3, N=6, a = [x] + pi, n <= 3"))
    }
}

/// `[x] + pi` through the digit-string embedding.
fn embed_sample(base: &Arc<RamifiedBase>, r: &Arc<Ring>, n: usize) -> Result<RamifiedWitt> {
    let f = base.field();
    let terms = vec![
        (vec![f.one()], r.parse_elem("x")?),
        (vec![f.zero(), f.one()], r.one()),
    ];
    ramified::embed_terms(base, r, n, &terms)
}

// ---------------------------------------------------------------------------

/// The two square roots of the sqrt-Frobenius identity and the lift logs.
pub struct SqrtPair {
    pub s: RamifiedWitt,
    pub s_frob: RamifiedWitt,
    pub orders: Vec<Vec<usize>>,
}

pub fn sqrt_pair(prec: usize) -> Result<SqrtPair> {
    let base = RamifiedBase::parse("rb p=3 e=1 E=X^2-3")?;
    let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=6 depth_2=1 laurent=true")?;
    let ev = RwEval { base: &base, ring: &r, prec, allow_x: true };
    let lift = |poly: &str, seed: &str| -> Result<hensel::HenselResult> {
        let coeffs = ev.eval(&parse_expr(poly)?)?;
        let initial = RamifiedWitt::teichmuller(&base, &r, prec, r.parse_elem(seed)?)?;
        hensel::hensel_lift(&HenselProblem { coeffs, initial, prec })
    };
    let a = lift("X^2 - (p + x)", "x^(1/2)")?;
    let b = lift("X^2 - (p + x^3)", "x^(3/2)")?;
    let orders = [&a, &b]
        .iter()
        .map(|h| h.steps.iter().map(|s| s.order).collect())
        .collect();
    Ok(SqrtPair { s: a.root, s_frob: b.root, orders })
}

struct SqrtFrobenius;

impl Check for SqrtFrobenius {
    fn name(&self) -> &'static str {
        "sqrt-frobenius"
    }
    fn claim(&self) -> &'static str {
        "p=3, N=8: F(sqrt(p+x)) = +-sqrt(p+x^p) mod pi^N with doubling Hensel orders, under 10 s"
    }
    fn run(&self, _seed: u64) -> Result<Outcome> {
        let t = Instant::now();
        let n = 8;
        let pair = sqrt_pair(n)?;
        for log in &pair.orders {
            let doubling = log.windows(2).all(|w| w[1] > w[0] && w[1] >= (2 * w[0]).min(n));
            ensure!(doubling, "orders {log:?} do not double");
        }
        let f = pair.s.frobenius_pi(1)?;
        let plus = f.eq_mod(&pair.s_frob, n)?;
        let minus = f.eq_mod(&pair.s_frob.neg()?, n)?;
        ensure!(plus || minus, "F(s) is neither root");
        let secs = t.elapsed().as_secs_f64();
        ensure!(secs < 10.0, "took {secs:.1} s");
        Ok(Outcome::pass(format!(
            "sign {}, orders {:?}",
            if plus { "+" } else { "-" },
            pair.orders
        )))
    }
}

// ---------------------------------------------------------------------------

struct SemiperfectTower;

impl Check for SemiperfectTower {
    fn name(&self) -> &'static str {
        "semiperfect-tower"
    }
    fn claim(&self) -> &'static str {
        "F_p[u]/(u^(p^M)), p^M <= 125: ker Frob = (pi), x mod pi -> x^p iso, roots one level up, (a^p)^p = b mod p"
    }
    fn run(&self, _seed: u64) -> Result<Outcome> {
        let mut done = Vec::new();
        for p in [2u64, 3, 5] {
            for m in 1..=3u32 {
                if p.pow(m) > 125 {
                    continue;
                }
                let r = lab::semiperfect_tower_check(p, m)?;
                ensure!(r.passed(), "p={p} M={m}:\n{}", r.render());
                done.push(format!("{p}^{m}"));
            }
        }
        Ok(Outcome::pass(format!("models {}", done.join(" "))))
    }
}

// ---------------------------------------------------------------------------

struct ReducedNormalization;

impl Check for ReducedNormalization {
    fn name(&self) -> &'static str {
        "reduced-normalization"
    }
    fn claim(&self) -> &'static str {
        "t-presentation mod pi has nilpotent t; x -> u^2, t -> s*u kills t^2 - p*x; u-presentation is reduced"
    }
    fn run(&self, _seed: u64) -> Result<Outcome> {
        let t_side = ring("frac base=(ff p=3 e=1) vars=x,t depth_p=0 depth_2=0 laurent=false mod=t^2")?;
        let witness = desk::reducedness(&t_side)?;
        ensure!(
            witness == Reducedness::Nilpotent(t_side.parse_elem("t")?),
            "expected nilpotent witness t, got {witness:?}"
        );
        // s^2 = p: the uniformizer of X^2 - 3
        let base = RamifiedBase::parse("rb p=3 e=1 E=X^2-3")?;
        let u_side = ring("frac base=(ff p=3 e=1) vars=u depth_p=0 depth_2=0 laurent=false")?;
        let ev = RwEval { base: &base, ring: &u_side, prec: 8, allow_x: false };
        let image = ev.eval_constant(&parse_expr("(pi*u)^2 - p*u^2")?)?;
        ensure!(image.is_zero(), "t^2 - p*x does not map to 0: {}", codec::format_rw(&image));
        ensure!(desk::reducedness(&u_side)? == Reducedness::Reduced, "F_3[u] reported non-reduced");
        let mod_pi = ring("uq base=(ff p=3 e=1) var=t modulus=t^2")?;
        ensure!(
            desk::is_reduced_univariate(&mod_pi)? == Reducedness::Nilpotent(mod_pi.var(0)),
            "F_3[t]/(t^2) not flagged"
        );
        Ok(Outcome::pass("witness t; relation image 0 at N=8; F_3[u] reduced"))
    }
}

// ---------------------------------------------------------------------------

struct DeskCertificates;

fn small_fields() -> Vec<&'static str> {
    vec![
        "ff p=2 e=1",
        "ff p=3 e=1",
        "ff p=2 e=2 modulus=u^2+u+1",
        "ff p=5 e=1",
        "ff p=7 e=1",
        "ff p=2 e=3 modulus=u^3+u+1",
        "ff p=3 e=2 modulus=u^2+1",
    ]
}

impl Check for DeskCertificates {
    fn name(&self) -> &'static str {
        "desk-certificates"
    }
    fn claim(&self) -> &'static str {
        "100 monomial intersections certify membership; squarefree certificates match nilpotent search, deg <= 4, q <= 9"
    }
    fn run(&self, seed: u64) -> Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = ring("frac base=(ff p=3 e=1) vars=x,y,z,w depth_p=0 depth_2=0 laurent=false")?;
        for _ in 0..100 {
            // f in x,y and g in z,w have disjoint supports
            let mono = |rng: &mut ChaCha8Rng, vars: &[usize]| -> Elem {
                let mut e = r.one();
                for &v in vars {
                    e = r.mul(&e, &r.pow(&r.var(v), rng.gen_range(0..3)));
                }
                if e == r.one() { r.var(vars[0]) } else { e }
            };
            let f = mono(&mut rng, &[0, 1]);
            let g = mono(&mut rng, &[2, 3]);
            let h = r.random_elem(&mut rng, 4, 3);
            let (m, n) = (rng.gen_range(0..3), rng.gen_range(0..3));
            let a = r.mul(&h, &r.pow(&f, m as u64));
            let b = r.mul(&h, &r.pow(&g, n as u64));
            let res = desk::intersection_witness(&r, &f, &g, &a, m, &b, n)?;
            ensure!(res == Intersection::Member(h.clone()), "instance h={} gave {res:?}", r.format(&h));
        }
        let mut rings = 0;
        for fdesc in small_fields() {
            let field = ring(fdesc)?;
            let gr = field.coeffs();
            let q = field.q() as usize;
            let elems = gr.elements();
            for deg in 1..=4usize {
                // every monic modulus when there are few, a sample otherwise
                let total = q.pow(deg as u32);
                let picks: Vec<usize> = if total <= 81 {
                    (0..total).collect()
                } else {
                    (0..12).map(|_| rng.gen_range(0..total)).collect()
                };
                for idx in picks {
                    let mut g: Vec<Coef> = (0..deg).map(|i| elems[(idx / q.pow(i as u32)) % q].clone()).collect();
                    g.push(gr.one());
                    let desc_ring = Ring::univariate(&field, "T", g.clone())?;
                    let cert = desk::is_reduced_univariate(&desc_ring)?;
                    let all = desc_ring.elements().expect("finite ring");
                    let nilpotent = all
                        .iter()
                        .find(|h| !h.is_zero() && desc_ring.pow(h, deg as u64).is_zero());
                    match (&cert, nilpotent) {
                        (Reducedness::Reduced, None) => {}
                        (Reducedness::Nilpotent(w), Some(_)) => {
                            ensure!(
                                !w.is_zero() && desc_ring.pow(w, deg as u64).is_zero(),
                                "witness {} is not nilpotent",
                                desc_ring.format(w)
                            );
                        }
                        _ => {
                            return Ok(Outcome::fail(format!(
                                "{}: certificate {cert:?} disagrees with search",
                                desc_ring.descriptor()
                            )))
                        }
                    }
                    rings += 1;
                }
            }
        }
        Ok(Outcome::pass(format!("100 intersections; {rings} quotient rings searched")))
    }
}

// ---------------------------------------------------------------------------

struct FontaineRing;

fn random_compatible(r: &Arc<Ring>, rng: &mut ChaCha8Rng, len: usize) -> Result<FontaineElement> {
    let mut seq = vec![r.random_elem(rng, 3, 3)];
    for _ in 1..len {
        let top = seq[0].clone();
        seq.insert(0, r.pow(&top, r.p()));
    }
    FontaineElement::new(r, seq)
}

impl Check for FontaineRing {
    fn name(&self) -> &'static str {
        "fontaine-ring"
    }
    fn claim(&self) -> &'static str {
        "compatible sequences over F_p[u]/(u^(p^M)) form a ring componentwise; shifts invert up to one term"
    }
    fn run(&self, seed: u64) -> Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = 0;
        for (p, m) in [(2u64, 2u32), (2, 3), (3, 1), (3, 2), (5, 1)] {
            let r = lab::tower_model(p, m)?;
            let len = m as usize + 2;
            let zero = FontaineElement::constant(&r, &r.zero(), len)?;
            let one = FontaineElement::constant(&r, &r.one(), len)?;
            for _ in 0..50 {
                let a = random_compatible(&r, &mut rng, len)?;
                let b = random_compatible(&r, &mut rng, len)?;
                let c = random_compatible(&r, &mut rng, len)?;
                let sum = a.add(&b)?;
                let prod = a.mul(&b)?;
                FontaineElement::new(&r, sum.seq().to_vec())?;
                FontaineElement::new(&r, prod.seq().to_vec())?;
                ensure!(a.add(&zero)? == a && a.mul(&one)? == a, "identities");
                ensure!(a.add(&a.neg())? == zero, "additive inverse");
                ensure!(sum == b.add(&a)? && prod == b.mul(&a)?, "commutativity");
                ensure!(sum.add(&c)? == a.add(&b.add(&c)?)?, "additive associativity");
                ensure!(prod.mul(&c)? == a.mul(&b.mul(&c)?)?, "multiplicative associativity");
                ensure!(a.mul(&b.add(&c)?)? == prod.add(&a.mul(&c)?)?, "distributivity");
                let back = a.shift_forward()?.shift_backward();
                ensure!(back == a.truncate(len - 1)?, "shift forward then backward");
                let fwd = a.shift_backward().shift_forward()?;
                ensure!(fwd == a.truncate(len - 1)?, "shift backward then forward");
                samples += 1;
            }
        }
        Ok(Outcome::pass(format!("{samples} random triples over 5 models")))
    }
}

// ---------------------------------------------------------------------------

struct DeterminismCodecs;

impl Check for DeterminismCodecs {
    fn name(&self) -> &'static str {
        "determinism-codecs"
    }
    fn claim(&self) -> &'static str {
        "byte-identical reruns; parse(print(v)) = v on 1000 random literals of each kind"
    }
    fn run(&self, seed: u64) -> Result<Outcome> {
        let render = || -> Result<String> {
            let (t, _) = structural::generate(3, Kind::Product, 2, structural::DEFAULT_TERM_BUDGET)?;
            let pair = sqrt_pair(6)?;
            let uq = ring("uq base=(ff p=3 e=1) var=T modulus=T^9")?;
            Ok(format!(
                "{}{}\n{}",
                t.dump(),
                codec::format_digits(&pair.s.digit_expand(6)?),
                lab::perfection_report(&uq, 4, seed).render()
            ))
        };
        ensure!(render()? == render()?, "reruns differ");

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rings: Vec<Arc<Ring>> = [
            "ff p=2 e=2 modulus=u^2+u+1",
            "frac base=(ff p=3 e=1) vars=x,y depth_p=2 depth_2=1 laurent=true",
            "frac base=(ff p=3 e=2 modulus=u^2+1) vars=x depth_p=1 depth_2=0 laurent=false",
            "uq base=(ff p=2 e=1) var=T modulus=T^4+T+1",
        ]
        .iter()
        .map(|s| ring(s))
        .collect::<Result<_>>()?;
        let base = RamifiedBase::parse("rb p=3 e=1 E=X^2-3")?;
        let rw_ring = ring("frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=1 laurent=true")?;
        let font_ring = lab::tower_model(3, 2)?;
        for i in 0..1000 {
            let r = &rings[i % rings.len()];
            let x = r.random_elem(&mut rng, 4, 2);
            ensure!(r.parse_elem(&r.format(&x))? == x, "element {}", r.format(&x));
            let w = random_witt(r, &mut rng, 1 + i % 4, 3, 2);
            ensure!(codec::parse_witt(r, &codec::format_witt(&w))? == w, "Witt {}", codec::format_witt(&w));
            ensure!(codec::parse_witt(r, &codec::format_witt_full(&w))? == w, "Witt {}", codec::format_witt_full(&w));
            let prec = 1 + i % 6;
            let y = random_rw(&base, &rw_ring, prec, &mut rng, 2, false)?;
            ensure!(codec::parse_rw(&rw_ring, None, &codec::format_rw(&y))? == y, "RW {}", codec::format_rw(&y));
            let d = ramified::DigitExpansion {
                ring: rw_ring.clone(),
                digits: (0..prec).map(|_| rw_ring.random_elem(&mut rng, 2, 2)).collect(),
            };
            ensure!(codec::parse_digits(&rw_ring, &codec::format_digits(&d))? == d, "digits {}", codec::format_digits(&d));
            let fe = random_compatible(&font_ring, &mut rng, 1 + i % 4)?;
            ensure!(
                codec::parse_fontaine(&font_ring, &codec::format_fontaine(&fe))? == fe,
                "Fontaine {}",
                codec::format_fontaine(&fe)
            );
        }
        Ok(Outcome::pass("reruns identical; 1000 literals of each of 5 kinds"))
    }
}
