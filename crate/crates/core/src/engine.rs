//! Interchangeable strategies for the three Witt ring operations.
//!
//! * `structural` evaluates the mod-`p` reduced structural polynomials on
//!   the coordinates.
//! * `ghost-lift` lifts coordinates to the torsion-free ring over
//!   `GR(p^n, e)`, works in ghost components and peels coordinates back off
//!   one `p`-adic digit at a time.
//! * `auto` picks `structural` while the tables are small and `ghost-lift`
//!   beyond that.
//!
//! Engines are registered by name and selected at runtime.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::intpoly::Layout;
use crate::ring::{Elem, Ring};
use crate::structural::{self, Kind, TableStore};

pub trait WittEngine: Send + Sync {
    fn name(&self) -> &'static str;
    fn add(&self, ring: &Ring, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>>;
    fn mul(&self, ring: &Ring, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>>;
    fn neg(&self, ring: &Ring, x: &[Elem]) -> Result<Vec<Elem>>;
}

/// Names accepted by [`engine`].
pub fn engine_names() -> Vec<&'static str> {
    registry().iter().map(|e| e.name()).collect()
}

/// Looks up a registered engine by name.
pub fn engine(name: &str) -> Result<Arc<dyn WittEngine>> {
    registry()
        .iter()
        .find(|e| e.name() == name)
        .cloned()
        .ok_or_else(|| {
            Error::parse(
                name,
                format!("unknown engine; expected one of {}", engine_names().join(", ")),
            )
        })
}

/// The engine used when none is named.
pub fn default_engine() -> Arc<dyn WittEngine> {
    engine("auto").expect("auto engine is registered")
}

fn registry() -> &'static [Arc<dyn WittEngine>] {
    static REG: OnceLock<Vec<Arc<dyn WittEngine>>> = OnceLock::new();
    REG.get_or_init(|| {
        vec![
            Arc::new(AutoEngine) as Arc<dyn WittEngine>,
            Arc::new(StructuralEngine::new(TableStore::global())),
            Arc::new(GhostLiftEngine),
        ]
    })
}

// ---------------------------------------------------------------------------

type Reduced = Arc<(Layout, Vec<(u128, u64)>)>;

pub struct StructuralEngine {
    store: &'static TableStore,
    reduced: Mutex<HashMap<(u64, Kind, usize), Reduced>>,
}

impl StructuralEngine {
    pub fn new(store: &'static TableStore) -> Self {
        StructuralEngine {
            store,
            reduced: Mutex::new(HashMap::new()),
        }
    }

    fn poly(&self, p: u64, kind: Kind, i: usize, n: usize) -> Result<Reduced> {
        if let Some(r) = self.reduced.lock().unwrap().get(&(p, kind, i)) {
            return Ok(r.clone());
        }
        let table = self.store.get(p, kind, n - 1)?;
        let r = Arc::new((table.layout, table.reduced(i, p)));
        self.reduced.lock().unwrap().insert((p, kind, i), r.clone());
        Ok(r)
    }

    fn apply(&self, ring: &Ring, kind: Kind, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>> {
        let n = x.len();
        let p = ring.p();
        // powers[v] caches coordinate v raised to each exponent seen
        let mut powers: Vec<HashMap<u64, Elem>> = vec![HashMap::new(); 2 * n];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let red = self.poly(p, kind, i, n)?;
            let (layout, terms) = (&red.0, &red.1);
            let mut acc = ring.zero();
            for (key, c) in terms {
                let mut mono = ring.one();
                for v in 0..2 * (i + 1) {
                    let e = layout.exp(*key, v);
                    if e == 0 {
                        continue;
                    }
                    let base = if v % 2 == 0 { &x[v / 2] } else { &y[v / 2] };
                    let f = powers[v].entry(e).or_insert_with(|| ring.pow(base, e));
                    mono = ring.mul(&mono, f);
                    if mono.is_zero() {
                        break;
                    }
                }
                acc = ring.add(&acc, &ring.scale_int(&mono, *c as i64));
            }
            out.push(acc);
        }
        Ok(out)
    }
}

impl WittEngine for StructuralEngine {
    fn name(&self) -> &'static str {
        "structural"
    }
    fn add(&self, ring: &Ring, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>> {
        self.apply(ring, Kind::Sum, x, y)
    }
    fn mul(&self, ring: &Ring, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>> {
        self.apply(ring, Kind::Product, x, y)
    }
    fn neg(&self, ring: &Ring, x: &[Elem]) -> Result<Vec<Elem>> {
        let zeros = vec![ring.zero(); x.len()];
        self.apply(ring, Kind::Negation, x, &zeros)
    }
}

// ---------------------------------------------------------------------------

pub struct GhostLiftEngine;

impl GhostLiftEngine {
    /// Ghost components of the canonical lift of `x`, in `lift`.
    fn ghost(lift: &Ring, x: &[Elem]) -> Vec<Elem> {
        let n = x.len();
        let p = lift.p();
        let mut out = vec![lift.zero(); n];
        for (j, xj) in x.iter().enumerate() {
            let mut pw = xj.clone();
            for (k, slot) in out.iter_mut().enumerate().skip(j) {
                if k > j {
                    pw = lift.pow(&pw, p);
                }
                *slot = lift.add(slot, &lift.mul_pow_p(&pw, j as u32));
            }
        }
        out
    }

    /// Recovers coordinates from ghost components known mod `p^n`.
    fn unghost(ring: &Ring, lift: &Ring, g: &[Elem]) -> Result<Vec<Elem>> {
        let n = g.len();
        let p = lift.p();
        let mut rest: Vec<Elem> = g.to_vec();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let z = lift
                .div_pow_p_mod_p(&rest[k], k as u32)
                .ok_or(Error::IntegralityViolation { level: k })?;
            // subtract p^k z^{p^{m-k}} from the later components
            let mut pw = z.clone();
            for slot in rest.iter_mut().skip(k + 1) {
                pw = lift.pow(&pw, p);
                *slot = lift.sub(slot, &lift.mul_pow_p(&pw, k as u32));
            }
            out.push(ring.reinterpret(&z));
        }
        Ok(out)
    }

    fn run(
        &self,
        ring: &Ring,
        x: &[Elem],
        y: Option<&[Elem]>,
        op: impl Fn(&Ring, &Elem, Option<&Elem>) -> Elem,
    ) -> Result<Vec<Elem>> {
        let n = x.len();
        let lift = ring.lift(n as u32);
        let gx = Self::ghost(&lift, x);
        let gy = y.map(|y| Self::ghost(&lift, y));
        let g: Vec<Elem> = (0..n)
            .map(|i| op(&lift, &gx[i], gy.as_ref().map(|v| &v[i])))
            .collect();
        Self::unghost(ring, &lift, &g)
    }
}

impl WittEngine for GhostLiftEngine {
    fn name(&self) -> &'static str {
        "ghost-lift"
    }
    fn add(&self, ring: &Ring, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>> {
        self.run(ring, x, Some(y), |l, a, b| l.add(a, b.unwrap()))
    }
    fn mul(&self, ring: &Ring, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>> {
        self.run(ring, x, Some(y), |l, a, b| l.mul(a, b.unwrap()))
    }
    fn neg(&self, ring: &Ring, x: &[Elem]) -> Result<Vec<Elem>> {
        self.run(ring, x, None, |l, a, _| l.neg(a))
    }
}

// ---------------------------------------------------------------------------

/// Largest estimated table size for which `auto` evaluates structural
/// polynomials directly.
pub const AUTO_STRUCTURAL_LIMIT: u128 = 2000;

pub struct AutoEngine;

impl AutoEngine {
    fn pick(ring: &Ring, kind: Kind, n: usize) -> Arc<dyn WittEngine> {
        let name = if structural::estimate_terms(ring.p(), kind, n - 1) <= AUTO_STRUCTURAL_LIMIT {
            "structural"
        } else {
            "ghost-lift"
        };
        engine(name).expect("registered")
    }
}

impl WittEngine for AutoEngine {
    fn name(&self) -> &'static str {
        "auto"
    }
    fn add(&self, ring: &Ring, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>> {
        Self::pick(ring, Kind::Sum, x.len()).add(ring, x, y)
    }
    fn mul(&self, ring: &Ring, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>> {
        Self::pick(ring, Kind::Product, x.len()).mul(ring, x, y)
    }
    fn neg(&self, ring: &Ring, x: &[Elem]) -> Result<Vec<Elem>> {
        Self::pick(ring, Kind::Negation, x.len()).neg(ring, x)
    }
}
