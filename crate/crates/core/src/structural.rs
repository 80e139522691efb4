//! Structural Witt polynomials `S_n` (sum), `P_n` (product) and `I_n`
//! (negation), generated by the ghost recursion
//!
//! ```text
//! T_n = (target_n - sum_{j<n} p^j T_j^{p^(n-j)}) / p^n
//! ```
//!
//! where `target_n` is `w_n(X) + w_n(Y)`, `w_n(X) w_n(Y)` or `-w_n(X)`.
//! Every division must be exact; a remainder is reported as
//! [`Error::IntegralityViolation`].
//!
//! Variables are ordered `X_0, Y_0, X_1, Y_1, ...`. Tables are memoized per
//! process and optionally cached on disk as their text dump.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ghost;
use crate::intpoly::{IntPoly, Layout};

pub const DEFAULT_MAX_LEVEL: usize = 6;
pub const DEFAULT_TERM_BUDGET: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Sum,
    Product,
    Negation,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Sum => "sum",
            Kind::Product => "product",
            Kind::Negation => "negation",
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Kind::Sum => 'S',
            Kind::Product => 'P',
            Kind::Negation => 'I',
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        match s {
            "sum" => Ok(Kind::Sum),
            "product" | "prod" => Ok(Kind::Product),
            "negation" | "neg" => Ok(Kind::Negation),
            _ => Err(Error::parse(s, "expected sum, product or negation")),
        }
    }

    pub const ALL: [Kind; 3] = [Kind::Sum, Kind::Product, Kind::Negation];
}

/// `X_0, Y_0, X_1, Y_1, ...` up to `level`.
pub fn var_names(level: usize) -> Vec<String> {
    (0..=level)
        .flat_map(|j| [format!("X_{j}"), format!("Y_{j}")])
        .collect()
}

pub fn layout_for(p: u64, level: usize) -> Result<Layout> {
    let max_deg = p
        .checked_pow(level as u32)
        .ok_or(Error::LevelTooLarge { level, max: level })?;
    Layout::new(2 * (level + 1), max_deg).ok_or(Error::TermBudgetExceeded {
        terms: u128::MAX,
        budget: 0,
    })
}

/// A structural polynomial table `T_0 .. T_level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub p: u64,
    pub kind: Kind,
    pub layout: Layout,
    pub polys: Vec<IntPoly>,
}

impl Table {
    pub fn level(&self) -> usize {
        self.polys.len() - 1
    }

    /// Polynomial `i` with coefficients reduced mod `m`.
    pub fn reduced(&self, i: usize, m: u64) -> Vec<(u128, u64)> {
        self.polys[i].reduce_mod(m)
    }

    /// Text dump, one `T_i = ...` line per level.
    pub fn dump(&self) -> String {
        let names = var_names(self.level());
        let mut out = String::new();
        for (i, poly) in self.polys.iter().enumerate() {
            out.push_str(&format!("{}_{} = {}\n", self.kind.symbol(), i, poly.format(&names)));
        }
        out
    }

    pub fn parse_dump(p: u64, kind: Kind, text: &str) -> Result<Table> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if lines.is_empty() {
            return Err(Error::parse("<empty>", "empty table dump"));
        }
        let level = lines.len() - 1;
        let layout = layout_for(p, level)?;
        let names = var_names(level);
        let mut polys = Vec::new();
        for (i, line) in lines.iter().enumerate() {
            let head = format!("{}_{} = ", kind.symbol(), i);
            let body = line
                .strip_prefix(&head)
                .ok_or_else(|| Error::parse(*line, format!("expected `{head}`")))?;
            polys.push(IntPoly::parse(layout, &names, body)?);
        }
        Ok(Table {
            p,
            kind,
            layout,
            polys,
        })
    }

    /// Exact check of the ghost identity at every level by full expansion.
    pub fn verify(&self, budget: usize) -> Result<()> {
        let p = self.p;
        let mut powers: Vec<IntPoly> = Vec::new();
        for n in 0..self.polys.len() {
            for pw in powers.iter_mut() {
                *pw = pw.pow(p, budget)?;
            }
            powers.push(self.polys[n].clone());
            let mut lhs = IntPoly::zero(self.layout);
            for (j, pw) in powers.iter().enumerate() {
                lhs.add_assign_scaled(pw, &BigInt::from(p).pow(j as u32));
            }
            if lhs != target(self.layout, p, self.kind, n, budget)? {
                return Err(Error::IntegralityViolation { level: n });
            }
        }
        Ok(())
    }

    /// Checks the ghost identity exactly at `samples` random integer points.
    pub fn spot_check(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.polys.len();
        for _ in 0..samples {
            let x: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect();
            let y: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect();
            let point: Vec<BigInt> = (0..n).flat_map(|j| [x[j].clone(), y[j].clone()]).collect();
            let vals: Vec<BigInt> = self.polys.iter().map(|t| t.eval(&point)).collect();
            let gv = ghost::ghost(self.p, &vals);
            let gx = ghost::ghost(self.p, &x);
            let gy = ghost::ghost(self.p, &y);
            for i in 0..n {
                let expected = match self.kind {
                    Kind::Sum => &gx[i] + &gy[i],
                    Kind::Product => &gx[i] * &gy[i],
                    Kind::Negation => -gx[i].clone(),
                };
                if gv[i] != expected {
                    return Err(Error::IntegralityViolation { level: i });
                }
            }
        }
        Ok(())
    }
}

/// `w_n` of the variables at offset 0 (`X`) or 1 (`Y`).
fn witt_ghost(layout: Layout, p: u64, n: usize, offset: usize) -> IntPoly {
    let mut g = IntPoly::zero(layout);
    for j in 0..=n {
        g.add_assign_scaled(
            &IntPoly::monomial(layout, 2 * j + offset, p.pow((n - j) as u32), BigInt::one()),
            &BigInt::from(p).pow(j as u32),
        );
    }
    g
}

fn target(layout: Layout, p: u64, kind: Kind, n: usize, budget: usize) -> Result<IntPoly> {
    let wx = witt_ghost(layout, p, n, 0);
    Ok(match kind {
        Kind::Sum => wx.add(&witt_ghost(layout, p, n, 1)),
        Kind::Product => wx.mul(&witt_ghost(layout, p, n, 1), budget)?,
        Kind::Negation => wx.neg(),
    })
}

/// Number of monomials of weighted degree `p^level` (weight of `X_j` is
/// `p^j`): an upper bound for the term count of the level's polynomial.
pub fn estimate_terms(p: u64, kind: Kind, level: usize) -> u128 {
    let d = match p.checked_pow(level as u32) {
        Some(d) if d < 1 << 24 => d as usize,
        _ => return u128::MAX,
    };
    let count = |copies: usize| -> u128 {
        let mut ways = vec![0u128; d + 1];
        ways[0] = 1;
        for j in 0..=level {
            let w = p.pow(j as u32) as usize;
            for _ in 0..copies {
                for s in w..=d {
                    ways[s] = ways[s].saturating_add(ways[s - w]);
                }
            }
        }
        ways[d]
    };
    match kind {
        Kind::Sum => count(2),
        Kind::Product => count(1).saturating_mul(count(1)),
        Kind::Negation => count(1),
    }
}

/// Per-level generation telemetry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelStats {
    pub level: usize,
    pub terms: usize,
    pub max_coef_bits: u64,
    pub millis: u128,
}

/// Generates `T_0 .. T_level` from scratch.
pub fn generate(p: u64, kind: Kind, level: usize, budget: usize) -> Result<(Table, Vec<LevelStats>)> {
    for n in 0..=level {
        let est = estimate_terms(p, kind, n);
        if est > budget as u128 {
            return Err(Error::TermBudgetExceeded { terms: est, budget });
        }
    }
    let layout = layout_for(p, level)?;
    let mut polys: Vec<IntPoly> = Vec::new();
    // powers[j] = T_j^{p^{n-1-j}} while building level n
    let mut powers: Vec<IntPoly> = Vec::new();
    let mut stats = Vec::new();
    for n in 0..=level {
        let start = Instant::now();
        for pw in powers.iter_mut() {
            *pw = pw.pow(p, budget)?;
        }
        let mut rest = target(layout, p, kind, n, budget)?;
        for (j, pw) in powers.iter().enumerate() {
            rest.add_assign_scaled(pw, &-BigInt::from(p).pow(j as u32));
        }
        let t = rest
            .div_exact(&BigInt::from(p).pow(n as u32))
            .ok_or(Error::IntegralityViolation { level: n })?;
        stats.push(LevelStats {
            level: n,
            terms: t.num_terms(),
            max_coef_bits: t.max_coef_bits(),
            millis: start.elapsed().as_millis(),
        });
        powers.push(t.clone());
        polys.push(t);
    }
    Ok((
        Table {
            p,
            kind,
            layout,
            polys,
        },
        stats,
    ))
}

/// Where and how tables are obtained.
#[derive(Clone, Debug)]
pub struct StoreConfig {
    pub max_level: usize,
    pub term_budget: usize,
    pub cache_dir: Option<PathBuf>,
    pub use_cache: bool,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            max_level: DEFAULT_MAX_LEVEL,
            term_budget: DEFAULT_TERM_BUDGET,
            cache_dir: std::env::var_os("WITTFORGE_CACHE").map(PathBuf::from),
            use_cache: true,
        }
    }
}

static GLOBAL_STORE: OnceLock<TableStore> = OnceLock::new();

/// Memo table of generated structural polynomials.
///
/// Concurrent requests may generate the same table twice; both results are
/// identical and the later insert wins.
#[derive(Debug)]
pub struct TableStore {
    config: StoreConfig,
    memo: Mutex<HashMap<(u64, Kind), Arc<Table>>>,
}

impl TableStore {
    pub fn new(config: StoreConfig) -> Self {
        TableStore {
            config,
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// The process-wide store with configuration from the environment.
    pub fn global() -> &'static TableStore {
        GLOBAL_STORE.get_or_init(|| TableStore::new(StoreConfig::default()))
    }

    /// Installs the configuration of the global store. Fails once the store
    /// has been used.
    pub fn configure_global(config: StoreConfig) -> Result<()> {
        GLOBAL_STORE
            .set(TableStore::new(config))
            .map_err(|_| Error::Mismatch("table store already initialized".into()))
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    /// A table covering at least `level`.
    pub fn get(&self, p: u64, kind: Kind, level: usize) -> Result<Arc<Table>> {
        if level > self.config.max_level {
            return Err(Error::LevelTooLarge {
                level,
                max: self.config.max_level,
            });
        }
        if let Some(t) = self.memo.lock().unwrap().get(&(p, kind)) {
            if t.level() >= level {
                return Ok(t.clone());
            }
        }
        let table = match self.load(p, kind, level) {
            Some(t) => t,
            None => {
                let (t, _) = generate(p, kind, level, self.config.term_budget)?;
                self.store(&t);
                t
            }
        };
        let table = Arc::new(table);
        self.memo.lock().unwrap().insert((p, kind), table.clone());
        Ok(table)
    }

    fn cache_path(dir: &Path, p: u64, kind: Kind, level: usize) -> PathBuf {
        dir.join(format!("{}-p{}-L{}.txt", kind.name(), p, level))
    }

    fn load(&self, p: u64, kind: Kind, level: usize) -> Option<Table> {
        if !self.config.use_cache {
            return None;
        }
        let dir = self.config.cache_dir.as_ref()?;
        let text = std::fs::read_to_string(Self::cache_path(dir, p, kind, level)).ok()?;
        let table = Table::parse_dump(p, kind, &text).ok()?;
        (table.level() == level && table.spot_check(8, 0x5eed).is_ok()).then_some(table)
    }

    fn store(&self, t: &Table) {
        let Some(dir) = self.config.cache_dir.as_ref() else {
            return;
        };
        // cache write failures only cost a regeneration later
        let _ = std::fs::create_dir_all(dir);
        let path = Self::cache_path(dir, t.p, t.kind, t.level());
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        if std::fs::write(&tmp, t.dump()).is_ok() {
            let _ = std::fs::rename(&tmp, &path);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_level1_tables() {
        let (s, _) = generate(2, Kind::Sum, 1, 1000).unwrap();
        assert_eq!(s.dump(), "S_0 = X_0 + Y_0\nS_1 = -X_0*Y_0 + X_1 + Y_1\n");
        let (p, _) = generate(2, Kind::Product, 1, 1000).unwrap();
        assert_eq!(
            p.dump(),
            "P_0 = X_0*Y_0\nP_1 = X_0^2*Y_1 + Y_0^2*X_1 + 2*X_1*Y_1\n"
        );
        let (n, _) = generate(5, Kind::Negation, 0, 1000).unwrap();
        assert_eq!(n.dump(), "I_0 = -X_0\n");
    }

    #[test]
    fn negation_at_two_differs_from_minus_one() {
        let (n, _) = generate(2, Kind::Negation, 1, 1000).unwrap();
        // over Z, -(1, 0) = (-1, -1): I_1 = -X_0^2 - X_1
        let v = n.polys[1].eval(&[BigInt::from(1), BigInt::from(0), BigInt::from(0), BigInt::from(0)]);
        assert_eq!(v, BigInt::from(-1));
    }

    #[test]
    fn dump_round_trip_and_verification() {
        for kind in Kind::ALL {
            let (t, stats) = generate(3, kind, 2, 100_000).unwrap();
            assert_eq!(stats.len(), 3);
            let back = Table::parse_dump(3, kind, &t.dump()).unwrap();
            assert_eq!(back, t);
            back.verify(1_000_000).unwrap();
            back.spot_check(4, 1).unwrap();
        }
    }

    #[test]
    fn corrupted_table_is_detected() {
        let (mut t, _) = generate(2, Kind::Sum, 2, 100_000).unwrap();
        let one = IntPoly::constant(t.layout, BigInt::one());
        t.polys[2] = t.polys[2].add(&one);
        assert!(matches!(t.verify(1_000_000), Err(Error::IntegralityViolation { level: 2 })));
        assert!(t.spot_check(4, 1).is_err());
    }

    #[test]
    fn estimates_bound_actual_counts() {
        for p in [2, 3] {
            for kind in Kind::ALL {
                let (t, _) = generate(p, kind, 3, 1_000_000).unwrap();
                for (i, poly) in t.polys.iter().enumerate() {
                    assert!(poly.num_terms() as u128 <= estimate_terms(p, kind, i));
                }
            }
        }
        assert!(matches!(
            generate(5, Kind::Sum, 4, DEFAULT_TERM_BUDGET),
            Err(Error::TermBudgetExceeded { .. })
        ));
    }

    #[test]
    fn disk_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = TableStore::new(StoreConfig {
            cache_dir: Some(dir.path().to_path_buf()),
            ..StoreConfig::default()
        });
        let a = store.get(3, Kind::Product, 2).unwrap();
        let fresh = TableStore::new(StoreConfig {
            cache_dir: Some(dir.path().to_path_buf()),
            ..StoreConfig::default()
        });
        assert!(fresh.load(3, Kind::Product, 2).is_some());
        assert_eq!(*fresh.get(3, Kind::Product, 2).unwrap(), *a);
        // rot the file; the loader must reject it
        let path = TableStore::cache_path(dir.path(), 3, Kind::Product, 2);
        let text = std::fs::read_to_string(&path).unwrap().replace("P_1 = ", "P_1 = 1 + ");
        std::fs::write(&path, text).unwrap();
        assert!(fresh.load(3, Kind::Product, 2).is_none());
        assert!(matches!(store.get(3, Kind::Sum, 9), Err(Error::LevelTooLarge { .. })));
    }
}
