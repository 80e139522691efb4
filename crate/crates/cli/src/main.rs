use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use wittforge::codec;
use wittforge::desk::{self, Reducedness};
use wittforge::engine;
use wittforge::expr::parse_expr;
use wittforge::hensel::{self, HenselProblem};
use wittforge::lab::{self, FontaineElement};
use wittforge::ramified::{self, RamifiedBase, RamifiedWitt, RwEval};
use wittforge::structural::{self, Kind, StoreConfig, Table, TableStore};
use wittforge::verify;
use wittforge::{Error, Ring, WittVector};

/// Truncated Witt vectors, ramified Witt rings and Frobenius experiments.
#[derive(Parser)]
#[command(name = "wittforge", version)]
struct Cli {
    /// Witt arithmetic engine (auto, structural, ghost-lift).
    #[arg(long, global = true, default_value = "auto")]
    engine: String,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = verify::DEFAULT_SEED)]
    seed: u64,
    /// Directory for cached structural tables (falls back to WITTFORGE_CACHE).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Regenerate tables instead of reading the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ring inspection.
    #[command(subcommand)]
    Ring(RingCmd),
    /// Evaluate an element expression in a ring.
    Eval {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        expr: String,
    },
    /// Truncated Witt vector operations.
    Witt {
        #[command(subcommand)]
        op: WittOp,
    },
    /// Structural polynomial tables.
    #[command(subcommand)]
    Poly(PolyCmd),
    /// Ramified Witt vector operations.
    Rw {
        #[command(subcommand)]
        op: RwOp,
    },
    /// Frobenius reports.
    #[command(subcommand)]
    Frob(FrobCmd),
    /// Compatible p-power sequences.
    #[command(subcommand)]
    Fontaine(FontaineCmd),
    /// Root lifting.
    #[command(subcommand)]
    Hensel(HenselCmd),
    /// The verification suite.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Timing harness.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Subcommand)]
enum RingCmd {
    /// Parse a ring descriptor and summarize it.
    Check {
        #[arg(long)]
        ring: String,
    },
}

#[derive(Args)]
struct WittArgs {
    #[arg(long)]
    ring: String,
    /// Truncation length; defaults to the length of the literal.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum WittOp {
    /// Sum of two vectors.
    Add {
        #[command(flatten)]
        w: WittArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Product of two vectors.
    Mul {
        #[command(flatten)]
        w: WittArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Additive inverse.
    Neg {
        #[command(flatten)]
        w: WittArgs,
        #[arg(long)]
        x: String,
    },
    /// Witt Frobenius, `k` times (negative k needs a perfect ring).
    Frob {
        #[command(flatten)]
        w: WittArgs,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i64,
    },
    /// Verschiebung, shifting coordinates up.
    Versch {
        #[command(flatten)]
        w: WittArgs,
        #[arg(long)]
        x: String,
    },
    /// Teichmuller representative of a ring element.
    Teich {
        #[command(flatten)]
        w: WittArgs,
        #[arg(long)]
        a: String,
    },
    /// First coordinate.
    Project {
        #[command(flatten)]
        w: WittArgs,
        #[arg(long)]
        x: String,
    },
    /// Division by p of a vector with vanishing first coordinate.
    Divp {
        #[command(flatten)]
        w: WittArgs,
        #[arg(long)]
        x: String,
    },
}

#[derive(Subcommand)]
enum PolyCmd {
    /// Generate and verify tables, printing them or writing them to `--out`.
    Gen {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = structural::DEFAULT_TERM_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a table through the cache.
    Dump {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        level: usize,
    },
}

#[derive(Args)]
struct RwArgs {
    /// Ramified base, e.g. `rb p=3 e=1 E=X^2-3`.
    #[arg(long)]
    base: String,
    #[arg(long)]
    ring: String,
    /// pi-adic precision for commands that build values.
    #[arg(long)]
    prec: Option<usize>,
}

#[derive(Subcommand)]
enum RwOp {
    /// Sum of two values.
    Add {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Product of two values.
    Mul {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Inverse of a unit.
    Inv {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        x: String,
    },
    /// Apply the q-Frobenius k times.
    Frobpi {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i64,
    },
    /// Image in the residue ring.
    Reduce {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        x: String,
    },
    /// Divide by pi, dropping one digit of precision.
    Divpi {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        x: String,
    },
    /// Teichmuller digit expansion in pi.
    Expand {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        x: String,
        /// Number of digits; defaults to the precision of the value.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Rebuild a value from its digits.
    Assemble {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        digits: String,
    },
    /// Evaluate an expression in pi, p, ring variables and `[a]`.
    Embed {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        expr: String,
    },
    /// The product F_pi^-n(a) ... F_pi^n(a).
    Twist {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum FrobCmd {
    /// Injectivity, surjectivity and kernel of Frobenius on a ring.
    Report {
        #[arg(long)]
        ring: String,
        #[arg(long, default_value_t = 4)]
        budget: u32,
    },
    /// Checks on the model F_p[u]/(u^(p^M)).
    Tower {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        depth: u32,
    },
}

#[derive(Args)]
struct FontArgs {
    #[arg(long)]
    ring: String,
}

#[derive(Subcommand)]
enum FontaineCmd {
    /// The sequence of iterated p-th roots of `a0`.
    Make {
        #[command(flatten)]
        f: FontArgs,
        #[arg(long)]
        a0: String,
        #[arg(long)]
        len: usize,
    },
    /// Termwise sum.
    Add {
        #[command(flatten)]
        f: FontArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Termwise product.
    Mul {
        #[command(flatten)]
        f: FontArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Drop or prepend one term.
    Shift {
        #[command(flatten)]
        f: FontArgs,
        #[arg(long)]
        x: String,
        /// `forward` drops the first term, `backward` prepends its p-th power.
        #[arg(long, default_value = "forward")]
        dir: String,
    },
}

#[derive(Subcommand)]
enum HenselCmd {
    /// Lift a simple root of a polynomial in X from a digit seed.
    Lift {
        #[command(flatten)]
        r: RwArgs,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        seed_digit: String,
    },
    /// Adjoin a root of a monic polynomial over W(F_q) whose derivative
    /// vanishes at the seed.
    Adjoin {
        /// Residue field descriptor.
        #[arg(long)]
        field: String,
        #[arg(long)]
        ring: String,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        seed_digit: String,
        #[arg(long)]
        prec: usize,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Run the named checks.
    Examples {
        /// Substring of a check name or claim.
        #[arg(long)]
        filter: Option<String>,
        /// Append elapsed time to each line.
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Per-level generation statistics.
    Poly {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value = "sum")]
        kind: String,
        #[arg(long, default_value_t = structural::DEFAULT_TERM_BUDGET)]
        budget: usize,
    },
}

/// What a command produced: text for stdout and whether a verification
/// inside it failed.
struct Output {
    text: String,
    failed: bool,
}

impl From<String> for Output {
    fn from(text: String) -> Self {
        Output { text, failed: false }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_exhaustion() {
        3
    } else {
        match e {
            Error::IntegralityViolation { .. }
            | Error::RelationViolated(_)
            | Error::NoConvergence(_)
            | Error::Io(_) => 1,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.failed { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> wittforge::Result<Output> {
    let mut config = StoreConfig::default();
    if cli.cache_dir.is_some() {
        config.cache_dir = cli.cache_dir.clone();
    }
    config.use_cache = !cli.no_cache;
    TableStore::configure_global(config)?;
    let eng = engine::engine(&cli.engine)?;
    let seed = cli.seed;

    match cli.cmd {
        Cmd::Ring(RingCmd::Check { ring }) => ring_check(&ring).map(Output::from),
        Cmd::Eval { ring, expr } => {
            let r = Ring::parse(&ring)?;
            Ok(format!("{}\n", r.format(&r.parse_elem(&expr)?)).into())
        }
        Cmd::Witt { op } => witt(op, eng.as_ref()).map(Output::from),
        Cmd::Poly(cmd) => poly(cmd).map(Output::from),
        Cmd::Rw { op } => rw(op).map(Output::from),
        Cmd::Frob(FrobCmd::Report { ring, budget }) => {
            let r = Ring::parse(&ring)?;
            let rep = lab::perfection_report(&r, budget, seed);
            Ok(Output {
                text: format!("SEED: {seed}\n{}", rep.render()),
                failed: !rep.verified,
            })
        }
        Cmd::Frob(FrobCmd::Tower { p, depth }) => {
            let rep = lab::semiperfect_tower_check(p, depth)?;
            Ok(Output { text: rep.render(), failed: !rep.passed() })
        }
        Cmd::Fontaine(cmd) => fontaine(cmd).map(Output::from),
        Cmd::Hensel(cmd) => hensel_cmd(cmd).map(Output::from),
        Cmd::Verify(VerifyCmd::Examples { filter, timings }) => {
            let rep = verify::run_suite(filter.as_deref(), seed);
            Ok(Output { text: rep.render(timings), failed: !rep.passed() })
        }
        Cmd::Bench(BenchCmd::Poly { p, level, kind, budget }) => {
            let kind = Kind::parse(&kind)?;
            let t = Instant::now();
            let (_, stats) = structural::generate(p, kind, level, budget)?;
            let mut s = String::new();
            for st in stats {
                s += &format!(
                    "BENCH p={p} kind={} level={} terms={} max_coef_bits={} millis={}\n",
                    kind.name(),
                    st.level,
                    st.terms,
                    st.max_coef_bits,
                    st.millis
                );
            }
            s += &format!("TOTAL millis={}\n", t.elapsed().as_millis());
            Ok(s.into())
        }
    }
}

fn ring_check(desc: &str) -> wittforge::Result<String> {
    let r = Ring::parse(desc)?;
    let reduced = match desk::reducedness(&r) {
        Ok(Reducedness::Reduced) => "yes".to_string(),
        Ok(Reducedness::Nilpotent(w)) => format!("no (nilpotent {})", r.format(&w)),
        Err(_) => "unknown".to_string(),
    };
    Ok(format!(
        "RING: {}\nP: {}\nQ: {}\nVARIABLES: {}\nDOMAIN: {}\nREDUCED: {}\n",
        r.descriptor(),
        r.p(),
        r.q(),
        r.var_names().join(","),
        r.is_domain(),
        reduced
    ))
}

fn witt_input(ring: &Arc<Ring>, n: Option<usize>, lit: &str) -> wittforge::Result<WittVector> {
    let w = codec::parse_witt(ring, lit)?;
    match n {
        Some(n) if n < w.len() => w.truncate(n),
        Some(n) => Ok(w.extend(n)),
        None => Ok(w),
    }
}

fn witt(op: WittOp, eng: &dyn engine::WittEngine) -> wittforge::Result<String> {
    let line = |w: WittVector| format!("{}\n", codec::format_witt(&w));
    let ctx = |a: &WittArgs| -> wittforge::Result<Arc<Ring>> { Ring::parse(&a.ring) };
    match op {
        WittOp::Add { w, x, y } => {
            let r = ctx(&w)?;
            Ok(line(witt_input(&r, w.n, &x)?.add_with(&witt_input(&r, w.n, &y)?, eng)?))
        }
        WittOp::Mul { w, x, y } => {
            let r = ctx(&w)?;
            Ok(line(witt_input(&r, w.n, &x)?.mul_with(&witt_input(&r, w.n, &y)?, eng)?))
        }
        WittOp::Neg { w, x } => {
            let r = ctx(&w)?;
            Ok(line(witt_input(&r, w.n, &x)?.neg_with(eng)?))
        }
        WittOp::Frob { w, x, k } => {
            let r = ctx(&w)?;
            Ok(line(witt_input(&r, w.n, &x)?.frobenius_pow(k)?))
        }
        WittOp::Versch { w, x } => {
            let r = ctx(&w)?;
            Ok(line(witt_input(&r, w.n, &x)?.verschiebung()))
        }
        WittOp::Teich { w, a } => {
            let r = ctx(&w)?;
            let n = w.n.ok_or_else(|| Error::Mismatch("teich needs --n".into()))?;
            Ok(line(WittVector::teichmuller(&r, r.parse_elem(&a)?, n)))
        }
        WittOp::Project { w, x } => {
            let r = ctx(&w)?;
            Ok(format!("{}\n", r.format(&witt_input(&r, w.n, &x)?.project())))
        }
        WittOp::Divp { w, x } => {
            let r = ctx(&w)?;
            Ok(line(witt_input(&r, w.n, &x)?.divide_by_p()?))
        }
    }
}

fn poly(cmd: PolyCmd) -> wittforge::Result<String> {
    match cmd {
        PolyCmd::Gen { p, kind, level, budget, out } => {
            let kinds = if kind == "all" { Kind::ALL.to_vec() } else { vec![Kind::parse(&kind)?] };
            let mut s = String::new();
            for kind in kinds {
                let (table, _) = structural::generate(p, kind, level, budget)?;
                table.verify(budget.saturating_mul(25))?;
                match &out {
                    Some(dir) => {
                        std::fs::create_dir_all(dir)?;
                        let path = dir.join(format!("{}-p{p}-L{level}.txt", kind.name()));
                        std::fs::write(&path, table.dump())?;
                        s += &format!("WROTE {}\n", path.display());
                    }
                    None => s += &table.dump(),
                }
            }
            Ok(s)
        }
        PolyCmd::Dump { p, kind, level } => {
            let table: Arc<Table> = TableStore::global().get(p, Kind::parse(&kind)?, level)?;
            // the store may hold a deeper table than asked for
            Ok(table.dump().lines().take(level + 1).map(|l| format!("{l}\n")).collect())
        }
    }
}

struct RwCtx {
    base: Arc<RamifiedBase>,
    ring: Arc<Ring>,
    prec: Option<usize>,
}

impl RwCtx {
    fn new(a: &RwArgs) -> wittforge::Result<Self> {
        Ok(RwCtx { base: RamifiedBase::parse(&a.base)?, ring: Ring::parse(&a.ring)?, prec: a.prec })
    }
    fn value(&self, lit: &str) -> wittforge::Result<RamifiedWitt> {
        let x = codec::parse_rw(&self.ring, Some(&self.base), lit)?;
        match self.prec {
            Some(n) => x.with_prec(n),
            None => Ok(x),
        }
    }
    fn prec(&self) -> wittforge::Result<usize> {
        self.prec.ok_or_else(|| Error::Mismatch("this command needs --prec".into()))
    }
}

fn rw(op: RwOp) -> wittforge::Result<String> {
    let line = |x: RamifiedWitt| format!("{}\n", codec::format_rw(&x));
    match op {
        RwOp::Add { r, x, y } => {
            let c = RwCtx::new(&r)?;
            Ok(line(c.value(&x)?.add(&c.value(&y)?)?))
        }
        RwOp::Mul { r, x, y } => {
            let c = RwCtx::new(&r)?;
            Ok(line(c.value(&x)?.mul(&c.value(&y)?)?))
        }
        RwOp::Inv { r, x } => Ok(line(RwCtx::new(&r)?.value(&x)?.inv()?)),
        RwOp::Frobpi { r, x, k } => Ok(line(RwCtx::new(&r)?.value(&x)?.frobenius_pi(k)?)),
        RwOp::Reduce { r, x } => {
            let c = RwCtx::new(&r)?;
            Ok(format!("{}\n", c.ring.format(&c.value(&x)?.reduce_mod_pi())))
        }
        RwOp::Divpi { r, x } => Ok(line(RwCtx::new(&r)?.value(&x)?.divide_by_pi()?)),
        RwOp::Expand { r, x, m } => {
            let v = RwCtx::new(&r)?.value(&x)?;
            let m = m.unwrap_or(v.prec());
            Ok(format!("{}\n", codec::format_digits(&v.digit_expand(m)?)))
        }
        RwOp::Assemble { r, digits } => {
            let c = RwCtx::new(&r)?;
            let d = codec::parse_digits(&c.ring, &digits)?;
            Ok(line(RamifiedWitt::assemble(&c.base, &d)?))
        }
        RwOp::Embed { r, expr } => {
            let c = RwCtx::new(&r)?;
            let ev = RwEval { base: &c.base, ring: &c.ring, prec: c.prec()?, allow_x: false };
            Ok(line(ev.eval_constant(&parse_expr(&expr)?)?))
        }
        RwOp::Twist { r, x, n } => Ok(line(ramified::twisted_product(&RwCtx::new(&r)?.value(&x)?, n)?)),
    }
}

fn fontaine(cmd: FontaineCmd) -> wittforge::Result<String> {
    let line = |x: FontaineElement| format!("{}\n", codec::format_fontaine(&x));
    match cmd {
        FontaineCmd::Make { f, a0, len } => {
            let r = Ring::parse(&f.ring)?;
            Ok(line(FontaineElement::from_roots(&r, r.parse_elem(&a0)?, len)?))
        }
        FontaineCmd::Add { f, x, y } => {
            let r = Ring::parse(&f.ring)?;
            Ok(line(codec::parse_fontaine(&r, &x)?.add(&codec::parse_fontaine(&r, &y)?)?))
        }
        FontaineCmd::Mul { f, x, y } => {
            let r = Ring::parse(&f.ring)?;
            Ok(line(codec::parse_fontaine(&r, &x)?.mul(&codec::parse_fontaine(&r, &y)?)?))
        }
        FontaineCmd::Shift { f, x, dir } => {
            let r = Ring::parse(&f.ring)?;
            let x = codec::parse_fontaine(&r, &x)?;
            match dir.as_str() {
                "forward" => Ok(line(x.shift_forward()?)),
                "backward" => Ok(line(x.shift_backward())),
                other => Err(Error::Mismatch(format!("unknown shift direction `{other}`"))),
            }
        }
    }
}

fn hensel_cmd(cmd: HenselCmd) -> wittforge::Result<String> {
    match cmd {
        HenselCmd::Lift { r, poly, seed_digit } => {
            let c = RwCtx::new(&r)?;
            let prec = c.prec()?;
            let ev = RwEval { base: &c.base, ring: &c.ring, prec, allow_x: true };
            let coeffs = ev.eval(&parse_expr(&poly)?)?;
            let initial = RamifiedWitt::teichmuller(&c.base, &c.ring, prec, c.ring.parse_elem(&seed_digit)?)?;
            let res = hensel::hensel_lift(&HenselProblem { coeffs, initial, prec })?;
            let mut s = String::new();
            for st in &res.steps {
                s += &format!("STEP prec={} order={}\n", st.prec, st.order);
            }
            s += &format!("{}\n", codec::format_digits(&res.root.digit_expand(prec)?));
            Ok(s)
        }
        HenselCmd::Adjoin { field, ring, poly, seed_digit, prec } => {
            let f = Ring::parse(&field)?;
            let r = Ring::parse(&ring)?;
            let unram = RamifiedBase::unramified(&f, ramified::witt_len(prec, 1).max(ramified::DEFAULT_BASE_LEVEL))?;
            let ev = RwEval { base: &unram, ring: &f, prec: unram.max_prec(), allow_x: true };
            let coeffs: Vec<WittVector> = ev
                .eval(&parse_expr(&poly)?)?
                .into_iter()
                .map(|c| c.coords()[0].clone())
                .collect();
            let (base, root) = hensel::adjoin_root(&f, &coeffs, &f.parse_elem(&seed_digit)?, &r, prec)?;
            Ok(format!(
                "BASE: {}\nRAMIFICATION: {}\n{}\n",
                base.name(),
                base.f(),
                codec::format_digits(&root.digit_expand(prec)?)
            ))
        }
    }
}
