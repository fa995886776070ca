//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

// A closed pipe on stdout is not an error worth a panic.
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{self, BoundCertificate, BoundKind, BoundValue, CertificateStore, Provenance};
use crate::config::{self, Configuration, CorrelationPoint, MidpointRule};
use crate::error::{Error, Result};
use crate::exact::{exact_from_f64, ExactScalar};
use crate::matrix::{parse_matrix_json, parse_matrix_text, MatrixInput};
use crate::oracle;
use crate::polytope::{InvariantBasis, SignedPermutationGroup};
use crate::projection::{facet_loop, FacetOptions, FacetStatus};
use crate::solver::{self, ProofFlag, SolveOptions};

/// Exit code for malformed command lines.
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "kgbounds",
    version,
    about = "Bounds on Grothendieck constants of finite order"
)]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a configuration of lines.
    Gen(RunArgs),
    /// Gram matrix of one or two configurations.
    Gram(RunArgs),
    /// Separate a Gram matrix from the correlation polytope.
    Facet(RunArgs),
    /// Solve SDP_1 of a matrix exactly.
    SolveExact(SolveArgs),
    /// Heuristic SDP_n of a matrix.
    SolveHeur(SolveArgs),
    /// Closed-form bounds, combiners and best-known queries.
    Bound(BoundArgs),
    /// Best-known table from a certificate store.
    Report(ReportArgs),
    /// List the built-in configurations.
    Catalog {
        #[arg(long)]
        json: bool,
    },
}

/// Everything needed to repeat a run. Serialised next to its outputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// One name for `P = Gram(A, A)`, two for `Gram(A, B)`.
    #[serde(default)]
    pub configs: Vec<String>,
    #[serde(default)]
    pub packing: Option<PackingSpec>,
    pub n: usize,
    /// `auto-catalog`, `trivial`, or a group JSON file.
    pub group: String,
    pub tol: f64,
    pub restarts: usize,
    pub budget: Option<u64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingSpec {
    pub file: PathBuf,
    pub d: usize,
    pub m: usize,
    /// Add normalised hull-edge midpoints.
    #[serde(default)]
    pub midpoints: bool,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Run configuration JSON; explicit flags override its fields.
    #[arg(long = "run")]
    run: Option<PathBuf>,
    /// Catalog configuration; give twice for a rectangular Gram matrix.
    #[arg(long = "config")]
    config: Vec<String>,
    /// Packing file of decimal coordinates.
    #[arg(long, requires_all = ["d", "m"])]
    packing: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Augment the packing with hull-edge midpoints.
    #[arg(long)]
    midpoints: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Certificate store to append the resulting bound to.
    #[arg(long)]
    store: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Matrix as JSON (exact object or nested array) or plain text.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    restarts: usize,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Best known lower bound with its provenance chain.
    #[arg(long)]
    best: bool,
    /// Include putative heuristic certificates in `--best`.
    #[arg(long)]
    heuristic: bool,
    /// γ(d)/γ(n), the binomial n = 2 form and the PSD constant.
    #[arg(long)]
    closed: bool,
    /// The infinite-order bound of Davie and Reeds.
    #[arg(long)]
    davie: bool,
    /// Upper bound 1/(α η_A η_B) with α = v0/(1+ε).
    #[arg(long)]
    upper: bool,
    #[arg(long)]
    v0: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eta_a: Option<f64>,
    #[arg(long)]
    eta_b: Option<f64>,
    /// Shrinking factor of a catalog configuration.
    #[arg(long)]
    shrink: Option<String>,
    /// Lower bound K_G(d)/K_G(n) from the store's best entries.
    #[arg(long)]
    multiplicative: bool,
    #[arg(long)]
    store: Option<PathBuf>,
    /// Also consider the bundled published entries.
    #[arg(long)]
    with_reported: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Add the bundled published entries to the store first.
    #[arg(long)]
    with_reported: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        // Fails only if a pool already exists, in which case it stays.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Catalog { json } => cmd_catalog(json),
        Cmd::Gen(a) => cmd_gen(&resolve(&a)?),
        Cmd::Gram(a) => cmd_gram(&resolve(&a)?),
        Cmd::Facet(a) => cmd_facet(&resolve(&a)?, a.store.as_deref()),
        Cmd::SolveExact(a) => cmd_solve_exact(&a),
        Cmd::SolveHeur(a) => cmd_solve_heur(&a),
        Cmd::Bound(a) => cmd_bound(&a),
        Cmd::Report(a) => cmd_report(&a),
    }
}

impl RunConfig {
    pub fn with_defaults() -> Self {
        Self {
            n: 1,
            group: "auto-catalog".into(),
            tol: FacetOptions::default().tol,
            restarts: FacetOptions::default().restarts,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn facet_options(&self) -> FacetOptions {
        FacetOptions {
            n: self.n,
            tol: self.tol,
            restarts: self.restarts,
            seed: self.seed,
            ..FacetOptions::default()
        }
    }

    /// The configurations `A` and `B` named by this run.
    pub fn configurations(&self) -> Result<(Configuration, Configuration)> {
        let mut confs = Vec::new();
        for name in &self.configs {
            confs.push(config::generate(name)?);
        }
        if let Some(p) = &self.packing {
            let text = fs::read_to_string(&p.file)?;
            let name = p
                .file
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("packing");
            let mut c = config::parse_packing(&text, p.d, p.m, name)?;
            if p.midpoints {
                c = config::augment_edge_midpoints(&c, MidpointRule::default())?;
            }
            confs.push(c);
        }
        match confs.len() {
            1 => Ok((confs[0].clone(), confs.remove(0))),
            2 => {
                let b = confs.pop().expect("two entries");
                let a = confs.pop().expect("two entries");
                if a.d != b.d {
                    return Err(Error::domain(
                        "the two configurations live in different dimensions",
                    ));
                }
                Ok((a, b))
            }
            0 => Err(Error::domain(
                "no configuration given (use --config or --packing)",
            )),
            _ => Err(Error::domain("at most two configurations")),
        }
    }

    pub fn basis(&self, a: &Configuration, b: &Configuration) -> Result<InvariantBasis> {
        match self.group.as_str() {
            "trivial" => Ok(InvariantBasis::trivial(a.m(), b.m())),
            "auto-catalog" | "auto" => {
                if a.mirrors.is_empty() || b.mirrors.is_empty() {
                    Ok(InvariantBasis::trivial(a.m(), b.m()))
                } else {
                    Ok(SignedPermutationGroup::from_configuration(a, b)?.invariant_basis())
                }
            }
            file => {
                let v: Value = serde_json::from_str(&fs::read_to_string(file)?)?;
                let g = SignedPermutationGroup::from_json(&v)?;
                if g.shape() != (a.m(), b.m()) {
                    return Err(Error::domain("group does not match the matrix shape"));
                }
                Ok(g.invariant_basis())
            }
        }
    }
}

fn resolve(a: &RunArgs) -> Result<RunConfig> {
    let mut rc = match &a.run {
        Some(p) => RunConfig::from_json(&fs::read_to_string(p)?)?,
        None => RunConfig::with_defaults(),
    };
    if !a.config.is_empty() {
        rc.configs = a.config.clone();
    }
    if let Some(file) = &a.packing {
        rc.packing = Some(PackingSpec {
            file: file.clone(),
            d: a.d.expect("required by clap"),
            m: a.m.expect("required by clap"),
            midpoints: a.midpoints,
        });
    }
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = a.$f.clone() { rc.$f = v; })* };
    }
    set!(n, group, tol, restarts, seed);
    if a.budget.is_some() {
        rc.budget = a.budget;
    }
    if a.out.is_some() {
        rc.out = a.out.clone();
    }
    if rc.n == 0 {
        return Err(Error::domain("--n must be at least 1"));
    }
    if !(rc.tol > 0.0) {
        return Err(Error::domain("--tol must be positive"));
    }
    Ok(rc)
}

/// Writes `name` under the output directory, or prints it when there is none.
fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => out!("{text}"),
    }
    Ok(())
}

fn pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn write_run(rc: &RunConfig) -> Result<()> {
    if let Some(dir) = &rc.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("run.json"), rc.to_json()? + "\n")?;
    }
    Ok(())
}

fn cmd_catalog(as_json: bool) -> Result<i32> {
    let entries = config::catalog();
    if as_json {
        let v: Vec<Value> = entries
            .iter()
            .map(|e| json!({ "id": e.id, "d": e.d, "m": e.m, "group": e.group, "kissing": e.kissing }))
            .collect();
        out!("{}", pretty(&Value::Array(v))?);
    } else {
        out!("{:<20} {:>2} {:>4}  {:<6} kissing", "id", "d", "m", "group");
        for e in entries {
            out!(
                "{:<20} {:>2} {:>4}  {:<6} {}",
                e.id,
                e.d,
                e.m,
                e.group,
                if e.kissing { "x" } else { "" }
            );
        }
    }
    Ok(0)
}

fn cmd_gen(rc: &RunConfig) -> Result<i32> {
    let (a, b) = rc.configurations()?;
    write_run(rc)?;
    emit(
        rc.out.as_deref(),
        &format!("{}.json", a.name),
        &pretty(&a.to_json())?,
    )?;
    if rc.configs.len() + rc.packing.iter().count() == 2 {
        emit(
            rc.out.as_deref(),
            &format!("{}.json", b.name),
            &pretty(&b.to_json())?,
        )?;
    }
    Ok(0)
}

fn cmd_gram(rc: &RunConfig) -> Result<i32> {
    let (a, b) = rc.configurations()?;
    let p = config::gram(&a, &b)?;
    write_run(rc)?;
    emit(rc.out.as_deref(), "gram.json", &pretty(&p.to_json())?)?;
    Ok(0)
}

/// `⟨P, P⟩ / SDP_1[P]` when `P` is exact and small enough to solve.
fn gram_ratio(p: &CorrelationPoint) -> Option<ExactScalar> {
    let e = p.exact()?;
    if p.m1().min(p.m2()) > solver::DEFAULT_BRANCH_CAP {
        return None;
    }
    let opts = SolveOptions {
        warm_restarts: 64,
        ..SolveOptions::default()
    };
    let r = solver::sdp1_exact(e, &opts).ok()?;
    if !r.is_optimal() {
        return None;
    }
    e.inner(e).ok()?.checked_div(&r.value)
}

fn cmd_facet(rc: &RunConfig, store: Option<&Path>) -> Result<i32> {
    let (a, b) = rc.configurations()?;
    let p = config::gram(&a, &b)?;
    let basis = rc.basis(&a, &b)?;
    let r = facet_loop(&p, basis, &rc.facet_options())?;
    let gram = if rc.n == 1 { gram_ratio(&p) } else { None };
    let ratio_display = r
        .ratio_exact
        .as_ref()
        .map(|x| x.to_string())
        .unwrap_or_else(|| format!("{:.9}", r.ratio));
    let cert = json!({
        "run": rc,
        "config_a": a.name,
        "config_b": b.name,
        "d": a.d,
        "m1": p.m1(),
        "m2": p.m2(),
        "gram_ratio": gram.as_ref().map(|x| x.to_json()),
        "ratio": r.ratio_exact.as_ref().map(|x| x.to_json()),
        "ratio_f64": r.ratio,
        "lambda": r.lambda.as_ref().map(|x| x.to_json()),
        "inner": r.inner_exact.as_ref().map(|x| x.to_json()),
        "facet": r,
    });
    write_run(rc)?;
    emit(rc.out.as_deref(), "facet.json", &pretty(&cert)?)?;
    eprintln!(
        "status {:?}, ratio {}{}{}",
        r.status,
        ratio_display,
        r.lambda
            .as_ref()
            .map(|l| format!(", λ = {l}"))
            .unwrap_or_default(),
        gram.as_ref()
            .map(|g| format!(", Gram ratio {g}"))
            .unwrap_or_default()
    );
    if let Some(dir) = store {
        if r.status != FacetStatus::Inside {
            let exact = rc.n == 1 && r.offset_certified;
            let value = match (&r.ratio_exact, exact) {
                (Some(x), true) => BoundValue::Exact(x.clone()),
                _ => BoundValue::Float(r.ratio),
            };
            let c = BoundCertificate {
                id: format!("facet-{}-{}-n{}", slug(&a.name), slug(&b.name), rc.n),
                d: a.d,
                n: rc.n,
                kind: BoundKind::Lower,
                value,
                provenance: if exact {
                    Provenance::Exact
                } else {
                    Provenance::Heuristic
                },
                source: "⟨A,P⟩/SDP_n[A]".into(),
                witness: json!({
                    "config_a": a.name,
                    "config_b": b.name,
                    "normal": r.normal,
                    "offset": r.offset,
                    "status": r.status,
                }),
                chain: Vec::new(),
            };
            let path = CertificateStore::open(dir)?.append(&c)?;
            eprintln!("stored {}", path.display());
        }
    }
    Ok(0)
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

fn read_matrix(path: &Path) -> Result<MatrixInput> {
    let text = fs::read_to_string(path)?;
    match serde_json::from_str::<Value>(&text) {
        Ok(v) => parse_matrix_json(&v),
        Err(_) => parse_matrix_text(&text),
    }
}

fn cmd_solve_exact(a: &SolveArgs) -> Result<i32> {
    let m = read_matrix(&a.input)?;
    let opts = SolveOptions {
        node_budget: a.budget,
        seed: a.seed,
        ..SolveOptions::default()
    };
    let r = solver::sdp1_rectangular(&m, &opts)?;
    emit(
        a.out.as_deref(),
        "solve.json",
        &serde_json::to_string_pretty(&r)?,
    )?;
    eprintln!(
        "SDP_1 = {} ({:?}, {} nodes)",
        r.value, r.proof_flag, r.nodes_visited
    );
    Ok(if r.proof_flag == ProofFlag::BudgetExceeded {
        2
    } else {
        0
    })
}

fn cmd_solve_heur(a: &SolveArgs) -> Result<i32> {
    let m = read_matrix(&a.input)?;
    let r = oracle::heuristic_sdp(&m.to_f64(), a.n, a.restarts, a.seed)?;
    emit(
        a.out.as_deref(),
        "heuristic.json",
        &serde_json::to_string_pretty(&r)?,
    )?;
    eprintln!(
        "SDP_{} ≥ {:.12} ({} restarts)",
        a.n, r.value, r.restarts_used
    );
    Ok(0)
}

fn store_snapshot(store: Option<&Path>, with_reported: bool) -> Result<Vec<BoundCertificate>> {
    let mut certs = match store {
        Some(dir) => CertificateStore::open(dir)?.snapshot()?,
        None => Vec::new(),
    };
    if with_reported {
        for c in bounds::reported_entries() {
            if !certs.iter().any(|x| x.id == c.id) {
                certs.push(c);
            }
        }
    }
    Ok(certs)
}

fn cmd_bound(a: &BoundArgs) -> Result<i32> {
    let out = a.out.as_deref();
    if a.davie {
        let b = bounds::davie_bound(10_000, 1e-12)?;
        emit(out, "davie.json", &pretty(&json!(b))?)?;
        return Ok(0);
    }
    if let Some(name) = &a.shrink {
        let c = config::generate(name)?;
        let s = bounds::shrinking_factor(&c)?;
        emit(
            out,
            "shrinking.json",
            &pretty(&json!({ "config": c.name, "shrinking": s }))?,
        )?;
        return Ok(0);
    }
    let need_d = || a.d.ok_or_else(|| Error::domain("--d is required"));
    if a.closed {
        let d = need_d()?;
        let g = bounds::gamma_ratio(d, a.n)?;
        let mut v = json!({
            "d": d,
            "n": a.n,
            "gamma_ratio": g.to_string(),
            "gamma_ratio_f64": g.to_f64(),
            "psd_constant": bounds::psd_constant(d)?.to_string(),
        });
        if a.n == 2 && d >= 3 {
            let s = bounds::soa_lower_n2(d)?;
            v["soa_n2"] = json!(s.to_string());
            v["soa_n2_f64"] = json!(s.to_f64());
        }
        emit(out, "closed.json", &pretty(&v)?)?;
        return Ok(0);
    }
    if a.upper {
        let d = need_d()?;
        let v0 =
            a.v0.as_deref()
                .ok_or_else(|| Error::domain("--v0 is required"))?;
        let v0 = parse_rational(v0)?;
        let eps = a.eps.unwrap_or(0.0);
        let dc = crate::projection::DecompositionCertificate::from_reported(v0, eps, a.n)?;
        let (ea, eb) = (
            a.eta_a
                .ok_or_else(|| Error::domain("--eta-a is required"))?,
            a.eta_b
                .ok_or_else(|| Error::domain("--eta-b is required"))?,
        );
        let c = bounds::shrinking_upper(d, a.n, &dc.alpha, ea, eb)?;
        emit(out, "upper.json", &c.to_json()?)?;
        if let Some(dir) = &a.store {
            CertificateStore::open(dir)?.append(&c)?;
        }
        return Ok(0);
    }
    let certs = store_snapshot(a.store.as_deref(), a.with_reported)?;
    if a.multiplicative {
        let d = need_d()?;
        let lower = bounds::best_known(&certs, d, 1, a.heuristic)
            .ok_or_else(|| Error::domain("no lower bound on K_G(d)"))?;
        let upper = certs
            .iter()
            .cloned()
            .chain(bounds::literature_entries())
            .filter(|c| c.kind == BoundKind::Upper && c.n == 1 && c.d == a.n)
            .min_by(|x, y| x.conservative_f64().total_cmp(&y.conservative_f64()))
            .ok_or_else(|| Error::domain(format!("no upper bound on K_G({}) available", a.n)))?;
        let v = bounds::multiplicative_lower(lower.value, upper.conservative_f64())?;
        let body =
            json!({ "d": d, "n": a.n, "lower": v, "numerator": lower, "denominator": upper.id });
        emit(out, "multiplicative.json", &pretty(&body)?)?;
        return Ok(0);
    }
    if a.best {
        let d = need_d()?;
        let b = bounds::best_known(&certs, d, a.n, a.heuristic)
            .ok_or_else(|| Error::domain("need 1 ≤ n ≤ d"))?;
        out!(
            "K_G({}→{}) ≥ {:.6}  [{}]",
            d,
            a.n,
            b.value,
            b.provenance.as_str()
        );
        out!("value: {}", b.display);
        if b.from_d < d {
            out!("propagated from d = {} by monotonicity", b.from_d);
        }
        for id in &b.chain {
            out!("  <- {id}");
        }
        if out.is_some() {
            emit(out, "best.json", &pretty(&json!(b))?)?;
        }
        return Ok(0);
    }
    Err(Error::domain(
        "choose one of --best, --closed, --davie, --upper, --shrink, --multiplicative",
    ))
}

fn parse_rational(s: &str) -> Result<num_rational::BigRational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: num_bigint::BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::domain("bad rational"))?;
        let d: num_bigint::BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::domain("bad rational"))?;
        if d == 0.into() {
            return Err(Error::domain("zero denominator"));
        }
        return Ok(num_rational::BigRational::new(n, d));
    }
    // Decimal strings are read exactly, digit by digit.
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let n: num_bigint::BigInt = digits.parse().map_err(|_| Error::domain("bad number"))?;
        let d = num_bigint::BigInt::from(10).pow(frac.len() as u32);
        return Ok(num_rational::BigRational::new(n, d));
    }
    match s.parse::<num_bigint::BigInt>() {
        Ok(n) => Ok(num_rational::BigRational::from_integer(n)),
        Err(_) => exact_from_f64(s.parse::<f64>().map_err(|_| Error::domain("bad number"))?),
    }
}

fn cmd_report(a: &ReportArgs) -> Result<i32> {
    let store = CertificateStore::open(&a.store)?;
    if a.with_reported {
        store.append_all(&bounds::reported_entries())?;
    }
    let rows = store.report(a.n)?;
    let text = bounds::report_text(&rows);
    let _ = std::io::stdout().write_all(text.as_bytes());
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.csv"), bounds::report_csv(&rows))?;
        fs::write(dir.join("report.txt"), &text)?;
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors() {
        assert_eq!(run(["kgbounds", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["kgbounds", "catalog", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["kgbounds", "catalog"]), 0);
    }

    #[test]
    fn rationals() {
        assert_eq!(
            parse_rational("8962/10000").unwrap(),
            crate::exact::ratio(4481, 5000)
        );
        assert_eq!(
            parse_rational("0.8962").unwrap(),
            crate::exact::ratio(4481, 5000)
        );
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn run_config_roundtrip() {
        let mut rc = RunConfig::with_defaults();
        rc.configs = vec!["hexagon".into()];
        assert_eq!(RunConfig::from_json(&rc.to_json().unwrap()).unwrap(), rc);
    }
}
