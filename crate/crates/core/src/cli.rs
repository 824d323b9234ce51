//! The `ww` command-line front end and its verification suites.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::Error;
use crate::floor::{self, FdOptions};
use crate::invariants::{
    convert_basis, ramified_primes, triangle_from_beta, Basis, BetaInvariant, MultiDegree, MultirealTriangle,
};
use crate::reference as r;
use crate::welschinger::{
    alias_table, build_vw, load_table, load_table_file, p3_invariant, triangle_semantics, AliasInput,
};
use crate::witt::{DiagonalForm, SquareClass, WittClassQ};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ww", version, about = "Witt invariants, Welschinger-Witt invariants and floor diagrams")]
pub struct Cli {
    /// Directory with Welschinger table fixtures (overrides the built-in set)
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Cache directory for floor-diagram enumerations (also WW_CACHE_DIR)
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Canonical W(Q) class of a diagonal form given as comma-separated rationals
    Witt {
        #[arg(allow_hyphen_values = true)]
        form: String,
    },
    /// Build a Welschinger-Witt invariant from a table of Welschinger numbers
    WelBuild(WelBuildArgs),
    /// Floor-diagram enumeration and quadratic counts
    Fd {
        #[arg(value_enum)]
        action: FdAction,
        #[command(flatten)]
        args: FdArgs,
    },
    /// Run a verification suite against reference values
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SurfaceArg {
    P2,
    P1xp1,
    P1xp1sym,
    P3,
}

#[derive(Args, Debug)]
pub struct WelBuildArgs {
    #[arg(long, value_enum)]
    pub surface: SurfaceArg,
    #[arg(long)]
    pub degree: Option<i64>,
    /// a,b
    #[arg(long)]
    pub bidegree: Option<String>,
    /// Table file, or the name of a built-in table
    #[arg(long)]
    pub table: Option<String>,
    /// Output basis: beta, lambda, alpha or chi
    #[arg(long, default_value = "beta")]
    pub basis: String,
    /// Write the triangle CSV here instead of stdout
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FdAction {
    List,
    Quad,
    Wel,
    Classical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Tpoly,
    Beta,
    Int,
}

#[derive(Args, Debug)]
pub struct FdArgs {
    /// d0,d1,d2,d3
    #[arg(long)]
    pub class: String,
    /// Number of conjugate pairs, or m for the maximum
    #[arg(long, default_value = "0")]
    pub s: String,
    #[arg(long, value_enum, default_value_t = Emit::Tpoly)]
    pub emit: Emit,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Tables,
    Bases,
    Triangle,
    FdSmall,
    FdP1p1,
    Ramification,
    All,
}

/// One check of a suite: id, expected and computed renderings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub id: String,
    pub expected: String,
    pub computed: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.expected == self.computed
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn new(suite: &str) -> Self {
        VerificationReport { suite: suite.to_string(), checks: Vec::new() }
    }

    fn check(&mut self, id: impl Into<String>, expected: impl ToString, computed: impl ToString) {
        self.checks.push(Check { id: id.into(), expected: expected.to_string(), computed: computed.to_string() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_FAIL
        }
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"id": c.id, "expected": c.expected, "computed": c.computed, "status": status(c.passed())}))
            .collect();
        json!({"suite": self.suite, "status": status(self.passed()), "checks": checks})
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            if c.passed() {
                writeln!(s, "PASS {}", c.id).unwrap();
            } else {
                writeln!(s, "FAIL {}: expected {} computed {}", c.id, c.expected, c.computed).unwrap();
            }
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        writeln!(s, "{}: {} checks, {} failed", self.suite, self.checks.len(), failed).unwrap();
        s
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// Exit code for a library error: internal consistency failures abort with 3.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::Internal(_) | Error::NotDivisible(_) | Error::Asymmetric { .. } => EXIT_INTERNAL,
        _ => EXIT_USAGE,
    }
}

/// Parse "a/b" or "a".
pub fn parse_rational(s: &str) -> Result<(i64, i64), Error> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        None => Ok((s.parse().map_err(|_| bad())?, 1)),
    }
}

pub fn parse_form(s: &str) -> Result<DiagonalForm, Error> {
    let entries = s
        .split(',')
        .map(|x| {
            let (a, b) = parse_rational(x)?;
            SquareClass::from_ratio(a, b)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DiagonalForm::new(entries))
}

fn parse_ints(s: &str) -> Result<Vec<i64>, Error> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("not an integer list: {s:?}"))))
        .collect()
}

pub fn parse_class(s: &str) -> Result<[i64; 4], Error> {
    let v = parse_ints(s)?;
    v.clone().try_into().map_err(|_| Error::Arity { expected: 4, got: v.len() })
}

/// Run the CLI on the given arguments, writing to stdout/stderr; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn fd_options(cli: &Cli, jobs: Option<usize>) -> FdOptions {
    let mut o = FdOptions::from_env();
    if cli.cache_dir.is_some() {
        o.cache_dir = cli.cache_dir.clone();
    }
    o.jobs = jobs;
    o
}

/// Execute a parsed command; returns its stdout and exit code.
pub fn execute(cli: &Cli) -> Result<(String, i32), Error> {
    let json_out = cli.format == Format::Json;
    match &cli.cmd {
        Command::Witt { form } => cmd_witt(form, json_out).map(|s| (s, EXIT_OK)),
        Command::WelBuild(a) => cmd_wel_build(a, cli.data_dir.as_deref(), json_out).map(|s| (s, EXIT_OK)),
        Command::Fd { action, args } => {
            cmd_fd(*action, args, &fd_options(cli, args.jobs), json_out).map(|s| (s, EXIT_OK))
        }
        Command::Verify { suite } => {
            let reports = cmd_verify(*suite, cli.data_dir.as_deref(), &fd_options(cli, None))?;
            let mut out = String::new();
            if json_out {
                let v: Vec<Value> = reports.iter().map(VerificationReport::to_json).collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap()).unwrap();
            } else {
                for rep in &reports {
                    out.push_str(&rep.to_text());
                }
            }
            let code = if reports.iter().all(VerificationReport::passed) { EXIT_OK } else { EXIT_FAIL };
            Ok((out, code))
        }
    }
}

pub fn cmd_witt(form: &str, json_out: bool) -> Result<String, Error> {
    let f = parse_form(form)?;
    let w = WittClassQ::from_diag(&f);
    let ram = w.ramified_primes();
    if json_out {
        let mut v = w.to_json();
        v["ramified"] = json!(ram);
        v["class"] = json!(w.to_string());
        return Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()));
    }
    let mut s = String::new();
    writeln!(s, "class: {w}").unwrap();
    writeln!(s, "signature: {}", w.signature()).unwrap();
    writeln!(s, "dyadic: {}", w.dyadic()).unwrap();
    for (p, r) in w.residues() {
        writeln!(s, "residue {p}: {r}").unwrap();
    }
    let ram: Vec<String> = ram.iter().map(u64::to_string).collect();
    writeln!(s, "ramified: {{{}}}", ram.join(", ")).unwrap();
    Ok(s)
}

fn alias_input(a: &WelBuildArgs) -> Result<AliasInput, Error> {
    let need_degree = || a.degree.ok_or_else(|| Error::Parse("--degree is required for this surface".into()));
    Ok(match a.surface {
        SurfaceArg::P2 => AliasInput::P2 { d: need_degree()? },
        SurfaceArg::P1xp1sym => AliasInput::P1xP1Sym { a: need_degree()? },
        SurfaceArg::P3 => AliasInput::P3 { d: need_degree()? },
        SurfaceArg::P1xp1 => {
            let b = a.bidegree.as_deref().ok_or_else(|| Error::Parse("--bidegree a,b is required".into()))?;
            let v = parse_ints(b)?;
            if v.len() != 2 {
                return Err(Error::Arity { expected: 2, got: v.len() });
            }
            AliasInput::P1xP1 { a: v[0], b: v[1] }
        }
    })
}

fn built_invariant(a: &WelBuildArgs, data_dir: Option<&Path>) -> Result<(BetaInvariant, MultirealTriangle), Error> {
    if let Some(t) = &a.table {
        let table = if Path::new(t).exists() { load_table_file(Path::new(t))? } else { load_table(t, data_dir)? };
        return Ok((build_vw(&table)?, triangle_semantics(&table)?));
    }
    let input = alias_input(a)?;
    if let AliasInput::P3 { d } = input {
        let inv = p3_invariant(d, data_dir)?;
        let tri = triangle_from_beta(&inv.degree, &inv.int_coeffs()?);
        return Ok((inv, tri));
    }
    let table = alias_table(input, data_dir)?;
    Ok((build_vw(&table)?, triangle_semantics(&table)?))
}

pub fn cmd_wel_build(a: &WelBuildArgs, data_dir: Option<&Path>, json_out: bool) -> Result<String, Error> {
    let basis = Basis::parse(&a.basis)?;
    let (inv, tri) = built_invariant(a, data_dir)?;
    let shown = convert_basis(&inv, basis);
    let csv = tri.to_csv();
    let mut out = String::new();
    if json_out {
        writeln!(out, "{}", serde_json::to_string_pretty(&shown.to_json()).unwrap()).unwrap();
    } else {
        writeln!(out, "{shown}").unwrap();
    }
    match &a.csv {
        Some(p) => std::fs::write(p, csv)?,
        None => {
            out.push('\n');
            out.push_str(&csv);
        }
    }
    Ok(out)
}

fn resolve_s(s: &str, class: [i64; 4]) -> Result<usize, Error> {
    if s == "m" {
        return Ok(floor::element_count(floor::normalize_class(class)?) / 2);
    }
    s.parse().map_err(|_| Error::Parse(format!("--s expects a number or m, got {s:?}")))
}

pub fn cmd_fd(action: FdAction, a: &FdArgs, opts: &FdOptions, json_out: bool) -> Result<String, Error> {
    let class = parse_class(&a.class)?;
    let mut out = String::new();
    match action {
        FdAction::Classical => {
            let n = floor::classical_count(class, opts)?;
            writeln!(out, "{n}").unwrap();
        }
        FdAction::Wel => {
            let s = resolve_s(&a.s, class)?;
            writeln!(out, "{}", floor::welschinger_via_fd(class, s, opts)?).unwrap();
        }
        FdAction::List => {
            let s = resolve_s(&a.s, class)?;
            for e in floor::enumerate_all(class, s, opts)?.iter().filter(|e| e.essential) {
                writeln!(out, "{}", e.diagram.to_record(&e.mult, true)).unwrap();
            }
        }
        FdAction::Quad => {
            let s = resolve_s(&a.s, class)?;
            let res = floor::quad_invariant(class, s, opts)?;
            match a.emit {
                Emit::Tpoly => {
                    if json_out {
                        writeln!(out, "{}", res.value.to_json()).unwrap();
                    } else {
                        writeln!(out, "{}", res.value).unwrap();
                    }
                }
                Emit::Beta => {
                    let b = floor::beta_extract(&res)?;
                    if json_out {
                        writeln!(out, "{}", serde_json::to_string_pretty(&b.to_json()).unwrap()).unwrap();
                    } else {
                        writeln!(out, "{b}").unwrap();
                    }
                }
                Emit::Int => {
                    writeln!(out, "{}", res.value.eval_signs(&vec![-1; s])?).unwrap();
                }
            }
        }
    }
    Ok(out)
}

/// Coefficients of an invariant along the first variable (other indices zero), as strings.
fn first_row(inv: &BetaInvariant) -> Vec<String> {
    let m = inv.degree.m();
    (0..=m[0])
        .map(|i| {
            let mut idx = vec![0; m.len()];
            idx[0] = i;
            inv.coeff(&idx).to_string()
        })
        .collect()
}

fn padded(v: &[impl ToString], len: usize) -> Vec<String> {
    let mut out: Vec<String> = v.iter().map(ToString::to_string).collect();
    out.resize(len, "0".to_string());
    out
}

fn row_str(v: &[String]) -> String {
    format!("[{}]", v.join(", "))
}

fn p2_invariant(d: i64, data_dir: Option<&Path>) -> Result<BetaInvariant, Error> {
    build_vw(&alias_table(AliasInput::P2 { d }, data_dir)?)
}

fn p2_degree(d: i64) -> MultiDegree {
    MultiDegree::single((3 * d - 1) as usize)
}

pub fn suite_tables(data_dir: Option<&Path>) -> Result<VerificationReport, Error> {
    let mut rep = VerificationReport::new("tables");
    for &(d, row) in r::P2_BETA.iter().filter(|(d, _)| *d <= 6) {
        let inv = p2_invariant(d, data_dir)?;
        rep.check(format!("p2 d={d} beta"), row_str(&padded(row, inv.coeffs().len())), row_str(&first_row(&inv)));
    }
    for &(d, row) in r::P2_LAMBDA.iter().filter(|(d, _)| *d <= 5) {
        let inv = convert_basis(&p2_invariant(d, data_dir)?, Basis::Lambda);
        rep.check(format!("p2 d={d} lambda"), row_str(&padded(row, inv.coeffs().len())), row_str(&first_row(&inv)));
    }
    for &(d, row) in r::P2_CHI.iter().filter(|(d, _)| *d <= 5) {
        let inv = convert_basis(&p2_invariant(d, data_dir)?, Basis::Chi);
        rep.check(format!("p2 d={d} chi"), row_str(&padded(row, inv.coeffs().len())), row_str(&first_row(&inv)));
    }
    Ok(rep)
}

pub fn suite_bases() -> Result<VerificationReport, Error> {
    let mut rep = VerificationReport::new("bases");
    for &(d, row) in r::P2_BETA {
        let inv = BetaInvariant::beta((3 * d - 1) as usize, row);
        let lam = convert_basis(&inv, Basis::Lambda);
        let exp = r::P2_LAMBDA.iter().find(|(e, _)| *e == d).unwrap().1;
        rep.check(format!("p2 d={d} lambda"), row_str(&padded(exp, lam.coeffs().len())), row_str(&first_row(&lam)));
        if let Some((_, chi)) = r::P2_CHI.iter().find(|(e, _)| *e == d) {
            let x = convert_basis(&inv, Basis::Chi);
            rep.check(format!("p2 d={d} chi"), row_str(&padded(chi, x.coeffs().len())), row_str(&first_row(&x)));
        }
    }
    for n in 0..=13usize {
        let m = n / 2;
        for target in [Basis::Lambda, Basis::Alpha, Basis::Chi] {
            let mut ok = true;
            for i in 0..=m {
                let mut c = vec![0i64; m + 1];
                c[i] = 1;
                let b = BetaInvariant::beta(n, &c);
                let back = convert_basis(&convert_basis(&b, target), Basis::Beta);
                ok &= back.coeffs() == b.coeffs();
            }
            rep.check(format!("round trip n={n} beta-{}-beta", target.name()), true, ok);
        }
    }
    Ok(rep)
}

pub fn suite_triangle() -> Result<VerificationReport, Error> {
    let mut rep = VerificationReport::new("triangle");
    let deg = p2_degree(4);
    let w: Vec<i64> = r::P2_D4_WEL.to_vec();
    let tri = crate::invariants::triangle_from_multireal(&deg, &w)?;
    for (i, (got, exp)) in tri.rows().iter().zip(r::P2_D4_TRIANGLE).enumerate() {
        rep.check(format!("d=4 triangle row {i}"), row_str(&padded(exp, exp.len())), row_str(&padded(got, got.len())));
    }
    let back = triangle_from_beta(&deg, &[0, 8, 2, 1, 0, 0]);
    rep.check("d=4 triangle from beta", tri.to_csv(), back.to_csv());
    Ok(rep)
}

pub fn suite_fd_small(opts: &FdOptions) -> Result<VerificationReport, Error> {
    let mut rep = VerificationReport::new("fd-small");
    for &(d, row) in r::P2_BETA.iter().filter(|(d, _)| *d <= 4) {
        let class = [d, 0, 0, 0];
        let m = floor::element_count(class) / 2;
        let b = floor::beta_extract(&floor::quad_invariant(class, m, opts)?)?;
        rep.check(format!("fd ({d},0,0,0) beta"), row_str(&padded(row, m + 1)), row_str(&first_row(&b)));
    }
    for (s, &w) in r::P2_D4_WEL.iter().enumerate() {
        rep.check(format!("fd (4,0,0,0) wel s={s}"), w, floor::welschinger_via_fd([4, 0, 0, 0], s, opts)?);
    }
    for (d, n) in [(1, 1), (2, 1), (3, 12), (4, 620)] {
        rep.check(format!("fd ({d},0,0,0) classical"), n, floor::classical_count([d, 0, 0, 0], opts)?);
    }
    Ok(rep)
}

pub fn suite_fd_p1p1(data_dir: Option<&Path>, opts: &FdOptions) -> Result<VerificationReport, Error> {
    let mut rep = VerificationReport::new("fd-p1p1");
    for a in 1..=5i64 {
        let class = [a + 2, a, 2, 0];
        let m = floor::element_count(floor::normalize_class(class)?) / 2;
        let expected = (a + 1) / 2 * (1 << (a - 1));
        rep.check(format!("fd ({},{a},2,0) wel s=m", a + 2), expected, floor::welschinger_via_fd(class, m, opts)?);
    }
    // bidegree (a, b) tables restricted to the first block against floor diagrams of class (a+b, b, a, 0)
    for (a, b) in [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (2, 4), (2, 5)] {
        let inv = build_vw(&alias_table(AliasInput::P1xP1 { a, b }, data_dir)?)?;
        let class = [a + b, b, a, 0];
        let m = floor::element_count(class) / 2;
        let fb = floor::beta_extract(&floor::quad_invariant(class, m, opts)?)?;
        rep.check(format!("fd ({},{b},{a},0) beta vs table ({a},{b})", a + b), row_str(&first_row(&inv)), row_str(&first_row(&fb)));
    }
    for &(d, class, row) in r::BLOWUP_CHI {
        let m = floor::element_count(floor::normalize_class(class)?) / 2;
        let fb = floor::beta_extract(&floor::quad_invariant(class, m, opts)?)?;
        let x = convert_basis(&fb, Basis::Chi);
        rep.check(format!("fd {class:?} chi vs d={d:?}"), row_str(&padded(row, m + 1)), row_str(&first_row(&x)));
    }
    Ok(rep)
}

pub fn suite_ramification(data_dir: Option<&Path>, opts: &FdOptions) -> Result<VerificationReport, Error> {
    let mut rep = VerificationReport::new("ramification");
    for d in 1..=4 {
        let class = [d, 0, 0, 0];
        let m = floor::element_count(class) / 2;
        let b = floor::beta_extract(&floor::quad_invariant(class, m, opts)?)?;
        rep.check(format!("fd ({d},0,0,0) ramified primes"), "{}", format!("{:?}", ramified_primes(&b)));
    }
    for d in 1..=6 {
        let b = p2_invariant(d, data_dir)?;
        rep.check(format!("p2 d={d} ramified primes"), "{}", format!("{:?}", ramified_primes(&b)));
        let l = convert_basis(&b, Basis::Lambda);
        rep.check(format!("p2 d={d} lambda ramified primes"), "{}", format!("{:?}", ramified_primes(&l)));
    }
    Ok(rep)
}

pub fn cmd_verify(suite: Suite, data_dir: Option<&Path>, opts: &FdOptions) -> Result<Vec<VerificationReport>, Error> {
    Ok(match suite {
        Suite::Tables => vec![suite_tables(data_dir)?],
        Suite::Bases => vec![suite_bases()?],
        Suite::Triangle => vec![suite_triangle()?],
        Suite::FdSmall => vec![suite_fd_small(opts)?],
        Suite::FdP1p1 => vec![suite_fd_p1p1(data_dir, opts)?],
        Suite::Ramification => vec![suite_ramification(data_dir, opts)?],
        Suite::All => vec![
            suite_tables(data_dir)?,
            suite_bases()?,
            suite_triangle()?,
            suite_fd_small(opts)?,
            suite_fd_p1p1(data_dir, opts)?,
            suite_ramification(data_dir, opts)?,
        ],
    })
}
