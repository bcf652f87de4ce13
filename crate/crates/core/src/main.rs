use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use seclin::audit::{self, LeakageReport, Unit};
use seclin::factorize::{self, IdentityVariant};
use seclin::report::{format_ratio, to_canonical_json};
use seclin::scheme::{load_scheme_file, parse_matrix_json, LoadedScheme, RequestsDocument, SchemeDocument};
use seclin::secrecy::{self, SecrecyReport};
use seclin::simulate::{self, Protocol, SimParams};
use seclin::transform::{self, SecuredScheme};
use seclin::{Error, FieldSpec, Matrix, Scheme};

#[derive(Parser)]
#[command(name = "seclin", version, about = "Secure multi-user linearly separable distributed computing")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scheme and run every secrecy check.
    Check { scheme: PathBuf },
    /// Build a scheme from a request matrix.
    Factorize(FactorizeArgs),
    /// Append randomness coefficients spanning Null(D).
    Secure {
        scheme: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the protocol end to end.
    Simulate(SimulateArgs),
    /// Exact conditional mutual information over GF(p) by enumeration.
    AuditExact(AuditExactArgs),
    /// Closed-form leakage bound over the reals.
    AuditBound(GaussianArgs),
    /// Exact Gaussian leakage alongside the bound.
    AuditGaussian(GaussianArgs),
    /// Randomness level meeting a leakage target.
    Epsilon(EpsilonArgs),
    /// Factorize, check, secure, simulate and audit into one bundle directory.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Systematic,
    Identity,
    Decentralized,
}

#[derive(Args)]
struct FactorizeArgs {
    requests: PathBuf,
    #[arg(long, value_enum, default_value = "systematic")]
    form: Form,
    /// K×(N−K) parity block for the systematic form (bare matrix or {"P": ...}).
    #[arg(long = "P", alias = "p")]
    p: Option<PathBuf>,
    /// (N−K)×L tasks for the parity servers (bare matrix or {"E_bot": ...}).
    #[arg(long)]
    e_bot: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimParamArgs {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, env = "SECLIN_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    sigma_w: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_c: f64,
    /// Relative correctness tolerance over the reals.
    #[arg(long, default_value_t = simulate::DEFAULT_TOL)]
    tol: f64,
}

impl SimParamArgs {
    fn params(&self) -> SimParams {
        SimParams {
            seed: self.seed,
            sigma_w: self.sigma_w,
            sigma_c: self.sigma_c,
            tol: self.tol,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    scheme: PathBuf,
    #[command(flatten)]
    sim: SimParamArgs,
    /// Per-trial CSV output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AuditExactArgs {
    scheme: PathBuf,
    /// One-based user index, or `all`.
    #[arg(long, default_value = "all")]
    user: String,
    /// Read integer entries modulo this prime.
    #[arg(long)]
    modulus: Option<u64>,
    /// Audit without any randomness.
    #[arg(long)]
    unsecured: bool,
}

#[derive(Args)]
struct GaussianArgs {
    scheme: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    sigma_w: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_c: f64,
    #[arg(long, default_value = "all")]
    user: String,
}

#[derive(Args)]
struct EpsilonArgs {
    scheme: PathBuf,
    /// Leakage target in nats.
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_w: f64,
    #[arg(long, default_value = "all")]
    user: String,
}

#[derive(Args)]
struct PipelineArgs {
    /// Request file, or a full scheme file (with `D` and `E`, optionally `C`).
    input: PathBuf,
    #[arg(long, value_enum, default_value = "systematic")]
    form: Form,
    #[arg(long = "P", alias = "p")]
    p: Option<PathBuf>,
    /// Bundle directory.
    #[arg(short, long)]
    out: PathBuf,
    #[command(flatten)]
    sim: SimParamArgs,
    /// Also report σ_c meeting this leakage target (real schemes).
    #[arg(long)]
    eps: Option<f64>,
    /// Audit an integer scheme modulo this prime as well.
    #[arg(long)]
    modulus: Option<u64>,
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InsecureFactorization { .. } | Error::UnboundedLeakage { .. } | Error::SingularCovariance { .. } => 3,
            Error::EnumerationInfeasible { .. } => 4,
            Error::Io(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Check { scheme } => cmd_check(cli.json, scheme),
        Command::Factorize(a) => cmd_factorize(cli.json, a),
        Command::Secure { scheme, output } => cmd_secure(cli.json, scheme, output.as_deref()),
        Command::Simulate(a) => cmd_simulate(cli.json, a),
        Command::AuditExact(a) => cmd_audit_exact(cli.json, a),
        Command::AuditBound(a) => cmd_gaussian(cli.json, a, false),
        Command::AuditGaussian(a) => cmd_gaussian(cli.json, a, true),
        Command::Epsilon(a) => cmd_epsilon(cli.json, a),
        Command::Pipeline(a) => cmd_pipeline(cli.json, a),
    }
}

fn emit<T: Serialize>(value: &T) -> Result<(), Failure> {
    print!("{}", to_canonical_json(value).map_err(Error::from)?);
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    fs::write(path, to_canonical_json(value).map_err(Error::from)?)?;
    Ok(())
}

/// Zero-based users from `all` or a one-based index.
fn parse_users(spec: &str, k: usize) -> Result<Vec<usize>, Failure> {
    if spec == "all" {
        return Ok((0..k).collect());
    }
    match spec.parse::<usize>() {
        Ok(u) if (1..=k).contains(&u) => Ok(vec![u - 1]),
        _ => Err(Error::InvalidArgument(format!("--user must be `all` or in 1..={k}, got {spec:?}")).into()),
    }
}

/// The file's randomness when present, otherwise the canonical securing.
fn secured_of(loaded: LoadedScheme) -> Result<SecuredScheme, Error> {
    match loaded {
        LoadedScheme::Secured(ss) => Ok(ss),
        LoadedScheme::Plain(s) => transform::secure(&s),
    }
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    field: String,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    costs: seclin::CostReport,
    schedule: seclin::scheme::BroadcastSchedule,
    secrecy: &'a SecrecyReport,
    warnings: Vec<transform::Warning>,
    pass: bool,
}

fn check_output<'a>(s: &Scheme, report: &'a SecrecyReport, ss: Option<&SecuredScheme>) -> CheckOutput<'a> {
    CheckOutput {
        field: s.field().to_string(),
        n: s.n(),
        k: s.k(),
        l: s.l(),
        costs: s.costs(),
        schedule: s.schedule(),
        secrecy: report,
        warnings: ss.map(|ss| ss.warnings().to_vec()).unwrap_or_default(),
        pass: report.all_pass(),
    }
}

fn print_check(out: &CheckOutput<'_>) {
    println!("field {}  N = {}  K = {}  L = {}", out.field, out.n, out.k, out.l);
    println!("δ = {}  γ = {}", format_ratio(&out.costs.delta), format_ratio(&out.costs.gamma));
    println!("user  w_H  Sup(d_k)        rank(D_red)  reduced-rank  access-bound  C-rank");
    for (u, sup) in out.per_user().iter().zip(&out.schedule.sup_d) {
        let lemma = match &u.lemma1 {
            Some(l) => format!("{}/{} {}", l.rank, l.required, if l.ok { "ok" } else { "FAIL" }),
            None => "n/a".into(),
        };
        println!(
            "{:>4}  {:>3}  {:<14}  {:>11}  {:<12}  {:<12}  {}{}",
            u.user,
            u.w_h,
            sup.to_string(),
            u.dred_rank,
            if u.theorem1_ok { "ok" } else { "FAIL" },
            if u.corollary1_ok { "ok" } else { "FAIL" },
            lemma,
            if u.nondegenerate { "" } else { "  (E(Sup,:) rank deficient)" }
        );
    }
    let g = &out.secrecy.global;
    println!(
        "δ = {} ≤ 1 − (K−1)/N = {}: {}",
        format_ratio(&g.delta),
        format_ratio(&g.delta_bound),
        if g.ok { "ok" } else { "FAIL (communication-cost bound violated)" }
    );
    for w in &out.warnings {
        println!("warning: {}", serde_json::to_string(w).unwrap_or_default());
    }
    println!("{}", if out.pass { "PASS" } else { "FAIL" });
}

impl CheckOutput<'_> {
    fn per_user(&self) -> &[secrecy::UserSecrecy] {
        &self.secrecy.per_user
    }
}

fn cmd_check(as_json: bool, path: &Path) -> CmdResult {
    let loaded = load_scheme_file(path)?;
    let s = loaded.base();
    let report = secrecy::full_report(s, loaded.secured());
    let out = check_output(s, &report, loaded.secured());
    if as_json {
        emit(&out)?;
    } else {
        print_check(&out);
    }
    Ok(if out.pass { 0 } else { 3 })
}

fn read_requests(path: &Path) -> Result<(RequestsDocument, FieldSpec, Matrix), Failure> {
    let doc: RequestsDocument = serde_json::from_str(&fs::read_to_string(path)?).map_err(Error::from)?;
    let (field, f) = doc.requests()?;
    Ok((doc, field, f))
}

fn build_scheme(doc: &RequestsDocument, field: FieldSpec, f: &Matrix, form: Form, p: Option<&Path>, e_bot: Option<&Path>) -> Result<Scheme, Failure> {
    match form {
        Form::Systematic => {
            let p = match p {
                Some(path) => parse_matrix_json(&fs::read_to_string(path)?, "P", field)?,
                None => {
                    let n = doc.n.unwrap_or(doc.k);
                    if n < doc.k {
                        return Err(Error::DimensionViolation(format!("N = {n} < K = {}", doc.k)).into());
                    }
                    let ones = vec![vec![1i64; n - doc.k]; doc.k];
                    let mut m = Matrix::from_ints(field, &ones)?;
                    if n == doc.k {
                        m = Matrix::zeros(field, doc.k, 0);
                    }
                    m
                }
            };
            let e_bot = match e_bot {
                Some(path) => Some(parse_matrix_json(&fs::read_to_string(path)?, "E_bot", field)?),
                None => None,
            };
            Ok(factorize::systematic_factorize(f, &p, e_bot.as_ref())?)
        }
        Form::Identity => Ok(factorize::identity_scheme(f, IdentityVariant::Assigned)?),
        Form::Decentralized => Ok(factorize::identity_scheme(f, IdentityVariant::Decentralized)?),
    }
}

fn cmd_factorize(as_json: bool, a: &FactorizeArgs) -> CmdResult {
    let (doc, field, f) = read_requests(&a.requests)?;
    let s = build_scheme(&doc, field, &f, a.form, a.p.as_deref(), a.e_bot.as_deref())?;
    let document = s.to_document();
    let report = secrecy::full_report(&s, None);
    if let Some(path) = &a.output {
        fs::write(path, document.to_json_pretty())?;
    }
    if as_json {
        emit(&json!({ "scheme": document, "check": check_output(&s, &report, None) }))?;
    } else {
        if a.output.is_none() {
            print!("{}", document.to_json_pretty());
        }
        print_check(&check_output(&s, &report, None));
    }
    Ok(if report.all_pass() { 0 } else { 3 })
}

fn cmd_secure(as_json: bool, path: &Path, output: Option<&Path>) -> CmdResult {
    let loaded = load_scheme_file(path)?;
    let ss = transform::secure(loaded.base())?;
    let doc = ss.to_document();
    if let Some(out) = output {
        fs::write(out, doc.to_json_pretty())?;
    }
    if as_json {
        emit(&json!({
            "x": ss.x(),
            "warnings": ss.warnings(),
            "tasks": transform::augmented_tasks(&ss),
            "scheme": doc,
        }))?;
    } else {
        if output.is_none() {
            print!("{}", doc.to_json_pretty());
        }
        println!("x = {} randomness symbols", ss.x());
        for t in transform::augmented_tasks(&ss) {
            println!(
                "server {}: messages {:?} randomness {:?}",
                t.server,
                t.messages.one_based(),
                t.randomness.one_based()
            );
        }
        for w in ss.warnings() {
            println!("warning: {}", serde_json::to_string(w).unwrap_or_default());
        }
    }
    Ok(0)
}

fn cmd_simulate(as_json: bool, a: &SimulateArgs) -> CmdResult {
    let ss = secured_of(load_scheme_file(&a.scheme)?)?;
    let (report, outcomes) = simulate::run_batch(&Protocol::new(&ss), &a.sim.params(), a.sim.trials, a.csv.is_some())?;
    if let Some(path) = &a.csv {
        simulate::write_csv(&outcomes, fs::File::create(path)?)?;
    }
    if as_json {
        emit(&report)?;
    } else {
        println!("trials {}  seed {}", report.trials, report.seed);
        for (u, (rate, err)) in report.per_user_success_rate.iter().zip(&report.per_user_max_abs_error).enumerate() {
            println!("user {}: success {:.6}  max |error| {:.3e}", u + 1, rate, err);
        }
        println!("overall success rate {:.6}", report.success_rate);
    }
    Ok(if report.success_rate == 1.0 { 0 } else { 3 })
}

/// The scheme to audit over GF(p), with or without its randomness.
fn gf_target(loaded: LoadedScheme, modulus: Option<u64>, unsecured: bool) -> Result<SecuredScheme, Error> {
    let (base, c) = match &loaded {
        LoadedScheme::Plain(s) => (s.clone(), None),
        LoadedScheme::Secured(ss) => (ss.base().clone(), Some(ss.c().clone())),
    };
    let field = match (modulus, base.field()) {
        (Some(p), FieldSpec::Real) => FieldSpec::prime(p)?,
        (Some(p), f) if f.modulus() == Some(p) => f,
        (Some(p), f) => {
            return Err(Error::InvalidArgument(format!("scheme is over {f}; cannot reread modulo {p}")));
        }
        (None, FieldSpec::Real) => {
            return Err(Error::InvalidArgument(
                "exhaustive audit needs a prime field; pass --modulus".into(),
            ))
        }
        (None, f) => f,
    };
    let base = base.reinterpret(field)?;
    if unsecured {
        let n = base.n();
        return SecuredScheme::with_randomness(base, Matrix::zeros(field, n, 0));
    }
    match c {
        Some(c) => SecuredScheme::with_randomness(base, c.convert(field)?),
        None => transform::secure(&base),
    }
}

fn print_leakage(r: &LeakageReport) {
    let unit = match r.unit {
        Unit::Bits => "bits",
        Unit::Nats => "nats",
    };
    for u in &r.per_user {
        let mut line = format!("user {}  w_H = {}  S_k = {:?}", u.user, u.w_h, u.s_k.one_based());
        if let Some(v) = u.exact_leakage {
            line += &format!("  I = {v:.12} {unit}");
        }
        if let Some(z) = u.exact_zero {
            line += if z { " (exactly zero)" } else { " (positive)" };
        }
        if let Some(b) = u.bound {
            line += &format!("  bound = {b:.12} {unit}");
        }
        if let Some(m) = u.m_k {
            line += &format!("  M_k = {m:.6}");
        }
        if let (Some(lx), Some(ly)) = (u.lambda_max_x, u.lambda_min_y) {
            line += &format!("  λ_max(XXᵀ) = {lx:.6}  λ_min(YYᵀ) = {ly:.6}  rows {:?}", u.rows.one_based());
        }
        if let Some(s) = u.sigma_c {
            line += &format!("  σ_c = {s:.6e}");
        }
        println!("{line}");
    }
}

fn cmd_audit_exact(as_json: bool, a: &AuditExactArgs) -> CmdResult {
    let ss = gf_target(load_scheme_file(&a.scheme)?, a.modulus, a.unsecured)?;
    let users = parse_users(&a.user, ss.base().k())?;
    let report = audit::gf_report(&ss, &users)?;
    if as_json {
        emit(&report)?;
    } else {
        println!("field {}  x = {}", ss.base().field(), ss.x());
        print_leakage(&report);
    }
    let leaks = report.per_user.iter().any(|u| u.exact_zero == Some(false));
    Ok(if leaks { 3 } else { 0 })
}

fn cmd_gaussian(as_json: bool, a: &GaussianArgs, exact: bool) -> CmdResult {
    let ss = secured_of(load_scheme_file(&a.scheme)?)?;
    let users = parse_users(&a.user, ss.base().k())?;
    let report = audit::gaussian_report(&ss, &users, a.sigma_w, a.sigma_c, exact)?;
    if as_json {
        emit(&report)?;
    } else {
        print_leakage(&report);
    }
    Ok(0)
}

fn cmd_epsilon(as_json: bool, a: &EpsilonArgs) -> CmdResult {
    let ss = secured_of(load_scheme_file(&a.scheme)?)?;
    let users = parse_users(&a.user, ss.base().k())?;
    let report = audit::epsilon_report(&ss, &users, a.sigma_w, a.eps)?;
    if as_json {
        emit(&report)?;
    } else {
        print_leakage(&report);
    }
    Ok(0)
}

/// Tags a failure with the pipeline stage it came from.
fn stage<T>(name: &str, r: Result<T, impl Into<Failure>>) -> Result<T, Failure> {
    r.map_err(|e| {
        let f: Failure = e.into();
        Failure {
            code: f.code,
            message: format!("stage {name}: {}", f.message),
        }
    })
}

fn cmd_pipeline(as_json: bool, a: &PipelineArgs) -> CmdResult {
    let text = stage("load", fs::read_to_string(&a.input))?;
    let value: serde_json::Value = stage("load", serde_json::from_str(&text).map_err(Error::from))?;
    let loaded = if value.get("D").is_some() {
        stage("load", SchemeDocument::from_json(&text).and_then(|d| d.load()))?
    } else {
        let (doc, field, f) = stage("load", read_requests(&a.input))?;
        LoadedScheme::Plain(stage("factorize", build_scheme(&doc, field, &f, a.form, a.p.as_deref(), None))?)
    };
    let s = loaded.base().clone();
    stage("bundle", fs::create_dir_all(&a.out))?;
    stage("bundle", fs::write(a.out.join("scheme.json"), s.to_document().to_json_pretty()))?;

    let ss = stage("secure", secured_of(loaded))?;
    let report = secrecy::full_report(&s, Some(&ss));
    let check = check_output(&s, &report, Some(&ss));
    write_json(&a.out.join("check.json"), &check)?;
    stage("bundle", fs::write(a.out.join("secured.json"), ss.to_document().to_json_pretty()))?;
    write_json(&a.out.join("tasks.json"), &transform::augmented_tasks(&ss))?;

    let (sim, _) = stage("simulate", simulate::run_batch(&Protocol::new(&ss), &a.sim.params(), a.sim.trials, false))?;
    write_json(&a.out.join("simulate.json"), &sim)?;

    let users: Vec<usize> = (0..s.k()).collect();
    let mut audits = serde_json::Map::new();
    if s.field().is_real() {
        let g = stage("audit", audit::gaussian_report(&ss, &users, a.sim.sigma_w, a.sim.sigma_c, true))?;
        audits.insert("gaussian".into(), serde_json::to_value(&g).map_err(Error::from)?);
        if let Some(eps) = a.eps {
            let e = stage("audit", audit::epsilon_report(&ss, &users, a.sim.sigma_w, eps))?;
            audits.insert("epsilon".into(), serde_json::to_value(&e).map_err(Error::from)?);
        }
    }
    if !s.field().is_real() || a.modulus.is_some() {
        let target = stage("audit", gf_target(LoadedScheme::Secured(ss.clone()), a.modulus, false))?;
        let g = stage("audit", audit::gf_report(&target, &users))?;
        audits.insert("exact".into(), serde_json::to_value(&g).map_err(Error::from)?);
    }
    write_json(&a.out.join("audit.json"), &audits)?;

    let exact_zero = audits
        .get("exact")
        .map(|e| e["per_user"].as_array().is_some_and(|v| v.iter().all(|u| u["exact_zero"] == true)));
    let summary = json!({
        "field": s.field().to_string(),
        "N": s.n(), "K": s.k(), "L": s.l(), "x": ss.x(),
        "delta": format_ratio(&check.costs.delta),
        "gamma": format_ratio(&check.costs.gamma),
        "secrecy_pass": check.pass,
        "simulation_success_rate": sim.success_rate,
        "exact_zero_leakage": exact_zero,
        "seed": a.sim.seed,
        "trials": a.sim.trials,
        "files": ["scheme.json", "check.json", "secured.json", "tasks.json", "simulate.json", "audit.json"],
    });
    write_json(&a.out.join("summary.json"), &summary)?;
    if as_json {
        emit(&summary)?;
    } else {
        println!("bundle written to {}", a.out.display());
        println!(
            "δ = {}  γ = {}  x = {}  secrecy {}  simulation success {:.6}",
            format_ratio(&check.costs.delta),
            format_ratio(&check.costs.gamma),
            ss.x(),
            if check.pass { "pass" } else { "FAIL" },
            sim.success_rate
        );
        if let Some(z) = exact_zero {
            println!("exact leakage zero for every user: {z}");
        }
    }
    let ok = check.pass && sim.success_rate == 1.0 && exact_zero != Some(false);
    Ok(if ok { 0 } else { 3 })
}
