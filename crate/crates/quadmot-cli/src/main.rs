//! `quadmot` command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 unparsable input or flags,
//! 3 input that parses but violates a declared invariant. Every failure is
//! reported on stderr as `error[<code>]: <message>`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quadmot::corr::{diagonal, FamilyKind, ProjectorFamily};
use quadmot::fgl::default_truncation;
use quadmot::forms::{validate, FormProfile};
use quadmot::mdt::{
    check_outer_excellent, chow_to_morava, classify_k2, morava_to_chow, small_kahn_diagram,
    stable_reduce, Flavor, MDTDiagram,
};
use quadmot::motives::{pfister_motive, MotiveExpr, SummandKind, Symbol, TwistMode};
use quadmot::ops::{steenrod_lemma_predicates, steenrod_total};
use quadmot::{fgl_from_log, morava_log, CoeffRing, Error, SplitQuadric, Theory, TheoryKind};

#[derive(Parser, Debug)]
#[command(name = "quadmot", version, about = "Oriented cohomology of split quadrics and K(n)-motivic decomposition types")]
struct Cli {
    /// Height of the Morava theory.
    #[arg(long, global = true, default_value_t = 2)]
    n: u32,
    /// 2-adic precision M of integral coefficients.
    #[arg(long, global = true, default_value_t = 8)]
    precision: u32,
    /// Truncation degree N of formal series [default: 2^(n+1) + 2].
    #[arg(long, global = true)]
    truncation: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Ascii)]
    format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Ascii,
    Svg,
    /// Structured text (JSON).
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TheoryArg {
    Chow,
    Morava,
    Connective,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Logarithm and 2-series of the Morava formal group law.
    Fgl,
    /// Multiplication table and powers of h on a split quadric.
    Ring {
        #[arg(long)]
        dim: u32,
        #[arg(long, value_enum, default_value_t = TheoryArg::Morava)]
        theory: TheoryArg,
        /// Use Z/2^M coefficients instead of F_2.
        #[arg(long)]
        integral: bool,
    },
    /// Diagonal of Q × Q and the projector families with their checks.
    Diag {
        #[arg(long)]
        dim: u32,
        #[arg(long, value_enum, default_value_t = TheoryArg::Morava)]
        theory: TheoryArg,
    },
    /// Total Steenrod operation on the Chow basis, and the l_0 lemma reports.
    Steenrod {
        #[arg(long)]
        dim: Option<u32>,
        /// Report the lemma items for every admissible r at height n.
        #[arg(long)]
        lemma: bool,
    },
    /// Chow ↔ Morava transformation of a diagram or of a form profile.
    Mdt { input: String },
    /// The K(2) decomposition type of a form profile.
    #[command(name = "classify-k2")]
    ClassifyK2 { input: String },
    /// Queries on motive expressions.
    Motive {
        #[command(subcommand)]
        query: MotiveQuery,
    },
}

#[derive(Subcommand, Debug)]
enum MotiveQuery {
    /// Morava motive of the Pfister quadric of a symbol.
    Pfister {
        #[arg(long)]
        symbol: String,
    },
    /// Tensor product of two expressions such as "L_a(1), 1(0)".
    Tensor { left: String, right: String },
    /// Base change killing a symbol.
    Kill {
        expr: String,
        #[arg(long)]
        symbol: String,
    },
    /// Number of summands L_α(j) detected by killing α.
    Detect {
        expr: String,
        #[arg(long)]
        symbol: String,
        #[arg(long)]
        twist: i64,
    },
}

/// A failure with its exit status and machine-readable reason.
struct Failure {
    status: u8,
    code: String,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure { status: 2, code: "parse".into(), message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::PrecisionOverflow(_) | Error::NonIntegral(_) | Error::Singular(_) => 1,
            _ => 3,
        };
        Failure { status, code: e.code().into(), message: e.to_string() }
    }
}

type Out = Result<String, Failure>;

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::parse(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure { status: 2, code: "io".into(), message: format!("{path}: {e}") })
    }
}

fn parse_profile(text: &str) -> Result<FormProfile, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::parse(format!("profile: {e}")))
}

/// Rejects profiles with violated invariants, listing every violation.
fn checked_profile(text: &str) -> Result<FormProfile, Failure> {
    let p = parse_profile(text)?;
    let report = validate(&p);
    if report.is_empty() {
        return Ok(p);
    }
    let lines: Vec<String> = report.iter().map(|v| format!("violation[{}]: {}", v.code, v.message)).collect();
    Err(Failure { status: 3, code: "validation".into(), message: format!("invalid profile\n{}", lines.join("\n")) })
}

fn truncation(cli: &Cli) -> usize {
    cli.truncation.unwrap_or_else(|| default_truncation(cli.n))
}

fn quadric(cli: &Cli, theory: TheoryArg, dim: u32, integral: bool) -> Result<SplitQuadric, Failure> {
    let kind = match theory {
        TheoryArg::Chow => TheoryKind::Chow,
        TheoryArg::Morava => TheoryKind::Morava(cli.n),
        TheoryArg::Connective => TheoryKind::ConnectiveMorava(cli.n),
    };
    let trunc = cli.truncation.unwrap_or_else(|| Theory::truncation_for(kind, dim));
    let th = match (theory, integral) {
        (TheoryArg::Chow, false) => Theory::chow_mod2(trunc),
        (TheoryArg::Chow, true) => Theory::chow_integral(cli.precision, trunc),
        (TheoryArg::Morava, false) => Theory::morava_mod2(cli.n, trunc)?,
        (TheoryArg::Morava, true) => Theory::morava_integral(cli.n, cli.precision, trunc)?,
        (TheoryArg::Connective, false) => Theory::connective_morava_mod2(cli.n, trunc)?,
        (TheoryArg::Connective, true) => {
            let ring = CoeffRing::integral(cli.precision, cli.n).connective();
            Theory::new(kind, ring, trunc)?
        }
    };
    Ok(SplitQuadric::new(dim, th)?)
}

fn no_svg(cli: &Cli) -> Result<(), Failure> {
    if cli.format == Format::Svg {
        return Err(Failure { status: 2, code: "format".into(), message: "svg output is only produced for diagrams".into() });
    }
    Ok(())
}

fn json_text(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
    s.push('\n');
    s
}

fn run_fgl(cli: &Cli) -> Out {
    no_svg(cli)?;
    let ring = CoeffRing::integral(cli.precision, cli.n);
    let log = morava_log(cli.n, ring, truncation(cli))?;
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    for (k, e, num, den) in log.nonzero_terms() {
        let coef = match (num, den) {
            (1, 0) => String::new(),
            (_, 0) => format!("{num}·"),
            _ => format!("{num}/{}·", 1u64 << den),
        };
        let v = match e {
            0 => String::new(),
            1 => "v·".into(),
            _ => format!("v^{e}·"),
        };
        let t = if k == 1 { "t".to_string() } else { format!("t^{k}") };
        parts.push(format!("{coef}{v}{t}"));
        rows.push(json!({"degree": k, "v_exponent": e, "numerator": num, "denominator_log2": den}));
    }
    let law = fgl_from_log(&log)?;
    let mut two = Vec::new();
    for (k, c) in law.two_series().iter().enumerate() {
        if !c.is_zero() {
            two.push((k, c.to_string()));
        }
    }
    if cli.format == Format::Text {
        return Ok(json_text(json!({
            "n": cli.n,
            "precision": cli.precision,
            "truncation": truncation(cli),
            "log": rows,
            "two_series": two.iter().map(|(k, c)| json!({"degree": k, "coefficient": c})).collect::<Vec<_>>(),
        })));
    }
    let series: Vec<String> = two.iter().map(|(k, c)| format!("({c})·t^{k}")).collect();
    Ok(format!(
        "log(t) = {}\n[2](t) = {}\n",
        parts.join(" + "),
        if series.is_empty() { "0".into() } else { series.join(" + ") }
    ))
}

fn run_ring(cli: &Cli, dim: u32, theory: TheoryArg, integral: bool) -> Out {
    no_svg(cli)?;
    let q = quadric(cli, theory, dim, integral)?;
    let basis = q.basis();
    let mut products = Vec::new();
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i..] {
            let x = q.mul_basis(*a, *b);
            if !x.is_zero() {
                products.push((a.to_string(), b.to_string(), x.to_string()));
            }
        }
    }
    let mut powers = Vec::new();
    for k in 0..=dim {
        powers.push((k, q.h_power(k)?.to_string()));
    }
    if cli.format == Format::Text {
        return Ok(json_text(json!({
            "dim": dim,
            "basis": basis.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "products": products.iter().map(|(a, b, x)| json!([a, b, x])).collect::<Vec<_>>(),
            "h_powers": powers.iter().map(|(k, x)| json!({"k": k, "value": x})).collect::<Vec<_>>(),
        })));
    }
    let mut s = String::new();
    let names: Vec<String> = basis.iter().map(ToString::to_string).collect();
    s.push_str(&format!("basis: {}\n", names.join(", ")));
    s.push_str("products:\n");
    for (a, b, x) in &products {
        s.push_str(&format!("  {a} · {b} = {x}\n"));
    }
    s.push_str("powers of h:\n");
    for (k, x) in &powers {
        s.push_str(&format!("  h^{k} = {x}\n"));
    }
    Ok(s)
}

fn run_diag(cli: &Cli, dim: u32, theory: TheoryArg) -> Out {
    no_svg(cli)?;
    let q = quadric(cli, theory, dim, false)?;
    let delta = diagonal(&q)?;
    let kinds: &[FamilyKind] = match theory {
        TheoryArg::Chow => &[FamilyKind::OmegaCh],
        TheoryArg::Morava => &[FamilyKind::Pi, FamilyKind::Varpi],
        TheoryArg::Connective => &[FamilyKind::OmegaCkn],
    };
    let mut reports = Vec::new();
    for kind in kinds {
        match ProjectorFamily::new(*kind, &q, cli.n) {
            Ok(f) => {
                let r = f.verify()?;
                reports.push((format!("{kind:?}"), f.members.iter().map(|(i, _)| *i).collect::<Vec<_>>(), Some(r)));
            }
            Err(e) => reports.push((format!("{kind:?}: {e}"), vec![], None)),
        }
    }
    if cli.format == Format::Text {
        let fams: Vec<Value> = reports
            .iter()
            .map(|(k, idx, r)| match r {
                Some(r) => json!({
                    "family": k,
                    "indices": idx,
                    "ok": r.ok(),
                    "non_idempotent": r.non_idempotent,
                    "non_orthogonal": r.non_orthogonal,
                    "orthogonality_checked": r.orthogonality_checked,
                }),
                None => json!({"family": k, "skipped": true}),
            })
            .collect();
        return Ok(json_text(json!({"dim": dim, "diagonal": delta.to_string(), "families": fams})));
    }
    let mut s = format!("Δ = {delta}\n");
    for (k, idx, r) in reports {
        match r {
            Some(r) => s.push_str(&format!(
                "{k} {idx:?}: {} (idempotent failures {:?}, orthogonality failures {:?}{})\n",
                if r.ok() { "ok" } else { "FAILED" },
                r.non_idempotent,
                r.non_orthogonal,
                if r.orthogonality_checked { "" } else { ", orthogonality not checked" }
            )),
            None => s.push_str(&format!("{k} (skipped)\n")),
        }
    }
    Ok(s)
}

fn run_steenrod(cli: &Cli, dim: Option<u32>, lemma: bool) -> Out {
    no_svg(cli)?;
    let mut text = String::new();
    let mut doc = json!({});
    if let Some(dim) = dim {
        let q = quadric(cli, TheoryArg::Chow, dim, false)?;
        let mut rows = Vec::new();
        for b in q.basis() {
            let st = steenrod_total(&q, &q.basis_class(b))?;
            let terms: Vec<(i64, String)> = st.terms().iter().map(|(e, x)| (*e, x.to_string())).collect();
            let shown: Vec<String> = terms.iter().map(|(e, x)| format!("({x})t^{e}")).collect();
            text.push_str(&format!("St({b}) = {}\n", shown.join(" + ")));
            rows.push(json!({"class": b.to_string(), "terms": terms.iter().map(|(e, x)| json!([e, x])).collect::<Vec<_>>()}));
        }
        doc["steenrod"] = json!(rows);
    }
    if lemma {
        let mut rows = Vec::new();
        for r in 1..(1u64 << cli.n) {
            let rep = steenrod_lemma_predicates(cli.n, r)?;
            text.push_str(&format!(
                "n={} r={r} D={}: item1={} item2={:?} item3={:?} item4={:?} item5={:?} -> {}\n",
                rep.n,
                rep.dim,
                rep.item1,
                rep.item2,
                rep.item3,
                rep.item4,
                rep.item5,
                if rep.all_hold() { "holds" } else { "FAILS" }
            ));
            rows.push(json!({
                "r": r, "dim": rep.dim, "item1": rep.item1, "item2": rep.item2,
                "item3": rep.item3, "item4": rep.item4, "item5": rep.item5, "all_hold": rep.all_hold(),
            }));
        }
        doc["lemma"] = json!(rows);
    }
    if dim.is_none() && !lemma {
        return Err(Failure::parse("steenrod needs --dim or --lemma"));
    }
    Ok(if cli.format == Format::Text { json_text(doc) } else { text })
}

/// Renders a pair of diagrams (Chow first) in the requested format.
fn emit_pair(cli: &Cli, chow: &MDTDiagram, morava: &MDTDiagram, n: u32, extra: Value) -> Out {
    match cli.format {
        Format::Ascii => Ok(format!(
            "Chow MDT (D = {}):\n{}\nK({n}) MDT:\n{}",
            chow.dim(),
            chow.to_ascii(Some(n)),
            morava.to_ascii(None)
        )),
        Format::Svg => {
            let a = chow.to_svg(Some(n));
            let b = morava.to_svg(None);
            let w = 40 * (chow.dim() as i64 + 2);
            Ok(format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"240\">\n<g>\n{a}</g>\n<g transform=\"translate(0,120)\">\n{b}</g>\n</svg>\n"
            ))
        }
        Format::Text => {
            let mut doc = json!({"chow": chow, "morava": morava});
            if let Value::Object(m) = extra {
                for (k, v) in m {
                    doc[k] = v;
                }
            }
            Ok(json_text(doc))
        }
    }
}

fn run_mdt(cli: &Cli, input: &str) -> Out {
    let text = read_input(input)?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| Failure::parse(format!("input: {e}")))?;
    let n = cli.n;
    if raw.get("flavor").is_some() {
        let m: MDTDiagram = serde_json::from_value(raw).map_err(|e| Failure::parse(format!("diagram: {e}")))?;
        return match m.flavor() {
            Flavor::Chow => {
                let report = check_outer_excellent(&m, n)?;
                if !report.ok() {
                    return Err(Failure {
                        status: 3,
                        code: "outer_violation".into(),
                        message: format!("outer excellent connections violated: {:?}", report.violations),
                    });
                }
                let k = chow_to_morava(&m, n)?;
                emit_pair(cli, &m, &k, n, json!({}))
            }
            Flavor::Morava(h) => {
                if h != n {
                    return Err(Error::ModeMismatch(format!("diagram is for K({h}), --n is {n}")).into());
                }
                let c = morava_to_chow(&m, n)?;
                emit_pair(cli, &c, &m, n, json!({}))
            }
        };
    }
    let p = checked_profile(&text)?;
    let red = stable_reduce(&p, n)?;
    let info = json!({"level": red.level, "offset": red.offset, "kernel_dim": red.kernel_dim});
    let small = p.kahn(n).is_some_and(|k| k as u64 <= 1u64 << n) && p.dim as u64 <= 1u64 << (n + 1);
    if small {
        let k = small_kahn_diagram(&p, n)?;
        let c = morava_to_chow(&k, n)?;
        return emit_pair(cli, &c, &k, n, info);
    }
    let head = format!(
        "K({n})-kernel form at level {} of dimension {}, twist offset {}\n",
        red.level, red.kernel_dim, red.offset
    );
    match cli.format {
        Format::Ascii => Ok(format!("{head}window:\n{}", red.shell.to_ascii(None))),
        Format::Svg => Ok(red.shell.to_svg(None)),
        Format::Text => {
            let mut doc = info;
            doc["shell"] = json!(red.shell);
            Ok(json_text(doc))
        }
    }
}

fn run_classify(cli: &Cli, input: &str) -> Out {
    let p = checked_profile(&read_input(input)?)?;
    let c = classify_k2(&p)?;
    match cli.format {
        Format::Ascii => Ok(format!("row: {}\n{}\n{}", c.row, c.glyph, c.diagram.to_ascii(None))),
        Format::Svg => Ok(c.diagram.to_svg(None)),
        Format::Text => Ok(json_text(json!({"row": c.row, "glyph": c.glyph, "diagram": c.diagram}))),
    }
}

/// Parses `"1(0), L_a(2), L_a+b(1)"`.
fn parse_expr(mode: TwistMode, text: &str) -> Result<MotiveExpr, Failure> {
    let mut m = MotiveExpr::zero(mode);
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Failure::parse(format!("cannot read summand {part:?}"));
        let open = part.rfind('(').ok_or_else(bad)?;
        if !part.ends_with(')') {
            return Err(bad());
        }
        let twist: i64 = part[open + 1..part.len() - 1].trim().parse().map_err(|_| bad())?;
        let head = &part[..open];
        let kind = if head == "1" {
            SummandKind::Tate
        } else if let Some(sym) = head.strip_prefix("L_") {
            SummandKind::L { symbol: Symbol::parse(sym).map_err(|_| bad())? }
        } else {
            return Err(bad());
        };
        m.push(kind, twist);
    }
    Ok(m)
}

fn run_motive(cli: &Cli, q: &MotiveQuery) -> Out {
    no_svg(cli)?;
    let mode = TwistMode::Periodic(cli.n);
    let sym = |s: &str| Symbol::parse(s).map_err(|e| Failure::parse(e.to_string()));
    let (name, value): (&str, Value) = match q {
        MotiveQuery::Pfister { symbol } => {
            let m = pfister_motive(cli.n, &sym(symbol)?);
            ("motive", json!(m.to_string()))
        }
        MotiveQuery::Tensor { left, right } => {
            let m = parse_expr(mode, left)?.tensor(&parse_expr(mode, right)?)?;
            ("motive", json!(m.to_string()))
        }
        MotiveQuery::Kill { expr, symbol } => {
            let m = parse_expr(mode, expr)?.base_change_kill(&sym(symbol)?);
            ("motive", json!(m.to_string()))
        }
        MotiveQuery::Detect { expr, symbol, twist } => {
            let c = parse_expr(mode, expr)?.detect_count(&sym(symbol)?, *twist)?;
            ("count", json!(c))
        }
    };
    Ok(match cli.format {
        Format::Text => json_text(json!({ name: value })),
        _ => format!("{}\n", value.as_str().map(String::from).unwrap_or_else(|| value.to_string())),
    })
}

fn run(cli: &Cli) -> Out {
    if cli.n == 0 {
        return Err(Failure::parse("--n must be at least 1"));
    }
    match &cli.command {
        Command::Fgl => run_fgl(cli),
        Command::Ring { dim, theory, integral } => run_ring(cli, *dim, *theory, *integral),
        Command::Diag { dim, theory } => run_diag(cli, *dim, *theory),
        Command::Steenrod { dim, lemma } => run_steenrod(cli, *dim, *lemma),
        Command::Mdt { input } => run_mdt(cli, input),
        Command::ClassifyK2 { input } => run_classify(cli, input),
        Command::Motive { query } => run_motive(cli, query),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            status: 1,
            code: "io".into(),
            message: format!("{}: {e}", path.display()),
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure {
            status: 1,
            code: "io".into(),
            message: e.to_string(),
        }),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            ExitCode::from(f.status)
        }
    }
}
