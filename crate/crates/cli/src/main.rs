//! Command-line front end: analyze divisor files, run the equidistribution
//! pipeline, intersection numbers, dynamics formulas and the height
//! convergence demo. Output is deterministic byte-for-byte.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use essmin::concave::PAConcave;
use essmin::dynamical;
use essmin::equidist::{self, Eligibility, MahlerOptions, MahlerValue};
use essmin::error::Error;
use essmin::exactgeom::polytope::Polytope;
use essmin::heights;
use essmin::scalar::{format_rational, LogLinear, Rational};
use essmin::schema;
use essmin::toric::{Roof, ToricAdelicDivisor};

#[derive(Parser)]
#[command(name = "essmin", version, about = "exact essential-minimum toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// polytope, roofs, minima, volumes, positivity and the Zhang check
    Analyze { file: PathBuf },
    /// wideness, balanced gradients, measures, derivative and Mahler data
    Equidist {
        file: PathBuf,
        #[command(flatten)]
        opts: EquidistOpts,
    },
    /// arithmetic (d+1 files) or geometric (d files) intersection numbers
    Intersect { files: Vec<PathBuf> },
    /// index set, derivative formula and approximation bounds
    Dynamics {
        file: PathBuf,
        /// table length for the approximation sequence
        #[arg(long, default_value_t = 20)]
        nmax: u32,
    },
    /// small-sequence height convergence experiment
    Demo {
        file: PathBuf,
        /// divisor whose heights converge to the derivative
        #[arg(long)]
        along: Option<PathBuf>,
        /// number of sequence points
        #[arg(long, default_value_t = 50)]
        length: usize,
    },
}

#[derive(Args)]
struct EquidistOpts {
    /// second divisor for the derivative of the essential minimum
    #[arg(long)]
    along: Option<PathBuf>,
    /// Laurent polynomial for the Gauss–Mahler section, e.g. "x - 2"
    #[arg(long)]
    poly: Option<String>,
    #[arg(long, default_value_t = 65536)]
    quadrature_points: u64,
}

fn exit_code_of(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        Error::NotSemipositive(_)
        | Error::NotWide
        | Error::NotQMode
        | Error::LevelAboveMax(_)
        | Error::UnrealizableProfile(_)
        | Error::OutsideDomain => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { file } => load(file).and_then(|d| cmd_analyze(&d, cli.format)),
        Command::Equidist { file, opts } => {
            load(file).and_then(|d| cmd_equidist(&d, opts, cli.format))
        }
        Command::Intersect { files } => cmd_intersect(files, cli.format),
        Command::Dynamics { file, nmax } => cmd_dynamics(file, *nmax, cli.format),
        Command::Demo {
            file,
            along,
            length,
        } => cmd_demo(file, along.as_ref(), *length, cli.format),
    };
    match result {
        Ok(text) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(3);
                }
            } else {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}

fn load(path: &PathBuf) -> Result<ToricAdelicDivisor, Error> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    schema::divisor_from_json(&raw)
}

fn fmt_ll(x: &LogLinear) -> String {
    if x.is_rational() {
        format_rational(&x.rational)
    } else {
        format!("{x} (~{:.12})", x.to_f64())
    }
}

fn fmt_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

fn fmt_llvec(v: &[LogLinear]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn fmt_polytope(p: &Polytope) -> String {
    let parts: Vec<String> = p.vertices.iter().map(|v| fmt_vec(v)).collect();
    parts.join(" ")
}

fn fmt_pa(f: &PAConcave) -> String {
    let parts: Vec<String> = f
        .pieces
        .iter()
        .map(|p| format!("{}·x + {}", fmt_vec(&p.gradient), format_rational(&p.constant)))
        .collect();
    format!("min[{}]", parts.join("; "))
}

fn fmt_roof(r: &Roof) -> String {
    match r {
        Roof::Pa(f) => fmt_pa(f),
        Roof::Affine { u, c } => format!("{}·x + {}", fmt_llvec(u), c),
    }
}

fn ll_json(x: &LogLinear) -> serde_json::Value {
    if x.is_rational() {
        json!(format_rational(&x.rational))
    } else {
        json!(x.to_string())
    }
}

// ---------------------------------------------------------------------------
// analyze

fn cmd_analyze(div: &ToricAdelicDivisor, format: Format) -> Result<String, Error> {
    if format == Format::Csv {
        return Err(Error::Semantic("csv output is only defined for demo".into()));
    }
    let flags = div.positivity()?;
    let Some(delta) = div.delta() else {
        return Ok(match format {
            Format::Text => format!(
                "polytope: empty (divisor is not pseudo-effective)\nflags: pseudo-effective no, big no, semipositive {}, nef no\n",
                yn(flags.semipositive)
            ),
            _ => pretty_json(&json!({
                "polytope": serde_json::Value::Null,
                "flags": flags_json(&flags),
            })),
        });
    };
    let (per_place, global) = div.roof_functions()?;
    let (mu_ess, mu_abs) = div.minima()?;
    let vols = div.volumes()?;
    let zhang = if delta.is_fulldim() {
        Some(div.zhang_check()?)
    } else {
        None
    };
    if format == Format::Structured {
        return Ok(pretty_json(&json!({
            "polytope": schema::polytope_vertices(delta),
            "roofs": per_place
                .iter()
                .map(|(name, r)| json!({ "place": name, "roof": fmt_roof(r) }))
                .collect::<Vec<_>>(),
            "global_roof": fmt_roof(&global),
            "mu_ess": ll_json(&mu_ess),
            "mu_abs": mu_abs.as_ref().map(ll_json),
            "vol": format_rational(&vols.vol),
            "vol_hat": ll_json(&vols.vol_hat),
            "vol_chihat": ll_json(&vols.vol_chihat),
            "gamma": vols.gamma.as_ref().map(schema::polytope_vertices),
            "flags": flags_json(&flags),
            "zhang": zhang.as_ref().map(|z| json!({
                "mu_ess": ll_json(&z.mu_ess),
                "mean_delta": ll_json(&z.mean_delta),
                "mean_gamma": z.mean_gamma.as_ref().map(ll_json),
                "equality": z.equality,
            })),
        })));
    }
    let mut out = String::new();
    out.push_str(&format!("polytope: {}\n", fmt_polytope(delta)));
    for (name, roof) in &per_place {
        out.push_str(&format!("roof at {name}: {}\n", fmt_roof(roof)));
    }
    out.push_str(&format!("global roof: {}\n", fmt_roof(&global)));
    out.push_str(&format!("mu_ess = {}\n", fmt_ll(&mu_ess)));
    match &mu_abs {
        Some(a) => out.push_str(&format!("mu_abs = {}\n", fmt_ll(a))),
        None => out.push_str("mu_abs: undefined (divisor is not semipositive)\n"),
    }
    out.push_str(&format!("vol = {}\n", format_rational(&vols.vol)));
    out.push_str(&format!("vol_hat = {}\n", fmt_ll(&vols.vol_hat)));
    out.push_str(&format!("vol_chihat = {}\n", fmt_ll(&vols.vol_chihat)));
    match &vols.gamma {
        Some(g) => out.push_str(&format!("gamma: {}\n", fmt_polytope(g))),
        None => out.push_str("gamma: empty\n"),
    }
    out.push_str(&format!(
        "flags: pseudo-effective {}, big {}, semipositive {}, nef {}\n",
        yn(flags.pseudo_effective),
        yn(flags.big),
        yn(flags.semipositive),
        yn(flags.nef)
    ));
    if let Some(z) = &zhang {
        out.push_str(&format!(
            "zhang: max = {}, mean over polytope = {}",
            fmt_ll(&z.mu_ess),
            fmt_ll(&z.mean_delta)
        ));
        if let Some(mg) = &z.mean_gamma {
            out.push_str(&format!(", mean over gamma = {}", fmt_ll(mg)));
        }
        out.push('\n');
        if z.equality {
            out.push_str("Zhang equality attained\n");
        } else {
            out.push_str("Zhang inequality strict\n");
        }
    }
    Ok(out)
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn flags_json(f: &essmin::toric::PositivityFlags) -> serde_json::Value {
    json!({
        "pseudo_effective": f.pseudo_effective,
        "big": f.big,
        "semipositive": f.semipositive,
        "nef": f.nef,
    })
}

fn pretty_json(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// equidist

fn cmd_equidist(
    div: &ToricAdelicDivisor,
    opts: &EquidistOpts,
    format: Format,
) -> Result<String, Error> {
    if format == Format::Csv {
        return Err(Error::Semantic("csv output is only defined for demo".into()));
    }
    let (wide, witness) = equidist::is_wide(div)?;
    let bg = equidist::balanced_gradients(div)?;
    let mopts = MahlerOptions {
        quadrature_points: opts.quadrature_points,
    };
    let along = opts.along.as_ref().map(load).transpose()?;
    let poly = opts
        .poly
        .as_deref()
        .map(|s| equidist::parse_laurent(s, div.dim))
        .transpose()?;

    let derivative = match &along {
        Some(e) if wide => Some(equidist::derivative_essmin(div, e)?),
        _ => None,
    };
    let mahler = match &poly {
        Some(f) if wide => Some(equidist::log_equidistribution_eligible(div, f, &mopts)?),
        _ => None,
    };
    let measures = if wide {
        Some(equidist::equidistribution_measures(div)?)
    } else {
        None
    };

    if format == Format::Structured {
        return Ok(pretty_json(&json!({
            "wide": wide,
            "witness": witness.as_ref().map(|w| w.iter().map(format_rational).collect::<Vec<_>>()),
            "base_point": bg.base_point.iter().map(format_rational).collect::<Vec<_>>(),
            "unique": bg.unique,
            "gradients": div.places.iter().zip(&bg.gradients).map(|((p, _), u)| json!({
                "place": p.name,
                "u": u.iter().map(ll_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "measures": measures.as_ref().map(|ms| ms.iter().map(|m| json!({
                "place": m.place,
                "kind": match m.kind {
                    equidist::MeasureKind::Haar => "haar",
                    equidist::MeasureKind::Dirac => "dirac",
                },
                "u": m.u.iter().map(ll_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>()),
            "derivative": derivative.as_ref().map(ll_json),
            "mahler": mahler.as_ref().map(|(e, m)| mahler_json(e, m)),
        })));
    }

    let mut out = String::new();
    if wide {
        out.push_str("wideness: WIDE\n");
    } else {
        out.push_str("wideness: NOT WIDE");
        if let Some(w) = &witness {
            out.push_str(&format!(", witness direction {}", fmt_vec(w)));
        }
        out.push('\n');
    }
    out.push_str(&format!("base point: {}\n", fmt_vec(&bg.base_point)));
    out.push_str("balanced gradients");
    match bg.unique {
        Some(true) => out.push_str(" (unique):\n"),
        Some(false) => out.push_str(" (not unique; lexicographic representative):\n"),
        None => out.push_str(":\n"),
    }
    for ((p, _), u) in div.places.iter().zip(&bg.gradients) {
        out.push_str(&format!("  {}: {}\n", p.name, fmt_llvec(u)));
    }
    if let Some(ms) = &measures {
        out.push_str("measures:\n");
        for m in ms {
            let kind = match m.kind {
                equidist::MeasureKind::Haar => "haar on the torus at valuation -u",
                equidist::MeasureKind::Dirac => "dirac at the gauss point shifted by u",
            };
            out.push_str(&format!("  {}: {kind}, u = {}\n", m.place, fmt_llvec(&m.u)));
        }
    } else {
        out.push_str("measures: unavailable (divisor is not wide)\n");
    }
    if opts.along.is_some() {
        match &derivative {
            Some(d) => out.push_str(&format!("derivative of mu_ess: {}\n", fmt_ll(d))),
            None => out.push_str("derivative of mu_ess: unavailable (divisor is not wide)\n"),
        }
    }
    if let Some(fsrc) = &opts.poly {
        match &mahler {
            Some((e, m)) => {
                out.push_str(&format!("gauss-mahler m({fsrc}): {}\n", fmt_mahler(m)));
                out.push_str(&format!(
                    "log-equidistribution: {}\n",
                    match e {
                        Eligibility::Eligible => "eligible",
                        Eligibility::NotEligible => "not eligible",
                        Eligibility::Indeterminate => "indeterminate within quadrature bound",
                    }
                ));
            }
            None => out.push_str("gauss-mahler: unavailable (divisor is not wide)\n"),
        }
    }
    Ok(out)
}

fn fmt_mahler(m: &MahlerValue) -> String {
    match m {
        MahlerValue::Exact(x) => format!("exact {}", fmt_ll(x)),
        MahlerValue::Numeric { value, error_bound } => {
            format!("numeric {value:.12} (error bound {error_bound:.3e})")
        }
    }
}

fn mahler_json(e: &Eligibility, m: &MahlerValue) -> serde_json::Value {
    let elig = match e {
        Eligibility::Eligible => "eligible",
        Eligibility::NotEligible => "not_eligible",
        Eligibility::Indeterminate => "indeterminate",
    };
    match m {
        MahlerValue::Exact(x) => json!({ "exact": ll_json(x), "eligibility": elig }),
        MahlerValue::Numeric { value, error_bound } => json!({
            "value": value,
            "error_bound": error_bound,
            "eligibility": elig,
        }),
    }
}

// ---------------------------------------------------------------------------
// intersect

fn cmd_intersect(files: &[PathBuf], format: Format) -> Result<String, Error> {
    if files.is_empty() {
        return Err(Error::EmptyInput);
    }
    let divs: Vec<ToricAdelicDivisor> = files.iter().map(load).collect::<Result<_, _>>()?;
    let refs: Vec<&ToricAdelicDivisor> = divs.iter().collect();
    let d = divs[0].dim;
    if files.len() == d + 1 {
        let v = essmin::toric::intersection_number(&refs)?;
        Ok(match format {
            Format::Text => format!("arithmetic intersection number = {}\n", format_rational(&v)),
            Format::Structured => pretty_json(&json!({
                "arithmetic_intersection": format_rational(&v),
            })),
            Format::Csv => return Err(Error::Semantic("csv output is only defined for demo".into())),
        })
    } else if files.len() == d {
        let v = essmin::toric::geometric_intersection(&refs)?;
        Ok(match format {
            Format::Text => format!("geometric intersection number = {}\n", format_rational(&v)),
            Format::Structured => pretty_json(&json!({
                "geometric_intersection": format_rational(&v),
            })),
            Format::Csv => return Err(Error::Semantic("csv output is only defined for demo".into())),
        })
    } else {
        Err(Error::WrongCount {
            expected: d + 1,
            got: files.len(),
        })
    }
}

// ---------------------------------------------------------------------------
// dynamics

fn cmd_dynamics(file: &PathBuf, nmax: u32, format: Format) -> Result<String, Error> {
    let raw = std::fs::read_to_string(file)
        .map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?;
    let (data, mu_abs) = schema::dynamics_from_json(&raw)?;
    let idx = dynamical::index_set(&data);
    let formula = dynamical::derivative_formula(&data)?;
    let steps = dynamical::approximation_sequence(&data, nmax, mu_abs.as_ref());
    if format == Format::Csv {
        return Err(Error::Semantic("csv output is only defined for demo".into()));
    }
    if format == Format::Structured {
        return Ok(pretty_json(&json!({
            "index_set": idx,
            "terms": formula.terms.iter().map(|t| json!({
                "exponents": t.exponents,
                "coefficient": format_rational(&t.coefficient),
                "symbol": t.symbol,
                "value": t.value.as_ref().map(format_rational),
            })).collect::<Vec<_>>(),
            "normalizer": {
                "symbol": formula.normalizer_symbol,
                "value": formula.normalizer_value.as_ref().map(format_rational),
            },
            "total": formula.total.as_ref().map(format_rational),
            "steps": steps.iter().map(|s| json!({
                "n": s.n,
                "coefficients": s.coefficients.iter().map(format_rational).collect::<Vec<_>>(),
                "inradius_lower": format_rational(&s.inradius_lower),
                "abs_min_scale": format_rational(&s.abs_min_scale),
                "ratio_bound": s.ratio_bound.as_ref().map(format_rational),
            })).collect::<Vec<_>>(),
        })));
    }
    let mut out = String::new();
    if idx.is_empty() {
        out.push_str("warning: admissible exponent set is empty\n");
    }
    out.push_str("index set:");
    for a in &idx {
        out.push_str(&format!(
            " ({})",
            a.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
        ));
    }
    out.push('\n');
    out.push_str("derivative formula: (1/(D^d)) * [");
    for (i, t) in formula.terms.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        out.push_str(&format!("{}·{}", format_rational(&t.coefficient), t.symbol));
    }
    out.push_str("]\n");
    for t in &formula.terms {
        if let Some(v) = &t.value {
            out.push_str(&format!("  {} = {}\n", t.symbol, format_rational(v)));
        }
    }
    if let Some(v) = &formula.normalizer_value {
        out.push_str(&format!("  (D^d) = {}\n", format_rational(v)));
    }
    if let Some(total) = &formula.total {
        out.push_str(&format!("derivative = {}\n", format_rational(total)));
    }
    out.push_str("approximation sequence:\n");
    out.push_str("  n  coefficients  inradius_lower  abs_min_scale  ratio_bound\n");
    for s in &steps {
        out.push_str(&format!(
            "  {}  {}  {}  {}  {}\n",
            s.n,
            fmt_vec(&s.coefficients),
            format_rational(&s.inradius_lower),
            format_rational(&s.abs_min_scale),
            s.ratio_bound
                .as_ref()
                .map(format_rational)
                .unwrap_or_else(|| "-".into())
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// demo

fn cmd_demo(
    file: &PathBuf,
    along: Option<&PathBuf>,
    length: usize,
    format: Format,
) -> Result<String, Error> {
    let d_bar = load(file)?;
    let e_bar = match along {
        Some(p) => load(p)?,
        None => d_bar.clone(),
    };
    let report = heights::convergence_experiment(&d_bar, &e_bar, length)?;
    match format {
        Format::Csv => {
            let mut out =
                String::from("k,n,r,h_D_exact,h_D_float,h_E_exact,h_E_float,gap\n");
            for row in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{},{:.12},{},{:.12},{}\n",
                    row.k,
                    row.point.n,
                    format_rational(&row.point.r),
                    row.h_d,
                    row.h_d.to_f64(),
                    row.h_e,
                    row.h_e.to_f64(),
                    row.gap,
                ));
            }
            Ok(out)
        }
        Format::Structured => Ok(pretty_json(&json!({
            "mu_ess": ll_json(&report.mu_ess),
            "derivative": ll_json(&report.derivative),
            "constant": ll_json(&report.constant),
            "rows": report.rows.iter().map(|r| json!({
                "k": r.k,
                "n": r.point.n,
                "r": format_rational(&r.point.r),
                "h_d": ll_json(&r.h_d),
                "h_d_float": r.h_d.to_f64(),
                "h_e": ll_json(&r.h_e),
                "h_e_float": r.h_e.to_f64(),
                "gap": ll_json(&r.gap),
            })).collect::<Vec<_>>(),
        }))),
        Format::Text => {
            let mut out = String::new();
            out.push_str("  k     n  r                h_D              h_E              gap\n");
            for row in &report.rows {
                out.push_str(&format!(
                    "  {:<5} {:<4} {:<16} {:<16} {:<16} {}\n",
                    row.k,
                    row.point.n,
                    format_rational(&row.point.r),
                    row.h_d.to_string(),
                    row.h_e.to_string(),
                    row.gap,
                ));
            }
            out.push_str(&format!("mu_ess = {}\n", fmt_ll(&report.mu_ess)));
            out.push_str(&format!(
                "derivative along reference = {}\n",
                fmt_ll(&report.derivative)
            ));
            out.push_str(&format!(
                "certificate: gap_k <= C/k with C = {}\n",
                fmt_ll(&report.constant)
            ));
            if let Some(last) = report.rows.last() {
                let residual =
                    last.gap.clone() - report.constant.scale(&essmin::scalar::rat(1, last.k as i64));
                out.push_str(&format!(
                    "final gap = {} ; deviation from C/k law = {:.1e}\n",
                    fmt_ll(&last.gap),
                    residual.to_f64().abs()
                ));
            }
            Ok(out)
        }
    }
}
