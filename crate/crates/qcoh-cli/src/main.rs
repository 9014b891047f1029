use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcoh::cech::{cohomology_report, CohomologyReport};
use qcoh::functors::{adjunction_round_trips, decomposition_sequence, AdjunctionReport};
use qcoh::lab::{
    am_sequence_check, gorenstein_predicates, parse_module, tate_ext_dim_injective, tate_table, FiniteRing, LabError,
};
use qcoh::quiver::{vertices, QuiverError};
use qcoh::{Field, Gf2, Gf3, Gf5, Gf7, Rational, TwistPresentation, Vertex};

#[derive(Parser)]
#[command(name = "qcoh", version, about = "Sheaf cohomology on projective space and finite Gorenstein rings")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Run stabilization and exactness certificates; exit 1 on a violation.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Q,
    #[value(name = "2")]
    F2,
    #[value(name = "3")]
    F3,
    #[value(name = "5")]
    F5,
    #[value(name = "7")]
    F7,
}

#[derive(Subcommand)]
enum Command {
    /// h^i of O(d), or of a presented sheaf, on P^n.
    Cohomology {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true, conflicts_with = "degree_range")]
        twist: Option<i64>,
        /// Table over twists, `a..b` inclusive.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
        degree_range: Option<RangeInclusive<i64>>,
        #[arg(long, conflicts_with_all = ["twist", "degree_range"])]
        sheaf: Option<PathBuf>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, value_enum, default_value_t = FieldArg::Q)]
        field: FieldArg,
    },
    /// dim Ext^i(O(a), O(b)) on P^n for every i.
    ExtTwists {
        #[arg(long)]
        n: usize,
        /// `a,b`
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        twist: (i64, i64),
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, value_enum, default_value_t = FieldArg::Q)]
        field: FieldArg,
    },
    /// Support decomposition of a presented sheaf.
    Decompose {
        #[arg(long)]
        sheaf: PathBuf,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, value_enum, default_value_t = FieldArg::Q)]
        field: FieldArg,
    },
    /// Round-trips random morphisms through the evaluation adjunction.
    AdjunctionCheck {
        #[arg(long)]
        sheaf: PathBuf,
        /// Vertex such as `0,2`; every vertex when omitted.
        #[arg(long)]
        vertex: Option<String>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, default_value_t = 2)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FieldArg::Q)]
        field: FieldArg,
    },
    /// Tate cohomology lengths over a finite ring.
    ///
    /// Modules: `R`, `R^k`, `k` (R modulo its radical), `zero`, `quot:a,b`
    /// (R modulo the ideal), `pres:g:r11,r12;r21,r22`, joined by `|` for sums.
    Tate {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        module: String,
        #[arg(long)]
        against: String,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "-3..3")]
        range: RangeInclusive<i64>,
    },
    /// Checks the sequence Gext -> Ext -> Tate Ext -> Gext.
    AmCheck {
        #[arg(long)]
        ring: String,
        #[arg(long)]
        module: String,
        #[arg(long)]
        against: String,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "1..5")]
        degree_range: RangeInclusive<i64>,
    },
    /// Predicates of the Gorenstein picture over every small module.
    GorensteinReport {
        #[arg(long)]
        ring: String,
        #[arg(long, default_value_t = 16)]
        size_bound: usize,
    },
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let a: i64 = a.trim().parse().map_err(|_| format!("bad twist `{a}`"))?;
    let b: i64 = b.trim().parse().map_err(|_| format!("bad twist `{b}`"))?;
    Ok((a, b))
}

fn parse_range(s: &str) -> Result<RangeInclusive<i64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected `a..b`, got `{s}`"))?;
    let a: i64 = a.trim().parse().map_err(|_| format!("bad bound `{a}`"))?;
    let b: i64 = b.trim().parse().map_err(|_| format!("bad bound `{b}`"))?;
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok(a..=b)
}

enum Failure {
    Input(String),
    Certificate(String),
}

impl From<QuiverError> for Failure {
    fn from(e: QuiverError) -> Self {
        match e {
            QuiverError::Certificate(_) | QuiverError::Linalg(_) => Failure::Certificate(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Certificate(_) => Failure::Certificate(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

type Res<T> = Result<T, Failure>;

/// Rendered output plus any certificate that failed.
struct Output {
    json: String,
    csv: String,
    violations: Vec<String>,
}

fn csv_of<R: Serialize>(rows: &[R]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    for r in rows {
        w.serialize(r).expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv buffer")).expect("utf8")
}

fn json_of<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn read_sheaf<F: Field>(path: &Path) -> Res<TwistPresentation<F>> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(TwistPresentation::from_json(&text)?)
}

fn default_window<F: Field>(p: &TwistPresentation<F>) -> usize {
    let twists = p.targets().iter().chain(p.sources()).map(|d| d.unsigned_abs() as usize).max().unwrap_or(0);
    twists.max(p.entry_reach()) + p.n() + 2
}

#[derive(Serialize)]
struct HRow {
    n: usize,
    d: Option<i64>,
    i: usize,
    h: usize,
}

fn cohomology_output(reports: Vec<CohomologyReport>, single: bool, check: bool) -> Output {
    let violations = if check {
        reports.iter().filter(|r| !r.stabilized).map(|r| format!("window {} did not stabilize for d = {:?}", r.window, r.d)).collect()
    } else {
        vec![]
    };
    let rows: Vec<HRow> =
        reports.iter().flat_map(|r| r.h.iter().enumerate().map(|(i, &h)| HRow { n: r.n, d: r.d, i, h })).collect();
    let json = if single { json_of(&reports[0]) } else { json_of(&reports) };
    Output { json, csv: csv_of(&rows), violations }
}

fn cohomology<F: Field>(
    n: Option<usize>,
    twists: Option<RangeInclusive<i64>>,
    sheaf: Option<&Path>,
    window: Option<usize>,
    check: bool,
) -> Res<Output> {
    if let Some(path) = sheaf {
        let p = read_sheaf::<F>(path)?;
        if n.is_some_and(|n| n != p.n()) {
            return Err(Failure::Input("--n disagrees with the sheaf file".into()));
        }
        let w = window.unwrap_or_else(|| default_window(&p));
        return Ok(cohomology_output(vec![cohomology_report(&p, w)?], true, check));
    }
    let n = n.ok_or_else(|| Failure::Input("--n is required".into()))?;
    let twists = twists.ok_or_else(|| Failure::Input("one of --twist, --degree-range or --sheaf is required".into()))?;
    let single = twists.start() == twists.end();
    let reach = twists.clone().map(|d| d.unsigned_abs() as usize).max().unwrap_or(0);
    let w = window.unwrap_or(reach + n + 2);
    let reports: Vec<CohomologyReport> =
        twists.map(|d| cohomology_report(&TwistPresentation::<F>::twist(n, d), w)).collect::<Result<_, _>>()?;
    Ok(cohomology_output(reports, single, check))
}

#[derive(Serialize)]
struct ExtRow {
    i: usize,
    dim: usize,
}

#[derive(Serialize)]
struct ExtTable {
    n: usize,
    a: i64,
    b: i64,
    window: usize,
    stabilized: bool,
    ext: Vec<ExtRow>,
}

fn ext_twists<F: Field>(n: usize, a: i64, b: i64, window: Option<usize>, check: bool) -> Res<Output> {
    let reach = [a, b, b - a].iter().map(|d| d.unsigned_abs() as usize).max().unwrap_or(0);
    let w = window.unwrap_or(reach + n + 2);
    // Ext^i(O(a), O(b)) = H^i(O(b - a))
    let r = cohomology_report(&TwistPresentation::<F>::twist(n, b - a), w)?;
    let ext: Vec<ExtRow> = r.h.iter().enumerate().map(|(i, &dim)| ExtRow { i, dim }).collect();
    let violations = if check && !r.stabilized { vec![format!("window {w} did not stabilize")] } else { vec![] };
    let csv = csv_of(&ext);
    let table = ExtTable { n, a, b, window: w, stabilized: r.stabilized, ext };
    Ok(Output { json: json_of(&table), csv, violations })
}

fn decompose<F: Field>(path: &Path, window: Option<usize>, check: bool) -> Res<Output> {
    let p = read_sheaf::<F>(path)?;
    let w = window.unwrap_or_else(|| default_window(&p));
    let d = decomposition_sequence(&p, w)?;
    let mut violations = vec![];
    if check {
        if !d.exact {
            violations.push("four-term sequence is not exact".into());
        }
        if !d.strict {
            violations.push("Supp(K) or Supp(C) is not a proper subset of Supp(M)".into());
        }
        if !d.support_stable {
            violations.push(format!("support changes beyond window {w}"));
        }
    }
    #[derive(Serialize)]
    struct Row<'a> {
        vertex: String,
        key: &'a str,
        kernel: usize,
        module: usize,
        middle: usize,
        cokernel: usize,
    }
    let rows: Vec<Row> = d
        .slices
        .iter()
        .map(|s| Row {
            vertex: s.vertex.to_string(),
            key: &s.key,
            kernel: s.kernel,
            module: s.module,
            middle: s.middle,
            cokernel: s.cokernel,
        })
        .collect();
    Ok(Output { json: json_of(&d), csv: csv_of(&rows), violations })
}

fn adjunction<F: Field>(path: &Path, vertex: Option<&str>, window: Option<usize>, samples: usize, seed: u64) -> Res<Output> {
    let p = read_sheaf::<F>(path)?;
    let w = window.unwrap_or_else(|| default_window(&p));
    let vs: Vec<Vertex> = match vertex {
        Some(s) => vec![Vertex::parse(p.n(), s)?],
        None => vertices(p.n()),
    };
    let reports: Vec<AdjunctionReport> =
        vs.iter().map(|v| adjunction_round_trips(&p, v, &p, w, samples, seed)).collect::<Result<_, _>>()?;
    let violations: Vec<String> = reports.iter().flat_map(|r| r.failures.iter().map(move |f| format!("{}: {f}", r.base))).collect();
    #[derive(Serialize)]
    struct Row {
        vertex: String,
        window: usize,
        degrees: usize,
        morphisms: usize,
        failures: usize,
    }
    let rows: Vec<Row> = reports
        .iter()
        .map(|r| Row {
            vertex: r.base.to_string(),
            window: r.window,
            degrees: r.degrees,
            morphisms: r.morphisms,
            failures: r.failures.len(),
        })
        .collect();
    Ok(Output { json: json_of(&reports), csv: csv_of(&rows), violations })
}

fn lab_ring(spec: &str) -> Res<Arc<FiniteRing>> {
    Ok(Arc::new(FiniteRing::parse(spec)?))
}

#[derive(Serialize)]
struct TateRow {
    degree: i64,
    dim: usize,
}

#[derive(Serialize)]
struct TateOutput {
    ring: String,
    module: String,
    against: String,
    entries: Vec<TateRow>,
}

fn tate(ring: &str, module: &str, against: &str, range: RangeInclusive<i64>, check: bool) -> Res<Output> {
    let r = lab_ring(ring)?;
    let m = parse_module(&r, module)?;
    let n = parse_module(&r, against)?;
    let (lo, hi) = (*range.start(), *range.end());
    let table = tate_table(&m, &n, lo, hi)?;
    let mut violations = vec![];
    if check {
        let wider = tate_table(&m, &n, lo - 2, hi + 2)?;
        for &(i, d) in &table.entries {
            if wider.entries.iter().any(|&(j, e)| j == i && e != d) {
                violations.push(format!("degree {i} changes when the window widens"));
            }
            if tate_ext_dim_injective(&m, &n, i)? != d {
                violations.push(format!("degree {i}: projective and injective sides disagree"));
            }
        }
    }
    let entries: Vec<TateRow> = table.entries.iter().map(|&(degree, dim)| TateRow { degree, dim }).collect();
    let csv = csv_of(&entries);
    let out = TateOutput { ring: r.name().to_string(), module: m.describe(), against: n.describe(), entries };
    Ok(Output { json: json_of(&out), csv, violations })
}

fn am_check(ring: &str, module: &str, against: &str, degrees: RangeInclusive<i64>) -> Res<Output> {
    let r = lab_ring(ring)?;
    let m = parse_module(&r, module)?;
    let n = parse_module(&r, against)?;
    if *degrees.start() < 1 {
        return Err(Failure::Input("degrees start at 1".into()));
    }
    let mut rep = am_sequence_check(&m, &n, *degrees.end() as usize)?;
    rep.rows.retain(|row| degrees.contains(&(row.degree as i64)));
    let mut violations = vec![];
    if !rep.exact {
        violations.push("sequence is not exact".into());
    }
    if !rep.lengths_consistent {
        violations.push("alternating length sum is nonzero".into());
    }
    Ok(Output { json: json_of(&rep), csv: csv_of(&rep.rows), violations })
}

fn gorenstein(ring: &str, size_bound: usize, check: bool) -> Res<Output> {
    let r = lab_ring(ring)?;
    let rep = gorenstein_predicates(&r, size_bound)?;
    let violations = if check && !rep.consistent() { vec!["report is not consistent".into()] } else { vec![] };
    #[derive(Serialize)]
    struct Row<'a> {
        module: &'a str,
        size: usize,
        projective: bool,
        injective: bool,
        pd: String,
        id: String,
        gorenstein_projective: bool,
        gorenstein_injective: bool,
    }
    let dim = |d: &qcoh::lab::Dim| serde_json::to_value(d).expect("dim").to_string().trim_matches('"').to_string();
    let rows: Vec<Row> = rep
        .modules
        .iter()
        .map(|f| Row {
            module: &f.description,
            size: f.size,
            projective: f.projective,
            injective: f.injective,
            pd: dim(&f.pd),
            id: dim(&f.id),
            gorenstein_projective: f.gorenstein_projective,
            gorenstein_injective: f.gorenstein_injective,
        })
        .collect();
    Ok(Output { json: json_of(&rep), csv: csv_of(&rows), violations })
}

/// Dispatches a generic computation on the chosen coefficient field.
macro_rules! with_field {
    ($field:expr, $f:ident, $($arg:expr),*) => {
        match $field {
            FieldArg::Q => $f::<Rational>($($arg),*),
            FieldArg::F2 => $f::<Gf2>($($arg),*),
            FieldArg::F3 => $f::<Gf3>($($arg),*),
            FieldArg::F5 => $f::<Gf5>($($arg),*),
            FieldArg::F7 => $f::<Gf7>($($arg),*),
        }
    };
}

fn run(cli: &Cli) -> Res<Output> {
    let check = cli.check;
    match &cli.command {
        Command::Cohomology { n, twist, degree_range, sheaf, window, field } => {
            let twists = twist.map(|d| d..=d).or_else(|| degree_range.clone());
            with_field!(*field, cohomology, *n, twists, sheaf.as_deref(), *window, check)
        }
        Command::ExtTwists { n, twist, window, field } => {
            with_field!(*field, ext_twists, *n, twist.0, twist.1, *window, check)
        }
        Command::Decompose { sheaf, window, field } => with_field!(*field, decompose, sheaf, *window, check),
        Command::AdjunctionCheck { sheaf, vertex, window, samples, seed, field } => {
            with_field!(*field, adjunction, sheaf, vertex.as_deref(), *window, *samples, *seed)
        }
        Command::Tate { ring, module, against, range } => tate(ring, module, against, range.clone(), check),
        Command::AmCheck { ring, module, against, degree_range } => am_check(ring, module, against, degree_range.clone()),
        Command::GorensteinReport { ring, size_bound } => gorenstein(ring, *size_bound, check),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = match cli.format {
                Format::Json => out.json,
                Format::Csv => out.csv,
            };
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = stdout.write_all(text.as_bytes());
            if out.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                for v in &out.violations {
                    eprintln!("certificate failed: {v}");
                }
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Certificate(msg)) => {
            eprintln!("certificate failed: {msg}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qcoh::cech::build_cech;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-3..3").unwrap(), -3..=3);
        assert_eq!(parse_range("2..2").unwrap(), 2..=2);
        assert!(parse_range("3..-3").is_err());
        assert!(parse_range("3").is_err());
        assert_eq!(parse_pair("0,-3").unwrap(), (0, -3));
        assert!(parse_pair("0").is_err());
    }

    #[test]
    fn cli_definition_is_valid() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn build_cech_is_reachable() {
        // the default window covers every nonzero slice of O(-3) on P^2
        let p = TwistPresentation::<Rational>::twist(2, -3);
        let c = build_cech(&p, default_window(&p)).unwrap();
        assert_eq!(c.cohomology().unwrap(), vec![0, 0, 1]);
    }
}
