//! `kvariant`: Hodge polygons, Newton polygons and ordinarity checks for
//! diagonal, reflection and Kloosterman Laurent polynomials.
//!
//! Exit codes: 0 when the observation matches theory, 2 on a mismatch,
//! 1 on an operational error.

mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use kvariant_core::diagonal::{self, Matrix};
use kvariant_core::families::{
    build, hodge_report, nondegeneracy_falsifier, nondegenerate_criterion, ordinarity_expectation, Expected,
    FamilyError, FamilySpec, HodgeCheckError, Kind, Source,
};
use kvariant_core::hodge;
use kvariant_core::laurent::{LaurentPoly, Term};
use kvariant_core::tables::{self, TableRange, TABLE_IDS};
use kvariant_core::zeta::{compare_polygons, newton_polygon, EngineConfig, HullError, Verdict, ZetaError};
use kvariant_core::{RationalPolygon, Segment};

#[derive(Parser)]
#[command(name = "kvariant", version, about = "Hodge and Newton polygons of diagonal-type Laurent polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weight numbers, Hodge numbers and the Hodge polygon.
    Hodge(Common),
    /// Newton polygon of the L-function over F_q, q = p^a.
    Np(Common),
    /// Compare the Newton polygon with the Hodge polygon and the expected ordinarity.
    Compare(Common),
    /// Invariant factors, D* and orbit slopes of a diagonal exponent matrix.
    Diag(Common),
    /// Search small extension fields for a degeneracy witness.
    Nondeg(Common),
    /// Regenerate the weight and Hodge tables.
    Tables(TablesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    D,
    G,
    K,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Args, Clone)]
struct Common {
    /// Family: D (diagonal), G (reflection) or K (Kloosterman).
    #[arg(long, value_enum, ignore_case = true)]
    kind: Option<KindArg>,
    /// Number of variables; a single --m value is repeated n times.
    #[arg(long = "n")]
    n: Option<usize>,
    /// Exponents m_1,...,m_n.
    #[arg(long = "m", value_delimiter = ',')]
    m: Vec<i64>,
    /// Number of reflected variables (G) or of variables in the extra monomial (K).
    #[arg(long = "j", default_value_t = 0)]
    j: usize,
    /// Polynomial or family spec as JSON, instead of --kind.
    #[arg(long)]
    raw: Option<PathBuf>,
    /// Exponent matrix for `diag`, rows separated by ';', e.g. "2,0;0,3".
    #[arg(long)]
    matrix: Option<String>,
    /// Characteristic.
    #[arg(long = "p")]
    p: Option<u32>,
    /// Base field F_q with q = p^a.
    #[arg(long = "a")]
    a: Option<u32>,
    /// Last weight index printed by `hodge`.
    #[arg(long)]
    kmax: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Maximum torus evaluations per exponential sum.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compute closed forms and the enumerator and require agreement.
    #[arg(long)]
    verify: bool,
    /// Largest extension degree searched by `nondeg`.
    #[arg(long, default_value_t = 2)]
    rmax: u32,
    /// Which irreducible modulus to use for every field.
    #[arg(long, default_value_t = 0)]
    modulus_index: usize,
}

#[derive(Args)]
struct TablesArgs {
    /// Table identifiers, default all.
    #[arg(long, value_delimiter = ',')]
    table: Vec<u8>,
    /// Equilateral exponents, as a list "2,3,4" or a range "2..6".
    #[arg(long = "m", default_value = "2..6")]
    m: String,
    /// Coprime pairs, e.g. "2,3;2,5;3,5".
    #[arg(long, default_value = "2,3;2,5;3,5")]
    pairs: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file, or a directory that receives one `tableN.csv` per table.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    verify: bool,
}

/// Result of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Match,
    Mismatch,
}

enum Input {
    Family(FamilySpec),
    Raw(LaurentPoly),
}

#[derive(Deserialize)]
struct RawFile {
    p: Option<u32>,
    a: Option<u32>,
    n: usize,
    terms: Vec<Term>,
}

#[derive(Deserialize)]
struct SpecFile {
    #[serde(flatten)]
    spec: FamilySpec,
    p: Option<u32>,
    a: Option<u32>,
}

struct Resolved {
    input: Input,
    p: Option<u32>,
    a: u32,
}

impl Resolved {
    fn poly(&self) -> Result<LaurentPoly> {
        match &self.input {
            Input::Family(spec) => Ok(build(spec)?),
            Input::Raw(f) => Ok(f.clone()),
        }
    }

    fn p(&self) -> Result<u32> {
        self.p.ok_or_else(|| anyhow!("missing --p"))
    }

    fn spec(&self) -> Option<&FamilySpec> {
        match &self.input {
            Input::Family(s) => Some(s),
            Input::Raw(_) => None,
        }
    }
}

fn resolve(c: &Common) -> Result<Resolved> {
    if let Some(path) = &c.raw {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let (input, p, a) = if value.get("kind").is_some() {
            let f: SpecFile = serde_json::from_value(value)?;
            f.spec.validate()?;
            (Input::Family(f.spec), f.p, f.a)
        } else {
            let f: RawFile = serde_json::from_value(value)?;
            (Input::Raw(LaurentPoly::new(f.n, f.terms)?), f.p, f.a)
        };
        return Ok(Resolved {
            input,
            p: c.p.or(p),
            a: c.a.or(a).unwrap_or(1),
        });
    }
    let kind = c.kind.ok_or_else(|| anyhow!("give --kind with --m, or --raw"))?;
    if c.m.is_empty() {
        bail!("missing --m");
    }
    let m = match c.n {
        Some(n) if c.m.len() == 1 => vec![c.m[0]; n],
        Some(n) if n != c.m.len() => bail!("--n {n} but {} exponents given", c.m.len()),
        _ => c.m.clone(),
    };
    let kind = match kind {
        KindArg::D => Kind::Diagonal,
        KindArg::G => Kind::Reflection,
        KindArg::K => Kind::Kloosterman,
    };
    let spec = FamilySpec::new(kind, m, c.j).normalized();
    spec.validate()?;
    Ok(Resolved {
        input: Input::Family(spec),
        p: c.p,
        a: c.a.unwrap_or(1),
    })
}

fn engine_config(c: &Common) -> EngineConfig {
    let mut cfg = EngineConfig {
        threads: c.threads,
        modulus_index: c.modulus_index,
        ..EngineConfig::default()
    };
    if let Some(b) = c.budget {
        cfg.eval_budget = b;
    }
    cfg
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    // serde_json maps are ordered by key, so output is canonical.
    let mut s = serde_json::to_string(v).expect("values serialize");
    s.push('\n');
    s
}

/// Hodge data for either input kind.
struct HodgeData {
    denominator: i64,
    n: usize,
    volume: u64,
    weights: Vec<u64>,
    hodge: Vec<i64>,
    source: Source,
    polygon: RationalPolygon,
}

enum HodgeFailure {
    Mismatch(String),
    Error(anyhow::Error),
}

impl From<anyhow::Error> for HodgeFailure {
    fn from(e: anyhow::Error) -> Self {
        HodgeFailure::Error(e)
    }
}

fn hodge_data(r: &Resolved, verify: bool) -> Result<HodgeData, HodgeFailure> {
    match &r.input {
        Input::Family(spec) => match hodge_report(spec, verify) {
            Ok(rep) => Ok(HodgeData {
                denominator: rep.denominator,
                n: spec.n,
                volume: rep.volume,
                weights: rep.weights,
                hodge: rep.hodge,
                source: rep.source,
                polygon: rep.polygon,
            }),
            Err(e @ (HodgeCheckError::Disagreement { .. } | HodgeCheckError::MassMismatch { .. })) => {
                Err(HodgeFailure::Mismatch(e.to_string()))
            }
            Err(HodgeCheckError::Family(e)) => Err(HodgeFailure::Error(e.into())),
        },
        Input::Raw(f) => {
            let delta = f.newton_polytope().map_err(anyhow::Error::from)?;
            let d = delta.denominator();
            let w = hodge::weight_numbers(&delta, f.n() * d as usize).map_err(anyhow::Error::from)?;
            let h = hodge::hodge_numbers(&w, f.n()).map_err(anyhow::Error::from)?;
            let volume = kvariant_core::lattice::normalized_volume(&delta).map_err(anyhow::Error::from)?;
            if h.total() != volume as i64 {
                return Err(HodgeFailure::Mismatch(format!(
                    "Hodge numbers sum to {}, volume is {volume}",
                    h.total()
                )));
            }
            Ok(HodgeData {
                denominator: d,
                n: f.n(),
                volume,
                polygon: hodge::hodge_polygon(&h),
                weights: w.counts,
                hodge: h.numbers,
                source: Source::Enumerator,
            })
        }
    }
}

fn cmd_hodge(c: &Common) -> Result<Outcome> {
    let r = resolve(c)?;
    let data = match hodge_data(&r, c.verify) {
        Ok(d) => d,
        Err(HodgeFailure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            return Ok(Outcome::Mismatch);
        }
        Err(HodgeFailure::Error(e)) => return Err(e),
    };
    let top = c.kmax.unwrap_or(data.weights.len() - 1);
    let mut weights = data.weights.clone();
    if top >= weights.len() {
        let f = r.poly()?;
        let delta = f.newton_polytope()?;
        weights = hodge::weight_numbers(&delta, top)?.counts;
    }
    weights.truncate(top + 1);
    let hodge_col: Vec<i64> = (0..=top).map(|k| data.hodge.get(k).copied().unwrap_or(0)).collect();
    let text = match c.format {
        Format::Json => json_text(&json!({
            "denominator": data.denominator,
            "n": data.n,
            "volume": data.volume,
            "weights": weights,
            "hodge": hodge_col,
            "source": data.source,
            "polygon": data.polygon,
        })),
        Format::Csv => {
            let mut s = String::from("k,W,H\n");
            for k in 0..=top {
                s += &format!("{k},{},{}\n", weights[k], hodge_col[k]);
            }
            s
        }
        Format::Svg => svg::render("Hodge polygon", &[("HP", &data.polygon)]),
    };
    emit(c.out.as_deref(), &text)?;
    Ok(Outcome::Match)
}

/// Engine errors that mean the theory or the code is wrong, not the inputs.
fn is_theory_violation(e: &ZetaError) -> bool {
    matches!(e, ZetaError::PolynomialityViolation { .. } | ZetaError::InexactDivision { .. })
}

fn cmd_np(c: &Common) -> Result<Outcome> {
    let r = resolve(c)?;
    let res = match newton_polygon(&r.poly()?, r.p()?, r.a, &engine_config(c)) {
        Ok(res) => res,
        Err(e) if is_theory_violation(&e) => {
            eprintln!("mismatch: {e}");
            return Ok(Outcome::Mismatch);
        }
        Err(e) => return Err(e.into()),
    };
    let text = match c.format {
        Format::Json => json_text(&serde_json::to_value(&res)?),
        Format::Csv => {
            let mut s = String::from("i,ord_q\n");
            for (i, v) in &res.valuations {
                let v = v.map(|x| format!("{}/{}", x.numer(), x.denom())).unwrap_or_else(|| "inf".into());
                s += &format!("{i},{v}\n");
            }
            s
        }
        Format::Svg => svg::render(&format!("Newton polygon, p = {}, a = {}", res.p, res.a), &[("NP", &res.polygon)]),
    };
    emit(c.out.as_deref(), &text)?;
    Ok(Outcome::Match)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Equal => "Equal",
        Verdict::StrictlyAboveSomewhere => "StrictlyAboveSomewhere",
        Verdict::Crossing => "Crossing",
    }
}

fn cmd_compare(c: &Common) -> Result<Outcome> {
    let r = resolve(c)?;
    let p = r.p()?;
    let hp = match hodge_data(&r, c.verify) {
        Ok(d) => d.polygon,
        Err(HodgeFailure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            return Ok(Outcome::Mismatch);
        }
        Err(HodgeFailure::Error(e)) => return Err(e),
    };
    let np = match newton_polygon(&r.poly()?, p, r.a, &engine_config(c)) {
        Ok(res) => res.polygon,
        Err(e) if is_theory_violation(&e) => {
            eprintln!("mismatch: {e}");
            return Ok(Outcome::Mismatch);
        }
        Err(e) => return Err(e.into()),
    };
    let expected = match r.spec().map(|s| ordinarity_expectation(s, p as u64)) {
        Some(Ok(e)) => Some(e),
        Some(Err(FamilyError::DegeneratePrime(_))) | None => None,
        Some(Err(e)) => return Err(e.into()),
    };
    let (observed, endpoint_match) = match compare_polygons(&np, &hp) {
        Ok(v) => (Some(v), true),
        Err(HullError::EndpointMismatch { .. }) => (None, false),
        Err(e) => return Err(e.into()),
    };
    let matches = match (observed, expected) {
        (None, _) | (Some(Verdict::Crossing), _) => false,
        (Some(Verdict::Equal), Some(Expected::NPstrictlyAbove)) => false,
        (Some(Verdict::StrictlyAboveSomewhere), Some(Expected::NPequalsHP)) => false,
        _ => true,
    };
    let expected_name = expected.map(|e| match e {
        Expected::NPequalsHP => "NPequalsHP",
        Expected::NPstrictlyAbove => "NPstrictlyAbove",
    });
    eprintln!(
        "observed {}, expected {}, endpoints {}: {}",
        observed.map(verdict_name).unwrap_or("none"),
        expected_name.unwrap_or("none"),
        if endpoint_match { "equal" } else { "differ" },
        if matches { "match" } else { "MISMATCH" }
    );
    let text = match c.format {
        Format::Svg => svg::render(&format!("NP vs HP, p = {p}, a = {}", r.a), &[("NP", &np), ("HP", &hp)]),
        _ => json_text(&json!({
            "p": p,
            "a": r.a,
            "np": np,
            "hp": hp,
            "observed": observed.map(verdict_name),
            "expected": expected_name,
            "endpoint_match": endpoint_match,
            "matches": matches,
        })),
    };
    emit(c.out.as_deref(), &text)?;
    Ok(if matches { Outcome::Match } else { Outcome::Mismatch })
}

fn parse_matrix(s: &str) -> Result<Matrix> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<i64>().with_context(|| format!("bad matrix entry {x:?}")))
                .collect()
        })
        .collect()
}

fn cmd_diag(c: &Common) -> Result<Outcome> {
    let m = match &c.matrix {
        Some(s) => parse_matrix(s)?,
        None => match resolve(c)?.input {
            Input::Family(spec) => spec.diagonal_face_matrix(),
            Input::Raw(_) => bail!("diag needs --matrix or a family spec"),
        },
    };
    let p = c.p.ok_or_else(|| anyhow!("missing --p"))?;
    let summary = diagonal::summarize(&m, p as u64)?;
    let polygon = RationalPolygon::from_segments(summary.slopes.iter().copied());
    let text = match c.format {
        Format::Json => json_text(&json!({
            "dstar": summary.dstar,
            "invariant_factors": summary.invariant_factors,
            "slopes": summary.slopes,
            "polygon": polygon,
        })),
        Format::Csv => {
            let mut s = String::from("slope,length\n");
            for Segment { slope, length } in &summary.slopes {
                s += &format!("{}/{},{length}\n", slope.numer(), slope.denom());
            }
            s
        }
        Format::Svg => svg::render(&format!("Orbit slopes, p = {p}"), &[("NP", &polygon)]),
    };
    emit(c.out.as_deref(), &text)?;
    Ok(Outcome::Match)
}

fn cmd_nondeg(c: &Common) -> Result<Outcome> {
    let r = resolve(c)?;
    let p = r.p()?;
    let witness = nondegeneracy_falsifier(&r.poly()?, p, r.a, c.rmax, &engine_config(c))?;
    let criterion = r.spec().map(|s| nondegenerate_criterion(s, p as u64));
    let coherent = match criterion {
        Some(nondegenerate) => nondegenerate == witness.is_none(),
        None => true,
    };
    let text = json_text(&json!({
        "p": p,
        "a": r.a,
        "r_max": c.rmax,
        "criterion_nondegenerate": criterion,
        "result": if witness.is_some() { "Witness" } else { "NoneFound" },
        "witness": witness,
        "coherent": coherent,
    }));
    emit(c.out.as_deref(), &text)?;
    Ok(if coherent { Outcome::Match } else { Outcome::Mismatch })
}

fn parse_ms(s: &str) -> Result<Vec<i64>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: i64 = lo.trim().parse().context("bad range start")?;
        let hi: i64 = hi.trim().trim_start_matches('=').parse().context("bad range end")?;
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|x| x.trim().parse().context("bad exponent")).collect()
}

fn parse_pairs(s: &str) -> Result<Vec<(i64, i64)>> {
    s.split(';')
        .filter(|x| !x.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair.split_once(',').ok_or_else(|| anyhow!("bad pair {pair:?}"))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .collect()
}

/// One CSV per identifier: a single header, then every table's rows.
fn tables_csv(tables: &[tables::Table]) -> BTreeMap<u8, String> {
    let mut out: BTreeMap<u8, String> = BTreeMap::new();
    for t in tables {
        let csv = t.to_csv();
        let entry = out.entry(t.id).or_default();
        let body = if entry.is_empty() { &csv[..] } else { &csv[csv.find('\n').map_or(0, |i| i + 1)..] };
        entry.push_str(body);
    }
    out
}

fn cmd_tables(t: &TablesArgs) -> Result<Outcome> {
    let range = TableRange {
        ms: parse_ms(&t.m)?,
        pairs: parse_pairs(&t.pairs)?,
        verify: t.verify,
    };
    let ids: Vec<u8> = if t.table.is_empty() { TABLE_IDS.to_vec() } else { t.table.clone() };
    let mut all = Vec::new();
    for &id in &ids {
        if !TABLE_IDS.contains(&id) {
            bail!("no table {id}; tables are 1 to 7");
        }
        match tables::generate(id, &range) {
            Ok(ts) => all.extend(ts),
            Err(e @ (HodgeCheckError::Disagreement { .. } | HodgeCheckError::MassMismatch { .. })) => {
                eprintln!("mismatch in table {id}: {e}");
                return Ok(Outcome::Mismatch);
            }
            Err(e) => return Err(e.into()),
        }
    }
    match t.format {
        Format::Json => emit(t.out.as_deref(), &json_text(&serde_json::to_value(&all)?))?,
        Format::Svg => bail!("tables support csv and json output"),
        Format::Csv => {
            let per_id = tables_csv(&all);
            match &t.out {
                Some(dir) if dir.is_dir() => {
                    for (id, csv) in &per_id {
                        emit(Some(&dir.join(format!("table{id}.csv"))), csv)?;
                    }
                }
                out => {
                    let joined = per_id.values().cloned().collect::<Vec<_>>().join("\n");
                    emit(out.as_deref(), &joined)?;
                }
            }
        }
    }
    Ok(Outcome::Match)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are operational; 2 is reserved for mismatches.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Hodge(c) => cmd_hodge(c),
        Command::Np(c) => cmd_np(c),
        Command::Compare(c) => cmd_compare(c),
        Command::Diag(c) => cmd_diag(c),
        Command::Nondeg(c) => cmd_nondeg(c),
        Command::Tables(t) => cmd_tables(t),
    };
    match result {
        Ok(Outcome::Match) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

