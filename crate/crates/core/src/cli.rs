//! Argument parsing and command execution for `dbubble`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::candidates::{
    build_candidate, perimeter_table, CandidateKind, DoubleBubbleCandidate, PerimeterTable,
};
use crate::equilibrium::{
    check_equilibrium, loglog_slope, pinch_sweep, pinch_threshold, EquilibriumReport,
};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measure::DensityExponent;
use crate::svg::render_candidate;
use crate::transforms::geodesic;
use crate::verify::{run_all, run_suite, Suite};

pub const DEFAULT_TOL: f64 = 1e-8;
const MAX_TABLE_COLUMNS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "dbubble",
    version,
    about = "Double-bubble candidates in the plane with density r^p"
)]
pub struct CommandRequest {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Perimeters of all four candidates at unit areas over a range of p.
    Table(TableArgs),
    /// Build one candidate and emit its geometry.
    Candidate(CandidateArgs),
    /// Shortest path between two points.
    Geodesic(GeodesicArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
    /// Perimeter change of the pinch deformation of two tangent circles.
    Pinch(PinchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(allow_negative_numbers = true)]
pub struct TableArgs {
    #[arg(long)]
    pub p_min: f64,
    #[arg(long)]
    pub p_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(allow_negative_numbers = true)]
pub struct CandidateArgs {
    #[arg(value_parser = parse_kind)]
    pub kind: CandidateKind,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub a1: f64,
    /// Defaults to `a1`.
    #[arg(long)]
    pub a2: Option<f64>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

/// A point written `x,y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointArg(pub Point);

impl FromStr for PointArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| format!("expected x,y but got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        let pt = Point::new(parse(x)?, parse(y)?);
        if !pt.is_finite() {
            return Err(format!("point {s:?} is not finite"));
        }
        Ok(PointArg(pt))
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(allow_negative_numbers = true)]
pub struct GeodesicArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub from: PointArg,
    #[arg(long, allow_hyphen_values = true)]
    pub to: PointArg,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(allow_negative_numbers = true)]
pub struct PinchArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub r_min: f64,
    #[arg(long)]
    pub r_max: f64,
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r2: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<CandidateKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parse arguments that follow the program name. Usage errors come back as
/// validation errors carrying clap's rendered message.
pub fn parse_args<I, S>(argv: I) -> Result<CommandRequest>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let full = std::iter::once(std::ffi::OsString::from("dbubble"))
        .chain(argv.into_iter().map(Into::into));
    CommandRequest::try_parse_from(full).map_err(|e| {
        let mut msg = e.render().to_string();
        if !msg.contains("Usage") {
            msg.push_str(&format!("\n{}", CommandRequest::command().render_usage()));
        }
        Error::Validation(msg)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitStatus {
    Success = 0,
    Validation = 1,
    Numerical = 2,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }

    fn of(e: &Error) -> Self {
        if e.is_validation() {
            ExitStatus::Validation
        } else {
            ExitStatus::Numerical
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub exit: ExitStatus,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

impl RunReport {
    fn failed(e: &Error, artifacts: Vec<PathBuf>) -> Self {
        RunReport {
            exit: ExitStatus::of(e),
            artifacts,
            summary: format!("error: {e}"),
        }
    }
}

/// Twelve significant digits, fixed notation where reasonable.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mut mag = x.abs().log10().floor() as i32;
    // rounding can carry into a new leading digit
    if format!("{:.11e}", x.abs()).ends_with(&format!("e{}", mag + 1)) {
        mag += 1;
    }
    if (-5..15).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

fn format_p(p: f64) -> String {
    let s = format!("{p}");
    if s.len() > 12 {
        format_sig(p)
    } else {
        s
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Validation(format!(
            "--tol must lie in (0, 1), got {tol}"
        )));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, contents: &str) -> Result<()> {
    out.write_all(contents.as_bytes())
        .map_err(|e| Error::Validation(format!("cannot write output: {e}")))
}

/// Run a parsed request. Data goes to `out` unless a path is given; the
/// report's summary is meant for stderr.
pub fn execute(request: &CommandRequest, out: &mut dyn Write) -> RunReport {
    match &request.command {
        Command::Table(a) => run_table(a, out),
        Command::Candidate(a) => run_candidate(a, out),
        Command::Geodesic(a) => run_geodesic(a, out),
        Command::Verify(a) => run_verify(a, out),
        Command::Pinch(a) => run_pinch(a, out),
    }
}

pub fn p_values(p_min: f64, p_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(p_min.is_finite() && p_max.is_finite() && p_min <= p_max) {
        return Err(Error::Validation(format!(
            "need finite p_min <= p_max, got {p_min} and {p_max}"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Validation(format!(
            "--step must be positive, got {step}"
        )));
    }
    let n = ((p_max - p_min) / step + 1e-9).floor();
    if n >= MAX_TABLE_COLUMNS as f64 {
        return Err(Error::Validation(format!("too many p values ({n})")));
    }
    Ok((0..=n as usize).map(|i| p_min + step * i as f64).collect())
}

#[derive(Serialize)]
struct TableJson<'a> {
    metadata: TableMeta<'a>,
    rows: Vec<TableJsonRow>,
}

#[derive(Serialize)]
struct TableMeta<'a> {
    program: &'a str,
    version: &'a str,
    tol: f64,
    areas: [f64; 2],
    p: Vec<f64>,
}

#[derive(Serialize)]
struct TableJsonRow {
    kind: CandidateKind,
    values: Vec<Option<f64>>,
    presentation: Vec<Option<String>>,
    errors: Vec<Option<String>>,
}

fn round_sig(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

fn table_csv(t: &PerimeterTable) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let mut header = vec!["kind".to_string(), "presentation".to_string()];
    header.extend(t.rows.iter().map(|r| format!("p={}", format_p(r.p))));
    let csv_err = |e: csv::Error| Error::Validation(format!("csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for (k, kind) in CandidateKind::ALL.iter().enumerate() {
        let cell = |f: fn(f64) -> String| -> Vec<String> {
            t.rows
                .iter()
                .map(|r| r.cells[k].value.map(f).unwrap_or_default())
                .collect()
        };
        let mut exact = vec![kind.name().to_string(), "unrounded".to_string()];
        exact.extend(cell(format_sig));
        w.write_record(&exact).map_err(csv_err)?;
        let mut rounded = vec![kind.name().to_string(), "rounded".to_string()];
        rounded.extend(cell(|v| format!("{v:.3}")));
        w.write_record(&rounded).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Validation(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn table_json(t: &PerimeterTable, tol: f64) -> String {
    let rows = CandidateKind::ALL
        .iter()
        .enumerate()
        .map(|(k, &kind)| TableJsonRow {
            kind,
            values: t
                .rows
                .iter()
                .map(|r| r.cells[k].value.map(round_sig))
                .collect(),
            presentation: t
                .rows
                .iter()
                .map(|r| r.cells[k].value.map(|v| format!("{v:.3}")))
                .collect(),
            errors: t.rows.iter().map(|r| r.cells[k].error.clone()).collect(),
        })
        .collect();
    let doc = TableJson {
        metadata: TableMeta {
            program: "dbubble",
            version: env!("CARGO_PKG_VERSION"),
            tol,
            areas: [1.0, 1.0],
            p: t.rows.iter().map(|r| r.p).collect(),
        },
        rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
    s.push('\n');
    s
}

fn run_table(a: &TableArgs, out: &mut dyn Write) -> RunReport {
    let mut run = || -> Result<RunReport> {
        check_tol(a.tol)?;
        let ps = p_values(a.p_min, a.p_max, a.step)?;
        let t = perimeter_table(&ps, a.tol)?;
        let text = match a.format {
            Format::Csv => table_csv(&t)?,
            Format::Json => table_json(&t, a.tol),
        };
        let mut artifacts = Vec::new();
        match &a.out {
            Some(path) => {
                write_file(path, &text)?;
                artifacts.push(path.clone());
            }
            None => emit(out, &text)?,
        }
        let failures = t.failures();
        if failures.is_empty() {
            Ok(RunReport {
                exit: ExitStatus::Success,
                artifacts,
                summary: format!("{} cells computed", 4 * t.rows.len()),
            })
        } else {
            let lines: Vec<String> = failures
                .iter()
                .map(|(p, k, e)| format!("{k} at p={}: {e}", format_p(*p)))
                .collect();
            Ok(RunReport {
                exit: ExitStatus::Numerical,
                artifacts,
                summary: format!("failed cells:\n{}", lines.join("\n")),
            })
        }
    };
    run().unwrap_or_else(|e| RunReport::failed(&e, Vec::new()))
}

#[derive(Serialize)]
struct CandidateJson<'a> {
    candidate: &'a DoubleBubbleCandidate,
    equilibrium: &'a EquilibriumReport,
}

fn run_candidate(a: &CandidateArgs, out: &mut dyn Write) -> RunReport {
    let mut artifacts = Vec::new();
    let mut run = || -> Result<String> {
        check_tol(a.tol)?;
        let p = DensityExponent::nonnegative(a.p)?;
        let c = build_candidate(a.kind, p, a.a1, a.a2.unwrap_or(a.a1), a.tol)?;
        let eq = check_equilibrium(&c, 1e-6, 1e-6)?;
        let mut text = serde_json::to_string_pretty(&CandidateJson {
            candidate: &c,
            equilibrium: &eq,
        })
        .map_err(|e| Error::Construction(format!("json: {e}")))?;
        text.push('\n');
        match &a.json {
            Some(path) => {
                write_file(path, &text)?;
                artifacts.push(path.clone());
            }
            None => emit(out, &text)?,
        }
        if let Some(path) = &a.svg {
            write_file(path, &render_candidate(&c)?)?;
            artifacts.push(path.clone());
        }
        Ok(format!(
            "{} candidate, p = {}: perimeter {}, areas ({}, {})",
            c.kind,
            c.p,
            format_sig(c.weighted_perimeter),
            format_sig(c.weighted_areas.0),
            format_sig(c.weighted_areas.1)
        ))
    };
    match run() {
        Ok(summary) => RunReport {
            exit: ExitStatus::Success,
            artifacts,
            summary,
        },
        Err(e) => RunReport::failed(&e, artifacts),
    }
}

#[derive(Serialize)]
struct GeodesicJson {
    kind: &'static str,
    weighted_length: f64,
    via_origin_length: f64,
    chord_length: Option<f64>,
    waypoints: Vec<[f64; 2]>,
}

fn run_geodesic(a: &GeodesicArgs, out: &mut dyn Write) -> RunReport {
    let mut run = || -> Result<RunReport> {
        let p = DensityExponent::nonnegative(a.p)?;
        let g = geodesic(p, a.from.0, a.to.0)?;
        let doc = GeodesicJson {
            kind: g.kind.name(),
            weighted_length: round_sig(g.weighted_length),
            via_origin_length: round_sig(g.via_origin_length),
            chord_length: g.chord_length.map(round_sig),
            waypoints: g
                .waypoints
                .iter()
                .map(|q| [round_sig(q.x), round_sig(q.y)])
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("geodesic serializes");
        text.push('\n');
        emit(out, &text)?;
        Ok(RunReport {
            exit: ExitStatus::Success,
            artifacts: Vec::new(),
            summary: format!(
                "{} of weighted length {}",
                g.kind.name(),
                format_sig(g.weighted_length)
            ),
        })
    };
    run().unwrap_or_else(|e| RunReport::failed(&e, Vec::new()))
}

fn run_verify(a: &VerifyArgs, out: &mut dyn Write) -> RunReport {
    let results = match a.suite {
        Some(s) => run_suite(s),
        None => run_all(),
    };
    let mut text = String::new();
    for r in &results {
        text.push_str(&r.to_string());
        text.push('\n');
    }
    if let Err(e) = emit(out, &text) {
        return RunReport::failed(&e, Vec::new());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    RunReport {
        exit: if failed == 0 {
            ExitStatus::Success
        } else {
            ExitStatus::Numerical
        },
        artifacts: Vec::new(),
        summary: format!("{} checks, {failed} failed", results.len()),
    }
}

fn run_pinch(a: &PinchArgs, out: &mut dyn Write) -> RunReport {
    let mut artifacts = Vec::new();
    let mut run = || -> Result<String> {
        let p = DensityExponent::nonnegative(a.p)?;
        let sweep = pinch_sweep(p, a.r1, a.r2, a.r_min, a.r_max, a.samples)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Validation(format!("csv: {e}"));
        w.write_record([
            "r",
            "saved_perimeter",
            "added_perimeter",
            "delta",
            "area_imbalance",
        ])
        .map_err(csv_err)?;
        for q in &sweep {
            w.write_record(
                [
                    q.r,
                    q.saved_perimeter,
                    q.added_perimeter,
                    q.delta,
                    q.area_imbalance,
                ]
                .map(format_sig),
            )
            .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Validation(format!("csv: {e}")))?;
        let text = String::from_utf8(bytes).expect("csv output is UTF-8");
        match &a.out {
            Some(path) => {
                write_file(path, &text)?;
                artifacts.push(path.clone());
            }
            None => emit(out, &text)?,
        }
        let rs: Vec<f64> = sweep.iter().map(|q| q.r).collect();
        let saved = loglog_slope(
            &rs,
            &sweep.iter().map(|q| q.saved_perimeter).collect::<Vec<_>>(),
        )?;
        let added = loglog_slope(
            &rs,
            &sweep.iter().map(|q| q.added_perimeter).collect::<Vec<_>>(),
        )?;
        let threshold = pinch_threshold(p, a.r1, a.r2)?;
        Ok(format!(
            "log-log slopes: saved {saved:.4} (expect {}), added {added:.4} (expect {}); delta < 0 below r* = {}{}",
            format_p(p.value() + 1.0),
            format_p(p.value() + 2.0),
            format_sig(threshold.r_star),
            if threshold.sign_change { "" } else { " (no sign change)" }
        ))
    };
    match run() {
        Ok(summary) => RunReport {
            exit: ExitStatus::Success,
            artifacts,
            summary,
        },
        Err(e) => RunReport::failed(&e, artifacts),
    }
}
