//! Command implementations behind the `bounds` binary.
//!
//! Every command returns its full output as a string so that the binary
//! only decides where it goes; this keeps output deterministic and lets
//! tests call the commands directly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bounds_core::analysis::{self, Extremum};
use bounds_core::catalog::{self, BoundEntry, Catalog, Endpoint, RegionKind, Side, TAG_AS_PRINTED};
use bounds_core::special::{self, Region};
use bounds_core::verifier::{self, Transform, VerificationReport, LEMMAS};
use bounds_core::{Context, Ext, Real, Settings, Status, VerifyError};
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_DIGITS: u32 = 40;
/// Limits checked by `lemmas` must match to this absolute residual.
pub const LIMIT_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unknown ids or unreadable input: exit code 2.
    #[error("{0}")]
    Usage(String),
    /// An analysis that could not be carried out: exit code 1.
    #[error("{0}")]
    Analysis(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Analysis(_) | CliError::Io(_) => 1,
        }
    }
}

fn analysis_err(e: VerifyError) -> CliError {
    match e {
        VerifyError::Config(_) | VerifyError::UnknownEntry(_) | VerifyError::Parse(_) | VerifyError::MismatchedTarget(_) => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Analysis(e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

/// Entry filters; all given filters must hold.
#[derive(Clone, Debug, Default)]
pub struct Filter {
    pub ids: Vec<String>,
    pub tags: Vec<String>,
    pub target: Option<String>,
    pub side: Option<Side>,
}

impl Filter {
    pub fn accepts(&self, e: &BoundEntry) -> bool {
        (self.ids.is_empty() || self.ids.contains(&e.id))
            && self.tags.iter().all(|t| e.has_tag(t))
            && self.target.as_ref().map_or(true, |t| &e.target_name() == t)
            && self.side.map_or(true, |s| e.side == s)
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid_n: usize,
    pub refine_depth: usize,
    pub digits: u32,
    /// `None` selects the command's own default.
    pub x_max: Option<f64>,
    pub format: Format,
    pub catalog: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub filter: Filter,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_n: verifier::DEFAULT_GRID,
            refine_depth: verifier::DEFAULT_REFINE,
            digits: DEFAULT_DIGITS,
            x_max: None,
            format: Format::Text,
            catalog: None,
            jobs: None,
            filter: Filter::default(),
        }
    }
}

impl RunConfig {
    pub fn settings(&self, default_x_max: f64) -> Result<Settings, CliError> {
        Settings::new(self.grid_n, self.refine_depth, self.digits, self.x_max.unwrap_or(default_x_max))
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    fn catalog_name(&self) -> String {
        self.catalog.as_ref().map_or_else(|| "builtin".to_owned(), |p| p.display().to_string())
    }
}

/// Loaded catalog plus what the commands need to evaluate it.
pub struct Session {
    pub catalog: Catalog,
}

impl Session {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        Ok(Self { catalog: load_catalog(path)? })
    }

    pub fn context(&self) -> Result<Context<'_>, CliError> {
        Context::new(&self.catalog).map_err(|e| CliError::Usage(e.to_string()))
    }
}

pub fn load_catalog(path: Option<&Path>) -> Result<Catalog, CliError> {
    match path {
        None => Ok(catalog::builtin_catalog()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            catalog::parse_catalog(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
        }
    }
}

/// Fixed float formatting for CSV: 17 significant digits.
pub fn csv_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_owned()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{v:.16e}")
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Usage(e.to_string()))
}

// ------------------------------------------------------------------ list / show

#[derive(Serialize)]
struct ListRow<'a> {
    id: &'a str,
    target: String,
    side: Side,
    domain: String,
    provenance: &'a str,
    tags: &'a [String],
}

fn domain_text(e: &BoundEntry) -> String {
    match &e.domain {
        catalog::Domain::Interval(iv) => iv.to_string(),
        catalog::Domain::Region(r) => r.name().to_owned(),
    }
}

pub fn cmd_list(cfg: &RunConfig, cat: &Catalog) -> String {
    let mut rows: Vec<&BoundEntry> = cat.entries.iter().filter(|e| cfg.filter.accepts(e)).collect();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    match cfg.format {
        Format::Json => json(
            &rows
                .iter()
                .map(|e| ListRow {
                    id: &e.id,
                    target: e.target_name(),
                    side: e.side,
                    domain: domain_text(e),
                    provenance: &e.provenance,
                    tags: &e.tags,
                })
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut out = String::from("id,target,side,domain,provenance\n");
            for e in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    e.id,
                    csv_field(&e.target_name()),
                    e.side.name(),
                    csv_field(&domain_text(e)),
                    csv_field(&e.provenance)
                );
            }
            out
        }
        Format::Text => {
            let w = rows.iter().map(|e| e.id.len()).max().unwrap_or(2).max(2);
            let tw = rows.iter().map(|e| e.target_name().len()).max().unwrap_or(6).max(6);
            let mut out = format!("{:<w$}  {:<tw$}  {:<5}  {:<22}  provenance\n", "id", "target", "side", "domain");
            for e in rows {
                let _ = writeln!(
                    out,
                    "{:<w$}  {:<tw$}  {:<5}  {:<22}  {}",
                    e.id,
                    e.target_name(),
                    e.side.name(),
                    domain_text(e),
                    e.provenance
                );
            }
            out
        }
    }
}

pub fn cmd_show(cat: &Catalog, id: &str) -> Result<String, CliError> {
    let e = cat.lookup(id).ok_or_else(|| CliError::Usage(format!("unknown entry {id}")))?;
    let mut out = String::new();
    let _ = writeln!(out, "id          {}", e.id);
    let _ = writeln!(out, "target      {} = {}", e.target_name(), verifier::target_text(e));
    let _ = writeln!(out, "side        {}", e.side.name());
    let _ = writeln!(out, "domain      {}", domain_text(e));
    let _ = writeln!(out, "bound       {}", e.expr);
    for p in &e.params {
        let grid: Vec<String> = p.grid.iter().map(|g| g.to_string()).collect();
        let _ = writeln!(out, "param       {} in {} default {} grid [{}]", p.name, p.range, p.default, grid.join(", "));
    }
    if !e.sharp_at.is_empty() {
        let ends: Vec<&str> = e.sharp_at.iter().map(|s| if *s == Endpoint::Lo { "lo" } else { "hi" }).collect();
        let _ = writeln!(out, "sharp at    {}", ends.join(", "));
    }
    if !e.touch.is_empty() {
        let t: Vec<String> = e.touch.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(out, "touches at  {}", t.join(", "));
    }
    let _ = writeln!(out, "expect      {}", e.expect.name());
    if !e.tags.is_empty() {
        let _ = writeln!(out, "tags        {}", e.tags.join(", "));
    }
    let _ = writeln!(out, "ref         {}", e.provenance);
    Ok(out)
}

// ------------------------------------------------------------------ verify

#[derive(Serialize)]
struct ConfigOut {
    grid: usize,
    refine: usize,
    digits: u32,
    x_max: f64,
    catalog: String,
}

#[derive(Serialize)]
#[serde(untagged)]
enum ReportOut<'a> {
    Done {
        #[serde(flatten)]
        report: &'a VerificationReport,
        expect: &'static str,
        matches_expect: bool,
        label: String,
    },
    Failed {
        entry_id: &'a str,
        expect: &'static str,
        matches_expect: bool,
        error: String,
    },
}

#[derive(Serialize, Default, Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifySummary {
    pub certified: usize,
    pub violated: usize,
    pub inconclusive: usize,
    pub expect_mismatches: usize,
}

#[derive(Serialize)]
struct VerifyOut<'a> {
    config: ConfigOut,
    reports: Vec<ReportOut<'a>>,
    summary: VerifySummary,
}

/// Output and exit code of a command whose verdict decides the exit code.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub output: String,
    pub code: i32,
}

fn select_entries<'a>(cat: &'a Catalog, ids: &[String], all: bool, filter: &Filter) -> Result<Vec<&'a BoundEntry>, CliError> {
    let mut out: Vec<&BoundEntry> = if all || ids.is_empty() {
        if !all && ids.is_empty() {
            return Err(CliError::Usage("give entry ids or --all".into()));
        }
        cat.entries.iter().filter(|e| filter.accepts(e)).collect()
    } else {
        ids.iter()
            .map(|id| cat.lookup(id).ok_or_else(|| CliError::Usage(format!("unknown entry {id}"))))
            .collect::<Result<_, _>>()?
    };
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out.dedup_by(|a, b| a.id == b.id);
    Ok(out)
}

/// Verifies one entry with the routine its domain calls for.
pub fn verify_entry(ctx: &Context, e: &BoundEntry, s: &Settings) -> Result<VerificationReport, VerifyError> {
    match e.region() {
        Some(kind) => special::verify_beta_bound(ctx, e, &Region::new(kind, special::DEFAULT_EPS, s.x_max)?, s),
        None => verifier::certify_sign(ctx, e, s),
    }
}

pub fn cmd_verify(cfg: &RunConfig, session: &Session, ids: &[String], all: bool) -> Result<Verdict, CliError> {
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    let entries = select_entries(&session.catalog, ids, all, &cfg.filter)?;
    let results: Vec<Result<VerificationReport, VerifyError>> =
        pool(cfg.jobs)?.install(|| entries.par_iter().map(|e| verify_entry(&ctx, e, &s)).collect());

    let mut sum = VerifySummary::default();
    let mut rows = Vec::with_capacity(entries.len());
    let mut text = String::new();
    for (e, r) in entries.iter().zip(&results) {
        match r {
            Ok(rep) => {
                match rep.status {
                    Status::Certified => sum.certified += 1,
                    Status::Violated => sum.violated += 1,
                    Status::Inconclusive => sum.inconclusive += 1,
                }
                let ok = verifier::matches_expect(e, rep);
                if !ok {
                    sum.expect_mismatches += 1;
                }
                write_report_text(&mut text, e, rep, ok);
                rows.push(ReportOut::Done { report: rep, expect: e.expect.name(), matches_expect: ok, label: rep.label() });
            }
            Err(err) => {
                sum.expect_mismatches += 1;
                let _ = writeln!(text, "{:<36} error        {err}", e.id);
                let _ = writeln!(text, "  MISMATCH expected {}: {err}", e.expect.name());
                rows.push(ReportOut::Failed {
                    entry_id: &e.id,
                    expect: e.expect.name(),
                    matches_expect: false,
                    error: err.to_string(),
                });
            }
        }
    }
    let code = i32::from(sum.expect_mismatches > 0);
    let output = match cfg.format {
        Format::Json => json(&VerifyOut {
            config: ConfigOut {
                grid: s.grid_n,
                refine: s.refine_depth,
                digits: s.prec.digits(),
                x_max: s.x_max,
                catalog: cfg.catalog_name(),
            },
            reports: rows,
            summary: sum,
        }),
        Format::Csv => {
            let mut out = String::from("id,status,expect,matches_expect,min_margin,argmin_x,argmin_y,counterexamples\n");
            for (e, r) in entries.iter().zip(&results) {
                match r {
                    Ok(rep) => {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{},{}",
                            e.id,
                            rep.status,
                            e.expect.name(),
                            verifier::matches_expect(e, rep),
                            csv_float(rep.min_margin),
                            rep.argmin.map_or(String::new(), |p| csv_float(p.x)),
                            rep.argmin.and_then(|p| p.y).map_or(String::new(), csv_float),
                            rep.counterexamples.len()
                        );
                    }
                    Err(_) => {
                        let _ = writeln!(out, "{},error,{},false,,,,0", e.id, e.expect.name());
                    }
                }
            }
            out
        }
        Format::Text => {
            let _ = writeln!(
                text,
                "{} entries: {} certified, {} violated, {} inconclusive, {} expectation mismatches",
                entries.len(),
                sum.certified,
                sum.violated,
                sum.inconclusive,
                sum.expect_mismatches
            );
            text
        }
    };
    Ok(Verdict { output, code })
}

fn write_report_text(out: &mut String, e: &BoundEntry, r: &VerificationReport, ok: bool) {
    let margin = if r.min_margin.is_nan() { "-".to_owned() } else { format!("{:.6e}", r.min_margin) };
    let at = r.argmin.map_or("-".to_owned(), |p| p.to_string());
    let _ = writeln!(out, "{:<36} {:<12} min margin {margin} at {at}  [{}]", e.id, r.status.name(), r.label());
    if let Some((p, msg)) = &r.domain_error {
        let _ = writeln!(out, "  domain error at {p}: {msg}");
    }
    if r.status == Status::Violated || !ok {
        if let Some(c) = r.counterexamples.first() {
            let params: Vec<String> = c.params.iter().map(|(n, v)| format!("{n}={v}")).collect();
            let _ = writeln!(
                out,
                "  counterexample {}{}{} margin {:.6e} (error bound {:.1e})",
                c.point,
                if params.is_empty() { "" } else { " " },
                params.join(" "),
                c.margin,
                c.err_bound
            );
        }
    }
    if !ok {
        let _ = writeln!(
            out,
            "  MISMATCH expected {}, got {} ({} inconclusive samples, {} unresolved near sharp points)",
            e.expect.name(),
            r.status.name(),
            r.inconclusive_samples,
            r.unresolved_near_sharp
        );
    }
}

// ------------------------------------------------------------------ analyses

fn span_arg(ctx: &Context, text: Option<&str>, x_max: f64) -> Result<Option<verifier::Span>, CliError> {
    text.map(|t| ctx.parse_span(t, x_max).map(|(s, _)| s).map_err(analysis_err)).transpose()
}

pub fn cmd_crossover(cfg: &RunConfig, session: &Session, a: &str, b: &str, interval: Option<&str>) -> Result<String, CliError> {
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    let span = span_arg(&ctx, interval, s.x_max)?;
    let r = analysis::crossover(&ctx, a, b, span, &s).map_err(analysis_err)?;
    Ok(match cfg.format {
        Format::Json => json(&r),
        Format::Csv => {
            let mut out = String::from("x,bracket_lo,bracket_hi,tangency\n");
            for c in &r.crossings {
                let _ = writeln!(out, "{},{},{},{}", csv_float(c.x), csv_float(c.bracket.0), csv_float(c.bracket.1), c.tangency);
            }
            out
        }
        Format::Text => {
            let mut out = format!("{} vs {} on {}\n", r.id_a, r.id_b, r.interval);
            if r.crossings.is_empty() {
                out.push_str("no crossing\n");
            }
            for c in &r.crossings {
                let _ = writeln!(
                    out,
                    "crossing at x = {:.12} (bracket [{:.15}, {:.15}]){}",
                    c.x,
                    c.bracket.0,
                    c.bracket.1,
                    if c.tangency { ", tangency" } else { "" }
                );
            }
            for d in &r.dominance {
                let _ = writeln!(out, "  ({:.6}, {:.6}): {} tighter", d.lo, d.hi, d.tighter);
            }
            out
        }
    })
}

fn extremum_text(r: &analysis::ExtremumRecord) -> String {
    let mut out = r.summary();
    out.push('\n');
    for (x, d) in &r.asymptotic {
        let _ = writeln!(out, "  |bound({x:e}) - pi/2| = {d:.6e}");
    }
    out
}

pub fn cmd_maxerr(cfg: &RunConfig, session: &Session, id: &str, interval: Option<&str>) -> Result<String, CliError> {
    let s = cfg.settings(analysis::MAXERR_XMAX)?;
    let ctx = session.context()?;
    let span = span_arg(&ctx, interval, s.x_max)?;
    let r = analysis::max_rel_error(&ctx, id, span, &s).map_err(analysis_err)?;
    Ok(match cfg.format {
        Format::Json => json(&r),
        Format::Csv => format!("id,max_rel_error,arg\n{},{},{}\n", id, csv_float(r.value), csv_float(r.arg)),
        Format::Text => {
            let mut out = extremum_text(&r);
            let _ = writeln!(out, "  = {:.4}%", 100.0 * r.value);
            out
        }
    })
}

pub fn cmd_extremum(cfg: &RunConfig, session: &Session, expr: &str, interval: &str, kind: Extremum) -> Result<String, CliError> {
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    let f = ctx.parse(expr).map_err(analysis_err)?;
    let (span, _) = ctx.parse_span(interval, s.x_max).map_err(analysis_err)?;
    let r = analysis::best_constant(&ctx, &f, &span, kind, &s).map_err(analysis_err)?;
    Ok(match cfg.format {
        Format::Json => json(&r),
        Format::Csv => format!("quantity,value,arg\n{},{},{}\n", r.quantity, csv_float(r.value), csv_float(r.arg)),
        Format::Text => extremum_text(&r),
    })
}

pub fn cmd_region(cfg: &RunConfig, session: &Session, expr: &str, kind: RegionKind, ext: Extremum) -> Result<String, CliError> {
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    let f = ctx.parse(expr).map_err(analysis_err)?;
    let region = Region::new(kind, special::DEFAULT_EPS, s.x_max).map_err(analysis_err)?;
    let n = s.grid_n.min(special::REGION_GRID);
    let r = special::region_extremum(&ctx, &f, &region, ext, n, s.prec).map_err(analysis_err)?;
    Ok(match cfg.format {
        Format::Json => json(&r),
        Format::Csv => format!("kind,value,x,y\n{},{},{},{}\n", ext.name(), csv_float(r.value), csv_float(r.at.x), r.at.y.map_or(String::new(), csv_float)),
        Format::Text => {
            let mut out = format!("{} of {} over {} = {:.12} at {}\n", ext.name(), f, region.describe(), r.value, r.at);
            if let Some((p, v)) = r.boundary_limit {
                let _ = writeln!(out, "  boundary limit toward {p}: {v:.12}");
            }
            out
        }
    })
}

pub fn cmd_limit(cfg: &RunConfig, session: &Session, expr: &str, interval: &str, end: Endpoint, expected: &str) -> Result<Verdict, CliError> {
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    let f = ctx.parse(expr).map_err(analysis_err)?;
    let want = ctx.parse(expected).map_err(analysis_err)?;
    let (span, _) = ctx.parse_span(interval, s.x_max).map_err(analysis_err)?;
    let r = verifier::check_limit(&ctx, &f, &span, end, &want, s.prec).map_err(analysis_err)?;
    let code = i32::from(!(r.residual <= LIMIT_TOL));
    let output = match cfg.format {
        Format::Json => json(&r),
        Format::Csv => format!("endpoint,expected,extrapolated,residual\n{},{},{},{}\n", csv_float(r.endpoint), csv_float(r.expected), csv_float(r.extrapolated), csv_float(r.residual)),
        Format::Text => format!(
            "limit of {} at {} = {:.15} (expected {} = {:.15}, residual {:.2e})\n",
            r.function, r.endpoint, r.extrapolated, r.expected_expr, r.expected, r.residual
        ),
    };
    Ok(Verdict { output, code })
}

pub fn cmd_lemmas(cfg: &RunConfig, session: &Session, only: &[String]) -> Result<Verdict, CliError> {
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    for id in only {
        if !LEMMAS.iter().any(|c| c.id == id) {
            return Err(CliError::Usage(format!("unknown claim {id}")));
        }
    }
    let claims: Vec<_> = LEMMAS.iter().filter(|c| only.is_empty() || only.iter().any(|o| o == c.id)).collect();
    let results: Vec<_> = pool(cfg.jobs)?.install(|| claims.par_iter().map(|c| verifier::check_lemma(&ctx, c, &s)).collect());
    let mut failed = 0;
    let mut reports = Vec::new();
    let mut text = String::new();
    for (c, r) in claims.iter().zip(results) {
        let r = r.map_err(analysis_err)?;
        let ok = r.status == Status::Certified && r.limits.iter().all(|l| l.residual <= LIMIT_TOL);
        if !ok {
            failed += 1;
        }
        let _ = writeln!(text, "{:<16} {:<16} {:<12} {} on {}", c.id, r.direction.name(), r.status.name(), r.function, r.span);
        if let Some((x, v)) = r.extremum {
            let _ = writeln!(text, "  interior minimum {v:.12} at x = {x:.12}");
        }
        for l in &r.limits {
            let _ = writeln!(
                text,
                "  limit at {:.12}: {:.15} vs {} = {:.15} (residual {:.2e})",
                l.endpoint, l.extrapolated, l.expected_expr, l.expected, l.residual
            );
        }
        reports.push((c.id, r));
    }
    let _ = writeln!(text, "{} claims, {} failed", claims.len(), failed);
    let output = match cfg.format {
        Format::Json => json(&reports.iter().map(|(id, r)| serde_json::json!({ "id": id, "report": r })).collect::<Vec<_>>()),
        Format::Csv => {
            let mut out = String::from("id,direction,status,violations,unresolved_pairs\n");
            for (id, r) in &reports {
                let _ = writeln!(out, "{},{},{},{},{}", id, r.direction, r.status, r.violations, r.unresolved_pairs);
            }
            out
        }
        Format::Text => text,
    };
    Ok(Verdict { output, code: i32::from(failed > 0) })
}

pub fn cmd_substitution(cfg: &RunConfig, session: &Session, a: &str, b: &str, t: Transform) -> Result<Verdict, CliError> {
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    let r = verifier::check_substitution(&ctx, a, b, t, s.grid_n, s.prec).map_err(analysis_err)?;
    let output = match cfg.format {
        Format::Json => json(&r),
        Format::Csv => format!("id_a,id_b,transform,max_deviation,at_t\n{},{},{},{},{}\n", a, b, t.name(), csv_float(r.max_deviation), csv_float(r.at_t)),
        Format::Text => format!(
            "{} vs {} under {}: max deviation {:.3e} at t = {:.12} over {} samples (threshold {:.0e}) {}\n",
            a,
            b,
            t.name(),
            r.max_deviation,
            r.at_t,
            r.samples,
            r.threshold,
            if r.passed { "pass" } else { "FAIL" }
        ),
    };
    Ok(Verdict { output, code: i32::from(!r.passed) })
}

pub fn cmd_dominance(cfg: &RunConfig, session: &Session, target: &str, ids: &[String]) -> Result<String, CliError> {
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    let t = analysis::parse_target(target).ok_or_else(|| CliError::Usage(format!("unknown target {target}")))?;
    let ids = (!ids.is_empty()).then_some(ids);
    let table = analysis::dominance_table(&ctx, &t, cfg.filter.side, ids, None, &s).map_err(analysis_err)?;
    Ok(match cfg.format {
        Format::Json => json(&table),
        _ => {
            let mut out = String::from("id_a,id_b,crossings,dominance\n");
            for p in &table.pairs {
                let xs: Vec<String> = p.crossings.iter().map(|c| csv_float(c.x)).collect();
                let dom: Vec<String> = p.dominance.iter().map(|d| format!("{}:{}:{}", csv_float(d.lo), csv_float(d.hi), d.tighter)).collect();
                let _ = writeln!(out, "{},{},{},{}", p.id_a, p.id_b, xs.join(";"), dom.join(";"));
            }
            out
        }
    })
}

// ------------------------------------------------------------------ constants

#[derive(Serialize)]
struct ConstOut<'a> {
    name: &'a str,
    closed_form: String,
    value: String,
    printed: Option<&'a str>,
    printed_deviation: Option<f64>,
    suspect: bool,
    provenance: &'a str,
}

pub fn cmd_const(cfg: &RunConfig, session: &Session, name: Option<&str>) -> Result<String, CliError> {
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    let defs: Vec<_> = match name {
        Some(n) => vec![session.catalog.constant(n).ok_or_else(|| CliError::Usage(format!("unknown constant {n}")))?],
        None => {
            let mut v: Vec<_> = session.catalog.constants.iter().collect();
            v.sort_by(|a, b| a.name.cmp(&b.name));
            v
        }
    };
    let digits = s.prec.digits() as usize;
    let mut rows = Vec::new();
    for d in defs {
        let v = ctx.constant_value(&d.closed_form).map_err(analysis_err)?;
        let dev = d
            .reference_decimal
            .as_deref()
            .and_then(|p| p.parse::<f64>().ok())
            .map(|p| (p - v.value.to_f64()).abs());
        rows.push(ConstOut {
            name: &d.name,
            closed_form: d.closed_form.to_string(),
            value: format!("{:.*e}", digits - 1, v.value),
            printed: d.reference_decimal.as_deref(),
            printed_deviation: dev,
            suspect: d.is_suspect(),
            provenance: &d.provenance,
        });
    }
    Ok(match cfg.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut out = String::from("name,closed_form,value,printed,suspect\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{},{}", r.name, csv_field(&r.closed_form), r.value, r.printed.unwrap_or(""), r.suspect);
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for r in &rows {
                let _ = writeln!(out, "{}", r.name);
                let _ = writeln!(out, "  closed form  {}", r.closed_form);
                let _ = writeln!(out, "  value        {}", r.value);
                if let Some(p) = r.printed {
                    let _ = writeln!(out, "  printed      {p}");
                }
                let flag = match (r.suspect, r.printed_deviation) {
                    (true, Some(d)) => format!("SUSPECT (printed decimal off by {d:.3e})"),
                    (true, None) => "SUSPECT".to_owned(),
                    (false, _) => "ok".to_owned(),
                };
                let _ = writeln!(out, "  flag         {flag}");
                if !r.provenance.is_empty() {
                    let _ = writeln!(out, "  ref          {}", r.provenance);
                }
            }
            out
        }
    })
}

// ------------------------------------------------------------------ table

/// Default columns of `table` for targets with a canonical comparison.
pub fn default_table_ids(target: &str) -> Option<&'static [&'static str]> {
    match target {
        "acos" => Some(&["carlson-lower", "thm3-lower-corrected", "carlson-upper", "thm3-upper"]),
        "atan" => Some(&["alirezaei-lower", "thm4-lower", "alirezaei-upper", "thm4-upper"]),
        _ => None,
    }
}

/// CSV `x,<id>...,target` at `points` uniform interior points of the
/// common domain.
pub fn cmd_table(cfg: &RunConfig, session: &Session, target: &str, ids: &[String], points: usize) -> Result<String, CliError> {
    if points == 0 {
        return Err(CliError::Usage("--points must be positive".into()));
    }
    let s = cfg.settings(verifier::DEFAULT_XMAX)?;
    let ctx = session.context()?;
    let cat = &session.catalog;
    let ids: Vec<String> = if !ids.is_empty() {
        ids.to_vec()
    } else if let Some(d) = default_table_ids(target) {
        d.iter().map(|s| (*s).to_owned()).collect()
    } else {
        let mut v: Vec<String> = cat
            .entries
            .iter()
            .filter(|e| e.target_name() == target && e.interval().is_some() && !e.has_tag(TAG_AS_PRINTED))
            .map(|e| e.id.clone())
            .collect();
        v.sort();
        v
    };
    if ids.is_empty() {
        return Err(CliError::Usage(format!("no univariate entries bound {target}")));
    }
    let mut entries = Vec::new();
    let mut span: Option<verifier::Span> = None;
    for id in &ids {
        let e = cat.lookup(id).ok_or_else(|| CliError::Usage(format!("unknown entry {id}")))?;
        if e.target_name() != target {
            return Err(CliError::Usage(format!("{id} bounds {}, not {target}", e.target_name())));
        }
        let iv = e.interval().ok_or_else(|| CliError::Usage(format!("{id} is not univariate")))?;
        let (sp, _) = verifier::Span::from_interval(iv, &ctx, s.x_max).map_err(analysis_err)?;
        span = match span {
            None => Some(sp),
            Some(c) => Some(c.intersect(&sp).ok_or_else(|| CliError::Usage(format!("domains do not overlap at {id}")))?),
        };
        entries.push(e);
    }
    let span = span.expect("non-empty");
    let mut out = String::from("x");
    for id in &ids {
        out.push(',');
        out.push_str(id);
    }
    out.push_str(",target\n");
    let n = Ext::from(points as u64 as i128);
    for i in 0..points {
        let x = span.lo + span.width() * Ext::from(2 * i as i128 + 1) / (Ext::from(2) * n);
        let _ = write!(out, "{}", csv_float(x.to_f64()));
        let mut target_value = f64::NAN;
        for e in &entries {
            match ctx.bound_and_target(e, x) {
                Ok((b, t)) => {
                    let _ = write!(out, ",{}", csv_float(b.value.to_f64()));
                    target_value = t.value.to_f64();
                }
                Err(_) => out.push_str(",nan"),
            }
        }
        let _ = writeln!(out, ",{}", csv_float(target_value));
    }
    Ok(out)
}
