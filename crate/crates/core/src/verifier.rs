//! Sign certification of catalog entries and checks of lemma-level claims.
//!
//! Certification is sampling based: a clustered grid is screened in `f64`,
//! anything close to zero is re-evaluated in [`Ext`], and local minima are
//! refined by golden-section search in [`Ext`]. Reports are labelled
//! "numerically certified", never proved.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::catalog::{BoundEntry, Catalog, CatalogError, Domain, EntryEval, Interval, Target};
use crate::expr::{parse_expr_with, Compiled, EvalError, Expr, ParseError};
use crate::oracle::{Precision, RefValue, TargetId};
use crate::real::{Ext, Real};
use crate::special;

pub const DEFAULT_GRID: usize = 10_000;
pub const DEFAULT_REFINE: usize = 40;
pub const DEFAULT_XMAX: f64 = 10.0;
pub const MIN_GRID: usize = 64;

/// Depth of the geometric clusters toward open endpoints.
pub const CLUSTER_DEPTH: i32 = 40;
/// Half-width of the inconclusive band, in propagated error bounds.
pub const BAND: f64 = 10.0;
/// An `f64` sample is trusted when its margin exceeds this many error bounds.
const SCREEN: f64 = 1e3;
const MAX_MINIMA: usize = 4;
const MAX_COUNTEREXAMPLES: usize = 5;
/// Samples within `width * 2^-NEAR` of a sharp end or touch point may be flat.
const NEAR: i32 = 10;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown entry {0}")]
    UnknownEntry(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{context}: {source}")]
    Eval { context: String, source: EvalError },
    #[error("mismatched targets: {0}")]
    MismatchedTarget(String),
    #[error("domains of {0} and {1} do not overlap")]
    EmptyOverlap(String, String),
}

pub(crate) fn eval_err(context: &str) -> impl Fn(EvalError) -> VerifyError + '_ {
    move |source| VerifyError::Eval { context: context.to_owned(), source }
}

/// Run parameters shared by the verifier and the analyses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub grid_n: usize,
    pub refine_depth: usize,
    pub prec: Precision,
    /// Upper end used in place of an infinite one.
    pub x_max: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self { grid_n: DEFAULT_GRID, refine_depth: DEFAULT_REFINE, prec: Precision::default(), x_max: DEFAULT_XMAX }
    }
}

impl Settings {
    pub fn new(grid_n: usize, refine_depth: usize, digits: u32, x_max: f64) -> Result<Self, VerifyError> {
        if grid_n < MIN_GRID {
            return Err(VerifyError::Config(format!("grid must be at least {MIN_GRID}, got {grid_n}")));
        }
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(VerifyError::Config(format!("x_max must be positive and finite, got {x_max}")));
        }
        let prec = Precision::new(digits).map_err(|e| VerifyError::Config(e.to_string()))?;
        Ok(Self { grid_n, refine_depth, prec, x_max })
    }
}

/// A catalog with its constants evaluated in both backends.
#[derive(Clone, Debug)]
pub struct Context<'a> {
    pub catalog: &'a Catalog,
    pub(crate) consts: BTreeMap<String, RefValue<Ext>>,
    pub(crate) consts64: BTreeMap<String, RefValue<f64>>,
}

impl<'a> Context<'a> {
    pub fn new(catalog: &'a Catalog) -> Result<Self, VerifyError> {
        Ok(Self { catalog, consts: catalog.const_table()?, consts64: catalog.const_table()? })
    }

    pub fn entry(&self, id: &str) -> Result<&'a BoundEntry, VerifyError> {
        self.catalog.lookup(id).ok_or_else(|| VerifyError::UnknownEntry(id.to_owned()))
    }

    /// Parses an expression in which catalog constants may be named.
    pub fn parse(&self, text: &str) -> Result<Expr, VerifyError> {
        Ok(parse_expr_with(text, &|n| self.consts.contains_key(n))?)
    }

    pub fn constant_value(&self, e: &Expr) -> Result<RefValue<Ext>, VerifyError> {
        crate::catalog::const_value(e, &self.consts).map_err(eval_err("constant"))
    }

    pub(crate) fn compile_x(&self, e: &Expr) -> Result<Univariate, VerifyError> {
        if !e.params().is_empty() {
            return Err(VerifyError::Config(format!("{e} has free parameters")));
        }
        let what = e.to_string();
        Ok(Univariate {
            ext: Compiled::new(e, &self.consts, &[]).map_err(eval_err(&what))?,
            f64: Compiled::new(e, &self.consts64, &[]).map_err(eval_err(&what))?,
        })
    }

    /// Parameter assignments of an entry in both backends.
    pub(crate) fn param_sets(&self, entry: &BoundEntry) -> Result<Vec<ParamSet>, VerifyError> {
        let sets = self.catalog.param_sets(entry, &self.consts).map_err(eval_err(&entry.id))?;
        let names = entry.param_names();
        Ok(sets
            .into_iter()
            .map(|ext| {
                let f64 = ext.iter().map(|v| lower(*v)).collect();
                let shown = names.iter().cloned().zip(ext.iter().map(|v| v.to_f64())).collect();
                ParamSet { ext, f64, shown }
            })
            .collect())
    }

    pub(crate) fn entry_evals(&self, entry: &BoundEntry) -> Result<(EntryEval<Ext>, EntryEval<f64>), VerifyError> {
        Ok((
            EntryEval::new(entry, &self.consts).map_err(eval_err(&entry.id))?,
            EntryEval::new(entry, &self.consts64).map_err(eval_err(&entry.id))?,
        ))
    }

    /// Bound and target of a univariate entry at `x`, with the entry's
    /// first parameter assignment.
    pub fn bound_and_target(&self, entry: &BoundEntry, x: Ext) -> Result<(RefValue<Ext>, RefValue<Ext>), VerifyError> {
        let ev = EntryEval::new(entry, &self.consts).map_err(eval_err(&entry.id))?;
        let p = self.param_sets(entry)?.into_iter().next().map(|p| p.ext).unwrap_or_default();
        let at = format!("{} at {}", entry.id, x.to_f64());
        Ok((ev.bound(x, None, &p).map_err(eval_err(&at))?, ev.target(x, None, &p).map_err(eval_err(&at))?))
    }

    /// Parses an interval such as `(0,pi/2]` into a span, cutting an
    /// infinite end at `x_max`.
    pub fn parse_span(&self, text: &str, x_max: f64) -> Result<(Span, Option<f64>), VerifyError> {
        let iv = crate::catalog::parse_interval(text, &|n| self.consts.contains_key(n)).map_err(VerifyError::Config)?;
        Span::from_interval(&iv, self, x_max)
    }
}

fn lower(v: RefValue<Ext>) -> RefValue<f64> {
    let f = v.value.to_f64();
    RefValue::new(f, v.err_bound + (v.value - Ext::from(f)).abs().to_f64())
}

pub(crate) struct ParamSet {
    pub ext: Vec<RefValue<Ext>>,
    pub f64: Vec<RefValue<f64>>,
    pub shown: Vec<(String, f64)>,
}

/// A closed-form univariate function compiled for both backends.
pub(crate) struct Univariate {
    pub ext: Compiled<Ext>,
    pub f64: Compiled<f64>,
}

impl Univariate {
    pub fn at(&self, x: Ext) -> Result<RefValue<Ext>, EvalError> {
        self.ext.eval(x, None, &[])
    }

    pub fn at64(&self, x: f64) -> Result<RefValue<f64>, EvalError> {
        self.f64.eval(x, None, &[])
    }
}

// ------------------------------------------------------------------ reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Status {
    Certified,
    Violated,
    Inconclusive,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sample location; `y` is set for two-variable entries.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Point {
    pub x: f64,
    pub y: Option<f64>,
}

impl Point {
    pub fn x(x: f64) -> Self {
        Self { x, y: None }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.y {
            None => write!(f, "x={:e}", self.x),
            Some(y) => write!(f, "(x,y)=({:e},{:e})", self.x, y),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Sample {
    pub point: Point,
    pub params: Vec<(String, f64)>,
    pub margin: f64,
    pub err_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VerificationReport {
    pub entry_id: String,
    pub status: Status,
    /// Smallest resolved positive margin; `NaN` when there is none.
    pub min_margin: f64,
    pub argmin: Option<Point>,
    pub err_at_argmin: f64,
    pub params_at_argmin: Vec<(String, f64)>,
    pub samples_used: usize,
    pub refinements: usize,
    /// Most negative margins found, at most five.
    pub counterexamples: Vec<Sample>,
    /// Points where an equality is claimed (closed sharp ends, touch
    /// points) and the margin was indeed within the band.
    pub equalities: Vec<Sample>,
    /// Samples inside the band next to a sharp end or touch point; excluded.
    pub unresolved_near_sharp: usize,
    /// Samples inside the band elsewhere.
    pub inconclusive_samples: usize,
    pub domain_error: Option<(Point, String)>,
    /// Margin at the deepest resolved cluster point over the margin at the
    /// shallowest one, per open sharp end.
    pub sharp_ratios: Vec<(String, f64)>,
    pub verified_on: String,
    pub truncated_at: Option<f64>,
    pub precision_used: u32,
    pub grid_n: usize,
    pub refine_depth: usize,
}

impl VerificationReport {
    pub fn label(&self) -> String {
        format!(
            "numerically {} (grid {}, refine {}, digits {})",
            self.status, self.grid_n, self.refine_depth, self.precision_used
        )
    }
}

// ------------------------------------------------------------------ sampling

#[derive(Clone, Debug)]
pub(crate) enum Outcome {
    Value(RefValue<Ext>),
    Unresolved,
    Domain(String),
}

impl Outcome {
    pub fn of(r: Result<RefValue<Ext>, EvalError>) -> Self {
        match r {
            Ok(v) => Outcome::Value(v),
            Err(e) if e.is_unresolved() => Outcome::Unresolved,
            Err(e) => Outcome::Domain(e.to_string()),
        }
    }
}

/// A screened or confirmed sample on a line or in a region.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Rec<P> {
    pub at: P,
    pub margin: f64,
    pub err: f64,
    pub exact: bool,
    pub positive: bool,
}

/// Accumulates classified samples for one parameter set.
pub(crate) struct Collector<P> {
    pub recs: Vec<Rec<P>>,
    pub negatives: Vec<Sample>,
    pub equalities: Vec<Sample>,
    pub near: usize,
    pub inconclusive: usize,
    pub domain: Option<(Point, String)>,
    pub samples: usize,
    pub refinements: usize,
}

impl<P: Copy> Collector<P> {
    pub fn new() -> Self {
        Self {
            recs: Vec::new(),
            negatives: Vec::new(),
            equalities: Vec::new(),
            near: 0,
            inconclusive: 0,
            domain: None,
            samples: 0,
            refinements: 0,
        }
    }

    /// Records an extended-precision outcome. `near` marks points where a
    /// vanishing margin is expected; `equality` marks claimed equalities.
    pub fn record(&mut self, at: P, pt: Point, out: Outcome, near: bool, equality: bool, params: &ParamSet) -> Option<Rec<P>> {
        self.samples += 1;
        match out {
            Outcome::Value(m) => {
                let v = m.value.to_f64();
                let e = m.err_bound;
                let sample = || Sample { point: pt, params: params.shown.clone(), margin: v, err_bound: e };
                if v < -BAND * e {
                    self.negatives.push(sample());
                    let r = Rec { at, margin: v, err: e, exact: true, positive: false };
                    self.recs.push(r);
                    Some(r)
                } else if v > BAND * e {
                    let r = Rec { at, margin: v, err: e, exact: true, positive: true };
                    self.recs.push(r);
                    Some(r)
                } else {
                    if equality {
                        self.equalities.push(sample());
                    } else if near {
                        self.near += 1;
                    } else {
                        self.inconclusive += 1;
                    }
                    None
                }
            }
            Outcome::Unresolved => {
                if near || equality {
                    self.near += 1;
                } else {
                    self.inconclusive += 1;
                }
                None
            }
            Outcome::Domain(msg) => {
                if self.domain.is_none() {
                    self.domain = Some((pt, msg));
                }
                None
            }
        }
    }

    pub fn record_screened(&mut self, at: P, m: RefValue<f64>) {
        self.samples += 1;
        self.recs.push(Rec { at, margin: m.value, err: m.err_bound, exact: false, positive: true });
    }

    /// Smallest positive record, confirming screened ones in extended
    /// precision until the minimum is an extended-precision value.
    pub fn confirm_min(&mut self, mut eval: impl FnMut(P) -> Outcome, point: impl Fn(P) -> Point, params: &ParamSet) -> Option<Rec<P>> {
        loop {
            let i = self
                .recs
                .iter()
                .enumerate()
                .filter(|(_, r)| r.positive)
                .min_by(|a, b| a.1.margin.total_cmp(&b.1.margin))
                .map(|(i, _)| i)?;
            let r = self.recs[i];
            if r.exact {
                return Some(r);
            }
            self.samples -= 1;
            let out = eval(r.at);
            match out {
                Outcome::Value(m) if m.value.to_f64() > BAND * m.err_bound => {
                    self.samples += 1;
                    self.recs[i] = Rec { at: r.at, margin: m.value.to_f64(), err: m.err_bound, exact: true, positive: true };
                }
                other => {
                    self.recs.remove(i);
                    self.record(r.at, point(r.at), other, false, false, params);
                }
            }
        }
    }
}

/// Merges per-parameter-set collectors into a report.
pub(crate) struct Summary {
    pub status: Status,
    pub min: Option<(f64, f64, Point, Vec<(String, f64)>)>,
    pub negatives: Vec<Sample>,
    pub equalities: Vec<Sample>,
    pub near: usize,
    pub inconclusive: usize,
    pub domain: Option<(Point, String)>,
    pub samples: usize,
    pub refinements: usize,
}

impl Summary {
    pub fn new() -> Self {
        Self {
            status: Status::Certified,
            min: None,
            negatives: Vec::new(),
            equalities: Vec::new(),
            near: 0,
            inconclusive: 0,
            domain: None,
            samples: 0,
            refinements: 0,
        }
    }

    pub fn absorb<P: Copy>(&mut self, c: Collector<P>, best: Option<Rec<P>>, point: impl Fn(P) -> Point, params: &ParamSet) {
        if let Some(b) = best {
            if self.min.as_ref().map_or(true, |m| b.margin < m.0) {
                self.min = Some((b.margin, b.err, point(b.at), params.shown.clone()));
            }
        }
        self.negatives.extend(c.negatives);
        self.equalities.extend(c.equalities);
        self.near += c.near;
        self.inconclusive += c.inconclusive;
        if self.domain.is_none() {
            self.domain = c.domain;
        }
        self.samples += c.samples;
        self.refinements += c.refinements;
    }

    pub fn finish(mut self, entry: &BoundEntry, s: &Settings, verified_on: String, truncated_at: Option<f64>, sharp_ratios: Vec<(String, f64)>) -> VerificationReport {
        self.negatives.sort_by(|a, b| a.margin.total_cmp(&b.margin).then(a.point.x.total_cmp(&b.point.x)));
        self.negatives.truncate(MAX_COUNTEREXAMPLES);
        self.status = if !self.negatives.is_empty() || self.domain.is_some() {
            Status::Violated
        } else if self.inconclusive > 0 || self.min.is_none() {
            Status::Inconclusive
        } else {
            Status::Certified
        };
        let (min_margin, err, argmin, params) = match self.min {
            Some((m, e, p, ps)) => (m, e, Some(p), ps),
            None => (f64::NAN, f64::NAN, None, Vec::new()),
        };
        VerificationReport {
            entry_id: entry.id.clone(),
            status: self.status,
            min_margin,
            argmin,
            err_at_argmin: err,
            params_at_argmin: params,
            samples_used: self.samples,
            refinements: self.refinements,
            counterexamples: self.negatives,
            equalities: self.equalities,
            unresolved_near_sharp: self.near,
            inconclusive_samples: self.inconclusive,
            domain_error: self.domain,
            sharp_ratios,
            verified_on,
            truncated_at,
            precision_used: s.prec.digits(),
            grid_n: s.grid_n,
            refine_depth: s.refine_depth,
        }
    }
}

pub(crate) fn inv_phi() -> Ext {
    (Ext::from(5).sqrt() - Ext::ONE) / Ext::from(2)
}

/// Golden-section minimization of `f` on `[a, b]` for `depth` iterations.
/// Returns the final bracket.
pub(crate) fn golden(mut a: Ext, mut b: Ext, depth: usize, mut f: impl FnMut(Ext) -> f64) -> (Ext, Ext) {
    let g = inv_phi();
    let mut c = b - (b - a) * g;
    let mut d = a + (b - a) * g;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..depth {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * g;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * g;
            fd = f(d);
        }
    }
    (a, b)
}

/// Evaluation abscissae: the midpoint grid plus clusters toward open ends,
/// sorted. Each carries its `f64` image when that lies strictly inside.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Abscissa {
    pub x: Ext,
    pub x64: Option<f64>,
    /// Cluster depth `k` when the point belongs to an endpoint cluster.
    pub cluster: Option<(crate::catalog::Endpoint, i32)>,
}

/// A finite numeric interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Span {
    pub lo: Ext,
    pub hi: Ext,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Span {
    pub fn open(lo: Ext, hi: Ext) -> Self {
        Self { lo, hi, lo_open: true, hi_open: true }
    }

    /// Numeric version of a catalog interval; an infinite end becomes the
    /// closed end `x_max`, which is also returned.
    pub fn from_interval(iv: &Interval, ctx: &Context, x_max: f64) -> Result<(Self, Option<f64>), VerifyError> {
        let (lo, hi) = iv.eval(&ctx.consts).map_err(eval_err("interval"))?;
        let (hi, hi_open, cut) = match hi {
            Some(h) => (h, iv.hi_open, None),
            None => (Ext::from(x_max), false, Some(x_max)),
        };
        if lo >= hi {
            return Err(VerifyError::Config(format!("empty interval {iv} with x_max {x_max}")));
        }
        Ok((Self { lo, hi, lo_open: iv.lo_open, hi_open }, cut))
    }

    pub fn width(&self) -> Ext {
        self.hi - self.lo
    }

    pub fn contains(&self, x: Ext) -> bool {
        (if self.lo_open { x > self.lo } else { x >= self.lo }) && (if self.hi_open { x < self.hi } else { x <= self.hi })
    }

    pub fn intersect(&self, o: &Span) -> Option<Span> {
        let (lo, lo_open) = if self.lo > o.lo {
            (self.lo, self.lo_open)
        } else if o.lo > self.lo {
            (o.lo, o.lo_open)
        } else {
            (self.lo, self.lo_open || o.lo_open)
        };
        let (hi, hi_open) = if self.hi < o.hi {
            (self.hi, self.hi_open)
        } else if o.hi < self.hi {
            (o.hi, o.hi_open)
        } else {
            (self.hi, self.hi_open || o.hi_open)
        };
        (lo < hi).then_some(Span { lo, hi, lo_open, hi_open })
    }

    /// Midpoint grid of `n` points plus clusters toward the open ends.
    pub(crate) fn abscissae(&self, n: usize) -> Vec<Abscissa> {
        use crate::catalog::Endpoint;
        let w = self.width();
        let mut out = Vec::with_capacity(n + 2 * CLUSTER_DEPTH as usize);
        let nn = Ext::from(n as u64 as i128);
        for i in 0..n {
            let t = (Ext::from(2 * i as i128 + 1)) / (Ext::from(2) * nn);
            let exact = self.lo + w * t;
            let f = exact.to_f64();
            let fx = Ext::from(f);
            if fx > self.lo && fx < self.hi {
                out.push(Abscissa { x: fx, x64: Some(f), cluster: None });
            } else {
                out.push(Abscissa { x: exact, x64: None, cluster: None });
            }
        }
        for k in 1..=CLUSTER_DEPTH {
            let h = w * Ext::from(libm::ldexp(1.0, -k));
            if self.lo_open {
                out.push(Abscissa { x: self.lo + h, x64: None, cluster: Some((Endpoint::Lo, k)) });
            }
            if self.hi_open {
                out.push(Abscissa { x: self.hi - h, x64: None, cluster: Some((Endpoint::Hi, k)) });
            }
        }
        out.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(core::cmp::Ordering::Equal));
        out.dedup_by(|a, b| a.x == b.x);
        out
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo.to_f64(),
            self.hi.to_f64(),
            if self.hi_open { ')' } else { ']' }
        )
    }
}

// ------------------------------------------------------------------ certify_sign

/// Certifies the sign of an entry's margin over its domain.
pub fn certify_sign(ctx: &Context, entry: &BoundEntry, s: &Settings) -> Result<VerificationReport, VerifyError> {
    if s.grid_n < MIN_GRID {
        return Err(VerifyError::Config(format!("grid must be at least {MIN_GRID}")));
    }
    let iv = match &entry.domain {
        Domain::Interval(iv) => iv,
        Domain::Region(kind) => {
            let region = special::Region::new(*kind, special::DEFAULT_EPS, s.x_max)?;
            return special::verify_beta_bound(ctx, entry, &region, s);
        }
    };
    let (span, cut) = Span::from_interval(iv, ctx, s.x_max)?;
    let (ev, ev64) = ctx.entry_evals(entry)?;
    let w = span.width();
    let near_w = w * Ext::from(libm::ldexp(1.0, -NEAR));
    let mut sharp_lo = false;
    let mut sharp_hi = false;
    for e in &entry.sharp_at {
        match e {
            crate::catalog::Endpoint::Lo => sharp_lo = true,
            crate::catalog::Endpoint::Hi => sharp_hi = cut.is_none(),
        }
    }
    let touch: Vec<Ext> = entry
        .touch
        .iter()
        .map(|t| ctx.constant_value(t).map(|v| v.value))
        .collect::<Result<_, _>>()?;
    let is_near = |x: Ext| {
        (sharp_lo && x - span.lo <= near_w) || (sharp_hi && span.hi - x <= near_w) || touch.iter().any(|t| (x - *t).abs() <= near_w)
    };
    let xs = span.abscissae(s.grid_n);
    let mut summary = Summary::new();
    let mut ratios: Vec<(String, f64)> = Vec::new();
    for ps in ctx.param_sets(entry)? {
        let eval = |x: Ext| Outcome::of(ev.margin(x, None, &ps.ext));
        let pt = |x: Ext| Point::x(x.to_f64());
        let mut c: Collector<Ext> = Collector::new();
        let mut cluster_m: Vec<(crate::catalog::Endpoint, i32, f64)> = Vec::new();
        let boundary = |c: &mut Collector<Ext>, x: Ext, sharp: bool| {
            c.record(x, pt(x), eval(x), false, sharp, &ps);
        };
        if !span.lo_open {
            boundary(&mut c, span.lo, sharp_lo);
        }
        for a in &xs {
            if let Some(f) = a.x64 {
                if let Ok(m) = ev64.margin(f, None, &ps.f64) {
                    if m.value > SCREEN * m.err_bound && m.err_bound.is_finite() {
                        c.record_screened(a.x, m);
                        continue;
                    }
                }
            }
            let r = c.record(a.x, pt(a.x), eval(a.x), is_near(a.x), false, &ps);
            if let (Some((end, k)), Some(r)) = (a.cluster, r) {
                if r.positive {
                    cluster_m.push((end, k, r.margin));
                }
            }
        }
        if !span.hi_open {
            boundary(&mut c, span.hi, sharp_hi);
        }
        for t in &touch {
            boundary(&mut c, *t, true);
        }
        refine_line(&mut c, &is_near, s.refine_depth, &eval, &ps);
        let best = c.confirm_min(eval, pt, &ps);
        for (end, on) in [(crate::catalog::Endpoint::Lo, sharp_lo && span.lo_open), (crate::catalog::Endpoint::Hi, sharp_hi && span.hi_open)] {
            if !on {
                continue;
            }
            let mut ks: Vec<&(crate::catalog::Endpoint, i32, f64)> = cluster_m.iter().filter(|c| c.0 == end).collect();
            ks.sort_by_key(|c| c.1);
            if let (Some(first), Some(last)) = (ks.first(), ks.last()) {
                let r = last.2 / first.2;
                let name = if end == crate::catalog::Endpoint::Lo { "lo" } else { "hi" };
                match ratios.iter_mut().find(|(n, _)| n == name) {
                    Some(slot) => slot.1 = slot.1.max(r),
                    None => ratios.push((name.to_owned(), r)),
                }
            }
        }
        summary.absorb(c, best, pt, &ps);
    }
    let verified_on = match cut {
        Some(x) => format!("{} truncated at {x}", iv),
        None => iv.to_string(),
    };
    Ok(summary.finish(entry, s, verified_on, cut, ratios))
}

/// Golden-section refinement around the lowest local minima of a line scan.
fn refine_line(c: &mut Collector<Ext>, is_near: &dyn Fn(Ext) -> bool, depth: usize, eval: &dyn Fn(Ext) -> Outcome, ps: &ParamSet) {
    let recs = c.recs.clone();
    let mut cands: Vec<usize> = (1..recs.len().saturating_sub(1))
        .filter(|&i| recs[i].margin <= recs[i - 1].margin && recs[i].margin <= recs[i + 1].margin && !is_near(recs[i].at))
        .collect();
    cands.sort_by(|&a, &b| recs[a].margin.total_cmp(&recs[b].margin).then(a.cmp(&b)));
    cands.truncate(MAX_MINIMA);
    for i in cands {
        let (a, b) = (recs[i - 1].at, recs[i + 1].at);
        let mut seen = Vec::new();
        golden(a, b, depth, |x| {
            let o = eval(x);
            let v = match &o {
                Outcome::Value(m) => m.value.to_f64(),
                _ => f64::INFINITY,
            };
            seen.push((x, o));
            v
        });
        for (x, o) in seen {
            c.refinements += 1;
            c.record(x, Point::x(x.to_f64()), o, is_near(x), false, ps);
        }
    }
}

/// Whether a report's status agrees with the entry's expectation.
pub fn matches_expect(entry: &BoundEntry, r: &VerificationReport) -> bool {
    use crate::catalog::Expect;
    matches!(
        (entry.expect, r.status),
        (Expect::Certified, Status::Certified) | (Expect::Violated, Status::Violated)
    )
}

// ------------------------------------------------------------------ monotonicity

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Direction {
    Increasing,
    Decreasing,
    MinAtInterior,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::MinAtInterior => "min-at-interior",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PairCheck {
    pub x0: f64,
    pub x1: f64,
    /// `f(x1) - f(x0)`, signed so that positive agrees with the claim.
    pub signed_diff: f64,
    pub err_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MonotoneReport {
    pub function: String,
    pub span: String,
    pub direction: Direction,
    pub status: Status,
    /// Adjacent pair closest to (or furthest into) violating the claim.
    pub worst_pair: Option<PairCheck>,
    pub violations: usize,
    pub unresolved_pairs: usize,
    /// Interior minimizer and minimum for [`Direction::MinAtInterior`].
    pub extremum: Option<(f64, f64)>,
    pub limits: Vec<LimitReport>,
}

#[derive(Clone, Copy)]
struct Val {
    v: RefValue<Ext>,
}

/// Checks a monotonicity claim on the clustered grid.
pub fn check_monotone(
    ctx: &Context,
    f: &Expr,
    span: &Span,
    dir: Direction,
    grid_n: usize,
    prec: Precision,
) -> Result<MonotoneReport, VerifyError> {
    let _ = prec;
    if grid_n < MIN_GRID {
        return Err(VerifyError::Config(format!("grid must be at least {MIN_GRID}")));
    }
    let u = ctx.compile_x(f)?;
    let mut xs = span.abscissae(grid_n);
    if !span.lo_open {
        xs.insert(0, Abscissa { x: span.lo, x64: None, cluster: None });
    }
    if !span.hi_open {
        xs.push(Abscissa { x: span.hi, x64: None, cluster: None });
    }
    let n = xs.len();
    let v64: Vec<Option<RefValue<f64>>> = xs.iter().map(|a| a.x64.and_then(|x| u.at64(x).ok())).collect();
    let mut ext: Vec<Option<Result<Val, EvalError>>> = alloc::vec![None; n];
    let get = |i: usize, ext: &mut Vec<Option<Result<Val, EvalError>>>| -> Result<Val, EvalError> {
        if ext[i].is_none() {
            ext[i] = Some(u.at(xs[i].x).map(|v| Val { v }));
        }
        ext[i].clone().unwrap()
    };
    // Sign of each adjacent difference: +1, -1, or 0 when unresolved.
    let mut signs = alloc::vec![0i8; n.saturating_sub(1)];
    let mut diffs = alloc::vec![(0.0f64, 0.0f64); n.saturating_sub(1)];
    let mut domain: Option<String> = None;
    for i in 0..n.saturating_sub(1) {
        if let (Some(a), Some(b)) = (v64[i], v64[i + 1]) {
            let d = b.value - a.value;
            let e = a.err_bound + b.err_bound + f64::EPSILON * d.abs();
            if d.abs() > SCREEN * e {
                signs[i] = if d > 0.0 { 1 } else { -1 };
                diffs[i] = (d, e);
                continue;
            }
        }
        match (get(i, &mut ext), get(i + 1, &mut ext)) {
            (Ok(a), Ok(b)) => match b.v.sub(a.v) {
                Ok(d) => {
                    let dv = d.value.to_f64();
                    diffs[i] = (dv, d.err_bound);
                    if dv.abs() > BAND * d.err_bound {
                        signs[i] = if dv > 0.0 { 1 } else { -1 };
                    }
                }
                Err(_) => {}
            },
            (Err(e), _) | (_, Err(e)) => {
                if !e.is_unresolved() && domain.is_none() {
                    domain = Some(e.to_string());
                }
            }
        }
    }
    let deep = |a: &Abscissa| matches!(a.cluster, Some((_, k)) if k > 20);
    let mut extremum = None;
    let mut want: Vec<i8> = match dir {
        Direction::Increasing => alloc::vec![1; signs.len()],
        Direction::Decreasing => alloc::vec![-1; signs.len()],
        Direction::MinAtInterior => alloc::vec![0; signs.len()],
    };
    let mut status_override = None;
    if dir == Direction::MinAtInterior {
        let val = |i: usize, ext: &mut Vec<Option<Result<Val, EvalError>>>| -> f64 {
            match v64[i] {
                Some(v) => v.value,
                None => get(i, ext).map(|v| v.v.value.to_f64()).unwrap_or(f64::INFINITY),
            }
        };
        let vals: Vec<f64> = (0..n).map(|i| val(i, &mut ext)).collect();
        let imin = (0..n).min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b))).unwrap_or(0);
        if imin == 0 || imin + 1 >= n {
            status_override = Some(Status::Violated);
        } else {
            let depth = 80;
            let (a, b) = golden(xs[imin - 1].x, xs[imin + 1].x, depth, |x| {
                u.at(x).map(|v| v.value.to_f64()).unwrap_or(f64::INFINITY)
            });
            let xm = (a + b) / Ext::from(2);
            let fm = u.at(xm).map_err(eval_err("minimizer"))?;
            extremum = Some((xm.to_f64(), fm.value.to_f64()));
            for (i, w) in want.iter_mut().enumerate() {
                *w = if i + 1 <= imin.saturating_sub(1) {
                    -1
                } else if i > imin {
                    1
                } else {
                    0
                };
            }
        }
    }
    let mut worst: Option<PairCheck> = None;
    let mut violations = 0;
    let mut unresolved = 0;
    for i in 0..signs.len() {
        if want[i] == 0 {
            continue;
        }
        let (d, e) = diffs[i];
        if signs[i] == 0 {
            if !(deep(&xs[i]) && deep(&xs[i + 1])) {
                unresolved += 1;
            }
        } else if signs[i] != want[i] {
            violations += 1;
        }
        let sd = d * want[i] as f64;
        if signs[i] != 0 && worst.as_ref().map_or(true, |w| sd < w.signed_diff) {
            worst = Some(PairCheck { x0: xs[i].x.to_f64(), x1: xs[i + 1].x.to_f64(), signed_diff: sd, err_bound: e });
        }
    }
    let status = if let Some(s) = status_override {
        s
    } else if violations > 0 || domain.is_some() {
        Status::Violated
    } else if unresolved > 0 {
        Status::Inconclusive
    } else {
        Status::Certified
    };
    Ok(MonotoneReport {
        function: f.to_string(),
        span: span.to_string(),
        direction: dir,
        status,
        worst_pair: worst,
        violations,
        unresolved_pairs: unresolved,
        extremum,
        limits: Vec::new(),
    })
}

// ------------------------------------------------------------------ limits

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LimitReport {
    pub function: String,
    pub endpoint: f64,
    pub expected_expr: String,
    pub expected: f64,
    pub extrapolated: f64,
    pub residual: f64,
    /// Value at the closest point of the approach sequence.
    pub last_sample: f64,
    pub steps: usize,
}

/// Limit of `f` at one end of `span` along `end ± w 2^-k`, with a
/// second-order Richardson step on the last three values.
pub fn check_limit(
    ctx: &Context,
    f: &Expr,
    span: &Span,
    end: crate::catalog::Endpoint,
    expected: &Expr,
    prec: Precision,
) -> Result<LimitReport, VerifyError> {
    let _ = prec;
    let u = ctx.compile_x(f)?;
    let want = ctx.constant_value(expected)?;
    let w = span.width();
    let (at, sign) = match end {
        crate::catalog::Endpoint::Lo => (span.lo, Ext::ONE),
        crate::catalog::Endpoint::Hi => (span.hi, -Ext::ONE),
    };
    let mut seq: Vec<Ext> = Vec::new();
    for k in 1..=CLUSTER_DEPTH {
        let x = at + sign * w * Ext::from(libm::ldexp(1.0, -k));
        match u.at(x) {
            Ok(v) => seq.push(v.value),
            Err(e) if e.is_unresolved() => break,
            Err(e) => return Err(eval_err(&format!("{f} at {}", x.to_f64()))(e)),
        }
    }
    if seq.len() < 3 {
        return Err(VerifyError::Config(format!("{f}: approach sequence too short")));
    }
    let m = seq.len();
    let (f1, f2, f3) = (seq[m - 3], seq[m - 2], seq[m - 1]);
    let l = (Ext::from(8) * f3 - Ext::from(6) * f2 + f1) / Ext::from(3);
    Ok(LimitReport {
        function: f.to_string(),
        endpoint: at.to_f64(),
        expected_expr: expected.to_string(),
        expected: want.value.to_f64(),
        extrapolated: l.to_f64(),
        residual: (l - want.value).abs().to_f64(),
        last_sample: f3.to_f64(),
        steps: m,
    })
}

// ------------------------------------------------------------------ substitution

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Transform {
    /// `x = cos 2t`, `t` in `(0, pi/4)`; arccos halves, so `B` is scaled by 1/2.
    CosTwoT,
    /// `x = tan t`, `t` in `(0, pi/4)`.
    TanT,
    Identity,
}

impl Transform {
    pub fn name(self) -> &'static str {
        match self {
            Transform::CosTwoT => "x=cos(2t)",
            Transform::TanT => "x=tan(t)",
            Transform::Identity => "x=t",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SubstitutionReport {
    pub id_a: String,
    pub id_b: String,
    pub transform: Transform,
    pub max_deviation: f64,
    pub at_t: f64,
    pub threshold: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Compares bound `A(t)` with `B(x(t))` under a change of variable.
pub fn check_substitution(
    ctx: &Context,
    id_a: &str,
    id_b: &str,
    transform: Transform,
    grid_n: usize,
    prec: Precision,
) -> Result<SubstitutionReport, VerifyError> {
    let a = ctx.entry(id_a)?;
    let b = ctx.entry(id_b)?;
    if !a.params.is_empty() || !b.params.is_empty() {
        return Err(VerifyError::Config("substitution checks take parameter-free entries".into()));
    }
    let (ea, _) = ctx.entry_evals(a)?;
    let (eb, _) = ctx.entry_evals(b)?;
    let span = match transform {
        Transform::Identity => {
            let iv = a.interval().ok_or_else(|| VerifyError::Config(format!("{id_a} is not univariate")))?;
            Span::from_interval(iv, ctx, DEFAULT_XMAX)?.0
        }
        _ => Span::open(Ext::ZERO, Ext::pi() / Ext::from(4)),
    };
    let half = Ext::ONE / Ext::from(2);
    let mut worst = (0.0f64, f64::NAN);
    let mut samples = 0;
    for t in span.abscissae(grid_n.max(MIN_GRID)) {
        let t = t.x;
        let (x, scale) = match transform {
            Transform::CosTwoT => ((Ext::from(2) * t).cos(), half),
            Transform::TanT => (t.tan(), Ext::ONE),
            Transform::Identity => (t, Ext::ONE),
        };
        let va = ea.bound(t, None, &[]).map_err(eval_err(id_a))?;
        let vb = eb.bound(x, None, &[]).map_err(eval_err(id_b))?;
        let d = (va.value - vb.value * scale).abs().to_f64();
        samples += 1;
        if worst.1.is_nan() || d > worst.0 {
            worst = (d, t.to_f64());
        }
    }
    let threshold = libm::pow(10.0, 5.0 - prec.digits() as f64);
    Ok(SubstitutionReport {
        id_a: id_a.to_owned(),
        id_b: id_b.to_owned(),
        transform,
        max_deviation: worst.0,
        at_t: worst.1,
        threshold,
        samples,
        passed: worst.0 <= threshold,
    })
}

// ------------------------------------------------------------------ lemma claims

/// A monotonicity claim with its endpoint limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaClaim {
    pub id: &'static str,
    pub function: &'static str,
    pub domain: &'static str,
    pub direction: Direction,
    pub lo_limit: Option<&'static str>,
    pub hi_limit: Option<&'static str>,
}

const fn claim(
    id: &'static str,
    function: &'static str,
    domain: &'static str,
    direction: Direction,
    lo_limit: Option<&'static str>,
    hi_limit: Option<&'static str>,
) -> LemmaClaim {
    LemmaClaim { id, function, domain, direction, lo_limit, hi_limit }
}

use Direction::{Decreasing as Dec, Increasing as Inc, MinAtInterior as MinInt};

pub const LEMMAS: &[LemmaClaim] = &[
    claim("lemma1702a", "4*x*sin(x)+(4-x^2)*cos(x)-x^2", "(0,pi/2)", Dec, Some("4"), Some("a_1702a")),
    claim("lemma1702b", "(sin(x)-x*cos(x))/(2*sin(x/2)-x*cos(x/2))", "(0,pi/2)", Dec, Some("4"), Some("b_1702b")),
    claim("lemma1702c-g", "(8*sin(x/2)-sin(x))/x", "(0,pi/2)", Dec, Some("alpha_thm1"), Some("beta_thm1")),
    claim("lemma1702c-f", "8*sin(x)/(6*x+sin(2*x))", "(0,pi/4)", Dec, Some("1"), Some("gamma_1702c")),
    claim("lem1a", "x+sin(x)-x^2/tan(x/2)", "(0,pi/2)", Inc, Some("0"), Some("c_lem1a")),
    claim("lem3", "cos(x)-(1-x^2/3)^(3/2)", "(0,pi/2)", Dec, Some("0"), Some("c1_lem3")),
    // Rises from 4/3 at 0 toward 2 at infinity.
    claim("th2", "log(sinh(x)/x)/log(cosh(x/2))", "(0,inf)", Inc, Some("4/3"), None),
    // The limit 1 at x=1 is approached logarithmically; only the left end is checked.
    claim("thm4-ratio", "log((1+x^2)/(1-x^2))/log(1/cos(pi*x/2))", "(0,1)", Dec, Some("alpha_thm4"), None),
    claim("thm1702-ratio", "(1-4*x^2)/(x^2*cos(pi*x))-1/x^2", "(0,1/2)", Inc, Some("beta_1702"), Some("alpha_1702")),
    claim("thm0803-ratio", "(2+cos(x)-3*sin(x)/x)/x^4", "(0,pi)", Dec, Some("1/60"), Some("1/pi^4")),
    claim("prop1702", "x^2*(5+cos(x))/(1-cos(x))", "(0,pi/2)", Inc, Some("prop1702_lo"), Some("prop1702_hi")),
    claim("wilker-ratio", "((sin(x)/x)^2+tan(x)/x-2)/(x^3*tan(x))", "(0,pi/2)", Dec, Some("anglesio_hi"), Some("anglesio_lo")),
    claim("lem2", "x+sinh(x)-x^2*cosh(x/2)/sinh(x/2)", "(0,inf)", Inc, Some("0"), None),
    claim("thm16", "x*(pi^2-x^2)/((pi^2+x^2)*sin(x))", "(0,pi)", MinInt, Some("1"), Some("1")),
];

/// Checks one registered claim: monotonicity plus both endpoint limits.
pub fn check_lemma(ctx: &Context, claim: &LemmaClaim, s: &Settings) -> Result<MonotoneReport, VerifyError> {
    let f = ctx.parse(claim.function)?;
    let iv = crate::catalog::parse_interval(claim.domain, &|n| ctx.consts.contains_key(n))
        .map_err(|m| VerifyError::Config(format!("{}: {m}", claim.id)))?;
    let (span, cut) = Span::from_interval(&iv, ctx, s.x_max)?;
    let mut r = check_monotone(ctx, &f, &span, claim.direction, s.grid_n, s.prec)?;
    for (end, lim) in [(crate::catalog::Endpoint::Lo, claim.lo_limit), (crate::catalog::Endpoint::Hi, claim.hi_limit)] {
        let Some(lim) = lim else { continue };
        if end == crate::catalog::Endpoint::Hi && cut.is_some() {
            continue;
        }
        r.limits.push(check_limit(ctx, &f, &span, end, &ctx.parse(lim)?, s.prec)?);
    }
    Ok(r)
}

/// Name of the function an entry bounds.
pub fn target_text(entry: &BoundEntry) -> String {
    match &entry.target {
        Target::Named(t) => t.formula().to_owned(),
        Target::Expr(e) => e.to_string(),
    }
}

#[doc(hidden)]
pub fn is_beta(entry: &BoundEntry) -> bool {
    entry.target == Target::Named(TargetId::BetaXY)
}
