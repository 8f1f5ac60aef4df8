//! Comparative analyses: crossover abscissae, maximum relative errors,
//! numeric best constants and dominance tables.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::catalog::{BoundEntry, Endpoint, EntryEval, Side, Target};
use crate::expr::Expr;
use crate::oracle::{RefValue, TargetId};
use crate::real::{Ext, Real};
use crate::verifier::{
    eval_err, golden, Context, Settings, Span, VerifyError, BAND, CLUSTER_DEPTH,
};

/// Crossings are bisected to this width.
pub const CROSSING_WIDTH: f64 = 1e-12;
/// `|d|` below this at a grid minimum without a sign change is reported as
/// a possible tangency.
pub const TANGENCY: f64 = 1e-9;
/// Default right end for relative-error scans of unbounded domains.
pub const MAXERR_XMAX: f64 = 1e3;
const SCREEN: f64 = 1e3;
const MAX_PEAKS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Extremum {
    Sup,
    Inf,
}

impl Extremum {
    pub fn name(self) -> &'static str {
        match self {
            Extremum::Sup => "sup",
            Extremum::Inf => "inf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Quantity {
    MaxRelError,
    SupRatio,
    InfRatio,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::MaxRelError => "max_rel_error",
            Quantity::SupRatio => "sup_ratio",
            Quantity::InfRatio => "inf_ratio",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Crossing {
    pub x: f64,
    pub bracket: (f64, f64),
    /// Found as a near-zero minimum of `|d|` rather than a sign change.
    pub tangency: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DominanceInterval {
    pub lo: f64,
    pub hi: f64,
    /// Id of the tighter bound, or `"tie"`.
    pub tighter: String,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CrossoverResult {
    pub id_a: String,
    pub id_b: String,
    pub interval: String,
    pub crossings: Vec<Crossing>,
    pub dominance: Vec<DominanceInterval>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExtremumRecord {
    pub quantity: Quantity,
    pub value: f64,
    pub arg: f64,
    pub subject: String,
    pub interval: String,
    pub grid_n: usize,
    pub refine_steps: usize,
    /// Width of the final golden-section bracket; zero for endpoint limits.
    pub bracket_width: f64,
    pub at_endpoint: bool,
    /// `(X, |bound(X) - pi/2|)` for arctan bounds on unbounded domains.
    pub asymptotic: Vec<(f64, f64)>,
}

fn first_params(ctx: &Context, e: &BoundEntry) -> Result<Vec<RefValue<Ext>>, VerifyError> {
    Ok(ctx.param_sets(e)?.into_iter().next().map(|p| p.ext).unwrap_or_default())
}

fn entry_span(ctx: &Context, e: &BoundEntry, x_max: f64) -> Result<Span, VerifyError> {
    let iv = e.interval().ok_or_else(|| VerifyError::Config(format!("{} is not univariate", e.id)))?;
    Ok(Span::from_interval(iv, ctx, x_max)?.0)
}

/// Difference of two bounds in both backends.
struct Diff {
    a: EntryEval<Ext>,
    b: EntryEval<Ext>,
    a64: EntryEval<f64>,
    b64: EntryEval<f64>,
    pa: Vec<RefValue<Ext>>,
    pb: Vec<RefValue<Ext>>,
    pa64: Vec<RefValue<f64>>,
    pb64: Vec<RefValue<f64>>,
}

impl Diff {
    fn ext(&self, x: Ext) -> Option<RefValue<Ext>> {
        let a = self.a.bound(x, None, &self.pa).ok()?;
        let b = self.b.bound(x, None, &self.pb).ok()?;
        a.sub(b).ok()
    }

    fn sign(&self, x: Ext, x64: Option<f64>) -> (i8, f64) {
        if let Some(f) = x64 {
            if let (Ok(a), Ok(b)) = (self.a64.bound(f, None, &self.pa64), self.b64.bound(f, None, &self.pb64)) {
                let d = a.value - b.value;
                let e = a.err_bound + b.err_bound + f64::EPSILON * d.abs();
                if d.abs() > SCREEN * e {
                    return (if d > 0.0 { 1 } else { -1 }, d);
                }
            }
        }
        match self.ext(x) {
            Some(d) => {
                let v = d.value.to_f64();
                if v.abs() > BAND * d.err_bound {
                    (if v > 0.0 { 1 } else { -1 }, v)
                } else {
                    (0, v)
                }
            }
            None => (0, f64::NAN),
        }
    }
}

fn lower64(v: &[RefValue<Ext>]) -> Vec<RefValue<f64>> {
    v.iter().map(|r| RefValue::new(r.value.to_f64(), r.err_bound + r.value.to_f64().abs() * f64::EPSILON)).collect()
}

/// Crossings of two same-target bounds and the resulting dominance intervals.
pub fn crossover(ctx: &Context, id_a: &str, id_b: &str, span: Option<Span>, s: &Settings) -> Result<CrossoverResult, VerifyError> {
    let ea = ctx.entry(id_a)?;
    let eb = ctx.entry(id_b)?;
    if ea.target != eb.target {
        return Err(VerifyError::MismatchedTarget(format!("{} bounds {}, {} bounds {}", id_a, ea.target, id_b, eb.target)));
    }
    let sa = entry_span(ctx, ea, s.x_max)?;
    let sb = entry_span(ctx, eb, s.x_max)?;
    let overlap = sa.intersect(&sb).ok_or_else(|| VerifyError::EmptyOverlap(id_a.to_owned(), id_b.to_owned()))?;
    let span = match span {
        Some(sp) => sp.intersect(&overlap).ok_or_else(|| VerifyError::EmptyOverlap(id_a.to_owned(), id_b.to_owned()))?,
        None => overlap,
    };
    let (a, a64) = ctx.entry_evals(ea)?;
    let (b, b64) = ctx.entry_evals(eb)?;
    let pa = first_params(ctx, ea)?;
    let pb = first_params(ctx, eb)?;
    let d = Diff { a, b, a64, b64, pa64: lower64(&pa), pb64: lower64(&pb), pa, pb };
    let xs = span.abscissae(s.grid_n);
    let signs: Vec<(i8, f64)> = xs.iter().map(|p| d.sign(p.x, p.x64)).collect();
    let mut crossings = Vec::new();
    let mut prev: Option<usize> = None;
    for i in 0..xs.len() {
        if signs[i].0 == 0 {
            continue;
        }
        if let Some(j) = prev {
            if signs[j].0 != signs[i].0 {
                crossings.push(bisect(&d, xs[j].x, xs[i].x, signs[j].0));
            }
        }
        prev = Some(i);
    }
    // Possible tangencies: grid minima of |d| that do not change sign.
    for i in 1..xs.len().saturating_sub(1) {
        if xs[i].cluster.is_some() || xs[i - 1].cluster.is_some() || xs[i + 1].cluster.is_some() {
            continue;
        }
        let (m, l, r) = (signs[i].1.abs(), signs[i - 1].1.abs(), signs[i + 1].1.abs());
        if !(m < TANGENCY && m <= l && m <= r) || signs[i - 1].0 != signs[i + 1].0 || signs[i - 1].0 == 0 {
            continue;
        }
        let (lo, hi) = golden(xs[i - 1].x, xs[i + 1].x, 80, |x| d.ext(x).map_or(f64::INFINITY, |v| v.value.to_f64().abs()));
        let x = (lo + hi) / Ext::from(2);
        if d.ext(x).is_some_and(|v| v.value.to_f64().abs() < TANGENCY) {
            crossings.push(Crossing { x: x.to_f64(), bracket: (lo.to_f64(), hi.to_f64()), tangency: true });
        }
    }
    crossings.sort_by(|p, q| p.x.total_cmp(&q.x));
    let tighter = |sg: i8| -> String {
        let a_wins = match ea.side {
            Side::Lower => sg > 0,
            Side::Upper => sg < 0,
        };
        if sg == 0 {
            "tie".to_owned()
        } else if a_wins {
            id_a.to_owned()
        } else {
            id_b.to_owned()
        }
    };
    let mut cuts: Vec<f64> = alloc::vec![span.lo.to_f64()];
    cuts.extend(crossings.iter().filter(|c| !c.tangency).map(|c| c.x));
    cuts.push(span.hi.to_f64());
    let mut dominance = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let sg = xs
            .iter()
            .zip(&signs)
            .filter(|(p, sg)| sg.0 != 0 && p.x.to_f64() > lo && p.x.to_f64() < hi)
            .map(|(_, sg)| sg.0)
            .next()
            .unwrap_or(0);
        dominance.push(DominanceInterval { lo, hi, tighter: tighter(sg) });
    }
    Ok(CrossoverResult { id_a: id_a.to_owned(), id_b: id_b.to_owned(), interval: span.to_string(), crossings, dominance })
}

fn bisect(d: &Diff, mut lo: Ext, mut hi: Ext, lo_sign: i8) -> Crossing {
    let two = Ext::from(2);
    let width = Ext::from(CROSSING_WIDTH);
    for _ in 0..200 {
        if hi - lo < width {
            break;
        }
        let mid = (lo + hi) / two;
        let sg = match d.ext(mid) {
            Some(v) if v.value.to_f64().abs() > BAND * v.err_bound => {
                if v.value.to_f64() > 0.0 {
                    1
                } else {
                    -1
                }
            }
            _ => break,
        };
        if sg == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Crossing { x: ((lo + hi) / two).to_f64(), bracket: (lo.to_f64(), hi.to_f64()), tangency: false }
}

/// Minimizes `g` over the clustered grid of `span` with golden-section
/// refinement, or reports the endpoint limit when the grid optimum sits in
/// an endpoint cluster.
struct Search {
    value: Ext,
    arg: Ext,
    steps: usize,
    width: f64,
    end: Option<Endpoint>,
}

fn minimize(
    span: &Span,
    grid_n: usize,
    peaks: usize,
    g64: &dyn Fn(f64) -> Option<f64>,
    g: &dyn Fn(Ext) -> Option<Ext>,
) -> Option<Search> {
    let xs = span.abscissae(grid_n);
    let n = xs.len();
    let vals: Vec<f64> = xs
        .iter()
        .map(|p| match p.x64.and_then(g64) {
            Some(v) if v.is_finite() => v,
            _ => g(p.x).map_or(f64::INFINITY, |v| v.to_f64()),
        })
        .collect();
    let mut cands: Vec<usize> = (0..n)
        .filter(|&i| vals[i].is_finite() && (i == 0 || vals[i] <= vals[i - 1]) && (i + 1 == n || vals[i] <= vals[i + 1]))
        .collect();
    cands.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    cands.truncate(peaks);
    let len = span.width().to_f64();
    let target_w = Ext::from(1e-10 * len);
    let mut best: Option<Search> = None;
    for i in cands {
        let at_lo = i == 0 && span.lo_open;
        let at_hi = i + 1 == n && span.hi_open;
        let cand = if at_lo || at_hi {
            let end = if at_lo { Endpoint::Lo } else { Endpoint::Hi };
            let v = limit_value(span, end, g)?;
            let at = if at_lo { span.lo } else { span.hi };
            Search { value: v, arg: at, steps: CLUSTER_DEPTH as usize, width: 0.0, end: Some(end) }
        } else {
            let lo = if i == 0 { span.lo } else { xs[i - 1].x };
            let hi = if i + 1 == n { span.hi } else { xs[i + 1].x };
            let mut steps = 0;
            let (mut a, mut b) = (lo, hi);
            while b - a > target_w && steps < 400 {
                let r = golden(a, b, 20, |x| g(x).map_or(f64::INFINITY, |v| v.to_f64()));
                a = r.0;
                b = r.1;
                steps += 20;
            }
            let x = (a + b) / Ext::from(2);
            let Some(v) = g(x) else { continue };
            Search { value: v, arg: x, steps, width: (b - a).to_f64(), end: None }
        };
        if best.as_ref().map_or(true, |b| cand.value < b.value) {
            best = Some(cand);
        }
    }
    best
}

/// Limit of `g` at an endpoint: Richardson step on the approach sequence.
fn limit_value(span: &Span, end: Endpoint, g: &dyn Fn(Ext) -> Option<Ext>) -> Option<Ext> {
    let w = span.width();
    let (at, sign) = match end {
        Endpoint::Lo => (span.lo, Ext::ONE),
        Endpoint::Hi => (span.hi, -Ext::ONE),
    };
    let mut seq = Vec::new();
    for k in 1..=CLUSTER_DEPTH {
        match g(at + sign * w * Ext::from(libm::ldexp(1.0, -k))) {
            Some(v) => seq.push(v),
            None => break,
        }
    }
    let m = seq.len();
    if m < 3 {
        return seq.last().copied();
    }
    Some((Ext::from(8) * seq[m - 1] - Ext::from(6) * seq[m - 2] + seq[m - 3]) / Ext::from(3))
}

/// Numeric sup or inf of a closed-form function of `x` over `span`.
pub fn best_constant(ctx: &Context, ratio: &Expr, span: &Span, kind: Extremum, s: &Settings) -> Result<ExtremumRecord, VerifyError> {
    let u = ctx.compile_x(ratio)?;
    let sgn = match kind {
        Extremum::Sup => -1.0,
        Extremum::Inf => 1.0,
    };
    let se = Ext::from(sgn);
    let g64 = |x: f64| u.at64(x).ok().map(|v| sgn * v.value);
    let g = |x: Ext| u.at(x).ok().map(|v| se * v.value);
    let r = minimize(span, s.grid_n, MAX_PEAKS, &g64, &g)
        .ok_or_else(|| eval_err(&ratio.to_string())(crate::expr::EvalError::Num(crate::NumError::Domain("no finite samples".into()))))?;
    Ok(ExtremumRecord {
        quantity: if kind == Extremum::Sup { Quantity::SupRatio } else { Quantity::InfRatio },
        value: (se * r.value).to_f64(),
        arg: r.arg.to_f64(),
        subject: ratio.to_string(),
        interval: span.to_string(),
        grid_n: s.grid_n,
        refine_steps: r.steps,
        bracket_width: r.width,
        at_endpoint: r.end.is_some(),
        asymptotic: Vec::new(),
    })
}

/// Maximum of `|bound - target| / |target|` over the entry's domain (or
/// `span`), with unbounded domains cut at `s.x_max` (callers usually pass
/// [`MAXERR_XMAX`]).
pub fn max_rel_error(ctx: &Context, id: &str, span: Option<Span>, s: &Settings) -> Result<ExtremumRecord, VerifyError> {
    let e = ctx.entry(id)?;
    let iv = e.interval().ok_or_else(|| VerifyError::Config(format!("{id} is not univariate")))?;
    let (full, cut) = Span::from_interval(iv, ctx, s.x_max)?;
    let span = match span {
        Some(sp) => sp.intersect(&full).ok_or_else(|| VerifyError::EmptyOverlap(id.to_owned(), "the requested interval".to_owned()))?,
        None => full,
    };
    let (ev, ev64) = ctx.entry_evals(e)?;
    let p = first_params(ctx, e)?;
    let p64 = lower64(&p);
    let g64 = |x: f64| -> Option<f64> {
        let t = ev64.target(x, None, &p64).ok()?;
        let b = ev64.bound(x, None, &p64).ok()?;
        let r = -(b.value - t.value).abs() / t.value.abs();
        // Screened values only steer the search; small errors go to Ext.
        (t.value.abs() > 1e-6 && (b.value - t.value).abs() > 1e-10).then_some(r)
    };
    let g = |x: Ext| -> Option<Ext> {
        let t = ev.target(x, None, &p).ok()?;
        let b = ev.bound(x, None, &p).ok()?;
        if t.value == Ext::ZERO {
            return None;
        }
        Some(-((b.value - t.value).abs() / t.value.abs()))
    };
    let r = minimize(&span, s.grid_n, MAX_PEAKS, &g64, &g)
        .ok_or_else(|| VerifyError::Config(format!("{id}: no finite samples")))?;
    let mut asymptotic = Vec::new();
    if let (Some(c), true) = (cut, e.target == Target::Named(TargetId::Atan)) {
        let half_pi = Ext::pi() / Ext::from(2);
        let mut x = Ext::from(c);
        for _ in 0..7 {
            if let Ok(b) = ev.bound(x, None, &p) {
                asymptotic.push((x.to_f64(), (b.value - half_pi).abs().to_f64()));
            }
            x = x * Ext::from(10);
        }
    }
    Ok(ExtremumRecord {
        quantity: Quantity::MaxRelError,
        value: (-r.value).to_f64(),
        arg: r.arg.to_f64(),
        subject: id.to_owned(),
        interval: match cut {
            Some(c) => format!("{span} (unbounded domain cut at {c})"),
            None => span.to_string(),
        },
        grid_n: s.grid_n,
        refine_steps: r.steps,
        bracket_width: r.width,
        at_endpoint: r.end.is_some(),
        asymptotic,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DominanceTable {
    pub target: String,
    pub side: Option<Side>,
    pub ids: Vec<String>,
    pub interval: String,
    /// Pairwise results ordered by `(id_a, id_b)`.
    pub pairs: Vec<CrossoverResult>,
}

/// Pairwise crossovers among same-side bounds of one target.
pub fn dominance_table(
    ctx: &Context,
    target: &Target,
    side: Option<Side>,
    ids: Option<&[String]>,
    span: Option<Span>,
    s: &Settings,
) -> Result<DominanceTable, VerifyError> {
    let mut chosen: Vec<String> = match ids {
        Some(ids) => {
            for id in ids {
                let e = ctx.entry(id)?;
                if &e.target != target {
                    return Err(VerifyError::MismatchedTarget(format!("{id} does not bound {target}")));
                }
            }
            ids.to_vec()
        }
        None => ctx
            .catalog
            .entries
            .iter()
            .filter(|e| &e.target == target && side.map_or(true, |sd| e.side == sd) && e.params.is_empty())
            .filter(|e| !e.has_tag(crate::catalog::TAG_AS_PRINTED))
            .map(|e| e.id.clone())
            .collect(),
    };
    chosen.sort();
    chosen.dedup();
    if chosen.is_empty() {
        return Err(VerifyError::Config(format!("no entries bound {target}")));
    }
    let mut common: Option<Span> = span;
    for id in &chosen {
        let sp = entry_span(ctx, ctx.entry(id)?, s.x_max)?;
        common = match common {
            None => Some(sp),
            Some(c) => Some(c.intersect(&sp).ok_or_else(|| VerifyError::EmptyOverlap(chosen[0].clone(), id.clone()))?),
        };
    }
    let common = common.expect("at least one entry");
    let mut pairs = Vec::new();
    for i in 0..chosen.len() {
        for j in i + 1..chosen.len() {
            pairs.push(crossover(ctx, &chosen[i], &chosen[j], Some(common), s)?);
        }
    }
    Ok(DominanceTable { target: target.to_string(), side, ids: chosen, interval: common.to_string(), pairs })
}

/// Parses a target name as used on the command line.
pub fn parse_target(name: &str) -> Option<Target> {
    name.parse::<TargetId>().ok().map(Target::Named)
}

impl ExtremumRecord {
    pub fn summary(&self) -> String {
        format!(
            "{} of {} on {} = {:.12} at x = {:.12}{}",
            self.quantity,
            self.subject,
            self.interval,
            self.value,
            self.arg,
            if self.at_endpoint { " (endpoint limit)" } else { "" }
        )
    }
}
