//! The inequality catalog.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! const <name> = "<expr>" [decimal=<d>] [tags=<t>,...] ref="<citation>"
//!
//! entry <id>
//! target=<name> | target=expr:"<expr>"
//! side=lower|upper
//! domain=(lo,hi] | region=unit_square|strip|diagonal
//! expr="<expr>"
//! param <name> in [a,b) default <d> [grid <g1>,<g2>,...]
//! sharp=lo|hi|lo,hi
//! touch=<c1>,<c2>
//! expect=certified|violated
//! tags=<t1>,<t2>
//! ref="<citation>"
//! end
//! ```
//!
//! Interval ends may be `inf`. Constants may refer to earlier constants.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use once_cell::race::OnceBox;

use crate::expr::{parse_expr_with, Compiled, EvalError, Expr, ParseError, Var};
use crate::oracle::{target_value, NumError, Precision, RefValue, TargetId};
use crate::real::{Ext, Real};

const BUILTIN: &str = include_str!("../data/builtin.catalog");

/// Tag marking entries that reproduce a misprinted statement.
pub const TAG_AS_PRINTED: &str = "as-printed-typo";
/// Tag marking constants whose printed decimal disagrees with the closed form.
pub const TAG_SUSPECT: &str = "decimal-suspect";

/// Upper end used for probing unbounded domains during validation.
const PROBE_XMAX: f64 = 10.0;
const PROBE_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Expect {
    Certified,
    Violated,
}

impl Expect {
    pub fn name(self) -> &'static str {
        match self {
            Expect::Certified => "certified",
            Expect::Violated => "violated",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Endpoint {
    Lo,
    Hi,
}

/// An interval with closed-form ends; `hi == None` means `+inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Expr,
    pub hi: Option<Expr>,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    /// Numeric ends; an infinite upper end is returned as `None`.
    pub fn eval<R: Real>(&self, consts: &BTreeMap<String, RefValue<R>>) -> Result<(R, Option<R>), EvalError> {
        let lo = const_value(&self.lo, consts)?.value;
        let hi = match &self.hi {
            Some(h) => Some(const_value(h, consts)?.value),
            None => None,
        };
        Ok((lo, hi))
    }

    pub fn contains<R: Real>(&self, v: R, lo: R, hi: Option<R>) -> bool {
        let above = if self.lo_open { v > lo } else { v >= lo };
        let below = match hi {
            None => true,
            Some(h) => {
                if self.hi_open {
                    v < h
                } else {
                    v <= h
                }
            }
        };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hi = match &self.hi {
            Some(h) => h.to_string(),
            None => "inf".into(),
        };
        write!(
            f,
            "{}{},{}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            hi,
            if self.hi_open || self.hi.is_none() { ')' } else { ']' }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum RegionKind {
    UnitSquare,
    Strip,
    Diagonal,
}

impl RegionKind {
    pub fn name(self) -> &'static str {
        match self {
            RegionKind::UnitSquare => "unit_square",
            RegionKind::Strip => "strip",
            RegionKind::Diagonal => "diagonal",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Interval(Interval),
    Region(RegionKind),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Named(TargetId),
    Expr(Expr),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Named(t) => f.write_str(t.name()),
            Target::Expr(e) => write!(f, "expr:{e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub range: Interval,
    pub default: Expr,
    pub grid: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundEntry {
    pub id: String,
    pub target: Target,
    pub side: Side,
    pub domain: Domain,
    pub expr: Expr,
    pub params: Vec<ParamSpec>,
    pub sharp_at: Vec<Endpoint>,
    pub touch: Vec<Expr>,
    pub expect: Expect,
    pub provenance: String,
    pub tags: Vec<String>,
}

impl BoundEntry {
    pub fn has_tag(&self, t: &str) -> bool {
        self.tags.iter().any(|s| s == t)
    }

    pub fn interval(&self) -> Option<&Interval> {
        match &self.domain {
            Domain::Interval(i) => Some(i),
            Domain::Region(_) => None,
        }
    }

    pub fn region(&self) -> Option<RegionKind> {
        match &self.domain {
            Domain::Region(r) => Some(*r),
            Domain::Interval(_) => None,
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    /// Name of the target: the builtin id or the expression text.
    pub fn target_name(&self) -> String {
        self.target.to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantDef {
    pub name: String,
    pub closed_form: Expr,
    pub reference_decimal: Option<String>,
    pub provenance: String,
    pub tags: Vec<String>,
}

impl ConstantDef {
    pub fn is_suspect(&self) -> bool {
        self.tags.iter().any(|t| t == TAG_SUSPECT)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("line {line}: {message}")]
    Format { line: usize, offset: Option<usize>, message: String },
    #[error("{id}: {reason}")]
    Validation { id: String, reason: String },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Catalog {
    pub entries: Vec<BoundEntry>,
    pub constants: Vec<ConstantDef>,
}

/// Value of a closed expression.
pub fn const_value<R: Real>(e: &Expr, consts: &BTreeMap<String, RefValue<R>>) -> Result<RefValue<R>, EvalError> {
    let c = Compiled::new(e, consts, &[])?;
    match c.constant() {
        Some(v) => Ok(v),
        None => c.eval(R::zero(), None, &[]),
    }
}

impl Catalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, id: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn constant(&self, name: &str) -> Option<&ConstantDef> {
        self.constants.iter().find(|c| c.name == name)
    }

    /// Values of all constants in one backend.
    pub fn const_table<R: Real>(&self) -> Result<BTreeMap<String, RefValue<R>>, CatalogError> {
        let mut out = BTreeMap::new();
        for c in &self.constants {
            let v = const_value(&c.closed_form, &out)
                .map_err(|e| CatalogError::Validation { id: c.name.clone(), reason: e.to_string() })?;
            out.insert(c.name.clone(), v);
        }
        Ok(out)
    }

    /// Evaluates an entry's bound at a point inside its domain.
    pub fn eval_bound(
        &self,
        entry: &BoundEntry,
        x: Ext,
        y: Option<Ext>,
        params: &[(&str, Ext)],
        prec: Precision,
    ) -> Result<RefValue, EvalError> {
        let _ = prec;
        let consts = self.const_table::<Ext>().map_err(|e| EvalError::Num(NumError::Domain(e.to_string())))?;
        let outside = |what: &str| EvalError::Num(NumError::Domain(format!("{what} outside the domain of {}", entry.id)));
        match &entry.domain {
            Domain::Interval(iv) => {
                let (lo, hi) = iv.eval(&consts)?;
                if !iv.contains(x, lo, hi) {
                    return Err(outside("x"));
                }
            }
            Domain::Region(r) => {
                let y = y.ok_or_else(|| EvalError::Unbound("y".into()))?;
                let (zero, one) = (Ext::ZERO, Ext::ONE);
                let ok = match r {
                    RegionKind::UnitSquare => x > zero && x < one && y > zero && y < one,
                    RegionKind::Strip => x > one && y > zero && y < one,
                    RegionKind::Diagonal => x > zero && x < one && y > zero && y < one,
                };
                if !ok {
                    return Err(outside("point"));
                }
            }
        }
        let mut vals = Vec::new();
        for spec in &entry.params {
            let v = match params.iter().find(|(n, _)| *n == spec.name) {
                Some((_, v)) => *v,
                None => const_value(&spec.default, &consts)?.value,
            };
            let (lo, hi) = spec.range.eval(&consts)?;
            if !spec.range.contains(v, lo, hi) {
                return Err(outside(&format!("parameter {}", spec.name)));
            }
            vals.push(RefValue::exact(v));
        }
        let ev = EntryEval::new(entry, &consts)?;
        ev.bound(x, y, &vals)
    }

    /// Parameter assignments to verify: the tensor product of the grids,
    /// or the defaults when an entry declares no grid.
    pub fn param_sets<R: Real>(
        &self,
        entry: &BoundEntry,
        consts: &BTreeMap<String, RefValue<R>>,
    ) -> Result<Vec<Vec<RefValue<R>>>, EvalError> {
        let mut sets: Vec<Vec<RefValue<R>>> = alloc::vec![Vec::new()];
        for p in &entry.params {
            let vals = if p.grid.is_empty() {
                alloc::vec![const_value(&p.default, consts)?]
            } else {
                p.grid.iter().map(|g| const_value(g, consts)).collect::<Result<Vec<_>, _>>()?
            };
            sets = sets
                .into_iter()
                .flat_map(|s| {
                    vals.iter().map(move |v| {
                        let mut t = s.clone();
                        t.push(*v);
                        t
                    })
                })
                .collect();
        }
        Ok(sets)
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let bad = |id: &str, reason: String| CatalogError::Validation { id: id.to_owned(), reason };
        let mut seen = BTreeSet::new();
        for c in &self.constants {
            if !seen.insert(c.name.clone()) {
                return Err(bad(&c.name, "duplicate constant".into()));
            }
            if !c.closed_form.is_closed() {
                return Err(bad(&c.name, "constant depends on a variable or parameter".into()));
            }
        }
        let consts = self.const_table::<Ext>()?;
        for c in &self.constants {
            if let (Some(d), false) = (&c.reference_decimal, c.is_suspect()) {
                let v = consts[&c.name].value.to_f64();
                let printed: f64 = d.parse().map_err(|_| bad(&c.name, format!("bad decimal {d}")))?;
                if (v - printed).abs() > 1e-4 {
                    return Err(bad(&c.name, format!("closed form {v} disagrees with printed {d}")));
                }
            }
        }
        let consts64 = self.const_table::<f64>()?;
        let mut ids = BTreeSet::new();
        for e in &self.entries {
            if !ids.insert(e.id.as_str()) {
                return Err(bad(&e.id, "duplicate id".into()));
            }
            self.validate_entry(e, &consts, &consts64).map_err(|r| bad(&e.id, r))?;
        }
        Ok(())
    }

    fn validate_entry(
        &self,
        e: &BoundEntry,
        consts: &BTreeMap<String, RefValue<Ext>>,
        consts64: &BTreeMap<String, RefValue<f64>>,
    ) -> Result<(), String> {
        if !is_kebab(&e.id) {
            return Err("id is not kebab-case".into());
        }
        if e.expect == Expect::Violated && !e.has_tag(TAG_AS_PRINTED) {
            return Err(format!("expect=violated requires the {TAG_AS_PRINTED} tag"));
        }
        let beta = e.target == Target::Named(TargetId::BetaXY);
        if beta != e.region().is_some() {
            return Err("beta_xy targets and regions go together".into());
        }
        if !beta && e.expr.uses_var(Var::Y) {
            return Err("y is only available to beta_xy entries".into());
        }
        let declared = e.param_names();
        for p in e.expr.params() {
            if !declared.contains(&p) {
                return Err(format!("undeclared parameter {p}"));
            }
        }
        if let Target::Expr(t) = &e.target {
            for p in t.params() {
                if !declared.contains(&p) {
                    return Err(format!("undeclared parameter {p} in target"));
                }
            }
        }
        for p in &e.params {
            let (lo, hi) = p.range.eval(consts).map_err(|x| x.to_string())?;
            if let Some(h) = hi {
                if lo >= h {
                    return Err(format!("empty range for parameter {}", p.name));
                }
            }
            for g in core::iter::once(&p.default).chain(p.grid.iter()) {
                let v = const_value(g, consts).map_err(|x| x.to_string())?.value;
                if !p.range.contains(v, lo, hi) {
                    return Err(format!("value {g} of parameter {} is outside its range", p.name));
                }
            }
        }
        let mut probe_x = Vec::new();
        match &e.domain {
            Domain::Interval(iv) => {
                let (lo, hi) = iv.eval(consts).map_err(|x| x.to_string())?;
                let hi = hi.unwrap_or(Ext::from(PROBE_XMAX).max(lo + Ext::ONE));
                if lo >= hi {
                    return Err("empty domain".into());
                }
                for i in 0..PROBE_POINTS {
                    let t = Ext::from((i as f64 + 0.5) / PROBE_POINTS as f64);
                    probe_x.push((lo + (hi - lo) * t, None));
                }
                for t in &e.touch {
                    let v = const_value(t, consts).map_err(|x| x.to_string())?.value;
                    if !(v > lo && v < hi) {
                        return Err(format!("touch point {t} is not interior"));
                    }
                }
            }
            Domain::Region(r) => {
                for i in 0..8 {
                    for j in 0..8 {
                        let a = Ext::from((i as f64 + 0.5) / 8.0);
                        let b = Ext::from((j as f64 + 0.5) / 8.0);
                        let pt = match r {
                            RegionKind::UnitSquare => (a, Some(b)),
                            RegionKind::Strip => (Ext::ONE + a * Ext::from(9), Some(b)),
                            RegionKind::Diagonal => (a, Some(Ext::ONE - a)),
                        };
                        probe_x.push(pt);
                    }
                }
            }
        }
        let defaults: Vec<RefValue<Ext>> = e
            .params
            .iter()
            .map(|p| const_value(&p.default, consts))
            .collect::<Result<_, _>>()
            .map_err(|x| x.to_string())?;
        let defaults64: Vec<RefValue<f64>> = defaults.iter().map(|v| RefValue::new(v.to_f64(), 0.0)).collect();
        let ev = EntryEval::<Ext>::new(e, consts).map_err(|x| x.to_string())?;
        let ev64 = EntryEval::<f64>::new(e, consts64).map_err(|x| x.to_string())?;
        for (x, y) in probe_x {
            let ok64 = ev64.margin(x.to_f64(), y.map(Real::to_f64), &defaults64).is_ok();
            if !ok64 {
                if let Err(err) = ev.margin(x, y, &defaults) {
                    return Err(format!("not evaluable at x={}: {err}", x.to_f64()));
                }
            }
        }
        Ok(())
    }
}

fn is_kebab(id: &str) -> bool {
    id.starts_with(|c: char| c.is_ascii_lowercase() || c.is_ascii_digit())
        && id.split('-').all(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric()))
}

/// An entry lowered for evaluation in one backend.
#[derive(Clone, Debug)]
pub struct EntryEval<R> {
    target: TargetEval<R>,
    bound: Compiled<R>,
    side: Side,
}

#[derive(Clone, Debug)]
enum TargetEval<R> {
    Named(TargetId),
    Expr(Compiled<R>),
}

impl<R: Real> EntryEval<R> {
    pub fn new(entry: &BoundEntry, consts: &BTreeMap<String, RefValue<R>>) -> Result<Self, EvalError> {
        let names = entry.param_names();
        let target = match &entry.target {
            Target::Named(t) => TargetEval::Named(*t),
            Target::Expr(e) => TargetEval::Expr(Compiled::new(e, consts, &names)?),
        };
        Ok(Self { target, bound: Compiled::new(&entry.expr, consts, &names)?, side: entry.side })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn bound(&self, x: R, y: Option<R>, params: &[RefValue<R>]) -> Result<RefValue<R>, EvalError> {
        self.bound.eval(x, y, params)
    }

    pub fn target(&self, x: R, y: Option<R>, params: &[RefValue<R>]) -> Result<RefValue<R>, EvalError> {
        match &self.target {
            TargetEval::Named(t) => Ok(target_value(*t, x, y)?),
            TargetEval::Expr(c) => c.eval(x, y, params),
        }
    }

    /// `target - bound` for lower bounds, `bound - target` for upper bounds.
    pub fn margin(&self, x: R, y: Option<R>, params: &[RefValue<R>]) -> Result<RefValue<R>, EvalError> {
        let t = self.target(x, y, params)?;
        let b = self.bound(x, y, params)?;
        Ok(match self.side {
            Side::Lower => t.sub(b)?,
            Side::Upper => b.sub(t)?,
        })
    }
}

// ------------------------------------------------------------------ parsing

struct LineError(Option<usize>, String);

impl From<ParseError> for LineError {
    fn from(e: ParseError) -> Self {
        LineError(e.offset(), e.to_string())
    }
}

impl From<String> for LineError {
    fn from(s: String) -> Self {
        LineError(None, s)
    }
}

impl From<&str> for LineError {
    fn from(s: &str) -> Self {
        LineError(None, s.into())
    }
}

fn unquote(v: &str) -> Result<&str, LineError> {
    v.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .ok_or_else(|| LineError(None, format!("expected a quoted string, found {v}")))
}

// Splits on commas that are not nested in parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

// key=value pairs where values are bare words or quoted strings.
fn key_values(mut s: &str) -> Result<Vec<(&str, &str)>, LineError> {
    let mut out = Vec::new();
    loop {
        s = s.trim_start();
        if s.is_empty() {
            return Ok(out);
        }
        let eq = s.find('=').ok_or_else(|| LineError(None, format!("expected key=value, found {s}")))?;
        let key = &s[..eq];
        let rest = &s[eq + 1..];
        let end = if rest.starts_with('"') {
            rest[1..].find('"').map(|i| i + 2).ok_or("unterminated string")?
        } else {
            rest.find(char::is_whitespace).unwrap_or(rest.len())
        };
        out.push((key, &rest[..end]));
        s = &rest[end..];
    }
}

struct Scope<'a>(&'a dyn Fn(&str) -> bool);

impl Scope<'_> {
    fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        parse_expr_with(text, self.0)
    }

    fn closed(&self, text: &str) -> Result<Expr, LineError> {
        let e = self.parse(text)?;
        if !e.is_closed() {
            return Err(format!("{text} is not a closed-form constant").into());
        }
        Ok(e)
    }

    fn interval(&self, s: &str) -> Result<Interval, LineError> {
        let s = s.trim();
        let lo_open = match s.chars().next() {
            Some('(') => true,
            Some('[') => false,
            _ => return Err(format!("interval must start with ( or [: {s}").into()),
        };
        let hi_open = match s.chars().last() {
            Some(')') => true,
            Some(']') => false,
            _ => return Err(format!("interval must end with ) or ]: {s}").into()),
        };
        let parts = split_top(&s[1..s.len() - 1]);
        if parts.len() != 2 {
            return Err(format!("interval needs two ends: {s}").into());
        }
        let lo = self.closed(parts[0].trim())?;
        let hi_text = parts[1].trim();
        let hi = if hi_text == "inf" { None } else { Some(self.closed(hi_text)?) };
        if hi.is_none() && !hi_open {
            return Err("an infinite end must be open".into());
        }
        Ok(Interval { lo, hi, lo_open, hi_open })
    }
}

#[derive(Default)]
struct Draft {
    id: String,
    line: usize,
    target: Option<Target>,
    side: Option<Side>,
    domain: Option<Domain>,
    expr: Option<Expr>,
    params: Vec<ParamSpec>,
    sharp_at: Vec<Endpoint>,
    touch: Vec<Expr>,
    expect: Option<Expect>,
    provenance: String,
    tags: Vec<String>,
}

impl Draft {
    fn finish(self) -> Result<BoundEntry, CatalogError> {
        let missing = |f: &str| CatalogError::Format { line: self.line, offset: None, message: format!("entry {} has no {f}", self.id) };
        Ok(BoundEntry {
            target: self.target.clone().ok_or_else(|| missing("target"))?,
            side: self.side.ok_or_else(|| missing("side"))?,
            domain: self.domain.clone().ok_or_else(|| missing("domain or region"))?,
            expr: self.expr.clone().ok_or_else(|| missing("expr"))?,
            expect: self.expect.ok_or_else(|| missing("expect"))?,
            params: self.params,
            sharp_at: self.sharp_at,
            touch: self.touch,
            provenance: self.provenance,
            tags: self.tags,
            id: self.id,
        })
    }
}

fn tag_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(ToOwned::to_owned).collect()
}

fn const_line(rest: &str, names: &BTreeSet<String>) -> Result<ConstantDef, LineError> {
    let (name, rhs) = rest.split_once('=').ok_or("expected const <name> = \"<expr>\"")?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad constant name {name:?}").into());
    }
    let rhs = rhs.trim_start();
    let close = rhs.get(1..).and_then(|r| r.find('"')).filter(|_| rhs.starts_with('"')).ok_or("expected a quoted expression")?;
    let text = &rhs[1..close + 1];
    let closed_form = Scope(&|n| names.contains(n)).closed(text)?;
    let mut def = ConstantDef { name: name.to_owned(), closed_form, reference_decimal: None, provenance: String::new(), tags: Vec::new() };
    for (k, v) in key_values(&rhs[close + 2..])? {
        match k {
            "decimal" => def.reference_decimal = Some(v.to_owned()),
            "ref" => def.provenance = unquote(v)?.to_owned(),
            "tags" => def.tags = tag_list(v),
            _ => return Err(format!("unknown constant field {k}").into()),
        }
    }
    Ok(def)
}

fn entry_field(d: &mut Draft, line: &str, scope: &Scope<'_>) -> Result<(), LineError> {
    if let Some(rest) = line.strip_prefix("param ") {
        let w: Vec<&str> = rest.split_whitespace().collect();
        let ok = (w.len() == 5 || w.len() == 7) && w[1] == "in" && w[3] == "default" && (w.len() == 5 || w[5] == "grid");
        if !ok {
            return Err("expected param <name> in <interval> default <value> [grid <v1>,...]".into());
        }
        let grid = if w.len() == 7 { split_top(w[6]).into_iter().map(|g| scope.closed(g)).collect::<Result<_, _>>()? } else { Vec::new() };
        d.params.push(ParamSpec { name: w[0].to_owned(), range: scope.interval(w[2])?, default: scope.closed(w[4])?, grid });
        return Ok(());
    }
    let (key, value) = line.split_once('=').ok_or("expected key=value")?;
    let value = value.trim();
    match key.trim() {
        "target" => {
            d.target = Some(if let Some(t) = value.strip_prefix("expr:") {
                Target::Expr(scope.parse(unquote(t)?)?)
            } else {
                Target::Named(value.parse().map_err(|_| LineError(None, format!("unknown target {value}")))?)
            })
        }
        "side" => {
            d.side = Some(match value {
                "lower" => Side::Lower,
                "upper" => Side::Upper,
                _ => return Err(format!("side must be lower or upper, found {value}").into()),
            })
        }
        "domain" => d.domain = Some(Domain::Interval(scope.interval(value)?)),
        "region" => {
            d.domain = Some(Domain::Region(match value {
                "unit_square" => RegionKind::UnitSquare,
                "strip" => RegionKind::Strip,
                "diagonal" => RegionKind::Diagonal,
                _ => return Err(format!("unknown region {value}").into()),
            }))
        }
        "expr" => {
            let text = unquote(value)?;
            let e = scope.parse(text).map_err(|e| {
                // Report the offset within the line, past `expr="`.
                let off = e.offset().map(|o| o + line.find('"').unwrap_or(0) + 1);
                LineError(off, e.to_string())
            })?;
            d.expr = Some(e);
        }
        "sharp" => {
            for s in value.split(',') {
                d.sharp_at.push(match s.trim() {
                    "lo" => Endpoint::Lo,
                    "hi" => Endpoint::Hi,
                    other => return Err(format!("sharp takes lo/hi, found {other}").into()),
                });
            }
        }
        "touch" => d.touch = split_top(value).into_iter().map(|t| scope.closed(t.trim())).collect::<Result<_, _>>()?,
        "expect" => {
            d.expect = Some(match value {
                "certified" => Expect::Certified,
                "violated" => Expect::Violated,
                _ => return Err(format!("expect must be certified or violated, found {value}").into()),
            })
        }
        "tags" => d.tags = tag_list(value),
        "ref" => d.provenance = unquote(value)?.to_owned(),
        other => return Err(format!("unknown field {other}").into()),
    }
    Ok(())
}

/// Parses an interval such as `(0,pi/2]`; `is_const` names the constants.
pub fn parse_interval(text: &str, is_const: &dyn Fn(&str) -> bool) -> Result<Interval, String> {
    Scope(is_const).interval(text).map_err(|e| e.1)
}

/// Parses and validates catalog text.
pub fn parse_catalog(text: &str) -> Result<Catalog, CatalogError> {
    let mut cat = Catalog::default();
    let mut names = BTreeSet::new();
    let mut draft: Option<Draft> = None;
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        last = n;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |e: LineError| CatalogError::Format { line: n, offset: e.0, message: e.1 };
        if let Some(d) = draft.as_mut() {
            if line == "end" {
                cat.entries.push(draft.take().unwrap().finish()?);
            } else {
                entry_field(d, line, &Scope(&|n| names.contains(n))).map_err(err)?;
            }
        } else if let Some(id) = line.strip_prefix("entry ") {
            draft = Some(Draft { id: id.trim().to_owned(), line: n, ..Draft::default() });
        } else if let Some(rest) = line.strip_prefix("const ") {
            let c = const_line(rest, &names).map_err(err)?;
            names.insert(c.name.clone());
            cat.constants.push(c);
        } else {
            return Err(err(format!("unexpected line: {line}").into()));
        }
    }
    if let Some(d) = draft {
        return Err(CatalogError::Format { line: last, offset: None, message: format!("entry {} is missing `end`", d.id) });
    }
    cat.validate()?;
    Ok(cat)
}

/// The complete built-in catalog. Validated once per process.
pub fn builtin_catalog() -> Catalog {
    static CELL: OnceBox<Catalog> = OnceBox::new();
    CELL.get_or_init(|| Box::new(parse_catalog(BUILTIN).unwrap_or_else(|e| panic!("builtin catalog: {e}"))))
        .clone()
}

/// The catalog source text shipped with the crate.
pub fn builtin_source() -> &'static str {
    BUILTIN
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"
const k = "1/6" decimal=0.16667 ref="test"
entry kvv-like
target=sinc
side=lower
domain=(0,pi/2)
expr="1-k*x^2"
sharp=lo
expect=certified
ref="test"
end
"#;

    #[test]
    fn parses_a_single_entry() {
        let c = parse_catalog(ONE).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.entries[0].sharp_at, [Endpoint::Lo]);
    }

    #[test]
    fn top_level_split_respects_parentheses() {
        assert_eq!(split_top("min(a,b),2"), ["min(a,b)", "2"]);
    }

    #[test]
    fn kebab_ids() {
        assert!(is_kebab("jrw-thm2-Cl"));
        assert!(is_kebab("3001-upper"));
        assert!(!is_kebab("Bad-id"));
        assert!(!is_kebab("a--b"));
    }
}

#[cfg(test)]
mod builtin_tests {
    #[test]
    fn builtin_validates() {
        let c = super::builtin_catalog();
        assert!(c.len() >= 110, "{}", c.len());
    }
}
