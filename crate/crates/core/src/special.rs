//! Beta-function bounds over two-variable regions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::analysis::Extremum;
use crate::catalog::{BoundEntry, RegionKind};
use crate::expr::{Compiled, Expr};
use crate::oracle::{Precision, RefValue};
use crate::real::{Ext, Real};
use crate::verifier::{
    eval_err, golden, Collector, Context, Outcome, ParamSet, Point, Settings, Summary, VerificationReport, VerifyError,
    BAND, CLUSTER_DEPTH,
};

pub const DEFAULT_EPS: f64 = 1e-3;
/// Per-axis grid used when the requested grid is larger.
pub const REGION_GRID: usize = 256;
const SWEEPS: usize = 5;
const MAX_MINIMA: usize = 4;
/// Extra guard for screened Beta margins, on top of the propagated bound.
const BETA_SCREEN_FLOOR: f64 = 1e-8;
const SCREEN: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub kind: RegionKind,
    /// Distance kept from the region's boundary.
    pub eps: f64,
    /// Right end of the strip `x > 1`.
    pub x_max: f64,
}

impl Region {
    pub fn new(kind: RegionKind, eps: f64, x_max: f64) -> Result<Self, VerifyError> {
        if !(eps > 0.0 && eps < 0.1) {
            return Err(VerifyError::Config(format!("region margin must be in (0, 0.1), got {eps}")));
        }
        if kind == RegionKind::Strip && !(x_max.is_finite() && x_max > 1.0 + 4.0 * eps) {
            return Err(VerifyError::Config(format!("strip end {x_max} is too small")));
        }
        Ok(Self { kind, eps, x_max })
    }

    /// `x` range of the sampled part of the region.
    pub fn x_range(&self) -> (f64, f64) {
        match self.kind {
            RegionKind::Strip => (1.0 + self.eps, self.x_max),
            _ => (self.eps, 1.0 - self.eps),
        }
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.eps, 1.0 - self.eps)
    }

    pub fn describe(&self) -> String {
        let (a, b) = self.x_range();
        match self.kind {
            RegionKind::UnitSquare => format!("unit_square x,y in [{a}, {b}]"),
            RegionKind::Strip => format!("strip x in [{a}, {b}], y in [{}, {}]", self.eps, 1.0 - self.eps),
            RegionKind::Diagonal => format!("diagonal y=1-x, x in [{a}, {b}]"),
        }
    }
}

/// `n` abscissae on `[lo, hi]`, denser toward both ends.
pub fn axis(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = (1.0 - libm::cos(core::f64::consts::PI * (i as f64 + 0.5) / n as f64)) / 2.0;
            let t = if n == 1 { 0.5 } else { (t - tmin(n)) / (1.0 - 2.0 * tmin(n)) };
            lo + (hi - lo) * t
        })
        .collect()
}

fn tmin(n: usize) -> f64 {
    (1.0 - libm::cos(core::f64::consts::PI * 0.5 / n as f64)) / 2.0
}

type P2 = (Ext, Ext);

fn point(p: P2) -> Point {
    Point { x: p.0.to_f64(), y: Some(p.1.to_f64()) }
}

/// Verifies a Beta-function entry on a region.
pub fn verify_beta_bound(ctx: &Context, entry: &BoundEntry, region: &Region, s: &Settings) -> Result<VerificationReport, VerifyError> {
    if !crate::verifier::is_beta(entry) {
        return Err(VerifyError::MismatchedTarget(format!("{} does not bound beta_xy", entry.id)));
    }
    if entry.region() != Some(region.kind) {
        return Err(VerifyError::MismatchedTarget(format!("{} is not declared on {}", entry.id, region.kind.name())));
    }
    let (ev, ev64) = ctx.entry_evals(entry)?;
    let touch: Vec<Ext> = entry
        .touch
        .iter()
        .map(|t| ctx.constant_value(t).map(|v| v.value))
        .collect::<Result<_, _>>()?;
    let near_w = Ext::from(libm::ldexp(1.0, -10));
    let is_near = |p: P2| touch.iter().any(|t| (p.0 - *t).abs() <= near_w);
    let n = s.grid_n.min(REGION_GRID);
    let mut summary = Summary::new();
    for ps in ctx.param_sets(entry)? {
        let eval = |p: P2| Outcome::of(ev.margin(p.0, Some(p.1), &ps.ext));
        let screen = |x: f64, y: f64| -> Option<RefValue<f64>> {
            let m = ev64.margin(x, Some(y), &ps.f64).ok()?;
            (m.value > SCREEN * m.err_bound + BETA_SCREEN_FLOOR && m.err_bound.is_finite()).then_some(m)
        };
        let mut c: Collector<P2> = Collector::new();
        let (xlo, xhi) = region.x_range();
        if region.kind == RegionKind::Diagonal {
            let xs = axis(s.grid_n, xlo, xhi);
            let mut pts: Vec<P2> = xs.iter().map(|&x| (Ext::from(x), Ext::ONE - Ext::from(x))).collect();
            pts.extend(touch.iter().map(|t| (*t, Ext::ONE - *t)));
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
            for p in pts {
                let is_touch = touch.contains(&p.0);
                if !is_touch {
                    if let Some(m) = screen(p.0.to_f64(), p.1.to_f64()) {
                        c.record_screened(p, m);
                        continue;
                    }
                }
                c.record(p, point(p), eval(p), is_near(p), is_touch, &ps);
            }
            refine_diagonal(&mut c, &is_near, s.refine_depth, &eval, &ps);
        } else {
            let xs = axis(n, xlo, xhi);
            let (ylo, yhi) = region.y_range();
            let ys = axis(n, ylo, yhi);
            for &x in &xs {
                for &y in &ys {
                    let p = (Ext::from(x), Ext::from(y));
                    if let Some(m) = screen(x, y) {
                        c.record_screened(p, m);
                    } else {
                        c.record(p, point(p), eval(p), false, false, &ps);
                    }
                }
            }
            refine_grid(&mut c, n, &xs, &ys, s.refine_depth, &eval, &ps);
        }
        let best = c.confirm_min(eval, point, &ps);
        summary.absorb(c, best, point, &ps);
    }
    Ok(summary.finish(entry, s, region.describe(), None, Vec::new()))
}

fn margin_of(o: Outcome) -> f64 {
    match o {
        Outcome::Value(m) => m.value.to_f64(),
        _ => f64::INFINITY,
    }
}

fn refine_diagonal(c: &mut Collector<P2>, is_near: &dyn Fn(P2) -> bool, depth: usize, eval: &dyn Fn(P2) -> Outcome, ps: &ParamSet) {
    let recs = c.recs.clone();
    let mut cands: Vec<usize> = (1..recs.len().saturating_sub(1))
        .filter(|&i| recs[i].margin <= recs[i - 1].margin && recs[i].margin <= recs[i + 1].margin && !is_near(recs[i].at))
        .collect();
    cands.sort_by(|&a, &b| recs[a].margin.total_cmp(&recs[b].margin).then(a.cmp(&b)));
    cands.truncate(MAX_MINIMA);
    for i in cands {
        let mut seen = Vec::new();
        golden(recs[i - 1].at.0, recs[i + 1].at.0, depth, |x| {
            let o = eval((x, Ext::ONE - x));
            seen.push((x, o.clone()));
            margin_of(o)
        });
        for (x, o) in seen {
            let p = (x, Ext::ONE - x);
            c.refinements += 1;
            c.record(p, point(p), o, is_near(p), false, ps);
        }
    }
}

/// Alternating golden-section refinement at the lowest local minima of a
/// tensor grid stored row-major in `c.recs`.
fn refine_grid(c: &mut Collector<P2>, n: usize, xs: &[f64], ys: &[f64], depth: usize, eval: &dyn Fn(P2) -> Outcome, ps: &ParamSet) {
    if c.recs.len() != n * n || n < 3 {
        // Some samples were not numeric; locate minima on what is there.
        return refine_sparse(c, eval, depth, ps);
    }
    let m = |i: usize, j: usize| c.recs[i * n + j].margin;
    let mut cands = Vec::new();
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let v = m(i, j);
            if v <= m(i - 1, j) && v <= m(i + 1, j) && v <= m(i, j - 1) && v <= m(i, j + 1) {
                cands.push((v, i, j));
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    cands.truncate(MAX_MINIMA);
    for (_, i, j) in cands {
        let bx = (Ext::from(xs[i - 1]), Ext::from(xs[i + 1]));
        let by = (Ext::from(ys[j - 1]), Ext::from(ys[j + 1]));
        sweep(c, (Ext::from(xs[i]), Ext::from(ys[j])), bx, by, depth, eval, ps);
    }
}

fn refine_sparse(c: &mut Collector<P2>, eval: &dyn Fn(P2) -> Outcome, depth: usize, ps: &ParamSet) {
    let Some(best) = c.recs.iter().min_by(|a, b| a.margin.total_cmp(&b.margin)).copied() else { return };
    let d = Ext::from(1e-3);
    sweep(c, best.at, (best.at.0 - d, best.at.0 + d), (best.at.1 - d, best.at.1 + d), depth, eval, ps);
}

fn sweep(c: &mut Collector<P2>, start: P2, bx: P2, by: P2, depth: usize, eval: &dyn Fn(P2) -> Outcome, ps: &ParamSet) {
    let two = Ext::from(2);
    let mut y = start.1;
    for _ in 0..SWEEPS {
        let mut seen = Vec::new();
        let (a, b) = golden(bx.0, bx.1, depth, |t| {
            let o = eval((t, y));
            seen.push(((t, y), o.clone()));
            margin_of(o)
        });
        let x = (a + b) / two;
        let (a, b) = golden(by.0, by.1, depth, |t| {
            let o = eval((x, t));
            seen.push(((x, t), o.clone()));
            margin_of(o)
        });
        y = (a + b) / two;
        for (p, o) in seen {
            c.refinements += 1;
            c.record(p, point(p), o, false, false, ps);
        }
    }
}

/// Extremum of a two-variable expression over a region, with the limit
/// toward the boundary when the grid optimum sits on the outer grid lines.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegionExtremum {
    pub kind: Extremum,
    pub value: f64,
    pub at: Point,
    /// Limit along the approach to the nearest boundary point, when used.
    pub boundary_limit: Option<(Point, f64)>,
    pub grid_per_axis: usize,
}

pub fn region_extremum(
    ctx: &Context,
    f: &Expr,
    region: &Region,
    kind: Extremum,
    grid_per_axis: usize,
    prec: Precision,
) -> Result<RegionExtremum, VerifyError> {
    let _ = prec;
    let what = f.to_string();
    let ext: Compiled<Ext> = Compiled::new(f, &ctx.consts, &[]).map_err(eval_err(&what))?;
    let sgn = match kind {
        Extremum::Sup => -1.0,
        Extremum::Inf => 1.0,
    };
    // Minimize sgn * f.
    let val = |p: P2| -> f64 {
        ext.eval(p.0, Some(p.1), &[]).map(|v| sgn * v.value.to_f64()).unwrap_or(f64::INFINITY)
    };
    let n = grid_per_axis.max(3);
    let (xlo, xhi) = region.x_range();
    let xs = axis(n, xlo, xhi);
    let ys: Vec<f64> = if region.kind == RegionKind::Diagonal { Vec::new() } else { axis(n, region.y_range().0, region.y_range().1) };
    let f64c: Compiled<f64> = Compiled::new(f, &ctx.consts64, &[]).map_err(eval_err(&what))?;
    let v64 = |x: f64, y: f64| f64c.eval(x, Some(y), &[]).map(|v| sgn * v.value).unwrap_or(f64::INFINITY);
    let (mut bi, mut bj, mut bv) = (0usize, 0usize, f64::INFINITY);
    if region.kind == RegionKind::Diagonal {
        for (i, &x) in xs.iter().enumerate() {
            let v = v64(x, 1.0 - x);
            if v < bv {
                (bi, bv) = (i, v);
            }
        }
    } else {
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                let v = v64(x, y);
                if v < bv {
                    (bi, bj, bv) = (i, j, v);
                }
            }
        }
    }
    let two = Ext::from(2);
    let lo_i = bi.saturating_sub(1);
    let hi_i = (bi + 1).min(n - 1);
    let (x, y) = if region.kind == RegionKind::Diagonal {
        let (a, b) = golden(Ext::from(xs[lo_i]), Ext::from(xs[hi_i]), 80, |t| val((t, Ext::ONE - t)));
        let x = (a + b) / two;
        (x, Ext::ONE - x)
    } else {
        let lo_j = bj.saturating_sub(1);
        let hi_j = (bj + 1).min(n - 1);
        let (mut x, mut y) = (Ext::from(xs[bi]), Ext::from(ys[bj]));
        for _ in 0..SWEEPS {
            let (a, b) = golden(Ext::from(xs[lo_i]), Ext::from(xs[hi_i]), 80, |t| val((t, y)));
            x = (a + b) / two;
            let (a, b) = golden(Ext::from(ys[lo_j]), Ext::from(ys[hi_j]), 80, |t| val((x, t)));
            y = (a + b) / two;
        }
        (x, y)
    };
    let interior = val((x, y));
    let mut best = (interior, point((x, y)));
    // Boundary approach: coordinates on an outer grid line move toward the
    // region's boundary geometrically.
    let edge = |i: usize| i == 0 || i + 1 == n;
    let mut boundary_limit = None;
    let on_x = edge(bi);
    let on_y = region.kind != RegionKind::Diagonal && edge(bj);
    if on_x || on_y {
        let bx = if bi == 0 { if region.kind == RegionKind::Strip { 1.0 } else { 0.0 } } else { 1.0 };
        let bx = if region.kind == RegionKind::Strip && bi + 1 == n { f64::NAN } else { bx };
        let by = if bj == 0 { 0.0 } else { 1.0 };
        let tx = on_x && bx.is_finite();
        if tx || on_y {
            let x0 = Ext::from(xs[bi]);
            let y0 = if region.kind == RegionKind::Diagonal { Ext::ONE - x0 } else { Ext::from(ys[bj]) };
            let mut last = None;
            for k in 0..=CLUSTER_DEPTH {
                let h = Ext::from(libm::ldexp(1.0, -k));
                let px = if tx { Ext::from(bx) + (x0 - Ext::from(bx)) * h } else { x0 };
                let py = if region.kind == RegionKind::Diagonal {
                    Ext::ONE - px
                } else if on_y {
                    Ext::from(by) + (y0 - Ext::from(by)) * h
                } else {
                    y0
                };
                match ext.eval(px, Some(py), &[]) {
                    Ok(v) if v.err_bound < BAND * 1e-12 * (1.0 + v.value.to_f64().abs()) => last = Some(((px, py), v.value)),
                    Ok(_) => break,
                    Err(_) => break,
                }
            }
            if let Some((p, v)) = last {
                let lim = point(p);
                let corner = Point {
                    x: if tx { bx } else { lim.x },
                    y: Some(if region.kind == RegionKind::Diagonal { 1.0 - if tx { bx } else { lim.x } } else if on_y { by } else { lim.y.unwrap_or(0.0) }),
                };
                let lv = v.to_f64();
                boundary_limit = Some((corner, lv));
                if sgn * lv < best.0 {
                    best = (sgn * lv, corner);
                }
            }
        }
    }
    Ok(RegionExtremum { kind, value: sgn * best.0, at: best.1, boundary_limit, grid_per_axis: n })
}

/// Margin of a diagonal entry with the Beta function replaced by
/// `pi / sin(pi x)`; used to cross-check the Gamma route.
pub fn diagonal_margin_by_reflection(ctx: &Context, entry: &BoundEntry, x: Ext) -> Result<RefValue<Ext>, VerifyError> {
    use crate::catalog::Side;
    let (ev, _) = ctx.entry_evals(entry)?;
    let y = Ext::ONE - x;
    let params: Vec<RefValue<Ext>> = ctx.param_sets(entry)?.into_iter().next().map(|p| p.ext).unwrap_or_default();
    let b = ev.bound(x, Some(y), &params).map_err(eval_err(&entry.id))?;
    let pi = RefValue::<Ext>::pi();
    let s = crate::oracle::apply(crate::oracle::FunctionId::Sin, pi.mul(RefValue::exact(x)).map_err(|e| eval_err("reflection")(e.into()))?)
        .map_err(|e| eval_err("reflection")(e.into()))?;
    let t = pi.div(s).map_err(|e| eval_err("reflection")(e.into()))?;
    let m = match entry.side {
        Side::Lower => t.sub(b),
        Side::Upper => b.sub(t),
    };
    m.map_err(|e| eval_err("reflection")(e.into()))
}
