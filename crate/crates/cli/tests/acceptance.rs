//! Acceptance sweep: one PASS/FAIL line per criterion.

use std::process::{Command, ExitCode};
use std::time::Instant;

use bounds_core::analysis::{best_constant, Extremum};
use bounds_core::catalog::{builtin_catalog, Endpoint, RegionKind};
use bounds_core::expr::{eval_expr, parse_expr, Env};
use bounds_core::special::{region_extremum, Region, DEFAULT_EPS};
use bounds_core::verifier::{check_lemma, check_limit, check_substitution, Span, Transform, LEMMAS};
use bounds_core::{Context, Ext, Precision, Real, Settings};
use serde_json::Value;

struct Run {
    stdout: Vec<u8>,
    code: Option<i32>,
    secs: f64,
}

fn bounds(args: &[&str]) -> Run {
    let t = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_bounds")).args(args).output().expect("binary runs");
    Run { stdout: o.stdout, code: o.status.code(), secs: t.elapsed().as_secs_f64() }
}

fn json(r: &Run) -> Value {
    serde_json::from_slice(&r.stdout).expect("valid JSON")
}

struct Sheet {
    failed: usize,
}

impl Sheet {
    fn line(&mut self, n: u32, title: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("criterion {n:>2} {}  {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn value(ctx: &Context, text: &str) -> f64 {
    ctx.constant_value(&ctx.parse(text).unwrap()).unwrap().value.to_f64()
}

fn lemma_limit(ctx: &Context, s: &Settings, id: &str, end: Endpoint) -> f64 {
    let c = LEMMAS.iter().find(|c| c.id == id).unwrap();
    let r = check_lemma(ctx, c, s).unwrap();
    let at = if end == Endpoint::Lo { 0 } else { r.limits.len() - 1 };
    r.limits[at].extrapolated
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let s = Settings::default();
    let mut sheet = Sheet { failed: 0 };

    // 1
    let first = bounds(&["verify", "--all", "--json"]);
    let doc = json(&first);
    let reports = doc["reports"].as_array().unwrap();
    let status = |id: &str| -> (String, usize) {
        let r = reports.iter().find(|r| r["entry_id"] == id).unwrap();
        (r["status"].as_str().unwrap().to_owned(), r["counterexamples"].as_array().map_or(0, |c| c.len()))
    };
    let mismatches = doc["summary"]["expect_mismatches"].as_u64().unwrap();
    let printed_ok = ["thm3-lower-as-printed", "lem3-cos-lower-as-printed"].iter().all(|id| {
        let (st, n) = status(id);
        st == "violated" && n > 0
    });
    let twins_ok = ["thm3-lower-corrected", "lem3-cos-lower"].iter().all(|id| status(id).0 == "certified");
    sheet.line(
        1,
        "catalog certification",
        first.code == Some(0) && reports.len() >= 110 && mismatches == 0 && printed_ok && twins_ok,
        format!(
            "{} reports, {} expectation mismatches, as-printed violated with counterexamples: {printed_ok}, twins certified: {twins_ok}, exit {:?}, {:.1} s",
            reports.len(),
            mismatches,
            first.code,
            first.secs
        ),
    );

    // 2
    let g = ctx.parse("(8*sin(x/2)-sin(x))/x").unwrap();
    let half = Span::open(Ext::ZERO, Ext::pi() / Ext::from(2));
    let sup = best_constant(&ctx, &g, &half, Extremum::Sup, &s).unwrap().value;
    let inf = best_constant(&ctx, &g, &half, Extremum::Inf, &s).unwrap().value;
    let want_inf = value(&ctx, "(8*sqrt(2)-2)/pi");
    sheet.line(
        2,
        "best constants of (8 sin(x/2) - sin x)/x",
        (sup - 3.0).abs() < 1e-9 && (inf - want_inf).abs() < 1e-9,
        format!("sup {sup:.12} (3), inf {inf:.12} ({want_inf:.12}), tol 1e-9"),
    );

    // 3
    let mut worst: f64 = 0.0;
    let mut found = Vec::new();
    for (a, b, want) in [
        ("zhu-lower", "thm1-lower", 1.28966),
        ("zhu-upper", "thm1-upper", 0.980316),
        ("jordan-ozban", "jrw-thm2-Cl", 1.19540),
        ("jordan-ozban", "jrw-thm1-Dl", 0.92409),
        ("jrw-thm2-Cu", "jordan-zhu-u", 1.09447),
        ("jrw-thm1-Du", "jordan-zhu-u", 0.95784),
    ] {
        let v = json(&bounds(&["--json", "crossover", a, b]));
        let xs: Vec<f64> = v["crossings"].as_array().unwrap().iter().map(|c| c["x"].as_f64().unwrap()).collect();
        let d = xs.iter().map(|x| (x - want).abs()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
        found.push(format!("{:.6}", xs.first().copied().unwrap_or(f64::NAN)));
    }
    sheet.line(3, "crossovers", worst <= 1e-3, format!("[{}], worst deviation {worst:.2e}, tol 1e-3", found.join(", ")));

    // 4
    let red = ctx.parse("x*(pi^2-x^2)/((pi^2+x^2)*sin(x))").unwrap();
    let r = best_constant(&ctx, &red, &Span::open(Ext::ZERO, Ext::pi()), Extremum::Inf, &s).unwrap();
    let c1 = 1.0 / r.value;
    sheet.line(
        4,
        "converse Redheffer constant",
        (r.arg - 2.12266).abs() <= 1e-3 && (r.value - 0.93012).abs() <= 1e-4 && (c1 - 1.07514).abs() <= 1e-3,
        format!("argmin {:.6}, min {:.6}, c1 = 1/min {:.6}", r.arg, r.value, c1),
    );

    // 5
    let lo = json(&bounds(&["--json", "maxerr", "alirezaei-lower"]))["value"].as_f64().unwrap();
    let up = json(&bounds(&["--json", "maxerr", "alirezaei-upper"]))["value"].as_f64().unwrap();
    sheet.line(
        5,
        "arctan maximum relative errors on (0,1000]",
        (lo - 0.0027).abs() <= 5e-4 && (up - 0.0023).abs() <= 5e-4,
        format!("lower {:.4}%, upper {:.4}%, tol 0.05 pp", 100.0 * lo, 100.0 * up),
    );

    // 6
    let a = lemma_limit(&ctx, &s, "lemma1702a", Endpoint::Hi);
    let a_want = value(&ctx, "pi*(8-pi)/4");
    let gm = lemma_limit(&ctx, &s, "lemma1702c-f", Endpoint::Hi);
    let gm_want = value(&ctx, "8*sqrt(2)/(2+3*pi)");
    let b = lemma_limit(&ctx, &s, "lemma1702b", Endpoint::Hi);
    let b_want = value(&ctx, "2*sqrt(2)/(4-pi)");
    let konst = String::from_utf8(bounds(&["const", "b_1702b"]).stdout).unwrap();
    let flagged = konst.contains("SUSPECT") && konst.contains("3.81578");
    sheet.line(
        6,
        "lemma endpoint limits",
        (a - a_want).abs() < 1e-9 && (gm - gm_want).abs() < 1e-9 && (b - b_want).abs() < 1e-9 && flagged,
        format!("a {a:.12} ({a_want:.12}), gamma {gm:.12} ({gm_want:.12}), b {b:.12} ({b_want:.12}), b flagged against 3.81578: {flagged}"),
    );

    // 7
    let mut dev: f64 = 0.0;
    for (x, y, t) in [
        ("1802a-upper", "thm3-upper", Transform::CosTwoT),
        ("1802a-lower", "thm3-lower-corrected", Transform::CosTwoT),
        ("1802a-lower", "thm4-lower", Transform::TanT),
        ("1802a-upper", "thm4-upper", Transform::TanT),
    ] {
        dev = dev.max(check_substitution(&ctx, x, y, t, s.grid_n, s.prec).unwrap().max_deviation);
    }
    sheet.line(7, "substitution identities", dev < 1e-25, format!("max deviation {dev:.3e} at 40 digits, tol 1e-25"));

    // 8
    let w = ctx.parse("((sin(x)/x)^2+tan(x)/x-2)/(x^3*tan(x))").unwrap();
    let w0 = check_limit(&ctx, &w, &half, Endpoint::Lo, &ctx.parse("8/45").unwrap(), s.prec).unwrap();
    let w1 = check_limit(&ctx, &w, &half, Endpoint::Hi, &ctx.parse("16/pi^4").unwrap(), s.prec).unwrap();
    sheet.line(
        8,
        "Wilker constants",
        w0.residual < 1e-9 && w1.residual < 1e-9,
        format!("at 0 {:.12} (8/45), at pi/2 {:.12} (16/pi^4), residuals {:.1e} {:.1e}", w0.extrapolated, w1.extrapolated, w0.residual, w1.residual),
    );

    // 9
    let beta_ids: Vec<&Value> = reports
        .iter()
        .filter(|r| {
            let id = r["entry_id"].as_str().unwrap();
            ["ivady", "dragomir", "alzer", "gammathm", "thm1004"].iter().any(|p| id.starts_with(p))
        })
        .collect();
    let beta_ok = !beta_ids.is_empty() && beta_ids.iter().all(|r| r["status"] == "certified");
    let sq = Region::new(RegionKind::UnitSquare, DEFAULT_EPS, s.x_max).unwrap();
    let alz = ctx.parse("(1-x*y*beta(x,y))*(1+x)*(1+y)/((1-x)*(1-y))").unwrap();
    let lim = |k| {
        let r = region_extremum(&ctx, &alz, &sq, k, 128, s.prec).unwrap();
        r.boundary_limit.map_or(r.value, |b| b.1)
    };
    let (alz_sup, alz_inf) = (lim(Extremum::Sup), lim(Extremum::Inf));
    let alz_a = value(&ctx, "2*pi^2/3-4");
    let diag = ctx.parse("beta(x,1-x)*x*(1-x)*(1+x*(1-x))").unwrap();
    let unit = Span::open(Ext::ZERO, Ext::ONE);
    let d_inf = best_constant(&ctx, &diag, &unit, Extremum::Inf, &s).unwrap().value;
    let d_sup = best_constant(&ctx, &diag, &unit, Extremum::Sup, &s).unwrap().value;
    let alpha = value(&ctx, "5*pi/16");
    sheet.line(
        9,
        "Beta-function bounds",
        beta_ok && (alz_sup - alz_a).abs() <= 1e-4 && (alz_inf - 1.0).abs() <= 1e-4 && (d_inf - alpha).abs() <= 1e-6 && (d_sup - 1.0).abs() <= 1e-6,
        format!(
            "{} region entries certified: {beta_ok}; Alzer a {alz_sup:.8} ({alz_a:.8}), b {alz_inf:.8} (1); diagonal alpha {d_inf:.9} ({alpha:.9}), beta {d_sup:.9} (1)",
            beta_ids.len()
        ),
    );

    // 10
    let k = ctx.parse("x^2*(5+cos(x))/(1-cos(x))").unwrap();
    let k0 = check_limit(&ctx, &k, &half, Endpoint::Lo, &ctx.parse("12").unwrap(), s.prec).unwrap();
    let k1 = check_limit(&ctx, &k, &half, Endpoint::Hi, &ctx.parse("5*pi^2/4").unwrap(), s.prec).unwrap();
    sheet.line(
        10,
        "Kober endpoint limits",
        k0.residual < 1e-9 && k1.residual < 1e-9,
        format!("at 0 {:.12} (12), at pi/2 {:.12} (5 pi^2/4), residuals {:.1e} {:.1e}", k0.extrapolated, k1.extrapolated, k0.residual, k1.residual),
    );

    // 11
    let identities = [
        "sin(x)^2+cos(x)^2-1",
        "cosh(x)^2-sinh(x)^2-1",
        "gamma(x)*gamma(1-x)-pi/sin(pi*x)",
        "gamma(x+1)-x*gamma(x)",
        "beta(x,1-x)-pi/sin(pi*x)",
    ];
    let mut worst11 = (0.0f64, true);
    for digits in [30u32, 40] {
        let prec = Precision::new(digits).unwrap();
        let tol = 10f64.powi(-(digits as i32));
        for id in identities {
            let e = parse_expr(id).unwrap();
            for i in 1..100 {
                let x = Ext::from(i as f64 / 100.0);
                let r = eval_expr(&e, &Env::new().with("x", x), prec).unwrap();
                let res = r.value.abs().to_f64();
                worst11.0 = worst11.0.max(res);
                worst11.1 &= res <= tol.max(r.err_bound);
            }
        }
    }
    sheet.line(11, "oracle property suite at 30 and 40 digits", worst11.1, format!("worst residual {:.2e} over {} identities", worst11.0, identities.len()));

    // 12
    let second = bounds(&["verify", "--all", "--json"]);
    sheet.line(
        12,
        "determinism of verify --all --json",
        first.stdout == second.stdout && !first.stdout.is_empty(),
        format!("{} bytes, identical: {}", first.stdout.len(), first.stdout == second.stdout),
    );

    let total = start.elapsed().as_secs_f64();
    println!("acceptance: {} of 12 criteria passed in {total:.1} s (budget 300 s)", 12 - sheet.failed);
    if sheet.failed == 0 && total < 300.0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
