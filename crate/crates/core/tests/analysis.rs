use bounds_core::analysis::{best_constant, crossover, dominance_table, max_rel_error, parse_target, Extremum};
use bounds_core::catalog::{builtin_catalog, RegionKind, Side};
use bounds_core::expr::{eval_expr, Env};
use bounds_core::special::{diagonal_margin_by_reflection, region_extremum, verify_beta_bound, Region, DEFAULT_EPS};
use bounds_core::verifier::Span;
use bounds_core::{Context, Ext, Precision, Real, Settings, Status, VerifyError};

fn s() -> Settings {
    Settings::new(4000, 40, 40, 10.0).unwrap()
}

fn half_pi() -> Span {
    Span::open(Ext::ZERO, Ext::pi() / Ext::from(2))
}

#[test]
fn crossover_is_symmetric_in_its_arguments() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let ab = crossover(&ctx, "zhu-lower", "thm1-lower", None, &s()).unwrap();
    let ba = crossover(&ctx, "thm1-lower", "zhu-lower", None, &s()).unwrap();
    assert_eq!(ab.crossings.len(), 1);
    assert!((ab.crossings[0].x - ba.crossings[0].x).abs() < 1e-12);
    assert!((ab.crossings[0].x - 1.28966).abs() < 1e-3);
    assert_eq!(ab.dominance.first().unwrap().tighter, "thm1-lower");
    assert_eq!(ba.dominance.first().unwrap().tighter, "thm1-lower");
}

#[test]
fn self_crossover_is_a_tie() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let r = crossover(&ctx, "thm1-lower", "thm1-lower", None, &s()).unwrap();
    assert!(r.crossings.is_empty());
    assert!(r.dominance.iter().all(|d| d.tighter == "tie"));
}

#[test]
fn crossover_rejects_mixed_targets() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    assert!(matches!(crossover(&ctx, "thm1-lower", "carlson-lower", None, &s()), Err(VerifyError::MismatchedTarget(_))));
    let two_sided = crossover(&ctx, "thm1-lower", "thm1-upper", None, &s()).unwrap();
    assert!(two_sided.crossings.is_empty());
}

#[test]
fn sup_of_f_is_minus_inf_of_minus_f() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let f = ctx.parse("(8*sin(x/2)-sin(x))/x").unwrap();
    let g = ctx.parse("-(8*sin(x/2)-sin(x))/x").unwrap();
    for (k, nk) in [(Extremum::Sup, Extremum::Inf), (Extremum::Inf, Extremum::Sup)] {
        let a = best_constant(&ctx, &f, &half_pi(), k, &s()).unwrap();
        let b = best_constant(&ctx, &g, &half_pi(), nk, &s()).unwrap();
        assert!((a.value + b.value).abs() < 1e-12, "{} {}", a.value, b.value);
    }
}

#[test]
fn interior_extremum_is_refined() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let f = ctx.parse("x*(pi^2-x^2)/((pi^2+x^2)*sin(x))").unwrap();
    let r = best_constant(&ctx, &f, &Span::open(Ext::ZERO, Ext::pi()), Extremum::Inf, &s()).unwrap();
    assert!(!r.at_endpoint);
    assert!((r.arg - 2.12266).abs() < 1e-3);
    assert!((r.value - 0.93012).abs() < 1e-4);
    assert!(r.bracket_width < 1e-9);
}

#[test]
fn relative_error_on_an_unbounded_domain_is_cut_at_x_max() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let st = Settings::new(4000, 40, 40, 1e3).unwrap();
    let r = max_rel_error(&ctx, "alirezaei-upper", None, &st).unwrap();
    assert!((r.value - 0.0023).abs() < 5e-4, "{}", r.value);
    assert_eq!(r.asymptotic.len(), 7);
    assert!(r.interval.contains("1000"));
}

#[test]
fn dominance_table_covers_all_pairs() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let ids: Vec<String> = ["jordan-ozban", "jrw-thm2-Cl", "jrw-thm1-Dl"].iter().map(|s| s.to_string()).collect();
    let t = dominance_table(&ctx, &parse_target("sinc").unwrap(), Some(Side::Lower), Some(&ids), None, &s()).unwrap();
    assert_eq!(t.pairs.len(), 3);
    let xs: Vec<f64> = t.pairs.iter().flat_map(|p| p.crossings.iter().map(|c| c.x)).collect();
    for want in [1.19540, 0.92409] {
        assert!(xs.iter().any(|x| (x - want).abs() < 1e-3), "{want} in {xs:?}");
    }
}

#[test]
fn beta_regions_are_certified() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let st = Settings::new(400, 40, 40, 10.0).unwrap();
    for id in ["ivady-lower", "ivady-upper", "dragomir-upper", "alzer-lower", "alzer-upper", "gammathm-1", "thm1004-1", "mainthm-diag-lower"] {
        let e = ctx.entry(id).unwrap();
        let region = Region::new(e.region().unwrap(), DEFAULT_EPS, st.x_max).unwrap();
        let r = verify_beta_bound(&ctx, e, &region, &st).unwrap();
        assert_eq!(r.status, Status::Certified, "{id}: {r:?}");
    }
}

#[test]
fn reflection_route_agrees_with_the_gamma_route() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let consts = cat.const_table::<Ext>().unwrap();
    for id in ["mainthm-diag-lower", "mainthm-diag-upper"] {
        let e = ctx.entry(id).unwrap();
        for i in 1..20 {
            let x = Ext::from(i as f64 / 20.0);
            let y = Ext::ONE - x;
            let env = Env { constants: consts.clone(), ..Env::new() }.with("x", x).with("y", y);
            let bound = eval_expr(&e.expr, &env, Precision::default()).unwrap();
            let b = bounds_core::oracle::beta(x, y).unwrap();
            let gamma_route = match e.side {
                Side::Lower => b.value - bound.value,
                Side::Upper => bound.value - b.value,
            };
            let refl = diagonal_margin_by_reflection(&ctx, e, x).unwrap();
            assert!((refl.value - gamma_route).abs().to_f64() < 1e-60, "{id} at {}", x.to_f64());
        }
    }
}

#[test]
fn symmetric_bounds_have_symmetric_margins() {
    let cat = builtin_catalog();
    let consts = cat.const_table::<Ext>().unwrap();
    for id in ["ivady-lower", "ivady-upper", "dragomir-upper", "alzer-lower", "alzer-upper"] {
        let e = cat.lookup(id).unwrap();
        for (a, b) in [(0.1, 0.7), (0.35, 0.9), (0.5, 0.2)] {
            let at = |x: f64, y: f64| {
                let env = Env { constants: consts.clone(), ..Env::new() }.with("x", Ext::from(x)).with("y", Ext::from(y));
                eval_expr(&e.expr, &env, Precision::default()).unwrap().value
            };
            assert!((at(a, b) - at(b, a)).abs().to_f64() < 1e-60, "{id}");
        }
    }
}

#[test]
fn region_constants_are_reproduced() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    let p = Precision::default();
    let sq = Region::new(RegionKind::UnitSquare, DEFAULT_EPS, 10.0).unwrap();
    let alz = ctx.parse("(1-x*y*beta(x,y))*(1+x)*(1+y)/((1-x)*(1-y))").unwrap();
    let sup = region_extremum(&ctx, &alz, &sq, Extremum::Sup, 64, p).unwrap();
    let inf = region_extremum(&ctx, &alz, &sq, Extremum::Inf, 64, p).unwrap();
    let a = 2.0 * std::f64::consts::PI.powi(2) / 3.0 - 4.0;
    assert!((sup.boundary_limit.map_or(sup.value, |b| b.1) - a).abs() < 1e-4);
    assert!((inf.boundary_limit.map_or(inf.value, |b| b.1) - 1.0).abs() < 1e-4);
}
