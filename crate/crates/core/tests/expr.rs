use bounds_core::expr::{parse_expr, parse_expr_with, print_expr, BinOp, Env, Expr, Func, Number, ParseError, Var};
use bounds_core::{Precision, Real};
use proptest::prelude::*;

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u64..50).prop_map(|n| Expr::Number(Number::integer(n))),
        Just(Expr::Var(Var::X)),
        Just(Expr::Const("pi".into())),
    ];
    leaf.prop_recursive(5, 48, 3, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
        let unary = prop_oneof![
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Atan),
            Just(Func::Exp),
            Just(Func::Sqrt),
            Just(Func::Abs),
            Just(Func::Log)
        ];
        let binary = prop_oneof![Just(Func::Min), Just(Func::Max)];
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Binary(o, Box::new(a), Box::new(b))),
            (unary, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])),
            (binary, inner.clone(), inner).prop_map(|(f, a, b)| Expr::Call(f, vec![a, b])),
        ]
    })
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(e in arb_expr()) {
        let text = print_expr(&e);
        let back = parse_expr(&text).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
    }

    #[test]
    fn parse_then_print_is_a_fixed_point(e in arb_expr()) {
        let once = print_expr(&parse_expr(&print_expr(&e)).unwrap());
        let twice = print_expr(&parse_expr(&once).unwrap());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "[-+*/^()x0-9a-z., ]{0,40}") {
        let _ = parse_expr(&s);
    }
}

fn eval(text: &str, x: f64) -> f64 {
    let e = parse_expr(text).unwrap();
    bounds_core::expr::eval_expr(&e, &Env::new().with("x", bounds_core::Ext::from(x)), Precision::default())
        .unwrap()
        .value
        .to_f64()
}

#[test]
fn unary_minus_binds_looser_than_power() {
    assert_eq!(eval("-x^2", 3.0), -9.0);
    assert_eq!(eval("(-x)^2", 3.0), 9.0);
    assert_eq!(eval("2^3^2", 0.0), 512.0);
}

#[test]
fn rational_literals_are_exact() {
    match parse_expr("1/3").unwrap() {
        Expr::Number(n) => assert_eq!((n.num, n.den), (1, 3)),
        other => panic!("{other:?}"),
    }
    assert_eq!(eval("x^(1/3)", 8.0), 2.0);
}

#[test]
fn syntax_errors_carry_offsets() {
    let e = parse_expr("sin(x").unwrap_err();
    assert_eq!(e.offset(), Some(5));
    assert!(matches!(parse_expr("sin(x,x)"), Err(ParseError::Arity { .. })));
    assert!(matches!(parse_expr(""), Err(ParseError::Empty)));
    assert!(parse_expr("x +* 2").is_err());
}

#[test]
fn depth_and_length_limits() {
    let deep = format!("{}x{}", "(".repeat(200), ")".repeat(200));
    assert!(matches!(parse_expr(&deep), Err(ParseError::TooDeep { .. })));
    let long = "x+".repeat(3000) + "x";
    assert!(matches!(parse_expr(&long), Err(ParseError::TooLong(_))));
}

#[test]
fn unknown_names_become_parameters_unless_declared_constants() {
    let e = parse_expr("a*x").unwrap();
    assert_eq!(e.params(), ["a"]);
    let e = parse_expr_with("k*x", &|n| n == "k").unwrap();
    assert!(e.params().is_empty());
    assert_eq!(e.constants(), ["k"]);
}
