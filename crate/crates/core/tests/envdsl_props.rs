use lvhybrid::envdsl::{parse, print, BinOp, Constant, Expr, Func, Var};
use proptest::prelude::*;

fn leaf(dim: u8) -> BoxedStrategy<Expr> {
    let mut options = vec![
        (0.0f64..100.0).prop_map(Expr::Literal).boxed(),
        (0u32..1000).prop_map(|n| Expr::Literal(n as f64)).boxed(),
        prop_oneof![Just(Constant::Pi), Just(Constant::E)]
            .prop_map(Expr::Const)
            .boxed(),
        Just(Expr::Var(Var::X)).boxed(),
    ];
    if dim == 2 {
        options.push(Just(Expr::Var(Var::Y)).boxed());
    }
    proptest::strategy::Union::new(options).boxed()
}

fn expr(dim: u8) -> impl Strategy<Value = Expr> {
    leaf(dim).prop_recursive(5, 48, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow),
        ];
        let unary = prop_oneof![
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Exp),
            Just(Func::Abs),
            Just(Func::Tanh),
        ];
        let binary_fn = prop_oneof![Just(Func::Min), Just(Func::Max)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::Binary(
                o,
                Box::new(l),
                Box::new(r)
            )),
            (unary, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])),
            (binary_fn, inner.clone(), inner).prop_map(|(f, a, b)| Expr::Call(f, vec![a, b])),
        ]
    })
}

proptest! {
    #[test]
    fn print_then_parse_recovers_the_tree(e in expr(2)) {
        let text = e.to_string();
        let p = parse(&text, 2).unwrap();
        prop_assert_eq!(p.expr(), &e);
        prop_assert_eq!(print(&p), text);
    }

    #[test]
    fn printing_is_a_fixed_point_and_preserves_values(e in expr(1), x in 0.0f64..1.0) {
        let p = parse(&e.to_string(), 1).unwrap();
        let again = parse(&print(&p), 1).unwrap();
        prop_assert_eq!(print(&again), print(&p));
        match (p.eval(&[x]), again.eval(&[x])) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn evaluation_is_deterministic(e in expr(2), x in 0.0f64..2.0, y in 0.0f64..2.0) {
        let p = parse(&e.to_string(), 2).unwrap();
        let a = p.eval(&[x, y]).map(f64::to_bits);
        let b = p.eval(&[x, y]).map(f64::to_bits);
        prop_assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn whitespace_does_not_matter(e in expr(1)) {
        let text = e.to_string();
        let spaced: String = text.chars().flat_map(|c| match c {
            '(' | ')' | ',' | '+' | '*' | '/' | '^' => vec![' ', c, ' '],
            _ => vec![c],
        }).collect();
        let (a, b) = (parse(&spaced, 1).unwrap(), parse(&text, 1).unwrap());
        prop_assert_eq!(a.expr(), b.expr());
    }

    #[test]
    fn literals_round_trip_exactly(v in proptest::num::f64::POSITIVE | proptest::num::f64::ZERO) {
        let p = parse(&format!("{v:?}"), 1).unwrap();
        prop_assert_eq!(p.eval(&[0.5]).unwrap().to_bits(), v.to_bits());
    }
}

#[test]
fn garbage_is_rejected_not_panicking() {
    for text in [
        "",
        "   ",
        "(",
        "1 +",
        "sin",
        "sin(1, 2)",
        "max(1)",
        "2 ** 3",
        "1e",
        "x y",
        "z",
        "1..2",
    ] {
        assert!(parse(text, 1).is_err(), "{text:?} should not parse");
    }
}
