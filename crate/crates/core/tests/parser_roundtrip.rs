use proptest::prelude::*;
use wmog_core::assertion::{Assertion, ViewAtom};
use wmog_core::parser::{parse_bytes, parse_outline, Mode};
use wmog_core::render::render_outline;
use wmog_core::syntax::{
    Atomic, BinOp, Block, Cmp, CmpOp, Command, Config, Expr, ProofOutline, Register, Step, ThreadProgram, Tid,
};

const WRC: &str = include_str!("../../../corpus/wrc.outline");

fn config() -> Config {
    Config::new(
        vec![Tid(1), Tid(2), Tid(3)],
        vec!["x".into(), "y".into()],
        vec![
            Register { name: "r0".into(), owner: Tid(1) },
            Register { name: "r1".into(), owner: Tid(2) },
            Register { name: "r2".into(), owner: Tid(3) },
            Register { name: "r3".into(), owner: Tid(3) },
        ],
        vec![-1, 0, 1],
    )
    .unwrap()
}

fn owned(t: u32) -> Vec<&'static str> {
    match t {
        1 => vec!["r0"],
        2 => vec!["r1"],
        _ => vec!["r2", "r3"],
    }
}

fn expr(regs: Vec<&'static str>) -> impl Strategy<Value = Expr> {
    let leaf =
        prop_oneof![(-3i64..4).prop_map(Expr::Lit), proptest::sample::select(regs).prop_map(|r| Expr::Reg(r.into())),];
    leaf.prop_recursive(3, 8, 2, |inner| {
        (prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)], inner.clone(), inner)
            .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b)))
    })
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![Just(CmpOp::Eq), Just(CmpOp::Ne), Just(CmpOp::Lt), Just(CmpOp::Le), Just(CmpOp::Gt), Just(CmpOp::Ge)]
}

fn local_leaf(regs: Vec<&'static str>) -> impl Strategy<Value = Assertion> {
    (expr(regs.clone()), cmp_op(), expr(regs)).prop_map(|(a, op, b)| Assertion::Local(Cmp::new(a, op, b)))
}

fn view_atom() -> impl Strategy<Value = ViewAtom> {
    let var = proptest::sample::select(vec!["x", "y"]);
    let val = proptest::sample::select(vec![-1i64, 0, 1]);
    let tid = (1u32..4).prop_map(Tid);
    (0..6u8, var.clone(), val.clone(), var, val, tid).prop_map(|(k, x, v, y, u, t)| {
        let (var, cond_var) = (x.to_string(), y.to_string());
        match k {
            0 => ViewAtom::Impossible { var, value: v, thread: t },
            1 => ViewAtom::Definite { var, value: v, thread: t },
            2 => ViewAtom::MaxView { var, thread: t },
            3 => ViewAtom::MaxValue { var, value: v, thread: t },
            4 => ViewAtom::SyncedCondObs { cond_var, cond_value: u, var, value: v, thread: t },
            _ => ViewAtom::CondObs { var, value: v, thread: t },
        }
    })
}

fn compound(leaf: BoxedStrategy<Assertion>) -> impl Strategy<Value = Assertion> {
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Assertion::And),
            proptest::collection::vec(inner, 2..4).prop_map(Assertion::Or),
        ]
    })
}

fn assertion() -> impl Strategy<Value = Assertion> {
    let all = vec!["r0", "r1", "r2", "r3"];
    compound(
        prop_oneof![
            Just(Assertion::True),
            Just(Assertion::False),
            view_atom().prop_map(Assertion::View),
            local_leaf(all),
        ]
        .boxed(),
    )
}

fn guard(t: u32) -> impl Strategy<Value = Assertion> {
    compound(prop_oneof![Just(Assertion::True), local_leaf(owned(t))].boxed())
}

fn atomic(t: u32) -> impl Strategy<Value = Atomic> {
    let reg = proptest::sample::select(owned(t)).prop_map(String::from);
    let var = proptest::sample::select(vec!["x", "y"]).prop_map(String::from);
    prop_oneof![
        Just(Atomic::Skip),
        Just(Atomic::Fence),
        (reg.clone(), expr(owned(t))).prop_map(|(reg, expr)| Atomic::AssignLocal { reg, expr }),
        (reg, var.clone(), any::<bool>()).prop_map(|(reg, var, sync)| Atomic::Read { reg, var, sync }),
        (var, prop_oneof![(-1i64..2).prop_map(Expr::Lit), expr(owned(t))], any::<bool>())
            .prop_filter("literal writes stay in range", |(_, e, _)| e
                .as_literal()
                .is_none_or(|v| (-1..=1).contains(&v)))
            .prop_map(|(var, expr, sync)| Atomic::Write { var, expr, sync }),
    ]
}

fn block(t: u32, depth: u32) -> BoxedStrategy<Block> {
    let step: BoxedStrategy<Command> = if depth == 0 {
        atomic(t).prop_map(Command::Atomic).boxed()
    } else {
        prop_oneof![
            4 => atomic(t).prop_map(Command::Atomic),
            1 => (guard(t), block(t, depth - 1), block(t, depth - 1))
                .prop_map(|(cond, then_branch, else_branch)| Command::If { cond, then_branch, else_branch }),
            1 => (guard(t), assertion(), block(t, depth - 1))
                .prop_map(|(cond, invariant, body)| Command::While { cond, invariant, body }),
        ]
        .boxed()
    };
    (assertion(), proptest::collection::vec((step, assertion()), 0..4))
        .prop_map(|(pre, steps)| Block {
            pre,
            steps: steps.into_iter().map(|(command, post)| Step { command, post }).collect(),
        })
        .boxed()
}

fn outline() -> impl Strategy<Value = ProofOutline> {
    (assertion(), block(1, 1), block(2, 1), block(3, 1), assertion()).prop_map(|(pre, b1, b2, b3, post)| ProofOutline {
        config: config(),
        precondition: pre,
        threads: vec![
            ThreadProgram { tid: Tid(1), body: b1 },
            ThreadProgram { tid: Tid(2), body: b2 },
            ThreadProgram { tid: Tid(3), body: b3 },
        ],
        postcondition: post,
    })
}

#[test]
fn wrc_shape() {
    let o = parse_outline(WRC).unwrap();
    assert_eq!(o.threads.len(), 3);
    let commands: usize = o.threads.iter().map(|t| t.body.atomic_steps().len()).sum();
    assert_eq!(commands, 5);
    let assertions: usize = o.threads.iter().map(|t| t.body.assertions().len()).sum();
    assert_eq!(assertions, 8);
}

#[test]
fn wrc_round_trip() {
    let o = parse_outline(WRC).unwrap();
    assert_eq!(parse_outline(&render_outline(&o)).unwrap(), o);
}

#[test]
fn nested_connectives_are_parenthesized() {
    let src = "config { threads: 1; globals: x; registers: r@1; values: 0 1; }\n\
               thread 1 { { ([x = 0]@1 \\/ r = 1) /\\ ((up(x)@1 /\\ r = 0) \\/ [x !~ 1]@1) } skip; { true } }";
    let o = parse_outline(src).unwrap();
    let text = render_outline(&o);
    assert!(text.contains("([x = 0]@1 \\/ r = 1) /\\ ((up(x)@1 /\\ r = 0) \\/ [x !~ 1]@1)"), "{text}");
    assert_eq!(parse_outline(&text).unwrap(), o);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_then_parse_is_identity(o in outline()) {
        let text = render_outline(&o);
        let back = parse_outline(&text);
        prop_assert!(back.is_ok(), "{}\n{:?}", text, back);
        prop_assert_eq!(back.unwrap(), o);
    }

    #[test]
    fn parser_never_panics_on_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_bytes(&bytes, "fuzz", Mode::Strict);
        let _ = parse_bytes(&bytes, "fuzz", Mode::Lenient);
    }

    #[test]
    fn parser_errors_carry_spans(s in "[a-z0-9{}()\\[\\]<>=!~@:;/\\\\ +*-]{0,80}") {
        if let Err(e) = parse_outline(&s) {
            prop_assert!(e.span.line >= 1);
            prop_assert!(e.span.end_col > e.span.start_col);
        }
    }

    #[test]
    fn mutated_wrc_never_panics(cut in 0usize..900, junk in "[{}()\\[\\]<>=!/\\\\@]{0,3}") {
        let mut text = WRC.to_string();
        let cut = cut.min(text.len());
        if text.is_char_boundary(cut) {
            text.insert_str(cut, &junk);
        }
        let _ = parse_outline(&text);
    }
}
