//! Random MiniPy programs for property tests. Programs terminate: loops
//! are `for` over small constant ranges, or `while` loops guarded by a
//! counter.

use proptest::prelude::*;

use cogniview::syntax::{BinOp, Expr, ExprKind, FunctionDef, Item, ModuleAst, Span, Stmt, StmtKind, Target, UnOp};

const VARS: &[&str] = &["a", "b", "c", "d"];
const OPS: &[BinOp] = &[
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::FloorDiv,
    BinOp::Mod,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::And,
    BinOp::Or,
];

fn e(kind: ExprKind) -> Expr {
    Expr::new(kind, Span::default())
}

fn s(kind: StmtKind) -> Stmt {
    Stmt::new(kind, Span::default())
}

fn name(n: &str) -> Expr {
    e(ExprKind::Name(n.to_string()))
}

pub fn arb_leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0i64..20).prop_map(|v| e(ExprKind::Int(v))),
        prop::sample::select(vec!["", "x", "ab"]).prop_map(|v| e(ExprKind::Str(v.to_string()))),
        any::<bool>().prop_map(|v| e(ExprKind::Bool(v))),
        Just(e(ExprKind::None)),
        prop::sample::select(VARS).prop_map(name),
    ]
}

pub fn arb_expr() -> impl Strategy<Value = Expr> {
    arb_leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(OPS), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| e(ExprKind::Binary(op, Box::new(l), Box::new(r)))),
            inner.clone().prop_map(|x| e(ExprKind::Unary(UnOp::Neg, Box::new(x)))),
            inner.clone().prop_map(|x| e(ExprKind::Unary(UnOp::Not, Box::new(x)))),
            prop::collection::vec(inner.clone(), 0..3).prop_map(|xs| e(ExprKind::List(xs))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| e(ExprKind::Index(Box::new(a), Box::new(b)))),
            inner.prop_map(|x| e(ExprKind::Call("len".into(), vec![x]))),
        ]
    })
}

fn arb_simple(in_loop: bool, in_fn: bool) -> BoxedStrategy<Stmt> {
    let mut options: Vec<BoxedStrategy<Stmt>> = vec![
        (prop::sample::select(VARS), arb_expr())
            .prop_map(|(v, x)| s(StmtKind::Assign { target: Target::Name(v.to_string()), value: x }))
            .boxed(),
        (prop::sample::select(VARS), arb_expr(), arb_expr())
            .prop_map(|(v, i, x)| s(StmtKind::Assign { target: Target::Index(v.to_string(), i), value: x }))
            .boxed(),
        prop::collection::vec(arb_expr(), 0..3)
            .prop_map(|args| s(StmtKind::Expr(e(ExprKind::Call("print".into(), args)))))
            .boxed(),
        Just(s(StmtKind::Pass)).boxed(),
    ];
    if in_loop {
        options.push(Just(s(StmtKind::Break)).boxed());
        options.push(Just(s(StmtKind::Continue)).boxed());
    }
    if in_fn {
        options.push(arb_expr().prop_map(|x| s(StmtKind::Return(Some(x)))).boxed());
    }
    prop::strategy::Union::new(options).boxed()
}

pub fn arb_block(depth: u32, in_loop: bool, in_fn: bool) -> BoxedStrategy<Vec<Stmt>> {
    let stmt = arb_stmt(depth, in_loop, in_fn);
    prop::collection::vec(stmt, 1..4).boxed()
}

fn arb_stmt(depth: u32, in_loop: bool, in_fn: bool) -> BoxedStrategy<Stmt> {
    if depth == 0 {
        return arb_simple(in_loop, in_fn);
    }
    let d = depth - 1;
    prop_oneof![
        3 => arb_simple(in_loop, in_fn),
        1 => (
            prop::collection::vec((arb_expr(), arb_block(d, in_loop, in_fn)), 1..3),
            prop::option::of(arb_block(d, in_loop, in_fn))
        )
            .prop_map(|(arms, else_block)| s(StmtKind::If { arms, else_block })),
        1 => (prop::sample::select(VARS), 1i64..4, arb_block(d, true, in_fn)).prop_map(|(v, n, body)| {
            s(StmtKind::For { var: v.to_string(), args: vec![e(ExprKind::Int(n))], body })
        }),
    ]
    .boxed()
}

/// A counter-bounded `while` loop: `k = 0` then `while k < n: k = k + 1 ...`.
pub fn bounded_while(body: Vec<Stmt>, n: i64) -> Vec<Stmt> {
    let k = || "k".to_string();
    let mut inner = vec![s(StmtKind::Assign {
        target: Target::Name(k()),
        value: e(ExprKind::Binary(BinOp::Add, Box::new(name("k")), Box::new(e(ExprKind::Int(1))))),
    })];
    inner.extend(body);
    vec![
        s(StmtKind::Assign { target: Target::Name(k()), value: e(ExprKind::Int(0)) }),
        s(StmtKind::While {
            cond: e(ExprKind::Binary(BinOp::Lt, Box::new(name("k")), Box::new(e(ExprKind::Int(n))))),
            body: inner,
        }),
    ]
}

/// A function over two parameters whose body ends in a return.
pub fn arb_function(fname: &'static str) -> impl Strategy<Value = FunctionDef> {
    (arb_block(2, false, true), arb_expr(), prop::option::of(arb_block(1, true, true))).prop_map(
        move |(mut body, ret, looped)| {
            if let Some(lb) = looped {
                body.extend(bounded_while(lb, 3));
            }
            body.push(s(StmtKind::Return(Some(ret))));
            FunctionDef {
                name: fname.to_string(),
                params: vec!["a".into(), "b".into()],
                body: body.into_iter().map(Item::Stmt).collect(),
                span: Span::default(),
            }
        },
    )
}

/// One or two functions plus top-level statements calling them.
pub fn arb_module() -> impl Strategy<Value = ModuleAst> {
    (arb_function("f"), prop::option::of(arb_function("h")), arb_block(1, false, false), arb_expr(), arb_expr())
        .prop_map(|(f, h, top, x, y)| {
            let mut items = vec![Item::Function(f)];
            if let Some(h) = h {
                items.push(Item::Function(h));
            }
            items.extend(top.into_iter().map(Item::Stmt));
            let call = e(ExprKind::Call("f".into(), vec![x, y]));
            items.push(Item::Stmt(s(StmtKind::Expr(e(ExprKind::Call("print".into(), vec![call]))))));
            ModuleAst { items }
        })
}

/// A tail `if`/`else` nest of the given depth whose leaves return.
pub fn arb_guard_function() -> impl Strategy<Value = FunctionDef> {
    fn nest(depth: u32) -> BoxedStrategy<Vec<Stmt>> {
        let leaf = (arb_block(0, false, false), arb_expr())
            .prop_map(|(mut pre, r)| {
                pre.retain(|st| !matches!(st.kind, StmtKind::Pass));
                pre.push(s(StmtKind::Return(Some(r))));
                pre
            })
            .boxed();
        if depth == 0 {
            return leaf;
        }
        (arb_expr(), nest(depth - 1), prop_oneof![leaf.clone(), nest(depth - 1)])
            .prop_map(|(c, then, other)| vec![s(StmtKind::If { arms: vec![(c, then)], else_block: Some(other) })])
            .boxed()
    }
    (1u32..4).prop_flat_map(nest).prop_map(|body| FunctionDef {
        name: "g".into(),
        params: vec!["a".into(), "b".into()],
        body: body.into_iter().map(Item::Stmt).collect(),
        span: Span::default(),
    })
}
