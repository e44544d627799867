//! Random program generators.

use rand::seq::SliceRandom;
use rand::Rng;

use pdaudit::ir::{
    Callee, ClassDef, FieldDef, Literal, Local, MethodDef, Program, Statement, StmtKind,
};

pub const GEN_SOURCES: &str = r#"{ "entries": {
  "src.Api.getLocation": "Location",
  "src.Api.getDeviceId": "DeviceId"
} }"#;

pub const GEN_SINKS: &str = r#"{ "entries": [
  { "match": "snk.Net.*", "kind": "Network" },
  { "match": "snk.Ads.*", "kind": "ThirdParty", "name": "Ads" },
  { "match": "snk.Log.write", "kind": "Log" }
] }"#;

pub const GEN_SANITIZERS: &str = r#"{ "entries": ["san.Crypto.hash", "san.Crypto.mask"] }"#;

pub const GEN_LEXICON: &str = r#"{ "entries": { "email": "EmailAddress", "phone": "PhoneNumber" } }"#;

const LOCALS: [&str; 3] = ["$a", "$b", "$c"];

struct MethodShape {
    class: usize,
    arity: usize,
    len: usize,
}

fn pick_local(rng: &mut impl Rng, arity: usize) -> String {
    let n = LOCALS.len() + arity;
    let i = rng.gen_range(0..n);
    if i < LOCALS.len() {
        LOCALS[i].to_string()
    } else {
        format!("p{}", i - LOCALS.len())
    }
}

fn pick_def(rng: &mut impl Rng) -> &'static str {
    LOCALS.choose(rng).unwrap()
}

fn arg_list(rng: &mut impl Rng, arity: usize, n: usize) -> String {
    (0..n)
        .map(|_| pick_local(rng, arity))
        .collect::<Vec<_>>()
        .join(", ")
}

/// A loop-free PIR program in text form: at most `max_stmts` statements in
/// at most 6 methods, at most 3 forward jumps per method, and calls only
/// from lower-numbered to higher-numbered methods. Sources, sinks and
/// sanitizers are calls into classes outside the program.
pub fn loop_free_program(rng: &mut impl Rng, max_stmts: usize) -> String {
    loop_free_program_with(rng, max_stmts, false)
}

/// Like [`loop_free_program`]; with `sanitize_sources`, a source is often
/// followed by hashing its result in place.
pub fn loop_free_program_with(rng: &mut impl Rng, max_stmts: usize, sanitize_sources: bool) -> String {
    let n_methods = rng.gen_range(1..=6usize).min(max_stmts / 2).max(1);
    let mut budget = max_stmts;
    let mut shapes = Vec::new();
    for i in 0..n_methods {
        let left = n_methods - i - 1;
        let max_len = budget - 2 * left;
        let len = if left == 0 {
            rng.gen_range(2..=max_len.min(12))
        } else {
            rng.gen_range(2..=max_len.min(10))
        };
        budget -= len;
        shapes.push(MethodShape {
            class: rng.gen_range(0..2),
            arity: rng.gen_range(0..=2),
            len,
        });
    }

    let mut bodies: Vec<Vec<String>> = Vec::new();
    for (mi, shape) in shapes.iter().enumerate() {
        let mut jumps = 0;
        let mut body: Vec<String> = Vec::new();
        for i in 0..shape.len {
            let last = i + 1 == shape.len;
            let pending = body
                .last()
                .filter(|prev| sanitize_sources && prev.contains("call src.Api."))
                .map(|prev| prev.split(' ').next().unwrap_or_default().to_string());
            let s = if let Some(x) = pending.filter(|_| !last && rng.gen_bool(0.7)) {
                format!("{x} = call san.Crypto.hash({x})")
            } else if last {
                if rng.gen_bool(0.5) {
                    format!("return {}", pick_local(rng, shape.arity))
                } else {
                    "return".to_string()
                }
            } else {
                statement(rng, &shapes, mi, i, &mut jumps)
            };
            body.push(s);
        }
        bodies.push(body);
    }

    let mut out = String::new();
    for class in 0..2 {
        out.push_str(&format!("class g.C{class} extends java.lang.Object {{\n"));
        out.push_str("  field java.lang.Object f0;\n  field java.lang.Object f1;\n");
        for (mi, shape) in shapes.iter().enumerate().filter(|(_, s)| s.class == class) {
            let params = (0..shape.arity)
                .map(|k| format!("p{k}"))
                .collect::<Vec<_>>()
                .join(", ");
            out.push_str(&format!("  method void m{mi}({params}) {{\n"));
            for (i, s) in bodies[mi].iter().enumerate() {
                out.push_str(&format!("    {i}: {s}\n"));
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
    }
    out
}

fn statement(
    rng: &mut impl Rng,
    shapes: &[MethodShape],
    mi: usize,
    i: usize,
    jumps: &mut usize,
) -> String {
    let shape = &shapes[mi];
    let a = shape.arity;
    let len = shape.len;
    loop {
        let roll = rng.gen_range(0..100);
        let s = match roll {
            0..=7 => format!("{} = {}", pick_def(rng), ["1", "\"k\"", "null"].choose(rng).unwrap()),
            8..=19 => format!("{} = {}", pick_def(rng), pick_local(rng, a)),
            20..=29 => {
                let api = ["getLocation", "getDeviceId"].choose(rng).unwrap();
                format!("{} = call src.Api.{api}()", pick_def(rng))
            }
            30..=35 => {
                let w = ["email_field", "phoneBox", "title"].choose(rng).unwrap();
                format!("{} = call ui.Text.read() @widget(\"{w}\")", pick_def(rng))
            }
            36..=46 => {
                let f = ["hash", "mask"].choose(rng).unwrap();
                format!("{} = call san.Crypto.{f}({})", pick_def(rng), pick_local(rng, a))
            }
            47..=54 => {
                let n = rng.gen_range(0..=2);
                if rng.gen_bool(0.8) {
                    format!("{} = call lib.Util.mix({})", pick_def(rng), arg_list(rng, a, n))
                } else {
                    format!("call lib.Util.touch({})", arg_list(rng, a, n))
                }
            }
            55..=66 => {
                let n = rng.gen_range(1..=2);
                match rng.gen_range(0..4) {
                    0 => format!("call snk.Net.send({})", arg_list(rng, a, n)),
                    1 => format!("call snk.Ads.push({})", arg_list(rng, a, n)),
                    2 => format!("call snk.Log.write({})", arg_list(rng, a, 1)),
                    _ => format!("{} = call snk.Net.fetch({})", pick_def(rng), arg_list(rng, a, n)),
                }
            }
            67..=78 => {
                if mi + 1 >= shapes.len() {
                    continue;
                }
                let t = rng.gen_range(mi + 1..shapes.len());
                let ts = &shapes[t];
                let call = format!("call g.C{}.m{t}({})", ts.class, arg_list(rng, a, ts.arity));
                if rng.gen_bool(0.7) {
                    format!("{} = {call}", pick_def(rng))
                } else {
                    call
                }
            }
            79..=84 => format!(
                "{} = load g.C{}.f{}",
                pick_def(rng),
                rng.gen_range(0..2),
                rng.gen_range(0..2)
            ),
            85..=90 => format!(
                "store g.C{}.f{} = {}",
                rng.gen_range(0..2),
                rng.gen_range(0..2),
                pick_local(rng, a)
            ),
            _ => {
                if *jumps >= 3 || i + 2 >= len {
                    continue;
                }
                *jumps += 1;
                let target = rng.gen_range(i + 2..len);
                if rng.gen_bool(0.75) {
                    format!("if {} goto {target}", pick_local(rng, a))
                } else {
                    format!("goto {target}")
                }
            }
        };
        return s;
    }
}

/// A large synthetic program over the fixture registries: `methods`
/// methods of `per_method` statements each, with sources, sanitizers, sinks, fields, branches and
/// back edges.
pub fn large_program(rng: &mut impl Rng, methods: usize, per_method: usize) -> String {
    let classes = (methods / 10).max(1);
    let mut out = String::new();
    for c in 0..classes {
        out.push_str(&format!("class big.K{c} extends java.lang.Object {{\n"));
        out.push_str("  field java.lang.Object cache;\n");
        for m in (0..methods).filter(|m| m % classes == c) {
            out.push_str(&format!("  method java.lang.Object m{m}(p0) {{\n"));
            for i in 0..per_method {
                let s = if i + 1 == per_method {
                    "return $v0".to_string()
                } else {
                    let x = format!("$v{}", rng.gen_range(0..6));
                    let y = format!("$v{}", rng.gen_range(0..6));
                    // roughly one source per hundred statements, calls mostly to neighbours
                    match rng.gen_range(0..100) {
                        0 => format!("{x} = call android.location.LocationManager.getLastKnownLocation()"),
                        1..=4 => format!("{x} = call com.app.Crypto.hash({y})"),
                        5..=7 => format!("call com.net.Http.post({y})"),
                        8..=17 => format!("{x} = call lib.Util.mix({y}, p0)"),
                        18..=24 => {
                            let t = if rng.gen_bool(0.9) {
                                (m + rng.gen_range(1..=10)) % methods
                            } else {
                                rng.gen_range(0..methods)
                            };
                            format!("{x} = call big.K{}.m{t}({y})", t % classes)
                        }
                        25..=27 => format!("store big.K{c}.cache = {y}"),
                        28..=30 => format!("{x} = load big.K{}.cache", rng.gen_range(0..classes)),
                        31..=40 if i + 2 < per_method => {
                            format!("if {y} goto {}", rng.gen_range(0..per_method))
                        }
                        _ => format!("{x} = {y}"),
                    }
                };
                out.push_str(&format!("    {i}: {s}\n"));
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
    }
    out
}

fn ident(rng: &mut impl Rng) -> String {
    const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789$";
    let n = rng.gen_range(0..6);
    let mut s = String::new();
    s.push(*FIRST.choose(rng).unwrap() as char);
    for _ in 0..n {
        s.push(*REST.choose(rng).unwrap() as char);
    }
    // Keep clear of keywords and local-like names.
    if matches!(
        s.as_str(),
        "class" | "extends" | "field" | "method" | "call" | "load" | "store" | "if" | "goto"
            | "return" | "true" | "false" | "null"
    ) || (s.starts_with('p') && s.len() > 1 && s[1..].bytes().all(|b| b.is_ascii_digit()))
    {
        s.push('x');
    }
    s
}

fn qname(rng: &mut impl Rng) -> String {
    let parts = rng.gen_range(1..=3);
    (0..parts).map(|_| ident(rng)).collect::<Vec<_>>().join(".")
}

fn local(rng: &mut impl Rng, arity: usize) -> Local {
    if arity > 0 && rng.gen_bool(0.3) {
        Local::param(rng.gen_range(0..arity))
    } else {
        Local::new(&format!("${}", ident(rng))).unwrap()
    }
}

fn string_literal(rng: &mut impl Rng) -> String {
    const POOL: &[char] = &[
        'a', 'Z', '0', ' ', '"', '\\', '\n', '\t', '\r', 'é', '→', '\u{1}', '#', '}', '@', ':',
    ];
    let n = rng.gen_range(0..8);
    (0..n).map(|_| *POOL.choose(rng).unwrap()).collect()
}

fn atom(rng: &mut impl Rng) -> String {
    match rng.gen_range(0..5) {
        0 => "true".into(),
        1 => "false".into(),
        2 => "null".into(),
        3 => format!("{}", rng.gen_range(-1000i64..1000)),
        _ => format!("{}.{}", rng.gen_range(-50i64..50), rng.gen_range(0..1000)),
    }
}

/// An arbitrary well-formed program AST: loops, inheritance, odd
/// identifiers and escaped strings included.
pub fn arbitrary_program(rng: &mut impl Rng) -> Program {
    let n_classes = rng.gen_range(0..4);
    let mut classes: Vec<ClassDef> = Vec::new();
    let mut names = std::collections::BTreeSet::new();
    for _ in 0..n_classes {
        let name = qname(rng);
        if !names.insert(name.clone()) {
            continue;
        }
        let fields = (0..rng.gen_range(0..3))
            .map(|_| FieldDef {
                ty: qname(rng),
                name: ident(rng),
            })
            .collect();
        let methods = (0..rng.gen_range(0..4))
            .map(|_| {
                let arity = rng.gen_range(0..3);
                let len = rng.gen_range(0..8);
                MethodDef {
                    ret: qname(rng),
                    name: ident(rng),
                    params: (0..arity).map(Local::param).collect(),
                    body: (0..len)
                        .map(|_| Statement::new(arbitrary_stmt(rng, arity, len)))
                        .collect(),
                }
            })
            .collect();
        classes.push(ClassDef {
            name,
            superclass: qname(rng),
            fields,
            methods,
        });
    }
    Program { classes }
}

fn arbitrary_callee(rng: &mut impl Rng) -> Callee {
    Callee::new(qname(rng), ident(rng))
}

fn arbitrary_args(rng: &mut impl Rng, arity: usize) -> Vec<Local> {
    (0..rng.gen_range(0..4)).map(|_| local(rng, arity)).collect()
}

fn arbitrary_widget(rng: &mut impl Rng) -> Option<String> {
    rng.gen_bool(0.3).then(|| string_literal(rng))
}

fn arbitrary_stmt(rng: &mut impl Rng, arity: usize, len: usize) -> StmtKind {
    match rng.gen_range(0..9) {
        0 => StmtKind::AssignConst {
            lhs: local(rng, arity),
            value: if rng.gen_bool(0.5) {
                Literal::Str(string_literal(rng))
            } else {
                Literal::Atom(atom(rng))
            },
        },
        1 => StmtKind::AssignCopy {
            lhs: local(rng, arity),
            rhs: local(rng, arity),
        },
        2 => StmtKind::AssignCall {
            lhs: local(rng, arity),
            callee: arbitrary_callee(rng),
            args: arbitrary_args(rng, arity),
            widget: arbitrary_widget(rng),
        },
        3 => StmtKind::AssignFieldLoad {
            lhs: local(rng, arity),
            class: qname(rng),
            field: ident(rng),
        },
        4 => StmtKind::FieldStore {
            class: qname(rng),
            field: ident(rng),
            rhs: local(rng, arity),
        },
        5 => StmtKind::Call {
            callee: arbitrary_callee(rng),
            args: arbitrary_args(rng, arity),
            widget: arbitrary_widget(rng),
        },
        6 => StmtKind::If {
            cond: local(rng, arity),
            target: rng.gen_range(0..len),
        },
        7 => StmtKind::Goto {
            target: rng.gen_range(0..len),
        },
        _ => StmtKind::Return {
            value: rng.gen_bool(0.5).then(|| local(rng, arity)),
        },
    }
}
