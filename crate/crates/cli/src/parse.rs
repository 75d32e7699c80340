//! Surface syntax: s-expressions to ASTs. The printer lives with the AST
//! types (their `Display` impls); `print_program` covers whole files.

use std::collections::HashMap;
use std::fmt::Write as _;

use futgraph::elaborate::{UType, UValue};
use futgraph::syntax::*;
use futgraph::vstruct::vs_is_vpath;

use crate::sexp::{err, read_all, Loc, ParseError, Sexp};

type Result<T> = std::result::Result<T, ParseError>;

/// A parsed `.gf` file. Abbreviations and definitions are expanded while
/// parsing, so later forms see earlier definitions inlined.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub defs: Vec<(Name, Expr)>,
    pub main: Option<Expr>,
    pub utypes: Vec<UType>,
    pub uvalues: Vec<UValue>,
    pub fuel: Option<usize>,
    pub budget: Option<u64>,
}

impl Program {
    pub fn def(&self, name: &str) -> Option<&Expr> {
        self.defs.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }
}

const KEYWORDS: &[&str] = &[
    "V", "1", "prod", "corec", "triv", "pair", "fst", "snd", "root", "empty", "seq", "par", "or", "rec", "spawn",
    "touch", "pi", "gapp", "new", "unit", "int", "float", "fun", "sum", "fut", "lam", "vapp", "app", "inl", "inr",
    "case", "roll", "unroll", "future", "let", "ann", "val", "handle", "if",
];

#[derive(Default)]
struct Env {
    vstypes: HashMap<Name, VsType>,
    types: HashMap<Name, (Option<Name>, Con)>,
    defs: HashMap<Name, Expr>,
    /// Locally bound names, innermost last; these shadow abbreviations.
    locals: Vec<Name>,
}

impl Env {
    fn bound(&self, n: &str) -> bool {
        self.locals.iter().any(|l| l == n)
    }

    fn scoped<T>(&mut self, names: &[&Name], f: impl FnOnce(&mut Env) -> Result<T>) -> Result<T> {
        let k = self.locals.len();
        self.locals.extend(names.iter().map(|n| (*n).clone()));
        let r = f(self);
        self.locals.truncate(k);
        r
    }
}

fn arity(loc: Loc, head: &str, args: &[Sexp], n: usize) -> Result<()> {
    if args.len() == n {
        Ok(())
    } else {
        err(loc, format!("'{}' takes {} arguments, found {}", head, n, args.len()))
    }
}

fn name(s: &Sexp) -> Result<Name> {
    match s.atom() {
        Some(a) if !a.is_empty() && !a.starts_with(|c: char| c.is_ascii_digit() || c == '-') => Ok(a.to_string()),
        _ => err(s.loc(), format!("expected a name, found {}", s)),
    }
}

fn avail(s: &Sexp) -> Result<Avail> {
    match s.atom() {
        Some("+") => Ok(Avail::Av),
        Some("-") => Ok(Avail::Unav),
        _ => err(s.loc(), format!("expected + or -, found {}", s)),
    }
}

/// `(x T)` binder pairs.
fn binder<T>(env: &mut Env, s: &Sexp, what: &str, f: impl Fn(&mut Env, &Sexp) -> Result<T>) -> Result<(Name, T)> {
    match s {
        Sexp::List(items, _) if items.len() == 2 => Ok((name(&items[0])?, f(env, &items[1])?)),
        _ => err(s.loc(), format!("expected ({} TYPE), found {}", what, s)),
    }
}

fn vsty(env: &mut Env, s: &Sexp) -> Result<VsType> {
    if let Some(a) = s.atom() {
        return Ok(match a {
            "V" => VsType::V,
            "1" => VsType::Unit,
            _ if env.bound(a) => VsType::Var(a.to_string()),
            _ => match env.vstypes.get(a) {
                Some(t) => t.clone(),
                None => VsType::Var(name(s)?),
            },
        });
    }
    let Some((head, args)) = s.form() else { return err(s.loc(), "expected a vertex structure type") };
    match head {
        "prod" => {
            arity(s.loc(), head, args, 4)?;
            Ok(VsType::prod(vsty(env, &args[0])?, avail(&args[1])?, vsty(env, &args[2])?, avail(&args[3])?))
        }
        "corec" => {
            arity(s.loc(), head, args, 2)?;
            let t = name(&args[0])?;
            let body = env.scoped(&[&t], |env| vsty(env, &args[1]))?;
            Ok(VsType::Corec(t, Box::new(body)))
        }
        _ => err(s.loc(), format!("unknown vertex structure type form '{}'", head)),
    }
}

fn gen_name(s: &Sexp) -> Result<Gen> {
    match s.atom().and_then(|a| a.strip_prefix('g')).and_then(|n| n.parse().ok()) {
        Some(n) => {
            reserve_ids(n + 1);
            Ok(Gen(n))
        }
        None => err(s.loc(), format!("expected a generator gN, found {}", s)),
    }
}

fn vs(env: &mut Env, s: &Sexp) -> Result<Vs> {
    if let Some(a) = s.atom() {
        return Ok(if a == "triv" { Vs::Unit } else { Vs::Var(name(s)?) });
    }
    let Some((head, args)) = s.form() else { return err(s.loc(), "expected a vertex structure") };
    match head {
        "pair" => {
            arity(s.loc(), head, args, 2)?;
            Ok(Vs::pair(vs(env, &args[0])?, vs(env, &args[1])?))
        }
        "fst" | "snd" => {
            arity(s.loc(), head, args, 1)?;
            let v = vs(env, &args[0])?;
            Ok(if head == "fst" { Vs::fst(v) } else { Vs::snd(v) })
        }
        "root" => {
            arity(s.loc(), head, args, 2)?;
            Ok(Vs::Root(vsty(env, &args[1])?, gen_name(&args[0])?))
        }
        _ => err(s.loc(), format!("unknown vertex structure form '{}'", head)),
    }
}

fn graph(env: &mut Env, s: &Sexp) -> Result<GraphType> {
    use GraphType as G;
    if let Some(a) = s.atom() {
        return Ok(if a == "empty" { G::Empty } else { G::Var(name(s)?) });
    }
    let Some((head, args)) = s.form() else { return err(s.loc(), "expected a graph type") };
    let two = |env: &mut Env| -> Result<(GraphType, GraphType)> {
        arity(s.loc(), head, args, 2)?;
        Ok((graph(env, &args[0])?, graph(env, &args[1])?))
    };
    match head {
        "seq" => two(env).map(|(a, b)| G::seq(a, b)),
        "par" => two(env).map(|(a, b)| G::par(a, b)),
        "or" => two(env).map(|(a, b)| G::or(a, b)),
        "rec" => {
            arity(s.loc(), head, args, 2)?;
            Ok(G::rec(&name(&args[0])?, graph(env, &args[1])?))
        }
        "spawn" => {
            arity(s.loc(), head, args, 2)?;
            Ok(G::spawn(graph(env, &args[0])?, vs(env, &args[1])?))
        }
        "touch" => {
            arity(s.loc(), head, args, 1)?;
            Ok(G::Touch(vs(env, &args[0])?))
        }
        "pi" => {
            arity(s.loc(), head, args, 3)?;
            let (uf, tf) = binder(env, &args[0], "u", vsty)?;
            let (ut, tt) = binder(env, &args[1], "u", vsty)?;
            Ok(G::pi(&uf, tf, &ut, tt, graph(env, &args[2])?))
        }
        "gapp" => {
            arity(s.loc(), head, args, 3)?;
            Ok(G::app(graph(env, &args[0])?, vs(env, &args[1])?, vs(env, &args[2])?))
        }
        "new" => {
            arity(s.loc(), head, args, 3)?;
            Ok(G::New(name(&args[0])?, vsty(env, &args[1])?, Box::new(graph(env, &args[2])?)))
        }
        _ => err(s.loc(), format!("unknown graph type form '{}'", head)),
    }
}

fn fun_header(env: &mut Env, args: &[Sexp]) -> Result<(Name, VsType, Name, VsType)> {
    let (uf, tf) = binder(env, &args[0], "u", vsty)?;
    let (ut, tt) = binder(env, &args[1], "u", vsty)?;
    Ok((uf, tf, ut, tt))
}

fn con(env: &mut Env, s: &Sexp) -> Result<Con> {
    if let Some(a) = s.atom() {
        return Ok(match a {
            "unit" => Con::Unit,
            "int" => Con::Base(BaseTy::Int),
            "float" => Con::Base(BaseTy::Float),
            _ if env.bound(a) => Con::Var(a.to_string()),
            _ => match env.types.get(a) {
                Some((None, c)) => c.clone(),
                Some((Some(_), _)) => return err(s.loc(), format!("type '{}' expects a vertex structure", a)),
                None => Con::Var(name(s)?),
            },
        });
    }
    let Some((head, args)) = s.form() else { return err(s.loc(), "expected a type") };
    let two = |env: &mut Env| -> Result<(Con, Con)> {
        arity(s.loc(), head, args, 2)?;
        Ok((con(env, &args[0])?, con(env, &args[1])?))
    };
    match head {
        "fun" => {
            arity(s.loc(), head, args, 5)?;
            let (uf, tf, ut, tt) = fun_header(env, args)?;
            Ok(Con::Fun(Box::new(FunTy {
                uf,
                tf,
                ut,
                tt,
                dom: con(env, &args[2])?,
                cod: con(env, &args[3])?,
                eff: graph(env, &args[4])?,
            })))
        }
        "prod" => two(env).map(|(a, b)| Con::prod(a, b)),
        "sum" => two(env).map(|(a, b)| Con::sum(a, b)),
        "fut" => {
            arity(s.loc(), head, args, 2)?;
            Ok(Con::fut(con(env, &args[0])?, vs(env, &args[1])?))
        }
        "rec" => {
            arity(s.loc(), head, args, 4)?;
            let tyvar = name(&args[0])?;
            let (u, uty) = binder(env, &args[1], "u", vsty)?;
            let body = env.scoped(&[&tyvar], |env| con(env, &args[2]))?;
            Ok(Con::Rec { tyvar, u, uty, body: Box::new(body), arg: vs(env, &args[3])? })
        }
        "lam" => {
            arity(s.loc(), head, args, 2)?;
            let (u, t) = binder(env, &args[0], "u", vsty)?;
            Ok(Con::Lam(u, t, Box::new(con(env, &args[1])?)))
        }
        "vapp" => {
            arity(s.loc(), head, args, 2)?;
            Ok(Con::app_vs(con(env, &args[0])?, vs(env, &args[1])?))
        }
        _ if !env.bound(head) && env.types.contains_key(head) => {
            arity(s.loc(), head, args, 1)?;
            let (param, body) = env.types[head].clone();
            let Some(u) = param else { return err(s.loc(), format!("type '{}' takes no argument", head)) };
            Ok(subst_vs_in(&body, &vs(env, &args[0])?, &u))
        }
        _ => err(s.loc(), format!("unknown type form '{}'", head)),
    }
}

fn lit(a: &str) -> Option<Lit> {
    if let Ok(n) = a.parse::<i64>() {
        return Some(Lit::Int(n));
    }
    if a.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '.') {
        if let Ok(x) = a.parse::<f64>() {
            return Some(Lit::Float(F64(x)));
        }
    }
    None
}

fn fun_expr(env: &mut Env, s: &Sexp, args: &[Sexp]) -> Result<FunExpr> {
    arity(s.loc(), "fun", args, 6)?;
    let (uf, tf, ut, tt) = fun_header(env, args)?;
    let f = name(&args[2])?;
    let (x, dom) = binder(env, &args[3], "x", con)?;
    let cod = con(env, &args[4])?;
    let body = env.scoped(&[&f, &x], |env| expr(env, &args[5]))?;
    Ok(FunExpr { uf, tf, ut, tt, f, x, dom, cod, body })
}

fn expr(env: &mut Env, s: &Sexp) -> Result<Expr> {
    if let Some(a) = s.atom() {
        if let Some(l) = lit(a) {
            return Ok(Expr::Lit(l));
        }
        let n = name(s)?;
        if !env.bound(&n) {
            if let Some(e) = env.defs.get(&n) {
                return Ok(e.clone());
            }
        }
        return Ok(Expr::Var(n));
    }
    let Some((head, args)) = s.form() else { return err(s.loc(), "expected an expression") };
    let one = |env: &mut Env| -> Result<Box<Expr>> {
        arity(s.loc(), head, args, 1)?;
        Ok(Box::new(expr(env, &args[0])?))
    };
    let two = |env: &mut Env| -> Result<(Box<Expr>, Box<Expr>)> {
        arity(s.loc(), head, args, 2)?;
        Ok((Box::new(expr(env, &args[0])?), Box::new(expr(env, &args[1])?)))
    };
    let branch = |env: &mut Env, b: &Sexp| -> Result<(Name, Expr)> {
        match b {
            Sexp::List(items, _) if items.len() == 2 => {
                let x = name(&items[0])?;
                let e = env.scoped(&[&x], |env| expr(env, &items[1]))?;
                Ok((x, e))
            }
            _ => err(b.loc(), format!("expected a case branch (x E), found {}", b)),
        }
    };
    Ok(match head {
        "triv" => {
            arity(s.loc(), head, args, 0)?;
            Expr::Triv
        }
        "fun" => Expr::Fun(Box::new(fun_expr(env, s, args)?)),
        "app" => {
            arity(s.loc(), head, args, 4)?;
            Expr::App(
                Box::new(expr(env, &args[0])?),
                vs(env, &args[1])?,
                vs(env, &args[2])?,
                Box::new(expr(env, &args[3])?),
            )
        }
        "pair" => two(env).map(|(a, b)| Expr::Pair(a, b))?,
        "par" => two(env).map(|(a, b)| Expr::Par(a, b))?,
        "fst" => Expr::Fst(one(env)?),
        "snd" => Expr::Snd(one(env)?),
        "inl" => Expr::InL(one(env)?),
        "inr" => Expr::InR(one(env)?),
        "roll" => Expr::Roll(one(env)?),
        "unroll" => Expr::Unroll(one(env)?),
        "touch" => Expr::Touch(one(env)?),
        "case" => {
            arity(s.loc(), head, args, 3)?;
            let scr = expr(env, &args[0])?;
            let (x, l) = branch(env, &args[1])?;
            let (y, r) = branch(env, &args[2])?;
            Expr::Case(Box::new(scr), x, Box::new(l), y, Box::new(r))
        }
        "if" => {
            arity(s.loc(), head, args, 3)?;
            let c = expr(env, &args[0])?;
            let hole = "_".to_string();
            let t = env.scoped(&[&hole], |env| expr(env, &args[1]))?;
            let e = env.scoped(&[&hole], |env| expr(env, &args[2]))?;
            Expr::Case(Box::new(c), hole.clone(), Box::new(t), hole, Box::new(e))
        }
        "future" => {
            arity(s.loc(), head, args, 2)?;
            Expr::Future(vs(env, &args[0])?, Box::new(expr(env, &args[1])?))
        }
        "new" => {
            arity(s.loc(), head, args, 3)?;
            Expr::New(name(&args[0])?, vsty(env, &args[1])?, Box::new(expr(env, &args[2])?))
        }
        "let" => {
            arity(s.loc(), head, args, 3)?;
            let x = name(&args[0])?;
            let a = expr(env, &args[1])?;
            let b = env.scoped(&[&x], |env| expr(env, &args[2]))?;
            Expr::Let(x, Box::new(a), Box::new(b))
        }
        "ann" => {
            arity(s.loc(), head, args, 2)?;
            Expr::Ann(Box::new(expr(env, &args[0])?), con(env, &args[1])?)
        }
        "val" => {
            arity(s.loc(), head, args, 1)?;
            Expr::Val(Box::new(value(env, &args[0])?))
        }
        op => match PrimOp::from_symbol(op) {
            Some(p) => two(env).map(|(a, b)| Expr::Prim(p, a, b))?,
            None => return err(s.loc(), format!("unknown expression form '{}'", op)),
        },
    })
}

fn value(env: &mut Env, s: &Sexp) -> Result<Value> {
    if let Some(a) = s.atom() {
        return match lit(a) {
            Some(l) => Ok(Value::Lit(l)),
            None => err(s.loc(), format!("expected a value, found {}", a)),
        };
    }
    let Some((head, args)) = s.form() else { return err(s.loc(), "expected a value") };
    let one = |env: &mut Env| -> Result<Box<Value>> {
        arity(s.loc(), head, args, 1)?;
        Ok(Box::new(value(env, &args[0])?))
    };
    Ok(match head {
        "triv" => {
            arity(s.loc(), head, args, 0)?;
            Value::Triv
        }
        "fun" => Value::Fun(Box::new(fun_expr(env, s, args)?)),
        "pair" => {
            arity(s.loc(), head, args, 2)?;
            Value::pair(value(env, &args[0])?, value(env, &args[1])?)
        }
        "inl" => Value::InL(one(env)?),
        "inr" => Value::InR(one(env)?),
        "roll" => Value::Roll(one(env)?),
        "handle" => {
            arity(s.loc(), head, args, 2)?;
            let v = vs(env, &args[0])?;
            let Some(p) = vs_is_vpath(&v) else { return err(args[0].loc(), "handles need a closed vertex path") };
            Value::Handle(p, Box::new(value(env, &args[1])?))
        }
        _ => return err(s.loc(), format!("unknown value form '{}'", head)),
    })
}

fn utype(env: &mut Env, s: &Sexp) -> Result<UType> {
    if let Some(a) = s.atom() {
        return Ok(match a {
            "unit" => UType::Unit,
            "int" => UType::Base(BaseTy::Int),
            "float" => UType::Base(BaseTy::Float),
            _ => UType::Var(name(s)?),
        });
    }
    let Some((head, args)) = s.form() else { return err(s.loc(), "expected an unannotated type") };
    let two = |env: &mut Env| -> Result<(UType, UType)> {
        arity(s.loc(), head, args, 2)?;
        Ok((utype(env, &args[0])?, utype(env, &args[1])?))
    };
    match head {
        "prod" => two(env).map(|(a, b)| UType::prod(a, b)),
        "sum" => two(env).map(|(a, b)| UType::sum(a, b)),
        "fut" => {
            arity(s.loc(), head, args, 1)?;
            Ok(UType::fut(utype(env, &args[0])?))
        }
        "rec" => {
            arity(s.loc(), head, args, 2)?;
            Ok(UType::rec(&name(&args[0])?, utype(env, &args[1])?))
        }
        "fun" => match con(env, s)? {
            Con::Fun(ft) => Ok(UType::Fun(ft)),
            _ => unreachable!(),
        },
        _ => err(s.loc(), format!("unknown unannotated type form '{}'", head)),
    }
}

fn uvalue(env: &mut Env, s: &Sexp) -> Result<UValue> {
    if let Some(a) = s.atom() {
        return match lit(a) {
            Some(l) => Ok(UValue::Lit(l)),
            None => err(s.loc(), format!("expected a value, found {}", a)),
        };
    }
    let Some((head, args)) = s.form() else { return err(s.loc(), "expected a value") };
    let one = |env: &mut Env| -> Result<Box<UValue>> {
        arity(s.loc(), head, args, 1)?;
        Ok(Box::new(uvalue(env, &args[0])?))
    };
    Ok(match head {
        "triv" => {
            arity(s.loc(), head, args, 0)?;
            UValue::Triv
        }
        "fun" => UValue::Fun(Box::new(fun_expr(env, s, args)?)),
        "pair" => {
            arity(s.loc(), head, args, 2)?;
            UValue::Pair(Box::new(uvalue(env, &args[0])?), Box::new(uvalue(env, &args[1])?))
        }
        "inl" => UValue::InL(one(env)?),
        "inr" => UValue::InR(one(env)?),
        "roll" => UValue::Roll(one(env)?),
        "handle" => UValue::Handle(one(env)?),
        _ => return err(s.loc(), format!("unknown value form '{}'", head)),
    })
}

fn fresh_abbrev(loc: Loc, n: &str) -> Result<()> {
    if KEYWORDS.contains(&n) {
        err(loc, format!("'{}' is reserved", n))
    } else {
        Ok(())
    }
}

fn number<T: std::str::FromStr>(s: &Sexp) -> Result<T> {
    match s.atom().and_then(|a| a.parse().ok()) {
        Some(n) => Ok(n),
        None => err(s.loc(), format!("expected a natural number, found {}", s)),
    }
}

pub fn parse_program(text: &str) -> Result<Program> {
    let mut env = Env::default();
    let mut p = Program::default();
    for form in read_all(text)? {
        let Some((head, args)) = form.form() else { return err(form.loc(), "expected a top-level form") };
        let loc = form.loc();
        match head {
            "vstype" => {
                arity(loc, head, args, 2)?;
                let n = name(&args[0])?;
                fresh_abbrev(loc, &n)?;
                let t = vsty(&mut env, &args[1])?;
                env.vstypes.insert(n, t);
            }
            "type" => {
                let (n, param, body) = match args {
                    [n, b] => (name(n)?, None, b),
                    [n, bind, b] => (name(n)?, Some(binder(&mut env, bind, "u", vsty)?.0), b),
                    _ => return err(loc, "'type' takes a name, an optional (u VSTY) and a type"),
                };
                fresh_abbrev(loc, &n)?;
                let c = con(&mut env, body)?;
                env.types.insert(n, (param, c));
            }
            "def" => {
                arity(loc, head, args, 2)?;
                let n = name(&args[0])?;
                fresh_abbrev(loc, &n)?;
                let e = expr(&mut env, &args[1])?;
                env.defs.insert(n.clone(), e.clone());
                p.defs.push((n, e));
            }
            "main" => {
                arity(loc, head, args, 1)?;
                if p.main.is_some() {
                    return err(loc, "duplicate main");
                }
                p.main = Some(expr(&mut env, &args[0])?);
            }
            "utype" => {
                arity(loc, head, args, 1)?;
                p.utypes.push(utype(&mut env, &args[0])?);
            }
            "uvalue" => {
                arity(loc, head, args, 1)?;
                p.uvalues.push(uvalue(&mut env, &args[0])?);
            }
            "fuel" => {
                arity(loc, head, args, 1)?;
                p.fuel = Some(number(&args[0])?);
            }
            "budget" => {
                arity(loc, head, args, 1)?;
                p.budget = Some(number(&args[0])?);
            }
            _ => return err(loc, format!("unknown top-level form '{}'", head)),
        }
    }
    Ok(p)
}

/// Print a program in expanded form; `parse_program` reads it back to an
/// equal AST.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    if let Some(f) = p.fuel {
        let _ = writeln!(out, "(fuel {})", f);
    }
    if let Some(b) = p.budget {
        let _ = writeln!(out, "(budget {})", b);
    }
    for (n, e) in &p.defs {
        let _ = writeln!(out, "(def {} {})", n, e);
    }
    if let Some(m) = &p.main {
        let _ = writeln!(out, "(main {})", m);
    }
    for t in &p.utypes {
        let _ = writeln!(out, "(utype {})", t);
    }
    for v in &p.uvalues {
        let _ = writeln!(out, "(uvalue {})", v);
    }
    out
}

fn one_form<T>(text: &str, f: impl FnOnce(&mut Env, &Sexp) -> Result<T>) -> Result<T> {
    let forms = read_all(text)?;
    match forms.as_slice() {
        [s] => f(&mut Env::default(), s),
        [] => err(Loc { line: 1, col: 1 }, "empty input"),
        [_, s, ..] => err(s.loc(), "trailing input"),
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    one_form(text, expr)
}
pub fn parse_con(text: &str) -> Result<Con> {
    one_form(text, con)
}
pub fn parse_graph(text: &str) -> Result<GraphType> {
    one_form(text, graph)
}
pub fn parse_vsty(text: &str) -> Result<VsType> {
    one_form(text, vsty)
}
pub fn parse_vs(text: &str) -> Result<Vs> {
    one_form(text, vs)
}
pub fn parse_value(text: &str) -> Result<Value> {
    one_form(text, value)
}
pub fn parse_utype(text: &str) -> Result<UType> {
    one_form(text, utype)
}
pub fn parse_uvalue(text: &str) -> Result<UValue> {
    one_form(text, uvalue)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triv_and_interp_example() {
        assert_eq!(parse_expr("(triv)").unwrap(), Expr::Triv);
        let e = parse_expr("(new u V (touch (future u (triv))))").unwrap();
        assert_eq!(e, Expr::new_vs("u", VsType::V, Expr::touch(Expr::future(Vs::var("u"), Expr::Triv))));
    }

    #[test]
    fn literals_and_ops() {
        assert_eq!(parse_expr("-3").unwrap(), Expr::int(-3));
        assert_eq!(parse_expr("2.5").unwrap(), Expr::float(2.5));
        let e = parse_expr("(** -1.0 2.0)").unwrap();
        assert!(matches!(e, Expr::Prim(PrimOp::Pow, ..)));
        assert!(matches!(parse_expr("(if (< 1 2) 3 4)").unwrap(), Expr::Case(..)));
    }

    #[test]
    fn abbreviations_and_shadowing() {
        let p = parse_program(
            "(vstype vstream (corec t (prod V + t +)))
             (type pipe (u vstream) (rec a (u vstream) (prod float (fut (vapp a (snd u)) (fst u))) u))
             (def id (fun (u 1) (w 1) f (x (pipe w)) (pipe w) x))
             (def two (fun (u 1) (w 1) id (x int) int (app id triv triv x)))
             (main (app id triv triv (triv)))",
        )
        .unwrap();
        let Some(Expr::Fun(fe)) = p.def("id") else { panic!() };
        assert!(matches!(&fe.dom, Con::Rec { uty, arg: Vs::Var(w), .. } if *uty == VsType::vstream() && w == "w"));
        // a local binder named like a definition is not inlined
        let Some(Expr::Fun(two)) = p.def("two") else { panic!() };
        assert!(matches!(&two.body, Expr::App(h, ..) if **h == Expr::var("id")));
        assert!(matches!(p.main, Some(Expr::App(ref h, ..)) if matches!(**h, Expr::Fun(_))));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_program("(def x\n  (fst 1 2))").unwrap_err();
        assert_eq!(e.loc, Loc { line: 2, col: 3 });
        let e = parse_program("(def x (touch (future u (triv))))\n(bogus)").unwrap_err();
        assert_eq!(e.loc, Loc { line: 2, col: 1 });
        assert!(parse_vsty("(prod V * V +)").is_err());
    }

    #[test]
    fn generators_round_trip() {
        let v = parse_vs("(fst (root g12 (prod V + V +)))").unwrap();
        assert_eq!(parse_vs(&v.to_string()).unwrap(), v);
        let h = parse_value("(handle (snd (root g3 (prod V + V +))) 1.5)").unwrap();
        assert_eq!(parse_value(&h.to_string()).unwrap(), h);
        assert!(parse_value("(handle u 1)").is_err());
    }
}
