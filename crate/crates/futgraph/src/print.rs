//! S-expression rendering of every syntactic class. The cli parser reads
//! exactly this format back.

use std::fmt::{self, Display, Formatter};

use crate::syntax::*;

impl Display for Avail {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_av() { "+" } else { "-" })
    }
}

impl Display for VsType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            VsType::V => f.write_str("V"),
            VsType::Unit => f.write_str("1"),
            VsType::Prod(a, la, b, ra) => write!(f, "(prod {} {} {} {})", a, la, b, ra),
            VsType::Var(t) => f.write_str(t),
            VsType::Corec(t, b) => write!(f, "(corec {} {})", t, b),
        }
    }
}

impl Display for Vs {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Vs::Var(x) => f.write_str(x),
            Vs::Unit => f.write_str("triv"),
            Vs::Pair(a, b) => write!(f, "(pair {} {})", a, b),
            Vs::Fst(a) => write!(f, "(fst {})", a),
            Vs::Snd(a) => write!(f, "(snd {})", a),
            Vs::Root(t, g) => write!(f, "(root {} {})", g, t),
        }
    }
}

impl Display for VPath {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_vs())
    }
}

impl Display for GraphType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        use GraphType as G;
        match self {
            G::Var(g) => f.write_str(g),
            G::Empty => f.write_str("empty"),
            G::Seq(a, b) => write!(f, "(seq {} {})", a, b),
            G::Par(a, b) => write!(f, "(par {} {})", a, b),
            G::Or(a, b) => write!(f, "(or {} {})", a, b),
            G::Rec(g, b) => write!(f, "(rec {} {})", g, b),
            G::Spawn(b, vs) => write!(f, "(spawn {} {})", b, vs),
            G::Touch(vs) => write!(f, "(touch {})", vs),
            G::Pi { uf, tf, ut, tt, body } => {
                write!(f, "(pi ({} {}) ({} {}) {})", uf, tf, ut, tt, body)
            }
            G::App(h, a, b) => write!(f, "(gapp {} {} {})", h, a, b),
            G::New(u, t, b) => write!(f, "(new {} {} {})", u, t, b),
        }
    }
}

impl Display for GraphKind {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Ground => f.write_str("ground"),
            GraphKind::Pi(a, b, k) => write!(f, "(pi {} {} {})", a, b, k),
        }
    }
}

impl Display for Kind {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Typ => f.write_str("type"),
            Kind::Arrow(t) => write!(f, "(arrow {})", t),
        }
    }
}

impl Display for Con {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Con::Unit => f.write_str("unit"),
            Con::Base(BaseTy::Int) => f.write_str("int"),
            Con::Base(BaseTy::Float) => f.write_str("float"),
            Con::Fun(ft) => {
                write!(f, "(fun ({} {}) ({} {}) {} {} {})", ft.uf, ft.tf, ft.ut, ft.tt, ft.dom, ft.cod, ft.eff)
            }
            Con::Prod(a, b) => write!(f, "(prod {} {})", a, b),
            Con::Sum(a, b) => write!(f, "(sum {} {})", a, b),
            Con::Fut(c, vs) => write!(f, "(fut {} {})", c, vs),
            Con::Var(a) => f.write_str(a),
            Con::Rec { tyvar, u, uty, body, arg } => {
                write!(f, "(rec {} ({} {}) {} {})", tyvar, u, uty, body, arg)
            }
            Con::Lam(u, t, b) => write!(f, "(lam ({} {}) {})", u, t, b),
            Con::AppVs(c, vs) => write!(f, "(vapp {} {})", c, vs),
        }
    }
}

impl Display for Lit {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(n) => write!(f, "{}", n),
            Lit::Float(x) => write!(f, "{:?}", x.0),
        }
    }
}

fn fmt_fun(f: &mut Formatter<'_>, fe: &FunExpr) -> fmt::Result {
    write!(f, "(fun ({} {}) ({} {}) {} ({} {}) {} {})", fe.uf, fe.tf, fe.ut, fe.tt, fe.f, fe.x, fe.dom, fe.cod, fe.body)
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        use Expr as E;
        match self {
            E::Var(x) => f.write_str(x),
            E::Triv => f.write_str("(triv)"),
            E::Lit(l) => write!(f, "{}", l),
            E::Fun(fe) => fmt_fun(f, fe),
            E::App(h, a, b, arg) => write!(f, "(app {} {} {} {})", h, a, b, arg),
            E::Pair(a, b) => write!(f, "(pair {} {})", a, b),
            E::Fst(a) => write!(f, "(fst {})", a),
            E::Snd(a) => write!(f, "(snd {})", a),
            E::InL(a) => write!(f, "(inl {})", a),
            E::InR(a) => write!(f, "(inr {})", a),
            E::Case(s, x, l, y, r) => write!(f, "(case {} ({} {}) ({} {}))", s, x, l, y, r),
            E::Roll(a) => write!(f, "(roll {})", a),
            E::Unroll(a) => write!(f, "(unroll {})", a),
            E::Future(vs, a) => write!(f, "(future {} {})", vs, a),
            E::Touch(a) => write!(f, "(touch {})", a),
            E::New(u, t, b) => write!(f, "(new {} {} {})", u, t, b),
            E::Par(a, b) => write!(f, "(par {} {})", a, b),
            E::Let(x, a, b) => write!(f, "(let {} {} {})", x, a, b),
            E::Ann(a, c) => write!(f, "(ann {} {})", a, c),
            E::Prim(op, a, b) => write!(f, "({} {} {})", op.symbol(), a, b),
            E::Val(v) => write!(f, "(val {})", v),
        }
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Value::Triv => f.write_str("(triv)"),
            Value::Lit(l) => write!(f, "{}", l),
            Value::Fun(fe) => fmt_fun(f, fe),
            Value::Pair(a, b) => write!(f, "(pair {} {})", a, b),
            Value::InL(a) => write!(f, "(inl {})", a),
            Value::InR(a) => write!(f, "(inr {})", a),
            Value::Roll(a) => write!(f, "(roll {})", a),
            Value::Handle(p, a) => write!(f, "(handle {} {})", p, a),
        }
    }
}

/// Mathematical rendering of a VS type, e.g. `corec t.(V@+ × t@+)`.
pub fn vsty_math(t: &VsType) -> String {
    match t {
        VsType::V => "V".into(),
        VsType::Unit => "1".into(),
        VsType::Prod(a, la, b, ra) => {
            format!("({}@{} × {}@{})", vsty_math(a), la, vsty_math(b), ra)
        }
        VsType::Var(t) => t.clone(),
        VsType::Corec(t, b) => format!("corec {}.{}", t, vsty_math(b)),
    }
}

/// Mathematical rendering of a vertex structure.
pub fn vs_math(v: &Vs) -> String {
    match v {
        Vs::Var(x) => x.clone(),
        Vs::Unit => "·".into(),
        Vs::Pair(a, b) => format!("({}, {})", vs_math(a), vs_math(b)),
        Vs::Fst(a) => format!("fst {}", vs_atom(a)),
        Vs::Snd(a) => format!("snd {}", vs_atom(a)),
        Vs::Root(_, g) => g.to_string(),
    }
}

fn vs_atom(v: &Vs) -> String {
    match v {
        Vs::Fst(_) | Vs::Snd(_) => format!("({})", vs_math(v)),
        _ => vs_math(v),
    }
}

/// Mathematical rendering of a graph type.
pub fn graph_math(g: &GraphType) -> String {
    use GraphType as G;
    match g {
        G::Var(x) => x.clone(),
        G::Empty => "•".into(),
        G::Seq(a, b) => format!("{} ⊕ {}", graph_atom(a, true), graph_atom(b, true)),
        G::Par(a, b) => format!("{} ⊗ {}", graph_atom(a, false), graph_atom(b, false)),
        G::Or(a, b) => format!("{} ∨ {}", graph_atom(a, false), graph_atom(b, false)),
        G::Rec(x, b) => format!("μ{}.{}", x, graph_math(b)),
        G::Spawn(b, vs) => format!("Spawn({}, {})", graph_math(b), vs_math(vs)),
        G::Touch(vs) => format!("Touch({})", vs_math(vs)),
        G::Pi { uf, tf, ut, tt, body } => {
            format!("Π({}:{}; {}:{}).{}", uf, vsty_math(tf), ut, vsty_math(tt), graph_atom(body, false))
        }
        G::App(h, a, b) => format!("App({}, {}, {})", graph_math(h), vs_math(a), vs_math(b)),
        G::New(u, t, b) => format!("New({}:{}. {})", u, vsty_math(t), graph_math(b)),
    }
}

fn graph_atom(g: &GraphType, in_seq: bool) -> String {
    match g {
        GraphType::Seq(..) if in_seq => graph_math(g),
        GraphType::Seq(..) | GraphType::Par(..) | GraphType::Or(..) | GraphType::Rec(..) => {
            format!("({})", graph_math(g))
        }
        _ => graph_math(g),
    }
}

/// Mathematical rendering of a type constructor.
pub fn con_math(c: &Con) -> String {
    match c {
        Con::Unit => "unit".into(),
        Con::Base(BaseTy::Int) => "int".into(),
        Con::Base(BaseTy::Float) => "float".into(),
        Con::Fun(ft) => format!(
            "Π({}:{}; {}:{}).({} → {} @ {})",
            ft.uf,
            vsty_math(&ft.tf),
            ft.ut,
            vsty_math(&ft.tt),
            con_math(&ft.dom),
            con_math(&ft.cod),
            graph_math(&ft.eff)
        ),
        Con::Prod(a, b) => format!("({} × {})", con_math(a), con_math(b)),
        Con::Sum(a, b) => format!("({} + {})", con_math(a), con_math(b)),
        Con::Fut(a, vs) => format!("Fut({}, {})", con_math(a), vs_math(vs)),
        Con::Var(a) => a.clone(),
        Con::Rec { tyvar, u, uty, body, arg } => {
            format!("rec {}({}:{}).{} [{}]", tyvar, u, vsty_math(uty), con_math(body), vs_math(arg))
        }
        Con::Lam(u, t, b) => format!("Λ({}:{}).{}", u, vsty_math(t), con_math(b)),
        Con::AppVs(a, vs) => format!("{}[{}]", con_math(a), vs_math(vs)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sexp_forms() {
        let t = VsType::prod(VsType::V, Avail::Av, VsType::V, Avail::Unav);
        assert_eq!(t.to_string(), "(prod V + V -)");
        let g = GraphType::spawn(GraphType::Empty, Vs::fst(Vs::var("u")));
        assert_eq!(g.to_string(), "(spawn empty (fst u))");
        assert_eq!(Expr::float(1.0).to_string(), "1.0");
    }

    #[test]
    fn math_forms() {
        assert_eq!(vsty_math(&VsType::vstream()), "corec t.(V@+ × t@+)");
        let g = GraphType::seq(
            GraphType::spawn(GraphType::Empty, Vs::var("u")),
            GraphType::Touch(Vs::fst(Vs::snd(Vs::var("u")))),
        );
        assert_eq!(graph_math(&g), "Spawn(•, u) ⊕ Touch(fst (snd u))");
    }
}
