//! Expression typing: synthesizes a type and a graph type for each
//! expression, tracking which Ω resources it consumes.

use thiserror::Error;

use crate::kindcheck::{con_equal, con_normalize, kind_of, unroll_rec, KindError};
use crate::syntax::*;
use crate::vstruct::{omega_split_check, vs_check, vs_is_vpath, Footprint, VsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type mismatch ({rule}): expected {expected}, found {found}")]
    TypeMismatch { rule: &'static str, expected: String, found: String },
    #[error("affine violation: {0}")]
    AffineViolation(String),
    #[error("vertex {0} escapes its scope in type {1}")]
    EscapingVertex(String, String),
    #[error("unbound variable {0}")]
    UnboundVar(String),
    #[error("{0} does not have a future type")]
    NotAFuture(String),
    #[error("{0} does not have a function type")]
    NotAFunction(String),
    #[error("{0} does not have a recursive type")]
    NotARecType(String),
    #[error("cannot synthesize a type for {0}; add an annotation")]
    NeedsAnnotation(String),
    #[error(transparent)]
    Kind(#[from] KindError),
    #[error(transparent)]
    Vs(VsError),
}

impl From<VsError> for TypeError {
    fn from(e: VsError) -> Self {
        match e {
            VsError::UnboundVertex(v) => TypeError::UnboundVar(v),
            VsError::AffineViolation(m) | VsError::OverlappingSpawns(m) => TypeError::AffineViolation(m),
            e => TypeError::Vs(e),
        }
    }
}

type Result<T> = std::result::Result<T, TypeError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Typing {
    pub ty: Con,
    pub gty: GraphType,
    pub consumed: Footprint,
}

fn mismatch(rule: &'static str, expected: impl ToString, found: impl ToString) -> TypeError {
    TypeError::TypeMismatch { rule, expected: expected.to_string(), found: found.to_string() }
}

fn pure(ty: Con) -> Typing {
    Typing { ty, gty: GraphType::Empty, consumed: Footprint::empty() }
}

/// Combine two sequentially (or in parallel) composed sub-derivations.
fn join(ctxs: &Ctxs, a: Footprint, b: Footprint) -> Result<Footprint> {
    omega_split_check(&ctxs.omega, &a, &b)?;
    Ok(a.union(b))
}

pub fn type_of(ctxs: &Ctxs, e: &Expr) -> Result<Typing> {
    synth(ctxs, e)
}

/// Type a closed program and confirm that its type and graph type are
/// well-formed in the empty context.
pub fn check_program(e: &Expr) -> Result<Typing> {
    let c = Ctxs::empty();
    let t = synth(&c, e)?;
    match kind_of(&c, &t.ty)? {
        Kind::Typ => {}
        k => return Err(mismatch("program", "a type", k)),
    }
    crate::kindcheck::graph_kind_of(&c, &t.gty)?;
    Ok(t)
}

fn vertex_binder(ctxs: &Ctxs, u: &Name, body: &Expr) -> (Name, Expr) {
    if ctxs.vs_names().contains(u) {
        let nu = fresh_name(u);
        let b = body.subst(&Subst::new().vs(u, Vs::Var(nu.clone())));
        (nu, b)
    } else {
        (u.clone(), body.clone())
    }
}

pub fn synth(ctxs: &Ctxs, e: &Expr) -> Result<Typing> {
    match e {
        Expr::Var(x) => ctxs.gamma.get(x).cloned().map(pure).ok_or_else(|| TypeError::UnboundVar(x.clone())),
        Expr::Triv => Ok(pure(Con::Unit)),
        Expr::Lit(Lit::Int(_)) => Ok(pure(Con::Base(BaseTy::Int))),
        Expr::Lit(Lit::Float(_)) => Ok(pure(Con::Base(BaseTy::Float))),
        Expr::Fun(fe) => synth_fun(ctxs, fe).map(pure),
        Expr::App(f, a, b, arg) => {
            let tf = synth(ctxs, f)?;
            let ft = match con_normalize(&tf.ty) {
                Con::Fun(ft) => ft,
                other => return Err(TypeError::NotAFunction(format!("{} : {}", f, other))),
            };
            let f3 = vs_check(&ctxs.omega, &Omega::new(), a, &ft.tf)?;
            vs_check(&Omega::new(), &ctxs.psi, a, &ft.tf)?;
            vs_check(&Omega::new(), &ctxs.psi, b, &ft.tt)?;
            let inst = Subst::new().vs(&ft.uf, a.clone()).vs(&ft.ut, b.clone());
            let dom = ft.dom.subst(&inst);
            let cod = ft.cod.subst(&inst);
            let eff = ft.eff.subst(&inst);
            let targ = check(ctxs, arg, &dom)?;
            let (_, rest) = omega_split_check(&ctxs.omega, &tf.consumed, &targ.consumed.clone().union(f3.clone()))?;
            omega_split_check(&rest, &targ.consumed, &f3)?;
            Ok(Typing {
                ty: cod,
                gty: GraphType::seq(GraphType::seq(tf.gty, targ.gty), eff),
                consumed: tf.consumed.union(targ.consumed).union(f3),
            })
        }
        Expr::Pair(a, b) => {
            let ta = synth(ctxs, a)?;
            let tb = synth(ctxs, b)?;
            Ok(Typing {
                ty: Con::prod(ta.ty, tb.ty),
                gty: GraphType::seq(ta.gty, tb.gty),
                consumed: join(ctxs, ta.consumed, tb.consumed)?,
            })
        }
        Expr::Par(a, b) => {
            let ta = synth(ctxs, a)?;
            let tb = synth(ctxs, b)?;
            Ok(Typing {
                ty: Con::prod(ta.ty, tb.ty),
                gty: GraphType::par(ta.gty, tb.gty),
                consumed: join(ctxs, ta.consumed, tb.consumed)?,
            })
        }
        Expr::Fst(a) | Expr::Snd(a) => {
            let t = synth(ctxs, a)?;
            match con_normalize(&t.ty) {
                Con::Prod(l, r) => {
                    let ty = if matches!(e, Expr::Fst(_)) { *l } else { *r };
                    Ok(Typing { ty, ..t })
                }
                other => Err(mismatch("S:Proj", "a product", other)),
            }
        }
        Expr::InL(_) | Expr::InR(_) | Expr::Roll(_) => Err(TypeError::NeedsAnnotation(e.to_string())),
        Expr::Unroll(a) => {
            let t = synth(ctxs, a)?;
            let n = con_normalize(&t.ty);
            match unroll_rec(&n) {
                Some(ty) => Ok(Typing { ty, ..t }),
                None => Err(TypeError::NotARecType(format!("{} : {}", a, n))),
            }
        }
        Expr::Case(scr, x, l, y, r) => {
            let ts = synth(ctxs, scr)?;
            let (lt, rt) = match con_normalize(&ts.ty) {
                Con::Sum(lt, rt) => (*lt, *rt),
                other => return Err(mismatch("S:Case", "a sum", other)),
            };
            let lc = ctxs.with_var(x, lt);
            let rc = ctxs.with_var(y, rt);
            let (tl, tr) = match synth(&lc, l) {
                Ok(tl) => {
                    let tr = check(&rc, r, &tl.ty)?;
                    (tl, tr)
                }
                Err(TypeError::NeedsAnnotation(_)) => {
                    let tr = synth(&rc, r)?;
                    let tl = check(&lc, l, &tr.ty)?;
                    (tl, tr)
                }
                Err(err) => return Err(err),
            };
            let branches = tl.consumed.union(tr.consumed);
            Ok(Typing {
                ty: tl.ty,
                gty: GraphType::seq(ts.gty, GraphType::or(tl.gty, tr.gty)),
                consumed: join(ctxs, ts.consumed, branches)?,
            })
        }
        Expr::Future(vs, a) => {
            let t = synth(ctxs, a)?;
            let fv = spawn_target(ctxs, vs)?;
            Ok(Typing {
                ty: Con::fut(t.ty, vs.clone()),
                gty: GraphType::spawn(t.gty, vs.clone()),
                consumed: join(ctxs, t.consumed, fv)?,
            })
        }
        Expr::Touch(a) => {
            let t = synth(ctxs, a)?;
            match con_normalize(&t.ty) {
                Con::Fut(inner, vs) => {
                    Ok(Typing { ty: *inner, gty: GraphType::seq(t.gty, GraphType::Touch(vs)), consumed: t.consumed })
                }
                other => Err(TypeError::NotAFuture(format!("{} : {}", a, other))),
            }
        }
        Expr::New(u, vt, body) => {
            let (u, body) = vertex_binder(ctxs, u, body);
            if !vt.is_contractive() {
                return Err(mismatch("S:New", "a contractive vertex structure type", vt));
            }
            let t = synth(&ctxs.with_new(&u, vt), &body)?;
            let fv = t.ty.fv();
            if fv.vs.contains(&u) {
                return Err(TypeError::EscapingVertex(u, t.ty.to_string()));
            }
            Ok(Typing {
                ty: t.ty,
                gty: GraphType::New(u.clone(), vt.clone(), Box::new(t.gty)),
                consumed: t.consumed.without_root(&Key::Var(u)),
            })
        }
        Expr::Let(x, a, b) => {
            let ta = synth(ctxs, a)?;
            let tb = synth(&ctxs.with_var(x, ta.ty), b)?;
            Ok(Typing {
                ty: tb.ty,
                gty: GraphType::seq(ta.gty, tb.gty),
                consumed: join(ctxs, ta.consumed, tb.consumed)?,
            })
        }
        Expr::Ann(a, c) => {
            match kind_of(ctxs, c)? {
                Kind::Typ => {}
                k => return Err(mismatch("S:Ann", "a type", k)),
            }
            check(ctxs, a, c)
        }
        Expr::Prim(op, a, b) => {
            let ta = synth(ctxs, a)?;
            let tb = synth(ctxs, b)?;
            let base = match (con_normalize(&ta.ty), con_normalize(&tb.ty)) {
                (Con::Base(x), Con::Base(y)) if x == y => x,
                (x, y) => return Err(mismatch("S:Prim", x, y)),
            };
            let ty = if op.is_comparison() { Con::bool_ty() } else { Con::Base(base) };
            Ok(Typing { ty, gty: GraphType::seq(ta.gty, tb.gty), consumed: join(ctxs, ta.consumed, tb.consumed)? })
        }
        Expr::Val(v) => synth_value(ctxs, v).map(pure),
    }
}

fn spawn_target(ctxs: &Ctxs, vs: &Vs) -> Result<Footprint> {
    let fp = vs_check(&ctxs.omega, &Omega::new(), vs, &VsType::V).map_err(|e| match e {
        VsError::Mismatch { .. } | VsError::NotAProduct(_) => {
            TypeError::Kind(KindError::SpawnNotSingleVertex(vs.to_string()))
        }
        e => e.into(),
    })?;
    vs_check(&Omega::new(), &ctxs.psi, vs, &VsType::V)?;
    Ok(fp)
}

/// The function's type; its effect is `App(μγ.Π(uf;ut).G, uf, ut)`.
fn synth_fun(ctxs: &Ctxs, fe: &FunExpr) -> Result<Con> {
    let inner = ctxs.with_psi(&fe.uf, &fe.tf).with_psi(&fe.ut, &fe.tt);
    for c in [&fe.dom, &fe.cod] {
        match kind_of(&inner, c)? {
            Kind::Typ => {}
            k => return Err(mismatch("S:Fun", "a type", k)),
        }
    }
    let gv = fresh_name("g");
    let uf = Vs::Var(fe.uf.clone());
    let ut = Vs::Var(fe.ut.clone());
    let self_ty = Con::Fun(Box::new(FunTy {
        uf: fe.uf.clone(),
        tf: fe.tf.clone(),
        ut: fe.ut.clone(),
        tt: fe.tt.clone(),
        dom: fe.dom.clone(),
        cod: fe.cod.clone(),
        eff: GraphType::app(GraphType::Var(gv.clone()), uf.clone(), ut.clone()),
    }));
    let mut body_ctx = inner.with_var(&fe.f, self_ty).with_var(&fe.x, fe.dom.clone());
    body_ctx.omega = [(Key::Var(fe.uf.clone()), fe.tf.clone())].into_iter().collect();
    body_ctx.delta.insert(gv.clone(), GraphKind::Pi(fe.tf.clone(), fe.tt.clone(), Box::new(GraphKind::Ground)));
    let tb = check(&body_ctx, &fe.body, &fe.cod)?;
    let head = GraphType::rec(&gv, GraphType::pi(&fe.uf, fe.tf.clone(), &fe.ut, fe.tt.clone(), tb.gty));
    Ok(Con::Fun(Box::new(FunTy {
        uf: fe.uf.clone(),
        tf: fe.tf.clone(),
        ut: fe.ut.clone(),
        tt: fe.tt.clone(),
        dom: fe.dom.clone(),
        cod: fe.cod.clone(),
        eff: GraphType::app(head, uf, ut),
    })))
}

fn synth_value(ctxs: &Ctxs, v: &Value) -> Result<Con> {
    match v {
        Value::Triv => Ok(Con::Unit),
        Value::Lit(Lit::Int(_)) => Ok(Con::Base(BaseTy::Int)),
        Value::Lit(Lit::Float(_)) => Ok(Con::Base(BaseTy::Float)),
        Value::Fun(fe) => synth_fun(ctxs, fe),
        Value::Pair(a, b) => Ok(Con::prod(synth_value(ctxs, a)?, synth_value(ctxs, b)?)),
        Value::Handle(p, payload) => {
            let vs = p.to_vs();
            vs_check(&Omega::new(), &ctxs.psi, &vs, &VsType::V)?;
            let mut inner = ctxs.clone();
            inner.omega = Omega::new();
            Ok(Con::fut(synth_value(&inner, payload)?, vs))
        }
        Value::InL(_) | Value::InR(_) | Value::Roll(_) => Err(TypeError::NeedsAnnotation(v.to_string())),
    }
}

fn check_value(ctxs: &Ctxs, v: &Value, expected: &Con) -> Result<()> {
    let n = con_normalize(expected);
    match (v, &n) {
        (Value::InL(a), Con::Sum(l, _)) => check_value(ctxs, a, l),
        (Value::InR(a), Con::Sum(_, r)) => check_value(ctxs, a, r),
        (Value::Roll(a), Con::Rec { .. }) => check_value(ctxs, a, &unroll_rec(&n).unwrap()),
        (Value::Pair(a, b), Con::Prod(l, r)) => {
            check_value(ctxs, a, l)?;
            check_value(ctxs, b, r)
        }
        (Value::Handle(p, payload), Con::Fut(inner, vs)) => {
            let here = p.to_vs();
            if !con_equal(&Con::fut(Con::Unit, here.clone()), &Con::fut(Con::Unit, vs.clone())) {
                return Err(mismatch("S:Handle", vs, here));
            }
            vs_check(&Omega::new(), &ctxs.psi, &here, &VsType::V)?;
            let mut c = ctxs.clone();
            c.omega = Omega::new();
            check_value(&c, payload, inner)
        }
        (Value::InL(_) | Value::InR(_), _) => Err(mismatch("S:Inj", "a sum", &n)),
        (Value::Roll(_), _) => Err(TypeError::NotARecType(n.to_string())),
        _ => {
            let t = synth_value(ctxs, v)?;
            if con_equal(&t, &n) {
                Ok(())
            } else {
                Err(mismatch("S:Eq", &n, t))
            }
        }
    }
}

/// Check `e` against an expected type; introduction forms for sums and
/// recursive types only work in this direction.
pub fn check(ctxs: &Ctxs, e: &Expr, expected: &Con) -> Result<Typing> {
    let n = con_normalize(expected);
    let with_ty = |t: Typing| Typing { ty: expected.clone(), ..t };
    match (e, &n) {
        (Expr::InL(a), Con::Sum(l, _)) => check(ctxs, a, l).map(with_ty),
        (Expr::InR(a), Con::Sum(_, r)) => check(ctxs, a, r).map(with_ty),
        (Expr::InL(_) | Expr::InR(_), _) => Err(mismatch("S:Inj", "a sum", &n)),
        (Expr::Roll(a), Con::Rec { .. }) => check(ctxs, a, &unroll_rec(&n).unwrap()).map(with_ty),
        (Expr::Roll(_), _) => Err(TypeError::NotARecType(n.to_string())),
        (Expr::Pair(a, b), Con::Prod(l, r)) => {
            let ta = check(ctxs, a, l)?;
            let tb = check(ctxs, b, r)?;
            Ok(Typing {
                ty: expected.clone(),
                gty: GraphType::seq(ta.gty, tb.gty),
                consumed: join(ctxs, ta.consumed, tb.consumed)?,
            })
        }
        (Expr::Par(a, b), Con::Prod(l, r)) => {
            let ta = check(ctxs, a, l)?;
            let tb = check(ctxs, b, r)?;
            Ok(Typing {
                ty: expected.clone(),
                gty: GraphType::par(ta.gty, tb.gty),
                consumed: join(ctxs, ta.consumed, tb.consumed)?,
            })
        }
        (Expr::Future(vs, a), Con::Fut(inner, target)) => {
            if !con_equal(&Con::fut(Con::Unit, vs.clone()), &Con::fut(Con::Unit, target.clone())) {
                return Err(mismatch("S:Future", target, vs));
            }
            let t = check(ctxs, a, inner)?;
            let fv = spawn_target(ctxs, vs)?;
            Ok(Typing {
                ty: expected.clone(),
                gty: GraphType::spawn(t.gty, vs.clone()),
                consumed: join(ctxs, t.consumed, fv)?,
            })
        }
        (Expr::Case(scr, x, l, y, r), _) => {
            let ts = synth(ctxs, scr)?;
            let (lt, rt) = match con_normalize(&ts.ty) {
                Con::Sum(lt, rt) => (*lt, *rt),
                other => return Err(mismatch("S:Case", "a sum", other)),
            };
            let tl = check(&ctxs.with_var(x, lt), l, expected)?;
            let tr = check(&ctxs.with_var(y, rt), r, expected)?;
            let branches = tl.consumed.union(tr.consumed);
            Ok(Typing {
                ty: expected.clone(),
                gty: GraphType::seq(ts.gty, GraphType::or(tl.gty, tr.gty)),
                consumed: join(ctxs, ts.consumed, branches)?,
            })
        }
        (Expr::Let(x, a, b), _) => {
            let ta = synth(ctxs, a)?;
            let tb = check(&ctxs.with_var(x, ta.ty), b, expected)?;
            Ok(Typing {
                ty: expected.clone(),
                gty: GraphType::seq(ta.gty, tb.gty),
                consumed: join(ctxs, ta.consumed, tb.consumed)?,
            })
        }
        (Expr::New(u, vt, body), _) => {
            let (u, body) = vertex_binder(ctxs, u, body);
            if !vt.is_contractive() {
                return Err(mismatch("S:New", "a contractive vertex structure type", vt));
            }
            if expected.fv().vs.contains(&u) {
                return Err(TypeError::EscapingVertex(u, expected.to_string()));
            }
            let t = check(&ctxs.with_new(&u, vt), &body, expected)?;
            Ok(Typing {
                ty: expected.clone(),
                gty: GraphType::New(u.clone(), vt.clone(), Box::new(t.gty)),
                consumed: t.consumed.without_root(&Key::Var(u)),
            })
        }
        (Expr::Val(v), _) => {
            check_value(ctxs, v, expected)?;
            Ok(pure(expected.clone()))
        }
        _ => {
            let t = synth(ctxs, e)?;
            if con_equal(&t.ty, &n) {
                Ok(t)
            } else {
                Err(mismatch("S:Eq", &n, &t.ty))
            }
        }
    }
}

/// Type of a runtime value in the context of the generators it mentions.
pub fn value_type(ctxs: &Ctxs, v: &Value, expected: Option<&Con>) -> Result<Con> {
    match expected {
        Some(c) => check_value(ctxs, v, c).map(|_| c.clone()),
        None => synth_value(ctxs, v),
    }
}

/// Whether a future's vertex structure names a concrete vertex.
pub fn fut_is_concrete(c: &Con) -> bool {
    match con_normalize(c) {
        Con::Fut(_, vs) => vs_is_vpath(&vs).is_some(),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn float() -> Con {
        Con::Base(BaseTy::Float)
    }

    fn v() -> VsType {
        VsType::V
    }

    #[test]
    fn spawn_and_touch() {
        let e = Expr::new_vs("u", v(), Expr::touch(Expr::future(Vs::var("u"), Expr::float(1.0))));
        let t = check_program(&e).unwrap();
        assert_eq!(t.ty, float());
        assert_eq!(
            t.gty,
            GraphType::New(
                "u".into(),
                v(),
                Box::new(GraphType::seq(
                    GraphType::spawn(GraphType::Empty, Vs::var("u")),
                    GraphType::Touch(Vs::var("u"))
                ))
            )
        );
    }

    #[test]
    fn double_spawn_rejected() {
        let u = Vs::var("u");
        let e = Expr::new_vs("u", v(), Expr::pair(Expr::future(u.clone(), Expr::Triv), Expr::future(u, Expr::Triv)));
        assert!(matches!(check_program(&e), Err(TypeError::AffineViolation(_))));
    }

    #[test]
    fn unbound_vertex() {
        let e = Expr::future(Vs::var("u"), Expr::Triv);
        assert!(matches!(check_program(&e), Err(TypeError::UnboundVar(_))));
    }

    #[test]
    fn escaping_vertex() {
        let e = Expr::new_vs("u", v(), Expr::future(Vs::var("u"), Expr::Triv));
        assert!(matches!(check_program(&e), Err(TypeError::EscapingVertex(..))));
    }

    #[test]
    fn touch_needs_future() {
        let e = Expr::touch(Expr::Triv);
        assert!(matches!(check_program(&e), Err(TypeError::NotAFuture(_))));
    }

    #[test]
    fn case_branches_share() {
        let u = Vs::var("u");
        let scr = Expr::Ann(Box::new(Expr::InL(Box::new(Expr::Triv))), Con::bool_ty());
        let e = Expr::new_vs(
            "u",
            v(),
            Expr::touch(Expr::Case(
                Box::new(scr),
                "x".into(),
                Box::new(Expr::future(u.clone(), Expr::int(1))),
                "y".into(),
                Box::new(Expr::future(u, Expr::int(2))),
            )),
        );
        let t = check_program(&e).unwrap();
        assert_eq!(t.ty, Con::Base(BaseTy::Int));
    }

    #[test]
    fn recursive_function_effect() {
        // fun (u:V) (w:1) f (x:int) : int = x
        let fe = FunExpr {
            uf: "u".into(),
            tf: v(),
            ut: "w".into(),
            tt: VsType::Unit,
            f: "f".into(),
            x: "x".into(),
            dom: Con::Base(BaseTy::Int),
            cod: Con::Base(BaseTy::Int),
            body: Expr::var("x"),
        };
        let t = check_program(&Expr::Fun(Box::new(fe))).unwrap();
        let Con::Fun(ft) = t.ty else { panic!() };
        let GraphType::App(h, a, b) = ft.eff else { panic!() };
        assert_eq!((a, b), (Vs::var("u"), Vs::var("w")));
        assert!(matches!(*h, GraphType::Rec(..)));
    }
}
