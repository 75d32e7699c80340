//! Graph-type formation, type-constructor kinding and constructor
//! equivalence.

use thiserror::Error;

use crate::syntax::*;
use crate::vstruct::{omega_split_check, vs_check, vs_eval, Footprint, VsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KindError {
    #[error("ill-formed graph type ({rule}): {msg}")]
    IllFormedGraph { rule: &'static str, msg: String },
    #[error("recursive graph type body is not a Π: {0}")]
    NonPiRecBody(String),
    #[error("spawned vertex structure {0} is not a single vertex")]
    SpawnNotSingleVertex(String),
    #[error("touched vertex structure {0} is not a single vertex")]
    TouchNotVertex(String),
    #[error("ill-formed type ({rule}): {msg}")]
    IllFormedType { rule: &'static str, msg: String },
    #[error("kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("ill-typed constructor {0}")]
    IllTyped(String),
    #[error(transparent)]
    Vs(#[from] VsError),
}

type Result<T> = std::result::Result<T, KindError>;

fn graph_err(rule: &'static str, msg: impl Into<String>) -> KindError {
    KindError::IllFormedGraph { rule, msg: msg.into() }
}

fn type_err(rule: &'static str, msg: impl Into<String>) -> KindError {
    KindError::IllFormedType { rule, msg: msg.into() }
}

/// Check a single-vertex use in spawn position.
fn spawn_vertex(ctxs: &Ctxs, vs: &Vs) -> Result<Footprint> {
    vs_check(&ctxs.omega, &Omega::new(), vs, &VsType::V).map_err(|e| match e {
        VsError::Mismatch { .. } | VsError::NotAProduct(_) => KindError::SpawnNotSingleVertex(vs.to_string()),
        e => e.into(),
    })
}

fn touch_vertex(ctxs: &Ctxs, vs: &Vs) -> Result<()> {
    vs_check(&Omega::new(), &ctxs.psi, vs, &VsType::V).map(|_| ()).map_err(|e| match e {
        VsError::Mismatch { .. } | VsError::NotAProduct(_) => KindError::TouchNotVertex(vs.to_string()),
        e => e.into(),
    })
}

/// Rename a vertex binder if it would shadow something already in scope.
fn freshen_vs_binder<T: Syntax>(ctxs: &Ctxs, u: &Name, body: &T) -> (Name, T) {
    let k = Key::Var(u.clone());
    if ctxs.omega.contains_key(&k) || ctxs.psi.contains_key(&k) {
        let nu = fresh_name(u);
        let b = body.subst(&Subst::new().vs(u, Vs::Var(nu.clone())));
        (nu, b)
    } else {
        (u.clone(), body.clone())
    }
}

pub fn graph_kind_of(ctxs: &Ctxs, g: &GraphType) -> Result<GraphKind> {
    graph_kind_fp(ctxs, g).map(|(k, _)| k)
}

fn ground(ctxs: &Ctxs, g: &GraphType, rule: &'static str) -> Result<Footprint> {
    match graph_kind_fp(ctxs, g)? {
        (GraphKind::Ground, fp) => Ok(fp),
        (k, _) => Err(graph_err(rule, format!("{} has kind {}, expected ground", g, k))),
    }
}

/// Graph kind together with the Ω resources the graph type consumes.
pub fn graph_kind_fp(ctxs: &Ctxs, g: &GraphType) -> Result<(GraphKind, Footprint)> {
    use GraphType as G;
    match g {
        G::Var(x) => match ctxs.delta.get(x) {
            Some(k) => Ok((k.clone(), Footprint::empty())),
            None => Err(graph_err("DW:Var", format!("unbound graph variable {}", x))),
        },
        G::Empty => Ok((GraphKind::Ground, Footprint::empty())),
        G::Seq(a, b) | G::Par(a, b) => {
            let rule = if matches!(g, G::Seq(..)) { "DW:Seq" } else { "DW:Par" };
            let fa = ground(ctxs, a, rule)?;
            let fb = ground(ctxs, b, rule)?;
            omega_split_check(&ctxs.omega, &fa, &fb)?;
            Ok((GraphKind::Ground, fa.union(fb)))
        }
        G::Or(a, b) => {
            let fa = ground(ctxs, a, "DW:Or")?;
            let fb = ground(ctxs, b, "DW:Or")?;
            Ok((GraphKind::Ground, fa.union(fb)))
        }
        G::Spawn(body, vs) => {
            let fa = ground(ctxs, body, "DW:Spawn")?;
            let fb = spawn_vertex(ctxs, vs)?;
            omega_split_check(&ctxs.omega, &fa, &fb)?;
            Ok((GraphKind::Ground, fa.union(fb)))
        }
        G::Touch(vs) => {
            touch_vertex(ctxs, vs)?;
            Ok((GraphKind::Ground, Footprint::empty()))
        }
        G::New(u, t, body) => {
            if !t.is_contractive() {
                return Err(graph_err("DW:New", format!("{} is not contractive", t)));
            }
            let (u, body) = freshen_vs_binder(ctxs, u, &**body);
            let (k, fp) = graph_kind_fp(&ctxs.with_new(&u, t), &body)?;
            Ok((k, fp.without_root(&Key::Var(u))))
        }
        G::Pi { uf, tf, ut, tt, body } => {
            let (uf2, b1) = freshen_vs_binder(ctxs, uf, &**body);
            let (ut2, b2) = freshen_vs_binder(ctxs, ut, &b1);
            let inner = ctxs.with_new(&uf2, tf).with_psi(&ut2, tt);
            let (k, fp) = graph_kind_fp(&inner, &b2)?;
            let fp = fp.without_root(&Key::Var(uf2)).without_root(&Key::Var(ut2));
            Ok((GraphKind::Pi(tf.clone(), tt.clone(), Box::new(k)), fp))
        }
        G::Rec(gv, body) => {
            let G::Pi { uf, tf, ut, tt, body: inner } = &**body else {
                return Err(KindError::NonPiRecBody(body.to_string()));
            };
            let (uf2, b1) = freshen_vs_binder(ctxs, uf, &**inner);
            let (ut2, b2) = freshen_vs_binder(ctxs, ut, &b1);
            let kind = GraphKind::Pi(tf.clone(), tt.clone(), Box::new(GraphKind::Ground));
            let mut c = ctxs.clone();
            c.delta.insert(gv.clone(), kind.clone());
            c.omega = [(Key::Var(uf2.clone()), tf.clone())].into_iter().collect();
            c.psi.insert(Key::Var(uf2), tf.clone());
            c.psi.insert(Key::Var(ut2), tt.clone());
            ground(&c, &b2, "DW:RecPi")?;
            Ok((kind, Footprint::empty()))
        }
        G::App(h, a, b) => {
            let (k, fh) = graph_kind_fp(ctxs, h)?;
            let GraphKind::Pi(tf, tt, res) = k else {
                return Err(graph_err("DW:App", format!("{} is not a Π graph type", h)));
            };
            let fa = vs_check(&ctxs.omega, &Omega::new(), a, &tf)?;
            vs_check(&Omega::new(), &ctxs.psi, a, &tf)?;
            vs_check(&Omega::new(), &ctxs.psi, b, &tt)?;
            omega_split_check(&ctxs.omega, &fh, &fa)?;
            Ok((*res, fh.union(fa)))
        }
    }
}

fn expect_typ(ctxs: &Ctxs, c: &Con, rule: &'static str) -> Result<()> {
    match kind_of(ctxs, c)? {
        Kind::Typ => Ok(()),
        k => Err(KindError::KindMismatch { expected: "type".into(), found: format!("{} for {} ({})", k, c, rule) }),
    }
}

pub fn kind_of(ctxs: &Ctxs, c: &Con) -> Result<Kind> {
    match c {
        Con::Unit | Con::Base(_) => Ok(Kind::Typ),
        Con::Fun(ft) => {
            let inner = ctxs.with_psi(&ft.uf, &ft.tf).with_psi(&ft.ut, &ft.tt);
            expect_typ(&inner, &ft.dom, "K:Fun")?;
            expect_typ(&inner, &ft.cod, "K:Fun")?;
            let GraphType::App(h, a, b) = &ft.eff else {
                return Err(type_err("K:Fun", format!("effect {} is not an application", ft.eff)));
            };
            if *a != Vs::Var(ft.uf.clone()) || *b != Vs::Var(ft.ut.clone()) {
                return Err(type_err("K:Fun", format!("effect {} is not applied to the parameters", ft.eff)));
            }
            let mut ectx = ctxs.clone();
            ectx.omega = Omega::new();
            let k = graph_kind_of(&ectx, h)?;
            let want = GraphKind::Pi(ft.tf.clone(), ft.tt.clone(), Box::new(GraphKind::Ground));
            if !alpha_eq(&k, &want) {
                return Err(type_err("K:Fun", format!("effect head has kind {}, expected {}", k, want)));
            }
            Ok(Kind::Typ)
        }
        Con::Prod(a, b) | Con::Sum(a, b) => {
            expect_typ(ctxs, a, "K:Prod")?;
            expect_typ(ctxs, b, "K:Prod")?;
            Ok(Kind::Typ)
        }
        Con::Fut(a, vs) => {
            expect_typ(ctxs, a, "K:Fut")?;
            vs_check(&Omega::new(), &ctxs.psi, vs, &VsType::V)
                .map_err(|e| type_err("K:Fut", format!("{}: {}", vs, e)))?;
            Ok(Kind::Typ)
        }
        Con::Var(a) => {
            ctxs.theta.get(a).cloned().ok_or_else(|| type_err("K:Var", format!("unbound type variable {}", a)))
        }
        Con::Rec { tyvar, u, uty, body, arg } => {
            if !uty.is_contractive() {
                return Err(type_err("K:Rec", format!("{} is not contractive", uty)));
            }
            let mut inner = ctxs.with_psi(u, uty);
            inner.theta.insert(tyvar.clone(), Kind::Arrow(uty.clone()));
            expect_typ(&inner, body, "K:Rec")?;
            vs_check(&Omega::new(), &ctxs.psi, arg, uty).map_err(|e| type_err("K:Rec", format!("{}: {}", arg, e)))?;
            Ok(Kind::Typ)
        }
        Con::Lam(u, t, body) => {
            expect_typ(&ctxs.with_psi(u, t), body, "K:Lambda")?;
            Ok(Kind::Arrow(t.clone()))
        }
        Con::AppVs(f, vs) => match kind_of(ctxs, f)? {
            Kind::Arrow(t) => {
                vs_check(&Omega::new(), &ctxs.psi, vs, &t).map_err(|e| type_err("K:App", format!("{}: {}", vs, e)))?;
                Ok(Kind::Typ)
            }
            Kind::Typ => {
                Err(KindError::KindMismatch { expected: "an arrow kind".into(), found: format!("type for {}", f) })
            }
        },
    }
}

/// Evaluate every vertex structure inside a graph type.
pub fn graph_vs_normalize(g: &GraphType) -> GraphType {
    use GraphType as G;
    match g {
        G::Var(_) | G::Empty => g.clone(),
        G::Seq(a, b) => G::seq(graph_vs_normalize(a), graph_vs_normalize(b)),
        G::Par(a, b) => G::par(graph_vs_normalize(a), graph_vs_normalize(b)),
        G::Or(a, b) => G::or(graph_vs_normalize(a), graph_vs_normalize(b)),
        G::Rec(x, b) => G::Rec(x.clone(), Box::new(graph_vs_normalize(b))),
        G::Spawn(b, vs) => G::spawn(graph_vs_normalize(b), vs_eval(vs)),
        G::Touch(vs) => G::Touch(vs_eval(vs)),
        G::Pi { uf, tf, ut, tt, body } => G::Pi {
            uf: uf.clone(),
            tf: tf.clone(),
            ut: ut.clone(),
            tt: tt.clone(),
            body: Box::new(graph_vs_normalize(body)),
        },
        G::App(h, a, b) => G::app(graph_vs_normalize(h), vs_eval(a), vs_eval(b)),
        G::New(u, t, b) => G::New(u.clone(), t.clone(), Box::new(graph_vs_normalize(b))),
    }
}

/// β-normalize VS applications and evaluate embedded vertex structures.
pub fn con_normalize(c: &Con) -> Con {
    match c {
        Con::Unit | Con::Base(_) | Con::Var(_) => c.clone(),
        Con::Fun(ft) => Con::Fun(Box::new(FunTy {
            dom: con_normalize(&ft.dom),
            cod: con_normalize(&ft.cod),
            eff: graph_vs_normalize(&ft.eff),
            ..(**ft).clone()
        })),
        Con::Prod(a, b) => Con::prod(con_normalize(a), con_normalize(b)),
        Con::Sum(a, b) => Con::sum(con_normalize(a), con_normalize(b)),
        Con::Fut(a, vs) => Con::fut(con_normalize(a), vs_eval(vs)),
        Con::Rec { tyvar, u, uty, body, arg } => Con::Rec {
            tyvar: tyvar.clone(),
            u: u.clone(),
            uty: uty.clone(),
            body: Box::new(con_normalize(body)),
            arg: vs_eval(arg),
        },
        Con::Lam(u, t, body) => Con::Lam(u.clone(), t.clone(), Box::new(con_normalize(body))),
        Con::AppVs(f, vs) => match con_normalize(f) {
            Con::Lam(u, _, body) => con_normalize(&body.subst(&Subst::new().vs(&u, vs.clone()))),
            f2 => Con::app_vs(f2, vs_eval(vs)),
        },
    }
}

/// Normal forms compared up to alpha, without kind checks.
pub fn con_equal(a: &Con, b: &Con) -> bool {
    a == b || alpha_eq(&con_normalize(a), &con_normalize(b))
}

pub fn con_equiv(ctxs: &Ctxs, a: &Con, b: &Con, at: &Kind) -> Result<bool> {
    for c in [a, b] {
        match kind_of(ctxs, c) {
            Ok(k) if &k == at => {}
            _ => return Err(KindError::IllTyped(c.to_string())),
        }
    }
    Ok(con_equal(a, b))
}

/// One unrolling of a recursive type: `body[arg/u][Λu'.rec(...)(u')/α]`.
pub fn unroll_rec(c: &Con) -> Option<Con> {
    let Con::Rec { tyvar, u, uty, body, arg } = c else { return None };
    let u2 = fresh_name(u);
    let again = Con::Lam(
        u2.clone(),
        uty.clone(),
        Box::new(Con::Rec {
            tyvar: tyvar.clone(),
            u: u.clone(),
            uty: uty.clone(),
            body: body.clone(),
            arg: Vs::Var(u2),
        }),
    );
    let s = Subst::new().vs(u, arg.clone()).ty(tyvar, again);
    Some(con_normalize(&body.subst(&s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v() -> VsType {
        VsType::V
    }

    fn pipeline_g() -> GraphType {
        GraphType::rec(
            "g",
            GraphType::pi(
                "u",
                VsType::vstream(),
                "w",
                VsType::Unit,
                GraphType::spawn(
                    GraphType::app(GraphType::Var("g".into()), Vs::snd(Vs::var("u")), Vs::Unit),
                    Vs::fst(Vs::var("u")),
                ),
            ),
        )
    }

    #[test]
    fn graph_kind_examples() {
        let c = Ctxs::empty();
        assert_eq!(graph_kind_of(&c, &GraphType::Empty), Ok(GraphKind::Ground));
        let c = Ctxs::empty().with_new("u", &v());
        assert_eq!(graph_kind_of(&c, &GraphType::spawn(GraphType::Empty, Vs::var("u"))), Ok(GraphKind::Ground));
        assert_eq!(
            graph_kind_of(&Ctxs::empty(), &pipeline_g()),
            Ok(GraphKind::Pi(VsType::vstream(), VsType::Unit, Box::new(GraphKind::Ground)))
        );
    }

    #[test]
    fn graph_kind_errors() {
        let c = Ctxs::empty().with_new("u", &v());
        let twice = GraphType::seq(
            GraphType::spawn(GraphType::Empty, Vs::var("u")),
            GraphType::spawn(GraphType::Empty, Vs::var("u")),
        );
        assert!(graph_kind_of(&c, &twice).is_err());
        let rec = GraphType::rec("g", GraphType::Empty);
        assert!(matches!(graph_kind_of(&c, &rec), Err(KindError::NonPiRecBody(_))));
        let c2 = Ctxs::empty().with_new("u", &VsType::both(v(), v()));
        assert!(matches!(
            graph_kind_of(&c2, &GraphType::spawn(GraphType::Empty, Vs::var("u"))),
            Err(KindError::SpawnNotSingleVertex(_))
        ));
        assert!(matches!(graph_kind_of(&c2, &GraphType::Touch(Vs::var("u"))), Err(KindError::TouchNotVertex(_))));
    }

    #[test]
    fn or_shares_resources() {
        let c = Ctxs::empty().with_new("u", &v());
        let g = GraphType::or(
            GraphType::spawn(GraphType::Empty, Vs::var("u")),
            GraphType::spawn(GraphType::Empty, Vs::var("u")),
        );
        assert_eq!(graph_kind_of(&c, &g), Ok(GraphKind::Ground));
    }

    fn int_list() -> Con {
        // Λ(u':vstream). rec α(u:vstream). (1 + (Fut int (fst u) × α (snd u))) u'
        let body = Con::sum(
            Con::Unit,
            Con::prod(
                Con::fut(Con::Base(BaseTy::Int), Vs::fst(Vs::var("u"))),
                Con::app_vs(Con::Var("a".into()), Vs::snd(Vs::var("u"))),
            ),
        );
        Con::Lam(
            "u2".into(),
            VsType::vstream(),
            Box::new(Con::Rec {
                tyvar: "a".into(),
                u: "u".into(),
                uty: VsType::vstream(),
                body: Box::new(body),
                arg: Vs::var("u2"),
            }),
        )
    }

    #[test]
    fn kind_examples() {
        let c = Ctxs::empty();
        assert_eq!(kind_of(&c, &Con::Unit), Ok(Kind::Typ));
        assert_eq!(kind_of(&c, &int_list()), Ok(Kind::Arrow(VsType::vstream())));
        assert!(matches!(
            kind_of(&c, &Con::fut(Con::Unit, Vs::var("u"))),
            Err(KindError::IllFormedType { rule: "K:Fut", .. })
        ));
    }

    #[test]
    fn equiv_examples() {
        let c = Ctxs::empty().with_psi("w", &v()).with_psi("u", &v());
        let lam = Con::Lam("u".into(), v(), Box::new(Con::fut(Con::Unit, Vs::var("u"))));
        let a = Con::app_vs(lam, Vs::var("w"));
        assert_eq!(con_equiv(&c, &a, &Con::fut(Con::Unit, Vs::var("w")), &Kind::Typ), Ok(true));
        let f = Con::fut(Con::Unit, Vs::fst(Vs::pair(Vs::var("u"), Vs::var("w"))));
        assert_eq!(con_equiv(&c, &f, &Con::fut(Con::Unit, Vs::var("u")), &Kind::Typ), Ok(true));
        let p = Con::prod(Con::Unit, Con::Unit);
        let s = Con::sum(Con::Unit, Con::Unit);
        assert_eq!(con_equiv(&c, &p, &s, &Kind::Typ), Ok(false));
    }

    #[test]
    fn unroll_list() {
        let c = Con::app_vs(int_list(), Vs::var("w"));
        let rec = con_normalize(&c);
        let un = unroll_rec(&rec).unwrap();
        let Con::Sum(_, r) = un else { panic!() };
        let Con::Prod(fut, tail) = *r else { panic!() };
        assert_eq!(*fut, Con::fut(Con::Base(BaseTy::Int), Vs::fst(Vs::var("w"))));
        match *tail {
            Con::Rec { arg, .. } => assert_eq!(arg, Vs::snd(Vs::var("w"))),
            other => panic!("{}", other),
        }
    }
}
