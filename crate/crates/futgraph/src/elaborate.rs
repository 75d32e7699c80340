//! Annotating unannotated types and values with vertex structures, plus
//! the unannotated kinding and typing judgments and affine value typing.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::exprtype;
use crate::kindcheck::{con_equal, con_normalize, kind_of, unroll_rec};
use crate::syntax::*;
use crate::vstruct::{omega_split_check, vs_check, Footprint, VsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error("unbound type variable {0}")]
    UnboundTyVar(String),
    #[error("recursive type {0} is not contractive")]
    NonContractive(String),
    #[error("ill-formed unannotated type: {0}")]
    IllFormed(String),
    #[error("value {value} does not have type {ty}")]
    IllTyped { value: String, ty: String },
    #[error("affine violation: {0}")]
    AffineViolation(String),
    #[error("unbound path {0}")]
    UnboundPath(String),
    #[error(transparent)]
    Vs(VsError),
}

impl From<VsError> for ElabError {
    fn from(e: VsError) -> Self {
        match e {
            VsError::AffineViolation(m) | VsError::OverlappingSpawns(m) => ElabError::AffineViolation(m),
            VsError::UnboundVertex(p) => ElabError::UnboundPath(p),
            e => ElabError::Vs(e),
        }
    }
}

type Result<T> = std::result::Result<T, ElabError>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UType {
    Var(Name),
    Unit,
    Base(BaseTy),
    /// Function types arrive already annotated.
    Fun(Box<FunTy>),
    Prod(Box<UType>, Box<UType>),
    Sum(Box<UType>, Box<UType>),
    Fut(Box<UType>),
    Rec(Name, Box<UType>),
}

impl UType {
    pub fn prod(a: UType, b: UType) -> UType {
        UType::Prod(Box::new(a), Box::new(b))
    }
    pub fn sum(a: UType, b: UType) -> UType {
        UType::Sum(Box::new(a), Box::new(b))
    }
    pub fn fut(a: UType) -> UType {
        UType::Fut(Box::new(a))
    }
    pub fn rec(a: &str, body: UType) -> UType {
        UType::Rec(a.to_string(), Box::new(body))
    }

    pub fn depth(&self) -> usize {
        match self {
            UType::Var(_) | UType::Unit | UType::Base(_) | UType::Fun(_) => 1,
            UType::Prod(a, b) | UType::Sum(a, b) => 1 + a.depth().max(b.depth()),
            UType::Fut(a) | UType::Rec(_, a) => 1 + a.depth(),
        }
    }

    fn subst_var(&self, x: &str, r: &UType) -> UType {
        match self {
            UType::Var(y) if y == x => r.clone(),
            UType::Var(_) | UType::Unit | UType::Base(_) | UType::Fun(_) => self.clone(),
            UType::Prod(a, b) => UType::prod(a.subst_var(x, r), b.subst_var(x, r)),
            UType::Sum(a, b) => UType::sum(a.subst_var(x, r), b.subst_var(x, r)),
            UType::Fut(a) => UType::fut(a.subst_var(x, r)),
            UType::Rec(y, _) if y == x => self.clone(),
            UType::Rec(y, b) => UType::rec(y, b.subst_var(x, r)),
        }
    }

    /// One unrolling of a recursive type.
    pub fn unroll(&self) -> Option<UType> {
        match self {
            UType::Rec(x, b) => Some(b.subst_var(x, self)),
            _ => None,
        }
    }
}

impl std::fmt::Display for UType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UType::Var(x) => write!(f, "{}", x),
            UType::Unit => write!(f, "unit"),
            UType::Base(BaseTy::Int) => write!(f, "int"),
            UType::Base(BaseTy::Float) => write!(f, "float"),
            UType::Fun(ft) => write!(f, "{}", Con::Fun(ft.clone())),
            UType::Prod(a, b) => write!(f, "(prod {} {})", a, b),
            UType::Sum(a, b) => write!(f, "(sum {} {})", a, b),
            UType::Fut(a) => write!(f, "(fut {})", a),
            UType::Rec(x, b) => write!(f, "(rec {} {})", x, b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UValue {
    Triv,
    Lit(Lit),
    Fun(Box<FunExpr>),
    Pair(Box<UValue>, Box<UValue>),
    InL(Box<UValue>),
    InR(Box<UValue>),
    Roll(Box<UValue>),
    Handle(Box<UValue>),
}

impl std::fmt::Display for UValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UValue::Triv => write!(f, "(triv)"),
            UValue::Lit(l) => write!(f, "{}", l),
            UValue::Fun(fe) => write!(f, "{}", Expr::Fun(fe.clone())),
            UValue::Pair(a, b) => write!(f, "(pair {} {})", a, b),
            UValue::InL(a) => write!(f, "(inl {})", a),
            UValue::InR(a) => write!(f, "(inr {})", a),
            UValue::Roll(a) => write!(f, "(roll {})", a),
            UValue::Handle(a) => write!(f, "(handle {})", a),
        }
    }
}

impl UValue {
    pub fn size(&self) -> usize {
        match self {
            UValue::Triv | UValue::Lit(_) | UValue::Fun(_) => 1,
            UValue::Pair(a, b) => 1 + a.size() + b.size(),
            UValue::InL(a) | UValue::InR(a) | UValue::Roll(a) | UValue::Handle(a) => 1 + a.size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotResult {
    pub con: Con,
    pub vsty: VsType,
}

/// Annotated type-variable context: each variable's kind is `ς ⇒ type`.
pub type TyCtx = BTreeMap<Name, Kind>;

pub fn annotate_type(theta: &TyCtx, vs: &Vs, t: &UType) -> Result<AnnotResult> {
    let leaf = |con: Con| Ok(AnnotResult { con, vsty: VsType::V });
    match t {
        UType::Var(a) => match theta.get(a) {
            Some(Kind::Arrow(s)) => {
                Ok(AnnotResult { con: Con::app_vs(Con::Var(a.clone()), vs.clone()), vsty: s.clone() })
            }
            Some(Kind::Typ) => Err(ElabError::IllFormed(format!("{} has kind type", a))),
            None => Err(ElabError::UnboundTyVar(a.clone())),
        },
        UType::Unit => leaf(Con::Unit),
        UType::Base(b) => leaf(Con::Base(*b)),
        UType::Fun(ft) => leaf(Con::Fun(ft.clone())),
        UType::Prod(a, b) | UType::Sum(a, b) => {
            let ra = annotate_type(theta, &Vs::fst(vs.clone()), a)?;
            let rb = annotate_type(theta, &Vs::snd(vs.clone()), b)?;
            let con = if matches!(t, UType::Prod(..)) { Con::prod(ra.con, rb.con) } else { Con::sum(ra.con, rb.con) };
            Ok(AnnotResult { con, vsty: VsType::both(ra.vsty, rb.vsty) })
        }
        // A future of a base value needs only its own vertex.
        UType::Fut(a) if matches!(**a, UType::Base(_)) => {
            let UType::Base(b) = **a else { unreachable!() };
            Ok(AnnotResult { con: Con::fut(Con::Base(b), vs.clone()), vsty: VsType::V })
        }
        UType::Fut(a) => {
            let r = annotate_type(theta, &Vs::fst(vs.clone()), a)?;
            Ok(AnnotResult { con: Con::fut(r.con, Vs::snd(vs.clone())), vsty: VsType::both(r.vsty, VsType::V) })
        }
        UType::Rec(a, body) => {
            // Annotate against a placeholder VS type, then tie the knot.
            let tv = fresh_name("t");
            let u = fresh_name("u");
            let mut inner = theta.clone();
            inner.insert(a.clone(), Kind::Arrow(VsType::Var(tv.clone())));
            let r = annotate_type(&inner, &Vs::Var(u.clone()), body)?;
            let sigma = VsType::corec(&tv, r.vsty);
            if !sigma.is_contractive() {
                return Err(ElabError::NonContractive(t.to_string()));
            }
            let con = r.con.subst(&Subst::new().vsty(&tv, sigma.clone()));
            Ok(AnnotResult {
                con: Con::Rec { tyvar: a.clone(), u, uty: sigma.clone(), body: Box::new(con), arg: vs.clone() },
                vsty: sigma,
            })
        }
    }
}

pub fn annotate_value(p: &VPath, uv: &UValue) -> Value {
    match uv {
        UValue::Triv => Value::Triv,
        UValue::Lit(l) => Value::Lit(*l),
        UValue::Fun(fe) => Value::Fun(fe.clone()),
        UValue::Pair(a, b) => Value::pair(annotate_value(&p.proj(Proj::Fst), a), annotate_value(&p.proj(Proj::Snd), b)),
        UValue::InL(a) => Value::InL(Box::new(annotate_value(&p.proj(Proj::Fst), a))),
        UValue::InR(a) => Value::InR(Box::new(annotate_value(&p.proj(Proj::Snd), a))),
        UValue::Roll(a) => Value::Roll(Box::new(annotate_value(p, a))),
        UValue::Handle(a) => match &**a {
            UValue::Lit(l) => Value::Handle(p.clone(), Box::new(Value::Lit(*l))),
            _ => Value::Handle(p.proj(Proj::Snd), Box::new(annotate_value(&p.proj(Proj::Fst), a))),
        },
    }
}

/// Affine typing of values: each handle consumes its path from Ω.
pub fn affine_value_type(omega: &Omega, v: &Value, expected: &Con) -> Result<Con> {
    affine(omega, v, expected)?;
    Ok(expected.clone())
}

fn ill(v: &Value, t: &Con) -> ElabError {
    ElabError::IllTyped { value: v.to_string(), ty: t.to_string() }
}

fn affine(omega: &Omega, v: &Value, expected: &Con) -> Result<Footprint> {
    let n = con_normalize(expected);
    match (v, &n) {
        (Value::Triv, Con::Unit) => Ok(Footprint::empty()),
        (Value::Lit(Lit::Int(_)), Con::Base(BaseTy::Int)) => Ok(Footprint::empty()),
        (Value::Lit(Lit::Float(_)), Con::Base(BaseTy::Float)) => Ok(Footprint::empty()),
        (Value::Fun(_), Con::Fun(_)) => {
            let mut c = Ctxs::empty();
            c.psi = omega.clone();
            exprtype::value_type(&c, v, Some(&n)).map_err(|_| ill(v, &n))?;
            Ok(Footprint::empty())
        }
        (Value::Pair(a, b), Con::Prod(ta, tb)) => {
            let fa = affine(omega, a, ta)?;
            let fb = affine(omega, b, tb)?;
            omega_split_check(omega, &fa, &fb)?;
            Ok(fa.union(fb))
        }
        (Value::InL(a), Con::Sum(ta, _)) => affine(omega, a, ta),
        (Value::InR(a), Con::Sum(_, tb)) => affine(omega, a, tb),
        (Value::Roll(a), Con::Rec { .. }) => affine(omega, a, &unroll_rec(&n).unwrap()),
        (Value::Handle(p, a), Con::Fut(ta, vs)) => {
            let here = p.to_vs();
            if !con_equal(&Con::fut(Con::Unit, here.clone()), &Con::fut(Con::Unit, vs.clone())) {
                return Err(ill(v, &n));
            }
            let fp = vs_check(omega, &Omega::new(), &here, &VsType::V)?;
            let fa = affine(omega, a, ta)?;
            omega_split_check(omega, &fa, &fp)?;
            Ok(fa.union(fp))
        }
        _ => Err(ill(v, &n)),
    }
}

fn contractive(a: &Name, t: &UType) -> bool {
    match t {
        UType::Var(x) => x != a,
        UType::Rec(x, b) => contractive(a, b) && contractive(x, b),
        _ => true,
    }
}

pub fn unann_kind(theta: &BTreeSet<Name>, t: &UType) -> Result<()> {
    match t {
        UType::Var(a) if theta.contains(a) => Ok(()),
        UType::Var(a) => Err(ElabError::UnboundTyVar(a.clone())),
        UType::Unit | UType::Base(_) => Ok(()),
        UType::Fun(ft) => match kind_of(&Ctxs::empty(), &Con::Fun(ft.clone())) {
            Ok(Kind::Typ) => Ok(()),
            _ => Err(ElabError::IllFormed(t.to_string())),
        },
        UType::Prod(a, b) | UType::Sum(a, b) => {
            unann_kind(theta, a)?;
            unann_kind(theta, b)
        }
        UType::Fut(a) => unann_kind(theta, a),
        UType::Rec(a, b) => {
            if !contractive(a, b) {
                return Err(ElabError::NonContractive(t.to_string()));
            }
            let mut inner = theta.clone();
            inner.insert(a.clone());
            unann_kind(&inner, b)
        }
    }
}

pub fn unann_value_type(uv: &UValue, t: &UType) -> bool {
    match (uv, t) {
        (_, UType::Rec(..)) if !matches!(uv, UValue::Roll(_)) => false,
        (UValue::Triv, UType::Unit) => true,
        (UValue::Lit(Lit::Int(_)), UType::Base(BaseTy::Int)) => true,
        (UValue::Lit(Lit::Float(_)), UType::Base(BaseTy::Float)) => true,
        (UValue::Fun(fe), UType::Fun(ft)) => exprtype::value_type(&Ctxs::empty(), &Value::Fun(fe.clone()), None)
            .map(|c| con_equal(&c, &Con::Fun(ft.clone())))
            .unwrap_or(false),
        (UValue::Pair(a, b), UType::Prod(ta, tb)) => unann_value_type(a, ta) && unann_value_type(b, tb),
        (UValue::InL(a), UType::Sum(ta, _)) => unann_value_type(a, ta),
        (UValue::InR(a), UType::Sum(_, tb)) => unann_value_type(a, tb),
        (UValue::Roll(a), UType::Rec(..)) => unann_value_type(a, &t.unroll().unwrap()),
        (UValue::Handle(a), UType::Fut(ta)) => unann_value_type(a, ta),
        _ => false,
    }
}

pub fn ann_ctx(theta: &BTreeMap<Name, Kind>) -> TyCtx {
    theta
        .iter()
        .map(|(a, k)| {
            let k = match k {
                Kind::Typ => Kind::Arrow(VsType::Var(fresh_name("t"))),
                k => k.clone(),
            };
            (a.clone(), k)
        })
        .collect()
}

pub fn unann_ctx(theta: &TyCtx) -> BTreeMap<Name, Kind> {
    theta.keys().map(|a| (a.clone(), Kind::Typ)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vstruct::vsty_subtype;

    fn int_futlist() -> UType {
        UType::rec(
            "a",
            UType::sum(UType::Unit, UType::prod(UType::fut(UType::Base(BaseTy::Int)), UType::Var("a".into()))),
        )
    }

    #[test]
    fn unit_is_v() {
        let r = annotate_type(&TyCtx::new(), &Vs::var("w"), &UType::Unit).unwrap();
        assert_eq!(r, AnnotResult { con: Con::Unit, vsty: VsType::V });
    }

    #[test]
    fn future_list_example() {
        let r = annotate_type(&TyCtx::new(), &Vs::var("w"), &int_futlist()).unwrap();
        let u = Vs::var("u");
        let body = Con::sum(
            Con::Unit,
            Con::prod(
                Con::fut(Con::Base(BaseTy::Int), Vs::fst(Vs::snd(u.clone()))),
                Con::app_vs(Con::Var("a".into()), Vs::snd(Vs::snd(u))),
            ),
        );
        let sigma = VsType::corec("t", VsType::both(VsType::V, VsType::both(VsType::V, VsType::Var("t".into()))));
        let want =
            Con::Rec { tyvar: "a".into(), u: "u".into(), uty: sigma.clone(), body: Box::new(body), arg: Vs::var("w") };
        assert!(alpha_eq(&r.con, &want), "{}", r.con);
        assert!(alpha_eq(&r.vsty, &sigma));
        // equivalent to the plain stream
        assert!(vsty_subtype(&r.vsty, &VsType::vstream()) && vsty_subtype(&VsType::vstream(), &r.vsty));
    }

    #[test]
    fn product_routes_projections() {
        let t = UType::prod(UType::fut(UType::Unit), UType::Unit);
        let r = annotate_type(&TyCtx::new(), &Vs::var("w"), &t).unwrap();
        let w = Vs::var("w");
        assert_eq!(r.con, Con::prod(Con::fut(Con::Unit, Vs::snd(Vs::fst(w))), Con::Unit));
        assert_eq!(r.vsty, VsType::both(VsType::both(VsType::V, VsType::V), VsType::V));
    }

    #[test]
    fn non_contractive_rejected() {
        let t = UType::rec("a", UType::Var("a".into()));
        assert!(matches!(unann_kind(&BTreeSet::new(), &t), Err(ElabError::NonContractive(_))));
        assert!(matches!(annotate_type(&TyCtx::new(), &Vs::Unit, &t), Err(ElabError::NonContractive(_))));
    }

    #[test]
    fn two_handle_list() {
        let nil = UValue::Roll(Box::new(UValue::InL(Box::new(UValue::Triv))));
        let cons = |h: i64, tl: UValue| {
            UValue::Roll(Box::new(UValue::InR(Box::new(UValue::Pair(
                Box::new(UValue::Handle(Box::new(UValue::Lit(Lit::Int(h))))),
                Box::new(tl),
            )))))
        };
        let uv = cons(1, cons(2, nil));
        assert!(unann_value_type(&uv, &int_futlist()));
        let r = annotate_type(&TyCtx::new(), &Vs::Unit, &int_futlist()).unwrap();
        let gen = Gen::fresh();
        let p = VPath::root(r.vsty.clone(), gen);
        let v = annotate_value(&p, &uv);
        let mut handles = Vec::new();
        fn collect(v: &Value, out: &mut Vec<VPath>) {
            match v {
                Value::Handle(p, a) => {
                    out.push(p.clone());
                    collect(a, out)
                }
                Value::Pair(a, b) => {
                    collect(a, out);
                    collect(b, out)
                }
                Value::InL(a) | Value::InR(a) | Value::Roll(a) => collect(a, out),
                _ => {}
            }
        }
        collect(&v, &mut handles);
        use Proj::*;
        assert_eq!(handles[0].spine, vec![Snd, Fst]);
        assert_eq!(handles[1].spine, vec![Snd, Snd, Snd, Fst]);
        let root = Vs::Root(r.vsty.clone(), gen);
        let ty = annotate_type(&TyCtx::new(), &root, &int_futlist()).unwrap().con;
        let omega: Omega = [(Key::Gen(gen), r.vsty)].into_iter().collect();
        assert!(affine_value_type(&omega, &v, &ty).is_ok());
    }

    #[test]
    fn generic_handle_uses_snd() {
        let gen = Gen::fresh();
        let p = VPath::root(VsType::both(VsType::V, VsType::V), gen);
        let v = annotate_value(&p, &UValue::Handle(Box::new(UValue::Triv)));
        assert_eq!(v, Value::Handle(p.proj(Proj::Snd), Box::new(Value::Triv)));
    }

    #[test]
    fn affine_examples() {
        let gen = Gen::fresh();
        let t = VsType::both(VsType::V, VsType::V);
        let omega: Omega = [(Key::Gen(gen), t.clone())].into_iter().collect();
        let p = VPath::root(t, gen).proj(Proj::Fst);
        let h = Value::Handle(p.clone(), Box::new(Value::Triv));
        let ft = Con::fut(Con::Unit, p.to_vs());
        assert_eq!(affine_value_type(&omega, &Value::Triv, &Con::Unit), Ok(Con::Unit));
        assert_eq!(affine_value_type(&omega, &h, &ft), Ok(ft.clone()));
        let twice = Value::pair(h.clone(), h);
        assert!(matches!(
            affine_value_type(&omega, &twice, &Con::prod(ft.clone(), ft)),
            Err(ElabError::AffineViolation(_))
        ));
    }

    #[test]
    fn unann_judgments() {
        let t = UType::rec("a", UType::sum(UType::Unit, UType::Var("a".into())));
        assert!(unann_kind(&BTreeSet::new(), &t).is_ok());
        assert!(unann_kind(&BTreeSet::new(), &UType::fut(UType::Unit)).is_ok());
        let v = UValue::Roll(Box::new(UValue::InL(Box::new(UValue::Triv))));
        assert!(unann_value_type(&v, &t));
        assert!(!unann_value_type(&UValue::Triv, &t));
    }

    #[test]
    fn ctx_round_trip() {
        assert!(ann_ctx(&BTreeMap::new()).is_empty());
        let theta: BTreeMap<Name, Kind> = [("a".to_string(), Kind::Typ)].into_iter().collect();
        let ann = ann_ctx(&theta);
        assert!(matches!(ann["a"], Kind::Arrow(VsType::Var(_))));
        assert_eq!(unann_ctx(&ann), theta);
    }
}
