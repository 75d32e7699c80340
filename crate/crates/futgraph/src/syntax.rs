//! Abstract syntax for vertex structures, graph types, type constructors,
//! expressions and values, with capture-avoiding substitution and
//! alpha-equivalence.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

pub type Name = String;

static FRESH: AtomicU64 = AtomicU64::new(0);

/// Next value of the global fresh counter. Shared by names, generators and
/// anonymous graph vertices so they never collide.
pub fn fresh_id() -> u64 {
    FRESH.fetch_add(1, Ordering::Relaxed)
}

/// Make sure future fresh ids are at least `min` (used after parsing
/// generator names out of text).
pub fn reserve_ids(min: u64) {
    FRESH.fetch_max(min, Ordering::Relaxed);
}

pub fn fresh_name(base: &str) -> Name {
    let stem = base.split('#').next().unwrap_or(base);
    let stem = if stem.is_empty() || stem.starts_with('~') { "v" } else { stem };
    format!("{}#{}", stem, fresh_id())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Avail {
    Av,
    Unav,
}

impl Avail {
    pub fn is_av(self) -> bool {
        self == Avail::Av
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VsType {
    V,
    Unit,
    Prod(Box<VsType>, Avail, Box<VsType>, Avail),
    Var(Name),
    Corec(Name, Box<VsType>),
}

impl VsType {
    pub fn prod(a: VsType, la: Avail, b: VsType, ra: Avail) -> VsType {
        VsType::Prod(Box::new(a), la, Box::new(b), ra)
    }

    /// Both components available.
    pub fn both(a: VsType, b: VsType) -> VsType {
        VsType::prod(a, Avail::Av, b, Avail::Av)
    }

    pub fn corec(t: &str, body: VsType) -> VsType {
        VsType::Corec(t.to_string(), Box::new(body))
    }

    /// `corec t.(V@+ × t@+)`
    pub fn vstream() -> VsType {
        VsType::corec("t", VsType::both(VsType::V, VsType::Var("t".into())))
    }

    /// Binder occurs only underneath a product.
    pub fn is_contractive(&self) -> bool {
        fn go(t: &VsType, unguarded: &mut Vec<Name>) -> bool {
            match t {
                VsType::V | VsType::Unit => true,
                VsType::Var(n) => !unguarded.contains(n),
                VsType::Prod(a, _, b, _) => {
                    let mut none = Vec::new();
                    go(a, &mut none) && go(b, &mut none)
                }
                VsType::Corec(n, body) => {
                    unguarded.push(n.clone());
                    let ok = go(body, unguarded);
                    unguarded.pop();
                    ok
                }
            }
        }
        go(self, &mut Vec::new())
    }

    pub fn depth(&self) -> usize {
        match self {
            VsType::V | VsType::Unit | VsType::Var(_) => 1,
            VsType::Prod(a, _, b, _) => 1 + a.depth().max(b.depth()),
            VsType::Corec(_, b) => 1 + b.depth(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen(pub u64);

impl Gen {
    pub fn fresh() -> Gen {
        Gen(fresh_id())
    }
}

impl std::fmt::Display for Gen {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Vs {
    Var(Name),
    /// The unit vertex structure, typed at `UnitVs`.
    Unit,
    Pair(Box<Vs>, Box<Vs>),
    Fst(Box<Vs>),
    Snd(Box<Vs>),
    Root(VsType, Gen),
}

impl Vs {
    pub fn var(n: &str) -> Vs {
        Vs::Var(n.to_string())
    }
    pub fn fst(v: Vs) -> Vs {
        Vs::Fst(Box::new(v))
    }
    pub fn snd(v: Vs) -> Vs {
        Vs::Snd(Box::new(v))
    }
    pub fn pair(a: Vs, b: Vs) -> Vs {
        Vs::Pair(Box::new(a), Box::new(b))
    }
    pub fn proj(self, p: Proj) -> Vs {
        match p {
            Proj::Fst => Vs::fst(self),
            Proj::Snd => Vs::snd(self),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Proj {
    Fst,
    Snd,
}

/// A closed normal vertex structure: projections over a generator root.
/// The spine is listed from the root outward.
#[derive(Clone, Debug)]
pub struct VPath {
    pub gen: Gen,
    pub ty: VsType,
    pub spine: Vec<Proj>,
}

impl PartialEq for VPath {
    fn eq(&self, o: &Self) -> bool {
        self.gen == o.gen && self.spine == o.spine
    }
}
impl Eq for VPath {}
impl std::hash::Hash for VPath {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.gen.hash(h);
        self.spine.hash(h);
    }
}
impl PartialOrd for VPath {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for VPath {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (self.gen, &self.spine).cmp(&(o.gen, &o.spine))
    }
}

impl VPath {
    pub fn root(ty: VsType, gen: Gen) -> VPath {
        VPath { gen, ty, spine: Vec::new() }
    }

    pub fn to_vs(&self) -> Vs {
        self.spine.iter().fold(Vs::Root(self.ty.clone(), self.gen), |acc, p| acc.proj(*p))
    }

    pub fn proj(&self, p: Proj) -> VPath {
        let mut spine = self.spine.clone();
        spine.push(p);
        VPath { gen: self.gen, ty: self.ty.clone(), spine }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GraphType {
    Var(Name),
    Empty,
    Seq(Box<GraphType>, Box<GraphType>),
    Par(Box<GraphType>, Box<GraphType>),
    Or(Box<GraphType>, Box<GraphType>),
    Rec(Name, Box<GraphType>),
    Spawn(Box<GraphType>, Vs),
    Touch(Vs),
    Pi { uf: Name, tf: VsType, ut: Name, tt: VsType, body: Box<GraphType> },
    App(Box<GraphType>, Vs, Vs),
    New(Name, VsType, Box<GraphType>),
}

impl GraphType {
    pub fn seq(a: GraphType, b: GraphType) -> GraphType {
        GraphType::Seq(Box::new(a), Box::new(b))
    }
    pub fn or(a: GraphType, b: GraphType) -> GraphType {
        GraphType::Or(Box::new(a), Box::new(b))
    }
    pub fn par(a: GraphType, b: GraphType) -> GraphType {
        GraphType::Par(Box::new(a), Box::new(b))
    }
    pub fn spawn(g: GraphType, vs: Vs) -> GraphType {
        GraphType::Spawn(Box::new(g), vs)
    }
    pub fn rec(g: &str, body: GraphType) -> GraphType {
        GraphType::Rec(g.to_string(), Box::new(body))
    }
    pub fn app(g: GraphType, a: Vs, b: Vs) -> GraphType {
        GraphType::App(Box::new(g), a, b)
    }
    pub fn new_vs(u: &str, ty: VsType, g: GraphType) -> GraphType {
        GraphType::New(u.to_string(), ty, Box::new(g))
    }
    pub fn pi(uf: &str, tf: VsType, ut: &str, tt: VsType, body: GraphType) -> GraphType {
        GraphType::Pi { uf: uf.to_string(), tf, ut: ut.to_string(), tt, body: Box::new(body) }
    }

    /// Sequence a list, right-nested; empty list is `•`.
    pub fn seq_all(parts: Vec<GraphType>) -> GraphType {
        let mut it = parts.into_iter().rev();
        match it.next() {
            None => GraphType::Empty,
            Some(last) => it.fold(last, |acc, g| GraphType::seq(g, acc)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            GraphType::Var(_) | GraphType::Empty | GraphType::Touch(_) => 1,
            GraphType::Seq(a, b) | GraphType::Par(a, b) | GraphType::Or(a, b) => 1 + a.size() + b.size(),
            GraphType::Rec(_, b) | GraphType::Spawn(b, _) | GraphType::App(b, _, _) => 1 + b.size(),
            GraphType::Pi { body, .. } | GraphType::New(_, _, body) => 1 + body.size(),
        }
    }

    pub fn count_rec(&self) -> usize {
        match self {
            GraphType::Var(_) | GraphType::Empty | GraphType::Touch(_) => 0,
            GraphType::Seq(a, b) | GraphType::Par(a, b) | GraphType::Or(a, b) => a.count_rec() + b.count_rec(),
            GraphType::Rec(_, b) => 1 + b.count_rec(),
            GraphType::Spawn(b, _) | GraphType::App(b, _, _) => b.count_rec(),
            GraphType::Pi { body, .. } | GraphType::New(_, _, body) => body.count_rec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Ground,
    Pi(VsType, VsType, Box<GraphKind>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Typ,
    Arrow(VsType),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseTy {
    Int,
    Float,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunTy {
    pub uf: Name,
    pub tf: VsType,
    pub ut: Name,
    pub tt: VsType,
    pub dom: Con,
    pub cod: Con,
    pub eff: GraphType,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Con {
    Unit,
    Base(BaseTy),
    Fun(Box<FunTy>),
    Prod(Box<Con>, Box<Con>),
    Sum(Box<Con>, Box<Con>),
    Fut(Box<Con>, Vs),
    Var(Name),
    Rec { tyvar: Name, u: Name, uty: VsType, body: Box<Con>, arg: Vs },
    Lam(Name, VsType, Box<Con>),
    AppVs(Box<Con>, Vs),
}

impl Con {
    pub fn prod(a: Con, b: Con) -> Con {
        Con::Prod(Box::new(a), Box::new(b))
    }
    pub fn sum(a: Con, b: Con) -> Con {
        Con::Sum(Box::new(a), Box::new(b))
    }
    pub fn fut(a: Con, vs: Vs) -> Con {
        Con::Fut(Box::new(a), vs)
    }
    pub fn app_vs(c: Con, vs: Vs) -> Con {
        Con::AppVs(Box::new(c), vs)
    }
    pub fn bool_ty() -> Con {
        Con::sum(Con::Unit, Con::Unit)
    }
}

/// Float wrapper with bitwise equality so literals can live in hashed syntax.
#[derive(Clone, Copy, Debug)]
pub struct F64(pub f64);

impl PartialEq for F64 {
    fn eq(&self, o: &Self) -> bool {
        self.0.to_bits() == o.0.to_bits()
    }
}
impl Eq for F64 {}
impl std::hash::Hash for F64 {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.0.to_bits().hash(h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lit {
    Int(i64),
    Float(F64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Eq,
}

impl PrimOp {
    pub fn symbol(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Sub => "-",
            PrimOp::Mul => "*",
            PrimOp::Div => "/",
            PrimOp::Pow => "**",
            PrimOp::Lt => "<",
            PrimOp::Le => "<=",
            PrimOp::Eq => "=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<PrimOp> {
        Some(match s {
            "+" => PrimOp::Add,
            "-" => PrimOp::Sub,
            "*" => PrimOp::Mul,
            "/" => PrimOp::Div,
            "**" => PrimOp::Pow,
            "<" => PrimOp::Lt,
            "<=" => PrimOp::Le,
            "=" => PrimOp::Eq,
            _ => return None,
        })
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, PrimOp::Lt | PrimOp::Le | PrimOp::Eq)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunExpr {
    pub uf: Name,
    pub tf: VsType,
    pub ut: Name,
    pub tt: VsType,
    pub f: Name,
    pub x: Name,
    pub dom: Con,
    pub cod: Con,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Name),
    Triv,
    Lit(Lit),
    Fun(Box<FunExpr>),
    App(Box<Expr>, Vs, Vs, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    InL(Box<Expr>),
    InR(Box<Expr>),
    Case(Box<Expr>, Name, Box<Expr>, Name, Box<Expr>),
    Roll(Box<Expr>),
    Unroll(Box<Expr>),
    Future(Vs, Box<Expr>),
    Touch(Box<Expr>),
    New(Name, VsType, Box<Expr>),
    Par(Box<Expr>, Box<Expr>),
    Let(Name, Box<Expr>, Box<Expr>),
    Ann(Box<Expr>, Con),
    Prim(PrimOp, Box<Expr>, Box<Expr>),
    Val(Box<Value>),
}

impl Expr {
    pub fn var(x: &str) -> Expr {
        Expr::Var(x.to_string())
    }
    pub fn pair(a: Expr, b: Expr) -> Expr {
        Expr::Pair(Box::new(a), Box::new(b))
    }
    pub fn future(vs: Vs, e: Expr) -> Expr {
        Expr::Future(vs, Box::new(e))
    }
    pub fn touch(e: Expr) -> Expr {
        Expr::Touch(Box::new(e))
    }
    pub fn new_vs(u: &str, ty: VsType, e: Expr) -> Expr {
        Expr::New(u.to_string(), ty, Box::new(e))
    }
    pub fn app(f: Expr, a: Vs, b: Vs, arg: Expr) -> Expr {
        Expr::App(Box::new(f), a, b, Box::new(arg))
    }
    pub fn let_(x: &str, a: Expr, b: Expr) -> Expr {
        Expr::Let(x.to_string(), Box::new(a), Box::new(b))
    }
    pub fn int(n: i64) -> Expr {
        Expr::Lit(Lit::Int(n))
    }
    pub fn float(x: f64) -> Expr {
        Expr::Lit(Lit::Float(F64(x)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Triv,
    Lit(Lit),
    Fun(Box<FunExpr>),
    Pair(Box<Value>, Box<Value>),
    InL(Box<Value>),
    InR(Box<Value>),
    Roll(Box<Value>),
    Handle(VPath, Box<Value>),
}

impl Value {
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn into_expr(self) -> Expr {
        Expr::Val(Box::new(self))
    }

    pub fn size(&self) -> usize {
        match self {
            Value::Triv | Value::Lit(_) | Value::Fun(_) => 1,
            Value::Pair(a, b) => 1 + a.size() + b.size(),
            Value::InL(a) | Value::InR(a) | Value::Roll(a) | Value::Handle(_, a) => 1 + a.size(),
        }
    }
}

/// A context key: either a source-level vertex variable or a generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Key {
    Var(Name),
    Gen(Gen),
}

impl std::fmt::Display for Key {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Key::Var(n) => write!(f, "{}", n),
            Key::Gen(g) => write!(f, "{}", g),
        }
    }
}

pub type Omega = BTreeMap<Key, VsType>;

#[derive(Clone, Debug, Default)]
pub struct Ctxs {
    pub delta: BTreeMap<Name, GraphKind>,
    pub omega: Omega,
    pub psi: Omega,
    pub theta: BTreeMap<Name, Kind>,
    pub gamma: BTreeMap<Name, Con>,
}

impl Ctxs {
    pub fn empty() -> Ctxs {
        Ctxs::default()
    }

    /// Bind a vertex variable in both Ω and Ψ, as `new` does.
    pub fn with_new(&self, u: &str, ty: &VsType) -> Ctxs {
        let mut c = self.clone();
        c.omega.insert(Key::Var(u.to_string()), ty.clone());
        c.psi.insert(Key::Var(u.to_string()), ty.clone());
        c
    }

    pub fn with_psi(&self, u: &str, ty: &VsType) -> Ctxs {
        let mut c = self.clone();
        c.psi.insert(Key::Var(u.to_string()), ty.clone());
        c
    }

    pub fn with_var(&self, x: &str, ty: Con) -> Ctxs {
        let mut c = self.clone();
        c.gamma.insert(x.to_string(), ty);
        c
    }

    /// Names of every vertex variable visible anywhere in the contexts.
    pub fn vs_names(&self) -> HashSet<Name> {
        self.omega
            .keys()
            .chain(self.psi.keys())
            .filter_map(|k| match k {
                Key::Var(n) => Some(n.clone()),
                Key::Gen(_) => None,
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Free variables

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ns {
    Vs,
    Graph,
    Ty,
    VsTy,
    Term,
}

#[derive(Default, Debug, Clone)]
pub struct Fv {
    pub vs: HashSet<Name>,
    pub graph: HashSet<Name>,
    pub ty: HashSet<Name>,
    pub vsty: HashSet<Name>,
    pub term: HashSet<Name>,
}

impl Fv {
    fn set(&mut self, ns: Ns) -> &mut HashSet<Name> {
        match ns {
            Ns::Vs => &mut self.vs,
            Ns::Graph => &mut self.graph,
            Ns::Ty => &mut self.ty,
            Ns::VsTy => &mut self.vsty,
            Ns::Term => &mut self.term,
        }
    }

    fn merge(&mut self, o: Fv) {
        self.vs.extend(o.vs);
        self.graph.extend(o.graph);
        self.ty.extend(o.ty);
        self.vsty.extend(o.vsty);
        self.term.extend(o.term);
    }

    pub fn is_empty(&self) -> bool {
        self.vs.is_empty()
            && self.graph.is_empty()
            && self.ty.is_empty()
            && self.vsty.is_empty()
            && self.term.is_empty()
    }
}

/// Collect free variables of `inner` with `binders` removed, into `out`.
fn scoped(out: &mut Fv, binders: &[(Ns, &Name)], inner: impl FnOnce(&mut Fv)) {
    let mut fv = Fv::default();
    inner(&mut fv);
    for (ns, b) in binders {
        fv.set(*ns).remove(*b);
    }
    out.merge(fv);
}

// ---------------------------------------------------------------------------
// Substitution

/// Simultaneous substitution across every namespace. Also doubles as the
/// canonical renamer used for alpha-equivalence.
#[derive(Clone, Default)]
pub struct Subst {
    vs: HashMap<Name, Vs>,
    graph: HashMap<Name, GraphType>,
    ty: HashMap<Name, Con>,
    vsty: HashMap<Name, VsType>,
    term: HashMap<Name, Rc<Expr>>,
    avoid: Rc<Fv>,
    canon: Option<u32>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn vs(mut self, x: &str, v: Vs) -> Subst {
        let mut fv = Fv::default();
        v.free(&mut fv);
        self.vs.insert(x.to_string(), v);
        self.add_avoid(fv);
        self
    }

    pub fn graph(mut self, x: &str, g: GraphType) -> Subst {
        let mut fv = Fv::default();
        g.free(&mut fv);
        self.graph.insert(x.to_string(), g);
        self.add_avoid(fv);
        self
    }

    pub fn ty(mut self, x: &str, c: Con) -> Subst {
        let mut fv = Fv::default();
        c.free(&mut fv);
        self.ty.insert(x.to_string(), c);
        self.add_avoid(fv);
        self
    }

    pub fn vsty(mut self, x: &str, t: VsType) -> Subst {
        let mut fv = Fv::default();
        t.free(&mut fv);
        self.vsty.insert(x.to_string(), t);
        self.add_avoid(fv);
        self
    }

    pub fn term(mut self, x: &str, e: Expr) -> Subst {
        let mut fv = Fv::default();
        e.free(&mut fv);
        self.term.insert(x.to_string(), Rc::new(e));
        self.add_avoid(fv);
        self
    }

    pub fn value(self, x: &str, v: Value) -> Subst {
        self.term(x, v.into_expr())
    }

    fn canonical() -> Subst {
        Subst { canon: Some(0), ..Subst::default() }
    }

    fn add_avoid(&mut self, fv: Fv) {
        Rc::make_mut(&mut self.avoid).merge(fv);
    }

    fn is_identity(&self) -> bool {
        self.canon.is_none()
            && self.vs.is_empty()
            && self.graph.is_empty()
            && self.ty.is_empty()
            && self.vsty.is_empty()
            && self.term.is_empty()
    }

    fn has(&self, ns: Ns, b: &str) -> bool {
        match ns {
            Ns::Vs => self.vs.contains_key(b),
            Ns::Graph => self.graph.contains_key(b),
            Ns::Ty => self.ty.contains_key(b),
            Ns::VsTy => self.vsty.contains_key(b),
            Ns::Term => self.term.contains_key(b),
        }
    }

    fn avoids(&self, ns: Ns, b: &str) -> bool {
        match ns {
            Ns::Vs => self.avoid.vs.contains(b),
            Ns::Graph => self.avoid.graph.contains(b),
            Ns::Ty => self.avoid.ty.contains(b),
            Ns::VsTy => self.avoid.vsty.contains(b),
            Ns::Term => self.avoid.term.contains(b),
        }
    }

    /// Pass under a binder; returns the substitution to use in its scope and
    /// the (possibly renamed) binder.
    fn bind(&self, ns: Ns, b: &Name) -> (Cow<'_, Subst>, Name) {
        let rename = self.canon.is_some() || self.avoids(ns, b);
        if !rename && !self.has(ns, b) {
            return (Cow::Borrowed(self), b.clone());
        }
        let mut s = self.clone();
        match ns {
            Ns::Vs => {
                s.vs.remove(b);
            }
            Ns::Graph => {
                s.graph.remove(b);
            }
            Ns::Ty => {
                s.ty.remove(b);
            }
            Ns::VsTy => {
                s.vsty.remove(b);
            }
            Ns::Term => {
                s.term.remove(b);
            }
        }
        if !rename {
            return (Cow::Owned(s), b.clone());
        }
        let nb = match s.canon {
            Some(d) => {
                s.canon = Some(d + 1);
                format!("~{}", d)
            }
            None => fresh_name(b),
        };
        match ns {
            Ns::Vs => {
                s.vs.insert(b.clone(), Vs::Var(nb.clone()));
            }
            Ns::Graph => {
                s.graph.insert(b.clone(), GraphType::Var(nb.clone()));
            }
            Ns::Ty => {
                s.ty.insert(b.clone(), Con::Var(nb.clone()));
            }
            Ns::VsTy => {
                s.vsty.insert(b.clone(), VsType::Var(nb.clone()));
            }
            Ns::Term => {
                s.term.insert(b.clone(), Rc::new(Expr::Var(nb.clone())));
            }
        }
        (Cow::Owned(s), nb)
    }
}

/// Operations shared by every syntactic class.
pub trait Syntax: Clone + PartialEq {
    fn apply(&self, s: &Subst) -> Self;
    fn free(&self, out: &mut Fv);

    fn fv(&self) -> Fv {
        let mut out = Fv::default();
        self.free(&mut out);
        out
    }

    fn subst(&self, s: &Subst) -> Self {
        if s.is_identity() {
            self.clone()
        } else {
            self.apply(s)
        }
    }

    /// Bound names replaced by positional names; alpha-equal terms have
    /// identical canonical forms.
    fn canonical(&self) -> Self {
        self.apply(&Subst::canonical())
    }
}

pub fn subst_vs_in<T: Syntax>(target: &T, replacement: &Vs, var: &str) -> T {
    target.subst(&Subst::new().vs(var, replacement.clone()))
}

pub fn subst_graph_in<T: Syntax>(target: &T, g: &GraphType, gvar: &str) -> T {
    target.subst(&Subst::new().graph(gvar, g.clone()))
}

pub fn alpha_eq<T: Syntax>(a: &T, b: &T) -> bool {
    a == b || a.canonical() == b.canonical()
}

impl Syntax for VsType {
    fn apply(&self, s: &Subst) -> VsType {
        match self {
            VsType::V | VsType::Unit => self.clone(),
            VsType::Var(t) => s.vsty.get(t).cloned().unwrap_or_else(|| self.clone()),
            VsType::Prod(a, la, b, ra) => VsType::prod(a.apply(s), *la, b.apply(s), *ra),
            VsType::Corec(t, body) => {
                let (s2, t2) = s.bind(Ns::VsTy, t);
                VsType::Corec(t2, Box::new(body.apply(&s2)))
            }
        }
    }

    fn free(&self, out: &mut Fv) {
        match self {
            VsType::V | VsType::Unit => {}
            VsType::Var(t) => {
                out.vsty.insert(t.clone());
            }
            VsType::Prod(a, _, b, _) => {
                a.free(out);
                b.free(out);
            }
            VsType::Corec(t, body) => scoped(out, &[(Ns::VsTy, t)], |fv| body.free(fv)),
        }
    }
}

impl Syntax for Vs {
    fn apply(&self, s: &Subst) -> Vs {
        match self {
            Vs::Var(x) => s.vs.get(x).cloned().unwrap_or_else(|| self.clone()),
            Vs::Unit => Vs::Unit,
            Vs::Pair(a, b) => Vs::pair(a.apply(s), b.apply(s)),
            Vs::Fst(a) => Vs::fst(a.apply(s)),
            Vs::Snd(a) => Vs::snd(a.apply(s)),
            Vs::Root(t, g) => {
                if s.canon.is_some() {
                    Vs::Root(t.apply(s), *g)
                } else {
                    self.clone()
                }
            }
        }
    }

    fn free(&self, out: &mut Fv) {
        match self {
            Vs::Var(x) => {
                out.vs.insert(x.clone());
            }
            Vs::Unit | Vs::Root(..) => {}
            Vs::Pair(a, b) => {
                a.free(out);
                b.free(out);
            }
            Vs::Fst(a) | Vs::Snd(a) => a.free(out),
        }
    }
}

impl Syntax for GraphType {
    fn apply(&self, s: &Subst) -> GraphType {
        use GraphType as G;
        match self {
            G::Var(g) => s.graph.get(g).cloned().unwrap_or_else(|| self.clone()),
            G::Empty => G::Empty,
            G::Seq(a, b) => G::seq(a.apply(s), b.apply(s)),
            G::Par(a, b) => G::par(a.apply(s), b.apply(s)),
            G::Or(a, b) => G::or(a.apply(s), b.apply(s)),
            G::Rec(g, body) => {
                let (s2, g2) = s.bind(Ns::Graph, g);
                G::Rec(g2, Box::new(body.apply(&s2)))
            }
            G::Spawn(body, vs) => G::spawn(body.apply(s), vs.apply(s)),
            G::Touch(vs) => G::Touch(vs.apply(s)),
            G::Pi { uf, tf, ut, tt, body } => {
                let tf = tf.apply(s);
                let tt = tt.apply(s);
                let (s1, uf2) = s.bind(Ns::Vs, uf);
                let (s2, ut2) = s1.bind(Ns::Vs, ut);
                G::Pi { uf: uf2, tf, ut: ut2, tt, body: Box::new(body.apply(&s2)) }
            }
            G::App(h, a, b) => G::app(h.apply(s), a.apply(s), b.apply(s)),
            G::New(u, t, body) => {
                let t = t.apply(s);
                let (s2, u2) = s.bind(Ns::Vs, u);
                G::New(u2, t, Box::new(body.apply(&s2)))
            }
        }
    }

    fn free(&self, out: &mut Fv) {
        use GraphType as G;
        match self {
            G::Var(g) => {
                out.graph.insert(g.clone());
            }
            G::Empty => {}
            G::Seq(a, b) | G::Par(a, b) | G::Or(a, b) => {
                a.free(out);
                b.free(out);
            }
            G::Rec(g, body) => scoped(out, &[(Ns::Graph, g)], |fv| body.free(fv)),
            G::Spawn(body, vs) => {
                body.free(out);
                vs.free(out);
            }
            G::Touch(vs) => vs.free(out),
            G::Pi { uf, tf, ut, tt, body } => {
                tf.free(out);
                tt.free(out);
                scoped(out, &[(Ns::Vs, uf), (Ns::Vs, ut)], |fv| body.free(fv));
            }
            G::App(h, a, b) => {
                h.free(out);
                a.free(out);
                b.free(out);
            }
            G::New(u, t, body) => {
                t.free(out);
                scoped(out, &[(Ns::Vs, u)], |fv| body.free(fv));
            }
        }
    }
}

impl Syntax for GraphKind {
    fn apply(&self, s: &Subst) -> GraphKind {
        match self {
            GraphKind::Ground => GraphKind::Ground,
            GraphKind::Pi(a, b, k) => GraphKind::Pi(a.apply(s), b.apply(s), Box::new(k.apply(s))),
        }
    }
    fn free(&self, out: &mut Fv) {
        if let GraphKind::Pi(a, b, k) = self {
            a.free(out);
            b.free(out);
            k.free(out);
        }
    }
}

impl Syntax for FunTy {
    fn apply(&self, s: &Subst) -> FunTy {
        let tf = self.tf.apply(s);
        let tt = self.tt.apply(s);
        let (s1, uf) = s.bind(Ns::Vs, &self.uf);
        let (s2, ut) = s1.bind(Ns::Vs, &self.ut);
        FunTy { uf, tf, ut, tt, dom: self.dom.apply(&s2), cod: self.cod.apply(&s2), eff: self.eff.apply(&s2) }
    }

    fn free(&self, out: &mut Fv) {
        self.tf.free(out);
        self.tt.free(out);
        scoped(out, &[(Ns::Vs, &self.uf), (Ns::Vs, &self.ut)], |fv| {
            self.dom.free(fv);
            self.cod.free(fv);
            self.eff.free(fv);
        });
    }
}

impl Syntax for Con {
    fn apply(&self, s: &Subst) -> Con {
        match self {
            Con::Unit | Con::Base(_) => self.clone(),
            Con::Fun(ft) => Con::Fun(Box::new(ft.apply(s))),
            Con::Prod(a, b) => Con::prod(a.apply(s), b.apply(s)),
            Con::Sum(a, b) => Con::sum(a.apply(s), b.apply(s)),
            Con::Fut(c, vs) => Con::fut(c.apply(s), vs.apply(s)),
            Con::Var(a) => s.ty.get(a).cloned().unwrap_or_else(|| self.clone()),
            Con::Rec { tyvar, u, uty, body, arg } => {
                let uty = uty.apply(s);
                let arg = arg.apply(s);
                let (s1, tyvar) = s.bind(Ns::Ty, tyvar);
                let (s2, u) = s1.bind(Ns::Vs, u);
                Con::Rec { tyvar, u, uty, body: Box::new(body.apply(&s2)), arg }
            }
            Con::Lam(u, t, body) => {
                let t = t.apply(s);
                let (s2, u) = s.bind(Ns::Vs, u);
                Con::Lam(u, t, Box::new(body.apply(&s2)))
            }
            Con::AppVs(c, vs) => Con::app_vs(c.apply(s), vs.apply(s)),
        }
    }

    fn free(&self, out: &mut Fv) {
        match self {
            Con::Unit | Con::Base(_) => {}
            Con::Fun(ft) => ft.free(out),
            Con::Prod(a, b) | Con::Sum(a, b) => {
                a.free(out);
                b.free(out);
            }
            Con::Fut(c, vs) | Con::AppVs(c, vs) => {
                c.free(out);
                vs.free(out);
            }
            Con::Var(a) => {
                out.ty.insert(a.clone());
            }
            Con::Rec { tyvar, u, uty, body, arg } => {
                uty.free(out);
                arg.free(out);
                scoped(out, &[(Ns::Ty, tyvar), (Ns::Vs, u)], |fv| body.free(fv));
            }
            Con::Lam(u, t, body) => {
                t.free(out);
                scoped(out, &[(Ns::Vs, u)], |fv| body.free(fv));
            }
        }
    }
}

impl Syntax for FunExpr {
    fn apply(&self, s: &Subst) -> FunExpr {
        let tf = self.tf.apply(s);
        let tt = self.tt.apply(s);
        let (s1, uf) = s.bind(Ns::Vs, &self.uf);
        let (s2, ut) = s1.bind(Ns::Vs, &self.ut);
        let dom = self.dom.apply(&s2);
        let cod = self.cod.apply(&s2);
        let (s3, f) = s2.bind(Ns::Term, &self.f);
        let (s4, x) = s3.bind(Ns::Term, &self.x);
        FunExpr { uf, tf, ut, tt, f, x, dom, cod, body: self.body.apply(&s4) }
    }

    fn free(&self, out: &mut Fv) {
        self.tf.free(out);
        self.tt.free(out);
        scoped(out, &[(Ns::Vs, &self.uf), (Ns::Vs, &self.ut)], |fv| {
            self.dom.free(fv);
            self.cod.free(fv);
            scoped(fv, &[(Ns::Term, &self.f), (Ns::Term, &self.x)], |fv2| self.body.free(fv2));
        });
    }
}

impl Syntax for Expr {
    fn apply(&self, s: &Subst) -> Expr {
        use Expr as E;
        let b = |e: &Expr| Box::new(e.apply(s));
        match self {
            E::Var(x) => match s.term.get(x) {
                Some(e) => (**e).clone(),
                None => self.clone(),
            },
            E::Triv | E::Lit(_) => self.clone(),
            E::Fun(fe) => E::Fun(Box::new(fe.apply(s))),
            E::App(f, a, c, arg) => E::App(b(f), a.apply(s), c.apply(s), b(arg)),
            E::Pair(x, y) => E::Pair(b(x), b(y)),
            E::Fst(x) => E::Fst(b(x)),
            E::Snd(x) => E::Snd(b(x)),
            E::InL(x) => E::InL(b(x)),
            E::InR(x) => E::InR(b(x)),
            E::Case(scr, x, l, y, r) => {
                let (sl, x2) = s.bind(Ns::Term, x);
                let (sr, y2) = s.bind(Ns::Term, y);
                E::Case(b(scr), x2, Box::new(l.apply(&sl)), y2, Box::new(r.apply(&sr)))
            }
            E::Roll(x) => E::Roll(b(x)),
            E::Unroll(x) => E::Unroll(b(x)),
            E::Future(vs, x) => E::Future(vs.apply(s), b(x)),
            E::Touch(x) => E::Touch(b(x)),
            E::New(u, t, body) => {
                let t = t.apply(s);
                let (s2, u2) = s.bind(Ns::Vs, u);
                E::New(u2, t, Box::new(body.apply(&s2)))
            }
            E::Par(x, y) => E::Par(b(x), b(y)),
            E::Let(x, e1, e2) => {
                let e1 = b(e1);
                let (s2, x2) = s.bind(Ns::Term, x);
                E::Let(x2, e1, Box::new(e2.apply(&s2)))
            }
            E::Ann(x, c) => E::Ann(b(x), c.apply(s)),
            E::Prim(op, x, y) => E::Prim(*op, b(x), b(y)),
            E::Val(v) => E::Val(Box::new(v.apply(s))),
        }
    }

    fn free(&self, out: &mut Fv) {
        use Expr as E;
        match self {
            E::Var(x) => {
                out.term.insert(x.clone());
            }
            E::Triv | E::Lit(_) => {}
            E::Fun(fe) => fe.free(out),
            E::App(f, a, c, arg) => {
                f.free(out);
                a.free(out);
                c.free(out);
                arg.free(out);
            }
            E::Pair(x, y) | E::Par(x, y) | E::Prim(_, x, y) => {
                x.free(out);
                y.free(out);
            }
            E::Fst(x) | E::Snd(x) | E::InL(x) | E::InR(x) | E::Roll(x) | E::Unroll(x) | E::Touch(x) => x.free(out),
            E::Case(scr, x, l, y, r) => {
                scr.free(out);
                scoped(out, &[(Ns::Term, x)], |fv| l.free(fv));
                scoped(out, &[(Ns::Term, y)], |fv| r.free(fv));
            }
            E::Future(vs, x) => {
                vs.free(out);
                x.free(out);
            }
            E::New(u, t, body) => {
                t.free(out);
                scoped(out, &[(Ns::Vs, u)], |fv| body.free(fv));
            }
            E::Let(x, e1, e2) => {
                e1.free(out);
                scoped(out, &[(Ns::Term, x)], |fv| e2.free(fv));
            }
            E::Ann(x, c) => {
                x.free(out);
                c.free(out);
            }
            E::Val(v) => v.free(out),
        }
    }
}

impl Syntax for Value {
    fn apply(&self, s: &Subst) -> Value {
        match self {
            Value::Triv | Value::Lit(_) => self.clone(),
            Value::Fun(fe) => Value::Fun(Box::new(fe.apply(s))),
            Value::Pair(a, b) => Value::pair(a.apply(s), b.apply(s)),
            Value::InL(a) => Value::InL(Box::new(a.apply(s))),
            Value::InR(a) => Value::InR(Box::new(a.apply(s))),
            Value::Roll(a) => Value::Roll(Box::new(a.apply(s))),
            Value::Handle(p, a) => {
                let p = if s.canon.is_some() { VPath { ty: p.ty.apply(s), ..p.clone() } } else { p.clone() };
                Value::Handle(p, Box::new(a.apply(s)))
            }
        }
    }

    fn free(&self, out: &mut Fv) {
        match self {
            Value::Triv | Value::Lit(_) => {}
            Value::Fun(fe) => fe.free(out),
            Value::Pair(a, b) => {
                a.free(out);
                b.free(out);
            }
            Value::InL(a) | Value::InR(a) | Value::Roll(a) | Value::Handle(_, a) => a.free(out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v() -> VsType {
        VsType::V
    }

    #[test]
    fn subst_touch() {
        let g = GraphType::Touch(Vs::var("u"));
        let r = subst_vs_in(&g, &Vs::fst(Vs::var("u")), "u");
        assert_eq!(r, GraphType::Touch(Vs::fst(Vs::var("u"))));
    }

    #[test]
    fn subst_shadowed() {
        let g = GraphType::new_vs("u", v(), GraphType::Touch(Vs::var("u")));
        assert_eq!(subst_vs_in(&g, &Vs::var("v"), "u"), g);
    }

    #[test]
    fn subst_gen_root() {
        let root = Vs::Root(VsType::vstream(), Gen(0));
        let g = GraphType::spawn(GraphType::Empty, Vs::fst(Vs::var("u")));
        let r = subst_vs_in(&g, &root, "u");
        assert_eq!(r, GraphType::spawn(GraphType::Empty, Vs::fst(root)));
    }

    #[test]
    fn subst_avoids_capture() {
        // (new w. touch u)[w/u] must not capture
        let g = GraphType::new_vs("w", v(), GraphType::Touch(Vs::var("u")));
        let r = subst_vs_in(&g, &Vs::var("w"), "u");
        match r {
            GraphType::New(b, _, body) => {
                assert_ne!(b, "w");
                assert_eq!(*body, GraphType::Touch(Vs::var("w")));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn subst_graph_var() {
        let g = GraphType::seq(GraphType::Var("g".into()), GraphType::Var("g".into()));
        let r = subst_graph_in(&g, &GraphType::Empty, "g");
        assert_eq!(r, GraphType::seq(GraphType::Empty, GraphType::Empty));
    }

    #[test]
    fn alpha_examples() {
        let a = GraphType::rec("g", GraphType::pi("u", v(), "w", v(), GraphType::Empty));
        let b = GraphType::rec("d", GraphType::pi("x", v(), "y", v(), GraphType::Empty));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&GraphType::Touch(Vs::var("u")), &GraphType::Touch(Vs::var("w"))));
        let s = VsType::corec("s", VsType::both(v(), VsType::Var("s".into())));
        assert!(alpha_eq(&VsType::vstream(), &s));
    }

    #[test]
    fn alpha_respects_binding_structure() {
        let a = GraphType::pi("u", v(), "w", v(), GraphType::Touch(Vs::var("u")));
        let b = GraphType::pi("u", v(), "w", v(), GraphType::Touch(Vs::var("w")));
        assert!(!alpha_eq(&a, &b));
    }

    #[test]
    fn contractive() {
        assert!(VsType::vstream().is_contractive());
        assert!(!VsType::corec("t", VsType::Var("t".into())).is_contractive());
    }

    #[test]
    fn value_subst_into_fun_body() {
        let body = Expr::pair(Expr::var("y"), Expr::var("x"));
        let fe = FunExpr {
            uf: "a".into(),
            tf: VsType::Unit,
            ut: "b".into(),
            tt: VsType::Unit,
            f: "f".into(),
            x: "x".into(),
            dom: Con::Unit,
            cod: Con::Unit,
            body,
        };
        let e = Expr::Fun(Box::new(fe));
        let r = e.subst(&Subst::new().value("y", Value::Triv).value("x", Value::Triv));
        match r {
            Expr::Fun(fe) => assert_eq!(fe.body, Expr::pair(Value::Triv.into_expr(), Expr::var("x"))),
            _ => panic!(),
        }
    }
}
