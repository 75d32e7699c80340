//! Judgments on vertex structures: typing, subtyping, type splitting,
//! Ω-context splitting, evaluation and equivalence.

use std::collections::HashSet;

use thiserror::Error;

use crate::syntax::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VsError {
    #[error("unbound vertex {0}")]
    UnboundVertex(String),
    #[error("projection {0} is unavailable")]
    UnavailableProjection(String),
    #[error("{0} is not a product vertex structure")]
    NotAProduct(String),
    #[error("vertex structure {vs} has type {found}, expected {expected}")]
    Mismatch { vs: String, found: String, expected: String },
    #[error("affine violation: {0}")]
    AffineViolation(String),
    #[error("overlapping spawns at {0}")]
    OverlappingSpawns(String),
    #[error("{0} is ill-typed")]
    IllTyped(String),
    #[error("fuel exhausted")]
    FuelExhausted,
}

type Result<T> = std::result::Result<T, VsError>;

/// Unfold outer `corec` binders until a non-recursive head appears.
pub fn unfold(t: &VsType) -> VsType {
    let mut cur = t.clone();
    for _ in 0..64 {
        match cur {
            VsType::Corec(ref b, ref body) => {
                let next = body.subst(&Subst::new().vsty(b, cur.clone()));
                cur = next;
            }
            _ => return cur,
        }
    }
    cur
}

// ---------------------------------------------------------------------------
// Evaluation and normal forms

pub fn vs_eval(v: &Vs) -> Vs {
    match v {
        Vs::Fst(a) => match vs_eval(a) {
            Vs::Pair(x, _) => *x,
            n => Vs::fst(n),
        },
        Vs::Snd(a) => match vs_eval(a) {
            Vs::Pair(_, y) => *y,
            n => Vs::snd(n),
        },
        Vs::Pair(a, b) => Vs::pair(vs_eval(a), vs_eval(b)),
        _ => v.clone(),
    }
}

pub fn vs_is_normal(v: &Vs) -> bool {
    match v {
        Vs::Var(_) | Vs::Unit | Vs::Root(..) => true,
        Vs::Pair(a, b) => vs_is_normal(a) && vs_is_normal(b),
        Vs::Fst(a) | Vs::Snd(a) => !matches!(**a, Vs::Pair(..)) && vs_is_normal(a),
    }
}

/// A projection chain over a variable or generator root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPath {
    pub root: Key,
    pub spine: Vec<Proj>,
}

pub fn as_path(v: &Vs) -> Option<RawPath> {
    match v {
        Vs::Var(x) => Some(RawPath { root: Key::Var(x.clone()), spine: Vec::new() }),
        Vs::Root(_, g) => Some(RawPath { root: Key::Gen(*g), spine: Vec::new() }),
        Vs::Fst(a) | Vs::Snd(a) => {
            let mut p = as_path(a)?;
            p.spine.push(if matches!(v, Vs::Fst(_)) { Proj::Fst } else { Proj::Snd });
            Some(p)
        }
        Vs::Unit | Vs::Pair(..) => None,
    }
}

pub fn vs_is_vpath(v: &Vs) -> Option<VPath> {
    let mut spine = Vec::new();
    let mut cur = v;
    loop {
        match cur {
            Vs::Fst(a) => {
                spine.push(Proj::Fst);
                cur = a;
            }
            Vs::Snd(a) => {
                spine.push(Proj::Snd);
                cur = a;
            }
            Vs::Root(t, g) => {
                spine.reverse();
                return Some(VPath { gen: *g, ty: t.clone(), spine });
            }
            _ => return None,
        }
    }
}

fn show_path(root: &Key, spine: &[Proj]) -> String {
    let mut s = root.to_string();
    for p in spine {
        s = format!("({} {})", if *p == Proj::Fst { "fst" } else { "snd" }, s);
    }
    s
}

// ---------------------------------------------------------------------------
// Subtyping

pub fn vsty_subtype(a: &VsType, b: &VsType) -> bool {
    let mut assumed = HashSet::new();
    sub(a, b, &mut assumed)
}

fn sub(a: &VsType, b: &VsType, assumed: &mut HashSet<(VsType, VsType)>) -> bool {
    if a == b {
        return true;
    }
    if matches!(a, VsType::Corec(..)) || matches!(b, VsType::Corec(..)) {
        if !assumed.insert((a.clone(), b.clone())) {
            return true;
        }
        return sub(&unfold(a), &unfold(b), assumed);
    }
    match (a, b) {
        (VsType::V, VsType::V) | (VsType::Unit, VsType::Unit) => true,
        (VsType::Var(x), VsType::Var(y)) => x == y,
        (VsType::Prod(a1, x1, a2, y1), VsType::Prod(b1, x2, b2, y2)) => {
            let comp = |s: &VsType, sa: Avail, t: &VsType, ta: Avail, m: &mut HashSet<_>| {
                !ta.is_av() || (sa.is_av() && sub(s, t, m))
            };
            comp(a1, *x1, b1, *x2, assumed) && comp(a2, *y1, b2, *y2, assumed)
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Typing

/// One Ω resource consumed by a derivation: the path from a root and the
/// region of the VS type it needs available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Demand {
    pub root: Key,
    pub spine: Vec<Proj>,
    pub region: VsType,
}

impl Demand {
    pub fn describe(&self) -> String {
        show_path(&self.root, &self.spine)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Footprint {
    pub demands: Vec<Demand>,
}

impl Footprint {
    pub fn empty() -> Footprint {
        Footprint::default()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn union(mut self, other: Footprint) -> Footprint {
        for d in other.demands {
            if !self.demands.contains(&d) {
                self.demands.push(d);
            }
        }
        self
    }

    pub fn without_root(mut self, root: &Key) -> Footprint {
        self.demands.retain(|d| &d.root != root);
        self
    }

    pub fn roots(&self) -> HashSet<Key> {
        self.demands.iter().map(|d| d.root.clone()).collect()
    }
}

/// Type of the component reached by following `spine` from `t`.
pub fn walk(t: &VsType, root: &Key, spine: &[Proj]) -> Result<VsType> {
    let mut cur = t.clone();
    for (i, p) in spine.iter().enumerate() {
        match unfold(&cur) {
            VsType::Prod(a, la, b, ra) => {
                let (c, av) = if *p == Proj::Fst { (a, la) } else { (b, ra) };
                if !av.is_av() {
                    return Err(VsError::UnavailableProjection(show_path(root, &spine[..=i])));
                }
                cur = *c;
            }
            _ => return Err(VsError::NotAProduct(show_path(root, &spine[..i]))),
        }
    }
    Ok(cur)
}

/// Synthesize the minimal type of a normal VS together with its footprint.
pub fn vs_synth(omega: &Omega, psi: &Omega, v: &Vs) -> Result<(VsType, Footprint)> {
    match v {
        Vs::Unit => Ok((VsType::Unit, Footprint::empty())),
        Vs::Pair(a, b) => {
            let (ta, fa) = vs_synth(omega, psi, a)?;
            let (tb, fb) = vs_synth(omega, psi, b)?;
            omega_split_check(omega, &fa, &fb)?;
            Ok((VsType::both(ta, tb), fa.union(fb)))
        }
        _ => {
            let p = as_path(v).ok_or_else(|| VsError::NotAProduct(v.to_string()))?;
            lookup_path(omega, psi, &p, |found| Ok(found.clone()))
        }
    }
}

/// Resolve a path through Ω first, falling back to Ψ; `fit` turns the
/// found type into the region that is demanded.
fn lookup_path(
    omega: &Omega,
    psi: &Omega,
    p: &RawPath,
    fit: impl Fn(&VsType) -> Result<VsType>,
) -> Result<(VsType, Footprint)> {
    let mut first_err = None;
    if let Some(t) = omega.get(&p.root) {
        match walk(t, &p.root, &p.spine).and_then(|found| fit(&found)) {
            Ok(region) => {
                let d = Demand { root: p.root.clone(), spine: p.spine.clone(), region: region.clone() };
                return Ok((region, Footprint { demands: vec![d] }));
            }
            Err(e) => first_err = Some(e),
        }
    }
    if let Some(t) = psi.get(&p.root) {
        match walk(t, &p.root, &p.spine).and_then(|found| fit(&found)) {
            Ok(ty) => return Ok((ty, Footprint::empty())),
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e)
                }
            }
        }
    }
    Err(first_err.unwrap_or_else(|| VsError::UnboundVertex(p.root.to_string())))
}

/// Check a VS against an expected type, returning the Ω resources used.
pub fn vs_check(omega: &Omega, psi: &Omega, v: &Vs, expected: &VsType) -> Result<Footprint> {
    check_normal(omega, psi, &vs_eval(v), expected)
}

fn check_normal(omega: &Omega, psi: &Omega, v: &Vs, expected: &VsType) -> Result<Footprint> {
    let e = unfold(expected);
    let mismatch =
        |found: &str| VsError::Mismatch { vs: v.to_string(), found: found.to_string(), expected: expected.to_string() };
    match v {
        Vs::Unit => {
            if e == VsType::Unit {
                Ok(Footprint::empty())
            } else {
                Err(mismatch("1"))
            }
        }
        Vs::Pair(a, b) => match &e {
            VsType::Prod(s1, la, s2, ra) => {
                let fa = if la.is_av() { check_normal(omega, psi, a, s1)? } else { Footprint::empty() };
                let fb = if ra.is_av() { check_normal(omega, psi, b, s2)? } else { Footprint::empty() };
                omega_split_check(omega, &fa, &fb)?;
                Ok(fa.union(fb))
            }
            _ => Err(mismatch("a pair")),
        },
        _ => {
            let p = as_path(v).ok_or_else(|| VsError::NotAProduct(v.to_string()))?;
            let (_, fp) = lookup_path(omega, psi, &p, |found| {
                if vsty_subtype(found, expected) {
                    Ok(expected.clone())
                } else {
                    Err(VsError::Mismatch {
                        vs: v.to_string(),
                        found: found.to_string(),
                        expected: expected.to_string(),
                    })
                }
            })?;
            Ok(fp)
        }
    }
}

/// The minimal type of `vs` under (Ω; Ψ).
pub fn vs_type_of(omega: &Omega, psi: &Omega, vs: &Vs) -> Result<VsType> {
    vs_synth(omega, psi, &vs_eval(vs)).map(|(t, _)| t)
}

pub fn vs_equiv(psi: &Omega, a: &Vs, b: &Vs, at: &VsType) -> Result<bool> {
    let empty = Omega::new();
    for v in [a, b] {
        vs_check(&empty, psi, v, at).map_err(|_| VsError::IllTyped(v.to_string()))?;
    }
    Ok(alpha_eq(&vs_eval(a), &vs_eval(b)))
}

// ---------------------------------------------------------------------------
// Type splitting

/// Enumerate splits of `s` derivable by the splitting rules, unfolding at
/// most `budget` corecursive binders along any branch. Closed under swap.
pub fn vsty_split(s: &VsType, budget: usize) -> Vec<(VsType, VsType)> {
    let mut out = Vec::new();
    split_into(s, budget, &mut out);
    let mut seen = HashSet::new();
    out.retain(|p| seen.insert(p.clone()));
    out
}

const SPLIT_CAP: usize = 4096;

fn split_into(s: &VsType, budget: usize, out: &mut Vec<(VsType, VsType)>) {
    use Avail::*;
    let push = |a: VsType, b: VsType, out: &mut Vec<(VsType, VsType)>| {
        if out.len() < SPLIT_CAP {
            out.push((b.clone(), a.clone()));
            out.push((a, b));
        }
    };
    match s {
        VsType::Unit => push(VsType::Unit, VsType::Unit, out),
        VsType::V | VsType::Var(_) => {}
        VsType::Corec(..) => {
            if budget > 0 {
                split_into(&unfold(s), budget - 1, out)
            }
        }
        VsType::Prod(a, la, b, ra) => {
            let a = &**a;
            let b = &**b;
            if la.is_av() && ra.is_av() {
                push(VsType::prod(a.clone(), Av, b.clone(), Unav), VsType::prod(a.clone(), Unav, b.clone(), Av), out);
            }
            let sa = if la.is_av() { vsty_split(a, budget) } else { Vec::new() };
            let sb = if ra.is_av() { vsty_split(b, budget) } else { Vec::new() };
            if la.is_av() && ra.is_av() {
                for (a1, a2) in &sa {
                    for (b1, b2) in &sb {
                        push(VsType::both(a1.clone(), b1.clone()), VsType::both(a2.clone(), b2.clone()), out);
                    }
                }
            }
            for (a1, a2) in &sa {
                push(VsType::prod(a1.clone(), Av, b.clone(), *ra), VsType::prod(a2.clone(), Av, b.clone(), Unav), out);
            }
            for (b1, b2) in &sb {
                push(VsType::prod(a.clone(), *la, b1.clone(), Av), VsType::prod(a.clone(), Unav, b2.clone(), Av), out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Ω splitting

/// Do two demands claim a common vertex?
pub fn demands_conflict(a: &Demand, b: &Demand) -> bool {
    if a.root != b.root {
        return false;
    }
    let (short, long) = if a.spine.len() <= b.spine.len() { (a, b) } else { (b, a) };
    if !long.spine.starts_with(&short.spine) {
        return false;
    }
    let mut cur = short.region.clone();
    for p in &long.spine[short.spine.len()..] {
        match unfold(&cur) {
            VsType::Prod(x, xa, y, ya) => {
                let (c, av) = if *p == Proj::Fst { (x, xa) } else { (y, ya) };
                if !av.is_av() {
                    return false;
                }
                cur = *c;
            }
            VsType::V => return true,
            _ => return false,
        }
    }
    overlap(&cur, &long.region, &mut HashSet::new())
}

fn overlap(a: &VsType, b: &VsType, seen: &mut HashSet<(VsType, VsType)>) -> bool {
    if !seen.insert((a.clone(), b.clone())) {
        return false;
    }
    match (unfold(a), unfold(b)) {
        (VsType::V, VsType::V) => true,
        (VsType::Unit, _) | (_, VsType::Unit) => false,
        (VsType::Prod(a1, x1, a2, y1), VsType::Prod(b1, x2, b2, y2)) => {
            (x1.is_av() && x2.is_av() && overlap(&a1, &b1, seen))
                || (y1.is_av() && y2.is_av() && overlap(&a2, &b2, seen))
        }
        (VsType::V, VsType::Prod(..)) | (VsType::Prod(..), VsType::V) => true,
        _ => false,
    }
}

/// Requirement placed on a context entry at some position inside its type.
#[derive(Clone, Debug)]
enum Req {
    At(Vec<Proj>, VsType),
    Present,
}

#[derive(Default)]
struct NodeReqs {
    fst: Vec<Req>,
    snd: Vec<Req>,
    vertex: bool,
}

fn classify(reqs: &[Req]) -> NodeReqs {
    let mut n = NodeReqs::default();
    let mut work: Vec<Req> = reqs.to_vec();
    while let Some(r) = work.pop() {
        match r {
            Req::Present => {}
            Req::At(spine, region) => {
                if let Some((first, rest)) = spine.split_first() {
                    let child = Req::At(rest.to_vec(), region);
                    if *first == Proj::Fst {
                        n.fst.push(child)
                    } else {
                        n.snd.push(child)
                    }
                    continue;
                }
                match unfold(&region) {
                    VsType::V => n.vertex = true,
                    VsType::Prod(r1, a1, r2, a2) => {
                        if a1.is_av() {
                            n.fst.push(Req::At(Vec::new(), *r1));
                        }
                        if a2.is_av() {
                            n.snd.push(Req::At(Vec::new(), *r2));
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    n
}

fn or_present(v: Vec<Req>) -> Vec<Req> {
    if v.is_empty() {
        vec![Req::Present]
    } else {
        v
    }
}

/// Split `s` so that the left output satisfies `l` and the right `r`. Both
/// sides are known to need the entry.
fn split_node(s: &VsType, l: &[Req], r: &[Req], depth: usize) -> Option<(VsType, VsType)> {
    use Avail::*;
    if depth > 48 {
        return None;
    }
    let ln = classify(l);
    let rn = classify(r);
    match unfold(s) {
        VsType::Unit => Some((VsType::Unit, VsType::Unit)),
        VsType::V | VsType::Var(_) | VsType::Corec(..) => None,
        VsType::Prod(a, la, b, ra) => {
            let (a, b) = (*a, *b);
            let lf = !ln.fst.is_empty();
            let lr = !ln.snd.is_empty();
            let rf = !rn.fst.is_empty();
            let rr = !rn.snd.is_empty();
            if (lf || rf) && !la.is_av() || (lr || rr) && !ra.is_av() {
                return None;
            }
            if lf && rf && lr && rr {
                let (a1, a2) = split_node(&a, &ln.fst, &rn.fst, depth + 1)?;
                let (b1, b2) = split_node(&b, &ln.snd, &rn.snd, depth + 1)?;
                return Some((VsType::both(a1, b1), VsType::both(a2, b2)));
            }
            if lf && rf {
                let (a1, a2) = split_node(&a, &ln.fst, &rn.fst, depth + 1)?;
                return Some(if rr {
                    (VsType::prod(a1, Av, b.clone(), Unav), VsType::prod(a2, Av, b, ra))
                } else {
                    (VsType::prod(a1, Av, b.clone(), ra), VsType::prod(a2, Av, b, Unav))
                });
            }
            if lr && rr {
                let (b1, b2) = split_node(&b, &ln.snd, &rn.snd, depth + 1)?;
                return Some(if rf {
                    (VsType::prod(a.clone(), Unav, b1, Av), VsType::prod(a, la, b2, Av))
                } else {
                    (VsType::prod(a.clone(), la, b1, Av), VsType::prod(a, Unav, b2, Av))
                });
            }
            // No child is wanted by both sides.
            let left_part = VsType::prod(a.clone(), Av, b.clone(), Unav);
            let right_part = VsType::prod(a.clone(), Unav, b.clone(), Av);
            let l_uses_both = lf && lr;
            let r_uses_both = rf && rr;
            if la.is_av() && ra.is_av() && !l_uses_both && !r_uses_both {
                // US:Prod; give each side the child it asked for.
                if lr || rf {
                    return Some((right_part, left_part));
                }
                return Some((left_part, right_part));
            }
            // One side keeps both children (or an availability is missing):
            // split a child down to a presence-only requirement.
            if la.is_av() {
                let lreq = or_present(ln.fst.clone());
                let rreq = or_present(rn.fst.clone());
                let snd_to_left = !rr;
                if !(lr && rr) {
                    if let Some((a1, a2)) = split_node(&a, &lreq, &rreq, depth + 1) {
                        return Some(if snd_to_left {
                            (VsType::prod(a1, Av, b.clone(), ra), VsType::prod(a2, Av, b, Unav))
                        } else {
                            (VsType::prod(a1, Av, b.clone(), Unav), VsType::prod(a2, Av, b, ra))
                        });
                    }
                }
            }
            if ra.is_av() {
                let lreq = or_present(ln.snd.clone());
                let rreq = or_present(rn.snd.clone());
                let fst_to_left = !rf;
                if !(lf && rf) {
                    if let Some((b1, b2)) = split_node(&b, &lreq, &rreq, depth + 1) {
                        return Some(if fst_to_left {
                            (VsType::prod(a.clone(), la, b1, Av), VsType::prod(a, Unav, b2, Av))
                        } else {
                            (VsType::prod(a.clone(), Unav, b1, Av), VsType::prod(a, la, b2, Av))
                        });
                    }
                }
            }
            None
        }
    }
}

fn validate(omega: &Omega, d: &Demand) -> Result<()> {
    let t = omega.get(&d.root).ok_or_else(|| VsError::UnboundVertex(d.root.to_string()))?;
    let found = walk(t, &d.root, &d.spine)?;
    if vsty_subtype(&found, &d.region) {
        Ok(())
    } else {
        Err(VsError::Mismatch { vs: d.describe(), found: found.to_string(), expected: d.region.to_string() })
    }
}

/// Check that the two footprints can be served by disjoint parts of Ω and
/// materialize the corresponding split.
pub fn omega_split_check(omega: &Omega, left: &Footprint, right: &Footprint) -> Result<(Omega, Omega)> {
    for d in left.demands.iter().chain(&right.demands) {
        validate(omega, d)?;
    }
    for a in &left.demands {
        for b in &right.demands {
            if demands_conflict(a, b) {
                let at = if a.spine.len() >= b.spine.len() { a } else { b };
                return Err(VsError::OverlappingSpawns(at.describe()));
            }
        }
    }
    let mut o1 = Omega::new();
    let mut o2 = Omega::new();
    for (k, t) in omega {
        let reqs = |fp: &Footprint| -> Vec<Req> {
            fp.demands.iter().filter(|d| &d.root == k).map(|d| Req::At(d.spine.clone(), d.region.clone())).collect()
        };
        let l = reqs(left);
        let r = reqs(right);
        match (l.is_empty(), r.is_empty()) {
            (_, true) => {
                o1.insert(k.clone(), t.clone());
            }
            (true, false) => {
                o2.insert(k.clone(), t.clone());
            }
            (false, false) => {
                let (t1, t2) = split_node(t, &l, &r, 0)
                    .ok_or_else(|| VsError::AffineViolation(format!("{} cannot be split between both uses", k)))?;
                o1.insert(k.clone(), t1);
                o2.insert(k.clone(), t2);
            }
        }
    }
    Ok((o1, o2))
}

// ---------------------------------------------------------------------------
// Declarative oracle

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tri {
    Yes,
    No,
    OutOfFuel,
}

fn any(results: impl IntoIterator<Item = Tri>) -> Tri {
    let mut out = Tri::No;
    for r in results {
        match r {
            Tri::Yes => return Tri::Yes,
            Tri::OutOfFuel => out = Tri::OutOfFuel,
            Tri::No => {}
        }
    }
    out
}

fn all2(a: Tri, b: impl FnOnce() -> Tri) -> Tri {
    match a {
        Tri::No => Tri::No,
        Tri::Yes => b(),
        Tri::OutOfFuel => match b() {
            Tri::No => Tri::No,
            _ => Tri::OutOfFuel,
        },
    }
}

fn fits(out: &VsType, target: Option<&VsType>) -> bool {
    target.is_none_or(|t| vsty_subtype(out, t))
}

/// Component requirements of a product target; `None` inside means the
/// component is unconstrained. Outer `None` means the target cannot be a
/// supertype of any product.
fn target_parts(t: Option<&VsType>) -> Option<[(Option<VsType>, bool); 2]> {
    match t {
        None => Some([(None, false), (None, false)]),
        Some(t) => match unfold(t) {
            VsType::Prod(c, x, d, y) => Some([
                (if x.is_av() { Some(*c) } else { None }, x.is_av()),
                (if y.is_av() { Some(*d) } else { None }, y.is_av()),
            ]),
            _ => None,
        },
    }
}

type MemoKey = (VsType, Option<VsType>, Option<VsType>, usize);

thread_local! {
    static DERIVE_MEMO: std::cell::RefCell<std::collections::HashMap<MemoKey, Tri>> =
        Default::default();
}

fn derive_top(s: &VsType, t1: Option<&VsType>, t2: Option<&VsType>, fuel: usize) -> Tri {
    DERIVE_MEMO.with(|m| m.borrow_mut().clear());
    let r = derive_vsty(s, t1, t2, fuel);
    DERIVE_MEMO.with(|m| m.borrow_mut().clear());
    r
}

fn derive_vsty(s: &VsType, t1: Option<&VsType>, t2: Option<&VsType>, fuel: usize) -> Tri {
    if fuel == 0 {
        return Tri::OutOfFuel;
    }
    let key = (s.clone(), t1.cloned(), t2.cloned(), fuel);
    if let Some(r) = DERIVE_MEMO.with(|m| m.borrow().get(&key).copied()) {
        return r;
    }
    let r = any([derive_oriented(s, t1, t2, fuel), derive_oriented(s, t2, t1, fuel)]);
    DERIVE_MEMO.with(|m| m.borrow_mut().insert(key, r));
    r
}

fn derive_oriented(s: &VsType, t1: Option<&VsType>, t2: Option<&VsType>, fuel: usize) -> Tri {
    use Avail::*;
    match s {
        VsType::Corec(..) => derive_vsty(&unfold(s), t1, t2, fuel - 1),
        VsType::Unit => {
            if fits(&VsType::Unit, t1) && fits(&VsType::Unit, t2) {
                Tri::Yes
            } else {
                Tri::No
            }
        }
        VsType::V | VsType::Var(_) => Tri::No,
        VsType::Prod(a, la, b, ra) => {
            let (Some(p1), Some(p2)) = (target_parts(t1), target_parts(t2)) else {
                return Tri::No;
            };
            let mut results = Vec::new();
            if la.is_av() && ra.is_av() {
                let o1 = VsType::prod((**a).clone(), Av, (**b).clone(), Unav);
                let o2 = VsType::prod((**a).clone(), Unav, (**b).clone(), Av);
                results.push(if fits(&o1, t1) && fits(&o2, t2) { Tri::Yes } else { Tri::No });
                let first = derive_vsty(a, p1[0].0.as_ref(), p2[0].0.as_ref(), fuel - 1);
                results.push(all2(first, || derive_vsty(b, p1[1].0.as_ref(), p2[1].0.as_ref(), fuel - 1)));
            }
            if la.is_av() {
                // (a1@+ × b@ra), (a2@+ × b@−)
                let snd_ok = (!p1[1].1 || (ra.is_av() && fits(b, p1[1].0.as_ref()))) && !p2[1].1;
                if snd_ok {
                    results.push(derive_vsty(a, p1[0].0.as_ref(), p2[0].0.as_ref(), fuel - 1));
                }
            }
            if ra.is_av() {
                // (a@la × b1@+), (a@− × b2@+)
                let fst_ok = (!p1[0].1 || (la.is_av() && fits(a, p1[0].0.as_ref()))) && !p2[0].1;
                if fst_ok {
                    results.push(derive_vsty(b, p1[1].0.as_ref(), p2[1].0.as_ref(), fuel - 1));
                }
            }
            any(results)
        }
    }
}

/// Is `s ↝ t1 ∗ t2` derivable (outputs may be weakened to the targets)?
pub fn derive_vsty_split(s: &VsType, t1: &VsType, t2: &VsType, fuel: usize) -> Result<bool> {
    match derive_top(s, Some(t1), Some(t2), fuel) {
        Tri::Yes => Ok(true),
        Tri::No => Ok(false),
        Tri::OutOfFuel => Err(VsError::FuelExhausted),
    }
}

/// Declarative search for a derivation of `Ω ↝ o1 ∗ o2`.
pub fn derive_split(omega: &Omega, o1: &Omega, o2: &Omega, fuel: usize) -> Result<bool> {
    if o1.keys().chain(o2.keys()).any(|k| !omega.contains_key(k)) {
        return Ok(false);
    }
    let mut inconclusive = false;
    for (k, s) in omega {
        match (o1.get(k), o2.get(k)) {
            (None, None) => return Ok(false),
            (Some(t), None) | (None, Some(t)) => {
                if !alpha_eq(t, s) {
                    return Ok(false);
                }
            }
            (Some(t1), Some(t2)) => match derive_top(s, Some(t1), Some(t2), fuel) {
                Tri::Yes => {}
                Tri::No => return Ok(false),
                Tri::OutOfFuel => inconclusive = true,
            },
        }
    }
    if inconclusive {
        Err(VsError::FuelExhausted)
    } else {
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Avail::*;

    fn v() -> VsType {
        VsType::V
    }
    fn p(a: VsType, x: Avail, b: VsType, y: Avail) -> VsType {
        VsType::prod(a, x, b, y)
    }
    fn om(entries: &[(&str, VsType)]) -> Omega {
        entries.iter().map(|(k, t)| (Key::Var(k.to_string()), t.clone())).collect()
    }
    fn fp(omega: &Omega, vs: &[Vs]) -> Footprint {
        vs.iter().fold(Footprint::empty(), |acc, v| acc.union(vs_synth(omega, &Omega::new(), &vs_eval(v)).unwrap().1))
    }

    #[test]
    fn typing_examples() {
        let o = om(&[("u", v())]);
        assert_eq!(vs_type_of(&o, &o, &Vs::var("u")), Ok(v()));
        let o = om(&[("u", p(v(), Av, v(), Unav))]);
        assert!(matches!(
            vs_type_of(&o, &Omega::new(), &Vs::snd(Vs::var("u"))),
            Err(VsError::UnavailableProjection(_))
        ));
        let psi = om(&[("u", VsType::both(v(), v()))]);
        let pair = Vs::pair(Vs::fst(Vs::var("u")), Vs::snd(Vs::var("u")));
        assert_eq!(vs_type_of(&Omega::new(), &psi, &pair), Ok(VsType::both(v(), v())));
    }

    #[test]
    fn pair_affine_violation() {
        let o = om(&[("u", v())]);
        let pair = Vs::pair(Vs::var("u"), Vs::var("u"));
        assert!(vs_type_of(&o, &Omega::new(), &pair).is_err());
    }

    #[test]
    fn subtyping_examples() {
        assert!(vsty_subtype(&VsType::both(v(), v()), &p(v(), Av, v(), Unav)));
        let s = VsType::vstream();
        assert!(vsty_subtype(&s, &VsType::both(v(), s.clone())));
        assert!(vsty_subtype(&VsType::both(v(), s.clone()), &s));
        assert!(!vsty_subtype(&p(v(), Unav, v(), Av), &VsType::both(v(), v())));
    }

    #[test]
    fn split_examples() {
        let s = vsty_split(&VsType::both(v(), v()), 2);
        assert!(s.contains(&(p(v(), Av, v(), Unav), p(v(), Unav, v(), Av))));
        assert!(vsty_split(&v(), 2).is_empty());
        let st = VsType::vstream();
        let ss = vsty_split(&st, 2);
        assert!(ss.contains(&(p(v(), Av, st.clone(), Unav), p(v(), Unav, st.clone(), Av))));
    }

    #[test]
    fn omega_split_examples() {
        let o = om(&[("u", VsType::both(v(), v()))]);
        let l = fp(&o, &[Vs::fst(Vs::var("u"))]);
        let r = fp(&o, &[Vs::snd(Vs::var("u"))]);
        let (o1, o2) = omega_split_check(&o, &l, &r).unwrap();
        assert_eq!(o1, om(&[("u", p(v(), Av, v(), Unav))]));
        assert_eq!(o2, om(&[("u", p(v(), Unav, v(), Av))]));

        let o = om(&[("u", v())]);
        let l = fp(&o, &[Vs::var("u")]);
        assert!(matches!(omega_split_check(&o, &l, &l), Err(VsError::OverlappingSpawns(_))));

        let e = Omega::new();
        assert_eq!(omega_split_check(&e, &Footprint::empty(), &Footprint::empty()), Ok((Omega::new(), Omega::new())));
    }

    #[test]
    fn derive_split_examples() {
        let g = |t: VsType| -> Omega { [(Key::Gen(Gen(0)), t)].into_iter().collect() };
        assert_eq!(
            derive_split(&g(VsType::both(v(), v())), &g(p(v(), Av, v(), Unav)), &g(p(v(), Unav, v(), Av)), 20),
            Ok(true)
        );
        let o = om(&[("u", v())]);
        assert_eq!(derive_split(&o, &o, &o, 20), Ok(false));
        assert_eq!(derive_split(&Omega::new(), &Omega::new(), &Omega::new(), 20), Ok(true));
    }

    #[test]
    fn eval_examples() {
        let u = Vs::var("u");
        let w = Vs::var("w");
        assert_eq!(vs_eval(&Vs::fst(Vs::pair(u.clone(), w.clone()))), u);
        let r = Vs::fst(Vs::Root(VsType::vstream(), Gen(0)));
        assert_eq!(vs_eval(&r), r);
        let pp = Vs::pair(Vs::fst(Vs::var("p")), Vs::snd(Vs::var("p")));
        assert_eq!(vs_eval(&Vs::fst(pp)), Vs::fst(Vs::var("p")));
    }

    #[test]
    fn normal_examples() {
        let pair = Vs::pair(Vs::var("u"), Vs::var("w"));
        assert!(vs_is_normal(&pair));
        assert!(vs_is_vpath(&pair).is_none());
        let r = Vs::snd(Vs::fst(Vs::Root(v(), Gen(0))));
        assert!(vs_is_normal(&r));
        assert_eq!(vs_is_vpath(&r).unwrap().spine, vec![Proj::Fst, Proj::Snd]);
        assert!(!vs_is_normal(&Vs::fst(pair)));
    }

    #[test]
    fn equiv_examples() {
        let psi = om(&[("u", v()), ("w", v()), ("p", VsType::both(v(), v()))]);
        let fw = Vs::fst(Vs::pair(Vs::var("u"), Vs::var("w")));
        assert_eq!(vs_equiv(&psi, &fw, &Vs::var("u"), &v()), Ok(true));
        assert_eq!(vs_equiv(&psi, &Vs::var("u"), &Vs::var("u"), &v()), Ok(true));
        let fp_ = Vs::fst(Vs::var("p"));
        let sp = Vs::snd(Vs::var("p"));
        assert_eq!(vs_equiv(&psi, &fp_, &sp, &v()), Ok(false));
    }

    #[test]
    fn split_left_with_unavailable_sibling() {
        // ((V@+ × V@+)@+ × V@−): fst split between fst.fst and fst.snd
        let t = p(VsType::both(v(), v()), Av, v(), Unav);
        let o = om(&[("x", t)]);
        let l = fp(&o, &[Vs::fst(Vs::fst(Vs::var("x")))]);
        let r = fp(&o, &[Vs::snd(Vs::fst(Vs::var("x")))]);
        let (o1, o2) = omega_split_check(&o, &l, &r).unwrap();
        assert_eq!(derive_split(&o, &o1, &o2, 30), Ok(true));
    }

    #[test]
    fn unsplittable_presence() {
        // both sides need fst x available, but fst x = (V@+ × V@−) cannot split
        let t = p(p(v(), Av, v(), Unav), Av, v(), Av);
        let o = om(&[("x", t)]);
        let l = fp(&o, &[Vs::fst(Vs::fst(Vs::var("x")))]);
        let r = Footprint {
            demands: vec![Demand {
                root: Key::Var("x".into()),
                spine: vec![Proj::Fst],
                region: p(v(), Unav, v(), Unav),
            }],
        };
        assert!(omega_split_check(&o, &l, &r).is_err());
    }
}
