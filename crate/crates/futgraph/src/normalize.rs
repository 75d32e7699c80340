//! Graph-type normalization: unrolling, New-β normal form, expansion into
//! concrete graphs, and the membership oracle that checks a run's graph
//! against its graph type.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::cgraph::{g_empty, g_iso, g_touch, g_wellformed, seq_unchecked, CGraph, Vertex};
use crate::syntax::*;
use crate::vstruct::{vs_eval, vs_is_vpath};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("graph type is not closed: {0}")]
    NotClosed(String),
    #[error("graph type is not in normal form: {0}")]
    NotNormal(String),
}

// ---------------------------------------------------------------------------
// Unrolling

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pos {
    Seq1,
    Seq2,
    Par1,
    Par2,
    Or1,
    Or2,
    Future,
    Pi,
    App,
    New,
}

impl Pos {
    pub fn rule(self) -> &'static str {
        match self {
            Pos::Seq1 => "UR:Seq1",
            Pos::Seq2 => "UR:Seq2",
            Pos::Par1 => "UR:Par1",
            Pos::Par2 => "UR:Par2",
            Pos::Or1 => "UR:Or1",
            Pos::Or2 => "UR:Or2",
            Pos::Future => "UR:Future",
            Pos::Pi => "UR:Pi",
            Pos::App => "UR:App",
            Pos::New => "UR:New",
        }
    }
}

/// A sequence of UR:Rec steps, each at a position given by the path of
/// congruence rules leading to the redex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnrollTrace {
    pub steps: Vec<Vec<Pos>>,
    pub result: GraphType,
}

fn unroll_rec(g: &GraphType) -> Option<GraphType> {
    match g {
        GraphType::Rec(x, body) => Some(body.subst(&Subst::new().graph(x, g.clone()))),
        _ => None,
    }
}

/// Unroll the recursion reached by following `path`.
pub fn unroll_at(g: &GraphType, path: &[Pos]) -> Option<GraphType> {
    use GraphType as G;
    let Some((first, rest)) = path.split_first() else { return unroll_rec(g) };
    Some(match (first, g) {
        (Pos::Seq1, G::Seq(a, b)) => G::seq(unroll_at(a, rest)?, (**b).clone()),
        (Pos::Seq2, G::Seq(a, b)) => G::seq((**a).clone(), unroll_at(b, rest)?),
        (Pos::Par1, G::Par(a, b)) => G::par(unroll_at(a, rest)?, (**b).clone()),
        (Pos::Par2, G::Par(a, b)) => G::par((**a).clone(), unroll_at(b, rest)?),
        (Pos::Or1, G::Or(a, b)) => G::or(unroll_at(a, rest)?, (**b).clone()),
        (Pos::Or2, G::Or(a, b)) => G::or((**a).clone(), unroll_at(b, rest)?),
        (Pos::Future, G::Spawn(a, vs)) => G::spawn(unroll_at(a, rest)?, vs.clone()),
        (Pos::Pi, G::Pi { uf, tf, ut, tt, body }) => G::Pi {
            uf: uf.clone(),
            tf: tf.clone(),
            ut: ut.clone(),
            tt: tt.clone(),
            body: Box::new(unroll_at(body, rest)?),
        },
        (Pos::App, G::App(h, a, b)) => G::app(unroll_at(h, rest)?, a.clone(), b.clone()),
        (Pos::New, G::New(u, t, body)) => G::New(u.clone(), t.clone(), Box::new(unroll_at(body, rest)?)),
        _ => return None,
    })
}

/// Every position holding an unrollable recursion.
pub fn redex_positions(g: &GraphType) -> Vec<Vec<Pos>> {
    fn go(g: &GraphType, prefix: &mut Vec<Pos>, out: &mut Vec<Vec<Pos>>) {
        use GraphType as G;
        let sub = |p: Pos, c: &GraphType, prefix: &mut Vec<Pos>, out: &mut Vec<Vec<Pos>>| {
            prefix.push(p);
            go(c, prefix, out);
            prefix.pop();
        };
        match g {
            G::Rec(..) => out.push(prefix.clone()),
            G::Seq(a, b) => {
                sub(Pos::Seq1, a, prefix, out);
                sub(Pos::Seq2, b, prefix, out);
            }
            G::Par(a, b) => {
                sub(Pos::Par1, a, prefix, out);
                sub(Pos::Par2, b, prefix, out);
            }
            G::Or(a, b) => {
                sub(Pos::Or1, a, prefix, out);
                sub(Pos::Or2, b, prefix, out);
            }
            G::Spawn(a, _) => sub(Pos::Future, a, prefix, out),
            G::Pi { body, .. } => sub(Pos::Pi, body, prefix, out),
            G::App(h, _, _) => sub(Pos::App, h, prefix, out),
            G::New(_, _, body) => sub(Pos::New, body, prefix, out),
            G::Var(_) | G::Empty | G::Touch(_) => {}
        }
    }
    let mut out = Vec::new();
    go(g, &mut Vec::new(), &mut out);
    out
}

pub fn replay(origin: &GraphType, trace: &UnrollTrace) -> Option<GraphType> {
    trace.steps.iter().try_fold(origin.clone(), |g, p| unroll_at(&g, p))
}

/// All graph types reachable in at most `fuel` unrolling steps, each with
/// one trace that reaches it; duplicates modulo alpha are dropped.
pub fn unroll_traces(g: &GraphType, fuel: usize) -> Vec<UnrollTrace> {
    let mut seen = HashSet::new();
    seen.insert(g.canonical());
    let mut all = vec![UnrollTrace { steps: Vec::new(), result: g.clone() }];
    let mut frontier = 0..1;
    for _ in 0..fuel {
        let mut next = Vec::new();
        for i in frontier.clone() {
            let t = all[i].clone();
            for p in redex_positions(&t.result) {
                let r = unroll_at(&t.result, &p).expect("redex position");
                if seen.insert(r.canonical()) {
                    let mut steps = t.steps.clone();
                    steps.push(p);
                    next.push(UnrollTrace { steps, result: r });
                }
            }
        }
        if next.is_empty() {
            break;
        }
        let start = all.len();
        all.extend(next);
        frontier = start..all.len();
    }
    all
}

pub fn unroll_enumerate(g: &GraphType, fuel: usize) -> Vec<GraphType> {
    unroll_traces(g, fuel).into_iter().map(|t| t.result).collect()
}

// ---------------------------------------------------------------------------
// New-β normal form

pub fn nbnf(g: &GraphType) -> Result<GraphType, NormError> {
    let fv = g.fv();
    if !fv.vs.is_empty() || !fv.graph.is_empty() {
        return Err(NormError::NotClosed(g.to_string()));
    }
    Ok(nb(g))
}

fn nb(g: &GraphType) -> GraphType {
    use GraphType as G;
    match g {
        G::Var(_) | G::Empty | G::Rec(..) | G::Pi { .. } => g.clone(),
        G::Seq(a, b) => G::seq(nb(a), nb(b)),
        G::Par(a, b) => G::par(nb(a), nb(b)),
        G::Or(a, b) => G::or(nb(a), nb(b)),
        G::Spawn(a, vs) => G::spawn(nb(a), vs_eval(vs)),
        G::Touch(vs) => G::Touch(vs_eval(vs)),
        G::New(u, t, body) => {
            let gen = Gen::fresh();
            nb(&body.subst(&Subst::new().vs(u, Vs::Root(t.clone(), gen))))
        }
        G::App(h, a, b) => match nb(h) {
            G::Pi { uf, ut, body, .. } => nb(&body.subst(&Subst::new().vs(&uf, a.clone()).vs(&ut, b.clone()))),
            h2 => G::app(h2, vs_eval(a), vs_eval(b)),
        },
    }
}

/// Normalize while unrolling recursive applications up to nesting depth
/// `depth`; deeper applications stay residual.
pub fn unroll_to_depth(g: &GraphType, depth: usize) -> GraphType {
    use GraphType as G;
    match g {
        G::Var(_) | G::Empty | G::Rec(..) | G::Pi { .. } => g.clone(),
        G::Seq(a, b) => G::seq(unroll_to_depth(a, depth), unroll_to_depth(b, depth)),
        G::Par(a, b) => G::par(unroll_to_depth(a, depth), unroll_to_depth(b, depth)),
        G::Or(a, b) => G::or(unroll_to_depth(a, depth), unroll_to_depth(b, depth)),
        G::Spawn(a, vs) => G::spawn(unroll_to_depth(a, depth), vs_eval(vs)),
        G::Touch(vs) => G::Touch(vs_eval(vs)),
        G::New(u, t, body) => {
            let gen = Gen::fresh();
            unroll_to_depth(&body.subst(&Subst::new().vs(u, Vs::Root(t.clone(), gen))), depth)
        }
        G::App(h, a, b) => {
            let (head, d) = match nb(h) {
                G::Rec(..) if depth > 0 => (unroll_rec(&nb(h)).unwrap(), depth - 1),
                other => (other, depth),
            };
            match head {
                G::Pi { uf, ut, body, .. } => {
                    unroll_to_depth(&body.subst(&Subst::new().vs(&uf, a.clone()).vs(&ut, b.clone())), d)
                }
                h2 => G::app(h2, vs_eval(a), vs_eval(b)),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Expansion

/// Sequential composition; never fails so that collisions surface in the
/// well-formedness check rather than silently vanishing.
fn seq(a: &CGraph, b: &CGraph) -> CGraph {
    seq_unchecked(a.clone(), b.clone())
}

fn spawn(a: &CGraph, p: &VPath) -> CGraph {
    let mut a = a.clone();
    let named = Vertex::Named(p.clone());
    let u = Vertex::fresh();
    a.edges.insert((u.clone(), a.start.clone()));
    a.edges.insert((a.end.clone(), named.clone()));
    a.vertices.insert(u.clone());
    a.vertices.insert(named);
    a.start = u.clone();
    a.end = u;
    a
}

fn par(a: &CGraph, b: &CGraph) -> CGraph {
    let fork = Vertex::fresh();
    let join = Vertex::fresh();
    let mut g = CGraph {
        vertices: a.vertices.iter().chain(&b.vertices).cloned().collect(),
        edges: a.edges.iter().chain(&b.edges).cloned().collect(),
        start: fork.clone(),
        end: join.clone(),
    };
    g.edges.insert((fork.clone(), a.start.clone()));
    g.edges.insert((fork.clone(), b.start.clone()));
    g.edges.insert((a.end.clone(), join.clone()));
    g.edges.insert((b.end.clone(), join.clone()));
    g.vertices.insert(fork);
    g.vertices.insert(join);
    g
}

fn touch_path(vs: &Vs) -> Result<VPath, NormError> {
    vs_is_vpath(&vs_eval(vs)).ok_or_else(|| NormError::NotNormal(format!("touch of {}", vs)))
}

/// Number of graphs `expand` would produce, saturating.
pub fn expand_count(g: &GraphType) -> u128 {
    use GraphType as G;
    match g {
        G::Empty | G::Touch(_) | G::New(..) | G::Var(_) => 1,
        G::Rec(..) | G::App(..) | G::Pi { .. } => 0,
        G::Seq(a, b) | G::Par(a, b) => expand_count(a).saturating_mul(expand_count(b)),
        G::Or(a, b) => expand_count(a).saturating_add(expand_count(b)),
        G::Spawn(a, _) => expand_count(a),
    }
}

pub fn expand(g: &GraphType) -> Result<Vec<CGraph>, NormError> {
    use GraphType as G;
    Ok(match g {
        G::Empty => vec![g_empty()],
        G::Seq(a, b) | G::Par(a, b) => {
            let xs = expand(a)?;
            let ys = expand(b)?;
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for x in &xs {
                for y in &ys {
                    out.push(if matches!(g, G::Seq(..)) { seq(x, y) } else { par(x, y) });
                }
            }
            out
        }
        G::Or(a, b) => {
            let mut xs = expand(a)?;
            xs.extend(expand(b)?);
            xs
        }
        G::Spawn(a, vs) => {
            let p = vs_is_vpath(&vs_eval(vs)).ok_or_else(|| NormError::NotNormal(format!("spawn at {}", vs)))?;
            expand(a)?.iter().map(|x| spawn(x, &p)).collect()
        }
        G::Touch(vs) => vec![g_touch(touch_path(vs)?)],
        G::Rec(..) | G::App(..) | G::Pi { .. } => Vec::new(),
        G::New(..) | G::Var(_) => return Err(NormError::NotNormal(g.to_string())),
    })
}

/// Like `expand`, but residual recursion becomes a single placeholder
/// vertex instead of contributing nothing.
pub fn expand_elided(g: &GraphType) -> Vec<CGraph> {
    use GraphType as G;
    match g {
        G::Empty | G::Rec(..) | G::App(..) | G::Pi { .. } | G::Var(_) | G::New(..) => vec![g_empty()],
        G::Seq(a, b) | G::Par(a, b) => {
            let xs = expand_elided(a);
            let ys = expand_elided(b);
            let mut out = Vec::new();
            for x in &xs {
                for y in &ys {
                    out.push(if matches!(g, G::Seq(..)) { seq(x, y) } else { par(x, y) });
                }
            }
            out
        }
        G::Or(a, b) => {
            let mut xs = expand_elided(a);
            xs.extend(expand_elided(b));
            xs
        }
        G::Spawn(a, vs) => match vs_is_vpath(&vs_eval(vs)) {
            Some(p) => expand_elided(a).iter().map(|x| spawn(x, &p)).collect(),
            None => expand_elided(a),
        },
        G::Touch(vs) => match touch_path(vs) {
            Ok(p) => vec![g_touch(p)],
            Err(_) => vec![g_empty()],
        },
    }
}

// ---------------------------------------------------------------------------
// Normalization correctness

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormReport {
    pub candidates: usize,
    pub graphs: usize,
    pub wellformed: usize,
    pub cyclic: usize,
    /// Candidates whose expansion exceeded the per-candidate limit and
    /// were skipped.
    pub skipped: usize,
    pub violations: Vec<String>,
}

impl NormReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.graphs == self.wellformed
    }

    fn merge(&mut self, o: NormReport) {
        self.candidates += o.candidates;
        self.graphs += o.graphs;
        self.wellformed += o.wellformed;
        self.cyclic += o.cyclic;
        self.skipped += o.skipped;
        self.violations.extend(o.violations);
    }
}

pub const EXPAND_LIMIT: u128 = 4096;

fn check_candidate(g: &GraphType) -> NormReport {
    let mut r = NormReport { candidates: 1, ..Default::default() };
    let n = match nbnf(g) {
        Ok(n) => n,
        Err(e) => {
            r.violations.push(format!("{}: {}", g, e));
            return r;
        }
    };
    if expand_count(&n) > EXPAND_LIMIT {
        r.skipped = 1;
        return r;
    }
    match expand(&n) {
        Ok(graphs) => {
            for c in graphs {
                let wf = g_wellformed(&c);
                r.graphs += 1;
                if wf.wellformed {
                    r.wellformed += 1;
                } else {
                    r.violations.push(format!("{}: {}", n, wf.diagnostics.join("; ")));
                }
                if !wf.acyclic {
                    r.cyclic += 1;
                }
            }
        }
        Err(e) => r.violations.push(format!("{}: {}", n, e)),
    }
    r
}

pub fn check_norm_correct(g: &GraphType, fuel: usize) -> NormReport {
    check_norm_correct_par(g, fuel, 1)
}

/// Candidates are handed out from a shared queue; the aggregate does not
/// depend on how many workers take part.
pub fn check_norm_correct_par(g: &GraphType, fuel: usize, workers: usize) -> NormReport {
    let cands = unroll_enumerate(g, fuel);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut parts: Vec<(usize, NormReport)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers.max(1))
            .map(|_| {
                s.spawn(|| {
                    let mut mine = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= cands.len() {
                            break;
                        }
                        mine.push((i, check_candidate(&cands[i])));
                    }
                    mine
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    parts.sort_by_key(|(i, _)| *i);
    let mut report = NormReport::default();
    for (_, r) in parts {
        report.merge(r);
    }
    report
}

// ---------------------------------------------------------------------------
// Display simplification

fn flatten_seq(g: GraphType, out: &mut Vec<GraphType>) {
    match g {
        GraphType::Seq(a, b) => {
            flatten_seq(*a, out);
            flatten_seq(*b, out);
        }
        GraphType::Empty => {}
        other => out.push(other),
    }
}

/// Drops • units of ⊕, right-nests ⊕ chains and inlines applications of
/// non-recursive graph functions.
pub fn graph_simplify(g: &GraphType) -> GraphType {
    use GraphType as G;
    match g {
        G::Var(_) | G::Empty => g.clone(),
        G::Seq(a, b) => {
            let mut parts = Vec::new();
            flatten_seq(graph_simplify(a), &mut parts);
            flatten_seq(graph_simplify(b), &mut parts);
            parts.into_iter().rev().reduce(|acc, x| G::seq(x, acc)).unwrap_or(G::Empty)
        }
        G::Par(a, b) => G::par(graph_simplify(a), graph_simplify(b)),
        G::Or(a, b) => G::or(graph_simplify(a), graph_simplify(b)),
        G::Spawn(a, vs) => G::spawn(graph_simplify(a), vs_eval(vs)),
        G::Touch(vs) => G::Touch(vs_eval(vs)),
        G::Rec(x, body) => G::Rec(x.clone(), Box::new(graph_simplify(body))),
        G::Pi { uf, tf, ut, tt, body } => G::Pi {
            uf: uf.clone(),
            tf: tf.clone(),
            ut: ut.clone(),
            tt: tt.clone(),
            body: Box::new(graph_simplify(body)),
        },
        G::New(u, t, body) => G::New(u.clone(), t.clone(), Box::new(graph_simplify(body))),
        G::App(h, a, b) => {
            let h2 = graph_simplify(h);
            let inline = match &h2 {
                G::Rec(x, inner) if !inner.fv().graph.contains(x) => Some((**inner).clone()),
                G::Pi { .. } => Some(h2.clone()),
                _ => None,
            };
            match inline {
                Some(G::Pi { uf, ut, body, .. }) => {
                    graph_simplify(&body.subst(&Subst::new().vs(&uf, a.clone()).vs(&ut, b.clone())))
                }
                _ => G::app(h2, vs_eval(a), vs_eval(b)),
            }
        }
    }
}

/// How a function type's effect is displayed: the recursive graph
/// function itself, or its inlined body when it never recurses.
pub fn effect_display(ft: &FunTy) -> GraphType {
    match graph_simplify(&ft.eff) {
        GraphType::App(h, _, _) => *h,
        other => other,
    }
}

// ---------------------------------------------------------------------------
// Soundness oracle

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Confirmed,
    Inconclusive(usize),
    Refuted,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Confirmed => write!(f, "confirmed"),
            Verdict::Inconclusive(n) => write!(f, "inconclusive({})", n),
            Verdict::Refuted => write!(f, "REFUTED"),
        }
    }
}

const MATCH_STEPS: u64 = 20_000_000;

struct Target {
    verts: Vec<Vertex>,
    member: Vec<bool>,
    succ: Vec<Vec<(usize, usize)>>,
    pred: Vec<Vec<(usize, usize)>>,
    edge: HashMap<(usize, usize), usize>,
    n_member: usize,
    n_edges: usize,
    start: usize,
    end: usize,
}

impl Target {
    fn new(g: &CGraph) -> Target {
        let verts: Vec<Vertex> = crate::cgraph::endpoints(g).into_iter().collect();
        let index: HashMap<&Vertex, usize> = verts.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut succ = vec![Vec::new(); verts.len()];
        let mut pred = vec![Vec::new(); verts.len()];
        let mut edge = HashMap::new();
        for (k, (a, b)) in g.edges.iter().enumerate() {
            let (i, j) = (index[a], index[b]);
            succ[i].push((j, k));
            pred[j].push((i, k));
            edge.insert((i, j), k);
        }
        Target {
            member: verts.iter().map(|v| g.vertices.contains(v)).collect(),
            start: index[&g.start],
            end: index[&g.end],
            n_member: g.vertices.len(),
            n_edges: g.edges.len(),
            verts,
            succ,
            pred,
            edge,
        }
    }
}

/// Directed search for a way to read the graph off the graph type,
/// unrolling recursive applications lazily up to a nesting depth.
struct Matcher {
    t: Target,
    used_v: Vec<bool>,
    used_e: Vec<bool>,
    n_used_v: usize,
    n_used_e: usize,
    symbolic: HashSet<Gen>,
    fwd: HashMap<Gen, Gen>,
    back: HashMap<Gen, Gen>,
    budget_hit: bool,
    steps: u64,
}

type Cont<'k> = &'k mut dyn FnMut(&mut Matcher, usize) -> bool;

impl Matcher {
    fn free_anon(&self, v: usize) -> bool {
        self.t.member[v] && !self.used_v[v] && matches!(self.t.verts[v], Vertex::Anon(_))
    }

    fn take_v(&mut self, v: usize, on: bool) {
        self.used_v[v] = on;
        if on {
            self.n_used_v += 1;
        } else {
            self.n_used_v -= 1;
        }
    }

    fn take_e(&mut self, e: usize, on: bool) {
        self.used_e[e] = on;
        if on {
            self.n_used_e += 1;
        } else {
            self.n_used_e -= 1;
        }
    }

    /// Match a symbolic path against a concrete Named vertex. Returns
    /// `Some(newly bound generator)` on success.
    fn bind(&mut self, sym: &VPath, v: usize) -> Option<Option<Gen>> {
        let Vertex::Named(rt) = &self.t.verts[v] else { return None };
        if sym.spine != rt.spine {
            return None;
        }
        if !self.symbolic.contains(&sym.gen) {
            return (sym.gen == rt.gen).then_some(None);
        }
        match self.fwd.get(&sym.gen) {
            Some(g) => (*g == rt.gen).then_some(None),
            None if self.back.contains_key(&rt.gen) => None,
            None => {
                self.fwd.insert(sym.gen, rt.gen);
                self.back.insert(rt.gen, sym.gen);
                Some(Some(sym.gen))
            }
        }
    }

    fn unbind(&mut self, b: Option<Gen>) {
        if let Some(s) = b {
            if let Some(r) = self.fwd.remove(&s) {
                self.back.remove(&r);
            }
        }
    }

    fn m(&mut self, g: &GraphType, s: usize, d: usize, k: Cont) -> bool {
        use GraphType as G;
        self.steps += 1;
        if self.steps > MATCH_STEPS {
            self.budget_hit = true;
            return false;
        }
        match g {
            G::Empty => {
                if !self.free_anon(s) {
                    return false;
                }
                self.take_v(s, true);
                let r = k(self, s);
                if !r {
                    self.take_v(s, false);
                }
                r
            }
            G::Seq(a, b) => self.m(a, s, d, &mut |me: &mut Matcher, e1| {
                let succs = me.t.succ[e1].clone();
                for (n, eid) in succs {
                    if !me.used_e[eid] && me.free_anon(n) {
                        me.take_e(eid, true);
                        if me.m(b, n, d, &mut *k) {
                            return true;
                        }
                        me.take_e(eid, false);
                    }
                }
                false
            }),
            G::Or(a, b) => self.m(a, s, d, &mut *k) || self.m(b, s, d, &mut *k),
            G::Par(a, b) => {
                if !self.free_anon(s) {
                    return false;
                }
                self.take_v(s, true);
                let succs = self.t.succ[s].clone();
                for &(c1, e1) in &succs {
                    for &(c2, e2) in &succs {
                        if c1 == c2 || self.used_e[e1] || self.used_e[e2] {
                            continue;
                        }
                        if !self.free_anon(c1) || !self.free_anon(c2) {
                            continue;
                        }
                        self.take_e(e1, true);
                        self.take_e(e2, true);
                        let ok = self.m(a, c1, d, &mut |me: &mut Matcher, x1| {
                            me.m(b, c2, d, &mut |me: &mut Matcher, x2| {
                                let outs = me.t.succ[x1].clone();
                                for (j, ej) in outs {
                                    if me.used_e[ej] || !me.free_anon(j) {
                                        continue;
                                    }
                                    let Some(&ej2) = me.t.edge.get(&(x2, j)) else { continue };
                                    if me.used_e[ej2] || ej2 == ej {
                                        continue;
                                    }
                                    me.take_e(ej, true);
                                    me.take_e(ej2, true);
                                    me.take_v(j, true);
                                    if k(me, j) {
                                        return true;
                                    }
                                    me.take_v(j, false);
                                    me.take_e(ej2, false);
                                    me.take_e(ej, false);
                                }
                                false
                            })
                        });
                        if ok {
                            return true;
                        }
                        self.take_e(e2, false);
                        self.take_e(e1, false);
                    }
                }
                self.take_v(s, false);
                false
            }
            G::Spawn(body, vs) => {
                let Some(p) = vs_is_vpath(&vs_eval(vs)) else { return false };
                if !self.free_anon(s) {
                    return false;
                }
                self.take_v(s, true);
                let succs = self.t.succ[s].clone();
                for (c, ec) in succs {
                    if self.used_e[ec] || !self.free_anon(c) {
                        continue;
                    }
                    self.take_e(ec, true);
                    let ok = self.m(body, c, d, &mut |me: &mut Matcher, e| {
                        let outs = me.t.succ[e].clone();
                        for (q, eq) in outs {
                            if me.used_e[eq] || !me.t.member[q] || me.used_v[q] {
                                continue;
                            }
                            let Some(b) = me.bind(&p, q) else { continue };
                            me.take_e(eq, true);
                            me.take_v(q, true);
                            if k(me, s) {
                                return true;
                            }
                            me.take_v(q, false);
                            me.take_e(eq, false);
                            me.unbind(b);
                        }
                        false
                    });
                    if ok {
                        return true;
                    }
                    self.take_e(ec, false);
                }
                self.take_v(s, false);
                false
            }
            G::Touch(vs) => {
                let Some(p) = vs_is_vpath(&vs_eval(vs)) else { return false };
                if !self.free_anon(s) {
                    return false;
                }
                let preds = self.t.pred[s].clone();
                for (q, eq) in preds {
                    if self.used_e[eq] {
                        continue;
                    }
                    let Some(b) = self.bind(&p, q) else { continue };
                    self.take_e(eq, true);
                    self.take_v(s, true);
                    if k(self, s) {
                        return true;
                    }
                    self.take_v(s, false);
                    self.take_e(eq, false);
                    self.unbind(b);
                }
                false
            }
            G::New(u, t, body) => {
                let gen = Gen::fresh();
                self.symbolic.insert(gen);
                let body = body.subst(&Subst::new().vs(u, Vs::Root(t.clone(), gen)));
                self.m(&body, s, d, k)
            }
            G::App(h, a, b) => match &**h {
                G::Pi { uf, ut, body, .. } => {
                    let body = body.subst(&Subst::new().vs(uf, a.clone()).vs(ut, b.clone()));
                    self.m(&body, s, d, k)
                }
                G::Rec(..) if d == 0 => {
                    self.budget_hit = true;
                    false
                }
                G::Rec(..) => {
                    let un = unroll_rec(h).unwrap();
                    self.m(&G::app(un, a.clone(), b.clone()), s, d - 1, k)
                }
                G::App(..) | G::New(..) => match nb(h) {
                    h2 @ (G::Pi { .. } | G::Rec(..)) => self.m(&G::app(h2, a.clone(), b.clone()), s, d, k),
                    _ => false,
                },
                _ => false,
            },
            G::Rec(..) | G::Pi { .. } | G::Var(_) => false,
        }
    }
}

const STACK: usize = 1 << 30;

/// Decide whether `g` is one of the graphs `gty` describes, unrolling
/// recursive applications to nesting depth at most `fuel`.
pub fn soundness_check(gty: &GraphType, g: &CGraph, fuel: usize) -> Verdict {
    let gty = gty.clone();
    let g = g.clone();
    std::thread::Builder::new()
        .stack_size(STACK)
        .spawn(move || {
            let t = Target::new(&g);
            let mut m = Matcher {
                used_v: vec![false; t.verts.len()],
                used_e: vec![false; t.n_edges],
                t,
                n_used_v: 0,
                n_used_e: 0,
                symbolic: HashSet::new(),
                fwd: HashMap::new(),
                back: HashMap::new(),
                budget_hit: false,
                steps: 0,
            };
            let start = m.t.start;
            let found = m.m(&gty, start, fuel, &mut |me: &mut Matcher, e| {
                e == me.t.end && me.n_used_v == me.t.n_member && me.n_used_e == me.t.n_edges
            });
            if found {
                Verdict::Confirmed
            } else if m.budget_hit {
                Verdict::Inconclusive(fuel)
            } else {
                Verdict::Refuted
            }
        })
        .expect("spawn matcher thread")
        .join()
        .expect("matcher thread panicked")
}

/// The literal oracle: enumerate unrollings, normalize, expand, and test
/// each expanded graph for isomorphism. Exponential; meant for small cases.
pub fn soundness_check_enumerative(gty: &GraphType, g: &CGraph, fuel: usize) -> Verdict {
    let mut truncated = false;
    for cand in unroll_enumerate(gty, fuel) {
        let Ok(n) = nbnf(&cand) else { continue };
        if expand_count(&n) > EXPAND_LIMIT {
            truncated = true;
            continue;
        }
        let Ok(graphs) = expand(&n) else { continue };
        if graphs.iter().any(|c| g_iso(c, g)) {
            return Verdict::Confirmed;
        }
    }
    if truncated || gty.count_rec() > 0 {
        Verdict::Inconclusive(fuel)
    } else {
        Verdict::Refuted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgraph::{g_seq, g_spawn};

    fn gv(x: &str) -> GraphType {
        GraphType::Var(x.into())
    }

    #[test]
    fn unroll_examples() {
        assert_eq!(unroll_enumerate(&GraphType::Empty, 5), vec![GraphType::Empty]);
        let a = GraphType::rec("g", GraphType::seq(gv("g"), gv("g")));
        let b = GraphType::rec("g", GraphType::or(gv("g"), gv("g")));
        let both = GraphType::seq(a.clone(), b.clone());
        let one = unroll_enumerate(&both, 1);
        assert_eq!(one.len(), 3);
        assert!(one.contains(&GraphType::seq(GraphType::seq(a.clone(), a.clone()), b.clone())));
        assert!(one.contains(&GraphType::seq(a.clone(), GraphType::or(b.clone(), b))));
    }

    #[test]
    fn unroll_pi_once() {
        let g = GraphType::rec("g", GraphType::pi("u", VsType::Unit, "w", VsType::Unit, GraphType::Empty));
        let r = unroll_enumerate(&g, 1);
        assert_eq!(r.len(), 2);
        assert!(matches!(r[1], GraphType::Pi { .. }));
    }

    #[test]
    fn traces_replay() {
        let g = GraphType::rec(
            "g",
            GraphType::pi(
                "u",
                VsType::Unit,
                "w",
                VsType::Unit,
                GraphType::or(GraphType::Empty, GraphType::app(gv("g"), Vs::Unit, Vs::Unit)),
            ),
        );
        for t in unroll_traces(&g, 3) {
            assert_eq!(replay(&g, &t), Some(t.result.clone()));
        }
    }

    #[test]
    fn nbnf_examples() {
        let g = GraphType::New("u".into(), VsType::V, Box::new(GraphType::Touch(Vs::var("u"))));
        match nbnf(&g).unwrap() {
            GraphType::Touch(Vs::Root(VsType::V, _)) => {}
            other => panic!("{}", other),
        }
        let pi = GraphType::pi("u", VsType::V, "w", VsType::V, GraphType::spawn(GraphType::Empty, Vs::var("u")));
        let r = Vs::Root(VsType::both(VsType::V, VsType::V), Gen(7));
        let app = GraphType::app(pi, Vs::fst(Vs::pair(r.clone(), r.clone())), Vs::snd(r.clone()));
        assert_eq!(nbnf(&app).unwrap(), GraphType::spawn(GraphType::Empty, r));
        let rec = GraphType::app(
            GraphType::rec("g", GraphType::pi("u", VsType::Unit, "w", VsType::Unit, GraphType::Empty)),
            Vs::Unit,
            Vs::Unit,
        );
        assert_eq!(nbnf(&rec).unwrap(), rec);
        assert!(matches!(nbnf(&GraphType::Touch(Vs::var("u"))), Err(NormError::NotClosed(_))));
    }

    #[test]
    fn expand_examples() {
        assert_eq!(expand(&GraphType::Empty).unwrap().len(), 1);
        let p = Vs::Root(VsType::V, Gen(3));
        assert_eq!(expand(&GraphType::or(GraphType::Touch(p), GraphType::Empty)).unwrap().len(), 2);
        let rec = GraphType::rec("g", GraphType::pi("u", VsType::Unit, "w", VsType::Unit, GraphType::Empty));
        assert!(expand(&rec).unwrap().is_empty());
    }

    #[test]
    fn double_spawn_is_flagged() {
        let p = Vs::Root(VsType::V, Gen(4));
        let g = GraphType::seq(GraphType::spawn(GraphType::Empty, p.clone()), GraphType::spawn(GraphType::Empty, p));
        let graphs = expand(&g).unwrap();
        assert!(!g_wellformed(&graphs[0]).wellformed);
    }

    #[test]
    fn oracle_simple() {
        let gen = Gen::fresh();
        let p = VPath::root(VsType::V, gen);
        let run = g_seq(g_spawn(g_empty(), p.clone()).unwrap(), g_touch(p)).unwrap();
        let gty = GraphType::New(
            "u".into(),
            VsType::V,
            Box::new(GraphType::seq(GraphType::spawn(GraphType::Empty, Vs::var("u")), GraphType::Touch(Vs::var("u")))),
        );
        assert_eq!(soundness_check(&gty, &run, 0), Verdict::Confirmed);
        assert_eq!(soundness_check_enumerative(&gty, &run, 0), Verdict::Confirmed);
        assert_eq!(soundness_check(&GraphType::Empty, &run, 0), Verdict::Refuted);
        assert_eq!(soundness_check(&GraphType::Empty, &g_empty(), 0), Verdict::Confirmed);
    }

    #[test]
    fn simplify_drops_units() {
        let p = Vs::var("u");
        let g = GraphType::seq(GraphType::seq(GraphType::Empty, GraphType::Touch(p.clone())), GraphType::Empty);
        assert_eq!(graph_simplify(&g), GraphType::Touch(p));
    }
}
