//! Concrete computation graphs and the combinators shared by expansion and
//! the interpreter.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::syntax::{fresh_id, Gen, VPath};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Anon(u64),
    Named(VPath),
}

impl Vertex {
    pub fn fresh() -> Vertex {
        Vertex::Anon(fresh_id())
    }

    pub fn is_named(&self) -> bool {
        matches!(self, Vertex::Named(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CGraph {
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeSet<(Vertex, Vertex)>,
    pub start: Vertex,
    pub end: Vertex,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex collision at {0:?}")]
    VertexCollision(Vertex),
    #[error("target vertex {0:?} is absent")]
    TargetAbsent(Vertex),
    #[error("graph has a cycle")]
    Cyclic,
}

fn disjoint(a: &CGraph, b: &CGraph) -> Result<(), GraphError> {
    let (small, large) = if a.vertices.len() <= b.vertices.len() { (a, b) } else { (b, a) };
    match small.vertices.iter().find(|v| large.vertices.contains(v)) {
        Some(v) => Err(GraphError::VertexCollision(v.clone())),
        None => Ok(()),
    }
}

pub fn g_empty() -> CGraph {
    let u = Vertex::fresh();
    CGraph { vertices: [u.clone()].into_iter().collect(), edges: BTreeSet::new(), start: u.clone(), end: u }
}

pub fn g_seq(a: CGraph, b: CGraph) -> Result<CGraph, GraphError> {
    disjoint(&a, &b)?;
    Ok(seq_unchecked(a, b))
}

/// Sequential composition without the disjointness check; only for
/// demonstrating what the well-formedness check catches.
pub fn seq_unchecked(mut a: CGraph, b: CGraph) -> CGraph {
    a.edges.insert((a.end.clone(), b.start.clone()));
    a.vertices.extend(b.vertices);
    a.edges.extend(b.edges);
    a.end = b.end;
    a
}

pub fn g_spawn(mut a: CGraph, p: VPath) -> Result<CGraph, GraphError> {
    let named = Vertex::Named(p);
    if a.vertices.contains(&named) {
        return Err(GraphError::VertexCollision(named));
    }
    let u = Vertex::fresh();
    a.edges.insert((u.clone(), a.start.clone()));
    a.edges.insert((a.end.clone(), named.clone()));
    a.vertices.insert(u.clone());
    a.vertices.insert(named);
    a.start = u.clone();
    a.end = u;
    Ok(a)
}

pub fn g_touch(p: VPath) -> CGraph {
    let u = Vertex::fresh();
    CGraph {
        vertices: [u.clone()].into_iter().collect(),
        edges: [(Vertex::Named(p), u.clone())].into_iter().collect(),
        start: u.clone(),
        end: u,
    }
}

pub fn g_par(a: CGraph, b: CGraph) -> Result<CGraph, GraphError> {
    disjoint(&a, &b)?;
    let fork = Vertex::fresh();
    let join = Vertex::fresh();
    let mut g = CGraph {
        vertices: a.vertices.into_iter().chain(b.vertices).collect(),
        edges: a.edges.into_iter().chain(b.edges).collect(),
        start: fork.clone(),
        end: join.clone(),
    };
    g.edges.insert((fork.clone(), a.start));
    g.edges.insert((fork.clone(), b.start));
    g.edges.insert((a.end, join.clone()));
    g.edges.insert((b.end, join.clone()));
    g.vertices.insert(fork);
    g.vertices.insert(join);
    Ok(g)
}

/// Every vertex that appears in the graph, including touched Named
/// vertices whose spawn lies outside it.
pub fn endpoints(g: &CGraph) -> BTreeSet<Vertex> {
    let mut all = g.vertices.clone();
    for (a, b) in &g.edges {
        all.insert(a.clone());
        all.insert(b.clone());
    }
    all
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfReport {
    /// Unique vertices, endpoints present, every future sink spawned once.
    pub wellformed: bool,
    /// No dependence cycle (a cycle means a touch that precedes its spawn).
    pub acyclic: bool,
    pub diagnostics: Vec<String>,
}

pub fn g_wellformed(g: &CGraph) -> WfReport {
    let mut diagnostics = Vec::new();
    if !g.vertices.contains(&g.start) {
        diagnostics.push("start vertex missing".to_string());
    }
    if !g.vertices.contains(&g.end) {
        diagnostics.push("end vertex missing".to_string());
    }
    let mut sinks: BTreeMap<&VPath, usize> = BTreeMap::new();
    for (a, b) in &g.edges {
        if !g.vertices.contains(b) {
            diagnostics.push(format!("edge target {:?} is not a vertex", b));
        }
        if !g.vertices.contains(a) && !a.is_named() {
            diagnostics.push(format!("edge source {:?} is not a vertex", a));
        }
        if let Vertex::Named(p) = b {
            *sinks.entry(p).or_default() += 1;
        }
    }
    for (p, n) in sinks {
        if n > 1 {
            diagnostics.push(format!("future vertex {} is spawned {} times", p, n));
        }
    }
    let wellformed = diagnostics.is_empty();
    let acyclic = topo_order(g).is_some();
    if !acyclic {
        diagnostics.push("dependence cycle".to_string());
    }
    WfReport { wellformed, acyclic, diagnostics }
}

fn topo_order(g: &CGraph) -> Option<Vec<Vertex>> {
    let all = endpoints(g);
    let mut indeg: HashMap<&Vertex, usize> = all.iter().map(|v| (v, 0)).collect();
    let mut succ: HashMap<&Vertex, Vec<&Vertex>> = HashMap::new();
    for (a, b) in &g.edges {
        *indeg.get_mut(b).unwrap() += 1;
        succ.entry(a).or_default().push(b);
    }
    let mut queue: VecDeque<&Vertex> = all.iter().filter(|v| indeg[v] == 0).collect();
    let mut order = Vec::new();
    while let Some(v) = queue.pop_front() {
        order.push(v.clone());
        for w in succ.get(v).into_iter().flatten() {
            let d = indeg.get_mut(w).unwrap();
            *d -= 1;
            if *d == 0 {
                queue.push_back(w);
            }
        }
    }
    if order.len() == all.len() {
        Some(order)
    } else {
        None
    }
}

/// Longest edge path from the start vertex to `target`.
pub fn g_critical_path(g: &CGraph, target: &Vertex) -> Result<usize, GraphError> {
    if !endpoints(g).contains(target) {
        return Err(GraphError::TargetAbsent(target.clone()));
    }
    let order = topo_order(g).ok_or(GraphError::Cyclic)?;
    let mut dist: HashMap<&Vertex, usize> = HashMap::new();
    dist.insert(&g.start, 0);
    let mut succ: HashMap<&Vertex, Vec<&Vertex>> = HashMap::new();
    for (a, b) in &g.edges {
        succ.entry(a).or_default().push(b);
    }
    for v in &order {
        if let Some(&d) = dist.get(v) {
            for w in succ.get(v).into_iter().flatten() {
                let e = dist.entry(w).or_insert(0);
                *e = (*e).max(d + 1);
            }
        }
    }
    dist.get(target).copied().ok_or(GraphError::TargetAbsent(target.clone()))
}

// ---------------------------------------------------------------------------
// Isomorphism

struct Indexed {
    verts: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    member: Vec<bool>,
    edges: BTreeSet<(usize, usize)>,
}

fn indexed(g: &CGraph) -> Indexed {
    let verts: Vec<Vertex> = endpoints(g).into_iter().collect();
    let index: HashMap<Vertex, usize> = verts.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let mut succ = vec![Vec::new(); verts.len()];
    let mut pred = vec![Vec::new(); verts.len()];
    let mut edges = BTreeSet::new();
    for (a, b) in &g.edges {
        let (i, j) = (index[a], index[b]);
        succ[i].push(j);
        pred[j].push(i);
        edges.insert((i, j));
    }
    let member = verts.iter().map(|v| g.vertices.contains(v)).collect();
    Indexed { verts, index, succ, pred, member, edges }
}

struct IsoSearch<'a> {
    a: &'a Indexed,
    b: &'a Indexed,
    order: Vec<usize>,
    map: Vec<Option<usize>>,
    used: Vec<bool>,
    gens: HashMap<Gen, Gen>,
    gens_back: HashMap<Gen, Gen>,
}

impl IsoSearch<'_> {
    fn compatible(&self, x: usize, y: usize) -> Option<Option<(Gen, Gen)>> {
        let (a, b) = (self.a, self.b);
        if self.used[y]
            || a.member[x] != b.member[y]
            || a.succ[x].len() != b.succ[y].len()
            || a.pred[x].len() != b.pred[y].len()
        {
            return None;
        }
        let bind = match (&a.verts[x], &b.verts[y]) {
            (Vertex::Anon(_), Vertex::Anon(_)) => None,
            (Vertex::Named(p), Vertex::Named(q)) => {
                if p.spine != q.spine {
                    return None;
                }
                match (self.gens.get(&p.gen), self.gens_back.get(&q.gen)) {
                    (Some(g), _) if *g != q.gen => return None,
                    (_, Some(g)) if *g != p.gen => return None,
                    (Some(_), Some(_)) => None,
                    _ => Some((p.gen, q.gen)),
                }
            }
            _ => return None,
        };
        for &s in &a.succ[x] {
            if let Some(t) = self.map[s] {
                if !b.edges.contains(&(y, t)) {
                    return None;
                }
            }
        }
        for &s in &a.pred[x] {
            if let Some(t) = self.map[s] {
                if !b.edges.contains(&(t, y)) {
                    return None;
                }
            }
        }
        if a.succ[x].contains(&x) != b.edges.contains(&(y, y)) {
            return None;
        }
        Some(bind)
    }

    fn candidates(&self, x: usize) -> Vec<usize> {
        for &s in &self.a.pred[x] {
            if let Some(t) = self.map[s] {
                return self.b.succ[t].clone();
            }
        }
        for &s in &self.a.succ[x] {
            if let Some(t) = self.map[s] {
                return self.b.pred[t].clone();
            }
        }
        (0..self.b.verts.len()).collect()
    }

    fn search(&mut self, k: usize) -> bool {
        if k == self.order.len() {
            return true;
        }
        let x = self.order[k];
        if self.map[x].is_some() {
            // start and end are pre-assigned
            return self.search(k + 1);
        }
        for y in self.candidates(x) {
            let Some(bind) = self.compatible(x, y) else { continue };
            self.map[x] = Some(y);
            self.used[y] = true;
            if let Some((g, h)) = bind {
                self.gens.insert(g, h);
                self.gens_back.insert(h, g);
            }
            if self.search(k + 1) {
                return true;
            }
            if let Some((g, h)) = bind {
                self.gens.remove(&g);
                self.gens_back.remove(&h);
            }
            self.map[x] = None;
            self.used[y] = false;
        }
        false
    }
}

/// Graph isomorphism up to renaming of anonymous vertices and a single
/// generator bijection on Named vertices.
pub fn g_iso(a: &CGraph, b: &CGraph) -> bool {
    if a.vertices.len() != b.vertices.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let ia = indexed(a);
    let ib = indexed(b);
    if ia.verts.len() != ib.verts.len() {
        return false;
    }
    // breadth-first order from start, then anything left
    let mut order = Vec::new();
    let mut seen = vec![false; ia.verts.len()];
    let s = ia.index[&a.start];
    let mut queue = VecDeque::from([s]);
    seen[s] = true;
    let mut rest = (0..ia.verts.len()).collect::<Vec<_>>().into_iter();
    loop {
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &y in ia.succ[x].iter().chain(&ia.pred[x]) {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        match rest.find(|&x| !seen[x]) {
            Some(x) => {
                seen[x] = true;
                queue.push_back(x);
            }
            None => break,
        }
    }
    let mut st = IsoSearch {
        a: &ia,
        b: &ib,
        order,
        map: vec![None; ia.verts.len()],
        used: vec![false; ib.verts.len()],
        gens: HashMap::new(),
        gens_back: HashMap::new(),
    };
    for (x, y) in [(&a.start, &b.start), (&a.end, &b.end)] {
        let (i, j) = (ia.index[x], ib.index[y]);
        match st.map[i] {
            Some(k) if k != j => return false,
            Some(_) => continue,
            None => {}
        }
        match st.compatible(i, j) {
            Some(bind) => {
                st.map[i] = Some(j);
                st.used[j] = true;
                if let Some((g, h)) = bind {
                    st.gens.insert(g, h);
                    st.gens_back.insert(h, g);
                }
            }
            None => return false,
        }
    }
    st.search(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Proj, VsType};

    fn path(g: u64, spine: &[Proj]) -> VPath {
        VPath { gen: Gen(g), ty: VsType::vstream(), spine: spine.to_vec() }
    }

    #[test]
    fn empty_graph() {
        let g = g_empty();
        assert_eq!(g.vertices.len(), 1);
        assert_eq!(g.start, g.end);
        assert!(g_wellformed(&g).wellformed);
        assert_eq!(g_critical_path(&g, &g.start.clone()), Ok(0));
    }

    #[test]
    fn seq_path() {
        let g = g_seq(g_empty(), g_empty()).unwrap();
        assert_eq!(g_critical_path(&g, &g.end.clone()), Ok(1));
    }

    #[test]
    fn touch_graph() {
        let p = path(0, &[Proj::Fst]);
        let g = g_touch(p.clone());
        assert_eq!(g.vertices.len(), 1);
        assert!(g.edges.contains(&(Vertex::Named(p), g.start.clone())));
        assert!(g_wellformed(&g).wellformed);
    }

    #[test]
    fn spawn_graph() {
        let e = g_empty();
        let a = e.start.clone();
        let p = path(0, &[]);
        let g = g_spawn(e, p.clone()).unwrap();
        assert_eq!(g.vertices.len(), 3);
        assert!(g.edges.contains(&(g.start.clone(), a.clone())));
        assert!(g.edges.contains(&(a, Vertex::Named(p))));
    }

    #[test]
    fn duplicate_spawn_detected() {
        let p = path(0, &[]);
        let a = g_spawn(g_empty(), p.clone()).unwrap();
        let b = g_spawn(g_empty(), p).unwrap();
        assert!(g_seq(a.clone(), b.clone()).is_err());
        let forced = seq_unchecked(a, b);
        assert!(!g_wellformed(&forced).wellformed);
    }

    #[test]
    fn iso_examples() {
        let g = g_seq(g_spawn(g_empty(), path(0, &[Proj::Fst])).unwrap(), g_touch(path(0, &[Proj::Fst]))).unwrap();
        assert!(g_iso(&g, &g));
        assert!(g_iso(&g_touch(path(0, &[Proj::Fst])), &g_touch(path(1, &[Proj::Fst]))));
        assert!(!g_iso(&g_touch(path(0, &[Proj::Fst])), &g_touch(path(0, &[Proj::Snd]))));
    }

    #[test]
    fn iso_requires_single_bijection() {
        let a = g_seq(g_touch(path(0, &[Proj::Fst])), g_touch(path(0, &[Proj::Snd]))).unwrap();
        let b = g_seq(g_touch(path(1, &[Proj::Fst])), g_touch(path(2, &[Proj::Snd]))).unwrap();
        assert!(!g_iso(&a, &b));
    }

    #[test]
    fn par_adds_two() {
        let g = g_par(g_empty(), g_empty()).unwrap();
        assert_eq!(g.vertices.len(), 4);
        assert_eq!(g.edges.len(), 4);
    }

    #[test]
    fn cycle_reported() {
        let p = path(5, &[]);
        let g = g_seq(g_touch(p.clone()), g_spawn(g_empty(), p).unwrap()).unwrap();
        let r = g_wellformed(&g);
        assert!(r.wellformed);
        assert!(!r.acyclic);
    }
}
