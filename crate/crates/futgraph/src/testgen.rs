//! Random generators for property tests and the acceptance suites.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::elaborate::{unann_kind, UType, UValue};
use crate::kindcheck::graph_kind_of;
use crate::syntax::*;
use crate::vstruct::{as_path, derive_split, unfold, vs_check, vs_synth, RawPath, VsError};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Graph types

struct GraphGen<'r> {
    rng: &'r mut StdRng,
    recs_left: usize,
    names: usize,
}

#[derive(Clone)]
struct Scope {
    /// Vertex structures this subterm may still spawn at.
    owned: Vec<(Vs, VsType)>,
    /// Vertex variables that may be touched.
    visible: Vec<(Vs, VsType)>,
}

fn v_paths(vs: &Vs, t: &VsType, depth: usize, out: &mut Vec<Vs>) {
    match crate::vstruct::unfold(t) {
        VsType::V => out.push(vs.clone()),
        VsType::Prod(a, la, b, ra) if depth > 0 => {
            if la.is_av() {
                v_paths(&Vs::fst(vs.clone()), &a, depth - 1, out);
            }
            if ra.is_av() {
                v_paths(&Vs::snd(vs.clone()), &b, depth - 1, out);
            }
        }
        _ => {}
    }
}

impl GraphGen<'_> {
    fn fresh(&mut self, base: &str) -> Name {
        self.names += 1;
        format!("{}{}", base, self.names)
    }

    fn vsty(&mut self) -> VsType {
        match self.rng.gen_range(0..3) {
            0 => VsType::V,
            1 => VsType::both(VsType::V, VsType::V),
            _ => VsType::vstream(),
        }
    }

    /// Take one single vertex out of the owned set, splitting products.
    fn take_vertex(&mut self, sc: &mut Scope) -> Option<Vs> {
        for _ in 0..4 {
            if sc.owned.is_empty() {
                return None;
            }
            let i = self.rng.gen_range(0..sc.owned.len());
            let (vs, t) = sc.owned.swap_remove(i);
            match crate::vstruct::unfold(&t) {
                VsType::V => return Some(vs),
                VsType::Prod(a, la, b, ra) => {
                    if la.is_av() {
                        sc.owned.push((Vs::fst(vs.clone()), *a));
                    }
                    if ra.is_av() {
                        sc.owned.push((Vs::snd(vs), *b));
                    }
                }
                _ => {}
            }
        }
        None
    }

    fn split(&mut self, sc: &Scope) -> (Scope, Scope) {
        let mut l = Scope { owned: Vec::new(), visible: sc.visible.clone() };
        let mut r = l.clone();
        for o in &sc.owned {
            if self.rng.gen_bool(0.5) {
                l.owned.push(o.clone());
            } else {
                r.owned.push(o.clone());
            }
        }
        (l, r)
    }

    fn touchable(&mut self, sc: &Scope) -> Option<Vs> {
        let mut paths = Vec::new();
        for (vs, t) in &sc.visible {
            v_paths(vs, t, 3, &mut paths);
        }
        paths.choose(self.rng).cloned()
    }

    fn gen(&mut self, depth: usize, mut sc: Scope, rec: Option<(&Name, &VsType)>) -> GraphType {
        if depth == 0 {
            return match self.rng.gen_range(0..3) {
                0 => self.touchable(&sc).map(GraphType::Touch).unwrap_or(GraphType::Empty),
                1 => match self.take_vertex(&mut sc) {
                    Some(v) => GraphType::spawn(GraphType::Empty, v),
                    None => GraphType::Empty,
                },
                _ => GraphType::Empty,
            };
        }
        match self.rng.gen_range(0..10) {
            0 | 1 => {
                let (l, r) = self.split(&sc);
                GraphType::seq(self.gen(depth - 1, l, rec), self.gen(depth - 1, r, rec))
            }
            2 => {
                let (l, r) = self.split(&sc);
                GraphType::par(self.gen(depth - 1, l, rec), self.gen(depth - 1, r, rec))
            }
            3 => GraphType::or(self.gen(depth - 1, sc.clone(), rec), self.gen(depth - 1, sc, rec)),
            4 | 5 => {
                let u = self.fresh("u");
                let t = self.vsty();
                sc.owned.push((Vs::var(&u), t.clone()));
                sc.visible.push((Vs::var(&u), t.clone()));
                GraphType::New(u, t, Box::new(self.gen(depth - 1, sc, rec)))
            }
            6 => match self.take_vertex(&mut sc) {
                Some(v) => GraphType::spawn(self.gen(depth - 1, sc, rec), v),
                None => self.gen(depth - 1, sc, rec),
            },
            7 => match rec {
                // A recursive call on some owned structure of the right type.
                Some((g, t)) => {
                    let pos = sc.owned.iter().position(|(_, ot)| ot == t);
                    match pos {
                        Some(i) => {
                            let (vs, _) = sc.owned.swap_remove(i);
                            GraphType::app(GraphType::Var(g.clone()), vs, Vs::Unit)
                        }
                        None => GraphType::Empty,
                    }
                }
                None => self.touchable(&sc).map(GraphType::Touch).unwrap_or(GraphType::Empty),
            },
            _ if self.recs_left > 0 => {
                self.recs_left -= 1;
                let g = self.fresh("g");
                let uf = self.fresh("f");
                let ut = self.fresh("w");
                let tf = if self.rng.gen_bool(0.7) { VsType::vstream() } else { self.vsty() };
                let mut inner = Scope { owned: Vec::new(), visible: sc.visible.clone() };
                let uvs = Vs::var(&uf);
                match crate::vstruct::unfold(&tf) {
                    VsType::Prod(a, _, b, _) if tf == VsType::vstream() => {
                        inner.owned.push((Vs::fst(uvs.clone()), *a));
                        inner.owned.push((Vs::snd(uvs.clone()), *b));
                    }
                    _ => inner.owned.push((uvs.clone(), tf.clone())),
                }
                inner.visible.push((uvs, tf.clone()));
                let body = self.gen(depth - 1, inner, Some((&g, &tf)));
                let head = GraphType::rec(&g, GraphType::pi(&uf, tf.clone(), &ut, VsType::Unit, body));
                let pos = sc.owned.iter().position(|(_, ot)| ot == &tf);
                match pos {
                    Some(i) => {
                        let (vs, _) = sc.owned.swap_remove(i);
                        GraphType::app(head, vs, Vs::Unit)
                    }
                    None => {
                        let u = self.fresh("u");
                        GraphType::New(u.clone(), tf, Box::new(GraphType::app(head, Vs::var(&u), Vs::Unit)))
                    }
                }
            }
            _ => self.gen(depth - 1, sc, rec),
        }
    }
}

/// A closed graph type of kind ground with nesting depth at most `depth`
/// and at most `max_rec` recursive binders.
pub fn ground_graph(rng: &mut StdRng, depth: usize, max_rec: usize) -> GraphType {
    loop {
        let mut g = GraphGen { rng: &mut *rng, recs_left: max_rec, names: 0 };
        let sc = Scope { owned: Vec::new(), visible: Vec::new() };
        let gty = g.gen(depth, sc, None);
        if graph_depth(&gty) <= depth && graph_kind_of(&Ctxs::empty(), &gty) == Ok(GraphKind::Ground) {
            return gty;
        }
    }
}

/// Nesting depth counting graph-forming constructors only.
pub fn graph_depth(g: &GraphType) -> usize {
    use GraphType as G;
    match g {
        G::Var(_) | G::Empty | G::Touch(_) => 0,
        G::Seq(a, b) | G::Par(a, b) | G::Or(a, b) => 1 + graph_depth(a).max(graph_depth(b)),
        G::Spawn(a, _) | G::Rec(_, a) | G::New(_, _, a) => 1 + graph_depth(a),
        G::Pi { body, .. } => graph_depth(body),
        G::App(h, _, _) => graph_depth(h),
    }
}

// ---------------------------------------------------------------------------
// Unannotated types and values

/// A fixed, already-annotated function type for `UType::Fun` leaves.
pub fn unit_fun_ty() -> FunTy {
    FunTy {
        uf: "u".into(),
        tf: VsType::Unit,
        ut: "w".into(),
        tt: VsType::Unit,
        dom: Con::Unit,
        cod: Con::Unit,
        eff: GraphType::app(
            GraphType::rec("g", GraphType::pi("u", VsType::Unit, "w", VsType::Unit, GraphType::Empty)),
            Vs::var("u"),
            Vs::var("w"),
        ),
    }
}

pub fn unit_fun_value() -> FunExpr {
    FunExpr {
        uf: "u".into(),
        tf: VsType::Unit,
        ut: "w".into(),
        tt: VsType::Unit,
        f: "f".into(),
        x: "x".into(),
        dom: Con::Unit,
        cod: Con::Unit,
        body: Expr::var("x"),
    }
}

fn utype_rec(rng: &mut StdRng, depth: usize, vars: &mut Vec<Name>) -> UType {
    let leaf = |rng: &mut StdRng, vars: &Vec<Name>| match rng.gen_range(0..6) {
        0 | 1 if !vars.is_empty() => UType::Var(vars.choose(rng).unwrap().clone()),
        0..=2 => UType::Unit,
        3 => UType::Base(BaseTy::Int),
        4 => UType::Base(BaseTy::Float),
        _ => UType::Fun(Box::new(unit_fun_ty())),
    };
    if depth <= 1 {
        return leaf(rng, vars);
    }
    match rng.gen_range(0..8) {
        0 => leaf(rng, vars),
        1 | 2 => UType::prod(utype_rec(rng, depth - 1, vars), utype_rec(rng, depth - 1, vars)),
        3 | 4 => UType::sum(utype_rec(rng, depth - 1, vars), utype_rec(rng, depth - 1, vars)),
        5 => UType::fut(utype_rec(rng, depth - 1, vars)),
        _ => {
            let a = format!("a{}", vars.len());
            vars.push(a.clone());
            let body = utype_rec(rng, depth - 1, vars);
            vars.pop();
            UType::rec(&a, body)
        }
    }
}

/// A closed, well-kinded unannotated type of depth at most `depth`.
pub fn utype(rng: &mut StdRng, depth: usize) -> UType {
    loop {
        let t = utype_rec(rng, depth, &mut Vec::new());
        if unann_kind(&Default::default(), &t).is_ok() {
            return t;
        }
    }
}

fn uvalue_in(rng: &mut StdRng, t: &UType, budget: &mut isize, tries: &mut usize) -> Option<UValue> {
    *budget -= 1;
    *tries += 1;
    if *budget < 0 || *tries > 2000 {
        return None;
    }
    Some(match t {
        UType::Var(_) => return None,
        UType::Unit => UValue::Triv,
        UType::Base(BaseTy::Int) => UValue::Lit(Lit::Int(rng.gen_range(-9..10))),
        UType::Base(BaseTy::Float) => UValue::Lit(Lit::Float(F64(rng.gen_range(0..8) as f64 * 0.5))),
        UType::Fun(_) => UValue::Fun(Box::new(unit_fun_value())),
        UType::Prod(a, b) => {
            let va = uvalue_in(rng, a, budget, tries)?;
            let vb = uvalue_in(rng, b, budget, tries)?;
            UValue::Pair(Box::new(va), Box::new(vb))
        }
        UType::Sum(a, b) => {
            let left_first = rng.gen_bool(0.5);
            let saved = *budget;
            let order = if left_first { [(true, a), (false, b)] } else { [(false, b), (true, a)] };
            for (is_left, t) in order {
                *budget = saved;
                if let Some(v) = uvalue_in(rng, t, budget, tries) {
                    return Some(if is_left { UValue::InL(Box::new(v)) } else { UValue::InR(Box::new(v)) });
                }
            }
            return None;
        }
        UType::Fut(a) => UValue::Handle(Box::new(uvalue_in(rng, a, budget, tries)?)),
        UType::Rec(..) => UValue::Roll(Box::new(uvalue_in(rng, &t.unroll().unwrap(), budget, tries)?)),
    })
}

/// A value of `t` with at most `max_nodes` nodes, if one is found.
pub fn uvalue(rng: &mut StdRng, t: &UType, max_nodes: usize) -> Option<UValue> {
    for _ in 0..20 {
        let mut budget = max_nodes as isize;
        let mut tries = 0;
        if let Some(v) = uvalue_in(rng, t, &mut budget, &mut tries) {
            return Some(v);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Ω splitting instances

pub fn vsty_of_depth(rng: &mut StdRng, depth: usize) -> VsType {
    if depth <= 1 {
        return match rng.gen_range(0..4) {
            0 => VsType::Unit,
            1 => VsType::vstream(),
            _ => VsType::V,
        };
    }
    match rng.gen_range(0..6) {
        0 => VsType::V,
        1 => VsType::vstream(),
        2 => {
            let a = vsty_of_depth(rng, depth - 1);
            let b = vsty_of_depth(rng, depth - 1);
            let la = if rng.gen_bool(0.8) { Avail::Av } else { Avail::Unav };
            let ra = if rng.gen_bool(0.8) { Avail::Av } else { Avail::Unav };
            VsType::prod(a, la, b, ra)
        }
        _ => VsType::both(vsty_of_depth(rng, depth - 1), vsty_of_depth(rng, depth - 1)),
    }
}

fn random_path(rng: &mut StdRng, omega: &Omega) -> Vs {
    let keys: Vec<&Key> = omega.keys().collect();
    let k = keys.choose(rng).unwrap();
    let mut v = match k {
        Key::Var(x) => Vs::Var(x.clone()),
        Key::Gen(g) => Vs::Root(omega[*k].clone(), *g),
    };
    for _ in 0..rng.gen_range(0..4) {
        v = if rng.gen_bool(0.5) { Vs::fst(v) } else { Vs::snd(v) };
    }
    v
}

fn random_side(rng: &mut StdRng, omega: &Omega) -> Vs {
    match rng.gen_range(0..4) {
        0 => Vs::pair(random_path(rng, omega), random_path(rng, omega)),
        _ => random_path(rng, omega),
    }
}

#[derive(Clone, Debug)]
pub struct SplitInstance {
    pub omega: Omega,
    pub left: Vs,
    pub right: Vs,
}

/// Ω with up to three bindings plus two vertex structures that each type
/// under Ω on their own.
pub fn split_instance(rng: &mut StdRng, max_bindings: usize, depth: usize) -> SplitInstance {
    loop {
        let n = rng.gen_range(1..=max_bindings);
        let omega: Omega = (0..n).map(|i| (Key::Var(format!("x{}", i)), vsty_of_depth(rng, depth))).collect();
        let left = random_side(rng, &omega);
        let right = random_side(rng, &omega);
        let none = Omega::new();
        if vs_synth(&omega, &none, &left).is_ok() && vs_synth(&omega, &none, &right).is_ok() {
            return SplitInstance { omega, left, right };
        }
    }
}

fn raw_paths(v: &Vs, out: &mut Vec<RawPath>) {
    match v {
        Vs::Pair(a, b) => {
            raw_paths(a, out);
            raw_paths(b, out);
        }
        Vs::Unit => {}
        _ => out.extend(as_path(v)),
    }
}

type Cand = (Option<VsType>, Option<VsType>);

/// No available vertex is reachable, so both sides may hold the whole type.
fn vertex_free(s: &VsType) -> bool {
    match s {
        VsType::V => false,
        VsType::Unit | VsType::Var(_) => true,
        VsType::Corec(_, body) => vertex_free(body),
        VsType::Prod(a, la, b, ra) => (!la.is_av() || vertex_free(a)) && (!ra.is_av() || vertex_free(b)),
    }
}

/// Candidate ways to share `s` between two sides. Subtrees that no path
/// reaches are handed over whole, which loses no witnesses.
fn share(s: &VsType, spines: &[Vec<Proj>]) -> Vec<Cand> {
    let mut out: Vec<Cand> = vec![(Some(s.clone()), None), (None, Some(s.clone()))];
    if vertex_free(s) {
        out.push((Some(s.clone()), Some(s.clone())));
    }
    if spines.is_empty() {
        return out;
    }
    if let VsType::Prod(a, la, b, ra) = unfold(s) {
        let below = |p: Proj| -> Vec<Vec<Proj>> {
            spines.iter().filter(|sp| sp.first() == Some(&p)).map(|sp| sp[1..].to_vec()).collect()
        };
        let ca = if la.is_av() { share(&a, &below(Proj::Fst)) } else { vec![(None, None)] };
        let cb = if ra.is_av() { share(&b, &below(Proj::Snd)) } else { vec![(None, None)] };
        let side = |x: &Option<VsType>, y: &Option<VsType>| -> Option<VsType> {
            if x.is_none() && y.is_none() {
                return None;
            }
            let av = |o: &Option<VsType>| if o.is_some() { Avail::Av } else { Avail::Unav };
            Some(VsType::prod(
                x.clone().unwrap_or_else(|| (*a).clone()),
                av(x),
                y.clone().unwrap_or_else(|| (*b).clone()),
                av(y),
            ))
        };
        for (a1, a2) in &ca {
            for (b1, b2) in &cb {
                out.push((side(a1, b1), side(a2, b2)));
            }
        }
    }
    out
}

/// Declarative answer: does some derivable split of Ω give the left
/// structure its type under one part and the right under the other?
/// Bindings are independent, so each is decided with every other binding
/// left whole on both sides.
pub fn split_oracle(inst: &SplitInstance) -> Result<bool, VsError> {
    let none = Omega::new();
    let (tl, _) = vs_synth(&inst.omega, &none, &inst.left)?;
    let (tr, _) = vs_synth(&inst.omega, &none, &inst.right)?;
    let mut paths = Vec::new();
    raw_paths(&inst.left, &mut paths);
    raw_paths(&inst.right, &mut paths);
    for (k, s) in &inst.omega {
        let spines: Vec<Vec<Proj>> = paths.iter().filter(|p| &p.root == k).map(|p| p.spine.clone()).collect();
        let mut found = false;
        for (a, b) in share(s, &spines) {
            let single: Omega = [(k.clone(), s.clone())].into_iter().collect();
            let mut o1 = inst.omega.clone();
            let mut o2 = inst.omega.clone();
            let mut d1 = Omega::new();
            let mut d2 = Omega::new();
            match a {
                Some(a) => {
                    o1.insert(k.clone(), a.clone());
                    d1.insert(k.clone(), a);
                }
                None => {
                    o1.remove(k);
                }
            }
            match b {
                Some(b) => {
                    o2.insert(k.clone(), b.clone());
                    d2.insert(k.clone(), b);
                }
                None => {
                    o2.remove(k);
                }
            }
            if !derive_split(&single, &d1, &d2, 24)? {
                continue;
            }
            if vs_check(&o1, &none, &inst.left, &tl).is_ok() && vs_check(&o2, &none, &inst.right, &tr).is_ok() {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The algorithmic answer for the same instance.
pub fn split_algorithm(inst: &SplitInstance) -> bool {
    let none = Omega::new();
    let (Ok((_, fl)), Ok((_, fr))) =
        (vs_synth(&inst.omega, &none, &inst.left), vs_synth(&inst.omega, &none, &inst.right))
    else {
        return false;
    };
    crate::vstruct::omega_split_check(&inst.omega, &fl, &fr).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_graphs_kind() {
        let mut r = rng(1);
        for _ in 0..50 {
            let g = ground_graph(&mut r, 5, 2);
            assert!(g.count_rec() <= 2);
            assert!(graph_depth(&g) <= 5);
        }
    }

    #[test]
    fn generated_values_fit() {
        let mut r = rng(2);
        for _ in 0..50 {
            let t = utype(&mut r, 6);
            if let Some(v) = uvalue(&mut r, &t, 20) {
                assert!(crate::elaborate::unann_value_type(&v, &t), "{} / {:?}", t, v);
                assert!(v.size() <= 20);
            }
        }
    }

    #[test]
    fn split_agreement_smoke() {
        let mut r = rng(3);
        for _ in 0..100 {
            let inst = split_instance(&mut r, 3, 3);
            assert_eq!(split_oracle(&inst).unwrap(), split_algorithm(&inst), "{:?}", inst);
        }
    }
}
