//! GraphViz output for computation graphs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use futgraph::cgraph::{CGraph, Vertex};
use futgraph::syntax::{Gen, Proj};

/// Anonymous vertices are numbered in sorted order and generators by
/// first appearance, so equal graphs print identically whatever ids the
/// fresh counter handed out.
pub fn emit_dot(g: &CGraph) -> String {
    let mut vertices: Vec<&Vertex> = g.vertices.iter().collect();
    for (a, b) in &g.edges {
        for v in [a, b] {
            if !g.vertices.contains(v) {
                vertices.push(v);
            }
        }
    }
    vertices.sort();
    vertices.dedup();
    let mut gens: BTreeMap<Gen, usize> = BTreeMap::new();
    for v in &vertices {
        if let Vertex::Named(p) = v {
            let k = gens.len();
            gens.entry(p.gen).or_insert(k);
        }
    }
    let mut anon = 0;
    let mut ids: BTreeMap<&Vertex, String> = BTreeMap::new();
    for v in &vertices {
        let id = match v {
            Vertex::Anon(_) => {
                anon += 1;
                format!("n{}", anon - 1)
            }
            Vertex::Named(p) => {
                let mut s = format!("g{}", gens[&p.gen]);
                for step in &p.spine {
                    s.push('•');
                    s.push(if *step == Proj::Fst { '0' } else { '1' });
                }
                s
            }
        };
        ids.insert(v, id);
    }
    let mut out = String::from("digraph G {\n");
    for v in &vertices {
        let id = &ids[v];
        let shape = if *v == &g.start && *v == &g.end {
            "doublecircle"
        } else if *v == &g.start {
            "invtriangle"
        } else if *v == &g.end {
            "triangle"
        } else if v.is_named() {
            "box"
        } else {
            "point"
        };
        let label = if v.is_named() { id.as_str() } else { "" };
        let _ = writeln!(out, "  \"{}\" [shape={}, label=\"{}\"];", id, shape, label);
    }
    let mut edges: Vec<(&String, &String)> = g.edges.iter().map(|(a, b)| (&ids[a], &ids[b])).collect();
    edges.sort();
    for (a, b) in edges {
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", a, b);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use futgraph::cgraph::{g_empty, g_touch};
    use futgraph::syntax::{VPath, VsType};

    #[test]
    fn empty_graph_is_one_node() {
        let d = emit_dot(&g_empty());
        assert_eq!(d.matches("shape=").count(), 1);
        assert!(!d.contains("->"));
    }

    #[test]
    fn touch_edge_from_named_vertex() {
        let p = VPath::root(VsType::both(VsType::V, VsType::V), Gen::fresh()).proj(Proj::Fst);
        let d = emit_dot(&g_touch(p));
        assert!(d.contains("\"g0•0\" -> \"n0\";"), "{}", d);
    }

    #[test]
    fn deterministic_across_fresh_ids() {
        let mk = || {
            let p = VPath::root(VsType::V, Gen::fresh());
            futgraph::cgraph::g_seq(g_empty(), g_touch(p)).unwrap()
        };
        assert_eq!(emit_dot(&mk()), emit_dot(&mk()));
    }
}
