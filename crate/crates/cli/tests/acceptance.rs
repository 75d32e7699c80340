//! Headline checks, one line each. Exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use futgraph::cgraph::{g_critical_path, g_wellformed};
use futgraph::elaborate::{affine_value_type, annotate_type, annotate_value, unann_kind, TyCtx};
use futgraph::kindcheck::{con_equal, kind_of};
use futgraph::normalize::{
    effect_display, expand, expand_elided, graph_simplify, nbnf, unroll_enumerate, unroll_to_depth, Verdict,
};
use futgraph::syntax::*;
use futgraph::testgen;
use futgraph_cli::driver::{self, Checked};
use futgraph_cli::parse::{self, parse_program, Program};

type Check = Result<String, String>;
type Criterion = (&'static str, Option<u64>, fn() -> Check);

const VSTREAM: &str = "(corec t (prod V + t +))";

fn corpus_text(file: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(file);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path.display(), e))
}

fn program(text: &str) -> Result<Program, String> {
    parse_program(text).map_err(|e| e.to_string())
}

fn checked(p: &Program) -> Result<Vec<Checked>, String> {
    driver::check(p).map_err(|e| e.to_string())
}

fn find<'a>(cs: &'a [Checked], name: &str) -> Result<&'a Checked, String> {
    cs.iter().find(|c| c.name == name).ok_or_else(|| format!("{} missing", name))
}

fn con(s: &str) -> Con {
    parse::parse_con(&s.replace("vstream", VSTREAM)).unwrap_or_else(|e| panic!("{}: {}", s, e))
}

fn graph(s: &str) -> GraphType {
    parse::parse_graph(&s.replace("vstream", VSTREAM)).unwrap_or_else(|e| panic!("{}: {}", s, e))
}

fn same_con(a: &Con, b: &Con) -> bool {
    alpha_eq(a, b) || con_equal(a, b)
}

fn same_graph(a: &GraphType, b: &GraphType) -> bool {
    alpha_eq(&graph_simplify(a), &graph_simplify(b))
}

/// A function's type with its effect shown as the graph it stands for,
/// compared against the expected `(fun ...)` constructor.
fn expect_fun(c: &Checked, want: &str) -> Result<(), String> {
    let Con::Fun(ft) = &c.typing.ty else { return Err(format!("{} is not a function", c.name)) };
    let Con::Fun(w) = con(want) else { unreachable!() };
    let shown = FunTy { eff: effect_display(ft), ..(**ft).clone() };
    let weff = w.eff.clone();
    let got_plain = FunTy { eff: weff.clone(), ..shown.clone() };
    if !same_con(&Con::Fun(Box::new(got_plain)), &Con::Fun(w)) {
        return Err(format!("{}: type {}", c.name, c.typing.ty));
    }
    if !same_graph(&shown.eff, &weff) {
        return Err(format!("{}: graph {}", c.name, shown.eff));
    }
    Ok(())
}

fn expect_value(c: &Checked, ty: &str, g: &str) -> Result<(), String> {
    if !same_con(&c.typing.ty, &con(ty)) {
        return Err(format!("{}: type {}", c.name, c.typing.ty));
    }
    if !same_graph(&c.shown_graph(), &graph(g)) {
        return Err(format!("{}: graph {}", c.name, c.shown_graph()));
    }
    Ok(())
}

fn spawn2() -> Check {
    let cs = checked(&program(&corpus_text("spawn2.gf"))?)?;
    let g = "(spawn (spawn empty (snd u)) (fst u))";
    expect_fun(
        find(&cs, "pipeline_pi2")?,
        &format!("(fun (u (prod V + V +)) (w 1) unit (fut (prod float (fut float (snd u))) (fst u)) {})", g),
    )?;
    expect_value(
        find(&cs, "use_pi")?,
        "float",
        &format!("(new u (prod V + V +) (seq (seq {} (touch (fst u))) (touch (snd u))))", g),
    )?;
    Ok("pipeline_pi2 and use_pi match G and G'".into())
}

fn pipeline_types() -> Check {
    let cs = checked(&program(&corpus_text("pipeline_pi.gf"))?)?;
    let pipe = "(rec a (u vstream) (prod float (fut (vapp a (snd u)) (fst u))) u)";
    let g = "(rec g (pi (u vstream) (w 1) (spawn (gapp g (snd u) triv) (fst u))))";
    let g1 = "(rec g (pi (w 1) (u vstream) (or empty (seq (touch (fst u)) (gapp g triv (snd u))))))";
    expect_fun(find(&cs, "pipeline_pi")?, &format!("(fun (u vstream) (w 1) (prod float float) {} {})", pipe, g))?;
    expect_fun(find(&cs, "nth")?, &format!("(fun (w 1) (u vstream) (prod {} int) float {})", pipe, g1))?;
    expect_fun(
        find(&cs, "main")?,
        &format!("(fun (w0 1) (w1 1) unit float (new u vstream (seq (gapp {} u triv) (gapp {} triv u))))", g, g1),
    )?;
    Ok("pipeline_pi, nth and main match G, G' and G''".into())
}

fn normalization_wellformed() -> Check {
    let mut rng = testgen::rng(0x7431);
    let (mut types, mut graphs, mut cyclic) = (0, 0, 0);
    while types < 500 {
        let g = testgen::ground_graph(&mut rng, 5, 2);
        if testgen::graph_depth(&g) > 5 {
            continue;
        }
        types += 1;
        for cand in unroll_enumerate(&g, 4) {
            let norm = nbnf(&cand).map_err(|e| format!("{}: {}", g, e))?;
            for c in expand(&norm).map_err(|e| format!("{}: {}", g, e))? {
                graphs += 1;
                let wf = g_wellformed(&c);
                cyclic += !wf.acyclic as usize;
                if !wf.wellformed {
                    return Err(format!("{} expands to an ill-formed graph: {}", g, wf.diagnostics.join("; ")));
                }
            }
        }
    }
    Ok(format!(
        "{} graph types, {} expanded graphs well-formed ({} with a touch-before-spawn cycle)",
        types, graphs, cyclic
    ))
}

fn with_def(text: &str, def: &str, value: &str) -> String {
    let head = format!("(def {}", def);
    let start = text
        .match_indices(&head)
        .map(|(i, _)| i)
        .find(|&i| text[i + head.len()..].starts_with(char::is_whitespace))
        .unwrap_or_else(|| panic!("no def {}", def));
    let mut depth = 0;
    let mut end = start;
    for (i, c) in text[start..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    end = start + i + 1;
                    break;
                }
            }
            _ => {}
        }
    }
    format!("{}(def {} {}){}", &text[..start], def, value, &text[end..])
}

fn int_list(xs: &[i64]) -> String {
    let mut s = String::from("nil");
    for x in xs.iter().rev() {
        s = format!("(roll (inr (pair {} {})))", x, s);
    }
    format!("(ann {} ilist)", s)
}

fn soundness_suite() -> Check {
    let mut runs: Vec<(String, String)> = vec![
        ("use_pi".into(), corpus_text("spawn2.gf")),
        ("pipeline_pi (bounded)".into(), corpus_text("pipeline_pi_bounded.gf")),
        ("reverse, 3 nodes".into(), corpus_text("reverse.gf")),
    ];
    let pc = corpus_text("produce_consume.gf");
    for n in 0..=4 {
        runs.push((format!("produce/consume n={}", n), with_def(&pc, "n", &n.to_string())));
    }
    let tree = corpus_text("tree.gf");
    for hi in [0, 1, 3, 7] {
        runs.push((format!("bst/tree_sum (0,{})", hi), with_def(&tree, "range", &format!("(pair 0 {})", hi))));
    }
    let qs = corpus_text("qsort.gf");
    let lists: [&[i64]; 6] = [&[], &[5], &[2, 1], &[1, 3, 2], &[4, 3, 2, 1], &[2, 4, 1, 3]];
    for l in lists {
        runs.push((format!("qsort {:?}", l), with_def(&qs, "input", &int_list(l))));
    }
    for (name, text) in &runs {
        let p = program(text).map_err(|e| format!("{}: {}", name, e))?;
        let s = driver::soundcheck(&p, None, None).map_err(|e| format!("{}: {}", name, e))?;
        if s.verdict != Verdict::Confirmed {
            return Err(format!("{}: {} at fuel {}", name, s.verdict, s.fuel));
        }
    }
    Ok(format!("{} programs confirmed", runs.len()))
}

fn annotation_suite() -> Check {
    let mut rng = testgen::rng(0x7433);
    let (mut types, mut values) = (0, 0);
    while types < 500 {
        let t = testgen::utype(&mut rng, 6);
        if unann_kind(&BTreeSet::new(), &t).is_err() {
            continue;
        }
        types += 1;
        let gen = Gen::fresh();
        let probe = annotate_type(&TyCtx::new(), &Vs::var("u"), &t).map_err(|e| format!("{}: {}", t, e))?;
        let root = VPath::root(probe.vsty.clone(), gen);
        let r = annotate_type(&TyCtx::new(), &root.to_vs(), &t).map_err(|e| format!("{}: {}", t, e))?;
        if !alpha_eq(&r.vsty, &probe.vsty) {
            return Err(format!("{}: vertex structure type depends on the root", t));
        }
        let mut ctxs = Ctxs::empty();
        ctxs.omega.insert(Key::Gen(gen), r.vsty.clone());
        ctxs.psi.insert(Key::Gen(gen), r.vsty.clone());
        match kind_of(&ctxs, &r.con) {
            Ok(Kind::Typ) => {}
            other => return Err(format!("{} annotates to {} of kind {:?}", t, r.con, other)),
        }
        if values < 200 {
            if let Some(uv) = testgen::uvalue(&mut rng, &t, 20) {
                values += 1;
                let v = annotate_value(&root, &uv);
                let omega: Omega = [(Key::Gen(gen), r.vsty.clone())].into_iter().collect();
                affine_value_type(&omega, &v, &r.con).map_err(|e| format!("{} : {}: {}", v, r.con, e))?;
            }
        }
    }
    if values < 200 {
        return Err(format!("only {} values generated", values));
    }
    Ok(format!("{} types kinded, {} values affinely typed", types, values))
}

fn annotation_example() -> Check {
    let t = parse::parse_utype("(rec a (sum unit (prod (fut int) a)))").map_err(|e| e.to_string())?;
    let r = annotate_type(&TyCtx::new(), &Vs::var("w"), &t).map_err(|e| e.to_string())?;
    let sigma = parse::parse_vsty("(corec t (prod V + (prod V + t +) +))").unwrap();
    let want =
        con(&format!("(rec a (u {}) (sum unit (prod (fut int (fst (snd u))) (vapp a (snd (snd u))))) w)", sigma));
    if !alpha_eq(&r.vsty, &sigma) {
        return Err(format!("vertex structure type {}", r.vsty));
    }
    if !alpha_eq(&r.con, &want) {
        return Err(format!("constructor {}", r.con));
    }
    Ok(format!("{} with {}", r.con, r.vsty))
}

/// Longest path to the final touch of `main` with recursion unrolled `d`
/// times.
fn touch_depth(file: &str, d: usize) -> Result<usize, String> {
    let p = program(&corpus_text(file))?;
    let e = driver::entry(&p).ok_or("no entry")?;
    let t = futgraph::exprtype::check_program(&e).map_err(|e| e.to_string())?;
    let g = unroll_to_depth(&nbnf(&t.gty).map_err(|e| e.to_string())?, d);
    let mut best = 0;
    for c in expand_elided(&g) {
        best = best.max(g_critical_path(&c, &c.end).map_err(|e| e.to_string())?);
    }
    Ok(best)
}

fn pipelining() -> Check {
    let mut list = Vec::new();
    let mut pipe = Vec::new();
    for d in 2..=5 {
        list.push(touch_depth("list_pi.gf", d)?);
        pipe.push(touch_depth("pipeline_intro.gf", d)?);
    }
    let detail = format!("list_pi {:?}, pipeline_pi {:?}", list, pipe);
    let increasing = list.windows(2).all(|w| w[0] < w[1]);
    let constant = pipe.windows(2).all(|w| w[0] == w[1]);
    if increasing && constant {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn split_agreement() -> Check {
    let mut rng = testgen::rng(0x7438);
    let mut yes = 0;
    for i in 0..1000 {
        let inst = testgen::split_instance(&mut rng, 3, 3);
        let oracle = testgen::split_oracle(&inst).map_err(|e| format!("instance {}: {}", i, e))?;
        let algo = testgen::split_algorithm(&inst);
        if oracle != algo {
            return Err(format!(
                "instance {}: Ω={:?} left={} right={}: derivation says {}, algorithm says {}",
                i, inst.omega, inst.left, inst.right, oracle, algo
            ));
        }
        yes += oracle as usize;
    }
    Ok(format!("1000 instances agree ({} splittable)", yes))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("spawn2-types", Some(1), spawn2),
        ("pipe-types", Some(1), pipeline_types),
        ("norm-wf", Some(60), normalization_wellformed),
        ("soundness", Some(120), soundness_suite),
        ("annot-suite", Some(60), annotation_suite),
        ("annot-list", None, annotation_example),
        ("pipelining", None, pipelining),
        ("split-xval", Some(30), split_agreement),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let t0 = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = t0.elapsed();
        let late = limit.is_some_and(|s| took > Duration::from_secs(s));
        let (ok, mut detail) = match r {
            Ok(d) => (!late, d),
            Err(d) => (false, d),
        };
        if late {
            detail.push_str(&format!(" [over the {} s limit]", limit.unwrap()));
        }
        println!("{} {:<12} {:>8.3}s  {}", if ok { "PASS" } else { "FAIL" }, name, took.as_secs_f64(), detail);
        failed += !ok as usize;
    }
    if failed > 0 {
        println!("{} criteria failed", failed);
        std::process::exit(1);
    }
}
