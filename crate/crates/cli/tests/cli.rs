use std::path::{Path, PathBuf};
use std::process::Command;

use futgraph::cgraph::g_wellformed;
use futgraph::normalize::graph_simplify;
use futgraph::syntax::*;
use futgraph_cli::driver;
use futgraph_cli::parse::{parse_graph, parse_program, print_program};

fn corpus(file: &str) -> PathBuf {
    driver::default_corpus_dir().join(file)
}

fn futgraph(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_futgraph")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("futgraph-{}-{}", name, std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn dot_files(dir: &Path) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn corpus_round_trips() {
    let files = driver::corpus_files(&driver::default_corpus_dir()).unwrap();
    assert!(files.len() >= 10);
    for f in files {
        let p = driver::load(&f).unwrap();
        let again = parse_program(&print_program(&p)).unwrap_or_else(|e| panic!("{}: {}", f.display(), e));
        assert_eq!(again, p, "{}", f.display());
    }
}

#[test]
fn whole_corpus_checks() {
    let rows = driver::corpus(&driver::default_corpus_dir()).unwrap();
    for r in &rows {
        assert!(r.ok(), "{}: {:?}", r.file, r.to_json());
    }
}

#[test]
fn check_json_for_spawn2() {
    let (code, out) = futgraph(&["--json", "check", corpus("spawn2.gf").to_str().unwrap()]);
    assert_eq!(code, 0);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(j["schema"], 1);
    let defs = j["defs"].as_array().unwrap();
    let pp2 = defs.iter().find(|d| d["name"] == "pipeline_pi2").unwrap();
    assert_eq!(pp2["display"]["graph"], "Spawn(Spawn(•, snd u), fst u)");
}

#[test]
fn soundcheck_use_pi_confirms() {
    let (code, out) = futgraph(&["soundcheck", "--fuel", "2", corpus("spawn2.gf").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("confirmed"), "{}", out);
}

#[test]
fn run_reports_value() {
    let (code, out) = futgraph(&["--json", "run", corpus("qsort.gf").to_str().unwrap()]);
    assert_eq!(code, 0);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(j["wellformed"], true);
    assert!(j["value"].as_str().unwrap().starts_with("(roll (inr (pair 1 "));
}

#[test]
fn unroll_writes_acyclic_dot() {
    let p = driver::load(&corpus("pipeline_pi.gf")).unwrap();
    let u = driver::unroll(&p, 3).unwrap();
    assert!(!u.graphs.is_empty());
    for g in &u.graphs {
        assert!(g_wellformed(g).acyclic);
    }
    let a = scratch("dot-a");
    let b = scratch("dot-b");
    for d in [&a, &b] {
        let (code, _) = futgraph(&[
            "unroll",
            "--fuel",
            "3",
            "--dot",
            d.to_str().unwrap(),
            corpus("pipeline_pi.gf").to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let (fa, fb) = (dot_files(&a), dot_files(&b));
    assert_eq!(fa.len(), u.graphs.len());
    assert_eq!(fa, fb, "DOT output differs between runs");
    assert!(fa[0].1.starts_with("digraph G {"));
    let _ = std::fs::remove_dir_all(&a);
    let _ = std::fs::remove_dir_all(&b);
}

#[test]
fn reverse_maps_one_tree_to_another() {
    let p = driver::load(&corpus("reverse.gf")).unwrap();
    let cs = driver::check(&p).unwrap();
    let r = cs.iter().find(|c| c.name == "reverse").unwrap();
    let Con::Fun(ft) = &r.typing.ty else { panic!() };
    let vtree = futgraph_cli::parse::parse_vsty("(corec t (prod t + (prod V + (prod t + V +) +) +))").unwrap();
    assert!(alpha_eq(&ft.tf, &vtree) && alpha_eq(&ft.tt, &vtree));
    let index = |c: &Con| match c {
        Con::Rec { arg: Vs::Var(x), .. } => x.clone(),
        other => panic!("{}", other),
    };
    assert_eq!(index(&ft.dom), ft.ut);
    assert_eq!(index(&ft.cod), ft.uf);
}

#[test]
fn qsort_skeleton_has_the_classic_shape() {
    let p = driver::load(&corpus("qsort_skeleton.gf")).unwrap();
    let cs = driver::check(&p).unwrap();
    let q = cs.iter().find(|c| c.name == "qsort").unwrap();
    let want = parse_graph(
        "(rec g (pi (w0 1) (w1 1) (or empty (new v V (seq (spawn (gapp g triv triv) v) (seq (gapp g triv triv) (touch v)))))))",
    )
    .unwrap();
    assert!(alpha_eq(&graph_simplify(&q.shown_graph()), &graph_simplify(&want)), "{}", q.shown_graph());
}

#[test]
fn annotate_places_handles_on_odd_vertices() {
    let p = driver::load(&corpus("annotate.gf")).unwrap();
    let a = driver::annotate(&p).unwrap();
    let v = a[0].values[0].to_string();
    assert!(v.contains("(handle (fst (snd (root "), "{}", v);
    assert!(v.contains("(handle (fst (snd (snd (snd (root "), "{}", v);
}

#[test]
fn parse_errors_are_json_with_positions() {
    let d = scratch("bad");
    std::fs::create_dir_all(&d).unwrap();
    let f = d.join("bad.gf");
    std::fs::write(&f, "(def x\n  (fst 1 2))").unwrap();
    let (code, out) = futgraph(&["--json", "check", f.to_str().unwrap()]);
    assert_eq!(code, 1);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(j["error"]["kind"], "parse");
    assert_eq!(j["error"]["line"], 2);
    assert_eq!(j["error"]["column"], 3);
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn type_errors_name_the_definition() {
    let d = scratch("ill");
    std::fs::create_dir_all(&d).unwrap();
    let f = d.join("ill.gf");
    std::fs::write(&f, "(def twice (new u V (pair (future u 1) (future u 2))))").unwrap();
    let (code, out) = futgraph(&["--json", "check", f.to_str().unwrap()]);
    assert_eq!(code, 1);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(j["error"]["kind"], "type");
    assert!(j["error"]["message"].as_str().unwrap().contains("twice"));
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn missing_file_is_an_error() {
    let (code, _) = futgraph(&["check", "/nonexistent/x.gf"]);
    assert_eq!(code, 2);
}
