//! Subcommand implementations. Each returns structured results; `main.rs`
//! renders them as text or JSON.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value as Json};
use thiserror::Error;

use futgraph::cgraph::{g_wellformed, CGraph};
use futgraph::elaborate::{annotate_type, annotate_value, unann_kind, unann_value_type, ElabError};
use futgraph::exprtype::{check_program, TypeError, Typing};
use futgraph::interp::{eval, EvalError, EvalOutcome};
use futgraph::normalize::{
    effect_display, expand_elided, graph_simplify, nbnf, soundness_check, unroll_to_depth, NormError, Verdict,
};
use futgraph::print::{con_math, graph_math, vsty_math};
use futgraph::syntax::*;

use crate::parse::{parse_program, Program};
use crate::sexp::ParseError;

pub const DEFAULT_BUDGET: u64 = 1_000_000;
pub const DEFAULT_FUEL: usize = 4;
/// Expanded graphs written by `unroll` are capped at this many.
pub const MAX_DOT_FILES: usize = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("type error in {name}: {err}")]
    Type { name: String, err: TypeError },
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("normalization error: {0}")]
    Norm(#[from] NormError),
    #[error("annotation error: {0}")]
    Elab(#[from] ElabError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "parse",
            CliError::Type { .. } => "type",
            CliError::Eval(_) => "eval",
            CliError::Norm(_) => "normalize",
            CliError::Elab(_) => "annotate",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn to_json(&self) -> Json {
        let mut j = json!({"schema": 1, "error": {"kind": self.kind(), "message": self.to_string()}});
        if let CliError::Parse(p) = self {
            j["error"]["line"] = json!(p.loc.line);
            j["error"]["column"] = json!(p.loc.col);
        }
        j
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn load(path: &Path) -> Result<Program> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    Ok(parse_program(&text)?)
}

fn type_named(name: &str, e: &Expr) -> Result<Typing> {
    check_program(e).map_err(|err| CliError::Type { name: name.to_string(), err })
}

/// The expression `run` evaluates: the `main` form, or a `main`
/// definition applied to unit when it is a unit function.
pub fn entry(p: &Program) -> Option<Expr> {
    if let Some(m) = &p.main {
        return Some(m.clone());
    }
    match p.def("main")? {
        Expr::Fun(fe) if fe.tf == VsType::Unit && fe.tt == VsType::Unit && fe.dom == Con::Unit => {
            Some(Expr::app(Expr::Fun(fe.clone()), Vs::Unit, Vs::Unit, Expr::Triv))
        }
        e => Some(e.clone()),
    }
}

fn entry_or_err(p: &Program) -> Result<Expr> {
    entry(p).ok_or_else(|| CliError::Usage("no main form or main definition".into()))
}

// ---------------------------------------------------------------------------
// check

#[derive(Clone, Debug)]
pub struct Checked {
    pub name: String,
    pub typing: Typing,
}

impl Checked {
    /// Displayed graph: the effect for functions, the graph type otherwise.
    pub fn shown_graph(&self) -> GraphType {
        match &self.typing.ty {
            Con::Fun(ft) => effect_display(ft),
            _ => graph_simplify(&self.typing.gty),
        }
    }

    pub fn to_json(&self) -> Json {
        let mut j = json!({
            "name": self.name,
            "type": self.typing.ty.to_string(),
            "gtype": self.typing.gty.to_string(),
            "display": {"type": con_display(&self.typing.ty), "graph": graph_math(&self.shown_graph())},
        });
        if let Con::Fun(ft) = &self.typing.ty {
            j["effect"] = json!(effect_display(ft).to_string());
        }
        j
    }

    pub fn render(&self) -> String {
        format!("{} : {}\n  graph: {}", self.name, con_display(&self.typing.ty), graph_math(&self.shown_graph()))
    }
}

/// Function types print with their effect abbreviated to `G`, which is
/// shown separately.
pub fn con_display(c: &Con) -> String {
    match c {
        Con::Fun(ft) => format!(
            "Π({}:{}; {}:{}). {} → {} @ G",
            ft.uf,
            vsty_math(&ft.tf),
            ft.ut,
            vsty_math(&ft.tt),
            con_math(&ft.dom),
            con_math(&ft.cod)
        ),
        _ => con_math(c),
    }
}

pub fn check(p: &Program) -> Result<Vec<Checked>> {
    let mut out = Vec::new();
    for (name, e) in &p.defs {
        out.push(Checked { name: name.clone(), typing: type_named(name, e)? });
    }
    if let Some(m) = &p.main {
        out.push(Checked { name: "(main)".into(), typing: type_named("(main)", m)? });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// run

pub struct Ran {
    pub typing: Typing,
    pub outcome: EvalOutcome,
    pub wellformed: bool,
}

pub fn run(p: &Program, budget: Option<u64>) -> Result<Ran> {
    let e = entry_or_err(p)?;
    let typing = type_named("main", &e)?;
    let outcome = eval(&e, budget.or(p.budget).unwrap_or(DEFAULT_BUDGET))?;
    let wellformed = g_wellformed(&outcome.graph).wellformed;
    Ok(Ran { typing, outcome, wellformed })
}

impl Ran {
    pub fn to_json(&self) -> Json {
        json!({
            "type": self.typing.ty.to_string(),
            "gtype": self.typing.gty.to_string(),
            "value": self.outcome.value.to_string(),
            "steps": self.outcome.steps,
            "vertices": self.outcome.graph.vertices.len(),
            "edges": self.outcome.graph.edges.len(),
            "wellformed": self.wellformed,
        })
    }
}

// ---------------------------------------------------------------------------
// unroll

pub struct Unrolled {
    pub gtype: GraphType,
    pub graphs: Vec<CGraph>,
    pub total: usize,
}

/// Unroll the entry's graph type to `fuel` nested recursive calls and
/// expand it; recursion left over becomes a single vertex.
pub fn unroll(p: &Program, fuel: usize) -> Result<Unrolled> {
    let e = entry_or_err(p)?;
    let t = type_named("main", &e)?;
    let g = unroll_to_depth(&nbnf(&t.gty)?, fuel);
    let graphs = expand_elided(&g);
    let total = graphs.len();
    Ok(Unrolled { gtype: g, graphs: graphs.into_iter().take(MAX_DOT_FILES).collect(), total })
}

impl Unrolled {
    pub fn to_json(&self) -> Json {
        json!({
            "gtype": self.gtype.to_string(),
            "expanded": self.total,
            "graphs": self.graphs.iter().map(|g| json!({
                "vertices": g.vertices.len(),
                "edges": g.edges.len(),
                "wellformed": g_wellformed(g).wellformed,
            })).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// soundcheck

pub struct Soundness {
    pub verdict: Verdict,
    pub fuel: usize,
    pub steps: u64,
    pub vertices: usize,
    pub seconds: f64,
}

pub fn soundcheck_expr(e: &Expr, fuel: usize, budget: u64) -> Result<Soundness> {
    let t0 = Instant::now();
    let t = type_named("main", e)?;
    let out = eval(e, budget)?;
    let verdict = soundness_check(&t.gty, &out.graph, fuel);
    Ok(Soundness {
        verdict,
        fuel,
        steps: out.steps,
        vertices: out.graph.vertices.len(),
        seconds: t0.elapsed().as_secs_f64(),
    })
}

pub fn soundcheck(p: &Program, fuel: Option<usize>, budget: Option<u64>) -> Result<Soundness> {
    let e = entry_or_err(p)?;
    soundcheck_expr(&e, fuel.or(p.fuel).unwrap_or(DEFAULT_FUEL), budget.or(p.budget).unwrap_or(DEFAULT_BUDGET))
}

impl Soundness {
    pub fn to_json(&self) -> Json {
        json!({
            "verdict": self.verdict.to_string(),
            "fuel": self.fuel,
            "steps": self.steps,
            "vertices": self.vertices,
        })
    }
}

// ---------------------------------------------------------------------------
// annotate

pub struct Annotated {
    pub utype: String,
    pub con: Con,
    pub vsty: VsType,
    pub values: Vec<Value>,
}

/// Annotate every `utype` form at a vertex structure variable `u`; each
/// `uvalue` form is annotated against the closest preceding type at a
/// fresh generator of that type's vertex structure type.
pub fn annotate(p: &Program) -> Result<Vec<Annotated>> {
    if p.utypes.is_empty() {
        return Err(CliError::Usage("no utype forms".into()));
    }
    let mut out = Vec::new();
    for t in &p.utypes {
        unann_kind(&Default::default(), t)?;
        let r = annotate_type(&Default::default(), &Vs::var("u"), t)?;
        out.push(Annotated { utype: t.to_string(), con: r.con, vsty: r.vsty, values: Vec::new() });
    }
    for v in &p.uvalues {
        let i = (0..p.utypes.len())
            .rev()
            .find(|&i| unann_value_type(v, &p.utypes[i]))
            .ok_or_else(|| CliError::Usage(format!("value {} fits none of the types", v)))?;
        let root = VPath::root(out[i].vsty.clone(), Gen::fresh());
        out[i].values.push(annotate_value(&root, v));
    }
    Ok(out)
}

impl Annotated {
    pub fn to_json(&self) -> Json {
        json!({
            "utype": self.utype,
            "con": self.con.to_string(),
            "vsty": self.vsty.to_string(),
            "display": {"con": con_math(&self.con), "vsty": vsty_math(&self.vsty)},
            "values": self.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// corpus

pub struct CorpusRow {
    pub file: String,
    pub checked: std::result::Result<usize, String>,
    pub soundness: Option<std::result::Result<Soundness, String>>,
}

impl CorpusRow {
    pub fn ok(&self) -> bool {
        self.checked.is_ok()
            && match &self.soundness {
                None => true,
                Some(Ok(s)) => s.verdict != Verdict::Refuted,
                Some(Err(_)) => false,
            }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "file": self.file,
            "checked": match &self.checked { Ok(n) => json!(n), Err(e) => json!({"error": e}) },
            "soundness": match &self.soundness {
                None => Json::Null,
                Some(Ok(s)) => s.to_json(),
                Some(Err(e)) => json!({"error": e}),
            },
            "ok": self.ok(),
        })
    }
}

pub fn default_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd =
        std::fs::read_dir(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), msg: e.to_string() })?;
    let mut files: Vec<PathBuf> =
        rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "gf")).collect();
    files.sort();
    Ok(files)
}

/// Check every definition of every corpus file and soundness-check each
/// file's entry point at the file's recorded fuel.
pub fn corpus(dir: &Path) -> Result<Vec<CorpusRow>> {
    let files = corpus_files(dir)?;
    let rows = std::thread::scope(|s| {
        let handles: Vec<_> = files
            .iter()
            .map(|f| {
                s.spawn(move || {
                    let file = f.file_name().unwrap().to_string_lossy().into_owned();
                    let p = match load(f) {
                        Ok(p) => p,
                        Err(e) => return CorpusRow { file, checked: Err(e.to_string()), soundness: None },
                    };
                    let checked = check(&p).map(|c| c.len()).map_err(|e| e.to_string());
                    let soundness = match (&checked, entry(&p)) {
                        (Ok(_), Some(_)) if p.fuel.is_some() => {
                            Some(soundcheck(&p, None, None).map_err(|e| e.to_string()))
                        }
                        _ => None,
                    };
                    CorpusRow { file, checked, soundness }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("corpus worker")).collect()
    });
    Ok(rows)
}
