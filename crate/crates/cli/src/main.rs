use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use futgraph::normalize::Verdict;
use futgraph::print::{con_math, vsty_math};
use futgraph_cli::dot::emit_dot;
use futgraph_cli::driver::{self, CliError};

#[derive(Parser)]
#[command(name = "futgraph", about = "Graph types for futures: check, run, unroll, soundcheck, annotate")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Unrolling fuel for unroll and soundcheck.
    #[arg(long, global = true)]
    fuel: Option<usize>,
    /// Write DOT files into this directory.
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    /// Evaluation step budget.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type every definition and print types and graph types.
    Check { file: PathBuf },
    /// Evaluate the entry point and report its value and graph.
    Run { file: PathBuf },
    /// Unroll the entry's graph type and expand it into graphs.
    Unroll { file: PathBuf },
    /// Check that the entry's run graph is described by its graph type.
    Soundcheck { file: PathBuf },
    /// Annotate unannotated types and values with vertex structures.
    Annotate { file: PathBuf },
    /// Run the whole regression corpus.
    Corpus { dir: Option<PathBuf> },
}

fn write_dot(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io { path: dir.display().to_string(), msg: e.to_string() };
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(name), text).map_err(io)
}

fn stem(file: &Path) -> String {
    file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

fn emit(json: bool, j: serde_json::Value, text: String) {
    if json {
        println!("{}", serde_json::to_string_pretty(&j).unwrap());
    } else {
        println!("{}", text);
    }
}

fn go(cli: &Cli) -> Result<bool, CliError> {
    match &cli.cmd {
        Cmd::Check { file } => {
            let p = driver::load(file)?;
            let checked = driver::check(&p)?;
            let j = json!({"schema": 1, "command": "check", "defs": checked.iter().map(|c| c.to_json()).collect::<Vec<_>>()});
            let text = checked.iter().map(|c| c.render()).collect::<Vec<_>>().join("\n");
            emit(cli.json, j, text);
            Ok(true)
        }
        Cmd::Run { file } => {
            let p = driver::load(file)?;
            let r = driver::run(&p, cli.budget)?;
            if let Some(dir) = &cli.dot {
                write_dot(dir, &format!("{}.dot", stem(file)), &emit_dot(&r.outcome.graph))?;
            }
            let mut j = r.to_json();
            j["schema"] = json!(1);
            j["command"] = json!("run");
            let text = format!(
                "value: {}\ntype: {}\ngraph: {} vertices, {} edges, {} steps",
                r.outcome.value,
                con_math(&r.typing.ty),
                r.outcome.graph.vertices.len(),
                r.outcome.graph.edges.len(),
                r.outcome.steps
            );
            emit(cli.json, j, text);
            Ok(r.wellformed)
        }
        Cmd::Unroll { file } => {
            let p = driver::load(file)?;
            let fuel = cli.fuel.or(p.fuel).unwrap_or(driver::DEFAULT_FUEL);
            let u = driver::unroll(&p, fuel)?;
            if let Some(dir) = &cli.dot {
                for (i, g) in u.graphs.iter().enumerate() {
                    write_dot(dir, &format!("{}_{}_{}.dot", stem(file), fuel, i), &emit_dot(g))?;
                }
            }
            let mut j = u.to_json();
            j["schema"] = json!(1);
            j["command"] = json!("unroll");
            let text = format!("{} graphs at fuel {} ({} written)", u.total, fuel, u.graphs.len());
            emit(cli.json, j, text);
            Ok(true)
        }
        Cmd::Soundcheck { file } => {
            let p = driver::load(file)?;
            let s = driver::soundcheck(&p, cli.fuel, cli.budget)?;
            let mut j = s.to_json();
            j["schema"] = json!(1);
            j["command"] = json!("soundcheck");
            emit(cli.json, j, format!("{} (fuel {}, {} vertices)", s.verdict, s.fuel, s.vertices));
            Ok(s.verdict != Verdict::Refuted)
        }
        Cmd::Annotate { file } => {
            let p = driver::load(file)?;
            let a = driver::annotate(&p)?;
            let j = json!({"schema": 1, "command": "annotate", "results": a.iter().map(|x| x.to_json()).collect::<Vec<_>>()});
            let text = a
                .iter()
                .map(|x| {
                    let mut s = format!("{}\n  type: {}\n  vsty: {}", x.utype, con_math(&x.con), vsty_math(&x.vsty));
                    for v in &x.values {
                        s.push_str(&format!("\n  value: {}", v));
                    }
                    s
                })
                .collect::<Vec<_>>()
                .join("\n");
            emit(cli.json, j, text);
            Ok(true)
        }
        Cmd::Corpus { dir } => {
            let dir = dir.clone().unwrap_or_else(driver::default_corpus_dir);
            let rows = driver::corpus(&dir)?;
            let ok = rows.iter().all(|r| r.ok());
            let j = json!({"schema": 1, "command": "corpus", "files": rows.iter().map(|r| r.to_json()).collect::<Vec<_>>(), "ok": ok});
            let text = rows
                .iter()
                .map(|r| {
                    let checked = match &r.checked {
                        Ok(n) => format!("{} defs typed", n),
                        Err(e) => format!("ERROR {}", e),
                    };
                    let sound = match &r.soundness {
                        None => String::new(),
                        Some(Ok(s)) => format!(", soundness {} at fuel {}", s.verdict, s.fuel),
                        Some(Err(e)) => format!(", soundness ERROR {}", e),
                    };
                    format!("{:<28} {}{}", r.file, checked, sound)
                })
                .collect::<Vec<_>>()
                .join("\n");
            emit(cli.json, j, text);
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match go(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&e.to_json()).unwrap());
            } else {
                eprintln!("error: {}", e);
            }
            match e {
                CliError::Io { .. } | CliError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
