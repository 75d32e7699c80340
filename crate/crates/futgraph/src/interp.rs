//! Big-step cost semantics: evaluates a closed expression to a value and
//! the computation graph of that run.

use thiserror::Error;

use crate::cgraph::{g_empty, g_par, g_seq, g_spawn, g_touch, CGraph, GraphError};
use crate::syntax::*;
use crate::vstruct::{vs_eval, vs_is_vpath};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("stuck at {rule}: {term}")]
    Stuck { rule: &'static str, term: String },
    #[error("out of fuel after {0} steps")]
    OutOfFuel(u64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

type Result<T> = std::result::Result<T, EvalError>;

#[derive(Clone, Debug)]
pub struct EvalOutcome {
    pub value: Value,
    pub graph: CGraph,
    /// Generators allocated by `new`, with their vertex structure types.
    pub gens: Vec<(Gen, VsType)>,
    pub steps: u64,
}

struct Interp {
    steps: u64,
    budget: u64,
    gens: Vec<(Gen, VsType)>,
}

fn stuck(rule: &'static str, term: impl ToString) -> EvalError {
    EvalError::Stuck { rule, term: term.to_string() }
}

const STACK: usize = 512 << 20;

/// Evaluate with a step budget. Runs on a large dedicated stack since
/// evaluation recurses structurally.
pub fn eval(e: &Expr, budget: u64) -> Result<EvalOutcome> {
    let e = e.clone();
    std::thread::Builder::new()
        .stack_size(STACK)
        .spawn(move || {
            let mut it = Interp { steps: 0, budget, gens: Vec::new() };
            let (value, graph) = it.ev(&e)?;
            Ok(EvalOutcome { value, graph, gens: it.gens, steps: it.steps })
        })
        .expect("spawn evaluator thread")
        .join()
        .expect("evaluator thread panicked")
}

impl Interp {
    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(EvalError::OutOfFuel(self.budget))
        } else {
            Ok(())
        }
    }

    fn ev(&mut self, e: &Expr) -> Result<(Value, CGraph)> {
        self.tick()?;
        match e {
            Expr::Var(x) => Err(stuck("C:Var", x)),
            Expr::Triv => Ok((Value::Triv, g_empty())),
            Expr::Lit(l) => Ok((Value::Lit(*l), g_empty())),
            Expr::Fun(fe) => Ok((Value::Fun(fe.clone()), g_empty())),
            Expr::Val(v) => Ok(((**v).clone(), g_empty())),
            Expr::App(f, a, b, arg) => {
                let (vf, g1) = self.ev(f)?;
                let (va, g2) = self.ev(arg)?;
                let Value::Fun(fe) = &vf else { return Err(stuck("C:App", &vf)) };
                let s = Subst::new()
                    .vs(&fe.uf, vs_eval(a))
                    .vs(&fe.ut, vs_eval(b))
                    .value(&fe.f, vf.clone())
                    .value(&fe.x, va);
                let body = fe.body.subst(&s);
                let (vr, g3) = self.ev(&body)?;
                Ok((vr, g_seq(g_seq(g1, g2)?, g3)?))
            }
            Expr::Pair(a, b) => {
                let (va, g1) = self.ev(a)?;
                let (vb, g2) = self.ev(b)?;
                Ok((Value::pair(va, vb), g_seq(g1, g2)?))
            }
            Expr::Par(a, b) => {
                let (va, g1) = self.ev(a)?;
                let (vb, g2) = self.ev(b)?;
                Ok((Value::pair(va, vb), g_par(g1, g2)?))
            }
            Expr::Fst(a) | Expr::Snd(a) => match self.ev(a)? {
                (Value::Pair(l, r), g) => Ok((if matches!(e, Expr::Fst(_)) { *l } else { *r }, g)),
                (v, _) => Err(stuck("C:Proj", v)),
            },
            Expr::InL(a) => self.ev(a).map(|(v, g)| (Value::InL(Box::new(v)), g)),
            Expr::InR(a) => self.ev(a).map(|(v, g)| (Value::InR(Box::new(v)), g)),
            Expr::Roll(a) => self.ev(a).map(|(v, g)| (Value::Roll(Box::new(v)), g)),
            Expr::Unroll(a) => match self.ev(a)? {
                (Value::Roll(v), g) => Ok((*v, g)),
                (v, _) => Err(stuck("C:Unroll", v)),
            },
            Expr::Case(scr, x, l, y, r) => {
                let (vs, g1) = self.ev(scr)?;
                let body = match vs {
                    Value::InL(v) => l.subst(&Subst::new().value(x, *v)),
                    Value::InR(v) => r.subst(&Subst::new().value(y, *v)),
                    v => return Err(stuck("C:Case", v)),
                };
                let (v, g2) = self.ev(&body)?;
                Ok((v, g_seq(g1, g2)?))
            }
            Expr::Future(vs, a) => {
                let p = vs_is_vpath(&vs_eval(vs)).ok_or_else(|| stuck("C:Future", vs))?;
                let (v, g) = self.ev(a)?;
                Ok((Value::Handle(p.clone(), Box::new(v)), g_spawn(g, p)?))
            }
            Expr::Touch(a) => match self.ev(a)? {
                (Value::Handle(p, v), g) => Ok((*v, g_seq(g, g_touch(p))?)),
                (v, _) => Err(stuck("C:Touch", v)),
            },
            Expr::New(u, t, body) => {
                let gen = Gen::fresh();
                self.gens.push((gen, t.clone()));
                let body = body.subst(&Subst::new().vs(u, Vs::Root(t.clone(), gen)));
                self.ev(&body)
            }
            Expr::Let(x, a, b) => {
                let (va, g1) = self.ev(a)?;
                let (vb, g2) = self.ev(&b.subst(&Subst::new().value(x, va)))?;
                Ok((vb, g_seq(g1, g2)?))
            }
            Expr::Ann(a, _) => self.ev(a),
            Expr::Prim(op, a, b) => {
                let (va, g1) = self.ev(a)?;
                let (vb, g2) = self.ev(b)?;
                let v = prim(*op, &va, &vb).ok_or_else(|| stuck("C:Prim", e))?;
                Ok((v, g_seq(g1, g2)?))
            }
        }
    }
}

fn bool_val(b: bool) -> Value {
    if b {
        Value::InL(Box::new(Value::Triv))
    } else {
        Value::InR(Box::new(Value::Triv))
    }
}

fn prim(op: PrimOp, a: &Value, b: &Value) -> Option<Value> {
    use PrimOp::*;
    match (a, b) {
        (Value::Lit(Lit::Int(x)), Value::Lit(Lit::Int(y))) => Some(match op {
            Add => Value::Lit(Lit::Int(x.wrapping_add(*y))),
            Sub => Value::Lit(Lit::Int(x.wrapping_sub(*y))),
            Mul => Value::Lit(Lit::Int(x.wrapping_mul(*y))),
            Div => Value::Lit(Lit::Int(x.checked_div(*y)?)),
            Pow => Value::Lit(Lit::Int(x.checked_pow(u32::try_from(*y).ok()?)?)),
            Lt => bool_val(x < y),
            Le => bool_val(x <= y),
            Eq => bool_val(x == y),
        }),
        (Value::Lit(Lit::Float(F64(x))), Value::Lit(Lit::Float(F64(y)))) => Some(match op {
            Add => Value::Lit(Lit::Float(F64(x + y))),
            Sub => Value::Lit(Lit::Float(F64(x - y))),
            Mul => Value::Lit(Lit::Float(F64(x * y))),
            Div => Value::Lit(Lit::Float(F64(x / y))),
            Pow => Value::Lit(Lit::Float(F64(x.powf(*y)))),
            Lt => bool_val(x < y),
            Le => bool_val(x <= y),
            Eq => bool_val(x == y),
        }),
        _ => None,
    }
}
