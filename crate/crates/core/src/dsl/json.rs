use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coef::{CoefFn, Op, Scalar, Term, VarMonomial, VolterraOpSpec};
use crate::ir::{OperatedExpr, OperatedMonomial, Operator};
use crate::shuffle::{TensorExpr, TensorWord};

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("malformed document: {0}")]
    Shape(#[from] serde_json::Error),
    #[error("bad rational `{0}`")]
    Rational(String),
    #[error("operator `{0}` is not in the ops table")]
    UnknownOp(String),
    #[error("exponent of `{0}` must be positive")]
    Exponent(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CoefJson {
    Const(String),
    X,
    Param(String),
    Sum(Vec<CoefJson>),
    Prod(Vec<CoefJson>),
    Pow(Box<CoefJson>, String),
    Exp(Box<CoefJson>),
    Sin(Box<CoefJson>),
    Cos(Box<CoefJson>),
    Recip(Box<CoefJson>),
    Int { op: String, f: Box<CoefJson> },
}

#[derive(Debug, Serialize, Deserialize)]
struct OpJson {
    name: String,
    a: String,
    k: CoefJson,
    h: CoefJson,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermJson {
    coef: CoefJson,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    vars: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BracketJson {
    op: String,
    check: bool,
    arg: MonoJson,
}

#[derive(Debug, Serialize, Deserialize)]
struct MonoJson {
    head: TermJson,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    brackets: Vec<BracketJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScaledMono {
    scalar: String,
    monomial: MonoJson,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExprDoc {
    ops: Vec<OpJson>,
    terms: Vec<ScaledMono>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TailJson {
    op: String,
    term: TermJson,
}

#[derive(Debug, Serialize, Deserialize)]
struct WordJson {
    scalar: String,
    head: TermJson,
    #[serde(default)]
    tail: Vec<TailJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorDoc {
    ops: Vec<OpJson>,
    words: Vec<WordJson>,
}

fn coef_out(c: &CoefFn) -> CoefJson {
    let bx = |a: &CoefFn| Box::new(coef_out(a));
    match c {
        CoefFn::Const(q) => CoefJson::Const(q.to_string()),
        CoefFn::X => CoefJson::X,
        CoefFn::Param(p) => CoefJson::Param(p.to_string()),
        CoefFn::Sum(ts) => CoefJson::Sum(ts.iter().map(coef_out).collect()),
        CoefFn::Prod(fs) => CoefJson::Prod(fs.iter().map(coef_out).collect()),
        CoefFn::Pow(b, e) => CoefJson::Pow(bx(b), e.to_string()),
        CoefFn::Exp(a) => CoefJson::Exp(bx(a)),
        CoefFn::Sin(a) => CoefJson::Sin(bx(a)),
        CoefFn::Cos(a) => CoefJson::Cos(bx(a)),
        CoefFn::Recip(a) => CoefJson::Recip(bx(a)),
        CoefFn::Int(op, f) => CoefJson::Int { op: op.name().to_string(), f: bx(f) },
    }
}

fn term_out(t: &Term) -> TermJson {
    TermJson {
        coef: coef_out(&t.coef),
        vars: t.mono.iter().map(|(v, e)| (v.to_string(), e.to_string())).collect(),
    }
}

fn mono_out(m: &OperatedMonomial) -> MonoJson {
    MonoJson {
        head: term_out(&m.head),
        brackets: m
            .brackets
            .iter()
            .map(|(b, arg)| BracketJson { op: b.op.name().to_string(), check: b.check, arg: mono_out(arg) })
            .collect(),
    }
}

/// Orders `ops` so that operators used inside another's kernels come first.
fn ops_table(ops: Vec<Op>) -> Vec<OpJson> {
    fn visit(op: &Op, done: &mut Vec<Op>) {
        if done.contains(op) {
            return;
        }
        let mut deps = Vec::new();
        op.spec().k.collect_ops(&mut deps);
        op.spec().h.collect_ops(&mut deps);
        for d in deps.iter().filter(|d| *d != op) {
            visit(d, done);
        }
        done.push(op.clone());
    }
    let mut done = Vec::new();
    for op in &ops {
        visit(op, &mut done);
    }
    done.iter()
        .map(|op| OpJson {
            name: op.name().to_string(),
            a: op.spec().a.to_string(),
            k: coef_out(&op.spec().k),
            h: coef_out(&op.spec().h),
        })
        .collect()
}

fn rational(s: &str) -> Result<Scalar, JsonError> {
    s.trim().parse::<Scalar>().map_err(|_| JsonError::Rational(s.to_string()))
}

struct Decoder {
    ops: BTreeMap<String, Op>,
}

impl Decoder {
    fn new(table: &[OpJson]) -> Result<Self, JsonError> {
        let mut d = Decoder { ops: BTreeMap::new() };
        for o in table {
            let spec = VolterraOpSpec::new(o.name.as_str(), rational(&o.a)?, d.coef(&o.k)?, d.coef(&o.h)?);
            d.ops.insert(o.name.clone(), Op::new(spec));
        }
        Ok(d)
    }

    fn op(&self, name: &str) -> Result<Op, JsonError> {
        self.ops.get(name).cloned().ok_or_else(|| JsonError::UnknownOp(name.to_string()))
    }

    // Rebuilds the tree node for node, without re-canonicalizing.
    fn coef(&self, c: &CoefJson) -> Result<CoefFn, JsonError> {
        let bx = |a: &CoefJson| self.coef(a).map(Box::new);
        let all = |ts: &[CoefJson]| ts.iter().map(|t| self.coef(t)).collect::<Result<Vec<_>, _>>();
        Ok(match c {
            CoefJson::Const(q) => CoefFn::Const(rational(q)?),
            CoefJson::X => CoefFn::X,
            CoefJson::Param(p) => CoefFn::Param(p.as_str().into()),
            CoefJson::Sum(ts) => CoefFn::Sum(all(ts)?),
            CoefJson::Prod(fs) => CoefFn::Prod(all(fs)?),
            CoefJson::Pow(b, e) => CoefFn::Pow(bx(b)?, rational(e)?),
            CoefJson::Exp(a) => CoefFn::Exp(bx(a)?),
            CoefJson::Sin(a) => CoefFn::Sin(bx(a)?),
            CoefJson::Cos(a) => CoefFn::Cos(bx(a)?),
            CoefJson::Recip(a) => CoefFn::Recip(bx(a)?),
            CoefJson::Int { op, f } => CoefFn::Int(self.op(op)?, bx(f)?),
        })
    }

    fn term(&self, t: &TermJson) -> Result<Term, JsonError> {
        let mut mono = VarMonomial::one();
        for (v, e) in &t.vars {
            let e = rational(e)?;
            if e <= Scalar::from_integer(0.into()) {
                return Err(JsonError::Exponent(v.clone()));
            }
            mono = mono.mul(&VarMonomial::power(v.as_str(), e));
        }
        Ok(Term::new(self.coef(&t.coef)?, mono))
    }

    fn mono(&self, m: &MonoJson) -> Result<OperatedMonomial, JsonError> {
        let brackets = m
            .brackets
            .iter()
            .map(|b| {
                let op = self.op(&b.op)?;
                let label = if b.check { Operator::check(&op) } else { Operator::plain(&op) };
                Ok((label, self.mono(&b.arg)?))
            })
            .collect::<Result<Vec<_>, JsonError>>()?;
        Ok(OperatedMonomial { head: self.term(&m.head)?, brackets })
    }
}

pub fn expr_to_json(e: &OperatedExpr) -> Value {
    let doc = ExprDoc {
        ops: ops_table(e.ops()),
        terms: e.iter().map(|(m, q)| ScaledMono { scalar: q.to_string(), monomial: mono_out(m) }).collect(),
    };
    serde_json::to_value(doc).expect("wire types serialize")
}

pub fn expr_from_json(v: &Value) -> Result<OperatedExpr, JsonError> {
    let doc = ExprDoc::deserialize(v)?;
    let d = Decoder::new(&doc.ops)?;
    let mut out = OperatedExpr::zero();
    for t in &doc.terms {
        out.add_monomial(rational(&t.scalar)?, d.mono(&t.monomial)?);
    }
    Ok(out)
}

pub fn tensor_to_json(e: &TensorExpr) -> Value {
    let doc = TensorDoc {
        ops: ops_table(e.ops()),
        words: e
            .iter()
            .map(|(w, q)| WordJson {
                scalar: q.to_string(),
                head: term_out(&w.head),
                tail: w.tail.iter().map(|(op, t)| TailJson { op: op.name().to_string(), term: term_out(t) }).collect(),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("wire types serialize")
}

pub fn tensor_from_json(v: &Value) -> Result<TensorExpr, JsonError> {
    let doc = TensorDoc::deserialize(v)?;
    let d = Decoder::new(&doc.ops)?;
    let mut out = TensorExpr::zero();
    for w in &doc.words {
        let tail = w.tail.iter().map(|t| Ok((d.op(&t.op)?, d.term(&t.term)?))).collect::<Result<Vec<_>, JsonError>>()?;
        out.add_word(rational(&w.scalar)?, TensorWord::new(d.term(&w.head)?, tail));
    }
    Ok(out)
}
