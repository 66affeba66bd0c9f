use num::{One, Signed};

use crate::coef::{CoefFn, Op, Scalar, Term, VarMonomial};
use crate::ir::{OperatedExpr, OperatedMonomial};
use crate::shuffle::{TensorExpr, TensorWord};

// Binding strength of the surrounding context.
const SUM: u8 = 0;
const PROD: u8 = 1;
const POW: u8 = 2;

fn scalar_text(q: &Scalar) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn exponent_text(e: &Scalar) -> String {
    if e.is_integer() && e.is_positive() {
        scalar_text(e)
    } else {
        format!("({})", scalar_text(e))
    }
}

fn wrap(s: String, parens: bool) -> String {
    if parens {
        format!("({s})")
    } else {
        s
    }
}

fn coef_text(c: &CoefFn, ctx: u8) -> String {
    match c {
        CoefFn::Const(q) => {
            let s = scalar_text(q);
            let compound = q.is_negative() || !q.is_integer();
            wrap(s, (compound && ctx >= POW) || (q.is_negative() && ctx == PROD))
        }
        CoefFn::X => "x".into(),
        CoefFn::Param(p) => p.to_string(),
        CoefFn::Sum(ts) => {
            let parts: Vec<String> = ts.iter().map(|t| coef_text(t, SUM)).collect();
            wrap(join_signed(&parts), ctx >= PROD)
        }
        CoefFn::Prod(fs) => {
            let (sign, body) = signed_factors(fs, |f| coef_text(f, PROD), scalar_text);
            wrap(format!("{sign}{}", body.join(" * ")), ctx >= POW || (!sign.is_empty() && ctx == PROD))
        }
        CoefFn::Pow(b, e) => format!("{}^{}", coef_text(b, POW), exponent_text(e)),
        CoefFn::Exp(a) => format!("exp({})", coef_text(a, SUM)),
        CoefFn::Sin(a) => format!("sin({})", coef_text(a, SUM)),
        CoefFn::Cos(a) => format!("cos({})", coef_text(a, SUM)),
        CoefFn::Recip(a) => format!("{}^(-1)", coef_text(a, POW)),
        CoefFn::Int(op, f) => format!("Int_{}[ {} ]", op, coef_text(f, SUM)),
    }
}

/// Splits a leading negative constant off a product as a sign.
fn signed_factors(
    fs: &[CoefFn],
    mut each: impl FnMut(&CoefFn) -> String,
    scalar: fn(&Scalar) -> String,
) -> (&'static str, Vec<String>) {
    match fs.split_first() {
        Some((CoefFn::Const(q), rest)) if q.is_negative() => {
            let mut body = Vec::with_capacity(fs.len());
            let q = -q;
            if !q.is_one() {
                body.push(scalar(&q));
            }
            body.extend(rest.iter().map(&mut each));
            ("-", body)
        }
        _ => ("", fs.iter().map(each).collect()),
    }
}

fn join_signed(parts: &[String]) -> String {
    let mut out = String::new();
    for (i, p) in parts.iter().enumerate() {
        match (i, p.strip_prefix('-')) {
            (0, _) => out.push_str(p),
            (_, Some(rest)) => {
                out.push_str(" - ");
                out.push_str(rest);
            }
            (_, None) => {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// A coefficient function in problem-file syntax.
pub fn render_coef(c: &CoefFn) -> String {
    coef_text(c, SUM)
}

fn mono_factors(m: &VarMonomial, out: &mut Vec<String>) {
    for (v, e) in m.iter() {
        if e.is_one() {
            out.push(v.to_string());
        } else {
            out.push(format!("{v}^{}", exponent_text(e)));
        }
    }
}

fn term_factors(t: &Term, out: &mut Vec<String>) {
    match &t.coef {
        c if c.is_one() => {}
        CoefFn::Prod(fs) => out.extend(fs.iter().map(|f| coef_text(f, PROD))),
        c => out.push(coef_text(c, PROD)),
    }
    mono_factors(&t.mono, out);
}

fn monomial_text(q: &Scalar, m: &OperatedMonomial) -> String {
    let mut factors = Vec::new();
    term_factors(&m.head, &mut factors);
    for (b, arg) in &m.brackets {
        let inner = monomial_text(&Scalar::one(), arg);
        if b.check {
            factors.push(format!("Int_{}[ {inner} ]", b.op));
        } else {
            factors.push(format!("{}({inner})", b.op));
        }
    }
    with_scalar(q, factors)
}

fn with_scalar(q: &Scalar, factors: Vec<String>) -> String {
    let body = factors.join(" * ");
    if factors.is_empty() {
        return scalar_text(q);
    }
    if q.is_one() {
        body
    } else if *q == -Scalar::one() {
        format!("-{body}")
    } else {
        format!("{} * {body}", scalar_text(q))
    }
}

/// An operated expression in problem-file syntax; the output parses back to
/// the same expression.
pub fn render_expr(e: &OperatedExpr) -> String {
    let parts: Vec<String> = e.iter().map(|(m, q)| monomial_text(q, m)).collect();
    join_signed(&parts)
}

fn word_text(q: &Scalar, w: &TensorWord) -> String {
    let mut inner = String::new();
    for (op, t) in w.tail.iter().rev() {
        let mut f = Vec::new();
        term_factors(t, &mut f);
        if !inner.is_empty() {
            f.push(inner);
        }
        let body = if f.is_empty() { "1".to_string() } else { f.join(" * ") };
        inner = format!("Int_{op}[ {body} ]");
    }
    let mut head = Vec::new();
    term_factors(&w.head, &mut head);
    if !inner.is_empty() {
        head.push(inner);
    }
    with_scalar(q, head)
}

/// A tensor expression as nested integrals: the word
/// `u0 (x) (P (x) u1) (x) (Q (x) u2)` reads `u0 * Int_P[ u1 * Int_Q[ u2 ] ]`.
pub fn render_tensor(e: &TensorExpr) -> String {
    let parts: Vec<String> = e.iter().map(|(w, q)| word_text(q, w)).collect();
    join_signed(&parts)
}

/// Integration variables, innermost last; skips names already in use.
struct Dummies {
    taken: Vec<String>,
    next: usize,
}

impl Dummies {
    fn new(taken: Vec<String>) -> Self {
        Dummies { taken, next: 0 }
    }

    fn fresh(&mut self) -> String {
        const NAMES: [&str; 5] = ["t", "u", "s", "r", "v"];
        loop {
            let i = self.next;
            self.next += 1;
            let name = if i < NAMES.len() { NAMES[i].to_string() } else { format!("t_{{{}}}", i - NAMES.len() + 1) };
            if !self.taken.contains(&name) {
                return name;
            }
        }
    }
}

fn latex_scalar(q: &Scalar) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else if q.is_negative() {
        format!("-\\frac{{{}}}{{{}}}", -q.numer(), q.denom())
    } else {
        format!("\\frac{{{}}}{{{}}}", q.numer(), q.denom())
    }
}

fn latex_coef(c: &CoefFn, var: &str, ctx: u8, d: &mut Dummies) -> String {
    match c {
        CoefFn::Const(q) => wrap(latex_scalar(q), q.is_negative() && ctx >= PROD),
        CoefFn::X => var.to_string(),
        CoefFn::Param(p) => p.to_string(),
        CoefFn::Sum(ts) => {
            let parts: Vec<String> = ts.iter().map(|t| latex_coef(t, var, SUM, d)).collect();
            wrap(join_signed(&parts), ctx >= PROD)
        }
        CoefFn::Prod(fs) => {
            let (sign, body) = signed_factors(fs, |f| latex_coef(f, var, PROD, d), latex_scalar);
            wrap(format!("{sign}{}", body.join("\\,")), ctx >= POW || (!sign.is_empty() && ctx == PROD))
        }
        CoefFn::Pow(b, e) => format!("{}^{{{}}}", latex_coef(b, var, POW, d), latex_scalar(e)),
        CoefFn::Exp(a) => format!("e^{{{}}}", latex_coef(a, var, SUM, d)),
        CoefFn::Sin(a) => format!("\\sin\\left({}\\right)", latex_coef(a, var, SUM, d)),
        CoefFn::Cos(a) => format!("\\cos\\left({}\\right)", latex_coef(a, var, SUM, d)),
        CoefFn::Recip(a) => format!("\\frac{{1}}{{{}}}", latex_coef(a, var, SUM, d)),
        CoefFn::Int(op, f) => {
            let w = d.fresh();
            let mut factors = latex_factors_of(op.check_kernel(), &w, d);
            factors.extend(latex_factors_of(f, &w, d));
            wrap(latex_integral(op, var, &w, factors), ctx >= POW)
        }
    }
}

fn latex_factors_of(c: &CoefFn, var: &str, d: &mut Dummies) -> Vec<String> {
    match c {
        c if c.is_one() => Vec::new(),
        CoefFn::Prod(fs) => fs.iter().map(|f| latex_coef(f, var, PROD, d)).collect(),
        c => vec![latex_coef(c, var, PROD, d)],
    }
}

fn latex_integral(op: &Op, upper: &str, var: &str, factors: Vec<String>) -> String {
    let body = if factors.is_empty() { "1".to_string() } else { factors.join("\\,") };
    format!("\\int_{{{}}}^{{{upper}}} {body}\\,\\mathrm{{d}}{var}", latex_scalar(&op.spec().a))
}

fn latex_term(t: &Term, var: &str, d: &mut Dummies) -> Vec<String> {
    let mut out = latex_factors_of(&t.coef, var, d);
    for (v, e) in t.mono.iter() {
        if e.is_one() {
            out.push(format!("{v}({var})"));
        } else {
            out.push(format!("{v}({var})^{{{}}}", latex_scalar(e)));
        }
    }
    out
}

/// Factors of `extra · m`, with the outer kernels `k` of plain brackets
/// folded into the head coefficient and every bracket spelled out.
fn latex_monomial(m: &OperatedMonomial, var: &str, extra: &CoefFn, d: &mut Dummies) -> Vec<String> {
    let mut coef = m.head.coef.mul(extra);
    for (b, _) in &m.brackets {
        if !b.check {
            coef = coef.mul(&b.op.spec().k);
        }
    }
    let mut out = latex_term(&Term::new(coef, m.head.mono.clone()), var, d);
    for (b, arg) in &m.brackets {
        let w = d.fresh();
        let kernel = if b.check { b.op.check_kernel() } else { &b.op.spec().h };
        let inner = latex_monomial(arg, &w, kernel, d);
        out.push(format!("\\left({}\\right)", latex_integral(&b.op, var, &w, inner)));
    }
    out
}

fn latex_signed(q: &Scalar, factors: Vec<String>) -> String {
    let body = factors.join("\\,");
    if factors.is_empty() {
        latex_scalar(q)
    } else if q.is_one() {
        body
    } else if *q == -Scalar::one() {
        format!("-{body}")
    } else {
        format!("{}\\,{body}", latex_scalar(q))
    }
}

fn taken_names(e: &OperatedExpr) -> Vec<String> {
    let mut names: Vec<String> = e.unknowns().iter().map(|u| u.to_string()).collect();
    let mut params = Vec::new();
    for c in e.coefficients() {
        c.collect_params(&mut params);
    }
    names.extend(params.iter().map(|p| p.to_string()));
    names
}

/// LaTeX with every bracket written out as an integral with its kernel.
pub fn render_latex(e: &OperatedExpr) -> String {
    let mut d = Dummies::new(taken_names(e));
    let parts: Vec<String> = e
        .iter()
        .map(|(m, q)| {
            d.next = 0;
            latex_signed(q, latex_monomial(m, "x", &CoefFn::one(), &mut d))
        })
        .collect();
    join_signed(&parts)
}

/// LaTeX for tensor words as nested integrals with their kernels.
pub fn render_tensor_latex(e: &TensorExpr) -> String {
    let mut d = Dummies::new(Vec::new());
    let parts: Vec<String> = e
        .iter()
        .map(|(w, q)| {
            d.next = 0;
            let mut vars = vec!["x".to_string()];
            for _ in &w.tail {
                vars.push(d.fresh());
            }
            let mut inner: Option<String> = None;
            for (i, (op, t)) in w.tail.iter().enumerate().rev() {
                let t = Term::new(t.coef.mul(op.check_kernel()), t.mono.clone());
                let mut f = latex_term(&t, &vars[i + 1], &mut d);
                f.extend(inner.take());
                inner = Some(format!("\\left({}\\right)", latex_integral(op, &vars[i], &vars[i + 1], f)));
            }
            let mut head = latex_term(&w.head, "x", &mut d);
            head.extend(inner);
            latex_signed(q, head)
        })
        .collect();
    join_signed(&parts)
}
