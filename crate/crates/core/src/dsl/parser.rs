use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lexer::{lex, Tok, Token};
use super::{ParseError, ParseErrorKind};
use crate::coef::{check_zero_free, parse_decimal, scalar_to_f64, CoefFn, EvalEnv, Interval, Op, Scalar, Term, VolterraOpSpec};
use crate::ir::{OperatedExpr, Operator};

const BUILTINS: [&str; 16] = [
    "x", "t", "exp", "sin", "cos", "sqrt", "problem", "interval", "op", "unknown", "unknowns", "param", "params", "claim",
    "inf", "infinity",
];

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: Option<String>,
    pub interval: Interval,
    pub ops: Vec<Op>,
    pub unknowns: Vec<Arc<str>>,
    /// Symbolic parameters with their fixed values, if any were given.
    pub params: Vec<(Arc<str>, Option<f64>)>,
    /// The equation, stored as `lhs − rhs`.
    pub expr: OperatedExpr,
    /// An optional claimed rewrite of `expr`.
    pub claim: Option<OperatedExpr>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Skip the sampled zero-freeness certification of `k` and of
    /// reciprocals.
    pub assume_nonzero: bool,
}

pub fn parse(src: &str) -> Result<Problem, ParseError> {
    parse_with(src, ParseOptions::default())
}

pub fn parse_with(src: &str, options: ParseOptions) -> Result<Problem, ParseError> {
    let mut p = Parser::new(src)?;
    p.problem(options)
}

impl Problem {
    /// Evaluation settings with every parameter fixed: declared values are
    /// used as given, the rest are drawn from `(0.5, 1.5)` with `seed`.
    pub fn env(&self, seed: u64) -> EvalEnv {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = self.params.iter().map(|(name, v)| {
            let drawn: f64 = rng.random_range(0.5..1.5);
            (name.clone(), v.unwrap_or(drawn))
        });
        EvalEnv::with_params(params)
    }

    pub fn op(&self, name: &str) -> Option<&Op> {
        self.ops.iter().find(|op| op.name() == name)
    }

    fn scope(&self) -> Scope {
        Scope {
            ops: self.ops.iter().map(|op| (op.name().to_string(), op.clone())).collect(),
            unknowns: self.unknowns.iter().map(|u| u.to_string()).collect(),
            params: self.params.iter().map(|(p, _)| p.to_string()).collect(),
            var: Var::X,
        }
    }

    /// Parses an expression in the scope of this problem.
    pub fn parse_expr(&self, src: &str) -> Result<OperatedExpr, ParseError> {
        let mut p = Parser::new(src)?;
        p.scope = self.scope();
        let e = p.expr()?;
        p.expect_end()?;
        Ok(e)
    }

    /// Parses a coefficient function (no unknowns) in the scope of this
    /// problem.
    pub fn parse_coef(&self, src: &str) -> Result<CoefFn, ParseError> {
        let mut p = Parser::new(src)?;
        p.scope = self.scope();
        p.scope.unknowns.clear();
        let at = p.here();
        let e = p.expr()?;
        p.expect_end()?;
        as_coef(&e).ok_or_else(|| at.err(ParseErrorKind::Invalid, "expected a function of x without unknowns"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    X,
    T,
    None,
}

#[derive(Debug, Clone)]
struct Scope {
    ops: BTreeMap<String, Op>,
    unknowns: BTreeSet<String>,
    params: BTreeSet<String>,
    var: Var,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

impl Pos {
    fn err(self, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
        ParseError { kind, line: self.line, col: self.col, message: msg.into() }
    }
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    pos: usize,
    scope: Scope,
}

/// The expression as a plain coefficient, if it has no unknowns or brackets.
fn as_coef(e: &OperatedExpr) -> Option<CoefFn> {
    let mut terms = Vec::with_capacity(e.len());
    for (m, q) in e.iter() {
        if !m.is_coefficient() {
            return None;
        }
        terms.push(m.head.coef.scale(q));
    }
    Some(CoefFn::sum(terms))
}

impl<'s> Parser<'s> {
    fn new(src: &'s str) -> Result<Self, ParseError> {
        let scope = Scope { ops: BTreeMap::new(), unknowns: BTreeSet::new(), params: BTreeSet::new(), var: Var::X };
        Ok(Parser { src, toks: lex(src)?, pos: 0, scope })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> Pos {
        let t = &self.toks[self.pos];
        Pos { line: t.line, col: t.col }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.here().err(ParseErrorKind::Syntax, format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, at))
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn end_of_statement(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of line")),
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        self.eat(&Tok::Newline);
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn is_taken(&self, name: &str) -> bool {
        BUILTINS.contains(&name)
            || name.starts_with("Int_")
            || self.scope.ops.contains_key(name)
            || self.scope.unknowns.contains(name)
            || self.scope.params.contains(name)
    }

    fn declare(&self, name: &str, at: Pos) -> Result<(), ParseError> {
        if self.is_taken(name) {
            return Err(at.err(ParseErrorKind::Invalid, format!("`{name}` is already declared or reserved")));
        }
        Ok(())
    }

    fn problem(&mut self, options: ParseOptions) -> Result<Problem, ParseError> {
        let mut name = None;
        let mut interval: Option<(Interval, Pos)> = None;
        let mut ops: Vec<(Op, Pos)> = Vec::new();
        let mut unknowns = Vec::new();
        let mut params = Vec::new();
        let mut claim = None;
        let mut equation: Option<(OperatedExpr, Pos)> = None;
        loop {
            while self.eat(&Tok::Newline) {}
            let at = self.here();
            let keyword = match self.peek() {
                Tok::Eof => break,
                Tok::Ident(s) => s.clone(),
                _ => String::new(),
            };
            match keyword.as_str() {
                "problem" => {
                    self.bump();
                    let first = self.toks[self.pos].start;
                    let mut last = first;
                    while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
                        last = self.bump().end;
                    }
                    name = Some(self.src[first..last].trim().to_string());
                }
                "interval" => {
                    self.bump();
                    if interval.is_some() {
                        return Err(at.err(ParseErrorKind::Invalid, "interval declared twice"));
                    }
                    interval = Some((self.interval()?, at));
                }
                "op" => {
                    self.bump();
                    let op = self.op_decl(&ops)?;
                    self.scope.ops.insert(op.name().to_string(), op.clone());
                    ops.push((op, at));
                }
                "unknown" | "unknowns" => {
                    self.bump();
                    let mut any = false;
                    while let Tok::Ident(_) = self.peek() {
                        let (u, pos) = self.ident()?;
                        self.declare(&u, pos)?;
                        self.scope.unknowns.insert(u.clone());
                        unknowns.push(Arc::from(u.as_str()));
                        any = true;
                        self.eat(&Tok::Comma);
                    }
                    if !any {
                        return Err(self.unexpected("an unknown name"));
                    }
                }
                "param" | "params" => {
                    self.bump();
                    let mut any = false;
                    while let Tok::Ident(_) = self.peek() {
                        let (p, pos) = self.ident()?;
                        self.declare(&p, pos)?;
                        let value = if self.eat(&Tok::Eq) {
                            let at = self.here();
                            let e = self.expr_with(Var::None)?;
                            let v = as_coef(&e)
                                .and_then(|c| c.as_const().cloned())
                                .ok_or_else(|| at.err(ParseErrorKind::Invalid, "parameter value must be a number"))?;
                            Some(scalar_to_f64(&v))
                        } else {
                            None
                        };
                        self.scope.params.insert(p.clone());
                        params.push((Arc::from(p.as_str()), value));
                        any = true;
                        self.eat(&Tok::Comma);
                    }
                    if !any {
                        return Err(self.unexpected("a parameter name"));
                    }
                }
                "claim" => {
                    self.bump();
                    claim = Some(self.equation()?);
                }
                _ => {
                    if equation.is_some() {
                        return Err(at.err(ParseErrorKind::Syntax, "only one equation is allowed per problem"));
                    }
                    equation = Some((self.equation()?, at));
                }
            }
            self.end_of_statement()?;
        }
        let Some((interval, _)) = interval else {
            return Err(ParseError { kind: ParseErrorKind::Invalid, line: 1, col: 1, message: "missing `interval` declaration".into() });
        };
        // operator-family files may omit the equation
        let (expr, eq_at) = equation.unwrap_or((OperatedExpr::zero(), Pos { line: 1, col: 1 }));
        let problem = Problem {
            name,
            interval,
            ops: ops.iter().map(|(op, _)| op.clone()).collect(),
            unknowns,
            params,
            expr,
            claim,
        };
        for (op, at) in &ops {
            if !interval.admits_limit(op.a_f64()) {
                return Err(at.err(
                    ParseErrorKind::Invalid,
                    format!("lower limit of `{op}` lies outside the interval"),
                ));
            }
        }
        if !options.assume_nonzero {
            let env = problem.env(0);
            for (op, at) in &ops {
                let mut need = vec![op.spec().k.clone()];
                op.spec().k.reciprocal_bases(&mut need);
                op.spec().h.reciprocal_bases(&mut need);
                for f in &need {
                    check_zero_free(f, &interval, &env).map_err(|e| at.err(ParseErrorKind::NotZeroFree, e.to_string()))?;
                }
            }
            let mut need = Vec::new();
            for e in std::iter::once(&problem.expr).chain(problem.claim.as_ref()) {
                for c in e.coefficients() {
                    c.reciprocal_bases(&mut need);
                }
            }
            for f in &need {
                check_zero_free(f, &interval, &env).map_err(|e| eq_at.err(ParseErrorKind::NotZeroFree, e.to_string()))?;
            }
        }
        Ok(problem)
    }

    fn equation(&mut self) -> Result<OperatedExpr, ParseError> {
        let lhs = self.expr()?;
        if self.eat(&Tok::Eq) {
            let rhs = self.expr()?;
            Ok(lhs.sub(&rhs))
        } else {
            Ok(lhs)
        }
    }

    fn bound(&mut self) -> Result<f64, ParseError> {
        let at = self.here();
        let negative = self.eat(&Tok::Minus);
        if !negative {
            self.eat(&Tok::Plus);
        }
        let v = match self.bump().tok {
            Tok::Ident(s) if s == "inf" || s == "infinity" => f64::INFINITY,
            Tok::Num(s) => parse_decimal(&s)
                .map(|q| scalar_to_f64(&q))
                .ok_or_else(|| at.err(ParseErrorKind::Syntax, format!("malformed number `{s}`")))?,
            other => return Err(at.err(ParseErrorKind::Syntax, format!("expected an interval end, found {}", other.describe()))),
        };
        Ok(if negative { -v } else { v })
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        let at = self.here();
        let lo_closed = match self.bump().tok {
            Tok::LParen => false,
            Tok::LBrack => true,
            _ => return Err(at.err(ParseErrorKind::Syntax, "expected `(` or `[` to open the interval")),
        };
        let lo = self.bound()?;
        self.expect(Tok::Comma)?;
        let hi = self.bound()?;
        let close = self.here();
        let hi_closed = match self.bump().tok {
            Tok::RParen => false,
            Tok::RBrack => true,
            _ => return Err(close.err(ParseErrorKind::Syntax, "expected `)` or `]` to close the interval")),
        };
        Interval::new(lo, hi, lo_closed && lo.is_finite(), hi_closed && hi.is_finite())
            .map_err(|e| at.err(ParseErrorKind::Invalid, e.to_string()))
    }

    fn op_decl(&mut self, earlier: &[(Op, Pos)]) -> Result<Op, ParseError> {
        let (name, at) = self.ident()?;
        self.declare(&name, at)?;
        self.expect(Tok::LBrace)?;
        let mut a: Option<(Scalar, Pos)> = None;
        let mut k = None;
        let mut h = None;
        while *self.peek() != Tok::RBrace {
            let (key, key_at) = self.ident()?;
            self.expect(Tok::Eq)?;
            match key.as_str() {
                "a" => {
                    let v_at = self.here();
                    let e = self.expr_with(Var::None)?;
                    let v = as_coef(&e)
                        .and_then(|c| c.as_const().cloned())
                        .ok_or_else(|| v_at.err(ParseErrorKind::Invalid, "lower limit must be a rational number"))?;
                    a = Some((v, v_at));
                }
                "k" => k = Some(self.kernel_factor(Var::X)?),
                "h" => h = Some(self.kernel_factor(Var::T)?),
                "K" => {
                    return Err(key_at.err(
                        ParseErrorKind::NonSeparable,
                        "kernels must be given in separated form as k(x) and h(t), not as K(x,t)",
                    ))
                }
                other => return Err(key_at.err(ParseErrorKind::Syntax, format!("unknown operator field `{other}`"))),
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        let Some((a, a_at)) = a else {
            return Err(at.err(ParseErrorKind::Syntax, format!("operator `{name}` needs a lower limit `a`")));
        };
        if let Some((first, _)) = earlier.first() {
            if first.spec().a != a {
                return Err(a_at.err(
                    ParseErrorKind::MixedLowerLimits,
                    format!("all operators must share one lower limit; `{first}` uses a = {}", first.spec().a),
                ));
            }
        }
        Ok(Op::new(VolterraOpSpec::new(name, a, k.unwrap_or_else(CoefFn::one), h.unwrap_or_else(CoefFn::one))))
    }

    fn kernel_factor(&mut self, var: Var) -> Result<CoefFn, ParseError> {
        let at = self.here();
        let e = self.expr_with(var)?;
        as_coef(&e).ok_or_else(|| at.err(ParseErrorKind::Invalid, "kernel factors cannot contain unknowns or operators"))
    }

    fn expr_with(&mut self, var: Var) -> Result<OperatedExpr, ParseError> {
        let saved = (self.scope.var, std::mem::take(&mut self.scope.unknowns), std::mem::take(&mut self.scope.ops));
        self.scope.var = var;
        let out = self.expr();
        self.scope.var = saved.0;
        self.scope.unknowns = saved.1;
        self.scope.ops = saved.2;
        out
    }

    fn expr(&mut self) -> Result<OperatedExpr, ParseError> {
        let mut acc = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc.add(&self.product()?);
            } else if self.eat(&Tok::Minus) {
                acc = acc.sub(&self.product()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<OperatedExpr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = acc.mul(&self.unary()?);
            } else if *self.peek() == Tok::Slash {
                self.bump();
                let at = self.here();
                let d = self.unary()?;
                let c = as_coef(&d)
                    .ok_or_else(|| at.err(ParseErrorKind::Invalid, "division by an expression containing unknowns"))?;
                if c.is_zero() {
                    return Err(at.err(ParseErrorKind::Invalid, "division by zero"));
                }
                acc = match c.as_const() {
                    Some(q) => acc.scale(&q.recip()),
                    None => acc.scale_coef(&c.recip()),
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<OperatedExpr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(self.unary()?.neg());
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<OperatedExpr, ParseError> {
        let base_at = self.here();
        let base = self.atom()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let at = self.here();
        let negative = self.eat(&Tok::Minus);
        let e = self.expr_atom_const()?;
        let Some(q) = e else {
            return Err(at.err(ParseErrorKind::Invalid, "exponents must be rational constants"));
        };
        let q = if negative { -q } else { q };
        raise(&base, &q).map_err(|msg| base_at.err(ParseErrorKind::Invalid, msg))
    }

    fn expr_atom_const(&mut self) -> Result<Option<Scalar>, ParseError> {
        let saved = self.scope.var;
        self.scope.var = Var::None;
        let e = self.atom();
        self.scope.var = saved;
        Ok(as_coef(&e?).and_then(|c| c.as_const().cloned()))
    }

    fn atom(&mut self) -> Result<OperatedExpr, ParseError> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                let q = parse_decimal(&s).ok_or_else(|| at.err(ParseErrorKind::Syntax, format!("malformed number `{s}`")))?;
                Ok(OperatedExpr::scalar(q))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.named(&name, at)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn call_arg(&mut self) -> Result<OperatedExpr, ParseError> {
        self.expect(Tok::LParen)?;
        let e = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(e)
    }

    fn named(&mut self, name: &str, at: Pos) -> Result<OperatedExpr, ParseError> {
        match name {
            "x" | "t" => {
                let wanted = if name == "x" { Var::X } else { Var::T };
                if self.scope.var == wanted {
                    return Ok(OperatedExpr::coef(CoefFn::X));
                }
                return Err(match self.scope.var {
                    Var::X | Var::T => at.err(
                        ParseErrorKind::NonSeparable,
                        format!("`{name}` cannot appear here: k is a function of x alone and h of t alone"),
                    ),
                    Var::None => at.err(ParseErrorKind::Invalid, format!("`{name}` cannot appear in a constant")),
                });
            }
            "exp" | "sin" | "cos" | "sqrt" => {
                let arg_at = self.here();
                let arg = self.call_arg()?;
                if name == "sqrt" {
                    return raise(&arg, &Scalar::new(1.into(), 2.into())).map_err(|m| arg_at.err(ParseErrorKind::Invalid, m));
                }
                let c = as_coef(&arg).ok_or_else(|| {
                    arg_at.err(ParseErrorKind::Invalid, format!("`{name}` of an expression containing unknowns"))
                })?;
                let f = match name {
                    "exp" => CoefFn::exp(c),
                    "sin" => CoefFn::sin(c),
                    _ => CoefFn::cos(c),
                };
                return Ok(OperatedExpr::coef(f));
            }
            _ => {}
        }
        if let Some(op_name) = name.strip_prefix("Int_") {
            let op = self
                .scope
                .ops
                .get(op_name)
                .cloned()
                .ok_or_else(|| at.err(ParseErrorKind::Undeclared, format!("undeclared operator `{op_name}`")))?;
            self.expect(Tok::LBrack)?;
            let e = self.expr()?;
            self.expect(Tok::RBrack)?;
            return Ok(OperatedExpr::bracket(&Operator::check(&op), &e));
        }
        if let Some(op) = self.scope.ops.get(name).cloned() {
            if *self.peek() != Tok::LParen {
                return Err(self.unexpected(&format!("`(` to apply operator `{name}`")));
            }
            let e = self.call_arg()?;
            return Ok(OperatedExpr::bracket(&Operator::plain(&op), &e));
        }
        if self.scope.unknowns.contains(name) {
            return Ok(OperatedExpr::unknown(name));
        }
        if self.scope.params.contains(name) {
            return Ok(OperatedExpr::coef(CoefFn::param(name)));
        }
        Err(at.err(ParseErrorKind::Undeclared, format!("undeclared symbol `{name}`")))
    }
}

/// `base^q` for a rational `q`.
fn raise(base: &OperatedExpr, q: &Scalar) -> Result<OperatedExpr, String> {
    if let Some(c) = as_coef(base) {
        if let (Some(b), true) = (c.as_const(), q.is_integer()) {
            if b.is_zero() && q.is_negative() {
                return Err("zero raised to a negative power".into());
            }
        }
        return Ok(OperatedExpr::coef(c.pow(q)));
    }
    let is_natural = q.is_integer() && !q.is_negative();
    let single = (base.len() == 1).then(|| base.iter().next().unwrap());
    match single {
        Some((m, s)) if m.brackets.is_empty() => {
            if is_natural {
                return Ok(base.powi(q.to_integer().try_into().map_err(|_| "exponent too large")?));
            }
            if q.is_negative() {
                return Err("unknowns cannot be raised to negative powers".into());
            }
            if s.is_negative() {
                return Err("fractional power of a negative multiple of an unknown".into());
            }
            let coef = CoefFn::Const(s.clone()).mul(&m.head.coef).pow(q);
            Ok(OperatedExpr::term(Term::new(coef, m.head.mono.pow(q))))
        }
        _ if is_natural => Ok(base.powi(q.to_integer().try_into().map_err(|_| "exponent too large")?)),
        _ => Err("only single monomials without operators can take fractional powers".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::{int, ratio, VarMonomial};

    const POPULATION: &str = "problem population
interval (0, 10)
op P { a = 0, k = 1, h = 1 }
unknown u
param u0, A, B, C
u = u0 + A*P(u) - B*P(u^2) - C*P(u*P(u))
";

    const THOMAS_FERMI: &str = "problem thomas-fermi
interval (0, inf)
op P1 { a = 0, k = 1, h = 1 }
op P2 { a = 0, k = 1, h = t^(-1/2) }
unknown y
param B
y = 1 + B*x + P1(P2(y^(3/2)))
";

    #[test]
    fn population_model() {
        let p = parse(POPULATION).unwrap();
        assert_eq!(p.name.as_deref(), Some("population"));
        assert_eq!(p.expr.len(), 5);
        assert_eq!(p.ops.len(), 1);
        assert!(p.expr.is_operator_linear());
    }

    #[test]
    fn thomas_fermi() {
        let p = parse(THOMAS_FERMI).unwrap();
        assert!(p.interval.hi.is_infinite());
        let p2 = p.op("P2").unwrap();
        assert_eq!(p2.spec().h, CoefFn::X.pow(&ratio(-1, 2)));
        // y, 1, B x, and the nested bracket
        assert_eq!(p.expr.len(), 4);
        assert_eq!(p.expr.depth(), 2);
        let y32 = VarMonomial::power("y", ratio(3, 2));
        let inner = p.parse_expr("P2(y^(3/2))").unwrap();
        let (m, _) = inner.iter().next().unwrap();
        assert_eq!(m.brackets[0].1.head.mono, y32);
    }

    #[test]
    fn undeclared_symbol() {
        let src = "interval (0, 1)\nop P { a = 0, k = 1, h = 1 }\nunknown f\nP(f)*P(g)\n";
        let err = parse(src).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Undeclared);
        assert_eq!((err.line, err.col), (4, 8));
    }

    #[test]
    fn mixed_lower_limits() {
        let src = "interval (0, 2)\nop P { a = 0, k = 1, h = 1 }\nop Q { a = 1, k = 1, h = 1 }\nunknown y\nP(y)\n";
        let err = parse(src).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MixedLowerLimits);
        assert_eq!(err.line, 3);
    }

    #[test]
    fn non_separable() {
        let err = parse("interval (0, 1)\nop P { a = 0, K = x*t }\nunknown y\nP(y)\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonSeparable);
        let err = parse("interval (0, 1)\nop P { a = 0, k = x + t, h = 1 }\nunknown y\nP(y)\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonSeparable);
        assert_eq!((err.line, err.col), (2, 23));
    }

    #[test]
    fn zero_free_kernels() {
        let src = "interval (-1, 1)\nop P { a = 0, k = x, h = 1 }\nunknown y\nP(y)\n";
        assert_eq!(parse(src).unwrap_err().kind, ParseErrorKind::NotZeroFree);
        assert!(parse_with(src, ParseOptions { assume_nonzero: true }).is_ok());
    }

    #[test]
    fn syntax_errors_are_positioned() {
        let err = parse("interval (0, 1)\nunknown y\ny + * y\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!((err.line, err.col), (3, 5));
        let err = parse("unknown y\ny\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Invalid);
    }

    #[test]
    fn powers_and_division() {
        let p = parse("interval (1, 2)\nunknown y\nparam c = 1/2\n(2*y)^2 / x - 4*x^(-1)*y^2\n").unwrap();
        assert!(p.expr.is_zero());
        assert_eq!(p.params, vec![(Arc::from("c"), Some(0.5))]);
        let q = parse("interval (1, 2)\nunknown y\ny^(1/2)*y^(1/2) - y\n").unwrap();
        assert!(q.expr.is_zero());
        assert!(parse("interval (1, 2)\nunknown y\ny^(-1)\n").is_err());
        assert!(parse("interval (1, 2)\nunknown y\n1/y\n").is_err());
        assert_eq!(parse("interval (1, 2)\nunknown y\nsqrt(4*y)\n").unwrap().expr, q.parse_expr("2*y^(1/2)").unwrap());
        let _ = int(0);
    }

    #[test]
    fn params_are_seeded() {
        let p = parse(POPULATION).unwrap();
        let env = p.env(42);
        assert_eq!(env.params.len(), 4);
        assert!(env.params.values().all(|v| (0.5..1.5).contains(v)));
        assert_eq!(env.params, p.env(42).params);
    }
}
