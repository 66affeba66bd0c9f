use std::collections::BTreeMap;
use std::sync::Arc;

use super::gk::integrate;
use super::grid::{converge, Grid};
use crate::coef::{real_pow, scalar_to_f64, CoefFn, EvalEnv, Op, Term};
use crate::error::EvalError;
use crate::ir::{OperatedExpr, OperatedMonomial, Operator};
use crate::shuffle::{TensorExpr, TensorWord};

/// Concrete functions for the unknowns.
pub type Assignment = BTreeMap<Arc<str>, CoefFn>;

/// Which numeric evaluator to use for iterated integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Oracle {
    /// Cumulative quadrature on a shared graded grid, refined until stable.
    #[default]
    Grid,
    /// Nested adaptive Gauss–Kronrod; slow, kept as an independent check.
    Naive,
}

/// Anything that can be evaluated at a point once the unknowns are fixed.
pub trait Evaluable: Sync {
    fn eval_at(&self, sigma: &Assignment, x: f64, env: &EvalEnv, oracle: Oracle) -> Result<f64, EvalError>;
}

impl Evaluable for CoefFn {
    fn eval_at(&self, _: &Assignment, x: f64, env: &EvalEnv, _: Oracle) -> Result<f64, EvalError> {
        self.eval(x, env)
    }
}

impl Evaluable for OperatedExpr {
    fn eval_at(&self, sigma: &Assignment, x: f64, env: &EvalEnv, oracle: Oracle) -> Result<f64, EvalError> {
        eval_operated(self, sigma, x, env, oracle)
    }
}

impl Evaluable for TensorExpr {
    fn eval_at(&self, sigma: &Assignment, x: f64, env: &EvalEnv, oracle: Oracle) -> Result<f64, EvalError> {
        eval_tensor(self, sigma, x, env, oracle)
    }
}

fn lookup<'a>(sigma: &'a Assignment, name: &str) -> Result<&'a CoefFn, EvalError> {
    sigma.get(name).ok_or_else(|| EvalError::Unassigned(name.to_string()))
}

fn term_at(t: &Term, sigma: &Assignment, x: f64, env: &EvalEnv) -> Result<f64, EvalError> {
    let mut v = t.coef.eval(x, env)?;
    for (name, e) in t.mono.iter() {
        v *= real_pow(lookup(sigma, name)?.eval(x, env)?, e)?;
    }
    Ok(v)
}

/// Per-grid cache of the unknowns and operator kernels.
struct GridCtx<'a> {
    grid: &'a Grid,
    env: &'a EvalEnv,
    sigma: BTreeMap<Arc<str>, Vec<f64>>,
    kernels: BTreeMap<String, (Vec<f64>, Vec<f64>, Vec<f64>)>,
}

impl<'a> GridCtx<'a> {
    fn new(grid: &'a Grid, sigma: &Assignment, env: &'a EvalEnv) -> Result<Self, EvalError> {
        let mut values = BTreeMap::new();
        for (name, f) in sigma {
            values.insert(name.clone(), grid.coef(f, env)?);
        }
        Ok(GridCtx { grid, env, sigma: values, kernels: BTreeMap::new() })
    }

    fn kernel(&mut self, op: &Op) -> Result<&(Vec<f64>, Vec<f64>, Vec<f64>), EvalError> {
        if op.a_f64() != self.grid.a {
            return Err(EvalError::Domain(format!(
                "operator `{op}` has lower limit {} but the expression integrates from {}",
                op.a_f64(),
                self.grid.a
            )));
        }
        if !self.kernels.contains_key(op.name()) {
            let k = self.grid.coef(&op.spec().k, self.env)?;
            let h = self.grid.coef(&op.spec().h, self.env)?;
            let hk = self.grid.coef(op.check_kernel(), self.env)?;
            self.kernels.insert(op.name().to_string(), (k, h, hk));
        }
        Ok(&self.kernels[op.name()])
    }

    fn term(&self, t: &Term) -> Result<Vec<f64>, EvalError> {
        let mut v = self.grid.coef(&t.coef, self.env)?;
        for (name, e) in t.mono.iter() {
            let s = self.sigma.get(name).ok_or_else(|| EvalError::Unassigned(name.to_string()))?;
            for (a, b) in v.iter_mut().zip(s) {
                *a *= real_pow(*b, e)?;
            }
        }
        Ok(v)
    }

    fn bracket(&mut self, op: &Operator, payload: Vec<f64>) -> Result<Vec<f64>, EvalError> {
        let grid = self.grid;
        let (k, h, hk) = self.kernel(&op.op)?;
        if op.check {
            let f: Vec<f64> = hk.iter().zip(&payload).map(|(a, b)| a * b).collect();
            Ok(grid.cumulative(&f))
        } else {
            let f: Vec<f64> = h.iter().zip(&payload).map(|(a, b)| a * b).collect();
            Ok(grid.cumulative(&f).into_iter().zip(k).map(|(c, k)| c * k).collect())
        }
    }

    fn monomial(&mut self, m: &OperatedMonomial) -> Result<Vec<f64>, EvalError> {
        let mut v = self.term(&m.head)?;
        for (op, payload) in &m.brackets {
            let inner = self.monomial(payload)?;
            let b = self.bracket(op, inner)?;
            v.iter_mut().zip(b).for_each(|(a, b)| *a *= b);
        }
        Ok(v)
    }

    fn word(&mut self, w: &TensorWord) -> Result<f64, EvalError> {
        let mut inner = vec![1.0; self.grid.len()];
        for (op, u) in w.tail.iter().rev() {
            let uv = self.term(u)?;
            let payload: Vec<f64> = uv.iter().zip(&inner).map(|(a, b)| a * b).collect();
            inner = self.bracket(&Operator::check(op), payload)?;
        }
        Ok(*inner.last().unwrap())
    }
}

fn lower_limit<'a>(mut ops: impl Iterator<Item = &'a Op>) -> Option<f64> {
    ops.next().map(Op::a_f64)
}

fn eval_operated(e: &OperatedExpr, sigma: &Assignment, x: f64, env: &EvalEnv, oracle: Oracle) -> Result<f64, EvalError> {
    let a = lower_limit(e.iter().flat_map(|(m, _)| m.brackets.iter().map(|(op, _)| &op.op)));
    let Some(a) = a else {
        // no brackets: a plain element of A[Y]
        let mut acc = 0.0;
        for (m, q) in e.iter() {
            acc += scalar_to_f64(q) * term_at(&m.head, sigma, x, env)?;
        }
        return Ok(acc);
    };
    match oracle {
        Oracle::Grid => converge(a, x, env, |grid| {
            let mut ctx = GridCtx::new(grid, sigma, env)?;
            let mut acc = 0.0;
            for (m, q) in e.iter() {
                let v = ctx.monomial(m)?;
                acc += scalar_to_f64(q) * v.last().unwrap();
            }
            Ok(acc)
        }),
        Oracle::Naive => {
            let mut acc = 0.0;
            for (m, q) in e.iter() {
                acc += scalar_to_f64(q) * naive_monomial(m, sigma, x, env)?;
            }
            Ok(acc)
        }
    }
}

fn eval_tensor(e: &TensorExpr, sigma: &Assignment, x: f64, env: &EvalEnv, oracle: Oracle) -> Result<f64, EvalError> {
    let Some(a) = lower_limit(e.iter().flat_map(|(w, _)| w.tail.iter().map(|(op, _)| op))) else {
        let mut acc = 0.0;
        for (w, q) in e.iter() {
            acc += scalar_to_f64(q) * term_at(&w.head, sigma, x, env)?;
        }
        return Ok(acc);
    };
    match oracle {
        Oracle::Grid => converge(a, x, env, |grid| {
            let mut ctx = GridCtx::new(grid, sigma, env)?;
            let mut acc = 0.0;
            for (w, q) in e.iter() {
                let head = term_at(&w.head, sigma, x, env)?;
                acc += scalar_to_f64(q) * head * ctx.word(w)?;
            }
            Ok(acc)
        }),
        Oracle::Naive => {
            let mut acc = 0.0;
            for (w, q) in e.iter() {
                acc += scalar_to_f64(q) * naive_word(w, sigma, x, env)?;
            }
            Ok(acc)
        }
    }
}

/// Value of one tensor word at `x`: `u₀(x)` times its iterated integral,
/// computed by cumulative quadrature on a shared grid.
pub fn eval_word(w: &TensorWord, sigma: &Assignment, x: f64, env: &EvalEnv) -> Result<f64, EvalError> {
    let head = term_at(&w.head, sigma, x, env)?;
    let Some((first, _)) = w.tail.first() else {
        return Ok(head);
    };
    let a = first.a_f64();
    let iterated = converge(a, x, env, |grid| GridCtx::new(grid, sigma, env)?.word(w))?;
    Ok(head * iterated)
}

/// Value of an expression at `x` with the default grid oracle.
pub fn eval_expr<E: Evaluable + ?Sized>(e: &E, sigma: &Assignment, x: f64, env: &EvalEnv) -> Result<f64, EvalError> {
    e.eval_at(sigma, x, env, Oracle::Grid)
}

fn naive_bracket<F>(op: &Operator, x: f64, env: &EvalEnv, mut payload: F) -> Result<f64, EvalError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let spec = op.op.spec();
    if op.check {
        let hk = op.op.check_kernel();
        integrate(|t| Ok(hk.eval(t, env)? * payload(t)?), op.op.a_f64(), x, env.tol, env.max_panels)
    } else {
        let inner = integrate(|t| Ok(spec.h.eval(t, env)? * payload(t)?), op.op.a_f64(), x, env.tol, env.max_panels)?;
        Ok(spec.k.eval(x, env)? * inner)
    }
}

fn naive_monomial(m: &OperatedMonomial, sigma: &Assignment, x: f64, env: &EvalEnv) -> Result<f64, EvalError> {
    let mut v = term_at(&m.head, sigma, x, env)?;
    for (op, payload) in &m.brackets {
        v *= naive_bracket(op, x, env, |t| naive_monomial(payload, sigma, t, env))?;
    }
    Ok(v)
}

fn naive_tail(tail: &[(Op, Term)], sigma: &Assignment, x: f64, env: &EvalEnv) -> Result<f64, EvalError> {
    let Some(((op, u), rest)) = tail.split_first() else {
        return Ok(1.0);
    };
    naive_bracket(&Operator::check(op), x, env, |t| Ok(term_at(u, sigma, t, env)? * naive_tail(rest, sigma, t, env)?))
}

/// Value of a tensor word by nested adaptive quadrature.
pub fn naive_word(w: &TensorWord, sigma: &Assignment, x: f64, env: &EvalEnv) -> Result<f64, EvalError> {
    Ok(term_at(&w.head, sigma, x, env)? * naive_tail(&w.tail, sigma, x, env)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::{int, CoefPoly, VolterraOpSpec};

    fn unit_op() -> Op {
        Op::new(VolterraOpSpec::new("W", int(0), CoefFn::one(), CoefFn::one()))
    }

    fn sigma_y(f: CoefFn) -> Assignment {
        Assignment::from([(Arc::from("y"), f)])
    }

    #[test]
    fn word_examples() {
        let env = EvalEnv::default();
        let w = unit_op();
        let c = TensorWord::new(Term::coef(CoefFn::X), vec![]);
        assert_eq!(eval_word(&c, &Assignment::new(), 2.0, &env).unwrap(), 2.0);
        let one = sigma_y(CoefFn::one());
        let single = TensorWord::new(Term::one(), vec![(w.clone(), Term::unknown("y"))]);
        assert!((eval_word(&single, &one, 2.0, &env).unwrap() - 2.0).abs() < 1e-12);
        let double = TensorWord::new(Term::one(), vec![(w.clone(), Term::unknown("y")), (w.clone(), Term::unknown("y"))]);
        assert!((eval_word(&double, &one, 2.0, &env).unwrap() - 2.0).abs() < 1e-12);
        assert!((naive_word(&double, &one, 2.0, &env).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn volterra_semantics() {
        let env = EvalEnv::default();
        let k = Op::new(VolterraOpSpec::new("K", int(0), CoefFn::X, CoefFn::one()));
        let p = Operator::plain(&k);
        let y = OperatedExpr::unknown("y");
        let one = sigma_y(CoefFn::one());
        let py = OperatedExpr::bracket(&p, &y);
        for oracle in [Oracle::Grid, Oracle::Naive] {
            assert!((py.eval_at(&one, 2.0, &env, oracle).unwrap() - 4.0).abs() < 1e-9);
            let rhs = OperatedExpr::bracket(&p, &py.mul(&y)).add(&OperatedExpr::bracket(&p, &y.mul(&py)));
            assert!((rhs.eval_at(&one, 1.0, &env, oracle).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        }
        let sin = sigma_y(CoefFn::sin(CoefFn::X));
        assert!(y.eval_at(&sin, std::f64::consts::PI, &env, Oracle::Grid).unwrap().abs() < 1e-15);
    }

    #[test]
    fn grid_matches_naive_on_tensor_words() {
        let env = EvalEnv::default();
        let e = Op::new(VolterraOpSpec::new("E", int(0), CoefFn::exp(CoefFn::X.neg()), CoefFn::exp(CoefFn::X)));
        let w = unit_op();
        let tail = [(e.clone(), CoefPoly::unknown("y")), (w.clone(), CoefPoly::unknown("y"))];
        let expr = TensorExpr::word(&CoefPoly::coef(CoefFn::X), &tail).unwrap();
        let sigma = sigma_y(CoefFn::sin(CoefFn::X));
        let g = expr.eval_at(&sigma, 1.5, &env, Oracle::Grid).unwrap();
        let n = expr.eval_at(&sigma, 1.5, &env, Oracle::Naive).unwrap();
        assert!((g - n).abs() < 1e-9, "{g} vs {n}");
    }

    #[test]
    fn unassigned_unknowns_are_reported() {
        let env = EvalEnv::default();
        let y = OperatedExpr::unknown("y");
        assert_eq!(y.eval_at(&Assignment::new(), 1.0, &env, Oracle::Grid), Err(EvalError::Unassigned("y".into())));
    }
}
