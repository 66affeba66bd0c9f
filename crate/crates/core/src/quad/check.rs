use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::eval::{Assignment, Evaluable, Oracle};
use crate::coef::{CoefFn, EvalEnv, Interval, Op};
use crate::error::Error;
use crate::ir::{OperatedExpr, Operator};

/// Magnitude below which residuals are compared absolutely.
pub const MAGNITUDE_FLOOR: f64 = 1e-12;

/// The test functions `{1, t, t², sin t, eᵗ, 1/(1+t²)}`.
pub fn test_pool() -> Vec<CoefFn> {
    let x = CoefFn::X;
    vec![
        CoefFn::one(),
        x.clone(),
        x.powi(2),
        CoefFn::sin(x.clone()),
        CoefFn::exp(x.clone()),
        CoefFn::one().add(&x.powi(2)).recip(),
    ]
}

/// Pool members that are positive on the interval (needed when unknowns
/// carry fractional exponents).
pub fn positive_pool(interval: &Interval, env: &EvalEnv) -> Vec<CoefFn> {
    test_pool()
        .into_iter()
        .filter(|f| interval.even_points(64).iter().all(|&x| f.eval(x, env).is_ok_and(|v| v > 0.0)))
        .collect()
}

/// One evaluation of both sides.
#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    /// Index into the assignment pool.
    pub assignment: usize,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs: f64,
    pub rel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub max_abs: f64,
    pub max_rel: f64,
    pub residuals: Vec<Residual>,
    pub pass: bool,
    pub tol: f64,
}

impl CheckReport {
    fn from_residuals(residuals: Vec<Residual>, tol: f64) -> Self {
        let max_abs = residuals.iter().map(|r| r.abs).fold(0.0, f64::max);
        let max_rel = residuals.iter().map(|r| r.rel).fold(0.0, f64::max);
        let pass = !residuals.is_empty() && residuals.iter().all(|r| r.error.is_none() && r.rel <= tol);
        CheckReport { max_abs, max_rel, residuals, pass, tol }
    }

    /// Concatenates several reports (indices are kept as they are).
    pub fn merge(reports: impl IntoIterator<Item = CheckReport>, tol: f64) -> CheckReport {
        let residuals = reports.into_iter().flat_map(|r| r.residuals).collect();
        CheckReport::from_residuals(residuals, tol)
    }

    pub fn first_error(&self) -> Option<&str> {
        self.residuals.iter().find_map(|r| r.error.as_deref())
    }
}

fn residual(i: usize, x: f64, lhs: Result<f64, String>, rhs: Result<f64, String>) -> Residual {
    match (lhs, rhs) {
        (Ok(l), Ok(r)) => {
            let abs = (l - r).abs();
            let scale = l.abs().max(r.abs());
            let rel = if scale < MAGNITUDE_FLOOR { abs } else { abs / scale };
            Residual { assignment: i, x, lhs: l, rhs: r, abs, rel, error: None }
        }
        (l, r) => {
            let error = l.as_ref().err().or(r.as_ref().err()).cloned();
            Residual {
                assignment: i,
                x,
                lhs: l.unwrap_or(f64::NAN),
                rhs: r.unwrap_or(f64::NAN),
                abs: f64::INFINITY,
                rel: f64::INFINITY,
                error,
            }
        }
    }
}

/// Evaluates both sides at every (assignment, point) pair.
pub fn check_identity(
    lhs: &dyn Evaluable,
    rhs: &dyn Evaluable,
    pool: &[Assignment],
    xs: &[f64],
    tol: f64,
    env: &EvalEnv,
    oracle: Oracle,
) -> CheckReport {
    let jobs: Vec<(usize, f64)> = (0..pool.len()).flat_map(|i| xs.iter().map(move |&x| (i, x))).collect();
    let residuals = jobs
        .par_iter()
        .map(|&(i, x)| {
            let l = lhs.eval_at(&pool[i], x, env, oracle).map_err(|e| e.to_string());
            let r = rhs.eval_at(&pool[i], x, env, oracle).map_err(|e| e.to_string());
            residual(i, x, l, r)
        })
        .collect();
    CheckReport::from_residuals(residuals, tol)
}

fn y1() -> OperatedExpr {
    OperatedExpr::unknown("y1")
}
fn y2() -> OperatedExpr {
    OperatedExpr::unknown("y2")
}

fn p(op: &Op, e: &OperatedExpr) -> OperatedExpr {
    OperatedExpr::bracket(&Operator::plain(op), e)
}

/// `P̌_{ω,ω′}(u) = 𝔞_{ω′}⁻¹ P_ω(𝔞_{ω′} u)`.
fn p_check(op: &Op, conj: &Op, e: &OperatedExpr) -> Result<OperatedExpr, Error> {
    Ok(p(op, &e.scale_coef(conj.twist()?)).scale_coef(conj.twist_inv()?))
}

/// Both sides of the matching twisted Rota-Baxter identity
/// `P_α(y₁)P_β(y₂) = 𝔞_α P_β(𝔞_α⁻¹P_α(y₁)y₂) + 𝔞_β P_α(𝔞_β⁻¹y₁P_β(y₂))`.
pub fn mtrba_identity(alpha: &Op, beta: &Op) -> Result<(OperatedExpr, OperatedExpr), Error> {
    let (ta, ta_inv) = (alpha.twist()?, alpha.twist_inv()?);
    let (tb, tb_inv) = (beta.twist()?, beta.twist_inv()?);
    let pa = p(alpha, &y1());
    let pb = p(beta, &y2());
    let lhs = pa.mul(&pb);
    let r1 = p(beta, &pa.mul(&y2()).scale_coef(ta_inv)).scale_coef(ta);
    let r2 = p(alpha, &y1().mul(&pb).scale_coef(tb_inv)).scale_coef(tb);
    Ok((lhs, r1.add(&r2)))
}

/// Both sides of the weight-0 matching Rota-Baxter identity
/// `P_α(y₁)P_β(y₂) = P_α(y₁P_β(y₂)) + P_β(P_α(y₁)y₂)`.
pub fn rb_identity(alpha: &Op, beta: &Op) -> (OperatedExpr, OperatedExpr) {
    let pa = p(alpha, &y1());
    let pb = p(beta, &y2());
    let rhs = p(alpha, &y1().mul(&pb)).add(&p(beta, &pa.mul(&y2())));
    (pa.mul(&pb), rhs)
}

/// Both sides of the Reynolds identity
/// `R(y₁)R(y₂) = R(y₁R(y₂)) + R(R(y₁)y₂) − R(R(y₁)R(y₂))`.
pub fn reynolds_identity(op: &Op) -> (OperatedExpr, OperatedExpr) {
    let r1 = p(op, &y1());
    let r2 = p(op, &y2());
    let rhs = p(op, &y1().mul(&r2)).add(&p(op, &r1.mul(&y2()))).sub(&p(op, &r1.mul(&r2)));
    (r1.mul(&r2), rhs)
}

/// First conjugate identity:
/// `P_α(y₁)P̌_{β,γ}(y₂) = 𝔞_α P̌_{β,γ}(𝔞_α⁻¹P_α(y₁)y₂) + 𝔞_β P̌_{α,γ}(𝔞_β⁻¹y₁P̌_{β,γ}(y₂))`.
pub fn lemma_identity(alpha: &Op, beta: &Op, gamma: &Op) -> Result<(OperatedExpr, OperatedExpr), Error> {
    let pa = p(alpha, &y1());
    let pbg = p_check(beta, gamma, &y2())?;
    let lhs = pa.mul(&pbg);
    let r1 = p_check(beta, gamma, &pa.mul(&y2()).scale_coef(alpha.twist_inv()?))?.scale_coef(alpha.twist()?);
    let r2 = p_check(alpha, gamma, &y1().mul(&pbg).scale_coef(beta.twist_inv()?))?.scale_coef(beta.twist()?);
    Ok((lhs, r1.add(&r2)))
}

/// Mixed-conjugate identity:
/// `P̌_{α,η}(y₁)P̌_{β,γ}(y₂) = 𝔞_α𝔞_η⁻¹ P̌_{β,γ}(𝔞_α⁻¹𝔞_η P̌_{α,η}(y₁)y₂)
///  + 𝔞_β𝔞_γ⁻¹ P̌_{α,η}(𝔞_β⁻¹𝔞_γ y₁P̌_{β,γ}(y₂))`.
pub fn lemma_mixed_identity(alpha: &Op, beta: &Op, gamma: &Op, eta: &Op) -> Result<(OperatedExpr, OperatedExpr), Error> {
    let pae = p_check(alpha, eta, &y1())?;
    let pbg = p_check(beta, gamma, &y2())?;
    let lhs = pae.mul(&pbg);
    let c1 = alpha.twist()?.mul(eta.twist_inv()?);
    let c2 = beta.twist()?.mul(gamma.twist_inv()?);
    let r1 = p_check(beta, gamma, &pae.mul(&y2()).scale_coef(&c1.recip()))?.scale_coef(&c1);
    let r2 = p_check(alpha, eta, &y1().mul(&pbg).scale_coef(&c2.recip()))?.scale_coef(&c2);
    Ok((lhs, r1.add(&r2)))
}

/// Assigns `(f, g)` to the two unknowns of the identity builders.
pub fn pair_assignment(f: &CoefFn, g: &CoefFn) -> Assignment {
    Assignment::from([(Arc::from("y1"), f.clone()), (Arc::from("y2"), g.clone())])
}

/// All ordered pairs from a pool of test functions.
pub fn pair_pool(funcs: &[CoefFn]) -> Vec<Assignment> {
    funcs.iter().flat_map(|f| funcs.iter().map(move |g| pair_assignment(f, g))).collect()
}

/// Certifies the matching twisted Rota-Baxter identity for `(α, β)` with
/// `y₁ = f`, `y₂ = g`.
pub fn check_mtrba(
    alpha: &Op,
    beta: &Op,
    f: &CoefFn,
    g: &CoefFn,
    xs: &[f64],
    tol: f64,
    env: &EvalEnv,
) -> Result<CheckReport, Error> {
    let (lhs, rhs) = mtrba_identity(alpha, beta)?;
    Ok(check_identity(&lhs, &rhs, &[pair_assignment(f, g)], xs, tol, env, Oracle::Grid))
}

/// The twisted identity for every ordered operator pair over a pool.
pub fn check_mtrba_family(
    ops: &[Op],
    pool: &[Assignment],
    xs: &[f64],
    tol: f64,
    env: &EvalEnv,
    oracle: Oracle,
) -> Result<CheckReport, Error> {
    let mut reports = Vec::new();
    for alpha in ops {
        for beta in ops {
            let (lhs, rhs) = mtrba_identity(alpha, beta)?;
            reports.push(check_identity(&lhs, &rhs, pool, xs, tol, env, oracle));
        }
    }
    Ok(CheckReport::merge(reports, tol))
}

pub fn check_reynolds(op: &Op, pool: &[Assignment], xs: &[f64], tol: f64, env: &EvalEnv) -> CheckReport {
    let (lhs, rhs) = reynolds_identity(op);
    check_identity(&lhs, &rhs, pool, xs, tol, env, Oracle::Grid)
}

/// Both conjugate identities over every choice of `α, β, γ, η` in `ops`.
pub fn check_lemma(ops: &[Op], pool: &[Assignment], xs: &[f64], tol: f64, env: &EvalEnv) -> Result<CheckReport, Error> {
    let mut reports = Vec::new();
    for alpha in ops {
        for beta in ops {
            for gamma in ops {
                let (lhs, rhs) = lemma_identity(alpha, beta, gamma)?;
                reports.push(check_identity(&lhs, &rhs, pool, xs, tol, env, Oracle::Grid));
                for eta in ops {
                    let (lhs, rhs) = lemma_mixed_identity(alpha, beta, gamma, eta)?;
                    reports.push(check_identity(&lhs, &rhs, pool, xs, tol, env, Oracle::Grid));
                }
            }
        }
    }
    Ok(CheckReport::merge(reports, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::{int, VolterraOpSpec};

    fn op(name: &str, a: i64, k: CoefFn, h: CoefFn) -> Op {
        Op::new(VolterraOpSpec::new(name, int(a), k, h))
    }

    #[test]
    fn syntactic_identity_has_zero_residual() {
        let env = EvalEnv::default();
        let e = OperatedExpr::unknown("y1");
        let pool = pair_pool(&test_pool()[..2]);
        let r = check_identity(&e, &e, &pool, &[0.5, 1.0], 1e-7, &env, Oracle::Grid);
        assert!(r.pass);
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn mtrba_exponential_kernel() {
        let env = EvalEnv::default();
        let e = op("E", 0, CoefFn::exp(CoefFn::X.neg()), CoefFn::exp(CoefFn::X));
        let one = CoefFn::one();
        let r = check_mtrba(&e, &e, &one, &one, &[1.0], 1e-7, &env).unwrap();
        assert!(r.pass, "{r:?}");
        let expect = (1.0 - (-1f64).exp()).powi(2);
        assert!((r.residuals[0].lhs - expect).abs() < 1e-10);
    }

    #[test]
    fn mtrba_mixed_pair() {
        let env = EvalEnv::default();
        let a = op("A", 1, CoefFn::X, CoefFn::X);
        let b = op("B", 1, CoefFn::one(), CoefFn::one());
        let r = check_mtrba(&a, &b, &CoefFn::X, &CoefFn::sin(CoefFn::X), &[1.5, 2.0, 3.0], 1e-7, &env).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn rb_counterexample_fails() {
        let env = EvalEnv::default();
        let k = op("K", 0, CoefFn::X, CoefFn::one());
        let (lhs, rhs) = rb_identity(&k, &k);
        let one = CoefFn::one();
        let r = check_identity(&lhs, &rhs, &[pair_assignment(&one, &one)], &[1.0], 1e-7, &env, Oracle::Grid);
        assert!(!r.pass);
        assert!((r.max_abs - 1.0 / 3.0).abs() < 1e-9);
        assert!(matches!(check_mtrba(&k, &k, &one, &one, &[1.0], 1e-7, &env), Err(Error::MissingTwist { .. })));
    }

    #[test]
    fn constant_k_is_rota_baxter() {
        let env = EvalEnv::default();
        let c = op("C", 0, CoefFn::integer(3), CoefFn::X);
        let (lhs, rhs) = rb_identity(&c, &c);
        let pool = pair_pool(&test_pool()[..3]);
        assert!(check_identity(&lhs, &rhs, &pool, &[0.5, 1.5], 1e-7, &env, Oracle::Grid).pass);
    }
}
