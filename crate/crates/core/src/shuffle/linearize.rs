use rayon::prelude::*;

use super::algebra::{pf_apply, pf_twisted, shuffle};
use super::word::{TensorExpr, TensorWord};
use num::One;

use crate::coef::{Scalar, Term};
use crate::error::Error;
use crate::ir::{OperatedExpr, OperatedMonomial, Operator};

/// Default cap on bracket nesting depth.
pub const DEFAULT_DEPTH_CAP: usize = 8;

/// Rewrites an operated expression into operator-linear form.
///
/// This is the operated-algebra map fixing `A[Y]` that sends products to the
/// shuffle product and `⌊·⌋_ω` to the twisted operator `P^𝔞_ω` (or to
/// `P_{F,ω}` for conjugate brackets). Innermost brackets are processed
/// first. Every tail factor of the result contains an unknown.
pub fn linearize(e: &OperatedExpr, depth_cap: usize) -> Result<TensorExpr, Error> {
    e.check_depth(depth_cap)?;
    let monomials: Vec<(&OperatedMonomial, &Scalar)> = e.iter().collect();
    let parts: Vec<TensorExpr> = monomials
        .par_iter()
        .map(|(m, q)| linearize_monomial(m).map(|t| t.scale(q)))
        .collect::<Result<_, _>>()?;
    let mut out = TensorExpr::zero();
    for p in &parts {
        out.add_assign(p);
    }
    Ok(out)
}

fn linearize_monomial(m: &OperatedMonomial) -> Result<TensorExpr, Error> {
    let mut acc = TensorExpr::from_word(Scalar::one(), TensorWord::new(m.head.clone(), Vec::new()));
    for (op, payload) in &m.brackets {
        let inner = linearize_monomial(payload)?;
        let applied = if op.check { pf_apply(&op.op, &inner) } else { pf_twisted(&op.op, &inner)? };
        acc = shuffle(&acc, &applied);
    }
    Ok(acc)
}

/// Reads a tensor expression back as iterated integrals:
/// `u₀⊗(ω₁⊗u₁)⊗⋯ ↦ u₀·⌊u₁·⌊u₂⋯⌋_{ω₂}⌋_{ω₁}`.
///
/// By default the brackets are the conjugate operators `P̌_ω` (plain
/// integrals with kernel `h·k`). With `twisted`, each level is written as
/// `𝔞_ω⁻¹ P_ω(𝔞_ω ·)` instead.
pub fn to_operated(e: &TensorExpr, twisted: bool) -> Result<OperatedExpr, Error> {
    let mut out = OperatedExpr::zero();
    for (w, q) in e.iter() {
        let mut inner = OperatedExpr::one();
        for (op, u) in w.tail.iter().rev() {
            let payload = OperatedExpr::term(u.clone()).mul(&inner);
            inner = if twisted {
                let lifted = payload.scale_coef(op.twist()?);
                OperatedExpr::bracket(&Operator::plain(op), &lifted).scale_coef(op.twist_inv()?)
            } else {
                OperatedExpr::bracket(&Operator::check(op), &payload)
            };
        }
        let word = OperatedExpr::term(Term::new(w.head.coef.clone(), w.head.mono.clone())).mul(&inner);
        for (m, c) in word.iter() {
            out.add_monomial(c * q, m.clone());
        }
    }
    Ok(out)
}
