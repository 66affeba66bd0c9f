//! Symbolic normalization of integral equations with separable Volterra
//! operators.
//!
//! An equation is an element of the free operated algebra over `A[Y]`
//! (coefficient functions `A`, unknown functions `Y`). Every bracket stands
//! for a Volterra operator `f ↦ k(x) ∫_a^x h(t) f(t) dt`. Because such
//! operators form a matching twisted Rota-Baxter family, every expression can
//! be rewritten into an operator-linear form: a linear combination of
//! iterated integrals `u₀ ∫ u₁ ∫ u₂ …` in which each level acts on a factor
//! that contains an unknown. The [`shuffle`] module computes that form; the
//! [`quad`] module certifies every rewrite numerically.
//!
//! Module map:
//!
//! * [`coef`]: coefficient functions, `A[Y]`, operator specs and twists.
//! * [`ir`]: bracketed words and decorated rooted trees.
//! * [`shuffle`]: the tensor algebra `Sha(A, B)`, its shuffle product and
//!   the linearizer.
//! * [`quad`]: adaptive and cumulative quadrature, identity checks.
//! * [`dsl`]: problem files, text/LaTeX/JSON rendering.

pub mod coef;
pub mod dsl;
pub mod error;
pub mod ir;
pub mod quad;
pub mod random;
pub mod shuffle;

pub use coef::{
    CoefFn, CoefPoly, EvalEnv, Interval, Op, Scalar, Term, VarMonomial, VolterraOpSpec,
};
pub use error::{Error, EvalError};
pub use ir::{DecoratedTree, OperatedExpr, OperatedMonomial, Operator, TreeExpr};
pub use shuffle::{linearize, to_operated, TensorExpr, TensorWord};
