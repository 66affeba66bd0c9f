//! Numeric oracle: adaptive quadrature, cumulative evaluation of iterated
//! integrals on a shared grid, and identity certification.

mod check;
mod eval;
mod gk;
mod grid;

pub use check::{
    check_identity, check_lemma, check_mtrba, check_mtrba_family, check_reynolds, lemma_identity,
    lemma_mixed_identity, mtrba_identity, pair_assignment, pair_pool, positive_pool, rb_identity,
    reynolds_identity, test_pool, CheckReport, Residual, MAGNITUDE_FLOOR,
};
pub use eval::{eval_expr, eval_word, naive_word, Assignment, Evaluable, Oracle};
pub use gk::integrate;
pub use grid::{converge, Grid};
