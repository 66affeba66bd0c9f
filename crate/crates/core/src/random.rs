//! Seeded generators of coefficients, operated expressions and tensor words,
//! shared by the property tests, the acceptance suite and the benchmarks.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coef::{int, ratio, CoefFn, CoefPoly, Op, Scalar, Term, VarMonomial};
use crate::ir::{OperatedExpr, Operator};
use crate::shuffle::{TensorExpr, TensorWord};

/// Polynomial palette; every product and integral of these stays in closed
/// form, so symbolic equality is exact.
pub fn polynomial_palette() -> Vec<CoefFn> {
    vec![
        CoefFn::one(),
        CoefFn::integer(2),
        CoefFn::X,
        CoefFn::X.powi(2),
        CoefFn::one().add(&CoefFn::X),
        CoefFn::X.scale(&ratio(-1, 2)),
    ]
}

/// Palette with transcendental members, for numeric checks.
pub fn analytic_palette() -> Vec<CoefFn> {
    vec![
        CoefFn::one(),
        CoefFn::X,
        CoefFn::exp(CoefFn::X.neg()),
        CoefFn::sin(CoefFn::X),
        CoefFn::one().add(&CoefFn::X.powi(2)).recip(),
        CoefFn::X.scale(&int(2)).sub(&CoefFn::integer(1)),
    ]
}

pub struct Gen {
    rng: ChaCha8Rng,
    pub ops: Vec<Op>,
    pub unknowns: Vec<Arc<str>>,
    pub coefs: Vec<CoefFn>,
    /// Exponents an unknown may carry in a generated monomial.
    pub exponents: Vec<Scalar>,
    /// Whether brackets may be the conjugated `Int_ω` form.
    pub check_brackets: bool,
    /// Draws of [`Gen::operated`] with more monomials are rejected.
    pub max_monomials: usize,
}

impl Gen {
    pub fn new(seed: u64, ops: Vec<Op>, unknowns: &[&str], coefs: Vec<CoefFn>) -> Self {
        assert!(!ops.is_empty() && !unknowns.is_empty() && !coefs.is_empty());
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            ops,
            unknowns: unknowns.iter().map(|u| Arc::from(*u)).collect(),
            coefs,
            exponents: vec![int(1), int(2)],
            check_brackets: false,
            max_monomials: 32,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn op(&mut self) -> Op {
        self.ops.choose(&mut self.rng).unwrap().clone()
    }

    pub fn coef(&mut self) -> CoefFn {
        self.coefs.choose(&mut self.rng).unwrap().clone()
    }

    pub fn scalar(&mut self) -> Scalar {
        [int(1), int(-1), int(2), ratio(1, 2), ratio(-3, 2), int(3)].choose(&mut self.rng).unwrap().clone()
    }

    pub fn monomial(&mut self) -> VarMonomial {
        let n = self.rng.random_range(1..=self.unknowns.len().min(2));
        let mut m = VarMonomial::one();
        for v in self.unknowns.choose_multiple(&mut self.rng, n).cloned().collect::<Vec<_>>() {
            let e = self.exponents.choose(&mut self.rng).unwrap().clone();
            m = m.mul(&VarMonomial::power(v, e));
        }
        m
    }

    /// `c·m` with `m` non-trivial when `augmented`, otherwise trivial one
    /// time in three.
    pub fn term(&mut self, augmented: bool) -> Term {
        let c = self.coef();
        if augmented || self.rng.random_range(0..3) != 0 {
            Term::new(c, self.monomial())
        } else {
            Term::coef(c)
        }
    }

    pub fn poly(&mut self, max_terms: usize, augmented: bool) -> CoefPoly {
        let n = self.rng.random_range(1..=max_terms.max(1));
        CoefPoly::from_terms((0..n).map(|_| self.term(augmented)))
    }

    fn bracket(&mut self) -> Operator {
        let op = self.op();
        if self.check_brackets && self.rng.random_bool(0.5) {
            Operator::check(&op)
        } else {
            Operator::plain(&op)
        }
    }

    /// A sum of up to `width` monomials with bracket nesting at most `depth`.
    pub fn operated(&mut self, depth: usize, width: usize) -> OperatedExpr {
        loop {
            let e = self.draw(depth, width);
            if e.len() <= self.max_monomials {
                return e;
            }
        }
    }

    fn draw(&mut self, depth: usize, width: usize) -> OperatedExpr {
        let n = self.rng.random_range(1..=width.max(1));
        let mut out = OperatedExpr::zero();
        for _ in 0..n {
            let mut m = OperatedExpr::term(self.term(false)).scale(&self.scalar());
            let brackets = if depth == 0 { 0 } else { self.rng.random_range(0..=2) };
            for _ in 0..brackets {
                let inner_width = width.min(2);
                let inner = self.draw(depth - 1, inner_width);
                let b = self.bracket();
                m = m.mul(&OperatedExpr::bracket(&b, &inner));
            }
            out.add_assign(&m);
        }
        out
    }

    /// Like [`Gen::operated`], but guaranteed to reach `depth`.
    pub fn operated_exact(&mut self, depth: usize, width: usize) -> OperatedExpr {
        loop {
            let e = self.operated(depth, width);
            if e.depth() == depth {
                return e;
            }
        }
    }

    /// A word with `len` tail factors, each containing an unknown.
    pub fn word(&mut self, len: usize) -> TensorWord {
        let head = self.term(false);
        let tail = (0..len).map(|_| (self.op(), self.term(true))).collect();
        TensorWord::new(head, tail)
    }

    pub fn tensor(&mut self, max_words: usize, max_len: usize) -> TensorExpr {
        let n = self.rng.random_range(1..=max_words.max(1));
        let mut out = TensorExpr::zero();
        for _ in 0..n {
            let len = self.rng.random_range(0..=max_len);
            let q = self.scalar();
            let w = self.word(len);
            out.add_word(q, w);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::VolterraOpSpec;

    fn ops() -> Vec<Op> {
        ["P", "Q"]
            .iter()
            .map(|n| Op::new(VolterraOpSpec::new(*n, int(0), CoefFn::one(), CoefFn::one())))
            .collect()
    }

    #[test]
    fn reproducible() {
        let mut a = Gen::new(7, ops(), &["y", "z"], polynomial_palette());
        let mut b = Gen::new(7, ops(), &["y", "z"], polynomial_palette());
        for _ in 0..20 {
            assert_eq!(a.operated(3, 3), b.operated(3, 3));
            assert_eq!(a.tensor(3, 3), b.tensor(3, 3));
        }
    }

    #[test]
    fn respects_bounds() {
        let mut g = Gen::new(1, ops(), &["y"], analytic_palette());
        for _ in 0..50 {
            assert!(g.operated(3, 3).depth() <= 3);
            let t = g.tensor(3, 3);
            assert!(t.max_len() <= 3 && t.is_normal());
        }
        assert_eq!(g.operated_exact(2, 2).depth(), 2);
    }
}
