use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coef::{CoefFn, CoefPoly, EvalEnv, Interval, Op, Scalar, Term, VarMonomial};
use crate::error::{Error, EvalError};
use crate::ir::split_sum;

/// A pure tensor `u₀ ⊗ (ω₁ ⊗ u₁) ⊗ ⋯ ⊗ (ωₙ ⊗ uₙ)` of `Sha(A, B)`, read as
/// the iterated integral `u₀(x) ∫ h₁k₁ u₁ ∫ h₂k₂ u₂ ⋯`.
///
/// In canonical form every slot is a single content-free term and every
/// tail factor contains an unknown.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorWord {
    pub head: Term,
    pub tail: Vec<(Op, Term)>,
}

impl TensorWord {
    pub fn new(head: Term, tail: Vec<(Op, Term)>) -> Self {
        TensorWord { head, tail }
    }

    pub fn unit() -> Self {
        TensorWord { head: Term::one(), tail: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.tail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tail.is_empty()
    }

    /// Every tail factor lies in `𝔄⁺`.
    pub fn is_normal(&self) -> bool {
        self.tail.iter().all(|(_, u)| !u.is_coefficient())
    }

    /// Canonical pieces: sums in any slot are expanded multilinearly and
    /// rational content moves into the scalar.
    fn normalize(self) -> Vec<(Scalar, TensorWord)> {
        let split = |t: &Term| -> Vec<(Scalar, Term)> {
            split_sum(&t.coef)
                .into_iter()
                .map(|c| {
                    let (q, c) = c.split_const();
                    (q, Term::new(c, t.mono.clone()))
                })
                .collect()
        };
        let mut out: Vec<(Scalar, TensorWord)> =
            split(&self.head).into_iter().map(|(q, h)| (q, TensorWord::new(h, Vec::new()))).collect();
        for (op, u) in &self.tail {
            let pieces = split(u);
            let mut next = Vec::with_capacity(out.len() * pieces.len());
            for (q, w) in &out {
                for (qc, c) in &pieces {
                    let mut w = w.clone();
                    w.tail.push((op.clone(), c.clone()));
                    next.push((q * qc, w));
                }
            }
            out = next;
        }
        out
    }

    /// Grouping key for semantic comparison: everything but the coefficients.
    fn shape(&self) -> (Vec<&str>, Vec<&VarMonomial>) {
        let ops = self.tail.iter().map(|(op, _)| op.name()).collect();
        let monos = std::iter::once(&self.head.mono).chain(self.tail.iter().map(|(_, u)| &u.mono)).collect();
        (ops, monos)
    }

    fn coefficients(&self) -> impl Iterator<Item = &CoefFn> {
        std::iter::once(&self.head.coef).chain(self.tail.iter().map(|(_, u)| &u.coef))
    }
}

impl Ord for TensorWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tail
            .len()
            .cmp(&other.tail.len())
            .then_with(|| {
                let a = self.tail.iter().map(|(op, _)| op.name());
                let b = other.tail.iter().map(|(op, _)| op.name());
                a.cmp(b)
            })
            .then_with(|| self.head.cmp(&other.head))
            .then_with(|| {
                let a = self.tail.iter().map(|(_, u)| u);
                let b = other.tail.iter().map(|(_, u)| u);
                a.cmp(b)
            })
    }
}

impl PartialOrd for TensorWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A 𝕜-linear combination of tensor words: the operator-linear normal form.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TensorExpr {
    terms: BTreeMap<TensorWord, Scalar>,
}

impl TensorExpr {
    pub fn zero() -> Self {
        TensorExpr::default()
    }

    /// The unit `1 ⊗ ∅`.
    pub fn one() -> Self {
        TensorExpr::from_word(Scalar::one(), TensorWord::unit())
    }

    pub fn from_word(q: Scalar, w: TensorWord) -> Self {
        let mut e = TensorExpr::zero();
        e.add_word(q, w);
        e
    }

    pub fn coef(c: CoefFn) -> Self {
        TensorExpr::from_word(Scalar::one(), TensorWord::new(Term::coef(c), Vec::new()))
    }

    /// A general pure tensor with polynomial slots, expanded multilinearly.
    /// Fails if a tail factor is not in `𝔄⁺`.
    pub fn word(head: &CoefPoly, tail: &[(Op, CoefPoly)]) -> Result<TensorExpr, Error> {
        let mut words = vec![(Scalar::one(), TensorWord::new(Term::one(), Vec::new()))];
        let mut expanded: Vec<(Scalar, TensorWord)> = Vec::new();
        for t in head.terms() {
            for (q, w) in &words {
                expanded.push((q.clone(), TensorWord::new(t.clone(), w.tail.clone())));
            }
        }
        words = expanded;
        for (op, u) in tail {
            if !u.is_augmented() {
                return Err(Error::Invalid(format!("tail factor under `{op}` has a part free of unknowns")));
            }
            let mut next = Vec::new();
            for t in u.terms() {
                for (q, w) in &words {
                    let mut tail = w.tail.clone();
                    tail.push((op.clone(), t.clone()));
                    next.push((q.clone(), TensorWord::new(w.head.clone(), tail)));
                }
            }
            words = next;
        }
        let mut e = TensorExpr::zero();
        for (q, w) in words {
            e.add_word(q, w);
        }
        Ok(e)
    }

    /// Adds `q·w`, normalizing `w` first.
    pub fn add_word(&mut self, q: Scalar, w: TensorWord) {
        for (c, w) in w.normalize() {
            self.add_normal(&q * c, w);
        }
    }

    fn add_normal(&mut self, q: Scalar, w: TensorWord) {
        if q.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(q);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += q;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &TensorExpr) -> TensorExpr {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &TensorExpr) {
        for (w, q) in &other.terms {
            self.add_word(q.clone(), w.clone());
        }
    }

    pub fn sub(&self, other: &TensorExpr) -> TensorExpr {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, q: &Scalar) -> TensorExpr {
        if q.is_zero() {
            return TensorExpr::zero();
        }
        TensorExpr { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * q)).collect() }
    }

    /// Multiplies every head by `c`.
    pub fn scale_head(&self, c: &CoefPoly) -> TensorExpr {
        let mut out = TensorExpr::zero();
        for t in c.terms() {
            for (w, q) in &self.terms {
                out.add_word(q.clone(), TensorWord::new(t.mul(&w.head), w.tail.clone()));
            }
        }
        out
    }

    pub fn scale_head_term(&self, t: &Term) -> TensorExpr {
        let mut out = TensorExpr::zero();
        for (w, q) in &self.terms {
            out.add_word(q.clone(), TensorWord::new(t.mul(&w.head), w.tail.clone()));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TensorWord, &Scalar)> {
        self.terms.iter()
    }

    /// Longest tail.
    pub fn max_len(&self) -> usize {
        self.terms.keys().map(TensorWord::len).max().unwrap_or(0)
    }

    pub fn is_normal(&self) -> bool {
        self.terms.keys().all(TensorWord::is_normal)
    }

    pub fn ops(&self) -> Vec<Op> {
        let mut out: Vec<Op> = Vec::new();
        for w in self.terms.keys() {
            for c in w.coefficients() {
                c.collect_ops(&mut out);
            }
            for (op, _) in &w.tail {
                if !out.contains(op) {
                    out.push(op.clone());
                }
            }
        }
        out
    }

    /// Semantic zero test in `A ⊗ (𝕜Ω ⊗ A)^{⊗n}`: words are grouped by
    /// operator sequence and monomials; each group is the function
    /// `(x₀, …, xₙ) ↦ Σ q·c₀(x₀)⋯cₙ(xₙ)`, sampled at seven fixed-seed points.
    pub fn is_zero_semantic(&self, interval: &Interval, env: &EvalEnv) -> Result<bool, EvalError> {
        let mut groups: BTreeMap<_, Vec<(&TensorWord, &Scalar)>> = BTreeMap::new();
        for (w, q) in &self.terms {
            groups.entry(w.shape()).or_default().push((w, q));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_7e45);
        for (_, words) in groups {
            let slots = words[0].0.len() + 1;
            for _ in 0..7 {
                let xs = interval.sample_points(slots, &mut rng);
                let mut total = 0.0;
                let mut scale = 0.0_f64;
                for (w, q) in &words {
                    let mut v = crate::coef::scalar_to_f64(q);
                    for (c, x) in w.coefficients().zip(&xs) {
                        v *= c.eval(*x, env)?;
                    }
                    total += v;
                    scale = scale.max(v.abs());
                }
                if total.abs() > 1e-9 * scale && total.abs() > 1e-12 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::{int, VolterraOpSpec};

    fn op() -> Op {
        Op::new(VolterraOpSpec::new("W", int(0), CoefFn::one(), CoefFn::one()))
    }

    #[test]
    fn scale_head_examples() {
        let w = op();
        let tail = vec![(w.clone(), CoefPoly::unknown("y"))];
        let e = TensorExpr::word(&CoefPoly::one(), &tail).unwrap();
        let got = e.scale_head(&CoefPoly::coef(CoefFn::X));
        assert_eq!(got, TensorExpr::word(&CoefPoly::coef(CoefFn::X), &tail).unwrap());
        assert!(e.scale_head(&CoefPoly::zero()).is_zero());
        let z = TensorExpr::word(&CoefPoly::unknown("z"), &tail).unwrap();
        let yz = crate::coef::poly_mul(&CoefPoly::unknown("y"), &CoefPoly::unknown("z"));
        assert_eq!(z.scale_head(&CoefPoly::unknown("y")), TensorExpr::word(&yz, &tail).unwrap());
    }

    #[test]
    fn rejects_coefficient_tail_factors() {
        let tail = vec![(op(), CoefPoly::one())];
        assert!(TensorExpr::word(&CoefPoly::one(), &tail).is_err());
    }

    #[test]
    fn ordering_is_by_length_first() {
        let w = op();
        let long = TensorWord::new(Term::one(), vec![(w.clone(), Term::unknown("a"))]);
        let short = TensorWord::new(Term::unknown("z"), vec![]);
        assert!(short < long);
    }

    #[test]
    fn semantic_zero_sees_through_forms() {
        let w = op();
        let tail = vec![(w.clone(), CoefPoly::unknown("y"))];
        let e1 = TensorExpr::word(&CoefPoly::coef(CoefFn::exp(CoefFn::X).mul(&CoefFn::exp(CoefFn::X))), &tail).unwrap();
        let e2 = TensorExpr::word(&CoefPoly::coef(CoefFn::exp(CoefFn::X.scale(&int(2)))), &tail).unwrap();
        let iv = Interval::open(0.0, 1.0);
        assert!(e1.sub(&e2).is_zero_semantic(&iv, &EvalEnv::default()).unwrap());
        let e3 = TensorExpr::word(&CoefPoly::coef(CoefFn::X), &tail).unwrap();
        assert!(!e1.sub(&e3).is_zero_semantic(&iv, &EvalEnv::default()).unwrap());
    }
}
