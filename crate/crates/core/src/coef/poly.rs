use std::collections::BTreeMap;
use std::sync::Arc;

use num::{One, Signed, Zero};

use super::func::CoefFn;
use super::scalar::Scalar;

/// A monomial in the unknown functions `Y` with positive rational
/// exponents. The empty map is the unit monomial.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarMonomial(BTreeMap<Arc<str>, Scalar>);

impl VarMonomial {
    pub fn one() -> Self {
        VarMonomial(BTreeMap::new())
    }

    pub fn var(name: impl Into<Arc<str>>) -> Self {
        VarMonomial(BTreeMap::from([(name.into(), Scalar::one())]))
    }

    /// `name^e`; `e` must be positive.
    pub fn power(name: impl Into<Arc<str>>, e: Scalar) -> Self {
        assert!(e.is_positive(), "unknown exponents are positive");
        VarMonomial(BTreeMap::from([(name.into(), e)]))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &VarMonomial) -> VarMonomial {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            *out.entry(v.clone()).or_insert_with(Scalar::zero) += e;
        }
        VarMonomial(out)
    }

    /// Raises every exponent by the factor `e > 0`.
    pub fn pow(&self, e: &Scalar) -> VarMonomial {
        VarMonomial(self.0.iter().map(|(v, x)| (v.clone(), x * e)).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, &Scalar)> {
        self.0.iter()
    }

    pub fn total_degree(&self) -> Scalar {
        self.0.values().fold(Scalar::zero(), |a, b| a + b)
    }

    pub fn has_fractional_exponent(&self) -> bool {
        self.0.values().any(|e| !e.is_integer())
    }
}

/// A single term `c(x)·m(Y)` of `A[Y]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub mono: VarMonomial,
    pub coef: CoefFn,
}

impl Term {
    pub fn new(coef: CoefFn, mono: VarMonomial) -> Self {
        Term { mono, coef }
    }

    pub fn one() -> Self {
        Term::new(CoefFn::one(), VarMonomial::one())
    }

    pub fn coef(c: CoefFn) -> Self {
        Term::new(c, VarMonomial::one())
    }

    pub fn unknown(name: impl Into<Arc<str>>) -> Self {
        Term::new(CoefFn::one(), VarMonomial::var(name))
    }

    /// Whether the term lies in `A` (no unknowns).
    pub fn is_coefficient(&self) -> bool {
        self.mono.is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.mono.is_one() && self.coef.is_one()
    }

    pub fn mul(&self, other: &Term) -> Term {
        Term::new(self.coef.mul(&other.coef), self.mono.mul(&other.mono))
    }

    pub fn scale_coef(&self, c: &CoefFn) -> Term {
        Term::new(self.coef.mul(c), self.mono.clone())
    }

    /// Moves the rational content of the coefficient out of the term.
    pub fn split_content(&self) -> (Scalar, Term) {
        let (q, rest) = self.coef.split_content();
        (q, Term::new(rest, self.mono.clone()))
    }
}

/// An element of `𝔄 = A[Y]`: at most one coefficient function per monomial.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoefPoly {
    terms: BTreeMap<VarMonomial, CoefFn>,
}

impl CoefPoly {
    pub fn zero() -> Self {
        CoefPoly::default()
    }

    pub fn one() -> Self {
        CoefPoly::from_term(Term::one())
    }

    pub fn from_term(t: Term) -> Self {
        let mut p = CoefPoly::zero();
        p.add_term(t);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = Term>>(terms: I) -> Self {
        let mut p = CoefPoly::zero();
        for t in terms {
            p.add_term(t);
        }
        p
    }

    pub fn coef(c: CoefFn) -> Self {
        CoefPoly::from_term(Term::coef(c))
    }

    pub fn unknown(name: impl Into<Arc<str>>) -> Self {
        CoefPoly::from_term(Term::unknown(name))
    }

    pub fn add_term(&mut self, t: Term) {
        if t.coef.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&t.mono) {
            Some(c) => c.add(&t.coef),
            None => t.coef,
        };
        if !merged.is_zero() {
            self.terms.insert(t.mono, merged);
        }
    }

    pub fn add(&self, other: &CoefPoly) -> CoefPoly {
        let mut out = self.clone();
        for t in other.terms() {
            out.add_term(t);
        }
        out
    }

    pub fn scale_coef(&self, c: &CoefFn) -> CoefPoly {
        CoefPoly::from_terms(self.terms().map(|t| t.scale_coef(c)))
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

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        self.terms.iter().map(|(m, c)| Term::new(c.clone(), m.clone()))
    }

    /// Whether every monomial contains an unknown (membership in `𝔄⁺`).
    pub fn is_augmented(&self) -> bool {
        self.terms.keys().all(|m| !m.is_one())
    }
}

/// Multiplication in `A[Y]`.
pub fn poly_mul(p: &CoefPoly, q: &CoefPoly) -> CoefPoly {
    let mut out = CoefPoly::zero();
    for s in p.terms() {
        for t in q.terms() {
            out.add_term(s.mul(&t));
        }
    }
    out
}

/// The augmentation split `𝔄 = A ⊕ 𝔄⁺`: the unit-monomial term and the rest.
pub fn aug_split(p: &CoefPoly) -> (CoefPoly, CoefPoly) {
    let mut a_part = CoefPoly::zero();
    let mut plus = CoefPoly::zero();
    for t in p.terms() {
        if t.is_coefficient() {
            a_part.add_term(t);
        } else {
            plus.add_term(t);
        }
    }
    (a_part, plus)
}
