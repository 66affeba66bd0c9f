use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{One, Zero};

use crate::coef::{apply_rho, CoefFn, Op, Scalar, Term, VarMonomial};
use crate::error::Error;

/// A bracket label: the operator `P_ω` itself, or its conjugate
/// `P̌_ω = 𝔞_ω⁻¹ P_ω 𝔞_ω` (the plain integral with kernel `h·k`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Operator {
    pub op: Op,
    pub check: bool,
}

impl Operator {
    pub fn plain(op: &Op) -> Self {
        Operator { op: op.clone(), check: false }
    }

    pub fn check(op: &Op) -> Self {
        Operator { op: op.clone(), check: true }
    }

    /// Action on a pure coefficient.
    pub fn apply_coef(&self, c: &CoefFn) -> CoefFn {
        if self.check {
            CoefFn::integral(&self.op, c.clone())
        } else {
            apply_rho(&self.op, c)
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.check {
            write!(f, "Int_{}", self.op)
        } else {
            write!(f, "{}", self.op)
        }
    }
}

/// `c · ⌊u₁⌋_{ω₁} ⋯ ⌊u_k⌋_{ω_k}`: a head term times a multiset of brackets.
///
/// In canonical form the head coefficient carries no rational content (that
/// lives in the enclosing [`OperatedExpr`]), the brackets are sorted, and
/// every payload is itself canonical and not a pure coefficient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatedMonomial {
    pub head: Term,
    pub brackets: Vec<(Operator, OperatedMonomial)>,
}

impl OperatedMonomial {
    pub fn unit() -> Self {
        OperatedMonomial { head: Term::one(), brackets: Vec::new() }
    }

    /// Normalizes a head and bracket list into canonical monomials (a head
    /// whose coefficient is a sum splits into one monomial per summand),
    /// each with its extracted scalar.
    pub fn build(head: Term, mut brackets: Vec<(Operator, OperatedMonomial)>) -> Vec<(Scalar, Self)> {
        brackets.sort();
        split_sum(&head.coef)
            .into_iter()
            .map(|c| {
                let (q, c) = c.split_const();
                (q, OperatedMonomial { head: Term::new(c, head.mono.clone()), brackets: brackets.clone() })
            })
            .collect()
    }

    /// Pure element of `A`: no unknowns and no brackets.
    pub fn is_coefficient(&self) -> bool {
        self.head.is_coefficient() && self.brackets.is_empty()
    }

    /// Maximal bracket nesting depth.
    pub fn depth(&self) -> usize {
        self.brackets.iter().map(|(_, m)| 1 + m.depth()).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &OperatedMonomial) -> Vec<(Scalar, OperatedMonomial)> {
        let mut brackets = self.brackets.clone();
        brackets.extend(other.brackets.iter().cloned());
        OperatedMonomial::build(self.head.mul(&other.head), brackets)
    }

    /// No monomial contains a product of two operator applications.
    pub fn is_operator_linear(&self) -> bool {
        self.brackets.len() <= 1 && self.brackets.iter().all(|(_, m)| m.is_operator_linear())
    }

    fn collect_ops(&self, out: &mut Vec<Op>) {
        self.head.coef.collect_ops(out);
        for (o, m) in &self.brackets {
            if !out.contains(&o.op) {
                out.push(o.op.clone());
            }
            m.collect_ops(out);
        }
    }

    fn collect_unknowns(&self, out: &mut Vec<Arc<str>>) {
        for (v, _) in self.head.mono.iter() {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        self.brackets.iter().for_each(|(_, m)| m.collect_unknowns(out));
    }

    fn collect_coefs<'a>(&'a self, out: &mut Vec<&'a CoefFn>) {
        out.push(&self.head.coef);
        self.brackets.iter().for_each(|(_, m)| m.collect_coefs(out));
    }
}

/// A 𝕜-linear combination of operated monomials: an element of the free
/// operated algebra over `A[Y]`, relative to the operator action on `A`.
///
/// Constructors keep the form canonical: brackets are distributed over sums,
/// scalars hoisted outward, like monomials merged, and a bracket applied to
/// a pure coefficient is replaced by the coefficient it evaluates to.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatedExpr {
    terms: BTreeMap<OperatedMonomial, Scalar>,
}

impl OperatedExpr {
    pub fn zero() -> Self {
        OperatedExpr::default()
    }

    pub fn one() -> Self {
        OperatedExpr::monomial(Scalar::one(), OperatedMonomial::unit())
    }

    pub fn scalar(q: Scalar) -> Self {
        OperatedExpr::monomial(q, OperatedMonomial::unit())
    }

    pub fn monomial(q: Scalar, m: OperatedMonomial) -> Self {
        let mut e = OperatedExpr::zero();
        e.add_monomial(q, m);
        e
    }

    pub fn term(t: Term) -> Self {
        let mut e = OperatedExpr::zero();
        for (q, m) in OperatedMonomial::build(t, Vec::new()) {
            e.add_monomial(q, m);
        }
        e
    }

    pub fn coef(c: CoefFn) -> Self {
        OperatedExpr::term(Term::coef(c))
    }

    pub fn unknown(name: impl Into<Arc<str>>) -> Self {
        OperatedExpr::term(Term::unknown(name))
    }

    /// Adds `q·m`; `m` must already be canonical.
    pub fn add_monomial(&mut self, q: Scalar, m: OperatedMonomial) {
        if q.is_zero() {
            return;
        }
        match self.terms.entry(m) {
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

    pub fn add(&self, other: &OperatedExpr) -> OperatedExpr {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &OperatedExpr) {
        for (m, q) in &other.terms {
            self.add_monomial(q.clone(), m.clone());
        }
    }

    pub fn sub(&self, other: &OperatedExpr) -> OperatedExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> OperatedExpr {
        self.scale(&-Scalar::one())
    }

    pub fn scale(&self, q: &Scalar) -> OperatedExpr {
        if q.is_zero() {
            return OperatedExpr::zero();
        }
        OperatedExpr { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect() }
    }

    /// Multiplies every head by the coefficient `c`.
    pub fn scale_coef(&self, c: &CoefFn) -> OperatedExpr {
        self.mul(&OperatedExpr::coef(c.clone()))
    }

    pub fn mul(&self, other: &OperatedExpr) -> OperatedExpr {
        let mut out = OperatedExpr::zero();
        for (m1, q1) in &self.terms {
            for (m2, q2) in &other.terms {
                for (q, m) in m1.mul(m2) {
                    out.add_monomial(q * q1 * q2, m);
                }
            }
        }
        out
    }

    pub fn powi(&self, n: u32) -> OperatedExpr {
        (0..n).fold(OperatedExpr::one(), |acc, _| acc.mul(self))
    }

    /// `⌊e⌋_op`, distributed over the monomials of `e`.
    pub fn bracket(op: &Operator, e: &OperatedExpr) -> OperatedExpr {
        let mut out = OperatedExpr::zero();
        let mut pure = Vec::new();
        for (m, q) in &e.terms {
            if m.is_coefficient() {
                pure.push(m.head.coef.scale(q));
            } else {
                let inner = OperatedMonomial { head: Term::one(), brackets: vec![(op.clone(), m.clone())] };
                out.add_monomial(q.clone(), inner);
            }
        }
        if !pure.is_empty() {
            out.add_assign(&OperatedExpr::coef(op.apply_coef(&CoefFn::sum(pure))));
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

    pub fn iter(&self) -> impl Iterator<Item = (&OperatedMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn depth(&self) -> usize {
        self.terms.keys().map(OperatedMonomial::depth).max().unwrap_or(0)
    }

    pub fn check_depth(&self, cap: usize) -> Result<(), Error> {
        let depth = self.depth();
        if depth > cap {
            return Err(Error::DepthCap { depth, cap });
        }
        Ok(())
    }

    pub fn is_operator_linear(&self) -> bool {
        self.terms.keys().all(OperatedMonomial::is_operator_linear)
    }

    /// Operators used by brackets or by integral nodes in coefficients.
    pub fn ops(&self) -> Vec<Op> {
        let mut out = Vec::new();
        self.terms.keys().for_each(|m| m.collect_ops(&mut out));
        out
    }

    pub fn unknowns(&self) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        self.terms.keys().for_each(|m| m.collect_unknowns(&mut out));
        out.sort();
        out
    }

    /// Every coefficient function appearing anywhere in the expression.
    pub fn coefficients(&self) -> Vec<&CoefFn> {
        let mut out = Vec::new();
        self.terms.keys().for_each(|m| m.collect_coefs(&mut out));
        out
    }

    /// Replaces the unknowns named in `sigma` by coefficient functions.
    /// Brackets whose payload becomes a pure coefficient fold into `A`, so
    /// a full assignment leaves a single coefficient.
    pub fn substitute(&self, sigma: &BTreeMap<Arc<str>, CoefFn>) -> OperatedExpr {
        let mut out = OperatedExpr::zero();
        for (m, q) in &self.terms {
            out.add_assign(&substitute_monomial(m, sigma).scale(q));
        }
        out
    }

    /// Rebuilds the expression through the constructors. Idempotent.
    pub fn canonicalize(&self) -> OperatedExpr {
        let mut out = OperatedExpr::zero();
        for (m, q) in &self.terms {
            out.add_assign(&rebuild(m).scale(q));
        }
        out
    }
}

/// The summands of a canonical coefficient (none for zero).
pub(crate) fn split_sum(c: &CoefFn) -> Vec<CoefFn> {
    match c {
        CoefFn::Sum(ts) => ts.clone(),
        c if c.is_zero() => Vec::new(),
        c => vec![c.clone()],
    }
}

fn substitute_monomial(m: &OperatedMonomial, sigma: &BTreeMap<Arc<str>, CoefFn>) -> OperatedExpr {
    let mut coef = m.head.coef.clone();
    let mut mono = VarMonomial::one();
    for (v, e) in m.head.mono.iter() {
        match sigma.get(v) {
            Some(f) => coef = coef.mul(&f.pow(e)),
            None => mono = mono.mul(&VarMonomial::power(v.clone(), e.clone())),
        }
    }
    m.brackets.iter().fold(OperatedExpr::term(Term::new(coef, mono)), |acc, (op, payload)| {
        acc.mul(&OperatedExpr::bracket(op, &substitute_monomial(payload, sigma)))
    })
}

fn rebuild(m: &OperatedMonomial) -> OperatedExpr {
    let head = Term::new(m.head.coef.canonicalize(), m.head.mono.clone());
    m.brackets
        .iter()
        .fold(OperatedExpr::term(head), |acc, (op, payload)| acc.mul(&OperatedExpr::bracket(op, &rebuild(payload))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::{int, VolterraOpSpec};

    fn op(name: &str) -> Op {
        Op::new(VolterraOpSpec::new(name, int(0), CoefFn::one(), CoefFn::one()))
    }

    fn y() -> OperatedExpr {
        OperatedExpr::unknown("y")
    }
    fn z() -> OperatedExpr {
        OperatedExpr::unknown("z")
    }

    #[test]
    fn substitution_closes_polynomial_brackets() {
        use crate::coef::ratio;
        let p = Operator::plain(&Op::new(VolterraOpSpec::new("P", int(0), CoefFn::X, CoefFn::one())));
        let f = OperatedExpr::unknown("f");
        let g = OperatedExpr::unknown("g");
        let pf = OperatedExpr::bracket(&p, &f);
        let pg = OperatedExpr::bracket(&p, &g);
        let lhs = pf.mul(&pg);
        let rhs = OperatedExpr::bracket(&p, &f.mul(&pg)).add(&OperatedExpr::bracket(&p, &pf.mul(&g)));
        let sigma = BTreeMap::from([(Arc::from("f"), CoefFn::one()), (Arc::from("g"), CoefFn::one())]);
        assert_eq!(lhs.substitute(&sigma), OperatedExpr::coef(CoefFn::X.powi(4)));
        assert_eq!(rhs.substitute(&sigma), OperatedExpr::coef(CoefFn::X.powi(4).scale(&ratio(2, 3))));
        assert_eq!(lhs.substitute(&BTreeMap::new()), lhs);
    }

    #[test]
    fn brackets_distribute_over_sums() {
        let w = Operator::plain(&op("W"));
        let lhs = OperatedExpr::bracket(&w, &y().add(&z()));
        let rhs = OperatedExpr::bracket(&w, &y()).add(&OperatedExpr::bracket(&w, &z()));
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.len(), 2);
    }

    #[test]
    fn products_of_brackets_commute() {
        let a = Operator::plain(&op("A"));
        let b = Operator::plain(&op("B"));
        let ya = OperatedExpr::bracket(&a, &y());
        let zb = OperatedExpr::bracket(&b, &z());
        assert_eq!(ya.mul(&zb), zb.mul(&ya));
    }

    #[test]
    fn like_monomials_merge() {
        let xy = OperatedExpr::term(Term::new(CoefFn::X, crate::coef::VarMonomial::var("y")));
        let sum = xy.scale(&int(2)).add(&xy.scale(&int(3)));
        assert_eq!(sum, xy.scale(&int(5)));
        assert_eq!(sum.len(), 1);
        // content of the coefficient moves into the scalar
        let two_x_y = OperatedExpr::term(Term::new(CoefFn::X.scale(&int(2)), crate::coef::VarMonomial::var("y")));
        assert_eq!(two_x_y, xy.scale(&int(2)));
    }

    #[test]
    fn brackets_of_coefficients_fold() {
        let w = Operator::plain(&op("W"));
        let e = OperatedExpr::bracket(&w, &OperatedExpr::one());
        assert_eq!(e, OperatedExpr::coef(CoefFn::X));
        let mixed = OperatedExpr::bracket(&w, &y().add(&OperatedExpr::one()));
        assert_eq!(mixed, OperatedExpr::bracket(&w, &y()).add(&OperatedExpr::coef(CoefFn::X)));
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let a = Operator::plain(&op("A"));
        let c = Operator::check(&op("B"));
        let inner = OperatedExpr::bracket(&c, &y().mul(&z()));
        let e = OperatedExpr::bracket(&a, &y().mul(&inner)).add(&z().scale(&int(3))).mul(&OperatedExpr::coef(CoefFn::X));
        let once = e.canonicalize();
        assert_eq!(once, e);
        assert_eq!(once.canonicalize(), once);
        assert_eq!(e.depth(), 2);
        assert!(matches!(e.check_depth(1), Err(Error::DepthCap { depth: 2, cap: 1 })));
    }
}
