use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num::{One, Zero};

use super::expr::{split_sum, OperatedExpr, OperatedMonomial, Operator};
use crate::coef::{Scalar, Term};

/// A nonplanar rooted tree with decorated vertices and operator-labelled
/// edges. Children are kept sorted, so equal trees compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecoratedTree {
    pub decoration: Term,
    pub children: Vec<(Operator, DecoratedTree)>,
}

impl DecoratedTree {
    /// The single-vertex tree `•t`.
    pub fn vertex(t: Term) -> Self {
        DecoratedTree { decoration: t, children: Vec::new() }
    }

    /// Graft product: merge the two roots, multiplying their decorations.
    pub fn graft(&self, other: &DecoratedTree) -> DecoratedTree {
        let mut children = self.children.clone();
        children.extend(other.children.iter().cloned());
        children.sort();
        DecoratedTree { decoration: self.decoration.mul(&other.decoration), children }
    }

    /// `B⁺_ω(T)`: a new root decorated by 1 joined to the root of `T`.
    pub fn extend(op: &Operator, t: &DecoratedTree) -> DecoratedTree {
        DecoratedTree { decoration: Term::one(), children: vec![(op.clone(), t.clone())] }
    }

    pub fn height(&self) -> usize {
        self.children.iter().map(|(_, c)| 1 + c.height()).max().unwrap_or(0)
    }

    pub fn vertex_count(&self) -> usize {
        1 + self.children.iter().map(|(_, c)| c.vertex_count()).sum::<usize>()
    }

    /// Canonical pieces: decorations that are sums are expanded, rational
    /// content moves into the scalar, children are sorted.
    fn normalize(&self) -> Vec<(Scalar, DecoratedTree)> {
        let mut out: Vec<(Scalar, DecoratedTree)> = split_sum(&self.decoration.coef)
            .into_iter()
            .map(|c| {
                let (q, c) = c.split_const();
                (q, DecoratedTree { decoration: Term::new(c, self.decoration.mono.clone()), children: Vec::new() })
            })
            .collect();
        for (op, child) in &self.children {
            let pieces = child.normalize();
            let mut next = Vec::with_capacity(out.len() * pieces.len());
            for (q, t) in &out {
                for (qc, c) in &pieces {
                    let mut t = t.clone();
                    t.children.push((op.clone(), c.clone()));
                    next.push((q * qc, t));
                }
            }
            out = next;
        }
        for (_, t) in &mut out {
            t.children.sort();
        }
        out
    }
}

/// 𝕜-linear combination of decorated trees.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeExpr {
    terms: BTreeMap<DecoratedTree, Scalar>,
}

impl TreeExpr {
    pub fn zero() -> Self {
        TreeExpr::default()
    }

    pub fn tree(t: DecoratedTree) -> Self {
        let mut e = TreeExpr::zero();
        e.add_tree(Scalar::one(), &t);
        e
    }

    pub fn add_tree(&mut self, q: Scalar, t: &DecoratedTree) {
        for (c, t) in t.normalize() {
            self.add_normal(&q * c, t);
        }
    }

    fn add_normal(&mut self, q: Scalar, t: DecoratedTree) {
        if q.is_zero() {
            return;
        }
        match self.terms.entry(t) {
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

    pub fn add(&self, other: &TreeExpr) -> TreeExpr {
        let mut out = self.clone();
        for (t, q) in &other.terms {
            out.add_tree(q.clone(), t);
        }
        out
    }

    pub fn scale(&self, q: &Scalar) -> TreeExpr {
        let mut out = TreeExpr::zero();
        for (t, c) in &self.terms {
            out.add_tree(c * q, t);
        }
        out
    }

    pub fn graft(&self, other: &TreeExpr) -> TreeExpr {
        let mut out = TreeExpr::zero();
        for (t, p) in &self.terms {
            for (u, q) in &other.terms {
                out.add_tree(p * q, &t.graft(u));
            }
        }
        out
    }

    pub fn extend(op: &Operator, e: &TreeExpr) -> TreeExpr {
        let mut out = TreeExpr::zero();
        for (t, q) in &e.terms {
            out.add_tree(q.clone(), &DecoratedTree::extend(op, t));
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DecoratedTree, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn height(&self) -> usize {
        self.terms.keys().map(DecoratedTree::height).max().unwrap_or(0)
    }
}

fn monomial_tree(m: &OperatedMonomial) -> DecoratedTree {
    m.brackets.iter().fold(DecoratedTree::vertex(m.head.clone()), |acc, (op, u)| {
        acc.graft(&DecoratedTree::extend(op, &monomial_tree(u)))
    })
}

/// The isomorphism `η` from bracketed words to trees:
/// `c·∏⌊uᵢ⌋_{ωᵢ} ↦ •c ⊗̄ ∏ B⁺_{ωᵢ}(η(uᵢ))`.
pub fn word_to_tree(e: &OperatedExpr) -> TreeExpr {
    let mut out = TreeExpr::zero();
    for (m, q) in e.iter() {
        out.add_tree(q.clone(), &monomial_tree(m));
    }
    out
}

fn tree_word(t: &DecoratedTree) -> OperatedExpr {
    t.children.iter().fold(OperatedExpr::term(t.decoration.clone()), |acc, (op, c)| {
        acc.mul(&OperatedExpr::bracket(op, &tree_word(c)))
    })
}

/// Inverse of [`word_to_tree`].
pub fn tree_to_word(t: &TreeExpr) -> OperatedExpr {
    let mut out = OperatedExpr::zero();
    for (tree, q) in t.iter() {
        for (m, c) in tree_word(tree).iter() {
            out.add_monomial(c.clone() * q.clone(), m.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::{int, CoefFn, Op, VarMonomial, VolterraOpSpec};

    fn op(name: &str) -> Operator {
        Operator::plain(&Op::new(VolterraOpSpec::new(name, int(0), CoefFn::one(), CoefFn::one())))
    }
    fn var(v: &str) -> Term {
        Term::unknown(v)
    }
    fn leaf(v: &str) -> DecoratedTree {
        DecoratedTree::vertex(var(v))
    }

    #[test]
    fn graft_examples() {
        let (alpha, beta) = (op("alpha"), op("beta"));
        let s = DecoratedTree::extend(&alpha, &leaf("s"));
        let b_rooted = DecoratedTree { decoration: var("b"), children: s.children.clone() };
        let got = leaf("a").graft(&b_rooted);
        let ab = var("a").mul(&var("b"));
        assert_eq!(got, DecoratedTree { decoration: ab, children: s.children.clone() });

        let cherry1 = leaf("a").graft(&DecoratedTree::extend(&alpha, &leaf("b")));
        let cherry2 = leaf("c").graft(&DecoratedTree::extend(&beta, &leaf("d")));
        let both = cherry1.graft(&cherry2);
        assert_eq!(both.decoration, var("a").mul(&var("c")));
        assert_eq!(both.children, vec![(alpha.clone(), leaf("b")), (beta.clone(), leaf("d"))]);

        assert_eq!(cherry1.graft(&DecoratedTree::vertex(Term::one())), cherry1);
    }

    #[test]
    fn extend_examples() {
        let w = op("w");
        let t = DecoratedTree::extend(&w, &leaf("a"));
        assert_eq!(t.decoration, Term::one());
        assert_eq!(t.children, vec![(w.clone(), leaf("a"))]);
        let chain = DecoratedTree::extend(&w, &t);
        assert_eq!(chain.height(), 2);
        assert_eq!(chain.children[0].1.decoration, Term::one());
        let cherry = leaf("a").graft(&DecoratedTree::extend(&w, &leaf("b")));
        let big = DecoratedTree::extend(&w, &cherry);
        assert_eq!(big.vertex_count(), 3);
        assert_eq!(big.height(), 2);
    }

    #[test]
    fn dictionary_rows() {
        let (alpha, beta, gamma) = (op("alpha"), op("beta"), op("gamma"));
        let a = OperatedExpr::term(var("a"));
        assert_eq!(word_to_tree(&a), TreeExpr::tree(leaf("a")));

        let b = OperatedExpr::term(var("b"));
        let row2 = a.mul(&OperatedExpr::bracket(&alpha, &b));
        let t2 = leaf("a").graft(&DecoratedTree::extend(&alpha, &leaf("b")));
        assert_eq!(word_to_tree(&row2), TreeExpr::tree(t2));

        let c = OperatedExpr::term(var("c"));
        let d = OperatedExpr::term(var("d"));
        let inner = c.mul(&OperatedExpr::bracket(&gamma, &d));
        let row3 = row2.mul(&OperatedExpr::bracket(&beta, &inner));
        let tree = word_to_tree(&row3);
        let (t, q) = tree.iter().next().unwrap();
        assert!(q.is_one());
        assert_eq!(t.vertex_count(), 4);
        assert_eq!(t.height(), 2);
        assert_eq!(tree_to_word(&tree), row3);
        assert_eq!(tree.height(), row3.depth());
    }

    #[test]
    fn scalars_move_to_the_front() {
        let two_y = Term::new(CoefFn::integer(2), VarMonomial::var("y"));
        let t = DecoratedTree::extend(&op("w"), &DecoratedTree::vertex(two_y));
        let e = TreeExpr::tree(t);
        let (tree, q) = e.iter().next().unwrap();
        assert_eq!(*q, int(2));
        assert_eq!(tree.children[0].1.decoration, var("y"));
    }
}
