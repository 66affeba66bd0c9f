use num::One;

use super::word::{TensorExpr, TensorWord};
use crate::coef::{apply_rho, CoefFn, Op, Scalar, Term};
use crate::error::Error;

/// The free operator `P_{F,ω}` on `Sha(A, B)`, with `φ_ω = ρ̌_ω`.
///
/// Heads are split into their `A`-part and `𝔄⁺`-part and the three cases
/// applied linearly:
///
/// * `c ∈ A`, empty tail: `φ(c)`;
/// * `c ∈ A`, tail `(ω₁⊗u₁)⋯`: `φ(c)⊗(ω₁⊗u₁)⋯ − 1⊗(ω₁⊗φ(c)u₁)⋯`;
/// * `u₀ ∈ 𝔄⁺`: `1⊗(ω⊗u₀)⊗(ω₁⊗u₁)⋯`.
pub fn pf_apply(op: &Op, e: &TensorExpr) -> TensorExpr {
    let mut out = TensorExpr::zero();
    for (w, q) in e.iter() {
        if w.head.is_coefficient() {
            let phi = CoefFn::integral(op, w.head.coef.clone());
            integrate_by_parts(&mut out, q, w, phi, &Term::one(), &CoefFn::one());
        } else {
            let mut tail = Vec::with_capacity(w.len() + 1);
            tail.push((op.clone(), w.head.clone()));
            tail.extend(w.tail.iter().cloned());
            out.add_word(q.clone(), TensorWord::new(Term::one(), tail));
        }
    }
    out
}

/// The twisted operator `P^𝔞_{F,ω}`: the same three cases with `ρ_ω` in
/// place of `φ_ω` and heads and factors scaled by `𝔞_ω`, `𝔞_ω⁻¹`.
/// Extensionally `P^𝔞_ω(u) = 𝔞_ω · P_{F,ω}(𝔞_ω⁻¹ u)`.
pub fn pf_twisted(op: &Op, e: &TensorExpr) -> Result<TensorExpr, Error> {
    let twist = op.twist()?;
    let twist_inv = op.twist_inv()?;
    let mut out = TensorExpr::zero();
    for (w, q) in e.iter() {
        if w.head.is_coefficient() {
            let rho = apply_rho(op, &w.head.coef);
            integrate_by_parts(&mut out, q, w, rho, &Term::coef(twist.clone()), twist_inv);
        } else {
            let mut tail = Vec::with_capacity(w.len() + 1);
            tail.push((op.clone(), w.head.scale_coef(twist_inv)));
            tail.extend(w.tail.iter().cloned());
            out.add_word(q.clone(), TensorWord::new(Term::coef(twist.clone()), tail));
        }
    }
    Ok(out)
}

// cases 1 and 2 for an A-head: `v⊗tail − s⊗(ω₁⊗s⁻¹·v·u₁)⋯`
fn integrate_by_parts(out: &mut TensorExpr, q: &Scalar, w: &TensorWord, v: CoefFn, s: &Term, s_inv: &CoefFn) {
    out.add_word(q.clone(), TensorWord::new(Term::coef(v.clone()), w.tail.clone()));
    if let Some(((op1, u1), rest)) = w.tail.split_first() {
        let mut tail = Vec::with_capacity(w.len());
        tail.push((op1.clone(), u1.scale_coef(&s_inv.mul(&v))));
        tail.extend(rest.iter().cloned());
        out.add_word(-q.clone(), TensorWord::new(s.clone(), tail));
    }
}

/// The shuffle product `⋄` on `Sha(A, B)`.
pub fn shuffle(u: &TensorExpr, v: &TensorExpr) -> TensorExpr {
    let mut out = TensorExpr::zero();
    for (w1, p) in u.iter() {
        for (w2, q) in v.iter() {
            let pq = p * q;
            if w1.is_normal() && w2.is_normal() {
                let head = w1.head.mul(&w2.head);
                for tail in interleavings(&w1.tail, &w2.tail) {
                    out.add_word(pq.clone(), TensorWord::new(head.clone(), tail));
                }
            } else {
                out.add_assign(&shuffle_words(w1, w2).scale(&pq));
            }
        }
    }
    out
}

// On normal words the recursion below only ever prepends letters, so the
// product is the plain shuffle of the tails.
fn interleavings<T: Clone>(a: &[T], b: &[T]) -> Vec<Vec<T>> {
    match (a.split_first(), b.split_first()) {
        (None, _) => vec![b.to_vec()],
        (_, None) => vec![a.to_vec()],
        (Some((x, a_rest)), Some((y, b_rest))) => {
            let mut out = Vec::new();
            for mut t in interleavings(a_rest, b) {
                t.insert(0, x.clone());
                out.push(t);
            }
            for mut t in interleavings(a, b_rest) {
                t.insert(0, y.clone());
                out.push(t);
            }
            out
        }
    }
}

fn shuffle_words(u: &TensorWord, v: &TensorWord) -> TensorExpr {
    let head = u.head.mul(&v.head);
    if u.is_empty() {
        return TensorExpr::from_word(Scalar::one(), TensorWord::new(head, v.tail.clone()));
    }
    if v.is_empty() {
        return TensorExpr::from_word(Scalar::one(), TensorWord::new(head, u.tail.clone()));
    }
    // u = u₀·P_{ω₁}(u′), v = v₀·P_{ε₁}(v′)
    let (omega, u1) = &u.tail[0];
    let (eps, v1) = &v.tail[0];
    let u_rest = TensorWord::new(u1.clone(), u.tail[1..].to_vec());
    let v_rest = TensorWord::new(v1.clone(), v.tail[1..].to_vec());
    let u_full = TensorWord::new(Term::one(), u.tail.clone());
    let v_full = TensorWord::new(Term::one(), v.tail.clone());
    let left = pf_apply(eps, &shuffle_words(&u_full, &v_rest));
    let right = pf_apply(omega, &shuffle_words(&u_rest, &v_full));
    left.add(&right).scale_head_term(&head)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::{int, CoefPoly, VolterraOpSpec};

    fn op(name: &str, k: CoefFn, h: CoefFn) -> Op {
        Op::new(VolterraOpSpec::new(name, int(0), k, h))
    }
    fn plain() -> Op {
        op("W", CoefFn::one(), CoefFn::one())
    }
    fn word(head: CoefPoly, tail: &[(Op, CoefPoly)]) -> TensorExpr {
        TensorExpr::word(&head, tail).unwrap()
    }
    fn y() -> CoefPoly {
        CoefPoly::unknown("y")
    }
    fn z() -> CoefPoly {
        CoefPoly::unknown("z")
    }

    #[test]
    fn pf_apply_cases() {
        let w = plain();
        assert_eq!(pf_apply(&w, &TensorExpr::one()), TensorExpr::coef(CoefFn::X));
        assert_eq!(pf_apply(&w, &word(y(), &[])), word(CoefPoly::one(), &[(w.clone(), y())]));

        let p2 = op("P2", CoefFn::one(), CoefFn::X.pow(&crate::coef::ratio(-1, 2)));
        let inner = word(CoefPoly::one(), &[(p2.clone(), z())]);
        let got = pf_apply(&w, &inner);
        let xz = CoefPoly::from_term(Term::new(CoefFn::X, crate::coef::VarMonomial::var("z")));
        let expect = word(CoefPoly::coef(CoefFn::X), &[(p2.clone(), z())]).sub(&word(CoefPoly::one(), &[(p2, xz)]));
        assert_eq!(got, expect);
    }

    #[test]
    fn pf_twisted_cases() {
        let e = op("E", CoefFn::exp(CoefFn::X.neg()), CoefFn::exp(CoefFn::X));
        let got = pf_twisted(&e, &word(y(), &[])).unwrap();
        let factor = CoefPoly::from_term(Term::new(CoefFn::exp(CoefFn::X), crate::coef::VarMonomial::var("y")));
        assert_eq!(got, word(CoefPoly::coef(CoefFn::exp(CoefFn::X.neg())), &[(e.clone(), factor)]));

        let w = plain();
        let samples = [
            TensorExpr::one(),
            word(y(), &[]),
            word(CoefPoly::coef(CoefFn::X), &[(w.clone(), y())]),
            word(y(), &[(w.clone(), z()), (w.clone(), y())]),
        ];
        for s in &samples {
            assert_eq!(pf_twisted(&w, s).unwrap(), pf_apply(&w, s));
        }
        let c = CoefFn::sin(CoefFn::X);
        assert_eq!(pf_twisted(&e, &TensorExpr::coef(c.clone())).unwrap(), TensorExpr::coef(apply_rho(&e, &c)));
    }

    #[test]
    fn missing_twist() {
        let bad = op("K", CoefFn::X, CoefFn::one());
        assert!(matches!(pf_twisted(&bad, &TensorExpr::one()), Err(Error::MissingTwist { .. })));
    }

    #[test]
    fn shuffle_small_cases() {
        let w = plain();
        let c = TensorExpr::coef(CoefFn::X);
        let d = TensorExpr::coef(CoefFn::sin(CoefFn::X));
        assert_eq!(shuffle(&c, &d), TensorExpr::coef(CoefFn::X.mul(&CoefFn::sin(CoefFn::X))));
        let v = word(z(), &[(w.clone(), y())]);
        assert_eq!(shuffle(&c, &v), v.scale_head(&CoefPoly::coef(CoefFn::X)));
        // classical shuffle of two letters
        let a = word(CoefPoly::one(), &[(w.clone(), y())]);
        let b = word(CoefPoly::one(), &[(w.clone(), z())]);
        let expect = word(CoefPoly::one(), &[(w.clone(), y()), (w.clone(), z())])
            .add(&word(CoefPoly::one(), &[(w.clone(), z()), (w.clone(), y())]));
        assert_eq!(shuffle(&a, &b), expect);
        assert_eq!(shuffle(&a, &TensorExpr::one()), a);
    }
}
