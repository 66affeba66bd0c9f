use std::collections::BTreeMap;
use std::sync::Arc;

use num::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::env::EvalEnv;
use super::interval::Interval;
use super::op::Op;
use super::scalar::{as_small_int, exact_pow, int, is_positive, pow_int, scalar_to_f64, Scalar};
use crate::error::EvalError;
use crate::quad;

/// A coefficient function: an element of `A`, a real function of the single
/// variable `x` on the problem interval.
///
/// Values are built through the smart constructors ([`CoefFn::sum`],
/// [`CoefFn::product`], [`CoefFn::pow`], ...), which keep the tree in a
/// structural canonical form: sums and products are flat and sorted, like
/// terms and like bases are merged, exponentials are combined, and
/// polynomials in `x` (rational exponents allowed) are fully expanded.
///
/// `Int(ω, f)` is the function `x ↦ ∫_a^x h_ω(t) k_ω(t) f(t) dt`, the
/// conjugated operator `ρ̌_ω` applied to `f`. It is kept opaque unless the
/// integrand is a polynomial, in which case it is integrated exactly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoefFn {
    Const(Scalar),
    X,
    Param(Arc<str>),
    Sum(Vec<CoefFn>),
    Prod(Vec<CoefFn>),
    Pow(Box<CoefFn>, Scalar),
    Exp(Box<CoefFn>),
    Sin(Box<CoefFn>),
    Cos(Box<CoefFn>),
    /// Raw reciprocal, only produced by parsers; canonical form is `Pow(_, -1)`.
    Recip(Box<CoefFn>),
    Int(Op, Box<CoefFn>),
}

/// Sparse polynomial in `x` with rational exponents: exponent ↦ coefficient.
pub type Poly = BTreeMap<Scalar, Scalar>;

const MAX_POLY_TERMS: usize = 64;
const MAX_POLY_POWER: i64 = 12;

impl CoefFn {
    pub fn zero() -> Self {
        CoefFn::Const(Scalar::zero())
    }

    pub fn one() -> Self {
        CoefFn::Const(Scalar::one())
    }

    pub fn constant(q: Scalar) -> Self {
        CoefFn::Const(q)
    }

    pub fn integer(n: i64) -> Self {
        CoefFn::Const(int(n))
    }

    pub fn x() -> Self {
        CoefFn::X
    }

    pub fn param(name: impl Into<Arc<str>>) -> Self {
        CoefFn::Param(name.into())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CoefFn::Const(q) if q.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, CoefFn::Const(q) if q.is_one())
    }

    pub fn as_const(&self) -> Option<&Scalar> {
        match self {
            CoefFn::Const(q) => Some(q),
            _ => None,
        }
    }

    pub fn add(&self, other: &CoefFn) -> CoefFn {
        CoefFn::sum([self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &CoefFn) -> CoefFn {
        CoefFn::sum([self.clone(), other.neg()])
    }

    pub fn neg(&self) -> CoefFn {
        self.scale(&-Scalar::one())
    }

    pub fn mul(&self, other: &CoefFn) -> CoefFn {
        CoefFn::product([self.clone(), other.clone()])
    }

    pub fn scale(&self, q: &Scalar) -> CoefFn {
        CoefFn::product([CoefFn::Const(q.clone()), self.clone()])
    }

    pub fn recip(&self) -> CoefFn {
        self.pow(&-Scalar::one())
    }

    pub fn powi(&self, n: i64) -> CoefFn {
        self.pow(&int(n))
    }

    /// Canonical sum of canonical terms.
    pub fn sum<I: IntoIterator<Item = CoefFn>>(terms: I) -> CoefFn {
        let mut acc: BTreeMap<CoefFn, Scalar> = BTreeMap::new();
        fn push(acc: &mut BTreeMap<CoefFn, Scalar>, t: CoefFn, mult: &Scalar) {
            match t {
                CoefFn::Sum(ts) => ts.into_iter().for_each(|t| push(acc, t, mult)),
                t => {
                    let (c, rest) = t.split_const();
                    if c.is_zero() {
                        return;
                    }
                    let c = c * mult;
                    if let CoefFn::Sum(ts) = rest {
                        ts.into_iter().for_each(|t| push(acc, t, &c));
                    } else {
                        *acc.entry(rest).or_insert_with(Scalar::zero) += c;
                    }
                }
            }
        }
        let one = Scalar::one();
        for t in terms {
            push(&mut acc, t, &one);
        }
        let mut out: Vec<CoefFn> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(rest, c)| attach_const(c, rest))
            .collect();
        match out.len() {
            0 => CoefFn::zero(),
            1 => out.pop().unwrap(),
            _ => CoefFn::Sum(out),
        }
    }

    /// Canonical product of canonical factors.
    pub fn product<I: IntoIterator<Item = CoefFn>>(factors: I) -> CoefFn {
        let mut c = Scalar::one();
        let mut bases: BTreeMap<CoefFn, Scalar> = BTreeMap::new();
        let mut exp_args: Vec<CoefFn> = Vec::new();
        fn push(
            f: CoefFn,
            c: &mut Scalar,
            bases: &mut BTreeMap<CoefFn, Scalar>,
            exp_args: &mut Vec<CoefFn>,
        ) {
            match f {
                CoefFn::Const(q) => *c *= q,
                CoefFn::Prod(fs) => fs.into_iter().for_each(|f| push(f, c, bases, exp_args)),
                CoefFn::Exp(a) => exp_args.push(*a),
                CoefFn::Pow(b, e) => *bases.entry(*b).or_insert_with(Scalar::zero) += e,
                f => *bases.entry(f).or_insert_with(Scalar::zero) += Scalar::one(),
            }
        }
        for f in factors {
            push(f, &mut c, &mut bases, &mut exp_args);
            if c.is_zero() {
                return CoefFn::zero();
            }
        }
        // sums with an integer power carry their leading coefficient outside
        let sum_keys: Vec<CoefFn> = bases
            .iter()
            .filter(|(b, e)| matches!(b, CoefFn::Sum(_)) && e.is_integer() && !e.is_zero())
            .map(|(b, _)| b.clone())
            .collect();
        for key in sum_keys {
            let (content, monic) = key.sum_content();
            if content.is_one() {
                continue;
            }
            let e = bases.remove(&key).unwrap();
            c *= pow_int(&content, as_small_int(&e).unwrap_or(1)).unwrap_or_else(Scalar::one);
            *bases.entry(monic).or_insert_with(Scalar::zero) += e;
        }
        if !exp_args.is_empty() {
            let arg = CoefFn::sum(exp_args);
            if !arg.is_zero() {
                *bases.entry(CoefFn::Exp(Box::new(arg))).or_insert_with(Scalar::zero) += Scalar::one();
            }
        }
        let mut respread: Vec<CoefFn> = Vec::new();
        let mut expand: Option<(Vec<CoefFn>, Scalar)> = None;
        let mut factors: Vec<CoefFn> = Vec::with_capacity(bases.len() + 1);
        for (b, e) in bases {
            if e.is_zero() {
                continue;
            }
            if e.is_integer() && !e.is_one() && matches!(b, CoefFn::Prod(_) | CoefFn::Const(_) | CoefFn::Exp(_)) {
                respread.push(b.pow(&e));
                continue;
            }
            if let CoefFn::Sum(ts) = &b {
                if expand.is_none() && e.is_integer() && is_positive(&e) {
                    expand = Some((ts.clone(), e));
                    continue;
                }
            }
            factors.push(if e.is_one() { b } else { CoefFn::Pow(Box::new(b), e) });
        }
        let built = if factors.is_empty() {
            CoefFn::Const(c)
        } else if c.is_one() && factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            if !c.is_one() {
                factors.insert(0, CoefFn::Const(c));
            }
            CoefFn::Prod(factors)
        };
        if let Some((ts, e)) = expand {
            // distribute: (t₁+…+tₙ)^e · rest = Σ tᵢ · (t₁+…+tₙ)^(e-1) · rest
            let rest = CoefFn::product(respread.into_iter().chain([built]));
            let sum = CoefFn::Sum(ts.clone());
            let lower = e - Scalar::one();
            return CoefFn::sum(ts.into_iter().map(|t| {
                let mut fs = vec![t, rest.clone()];
                if !lower.is_zero() {
                    fs.push(CoefFn::Pow(Box::new(sum.clone()), lower.clone()));
                }
                CoefFn::product(fs)
            }));
        }
        if !respread.is_empty() {
            respread.push(built);
            return CoefFn::product(respread);
        }
        built
    }

    /// `self^e` in canonical form.
    pub fn pow(&self, e: &Scalar) -> CoefFn {
        if e.is_zero() {
            return CoefFn::one();
        }
        if e.is_one() {
            return self.clone();
        }
        match self {
            CoefFn::Const(q) => {
                if let Some(n) = as_small_int(e) {
                    match pow_int(q, n) {
                        Some(v) => CoefFn::Const(v),
                        None => CoefFn::Pow(Box::new(self.clone()), e.clone()),
                    }
                } else if let Some(v) = exact_pow(q, e) {
                    CoefFn::Const(v)
                } else if q.is_zero() && is_positive(e) {
                    CoefFn::zero()
                } else if q.is_one() {
                    CoefFn::one()
                } else {
                    CoefFn::Pow(Box::new(self.clone()), e.clone())
                }
            }
            CoefFn::Pow(b, e2) => {
                if e.is_integer() || !e2.is_integer() {
                    b.pow(&(e * e2))
                } else {
                    CoefFn::Pow(Box::new(self.clone()), e.clone())
                }
            }
            CoefFn::Exp(a) => CoefFn::exp(a.scale(e)),
            CoefFn::Prod(fs) if e.is_integer() => CoefFn::product(fs.iter().map(|f| f.pow(e))),
            CoefFn::Recip(b) => b.canonicalize().pow(&-e),
            CoefFn::Sum(_) if e.is_integer() => {
                if let (Some(n), Some(p)) = (as_small_int(e), self.poly_view()) {
                    if (0..=MAX_POLY_POWER).contains(&n) {
                        if let Some(pp) = poly_pow(&p, n) {
                            return CoefFn::from_poly(&pp);
                        }
                    }
                }
                CoefFn::product([CoefFn::Pow(Box::new(self.clone()), e.clone())])
            }
            _ => CoefFn::Pow(Box::new(self.clone()), e.clone()),
        }
    }

    pub fn exp(arg: CoefFn) -> CoefFn {
        if arg.is_zero() {
            CoefFn::one()
        } else {
            CoefFn::Exp(Box::new(arg))
        }
    }

    pub fn sin(arg: CoefFn) -> CoefFn {
        if arg.is_zero() {
            CoefFn::zero()
        } else {
            CoefFn::Sin(Box::new(arg))
        }
    }

    pub fn cos(arg: CoefFn) -> CoefFn {
        if arg.is_zero() {
            CoefFn::one()
        } else {
            CoefFn::Cos(Box::new(arg))
        }
    }

    /// `x ↦ ∫_a^x h_ω(t) k_ω(t) f(t) dt`, integrated exactly when the
    /// integrand is a polynomial in `t`.
    pub fn integral(op: &Op, f: CoefFn) -> CoefFn {
        if let CoefFn::Sum(ts) = f {
            return CoefFn::sum(ts.into_iter().map(|t| CoefFn::integral(op, t)));
        }
        if f.is_zero() {
            return CoefFn::zero();
        }
        let (outside, f) = f.split_x_free();
        let integrand = op.check_kernel().mul(&f);
        if let Some(p) = integrand.poly_view() {
            if let Some(closed) = integrate_poly(&p, op.spec().a.clone()) {
                return outside.mul(&closed);
            }
        }
        outside.mul(&CoefFn::Int(op.clone(), Box::new(f)))
    }

    /// Splits a canonical non-sum term into its `x`-free factors and the rest.
    pub fn split_x_free(&self) -> (CoefFn, CoefFn) {
        match self {
            CoefFn::Prod(fs) => {
                let (free, rest): (Vec<_>, Vec<_>) = fs.iter().cloned().partition(|f| !f.depends_on_x());
                (CoefFn::product(free), CoefFn::product(rest))
            }
            f if !f.depends_on_x() => (f.clone(), CoefFn::one()),
            f => (CoefFn::one(), f.clone()),
        }
    }

    /// Rebuilds the tree through the smart constructors. Idempotent.
    pub fn canonicalize(&self) -> CoefFn {
        match self {
            CoefFn::Const(_) | CoefFn::X | CoefFn::Param(_) => self.clone(),
            CoefFn::Sum(ts) => CoefFn::sum(ts.iter().map(CoefFn::canonicalize)),
            CoefFn::Prod(fs) => CoefFn::product(fs.iter().map(CoefFn::canonicalize)),
            CoefFn::Pow(b, e) => b.canonicalize().pow(e),
            CoefFn::Exp(a) => CoefFn::exp(a.canonicalize()),
            CoefFn::Sin(a) => CoefFn::sin(a.canonicalize()),
            CoefFn::Cos(a) => CoefFn::cos(a.canonicalize()),
            CoefFn::Recip(a) => a.canonicalize().recip(),
            CoefFn::Int(op, f) => CoefFn::integral(op, f.canonicalize()),
        }
    }

    /// Splits a canonical term into its rational factor and the rest.
    pub fn split_const(&self) -> (Scalar, CoefFn) {
        match self {
            CoefFn::Const(q) => (q.clone(), CoefFn::one()),
            CoefFn::Prod(fs) => match fs.first() {
                Some(CoefFn::Const(q)) => {
                    let rest = &fs[1..];
                    let rest = if rest.len() == 1 { rest[0].clone() } else { CoefFn::Prod(rest.to_vec()) };
                    (q.clone(), rest)
                }
                _ => (Scalar::one(), self.clone()),
            },
            _ => (Scalar::one(), self.clone()),
        }
    }

    /// Like [`split_const`](Self::split_const), but sums are normalized so
    /// their first term has coefficient one. Used wherever a 𝕜-scalar may be
    /// moved out of a coefficient slot.
    pub fn split_content(&self) -> (Scalar, CoefFn) {
        match self {
            CoefFn::Sum(_) => self.sum_content(),
            _ => self.split_const(),
        }
    }

    fn sum_content(&self) -> (Scalar, CoefFn) {
        let CoefFn::Sum(ts) = self else {
            return (Scalar::one(), self.clone());
        };
        let (c, _) = ts[0].split_const();
        if c.is_one() || c.is_zero() {
            return (Scalar::one(), self.clone());
        }
        let inv = c.recip();
        (c, CoefFn::sum(ts.iter().map(|t| t.scale(&inv))))
    }

    /// Expanded polynomial view (rational exponents allowed), if the
    /// function is a polynomial in `x` with rational coefficients.
    pub fn poly_view(&self) -> Option<Poly> {
        match self {
            CoefFn::Const(q) => {
                let mut p = Poly::new();
                if !q.is_zero() {
                    p.insert(Scalar::zero(), q.clone());
                }
                Some(p)
            }
            CoefFn::X => Some(Poly::from([(Scalar::one(), Scalar::one())])),
            CoefFn::Sum(ts) => {
                let mut acc = Poly::new();
                for t in ts {
                    poly_add_into(&mut acc, &t.poly_view()?);
                }
                (acc.len() <= MAX_POLY_TERMS).then_some(acc)
            }
            CoefFn::Prod(fs) => {
                let mut acc = Poly::from([(Scalar::zero(), Scalar::one())]);
                for f in fs {
                    acc = poly_mul_raw(&acc, &f.poly_view()?)?;
                }
                Some(acc)
            }
            CoefFn::Pow(b, e) => {
                let p = b.poly_view()?;
                if p.len() == 1 {
                    let (pe, pc) = p.iter().next().unwrap();
                    let coef = match as_small_int(e) {
                        Some(n) => pow_int(pc, n)?,
                        None if pc.is_one() => Scalar::one(),
                        None => return None,
                    };
                    return Some(Poly::from([(pe * e, coef)]));
                }
                let n = as_small_int(e)?;
                if !(0..=MAX_POLY_POWER).contains(&n) {
                    return None;
                }
                poly_pow(&p, n)
            }
            _ => None,
        }
    }

    pub fn from_poly(p: &Poly) -> CoefFn {
        CoefFn::sum(
            p.iter()
                .map(|(e, c)| CoefFn::product([CoefFn::Const(c.clone()), CoefFn::X.pow(e)])),
        )
    }

    /// Substitutes a function for `x`. `None` when the tree contains an
    /// integral node (its upper limit cannot be moved symbolically).
    pub fn subst_x(&self, v: &CoefFn) -> Option<CoefFn> {
        Some(match self {
            CoefFn::Const(_) | CoefFn::Param(_) => self.clone(),
            CoefFn::X => v.clone(),
            CoefFn::Sum(ts) => CoefFn::sum(ts.iter().map(|t| t.subst_x(v)).collect::<Option<Vec<_>>>()?),
            CoefFn::Prod(fs) => {
                CoefFn::product(fs.iter().map(|t| t.subst_x(v)).collect::<Option<Vec<_>>>()?)
            }
            CoefFn::Pow(b, e) => b.subst_x(v)?.pow(e),
            CoefFn::Exp(a) => CoefFn::exp(a.subst_x(v)?),
            CoefFn::Sin(a) => CoefFn::sin(a.subst_x(v)?),
            CoefFn::Cos(a) => CoefFn::cos(a.subst_x(v)?),
            CoefFn::Recip(a) => a.subst_x(v)?.recip(),
            CoefFn::Int(..) => return None,
        })
    }

    /// Whether `x` occurs (directly or under an integral).
    pub fn depends_on_x(&self) -> bool {
        match self {
            CoefFn::Const(_) | CoefFn::Param(_) => false,
            CoefFn::X | CoefFn::Int(..) => true,
            CoefFn::Sum(ts) | CoefFn::Prod(ts) => ts.iter().any(CoefFn::depends_on_x),
            CoefFn::Pow(b, _) => b.depends_on_x(),
            CoefFn::Exp(a) | CoefFn::Sin(a) | CoefFn::Cos(a) | CoefFn::Recip(a) => a.depends_on_x(),
        }
    }

    /// Bases raised to negative powers; these must be zero-free on `I`.
    pub fn reciprocal_bases(&self, out: &mut Vec<CoefFn>) {
        match self {
            CoefFn::Const(_) | CoefFn::X | CoefFn::Param(_) => {}
            CoefFn::Sum(ts) | CoefFn::Prod(ts) => ts.iter().for_each(|t| t.reciprocal_bases(out)),
            CoefFn::Pow(b, e) => {
                if e.is_negative() {
                    out.push((**b).clone());
                }
                b.reciprocal_bases(out);
            }
            CoefFn::Recip(b) => {
                out.push((**b).clone());
                b.reciprocal_bases(out);
            }
            CoefFn::Exp(a) | CoefFn::Sin(a) | CoefFn::Cos(a) => a.reciprocal_bases(out),
            CoefFn::Int(_, f) => f.reciprocal_bases(out),
        }
    }

    /// Operators referenced by integral nodes.
    pub fn collect_ops(&self, out: &mut Vec<Op>) {
        match self {
            CoefFn::Const(_) | CoefFn::X | CoefFn::Param(_) => {}
            CoefFn::Sum(ts) | CoefFn::Prod(ts) => ts.iter().for_each(|t| t.collect_ops(out)),
            CoefFn::Pow(b, _) => b.collect_ops(out),
            CoefFn::Exp(a) | CoefFn::Sin(a) | CoefFn::Cos(a) | CoefFn::Recip(a) => a.collect_ops(out),
            CoefFn::Int(op, f) => {
                if !out.contains(op) {
                    out.push(op.clone());
                }
                f.collect_ops(out);
            }
        }
    }

    pub fn collect_params(&self, out: &mut Vec<Arc<str>>) {
        match self {
            CoefFn::Const(_) | CoefFn::X => {}
            CoefFn::Param(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            CoefFn::Sum(ts) | CoefFn::Prod(ts) => ts.iter().for_each(|t| t.collect_params(out)),
            CoefFn::Pow(b, _) => b.collect_params(out),
            CoefFn::Exp(a) | CoefFn::Sin(a) | CoefFn::Cos(a) | CoefFn::Recip(a) => a.collect_params(out),
            CoefFn::Int(op, f) => {
                op.spec().k.collect_params(out);
                op.spec().h.collect_params(out);
                f.collect_params(out);
            }
        }
    }

    /// Pointwise value at `x`. Integral nodes are evaluated by adaptive
    /// Gauss–Kronrod quadrature to the absolute tolerance of `env`.
    pub fn eval(&self, x: f64, env: &EvalEnv) -> Result<f64, EvalError> {
        let v = match self {
            CoefFn::Const(q) => scalar_to_f64(q),
            CoefFn::X => x,
            CoefFn::Param(p) => *env.params.get(p).ok_or_else(|| EvalError::UnknownParam(p.to_string()))?,
            CoefFn::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval(x, env)?;
                }
                acc
            }
            CoefFn::Prod(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval(x, env)?;
                }
                acc
            }
            CoefFn::Pow(b, e) => real_pow(b.eval(x, env)?, e)?,
            CoefFn::Exp(a) => a.eval(x, env)?.exp(),
            CoefFn::Sin(a) => a.eval(x, env)?.sin(),
            CoefFn::Cos(a) => a.eval(x, env)?.cos(),
            CoefFn::Recip(a) => {
                let v = a.eval(x, env)?;
                if v == 0.0 {
                    return Err(EvalError::Domain(format!("division by zero at x = {x}")));
                }
                1.0 / v
            }
            CoefFn::Int(op, f) => {
                let kernel = op.check_kernel();
                let a = op.a_f64();
                quad::integrate(|t| Ok(kernel.eval(t, env)? * f.eval(t, env)?), a, x, env.tol, env.max_panels)?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Domain(format!("non-finite value at x = {x}")))
        }
    }
}

/// `b^e` over the reals; fractional powers need a non-negative base.
pub(crate) fn real_pow(b: f64, e: &Scalar) -> Result<f64, EvalError> {
    let v = match as_small_int(e) {
        Some(n) => {
            if b == 0.0 && n < 0 {
                return Err(EvalError::Domain("zero raised to a negative power".into()));
            }
            if let Ok(n) = i32::try_from(n) {
                b.powi(n)
            } else {
                b.powf(n as f64)
            }
        }
        None => {
            if b < 0.0 {
                return Err(EvalError::Domain(format!("fractional power of negative base {b}")));
            }
            if b == 0.0 && e.is_negative() {
                return Err(EvalError::Domain("zero raised to a negative power".into()));
            }
            b.powf(scalar_to_f64(e))
        }
    };
    Ok(v)
}

fn attach_const(c: Scalar, rest: CoefFn) -> CoefFn {
    if rest.is_one() {
        return CoefFn::Const(c);
    }
    if c.is_one() {
        return rest;
    }
    match rest {
        CoefFn::Prod(mut fs) => {
            fs.insert(0, CoefFn::Const(c));
            CoefFn::Prod(fs)
        }
        rest => CoefFn::Prod(vec![CoefFn::Const(c), rest]),
    }
}

fn poly_add_into(acc: &mut Poly, p: &Poly) {
    for (e, c) in p {
        let slot = acc.entry(e.clone()).or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            acc.remove(e);
        }
    }
}

fn poly_mul_raw(p: &Poly, q: &Poly) -> Option<Poly> {
    let mut acc = Poly::new();
    for (e1, c1) in p {
        for (e2, c2) in q {
            poly_add_into(&mut acc, &Poly::from([(e1 + e2, c1 * c2)]));
        }
    }
    (acc.len() <= MAX_POLY_TERMS).then_some(acc)
}

fn poly_pow(p: &Poly, n: i64) -> Option<Poly> {
    let mut acc = Poly::from([(Scalar::zero(), Scalar::one())]);
    for _ in 0..n {
        acc = poly_mul_raw(&acc, p)?;
    }
    Some(acc)
}

/// `∫_a^x p(t) dt` in closed form when every term integrates to something
/// exactly representable.
fn integrate_poly(p: &Poly, a: Scalar) -> Option<CoefFn> {
    let mut terms = Vec::with_capacity(2 * p.len());
    for (e, c) in p {
        let e1 = e + Scalar::one();
        if e1.is_zero() {
            return None;
        }
        let c1 = c / &e1;
        terms.push(CoefFn::product([CoefFn::Const(c1.clone()), CoefFn::X.pow(&e1)]));
        if a.is_zero() {
            if !is_positive(&e1) {
                return None;
            }
            continue;
        }
        let at_a = match as_small_int(&e1) {
            Some(n) => CoefFn::Const(pow_int(&a, n)?),
            None if is_positive(&a) => CoefFn::Const(a.clone()).pow(&e1),
            None => return None,
        };
        terms.push(at_a.scale(&-c1));
    }
    Some(CoefFn::sum(terms))
}

/// Semantic equality in `A`: structural equality after canonicalization, or
/// agreement within relative tolerance `1e-9` at seven fixed-seed interior
/// sample points.
pub fn coef_eq(f: &CoefFn, g: &CoefFn, interval: &Interval, env: &EvalEnv) -> Result<bool, EvalError> {
    let f = f.canonicalize();
    let g = g.canonicalize();
    if f == g {
        return Ok(true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0ef);
    for x in interval.sample_points(7, &mut rng) {
        let a = f.eval(x, env)?;
        let b = g.eval(x, env)?;
        let scale = a.abs().max(b.abs());
        if scale < 1e-12 {
            continue;
        }
        if (a - b).abs() > 1e-9 * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::scalar::ratio;
    use crate::coef::VolterraOpSpec;

    fn x() -> CoefFn {
        CoefFn::X
    }
    fn c(n: i64) -> CoefFn {
        CoefFn::integer(n)
    }
    fn iv() -> Interval {
        Interval::open(0.0, 3.0)
    }

    #[test]
    fn eval_examples() {
        let env = EvalEnv::default();
        let e = CoefFn::exp(x().neg());
        assert_eq!(e.eval(0.0, &env).unwrap(), 1.0);
        let xx = CoefFn::Prod(vec![x(), x()]);
        assert_eq!(xx.eval(3.0, &env).unwrap(), 9.0);
        // raw integral node, bypassing the closed-form simplifier
        let op = Op::new(VolterraOpSpec::new("P", c(0).as_const().unwrap().clone(), c(1), c(1)));
        let node = CoefFn::Int(op, Box::new(c(1)));
        assert!((node.eval(2.0, &env).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eq_examples() {
        let env = EvalEnv::default();
        let xx = CoefFn::Prod(vec![x(), x()]);
        let x2 = CoefFn::Pow(Box::new(x()), int(2));
        assert!(coef_eq(&xx, &x2, &iv(), &env).unwrap());
        assert!(!coef_eq(&x(), &CoefFn::Sum(vec![x(), c(1)]), &iv(), &env).unwrap());
        let e0 = CoefFn::Exp(Box::new(CoefFn::Sum(vec![x(), CoefFn::Prod(vec![c(-1), x()])])));
        assert!(coef_eq(&e0, &c(1), &iv(), &env).unwrap());
        assert_eq!(e0.canonicalize(), c(1));
    }

    #[test]
    fn products_merge_bases_and_exponentials() {
        let e = CoefFn::exp(x().neg()).mul(&CoefFn::exp(x().neg()));
        assert_eq!(e, CoefFn::exp(x().scale(&int(-2))));
        assert_eq!(CoefFn::exp(x().neg()).recip(), CoefFn::exp(x()));
        let half = x().pow(&ratio(1, 2));
        assert_eq!(half.mul(&half), x());
        assert_eq!(x().mul(&x().recip()), c(1));
        let k = x().mul(&CoefFn::exp(x()));
        assert_eq!(k.mul(&k.recip()), c(1));
    }

    #[test]
    fn polynomials_expand() {
        let p = CoefFn::sum([x(), c(1)]);
        let sq = p.mul(&p);
        assert_eq!(sq, CoefFn::sum([c(1), x().scale(&int(2)), x().powi(2)]));
        assert_eq!(p.powi(2), sq);
        let q = x().mul(&CoefFn::sum([x(), c(-1)]));
        assert_eq!(q, CoefFn::sum([x().powi(2), x().neg()]));
    }

    #[test]
    fn sums_collect_like_terms() {
        let s = CoefFn::sum([x().scale(&int(2)), x().scale(&int(3)), c(0)]);
        assert_eq!(s, x().scale(&int(5)));
        assert_eq!(CoefFn::sum([x(), x().neg()]), c(0));
        let e = CoefFn::exp(x());
        let two_e = CoefFn::sum([e.clone(), c(1)]).scale(&int(2));
        assert_eq!(two_e, CoefFn::sum([e.scale(&int(2)), c(2)]));
    }

    #[test]
    fn content_split() {
        let e = CoefFn::exp(x());
        let s = CoefFn::sum([e.scale(&int(2)), c(4)]);
        let (q, rest) = s.split_content();
        assert_eq!(q * int(1), int(4));
        assert_eq!(rest.scale(&int(4)), s);
        let (q, rest) = x().scale(&ratio(3, 2)).split_content();
        assert_eq!(q, ratio(3, 2));
        assert_eq!(rest, x());
    }

    #[test]
    fn polynomial_integrals_are_closed_form() {
        let op = Op::new(VolterraOpSpec::new("P", int(0), c(1), c(1)));
        assert_eq!(CoefFn::integral(&op, c(1)), x());
        let op1 = Op::new(VolterraOpSpec::new("Q", int(1), x(), c(1)));
        // ∫_1^x t·t dt = (x^3 - 1)/3
        let got = CoefFn::integral(&op1, x());
        assert_eq!(got, CoefFn::sum([x().powi(3).scale(&ratio(1, 3)), CoefFn::Const(ratio(-1, 3))]));
        let sing = Op::new(VolterraOpSpec::new("S", int(0), c(1), x().pow(&ratio(-1, 2))));
        assert_eq!(CoefFn::integral(&sing, c(1)), x().pow(&ratio(1, 2)).scale(&int(2)));
        // log-type antiderivative stays opaque
        let log = Op::new(VolterraOpSpec::new("L", int(1), c(1), x().recip()));
        assert!(matches!(CoefFn::integral(&log, c(1)), CoefFn::Int(..)));
    }

    #[test]
    fn fractional_power_of_negative_is_domain_error() {
        let env = EvalEnv::default();
        let f = x().pow(&ratio(1, 2));
        assert!(matches!(f.eval(-1.0, &env), Err(EvalError::Domain(_))));
        let g = x().recip();
        assert!(g.eval(0.0, &env).is_err());
    }

    #[test]
    fn canonicalize_is_idempotent_on_pool() {
        let pool = vec![
            CoefFn::Prod(vec![x(), CoefFn::Sum(vec![x(), c(2)]), CoefFn::Recip(Box::new(x()))]),
            CoefFn::Pow(Box::new(CoefFn::Sum(vec![x(), c(1)])), int(3)),
            CoefFn::Exp(Box::new(CoefFn::Prod(vec![c(2), x()]))),
            CoefFn::Sin(Box::new(CoefFn::Sum(vec![x(), c(0)]))),
            CoefFn::Pow(Box::new(CoefFn::Pow(Box::new(x()), int(2))), ratio(1, 2)),
        ];
        let env = EvalEnv::default();
        for f in pool {
            let once = f.canonicalize();
            assert_eq!(once.canonicalize(), once);
            assert!(coef_eq(&f, &once, &iv(), &env).unwrap());
            assert!(coef_eq(&once, &f, &iv(), &env).unwrap());
            assert!(coef_eq(&f, &f, &iv(), &env).unwrap());
        }
    }

    #[test]
    fn even_root_of_square_is_not_merged() {
        let f = x().powi(2).pow(&ratio(1, 2));
        assert!(matches!(f, CoefFn::Pow(..)));
        assert_eq!(f.eval(-2.0, &EvalEnv::default()).unwrap(), 2.0);
    }
}
