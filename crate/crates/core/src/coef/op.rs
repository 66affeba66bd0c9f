use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num::Zero;

use super::env::EvalEnv;
use super::func::CoefFn;
use super::interval::Interval;
use super::scalar::{scalar_from_f64, scalar_to_f64, Scalar};
use crate::error::{Error, EvalError};

/// A separable Volterra operator `f ↦ k(x) ∫_a^x h(t) f(t) dt`.
///
/// Both kernel factors are written in the single variable of [`CoefFn`]; `h`
/// is read as a function of the integration variable.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraOpSpec {
    pub name: Arc<str>,
    pub a: Scalar,
    pub k: CoefFn,
    pub h: CoefFn,
}

impl VolterraOpSpec {
    pub fn new(name: impl Into<Arc<str>>, a: Scalar, k: CoefFn, h: CoefFn) -> Self {
        VolterraOpSpec { name: name.into(), a, k: k.canonicalize(), h: h.canonicalize() }
    }

    /// A kernel that depends on `t` only.
    pub fn is_phantom(&self) -> bool {
        !self.k.depends_on_x()
    }
}

struct OpData {
    spec: VolterraOpSpec,
    a: f64,
    check_kernel: CoefFn,
    twist: Option<(CoefFn, CoefFn)>,
}

/// Shared handle to an operator. Equality, ordering and hashing go by name;
/// one problem never declares two operators with the same name.
#[derive(Clone)]
pub struct Op(Arc<OpData>);

impl Op {
    pub fn new(spec: VolterraOpSpec) -> Op {
        let check_kernel = spec.h.mul(&spec.k);
        let twist = compute_twist(&spec);
        let a = scalar_to_f64(&spec.a);
        Op(Arc::new(OpData { spec, a, check_kernel, twist }))
    }

    pub fn name(&self) -> &str {
        &self.0.spec.name
    }

    pub fn spec(&self) -> &VolterraOpSpec {
        &self.0.spec
    }

    pub fn a_f64(&self) -> f64 {
        self.0.a
    }

    /// `h·k`, the phantom kernel of the conjugated operator `ρ̌`.
    pub fn check_kernel(&self) -> &CoefFn {
        &self.0.check_kernel
    }

    /// The twist `k(x)/k(a)`.
    pub fn twist(&self) -> Result<&CoefFn, Error> {
        self.0.twist.as_ref().map(|(t, _)| t).ok_or_else(|| self.missing_twist())
    }

    /// The inverse twist `k(a)/k(x)`.
    pub fn twist_inv(&self) -> Result<&CoefFn, Error> {
        self.0.twist.as_ref().map(|(_, t)| t).ok_or_else(|| self.missing_twist())
    }

    pub fn has_twist(&self) -> bool {
        self.0.twist.is_some()
    }

    fn missing_twist(&self) -> Error {
        Error::MissingTwist { op: self.name().to_string(), a: self.0.spec.a.to_string() }
    }
}

fn compute_twist(spec: &VolterraOpSpec) -> Option<(CoefFn, CoefFn)> {
    let k_at_a = match spec.k.subst_x(&CoefFn::Const(spec.a.clone())) {
        Some(v) => v,
        None => {
            let v = spec.k.eval(scalar_to_f64(&spec.a), &EvalEnv::default()).ok()?;
            CoefFn::Const(scalar_from_f64(v)?)
        }
    };
    match &k_at_a {
        CoefFn::Const(q) if q.is_zero() => return None,
        CoefFn::Const(_) => {}
        other => match other.eval(0.0, &EvalEnv::default()) {
            Ok(v) if v == 0.0 || !v.is_finite() => return None,
            Err(EvalError::Domain(_)) => return None,
            _ => {}
        },
    }
    let inv_const = k_at_a.recip();
    let twist = spec.k.mul(&inv_const);
    let twist_inv = spec.k.recip().mul(&k_at_a);
    Some((twist, twist_inv))
}

impl PartialEq for Op {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl Eq for Op {}

impl PartialOrd for Op {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Op {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name().cmp(other.name())
    }
}

impl Hash for Op {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name().hash(state);
    }
}

impl fmt::Debug for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The twist `𝔞_ω = k_ω(x)/k_ω(a)`; fails when `k_ω(a) = 0`.
pub fn twist(op: &Op) -> Result<CoefFn, Error> {
    op.twist().cloned()
}

/// `ρ_ω(f) = k(x) ∫_a^x h(t) f(t) dt`, stored as `k · ρ̌_ω(f / k)`.
pub fn apply_rho(op: &Op, f: &CoefFn) -> CoefFn {
    let k = &op.spec().k;
    k.mul(&CoefFn::integral(op, f.mul(&k.recip())))
}

/// `ρ̌_ω(f) = ∫_a^x h(t) k(t) f(t) dt`.
pub fn apply_rho_check(op: &Op, f: &CoefFn) -> CoefFn {
    CoefFn::integral(op, f.clone())
}

/// Certifies that `f` keeps a constant sign at 64 interior points.
pub fn check_zero_free(f: &CoefFn, interval: &Interval, env: &EvalEnv) -> Result<(), Error> {
    let mut sign = 0.0_f64;
    for x in interval.even_points(64) {
        let v = f.eval(x, env)?;
        if v == 0.0 || (sign != 0.0 && v.signum() != sign) {
            return Err(Error::Invalid(format!("function is not zero-free on the interval (changes sign near x = {x})")));
        }
        sign = v.signum();
    }
    Ok(())
}
