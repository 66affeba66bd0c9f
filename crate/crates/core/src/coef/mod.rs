//! The coefficient algebra `A` (real functions of one variable on an
//! interval) and the polynomial algebra `A[Y]` over it, together with the
//! action of separable Volterra operators on `A`.

mod env;
mod func;
mod interval;
mod op;
mod poly;
mod scalar;

pub use env::EvalEnv;
pub use func::{coef_eq, CoefFn, Poly};
pub use interval::Interval;
pub use op::{apply_rho, apply_rho_check, check_zero_free, twist, Op, VolterraOpSpec};
pub use poly::{aug_split, poly_mul, CoefPoly, Term, VarMonomial};
pub use scalar::{int, parse_decimal, ratio, scalar_from_f64, scalar_to_f64, Scalar};
pub(crate) use func::real_pow;

