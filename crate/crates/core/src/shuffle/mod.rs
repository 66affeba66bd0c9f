//! The free matching twisted Rota-Baxter algebra `Sha(A, B)`: tensor words,
//! the free operators `P_{F,ω}` and their twisted variants, the shuffle
//! product, and the linearizer from the free operated algebra.

mod algebra;
mod linearize;
mod word;

pub use algebra::{pf_apply, pf_twisted, shuffle};
pub use linearize::{linearize, to_operated, DEFAULT_DEPTH_CAP};
pub use word::{TensorExpr, TensorWord};
