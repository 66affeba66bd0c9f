//! The free operated algebra over `A[Y]` in two presentations: bracketed
//! words ([`OperatedExpr`]) and vertex-edge decorated rooted trees
//! ([`TreeExpr`]), related by [`word_to_tree`] and [`tree_to_word`].

mod expr;
mod tree;

pub(crate) use expr::split_sum;
pub use expr::{OperatedExpr, OperatedMonomial, Operator};
pub use tree::{tree_to_word, word_to_tree, DecoratedTree, TreeExpr};
