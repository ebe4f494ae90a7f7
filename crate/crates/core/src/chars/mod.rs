//! Characters of the algebra of a stabilizing sequence and product states.

mod character;
mod point;
mod state;

pub use character::{char_eval, char_eval_with, char_sup_lower, CharEvalCfg, CharValue, Character};
pub use point::{tail_product, PointSeq, TailRule, TailVerdict};
pub use state::{psd_check, state_eval, strict_ext_check, CosineNonState, PdCandidate, ProductState, StrictExt};
