//! Matrix elements of diagonal tensor operators in product and character representations.
//!
//! Every operator here multiplies slotwise, so each matrix element is a finite
//! product of one-dimensional integrals times a certified infinite product.

mod engine;
mod excess;
mod vector;

pub use engine::{Engine, PReport, SlotSeq, VnVerdict, DEFAULT_DEPTH};
pub use excess::{excess_elem, excess_power, excess_semigroup_check, excess_tail, pi_q_eval, PiQ, Rep, SemigroupCheck};
pub use vector::{DiagOp, LazyVec, RepValue, VecElem};
