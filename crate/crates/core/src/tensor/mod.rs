//! Normal-form calculus for elementary tensors with stabilizing tails.

mod elem;
mod eta;
mod serial;
mod stab;
mod window;

pub use elem::{ElemTensor, TensorElem, NF_TOL};
pub use eta::{cross_norm_upper, cross_norm_upper_with, eta_act, eta_minus_identity, fin_seq, FinSeq, NORM_REFINEMENT};
pub use serial::tensor_from_json;
pub use stab::{LevelRule, Slot, StabSeq, Tail};
pub use window::{regroup_check, window_contract, window_project, FiniteTensor};

use crate::error::Result;

pub fn mul(a: &TensorElem, b: &TensorElem) -> Result<TensorElem> {
    a.mul(b)
}

pub fn adjoint(a: &TensorElem) -> TensorElem {
    a.adjoint()
}

pub fn equivalent(x: &ElemTensor, y: &ElemTensor) -> bool {
    x.equivalent(y)
}
