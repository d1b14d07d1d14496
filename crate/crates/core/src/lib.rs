//! Permutation-symmetric spin ensembles simulated block by block in the
//! Dicke basis.

// `!(x <= limit)` is used on purpose so NaN lands on the error path
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod basis;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod linalg;
pub mod measurement;
pub mod noise;
pub mod operator;
pub mod oracle;
pub mod squeezing;
pub mod state;
pub mod vqa;

pub use basis::{degeneracy, BlockLedger};
pub use error::{Error, Result};
pub use gates::{apply_circuit, apply_gate, Circuit, GateKind, GateSpec};
pub use operator::{Axis, CollectiveOperator};
pub use state::CollectiveState;
