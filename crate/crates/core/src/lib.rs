//! The relaxation functional r(A,B) on complex square matrices, its sharp
//! bounds and extremal witnesses, a numerical extremizer that re-discovers the
//! bound constants, and relaxation-rate audits for GKLS generators.

pub mod cli;
pub mod error;
pub mod gkls;
pub mod linalg;
pub mod optimizer;
pub mod rfunc;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
