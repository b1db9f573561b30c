//! Black-box reconstruction of depth-3 arithmetic circuits over finite fields.

pub mod error;
pub mod field;
pub mod interp;
pub mod linalg;
pub mod mlrec;
pub mod oracle;
pub mod pit;
pub mod poly;
pub mod rng;
pub mod syssolve;
pub mod upoly;
pub mod varred;
pub mod smlrec;
pub mod waring;

pub use error::{Error, Result};
