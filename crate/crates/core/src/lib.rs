//! Soft MIMO detection by expectation propagation inside an LDPC-coded turbo
//! receiver, with the baselines it is compared against and a seeded
//! Monte-Carlo BER harness.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod constellation;
pub mod epcore;
pub mod error;
pub mod ldpc;
pub mod linalg;
pub mod oracle;
pub mod sim;
pub mod turbo;
pub mod verify;

pub use error::{Error, Result};
