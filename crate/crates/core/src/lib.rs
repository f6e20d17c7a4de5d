// `!(x > y)` guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod dispersion;
pub mod dynamics;
pub mod error;
pub mod interp;
pub mod io;
pub mod profiles;
pub mod quad;
pub mod response;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
