//! Finite Fourier transform and sinc-kernel operator on L²[-1,1] written as
//! functions of the confluent Heun operator `T = (1-x²)∂² - 2x∂ - c²x²`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod commands;
mod ddmath;
pub mod error;
pub mod io;
pub mod legendre;
pub mod linalg;
pub mod nystrom;
pub mod prolate;
pub mod transforms;
pub mod ucalc;

pub use error::{Error, Result};
