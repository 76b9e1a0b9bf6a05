//! Perron-Frobenius spectral data of quantum channels and of ergodic quantum
//! processes driven by a finite cycle, an i.i.d. shift or a circle rotation.
#![no_std]

extern crate alloc;

pub mod error;
pub mod linalg;

pub use error::{Error, Result};
pub mod channel;
pub mod random;

pub use channel::KrausChannel;
pub use linalg::{CMat, C64};
pub mod pf;
pub mod base;
pub mod global;
pub mod instances;
pub mod periodicity;
pub mod trajectory;
