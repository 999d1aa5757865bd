//! Graph kernels built on random walks over product graphs.

pub mod bench;
pub mod error;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod semiring;
pub mod transducer;
pub mod verify;

pub use error::{Error, Result};
