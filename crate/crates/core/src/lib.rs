pub mod config;
pub mod decoherence;
pub mod deutsch_wallace;
pub mod error;
pub mod hilbert;
pub mod branching;
pub mod linalg;
pub mod mcqueen_vaidman;
pub mod scenario;
pub mod sebens_carroll;

pub use config::Tolerances;
pub use error::{Error, Result};
