//! Deflation of multiple roots of analytic systems, with an ε-free
//! numerical rank, Bergman-norm bounds and α/γ-theory certificates.

pub mod bergman;
pub mod certificates;
pub mod cli;
pub mod deflation;
pub mod error;
pub mod matrix;
pub mod rank;
pub mod series;
pub mod system;

pub use bergman::{BallContext, NormBackend};
pub use error::{Error, Result};
pub use matrix::SeriesMatrix;
pub use series::{Exponent, Scalar, TruncatedSeries};
pub use system::AnalyticSystem;
