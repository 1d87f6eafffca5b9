//! Detect latent common causes with directed bivariate causal scorers.
//!
//! The observed pair `(A, B)` is embedded onto a one-dimensional latent `T`
//! with Isomap. A directed scorer (IGCI or KCDC) is then run on the links
//! `A - T` and `B - T`. If the data came from `A -> B` or `B -> A`, the latent
//! is essentially the cause itself and one of the two links carries no
//! directional signal; under a latent common cause both links do. The
//! normalized difference of the two links' score gaps, bootstrapped over
//! subsamples, is classified against a threshold table.

pub mod can;
pub mod data;
pub mod detector;
pub mod error;
pub mod kernel;
pub mod manifold;
pub mod rng;
pub mod scorers;
pub mod stats;
pub mod synth;

pub use data::{BivariateDataset, CausalVerdict, VerdictTag};
pub use error::{Error, Result};
pub use rng::RngSeed;
