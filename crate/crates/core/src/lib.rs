//! Interlacing-families toolkit.
//!
//! Finite, desk-scale machinery around real stable polynomials and mixed
//! characteristic polynomials, together with their combinatorial consequences:
//!
//! - [`linalg`]: dense Hermitian matrices, spectra, square roots, Kronecker products
//! - [`realpoly`]: univariate real polynomials, real-rootedness and largest real root
//! - [`stable`]: determinantal and multi-affine polynomials, stability probes,
//!   the barrier function and zero-free orthant checks
//! - [`mixed`]: mixed characteristic polynomials, expected characteristic
//!   polynomials of random rank-one sums, and greedy conditional-expectation
//!   derandomization
//! - [`partition`]: Weaver partitions, projector paving and Anderson paving
//! - [`frames`]: Riesz and frame bounds and the frame splitting results
//! - [`ramanujan`]: signed graphs, 2-lifts, matching polynomials and bipartite
//!   Ramanujan families
//! - [`io`]: the JSON/text file formats shared with the command line front end

pub mod error;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod mixed;
pub mod partition;
pub mod ramanujan;
pub mod realpoly;
pub mod stable;

pub use error::{Error, Result};
pub use linalg::{DiagonalProjector, HermitianMatrix};
pub use realpoly::RealPoly;

pub use num_complex::Complex64;
