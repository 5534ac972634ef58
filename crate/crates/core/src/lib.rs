//! Exact-arithmetic deformation theory over truncated parameter algebras.
//!
//! Everything is computed over the rationals, with the parameter algebra
//! `Q[h_1..h_k]/m^(N+1)` made explicit: Maurer-Cartan elements and gauge
//! orbits of a finite-dimensional DG Lie algebra, obstruction classes and
//! order-by-order lifting, the reduced Deligne groupoid and the Deligne
//! 2-groupoid, and pushforwards along L-infinity morphisms. No floating
//! point anywhere; every identity asserted by the library is exact.

pub mod deligne;
pub mod dgla;
pub mod error;
pub mod fixtures;
pub mod graded;
pub mod io;
pub mod linalg;
pub mod linf;
pub mod mc_gauge;
pub mod morphism;
pub mod nilpotent;
pub mod poly;
pub mod rat;
pub mod report;
pub mod sample;
pub mod trunc;
pub mod two_grpd;

pub use dgla::{DGLieAlgebra, QuantumType, RawDGLA, ValidationReport};
pub use error::Error;
pub use graded::GradedSpace;
pub use linalg::QMatrix;
pub use mc_gauge::{GaugeElement, MCElement, MCPath, TwistedComplex};
pub use morphism::DGLAMorphism;
pub use nilpotent::{Element, NilpotentDGLA};
pub use rat::Rat;
pub use trunc::{SeriesElement, TruncationContext};
