//! Spectral analysis of Jacobi matrices whose entries are periodically
//! modulated, at the soft edge `F(0) = ±Id` of the monodromy.

pub mod error;
pub mod format;
pub mod lattice;
pub mod mat2;
pub mod modulator;
pub mod oracle;
pub mod periodic;
pub mod poly;
pub mod resolvent;
pub mod roots;
pub mod scalar;
pub mod turan;
pub mod validate;

pub use error::{Error, Result};
pub use lattice::{EigvecRun, GrowthLaw, JacobiSpec, Lattice, SpecKind};
pub use mat2::{ordered_product, Mat2};
pub use oracle::SpectralMeasureApprox;
pub use modulator::{CriticalPair, GapInterval, HPolynomial, NamedPair, Regime, RegimeReport};
pub use periodic::{Modulation, OrthoPolyTable, PeriodicSeq};
pub use poly::Poly;
pub use scalar::{Ring, Scalar};

pub type Mat2F64 = Mat2<f64>;
pub type PolyF64 = Poly<f64>;
pub type PeriodicSeqF64 = PeriodicSeq<f64>;
pub type ModulationF64 = Modulation<f64>;
pub type ExactPoly = Poly<num_rational::BigRational>;
pub type ExactModulation = Modulation<num_rational::BigRational>;
