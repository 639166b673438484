//! Truncated full Fock space toolkit: free shifts, NC kernels, row dilations,
//! Douglas factorization and the lattice of left multipliers.
//!
//! Every routine is generic over a real scalar `T` (`f32` or `f64`); complex
//! data uses `nalgebra::Complex<T>`. The `*64` aliases at the root fix `T = f64`.

pub mod dilation;
pub mod error;
pub mod fock;
pub mod lattice;
pub mod linalg;
pub mod multops;
pub mod ncpoly;
pub mod rkhs;
pub mod scalar;
pub mod subspace;
pub mod words;

pub use error::{NcError, Result};
pub use fock::{MultMatrix, Truncation};
pub use ncpoly::{MatPoly, RowTuple};
pub use scalar::{CMat, CVec, Cx, Real};
pub use subspace::{NormedSubspace, SubspaceRep};
pub use words::Word;

pub type MatPoly64 = MatPoly<f64>;
pub type MatPoly32 = MatPoly<f32>;
pub type RowTuple64 = RowTuple<f64>;
pub type RowTuple32 = RowTuple<f32>;
pub type MultMatrix64 = MultMatrix<f64>;
pub type SubspaceRep64 = SubspaceRep<f64>;
pub type NormedSubspace64 = NormedSubspace<f64>;
pub type RangeSpace64 = rkhs::RangeSpace<f64>;
pub type LatticeElement64 = lattice::LatticeElement<f64>;
pub type CMat64 = CMat<f64>;
