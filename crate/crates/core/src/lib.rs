//! Finite distributive lattices, consonance kernels, exact semilinear
//! geometry over the rationals, and a stage-by-stage construction of
//! surjective homomorphisms from lattices of semilinear open sets onto
//! completely normal finite lattices.

pub mod bits;
pub mod boolenv;
pub mod distlat;
pub mod extend;
pub mod forge;
pub mod gen;
pub mod kernels;
pub mod poset;
pub mod semilinear;

pub use bits::BitSet;
pub use distlat::{FinDistLattice, LatElem, LatHom, LatticeError};
pub use poset::{FinPoset, IsotoneMap, PointedPoset, PosetError};
