//! Exact symbolic reconstruction of the HKT structures on the nilpotent
//! groups and reduction of the quaternionic Monge-Ampere equation.

pub mod forms;
pub mod frame;
pub mod hypercomplex;
pub mod poly;
pub mod reduce;

pub use forms::{expand_hkt_square, formal_symbols, FormExpansion, SymbolTable};
pub use frame::{build_frame, CoordinateFrame, GroupId, StructureConstants};
pub use hypercomplex::HypercomplexAction;
pub use poly::{Gaussian, Monomial, Poly, Rational};
pub use reduce::{reduce_invariant, Invariance, ReducedPolynomial};
