//! Exact semilinear geometry over the rationals: sign-vector arrangements
//! of linear functionals, the Boolean algebras of their cells, open-set
//! lattices, and adjoint maps between coordinate spaces.


pub mod adjoint;
pub mod arrangement;
pub mod fm;
pub mod functional;
pub mod op;
pub mod set;
pub mod vlterm;


use thiserror::Error;


pub use adjoint::{eps_embed, rel_adjoints, rho_join, rho_meet, split_plus_minus};
pub use arrangement::{cell_cap_from_env, Arrangement, Sign, SignVec, DEFAULT_CELL_CAP};
pub use functional::{Direction, LinFunctional};
pub use op::{op_closure, OpClosure, OpLattice, OpTerm, CLOSURE_CELL_CAP};
pub use set::{SemilinearSet, SetJson};
pub use vlterm::VlTerm;


#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemilinearError {
    #[error("arrangement needs {needed} cells, above the cap of {cap}")]
    CellCapExceeded { cap: usize, needed: usize },
    #[error("sets are built over different families")]
    FamilyMismatch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("the set is not contained in the union of the two open half-spaces")]
    NotCovered,
    #[error("a cell of the set meets both open half-spaces")]
    CellStraddles,
    #[error("sign vector {0} describes an empty cell")]
    InfeasibleCell(String),
    #[error("family of {0} functionals is too large")]
    FamilyTooLarge(usize),
    #[error("coordinates are not a subset of the target coordinates")]
    CoordsNotSubset,
    #[error("{0} is not a multiple of a family member")]
    NotInFamily(String),
    #[error("set is not a union of open stars")]
    NotOpen,
}
