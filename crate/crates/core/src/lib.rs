//! Fixed points of self-maps of a product of two simplices, found on
//! refining rational grids and certified by their residual, and a zero-sum
//! game solver built on the excess-gain map whose fixed points are the
//! equilibria.
//!
//! ```
//! use fixgame::{SolverConfig, ZeroSumGame};
//!
//! let game = ZeroSumGame::matching_pennies();
//! let result = game.solve(&SolverConfig::default()).unwrap();
//! assert!(result.certified);
//! assert!(result.value.abs() < 1e-9);
//! ```

pub mod engine;
pub mod game;
pub mod oracle;
mod par;
pub mod simplex;
pub mod solve;

pub use engine::{
    find_approx_fixed_point, probe_sequential_uniqueness, refine_to_fixed_point, residual,
    ApproxFixedPoint, ConstantMap, EngineError, FnMap, IdentityMap, MapError, RefinementTrace,
    SearchParams, SelfMap, UniquenessReport, UniquenessRow, Verdict,
};
pub use game::{Duality, Excess, GameError, GammaMap, ZeroSumGame};
pub use oracle::{closed_form_2x2, grid_minimax, ClosedForm, OracleError, ValueBracket};
pub use simplex::{
    distance, grid_points, local_grid, make_mixed, MixedStrategy, Norm, ProductPoint,
    SimplexError,
};
pub use solve::{EquilibriumResult, NotCertifiedReason, SolveError, SolverConfig};
