//! Translation-invariant evolution of real-rooted polynomials.

pub mod cubic;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod evolution;
mod integrate;
pub mod oracle;
pub mod poly;
pub mod reducer;

pub use cubic::{CubicInvariants, EllipticConstants, WeierstrassFlow};
pub use dynamics::{DynamicsOptions, DynamicsState, PotentialSpec};
pub use error::{Error, Result};
pub use evolution::{EvolutionOptions, EvolutionState, EvolutionTrace};
pub use poly::{DepressedRootSet, InvariantSet, NormalizedPolynomial, RootSet};
pub use reducer::{ReductionStage, ReductionTrace, SolveOptions};
