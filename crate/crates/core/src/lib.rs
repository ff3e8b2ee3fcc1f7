//! Bounds on probabilities of causation obtained by merging the marginals
//! `P(X, Z)` and `P(Y, Z)` of two trials that share a binary outcome.
//!
//! The building blocks, bottom up:
//!
//! * [`trial`]: count tables and validated binary marginals.
//! * [`scm`]: the one-parameter family of `W -> Z` response-function models.
//! * [`polytope`]: the sixteen `(X, Y) -> Z` functions and the polytope of
//!   joint models consistent with both marginals.
//! * [`bounds`]: linear programs over that polytope and closed forms for
//!   degenerate `P(Y, Z)`.
//! * [`info`]: information decompositions and falsification tests.
//! * [`maxent`]: the entropy-maximizing joint model and evidence ranking.
//! * [`oracle`]: brute-force verifiers for small instances.
//! * [`sweep`]: parameter grids over the second marginal.

pub mod bounds;
pub mod error;
pub mod info;
mod linalg;
pub mod maxent;
pub mod oracle;
pub mod polytope;
pub mod scm;
pub mod simplex;
pub mod sweep;
pub mod trial;

pub use error::{Error, Result};
pub use polytope::{
    build_polytope, build_x_only_polytope, is_member, PolytopeSpec, ResponseWeights16,
};
pub use scm::{LambdaInterval, PnsBounds, ResponseWeights4, UnivariateFn};
pub use trial::{BinaryMarginal, CountTable, TrialFormat, TrivariateTable};
