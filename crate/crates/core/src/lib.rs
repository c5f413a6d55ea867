//! Decision-diagram based Benders decomposition.
//!
//! The crate is split into:
//!
//! * [`dd`]: layered weighted decision diagrams, path optimization and cut refinement.
//! * [`rect`]: desk-scale checks of rectangular decompositions.
//! * [`lp`]: a dense simplex kernel that returns certified outcomes.
//! * [`benders`]: the DD-driven Benders loop, the cut pool and the cost-tuple reference.
//! * [`ucp`]: the stochastic unit-commitment model and its diagram compilers.
//! * [`oracle`]: brute-force reference solvers.

pub mod benders;
pub mod dd;
pub mod lp;
pub mod oracle;
pub mod rect;
mod sense;
pub mod ucp;

pub use sense::{Cmp, Sense};
