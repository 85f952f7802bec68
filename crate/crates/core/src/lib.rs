//! Exact classical simulation of quantum counting on complete bipartite graphs.
//!
//! The crate builds the coined quantum-walk search operator `U = S C R` on the
//! arc space of `K_{N0,N1}`, its 8-dimensional invariant-subspace model with a
//! closed-form spectral decomposition, and the exact outcome distribution of
//! phase estimation. On top of that sit the counting procedures (single part,
//! both parts through part-restricted oracles, and the plain Grover baseline)
//! together with exact evaluation of their error-bound success probabilities.
//!
//! ```
//! use qwcount_core::{counting, walk::BipartiteInstance};
//!
//! let inst = BipartiteInstance::new(4, 3, [1, 3], [1]).unwrap();
//! let joint = counting::full_count_exact(&inst, 6).unwrap();
//! let bound = joint.bound;
//! assert!(joint.mass_within(inst.k_total() as f64, bound) >= 0.65);
//! assert_eq!(joint.oracle_queries, 2 * 64 - 2);
//! ```

pub mod analysis;
pub mod counting;
pub mod error;
pub mod linalg;
pub mod phase;
pub mod reduced;
pub mod walk;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
