//! CUR matrix decompositions and approximations.
//!
//! * [`linalg`], [`norm`], [`random`], [`io`]: dense linear algebra, norms,
//!   seeded random ensembles and matrix files.
//! * [`cur`]: exact decompositions, middle-matrix variants and the
//!   equivalent characterizations of exactness.
//! * [`sampling`]: row and column sampling distributions.
//! * [`perturb`]: perturbation bounds for CUR approximations of noisy
//!   low-rank matrices.
//! * [`rankest`]: rank estimation from a sampled noisy submatrix.

pub mod cur;
pub mod error;
pub mod io;
mod lapack;
pub mod linalg;
pub mod norm;
pub mod perturb;
pub mod random;
pub mod rankest;
pub mod sampling;

pub use cur::{CurFactors, IndexList, MiddleKind};
pub use error::{CurError, Result};
pub use linalg::{Matrix, SvdFactors};
pub use norm::NormKind;
pub use random::RngStream;
