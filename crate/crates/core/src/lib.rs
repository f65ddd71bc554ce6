//! Recoverable supports for `l1` sparse recovery.
//!
//! A pair `(I, s)` of an index set and a sign pattern is *recoverable* for a
//! matrix `A` when every vector supported on `I` with signs `s` is the unique
//! solution of Basis Pursuit, `min ||y||_1 s.t. A y = A x`. This holds
//! exactly when `A_I` has full column rank and some `w` satisfies
//! `A_I^T w = s` with `||A_{I^c}^T w||_inf < 1`.
//!
//! The crate decides that condition ([`certify`]), builds large recoverable
//! supports incrementally ([`grow`]), counts them exactly and compares the
//! counts with closed forms ([`census`]), and runs Monte Carlo studies
//! ([`experiments`]).
//!
//! ```
//! use recsup::{certify, ensembles, Sign, SupportPair, NumericConfig};
//!
//! let a = ensembles::mercedes_benz(3).unwrap();
//! let pair = SupportPair::new(vec![0, 1], vec![Sign::Plus, Sign::Minus]).unwrap();
//! let report = certify::certificate_value(&a, &pair, &NumericConfig::default()).unwrap();
//! assert!(report.decision.is_recoverable());
//! ```

pub mod census;
pub mod certify;
pub mod config;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod grow;
pub mod lpcore;
pub mod matrixkit;
pub mod rng;
pub mod support;

pub use config::NumericConfig;
pub use error::{Error, Result};
pub use matrixkit::DenseMatrix;
pub use support::{Sign, SupportPair};
