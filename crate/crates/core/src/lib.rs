//! Certification of prepare-and-measure experiments: overlap intervals from
//! a single deviation parameter, robust qubit self-testing bounds, and
//! rank-1 POVM certification.

pub mod alignment;
pub mod catalog;
pub mod error;
pub mod extensions;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod noise;
pub mod overlap;
pub mod quantum;
pub mod report;
pub mod scenario;
pub mod selftest;

pub use error::{Error, Result};
pub use overlap::{certify, certify_with_epsilon, OverlapCertificate};
pub use quantum::{BlochVector, Povm, QuantumState};
pub use scenario::{deviation_epsilon, Epsilon, ExperimentalRealization, PmScenario, StatTable};
pub use selftest::{self_test, SelfTestBounds};
