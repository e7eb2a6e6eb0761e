//! Hybrid RSSI + direction-of-arrival location fingerprinting.
//!
//! The crate covers the whole pipeline of a simulated fingerprinting study:
//!
//! * [`geometry`]: points, bearings and wrap-safe angle arithmetic.
//! * [`radio`]: log-distance path loss with shadowing, DoA noise, presets.
//! * [`rng`]: counter-style substreams so results do not depend on scheduling.
//! * [`fingerprint`]: scenario layout, offline database construction and CSV persistence.
//! * [`matching`]: NN, KNN, WKNN and the hybrid RSSI+DoA matcher.
//! * [`crlb`]: likelihood, score, Fisher information and Cramer-Rao bounds.
//! * [`experiments`]: the Monte Carlo harness, error statistics, sweeps and named presets.

// `!(x >= lo)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crlb;
pub mod error;
pub mod experiments;
pub mod fingerprint;
pub mod geometry;
pub mod matching;
pub mod radio;
pub mod rng;

pub use error::{Error, Result};
pub use fingerprint::{Area, Fingerprint, FingerprintDatabase, Scenario};
pub use geometry::{Angle, Point};
pub use matching::{MatchConfig, Method};
pub use radio::{DoaModel, RadioModel};
pub use rng::RngHandle;

/// Run `f` on a dedicated rayon pool with `workers` threads.
///
/// Every parallel routine in the crate derives its randomness from
/// per-item substreams, so the result is the same for any worker count.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
