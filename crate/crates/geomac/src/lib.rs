//! Geometry of medium access in multi-hop wireless networks.
//!
//! Success probabilities and reception areas for slotted ALOHA and for
//! regular-grid transmitter patterns under the path-loss model
//! `gain = F / distance^alpha`, with zero noise and unit transmit power.
//!
//! Modules:
//! - [`spatial`]: lattice and Poisson transmitter sets
//! - [`propagation`]: gain, interference, SIR and its gradient, fading moments
//! - [`reception`]: reception-area contour tracing and maximum range
//! - [`aloha`]: the ALOHA success-probability series, Monte Carlo, optimization
//! - [`asymptotics`]: large-threshold lattice sums and large-attenuation limits
//! - [`multihop`]: slot-based relaying simulation

pub mod aloha;
pub mod asymptotics;
mod error;
pub mod multihop;
pub mod propagation;
pub mod reception;
pub mod spatial;
mod special;

pub use error::{Error, Result};
pub use propagation::{ChannelModel, Fading, Vector2};
pub use spatial::{Extent, GridKind, GridSpec, Point2, PointSet};
