//! Cournot competition with cost-reducing R&D collaborations between firms
//! of heterogeneous productivity.
//!
//! Given a network of bilateral R&D links and each firm's productivity, the
//! crate solves for equilibrium efforts, outputs, profits and welfare, checks
//! pairwise stability of networks and locates stability thresholds.

pub mod equilibrium;
pub mod error;
pub mod graph;
pub mod model;
pub mod rng;
pub mod stability;

pub use equilibrium::{equilibrium, phi_lower_bound, Equilibrium};
pub use error::{DomainError, Error, Result, Violation};
pub use graph::Network;
pub use model::{FirmType, Instance, InstanceFile, MarketParams, ProductivityProfile, TwoTypeConfig};
pub use stability::{is_pairwise_stable, StabilityReport, STABILITY_TOL};
