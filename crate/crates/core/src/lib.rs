//! Construction, analysis, routing and simulation of lattice graphs: the
//! Cayley graphs of `Z^n / M Z^n` generated by `±e_i`, which include tori,
//! twisted tori and the cubic crystal networks.

pub mod error;
pub mod intmat;
pub mod lattice;
pub mod metrics;
pub mod routing;
pub mod simulator;
pub mod symmetry;

pub use error::{Error, Result};
pub use intmat::{IntMatrix, IntVector};
pub use lattice::{common_lift, direct_sum, make_topology, LatticeGraph, TopologyKind};
pub use routing::{RoutingRecord, TieBreak};
