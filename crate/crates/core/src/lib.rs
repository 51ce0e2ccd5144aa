//! Asymptotic Dirichlet-to-Neumann map of a disk filled with nearly touching
//! perfectly conducting disks: resistor network, reference medium and
//! boundary resonance terms, with a spectral reference solver.

pub mod asymptotics;
pub mod error;
pub mod gen;
pub mod geometry;
pub mod network;
pub mod oracle;
pub mod scalar;
pub mod specfun;

pub use asymptotics::{Asymptotics, EnergyBreakdown, FourierPotential, Regime};
pub use error::{Error, Result};
pub use geometry::{analyze_packing, GeometryAnalysis, Inclusion, Packing};
pub use network::{ConductivityMode, Network, NetworkOptions};
pub use scalar::Real;

pub type Packing64 = Packing<f64>;
pub type Inclusion64 = Inclusion<f64>;
pub type GeometryAnalysis64 = GeometryAnalysis<f64>;
pub type Network64 = Network<f64>;
pub type FourierPotential64 = FourierPotential<f64>;
pub type EnergyBreakdown64 = EnergyBreakdown<f64>;
pub type Asymptotics64 = Asymptotics<f64>;
