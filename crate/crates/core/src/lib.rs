//! Reduced-order modelling of parameterized nonlinear problems: POD bases,
//! discrete empirical interpolation, and greedy neural expansions of the
//! reduced nonlinearity.
//!
//! Everything is generic over the scalar type through [`Real`]; the aliases
//! below fix it to `f64` (and `f32` with a `32` suffix).

pub mod numkit;
pub mod scalar;
pub mod mlp;
pub mod pod;
pub mod deim;
pub mod neim;
pub mod testbeds;

pub use scalar::Real;

pub type Matrix = numkit::DenseMatrix<f64>;
pub type Snapshots = pod::SnapshotSet<f64>;
pub type Pod = pod::PodBasis<f64>;
pub type Deim = deim::DeimModel<f64>;
pub type Network = mlp::Mlp<f64>;
pub type NetworkConfig = mlp::MlpConfig<f64>;
pub type Neim = neim::NeimModel<f64>;
pub type NeimSettings = neim::NeimConfig<f64>;

pub type Matrix32 = numkit::DenseMatrix<f32>;
pub type Snapshots32 = pod::SnapshotSet<f32>;
pub type Pod32 = pod::PodBasis<f32>;
pub type Deim32 = deim::DeimModel<f32>;
pub type Network32 = mlp::Mlp<f32>;
pub type NetworkConfig32 = mlp::MlpConfig<f32>;
pub type Neim32 = neim::NeimModel<f32>;
pub type NeimSettings32 = neim::NeimConfig<f32>;
