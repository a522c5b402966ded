//! Radial quadrature, interpolation and the angular-reduced exchange kernels.

mod grid;
mod kernel;
mod oracle;
pub mod quadrature;

pub use grid::{GridMapping, RadialEval, RadialFunction, RadialGrid};
pub use kernel::{
    exchange_transform, exchange_transform_with, kernel_pair, legendre_q0, legendre_q1,
    ExchangeOperator, ExchangeQuadrature,
};
pub use oracle::{
    angular_reduction_oracle, angular_reduction_oracle_with, oracle_battery, OracleCase, OracleResolution,
};
