//! Closed-form outage probability and ergodic capacity of ZF and ZF-SIC
//! receivers over rank-1 Rician fading with residual transceiver
//! impairments and imperfect channel estimation, plus a Monte Carlo link
//! simulator to validate them.

pub mod quad;
pub mod specfun;
pub mod channel;
pub mod metrics;
pub mod stage;
pub mod simulator;
