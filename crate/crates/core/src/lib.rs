//! Simulator for the generalized elephant quantum walk.
//!
//! A one-dimensional coined quantum walk in which the step at time `t` has a
//! length `t'` drawn from a q-exponential distribution on `1..=t`. `q = 1/2`
//! recovers the standard nearest-neighbour walk; `q → ∞` gives uniformly
//! distributed jumps and `σ² ∝ t³` spreading.
//!
//! - [`kernel`]: the jump-length distribution and its sampler.
//! - [`walk`]: coins, the walker state and the evolution step.
//! - [`observables`]: moments, localization, divergences, coin entanglement
//!   and the diffusion-exponent fit.
//! - [`ensemble`]: seeded trajectories, ensemble averages and parameter sweeps.
//! - [`netmap`]: the network of sites linked by the walker's jumps.

pub mod ensemble;
pub mod error;
pub mod kernel;
pub mod netmap;
pub mod observables;
pub mod walk;

pub use ensemble::{
    jsd_series, run_ensemble, run_trajectory, sweep, AveragingMode, Diagnostics, EnsembleResult,
    RunConfig, SeriesStat, StepSample, SweepGrid, SweepRow, TrajectoryRecord,
};
pub use error::{Error, Result};
pub use kernel::{kernel_weights, KernelTable, MemoryKernel};
pub use netmap::{
    build_graph, degree_stats, graph_timeseries, structural_stats, DegreeStats, GraphSnapshot,
    StructuralStats, WalkGraph,
};
pub use observables::{
    distribution, entanglement_entropy, fit_alpha, ipr, jsd, kld, occupancy, reduced_density,
    rqd_profile, second_moment, shannon_entropy, FitWindow, LogBase, ReducedDensityMatrix,
    SpatialDistribution, VarianceSeries,
};
pub use walk::{coin_matrix, CoinFamily, CoinMatrix, CoinParams, WalkerState};
