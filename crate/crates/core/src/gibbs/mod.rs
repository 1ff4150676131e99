//! Brownian-Gibbs sampler for the discrete tilted ensemble: exact heat-bath
//! site updates, Metropolis block bridge proposals, free-endpoint moves, the
//! chain driver with checkpointing, and a quadrature oracle for tiny grids.

mod chain;
mod exact;
mod moves;

pub use chain::{
    run_chain, run_chain_from, run_chains, sweep, BurnIn, ChainConfig, CheckpointPolicy, MoveStats, Observable,
    SampleSet, SweepSchedule,
};
pub use exact::{exact_small_grid_marginal, SmallGridMarginal};
pub use moves::{free_endpoint_move, heat_bath_point, heat_bath_sweep, resample_block, BlockSpec, Side};
pub(crate) use moves::heat_bath_value;
