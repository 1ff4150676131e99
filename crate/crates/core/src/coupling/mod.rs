//! Order-preserving couplings of ensembles: the shared-uniform heat-bath
//! grand coupling, stopping domains, the reverse coupling experiment and
//! pinned ensembles.

mod experiments;
mod pair;
mod stopping;

pub use experiments::{
    certify_coupling, coupled_pinned_vs_free, estimate_pinned_exceedance, pinned_ensemble_sample,
    reverse_coupling_experiment, reverse_coupling_trials, ExceedanceEstimate, ReverseCouplingOutcome,
    ReverseCouplingParams,
};
pub use pair::{dominated, first_domination_failure, monotone_coupled_sweep, CoupledPair};
pub use stopping::{detect_stopping_domain, StoppingDomain};
