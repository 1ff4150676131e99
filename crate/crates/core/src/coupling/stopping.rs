use serde::{Deserialize, Serialize};

use crate::model::EnsembleState;

/// First interior grid index from the left and from the right where the
/// bottom line reaches `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingDomain {
    pub tau_ell: Option<usize>,
    pub tau_r: Option<usize>,
    pub u: f64,
    pub found: bool,
}

pub fn detect_stopping_domain(state: &EnsembleState, u: f64) -> StoppingDomain {
    let bottom = state.line(state.n_lines() - 1);
    let m = state.grid().steps();
    let interior = 1..m;
    let tau_ell = interior.clone().find(|&j| bottom[j] >= u);
    let tau_r = interior.rev().find(|&j| bottom[j] >= u);
    let found = matches!((tau_ell, tau_r), (Some(a), Some(b)) if a < b);
    StoppingDomain {
        tau_ell,
        tau_r,
        u,
        found,
    }
}
