//! Myopic item choice and trajectory rollout for each regime.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief_engine::{init_beliefs_with, BeliefState};
use crate::error::{Result, SimError};
use crate::product_model::{Kernels, ModelParams, UserGroundTruth};
use crate::regime::Regime;

/// Certainty equivalents within this of the best count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub regime: Regime,
    /// Consumed items in order.
    pub items: Vec<usize>,
    /// Realized value of each consumed item.
    pub realized: Vec<f64>,
    /// Certainty equivalent of each item at the moment it was chosen.
    pub choice_ce: Vec<f64>,
    pub user_id: u64,
    pub population_id: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// The remaining item with the highest certainty equivalent, and that value.
/// Exactly one uniform draw is taken from `tie_rng` per call, tie or not, so
/// streams shared across regimes stay aligned period by period.
pub fn choose_next_with_ce<R: Rng + ?Sized>(
    state: &BeliefState,
    gamma: f64,
    tie_rng: &mut R,
) -> Result<(usize, f64)> {
    if state.is_exhausted() {
        return Err(SimError::State("no remaining items to choose from".into()));
    }
    let u: f64 = tie_rng.random();
    let ce: Vec<f64> = (0..state.remaining.len())
        .map(|p| state.ce_at(p, gamma))
        .collect();
    let best = ce.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..ce.len())
        .filter(|&p| ce[p] >= best - TIE_TOLERANCE)
        .collect();
    let pick = tied[((u * tied.len() as f64) as usize).min(tied.len() - 1)];
    Ok((state.remaining[pick], ce[pick]))
}

pub fn choose_next<R: Rng + ?Sized>(
    state: &BeliefState,
    gamma: f64,
    tie_rng: &mut R,
) -> Result<usize> {
    choose_next_with_ce(state, gamma, tie_rng).map(|(item, _)| item)
}

pub fn run_trajectory(
    user: &UserGroundTruth,
    common_values: &DVector<f64>,
    params: &ModelParams,
    regime: Regime,
    seed: u64,
) -> Result<Trajectory> {
    let kernels = Kernels::new(params)?;
    run_trajectory_with(&kernels, user, common_values, regime, seed, 0, 0)
}

/// Rolls out `horizon` choices. `tie_seed` seeds the tie-break stream; pass
/// the same seed for every regime of a user to keep comparisons paired.
pub fn run_trajectory_with(
    kernels: &Kernels,
    user: &UserGroundTruth,
    common_values: &DVector<f64>,
    regime: Regime,
    tie_seed: u64,
    user_id: u64,
    population_id: u64,
) -> Result<Trajectory> {
    let params = &kernels.params;
    let horizon = params.horizon;
    let mut state = init_beliefs_with(kernels, user, common_values, regime)?;
    let mut tie_rng = ChaCha8Rng::seed_from_u64(tie_seed);

    let mut items = Vec::with_capacity(horizon);
    let mut realized = Vec::with_capacity(horizon);
    let mut choice_ce = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let (item, ce) = choose_next_with_ce(&state, params.gamma, &mut tie_rng)?;
        let x = user.realized_values[item];
        // Under recommendation the belief mean already carries βV, so
        // conditioning it on x is the same as conditioning V_i on x - βv_n.
        state.condition(item, x)?;
        items.push(item);
        realized.push(x);
        choice_ce.push(ce);
    }
    Ok(Trajectory {
        regime,
        items,
        realized,
        choice_ce,
        user_id,
        population_id,
    })
}
