//! Fixtures shared by the benchmarks.

use std::f64::consts::FRAC_PI_4;

use eqw_core::{
    coin_matrix, run_trajectory, CoinFamily, CoinParams, KernelTable, RunConfig, TrajectoryRecord,
    WalkerState,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn k_coin() -> CoinParams {
    CoinParams::new(CoinFamily::K, FRAC_PI_4)
}

/// A walker advanced `steps` times with jumps drawn at index `q`.
pub fn evolved_state(q: f64, steps: usize, seed: u64) -> WalkerState {
    let params = k_coin();
    let coin = coin_matrix(&params);
    let table = KernelTable::new(q, steps.max(1)).expect("valid q");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = WalkerState::initial(&params);
    for t in 1..=steps {
        let jump = table.sample(t, &mut rng);
        state.step(&coin, jump).expect("jump within horizon");
    }
    state
}

/// One trajectory with its full distribution history.
pub fn recorded_trajectory(q: f64, t_max: usize) -> TrajectoryRecord {
    let mut config = RunConfig::new(q, k_coin()).t_max(t_max).seed(1);
    config.keep_distributions = true;
    run_trajectory(&config, 0).expect("valid configuration")
}
