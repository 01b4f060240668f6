use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{task_seed, RAND_NAME};
use crate::error::{Error, Result};
use crate::series::{Panel, TimeSeries};

/// The noise covariate: `T` draws with replacement from the pooled values
/// of every covariate in the panel (an existing noise covariate excluded),
/// on the target's index.
pub fn make_noise_covariate(panel: &Panel, seed: u64) -> Result<TimeSeries> {
    let pooled: Vec<f64> = panel
        .covariates()
        .iter()
        .filter(|c| c.name() != RAND_NAME)
        .flat_map(|c| c.values().iter().copied())
        .collect();
    if pooled.is_empty() {
        return Err(Error::Input("no covariates to resample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, RAND_NAME, 0, 0));
    let values = (0..panel.len()).map(|_| pooled[rng.gen_range(0..pooled.len())]).collect();
    TimeSeries::new(RAND_NAME, panel.target().index().to_vec(), values)
}
