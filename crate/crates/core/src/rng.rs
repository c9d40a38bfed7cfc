use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Independent stream for trial `index` under `master_seed`.
///
/// ChaCha's stream id selects a disjoint keystream, so a trial's draws do not
/// depend on which other trials ran or in what order.
pub fn trial_rng(master_seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
