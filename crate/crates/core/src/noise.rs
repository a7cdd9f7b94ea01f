use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Standard normal draw fixed by `(seed, floor(t))`.
///
/// Each simulated day gets its own ChaCha stream, so the value is identical
/// for every evaluation within that day and independent of evaluation order.
pub fn daily_gaussian(seed: u64, t: f64) -> f64 {
    let day = t.floor() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(day as u64);
    StandardNormal.sample(&mut rng)
}
