//! Seeded random streams.
//!
//! Every randomized routine draws from a ChaCha8 stream selected by
//! `(seed, stream)`. ChaCha is counter based, so substream `k` is available
//! without generating streams `0..k`, and serial and parallel sweeps see the
//! same numbers for the same trial index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type TrialRng = ChaCha8Rng;

pub fn substream(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point on the unit sphere of `R^dim` (`dim >= 1`).
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Gaussian coordinates on a random nonempty support.
///
/// Each coordinate is kept with probability `keep`; sparse supports make
/// boundary strata and level ties reachable.
pub fn sparse_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize, keep: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                if rng.random_bool(keep) { g } else { 0.0 }
            })
            .collect();
        if v.iter().any(|x| x.abs() > 1e-6) {
            return v;
        }
    }
}
