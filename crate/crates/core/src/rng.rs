//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the 64-bit user seed, with
//! the stream id derived from a list of indices (trial number, grid point,
//! role). Streams for different index lists are independent, so results do
//! not depend on the order in which trials are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::Matrix;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, indices: &[u64]) -> Rng {
    let id = indices.iter().fold(0x6a09e667f3bcc908u64, |acc, i| {
        splitmix64(acc ^ splitmix64(*i))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn normal_matrix(rows: usize, cols: usize, scale: f64, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| scale * normal(rng))
}
