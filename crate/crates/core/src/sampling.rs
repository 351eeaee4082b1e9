//! Seeded low-discrepancy sample points in coordinate boxes.
//!
//! Points come from a Halton sequence with a Cranley–Patterson rotation drawn
//! from the seed. Bounded coordinates keep a 10% margin on each side;
//! unbounded coordinates are sampled in `[−1, 1]` and half-bounded ones in a
//! window of width 2 next to the finite end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Domain, Interval};
use crate::scalar::Real;

pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_SEED: u64 = 7;
pub const MARGIN: f64 = 0.1;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

fn window(iv: &Interval<f64>) -> (f64, f64) {
    match (iv.lo.is_finite(), iv.hi.is_finite()) {
        (true, true) => {
            let w = iv.hi - iv.lo;
            (iv.lo + MARGIN * w, iv.hi - MARGIN * w)
        }
        (true, false) => (iv.lo + 2.0 * MARGIN, iv.lo + 2.0 * (1.0 - MARGIN)),
        (false, true) => (iv.hi - 2.0 * (1.0 - MARGIN), iv.hi - 2.0 * MARGIN),
        (false, false) => (-1.0, 1.0),
    }
}

/// Deterministic stream of points in a domain box.
#[derive(Debug, Clone)]
pub struct Sampler {
    windows: Vec<(f64, f64)>,
    shifts: Vec<f64>,
    index: u64,
}

impl Sampler {
    pub fn new<T: Real>(domain: &Domain<T>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let windows: Vec<(f64, f64)> = domain
            .intervals()
            .iter()
            .map(|iv| window(&Interval::new(iv.lo.to_f64_lossy(), iv.hi.to_f64_lossy())))
            .collect();
        let shifts = windows.iter().map(|_| rng.gen::<f64>()).collect();
        Sampler {
            windows,
            shifts,
            index: 1,
        }
    }

    pub fn next_point<T: Real>(&mut self) -> Vec<T> {
        let i = self.index;
        self.index += 1;
        self.windows
            .iter()
            .zip(&self.shifts)
            .enumerate()
            .map(|(k, (&(lo, hi), &s))| {
                let base = PRIMES[k % PRIMES.len()];
                let u = (radical_inverse(i, base) + s).fract();
                T::lit(lo + u * (hi - lo))
            })
            .collect()
    }
}

/// `count` points in `domain`.
pub fn sample_points<T: Real>(domain: &Domain<T>, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut s = Sampler::new(domain, seed);
    (0..count).map(|_| s.next_point()).collect()
}

/// The first `count` points of the stream accepted by `keep`, drawing at most
/// `max_draws` candidates.
pub fn sample_points_where<T: Real>(
    domain: &Domain<T>,
    count: usize,
    seed: u64,
    max_draws: usize,
    mut keep: impl FnMut(&[T]) -> bool,
) -> Vec<Vec<T>> {
    let mut s = Sampler::new(domain, seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..max_draws {
        if out.len() == count {
            break;
        }
        let p: Vec<T> = s.next_point();
        if keep(&p) {
            out.push(p);
        }
    }
    out
}
