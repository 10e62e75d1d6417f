//! Seeded random states for verification batteries.
//!
//! States are drawn as `G G^dagger / Tr(G G^dagger)` with `G` a 4 x rank
//! matrix of i.i.d. standard complex Gaussians, so every sample is a valid
//! density matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix};
use crate::states::{density_to_bloch, BlochTwoQubit, DensityMatrix};

pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_density_with_rank<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, rank.max(1), |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        num_complex::Complex64::new(re, im)
    });
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityMatrix::new(m / linalg::real(tr)).expect("square")
}

/// Full-rank two-qubit state.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    random_density_with_rank(rng, 4, 4)
}

/// Two-qubit state with rank chosen uniformly in 1..=4, so pure and
/// low-rank edge cases show up regularly.
pub fn random_mixed_rank_density<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let rank = rng.random_range(1..=4);
    random_density_with_rank(rng, 4, rank)
}

pub fn random_bloch<R: Rng + ?Sized>(rng: &mut R) -> BlochTwoQubit {
    density_to_bloch(&random_mixed_rank_density(rng)).expect("Hermitian by construction")
}

/// Uniform draw from the open interval (lo, hi).
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let v = rng.random_range(lo..hi);
        if v > lo {
            return v;
        }
    }
}

/// Random non-degenerate triangle in [-1, 1]^2 and a point strictly inside it,
/// returned as `(a, b, c, d)`.
pub fn random_triangle_with_interior<R: Rng + ?Sized>(rng: &mut R) -> ([f64; 2], [f64; 2], [f64; 2], [f64; 2]) {
    loop {
        let mut pt = || -> [f64; 2] { [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)] };
        let (a, b, c) = (pt(), pt(), pt());
        let area = ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs() / 2.0;
        if area < 1e-3 {
            continue;
        }
        // uniform barycentric weights via normalized exponentials
        let w: [f64; 3] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
        let total: f64 = w.iter().sum();
        let w = w.map(|v| v / total);
        if w.iter().any(|v| *v < 1e-6) {
            continue;
        }
        let d = [
            w[0] * a[0] + w[1] * b[0] + w[2] * c[0],
            w[0] * a[1] + w[1] * b[1] + w[2] * c[1],
        ];
        return (a, b, c, d);
    }
}
