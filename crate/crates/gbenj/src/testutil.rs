//! Seeded random fields for unit tests.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::spectral::{Grid, SpectralField};

/// Random Hermitian-symmetric spectrum with envelope `exp(-decay |k|)`.
pub fn random_spectrum(grid: &Grid, seed: u64, decay: f64) -> SpectralField {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = grid.n_points();
    let mut hat = SpectralField::zeros(grid);
    for i in 1..n / 2 {
        let k = grid.wavenumbers()[i];
        let env = (-decay * k.abs()).exp();
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        let c = Complex64::new(re * env, im * env);
        hat.coeffs_mut()[i] = c;
        hat.coeffs_mut()[n - i] = c.conj();
    }
    hat
}
