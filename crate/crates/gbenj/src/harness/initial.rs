//! Initial-data synthesis for the configured families.

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::harness::config::{InitialData, RunConfig};
use crate::harness::HarnessError;
use crate::solver::petviashvili_solitary_wave;
use crate::spectral::{to_real, Grid, RealField, SpectralField};

/// Build the configured initial data on `grid`, returning the field and the
/// word position of the synthesis RNG (0 for deterministic families).
/// Deterministic for a fixed seed.
pub fn build_initial(cfg: &RunConfig, grid: &Grid) -> Result<(RealField, u128), HarnessError> {
    match &cfg.initial {
        InitialData::GaussianSpectrum { sigma0, s, amplitude } => {
            Ok(gaussian_spectrum(grid, *sigma0, *s, *amplitude, cfg.seed))
        }
        InitialData::Sech { amplitude, width } => {
            let (a, w) = (*amplitude, *width);
            Ok((RealField::from_fn(grid, |x| a / (x / w).cosh()), 0))
        }
        InitialData::Soliton { c, tol, max_iter } => {
            let wave = petviashvili_solitary_wave(&cfg.model, *c, grid, *tol, *max_iter)?;
            Ok((wave.profile, 0))
        }
        InitialData::File { path } => Ok((load_field(grid, path)?, 0)),
    }
}

/// Mean-zero random real field whose spectrum has complex Gaussian
/// coefficients under the envelope `<k>^{-s} exp(-sigma0 |k|)`, rescaled so
/// the sup norm equals `amplitude`. Its radius of analyticity is `sigma0`.
pub fn gaussian_spectrum(
    grid: &Grid,
    sigma0: f64,
    s: f64,
    amplitude: f64,
    seed: u64,
) -> (RealField, u128) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = grid.n_points();
    let mut hat = SpectralField::zeros(grid);
    for i in 1..n / 2 {
        let k = grid.wavenumbers()[i];
        let env = (1.0 + k.abs()).powf(-s) * (-sigma0 * k.abs()).exp();
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let c = Complex64::new(re, im) * env;
        hat.coeffs_mut()[i] = c;
        hat.coeffs_mut()[n - i] = c.conj();
    }
    let mut u = to_real(&hat).expect("synthesised spectrum is Hermitian");
    let peak = u.linf_norm();
    if peak > 0.0 {
        let scale = amplitude / peak;
        for v in u.values_mut() {
            *v *= scale;
        }
    }
    (u, rng.get_word_pos())
}

fn load_field(grid: &Grid, path: &str) -> Result<RealField, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("initial.path '{path}': {e}")))?;
    let mut values = Vec::with_capacity(grid.n_points());
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| {
                HarnessError::Config(format!(
                    "initial.path '{path}' line {}: '{tok}' is not a number",
                    lineno + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(HarnessError::Config(format!(
                    "initial.path '{path}' line {}: non-finite sample",
                    lineno + 1
                )));
            }
            values.push(v);
        }
    }
    if values.len() != grid.n_points() {
        return Err(HarnessError::Config(format!(
            "initial.path '{path}': expected exactly {} samples, found {}",
            grid.n_points(),
            values.len()
        )));
    }
    RealField::from_values(grid, values).map_err(|e| HarnessError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_spectrum_is_deterministic_and_normalised() {
        let grid = Grid::new(128, 40.0).unwrap();
        let (a, pos_a) = gaussian_spectrum(&grid, 1.0, 0.0, 1.5, 42);
        let (b, pos_b) = gaussian_spectrum(&grid, 1.0, 0.0, 1.5, 42);
        assert_eq!(a.values(), b.values());
        assert_eq!(pos_a, pos_b);
        assert!((a.linf_norm() - 1.5).abs() < 1e-14);
        assert!(a.mean().abs() < 1e-14);

        let (c, _) = gaussian_spectrum(&grid, 1.0, 0.0, 1.5, 43);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn file_data_must_match_grid_exactly() {
        let grid = Grid::new(16, 4.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u0.txt");

        let good: String = (0..16).map(|i| format!("{}.0\n", i % 3)).collect();
        std::fs::write(&path, &good).unwrap();
        assert!(load_field(&grid, path.to_str().unwrap()).is_ok());

        std::fs::write(&path, "1.0\n2.0\n").unwrap();
        assert!(load_field(&grid, path.to_str().unwrap()).is_err());

        let bad: String = format!("{}nan\n", "0.5\n".repeat(15));
        std::fs::write(&path, &bad).unwrap();
        assert!(load_field(&grid, path.to_str().unwrap()).is_err());
    }
}
