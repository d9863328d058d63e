//! Periodic grid, forward/inverse spectral transforms, and field containers.
//!
//! Conventions: the box is `[-L/2, L/2)` sampled at `n` equispaced points,
//! wavenumbers are `k_m = 2*pi*m/L` for integer `m` in `(-n/2, n/2]`, and the
//! transform pair is
//!
//! ```text
//! c_m = dx * sum_j exp(-i k_m x_j) f(x_j)        (analysis, includes dx)
//! f_j = (1/L) * sum_m exp(+i k_m x_j) c_m        (synthesis, includes 1/L)
//! ```
//!
//! so discrete coefficients and sums approximate the continuum transform
//! `\int exp(-i x xi) f dx` and its integrals directly.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative Hermitian-asymmetry tolerance accepted by [`to_real`].
pub const SYMMETRY_TOL: f64 = 1e-10;

struct GridInner {
    n: usize,
    length: f64,
    dx: f64,
    wavenumbers: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

/// Periodic spatial grid with its integer wavenumber lattice.
///
/// Cheap to clone; the FFT plans inside are shared and thread-safe.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.0.n)
            .field("length", &self.0.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.0.n == other.0.n && self.0.length == other.0.length
    }
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 8 || n_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and >= 8, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        let dk = 2.0 * std::f64::consts::PI / length;
        let half = n_points / 2;
        let wavenumbers = (0..n_points)
            .map(|i| {
                let m = if i <= half { i as i64 } else { i as i64 - n_points as i64 };
                dk * m as f64
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_points);
        let ifft = planner.plan_fft_inverse(n_points);
        Ok(Grid(Arc::new(GridInner {
            n: n_points,
            length,
            dx: length / n_points as f64,
            wavenumbers,
            fft,
            ifft,
        })))
    }

    pub fn n_points(&self) -> usize {
        self.0.n
    }

    pub fn length(&self) -> f64 {
        self.0.length
    }

    pub fn dx(&self) -> f64 {
        self.0.dx
    }

    /// Wavenumbers in FFT storage order: index `i` holds `2*pi*m/L` with
    /// `m = i` for `i <= n/2` and `m = i - n` otherwise.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.0.wavenumbers
    }

    /// Largest resolved wavenumber (the Nyquist mode), `pi*n/L`.
    pub fn k_max(&self) -> f64 {
        self.0.wavenumbers[self.0.n / 2]
    }

    /// Index of the single Nyquist mode `m = n/2`.
    pub fn nyquist_index(&self) -> usize {
        self.0.n / 2
    }

    /// Sample point `x_j = -L/2 + j*dx`.
    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.0.length + j as f64 * self.0.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.0.n).map(|j| self.x(j)).collect()
    }
}

/// Real-valued samples `u(x_j)` on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: &Grid) -> Self {
        RealField { grid: grid.clone(), values: vec![0.0; grid.n_points()] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n_points()).map(|j| f(grid.x(j))).collect();
        RealField { grid: grid.clone(), values }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Precondition(format!(
                "field length {} does not match grid n_points {}",
                values.len(),
                grid.n_points()
            )));
        }
        let field = RealField { grid: grid.clone(), values };
        field.validate("RealField::from_values")?;
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn validate(&self, context: &str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { context: context.to_string() })
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L^2` norm, `sqrt(sum u_j^2 dx)`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }
}

/// Fourier coefficients `u_hat(k_m)` of a real field, full-spectrum storage
/// in FFT order with Hermitian symmetry `u_hat(-k) = conj(u_hat(k))`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField { grid: grid.clone(), coeffs: vec![Complex64::new(0.0, 0.0); grid.n_points()] }
    }

    /// Wrap raw coefficients, validating length and Hermitian symmetry.
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_points() {
            return Err(Error::Precondition(format!(
                "coefficient length {} does not match grid n_points {}",
                coeffs.len(),
                grid.n_points()
            )));
        }
        let field = SpectralField { grid: grid.clone(), coeffs };
        let asym = field.hermitian_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::SymmetryViolation { asymmetry: asym, tolerance: SYMMETRY_TOL });
        }
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at wavenumber index (storage order).
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs[i]
    }

    /// Mean value of the underlying real field, `c_0 / L`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re / self.grid.length()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Relative Hermitian asymmetry `max_m |c[-m] - conj(c[m])| / max|c|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let n = self.coeffs.len();
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = self.coeffs[0].im.abs().max(self.coeffs[n / 2].im.abs());
        for i in 1..n / 2 {
            let d = (self.coeffs[n - i] - self.coeffs[i].conj()).norm();
            worst = worst.max(d);
        }
        worst / scale
    }

    pub fn validate(&self, context: &str) -> Result<()> {
        if self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { context: context.to_string() })
        }
    }

    /// Force the exactly-real modes (k = 0 and Nyquist) onto the real axis.
    pub fn fix_real_modes(&mut self) {
        let n = self.coeffs.len();
        self.coeffs[0].im = 0.0;
        self.coeffs[n / 2].im = 0.0;
    }

    /// Project onto the Hermitian-symmetric subspace by averaging each
    /// `(c[m], conj(c[-m]))` pair. Removes roundoff dust from fields that
    /// are real by construction (e.g. differences of near-equal terms).
    pub fn symmetrize(&mut self) {
        let n = self.coeffs.len();
        for i in 1..n / 2 {
            let avg = 0.5 * (self.coeffs[i] + self.coeffs[n - i].conj());
            self.coeffs[i] = avg;
            self.coeffs[n - i] = avg.conj();
        }
        self.fix_real_modes();
    }

    /// Discrete `L^2` norm matching the physical-space one:
    /// `sqrt((1/L) sum_m |c_m|^2) == sqrt(sum_j u_j^2 dx)`.
    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.grid.length()).sqrt()
    }
}

/// Forward transform. Rejects non-finite input.
pub fn to_spectral(f: &RealField) -> Result<SpectralField> {
    f.validate("to_spectral input")?;
    let grid = f.grid();
    let dx = grid.dx();
    let mut buf: Vec<Complex64> =
        f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.0.fft.process(&mut buf);
    // dx from the analysis convention; (-1)^m shifts the origin to the box
    // center x_0 = -L/2.
    for (i, c) in buf.iter_mut().enumerate() {
        let sign = if i % 2 == 0 { dx } else { -dx };
        *c *= sign;
    }
    let mut out = SpectralField { grid: grid.clone(), coeffs: buf };
    out.fix_real_modes();
    Ok(out)
}

/// Inverse transform. Rejects spectra whose Hermitian asymmetry exceeds
/// [`SYMMETRY_TOL`].
pub fn to_real(field: &SpectralField) -> Result<RealField> {
    field.validate("to_real input")?;
    let asym = field.hermitian_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::SymmetryViolation { asymmetry: asym, tolerance: SYMMETRY_TOL });
    }
    let grid = field.grid();
    let inv_l = 1.0 / grid.length();
    let mut buf: Vec<Complex64> = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| if i % 2 == 0 { c } else { -c })
        .collect();
    grid.0.ifft.process(&mut buf);
    let values = buf.iter().map(|c| c.re * inv_l).collect();
    Ok(RealField { grid: grid.clone(), values })
}
