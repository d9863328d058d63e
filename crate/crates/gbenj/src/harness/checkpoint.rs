//! Versioned binary checkpoints. A checkpoint pins the config hash; restart
//! across a config change is refused, since silent config drift is the main
//! reproducibility hazard.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::harness::HarnessError;
use crate::operators::ModelParams;
use crate::solver::SolverState;
use crate::spectral::{Grid, SpectralField};

const MAGIC: &[u8; 8] = b"GBENJCK1";
const VERSION: u32 = 1;

/// Reference values captured at `t = 0`, needed so a resumed run reports
/// the same drifts and summary as an uninterrupted one.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialRecord {
    pub mass: f64,
    pub energy: f64,
    pub sobolev: f64,
    pub gevrey: Vec<f64>,
    /// `[sigma, r, log_c, rms_residual]`; NaN when the fit was disabled or
    /// failed.
    pub radius: [f64; 4],
    /// Initial samples, kept for reference computations such as the
    /// traveling-wave error of soliton runs.
    pub u0: Vec<f64>,
}

/// Everything needed to continue a run bit-exactly.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub config_hash: [u8; 32],
    pub step_count: u64,
    pub t: f64,
    pub grid_n: u64,
    pub grid_length: f64,
    pub coeffs: Vec<Complex64>,
    /// Seed and ChaCha word position of the data-synthesis RNG.
    pub rng_seed: u64,
    pub rng_word_pos: u128,
    /// Data rows already written to the time-series table.
    pub rows_written: u64,
    pub spectra_written: u64,
    pub initial: InitialRecord,
}

struct ByteWriter(Vec<u8>);

impl ByteWriter {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u128(&mut self, v: u128) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], HarnessError> {
        if self.pos + n > self.buf.len() {
            return Err(HarnessError::Runtime("checkpoint truncated".into()));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn u32(&mut self) -> Result<u32, HarnessError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, HarnessError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u128(&mut self) -> Result<u128, HarnessError> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, HarnessError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl Checkpoint {
    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let mut w = ByteWriter(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u32(VERSION);
        w.0.extend_from_slice(&self.config_hash);
        w.u64(self.step_count);
        w.f64(self.t);
        w.u64(self.grid_n);
        w.f64(self.grid_length);
        for c in &self.coeffs {
            w.f64(c.re);
            w.f64(c.im);
        }
        w.u64(self.rng_seed);
        w.u128(self.rng_word_pos);
        w.u64(self.rows_written);
        w.u64(self.spectra_written);
        w.f64(self.initial.mass);
        w.f64(self.initial.energy);
        w.f64(self.initial.sobolev);
        w.u64(self.initial.gevrey.len() as u64);
        for &g in &self.initial.gevrey {
            w.f64(g);
        }
        for &v in &self.initial.radius {
            w.f64(v);
        }
        w.u64(self.initial.u0.len() as u64);
        for &v in &self.initial.u0 {
            w.f64(v);
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&w.0)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        let mut r = ByteReader { buf: &buf, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(HarnessError::Runtime(format!(
                "{} is not a checkpoint (bad magic)",
                path.display()
            )));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(HarnessError::Runtime(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let mut config_hash = [0u8; 32];
        config_hash.copy_from_slice(r.take(32)?);
        let step_count = r.u64()?;
        let t = r.f64()?;
        let grid_n = r.u64()?;
        let grid_length = r.f64()?;
        let mut coeffs = Vec::with_capacity(grid_n as usize);
        for _ in 0..grid_n {
            let re = r.f64()?;
            let im = r.f64()?;
            coeffs.push(Complex64::new(re, im));
        }
        let rng_seed = r.u64()?;
        let rng_word_pos = r.u128()?;
        let rows_written = r.u64()?;
        let spectra_written = r.u64()?;
        let mass = r.f64()?;
        let energy = r.f64()?;
        let sobolev = r.f64()?;
        let n_gevrey = r.u64()?;
        let mut gevrey = Vec::with_capacity(n_gevrey as usize);
        for _ in 0..n_gevrey {
            gevrey.push(r.f64()?);
        }
        let radius = [r.f64()?, r.f64()?, r.f64()?, r.f64()?];
        let n_u0 = r.u64()?;
        let mut u0 = Vec::with_capacity(n_u0 as usize);
        for _ in 0..n_u0 {
            u0.push(r.f64()?);
        }
        Ok(Checkpoint {
            config_hash,
            step_count,
            t,
            grid_n,
            grid_length,
            coeffs,
            rng_seed,
            rng_word_pos,
            rows_written,
            spectra_written,
            initial: InitialRecord { mass, energy, sobolev, gevrey, radius, u0 },
        })
    }

    /// Rebuild the solver state stored in this checkpoint.
    pub fn restore_state(&self, params: ModelParams) -> Result<SolverState, HarnessError> {
        let grid = Grid::new(self.grid_n as usize, self.grid_length)
            .map_err(|e| HarnessError::Runtime(e.to_string()))?;
        let field = SpectralField::from_coeffs(&grid, self.coeffs.clone())
            .map_err(|e| HarnessError::Runtime(format!("checkpoint state invalid: {e}")))?;
        Ok(SolverState::resume(field, params, self.step_count, self.t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        let ck = Checkpoint {
            config_hash: [7u8; 32],
            step_count: 1234,
            t: 1.234,
            grid_n: 8,
            grid_length: 5.0,
            coeffs: (0..8).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect(),
            rng_seed: 42,
            rng_word_pos: 99,
            rows_written: 13,
            spectra_written: 2,
            initial: InitialRecord {
                mass: 0.5,
                energy: -0.25,
                sobolev: 1.5,
                gevrey: vec![1.0, 2.0],
                radius: [0.9, 1.1, -0.3, 1e-12],
                u0: vec![0.0; 8],
            },
        };
        ck.write(&path).unwrap();
        let back = Checkpoint::read(&path).unwrap();
        assert_eq!(back.step_count, ck.step_count);
        assert_eq!(back.t.to_bits(), ck.t.to_bits());
        assert_eq!(back.coeffs, ck.coeffs);
        assert_eq!(back.config_hash, ck.config_hash);
        assert_eq!(back.initial, ck.initial);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not_a_ckpt");
        std::fs::write(&path, b"hello world, definitely not binary").unwrap();
        assert!(Checkpoint::read(&path).is_err());
    }
}
