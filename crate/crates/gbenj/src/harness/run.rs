//! Single-run driver: executes the solver with the configured sinks and
//! writes a time-series table, optional spectrum dumps, a machine-readable
//! summary, and a restartable checkpoint. All outputs are byte-identical
//! across reruns of the same config and seed.

use std::fs;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analyticity::{
    fit_decay_law, fit_radius, DecayLaw, FitOptions, RadiusFit, RadiusSample, MIN_DECAY_ROWS,
};
use crate::diagnostics::{energy, gevrey_norm_spectral, mass};
use crate::error::Result as CoreResult;
use crate::harness::checkpoint::{Checkpoint, InitialRecord};
use crate::harness::config::{InitialData, RunConfig};
use crate::harness::initial::build_initial;
use crate::harness::{fmt_f64, HarnessError};
use crate::operators::{linear_propagator, GevreyIndex};
use crate::solver::{
    apply_dealias_mask, dealias_cutoff, integrate_from, integrate_spectral, Sink, SolverState,
};
use crate::spectral::{to_real, to_spectral, Grid, RealField, SpectralField};

pub const TABLE_FILE: &str = "timeseries.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.ckpt";
pub const CONFIG_FILE: &str = "config.txt";
pub const SPECTRA_DIR: &str = "spectra";

/// Fixed-header time-series table: one row per snapshot.
struct RunSink {
    writer: BufWriter<fs::File>,
    gevrey: Vec<GevreyIndex>,
    sobolev_s: f64,
    radius_fit: bool,
    fit_opts: FitOptions,
    spectra_dir: Option<PathBuf>,
    rows_written: u64,
    spectra_written: u64,
    params: crate::operators::ModelParams,
}

impl RunSink {
    fn header(gevrey: &[GevreyIndex]) -> String {
        let mut h = String::from("t,mass,energy,sobolev_s");
        for g in gevrey {
            h.push_str(&format!(",gevrey[{};{}]", g.sigma, g.s));
        }
        h.push_str(",sigma_fit,sigma_r,sigma_resid");
        h
    }

    fn create(dir: &Path, cfg: &RunConfig) -> Result<Self, HarnessError> {
        let file = fs::File::create(dir.join(TABLE_FILE))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{}", Self::header(&cfg.diagnostics.gevrey))?;
        Self::build(writer, cfg, dir, 0, 0)
    }

    /// Reopen for append after a checkpoint; refuses when the on-disk row
    /// count does not match the checkpoint cursor.
    fn reopen(dir: &Path, cfg: &RunConfig, expect_rows: u64, spectra_written: u64) -> Result<Self, HarnessError> {
        let path = dir.join(TABLE_FILE);
        let existing = fs::File::open(&path)
            .map_err(|e| HarnessError::Runtime(format!("cannot resume: {}: {e}", path.display())))?;
        let rows = std::io::BufReader::new(existing).lines().count() as u64;
        if rows != expect_rows + 1 {
            return Err(HarnessError::Runtime(format!(
                "cannot resume: {} has {} data rows but the checkpoint cursor says {}",
                path.display(),
                rows.saturating_sub(1),
                expect_rows
            )));
        }
        let file = fs::OpenOptions::new().append(true).open(&path)?;
        Self::build(BufWriter::new(file), cfg, dir, expect_rows, spectra_written)
    }

    fn build(
        writer: BufWriter<fs::File>,
        cfg: &RunConfig,
        dir: &Path,
        rows_written: u64,
        spectra_written: u64,
    ) -> Result<Self, HarnessError> {
        let spectra_dir = if cfg.output.spectra {
            let d = dir.join(SPECTRA_DIR);
            fs::create_dir_all(&d)?;
            Some(d)
        } else {
            None
        };
        Ok(RunSink {
            writer,
            gevrey: cfg.diagnostics.gevrey.clone(),
            sobolev_s: cfg.diagnostics.sobolev_s,
            radius_fit: cfg.diagnostics.radius_fit,
            fit_opts: FitOptions {
                k_lo: cfg.diagnostics.radius_k_lo,
                k_hi: cfg.diagnostics.radius_k_hi,
                ..FitOptions::default()
            },
            spectra_dir,
            rows_written,
            spectra_written,
            params: cfg.model,
        })
    }

    fn radius_triplet(&self, u_hat: &SpectralField) -> (f64, f64, f64) {
        if !self.radius_fit {
            return (f64::NAN, f64::NAN, f64::NAN);
        }
        match fit_radius(u_hat, &self.fit_opts) {
            Ok(fit) => (fit.sigma, fit.r, fit.rms_residual),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        }
    }

    fn flush(&mut self) -> Result<(), HarnessError> {
        self.writer.flush()?;
        Ok(())
    }
}

impl Sink for RunSink {
    fn record(&mut self, state: &SolverState) -> CoreResult<()> {
        let u_hat = state.u_hat();
        let u = to_real(u_hat)?;
        let m = mass(&u);
        let e = energy(&u, &self.params)?;
        let sob = gevrey_norm_spectral(u_hat, &GevreyIndex { sigma: 0.0, s: self.sobolev_s })?;
        let mut row = format!(
            "{},{},{},{}",
            fmt_f64(state.t()),
            fmt_f64(m),
            fmt_f64(e),
            fmt_f64(sob)
        );
        for g in &self.gevrey {
            row.push(',');
            row.push_str(&fmt_f64(gevrey_norm_spectral(u_hat, g)?));
        }
        let (sig, r, resid) = self.radius_triplet(u_hat);
        row.push_str(&format!(",{},{},{}", fmt_f64(sig), fmt_f64(r), fmt_f64(resid)));
        writeln!(self.writer, "{row}")?;
        self.rows_written += 1;

        if let Some(dir) = &self.spectra_dir {
            let path = dir.join(format!("spec_{:08}.dat", state.step_count()));
            let grid = u_hat.grid();
            let mut text = String::new();
            let half = grid.n_points() / 2;
            for i in 0..=half {
                let k = grid.wavenumbers()[i];
                text.push_str(&format!("{} {}\n", fmt_f64(k), fmt_f64(u_hat.coeff(i).norm())));
            }
            fs::write(path, text).map_err(crate::error::Error::from)?;
            self.spectra_written += 1;
        }
        Ok(())
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct GevreyEntry {
    pub sigma: f64,
    pub s: f64,
    pub value: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct NormsBlock {
    pub mass: f64,
    pub energy: f64,
    pub sobolev_s: f64,
    pub gevrey: Vec<GevreyEntry>,
    pub radius_sigma: Option<f64>,
    pub radius_r: Option<f64>,
    pub radius_log_c: Option<f64>,
    pub radius_residual: Option<f64>,
}

#[derive(Serialize, Clone, Debug)]
pub struct DriftBlock {
    pub mass_rel: f64,
    pub energy_rel: f64,
}

#[derive(Serialize, Clone, Debug)]
pub struct DecaySummary {
    pub kind: String,
    pub sigma0: f64,
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub rms_residual: Option<f64>,
    pub n_points: Option<usize>,
    pub t_window: (f64, f64),
}

#[derive(Serialize, Clone, Debug)]
pub struct RunSummary {
    pub schema: String,
    pub config_hash: String,
    pub n_points: usize,
    pub length: f64,
    pub l: f64,
    pub p: u32,
    pub seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub n_steps: u64,
    pub rows_written: u64,
    pub initial: NormsBlock,
    #[serde(rename = "final")]
    pub final_state: NormsBlock,
    pub drift: DriftBlock,
    pub decay: Option<DecaySummary>,
    /// Sup-norm error of the evolved state against the rigidly translated
    /// initial profile; present for soliton runs only.
    pub soliton_error_linf: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub summary: RunSummary,
}

fn norms_block(
    u_hat: &SpectralField,
    u: &RealField,
    cfg: &RunConfig,
    fit_opts: &FitOptions,
) -> Result<NormsBlock, HarnessError> {
    let gevrey = cfg
        .diagnostics
        .gevrey
        .iter()
        .map(|g| {
            gevrey_norm_spectral(u_hat, g).map(|v| GevreyEntry { sigma: g.sigma, s: g.s, value: v })
        })
        .collect::<CoreResult<Vec<_>>>()
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let fit = if cfg.diagnostics.radius_fit { fit_radius(u_hat, fit_opts).ok() } else { None };
    Ok(NormsBlock {
        mass: mass(u),
        energy: energy(u, &cfg.model).map_err(|e| HarnessError::Runtime(e.to_string()))?,
        sobolev_s: gevrey_norm_spectral(u_hat, &GevreyIndex { sigma: 0.0, s: cfg.diagnostics.sobolev_s })
            .map_err(|e| HarnessError::Runtime(e.to_string()))?,
        gevrey,
        radius_sigma: fit.as_ref().map(|f| f.sigma),
        radius_r: fit.as_ref().map(|f| f.r),
        radius_log_c: fit.as_ref().map(|f| f.log_c),
        radius_residual: fit.as_ref().map(|f| f.rms_residual),
    })
}

fn block_from_record(rec: &InitialRecord, cfg: &RunConfig) -> NormsBlock {
    let opt = |v: f64| if v.is_nan() { None } else { Some(v) };
    NormsBlock {
        mass: rec.mass,
        energy: rec.energy,
        sobolev_s: rec.sobolev,
        gevrey: cfg
            .diagnostics
            .gevrey
            .iter()
            .zip(&rec.gevrey)
            .map(|(g, &v)| GevreyEntry { sigma: g.sigma, s: g.s, value: v })
            .collect(),
        radius_sigma: opt(rec.radius[0]),
        radius_r: opt(rec.radius[1]),
        radius_log_c: opt(rec.radius[2]),
        radius_residual: opt(rec.radius[3]),
    }
}

/// Read the `(t, sigma_fit)` columns back from the written table. Driving
/// the decay fit from the table (rather than the in-memory trajectory)
/// keeps resumed and uninterrupted runs byte-identical in the summary too.
pub(crate) fn radius_series_from_table(
    path: &Path,
    n_gevrey: usize,
) -> Result<Vec<RadiusSample>, HarnessError> {
    let text = fs::read_to_string(path)?;
    let sigma_col = 4 + n_gevrey;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < sigma_col + 3 {
            continue;
        }
        let t: f64 = cells[0].parse().unwrap_or(f64::NAN);
        let sigma: f64 = cells[sigma_col].parse().unwrap_or(f64::NAN);
        let r: f64 = cells[sigma_col + 1].parse().unwrap_or(f64::NAN);
        let resid: f64 = cells[sigma_col + 2].parse().unwrap_or(f64::NAN);
        if t.is_nan() {
            continue;
        }
        if sigma.is_nan() {
            out.push(RadiusSample { t, fit: None, flag: Some("fit failed".into()) });
        } else {
            out.push(RadiusSample {
                t,
                fit: Some(RadiusFit {
                    sigma,
                    r,
                    log_c: 0.0,
                    k_window: (0.0, 0.0),
                    rms_residual: resid,
                    n_points_used: 0,
                    clamped: false,
                }),
                flag: None,
            });
        }
    }
    Ok(out)
}

fn decay_summary(series: &[RadiusSample], t_end: f64) -> Option<DecaySummary> {
    let first_sigma = series.iter().find_map(|r| r.fit.as_ref().map(|f| f.sigma))?;
    let usable = series
        .iter()
        .filter(|r| r.t >= 1.0 && r.fit.is_some())
        .count();
    if usable < MIN_DECAY_ROWS || t_end <= 1.0 {
        return None;
    }
    match fit_decay_law(series, (1.0, t_end), Some(first_sigma)) {
        Ok(DecayLaw::Plateau { sigma0, .. }) => Some(DecaySummary {
            kind: "plateau".into(),
            sigma0,
            gamma: None,
            c: None,
            rms_residual: None,
            n_points: None,
            t_window: (1.0, t_end),
        }),
        Ok(DecayLaw::PowerLaw(fit)) => Some(DecaySummary {
            kind: "power_law".into(),
            sigma0: first_sigma,
            gamma: Some(fit.gamma),
            c: Some(fit.c),
            rms_residual: Some(fit.rms_residual),
            n_points: Some(fit.n_points),
            t_window: fit.t_window,
        }),
        Err(_) => None,
    }
}

/// Sup-norm distance between the final state and the initial profile
/// translated by `c * t` (a spectral phase shift).
fn soliton_error(u0: &RealField, final_hat: &SpectralField, c: f64, t: f64) -> Result<f64, HarnessError> {
    let grid = u0.grid();
    let mut translated = to_spectral(u0).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let shift = c * t;
    let ks = grid.wavenumbers().to_vec();
    for (i, coeff) in translated.coeffs_mut().iter_mut().enumerate() {
        *coeff *= num_complex::Complex64::from_polar(1.0, -ks[i] * shift);
    }
    translated.fix_real_modes();
    let expect = to_real(&translated).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let got = to_real(final_hat).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let mut err: f64 = 0.0;
    for (a, b) in got.values().iter().zip(expect.values()) {
        err = err.max((a - b).abs());
    }
    Ok(err)
}

/// Execute a parsed run configuration into `out_dir`, optionally resuming
/// from a checkpoint.
pub fn run_with_config(
    cfg: &RunConfig,
    out_dir: &Path,
    resume: Option<&Path>,
) -> Result<RunArtifacts, HarnessError> {
    fs::create_dir_all(out_dir)?;
    let grid = Grid::new(cfg.grid_n, cfg.grid_length).map_err(|e| HarnessError::Config(e.to_string()))?;
    let n_steps = cfg.solver.n_steps().map_err(|e| HarnessError::Config(e.to_string()))?;

    fs::write(
        out_dir.join(CONFIG_FILE),
        format!("{}solver.t_end = {}\n", cfg.canonical_text(), fmt_f64(cfg.solver.t_end)),
    )?;

    let fit_opts = FitOptions {
        k_lo: cfg.diagnostics.radius_k_lo,
        k_hi: cfg.diagnostics.radius_k_hi,
        ..FitOptions::default()
    };

    enum Start {
        /// Fresh run from the masked initial spectrum.
        Fresh(SpectralField),
        Resumed(SolverState),
    }

    let (mut sink, start, initial_rec, rng_pos) = match resume {
        None => {
            let (u0_raw, rng_pos) = build_initial(cfg, &grid)?;
            let sink = RunSink::create(out_dir, cfg)?;
            // reference values describe the state the solver actually
            // evolves: the dealias-masked initial data
            let mut u0_hat =
                to_spectral(&u0_raw).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            if let Some(cut) = dealias_cutoff(&grid, &cfg.model, cfg.solver.dealias) {
                apply_dealias_mask(&mut u0_hat, cut);
            }
            let u0 = to_real(&u0_hat).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            let block = norms_block(&u0_hat, &u0, cfg, &fit_opts)?;
            let rec = InitialRecord {
                mass: block.mass,
                energy: block.energy,
                sobolev: block.sobolev_s,
                gevrey: block.gevrey.iter().map(|g| g.value).collect(),
                radius: [
                    block.radius_sigma.unwrap_or(f64::NAN),
                    block.radius_r.unwrap_or(f64::NAN),
                    block.radius_log_c.unwrap_or(f64::NAN),
                    block.radius_residual.unwrap_or(f64::NAN),
                ],
                u0: u0.values().to_vec(),
            };
            (sink, Start::Fresh(u0_hat), rec, rng_pos)
        }
        Some(ckpt_path) => {
            let ck = Checkpoint::read(ckpt_path)?;
            if ck.config_hash != cfg.hash() {
                return Err(HarnessError::Config(format!(
                    "refusing to resume: config hash mismatch (checkpoint {}..., config {}...)",
                    hex_prefix(&ck.config_hash),
                    hex_prefix(&cfg.hash())
                )));
            }
            if ck.step_count > n_steps {
                return Err(HarnessError::Config(format!(
                    "checkpoint is at step {} but the requested run ends at step {n_steps}",
                    ck.step_count
                )));
            }
            let sink = RunSink::reopen(out_dir, cfg, ck.rows_written, ck.spectra_written)?;
            let state = ck.restore_state(cfg.model)?;
            let rng_pos = ck.rng_word_pos;
            (sink, Start::Resumed(state), ck.initial, rng_pos)
        }
    };

    let u0_field = RealField::from_values(&grid, initial_rec.u0.clone())
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;

    let run_result = {
        let mut sinks: [&mut dyn Sink; 1] = [&mut sink];
        match start {
            Start::Fresh(u0_hat) => {
                integrate_spectral(u0_hat, &cfg.model, &cfg.solver, &mut sinks)
            }
            Start::Resumed(st) => integrate_from(st, &cfg.solver, &mut sinks),
        }
    };

    sink.flush()?;

    let (final_hat, solver_error) = match &run_result {
        Ok(traj) if !traj.is_empty() => (Some(traj.spectrum(traj.len() - 1).clone()), None),
        Ok(_) => {
            // resumed with no extra steps: final state is the checkpoint state
            let ck = Checkpoint::read(resume.expect("empty trajectory only on resume"))?;
            let f = ck.restore_state(cfg.model)?.u_hat().clone();
            (Some(f), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };

    let initial_block = block_from_record(&initial_rec, cfg);
    let series = radius_series_from_table(&out_dir.join(TABLE_FILE), cfg.diagnostics.gevrey.len())?;
    let decay = if cfg.diagnostics.radius_fit { decay_summary(&series, cfg.solver.t_end) } else { None };

    let (final_block, drift, soliton_err) = match &final_hat {
        Some(f_hat) => {
            let f_real = to_real(f_hat).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            let block = norms_block(f_hat, &f_real, cfg, &fit_opts)?;
            let drift = DriftBlock {
                mass_rel: (block.mass - initial_rec.mass).abs() / initial_rec.mass.abs().max(1e-300),
                energy_rel: (block.energy - initial_rec.energy).abs()
                    / initial_rec.energy.abs().max(1e-300),
            };
            let sol = match &cfg.initial {
                InitialData::Soliton { c, .. } => {
                    Some(soliton_error(&u0_field, f_hat, *c, cfg.solver.t_end)?)
                }
                _ => None,
            };
            (block, drift, sol)
        }
        None => (
            initial_block.clone(),
            DriftBlock { mass_rel: f64::NAN, energy_rel: f64::NAN },
            None,
        ),
    };

    let summary = RunSummary {
        schema: "gbenj-run-summary-v1".into(),
        config_hash: cfg.hash_hex(),
        n_points: cfg.grid_n,
        length: cfg.grid_length,
        l: cfg.model.l(),
        p: cfg.model.p(),
        seed: cfg.seed,
        dt: cfg.solver.dt,
        t_end: cfg.solver.t_end,
        n_steps,
        rows_written: sink.rows_written,
        initial: initial_block,
        final_state: final_block,
        drift,
        decay,
        soliton_error_linf: soliton_err,
        error: solver_error.clone(),
    };
    fs::write(
        out_dir.join(SUMMARY_FILE),
        serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n",
    )?;

    if let (Some(f_hat), true, None) = (&final_hat, cfg.output.checkpoint, &solver_error) {
        let ck = Checkpoint {
            config_hash: cfg.hash(),
            step_count: n_steps,
            t: cfg.solver.t_end,
            grid_n: cfg.grid_n as u64,
            grid_length: cfg.grid_length,
            coeffs: f_hat.coeffs().to_vec(),
            rng_seed: cfg.seed,
            rng_word_pos: rng_pos,
            rows_written: sink.rows_written,
            spectra_written: sink.spectra_written,
            initial: initial_rec,
        };
        ck.write(&out_dir.join(CHECKPOINT_FILE))?;
    }

    match solver_error {
        Some(e) => Err(HarnessError::Runtime(format!("solver failed (partial outputs kept): {e}"))),
        None => Ok(RunArtifacts { out_dir: out_dir.to_path_buf(), summary }),
    }
}

fn hex_prefix(hash: &[u8; 32]) -> String {
    hash.iter().take(4).map(|b| format!("{b:02x}")).collect()
}

/// `run` subcommand: parse a config file and execute it.
pub fn cli_run(
    config_path: &Path,
    out_dir: &Path,
    resume: Option<&Path>,
    seed: Option<u64>,
) -> Result<RunArtifacts, HarnessError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", config_path.display())))?;
    let cfg = crate::harness::config::parse_run_config(&text, seed)?;
    run_with_config(&cfg, out_dir, resume)
}

/// `soliton` subcommand: compute a solitary-wave profile, write it as a
/// one-column table plus a residual report.
pub fn cli_soliton(
    params: &crate::operators::ModelParams,
    c: f64,
    grid_n: usize,
    grid_length: f64,
    tol: f64,
    max_iter: usize,
    out_dir: &Path,
) -> Result<crate::solver::SolitaryWave, HarnessError> {
    fs::create_dir_all(out_dir)?;
    let grid = Grid::new(grid_n, grid_length).map_err(|e| HarnessError::Config(e.to_string()))?;
    let wave = crate::solver::petviashvili_solitary_wave(params, c, &grid, tol, max_iter)
        .map_err(HarnessError::from)?;
    let mut profile = String::new();
    for v in wave.profile.values() {
        profile.push_str(&fmt_f64(*v));
        profile.push('\n');
    }
    fs::write(out_dir.join("profile.dat"), profile)?;
    let report = format!
        ("speed = {}\nresidual = {}\ntime_residual = {}\niterations = {}\n",
        fmt_f64(c),
        fmt_f64(wave.residual),
        fmt_f64(wave.time_residual),
        wave.iterations
    );
    fs::write(out_dir.join("soliton_report.txt"), report)?;
    Ok(wave)
}

/// Check a spectral snapshot against the rigidly translated reference
/// profile (shared by the acceptance suite and examples).
pub fn translate_profile(u0: &RealField, c: f64, t: f64) -> Result<RealField, HarnessError> {
    let mut hat = to_spectral(u0).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let ks = u0.grid().wavenumbers().to_vec();
    for (i, coeff) in hat.coeffs_mut().iter_mut().enumerate() {
        *coeff *= num_complex::Complex64::from_polar(1.0, -ks[i] * c * t);
    }
    hat.fix_real_modes();
    to_real(&hat).map_err(|e| HarnessError::Runtime(e.to_string()))
}

/// Evolve a field by the linear group only (reference helper).
pub fn linear_reference(u0: &RealField, params: &crate::operators::ModelParams, t: f64) -> Result<RealField, HarnessError> {
    let hat = to_spectral(u0).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    to_real(&linear_propagator(params, t, &hat)).map_err(|e| HarnessError::Runtime(e.to_string()))
}
