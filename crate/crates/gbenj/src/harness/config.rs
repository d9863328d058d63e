//! Flat, line-oriented `key = value` configuration with dotted section
//! prefixes (`model.l = 0.5`). Chosen over nested formats for
//! diff-friendliness and zero-dependency parsing; the exact grammar is
//! documented in the repository README.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::harness::HarnessError;
use crate::operators::{GevreyIndex, ModelParams, MollifierSpec, RampProfile, EXP_GUARD};
use crate::solver::{Dealias, Integrator, SolverConfig};

/// Initial-data family.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// Random-phase spectrum with envelope `amplitude * <k>^{-s} exp(-sigma0 |k|)`,
    /// rescaled so the sup norm equals `amplitude`.
    GaussianSpectrum { sigma0: f64, s: f64, amplitude: f64 },
    /// `amplitude * sech(x / width)`.
    Sech { amplitude: f64, width: f64 },
    /// Solitary-wave profile of speed `c` from Petviashvili iteration.
    Soliton { c: f64, tol: f64, max_iter: usize },
    /// One real sample per line, exactly `n_points` of them.
    File { path: String },
}

/// Per-run diagnostics selection; the table header is fixed, so disabled
/// entries are written as `NaN`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsSpec {
    pub sobolev_s: f64,
    pub gevrey: Vec<GevreyIndex>,
    pub radius_fit: bool,
    pub radius_k_lo: Option<f64>,
    pub radius_k_hi: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    /// Dump a `(k, |u_hat|)` table per snapshot.
    pub spectra: bool,
    /// Write a restartable checkpoint at the end of the run.
    pub checkpoint: bool,
}

/// Fully parsed run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: ModelParams,
    pub grid_n: usize,
    pub grid_length: f64,
    pub initial: InitialData,
    pub solver: SolverConfig,
    pub diagnostics: DiagnosticsSpec,
    pub output: OutputSpec,
    pub seed: u64,
}

/// Raw key/value view of a config file with line anchoring.
pub struct ConfigMap {
    entries: BTreeMap<String, (String, usize)>,
    consumed: std::cell::RefCell<Vec<String>>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected 'key = value', got '{raw}'", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(HarnessError::Config(format!("line {}: empty key", lineno + 1)));
            }
            if let Some((_, first)) = entries.get(&key) {
                return Err(HarnessError::Config(format!(
                    "line {}: duplicate key '{key}' (first set on line {first})",
                    lineno + 1
                )));
            }
            entries.insert(key, (value, lineno + 1));
        }
        Ok(ConfigMap { entries, consumed: std::cell::RefCell::new(Vec::new()) })
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.consumed.borrow_mut().push(key.to_string());
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.raw(key).map(|(v, _)| v.to_string())
    }

    pub fn require_str(&self, key: &str) -> Result<String, HarnessError> {
        self.get_str(key)
            .ok_or_else(|| HarnessError::Config(format!("missing required key '{key}'")))
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, HarnessError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<f64>().map(Some).map_err(|_| {
                HarnessError::Config(format!("line {line}: '{key}' expects a number, got '{v}'"))
            }),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, HarnessError> {
        self.get_f64(key)?
            .ok_or_else(|| HarnessError::Config(format!("missing required key '{key}'")))
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, HarnessError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<usize>().map(Some).map_err(|_| {
                HarnessError::Config(format!(
                    "line {line}: '{key}' expects a nonnegative integer, got '{v}'"
                ))
            }),
        }
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, HarnessError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<u64>().map(Some).map_err(|_| {
                HarnessError::Config(format!(
                    "line {line}: '{key}' expects a nonnegative integer, got '{v}'"
                ))
            }),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, HarnessError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => match v {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => Err(HarnessError::Config(format!(
                    "line {line}: '{key}' expects true or false, got '{v}'"
                ))),
            },
        }
    }

    /// Comma-separated list of numbers.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, HarnessError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => {
                let mut out = Vec::new();
                for item in v.split(',') {
                    let item = item.trim();
                    if item.is_empty() {
                        continue;
                    }
                    out.push(item.parse::<f64>().map_err(|_| {
                        HarnessError::Config(format!(
                            "line {line}: '{key}' list entry '{item}' is not a number"
                        ))
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    /// Comma-separated list of `sigma;s` Gevrey index pairs.
    pub fn get_gevrey_list(&self, key: &str) -> Result<Option<Vec<GevreyIndex>>, HarnessError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => {
                let mut out = Vec::new();
                for item in v.split(',') {
                    let item = item.trim();
                    if item.is_empty() {
                        continue;
                    }
                    let (sig, s) = item.split_once(';').ok_or_else(|| {
                        HarnessError::Config(format!(
                            "line {line}: '{key}' entries are 'sigma;s' pairs, got '{item}'"
                        ))
                    })?;
                    let parse = |t: &str| {
                        t.trim().parse::<f64>().map_err(|_| {
                            HarnessError::Config(format!(
                                "line {line}: '{key}' entry '{item}' has a non-numeric part"
                            ))
                        })
                    };
                    let idx = GevreyIndex::new(parse(sig)?, parse(s)?)
                        .map_err(|e| HarnessError::Config(format!("line {line}: {e}")))?;
                    out.push(idx);
                }
                Ok(Some(out))
            }
        }
    }

    /// Error on any key never consumed by a getter (catches typos).
    pub fn check_unknown(&self) -> Result<(), HarnessError> {
        let consumed = self.consumed.borrow();
        for (key, (_, line)) in &self.entries {
            if !consumed.iter().any(|c| c == key) {
                return Err(HarnessError::Config(format!("line {line}: unknown key '{key}'")));
            }
        }
        Ok(())
    }
}

fn config_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(e.to_string())
}

/// Build a [`RunConfig`] from a key/value map, consuming the run-level keys.
/// `seed_override` (the CLI `--seed` flag) takes precedence over the file.
pub fn run_config_from_map(map: &ConfigMap, seed_override: Option<u64>) -> Result<RunConfig, HarnessError> {
    let model = ModelParams::new(
        map.require_f64("model.l")?,
        map.require_f64("model.p")? as u32,
    )
    .map_err(config_err)?;

    let grid_n = map
        .get_usize("grid.n_points")?
        .ok_or_else(|| HarnessError::Config("missing required key 'grid.n_points'".into()))?;
    let grid_length = map.require_f64("grid.length")?;
    let grid = crate::spectral::Grid::new(grid_n, grid_length).map_err(config_err)?;

    let initial = match map.require_str("initial.family")?.as_str() {
        "gaussian_spectrum" => InitialData::GaussianSpectrum {
            sigma0: map.require_f64("initial.sigma0")?,
            s: map.get_f64("initial.s")?.unwrap_or(0.0),
            amplitude: map.get_f64("initial.amplitude")?.unwrap_or(1.0),
        },
        "sech" => InitialData::Sech {
            amplitude: map.require_f64("initial.amplitude")?,
            width: map.require_f64("initial.width")?,
        },
        "soliton" => InitialData::Soliton {
            c: map.require_f64("initial.c")?,
            tol: map.get_f64("initial.tol")?.unwrap_or(1e-12),
            max_iter: map.get_usize("initial.max_iter")?.unwrap_or(500),
        },
        "file" => InitialData::File { path: map.require_str("initial.path")? },
        other => {
            return Err(HarnessError::Config(format!(
                "initial.family '{other}' is not one of gaussian_spectrum | sech | soliton | file"
            )))
        }
    };

    let mut solver = SolverConfig::new(
        map.require_f64("solver.dt")?,
        map.require_f64("solver.t_end")?,
    );
    if let Some(v) = map.get_str("solver.integrator") {
        solver.integrator = match v.as_str() {
            "ifrk4" => Integrator::Ifrk4,
            "etdrk4" => Integrator::Etdrk4,
            other => {
                return Err(HarnessError::Config(format!(
                    "solver.integrator '{other}' is not one of ifrk4 | etdrk4"
                )))
            }
        };
    }
    if let Some(v) = map.get_str("solver.dealias") {
        solver.dealias = match v.as_str() {
            "two_thirds" => Dealias::TwoThirds,
            "none" => Dealias::None,
            other => {
                return Err(HarnessError::Config(format!(
                    "solver.dealias '{other}' is not one of two_thirds | none"
                )))
            }
        };
    }
    if let Some(n) = map.get_f64("solver.mollifier_n")? {
        let profile = match map.get_str("solver.mollifier_profile").as_deref() {
            None | Some("linear") => RampProfile::Linear,
            Some("cosine") => RampProfile::Cosine,
            Some(other) => {
                return Err(HarnessError::Config(format!(
                    "solver.mollifier_profile '{other}' is not one of linear | cosine"
                )))
            }
        };
        solver.mollifier = Some(MollifierSpec::with_profile(n, profile).map_err(config_err)?);
    } else {
        // consume the profile key even without a cutoff so typo checking
        // stays quiet, but reject the combination
        if map.get_str("solver.mollifier_profile").is_some() {
            return Err(HarnessError::Config(
                "solver.mollifier_profile given without solver.mollifier_n".into(),
            ));
        }
    }
    if let Some(v) = map.get_usize("solver.snapshot_stride")? {
        solver.snapshot_stride = v;
    }
    if let Some(v) = map.get_f64("solver.cfl_guard")? {
        solver.cfl_guard = v;
    }
    if let Some(v) = map.get_f64("solver.c_int")? {
        solver.c_int = v;
    }
    if let Some(v) = map.get_bool("solver.linear_only")? {
        solver.linear_only = v;
    }
    solver.validate().map_err(config_err)?;
    let n_steps = solver.n_steps().map_err(config_err)?;
    if n_steps % solver.snapshot_stride as u64 != 0 {
        return Err(HarnessError::Config(format!(
            "snapshot_stride = {} must divide the step count {n_steps} so the final state is a snapshot",
            solver.snapshot_stride
        )));
    }

    let diagnostics = DiagnosticsSpec {
        sobolev_s: map.get_f64("diagnostics.sobolev_s")?.unwrap_or(1.0),
        gevrey: map.get_gevrey_list("diagnostics.gevrey")?.unwrap_or_default(),
        radius_fit: map.get_bool("diagnostics.radius_fit")?.unwrap_or(true),
        radius_k_lo: map.get_f64("diagnostics.radius_k_lo")?,
        radius_k_hi: map.get_f64("diagnostics.radius_k_hi")?,
    };
    // overflow guards are parse-time errors
    for idx in &diagnostics.gevrey {
        let worst = idx.sigma * grid.k_max();
        if worst > EXP_GUARD {
            return Err(HarnessError::Config(format!(
                "diagnostics.gevrey index sigma = {} overflows: sigma*k_max = {worst:.1} > {EXP_GUARD}",
                idx.sigma
            )));
        }
    }

    let output = OutputSpec {
        spectra: map.get_bool("output.spectra")?.unwrap_or(false),
        checkpoint: map.get_bool("output.checkpoint")?.unwrap_or(true),
    };

    let seed = match seed_override {
        Some(s) => {
            map.get_u64("seed")?; // consume
            s
        }
        None => map.get_u64("seed")?.unwrap_or(0),
    };

    Ok(RunConfig {
        model,
        grid_n,
        grid_length,
        initial,
        solver,
        diagnostics,
        output,
        seed,
    })
}

/// Parse a standalone run config file.
pub fn parse_run_config(text: &str, seed_override: Option<u64>) -> Result<RunConfig, HarnessError> {
    let map = ConfigMap::parse(text)?;
    let cfg = run_config_from_map(&map, seed_override)?;
    map.check_unknown()?;
    Ok(cfg)
}

impl RunConfig {
    /// Canonical text form: every identity-relevant field in fixed order.
    /// `solver.t_end` is deliberately excluded, so a checkpoint written at
    /// an intermediate time can be resumed with a later horizon.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let f = crate::harness::fmt_f64;
        let _ = writeln!(s, "model.l = {}", f(self.model.l()));
        let _ = writeln!(s, "model.p = {}", self.model.p());
        let _ = writeln!(s, "grid.n_points = {}", self.grid_n);
        let _ = writeln!(s, "grid.length = {}", f(self.grid_length));
        match &self.initial {
            InitialData::GaussianSpectrum { sigma0, s: ss, amplitude } => {
                let _ = writeln!(s, "initial.family = gaussian_spectrum");
                let _ = writeln!(s, "initial.sigma0 = {}", f(*sigma0));
                let _ = writeln!(s, "initial.s = {}", f(*ss));
                let _ = writeln!(s, "initial.amplitude = {}", f(*amplitude));
            }
            InitialData::Sech { amplitude, width } => {
                let _ = writeln!(s, "initial.family = sech");
                let _ = writeln!(s, "initial.amplitude = {}", f(*amplitude));
                let _ = writeln!(s, "initial.width = {}", f(*width));
            }
            InitialData::Soliton { c, tol, max_iter } => {
                let _ = writeln!(s, "initial.family = soliton");
                let _ = writeln!(s, "initial.c = {}", f(*c));
                let _ = writeln!(s, "initial.tol = {}", f(*tol));
                let _ = writeln!(s, "initial.max_iter = {max_iter}");
            }
            InitialData::File { path } => {
                let _ = writeln!(s, "initial.family = file");
                let _ = writeln!(s, "initial.path = {path}");
            }
        }
        let _ = writeln!(s, "solver.dt = {}", f(self.solver.dt));
        let _ = writeln!(
            s,
            "solver.integrator = {}",
            match self.solver.integrator {
                Integrator::Ifrk4 => "ifrk4",
                Integrator::Etdrk4 => "etdrk4",
            }
        );
        let _ = writeln!(
            s,
            "solver.dealias = {}",
            match self.solver.dealias {
                Dealias::TwoThirds => "two_thirds",
                Dealias::None => "none",
            }
        );
        if let Some(m) = &self.solver.mollifier {
            let _ = writeln!(s, "solver.mollifier_n = {}", f(m.n));
            let _ = writeln!(
                s,
                "solver.mollifier_profile = {}",
                match m.profile {
                    RampProfile::Linear => "linear",
                    RampProfile::Cosine => "cosine",
                }
            );
        }
        let _ = writeln!(s, "solver.snapshot_stride = {}", self.solver.snapshot_stride);
        let _ = writeln!(s, "solver.cfl_guard = {}", f(self.solver.cfl_guard));
        let _ = writeln!(s, "solver.c_int = {}", f(self.solver.c_int));
        let _ = writeln!(s, "solver.linear_only = {}", self.solver.linear_only);
        let _ = writeln!(s, "diagnostics.sobolev_s = {}", f(self.diagnostics.sobolev_s));
        let gevrey: Vec<String> = self
            .diagnostics
            .gevrey
            .iter()
            .map(|g| format!("{};{}", f(g.sigma), f(g.s)))
            .collect();
        let _ = writeln!(s, "diagnostics.gevrey = {}", gevrey.join(", "));
        let _ = writeln!(s, "diagnostics.radius_fit = {}", self.diagnostics.radius_fit);
        if let Some(v) = self.diagnostics.radius_k_lo {
            let _ = writeln!(s, "diagnostics.radius_k_lo = {}", f(v));
        }
        if let Some(v) = self.diagnostics.radius_k_hi {
            let _ = writeln!(s, "diagnostics.radius_k_hi = {}", f(v));
        }
        let _ = writeln!(s, "output.spectra = {}", self.output.spectra);
        let _ = writeln!(s, "output.checkpoint = {}", self.output.checkpoint);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }

    /// SHA-256 of the canonical text; checkpoints refuse to restart when it
    /// changes.
    pub fn hash(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_text().as_bytes());
        hasher.finalize().into()
    }

    pub fn hash_hex(&self) -> String {
        self.hash().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
model.l = 0.5
model.p = 1
grid.n_points = 64
grid.length = 40
initial.family = sech
initial.amplitude = 1.0
initial.width = 2.0
solver.dt = 1e-3
solver.t_end = 0.1
solver.snapshot_stride = 10
";

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_run_config(MINIMAL, None).unwrap();
        assert_eq!(cfg.grid_n, 64);
        assert_eq!(cfg.model.p(), 1);
        assert_eq!(cfg.solver.snapshot_stride, 10);
        assert!(cfg.diagnostics.radius_fit);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn unknown_key_is_line_anchored() {
        let text = format!("{MINIMAL}solver.dtt = 1\n");
        let err = parse_run_config(&text, None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 11"), "{msg}");
        assert!(msg.contains("solver.dtt"), "{msg}");
    }

    #[test]
    fn duplicate_and_malformed_lines_rejected() {
        let text = format!("{MINIMAL}model.l = 0.3\n");
        assert!(parse_run_config(&text, None).is_err());
        assert!(ConfigMap::parse("just words\n").is_err());
    }

    #[test]
    fn stride_must_divide_step_count() {
        let text = MINIMAL.replace("solver.snapshot_stride = 10", "solver.snapshot_stride = 13");
        let err = parse_run_config(&text, None).unwrap_err();
        assert!(err.to_string().contains("snapshot_stride"));
    }

    #[test]
    fn gevrey_list_and_guard() {
        let text = format!("{MINIMAL}diagnostics.gevrey = 0.4;0, 0.2;1.5\n");
        let cfg = parse_run_config(&text, None).unwrap();
        assert_eq!(cfg.diagnostics.gevrey.len(), 2);
        assert_eq!(cfg.diagnostics.gevrey[1].s, 1.5);

        let text = format!("{MINIMAL}diagnostics.gevrey = 200;0\n");
        assert!(parse_run_config(&text, None).is_err());
    }

    #[test]
    fn seed_override_and_hash_stability() {
        let a = parse_run_config(MINIMAL, None).unwrap();
        let b = parse_run_config(MINIMAL, Some(7)).unwrap();
        assert_ne!(a.hash(), b.hash());

        // t_end is excluded from the hash so resumed runs can extend it
        let longer = MINIMAL.replace("solver.t_end = 0.1", "solver.t_end = 0.2");
        let c = parse_run_config(&longer, None).unwrap();
        assert_eq!(a.hash(), c.hash());

        let other = MINIMAL.replace("model.l = 0.5", "model.l = 0.6");
        let d = parse_run_config(&other, None).unwrap();
        assert_ne!(a.hash(), d.hash());
    }
}
