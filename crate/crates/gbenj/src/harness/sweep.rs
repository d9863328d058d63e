//! Parameter-sweep studies: the almost-conservation sigma audit, the
//! T-scaling lower-bound study, and plain amplitude / nonlinearity-power
//! sweeps. Members run in a share-nothing worker pool, each writing to its
//! own subdirectory; the single-threaded aggregator merges summaries.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::analyticity::{lower_bound_audit, DecayLaw, Verdict};
use crate::diagnostics::almost_conservation_audit;
use crate::harness::config::{run_config_from_map, ConfigMap, InitialData, RunConfig};
use crate::harness::initial::build_initial;
use crate::harness::run::{radius_series_from_table, run_with_config, RunSummary, TABLE_FILE};
use crate::harness::{fmt_f64, HarnessError};
use crate::operators::ModelParams;
use crate::spectral::Grid;

#[derive(Clone, Debug)]
pub enum StudyKind {
    /// Almost-conservation audit over a list of Gevrey weights.
    SigmaAudit { sigmas: Vec<f64>, theta: f64, b: f64, t_horizon: f64 },
    /// Radius lower-bound study over increasing horizons.
    TScaling { t_values: Vec<f64>, epsilon: f64 },
    AmplitudeSweep { amplitudes: Vec<f64> },
    PSweep { p_values: Vec<u32> },
}

/// Parse a study config: `study.*` keys on top of a base run config.
pub fn parse_study(
    text: &str,
    seed_override: Option<u64>,
) -> Result<(RunConfig, StudyKind), HarnessError> {
    let map = ConfigMap::parse(text)?;
    let kind = match map.require_str("study.kind")?.as_str() {
        "sigma_audit" => {
            let sigmas = map
                .get_f64_list("study.sigmas")?
                .ok_or_else(|| HarnessError::Config("sigma_audit needs study.sigmas".into()))?;
            if sigmas.is_empty() {
                return Err(HarnessError::Config("study.sigmas must be nonempty".into()));
            }
            let theta = map.get_f64("study.theta")?.unwrap_or(0.5);
            let b = map.get_f64("study.b")?.unwrap_or(0.6);
            let t_horizon = map.get_f64("study.t_horizon")?.ok_or_else(|| {
                HarnessError::Config("sigma_audit needs study.t_horizon".into())
            })?;
            StudyKind::SigmaAudit { sigmas, theta, b, t_horizon }
        }
        "t_scaling" => {
            let t_values = map
                .get_f64_list("study.t_values")?
                .ok_or_else(|| HarnessError::Config("t_scaling needs study.t_values".into()))?;
            if t_values.is_empty() {
                return Err(HarnessError::Config("study.t_values must be nonempty".into()));
            }
            if t_values.iter().any(|&t| t < 1.0) {
                return Err(HarnessError::Config(
                    "study.t_values must all be >= 1 (asymptotic regime)".into(),
                ));
            }
            let epsilon = map.get_f64("study.epsilon")?.unwrap_or(0.01);
            StudyKind::TScaling { t_values, epsilon }
        }
        "amplitude_sweep" => {
            let amplitudes = map.get_f64_list("study.amplitudes")?.ok_or_else(|| {
                HarnessError::Config("amplitude_sweep needs study.amplitudes".into())
            })?;
            StudyKind::AmplitudeSweep { amplitudes }
        }
        "p_sweep" => {
            let raw = map
                .get_f64_list("study.p_values")?
                .ok_or_else(|| HarnessError::Config("p_sweep needs study.p_values".into()))?;
            let p_values = raw.iter().map(|&v| v as u32).collect();
            StudyKind::PSweep { p_values }
        }
        other => {
            return Err(HarnessError::Config(format!(
                "study.kind '{other}' is not one of sigma_audit | t_scaling | amplitude_sweep | p_sweep"
            )))
        }
    };
    let base = run_config_from_map(&map, seed_override)?;
    map.check_unknown()?;
    Ok((base, kind))
}

#[derive(Serialize, Clone, Debug)]
pub struct MemberRecord {
    pub index: usize,
    pub label: String,
    pub status: String,
    pub mass_drift: Option<f64>,
    pub energy_drift: Option<f64>,
    pub final_radius: Option<f64>,
}

#[derive(Serialize, Clone, Debug)]
pub struct StudySummary {
    pub schema: String,
    pub kind: String,
    pub members: Vec<MemberRecord>,
    pub verdict: Option<String>,
    pub gamma_bound: Option<f64>,
    pub gamma_fit: Option<f64>,
    pub theta_fit: Option<f64>,
    pub failed_members: usize,
}

#[derive(Debug)]
pub struct SweepArtifacts {
    pub out_dir: PathBuf,
    pub summary: StudySummary,
}

fn member_config(base: &RunConfig, kind: &StudyKind, idx: usize) -> Result<RunConfig, HarnessError> {
    let mut cfg = base.clone();
    match kind {
        StudyKind::TScaling { t_values, .. } => {
            cfg.solver.t_end = t_values[idx];
            cfg.diagnostics.radius_fit = true;
        }
        StudyKind::AmplitudeSweep { amplitudes } => {
            let a = amplitudes[idx];
            cfg.initial = match cfg.initial {
                InitialData::GaussianSpectrum { sigma0, s, .. } => {
                    InitialData::GaussianSpectrum { sigma0, s, amplitude: a }
                }
                InitialData::Sech { width, .. } => InitialData::Sech { amplitude: a, width },
                other => {
                    return Err(HarnessError::Config(format!(
                        "amplitude_sweep needs a gaussian_spectrum or sech initial family, got {other:?}"
                    )))
                }
            };
        }
        StudyKind::PSweep { p_values } => {
            cfg.model = ModelParams::new(cfg.model.l(), p_values[idx])
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        StudyKind::SigmaAudit { .. } => {}
    }
    let n_steps = cfg.solver.n_steps().map_err(|e| HarnessError::Config(e.to_string()))?;
    if n_steps % cfg.solver.snapshot_stride as u64 != 0 {
        return Err(HarnessError::Config(format!(
            "member {idx}: snapshot_stride {} does not divide step count {n_steps}",
            cfg.solver.snapshot_stride
        )));
    }
    Ok(cfg)
}

fn member_labels(kind: &StudyKind) -> Vec<String> {
    match kind {
        StudyKind::SigmaAudit { sigmas, .. } => {
            sigmas.iter().map(|s| format!("sigma={s}")).collect()
        }
        StudyKind::TScaling { t_values, .. } => t_values.iter().map(|t| format!("T={t}")).collect(),
        StudyKind::AmplitudeSweep { amplitudes } => {
            amplitudes.iter().map(|a| format!("amplitude={a}")).collect()
        }
        StudyKind::PSweep { p_values } => p_values.iter().map(|p| format!("p={p}")).collect(),
    }
}

/// Run study members concurrently in a worker pool, collecting per-member
/// outcomes in index order.
fn run_members(
    base: &RunConfig,
    kind: &StudyKind,
    labels: &[String],
    out_dir: &Path,
    jobs: usize,
) -> Vec<(usize, Result<RunSummary, String>)> {
    let n = labels.len();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<RunSummary, String>)>> = Mutex::new(Vec::new());
    let workers = jobs.max(1).min(n);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= n {
                    break;
                }
                let member_dir = out_dir.join(format!("member_{idx:02}"));
                let outcome = member_config(base, kind, idx)
                    .and_then(|cfg| run_with_config(&cfg, &member_dir, None))
                    .map(|artifacts| artifacts.summary)
                    .map_err(|e| e.to_string());
                results.lock().unwrap().push((idx, outcome));
            });
        }
    });
    let mut out = results.into_inner().unwrap();
    out.sort_by_key(|(i, _)| *i);
    out
}

/// `sweep` subcommand: run a study spec.
pub fn cli_sweep(
    study_path: &Path,
    out_dir: &Path,
    jobs: usize,
    seed: Option<u64>,
) -> Result<SweepArtifacts, HarnessError> {
    let text = fs::read_to_string(study_path)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", study_path.display())))?;
    let (base, kind) = parse_study(&text, seed)?;
    run_sweep(&base, &kind, out_dir, jobs)
}

pub fn run_sweep(
    base: &RunConfig,
    kind: &StudyKind,
    out_dir: &Path,
    jobs: usize,
) -> Result<SweepArtifacts, HarnessError> {
    fs::create_dir_all(out_dir)?;
    match kind {
        StudyKind::SigmaAudit { sigmas, theta, b, t_horizon } => {
            run_sigma_audit(base, sigmas, *theta, *b, *t_horizon, out_dir)
        }
        StudyKind::TScaling { t_values, epsilon } => {
            run_t_scaling(base, kind, t_values, *epsilon, out_dir, jobs)
        }
        StudyKind::AmplitudeSweep { .. } | StudyKind::PSweep { .. } => {
            run_plain_sweep(base, kind, out_dir, jobs)
        }
    }
}

/// The audit shares one two-sided trajectory across every sigma (the run
/// does not depend on the weight), so its rows are computed in-process
/// rather than as separate pool members.
fn run_sigma_audit(
    base: &RunConfig,
    sigmas: &[f64],
    theta: f64,
    b: f64,
    t_horizon: f64,
    out_dir: &Path,
) -> Result<SweepArtifacts, HarnessError> {
    let grid = Grid::new(base.grid_n, base.grid_length)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let (u0, _) = build_initial(base, &grid)?;
    let table = almost_conservation_audit(&u0, &base.model, &base.solver, sigmas, t_horizon, theta, b)
        .map_err(HarnessError::from)?;

    let mut csv = String::from("sigma,initial_sq,sup_sq,delta,bourgain,ratio\n");
    for row in &table.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(row.sigma),
            fmt_f64(row.initial_sq),
            fmt_f64(row.sup_sq),
            fmt_f64(row.delta),
            fmt_f64(row.bourgain),
            fmt_f64(row.ratio.unwrap_or(f64::NAN)),
        ));
    }
    csv.push_str(&format!(
        "# theta_fit = {}\n",
        table.theta_fit.map(fmt_f64).unwrap_or_else(|| "none".into())
    ));
    fs::write(out_dir.join("audit.csv"), csv)?;

    let members = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| MemberRecord {
            index: i,
            label: format!("sigma={}", row.sigma),
            status: "ok".into(),
            mass_drift: None,
            energy_drift: None,
            final_radius: None,
        })
        .collect();
    let summary = StudySummary {
        schema: "gbenj-study-summary-v1".into(),
        kind: "sigma_audit".into(),
        members,
        verdict: None,
        gamma_bound: None,
        gamma_fit: None,
        theta_fit: table.theta_fit,
        failed_members: 0,
    };
    write_study_summary(out_dir, &summary)?;
    Ok(SweepArtifacts { out_dir: out_dir.to_path_buf(), summary })
}

fn run_t_scaling(
    base: &RunConfig,
    kind: &StudyKind,
    t_values: &[f64],
    epsilon: f64,
    out_dir: &Path,
    jobs: usize,
) -> Result<SweepArtifacts, HarnessError> {
    let labels = member_labels(kind);
    let outcomes = run_members(base, kind, &labels, out_dir, jobs);

    let mut members = Vec::new();
    let mut failed = 0usize;
    let mut rows = String::from("T,sigma_T,status\n");
    for ((idx, outcome), label) in outcomes.iter().zip(&labels) {
        match outcome {
            Ok(summary) => {
                let sig = summary.final_state.radius_sigma;
                rows.push_str(&format!(
                    "{},{},ok\n",
                    fmt_f64(t_values[*idx]),
                    fmt_f64(sig.unwrap_or(f64::NAN))
                ));
                members.push(MemberRecord {
                    index: *idx,
                    label: label.clone(),
                    status: "ok".into(),
                    mass_drift: Some(summary.drift.mass_rel),
                    energy_drift: Some(summary.drift.energy_rel),
                    final_radius: sig,
                });
            }
            Err(e) => {
                failed += 1;
                rows.push_str(&format!("{},NaN,error\n", fmt_f64(t_values[*idx])));
                members.push(MemberRecord {
                    index: *idx,
                    label: label.clone(),
                    status: format!("error: {e}"),
                    mass_drift: None,
                    energy_drift: None,
                    final_radius: None,
                });
            }
        }
    }
    fs::write(out_dir.join("audit_t.csv"), rows)?;

    // decay fit over the longest successful member's dense sigma(t) series
    let longest = outcomes
        .iter()
        .filter(|(_, o)| o.is_ok())
        .max_by(|(i, _), (j, _)| t_values[*i].partial_cmp(&t_values[*j]).unwrap());
    let (verdict, gamma_bound, gamma_fit) = match longest {
        None => (None, None, None),
        Some((idx, _)) => {
            let table = out_dir.join(format!("member_{idx:02}")).join(TABLE_FILE);
            let series = radius_series_from_table(&table, base.diagnostics.gevrey.len())?;
            let t_lo = t_values.iter().cloned().fold(f64::INFINITY, f64::min).max(1.0);
            let t_hi = t_values[*idx];
            match lower_bound_audit(&series, &base.model, epsilon, (t_lo, t_hi), None) {
                Ok(audit) => {
                    let verdict = match audit.verdict {
                        Verdict::PassPlateau => "pass_plateau",
                        Verdict::PassExponent => "pass_exponent",
                        Verdict::Violation => "violation",
                    };
                    let gamma = match &audit.decay {
                        DecayLaw::PowerLaw(f) => Some(f.gamma),
                        DecayLaw::Plateau { .. } => None,
                    };
                    (Some(verdict.to_string()), Some(audit.gamma_bound), gamma)
                }
                Err(e) => (Some(format!("fit unavailable: {e}")), None, None),
            }
        }
    };

    let summary = StudySummary {
        schema: "gbenj-study-summary-v1".into(),
        kind: "t_scaling".into(),
        members,
        verdict,
        gamma_bound,
        gamma_fit,
        theta_fit: None,
        failed_members: failed,
    };
    write_study_summary(out_dir, &summary)?;
    let artifacts = SweepArtifacts { out_dir: out_dir.to_path_buf(), summary };
    if failed > 0 {
        return Err(HarnessError::Runtime(format!(
            "{failed} sweep member(s) failed; aggregate written to {}",
            artifacts.out_dir.display()
        )));
    }
    Ok(artifacts)
}

fn run_plain_sweep(
    base: &RunConfig,
    kind: &StudyKind,
    out_dir: &Path,
    jobs: usize,
) -> Result<SweepArtifacts, HarnessError> {
    let labels = member_labels(kind);
    let outcomes = run_members(base, kind, &labels, out_dir, jobs);

    let mut members = Vec::new();
    let mut failed = 0usize;
    let mut rows = String::from("member,mass_drift,energy_drift,final_radius,status\n");
    for ((idx, outcome), label) in outcomes.iter().zip(&labels) {
        match outcome {
            Ok(summary) => {
                rows.push_str(&format!(
                    "{label},{},{},{},ok\n",
                    fmt_f64(summary.drift.mass_rel),
                    fmt_f64(summary.drift.energy_rel),
                    fmt_f64(summary.final_state.radius_sigma.unwrap_or(f64::NAN)),
                ));
                members.push(MemberRecord {
                    index: *idx,
                    label: label.clone(),
                    status: "ok".into(),
                    mass_drift: Some(summary.drift.mass_rel),
                    energy_drift: Some(summary.drift.energy_rel),
                    final_radius: summary.final_state.radius_sigma,
                });
            }
            Err(e) => {
                failed += 1;
                rows.push_str(&format!("{label},NaN,NaN,NaN,error\n"));
                members.push(MemberRecord {
                    index: *idx,
                    label: label.clone(),
                    status: format!("error: {e}"),
                    mass_drift: None,
                    energy_drift: None,
                    final_radius: None,
                });
            }
        }
    }
    fs::write(out_dir.join("aggregate.csv"), rows)?;

    let summary = StudySummary {
        schema: "gbenj-study-summary-v1".into(),
        kind: match kind {
            StudyKind::AmplitudeSweep { .. } => "amplitude_sweep".into(),
            StudyKind::PSweep { .. } => "p_sweep".into(),
            _ => unreachable!(),
        },
        members,
        verdict: None,
        gamma_bound: None,
        gamma_fit: None,
        theta_fit: None,
        failed_members: failed,
    };
    write_study_summary(out_dir, &summary)?;
    let artifacts = SweepArtifacts { out_dir: out_dir.to_path_buf(), summary };
    if failed > 0 {
        return Err(HarnessError::Runtime(format!(
            "{failed} sweep member(s) failed; aggregate written to {}",
            artifacts.out_dir.display()
        )));
    }
    Ok(artifacts)
}

fn write_study_summary(out_dir: &Path, summary: &StudySummary) -> Result<(), HarnessError> {
    fs::write(
        out_dir.join("study_summary.json"),
        serde_json::to_string_pretty(summary).expect("summary serialises") + "\n",
    )?;
    Ok(())
}
