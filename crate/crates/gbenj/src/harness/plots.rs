//! Emit gnuplot command files for a finished run or sweep directory. Each
//! script references only files inside the directory; missing inputs skip
//! that plot with a notice.

use std::fs;
use std::path::{Path, PathBuf};

use crate::harness::run::{SPECTRA_DIR, SUMMARY_FILE, TABLE_FILE};
use crate::harness::HarnessError;

pub struct PlotArtifacts {
    pub written: Vec<PathBuf>,
    pub notices: Vec<String>,
}

fn table_columns(dir: &Path) -> Option<Vec<String>> {
    let text = fs::read_to_string(dir.join(TABLE_FILE)).ok()?;
    let mut lines = text.lines();
    let header = lines.next()?;
    lines.next()?; // need at least one data row
    Some(header.split(',').map(|s| s.to_string()).collect())
}

fn summary_value(dir: &Path) -> Option<serde_json::Value> {
    let text = fs::read_to_string(dir.join(SUMMARY_FILE)).ok()?;
    serde_json::from_str(&text).ok()
}

/// Write the four plot scripts (norms, spectrum with fitted envelope,
/// sigma(t) with fitted power law, audit ratio) where inputs exist.
pub fn emit_plot_scripts(dir: &Path) -> Result<PlotArtifacts, HarnessError> {
    if !dir.is_dir() {
        return Err(HarnessError::Config(format!("{} is not a directory", dir.display())));
    }
    let mut written = Vec::new();
    let mut notices = Vec::new();
    let columns = table_columns(dir);
    let summary = summary_value(dir);

    // norms vs t
    match &columns {
        Some(cols) => {
            let mut plot_terms = vec![
                format!("\"{TABLE_FILE}\" using 1:2 with lines title \"mass\""),
                format!("\"{TABLE_FILE}\" using 1:3 with lines title \"energy\""),
                format!("\"{TABLE_FILE}\" using 1:4 with lines title \"sobolev\""),
            ];
            for (i, name) in cols.iter().enumerate() {
                if name.starts_with("gevrey[") {
                    plot_terms.push(format!(
                        "\"{TABLE_FILE}\" using 1:{} with lines title \"{name}\"",
                        i + 1
                    ));
                }
            }
            let script = format!(
                "# norms along the trajectory\n\
                 set datafile separator \",\"\n\
                 set terminal pngcairo size 1000,700\n\
                 set output \"norms_vs_t.png\"\n\
                 set xlabel \"t\"\n\
                 set key outside\n\
                 plot {}\n",
                plot_terms.join(", \\\n     ")
            );
            let path = dir.join("plot_norms.gp");
            fs::write(&path, script)?;
            written.push(path);
        }
        None => notices.push(format!("plot_norms.gp skipped: no {TABLE_FILE} with data rows")),
    }

    // spectrum snapshot with fitted envelope
    let spectra: Vec<PathBuf> = fs::read_dir(dir.join(SPECTRA_DIR))
        .map(|rd| {
            let mut v: Vec<PathBuf> = rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().map_or(false, |x| x == "dat"))
                .collect();
            v.sort();
            v
        })
        .unwrap_or_default();
    if let (Some(first), Some(last)) = (spectra.first(), spectra.last()) {
        let rel = |p: &PathBuf| format!("{}/{}", SPECTRA_DIR, p.file_name().unwrap().to_string_lossy());
        let envelope = summary
            .as_ref()
            .and_then(|s| {
                let f = s.get("final")?;
                let sigma = f.get("radius_sigma")?.as_f64()?;
                let r = f.get("radius_r")?.as_f64()?;
                let log_c = f.get("radius_log_c")?.as_f64()?;
                Some(format!(
                    "envelope(x) = exp({log_c}) * x**(-({r})) * exp(-({sigma})*x)\n"
                ))
            });
        let env_term = if envelope.is_some() {
            ", envelope(x) with lines lw 2 title \"fitted envelope\""
        } else {
            ""
        };
        let script = format!(
            "# spectrum snapshots with the fitted decay envelope\n\
             set terminal pngcairo size 1000,700\n\
             set output \"spectrum.png\"\n\
             set logscale y\n\
             set xlabel \"k\"\n\
             set ylabel \"|u_hat(k)|\"\n\
             set yrange [1e-18:*]\n\
             {}plot \"{}\" using 1:2 with points pt 7 ps 0.4 title \"initial\", \
             \"{}\" using 1:2 with points pt 5 ps 0.4 title \"final\"{}\n",
            envelope.unwrap_or_default(),
            rel(first),
            rel(last),
            env_term
        );
        let path = dir.join("plot_spectrum.gp");
        fs::write(&path, script)?;
        written.push(path);
    } else {
        notices.push(format!("plot_spectrum.gp skipped: no {SPECTRA_DIR}/*.dat dumps"));
    }

    // sigma(t) with fitted power law
    match &columns {
        Some(cols) => {
            let sigma_col = cols.len() - 2; // 1-based index of sigma_fit
            let decay = summary.as_ref().and_then(|s| {
                let d = s.get("decay")?;
                let gamma = d.get("gamma")?.as_f64()?;
                let c = d.get("c")?.as_f64()?;
                Some((gamma, c))
            });
            let (fit_def, fit_term, label) = match decay {
                Some((gamma, c)) => (
                    format!("fit_sigma(x) = {c} * x**(-{gamma})\n"),
                    ", fit_sigma(x) with lines lw 2 title \"power-law fit\"",
                    format!("set label 1 \"gamma_fit = {gamma}\" at graph 0.05, 0.9\n"),
                ),
                None => (String::new(), "", String::new()),
            };
            let script = format!(
                "# radius of analyticity along the trajectory\n\
                 set datafile separator \",\"\n\
                 set terminal pngcairo size 1000,700\n\
                 set output \"sigma_t.png\"\n\
                 set xlabel \"t\"\n\
                 set ylabel \"sigma(t)\"\n\
                 {fit_def}{label}plot \"{TABLE_FILE}\" using 1:{sigma_col} with linespoints title \"sigma(t)\"{fit_term}\n"
            );
            let path = dir.join("plot_sigma.gp");
            fs::write(&path, script)?;
            written.push(path);
        }
        None => notices.push(format!("plot_sigma.gp skipped: no {TABLE_FILE} with data rows")),
    }

    // audit ratio vs sigma (sweep directories)
    if dir.join("audit.csv").is_file() {
        let script = "# almost-conservation audit: ratio vs sigma\n\
             set datafile separator \",\"\n\
             set terminal pngcairo size 800,600\n\
             set output \"audit_ratio.png\"\n\
             set logscale xy\n\
             set xlabel \"sigma\"\n\
             set ylabel \"delta / (sigma^theta * X^3)\"\n\
             plot \"audit.csv\" using 1:6 with linespoints pt 7 title \"ratio\"\n"
            .to_string();
        let path = dir.join("plot_audit.gp");
        fs::write(&path, script)?;
        written.push(path);
    } else {
        notices.push("plot_audit.gp skipped: no audit.csv".to_string());
    }

    Ok(PlotArtifacts { written, notices })
}
