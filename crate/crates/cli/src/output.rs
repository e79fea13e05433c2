//! File emission. Every float is printed with 17 significant digits so
//! reruns are byte-comparable; JSON files are assembled by hand for the
//! same reason.

use std::fs;
use std::path::{Path, PathBuf};

use rnbeam_core::analysis::DecayReport;
use rnbeam_core::spectral::Spectrum;
use rnbeam_core::Result;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "null".into(),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub fn write_spectrum_csv(dir: &Path, spectrum: &Spectrum) -> Result<PathBuf> {
    let path = dir.join("spectrum.csv");
    let mut buf = Vec::new();
    spectrum.write_csv(&mut buf)?;
    fs::write(&path, buf)?;
    Ok(path)
}

pub fn write_summary(dir: &Path, spectrum: &Spectrum) -> Result<PathBuf> {
    let path = dir.join("summary.json");
    let body = format!(
        "{{\n  \"abscissa\": {},\n  \"n_eigenvalues\": {},\n  \"certified_count\": {}\n}}\n",
        fmt_f64(spectrum.abscissa()),
        spectrum.entries.len(),
        spectrum.certified_count()
    );
    fs::write(&path, body)?;
    Ok(path)
}

pub fn write_trace_csv(dir: &Path, trace: &rnbeam_core::EnergyTrace) -> Result<PathBuf> {
    let path = dir.join("trace.csv");
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    fs::write(&path, buf)?;
    Ok(path)
}

pub fn decay_report_json(report: &DecayReport) -> String {
    let flags: Vec<String> = report.flags.iter().map(|f| format!("\"{f}\"")).collect();
    format!(
        "{{\n  \"mu_fit\": {},\n  \"mu_spec\": {},\n  \"rel_mismatch\": {},\n  \
         \"fit_window\": [{}, {}],\n  \"r_squared\": {},\n  \"flags\": [{}]\n}}\n",
        fmt_f64(report.mu_fit),
        fmt_opt(report.mu_spec),
        fmt_opt(report.rel_mismatch),
        fmt_f64(report.fit_window.0),
        fmt_f64(report.fit_window.1),
        fmt_f64(report.r_squared),
        flags.join(", ")
    )
}

pub fn write_decay_report(dir: &Path, report: &DecayReport) -> Result<PathBuf> {
    let path = dir.join("decay_report.json");
    fs::write(&path, decay_report_json(report))?;
    Ok(path)
}

pub struct SweepRow {
    pub param_value: f64,
    pub abscissa: f64,
    pub mu_fit: f64,
    pub rel_mismatch: f64,
    pub flags: Vec<String>,
}

pub fn write_sweep_csv(dir: &Path, rows: &[SweepRow]) -> Result<PathBuf> {
    let path = dir.join("sweep.csv");
    let mut body = String::from("param_value,abscissa,mu_fit,rel_mismatch,flags\n");
    for row in rows {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(row.param_value),
            fmt_f64(row.abscissa),
            fmt_f64(row.mu_fit),
            fmt_f64(row.rel_mismatch),
            row.flags.join(";")
        ));
    }
    fs::write(&path, body)?;
    Ok(path)
}
