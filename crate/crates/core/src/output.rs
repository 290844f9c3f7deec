//! Columnar plain-text output files.
//!
//! Every data file starts with `#`-prefixed header lines naming the schema,
//! the producing command, the config hash and the column labels (with
//! units), followed by whitespace-separated rows in `{:.12e}` format, so the
//! files diff cleanly and load with any column reader. Wall-clock timestamps
//! go into a `.meta` sidecar, never into the data file itself.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;

use crate::config::SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::pulse::PulseRecord;

/// Environment variable naming the default output directory when `--out` is
/// not given.
pub const OUT_ENV: &str = "NUCAVITY_OUT";

/// Output directory resolution: CLI flag, then the environment variable,
/// then `./out`.
pub fn resolve_out_dir(cli: Option<PathBuf>) -> PathBuf {
    cli.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Provenance recorded at the top of every data file.
#[derive(Debug, Clone)]
pub struct FileHeader {
    pub command: String,
    pub config_sha256: String,
    /// Extra `key: value` lines (parameters, units, seeds).
    pub extra: Vec<(String, String)>,
}

impl FileHeader {
    pub fn new(command: &str, config_sha256: &str) -> Self {
        Self {
            command: command.to_string(),
            config_sha256: config_sha256.to_string(),
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }
}

/// Write one table: header lines, a `columns:` line, then the rows.
/// A `.meta` sidecar records when the file was produced.
pub fn write_table(
    path: &Path,
    header: &FileHeader,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::Invalid(format!(
                "row with {} values does not match {} columns",
                row.len(),
                columns.len()
            )));
        }
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = String::new();
    writeln!(text, "# schema: {SCHEMA_VERSION}").unwrap();
    writeln!(text, "# command: {}", header.command).unwrap();
    writeln!(text, "# config_sha256: {}", header.config_sha256).unwrap();
    for (k, v) in &header.extra {
        writeln!(text, "# {k}: {v}").unwrap();
    }
    writeln!(text, "# columns: {}", columns.join("  ")).unwrap();
    for row in rows {
        let mut line = String::new();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            write!(line, "{v:.12e}").unwrap();
        }
        writeln!(text, "{line}").unwrap();
    }
    fs::write(path, text)?;
    write_sidecar(path)?;
    Ok(())
}

fn write_sidecar(path: &Path) -> Result<()> {
    let meta = sidecar_path(path);
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    fs::write(meta, format!("generated_at_unix: {stamp}\n"))?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".meta");
    PathBuf::from(os)
}

/// Persist one sampled pulse: `t_s  re_amp  im_amp` with the photon number
/// and seed in the header.
pub fn write_pulse(path: &Path, pulse: &PulseRecord, header: &FileHeader) -> Result<()> {
    let mut h = header.clone().with("n_photons", format!("{:.12e}", pulse.n_photons));
    if let Some(seed) = pulse.seed {
        h = h.with("seed", seed);
    }
    let rows: Vec<Vec<f64>> = pulse
        .times
        .iter()
        .zip(&pulse.amplitude)
        .map(|(&t, a)| vec![t, a.re, a.im])
        .collect();
    write_table(path, &h, &["t_s", "re_amp_sqrt_per_s", "im_amp_sqrt_per_s"], &rows)
}

/// Read a pulse written by [`write_pulse`] (or any file with the same
/// layout). The photon number comes from the `n_photons` header if present,
/// otherwise from the trapezoidal integral of the samples.
pub fn read_pulse(path: &Path) -> Result<PulseRecord> {
    let file = fs::File::open(path)?;
    let mut times = Vec::new();
    let mut amplitude = Vec::new();
    let mut n_photons: Option<f64> = None;
    let mut seed: Option<u64> = None;
    for line in BufReader::new(file).lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("n_photons:") {
                n_photons = v.trim().parse().ok();
            } else if let Some(v) = rest.strip_prefix("seed:") {
                seed = v.trim().parse().ok();
            }
            continue;
        }
        let fields: Vec<f64> = trimmed
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Invalid(format!("bad number {s:?} in {}", path.display())))
            })
            .collect::<Result<_>>()?;
        if fields.len() != 3 {
            return Err(Error::Invalid(format!(
                "pulse rows need 3 columns (t re im), got {} in {}",
                fields.len(),
                path.display()
            )));
        }
        times.push(fields[0]);
        amplitude.push(C64::new(fields[1], fields[2]));
    }
    let mut rec = PulseRecord { times, amplitude, n_photons: 0.0, seed };
    if rec.times.len() < 2 {
        return Err(Error::Invalid(format!("pulse file {} has too few samples", path.display())));
    }
    rec.n_photons = n_photons.unwrap_or_else(|| rec.photon_integral());
    rec.validate()?;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{centered_grid, gaussian_pulse};
    use approx::assert_relative_eq;

    #[test]
    fn table_roundtrip_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.dat");
        let h = FileHeader::new("toy", "deadbeef").with("gamma_per_s", 1.0);
        write_table(&path, &h, &["x", "y"], &[vec![1.0, 2.0], vec![3.0, 4.5e-7]]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# schema: 1\n# command: toy\n"));
        assert!(text.contains("# columns: x  y"));
        assert!(text.contains("4.500000000000e-7"));
        // timestamp lives in the sidecar, not the data file
        assert!(!text.contains("generated_at"));
        assert!(sidecar_path(&path).exists());
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let h = FileHeader::new("toy", "0");
        let err = write_table(&dir.path().join("t.dat"), &h, &["x", "y"], &[vec![1.0]]);
        assert!(err.is_err());
    }

    #[test]
    fn pulse_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pulse.dat");
        let grid = centered_grid(1.0, 7.0, 32);
        let p = gaussian_pulse(1.0, 2.5, &grid).unwrap();
        write_pulse(&path, &p, &FileHeader::new("simulate", "0")).unwrap();
        let q = read_pulse(&path).unwrap();
        assert_eq!(p.times.len(), q.times.len());
        assert_relative_eq!(q.n_photons, 2.5, max_relative = 1e-9);
        for (a, b) in p.amplitude.iter().zip(&q.amplitude) {
            assert_relative_eq!(a.re, b.re, max_relative = 1e-9, epsilon = 1e-15);
        }
    }

    #[test]
    fn out_dir_resolution_order() {
        let cli = resolve_out_dir(Some(PathBuf::from("explicit")));
        assert_eq!(cli, PathBuf::from("explicit"));
        if std::env::var_os(OUT_ENV).is_none() {
            assert_eq!(resolve_out_dir(None), PathBuf::from("out"));
        }
    }
}
