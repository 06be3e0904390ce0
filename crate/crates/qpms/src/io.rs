//! CSV and TOML readers and writers. Floats are written in Rust's shortest
//! round-trip form; files are replaced atomically.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use qpms_core::hg_modes::UniformGrid;
use qpms_core::sfg_stats::{SampledKernel, SchmidtModel};

use crate::CliError;

/// Shortest representation that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// In-memory CSV table with optional `#` comment lines above the header.
pub struct Table {
    comments: Vec<String>,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { comments: Vec::new(), writer })
    }

    pub fn comment(&mut self, key: &str, value: impl std::fmt::Display) {
        self.comments.push(format!("# {key} = {value}"));
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(self) -> Result<Vec<u8>, CliError> {
        let body = self.writer.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
        let mut out = Vec::with_capacity(body.len());
        for c in &self.comments {
            out.extend_from_slice(c.as_bytes());
            out.push(b'\n');
        }
        out.extend(body);
        Ok(out)
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Usage(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchmidtFile {
    modes: usize,
    coefficients: BTreeMap<String, f64>,
}

/// Raw Schmidt coefficients: `modes = N` plus a `[coefficients]` table keyed
/// by mode index; unlisted modes are zero. Range checks are left to the
/// caller.
pub fn read_schmidt_coefficients(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read Schmidt file {}: {e}", path.display())))?;
    parse_schmidt(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_schmidt(text: &str) -> Result<Vec<f64>, String> {
    let file: SchmidtFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let mut c = vec![0.0; file.modes];
    for (key, value) in file.coefficients {
        let n: usize = key.parse().map_err(|_| format!("coefficient key {key:?} is not a mode index"))?;
        if n >= file.modes {
            return Err(format!("coefficient for mode {n} but only {} modes", file.modes));
        }
        c[n] = value;
    }
    Ok(c)
}

pub fn read_schmidt_file(path: &Path) -> Result<SchmidtModel, CliError> {
    Ok(SchmidtModel::new(read_schmidt_coefficients(path)?)?)
}

pub fn format_schmidt(model: &SchmidtModel) -> String {
    let mut s = format!("modes = {}\n\n[coefficients]\n", model.len());
    for (n, c) in model.coefficients().iter().enumerate() {
        if *c != 0.0 {
            s.push_str(&format!("{n} = {}\n", fmt_f64(*c)));
        }
    }
    s
}

/// Reads a kernel sampled on a square uniform grid. Columns `t_ps`,
/// `t_prime_ps`, `re`, `im`, row-major in `t` then `t'`.
pub fn read_kernel_csv(path: &Path) -> Result<SampledKernel, CliError> {
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["t_ps", "t_prime_ps", "re", "im"] {
        return Err(bad(format!("expected columns t_ps,t_prime_ps,re,im, got {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut v = [0.0; 4];
        for (slot, field) in v.iter_mut().zip(record.iter()) {
            *slot = field.trim().parse().map_err(|_| bad(format!("not a number: {field:?}")))?;
        }
        rows.push(v);
    }
    let n = (rows.len() as f64).sqrt().round() as usize;
    if n < 2 || n * n != rows.len() {
        return Err(bad(format!("{} rows do not form a square grid", rows.len())));
    }
    let t: Vec<f64> = (0..n).map(|j| rows[j][1] * 1e-12).collect();
    let half_span = 0.5 * (t[n - 1] - t[0]);
    let center = 0.5 * (t[n - 1] + t[0]);
    if center.abs() > 1e-6 * half_span {
        return Err(bad("time grid must be centred on zero".into()));
    }
    let grid = UniformGrid::new(0.0, half_span, n)?;
    for (idx, r) in rows.iter().enumerate() {
        let (i, j) = (idx / n, idx % n);
        let tol = 1e-6 * grid.spacing();
        if (r[0] * 1e-12 - grid.point(i)).abs() > tol || (r[1] * 1e-12 - grid.point(j)).abs() > tol {
            return Err(bad(format!("row {} is off the uniform grid", idx + 1)));
        }
    }
    let values = rows.iter().map(|r| Complex64::new(r[2], r[3])).collect();
    Ok(SampledKernel::new(grid, values)?)
}

pub fn kernel_table(kernel: &SampledKernel) -> Result<Table, CliError> {
    let n = kernel.grid.samples();
    let mut t = Table::new(["t_ps", "t_prime_ps", "re", "im"])?;
    for i in 0..n {
        for j in 0..n {
            let g = kernel.values[i * n + j];
            t.row([
                fmt_f64(kernel.grid.point(i) * 1e12),
                fmt_f64(kernel.grid.point(j) * 1e12),
                fmt_f64(g.re),
                fmt_f64(g.im),
            ])?;
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0, -2.5, 1e-300, 2.955576e24, 0.1 + 0.2, 1.0 / 3.0, 7.66e7, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn schmidt_round_trip() {
        let model = qpms_core::sfg_stats::default_schmidt_model();
        let back = SchmidtModel::new(parse_schmidt(&format_schmidt(&model)).unwrap()).unwrap();
        assert_eq!(back, model);
        assert!(parse_schmidt("modes = 4\n[coefficients]\n7 = 0.1\n").is_err());
        assert!(parse_schmidt("modes = 4\n[coefficients]\nx = 0.1\n").is_err());
    }

    #[test]
    fn kernel_csv_round_trip() {
        let grid = UniformGrid::new(0.0, 500e-12, 9).unwrap();
        let k = SampledKernel::from_fn(grid, |t, s| Complex64::new((t * 1e10).cos(), (s * 3e9).sin()));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.csv");
        write_atomic(&path, &kernel_table(&k).unwrap().into_bytes().unwrap()).unwrap();
        let back = read_kernel_csv(&path).unwrap();
        assert_eq!(back.grid.samples(), 9);
        for (a, b) in back.values.iter().zip(&k.values) {
            assert_eq!(a, b);
        }
    }
}
