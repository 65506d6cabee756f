//! CSV and JSON rendering plus atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use fracheat_core::spde::SpdeReport;
use fracheat_core::{PathEnsemble, VerificationReport};

/// Environment variable naming the directory used when no `--out` is given.
pub const OUT_DIR_VAR: &str = "FRACHEAT_OUT_DIR";

/// 17 significant digits, enough for an exact round trip.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `t,s,value` rows.
pub fn matrix_csv(rows: &[(f64, f64, f64)]) -> Vec<u8> {
    csv(["t", "s", "value"], rows.iter().map(|&(t, s, v)| [num(t), num(s), num(v)]))
}

pub fn reports_csv(reports: &[VerificationReport]) -> Vec<u8> {
    csv(
        ["check", "H", "d", "worst_abs", "worst_rel", "t", "s", "pass"],
        reports.iter().map(|r| {
            [
                r.check.clone(),
                num(r.h),
                r.d.map(|d| d.to_string()).unwrap_or_default(),
                num(r.worst_abs),
                num(r.worst_rel),
                opt(r.t),
                opt(r.s),
                r.pass.to_string(),
            ]
        }),
    )
}

pub fn paths_csv(e: &PathEnsemble) -> Vec<u8> {
    let rows = e
        .paths
        .iter()
        .enumerate()
        .flat_map(|(p, path)| e.times.iter().zip(path).map(move |(&t, &v)| [p.to_string(), num(t), num(v)]));
    csv(["path", "t", "value"], rows)
}

pub fn spde_csv(r: &SpdeReport) -> Vec<u8> {
    csv(
        ["t", "s", "value", "std_err", "n"],
        r.rows.iter().map(|w| [num(w.t), num(w.s), num(w.estimate), num(w.std_err), w.n.to_string()]),
    )
}

pub fn json(v: &impl Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}

/// `--out` if given, else `<command>.<ext>` in `$FRACHEAT_OUT_DIR` or the working directory.
pub fn output_path(out: Option<&Path>, stem: &str, ext: &str) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => {
            let dir = std::env::var_os(OUT_DIR_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{stem}.{ext}"))
        }
    }
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn empty_matrix_is_header_only() {
        assert_eq!(matrix_csv(&[]), b"t,s,value\n");
    }
}
