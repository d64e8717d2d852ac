//! CSV import and export. Numbers are written as `{:.16e}` (17 significant digits) so that
//! doubles survive a round trip, and files are replaced atomically.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, QParam, Sign, SignedLatticeFunction, SpectralFunction};
use crate::quadrature::TimeGrid;
use crate::scalar::Real;
use crate::solvers::SolutionTrajectory;
use crate::special::KernelTable;
use num_complex::Complex;

pub const KERNEL_HEADER: &str = "m,argument,re,im,certified_error";
pub const SPECTRUM_HEADER: &str = "j,sign,xi,re,im";
pub const SAMPLES_HEADER: &str = "k,sign,re,im";
pub const TRAJECTORY_HEADER: &str = "t,k,sign,x,re_u,im_u";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes `body` to `path` through a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(body.as_bytes()).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn render_kernel<T: Real>(table: &KernelTable<T>) -> String {
    let mut out = String::from(KERNEL_HEADER);
    out.push('\n');
    for r in table.rows() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.m,
            num(r.argument),
            num(r.re),
            num(r.im),
            num(r.certified_error)
        ));
    }
    out
}

fn channels<'a, T: 'a>(pos: &'a [Complex<T>], neg: &'a [Complex<T>]) -> [(Sign, &'a [Complex<T>]); 2] {
    [(Sign::Pos, pos), (Sign::Neg, neg)]
}

pub fn render_spectrum<T: Real>(g: &SpectralFunction<T>) -> String {
    let spec = g.spec();
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for (sign, vals) in channels(g.pos(), g.neg()) {
        for (v, j) in vals.iter().zip(spec.indices()) {
            let xi = sign.factor::<f64>() * spec.point(j).as_f64();
            out.push_str(&format!("{j},{},{},{},{}\n", sign.as_char(), num(xi), num(v.re.as_f64()), num(v.im.as_f64())));
        }
    }
    out
}

pub fn render_samples<T: Real>(f: &SignedLatticeFunction<T>) -> String {
    let spec = f.spec();
    let mut out = String::from(SAMPLES_HEADER);
    out.push('\n');
    for (sign, vals) in channels(f.pos(), f.neg()) {
        for (v, k) in vals.iter().zip(spec.indices()) {
            out.push_str(&format!("{k},{},{},{}\n", sign.as_char(), num(v.re.as_f64()), num(v.im.as_f64())));
        }
    }
    out
}

pub fn render_trajectory<T: Real>(traj: &SolutionTrajectory<T>) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for (t, u) in traj.grid().nodes().iter().zip(traj.physical()) {
        let spec = u.spec();
        let t = num(t.as_f64());
        for (sign, vals) in channels(u.pos(), u.neg()) {
            for (v, k) in vals.iter().zip(spec.indices()) {
                let x = sign.factor::<f64>() * spec.point(k).as_f64();
                out.push_str(&format!(
                    "{t},{k},{},{},{},{}\n",
                    sign.as_char(),
                    num(x),
                    num(v.re.as_f64()),
                    num(v.im.as_f64())
                ));
            }
        }
    }
    out
}

pub fn write_kernel_csv<T: Real>(path: &Path, table: &KernelTable<T>) -> Result<()> {
    write_atomic(path, &render_kernel(table))
}

pub fn write_spectrum_csv<T: Real>(path: &Path, g: &SpectralFunction<T>) -> Result<()> {
    write_atomic(path, &render_spectrum(g))
}

pub fn write_samples_csv<T: Real>(path: &Path, f: &SignedLatticeFunction<T>) -> Result<()> {
    write_atomic(path, &render_samples(f))
}

pub fn write_trajectory_csv<T: Real>(path: &Path, traj: &SolutionTrajectory<T>) -> Result<()> {
    write_atomic(path, &render_trajectory(traj))
}

fn reader(path: &Path, header: &str) -> Result<csv::Reader<std::fs::File>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let got: Vec<String> = rdr
        .headers()
        .map_err(|e| io_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let want: Vec<&str> = header.split(',').collect();
    if got != want {
        return Err(Error::Format(format!(
            "{}: header {:?}, expected {header}",
            path.display(),
            got.join(",")
        )));
    }
    Ok(rdr)
}

fn field<V: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<V> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::Format(format!("line {line}: cannot parse {raw:?} in column {}", i + 1)))
}

fn sign_field(rec: &csv::StringRecord, i: usize, line: u64) -> Result<Sign> {
    match rec.get(i) {
        Some("+") => Ok(Sign::Pos),
        Some("-") => Ok(Sign::Neg),
        other => Err(Error::Format(format!("line {line}: sign must be + or -, got {other:?}"))),
    }
}

type Sample = (i64, Sign, Complex<f64>);

fn assemble(q: QParam<f64>, rows: &[Sample], what: &str) -> Result<SignedLatticeFunction<f64>> {
    let lo = rows.iter().map(|r| r.0).min().ok_or_else(|| Error::Format(format!("{what}: no rows")))?;
    let hi = rows.iter().map(|r| r.0).max().unwrap_or(lo);
    let spec = LatticeSpec::new(q, lo, hi)?;
    let mut f = SignedLatticeFunction::zeros(spec);
    let mut seen = vec![[false; 2]; spec.len()];
    for &(k, sign, v) in rows {
        let i = spec.slot(k).expect("k within its own range");
        let s = (sign == Sign::Neg) as usize;
        if seen[i][s] {
            return Err(Error::Format(format!("{what}: duplicate entry k = {k}, sign {}", sign.as_char())));
        }
        seen[i][s] = true;
        f.channel_mut(sign)[i] = v;
    }
    Ok(f)
}

/// Samples in the `k,sign,re,im` format on the lattice `[min k, max k]`; absent points
/// are zero.
pub fn read_samples_csv(path: &Path, q: QParam<f64>) -> Result<SignedLatticeFunction<f64>> {
    let mut rdr = reader(path, SAMPLES_HEADER)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let v: Complex<f64> = Complex::new(field(&rec, 2, line)?, field(&rec, 3, line)?);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite(format!("{} line {line}", path.display())));
        }
        rows.push((field(&rec, 0, line)?, sign_field(&rec, 1, line)?, v));
    }
    assemble(q, &rows, &path.display().to_string())
}

/// A trajectory written by [`write_trajectory_csv`]: its time grid and physical samples.
pub fn read_trajectory_csv(path: &Path, q: QParam<f64>) -> Result<(TimeGrid<f64>, Vec<SignedLatticeFunction<f64>>)> {
    let mut rdr = reader(path, TRAJECTORY_HEADER)?;
    let mut times: Vec<f64> = Vec::new();
    let mut blocks: Vec<Vec<Sample>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let t: f64 = field(&rec, 0, line)?;
        if times.last() != Some(&t) {
            if times.last().is_some_and(|&last| t < last) {
                return Err(Error::Format(format!("line {line}: times must be grouped in increasing order")));
            }
            times.push(t);
            blocks.push(Vec::new());
        }
        let v = Complex::new(field(&rec, 4, line)?, field(&rec, 5, line)?);
        blocks
            .last_mut()
            .expect("pushed above")
            .push((field(&rec, 1, line)?, sign_field(&rec, 2, line)?, v));
    }
    let samples: Vec<_> = blocks
        .iter()
        .map(|b| assemble(q, b, &path.display().to_string()))
        .collect::<Result<_>>()?;
    if samples.windows(2).any(|w| w[0].spec() != w[1].spec()) {
        return Err(Error::Format("time slices cover different lattice ranges".into()));
    }
    Ok((TimeGrid::new(times)?, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_round_trip_bit_exact() {
        let q = QParam::new(0.5).unwrap();
        let spec = LatticeSpec::new(q, -3, 5).unwrap();
        let f = SignedLatticeFunction::from_fn(spec, |x: f64| Complex::new((x * 1.7).sin() / 3.0, x.exp() * 1e-300)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_samples_csv(&p, &f).unwrap();
        assert_eq!(read_samples_csv(&p, q).unwrap(), f);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let q = QParam::new(0.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "k,sign,re,im\n0,+,1,0\n0,+,2,0\n").unwrap();
        assert!(matches!(read_samples_csv(&p, q), Err(Error::Format(_))));
        std::fs::write(&p, "k,sign,re,im\n0,*,1,0\n").unwrap();
        assert!(matches!(read_samples_csv(&p, q), Err(Error::Format(_))));
        std::fs::write(&p, "k,s,re,im\n0,+,1,0\n").unwrap();
        assert!(matches!(read_samples_csv(&p, q), Err(Error::Format(_))));
    }
}
