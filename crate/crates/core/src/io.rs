//! On-disk formats: little-endian f64 blobs with JSON sidecars for fields and matrices,
//! CSV tables, and trajectory directories.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DiagnosticRow, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{DensityMatrixState, SpaceTimeField, TimeGrid, TorusGrid, C64};

pub const LAYOUT: &str = "little_endian_f64_interleaved_re_im";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub kind: String,
    pub layout: String,
    /// [time samples, grid points]; grid points are row-major, last axis fastest.
    pub shape: [usize; 2],
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    /// false when the blob holds real values only.
    #[serde(default = "yes")]
    pub complex: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub kind: String,
    pub layout: String,
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub label: String,
    /// Plane-wave modes in FFT order along each axis, flattened row-major.
    pub mode_order: String,
    pub herm_defect: f64,
    pub trace: [f64; 2],
}

pub fn sidecar_path(blob: &Path) -> PathBuf {
    blob.with_extension("json")
}

fn encode(values: impl Iterator<Item = C64>, complex: bool) -> Vec<u8> {
    let mut out = vec![];
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        if complex {
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

fn decode(bytes: &[u8], complex: bool) -> Vec<C64> {
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if complex {
        vals.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect()
    } else {
        vals.into_iter().map(|r| C64::new(r, 0.0)).collect()
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&s)?)
}

/// Writes `path` (binary) and the sidecar next to it.
pub fn write_field(path: &Path, field: &SpaceTimeField) -> Result<()> {
    let g = &field.grid;
    let side = FieldSidecar {
        kind: "space_time_field".into(),
        layout: LAYOUT.into(),
        shape: [field.time.len(), g.size()],
        dim: g.dim(),
        n: g.n(),
        length: g.length(),
        dt: field.time.dt,
        complex: true,
    };
    write_bytes(path, &encode(field.data.iter().copied(), true))?;
    write_json(&sidecar_path(path), &side)
}

pub fn read_field(path: &Path) -> Result<SpaceTimeField> {
    let side: FieldSidecar = read_json(&sidecar_path(path))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let grid = TorusGrid::new(side.dim, side.n, side.length)?;
    if side.shape[1] != grid.size() || side.shape[0] < 2 {
        return Err(Error::InvalidInput(format!("sidecar shape {:?} does not fit the grid", side.shape)));
    }
    let time = TimeGrid::new(side.dt, side.shape[0] - 1)?;
    let per = if side.complex { 16 } else { 8 };
    if bytes.len() != side.shape[0] * side.shape[1] * per {
        return Err(Error::InvalidInput(format!("{} holds {} bytes, sidecar expects {}", path.display(), bytes.len(), side.shape[0] * side.shape[1] * per)));
    }
    let mut f = SpaceTimeField::zeros(&grid, time);
    f.data = decode(&bytes, side.complex);
    Ok(f)
}

pub fn write_matrix(path: &Path, q: &DensityMatrixState) -> Result<()> {
    let g = &q.grid;
    let tr = q.trace();
    let side = MatrixSidecar {
        kind: "density_matrix".into(),
        layout: LAYOUT.into(),
        dim: g.dim(),
        n: g.n(),
        length: g.length(),
        label: q.label.clone(),
        mode_order: "fft".into(),
        herm_defect: q.herm_defect(),
        trace: [tr.re, tr.im],
    };
    let m = g.size();
    let rows = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| q.matrix[(i, j)]);
    write_bytes(path, &encode(rows, true))?;
    write_json(&sidecar_path(path), &side)
}

pub fn read_matrix(path: &Path) -> Result<DensityMatrixState> {
    let side: MatrixSidecar = read_json(&sidecar_path(path))?;
    let grid = TorusGrid::new(side.dim, side.n, side.length)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let m = grid.size();
    if bytes.len() != m * m * 16 {
        return Err(Error::InvalidInput(format!("{} holds {} bytes, expected {}", path.display(), bytes.len(), m * m * 16)));
    }
    let vals = decode(&bytes, true);
    let matrix = DMatrix::from_row_slice(m, m, &vals);
    let q = DensityMatrixState::new(&grid, matrix, side.label)?;
    if (q.herm_defect() - side.herm_defect).abs() > 1e-12 * (1.0 + side.herm_defect) {
        return Err(Error::InvalidInput(format!("{}: Hermiticity checksum mismatch", path.display())));
    }
    Ok(q)
}

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticRow]) -> Result<()> {
    write_csv(path, rows)
}

/// Serializes any slice of flat records with a header row.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::InvalidInput(format!("{}: {e}", path.display()))
}

/// Two-column (r, g(r)) table; a header line is skipped when it does not parse.
pub fn read_radial_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let (mut r, mut v) = (vec![], vec![]);
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != 2 {
            return Err(Error::InvalidInput(format!("{} line {}: expected two columns", path.display(), i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                r.push(a);
                v.push(b);
            }
            _ if i == 0 => continue,
            _ => return Err(Error::InvalidInput(format!("{} line {}: not a number", path.display(), i + 1))),
        }
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(format!("{}: r must be strictly increasing", path.display())));
    }
    Ok((r, v))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub step: usize,
    pub time: f64,
    pub file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub dt: f64,
    pub n_steps: usize,
    pub snapshots: Vec<SnapshotEntry>,
    pub density: String,
    pub diagnostics: String,
}

/// Snapshots, density field and diagnostics under `dir`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<TrajectoryManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut snapshots = vec![];
    for (step, q) in &traj.snapshots {
        let file = format!("snapshot_{step:06}.bin");
        write_matrix(&dir.join(&file), q)?;
        snapshots.push(SnapshotEntry { step: *step, time: traj.time.time(*step), file });
    }
    write_field(&dir.join("density.bin"), &traj.density)?;
    write_diagnostics_csv(&dir.join("diagnostics.csv"), &traj.ledger)?;
    let manifest = TrajectoryManifest {
        dt: traj.time.dt,
        n_steps: traj.time.n_steps,
        snapshots,
        density: "density.bin".into(),
        diagnostics: "diagnostics.csv".into(),
    };
    write_json(&dir.join("trajectory.json"), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGrid::new(2, 4, 3.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let q = DensityMatrixState::random_hermitian(&g, 0.3, &mut rng);
        let p = dir.path().join("q.bin");
        write_matrix(&p, &q).unwrap();
        let back = read_matrix(&p).unwrap();
        assert_eq!(back.matrix, q.matrix);
        assert_eq!(back.grid.length(), 3.0);
    }

    #[test]
    fn field_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGrid::new(1, 8, 2.0).unwrap();
        let t = TimeGrid::new(0.1, 3).unwrap();
        let f = SpaceTimeField::from_fn(&g, t, |t, x| C64::new(x[0] * t, -t));
        let p = dir.path().join("f.bin");
        write_field(&p, &f).unwrap();
        assert_eq!(read_field(&p).unwrap().data, f.data);
    }

    #[test]
    fn radial_csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        fs::write(&p, "r,g\n0,1\n0.5, 0.8\n1.0,0.2\n").unwrap();
        let (r, v) = read_radial_csv(&p).unwrap();
        assert_eq!(r, vec![0.0, 0.5, 1.0]);
        assert_eq!(v, vec![1.0, 0.8, 0.2]);
        fs::write(&p, "0,1\n0.5,0.8\n0.4,0.2\n").unwrap();
        assert!(read_radial_csv(&p).is_err());
    }
}
