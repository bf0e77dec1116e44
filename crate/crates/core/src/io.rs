//! File formats: CSV data with a JSON sidecar describing the lattice.
//!
//! * Wavefunctions: `q,re,im` (or `p,re,im`) with one row per sample.
//! * Wigner functions and detection maps: a headerless matrix, one row per
//!   `q_j`, one column per `p_k`.
//!
//! Floats are written with 17 significant digits so files round-trip
//! exactly. The sidecar of `state.csv` is `state.json`.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::{FilterKind, FilterSpec};
use crate::grid::{fourier_transform, Grid, Representation, WaveFunction};
use crate::states::{gaussian_wavefunction, GaussianSpec};
use crate::wigner::WignerFunction;

/// Path of the JSON sidecar belonging to a CSV file.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_float(field: &str, path: &Path) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("{}: not a number: {field:?}", path.display())))
}

#[derive(Serialize, Deserialize)]
struct GridFields {
    q_min: f64,
    delta_q: f64,
    n_points: usize,
    hbar: f64,
}

impl GridFields {
    fn from_grid(g: &Grid) -> GridFields {
        GridFields {
            q_min: g.q_min(),
            delta_q: g.delta_q(),
            n_points: g.n_points(),
            hbar: g.hbar(),
        }
    }

    fn to_grid(&self) -> Result<Grid> {
        Grid::from_parts(self.q_min, self.delta_q, self.n_points, self.hbar)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaveSidecar {
    #[serde(flatten)]
    grid: GridFields,
    representation: Representation,
}

/// What a matrix file holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Wigner,
    Detection,
}

#[derive(Serialize, Deserialize)]
struct MatrixSidecar {
    #[serde(flatten)]
    grid: GridFields,
    kind: MatrixKind,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes `path` and its sidecar; returns both paths.
pub fn write_wavefunction(psi: &WaveFunction, path: &Path) -> Result<[PathBuf; 2]> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let axis = match psi.representation() {
        Representation::Position => "q",
        Representation::Momentum => "p",
    };
    w.write_record([axis, "re", "im"]).map_err(csv_error)?;
    for (i, z) in psi.amplitudes().iter().enumerate() {
        w.write_record([
            format_float(psi.abscissa(i)),
            format_float(z.re),
            format_float(z.im),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    let side = sidecar_path(path);
    write_json(
        &WaveSidecar {
            grid: GridFields::from_grid(psi.grid()),
            representation: psi.representation(),
        },
        &side,
    )?;
    Ok([path.to_path_buf(), side])
}

pub fn read_wavefunction(path: &Path) -> Result<WaveFunction> {
    let side: WaveSidecar = read_json(&sidecar_path(path))?;
    let grid = side.grid.to_grid()?;
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let expected_axis = match side.representation {
        Representation::Position => "q",
        Representation::Momentum => "p",
    };
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().map(str::trim).ne([expected_axis, "re", "im"]) {
        return Err(Error::Format(format!(
            "{}: header must be {expected_axis},re,im",
            path.display()
        )));
    }
    let mut amps = Vec::with_capacity(grid.n_points());
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_error)?;
        if record.len() != 3 {
            return Err(Error::Format(format!(
                "{}: row {} needs 3 fields",
                path.display(),
                i + 1
            )));
        }
        let x = parse_float(&record[0], path)?;
        let expected = match side.representation {
            Representation::Position => grid.q(i.min(grid.n_points() - 1)),
            Representation::Momentum => grid.p(i.min(grid.n_points() - 1)),
        };
        let spacing = match side.representation {
            Representation::Position => grid.delta_q(),
            Representation::Momentum => grid.delta_p(),
        };
        if (x - expected).abs() > 1e-6 * spacing {
            return Err(Error::Format(format!(
                "{}: row {} has abscissa {x}, lattice says {expected}",
                path.display(),
                i + 1
            )));
        }
        amps.push(Complex64::new(
            parse_float(&record[1], path)?,
            parse_float(&record[2], path)?,
        ));
    }
    WaveFunction::new(grid, Array1::from_vec(amps), side.representation)
}

fn write_matrix(
    values: &Array2<f64>,
    grid: &Grid,
    kind: MatrixKind,
    path: &Path,
) -> Result<[PathBuf; 2]> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_error)?;
    for row in values.rows() {
        w.write_record(row.iter().map(|&v| format_float(v)))
            .map_err(csv_error)?;
    }
    w.flush()?;
    let side = sidecar_path(path);
    write_json(
        &MatrixSidecar {
            grid: GridFields::from_grid(grid),
            kind,
        },
        &side,
    )?;
    Ok([path.to_path_buf(), side])
}

pub fn write_wigner(w: &WignerFunction, path: &Path) -> Result<[PathBuf; 2]> {
    write_matrix(w.values(), w.grid(), MatrixKind::Wigner, path)
}

pub fn write_detection(d: &crate::filtering::DetectionMap, path: &Path) -> Result<[PathBuf; 2]> {
    write_matrix(d.values(), d.grid(), MatrixKind::Detection, path)
}

/// Reads a matrix file of either kind.
pub fn read_matrix(path: &Path) -> Result<(WignerFunction, MatrixKind)> {
    let side: MatrixSidecar = read_json(&sidecar_path(path))?;
    let grid = side.grid.to_grid()?;
    let n = grid.n_points();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_error)?;
    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0;
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        if record.len() != n {
            return Err(Error::Format(format!(
                "{}: row {} has {} columns, expected {n}",
                path.display(),
                rows + 1,
                record.len()
            )));
        }
        for field in record.iter() {
            values.push(parse_float(field, path)?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Format(format!(
            "{}: {rows} rows, expected {n}",
            path.display()
        )));
    }
    let values = Array2::from_shape_vec((n, n), values).expect("n x n values");
    Ok((WignerFunction::new(grid, values)?, side.kind))
}

/// Reads a Wigner function, rejecting detection maps.
pub fn read_wigner(path: &Path) -> Result<WignerFunction> {
    match read_matrix(path)? {
        (w, MatrixKind::Wigner) => Ok(w),
        (_, MatrixKind::Detection) => Err(Error::Format(format!(
            "{} holds a detection map, not a Wigner function",
            path.display()
        ))),
    }
}

/// Where a filter's device profile comes from: a wavefunction file or an
/// inline Gaussian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeviceSource {
    Path(PathBuf),
    Gaussian(GaussianSpec),
}

/// JSON description of a filter:
///
/// ```json
/// {"kind": "coordinate", "q_offset": 0.0, "p_offset": 0.0,
///  "device": {"width": 1.0, "center": 2.0}}
/// ```
///
/// A path device is resolved relative to the JSON file. An inline Gaussian is
/// the coordinate-space slit `psi_m(q)`; for the momentum kinds its Fourier
/// transform is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterFile {
    pub kind: FilterKind,
    #[serde(default)]
    pub q_offset: f64,
    #[serde(default)]
    pub p_offset: f64,
    pub device: DeviceSource,
}

impl FilterFile {
    /// Builds the filter on `grid`. `base` is the directory relative paths
    /// are taken from.
    pub fn resolve(&self, grid: &Grid, base: &Path) -> Result<FilterSpec> {
        let device = match &self.device {
            DeviceSource::Path(p) => {
                let full = if p.is_absolute() {
                    p.clone()
                } else {
                    base.join(p)
                };
                read_wavefunction(&full)?
            }
            DeviceSource::Gaussian(spec) => {
                let psi = gaussian_wavefunction(spec, grid)?;
                match self.kind.device_representation() {
                    Representation::Position => psi,
                    Representation::Momentum => fourier_transform(&psi)?,
                }
            }
        };
        Ok(FilterSpec::new(self.kind, device)
            .with_q_offset(self.q_offset)
            .with_p_offset(self.p_offset))
    }
}

/// Reads a filter description and builds it on `grid`.
pub fn read_filter(path: &Path, grid: &Grid) -> Result<FilterSpec> {
    let file: FilterFile = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    file.resolve(grid, base)
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!("checked io kind"),
        }
    } else {
        Error::Format(e.to_string())
    }
}
