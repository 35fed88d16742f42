//! CSV, plot-data and wavefunction files.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use hyperdisp_core::grid::{GridSpec, Representation, Wavefunction};
use hyperdisp_core::Complex64;

use crate::CliError;

/// Column order of the results file.
pub const RESULT_COLUMNS: [&str; 10] = [
    "scenario",
    "hbar",
    "n",
    "measured_norm",
    "trivial_bound",
    "thm2_bound",
    "thm3_bound",
    "wkb_residual_rel",
    "converged",
    "wall_ms",
];

pub const COTLAR_COLUMNS: [&str; 9] = ["scenario", "hbar", "n", "l", "m", "star_left", "star_right", "cotlar_bound", "norm"];

pub const FIT_COLUMNS: [&str; 7] = ["scenario", "hbar", "quantity", "value", "intercept", "r_squared", "points"];

pub const PLOT_COLUMNS: [&str; 5] = ["scenario", "hbar", "series", "x", "y"];

/// One row of the results file. `None` is written as an empty cell.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub hbar: f64,
    pub n: usize,
    pub measured_norm: Option<f64>,
    pub trivial_bound: Option<f64>,
    pub thm2_bound: Option<f64>,
    pub thm3_bound: Option<f64>,
    pub wkb_residual_rel: Option<f64>,
    pub converged: Option<bool>,
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CotlarRow {
    pub scenario: String,
    pub hbar: f64,
    pub n: usize,
    pub l: Vec<i64>,
    pub m: Vec<i64>,
    /// `‖A_m*A_ℓ‖`.
    pub star_left: f64,
    /// `‖A_ℓA_m*‖`.
    pub star_right: f64,
    pub cotlar_bound: f64,
    /// `‖A‖` of the parent operator.
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitRow {
    pub scenario: String,
    /// `None` for fits across ℏ.
    pub hbar: Option<f64>,
    pub quantity: String,
    pub value: f64,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotRow {
    pub scenario: String,
    pub hbar: f64,
    pub series: String,
    pub x: f64,
    pub y: f64,
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn index_cell(idx: &[i64]) -> String {
    idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_table<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    write_table(
        path,
        &RESULT_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.scenario.clone(),
                r.hbar.to_string(),
                r.n.to_string(),
                cell(r.measured_norm),
                cell(r.trivial_bound),
                cell(r.thm2_bound),
                cell(r.thm3_bound),
                cell(r.wkb_residual_rel),
                cell(r.converged),
                cell(r.wall_ms),
            ]
        }),
    )
}

pub fn write_cotlar(path: &Path, rows: &[CotlarRow]) -> Result<(), CliError> {
    write_table(
        path,
        &COTLAR_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.scenario.clone(),
                r.hbar.to_string(),
                r.n.to_string(),
                index_cell(&r.l),
                index_cell(&r.m),
                r.star_left.to_string(),
                r.star_right.to_string(),
                r.cotlar_bound.to_string(),
                r.norm.to_string(),
            ]
        }),
    )
}

pub fn write_fits(path: &Path, rows: &[FitRow]) -> Result<(), CliError> {
    write_table(
        path,
        &FIT_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.scenario.clone(),
                cell(r.hbar),
                r.quantity.clone(),
                r.value.to_string(),
                cell(r.intercept),
                cell(r.r_squared),
                r.points.to_string(),
            ]
        }),
    )
}

pub fn write_plot(path: &Path, rows: &[PlotRow]) -> Result<(), CliError> {
    write_table(
        path,
        &PLOT_COLUMNS,
        rows.iter().map(|r| vec![r.scenario.clone(), r.hbar.to_string(), r.series.clone(), r.x.to_string(), r.y.to_string()]),
    )
}

/// Long-format x-y series of every numeric result column against `n`.
pub fn plot_rows(rows: &[ResultRow]) -> Vec<PlotRow> {
    let mut out = Vec::new();
    for r in rows {
        let series = [
            ("measured_norm", r.measured_norm),
            ("trivial_bound", r.trivial_bound),
            ("thm2_bound", r.thm2_bound),
            ("thm3_bound", r.thm3_bound),
            ("wkb_residual_rel", r.wkb_residual_rel),
        ];
        for (name, v) in series {
            if let Some(y) = v {
                out.push(PlotRow {
                    scenario: r.scenario.clone(),
                    hbar: r.hbar,
                    series: name.into(),
                    x: r.n as f64,
                    y,
                });
            }
        }
    }
    out
}

/// Writes `index,re,im` lines, one per grid point in flat order.
pub fn write_wavefunction_csv(path: &Path, f: &Wavefunction) -> Result<(), CliError> {
    write_table(
        path,
        &["index", "re", "im"],
        f.values().iter().enumerate().map(|(i, z)| vec![i.to_string(), z.re.to_string(), z.im.to_string()]),
    )
}

const MAGIC: &[u8; 4] = b"HDWF";

/// Binary dump, all little-endian: the magic `HDWF`, `u32` dimension,
/// `u32` points per axis, `u8` representation (0 position, 1 momentum),
/// `f64` half-width, `f64` ℏ, then `re, im` as `f64` pairs in flat order.
pub fn write_wavefunction_bin(path: &Path, f: &Wavefunction) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let g = f.grid();
    let rep = match f.representation() {
        Representation::Position => 0u8,
        Representation::Momentum => 1u8,
    };
    let mut buf = Vec::with_capacity(29 + 16 * f.values().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.points_per_axis() as u32).to_le_bytes());
    buf.push(rep);
    buf.extend_from_slice(&g.half_width().to_le_bytes());
    buf.extend_from_slice(&g.hbar().to_le_bytes());
    for z in f.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_wavefunction_bin(path: &Path) -> Result<Wavefunction, CliError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| io_err(path, e))?;
    let bad = || CliError::Io(format!("{}: not a wavefunction dump", path.display()));
    if bytes.len() < 29 || &bytes[..4] != MAGIC {
        return Err(bad());
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let (dim, points) = (u32_at(4), u32_at(8));
    let rep = match bytes[12] {
        0 => Representation::Position,
        1 => Representation::Momentum,
        _ => return Err(bad()),
    };
    let grid = GridSpec::new(dim, f64_at(13), points, f64_at(21)).map_err(|_| bad())?;
    if bytes.len() != 29 + 16 * grid.len() {
        return Err(bad());
    }
    let values = (0..grid.len())
        .map(|k| Complex64::new(f64_at(29 + 16 * k), f64_at(37 + 16 * k)))
        .collect();
    Wavefunction::new(grid, values, rep).map_err(|_| bad())
}
