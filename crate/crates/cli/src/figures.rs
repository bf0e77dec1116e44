//! Data for the guide's three figures.
//!
//! Without `--grid` each figure picks a symmetric lattice wide enough for its
//! states. `fig4` writes two scan tables, numerical and closed form: the
//! first row is `D/q` followed by the `q` samples, every further row is a
//! slit position `D` followed by `W_out(q, 0; D)`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use ndarray::Array2;
use serde_json::json;
use wignerlab::io::write_wigner;
use wignerlab::{
    cat_wavefunction, filter_wavefunction, filtered_cat_scan, gaussian_wavefunction, normalize,
    wdf_from_wavefunction, CatSpec, FilterKind, FilterSpec, GaussianSpec, Grid, WaveFunction,
};

use crate::commands::print;
use crate::manifest::RunManifest;
use crate::{Cli, Figure, FigureArgs};

pub fn figure(cli: &Cli, args: &FigureArgs) -> Result<RunManifest> {
    let out = &cli.global.out;
    let (grid, outputs) = match args.which {
        Figure::Fig2 => fig2(cli, args, out)?,
        Figure::Fig3 => fig3(cli, args, out)?,
        Figure::Fig4 => fig4(cli, args, out)?,
    };
    let name = match args.which {
        Figure::Fig2 => "figure_fig2",
        Figure::Fig3 => "figure_fig3",
        Figure::Fig4 => "figure_fig4",
    };
    let mut m = RunManifest::new(name, grid, cli.global.seed);
    m.outputs(outputs);
    Ok(m)
}

/// Lattice used when `--grid` is absent: symmetric, reaching `extent`
/// rounded up to a power of two, fine enough that a packet of width
/// `narrowest` is resolved in momentum.
fn figure_grid(cli: &Cli, extent: f64, narrowest: f64) -> Result<Grid> {
    let half = extent.max(1.0).log2().ceil().exp2();
    let max_dq = std::f64::consts::PI * narrowest / (16.0 * cli.global.hbar);
    let n = ((2.0 * half / max_dq).ceil() as usize)
        .next_power_of_two()
        .max(256);
    cli.global.grid_or((-half, half, n))
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if !(value > 0.0 && value.is_finite()) {
        bail!("--{name} must be positive, got {value}");
    }
    Ok(value)
}

/// Incident Gaussian and the slit that filters it.
fn fig2(cli: &Cli, args: &FigureArgs, out: &Path) -> Result<(Grid, Vec<PathBuf>)> {
    let qi = positive("qi", args.qi.unwrap_or(2.0))?;
    let qm = positive("qm", args.qm.unwrap_or(1.0))?;
    if qi <= qm {
        log::warn!("fig2 shows an incident state wider than the slit; got qi = {qi} <= qm = {qm}");
    }
    let grid = figure_grid(cli, 8.0 * qi.max(qm), qi.min(qm))?;
    let input = wdf_from_wavefunction(&gaussian_wavefunction(&GaussianSpec::new(qi), &grid)?)?;
    let slit = FilterSpec::new(
        FilterKind::Coordinate,
        gaussian_wavefunction(&GaussianSpec::new(qm), &grid)?,
    );
    let mut files = write_wigner(&input, &out.join("fig2_input_wdf.csv"))?.to_vec();
    files.extend(write_wigner(
        &slit.device_wdf()?,
        &out.join("fig2_filter_wdf.csv"),
    )?);
    print(&json!({ "qi": qi, "qm": qm, "files": [&files[0], &files[2]] }))?;
    Ok((grid, files))
}

fn fig3(cli: &Cli, args: &FigureArgs, out: &Path) -> Result<(Grid, Vec<PathBuf>)> {
    let qi = positive("qi", args.qi.unwrap_or(1.0))?;
    let d = positive("d", args.d.unwrap_or(4.0 * qi))?;
    let grid = figure_grid(cli, d + 8.0 * qi, qi)?;
    let w = wdf_from_wavefunction(&cat_wavefunction(&CatSpec::new(qi, d), &grid)?)?;
    let files = write_wigner(&w, &out.join("fig3_cat_wdf.csv"))?.to_vec();
    let column = w.values().column(grid.p_origin());
    let outer = column[grid.nearest_q_index(d)].max(column[grid.nearest_q_index(-d)]);
    print(&json!({
        "qi": qi,
        "d": d,
        "origin_value": column[grid.nearest_q_index(0.0)],
        "outer_peak": outer,
        "min_value": w.min_value(),
        "file": files[0],
    }))?;
    Ok((grid, files))
}

/// The cat behind a slit of width `qm`, slit centre scanned over
/// `[-1.5 d, 1.5 d]` in lattice steps.
fn fig4(cli: &Cli, args: &FigureArgs, out: &Path) -> Result<(Grid, Vec<PathBuf>)> {
    let qi = positive("qi", args.qi.unwrap_or(1.0))?;
    let qm = positive("qm", args.qm.unwrap_or(qi))?;
    let d = positive("d", args.d.unwrap_or(4.0 * qi))?;
    let grid = figure_grid(cli, 1.5 * d + 8.0 * qi.max(qm), qi.min(qm))?;
    let spec = CatSpec::new(qi, d);
    let cat = cat_wavefunction(&spec, &grid)?;
    let slits: Vec<f64> = (0..grid.n_points())
        .map(|j| grid.q(j))
        .filter(|q| q.abs() <= 1.5 * d + 1e-9)
        .collect();
    if slits.is_empty() {
        bail!("no lattice point lies within [-1.5 d, 1.5 d]");
    }
    let n = grid.n_points();
    let k0 = grid.p_origin();
    let mut scan = Array2::zeros((slits.len(), n));
    for (i, &centre) in slits.iter().enumerate() {
        let device = gaussian_wavefunction(&GaussianSpec::new(qm).centered_at(centre), &grid)?;
        let raw = filter_wavefunction(&cat, &FilterSpec::new(FilterKind::Coordinate, device))?.raw;
        let w = unnormalized_wdf(&raw)?;
        scan.row_mut(i).assign(&w.values().column(k0));
    }
    let closed = filtered_cat_scan(&spec, qm, &slits, &grid)?;

    let ridge: Vec<f64> = scan
        .rows()
        .into_iter()
        .map(|r| r.iter().copied().fold(f64::MIN, f64::max))
        .collect();
    let peak_at = |range: std::ops::Range<usize>| {
        range
            .max_by(|&a, &b| ridge[a].total_cmp(&ridge[b]))
            .map(|i| slits[i])
    };
    let mid = slits
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .expect("nonempty");
    let outer = ridge.iter().copied().fold(f64::MIN, f64::max);
    let max_diff = (&scan - &closed)
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));

    let q: Vec<f64> = (0..n).map(|j| grid.q(j)).collect();
    let numeric = out.join("fig4_scan.csv");
    let analytic = out.join("fig4_closed_form.csv");
    write_scan(&numeric, &slits, &q, &scan)?;
    write_scan(&analytic, &slits, &q, &closed)?;
    print(&json!({
        "qi": qi,
        "qm": qm,
        "d": d,
        "ridges": [peak_at(0..mid), peak_at(mid + 1..slits.len())],
        "centre_to_ridge": ridge[mid] / outer,
        "max_closed_form_diff": max_diff,
        "files": [&numeric, &analytic],
    }))?;
    Ok((grid, vec![numeric, analytic]))
}

fn unnormalized_wdf(psi: &WaveFunction) -> Result<wignerlab::WignerFunction> {
    Ok(wdf_from_wavefunction(&normalize(psi)?)?.scaled(psi.norm_sqr()))
}

fn write_scan(path: &Path, slits: &[f64], q: &[f64], values: &Array2<f64>) -> Result<()> {
    let mut text = String::from("D/q");
    for x in q {
        write!(text, ",{x:.16e}")?;
    }
    text.push('\n');
    for (d, row) in slits.iter().zip(values.rows()) {
        write!(text, "{d:.16e}")?;
        for v in row {
            write!(text, ",{v:.16e}")?;
        }
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}
