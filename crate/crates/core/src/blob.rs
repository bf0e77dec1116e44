//! Phase-space extent diagnostics: how much area a state occupies, whether
//! its Wigner function stays positive once averaged over a quantum blob, and
//! how fine its interference structure is.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::Plan;
use crate::wigner::{moments, WignerFunction};

/// Mass deviation tolerated by [`effective_area`].
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Relative spectral power that still counts as structure.
pub const SPECTRAL_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlobReport {
    pub effective_area: f64,
    pub covariance_area: f64,
    pub min_value: f64,
    pub min_smoothed_value: f64,
    pub subplanck_scale: f64,
}

fn check_mass(w: &WignerFunction) -> Result<()> {
    let mass = w.mass();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        Err(Error::NotNormalized(mass))
    } else {
        Ok(())
    }
}

/// Inverse participation area `1 / (2 int W^2)`.
///
/// A pure state gives `h/2`, a mixture more. Anything below `h/2` cannot be a
/// quantum state and is rejected as [`Error::Unphysical`].
pub fn effective_area(w: &WignerFunction) -> Result<f64> {
    check_mass(w)?;
    let integral: f64 = w.values().iter().map(|v| v * v).sum::<f64>() * w.cell_area();
    let area = 1.0 / (2.0 * integral);
    let blob = w.grid().h() / 2.0;
    if area < blob * (1.0 - 1e-6) {
        return Err(Error::Unphysical(format!(
            "effective area {area:e} is below h/2 = {blob:e}"
        )));
    }
    Ok(area)
}

/// `2 pi sqrt(det Sigma)` from the covariance matrix of `(q, p)`.
///
/// Equals `h/2` exactly for Gaussian pure states and exceeds it for every
/// other state.
pub fn covariance_area(w: &WignerFunction) -> Result<f64> {
    check_mass(w)?;
    let m = moments(w);
    let det = m.var_q * m.var_p - m.cov_qp * m.cov_qp;
    if det < 0.0 {
        return Err(Error::NegativeVariance(det));
    }
    Ok(2.0 * PI * det.sqrt())
}

/// Normalized samples of a centred Gaussian at lattice offsets `-(n-1)..n`,
/// stored at index `offset + n - 1`.
fn kernel(sigma: f64, spacing: f64, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..2 * n - 1)
        .map(|i| {
            let x = (i as f64 - (n - 1) as f64) * spacing;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn smooth_axis(values: &Array2<f64>, axis: Axis, kern: &[f64]) -> Array2<f64> {
    let n = values.len_of(axis);
    let mut out = Array2::zeros(values.dim());
    out.axis_iter_mut(Axis(1 - axis.index()))
        .into_par_iter()
        .zip(values.axis_iter(Axis(1 - axis.index())).into_par_iter())
        .for_each(|(mut dst, src)| {
            for i in 0..n {
                let mut sum = 0.0;
                for (k, v) in src.iter().enumerate() {
                    sum += v * kern[i + n - 1 - k];
                }
                dst[i] = sum;
            }
        });
    out
}

/// Smallest value of `W` after Gaussian averaging with standard deviations
/// `sigma_q` and `sigma_p` (aperiodic in both directions).
///
/// With `sigma_q sigma_p >= hbar/2` the average is a detection map with a
/// Gaussian device and cannot be negative for a physical state.
pub fn smoothed_minimum(w: &WignerFunction, sigma_q: f64, sigma_p: f64) -> Result<f64> {
    for s in [sigma_q, sigma_p] {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "smoothing width must be positive, got {s}"
            )));
        }
    }
    let grid = w.grid();
    let n = grid.n_points();
    let along_p = smooth_axis(w.values(), Axis(1), &kernel(sigma_p, grid.delta_p(), n));
    let both = smooth_axis(&along_p, Axis(0), &kernel(sigma_q, grid.delta_q(), n));
    Ok(both.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Highest angular frequency along `axis` carrying more than
/// [`SPECTRAL_FLOOR`] of the peak power, interpolated log-linearly between
/// the last bin above and the first bin below.
fn cutoff_frequency(values: &Array2<f64>, axis: Axis, spacing: f64) -> f64 {
    let n = values.len_of(axis);
    let plan = Plan::new(n);
    let power = values
        .axis_iter(Axis(1 - axis.index()))
        .into_par_iter()
        .map(|lane| {
            let mut buf: Vec<_> = lane
                .iter()
                .map(|&v| num_complex::Complex64::new(v, 0.0))
                .collect();
            plan.forward(&mut buf);
            Array1::from_shape_fn(n / 2 + 1, |f| {
                let z = buf[f].norm_sqr();
                if f == 0 || f == n / 2 {
                    z
                } else {
                    z + buf[n - f].norm_sqr()
                }
            })
        })
        .reduce(|| Array1::zeros(n / 2 + 1), |a, b| a + b);
    let peak = power.iter().copied().fold(0.0, f64::max);
    let step = 2.0 * PI / (n as f64 * spacing);
    if peak <= 0.0 {
        return 0.0;
    }
    let rel = power.mapv(|x| x / peak);
    let last = (0..rel.len())
        .rev()
        .find(|&f| rel[f] > SPECTRAL_FLOOR)
        .unwrap_or(0);
    if last + 1 >= rel.len() {
        return last as f64 * step;
    }
    let (a, b) = (rel[last], rel[last + 1]);
    let t = if b > 0.0 {
        (a.ln() - SPECTRAL_FLOOR.ln()) / (a.ln() - b.ln())
    } else {
        0.0
    };
    (last as f64 + t) * step
}

/// Area of the finest resolvable phase-space cell, `delta_q delta_p`, from
/// the highest significant frequencies `k_q`, `k_p` of `W` along each axis:
///
/// ```text
/// scale = (2 pi / k_q) (2 pi / k_p) ln(1e6) / (2 pi)
/// ```
///
/// The constant makes a Gaussian come out at exactly `h/2`; interference
/// fringes push it below.
pub fn subplanck_scale(w: &WignerFunction) -> f64 {
    let grid = w.grid();
    let kq = cutoff_frequency(w.values(), Axis(0), grid.delta_q());
    let kp = cutoff_frequency(w.values(), Axis(1), grid.delta_p());
    let cell = (2.0 * PI / kq) * (2.0 * PI / kp);
    cell * (1.0 / SPECTRAL_FLOOR).ln() / (2.0 * PI)
}

/// All diagnostics at once. `min_smoothed_value` uses the minimum-uncertainty
/// smoothing `sigma_q sigma_p = hbar/2` with the aspect ratio of the state's
/// own spreads.
pub fn blob_report(w: &WignerFunction) -> Result<BlobReport> {
    let effective_area = effective_area(w)?;
    let covariance_area = covariance_area(w)?;
    let m = moments(w);
    let hbar = w.grid().hbar();
    let aspect = (m.var_q / m.var_p).sqrt();
    let sigma_q = (hbar / 2.0 * aspect).sqrt();
    let sigma_p = hbar / 2.0 / sigma_q;
    Ok(BlobReport {
        effective_area,
        covariance_area,
        min_value: w.min_value(),
        min_smoothed_value: smoothed_minimum(w, sigma_q, sigma_p)?,
        subplanck_scale: subplanck_scale(w),
    })
}
