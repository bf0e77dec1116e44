//! Closed-form states and the Wigner functions the filtering examples produce.
//!
//! Every generator here samples an analytic expression on the lattice. The
//! numeric pipeline in [`crate::wigner`] and [`crate::filtering`] is checked
//! against these.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{normalize, Grid, WaveFunction, EDGE_CONTRACT};
use crate::wigner::WignerFunction;

/// A minimum-uncertainty wavepacket of width `q0`, centred at `center` and
/// carrying mean momentum `momentum_offset`:
///
/// ```text
/// psi(q) = (pi q0^2)^(-1/4) exp(-(q - center)^2 / (2 q0^2)) exp(i p0 q / hbar)
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub momentum_offset: f64,
}

impl GaussianSpec {
    pub fn new(width: f64) -> GaussianSpec {
        GaussianSpec {
            width,
            center: 0.0,
            momentum_offset: 0.0,
        }
    }

    pub fn centered_at(mut self, center: f64) -> GaussianSpec {
        self.center = center;
        self
    }

    pub fn with_momentum(mut self, momentum: f64) -> GaussianSpec {
        self.momentum_offset = momentum;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gaussian width must be positive, got {}",
                self.width
            )));
        }
        if !(self.center.is_finite() && self.momentum_offset.is_finite()) {
            return Err(Error::InvalidParameter("non-finite gaussian offset".into()));
        }
        Ok(())
    }

    /// Normalized amplitude at `q`.
    pub fn amplitude(&self, q: f64, hbar: f64) -> Complex64 {
        let q0 = self.width;
        let envelope =
            (PI * q0 * q0).powf(-0.25) * (-(q - self.center).powi(2) / (2.0 * q0 * q0)).exp();
        Complex64::from_polar(envelope, self.momentum_offset * q / hbar)
    }

    /// Closed-form Wigner function at `(q, p)`.
    pub fn wigner(&self, q: f64, p: f64, hbar: f64) -> f64 {
        let q0 = self.width;
        let dq = q - self.center;
        let dp = p - self.momentum_offset;
        (-(dq * dq) / (q0 * q0) - dp * dp * q0 * q0 / (hbar * hbar)).exp() / (PI * hbar)
    }

    fn check_fits(&self, grid: &Grid) -> Result<()> {
        let hbar = grid.hbar();
        if self.center < grid.q_min() || self.center > grid.q_max() {
            return Err(Error::GridTooSmall(format!(
                "gaussian center {} outside [{}, {}]",
                self.center,
                grid.q_min(),
                grid.q_max()
            )));
        }
        let edge = self
            .amplitude(grid.q_min(), hbar)
            .norm()
            .max(self.amplitude(grid.q(grid.n_points() - 1), hbar).norm());
        if edge >= EDGE_CONTRACT {
            return Err(Error::GridTooSmall(format!(
                "gaussian (width {}, center {}) has amplitude {edge:e} at the coordinate edge",
                self.width, self.center
            )));
        }
        // momentum-space envelope at the edge of the momentum lattice
        let q0 = self.width;
        let p_edge = grid.p_max() - self.momentum_offset.abs();
        let momentum_edge = (q0 * q0 / (PI * hbar * hbar)).powf(0.25)
            * (-(p_edge * p_edge) * q0 * q0 / (2.0 * hbar * hbar)).exp();
        if p_edge <= 0.0 || momentum_edge >= EDGE_CONTRACT {
            return Err(Error::GridTooSmall(format!(
                "gaussian (width {}, momentum {}) is not resolved: momentum amplitude {momentum_edge:e} at p_max = {}",
                self.width, self.momentum_offset,
                grid.p_max()
            )));
        }
        Ok(())
    }
}

/// Even superposition of two Gaussians of width `q_i` at `+d` and `-d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatSpec {
    pub width: f64,
    pub separation: f64,
}

impl CatSpec {
    pub fn new(width: f64, separation: f64) -> CatSpec {
        CatSpec { width, separation }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cat width must be positive, got {}",
                self.width
            )));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cat separation must be non-negative, got {}",
                self.separation
            )));
        }
        Ok(())
    }

    /// `exp(-d^2 / q_i^2)`, the overlap of the two humps.
    fn hump_overlap(&self) -> f64 {
        (-(self.separation / self.width).powi(2)).exp()
    }

    /// `N = (4 pi q_i^2)^(-1/4) [1 + exp(-d^2/q_i^2)]^(-1/2)`.
    pub fn normalization(&self) -> f64 {
        (4.0 * PI * self.width * self.width).powf(-0.25) / (1.0 + self.hump_overlap()).sqrt()
    }

    pub fn amplitude(&self, q: f64) -> f64 {
        let qi2 = 2.0 * self.width * self.width;
        let d = self.separation;
        self.normalization() * ((-(q - d).powi(2) / qi2).exp() + (-(q + d).powi(2) / qi2).exp())
    }

    /// The three-term closed form: two outer humps and the interference term
    /// `2 exp(-q^2/q_i^2) cos(2 d p / hbar)`.
    pub fn wigner(&self, q: f64, p: f64, hbar: f64) -> f64 {
        let qi = self.width;
        let d = self.separation;
        let h = 2.0 * PI * hbar;
        let outer = (-(q - d).powi(2) / (qi * qi)).exp() + (-(q + d).powi(2) / (qi * qi)).exp();
        let fringe = 2.0 * (-q * q / (qi * qi)).exp() * (2.0 * d * p / hbar).cos();
        (-p * p * qi * qi / (hbar * hbar)).exp() / (h * (1.0 + self.hump_overlap()))
            * (outer + fringe)
    }

    fn humps(&self) -> [GaussianSpec; 2] {
        [
            GaussianSpec::new(self.width).centered_at(self.separation),
            GaussianSpec::new(self.width).centered_at(-self.separation),
        ]
    }
}

/// Normalized Gaussian sampled on the coordinate lattice.
///
/// Fails with [`Error::GridTooSmall`] unless the amplitude at both ends of the
/// coordinate lattice, and the momentum amplitude at `+-p_max`, are below
/// `1e-12`.
pub fn gaussian_wavefunction(spec: &GaussianSpec, grid: &Grid) -> Result<WaveFunction> {
    spec.validate()?;
    spec.check_fits(grid)?;
    Ok(WaveFunction::from_fn(*grid, |q| {
        spec.amplitude(q, grid.hbar())
    }))
}

pub fn gaussian_wdf_closed_form(spec: &GaussianSpec, grid: &Grid) -> Result<WignerFunction> {
    spec.validate()?;
    spec.check_fits(grid)?;
    let hbar = grid.hbar();
    Ok(WignerFunction::from_fn(*grid, |q, p| {
        spec.wigner(q, p, hbar)
    }))
}

pub fn cat_wavefunction(spec: &CatSpec, grid: &Grid) -> Result<WaveFunction> {
    spec.validate()?;
    for hump in spec.humps() {
        hump.check_fits(grid)?;
    }
    Ok(WaveFunction::from_fn(*grid, |q| {
        Complex64::new(spec.amplitude(q), 0.0)
    }))
}

pub fn cat_wdf_closed_form(spec: &CatSpec, grid: &Grid) -> Result<WignerFunction> {
    spec.validate()?;
    for hump in spec.humps() {
        hump.check_fits(grid)?;
    }
    let hbar = grid.hbar();
    Ok(WignerFunction::from_fn(*grid, |q, p| {
        spec.wigner(q, p, hbar)
    }))
}

/// Normalized superposition `sum c_i psi_i` of Gaussian wavepackets.
pub fn gaussian_superposition(
    components: &[(Complex64, GaussianSpec)],
    grid: &Grid,
) -> Result<WaveFunction> {
    if components.is_empty() {
        return Err(Error::InvalidParameter("empty superposition".into()));
    }
    for (_, spec) in components {
        spec.validate()?;
        spec.check_fits(grid)?;
    }
    let hbar = grid.hbar();
    let psi = WaveFunction::from_fn(*grid, |q| {
        components
            .iter()
            .map(|(c, spec)| c * spec.amplitude(q, hbar))
            .sum()
    });
    normalize(&psi)
}

/// Wigner function left after a Gaussian input of width `q_i` passes a
/// centred Gaussian slit of width `q_m`:
///
/// ```text
/// W(q, p) = 2 / (h sqrt(pi (q_i^2 + q_m^2)))
///           exp(-q^2/q_i^2 - q^2/q_m^2) exp(-(p^2/hbar^2) q_i^2 q_m^2 / (q_i^2 + q_m^2))
/// ```
///
/// It is not renormalized: its mass is the transmitted fraction
/// `1 / sqrt(pi (q_i^2 + q_m^2))` for a normalized slit profile.
pub fn filtered_gaussian_wdf_closed_form(
    q_i: f64,
    q_m: f64,
    grid: &Grid,
) -> Result<WignerFunction> {
    for w in [q_i, q_m] {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "width must be positive, got {w}"
            )));
        }
    }
    let hbar = grid.hbar();
    let h = grid.h();
    let s = q_i * q_i + q_m * q_m;
    let amp = 2.0 / (h * (PI * s).sqrt());
    let p_width = q_i * q_i * q_m * q_m / s;
    Ok(WignerFunction::from_fn(*grid, |q, p| {
        amp * (-q * q / (q_i * q_i) - q * q / (q_m * q_m)).exp()
            * (-(p * p) / (hbar * hbar) * p_width).exp()
    }))
}

/// The cat state after a Gaussian slit of width `q_m` centred at `D`.
///
/// The interference term is damped by `exp(-d^2 / (q_i^2 + q_m^2))` and its
/// fringes stretched by `(q_i^2 + q_m^2) / q_m^2`. The overall constant `K` is
/// fixed so that the mass equals the transmission of the sampled input
/// through the sampled slit.
pub fn filtered_cat_wdf_closed_form(
    spec: &CatSpec,
    q_m: f64,
    slit_center: f64,
    grid: &Grid,
) -> Result<WignerFunction> {
    let slit = GaussianSpec::new(q_m).centered_at(slit_center);
    slit.validate()?;
    let input = cat_wavefunction(spec, grid)?;
    let hbar = grid.hbar();
    let transmission: f64 = input
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, a)| (a * slit.amplitude(grid.q(j), hbar)).norm_sqr())
        .sum::<f64>()
        * grid.delta_q();

    let form = filtered_cat_shape(spec, q_m, slit_center, hbar);
    let unscaled = WignerFunction::from_fn(*grid, form);
    let mass = unscaled.mass();
    if mass.is_nan() || mass <= 0.0 {
        return Err(Error::ZeroTransmission(transmission));
    }
    Ok(unscaled.scaled(transmission / mass))
}

/// The bracketed shape of the filtered cat Wigner function, without `K`.
pub(crate) fn filtered_cat_shape(
    spec: &CatSpec,
    q_m: f64,
    slit_center: f64,
    hbar: f64,
) -> impl Fn(f64, f64) -> f64 + Sync {
    let qi2 = spec.width * spec.width;
    let qm2 = q_m * q_m;
    let s = qi2 + qm2;
    let d = spec.separation;
    let damping = (-d * d / s).exp();
    let stretch = qm2 / s;
    move |q: f64, p: f64| {
        let outer = (-(q - d).powi(2) / qi2).exp() + (-(q + d).powi(2) / qi2).exp();
        let fringe = 2.0 * (-q * q / qi2).exp() * damping * (2.0 * d * p / hbar * stretch).cos();
        (-(q - slit_center).powi(2) / qm2).exp()
            * (-(p * p) / (hbar * hbar) * qi2 * qm2 / s).exp()
            * (outer + fringe)
    }
}

/// Wigner function of the filtered cat at `p = 0`, scanned over slit
/// positions. Row `i` is the slit at `slit_centers[i]`, column `j` is `q_j`.
pub fn filtered_cat_scan(
    spec: &CatSpec,
    q_m: f64,
    slit_centers: &[f64],
    grid: &Grid,
) -> Result<ndarray::Array2<f64>> {
    let n = grid.n_points();
    let k0 = grid.p_origin();
    let mut out = ndarray::Array2::zeros((slit_centers.len(), n));
    for (i, &center) in slit_centers.iter().enumerate() {
        let w = filtered_cat_wdf_closed_form(spec, q_m, center, grid)?;
        out.row_mut(i).assign(&w.values().column(k0));
    }
    Ok(out)
}
