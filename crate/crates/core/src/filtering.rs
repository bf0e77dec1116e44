//! Filters, detection and the interference/transition classifier.
//!
//! A filter multiplies the state by a device transmission function in one
//! representation. In phase space that is a product along one axis and a
//! convolution along the conjugate axis:
//!
//! | kind                | wavefunction                                  | phase space                                     |
//! |---------------------|-----------------------------------------------|-------------------------------------------------|
//! | `Coordinate`        | `psi_in(q) psi_m(q)`                          | `int W_in(q, p') W_m(q, p - p') dp'`            |
//! | `Momentum`          | `phi_in(p) phi_m(p)`                          | `int W_in(q', p) W_m(q - q', p) dq'`            |
//! | `GeneralCoordinate` | `h^-1/2 int psi_in(q') psi_m(q - q') e^{i p0 q'/hbar} dq'` | `int W_in(q', p - p0) W_m(q - q', p) dq'` |
//! | `GeneralMomentum`   | `h^-1/2 int phi_in(p') phi_m(p - p') e^{-i q0 p'/hbar} dp'` | `int W_in(q - q0, p') W_m(q, p - p') dp'` |
//!
//! For the momentum kinds the device is given in momentum representation and
//! `W_m` is the Wigner function of its inverse Fourier transform.
//!
//! Convolutions along `q` are aperiodic. Along `p` they are circular: the
//! momentum lattice is the discrete dual of the correlation offsets, which
//! makes the circular sum the exact counterpart of the pointwise product.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    fourier_transform, inverse_fourier_transform, normalize, Grid, Representation, WaveFunction,
};
use crate::spectral;
use crate::wigner::{marginal_p, marginal_q, overlap_probability, wdf_unchecked, WignerFunction};

/// Transmission below which a filter counts as blocking the state.
pub const MIN_TRANSMISSION: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Coordinate,
    Momentum,
    GeneralCoordinate,
    GeneralMomentum,
}

impl FilterKind {
    /// Representation the device transmission function is given in.
    pub fn device_representation(self) -> Representation {
        match self {
            FilterKind::Coordinate | FilterKind::GeneralCoordinate => Representation::Position,
            FilterKind::Momentum | FilterKind::GeneralMomentum => Representation::Momentum,
        }
    }
}

/// A filtering device.
///
/// `device` is `psi_m(q)` for the coordinate kinds and `phi_m(p)` for the
/// momentum kinds; it need not be normalized. `p_offset` is used only by
/// `GeneralCoordinate` and `q_offset` only by `GeneralMomentum`; both must be
/// whole multiples of the lattice spacing.
#[derive(Clone, Debug)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub device: WaveFunction,
    pub q_offset: f64,
    pub p_offset: f64,
}

impl FilterSpec {
    pub fn new(kind: FilterKind, device: WaveFunction) -> FilterSpec {
        FilterSpec {
            kind,
            device,
            q_offset: 0.0,
            p_offset: 0.0,
        }
    }

    pub fn with_q_offset(mut self, q0: f64) -> FilterSpec {
        self.q_offset = q0;
        self
    }

    pub fn with_p_offset(mut self, p0: f64) -> FilterSpec {
        self.p_offset = p0;
        self
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        grid.check_same(self.device.grid())?;
        self.device.require(self.kind.device_representation())?;
        let unused = match self.kind {
            FilterKind::GeneralCoordinate => self.q_offset,
            FilterKind::GeneralMomentum => self.p_offset,
            _ => self.q_offset.abs() + self.p_offset.abs(),
        };
        if unused != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{:?} filter takes no offset along this axis",
                self.kind
            )));
        }
        grid.q_steps(self.q_offset)?;
        grid.p_steps(self.p_offset)?;
        Ok(())
    }

    /// Position-space device profile whose Wigner function enters the
    /// phase-space laws.
    fn position_device(&self) -> Result<WaveFunction> {
        match self.device.representation() {
            Representation::Position => Ok(self.device.clone()),
            Representation::Momentum => inverse_fourier_transform(&self.device),
        }
    }

    /// Wigner function of the device profile (not normalized).
    pub fn device_wdf(&self) -> Result<WignerFunction> {
        wdf_unchecked(&self.position_device()?)
    }
}

/// Result of passing a state through a filter.
#[derive(Clone, Debug)]
pub struct FilterOutput {
    /// Renormalized output state.
    pub state: WaveFunction,
    /// Output before renormalization.
    pub raw: WaveFunction,
    /// Squared norm of `raw`, the transmitted fraction.
    pub transmission: f64,
}

pub fn filter_wavefunction(psi_in: &WaveFunction, f: &FilterSpec) -> Result<FilterOutput> {
    psi_in.require(Representation::Position)?;
    let grid = *psi_in.grid();
    f.validate(&grid)?;
    let n = grid.n_points();
    let hbar = grid.hbar();
    let raw = match f.kind {
        FilterKind::Coordinate => {
            let amps = psi_in.amplitudes() * f.device.amplitudes();
            WaveFunction::new(grid, amps, Representation::Position)?
        }
        FilterKind::Momentum => {
            let phi = fourier_transform(psi_in)?;
            let amps = phi.amplitudes() * f.device.amplitudes();
            inverse_fourier_transform(&WaveFunction::new(grid, amps, Representation::Momentum)?)?
        }
        FilterKind::GeneralCoordinate => {
            let origin = grid.q_origin_or_err()? as i64;
            let boosted: Vec<Complex64> = psi_in
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(j, a)| a * Complex64::from_polar(1.0, f.p_offset * grid.q(j) / hbar))
                .collect();
            let device = f.device.amplitudes();
            let scale = grid.delta_q() / grid.h().sqrt();
            let amps =
                lattice_convolution(&boosted, device.as_slice().expect("contiguous"), origin);
            WaveFunction::new(grid, amps.mapv(|z| z * scale), Representation::Position)?
        }
        FilterKind::GeneralMomentum => {
            let phi = fourier_transform(psi_in)?;
            let shifted: Vec<Complex64> = phi
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(k, a)| a * Complex64::from_polar(1.0, -f.q_offset * grid.p(k) / hbar))
                .collect();
            let device = f.device.amplitudes();
            let scale = grid.delta_p() / grid.h().sqrt();
            let amps = lattice_convolution(
                &shifted,
                device.as_slice().expect("contiguous"),
                (n / 2) as i64,
            );
            let out = WaveFunction::new(grid, amps.mapv(|z| z * scale), Representation::Momentum)?;
            inverse_fourier_transform(&out)?
        }
    };
    let transmission = raw.norm_sqr();
    if transmission.is_nan() || transmission < MIN_TRANSMISSION {
        return Err(Error::ZeroTransmission(transmission));
    }
    Ok(FilterOutput {
        state: normalize(&raw)?,
        raw,
        transmission,
    })
}

/// `out[j] = sum_j' a[j'] b[j - j' + origin]`, zero outside the lattice.
fn lattice_convolution(
    a: &[Complex64],
    b: &[Complex64],
    origin: i64,
) -> ndarray::Array1<Complex64> {
    let n = a.len() as i64;
    ndarray::Array1::from_vec(
        (0..n)
            .into_par_iter()
            .map(|j| {
                let mut sum = Complex64::new(0.0, 0.0);
                for (jp, x) in a.iter().enumerate() {
                    let idx = j - jp as i64 + origin;
                    if (0..n).contains(&idx) {
                        sum += x * b[idx as usize];
                    }
                }
                sum
            })
            .collect(),
    )
}

/// Applies the phase-space filtering law for `f.kind`. The result is not
/// renormalized; its mass is the transmission.
pub fn filter_wdf(w_in: &WignerFunction, f: &FilterSpec) -> Result<WignerFunction> {
    let grid = *w_in.grid();
    f.validate(&grid)?;
    let w_m = f.device_wdf()?;
    let dq = grid.delta_q();
    let dp = grid.delta_p();
    let values = match f.kind {
        FilterKind::Coordinate => {
            spectral::circular_convolve_columns(w_in.values(), w_m.values()) * dp
        }
        FilterKind::Momentum => {
            let origin = grid.q_origin_or_err()?;
            spectral::linear_convolve_rows(w_in.values(), w_m.values(), origin) * dq
        }
        FilterKind::GeneralCoordinate => {
            let origin = grid.q_origin_or_err()?;
            let shifted = w_in.shifted_p(grid.p_steps(f.p_offset)?);
            spectral::linear_convolve_rows(shifted.values(), w_m.values(), origin) * dq
        }
        FilterKind::GeneralMomentum => {
            let shifted = w_in.shifted_q(grid.q_steps(f.q_offset)?);
            spectral::circular_convolve_columns(shifted.values(), w_m.values()) * dp
        }
    };
    WignerFunction::new(grid, values)
}

/// What a detector array reads out: the full phase-space convolution of the
/// state with the device. Not renormalized.
#[derive(Clone, Debug)]
pub struct DetectionMap {
    grid: Grid,
    values: Array2<f64>,
}

impl DetectionMap {
    pub fn new(grid: Grid, values: Array2<f64>) -> Result<DetectionMap> {
        let w = WignerFunction::new(grid, values)?;
        Ok(DetectionMap {
            grid,
            values: w.into_values(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mass(&self) -> f64 {
        self.values.sum() * self.grid.delta_q() * self.grid.delta_p()
    }

    /// The map as a phase-space distribution on the same lattice.
    pub fn to_wigner(&self) -> WignerFunction {
        WignerFunction::new(self.grid, self.values.clone()).expect("same shape")
    }
}

/// `D(q, p) = int W_in(q', p') W_m(q - q', p - p') dq' dp'`.
pub fn detect(w_in: &WignerFunction, w_m: &WignerFunction) -> Result<DetectionMap> {
    let grid = *w_in.grid();
    grid.check_same(w_m.grid())?;
    let origin = grid.q_origin_or_err()?;
    let values = spectral::convolve_2d(w_in.values(), w_m.values(), origin)
        * (grid.delta_q() * grid.delta_p());
    Ok(DetectionMap { grid, values })
}

/// The same detection map from wavefunctions:
/// `h^-1 |int psi_in(q') conj(psi_m(q - q')) exp(-i p q' / hbar) dq'|^2`.
pub fn detect_wavefunctions(psi_in: &WaveFunction, psi_m: &WaveFunction) -> Result<DetectionMap> {
    psi_in.require(Representation::Position)?;
    psi_m.require(Representation::Position)?;
    let grid = *psi_in.grid();
    grid.check_same(psi_m.grid())?;
    let origin = grid.q_origin_or_err()? as i64;
    let n = grid.n_points();
    let a = psi_in.amplitudes();
    let m = psi_m.amplitudes();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let g = ndarray::Array1::from_shape_fn(n, |jp| {
                let idx = j as i64 - jp as i64 + origin;
                if (0..n as i64).contains(&idx) {
                    a[jp] * m[idx as usize].conj()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let g = WaveFunction::new(grid, g, Representation::Position).expect("length n");
            let phi = fourier_transform(&g).expect("position input");
            phi.amplitudes().iter().map(|z| z.norm_sqr()).collect()
        })
        .collect();
    let values = Array2::from_shape_fn((n, n), |(j, k)| rows[j][k]);
    Ok(DetectionMap { grid, values })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Interference,
    Transition,
    Both,
    Neither,
}

/// Thresholds for [`classify_interaction_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InteractionThresholds {
    /// A marginal sample is in the support when it exceeds this fraction of
    /// the marginal's peak.
    pub support_rel: f64,
    /// Shared-support mass fraction that counts as a common projection.
    pub common_projection: f64,
    /// Overlap probability from which transitions are possible.
    pub overlap: f64,
    /// Overlap below which the two states still count as distinct, so that a
    /// common projection also allows interference.
    pub distinct_below: f64,
}

impl Default for InteractionThresholds {
    fn default() -> Self {
        InteractionThresholds {
            support_rel: 1e-4,
            common_projection: 0.5,
            overlap: 1e-3,
            distinct_below: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionReport {
    pub overlap_mass: f64,
    pub common_q_support: f64,
    pub common_p_support: f64,
    pub classification: Interaction,
}

pub fn classify_interaction(w1: &WignerFunction, w2: &WignerFunction) -> Result<InteractionReport> {
    classify_interaction_with(w1, w2, &InteractionThresholds::default())
}

/// Interference needs a common projection on the `q` or `p` axis without a
/// substantial phase-space overlap; transitions need the overlap.
///
/// | overlap                         | common projection | result         |
/// |---------------------------------|-------------------|----------------|
/// | `>= distinct_below`             | any               | `Transition`   |
/// | `[overlap, distinct_below)`     | yes               | `Both`         |
/// | `[overlap, distinct_below)`     | no                | `Transition`   |
/// | `< overlap`                     | yes               | `Interference` |
/// | `< overlap`                     | no                | `Neither`      |
pub fn classify_interaction_with(
    w1: &WignerFunction,
    w2: &WignerFunction,
    t: &InteractionThresholds,
) -> Result<InteractionReport> {
    let overlap_mass = overlap_probability(w1, w2)?.clamp(0.0, 1.0);
    let common_q_support = shared_support(&marginal_q(w1), &marginal_q(w2), t.support_rel);
    let common_p_support = shared_support(&marginal_p(w1), &marginal_p(w2), t.support_rel);
    let common = common_q_support >= t.common_projection || common_p_support >= t.common_projection;
    let overlapping = overlap_mass >= t.overlap;
    let classification = match (overlapping, common) {
        _ if overlap_mass >= t.distinct_below => Interaction::Transition,
        (true, true) => Interaction::Both,
        (true, false) => Interaction::Transition,
        (false, true) => Interaction::Interference,
        (false, false) => Interaction::Neither,
    };
    Ok(InteractionReport {
        overlap_mass,
        common_q_support,
        common_p_support,
        classification,
    })
}

/// Smaller of the two marginals' mass fractions lying on the intersection of
/// their supports.
fn shared_support(a: &ndarray::Array1<f64>, b: &ndarray::Array1<f64>, rel: f64) -> f64 {
    let support = |m: &ndarray::Array1<f64>| {
        let peak = m.iter().copied().fold(0.0, f64::max);
        m.mapv(move |x| x > rel * peak)
    };
    let (sa, sb) = (support(a), support(b));
    let fraction = |m: &ndarray::Array1<f64>| {
        let total: f64 = m.iter().map(|x| x.max(0.0)).sum();
        if total <= 0.0 {
            return 0.0;
        }
        let shared: f64 = m
            .iter()
            .zip(sa.iter().zip(sb.iter()))
            .filter(|(_, (x, y))| **x && **y)
            .map(|(v, _)| v.max(0.0))
            .sum();
        shared / total
    };
    fraction(a).min(fraction(b))
}
