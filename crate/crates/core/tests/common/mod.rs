#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wignerlab::{
    fourier_transform, gaussian_superposition, gaussian_wavefunction, make_grid, FilterKind,
    FilterSpec, GaussianSpec, Grid, WaveFunction,
};

pub const SEED: u64 = 0x5eed_2024;

pub fn desk_grid() -> Grid {
    make_grid(-12.0, 12.0, 256).unwrap()
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ stream)
}

pub fn random_gaussian(rng: &mut ChaCha8Rng, center: f64) -> GaussianSpec {
    GaussianSpec::new(rng.random_range(0.6..1.2))
        .centered_at(rng.random_range(-center..center))
        .with_momentum(rng.random_range(-3.0..3.0))
}

/// Normalized superposition of one to three Gaussian packets with random
/// complex weights, centres in `[-center, center]`.
pub fn random_state(rng: &mut ChaCha8Rng, grid: &Grid, center: f64) -> WaveFunction {
    let terms = rng.random_range(1..=3);
    let components: Vec<_> = (0..terms)
        .map(|_| {
            let c =
                Complex64::from_polar(rng.random_range(0.3..1.0), rng.random_range(0.0..2.0 * PI));
            (c, random_gaussian(rng, center))
        })
        .collect();
    gaussian_superposition(&components, grid).unwrap()
}

/// A random unnormalized device for `kind`, with a random lattice offset
/// where the kind takes one.
pub fn random_filter(rng: &mut ChaCha8Rng, grid: &Grid, kind: FilterKind) -> FilterSpec {
    let spec = GaussianSpec::new(rng.random_range(0.5..1.0))
        .centered_at(rng.random_range(-1.0..1.0))
        .with_momentum(rng.random_range(-1.0..1.0));
    let gain = Complex64::from_polar(rng.random_range(0.2..2.0), rng.random_range(0.0..2.0 * PI));
    let profile = gaussian_wavefunction(&spec, grid).unwrap().scaled(gain);
    match kind {
        FilterKind::Coordinate => FilterSpec::new(kind, profile),
        FilterKind::Momentum => FilterSpec::new(kind, fourier_transform(&profile).unwrap()),
        FilterKind::GeneralCoordinate => FilterSpec::new(kind, profile)
            .with_p_offset(rng.random_range(-10..=10) as f64 * grid.delta_p()),
        FilterKind::GeneralMomentum => FilterSpec::new(kind, fourier_transform(&profile).unwrap())
            .with_q_offset(rng.random_range(-16..=16) as f64 * grid.delta_q()),
    }
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |a - e^{i phi} b|` with the global phase chosen from `<b|a>`.
pub fn phase_aligned_error(a: &WaveFunction, b: &WaveFunction) -> f64 {
    let overlap = wignerlab::inner_product(b, a).unwrap();
    let phase = overlap / overlap.norm();
    let rotated: Vec<_> = b.amplitudes().iter().map(|z| z * phase).collect();
    max_abs_diff(a.amplitudes().as_slice().unwrap(), &rotated)
}
