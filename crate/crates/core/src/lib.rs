//! Phase-space quantum mechanics of one-dimensional systems on a uniform
//! lattice.
//!
//! Wavefunctions live on a [`Grid`]; their Wigner functions live on the
//! product of its coordinate and momentum lattices. On top of that sit
//! measurement (filters and detection), time evolution, and diagnostics of
//! phase-space extent.
//!
//! ```
//! use wignerlab::{cat_wavefunction, make_grid, wdf_from_wavefunction, CatSpec};
//!
//! let grid = make_grid(-12.0, 12.0, 256)?;
//! let psi = cat_wavefunction(&CatSpec::new(1.0, 4.0), &grid)?;
//! let w = wdf_from_wavefunction(&psi)?;
//! assert!((w.mass() - 1.0).abs() < 1e-8);
//! assert!(w.min_value() < 0.0);
//! # Ok::<(), wignerlab::Error>(())
//! ```

pub mod blob;
pub mod error;
pub mod evolution;
pub mod filtering;
pub mod grid;
pub mod io;
mod spectral;
pub mod states;
pub mod wigner;

pub use blob::{
    blob_report, covariance_area, effective_area, smoothed_minimum, subplanck_scale, BlobReport,
};
pub use error::{Error, Result};
pub use evolution::{
    moyal_rhs, propagate, propagate_with, rk4_stability_bound, split_step_schrodinger,
    EvolutionConfig, PotentialSpec, Stepper,
};
pub use filtering::{
    classify_interaction, classify_interaction_with, detect, detect_wavefunctions,
    filter_wavefunction, filter_wdf, DetectionMap, FilterKind, FilterOutput, FilterSpec,
    Interaction, InteractionReport, InteractionThresholds,
};
pub use grid::{
    fourier_transform, inner_product, inverse_fourier_transform, make_grid, normalize, Grid,
    Representation, WaveFunction,
};
pub use states::{
    cat_wavefunction, cat_wdf_closed_form, filtered_cat_scan, filtered_cat_wdf_closed_form,
    filtered_gaussian_wdf_closed_form, gaussian_superposition, gaussian_wavefunction,
    gaussian_wdf_closed_form, CatSpec, GaussianSpec,
};
pub use wigner::{
    expectation, marginal_p, marginal_q, moments, overlap_probability, purity,
    recover_wavefunction, uncertainty_product, wdf_from_density, wdf_from_wavefunction,
    DensityMatrix, Moments, WignerFunction,
};
