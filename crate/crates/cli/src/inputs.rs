use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wignerlab::io::{read_json, read_wavefunction, read_wigner, sidecar_path};
use wignerlab::{
    cat_wavefunction, gaussian_superposition, gaussian_wavefunction, inverse_fourier_transform,
    wdf_from_wavefunction, CatSpec, GaussianSpec, Grid, PotentialSpec, Representation,
    WaveFunction, WignerFunction,
};

/// Whether a JSON argument is given inline rather than as a file path.
pub fn is_inline(arg: &str) -> bool {
    arg.trim_start().starts_with('{')
}

/// The text of a JSON argument: the argument itself if inline, otherwise
/// the file it names.
fn json_arg(arg: &str) -> Result<String> {
    if is_inline(arg) {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
    }
}

/// What `state` can build. As JSON: `{"gaussian": {"width": 1.0}}`,
/// `{"cat": {"width": 1.0, "separation": 4.0}}` or `{"random": {"terms": 3}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateDescriptor {
    Gaussian(GaussianSpec),
    Cat(CatSpec),
    Random {
        #[serde(default = "default_terms")]
        terms: usize,
    },
}

fn default_terms() -> usize {
    3
}

impl StateDescriptor {
    pub fn name(&self) -> &'static str {
        match self {
            StateDescriptor::Gaussian(_) => "gaussian",
            StateDescriptor::Cat(_) => "cat",
            StateDescriptor::Random { .. } => "random",
        }
    }

    /// Inline JSON, or the path of a JSON file.
    pub fn from_json_arg(arg: &str) -> Result<StateDescriptor> {
        serde_json::from_str(&json_arg(arg)?).context("parsing state descriptor")
    }

    pub fn gaussian(params: &[String]) -> Result<StateDescriptor> {
        let mut p = parse_params(params, &["q0", "width", "center", "p0", "momentum"])?;
        let width = p.take(&["q0", "width"]).unwrap_or(1.0);
        let center = p.take(&["center"]).unwrap_or(0.0);
        let momentum = p.take(&["p0", "momentum"]).unwrap_or(0.0);
        Ok(StateDescriptor::Gaussian(
            GaussianSpec::new(width)
                .centered_at(center)
                .with_momentum(momentum),
        ))
    }

    pub fn cat(params: &[String]) -> Result<StateDescriptor> {
        let mut p = parse_params(params, &["qi", "width", "d", "separation"])?;
        let width = p.take(&["qi", "width"]).unwrap_or(1.0);
        let separation = p.take(&["d", "separation"]).unwrap_or(4.0 * width);
        Ok(StateDescriptor::Cat(CatSpec::new(width, separation)))
    }

    pub fn random(params: &[String]) -> Result<StateDescriptor> {
        let mut p = parse_params(params, &["terms"])?;
        let terms = p.take(&["terms"]).unwrap_or(3.0);
        if terms < 1.0 || terms.fract() != 0.0 {
            bail!("terms must be a positive integer, got {terms}");
        }
        Ok(StateDescriptor::Random {
            terms: terms as usize,
        })
    }

    pub fn build(&self, grid: &Grid, seed: u64) -> Result<WaveFunction> {
        Ok(match self {
            StateDescriptor::Gaussian(spec) => gaussian_wavefunction(spec, grid)?,
            StateDescriptor::Cat(spec) => cat_wavefunction(spec, grid)?,
            StateDescriptor::Random { terms } => random_superposition(*terms, grid, seed)?,
        })
    }
}

/// `terms` Gaussian packets with widths in [0.6, 1.2), centres and mean
/// momenta in [-3, 3) and random complex weights.
fn random_superposition(terms: usize, grid: &Grid, seed: u64) -> Result<WaveFunction> {
    if terms == 0 {
        bail!("a random state needs at least one term");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let components: Vec<_> = (0..terms)
        .map(|_| {
            let weight =
                Complex64::from_polar(rng.random_range(0.3..1.0), rng.random_range(0.0..2.0 * PI));
            let spec = GaussianSpec::new(rng.random_range(0.6..1.2))
                .centered_at(rng.random_range(-3.0..3.0))
                .with_momentum(rng.random_range(-3.0..3.0));
            (weight, spec)
        })
        .collect();
    Ok(gaussian_superposition(&components, grid)?)
}

struct Params(BTreeMap<String, f64>);

impl Params {
    fn take(&mut self, aliases: &[&str]) -> Option<f64> {
        aliases.iter().find_map(|a| self.0.remove(*a))
    }
}

fn parse_params(params: &[String], known: &[&str]) -> Result<Params> {
    let mut map = BTreeMap::new();
    for param in params {
        let (key, value) = param
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, got {param:?}"))?;
        if !known.contains(&key) {
            bail!(
                "unknown parameter {key:?}; expected one of {}",
                known.join(", ")
            );
        }
        let value: f64 = value
            .parse()
            .with_context(|| format!("parameter {key} is not a number: {value:?}"))?;
        map.insert(key.to_string(), value);
    }
    Ok(Params(map))
}

/// A state read from disk, either as amplitudes or as a Wigner function.
pub enum Loaded {
    Wave(WaveFunction),
    Wigner(WignerFunction),
}

impl Loaded {
    pub fn grid(&self) -> Grid {
        match self {
            Loaded::Wave(psi) => *psi.grid(),
            Loaded::Wigner(w) => *w.grid(),
        }
    }

    pub fn wigner(&self) -> Result<WignerFunction> {
        Ok(match self {
            Loaded::Wave(psi) => wdf_from_wavefunction(psi)?,
            Loaded::Wigner(w) => w.clone(),
        })
    }
}

/// Reads a wavefunction (returned in coordinate representation) or a Wigner
/// function, telling them apart by the sidecar.
pub fn load(path: &Path) -> Result<Loaded> {
    let side: serde_json::Value = read_json(&sidecar_path(path))
        .with_context(|| format!("reading sidecar of {}", path.display()))?;
    let loaded = if side.get("representation").is_some() {
        Loaded::Wave(position(read_wavefunction(path)?)?)
    } else {
        Loaded::Wigner(read_wigner(path)?)
    };
    Ok(loaded)
}

pub fn load_wave(path: &Path) -> Result<WaveFunction> {
    match load(path).with_context(|| format!("loading {}", path.display()))? {
        Loaded::Wave(psi) => Ok(psi),
        Loaded::Wigner(_) => bail!(
            "{} holds a Wigner function; a wavefunction is needed",
            path.display()
        ),
    }
}

fn position(psi: WaveFunction) -> Result<WaveFunction> {
    Ok(match psi.representation() {
        Representation::Position => psi,
        Representation::Momentum => inverse_fourier_transform(&psi)?,
    })
}

#[derive(Deserialize)]
struct Harmonic {
    #[serde(default = "unit")]
    mass: f64,
    omega: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PotentialFile {
    Harmonic { harmonic: Harmonic },
    Polynomial(PotentialSpec),
}

/// Inline JSON or a file path.
pub fn load_potential(arg: &str) -> Result<PotentialSpec> {
    let file: PotentialFile = serde_json::from_str(&json_arg(arg)?)
        .with_context(|| format!("parsing potential {arg}"))?;
    let v = match file {
        PotentialFile::Harmonic { harmonic } => {
            PotentialSpec::harmonic(harmonic.mass, harmonic.omega)
        }
        PotentialFile::Polynomial(v) => v,
    };
    v.validate()?;
    Ok(v)
}
