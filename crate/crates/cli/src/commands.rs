use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use wignerlab::io::{read_filter, write_detection, write_json, write_wavefunction, write_wigner};
use wignerlab::{
    blob_report, classify_interaction, detect, detect_wavefunctions, filter_wavefunction,
    filter_wdf, moments, overlap_probability, propagate_with, purity, uncertainty_product,
    wdf_from_wavefunction, EvolutionConfig, Stepper,
};

use crate::inputs::{is_inline, load, load_potential, load_wave, Loaded, StateDescriptor};
use crate::manifest::RunManifest;
use crate::{Cli, Command, EvolveArgs, StateArgs, StepperArg, DESK_GRID};

pub fn run(cli: &Cli) -> Result<()> {
    let out = &cli.global.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let manifest = match &cli.command {
        Command::State(args) => state(cli, args)?,
        Command::Wdf { input } => wdf(cli, input)?,
        Command::Filter { state, filter } => filtering(cli, state, filter)?,
        Command::Detect { state, device } => detection(cli, state, device)?,
        Command::Evolve(args) => evolve(cli, args)?,
        Command::Overlap { first, second } => overlap(cli, first, second)?,
        Command::Blob { input } => blob(cli, input)?,
        Command::Figure(args) => crate::figures::figure(cli, args)?,
    };
    manifest.finish(out)?;
    Ok(())
}

pub fn print<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string())
}

fn state(cli: &Cli, args: &StateArgs) -> Result<RunManifest> {
    let descriptor = if let Some(spec) = &args.spec {
        StateDescriptor::from_json_arg(spec)?
    } else if args.cat {
        StateDescriptor::cat(&args.params)?
    } else if args.random {
        StateDescriptor::random(&args.params)?
    } else {
        StateDescriptor::gaussian(&args.params)?
    };
    let grid = cli.global.grid_or(DESK_GRID)?;
    let psi = descriptor.build(&grid, cli.global.seed)?;
    let name = args
        .name
        .clone()
        .unwrap_or_else(|| descriptor.name().to_string());
    let files = write_wavefunction(&psi, &cli.global.out.join(format!("{name}.csv")))?;
    print(&json!({
        "state": descriptor,
        "norm": psi.norm_sqr(),
        "edge_amplitude": psi.edge_amplitude(),
        "file": files[0],
    }))?;
    let mut m = RunManifest::new("state", grid, cli.global.seed);
    m.outputs(files);
    Ok(m)
}

fn wdf(cli: &Cli, input: &Path) -> Result<RunManifest> {
    let psi = load_wave(input)?;
    let w = wdf_from_wavefunction(&psi)?;
    let path = cli.global.out.join(format!("{}_wdf.csv", stem(input)));
    let files = write_wigner(&w, &path)?;
    print(&json!({
        "mass": w.mass(),
        "purity": purity(&w),
        "uncertainty_product": uncertainty_product(&w)?,
        "min_value": w.min_value(),
        "file": files[0],
    }))?;
    let mut m = RunManifest::new("wdf", *psi.grid(), cli.global.seed);
    m.input(input);
    m.outputs(files);
    Ok(m)
}

fn filtering(cli: &Cli, state: &Path, filter_json: &Path) -> Result<RunManifest> {
    let psi = load_wave(state)?;
    let grid = *psi.grid();
    let spec = read_filter(filter_json, &grid)
        .with_context(|| format!("reading filter {}", filter_json.display()))?;
    let out = filter_wavefunction(&psi, &spec)?;
    // The phase-space route keeps the transmitted weight.
    let w_out = filter_wdf(&wdf_from_wavefunction(&psi)?, &spec)?;
    let base = cli.global.out.join(format!("{}_filtered", stem(state)));
    let state_files = write_wavefunction(&out.state, &base.with_extension("csv"))?;
    let wdf_files = write_wigner(
        &w_out,
        &PathBuf::from(format!("{}_wdf.csv", base.display())),
    )?;
    print(&json!({
        "transmission": out.transmission,
        "wdf_mass": w_out.mass(),
        "state_file": state_files[0],
        "wdf_file": wdf_files[0],
    }))?;
    let mut m = RunManifest::new("filter", grid, cli.global.seed);
    m.input(state);
    m.input(filter_json);
    m.outputs(state_files);
    m.outputs(wdf_files);
    Ok(m)
}

fn detection(cli: &Cli, state: &Path, device: &Path) -> Result<RunManifest> {
    let map = match (load(state)?, load(device)?) {
        (Loaded::Wave(psi), Loaded::Wave(dev)) => detect_wavefunctions(&psi, &dev)?,
        (a, b) => detect(&a.wigner()?, &b.wigner()?)?,
    };
    let path = cli
        .global
        .out
        .join(format!("{}_detection.csv", stem(state)));
    let files = write_detection(&map, &path)?;
    print(&json!({
        "min_value": map.min_value(),
        "mass": map.mass(),
        "file": files[0],
    }))?;
    let mut m = RunManifest::new("detect", *map.grid(), cli.global.seed);
    m.input(state);
    m.input(device);
    m.outputs(files);
    Ok(m)
}

fn evolve(cli: &Cli, args: &EvolveArgs) -> Result<RunManifest> {
    let loaded = load(&args.input)?;
    let grid = loaded.grid();
    let w0 = loaded.wigner()?;
    let v = load_potential(&args.potential)?;
    let cfg = EvolutionConfig::for_duration(args.t, args.dt)?
        .with_series_order(args.series_order)
        .with_stepper(match args.stepper {
            StepperArg::Split4 => Stepper::Split4,
            StepperArg::Rk4 => Stepper::Rk4,
        });
    let out_dir = &cli.global.out;
    let name = stem(&args.input);
    let mut outputs = Vec::new();
    let w = propagate_with(&w0, &v, &cfg, args.every, |step, w| {
        let path = out_dir.join(format!("{name}_step{step:06}.csv"));
        outputs.extend(write_wigner(w, &path)?);
        Ok(())
    })?;
    let files = write_wigner(&w, &out_dir.join(format!("{name}_evolved.csv")))?;
    let mo = moments(&w);
    print(&json!({
        "potential": v,
        "steps": cfg.n_steps,
        "dt": cfg.dt,
        "t": cfg.duration(),
        "mass": w.mass(),
        "mean_q": mo.mean_q,
        "mean_p": mo.mean_p,
        "min_value": w.min_value(),
        "file": files[0],
    }))?;
    let mut m = RunManifest::new("evolve", grid, cli.global.seed);
    m.input(&args.input);
    if !is_inline(&args.potential) {
        m.input(Path::new(&args.potential));
    }
    m.outputs(outputs);
    m.outputs(files);
    Ok(m)
}

fn overlap(cli: &Cli, first: &Path, second: &Path) -> Result<RunManifest> {
    let (a, b) = (load(first)?, load(second)?);
    let (wa, wb) = (a.wigner()?, b.wigner()?);
    let report = classify_interaction(&wa, &wb)?;
    let value = json!({
        "overlap_probability": overlap_probability(&wa, &wb)?,
        "interaction": report,
    });
    let path = cli.global.out.join("overlap.json");
    write_json(&value, &path)?;
    print(&value)?;
    let mut m = RunManifest::new("overlap", a.grid(), cli.global.seed);
    m.input(first);
    m.input(second);
    m.outputs([path]);
    Ok(m)
}

fn blob(cli: &Cli, input: &Path) -> Result<RunManifest> {
    let loaded = load(input)?;
    let report = blob_report(&loaded.wigner()?)?;
    let path = cli.global.out.join(format!("{}_blob.json", stem(input)));
    write_json(&report, &path)?;
    print(&report)?;
    let mut m = RunManifest::new("blob", loaded.grid(), cli.global.seed);
    m.input(input);
    m.outputs([path]);
    Ok(m)
}
