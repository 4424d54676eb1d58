use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use levy_besov::besov::{besov_norm, weight_sum, BesovParams};
use levy_besov::idlaw::{estimate_indices_with, IndexPair, IndexSettings, LevyModel};
use levy_besov::moments::{c_p, fractional_moment_mc, pairing_moment_cf};
use levy_besov::phase::{
    dirac_scaling, kink_inv_p, phase_diagram, phase_diagram_from_indices, predicted_region, RegionKind,
};
use levy_besov::sampler::{
    sample_compound_poisson_points, sample_field_with, CellSampler, GridField, GridSpec, TestFunction,
};
use levy_besov::wavelet::{analyze, build_basis};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::*;
use crate::CliError;

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: String,
    seed: Option<u64>,
}

fn provenance<C: Serialize>(command: &str, config: &C, seed: Option<u64>) -> Value {
    let bytes = serde_json::to_vec(config).expect("configs serialize");
    let hash: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    serde_json::to_value(Provenance {
        tool: "levy-besov",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_hash: hash,
        seed,
    })
    .expect("provenance serializes")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))
}

/// Write `doc` to `path`, or to stdout.
fn emit(doc: &Value, path: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(doc).expect("json");
    match path {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}").map_err(|e| CliError::io(e.to_string()))?;
            w.flush().map_err(|e| CliError::io(e.to_string()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn finish_writer(mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(e.to_string()))
}

pub fn sample(cfg: SampleConfig) -> Result<(), CliError> {
    let model = require(cfg.model.clone(), "model")?;
    let spec = require(cfg.grid, "grid")?;
    let seed = cfg.seed.unwrap_or(0);
    let output = require(cfg.output.clone(), "output")?;
    if cfg.points.is_some() && !matches!(model, LevyModel::CompoundPoisson { .. }) {
        return Err(CliError::config("`points` requires a compound-poisson model"));
    }
    let sampler = match cfg.jump_threshold {
        Some(eps) => CellSampler::with_threshold(&model, eps)?,
        None => CellSampler::new(&model)?,
    };
    let field = sample_field_with(&sampler, spec, seed)?;
    let mut w = create(&output)?;
    field.write_to(&mut w)?;
    finish_writer(w)?;
    let mut doc = json!({
        "provenance": provenance("sample", &cfg, Some(seed)),
        "output": output,
        "model": model.tag(),
        "cells": spec.total_cells(),
        "truncation": sampler.truncation(),
    });
    if let (Some(path), LevyModel::CompoundPoisson { lambda, jump }) = (&cfg.points, &model) {
        let cloud = sample_compound_poisson_points(*lambda, jump, spec, seed)?;
        let mut w = create(path)?;
        cloud.write_csv(&mut w)?;
        finish_writer(w)?;
        doc["points"] = json!({ "path": path, "count": cloud.len() });
    }
    emit(&doc, None)
}

pub fn analyze_cmd(cfg: AnalyzeConfig) -> Result<(), CliError> {
    let input = require(cfg.input.clone(), "input")?;
    let file = File::open(&input).map_err(|e| CliError::io(format!("cannot open {}: {e}", input.display())))?;
    let field = GridField::read_from(&mut BufReader::new(file))?;
    let basis = build_basis(cfg.basis.unwrap_or(3))?;
    let levels = cfg.levels.unwrap_or(field.spec.j as usize);
    let params = BesovParams::new(
        cfg.p.unwrap_or(2.0),
        cfg.q.unwrap_or(2.0),
        cfg.tau.unwrap_or(0.0),
        cfg.mu.unwrap_or(0.0),
    )?;
    let pyr = analyze(&field, &basis, levels)?;
    let report = besov_norm(&pyr, params)?;
    if let Some(path) = &cfg.csv {
        let mut w = create(path)?;
        report.write_csv(&mut w)?;
        finish_writer(w)?;
    }
    if let Some(path) = &cfg.pyramid {
        let mut w = create(path)?;
        pyr.write_to(&mut w)?;
        finish_writer(w)?;
    }
    let doc = json!({
        "provenance": provenance("analyze", &cfg, Some(field.seed)),
        "input": input,
        "model": field.model_tag,
        "report": report,
        "summary": report.summary_json(),
    });
    emit(&doc, cfg.output.as_deref())
}

pub fn indices(cfg: IndicesConfig) -> Result<(), CliError> {
    let model = require(cfg.model.clone(), "model")?;
    let mut settings = IndexSettings::default();
    settings.decades = cfg.decades.unwrap_or(settings.decades);
    settings.samples_per_decade = cfg.samples_per_decade.unwrap_or(settings.samples_per_decade);
    settings.p_resolution = cfg.p_resolution.unwrap_or(settings.p_resolution);
    settings.convention = cfg.convention.unwrap_or(settings.convention);
    let est = estimate_indices_with(&model, &settings)?;
    let doc = json!({
        "provenance": provenance("indices", &cfg, None),
        "model": model.tag(),
        "beta0": est.value.beta0,
        "beta_inf": est.value.beta_inf,
        "estimate": est,
    });
    emit(&doc, cfg.output.as_deref())
}

fn test_function(spec: GridSpec, kind: TestFunctionKind) -> TestFunction {
    let r2 = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    match kind {
        TestFunctionKind::Indicator => TestFunction::from_fn(spec, |_| 1.0),
        TestFunctionKind::Gaussian => TestFunction::from_fn(spec, |x| (-r2(x)).exp()),
        TestFunctionKind::Bump => TestFunction::from_fn(spec, |x| (1.0 - r2(x)).max(0.0)),
    }
}

pub fn moments(cfg: MomentsConfig) -> Result<(), CliError> {
    let model = require(cfg.model.clone(), "model")?;
    let p = require(cfg.p, "p")?;
    let spec = match cfg.grid {
        Some(g) => g,
        None => GridSpec::new(1, 0, 0.5)?,
    };
    let phi = test_function(spec, cfg.test_function.unwrap_or_default());
    let method = cfg.method.unwrap_or_default();
    let seed = cfg.seed.unwrap_or(0);
    let mut results = Vec::new();
    if method != MomentMethodChoice::Mc {
        results.push(pairing_moment_cf(&model, &phi, p)?);
    }
    if method != MomentMethodChoice::Cf {
        results.push(fractional_moment_mc(&model, &phi, p, cfg.draws.unwrap_or(100_000), seed)?);
    }
    let doc = json!({
        "provenance": provenance("moments", &cfg, Some(seed)),
        "model": model.tag(),
        "estimates": results,
    });
    emit(&doc, cfg.output.as_deref())
}

pub fn phase(cfg: PhaseConfig) -> Result<(), CliError> {
    let model = require(cfg.model.clone(), "model")?;
    let d = cfg.d.unwrap_or(1);
    let p_grid = cfg.p_grid.clone().unwrap_or_else(|| vec![1.0, 2.0]);
    let tau_grid = cfg
        .tau_grid
        .clone()
        .unwrap_or_else(|| (0..=8).map(|k| -0.5 + 0.25 * k as f64).collect());
    let kind = cfg.kind.unwrap_or(RegionKind::Weighted);
    let settings = cfg.settings.clone().unwrap_or_default();
    let table = match cfg.indices {
        Some([b0, binf]) => {
            let pair = IndexPair::new(b0, binf)?;
            phase_diagram_from_indices(&model, pair, d, &p_grid, &tau_grid, kind, &settings)?
        }
        None => phase_diagram(&model, d, &p_grid, &tau_grid, kind, &settings)?,
    };
    if let Some(path) = &cfg.csv {
        let mut w = create(path)?;
        table.write_csv(&mut w)?;
        finish_writer(w)?;
    }
    let plot = table.plot_data();
    if let Some(path) = &cfg.plot {
        emit(&plot, Some(path))?;
    }
    let regions: Vec<_> = p_grid
        .iter()
        .map(|p| predicted_region(table.indices, d, *p, kind))
        .collect::<Result<_, _>>()?;
    let doc = json!({
        "provenance": provenance("phase", &cfg, Some(settings.seed)),
        "model": table.model,
        "indices": table.indices,
        "kink_inv_p": kink_inv_p(table.indices),
        "regions": regions,
        "agreement": table.agreement(),
        "rows": table.rows,
        "plot": plot,
    });
    emit(&doc, cfg.output.as_deref())
}

/// Quick numerical checks; returns whether all passed.
pub fn selftest() -> Result<bool, CliError> {
    let mut checks: Vec<(&str, bool, String)> = Vec::new();
    let qmf = (1..=10).map(|n| build_basis(n).map(|b| b.qmf_residual())).collect::<Result<Vec<_>, _>>()?;
    let worst = qmf.iter().copied().fold(0.0, f64::max);
    checks.push(("daubechies filters", worst < 1e-12, format!("max qmf residual {worst:.1e}")));

    let c1 = c_p(1.0)?;
    checks.push(("moment constant", (c1 - 1.0 / std::f64::consts::PI).abs() < 1e-9, format!("c_1 = {c1:.12}")));

    let unit = TestFunction::from_fn(GridSpec::new(1, 0, 0.5)?, |_| 1.0);
    let g = pairing_moment_cf(&LevyModel::Gaussian { sigma2: 1.0 }, &unit, 1.0)?.value;
    let want = (2.0 / std::f64::consts::PI).sqrt();
    checks.push(("gaussian absolute moment", (g - want).abs() < 1e-6, format!("{g:.8} vs {want:.8}")));

    let w = weight_sum(10, 1.0, 2.0, 1)?.value / 1024.0;
    checks.push(("weight sum", (w / std::f64::consts::PI - 1.0).abs() < 0.01, format!("{w:.6}")));

    let basis = build_basis(3)?;
    let t = dirac_scaling(2.0, 1, &basis)?.threshold;
    checks.push(("dirac threshold p=2", (t - 0.5).abs() < 0.05, format!("{t:.4}")));

    let est = estimate_indices_with(&LevyModel::Laplace, &IndexSettings::default())?.value;
    checks.push((
        "laplace indices",
        (est.beta0 - 2.0).abs() <= 0.05 && est.beta_inf.abs() <= 0.05,
        format!("({:.3}, {:.3})", est.beta0, est.beta_inf),
    ));

    let mut all = true;
    for (name, ok, detail) in &checks {
        println!("[{}] {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
        all &= ok;
    }
    Ok(all)
}
