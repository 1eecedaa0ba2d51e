//! The three subcommands. Each writes its files under `output.dir` and
//! returns a summary for callers and tests.

use ipeps_dispersion::dispersion::{compute_curve_with_traces, unique_momenta, CurveRun, DispersionError};
use ipeps_dispersion::lattice::SymmetryPoint;
use ipeps_dispersion::model::Phase;
use ipeps_dispersion::{series_curve, series_delta, DispersionCurve, EvolutionParams, Momentum, SeriesSpec, TfimParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{interpolate, MomentaSpec, RunConfig};
use crate::output::{create_dir, k_columns, opt9, sig9, write_csv, write_file};
use crate::svg::{Line, Markers, Plot};
use crate::CliError;

/// Series matching `p`, plus the energy scale that converts its
/// dimensionless value: `Δ = g·f(J/g)` in the paramagnet and `Δ = J·f(g/J)`
/// in the ferromagnet.
pub fn series_reference(p: &TfimParams) -> Result<(SeriesSpec, f64), CliError> {
    let (phase, coupling, scale) = match p.phase() {
        Phase::Paramagnetic => (Phase::Paramagnetic, p.j / p.g, p.g),
        Phase::Ferromagnetic => (Phase::Ferromagnetic, p.g / p.j, p.j),
    };
    let spec = SeriesSpec::new(p.dimensionality, phase, coupling).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((spec, scale))
}

fn series_at(spec: &SeriesSpec, scale: f64, k: &Momentum) -> Result<f64, CliError> {
    Ok(scale * series_delta(spec, k).map_err(|e| CliError::Config(e.to_string()))?)
}

/// Cumulative straight-line distance along `ks`.
fn positions(ks: &[Momentum]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ks.len());
    let mut acc = 0.0;
    for (i, k) in ks.iter().enumerate() {
        if i > 0 {
            let prev = &ks[i - 1].components;
            acc += k
                .components
                .iter()
                .zip(prev)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
        }
        out.push(acc);
    }
    out
}

/// Momenta in the order used for plotting: the raw path for path runs
/// (distances are measured before wrapping into the zone), else the list.
fn plot_path(cfg: &RunConfig, ks: &[Momentum]) -> Result<Vec<Momentum>, CliError> {
    Ok(match cfg.momenta {
        MomentaSpec::Path { .. } => {
            ipeps_dispersion::high_symmetry_path(cfg.model.dimensionality).map_err(|e| CliError::Config(e.to_string()))?
        }
        _ => ks.to_vec(),
    })
}

fn glyph(p: SymmetryPoint) -> String {
    match p {
        SymmetryPoint::Gamma => "Γ".into(),
        SymmetryPoint::Sigma => "Σ".into(),
        other => other.as_str().into(),
    }
}

fn map_run_error(e: DispersionError) -> CliError {
    match e {
        DispersionError::InvalidParams(_) | DispersionError::Lattice(_) | DispersionError::Model(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Numerical(other.to_string()),
    }
}

fn trace_name(index: usize, k: &Momentum, trial: Option<usize>) -> String {
    let label = k.label_str();
    let mut name = format!("{index:02}");
    if !label.is_empty() {
        name.push('_');
        name.push_str(label);
    }
    if let Some(t) = trial {
        name.push_str(&format!("_t{t}"));
    }
    name + ".csv"
}

/// One `curve.csv` row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub k: Momentum,
    pub delta: Option<f64>,
    pub slope_std: Option<f64>,
    pub residual: Option<f64>,
    pub plateau_ok: bool,
    pub series_ref: Option<f64>,
}

#[derive(Debug)]
pub struct DispersionSummary {
    pub rows: Vec<CurveRow>,
    pub warnings: Vec<String>,
}

fn curve_rows(
    cfg: &RunConfig,
    ks: &[Momentum],
    curves: &[&DispersionCurve],
) -> Result<(Vec<CurveRow>, Vec<String>), CliError> {
    let reference = if cfg.output.oracle {
        Some(series_reference(&cfg.model)?)
    } else {
        None
    };
    let mut warnings = Vec::new();
    if let Some((spec, _)) = &reference {
        if !spec.within_validity() {
            warnings.push(format!(
                "series reference at coupling {} lies outside the series' validity range",
                sig9(spec.coupling)
            ));
        }
    }
    let mut rows = Vec::new();
    for k in ks {
        let fits: Vec<_> = curves.iter().filter_map(|c| c.point(k)).collect();
        let series_ref = match &reference {
            Some((spec, scale)) => Some(series_at(spec, *scale, k)?),
            None => None,
        };
        if fits.len() < curves.len() {
            rows.push(CurveRow {
                k: k.clone(),
                delta: None,
                slope_std: None,
                residual: None,
                plateau_ok: false,
                series_ref,
            });
            continue;
        }
        let n = fits.len() as f64;
        let mean = fits.iter().map(|f| f.delta_k).sum::<f64>() / n;
        let slope_std = if fits.len() == 1 {
            fits[0].slope_std
        } else {
            (fits.iter().map(|f| (f.delta_k - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        let plateau_ok = fits.iter().all(|f| f.plateau_ok);
        if !plateau_ok {
            warnings.push(format!("no plateau found at {k}; delta comes from the trailing-window fit"));
        }
        rows.push(CurveRow {
            k: k.clone(),
            delta: Some(mean),
            slope_std: Some(slope_std),
            residual: Some(fits.iter().map(|f| f.residual).fold(0.0, f64::max)),
            plateau_ok,
            series_ref,
        });
    }
    Ok((rows, warnings))
}

pub fn curve_header(d: usize) -> Vec<String> {
    let mut h = vec!["k_label".to_string()];
    h.extend(k_columns(d));
    h.extend(
        ["delta", "slope_std", "residual", "plateau_ok", "series_ref"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

fn curve_record(row: &CurveRow) -> Vec<String> {
    let mut r = vec![row.k.label_str().to_string()];
    r.extend(row.k.components.iter().map(|&c| sig9(c)));
    r.push(opt9(row.delta));
    r.push(opt9(row.slope_std));
    r.push(opt9(row.residual));
    r.push(row.plateau_ok.to_string());
    r.push(opt9(row.series_ref));
    r
}

pub fn cmd_dispersion(cfg: &RunConfig) -> Result<DispersionSummary, CliError> {
    cfg.validate()?;
    let requested = cfg.momenta()?;
    let ks = unique_momenta(&requested);
    let policy = cfg.cell_policy()?;
    let fit = cfg.fit_options();
    let dir = cfg.output.dir.as_path();
    create_dir(dir)?;

    let runs: Vec<CurveRun> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let ev = EvolutionParams {
                seed: cfg.evolution.seed + t,
                ..cfg.evolution.clone()
            };
            compute_curve_with_traces(&cfg.model, &ev, &ks, &policy, &fit).map_err(map_run_error)
        })
        .collect::<Result<_, _>>()?;

    let curves: Vec<&DispersionCurve> = runs.iter().map(|r| &r.curve).collect();
    let (rows, mut warnings) = curve_rows(cfg, &ks, &curves)?;
    let records: Vec<Vec<String>> = rows.iter().map(curve_record).collect();
    write_csv(&dir.join("curve.csv"), &curve_header(cfg.model.dimensionality), &records)?;

    // curve.json: the first trial, with fit values replaced by the trial aggregates
    let mut summary_curve = runs[0].curve.clone();
    for point in &mut summary_curve.points {
        if let Some(row) = rows.iter().find(|r| r.k.same_as(&point.k)) {
            point.delta_k = row.delta.unwrap_or(point.delta_k);
            point.slope_std = row.slope_std.unwrap_or(point.slope_std);
            point.residual = row.residual.unwrap_or(point.residual);
            point.plateau_ok = row.plateau_ok;
        }
    }
    let json = |c: &DispersionCurve| c.to_json().map_err(|e| CliError::Io(e.to_string()));
    write_file(&dir.join("curve.json"), &json(&summary_curve)?)?;
    if cfg.trials > 1 {
        let tdir = dir.join("trials");
        create_dir(&tdir)?;
        for (t, run) in runs.iter().enumerate() {
            write_file(&tdir.join(format!("curve_t{t}.json")), &json(&run.curve)?)?;
        }
    }

    if cfg.output.traces {
        let tdir = dir.join("traces");
        create_dir(&tdir)?;
        for (t, run) in runs.iter().enumerate() {
            for trace in &run.traces {
                let index = ks.iter().position(|k| k.same_as(&trace.k)).unwrap_or(0);
                let trial = (cfg.trials > 1).then_some(t);
                let recs: Vec<Vec<String>> = trace.samples.iter().map(|&(tau, c)| vec![sig9(tau), sig9(c)]).collect();
                write_csv(
                    &tdir.join(trace_name(index, &trace.k, trial)),
                    &["tau".to_string(), "c".to_string()],
                    &recs,
                )?;
            }
        }
    }

    if cfg.output.svg {
        write_file(&dir.join("curve.svg"), &curve_plot(cfg, &requested, &rows)?.render())?;
    }

    let failed: Vec<String> = runs
        .iter()
        .flat_map(|r| r.curve.failures.iter())
        .map(|f| format!("{}: {}", f.k, f.reason))
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Numerical(failed.join("; ")));
    }
    warnings.dedup();
    Ok(DispersionSummary { rows, warnings })
}

fn curve_plot(cfg: &RunConfig, requested: &[Momentum], rows: &[CurveRow]) -> Result<Plot, CliError> {
    let p = &cfg.model;
    let path = plot_path(cfg, requested)?;
    let mut plot = Plot {
        title: format!("TFIM {}D, J={}, g={}, D={}", p.dimensionality, sig9(p.j), sig9(p.g), cfg.evolution.d_max),
        x_label: "path position".into(),
        y_label: format!("Δ_k ({})", p.energy_unit()),
        ..Default::default()
    };
    let path_pos = positions(&path);
    // place each requested momentum on the path
    let dense = match cfg.momenta {
        MomentaSpec::Path { segment_samples } => interpolate(&path, segment_samples),
        _ => path.clone(),
    };
    let dense_pos = match cfg.momenta {
        MomentaSpec::Path { segment_samples } => {
            let mut out = Vec::new();
            for (seg, w) in path_pos.windows(2).enumerate() {
                for i in usize::from(seg > 0)..segment_samples {
                    out.push(w[0] + (w[1] - w[0]) * i as f64 / (segment_samples - 1) as f64);
                }
            }
            out
        }
        _ => path_pos.clone(),
    };
    let mut pts = Vec::new();
    for (k, &x) in dense.iter().zip(&dense_pos) {
        if let Some(row) = rows.iter().find(|r| r.k.same_as(k)) {
            if let Some(d) = row.delta {
                pts.push((x, d, row.slope_std.unwrap_or(0.0)));
            }
        }
    }
    for (k, &x) in path.iter().zip(&path_pos) {
        if let Some(l) = k.label {
            plot.vlines.push((x, glyph(l)));
        }
    }
    if cfg.output.oracle && path.len() >= 2 {
        let (spec, scale) = series_reference(p)?;
        let samples = series_curve(&spec, &path, cfg.output.oracle_samples).map_err(|e| CliError::Config(e.to_string()))?;
        plot.lines.push(Line {
            name: "series".into(),
            points: samples.iter().map(|s| (s.position, scale * s.delta)).collect(),
            color: "#444444",
            dashed: true,
        });
    }
    plot.markers.push(Markers {
        name: "iPEPS".into(),
        points: pts,
        color: "#1f77b4",
    });
    Ok(plot)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub d: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 with `std_defined = false` for a single trial.
    pub std: f64,
    pub std_defined: bool,
    pub plateau_ok: bool,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub point: Momentum,
    pub params: TfimParams,
    pub trials: usize,
    pub seed: u64,
    pub entries: Vec<ConvergenceEntry>,
    pub reference: Option<f64>,
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<ConvergenceReport, CliError> {
    cfg.validate()?;
    let k = cfg.converge_point()?;
    let ds = cfg.d_values()?;
    let policy = cfg.cell_policy()?;
    let fit = cfg.fit_options();
    let dir = cfg.output.dir.as_path();
    create_dir(dir)?;

    let jobs: Vec<(usize, u64)> = ds
        .iter()
        .flat_map(|&d| (0..cfg.trials as u64).map(move |t| (d, t)))
        .collect();
    let results: Vec<Result<(f64, bool), CliError>> = jobs
        .par_iter()
        .map(|&(d, t)| {
            let ev = EvolutionParams {
                d_max: d,
                seed: cfg.evolution.seed + t,
                ..cfg.evolution.clone()
            };
            let run = compute_curve_with_traces(&cfg.model, &ev, std::slice::from_ref(&k), &policy, &fit)
                .map_err(map_run_error)?;
            match run.curve.point(&k) {
                Some(f) => Ok((f.delta_k, f.plateau_ok)),
                None => Err(CliError::Numerical(format!(
                    "D={d}, trial {t}, {k}: {}",
                    run.curve
                        .failures
                        .first()
                        .map_or("no fit", |f| f.reason.as_str())
                ))),
            }
        })
        .collect();

    let reference = if cfg.output.oracle {
        let (spec, scale) = series_reference(&cfg.model)?;
        Some(series_at(&spec, scale, &k)?)
    } else {
        None
    };
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (i, &d) in ds.iter().enumerate() {
        let chunk = &results[i * cfg.trials..(i + 1) * cfg.trials];
        let mut values = Vec::new();
        let mut plateau_ok = true;
        for r in chunk {
            match r {
                Ok((v, ok)) => {
                    values.push(*v);
                    plateau_ok &= ok;
                }
                Err(e) => failures.push(e.to_string()),
            }
        }
        let n = values.len() as f64;
        let mean = if values.is_empty() { f64::NAN } else { values.iter().sum::<f64>() / n };
        let std_defined = values.len() > 1;
        let std = if std_defined {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        entries.push(ConvergenceEntry {
            d,
            mean,
            std,
            std_defined,
            plateau_ok: plateau_ok && values.len() == cfg.trials,
            values,
        });
    }
    let report = ConvergenceReport {
        point: k,
        params: cfg.model,
        trials: cfg.trials,
        seed: cfg.evolution.seed,
        entries,
        reference,
    };

    let mut header: Vec<String> = ["d", "mean", "std", "std_defined", "trials", "plateau_ok", "series_ref"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..cfg.trials).map(|t| format!("trial_{t}")));
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            let mut r = vec![
                e.d.to_string(),
                sig9(e.mean),
                sig9(e.std),
                e.std_defined.to_string(),
                e.values.len().to_string(),
                e.plateau_ok.to_string(),
                opt9(report.reference),
            ];
            r.extend(e.values.iter().map(|&v| sig9(v)));
            r.resize(header.len(), String::new());
            r
        })
        .collect();
    write_csv(&dir.join("converge.csv"), &header, &rows)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(&dir.join("converge.json"), &json)?;

    if cfg.output.svg {
        let mut plot = Plot {
            title: format!("Δ at {} vs bond dimension ({} trials)", report.point, cfg.trials),
            x_label: "D".into(),
            y_label: format!("Δ_k ({})", cfg.model.energy_unit()),
            ..Default::default()
        };
        plot.markers.push(Markers {
            name: "mean ± std".into(),
            points: report.entries.iter().map(|e| (e.d as f64, e.mean, e.std)).collect(),
            color: "#1f77b4",
        });
        if let Some(r) = reference {
            plot.hlines.push((r, "series".into()));
        }
        write_file(&dir.join("converge.svg"), &plot.render())?;
    }

    if !failures.is_empty() {
        return Err(CliError::Numerical(failures.join("; ")));
    }
    Ok(report)
}

/// One `series.csv` row.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub position: f64,
    pub k: Momentum,
    pub delta: f64,
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<Vec<SeriesRow>, CliError> {
    cfg.model.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if cfg.output.oracle_samples < 2 {
        return Err(CliError::Config("output.oracle_samples must be at least 2".into()));
    }
    let (spec, scale) = series_reference(&cfg.model)?;
    let requested = cfg.momenta()?;
    let bad = |e: ipeps_dispersion::series::SeriesError| CliError::Config(e.to_string());
    let rows: Vec<SeriesRow> = match cfg.momenta {
        MomentaSpec::Path { .. } => {
            let path = plot_path(cfg, &requested)?;
            series_curve(&spec, &path, cfg.output.oracle_samples)
                .map_err(bad)?
                .into_iter()
                .map(|s| SeriesRow {
                    position: s.position,
                    delta: scale * s.delta,
                    k: s.k,
                })
                .collect()
        }
        _ => requested
            .iter()
            .zip(positions(&requested))
            .map(|(k, position)| {
                Ok(SeriesRow {
                    position,
                    k: k.clone(),
                    delta: scale * series_delta(&spec, k).map_err(bad)?,
                })
            })
            .collect::<Result<_, CliError>>()?,
    };

    let dir = cfg.output.dir.as_path();
    create_dir(dir)?;
    let valid = spec.within_validity();
    let mut header = vec!["position".to_string()];
    header.extend(k_columns(cfg.model.dimensionality));
    header.extend(["delta".to_string(), "within_validity".to_string()]);
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut rec = vec![sig9(r.position)];
            rec.extend(r.k.components.iter().map(|&c| sig9(c)));
            rec.push(sig9(r.delta));
            rec.push(valid.to_string());
            rec
        })
        .collect();
    write_csv(&dir.join("series.csv"), &header, &records)?;
    if cfg.output.svg {
        write_file(&dir.join("series.svg"), &series_plot(cfg, &rows).render())?;
    }
    Ok(rows)
}

fn series_plot(cfg: &RunConfig, rows: &[SeriesRow]) -> Plot {
    let p = &cfg.model;
    let mut plot = Plot {
        title: format!("Series dispersion, {}D, J={}, g={}", p.dimensionality, sig9(p.j), sig9(p.g)),
        x_label: "path position".into(),
        y_label: format!("Δ_k ({})", p.energy_unit()),
        ..Default::default()
    };
    for r in rows {
        if let Some(l) = r.k.label {
            plot.vlines.push((r.position, glyph(l)));
        }
    }
    plot.lines.push(Line {
        name: "series".into(),
        points: rows.iter().map(|r| (r.position, r.delta)).collect(),
        color: "#444444",
        dashed: false,
    });
    plot
}
