//! Subcommand implementations. Each writes its files under the configured
//! output directory and prints a short summary.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use wheelprobe_core::probe::{
    fit_sinkage_model, fit_slip_model, predict_sinkage, predict_slip, run_pressure_sinkage,
    run_shear, PressureSinkageSweep, ShearSweep, SinkageModel, SlipModel,
};
use wheelprobe_core::seed;
use wheelprobe_core::traverse::{
    plan_path, score_grid, CellIndex, CellSource, SoilModels, TraverseError,
};
use wheelprobe_core::verification::{run_verification, VerificationReport};
use wheelprobe_core::vision::{
    estimate_contact_observed, random_scene, render_scene, Point2, SceneSpec,
};
use wheelprobe_core::WheelGeometry;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::formats::grid::{heatmap_svg, read_grid, InfeasibleReport, PathReport};
use crate::formats::image::{read_image, write_image};
use crate::formats::log::{read_log, write_log};
use crate::formats::records::{
    read_corners, read_json, write_json, DetectionRecord, FixtureRecord, ModelFile, ModelKind,
    StageTimings,
};

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    Ok(&cfg.out)
}

/// Both probe sweeps of one soil and the models fitted to them.
pub struct ProbeResult {
    pub pressure: PressureSinkageSweep,
    pub shear: ShearSweep,
    pub sinkage: SinkageModel,
    pub slip: SlipModel,
}

pub fn probe_soil(cfg: &RunConfig, soil_name: &str) -> Result<ProbeResult> {
    let soil = cfg.soil(soil_name)?;
    let wheel = &cfg.robot.wheel;
    let pressure = run_pressure_sinkage(&soil, wheel, &cfg.pressure, seed::derive(cfg.seed, 0))?;
    let shear = run_shear(&soil, wheel, &cfg.shear, seed::derive(cfg.seed, 1))?;
    let sinkage = fit_sinkage_model(&pressure)?;
    let slip = fit_slip_model(&shear)?;
    Ok(ProbeResult {
        pressure,
        shear,
        sinkage,
        slip,
    })
}

pub fn probe_file_names(soil: &str) -> [String; 4] {
    [
        format!("{soil}_pressure_sinkage.csv"),
        format!("{soil}_shear.csv"),
        format!("{soil}_sinkage_model.json"),
        format!("{soil}_slip_model.json"),
    ]
}

pub fn probe(cfg: &RunConfig, soils: &[String]) -> Result<()> {
    let out = out_dir(cfg)?;
    for name in soils {
        let r = probe_soil(cfg, name)?;
        let [p_log, s_log, p_model, s_model] = probe_file_names(name);
        write_log(&out.join(p_log), &r.pressure.log)?;
        write_log(&out.join(s_log), &r.shear.log)?;
        write_json(&out.join(p_model), &ModelFile::from(&r.sinkage))?;
        write_json(&out.join(s_model), &ModelFile::from(&r.slip))?;
        let load = cfg.robot.wheel_load;
        println!(
            "{name}: {} load setpoints, sinkage rmse {:.3e} m, {:.2} mm at {load} N; {} slip setpoints, slip rmse {:.4}, {:.3} at {} N drawbar",
            r.pressure.points.len(),
            r.sinkage.rmse,
            predict_sinkage(&r.sinkage, load).value * 1000.0,
            r.shear.points.len(),
            r.slip.rmse,
            predict_slip(&r.slip, cfg.expected_drawbar).value,
            cfg.expected_drawbar,
        );
    }
    Ok(())
}

/// Fit a model to a logged sweep. The kind is inferred when not given: logs
/// without drawbar pull or slip are pressure-sinkage logs.
pub fn fit(
    cfg: &RunConfig,
    log_path: &Path,
    kind: Option<ModelKind>,
    output: Option<&Path>,
) -> Result<ModelFile> {
    let log = read_log(log_path)?;
    let kind = kind.unwrap_or_else(|| {
        if log
            .iter()
            .all(|r| r.drawbar_pull == 0.0 && r.commanded_slip == 0.0)
        {
            ModelKind::Sinkage
        } else {
            ModelKind::Slip
        }
    });
    let model = match kind {
        ModelKind::Sinkage => {
            ModelFile::from(&fit_sinkage_model(&PressureSinkageSweep::from_log(log)?)?)
        }
        ModelKind::Slip => {
            let sweep = ShearSweep::from_log(log, cfg.robot.wheel.radius, cfg.shear.forward_speed)?;
            ModelFile::from(&fit_slip_model(&sweep)?)
        }
    };
    let path = match output {
        Some(p) => p.to_owned(),
        None => {
            let stem = log_path
                .file_stem()
                .map_or("log".into(), |s| s.to_string_lossy().into_owned());
            out_dir(cfg)?.join(format!("{stem}_model.json"))
        }
    };
    write_json(&path, &model)?;
    println!(
        "{:?} model a={:e} b={:e} c={:e} over [{}, {}], rmse {:e} -> {}",
        model.kind,
        model.a,
        model.b,
        model.c,
        model.domain[0],
        model.domain[1],
        model.rmse,
        path.display()
    );
    Ok(model)
}

/// Render `count` random scenes, or the one given by `spec`, with sidecars.
pub fn render_fixtures(
    cfg: &RunConfig,
    count: usize,
    spec: Option<&Path>,
    png: bool,
) -> Result<Vec<FixtureRecord>> {
    let out = out_dir(cfg)?;
    let specs: Vec<SceneSpec> = match spec {
        Some(p) => vec![read_json(p)?],
        None => (0..count)
            .map(|i| random_scene(seed::derive(cfg.seed, i as u64)))
            .collect(),
    };
    let ext = if png { "png" } else { "ppm" };
    let mut records = Vec::with_capacity(specs.len());
    for (i, spec) in specs.into_iter().enumerate() {
        let scene = render_scene(&spec)?;
        let image = format!("scene_{i:03}.{ext}");
        write_image(&out.join(&image), &scene.image)?;
        let rec = FixtureRecord::new(image, spec, &scene);
        write_json(&out.join(format!("scene_{i:03}.json")), &rec)?;
        records.push(rec);
    }
    println!("rendered {} scenes into {}", records.len(), out.display());
    Ok(records)
}

/// Run the contact pipeline on one image, timing every stage.
pub fn detect_one(
    cfg: &RunConfig,
    image_path: &Path,
    corners: &[Point2; 4],
    wheel: &WheelGeometry,
) -> Result<DetectionRecord> {
    let image = read_image(image_path)?;
    let mut timings = StageTimings::default();
    let mut last = Instant::now();
    let estimate = estimate_contact_observed(&image, corners, wheel, &cfg.vision, &mut |stage| {
        let now = Instant::now();
        timings.set(stage, (now - last).as_secs_f64() * 1000.0);
        last = now;
    })
    .map_err(|source| CliError::Detection {
        path: image_path.to_owned(),
        source,
    })?;
    Ok(DetectionRecord::new(&estimate.geometry, timings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub image: String,
    pub detection: Option<DetectionRecord>,
    pub error: Option<String>,
    pub truth_sinkage_mm: f64,
    /// |estimate − truth| / truth.
    pub relative_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub images: usize,
    pub failures: usize,
    /// Over successful detections.
    pub mean_relative_error: Option<f64>,
    pub max_relative_error: f64,
    /// Share of all images, failures included, within 5% of the true sinkage.
    pub within_5_percent: f64,
    pub entries: Vec<BatchEntry>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "image".into(), |s| s.to_string_lossy().into_owned())
}

/// Detect contact in one image, or in every fixture of a directory.
pub fn detect(cfg: &RunConfig, input: &Path, corners: Option<&Path>) -> Result<()> {
    if input.is_dir() {
        return detect_batch(cfg, input).map(|_| ());
    }
    let corners_path = match corners {
        Some(p) => p.to_owned(),
        None => input.with_extension("json"),
    };
    let corners = read_corners(&corners_path)?;
    let record = detect_one(cfg, input, &corners, &cfg.robot.wheel)?;
    let out = out_dir(cfg)?.join(format!("{}.detection.json", stem(input)));
    write_json(&out, &record)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&record).expect("records serialise")
    );
    Ok(())
}

/// Every `*.json` fixture sidecar of `dir`, in name order.
fn fixtures_in(dir: &Path) -> Result<Vec<(PathBuf, FixtureRecord)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "json")
                && !p.to_string_lossy().ends_with(".detection.json")
        })
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        // Other JSON files (summaries, configs) are skipped.
        if let Ok(rec) = read_json::<FixtureRecord>(&p) {
            out.push((p, rec));
        }
    }
    Ok(out)
}

pub fn detect_batch(cfg: &RunConfig, dir: &Path) -> Result<BatchSummary> {
    let fixtures = fixtures_in(dir)?;
    if fixtures.is_empty() {
        return Err(CliError::format(dir, "no fixture sidecars found"));
    }
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(fixtures.len());
    let chunk = fixtures.len().div_ceil(workers);
    let results: Vec<Result<DetectionRecord>> = std::thread::scope(|s| {
        let handles: Vec<_> = fixtures
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|(p, rec)| {
                            detect_one(
                                cfg,
                                &p.with_file_name(&rec.image),
                                &rec.marker_corners,
                                &rec.spec.wheel,
                            )
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("detection worker panicked"))
            .collect()
    });

    let out = out_dir(cfg)?;
    let mut entries = Vec::with_capacity(fixtures.len());
    for ((_, rec), result) in fixtures.iter().zip(results) {
        let truth = rec.truth.sinkage_mm;
        let entry = match result {
            Ok(d) => {
                write_json(
                    &out.join(format!("{}.detection.json", stem(Path::new(&rec.image)))),
                    &d,
                )?;
                BatchEntry {
                    image: rec.image.clone(),
                    relative_error: (truth > 0.0).then(|| (d.sinkage_mm - truth).abs() / truth),
                    detection: Some(d),
                    error: None,
                    truth_sinkage_mm: truth,
                }
            }
            Err(CliError::Detection { source, .. }) => BatchEntry {
                image: rec.image.clone(),
                detection: None,
                error: Some(source.to_string()),
                truth_sinkage_mm: truth,
                relative_error: None,
            },
            Err(e) => return Err(e),
        };
        entries.push(entry);
    }
    let errors: Vec<f64> = entries.iter().filter_map(|e| e.relative_error).collect();
    let summary = BatchSummary {
        images: entries.len(),
        failures: entries.iter().filter(|e| e.error.is_some()).count(),
        mean_relative_error: (!errors.is_empty())
            .then(|| errors.iter().sum::<f64>() / errors.len() as f64),
        max_relative_error: errors.iter().copied().fold(0.0, f64::max),
        within_5_percent: errors.iter().filter(|&&e| e <= 0.05).count() as f64
            / entries.len() as f64,
        entries,
    };
    write_json(&out.join("detection_summary.json"), &summary)?;
    println!(
        "{} images, {} failed; mean sinkage error {:.2}%, max {:.2}%, {:.1}% within 5%",
        summary.images,
        summary.failures,
        summary.mean_relative_error.unwrap_or(f64::NAN) * 100.0,
        summary.max_relative_error * 100.0,
        summary.within_5_percent * 100.0
    );
    if let Some(failed) = summary.entries.iter().find(|e| e.error.is_some()) {
        return Err(CliError::BatchDetection {
            failures: summary.failures,
            images: summary.images,
            first: format!(
                "{}: {}",
                failed.image,
                failed.error.as_deref().unwrap_or_default()
            ),
        });
    }
    Ok(summary)
}

/// Probe `soil`, drive `drive_soil` (the same soil by default) and report.
pub fn verify(cfg: &RunConfig, soil: &str, drive_soil: Option<&str>) -> Result<VerificationReport> {
    let probe = cfg.soil(soil)?;
    let drive = match drive_soil {
        Some(name) => cfg.soil(name)?,
        None => probe.clone(),
    };
    let report = run_verification(
        &probe,
        &drive,
        &cfg.robot.wheel,
        &cfg.verification_config(),
        cfg.seed,
    )?;
    write_json(&out_dir(cfg)?.join(format!("verify_{soil}.json")), &report)?;
    let verdict = |ok| if ok { "in band" } else { "OUT OF BAND" };
    println!(
        "sinkage {:.3} mm vs [{:.3}, {:.3}] mm: {}",
        report.driven_sinkage * 1000.0,
        report.sinkage_band.min * 1000.0,
        report.sinkage_band.max * 1000.0,
        verdict(report.sinkage_in_band)
    );
    println!(
        "slip {:.4} vs [{:.4}, {:.4}]: {}",
        report.driven_slip,
        report.slip_band.min,
        report.slip_band.max,
        verdict(report.slip_in_band)
    );
    println!("{}", if report.pass { "PASS" } else { "FAIL" });
    if report.pass {
        Ok(report)
    } else {
        Err(CliError::VerificationFailed)
    }
}

fn load_models(dir: &Path, soil: &str) -> Result<SoilModels> {
    let [_, _, p, s] = probe_file_names(soil);
    let (p, s) = (dir.join(p), dir.join(s));
    let sinkage = read_json::<ModelFile>(&p)?
        .sinkage()
        .ok_or_else(|| CliError::format(&p, "not a sinkage model"))?;
    let slip = read_json::<ModelFile>(&s)?
        .slip()
        .ok_or_else(|| CliError::format(&s, "not a slip model"))?;
    Ok(SoilModels { sinkage, slip })
}

/// Score a grid and plan the safest path across it.
///
/// Soil cells use models from `models_dir` when given (as written by
/// `probe`), otherwise the named presets are probed on the spot.
pub fn plan(
    cfg: &RunConfig,
    grid_path: &Path,
    start: CellIndex,
    goal: CellIndex,
    models_dir: Option<&Path>,
) -> Result<PathReport> {
    let grid = read_grid(grid_path)?;
    let soils: BTreeSet<&str> = grid
        .cells
        .iter()
        .filter_map(|c| match &c.source {
            CellSource::Soil(name) => Some(name.as_str()),
            _ => None,
        })
        .collect();
    let mut models = BTreeMap::new();
    for soil in soils {
        let m = match models_dir {
            Some(dir) => load_models(dir, soil)?,
            None => {
                let r = probe_soil(cfg, soil)?;
                SoilModels {
                    sinkage: r.sinkage,
                    slip: r.slip,
                }
            }
        };
        models.insert(soil.to_owned(), m);
    }
    let scored = score_grid(
        &grid,
        &models,
        cfg.robot.wheel_load,
        cfg.expected_drawbar,
        &cfg.traversability,
    )?;
    let out = out_dir(cfg)?;
    write_json(&out.join("scored_grid.json"), &scored)?;
    match plan_path(&scored, start, goal, &cfg.planner) {
        Ok(path) => {
            let report = PathReport::new(&path, scored.cell_size);
            write_json(&out.join("path.json"), &report)?;
            fs::write(
                out.join("heatmap.svg"),
                heatmap_svg(&scored, Some(&path.cells)),
            )
            .map_err(|e| CliError::io(&out.join("heatmap.svg"), e))?;
            println!(
                "{} cells, cost {:.4}, length {:.3} m, lowest score {:.3}",
                report.cells.len(),
                report.total_cost,
                report.length,
                report.min_cell_score
            );
            Ok(report)
        }
        Err(e @ (TraverseError::Infeasible { .. } | TraverseError::StartBlocked(_))) => {
            let (reachable, frontier) = match &e {
                TraverseError::Infeasible {
                    reachable,
                    frontier,
                } => (*reachable, frontier.clone()),
                _ => (0, Vec::new()),
            };
            let report = InfeasibleReport {
                start,
                goal,
                reason: e.to_string(),
                reachable,
                frontier,
            };
            write_json(&out.join("infeasible.json"), &report)?;
            fs::write(out.join("heatmap.svg"), heatmap_svg(&scored, None))
                .map_err(|e| CliError::io(&out.join("heatmap.svg"), e))?;
            eprintln!("blocking frontier: {:?}", report.frontier);
            Err(CliError::Infeasible(e))
        }
        Err(e) => Err(e.into()),
    }
}
