//! One function per subcommand. Each loads and checks all inputs, computes
//! everything in memory, and only then writes its outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lakeice_core::classify::{
    evaluate, m_acc, m_iou, train_linear_svm, ConfusionMatrix, LinearSvm, SplitPlan,
};
use lakeice_core::climate::{
    compute_indicators, correlate_events, lake_trends, mad_compare, mad_summary, pairing_plan, write_correlations,
    write_trends, MadResult,
};
use lakeice_core::ingest::{read_meteo, read_samples, write_meteo, write_samples};
use lakeice_core::phenology::{parse_overrides, read_records_json, write_records_json, Overrides};
use lakeice_core::pipeline::{acquisitions, classify_all, fit_all, timelines, training_sample};
use lakeice_core::synth::{generate_dataset, truth_json};
use lakeice_core::timeline::{read_timelines, write_timelines, TimelineSet};
use lakeice_core::{
    ClimateSeries, IceClass, Label, LinearModel, PhenologyRecord, PixelSample, WinterIndicators, WinterSeason,
};

use crate::config::PipelineConfig;
use crate::output::{finish, Staged};
use crate::svg::render_svg_timeline;
use crate::CliError;

pub const PREDICTION_HEADER: &str = "lake_id,date,pixel_id,cloudy,class";
pub const REPORT_HEADER: &str =
    "lake_id,winter,fus,fue,bus,bue,icd_days,cfd_days,fit_loss,incomplete,corrected,override_note";

fn require(path: &Path, what: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("missing input: {what} {} not found", path.display())))
    }
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, CliError> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

fn load_samples(cfg: &PipelineConfig) -> Result<(PathBuf, Vec<PixelSample>), CliError> {
    let path = cfg.samples_path();
    require(&path, "samples file")?;
    let samples = read_samples(open(&path)?).map_err(|e| CliError::from_core(&path, e.into()))?;
    Ok((path, samples))
}

fn load_model(cfg: &PipelineConfig) -> Result<(PathBuf, LinearModel), CliError> {
    let path = cfg.model_path();
    require(&path, "model file")?;
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let model = LinearModel::from_json(&text).map_err(|e| CliError::from_core(&path, e.into()))?;
    Ok((path, model))
}

fn load_timelines(path: &Path) -> Result<TimelineSet, CliError> {
    require(path, "timeline file")?;
    read_timelines(open(path)?).map_err(|e| CliError::from_core(path, e.into()))
}

fn load_records(cfg: &PipelineConfig) -> Result<(PathBuf, Vec<PhenologyRecord>), CliError> {
    let path = cfg.phenology_path();
    require(&path, "phenology file")?;
    let recs = read_records_json(open(&path)?).map_err(|e| CliError::from_core(&path, e.into()))?;
    Ok((path, recs))
}

/// Station series per lake id. A directory holds `<lake_id>.csv` files; a
/// single file serves every lake.
fn load_meteo(cfg: &PipelineConfig, lakes: &[&str]) -> Result<(Vec<PathBuf>, BTreeMap<String, ClimateSeries>), CliError> {
    let path = cfg.meteo_path();
    require(&path, "meteo file or directory")?;
    let read = |p: &Path| read_meteo(open(p)?).map_err(|e| CliError::from_core(p, e.into()));
    let mut used = Vec::new();
    let mut out = BTreeMap::new();
    if path.is_dir() {
        for lake in lakes {
            let p = path.join(format!("{lake}.csv"));
            if p.is_file() {
                out.insert(lake.to_string(), read(&p)?);
                used.push(p);
            }
        }
    } else {
        let series = read(&path)?;
        for lake in lakes {
            out.insert(lake.to_string(), series.clone());
        }
        used.push(path);
    }
    Ok((used, out))
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serialises");
    s.push('\n');
    s.into_bytes()
}

pub fn simulate(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let synth = cfg.synth()?;
    let ds = generate_dataset(&synth).map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut staged = Staged::default();
    let mut buf = Vec::new();
    write_samples(&mut buf, &ds.samples, synth.bands).map_err(|e| CliError::from_core(&cfg.samples_path(), e.into()))?;
    staged.add(cfg.samples_path(), buf);
    staged.add(
        cfg.out.join("truth.json"),
        truth_json(&ds.truths).map_err(|e| CliError::Invalid(e.to_string()))?,
    );
    let meteo_dir = cfg.meteo_path();
    for (lake, series) in &ds.climate {
        let mut buf = Vec::new();
        write_meteo(&mut buf, series).map_err(|e| CliError::from_core(&meteo_dir, e.into()))?;
        staged.add(meteo_dir.join(format!("{lake}.csv")), buf);
    }
    finish("simulate", cfg, &[], staged)
}

#[derive(Serialize)]
struct TrainingScores {
    training_samples: usize,
    folds: usize,
    report: lakeice_core::classify::EvaluationReport,
}

pub fn train(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let (input, samples) = load_samples(cfg)?;
    let train = training_sample(&samples, cfg.train_max_samples, cfg.seed);
    if train.is_empty() {
        return Err(CliError::Invalid(format!("{}: no labelled cloud-free samples", input.display())));
    }
    let invalid = |e: lakeice_core::classify::ClassifyError| CliError::Invalid(e.to_string());
    let model = train_linear_svm(&train, cfg.cost).map_err(invalid)?;
    let mut staged = Staged::default();
    staged.add(cfg.model_path(), format!("{}\n", model.to_json()));
    if cfg.cv_folds >= 2 {
        let report = evaluate(&train, &LinearSvm { cost: cfg.cost }, &SplitPlan::k_fold(cfg.cv_folds, cfg.seed))
            .map_err(invalid)?;
        staged.add(
            cfg.out.join("training_scores.json"),
            json_bytes(&TrainingScores {
                training_samples: train.len(),
                folds: cfg.cv_folds,
                report,
            }),
        );
    }
    finish("train", cfg, &[input], staged)
}

#[derive(Serialize)]
struct ClassificationScores {
    labelled_samples: u64,
    confusion: ConfusionMatrix,
    m_acc: f64,
    m_iou: f64,
}

pub fn classify(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let (model_path, model) = load_model(cfg)?;
    let (samples_path, samples) = load_samples(cfg)?;
    let pred = classify_all(&model, &samples).map_err(|e| CliError::from_core(&samples_path, e))?;
    let mut out = String::with_capacity(samples.len() * 32);
    out.push_str(PREDICTION_HEADER);
    out.push('\n');
    for (s, p) in samples.iter().zip(&pred) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.lake_id,
            s.date.format("%Y-%m-%d"),
            s.pixel_id,
            u8::from(s.cloudy),
            p
        ));
    }
    let mut staged = Staged::default();
    staged.add(cfg.predictions_path(), out);
    let mut cm = ConfusionMatrix::default();
    for (s, &p) in samples.iter().zip(&pred) {
        if let (false, Some(truth)) = (s.cloudy, IceClass::from_label(s.label)) {
            cm.record(truth, p);
        }
    }
    if let (Ok(acc), Ok(iou)) = (m_acc(&cm), m_iou(&cm)) {
        staged.add(
            cfg.out.join("classification_scores.json"),
            json_bytes(&ClassificationScores {
                labelled_samples: cm.total(),
                confusion: cm,
                m_acc: acc,
                m_iou: iou,
            }),
        );
    }
    finish("classify", cfg, &[model_path, samples_path], staged)
}

#[derive(Deserialize)]
struct PredictionRow {
    lake_id: String,
    date: chrono::NaiveDate,
    pixel_id: u32,
    cloudy: u8,
    class: IceClass,
}

fn load_predictions(path: &Path) -> Result<(Vec<PixelSample>, Vec<IceClass>), CliError> {
    require(path, "predictions file")?;
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let header = rdr.headers().map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    if header.iter().ne(PREDICTION_HEADER.split(',')) {
        return Err(CliError::Invalid(format!("{}: expected header {PREDICTION_HEADER}", path.display())));
    }
    let mut samples = Vec::new();
    let mut classes = Vec::new();
    for row in rdr.deserialize::<PredictionRow>() {
        let row = row.map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        if row.cloudy > 1 {
            return Err(CliError::Invalid(format!("{}: cloudy must be 0 or 1", path.display())));
        }
        samples.push(PixelSample {
            lake_id: row.lake_id,
            date: row.date,
            pixel_id: row.pixel_id,
            cloudy: row.cloudy == 1,
            label: Label::Unlabeled,
            bands: Vec::new(),
        });
        classes.push(row.class);
    }
    Ok((samples, classes))
}

pub fn timeline(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let path = cfg.predictions_path();
    let (samples, classes) = load_predictions(&path)?;
    let acqs = acquisitions(&samples, &classes).map_err(|e| CliError::from_core(&path, e))?;
    let pairs = timelines(&acqs, &cfg.timeline_settings()).map_err(|e| CliError::from_core(&path, e))?;
    let mut buf = Vec::new();
    write_timelines(&mut buf, &pairs).map_err(|e| CliError::from_core(&path, e.into()))?;
    let mut staged = Staged::default();
    staged.add(cfg.timelines_path(), buf);
    finish("timeline", cfg, &[path], staged)
}

pub fn phenology(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let prior = cfg.prior()?;
    let tl_path = cfg.timelines_path();
    let set = load_timelines(&tl_path)?;
    let mut inputs = vec![tl_path.clone()];
    let overrides = match &cfg.overrides {
        Some(p) => {
            require(p, "overrides file")?;
            inputs.push(p.clone());
            parse_overrides(open(p)?).map_err(|e| CliError::from_core(p, e.into()))?
        }
        None => Overrides::new(),
    };
    for key in overrides.keys() {
        if !set.smoothed.contains_key(key) {
            return Err(CliError::Invalid(format!("override for {} {} has no timeline", key.0, key.1)));
        }
    }
    let smooth: Vec<_> = set.smoothed.values().collect();
    let recs = fit_all(&smooth, &prior, &overrides).map_err(|e| CliError::from_core(&tl_path, e))?;
    let mut buf = Vec::new();
    write_records_json(&mut buf, &recs).map_err(|e| CliError::from_core(&tl_path, e.into()))?;
    let mut staged = Staged::default();
    staged.add(cfg.phenology_path(), buf);
    finish("phenology", cfg, &inputs, staged)
}

pub fn trends(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let (path, recs) = load_records(cfg)?;
    let mut buf = Vec::new();
    write_trends(&mut buf, &lake_trends(&recs)).expect("write to memory");
    let mut staged = Staged::default();
    staged.add(cfg.out.join("trends.csv"), buf);
    finish("trends", cfg, &[path], staged)
}

pub fn correlate(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let (path, recs) = load_records(cfg)?;
    let mut seasons: BTreeMap<&str, Vec<WinterSeason>> = BTreeMap::new();
    for r in &recs {
        seasons.entry(&r.lake_id).or_default().push(r.season);
    }
    let lakes: Vec<&str> = seasons.keys().copied().collect();
    let (meteo_inputs, meteo) = load_meteo(cfg, &lakes)?;
    let indicators: BTreeMap<String, Vec<WinterIndicators>> = meteo
        .iter()
        .map(|(lake, series)| {
            let list = seasons[lake.as_str()].iter().map(|&s| compute_indicators(series, s)).collect();
            (lake.clone(), list)
        })
        .collect();
    let rows = correlate_events(&recs, &indicators, &pairing_plan());
    let mut buf = Vec::new();
    write_correlations(&mut buf, &rows).expect("write to memory");
    let mut staged = Staged::default();
    staged.add(cfg.out.join("correlations.csv"), buf);
    let mut inputs = vec![path];
    inputs.extend(meteo_inputs);
    finish("correlate", cfg, &inputs, staged)
}

/// Daily frozen percentage of every smoothed timeline.
fn frozen_series(set: &TimelineSet) -> BTreeMap<(String, WinterSeason), BTreeMap<chrono::NaiveDate, f64>> {
    set.smoothed
        .iter()
        .map(|(key, tl)| {
            let days = tl.points().iter().map(|p| (tl.date_of(p), p.frozen_percent())).collect();
            (key.clone(), days)
        })
        .collect()
}

pub fn compare(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let a_path = cfg.timelines_path();
    let b_path = cfg
        .other_timelines
        .clone()
        .ok_or_else(|| CliError::Invalid("compare needs other_timelines".into()))?;
    let a = frozen_series(&load_timelines(&a_path)?);
    let b = frozen_series(&load_timelines(&b_path)?);
    let mut per_lake: BTreeMap<&str, Vec<MadResult>> = BTreeMap::new();
    let mut rows = String::from("lake_id,winter,mad,common_days\n");
    for ((lake, season), x) in &a {
        let Some(y) = b.get(&(lake.clone(), *season)) else { continue };
        let Ok(r) = mad_compare(x, y, *season) else { continue };
        rows.push_str(&format!("{lake},{season},{},{}\n", r.mad, r.common_days));
        per_lake.entry(lake).or_default().push(r);
    }
    let mut summary = String::from("lake_id,mean_mad,std_mad,winters\n");
    for (lake, list) in &per_lake {
        if let Some(s) = mad_summary(list) {
            summary.push_str(&format!("{lake},{},{},{}\n", s.mean, s.std, s.winters));
        }
    }
    let mut staged = Staged::default();
    staged.add(cfg.out.join("mad.csv"), rows);
    staged.add(cfg.out.join("mad_summary.csv"), summary);
    finish("compare", cfg, &[a_path, b_path], staged)
}

/// Values published for the real MODIS record. The pixel archive and station
/// series behind them are not distributed, so they are listed for reference
/// only and nothing here recomputes them.
pub const REFERENCE_VALUES: [(&str, &str, &str); 4] = [
    ("four_fold_cv_m_acc_percent", "93.4-99.4", "MODIS classifier, four lakes, 20 winters"),
    ("cfd_trend_d_per_a_sils", "-0.76", "complete freeze duration, MODIS 2000-2020"),
    ("cfd_trend_d_per_a_silvaplana", "-0.89", "complete freeze duration, MODIS 2000-2020"),
    ("climate_correlations", "bar chart only", "per-event correlations with station indicators"),
];

pub fn report(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let (path, recs) = load_records(cfg)?;
    let tl_path = cfg.timelines_path();
    let mut inputs = vec![path];
    // Timelines are optional unless asked for explicitly.
    let set = if cfg.timelines.is_some() || tl_path.exists() {
        inputs.push(tl_path.clone());
        Some(load_timelines(&tl_path)?)
    } else {
        None
    };
    let mut staged = Staged::default();
    let mut table = String::from(REPORT_HEADER);
    table.push('\n');
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in &recs {
        let date = |e| opt(r.date_of(e).map(|d| d.format("%Y-%m-%d").to_string()));
        let note = r.override_note.replace('"', "\"\"");
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},\"{}\"\n",
            r.lake_id,
            r.season,
            date(lakeice_core::LipEvent::Fus),
            date(lakeice_core::LipEvent::Fue),
            date(lakeice_core::LipEvent::Bus),
            date(lakeice_core::LipEvent::Bue),
            opt(r.icd_days.map(|v| v.to_string())),
            opt(r.cfd_days.map(|v| v.to_string())),
            opt(r.fit_loss.map(|v| v.to_string())),
            u8::from(r.incomplete),
            u8::from(r.corrected),
            note
        ));
        if let Some(set) = &set {
            let key = (r.lake_id.clone(), r.season);
            if let Some(raw) = set.raw.get(&key) {
                let svg = render_svg_timeline(raw, set.smoothed.get(&key), r);
                staged.add(cfg.out.join("svg").join(format!("{}_{}.svg", r.lake_id, r.season)), svg);
            }
        }
    }
    staged.add(cfg.out.join("report.csv"), table);
    let mut refs = String::from("quantity,value,context\n");
    for (q, v, c) in REFERENCE_VALUES {
        refs.push_str(&format!("{q},{v},{c}\n"));
    }
    staged.add(cfg.out.join("reference_values.csv"), refs);
    finish("report", cfg, &inputs, staged)
}
