//! Pipeline settings: defaults, TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use lakeice_core::classify::DEFAULT_COST;
use lakeice_core::phenology::MonthDay;
use lakeice_core::pipeline::TimelineSettings;
use lakeice_core::synth::SynthConfig;
use lakeice_core::PriorConfig;

use crate::CliError;

/// Every setting a subcommand may read. Paths left unset resolve to a
/// fixed file name inside `out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub out: PathBuf,
    pub samples: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub timelines: Option<PathBuf>,
    /// Second timeline file for `compare`.
    pub other_timelines: Option<PathBuf>,
    pub phenology: Option<PathBuf>,
    /// A station CSV, or a directory of `<lake_id>.csv` files.
    pub meteo: Option<PathBuf>,
    pub overrides: Option<PathBuf>,

    pub cost: f64,
    pub seed: u64,
    pub train_max_samples: usize,
    pub cv_folds: usize,

    pub min_cloud_free: f64,
    pub sigma_days: f64,
    pub window_days: f64,

    pub prior_fus: MonthDay,
    pub prior_fue: MonthDay,
    pub prior_bus: MonthDay,
    pub prior_bue: MonthDay,
    pub prior_sigma_days: f64,

    pub synth_first_winter: i32,
    pub synth_last_winter: i32,
    pub synth_cloud_rate: f64,
    pub synth_cloud_fn_rate: f64,
    pub synth_label_noise: f64,
    pub synth_separation: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let tl = TimelineSettings::default();
        let prior = PriorConfig::default();
        let [fus, fue, bus, bue] = prior.means();
        let synth = SynthConfig::default();
        Self {
            out: PathBuf::from("out"),
            samples: None,
            model: None,
            predictions: None,
            timelines: None,
            other_timelines: None,
            phenology: None,
            meteo: None,
            overrides: None,
            cost: DEFAULT_COST,
            seed: synth.seed,
            train_max_samples: 4000,
            cv_folds: 4,
            min_cloud_free: tl.min_cloud_free,
            sigma_days: tl.sigma_days,
            window_days: tl.window_days,
            prior_fus: fus,
            prior_fue: fue,
            prior_bus: bus,
            prior_bue: bue,
            prior_sigma_days: prior.sigma_days(),
            synth_first_winter: *synth.winters.first().expect("default winters"),
            synth_last_winter: *synth.winters.last().expect("default winters"),
            synth_cloud_rate: synth.cloud_rate,
            synth_cloud_fn_rate: synth.cloud_fn_rate,
            synth_label_noise: synth.label_noise,
            synth_separation: synth.separation,
        }
    }
}

/// Flags shared by all subcommands; each overrides the config-file value.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigFlags {
    /// TOML file of `key = value` settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub samples: Option<PathBuf>,
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[arg(long, global = true)]
    pub predictions: Option<PathBuf>,
    #[arg(long, global = true)]
    pub timelines: Option<PathBuf>,
    #[arg(long, global = true)]
    pub other_timelines: Option<PathBuf>,
    #[arg(long, global = true)]
    pub phenology: Option<PathBuf>,
    #[arg(long, global = true)]
    pub meteo: Option<PathBuf>,
    #[arg(long, global = true)]
    pub overrides: Option<PathBuf>,
    #[arg(long, global = true)]
    pub cost: Option<f64>,
    #[arg(long, global = true)]
    pub train_max_samples: Option<usize>,
    #[arg(long, global = true)]
    pub cv_folds: Option<usize>,
    #[arg(long, global = true)]
    pub min_cloud_free: Option<f64>,
    #[arg(long, global = true)]
    pub sigma_days: Option<f64>,
    #[arg(long, global = true)]
    pub window_days: Option<f64>,
    #[arg(long, global = true)]
    pub prior_sigma_days: Option<f64>,
    #[arg(long, global = true)]
    pub synth_first_winter: Option<i32>,
    #[arg(long, global = true)]
    pub synth_last_winter: Option<i32>,
}

impl PipelineConfig {
    pub fn load(flags: &ConfigFlags) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        if !path.is_file() {
            return Err(CliError::Invalid(format!("missing input: config file {} not found", path.display())));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    fn apply(&mut self, f: &ConfigFlags) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &f.$field {
                    self.$field = v.clone().into();
                }
            )*};
        }
        set!(
            samples,
            model,
            predictions,
            timelines,
            other_timelines,
            phenology,
            meteo,
            overrides,
            seed,
            out,
            cost,
            train_max_samples,
            cv_folds,
            min_cloud_free,
            sigma_days,
            window_days,
            prior_sigma_days,
            synth_first_winter,
            synth_last_winter
        );
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Invalid(m));
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return bad(format!("cost must be positive, got {}", self.cost));
        }
        if self.train_max_samples == 0 {
            return bad("train_max_samples must be at least 1".into());
        }
        if self.cv_folds == 1 {
            return bad("cv_folds must be 0 (off) or at least 2".into());
        }
        self.timeline_settings().validate().map_err(CliError::Invalid)?;
        self.prior()?;
        if self.synth_first_winter > self.synth_last_winter {
            return bad(format!(
                "synth_first_winter {} is after synth_last_winter {}",
                self.synth_first_winter, self.synth_last_winter
            ));
        }
        self.synth()?;
        Ok(())
    }

    pub fn timeline_settings(&self) -> TimelineSettings {
        TimelineSettings {
            min_cloud_free: self.min_cloud_free,
            sigma_days: self.sigma_days,
            window_days: self.window_days,
        }
    }

    pub fn prior(&self) -> Result<PriorConfig, CliError> {
        PriorConfig::new(
            [self.prior_fus, self.prior_fue, self.prior_bus, self.prior_bue],
            self.prior_sigma_days,
        )
        .map_err(|e| CliError::Invalid(e.to_string()))
    }

    pub fn synth(&self) -> Result<SynthConfig, CliError> {
        let cfg = SynthConfig {
            winters: (self.synth_first_winter..=self.synth_last_winter).collect(),
            cloud_rate: self.synth_cloud_rate,
            cloud_fn_rate: self.synth_cloud_fn_rate,
            label_noise: self.synth_label_noise,
            separation: self.synth_separation,
            prior: self.prior()?,
            seed: self.seed,
            ..SynthConfig::default()
        };
        cfg.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    fn path_or(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out.join(name))
    }

    pub fn samples_path(&self) -> PathBuf {
        self.path_or(&self.samples, "samples.csv")
    }

    pub fn model_path(&self) -> PathBuf {
        self.path_or(&self.model, "model.json")
    }

    pub fn predictions_path(&self) -> PathBuf {
        self.path_or(&self.predictions, "predictions.csv")
    }

    pub fn timelines_path(&self) -> PathBuf {
        self.path_or(&self.timelines, "timelines.csv")
    }

    pub fn phenology_path(&self) -> PathBuf {
        self.path_or(&self.phenology, "phenology.json")
    }

    pub fn meteo_path(&self) -> PathBuf {
        self.path_or(&self.meteo, "meteo")
    }
}
