//! Command implementations behind the `bci-featsel` binary.
//!
//! Each stage reads the previous stage's files from the output directory and writes its
//! own, so any stage can be re-run on its own:
//!
//! | command        | reads                              | writes                                  |
//! |----------------|------------------------------------|-----------------------------------------|
//! | `gen-synthetic`| -                                  | epoch bundle, `synthetic_spec.json`     |
//! | `extract`      | bundle                             | `features.json`, `descriptors.json`, `wavelet_models.json` |
//! | `select`       | `features.json`                    | `selection.json`                        |
//! | `train`        | `features.json`, `selection.json`  | `model.json`, `weights.bin`             |
//! | `evaluate`     | bundle                             | `results.json`                          |
//! | `saliency`     | `results.json`                     | `saliency_<task>_<variant>.csv`         |
//! | `pipeline`     | bundle                             | all of the above                        |

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::artifact::{read_json, write_atomic, write_json, SCHEMA_VERSION};
use crate::config::PipelineConfig;
use crate::data::{load_epoch_bundle, save_epoch_bundle, select_task, FeatureDescriptor, FeatureMatrix, TaskId, TaskSpec};
use crate::error::{Error, Result};
use crate::evaluation::{accuracy, run_variants, TaskReport, Variant};
use crate::features::extract_features;
use crate::mlp::{random_search, train, MlpConfig, MlpModel};
use crate::preprocess::Standardizer;
use crate::rng::derive_seed;
use crate::selection::{hybrid_select, mi_filter, SelectionReport};
use crate::synthetic::{generate, SyntheticSpec};
use crate::wavelet::WaveletModels;

pub const FEATURES_FILE: &str = "features.json";
pub const DESCRIPTORS_FILE: &str = "descriptors.json";
pub const WAVELET_FILE: &str = "wavelet_models.json";
pub const SELECTION_FILE: &str = "selection.json";
pub const MODEL_FILE: &str = "model.json";
pub const WEIGHTS_FILE: &str = "weights.bin";
pub const RESULTS_FILE: &str = "results.json";
pub const SYNTHETIC_SPEC_FILE: &str = "synthetic_spec.json";

#[derive(Debug, Parser)]
#[command(name = "bci-featsel", version, about = "Motor-imagery EEG feature selection pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic epoch bundle with a planted class difference.
    GenSynthetic(GenArgs),
    /// Extract the 19-per-channel feature matrix for one task.
    Extract(StageArgs),
    /// Run MI filtering (and floating search for `hybrid`) on extracted features.
    Select(StageArgs),
    /// Train the network on the selected features.
    Train(StageArgs),
    /// Leave-one-subject-out evaluation of every requested task and variant.
    Evaluate(StageArgs),
    /// Write per-channel saliency CSVs from the evaluation results.
    Saliency(StageArgs),
    /// extract, select, train, evaluate and saliency in one go.
    Pipeline(StageArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct StageArgs {
    /// Flat TOML configuration; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Task(s) I..VI, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub task: Vec<TaskId>,
    /// Variant(s) all, mi, hybrid, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub variant: Vec<Variant>,
    /// Mutual-information threshold in nats.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Use the fixed architecture listed for this task.
    #[arg(long)]
    pub table2: Option<TaskId>,
    /// Tune the architecture by random search.
    #[arg(long)]
    pub search: bool,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub mlp_epochs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 4)]
    pub subjects: usize,
    #[arg(long, default_value_t = 60)]
    pub epochs_per_class: usize,
    #[arg(long, default_value_t = 8)]
    pub channels: usize,
    #[arg(long, default_value_t = 175)]
    pub samples: usize,
    #[arg(long, default_value_t = 250.0)]
    pub fs: f64,
    /// Planted channel indices, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 5])]
    pub planted: Vec<usize>,
    /// Planted band `lo,hi` in Hz.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [8.0, 13.0])]
    pub band: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub effect_size: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 1.25)]
    pub gain_jitter: f64,
    /// Allow effect size 1 (no signal).
    #[arg(long)]
    pub force: bool,
}

impl StageArgs {
    /// File values (or defaults), then flags on top.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(b) = &self.bundle {
            c.bundle = Some(b.clone());
        }
        if let Some(o) = &self.out {
            c.out = Some(o.clone());
        }
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if !self.task.is_empty() {
            c.tasks = self.task.clone();
        }
        if !self.variant.is_empty() {
            c.variants = self.variant.clone();
        }
        if let Some(t) = self.threshold {
            c.mi_threshold = t;
        }
        if self.table2.is_some() {
            c.table2 = self.table2;
        }
        if self.search {
            c.search = true;
        }
        if let Some(n) = self.trials {
            c.search_trials = n;
        }
        if let Some(n) = self.mlp_epochs {
            c.mlp_epochs = n;
        }
        Ok(c)
    }
}

impl GenArgs {
    pub fn spec(&self) -> Result<SyntheticSpec> {
        let seed = self
            .seed
            .ok_or_else(|| Error::Config("--seed is required for this command".into()))?;
        Ok(SyntheticSpec {
            n_subjects: self.subjects,
            epochs_per_class: self.epochs_per_class,
            n_channels: self.channels,
            fs: self.fs,
            n_samples: self.samples,
            planted_channels: self.planted.clone(),
            band: (self.band[0], self.band[1]),
            effect_size: self.effect_size,
            noise_level: self.noise,
            gain_jitter: self.gain_jitter,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpecArtifact {
    pub schema_version: u32,
    pub spec: SyntheticSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesArtifact {
    pub schema_version: u32,
    pub task: TaskId,
    pub config: PipelineConfig,
    pub channel_names: Vec<String>,
    pub features: FeatureMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorsArtifact {
    pub schema_version: u32,
    pub descriptors: Vec<FeatureDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletArtifact {
    pub schema_version: u32,
    pub models: WaveletModels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionArtifact {
    pub schema_version: u32,
    pub task: TaskId,
    pub variant: Variant,
    pub seed: u64,
    pub config: PipelineConfig,
    pub report: SelectionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_version: u32,
    pub task: TaskId,
    pub variant: Variant,
    pub config: PipelineConfig,
    pub mlp: MlpConfig,
    pub layer_dims: Vec<usize>,
    /// Feature-matrix columns the network consumes, in input order.
    pub feature_columns: Vec<usize>,
    pub standardizer: Standardizer,
    pub weights_file: String,
    pub dtype: String,
    pub n_weights: usize,
    pub training_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsArtifact {
    pub schema_version: u32,
    pub protocol: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub reports: Vec<TaskReport>,
}

/// What a command wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub command: String,
    pub outputs: Vec<PathBuf>,
}

fn out_dir(c: &PipelineConfig) -> Result<PathBuf> {
    c.out.clone().ok_or_else(|| Error::Config("--out is required".into()))
}

fn bundle_dir(c: &PipelineConfig) -> Result<PathBuf> {
    c.bundle.clone().ok_or_else(|| Error::Config("--bundle is required".into()))
}

fn single_task(c: &PipelineConfig) -> Result<TaskId> {
    match c.tasks.as_slice() {
        [t] => Ok(*t),
        _ => Err(Error::Config(format!("this command takes exactly one task, got {:?}", c.tasks))),
    }
}

/// Selection stages act on one variant: `hybrid` if requested, else the first listed.
fn selection_variant(c: &PipelineConfig) -> Variant {
    if c.variants.contains(&Variant::Hybrid) {
        Variant::Hybrid
    } else {
        c.variants.first().copied().unwrap_or(Variant::Hybrid)
    }
}

/// Config as echoed into artifacts: the output directory is where the file already lives.
fn echo(c: &PipelineConfig) -> PipelineConfig {
    PipelineConfig { out: None, ..c.clone() }
}

pub fn cmd_gen_synthetic(args: &GenArgs) -> Result<Outcome> {
    let spec = args.spec()?;
    let epochs = generate(&spec, args.force)?;
    save_epoch_bundle(&epochs, &args.out)?;
    let spec_path = args.out.join(SYNTHETIC_SPEC_FILE);
    write_json(
        &spec_path,
        &SyntheticSpecArtifact {
            schema_version: SCHEMA_VERSION,
            spec,
        },
    )?;
    Ok(Outcome {
        command: "gen-synthetic".into(),
        outputs: vec![args.out.join(crate::data::MANIFEST_FILE), args.out.join(crate::data::DATA_FILE), spec_path],
    })
}

/// Features of every epoch of one task; wavelet models are fitted on all of them.
pub fn cmd_extract(c: &PipelineConfig) -> Result<Outcome> {
    let task = single_task(c)?;
    let out = out_dir(c)?;
    let epochs = select_task(&load_epoch_bundle(bundle_dir(c)?)?, TaskSpec::new(task))?;
    let (features, models) = extract_features(&epochs, &c.feature_config()?, None)?;
    let paths = [out.join(FEATURES_FILE), out.join(DESCRIPTORS_FILE), out.join(WAVELET_FILE)];
    write_json(
        &paths[1],
        &DescriptorsArtifact {
            schema_version: SCHEMA_VERSION,
            descriptors: features.descriptors().to_vec(),
        },
    )?;
    write_json(
        &paths[2],
        &WaveletArtifact {
            schema_version: SCHEMA_VERSION,
            models,
        },
    )?;
    write_json(
        &paths[0],
        &FeaturesArtifact {
            schema_version: SCHEMA_VERSION,
            task,
            config: echo(c),
            channel_names: epochs.channel_names().to_vec(),
            features,
        },
    )?;
    Ok(Outcome {
        command: "extract".into(),
        outputs: paths.to_vec(),
    })
}

fn select_report(features: &FeatureMatrix, c: &PipelineConfig, variant: Variant, seed: u64) -> Result<SelectionReport> {
    let scaled = Standardizer::fit(features)?.apply(features)?;
    match variant {
        Variant::AllFeatures => Ok(SelectionReport {
            mi_values: Vec::new(),
            stage1_kept: (0..features.n_features()).collect(),
            trajectory: Vec::new(),
            final_subset: (0..features.n_features()).collect(),
            j_final: None,
        }),
        Variant::MiOnly => Ok(SelectionReport::from_filter(mi_filter(&scaled, &c.mi_config())?)),
        Variant::Hybrid => hybrid_select(&scaled, &c.mi_config(), &c.sffs_config(seed), &c.criterion_config()),
    }
}

pub fn cmd_select(c: &PipelineConfig) -> Result<Outcome> {
    let seed = c.require_seed()?;
    let out = out_dir(c)?;
    let fa: FeaturesArtifact = read_json(out.join(FEATURES_FILE))?;
    let variant = selection_variant(c);
    let report = select_report(&fa.features, c, variant, seed)?;
    let path = out.join(SELECTION_FILE);
    write_json(
        &path,
        &SelectionArtifact {
            schema_version: SCHEMA_VERSION,
            task: fa.task,
            variant,
            seed,
            config: echo(c),
            report,
        },
    )?;
    Ok(Outcome {
        command: "select".into(),
        outputs: vec![path],
    })
}

pub fn cmd_train(c: &PipelineConfig) -> Result<Outcome> {
    let seed = c.require_seed()?;
    let out = out_dir(c)?;
    let fa: FeaturesArtifact = read_json(out.join(FEATURES_FILE))?;
    let sel: SelectionArtifact = read_json(out.join(SELECTION_FILE))?;
    if sel.task != fa.task {
        return Err(Error::Config(format!(
            "selection is for task {} but features are for task {}",
            sel.task, fa.task
        )));
    }
    let columns = sel.report.final_subset.clone();
    if columns.iter().any(|&j| j >= fa.features.n_features()) {
        return Err(Error::DimensionMismatch {
            context: "selection columns",
            expected: fa.features.n_features(),
            found: columns.iter().max().copied().unwrap_or(0) + 1,
        });
    }
    let subset = fa.features.select_columns(&columns);
    let standardizer = Standardizer::fit(&subset)?;
    let x = standardizer.apply(&subset)?;
    let mlp = if c.search {
        random_search(x.values().view(), x.labels(), &c.search_space(), derive_seed(seed, 0))?.best
    } else {
        c.mlp_config(fa.task, derive_seed(seed, 1))
    };
    let model = train(x.values().view(), x.labels(), &mlp)?.model;
    let training_accuracy = accuracy(&model.predict(x.values().view())?, x.labels())?;
    let blob: Vec<u8> = model.params.iter().flat_map(|&p| (p as f32).to_le_bytes()).collect();
    let weights_path = out.join(WEIGHTS_FILE);
    let model_path = out.join(MODEL_FILE);
    write_atomic(&weights_path, &blob)?;
    write_json(
        &model_path,
        &ModelArtifact {
            schema_version: SCHEMA_VERSION,
            task: fa.task,
            variant: sel.variant,
            config: echo(c),
            mlp: model.config.clone(),
            layer_dims: model.layer_dims.clone(),
            feature_columns: columns,
            standardizer,
            weights_file: WEIGHTS_FILE.into(),
            dtype: "f32le".into(),
            n_weights: model.params.len(),
            training_accuracy,
        },
    )?;
    Ok(Outcome {
        command: "train".into(),
        outputs: vec![model_path, weights_path],
    })
}

/// Rebuild a trained network from `model.json` and its weight blob.
pub fn load_model(dir: impl AsRef<Path>) -> Result<(ModelArtifact, MlpModel)> {
    let dir = dir.as_ref();
    let art: ModelArtifact = read_json(dir.join(MODEL_FILE))?;
    let path = dir.join(&art.weights_file);
    if !path.exists() {
        return Err(Error::MissingArtifact(path));
    }
    let bytes = std::fs::read(&path)?;
    if bytes.len() != art.n_weights * 4 {
        return Err(Error::DimensionMismatch {
            context: "weights.bin byte count",
            expected: art.n_weights * 4,
            found: bytes.len(),
        });
    }
    let params: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    let mut model = MlpModel::zeros(art.layer_dims[0], art.mlp.clone())?;
    if model.layer_dims != art.layer_dims || model.params.len() != params.len() {
        return Err(Error::Manifest("layer dimensions disagree with the config".into()));
    }
    model.params = params;
    Ok((art, model))
}

pub fn cmd_evaluate(c: &PipelineConfig) -> Result<Outcome> {
    let seed = c.require_seed()?;
    let out = out_dir(c)?;
    let epochs = load_epoch_bundle(bundle_dir(c)?)?;
    let eval = c.eval_config()?;
    let mut reports = Vec::new();
    for (k, &task) in c.tasks.iter().enumerate() {
        let classifier = c.classifier(task);
        reports.extend(run_variants(
            &epochs,
            TaskSpec::new(task),
            &c.variants,
            &eval,
            &classifier,
            derive_seed(seed, k as u64),
        )?);
    }
    let path = out.join(RESULTS_FILE);
    write_json(
        &path,
        &ResultsArtifact {
            schema_version: SCHEMA_VERSION,
            protocol: "leave_one_subject_out".into(),
            seed,
            config: echo(c),
            reports,
        },
    )?;
    Ok(Outcome {
        command: "evaluate".into(),
        outputs: vec![path],
    })
}

pub fn saliency_file_name(task: TaskId, variant: Variant) -> String {
    format!("saliency_{task}_{variant}.csv")
}

pub fn cmd_saliency(c: &PipelineConfig) -> Result<Outcome> {
    let out = out_dir(c)?;
    let results: ResultsArtifact = read_json(out.join(RESULTS_FILE))?;
    let mut outputs = Vec::new();
    for r in &results.reports {
        let path = out.join(saliency_file_name(r.result.task_id, r.result.variant));
        write_atomic(&path, r.saliency.to_csv().as_bytes())?;
        outputs.push(path);
    }
    Ok(Outcome {
        command: "saliency".into(),
        outputs,
    })
}

/// Every stage in order; per-task stage files go to `<out>/task_<id>/`.
pub fn cmd_pipeline(c: &PipelineConfig) -> Result<Outcome> {
    let seed = c.require_seed()?;
    let out = out_dir(c)?;
    let mut outputs = Vec::new();
    for (k, &task) in c.tasks.iter().enumerate() {
        let stage = PipelineConfig {
            out: Some(out.join(format!("task_{task}"))),
            tasks: vec![task],
            seed: Some(derive_seed(seed, 1000 + k as u64)),
            ..c.clone()
        };
        outputs.extend(cmd_extract(&stage)?.outputs);
        outputs.extend(cmd_select(&stage)?.outputs);
        outputs.extend(cmd_train(&stage)?.outputs);
    }
    outputs.extend(cmd_evaluate(c)?.outputs);
    outputs.extend(cmd_saliency(c)?.outputs);
    Ok(Outcome {
        command: "pipeline".into(),
        outputs,
    })
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::GenSynthetic(a) => cmd_gen_synthetic(a),
        Command::Extract(a) => cmd_extract(&a.resolve()?),
        Command::Select(a) => cmd_select(&a.resolve()?),
        Command::Train(a) => cmd_train(&a.resolve()?),
        Command::Evaluate(a) => cmd_evaluate(&a.resolve()?),
        Command::Saliency(a) => cmd_saliency(&a.resolve()?),
        Command::Pipeline(a) => cmd_pipeline(&a.resolve()?),
    }
}

/// JSON object printed to stderr when a command fails.
pub fn error_line(e: &Error) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}

/// Parse, run, report. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string(&outcome).expect("serializable"));
            0
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            1
        }
    }
}
