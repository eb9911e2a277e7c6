//! Leave-one-subject-out evaluation of the three feature-set variants, with channel
//! saliency and a leakage guard around every fitted stage.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{select_task, EpochSet, FeatureDescriptor, FeatureMatrix, TaskId, TaskSpec};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureConfig};
use crate::mlp::{random_search, train, MlpConfig, SearchSpace};
use crate::preprocess::Standardizer;
use crate::rng::derive_seed;
use crate::selection::{hybrid_select, mi_filter, CriterionConfig, MiConfig, SelectionReport, SffsConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub subject: u32,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// One fold per distinct subject id, in ascending subject order.
pub fn loso_folds(subjects: &[u32]) -> Result<Vec<Fold>> {
    let ids: BTreeSet<u32> = subjects.iter().copied().collect();
    if ids.len() < 2 {
        return Err(Error::SingleSubject);
    }
    Ok(ids
        .into_iter()
        .map(|subject| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..subjects.len()).partition(|&i| subjects[i] == subject);
            Fold { subject, train, test }
        })
        .collect())
}

/// Percentage of predictions equal to the labels.
pub fn accuracy(predictions: &[u8], labels: &[u8]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("accuracy predictions"));
    }
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            context: "accuracy labels",
            expected: predictions.len(),
            found: labels.len(),
        });
    }
    let correct = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(100.0 * correct as f64 / predictions.len() as f64)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    AllFeatures,
    MiOnly,
    Hybrid,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::AllFeatures, Variant::MiOnly, Variant::Hybrid];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::AllFeatures => "all_features",
            Variant::MiOnly => "mi_only",
            Variant::Hybrid => "hybrid",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" | "all_features" => Ok(Variant::AllFeatures),
            "mi" | "mi_only" => Ok(Variant::MiOnly),
            "hybrid" => Ok(Variant::Hybrid),
            other => Err(Error::InvalidParameter(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectAccuracy {
    pub subject: u32,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedFold {
    pub subject: u32,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosoResult {
    pub task_id: TaskId,
    pub variant: Variant,
    /// Successful folds only, by ascending subject id.
    pub per_subject: Vec<SubjectAccuracy>,
    pub failed: Vec<FailedFold>,
    /// Absent when every fold failed.
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl LosoResult {
    fn new(task_id: TaskId, variant: Variant, per_subject: Vec<SubjectAccuracy>, failed: Vec<FailedFold>) -> Self {
        let accs: Vec<f64> = per_subject.iter().map(|s| s.accuracy).collect();
        let stats = mean_std(&accs);
        Self {
            task_id,
            variant,
            per_subject,
            failed,
            mean: stats.map(|s| s.0),
            std: stats.map(|s| s.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaliencyMap {
    pub channel_names: Vec<String>,
    /// Selected-feature count per channel.
    pub counts: Vec<usize>,
    /// `counts / max(counts)`; all zero when nothing was selected.
    pub significance: Vec<f64>,
}

impl SaliencyMap {
    pub fn from_counts(channel_names: Vec<String>, counts: Vec<usize>) -> Self {
        let max = counts.iter().copied().max().unwrap_or(0);
        let significance = counts
            .iter()
            .map(|&k| if max == 0 { 0.0 } else { k as f64 / max as f64 })
            .collect();
        Self {
            channel_names,
            counts,
            significance,
        }
    }

    /// Channel indices by descending significance (ties to the lower index).
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.counts.len()).collect();
        order.sort_by(|&a, &b| self.counts[b].cmp(&self.counts[a]).then(a.cmp(&b)));
        order
    }

    /// `channel,k,s` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,k,s\n");
        for i in 0..self.counts.len() {
            out.push_str(&format!("{},{},{}\n", self.channel_names[i], self.counts[i], self.significance[i]));
        }
        out
    }
}

/// Count selected features per channel and normalize by the largest count.
pub fn channel_significance(
    final_subset: &[usize],
    descriptors: &[FeatureDescriptor],
    channel_names: &[String],
) -> Result<SaliencyMap> {
    if final_subset.is_empty() {
        return Err(Error::EmptyInput("saliency subset"));
    }
    let mut counts = vec![0; channel_names.len()];
    for &j in final_subset {
        let d = descriptors.get(j).ok_or(Error::DimensionMismatch {
            context: "saliency feature index",
            expected: descriptors.len(),
            found: j,
        })?;
        let slot = counts.get_mut(d.channel_index).ok_or(Error::DimensionMismatch {
            context: "saliency channel index",
            expected: channel_names.len(),
            found: d.channel_index,
        })?;
        *slot += 1;
    }
    Ok(SaliencyMap::from_counts(channel_names.to_vec(), counts))
}

/// Rejects any fitting stage that sees rows from the held-out set.
///
/// A stage passes when its rows carry no held-out subject and there are exactly as many
/// of them as training rows.
#[derive(Debug, Clone)]
pub struct LeakageGuard {
    held_out: BTreeSet<u32>,
    train_rows: usize,
    checks: usize,
}

impl LeakageGuard {
    pub fn new(held_out: impl IntoIterator<Item = u32>, train_rows: usize) -> Self {
        Self {
            held_out: held_out.into_iter().collect(),
            train_rows,
            checks: 0,
        }
    }

    pub fn check(&mut self, stage: &'static str, subjects: &[u32]) -> Result<()> {
        self.checks += 1;
        if subjects.len() != self.train_rows || subjects.iter().any(|s| self.held_out.contains(s)) {
            return Err(Error::Leakage { stage });
        }
        Ok(())
    }

    pub fn checks(&self) -> usize {
        self.checks
    }
}

/// Final classifier of a fold. Receives standardized, already-selected columns.
pub trait FoldClassifier: Sync {
    fn fit_predict(
        &self,
        train: &FeatureMatrix,
        test: &FeatureMatrix,
        seed: u64,
        guard: &mut LeakageGuard,
    ) -> Result<Vec<u8>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlpClassifier {
    /// Train one fixed architecture (the seed is replaced per fold).
    Fixed(MlpConfig),
    /// Tune on the training fold with random search first.
    Search(SearchSpace),
}

impl MlpClassifier {
    pub fn table2(task: TaskId) -> Self {
        MlpClassifier::Fixed(MlpConfig::table2(task))
    }
}

impl FoldClassifier for MlpClassifier {
    fn fit_predict(
        &self,
        train_set: &FeatureMatrix,
        test: &FeatureMatrix,
        seed: u64,
        guard: &mut LeakageGuard,
    ) -> Result<Vec<u8>> {
        let config = match self {
            MlpClassifier::Fixed(cfg) => MlpConfig {
                seed,
                ..cfg.clone()
            },
            MlpClassifier::Search(space) => {
                guard.check("random_search", train_set.subjects())?;
                let out = random_search(train_set.values().view(), train_set.labels(), space, seed)?;
                out.best
            }
        };
        let out = train(train_set.values().view(), train_set.labels(), &config)?;
        out.model.predict(test.values().view())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct EvalConfig {
    pub features: FeatureConfig,
    pub mi: MiConfig,
    pub sffs: SffsConfig,
    pub criterion: CriterionConfig,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub subject: u32,
    pub n_train: usize,
    pub n_test: usize,
    /// Columns handed to the classifier, indices into the full feature matrix.
    pub features_used: Vec<usize>,
    pub selection: Option<SelectionReport>,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub result: LosoResult,
    pub folds: Vec<FoldReport>,
    /// Selected-feature counts summed over folds.
    pub saliency: SaliencyMap,
    pub n_features: usize,
    pub leakage_checks: usize,
}

/// Fold-local features after standardization: fitted on the training rows only.
struct FoldFeatures {
    train: FeatureMatrix,
    test: FeatureMatrix,
}

fn fold_features(epochs: &EpochSet, fold: &Fold, cfg: &FeatureConfig, guard: &mut LeakageGuard) -> Result<FoldFeatures> {
    let train_epochs = epochs.subset(&fold.train);
    let test_epochs = epochs.subset(&fold.test);
    guard.check("pca_fit", train_epochs.subjects())?;
    let (train_raw, models) = extract_features(&train_epochs, cfg, None)?;
    let (test_raw, _) = extract_features(&test_epochs, cfg, Some(&models))?;
    guard.check("standardize_fit", train_raw.subjects())?;
    let scaler = Standardizer::fit(&train_raw)?;
    Ok(FoldFeatures {
        train: scaler.apply(&train_raw)?,
        test: scaler.apply(&test_raw)?,
    })
}

fn run_variant(
    ff: &FoldFeatures,
    variant: Variant,
    cfg: &EvalConfig,
    classifier: &dyn FoldClassifier,
    fold_seed: u64,
    guard: &mut LeakageGuard,
) -> Result<(Vec<usize>, Option<SelectionReport>, f64)> {
    let (used, report) = match variant {
        Variant::AllFeatures => ((0..ff.train.n_features()).collect(), None),
        Variant::MiOnly => {
            guard.check("mi_filter", ff.train.subjects())?;
            let report = SelectionReport::from_filter(mi_filter(&ff.train, &cfg.mi)?);
            (report.final_subset.clone(), Some(report))
        }
        Variant::Hybrid => {
            guard.check("mi_filter", ff.train.subjects())?;
            guard.check("sffs", ff.train.subjects())?;
            let search = SffsConfig {
                seed: derive_seed(fold_seed, 1),
                ..cfg.sffs
            };
            let report = hybrid_select(&ff.train, &cfg.mi, &search, &cfg.criterion)?;
            (report.final_subset.clone(), Some(report))
        }
    };
    let train_sel = ff.train.select_columns(&used);
    let test_sel = ff.test.select_columns(&used);
    let pred = classifier.fit_predict(&train_sel, &test_sel, derive_seed(fold_seed, 2), guard)?;
    let acc = accuracy(&pred, test_sel.labels())?;
    Ok((used, report, acc))
}

type VariantOutcome = Result<(Vec<usize>, Option<SelectionReport>, f64)>;

struct FoldOutcome {
    variants: Vec<VariantOutcome>,
    descriptors: Vec<FeatureDescriptor>,
    checks: usize,
}

/// Leave-one-subject-out run of several variants on one task. Features are extracted
/// once per fold and shared by the variants; folds run in parallel, each seeded from
/// `(seed, fold index)`.
pub fn run_variants(
    epochs: &EpochSet,
    task: TaskSpec,
    variants: &[Variant],
    cfg: &EvalConfig,
    classifier: &dyn FoldClassifier,
    seed: u64,
) -> Result<Vec<TaskReport>> {
    if variants.is_empty() {
        return Err(Error::EmptyInput("variants"));
    }
    let task_epochs = select_task(epochs, task)?;
    let folds = loso_folds(task_epochs.subjects())?;

    let per_fold: Vec<FoldOutcome> = folds
        .par_iter()
        .enumerate()
        .map(|(k, fold)| -> Result<FoldOutcome> {
            let fold_seed = derive_seed(seed, k as u64);
            let mut guard = LeakageGuard::new([fold.subject], fold.train.len());
            let ff = fold_features(&task_epochs, fold, &cfg.features, &mut guard)?;
            let mut outcomes = Vec::with_capacity(variants.len());
            for &v in variants {
                match run_variant(&ff, v, cfg, classifier, fold_seed, &mut guard) {
                    // leakage aborts the run rather than failing one fold
                    Err(e @ Error::Leakage { .. }) => return Err(e),
                    other => outcomes.push(other),
                }
            }
            Ok(FoldOutcome {
                variants: outcomes,
                descriptors: ff.train.descriptors().to_vec(),
                checks: guard.checks(),
            })
        })
        .collect::<Result<_>>()?;

    let n_channels = task_epochs.n_channels();
    let n_features = per_fold[0].descriptors.len();
    let leakage_checks: usize = per_fold.iter().map(|f| f.checks).sum();
    let mut reports = Vec::with_capacity(variants.len());
    for (vi, &variant) in variants.iter().enumerate() {
        let mut per_subject = Vec::new();
        let mut failed = Vec::new();
        let mut fold_reports = Vec::new();
        let mut counts = vec![0usize; n_channels];
        for (fold, out) in folds.iter().zip(&per_fold) {
            let mut fr = FoldReport {
                subject: fold.subject,
                n_train: fold.train.len(),
                n_test: fold.test.len(),
                features_used: Vec::new(),
                selection: None,
                accuracy: None,
                error: None,
            };
            match &out.variants[vi] {
                Ok((used, report, acc)) => {
                    for &j in used {
                        counts[out.descriptors[j].channel_index] += 1;
                    }
                    fr.features_used = used.clone();
                    fr.selection = report.clone();
                    fr.accuracy = Some(*acc);
                    per_subject.push(SubjectAccuracy {
                        subject: fold.subject,
                        accuracy: *acc,
                    });
                }
                Err(e) => {
                    fr.error = Some(e.to_string());
                    failed.push(FailedFold {
                        subject: fold.subject,
                        error: e.to_string(),
                    });
                }
            }
            fold_reports.push(fr);
        }
        reports.push(TaskReport {
            result: LosoResult::new(task.task_id, variant, per_subject, failed),
            folds: fold_reports,
            saliency: SaliencyMap::from_counts(task_epochs.channel_names().to_vec(), counts),
            n_features,
            leakage_checks,
        });
    }
    Ok(reports)
}

/// Single-variant form of [`run_variants`].
pub fn run_task(
    epochs: &EpochSet,
    task: TaskSpec,
    variant: Variant,
    cfg: &EvalConfig,
    classifier: &dyn FoldClassifier,
    seed: u64,
) -> Result<TaskReport> {
    Ok(run_variants(epochs, task, &[variant], cfg, classifier, seed)?.remove(0))
}
