//! Sequential forward floating selection over a black-box subset criterion.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SffsConfig {
    pub k_max: usize,
    /// Consecutive inclusions (at size >= `k_min`) that fail to beat the best criterion.
    pub patience: usize,
    pub k_min: usize,
    /// Seed handed to the criterion.
    pub seed: u64,
}

impl Default for SffsConfig {
    fn default() -> Self {
        Self {
            k_max: 60,
            patience: 10,
            k_min: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Include,
    Exclude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub action: Action,
    pub feature: usize,
    pub j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub trajectory: Vec<TrajectoryStep>,
    /// Best subset of size >= `k_min` ever visited, ascending.
    pub final_subset: Vec<usize>,
    pub j_final: f64,
}

/// Memoizing wrapper; candidate subsets within one step are scored in parallel.
struct Scorer<'a, J> {
    criterion: &'a J,
    cache: HashMap<Vec<usize>, f64>,
}

impl<'a, J> Scorer<'a, J>
where
    J: Fn(&[usize]) -> Result<f64> + Sync,
{
    fn score_all(&mut self, subsets: Vec<Vec<usize>>) -> Result<Vec<f64>> {
        let missing: Vec<&Vec<usize>> = {
            let mut seen = HashSet::new();
            subsets
                .iter()
                .filter(|s| !self.cache.contains_key(*s) && seen.insert(*s))
                .collect()
        };
        let crit = self.criterion;
        let fresh: Vec<f64> = missing.par_iter().map(|s| crit(s)).collect::<Result<_>>()?;
        for (s, j) in missing.into_iter().zip(fresh) {
            if !j.is_finite() {
                return Err(Error::NonFiniteCriterion(s.clone()));
            }
            self.cache.insert(s.clone(), j);
        }
        Ok(subsets.iter().map(|s| self.cache[s]).collect())
    }
}

fn with(subset: &[usize], x: usize) -> Vec<usize> {
    let mut s = subset.to_vec();
    let pos = s.partition_point(|&v| v < x);
    s.insert(pos, x);
    s
}

fn without(subset: &[usize], x: usize) -> Vec<usize> {
    subset.iter().copied().filter(|&v| v != x).collect()
}

/// First index of the maximum (ties go to the earliest entry).
fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

struct Search<'a, J> {
    scorer: Scorer<'a, J>,
    cfg: SffsConfig,
    trajectory: Vec<TrajectoryStep>,
    best: Option<(f64, Vec<usize>)>,
}

impl<'a, J> Search<'a, J>
where
    J: Fn(&[usize]) -> Result<f64> + Sync,
{
    /// Returns true when the visited subset beats the best so far.
    fn visit(&mut self, action: Action, feature: usize, subset: &[usize], j: f64) -> bool {
        self.trajectory.push(TrajectoryStep { action, feature, j });
        if subset.len() >= self.cfg.k_min && self.best.as_ref().is_none_or(|(b, _)| j > *b) {
            self.best = Some((j, subset.to_vec()));
            true
        } else {
            false
        }
    }

    fn finish(self) -> Result<SearchOutcome> {
        let (j_final, final_subset) = self
            .best
            .ok_or_else(|| Error::InvalidParameter("search never reached k_min features".into()))?;
        Ok(SearchOutcome {
            trajectory: self.trajectory,
            final_subset,
            j_final,
        })
    }
}

fn validate(candidates: &[usize], cfg: &SffsConfig) -> Result<Vec<usize>> {
    if cfg.k_min < 1 || cfg.k_max < cfg.k_min {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k_min <= k_max (got k_min={}, k_max={})",
            cfg.k_min, cfg.k_max
        )));
    }
    let mut pool = candidates.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if pool.len() < cfg.k_min.max(2) {
        return Err(Error::InvalidParameter(format!(
            "need at least {} candidates, got {}",
            cfg.k_min.max(2),
            pool.len()
        )));
    }
    Ok(pool)
}

/// Floating forward search maximizing `criterion` over subsets of `candidates`.
///
/// Inclusion adds the unselected candidate that maximizes the criterion (ties to the
/// lowest index). After each inclusion, conditional exclusion repeatedly drops the
/// selected feature whose removal maximizes the criterion, as long as that strictly
/// improves on the current subset, the subset is larger than `k_min`, and the feature
/// is not the one just added. Stops at `k_max` features, when candidates run out, or
/// after `patience` non-improving inclusions. Subsets are always passed sorted.
pub fn sffs<J>(candidates: &[usize], criterion: J, cfg: &SffsConfig) -> Result<SearchOutcome>
where
    J: Fn(&[usize]) -> Result<f64> + Sync,
{
    let pool = validate(candidates, cfg)?;
    let mut search = Search {
        scorer: Scorer {
            criterion: &criterion,
            cache: HashMap::new(),
        },
        cfg: *cfg,
        trajectory: Vec::new(),
        best: None,
    };
    let mut current: Vec<usize> = Vec::new();
    let mut included_states: HashSet<Vec<usize>> = HashSet::new();
    let mut stale = 0;

    while current.len() < cfg.k_max && stale < cfg.patience {
        // inclusion
        let options: Vec<(usize, Vec<usize>)> = pool
            .iter()
            .filter(|x| current.binary_search(x).is_err())
            .map(|&x| (x, with(&current, x)))
            .filter(|(_, s)| !included_states.contains(s))
            .collect();
        if options.is_empty() {
            break;
        }
        let scores = search.scorer.score_all(options.iter().map(|(_, s)| s.clone()).collect())?;
        let pick = argmax(&scores).expect("non-empty");
        let (added, subset) = options[pick].clone();
        current = subset;
        let mut current_j = scores[pick];
        included_states.insert(current.clone());
        let improved = search.visit(Action::Include, added, &current, current_j);
        if current.len() >= cfg.k_min {
            stale = if improved { 0 } else { stale + 1 };
        }

        // conditional exclusion
        while current.len() > cfg.k_min {
            let removable: Vec<usize> = current.iter().copied().filter(|&x| x != added).collect();
            if removable.is_empty() {
                break;
            }
            let subsets: Vec<Vec<usize>> = removable.iter().map(|&x| without(&current, x)).collect();
            let scores = search.scorer.score_all(subsets.clone())?;
            let pick = argmax(&scores).expect("non-empty");
            if scores[pick] > current_j {
                current = subsets[pick].clone();
                current_j = scores[pick];
                if search.visit(Action::Exclude, removable[pick], &current, current_j) {
                    stale = 0;
                }
            } else {
                break;
            }
        }
    }
    search.finish()
}

/// Plain sequential forward selection with the same inclusion rule, stopping and
/// tie-breaking as [`sffs`] but no exclusion step.
pub fn sfs<J>(candidates: &[usize], criterion: J, cfg: &SffsConfig) -> Result<SearchOutcome>
where
    J: Fn(&[usize]) -> Result<f64> + Sync,
{
    let pool = validate(candidates, cfg)?;
    let mut search = Search {
        scorer: Scorer {
            criterion: &criterion,
            cache: HashMap::new(),
        },
        cfg: *cfg,
        trajectory: Vec::new(),
        best: None,
    };
    let mut current: Vec<usize> = Vec::new();
    let mut stale = 0;
    while current.len() < cfg.k_max && stale < cfg.patience {
        let options: Vec<usize> = pool.iter().copied().filter(|x| current.binary_search(x).is_err()).collect();
        if options.is_empty() {
            break;
        }
        let scores = search.scorer.score_all(options.iter().map(|&x| with(&current, x)).collect())?;
        let pick = argmax(&scores).expect("non-empty");
        current = with(&current, options[pick]);
        let improved = search.visit(Action::Include, options[pick], &current, scores[pick]);
        if current.len() >= cfg.k_min {
            stale = if improved { 0 } else { stale + 1 };
        }
    }
    search.finish()
}
