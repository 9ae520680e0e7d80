//! Pool-based active learning: train on the labeled set, score every
//! unlabeled pool item with an acquisition strategy, move the top-K scorers
//! into the labeled set, retrain from scratch, and repeat until the labeling
//! budget is spent.
//!
//! Scoring is data-parallel: every pool item gets its own derived RNG seed,
//! so results are bit-identical regardless of thread count. Analytic
//! strategies fit a Dirichlet to each item's MC-dropout batch and score it
//! in closed form; when that fit fails the item falls back to its empirical
//! score and is flagged rather than aborting the run.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{FeatureVector, LabeledDataset, LearningCurveRecord, ScoreDumpRecord};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::estimation::{fixed_point_estimate, EstimationConfig};
use crate::model::{train, ModelConfig, TrainedModel};
use crate::uncertainty::{
    analytic_mutual_information, baba_ratio, empirical_bald, mjent,
};

/// How to score unlabeled pool items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AcquisitionStrategy {
    /// Independent uniform score per item: the no-information baseline.
    Random,
    /// Monte Carlo mutual information of the dropout batch.
    BaldEmpirical,
    /// Closed-form mutual information of the Dirichlet fitted to the batch.
    BaldAnalytic,
    /// Sign-dependent ratio with the Monte Carlo mutual information on top.
    BabaEmpirical,
    /// Sign-dependent ratio with the closed-form mutual information on top.
    BabaAnalytic,
}

impl AcquisitionStrategy {
    pub const ALL: [AcquisitionStrategy; 5] = [
        AcquisitionStrategy::Random,
        AcquisitionStrategy::BaldEmpirical,
        AcquisitionStrategy::BaldAnalytic,
        AcquisitionStrategy::BabaEmpirical,
        AcquisitionStrategy::BabaAnalytic,
    ];

    /// Stable kebab-case identifier used in CLI flags and CSV columns.
    pub fn id(&self) -> &'static str {
        match self {
            AcquisitionStrategy::Random => "random",
            AcquisitionStrategy::BaldEmpirical => "bald-empirical",
            AcquisitionStrategy::BaldAnalytic => "bald-analytic",
            AcquisitionStrategy::BabaEmpirical => "baba-empirical",
            AcquisitionStrategy::BabaAnalytic => "baba-analytic",
        }
    }

    /// Whether scoring needs a Dirichlet fit (and therefore M >= 2 samples).
    /// Both BABA flavors do: their denominator term is defined on the
    /// fitted concentrations.
    pub fn needs_estimation(&self) -> bool {
        !matches!(
            self,
            AcquisitionStrategy::Random | AcquisitionStrategy::BaldEmpirical
        )
    }
}

impl fmt::Display for AcquisitionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AcquisitionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AcquisitionStrategy::ALL
            .iter()
            .find(|k| k.id() == s)
            .copied()
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown strategy {s:?}; expected one of random, bald-empirical, \
                     bald-analytic, baba-empirical, baba-analytic"
                ))
            })
    }
}

/// Active-learning run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ALConfig {
    /// Items acquired per iteration.
    pub k: usize,
    /// Total labeling budget, reached exactly at the end of a run.
    pub k_tot: usize,
    /// MC-dropout samples per pool item when scoring.
    pub m: usize,
    /// Size of the seeded random initial labeled set.
    pub initial_size: usize,
    /// One full independent run per seed.
    pub seeds: Vec<u64>,
    pub model: ModelConfig,
    pub estimation: EstimationConfig,
    /// Collect per-item scores for every iteration in the result.
    pub dump_scores: bool,
    /// Record measured wall time per iteration; off gives `wall_time_s = 0`
    /// and therefore byte-identical reruns.
    pub measure_time: bool,
}

impl Default for ALConfig {
    fn default() -> Self {
        ALConfig {
            k: 10,
            k_tot: 60,
            m: 50,
            initial_size: 10,
            seeds: vec![0, 1, 2],
            model: ModelConfig::default(),
            estimation: EstimationConfig::default(),
            dump_scores: false,
            measure_time: false,
        }
    }
}

impl ALConfig {
    /// Checks the budget arithmetic and strategy requirements against a
    /// given pool size. [`run_active_learning`] calls this itself; it is
    /// public so front ends can reject a bad configuration before doing
    /// any work.
    pub fn validate(&self, strategy: AcquisitionStrategy, pool_size: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Domain("ALConfig: k must be >= 1".into()));
        }
        if self.initial_size == 0 {
            return Err(Error::Domain("ALConfig: initial_size must be >= 1".into()));
        }
        if self.k_tot < self.initial_size + self.k {
            return Err(Error::Domain(format!(
                "ALConfig: k_tot = {} smaller than initial_size + k = {}",
                self.k_tot,
                self.initial_size + self.k
            )));
        }
        if (self.k_tot - self.initial_size) % self.k != 0 {
            return Err(Error::Domain(format!(
                "ALConfig: budget k_tot - initial_size = {} is not a multiple of k = {}, \
                 so the budget cannot be met exactly",
                self.k_tot - self.initial_size,
                self.k
            )));
        }
        let min_m = if strategy.needs_estimation() { 2 } else { 1 };
        if self.m < min_m {
            return Err(Error::Domain(format!(
                "ALConfig: m = {} too small for strategy {strategy} (needs >= {min_m})",
                self.m
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::Domain("ALConfig: no seeds".into()));
        }
        if pool_size < self.k_tot {
            return Err(Error::Shape(format!(
                "ALConfig: dataset holds {pool_size} items, budget k_tot = {} needs more",
                self.k_tot
            )));
        }
        Ok(())
    }

    /// Number of acquisition iterations implied by the budget.
    pub fn iterations(&self) -> usize {
        (self.k_tot - self.initial_size) / self.k
    }
}

/// One pool item's score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredItem {
    /// Position in the pool slice given to [`score_pool`].
    pub index: usize,
    pub score: f64,
    /// True when an analytic score fell back to its empirical counterpart
    /// because the Dirichlet fit failed.
    pub fallback: bool,
}

fn score_one(
    model: &TrainedModel,
    x: &FeatureVector,
    strategy: AcquisitionStrategy,
    m: usize,
    item_seed: u64,
    estimation: &EstimationConfig,
) -> Result<(f64, bool)> {
    if strategy == AcquisitionStrategy::Random {
        let mut rng = ChaCha8Rng::seed_from_u64(item_seed);
        return Ok((rng.gen::<f64>(), false));
    }
    let batch = model.predict_mc(x, m, item_seed)?;
    let empirical = empirical_bald(&batch);
    if strategy == AcquisitionStrategy::BaldEmpirical {
        return Ok((empirical, false));
    }
    // Analytic path: fit a Dirichlet, derive the closed-form quantities.
    // Any failure in the fit degrades this item to its empirical score.
    let fitted = fixed_point_estimate(&batch, estimation)
        .and_then(|fit| {
            let mi = analytic_mutual_information(&fit.params)?;
            let mj = mjent(&fit.params)?;
            Ok((mi, mj))
        });
    let (score, fallback) = match (strategy, fitted) {
        (AcquisitionStrategy::BaldAnalytic, Ok((mi, _))) => (mi, false),
        (AcquisitionStrategy::BabaAnalytic, Ok((mi, mj))) => (baba_ratio(mi, mj), false),
        (AcquisitionStrategy::BabaEmpirical, Ok((_, mj))) => {
            (baba_ratio(empirical, mj), false)
        }
        (_, Err(_)) => (empirical, true),
        (AcquisitionStrategy::Random | AcquisitionStrategy::BaldEmpirical, _) => {
            unreachable!("handled above")
        }
    };
    if !score.is_finite() {
        return Err(Error::NonFinite(format!(
            "score_pool: {strategy} produced {score}"
        )));
    }
    Ok((score, fallback))
}

/// Score every pool item under the strategy. Deterministic given the seed
/// (each item uses its own derived seed) and independent of thread count;
/// output order matches pool order.
pub fn score_pool(
    model: &TrainedModel,
    pool: &[FeatureVector],
    strategy: AcquisitionStrategy,
    m: usize,
    seed: u64,
    estimation: &EstimationConfig,
) -> Result<Vec<ScoredItem>> {
    if pool.is_empty() {
        return Err(Error::Shape("score_pool: empty pool".into()));
    }
    pool.par_iter()
        .enumerate()
        .map(|(index, x)| {
            let item_seed = derive_seed(seed, 1, index as u64);
            let (score, fallback) = score_one(model, x, strategy, m, item_seed, estimation)?;
            Ok(ScoredItem {
                index,
                score,
                fallback,
            })
        })
        .collect()
}

/// Indices of the `k` highest scores, ties broken toward the smaller pool
/// index, returned sorted by pool index.
pub fn select_top_k(scores: &[ScoredItem], k: usize) -> Result<Vec<usize>> {
    if k > scores.len() {
        return Err(Error::Shape(format!(
            "select_top_k: k = {k} exceeds pool size {}",
            scores.len()
        )));
    }
    let mut order: Vec<&ScoredItem> = scores.iter().collect();
    order.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite by construction")
            .then(a.index.cmp(&b.index))
    });
    let mut chosen: Vec<usize> = order[..k].iter().map(|s| s.index).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Selections of one seeded run: `iterations[t]` holds the dataset-level
/// indices acquired at iteration `t + 1`, each of size K, disjoint across
/// iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionHistory {
    pub seed: u64,
    pub iterations: Vec<Vec<usize>>,
}

/// Where and why a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAbort {
    pub seed: u64,
    pub iteration: usize,
    pub message: String,
    /// Process exit code of the underlying error, for callers that
    /// surface the abort (see [`crate::Error::exit_code`]).
    pub exit_code: i32,
}

/// Everything produced by [`run_active_learning`].
#[derive(Debug, Clone, PartialEq)]
pub struct ALRunResult {
    /// One record per (seed, iteration), including iteration 0.
    pub curves: Vec<LearningCurveRecord>,
    /// One history per seed, in seed order.
    pub selection_history: Vec<SelectionHistory>,
    /// Per-item scores for every scored iteration (empty unless
    /// `dump_scores`); `pool_index` is the dataset-level index.
    pub score_dumps: Vec<ScoreDumpRecord>,
    /// Items whose analytic score fell back to empirical, summed over the
    /// whole run.
    pub fallback_count: usize,
    /// Set when the run stopped early; records up to the failure point are
    /// kept.
    pub aborted: Option<RunAbort>,
}

/// Seeded draw of `n` distinct indices from `0..len`, ascending.
fn draw_initial(len: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..len).collect();
    for i in 0..n {
        let j = rng.gen_range(i..len);
        indices.swap(i, j);
    }
    let mut chosen = indices[..n].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Run the full loop for every seed in the config: seeded initial labeled
/// set, then repeatedly retrain from scratch, score the remaining pool,
/// and acquire the top K, until the labeled count reaches `k_tot`. Test
/// accuracy is recorded after every retrain (iteration 0 is the initial
/// set). Training or scoring failures stop the run; everything recorded up
/// to that point is returned with `aborted` set.
pub fn run_active_learning(
    dataset: &LabeledDataset,
    test_set: &LabeledDataset,
    config: &ALConfig,
    strategy: AcquisitionStrategy,
) -> Result<ALRunResult> {
    config.validate(strategy, dataset.len())?;
    if dataset.feature_dim() != test_set.feature_dim() {
        return Err(Error::Shape(format!(
            "run_active_learning: train feature dim {} vs test {}",
            dataset.feature_dim(),
            test_set.feature_dim()
        )));
    }
    if dataset.class_count() != test_set.class_count() {
        return Err(Error::Shape(format!(
            "run_active_learning: train class count {} vs test {}",
            dataset.class_count(),
            test_set.class_count()
        )));
    }

    let mut result = ALRunResult {
        curves: Vec::new(),
        selection_history: Vec::new(),
        score_dumps: Vec::new(),
        fallback_count: 0,
        aborted: None,
    };

    'seeds: for &run_seed in &config.seeds {
        let mut labeled = draw_initial(dataset.len(), config.initial_size, derive_seed(run_seed, 3, 0));
        let mut unlabeled: Vec<usize> = {
            let taken: std::collections::HashSet<usize> = labeled.iter().copied().collect();
            (0..dataset.len()).filter(|i| !taken.contains(i)).collect()
        };
        result.selection_history.push(SelectionHistory {
            seed: run_seed,
            iterations: Vec::new(),
        });

        let mut model = None;
        for iteration in 0..=config.iterations() {
            let started = Instant::now();
            if iteration > 0 {
                // score the remaining pool with the previous model, then
                // move the winners into the labeled set
                let pool: Vec<FeatureVector> = unlabeled
                    .iter()
                    .map(|&i| dataset.features()[i].clone())
                    .collect();
                let scores = match score_pool(
                    model.as_ref().expect("trained at iteration 0"),
                    &pool,
                    strategy,
                    config.m,
                    derive_seed(run_seed, 6, iteration as u64),
                    &config.estimation,
                ) {
                    Ok(s) => s,
                    Err(e) => {
                        result.aborted = Some(RunAbort {
                            seed: run_seed,
                            iteration,
                            message: e.to_string(),
                            exit_code: e.exit_code(),
                        });
                        break 'seeds;
                    }
                };
                result.fallback_count += scores.iter().filter(|s| s.fallback).count();
                if config.dump_scores {
                    result.score_dumps.extend(scores.iter().map(|s| ScoreDumpRecord {
                        strategy: strategy.id().into(),
                        seed: run_seed,
                        iteration,
                        pool_index: unlabeled[s.index],
                        score: s.score,
                        fallback: s.fallback,
                    }));
                }
                let chosen_pool = select_top_k(&scores, config.k)?;
                let chosen: Vec<usize> = chosen_pool.iter().map(|&i| unlabeled[i]).collect();
                let taken: std::collections::HashSet<usize> = chosen.iter().copied().collect();
                unlabeled.retain(|i| !taken.contains(i));
                labeled.extend(&chosen);
                labeled.sort_unstable();
                result
                    .selection_history
                    .last_mut()
                    .expect("pushed above")
                    .iterations
                    .push(chosen);
            }

            let train_config = ModelConfig {
                seed: derive_seed(run_seed, 4, iteration as u64),
                ..config.model.clone()
            };
            let trained = match train(&dataset.select(&labeled)?, &train_config) {
                Ok(m) => m,
                Err(e) => {
                    result.aborted = Some(RunAbort {
                        seed: run_seed,
                        iteration,
                        message: e.to_string(),
                        exit_code: e.exit_code(),
                    });
                    break 'seeds;
                }
            };
            let accuracy = match trained.evaluate(
                test_set,
                config.m,
                derive_seed(run_seed, 5, iteration as u64),
            ) {
                Ok(a) => a,
                Err(e) => {
                    result.aborted = Some(RunAbort {
                        seed: run_seed,
                        iteration,
                        message: e.to_string(),
                        exit_code: e.exit_code(),
                    });
                    break 'seeds;
                }
            };
            model = Some(trained);
            result.curves.push(LearningCurveRecord {
                strategy: strategy.id().into(),
                seed: run_seed,
                iteration,
                labeled_count: labeled.len(),
                test_accuracy: accuracy,
                wall_time_s: if config.measure_time {
                    started.elapsed().as_secs_f64()
                } else {
                    0.0
                },
            });
        }
    }
    Ok(result)
}

/// Spearman rank correlation between two score vectors (average ranks for
/// ties). Needs at least 2 points and finite values.
pub fn spearman_rank_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "spearman: {} vs {} values",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Shape("spearman: need at least 2 points".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("spearman: non-finite score".into()));
    }
    let ranks = |v: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap());
        let mut ranks = vec![0.0; v.len()];
        let mut pos = 0;
        while pos < order.len() {
            let mut end = pos + 1;
            while end < order.len() && v[order[end]] == v[order[pos]] {
                end += 1;
            }
            // average rank over the tie group, 1-based
            let rank = (pos + 1 + end) as f64 / 2.0;
            for &idx in &order[pos..end] {
                ranks[idx] = rank;
            }
            pos = end;
        }
        ranks
    };
    let ra = ranks(a);
    let rb = ranks(b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        var_a += (x - mean).powi(2);
        var_b += (y - mean).powi(2);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::Domain(
            "spearman: a score vector is constant, correlation undefined".into(),
        ));
    }
    Ok(cov / (var_a * var_b).sqrt())
}
