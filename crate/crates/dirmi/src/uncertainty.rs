//! Predictive-uncertainty decomposition for a Dirichlet label posterior.
//!
//! With class probabilities P ~ Dirichlet(alpha) and label Y | P ~
//! Categorical(P), the predictive entropy H(Y) splits into mutual
//! information I(Y; P) (epistemic uncertainty, the BALD score) plus the
//! expected conditional entropy E[H(Y | P)] (aleatoric uncertainty). All
//! three, the joint entropy of (P, Y), and the marginal joint entropy
//! approximation MJEnt have closed forms in digamma functions, so no
//! posterior sampling is needed once alpha is known. The Monte Carlo
//! estimators they replace are provided alongside for comparison.
//!
//! All entropies are in nats.
//!
//! Components of alpha below [`DEGENERACY_THRESHOLD`] are treated as exactly
//! zero and dropped before evaluation, so measures on (0, a_2, ..., a_C)
//! agree exactly with measures on (a_2, ..., a_C). If only one component
//! survives, the label is deterministic and every measure is 0.

use crate::dirichlet::{DirichletParams, SampleBatch};
use crate::error::{Error, Result};
use crate::specfun::{digamma, log_beta};

/// Alpha components below this are treated as exactly zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

/// Magnitude floor applied to ratio denominators in [`baba`].
const DENOMINATOR_FLOOR: f64 = 1e-12;

/// All closed-form measures of one Dirichlet posterior, as produced by
/// [`UncertaintyReport::analytic`].
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyReport {
    /// H(Y), entropy of the posterior mean prediction.
    pub predictive_entropy: f64,
    /// I(Y; P), the epistemic part (BALD acquisition score).
    pub mutual_information: f64,
    /// E[H(Y | P)], the aleatoric remainder.
    pub aleatoric: f64,
    /// Joint differential entropy of (P, Y).
    pub joint_entropy: f64,
    /// Marginal joint entropy: per-class Beta entropies mixed by the mean.
    pub mjent: f64,
    /// BALD/MJEnt ratio score (MJEnt/BALD when MJEnt is negative).
    pub baba: f64,
}

impl UncertaintyReport {
    pub fn analytic(params: &DirichletParams) -> Result<Self> {
        Ok(UncertaintyReport {
            predictive_entropy: predictive_entropy(params)?,
            mutual_information: analytic_mutual_information(params)?,
            aleatoric: analytic_aleatoric(params)?,
            joint_entropy: janossy_joint_entropy(params)?,
            mjent: mjent(params)?,
            baba: baba(params)?,
        })
    }
}

/// Strictly positive components after the tiny-alpha guard. Errors if
/// nothing survives; a single survivor means a deterministic label.
fn reduced(params: &DirichletParams) -> Result<Vec<f64>> {
    let kept: Vec<f64> = params
        .alpha()
        .iter()
        .copied()
        .filter(|&a| a >= DEGENERACY_THRESHOLD)
        .collect();
    if kept.is_empty() {
        return Err(Error::Domain(format!(
            "uncertainty: every alpha component is below {DEGENERACY_THRESHOLD:e}"
        )));
    }
    Ok(kept)
}

/// Shannon entropy of a probability vector in nats, with 0 ln 0 = 0.
fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// The two digamma sums shared by the mutual information, the aleatoric
/// term, and the joint entropy, evaluated on reduced alpha:
///
///   base = (S - C) psi(S) - sum (a_i - 1) psi(a_i)
///   tilt = sum_i sum_{j != i} (a_j - 1) m_i (psi(a_j) - psi(S + 1))
///        + sum_i a_i m_i (psi(a_i + 1) - psi(S + 1))
///
/// The double sum collapses to a single pass because the inner summand is
/// independent of i: sum_{i != j} m_i = 1 - m_j.
fn digamma_sums(alpha: &[f64]) -> Result<(f64, f64)> {
    let total: f64 = alpha.iter().sum();
    let c = alpha.len() as f64;
    let psi_total = digamma(total)?;
    let psi_total1 = digamma(total + 1.0)?;
    let mut weighted = 0.0;
    let mut tilt = 0.0;
    for &a in alpha {
        let m = a / total;
        let psi_a = digamma(a)?;
        weighted += (a - 1.0) * psi_a;
        tilt += (a - 1.0) * (1.0 - m) * (psi_a - psi_total1);
        tilt += a * m * (digamma(a + 1.0)? - psi_total1);
    }
    Ok(((total - c) * psi_total - weighted, tilt))
}

/// H(Y) = -sum m_i ln m_i with m = alpha / sum(alpha), in nats.
pub fn predictive_entropy(params: &DirichletParams) -> Result<f64> {
    let alpha = reduced(params)?;
    let total: f64 = alpha.iter().sum();
    Ok(entropy(&alpha.iter().map(|a| a / total).collect::<Vec<_>>()))
}

/// Closed-form I(Y; P), the BALD score of the posterior:
///
///   (S - C) psi(S) - sum (a_i - 1) psi(a_i) + H(Y)
///   + sum_i sum_{j != i} (a_j - 1) m_i (psi(a_j) - psi(S + 1))
///   + sum_i a_i m_i (psi(a_i + 1) - psi(S + 1))
pub fn analytic_mutual_information(params: &DirichletParams) -> Result<f64> {
    let alpha = reduced(params)?;
    if alpha.len() == 1 {
        return Ok(0.0);
    }
    let total: f64 = alpha.iter().sum();
    let h = entropy(&alpha.iter().map(|a| a / total).collect::<Vec<_>>());
    let (base, tilt) = digamma_sums(&alpha)?;
    Ok(base + h + tilt)
}

/// Closed-form aleatoric uncertainty E[H(Y | P)], the sign-flipped
/// complement of the mutual information without the H(Y) term. Identical to
/// -sum_i E[P_i ln P_i], and satisfies
/// predictive_entropy = mutual_information + aleatoric.
pub fn analytic_aleatoric(params: &DirichletParams) -> Result<f64> {
    let alpha = reduced(params)?;
    if alpha.len() == 1 {
        return Ok(0.0);
    }
    let (base, tilt) = digamma_sums(&alpha)?;
    Ok(-base - tilt)
}

/// Joint differential entropy of (P, Y):
///
///   ln B(alpha)
///   - sum_i sum_{j != i} (a_j - 1) m_i (psi(a_j) - psi(S + 1))
///   - sum_i a_i m_i (psi(a_i + 1) - psi(S + 1))
///
/// Equivalently the mean-weighted mixture of tilted Dirichlet entropies
/// sum m_i (h(Dirichlet(alpha + e_i)) - ln m_i).
pub fn janossy_joint_entropy(params: &DirichletParams) -> Result<f64> {
    let alpha = reduced(params)?;
    if alpha.len() == 1 {
        return Ok(0.0);
    }
    let (_, tilt) = digamma_sums(&alpha)?;
    Ok(log_beta(&alpha)? - tilt)
}

/// Marginal joint entropy: each class contributes the differential entropy
/// of its one-vs-rest Beta(a_i + 1, S - a_i) weighted by the mean,
///
///   MJEnt = sum m_i (h(Beta(a_i + 1, S - a_i)) - ln m_i).
///
/// For two classes this equals the joint entropy exactly; beyond two it is
/// the marginal approximation.
pub fn mjent(params: &DirichletParams) -> Result<f64> {
    let alpha = reduced(params)?;
    if alpha.len() == 1 {
        return Ok(0.0);
    }
    let total: f64 = alpha.iter().sum();
    let mut acc = 0.0;
    for &a in &alpha {
        let m = a / total;
        let beta = DirichletParams::new(vec![a + 1.0, total - a])?;
        acc += m * (beta.differential_entropy()? - m.ln());
    }
    Ok(acc)
}

fn floor_denominator(d: f64) -> f64 {
    if d.abs() >= DENOMINATOR_FLOOR {
        d
    } else if d < 0.0 {
        -DENOMINATOR_FLOOR
    } else {
        DENOMINATOR_FLOOR
    }
}

/// Ratio acquisition score balancing epistemic mass against the marginal
/// joint entropy: BALD/MJEnt when MJEnt >= 0, MJEnt/BALD otherwise.
/// Denominators within 1e-12 of zero are floored in magnitude.
pub fn baba(params: &DirichletParams) -> Result<f64> {
    let mi = analytic_mutual_information(params)?;
    let mj = mjent(params)?;
    Ok(baba_ratio(mi, mj))
}

/// The sign-dependent ratio rule behind [`baba`], reusable with any flavor
/// of the epistemic score: `bald / mjent` when the joint term is
/// nonnegative, `mjent / bald` otherwise, denominators floored at
/// +-1e-12 to keep the score finite.
pub fn baba_ratio(bald: f64, mjent: f64) -> f64 {
    if mjent >= 0.0 {
        bald / floor_denominator(mjent)
    } else {
        mjent / floor_denominator(bald)
    }
}

/// Monte Carlo BALD: entropy of the mean prediction minus the mean of the
/// per-sample entropies,
///
///   H(mean p_m) - (1/M) sum_m H(p_m).
///
/// The true value is nonnegative (Jensen), so results within rounding noise
/// of zero are snapped to exactly 0; a batch of identical samples (e.g. a
/// dropout-free model) then scores exactly 0 rather than +-1e-16.
pub fn empirical_bald(batch: &SampleBatch) -> f64 {
    let score = empirical_predictive_entropy(batch) - empirical_aleatoric(batch);
    if score.abs() <= 1e-12 {
        0.0
    } else {
        score
    }
}

/// Monte Carlo aleatoric uncertainty: mean of the per-sample entropies.
pub fn empirical_aleatoric(batch: &SampleBatch) -> f64 {
    batch.iter().map(|p| entropy(p.probs())).sum::<f64>() / batch.len() as f64
}

/// Entropy of the mean prediction of a sample batch.
pub fn empirical_predictive_entropy(batch: &SampleBatch) -> f64 {
    entropy(&batch.mean())
}

/// Seeded block-bootstrap standard error of [`empirical_bald`].
///
/// The batch is cut into at most `blocks` contiguous slices; each slice
/// keeps only its probability-vector sum, entropy sum, and size. A
/// replicate redraws `blocks` slices with replacement and recombines the
/// sums into a full score, so the cost after the single O(M C) pass is
/// O(replicates x blocks x C) regardless of batch size. The returned
/// value is the sample standard deviation (n - 1) of the replicate
/// scores.
pub fn bald_block_bootstrap_se(
    batch: &SampleBatch,
    blocks: usize,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    use rand::{Rng, SeedableRng};

    if batch.is_empty() {
        return Err(Error::Domain(
            "bald_block_bootstrap_se: empty batch".into(),
        ));
    }
    if blocks == 0 {
        return Err(Error::Domain(
            "bald_block_bootstrap_se: need at least 1 block".into(),
        ));
    }
    if replicates < 2 {
        return Err(Error::Domain(
            "bald_block_bootstrap_se: need at least 2 replicates".into(),
        ));
    }
    let m = batch.len();
    let c = batch.dim();
    let blocks = blocks.min(m);

    let mut sum_p = vec![0.0f64; blocks * c];
    let mut sum_h = vec![0.0f64; blocks];
    let mut sizes = vec![0usize; blocks];
    for (i, point) in batch.iter().enumerate() {
        // balanced contiguous assignment: block b holds indices with
        // floor(i * blocks / m) == b
        let b = i * blocks / m;
        for (k, &p) in point.probs().iter().enumerate() {
            sum_p[b * c + k] += p;
        }
        sum_h[b] += entropy(point.probs());
        sizes[b] += 1;
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut scores = Vec::with_capacity(replicates);
    let mut total_p = vec![0.0f64; c];
    for _ in 0..replicates {
        total_p.iter_mut().for_each(|v| *v = 0.0);
        let mut total_h = 0.0;
        let mut total_n = 0usize;
        for _ in 0..blocks {
            let b = rng.gen_range(0..blocks);
            for k in 0..c {
                total_p[k] += sum_p[b * c + k];
            }
            total_h += sum_h[b];
            total_n += sizes[b];
        }
        let inv = 1.0 / total_n as f64;
        let mean_p: Vec<f64> = total_p.iter().map(|s| s * inv).collect();
        scores.push(entropy(&mean_p) - total_h * inv);
    }

    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
        / (scores.len() - 1) as f64;
    Ok(var.sqrt())
}
