//! Fixed-point estimation of Dirichlet concentrations, and why the choice
//! of moment statistic matters.
//!
//! The update alpha_k <- invdigamma(digamma(sum alpha) + s_k) admits two
//! natural statistics s_k:
//!
//! - `mean-of-logs`: s_k = mean of ln p_k. This is the maximum-likelihood
//!   statistic; the iteration converges and recovers the truth.
//! - `log-of-mean`: s_k = ln(mean of p_k). The iteration then has no finite
//!   fixed point: each sweep inflates the total concentration by a constant
//!   (C - 1) / 2 while the *direction* alpha / sum(alpha) still converges —
//!   to the sample mean. The `converged` flag reports this honestly.
//!
//! The inverse digamma also matters: the fast two-branch closed form
//! carries a systematic few-percent bias, removed by Newton polish
//! (`refine_inverse_digamma`).
//!
//! Run with: cargo run --example fit_dirichlet

use dirmi::dirichlet::DirichletParams;
use dirmi::estimation::{fixed_point_estimate, EstimationConfig, StatisticMode};

fn main() -> dirmi::Result<()> {
    let truth = vec![2.0, 3.0, 5.0];
    let params = DirichletParams::new(truth.clone())?;
    let batch = params.sample(100_000, 42)?;
    println!("truth: alpha = {truth:?}, 100k draws\n");

    // Maximum-likelihood statistic, polished inverse: full recovery.
    let config = EstimationConfig {
        statistic_mode: StatisticMode::MeanOfLogs,
        refine_inverse_digamma: true,
        ..EstimationConfig::default()
    };
    let fit = fixed_point_estimate(&batch, &config)?;
    println!(
        "mean-of-logs + refine: alpha = {:?}\n  converged = {} after {} sweeps",
        rounded(fit.params.alpha()),
        fit.converged,
        fit.iterations
    );
    for (got, want) in fit.params.alpha().iter().zip(&truth) {
        assert!((got - want).abs() / want < 0.05, "recovery off: {got} vs {want}");
    }

    // Same statistic through the raw two-branch inverse: converges with a
    // visible systematic bias.
    let config = EstimationConfig {
        statistic_mode: StatisticMode::MeanOfLogs,
        refine_inverse_digamma: false,
        ..EstimationConfig::default()
    };
    let fit = fixed_point_estimate(&batch, &config)?;
    println!(
        "mean-of-logs, raw inverse: alpha = {:?} (biased high)\n  converged = {} after {} sweeps",
        rounded(fit.params.alpha()),
        fit.converged,
        fit.iterations
    );

    // log-of-mean: the magnitude drifts forever, the direction is right.
    let config = EstimationConfig {
        statistic_mode: StatisticMode::LogOfMean,
        refine_inverse_digamma: true,
        max_iterations: 1000,
        ..EstimationConfig::default()
    };
    let fit = fixed_point_estimate(&batch, &config)?;
    let total: f64 = fit.params.alpha().iter().sum();
    let direction: Vec<f64> = fit.params.alpha().iter().map(|a| a / total).collect();
    let sample_mean = batch.mean();
    println!(
        "log-of-mean: converged = {} after {} sweeps (never converges)",
        fit.converged, fit.iterations
    );
    println!(
        "  total concentration inflated to {total:.1} and still growing ~1 per sweep"
    );
    println!("  direction    = {:?}", rounded(&direction));
    println!("  sample mean  = {:?}", rounded(&sample_mean));
    let worst = direction
        .iter()
        .zip(&sample_mean)
        .map(|(d, m)| (d - m).abs())
        .fold(0.0f64, f64::max);
    assert!(worst < 0.01, "direction should track the sample mean, off by {worst}");
    Ok(())
}

fn rounded(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| (v * 1000.0).round() / 1000.0).collect()
}
