//! Dirichlet distribution over the probability simplex: validated parameter
//! and sample types, log density, differential entropy, first cross-moments
//! of P_i log P_j, and seeded sampling.
//!
//! Parameters allow exact zeros. A zero component pins that coordinate to 0
//! in every sample (the distribution lives on the reduced face of the
//! simplex); operations that need a full-support density reject zeros with a
//! domain error.

use crate::error::{Error, Result};
use crate::specfun::{digamma, log_beta};
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

/// Sum tolerance for accepting a vector as a simplex point.
const SIMPLEX_SUM_TOL: f64 = 1e-9;

/// Concentration parameters of a Dirichlet distribution.
///
/// Components must be finite and non-negative, with at least two components
/// and at least one strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::Shape(format!(
                "DirichletParams: need at least 2 components, got {}",
                alpha.len()
            )));
        }
        for (k, &a) in alpha.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::Domain(format!(
                    "DirichletParams: alpha[{k}] = {a} must be finite and >= 0"
                )));
            }
        }
        if alpha.iter().all(|&a| a == 0.0) {
            return Err(Error::Domain(
                "DirichletParams: at least one alpha_k must be positive".into(),
            ));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Number of components (classes), including zero components.
    pub fn class_count(&self) -> usize {
        self.alpha.len()
    }

    /// Total concentration, sum of all components.
    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Mean vector alpha_k / total. Zero components have mean 0.
    pub fn mean(&self) -> Vec<f64> {
        let total = self.total();
        self.alpha.iter().map(|a| a / total).collect()
    }

    fn require_positive(&self, op: &str) -> Result<()> {
        if let Some((k, &a)) = self.alpha.iter().enumerate().find(|(_, &a)| a == 0.0) {
            return Err(Error::Domain(format!(
                "{op}: alpha[{k}] = {a}, all components must be strictly positive"
            )));
        }
        Ok(())
    }

    /// ln B(alpha), the log normalizing constant of the density.
    pub fn log_normalizer(&self) -> Result<f64> {
        self.require_positive("log_normalizer")?;
        log_beta(&self.alpha)
    }

    /// Log density at an interior simplex point:
    /// -ln B(alpha) + sum (alpha_k - 1) ln x_k.
    pub fn log_density(&self, x: &SimplexPoint) -> Result<f64> {
        self.require_positive("log_density")?;
        if x.dim() != self.class_count() {
            return Err(Error::Shape(format!(
                "log_density: point has {} coordinates, parameters have {}",
                x.dim(),
                self.class_count()
            )));
        }
        let mut acc = -log_beta(&self.alpha)?;
        for (k, (&a, &xi)) in self.alpha.iter().zip(x.probs()).enumerate() {
            if xi <= 0.0 {
                return Err(Error::Domain(format!(
                    "log_density: x[{k}] = {xi}, point must be interior"
                )));
            }
            acc += (a - 1.0) * xi.ln();
        }
        Ok(acc)
    }

    /// Differential entropy in nats:
    /// ln B(alpha) + (S - C) digamma(S) - sum (alpha_k - 1) digamma(alpha_k),
    /// with S the total concentration and C the component count.
    pub fn differential_entropy(&self) -> Result<f64> {
        self.require_positive("differential_entropy")?;
        let total = self.total();
        let c = self.class_count() as f64;
        let mut acc = log_beta(&self.alpha)? + (total - c) * digamma(total)?;
        for &a in &self.alpha {
            acc -= (a - 1.0) * digamma(a)?;
        }
        Ok(acc)
    }

    /// Closed-form first cross-moment E[P_i ln P_j] (zero-based indices):
    ///
    /// - i == j: (alpha_i / S) * (digamma(alpha_i + 1) - digamma(S + 1))
    /// - i != j: (alpha_i / S) * (digamma(alpha_j)     - digamma(S + 1))
    ///
    /// Both are the Beta-ratio identity B(alpha + e_i) / B(alpha) =
    /// alpha_i / S applied to the tilted expectation of ln P_j.
    pub fn cross_moment(&self, i: usize, j: usize) -> Result<f64> {
        let c = self.class_count();
        if i >= c || j >= c {
            return Err(Error::Shape(format!(
                "cross_moment: index ({i}, {j}) out of range for {c} classes"
            )));
        }
        self.require_positive("cross_moment")?;
        let total = self.total();
        let m_i = self.alpha[i] / total;
        let inner = if i == j {
            digamma(self.alpha[i] + 1.0)?
        } else {
            digamma(self.alpha[j])?
        };
        Ok(m_i * (inner - digamma(total + 1.0)?))
    }

    /// Draw `n` points as normalized independent Gamma(alpha_k, 1) variates
    /// (rejection sampling for shape >= 1, boost transform below), from a
    /// counter-seeded stream: the same seed always yields the same batch.
    ///
    /// Zero components are skipped and stay exactly 0. Very small shapes can
    /// underflow individual coordinates to exact 0; downstream estimators
    /// use the 0 ln 0 = 0 convention, so this is harmless.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        if n == 0 {
            return Err(Error::Shape("sample: need n >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gammas: Vec<Option<Gamma<f64>>> = self
            .alpha
            .iter()
            .map(|&a| {
                if a == 0.0 {
                    Ok(None)
                } else {
                    Gamma::new(a, 1.0).map(Some).map_err(|e| {
                        Error::Domain(format!("sample: invalid gamma shape {a}: {e}"))
                    })
                }
            })
            .collect::<Result<_>>()?;
        let mut points = Vec::with_capacity(n);
        let mut raw = vec![0.0; self.class_count()];
        for _ in 0..n {
            // With every shape tiny, all coordinates can underflow at once;
            // retry a few times before giving up.
            let mut sum = 0.0;
            for _attempt in 0..4 {
                sum = 0.0;
                for (slot, g) in raw.iter_mut().zip(&gammas) {
                    *slot = match g {
                        Some(g) => g.sample(&mut rng),
                        None => 0.0,
                    };
                    sum += *slot;
                }
                if sum > 0.0 {
                    break;
                }
            }
            if sum <= 0.0 {
                return Err(Error::NonFinite(
                    "sample: all gamma variates underflowed to zero".into(),
                ));
            }
            points.push(SimplexPoint::new(raw.iter().map(|g| g / sum).collect())?);
        }
        SampleBatch::new(points)
    }
}

/// A point on the probability simplex: non-negative coordinates summing to 1
/// within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    p: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::Shape(format!(
                "SimplexPoint: need at least 2 coordinates, got {}",
                p.len()
            )));
        }
        let mut sum = 0.0;
        for (k, &x) in p.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::Domain(format!(
                    "SimplexPoint: p[{k}] = {x} must be finite and >= 0"
                )));
            }
            sum += x;
        }
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::Domain(format!(
                "SimplexPoint: coordinates sum to {sum}, expected 1 within {SIMPLEX_SUM_TOL:e}"
            )));
        }
        Ok(Self { p })
    }

    /// Accept any non-negative vector with positive sum and rescale it onto
    /// the simplex. Used where inputs carry rounding noise beyond the strict
    /// constructor tolerance (e.g. probabilities parsed from text).
    pub fn normalized(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::Shape(format!(
                "SimplexPoint: need at least 2 coordinates, got {}",
                p.len()
            )));
        }
        let mut sum = 0.0;
        for (k, &x) in p.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::Domain(format!(
                    "SimplexPoint: p[{k}] = {x} must be finite and >= 0"
                )));
            }
            sum += x;
        }
        if sum <= 0.0 {
            return Err(Error::Domain(
                "SimplexPoint: cannot normalize an all-zero vector".into(),
            ));
        }
        Self::new(p.into_iter().map(|x| x / sum).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }
}

/// A non-empty batch of simplex points of uniform dimension. This is the
/// exchange type between the MC-dropout model, the empirical uncertainty
/// estimators, and the Dirichlet parameter fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    points: Vec<SimplexPoint>,
}

impl SampleBatch {
    pub fn new(points: Vec<SimplexPoint>) -> Result<Self> {
        let dim = match points.first() {
            Some(p) => p.dim(),
            None => return Err(Error::Shape("SampleBatch: need at least one point".into())),
        };
        if let Some(bad) = points.iter().position(|p| p.dim() != dim) {
            return Err(Error::Shape(format!(
                "SampleBatch: point {bad} has dimension {}, expected {dim}",
                points[bad].dim()
            )));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty batches
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SimplexPoint> {
        self.points.iter()
    }

    /// Per-coordinate arithmetic mean; itself a point on the simplex.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        for p in &self.points {
            for (slot, &x) in acc.iter_mut().zip(p.probs()) {
                *slot += x;
            }
        }
        let n = self.len() as f64;
        for slot in &mut acc {
            *slot /= n;
        }
        acc
    }
}
