//! Win-probability estimation from game features.
//!
//! The pipeline's first phase turns per-game feature vectors into host-win
//! probabilities: features are scaled to `[0, 1]` with training-set bounds,
//! optionally projected onto enough principal components to keep a
//! configured fraction of the variance, and fed to an L2-regularized
//! logistic regression trained by full-batch gradient descent with
//! backtracking. A fitted model can additionally be calibrated by a sigmoid
//! on its raw scores. Evaluation uses the standard trio — log loss,
//! accuracy, AUC — plus seeded random-split cross-validation and a small
//! ridge-strength grid search.

use crate::error::{Error, Result};
use crate::league::PROB_CLAMP;
use crate::rng;
use rand::seq::SliceRandom;

/// Default number of random held-out draws used by Platt calibration.
pub const DEFAULT_PLATT_SPLITS: usize = 5;

/// Numerically stable logistic function.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `ln(1 + e^z)`.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Aligned feature rows, binary labels (1 = host win), and game ids.
#[derive(Debug, Clone)]
pub struct FeatureDataset {
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
    game_ids: Vec<u32>,
}

impl FeatureDataset {
    /// Validates alignment, uniform width, and finiteness.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<bool>, game_ids: Vec<u32>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::DegenerateData("feature dataset is empty".into()));
        }
        if labels.len() != rows.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        if game_ids.len() != rows.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                got: game_ids.len(),
            });
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(Error::DegenerateData("feature rows have no columns".into()));
        }
        for row in &rows {
            if row.len() != width {
                return Err(Error::Dimension {
                    expected: width,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("features must be finite".into()));
            }
        }
        Ok(FeatureDataset {
            rows,
            labels,
            game_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn game_ids(&self) -> &[u32] {
        &self.game_ids
    }

    /// Rows at `indices`, in order.
    pub fn subset(&self, indices: &[usize]) -> FeatureDataset {
        FeatureDataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            game_ids: indices.iter().map(|&i| self.game_ids[i]).collect(),
        }
    }

    fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y).count();
        (pos, self.labels.len() - pos)
    }
}

/// Training hyper-parameters (the ridge strength is a separate argument).
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Keep the smallest number of principal components explaining at least
    /// this fraction of the training variance; `None` disables projection.
    pub pca_variance: Option<f64>,
    /// Stop when the gradient norm falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            pca_variance: Some(0.90),
            tolerance: 1e-8,
            max_iterations: 10_000,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(f) = self.pca_variance {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!(
                    "pca_variance must lie in (0, 1], got {f}"
                )));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance must be a positive finite number, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// A variance-keeping linear projection fitted on scaled training features.
#[derive(Debug, Clone)]
struct Projection {
    mean: Vec<f64>,
    /// Kept principal directions, one row per component.
    components: Vec<Vec<f64>>,
    explained: f64,
}

/// A fitted win-probability model: feature scaling, optional projection,
/// logistic weights, and optional score calibration.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    /// Per original feature: training-set (min, max). `None` means the
    /// model consumes raw features untouched.
    scaling: Option<Vec<(f64, f64)>>,
    projection: Option<Projection>,
    weights: Vec<f64>,
    intercept: f64,
    /// Calibration `(a, b)`: the final logit is `a * score + b`.
    calibration: Option<(f64, f64)>,
}

impl TrainedModel {
    /// A model that applies `weights` and `intercept` directly to raw
    /// features, with no scaling, projection, or calibration. Useful for
    /// wrapping externally estimated linear scores.
    pub fn linear(weights: Vec<f64>, intercept: f64) -> Self {
        TrainedModel {
            scaling: None,
            projection: None,
            weights,
            intercept,
            calibration: None,
        }
    }

    /// Returns the model with calibration `(a, b)` attached: probabilities
    /// become `sigmoid(a * score + b)`.
    pub fn with_calibration(mut self, a: f64, b: f64) -> Self {
        self.calibration = Some((a, b));
        self
    }

    pub fn calibration(&self) -> Option<(f64, f64)> {
        self.calibration
    }

    /// Number of principal components kept, if projection is active.
    pub fn pca_kept(&self) -> Option<usize> {
        self.projection.as_ref().map(|p| p.components.len())
    }

    /// Fraction of training variance the kept components explain.
    pub fn pca_explained(&self) -> Option<f64> {
        self.projection.as_ref().map(|p| p.explained)
    }

    pub fn n_features(&self) -> usize {
        match &self.scaling {
            Some(s) => s.len(),
            None => self.weights.len(),
        }
    }

    fn scaled(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: features.len(),
            });
        }
        match &self.scaling {
            Some(scaling) => Ok(features
                .iter()
                .zip(scaling)
                .map(|(&x, &(lo, hi))| {
                    if hi > lo {
                        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()),
            None => Ok(features.to_vec()),
        }
    }

    /// Pre-calibration linear score of one feature vector.
    pub fn raw_score(&self, features: &[f64]) -> Result<f64> {
        let u = self.scaled(features)?;
        let score = match &self.projection {
            Some(p) => {
                let mut s = self.intercept;
                for (w, comp) in self.weights.iter().zip(&p.components) {
                    let z: f64 = comp
                        .iter()
                        .zip(&u)
                        .zip(&p.mean)
                        .map(|((c, x), m)| c * (x - m))
                        .sum();
                    s += w * z;
                }
                s
            }
            None => self.intercept + self.weights.iter().zip(&u).map(|(w, x)| w * x).sum::<f64>(),
        };
        Ok(score)
    }

    /// Host-win probability for one feature vector, clamped away from 0/1.
    pub fn predict_proba(&self, features: &[f64]) -> Result<f64> {
        let s = self.raw_score(features)?;
        let z = match self.calibration {
            Some((a, b)) => a * s + b,
            None => s,
        };
        Ok(sigmoid(z).clamp(PROB_CLAMP.0, PROB_CLAMP.1))
    }

    /// Probabilities for every row of `data`.
    pub fn predict_many(&self, data: &FeatureDataset) -> Result<Vec<f64>> {
        data.rows.iter().map(|r| self.predict_proba(r)).collect()
    }

    /// The full pre-sigmoid map collapsed onto the original feature scale:
    /// returns `(coefficients, constant)` such that the model's final logit
    /// is `coefficients . x + constant` (calibration included) for inputs
    /// inside the training box, where scaling does not clamp.
    pub fn raw_affine(&self) -> (Vec<f64>, f64) {
        // Weights pulled back to scaled-feature space.
        let d = self.n_features();
        let (v, mut constant) = match &self.projection {
            Some(p) => {
                let mut v = vec![0.0; d];
                let mut c = self.intercept;
                for (w, comp) in self.weights.iter().zip(&p.components) {
                    for (vi, ci) in v.iter_mut().zip(comp) {
                        *vi += w * ci;
                    }
                    c -= w * comp.iter().zip(&p.mean).map(|(ci, m)| ci * m).sum::<f64>();
                }
                (v, c)
            }
            None => (self.weights.clone(), self.intercept),
        };
        let mut coefficients = vec![0.0; d];
        match &self.scaling {
            Some(scaling) => {
                for ((coef, &(lo, hi)), vi) in coefficients.iter_mut().zip(scaling).zip(&v) {
                    if hi > lo {
                        *coef = vi / (hi - lo);
                        constant -= vi * lo / (hi - lo);
                    }
                }
            }
            None => coefficients.copy_from_slice(&v),
        }
        if let Some((a, b)) = self.calibration {
            for c in &mut coefficients {
                *c *= a;
            }
            constant = a * constant + b;
        }
        (coefficients, constant)
    }
}

/// Mean negative log likelihood of binary `labels` under `probs`.
///
/// Probabilities must be strictly inside `(0, 1)`; clamp model outputs
/// before calling (fitted models already do).
pub fn log_loss(probs: &[f64], labels: &[bool]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: probs.len(),
        });
    }
    if probs.is_empty() {
        return Err(Error::DegenerateData("log loss of an empty sample".into()));
    }
    let mut sum = 0.0;
    for (&p, &y) in probs.iter().zip(labels) {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "probability {p} is outside (0, 1); clamp predictions first"
            )));
        }
        sum -= if y { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(sum / probs.len() as f64)
}

/// Fraction of labels predicted correctly when `probs >= threshold` counts
/// as a predicted win.
pub fn accuracy(probs: &[f64], labels: &[bool], threshold: f64) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: probs.len(),
        });
    }
    if probs.is_empty() {
        return Err(Error::DegenerateData("accuracy of an empty sample".into()));
    }
    let correct = probs
        .iter()
        .zip(labels)
        .filter(|(&p, &y)| (p >= threshold) == y)
        .count();
    Ok(correct as f64 / probs.len() as f64)
}

/// Area under the ROC curve via the rank statistic, ties contributing one
/// half (midranks). Requires both classes to be present.
pub fn auc(probs: &[f64], labels: &[bool]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: probs.len(),
        });
    }
    let pos = labels.iter().filter(|&&y| y).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateData(
            "AUC needs at least one example of each class".into(),
        ));
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]));
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && probs[order[end]] == probs[order[start]] {
            end += 1;
        }
        // 1-based midrank shared by the whole tied run.
        let midrank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            if labels[i] {
                rank_sum_pos += midrank;
            }
        }
        start = end;
    }
    let pos_f = pos as f64;
    Ok((rank_sum_pos - pos_f * (pos_f + 1.0) / 2.0) / (pos_f * neg as f64))
}

/// The ridge-regularized logistic objective on preprocessed rows. The
/// intercept is not penalized.
struct LogisticObjective<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [bool],
    l2: f64,
}

impl LogisticObjective<'_> {
    fn value(&self, weights: &[f64], intercept: f64) -> f64 {
        let mut loss = 0.0;
        for (row, &y) in self.rows.iter().zip(self.labels) {
            let z = intercept + dot(weights, row);
            loss += if y { softplus(-z) } else { softplus(z) };
        }
        loss / self.rows.len() as f64
            + 0.5 * self.l2 * weights.iter().map(|w| w * w).sum::<f64>()
    }

    fn gradient(&self, weights: &[f64], intercept: f64) -> (Vec<f64>, f64) {
        let n = self.rows.len() as f64;
        let mut gw = vec![0.0; weights.len()];
        let mut gb = 0.0;
        for (row, &y) in self.rows.iter().zip(self.labels) {
            let z = intercept + dot(weights, row);
            let residual = sigmoid(z) - f64::from(u8::from(y));
            for (g, x) in gw.iter_mut().zip(row) {
                *g += residual * x;
            }
            gb += residual;
        }
        for (g, w) in gw.iter_mut().zip(weights) {
            *g = *g / n + self.l2 * w;
        }
        (gw, gb / n)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full-batch gradient descent with Armijo backtracking from the origin.
fn minimize(
    objective: &LogisticObjective<'_>,
    dim: usize,
    tolerance: f64,
    max_iterations: usize,
) -> (Vec<f64>, f64) {
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut value = objective.value(&w, b);
    // The step warm-starts from the last accepted value so a small curvature
    // bound is rediscovered in one doubling, not a fresh halving cascade.
    let mut step = 1.0_f64;
    let mut stalls = 0;
    'outer: for _ in 0..max_iterations {
        let (gw, gb) = objective.gradient(&w, b);
        let norm_sq = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        if norm_sq.sqrt() <= tolerance {
            break;
        }
        step = (step * 2.0).min(64.0);
        loop {
            let trial_w: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - step * gi).collect();
            let trial_b = b - step * gb;
            let trial_value = objective.value(&trial_w, trial_b);
            if trial_value <= value - 1e-4 * step * norm_sq {
                let drop = value - trial_value;
                w = trial_w;
                b = trial_b;
                value = trial_value;
                // Decreases at floating-point granularity are noise, not
                // progress; a short run of them means the iterate sits at
                // the representable optimum.
                if drop <= 1e-14 * (1.0 + value.abs()) {
                    stalls += 1;
                    if stalls >= 3 {
                        break 'outer;
                    }
                } else {
                    stalls = 0;
                }
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                // No descent step satisfies the sufficient-decrease test:
                // the iterate is optimal to floating-point resolution.
                break 'outer;
            }
        }
    }
    (w, b)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns
/// `(eigenvalues, eigenvectors)` with eigenvector `k` stored as row `k`,
/// sorted by descending eigenvalue.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a
        .iter()
        .enumerate()
        .map(|(i, row)| row[i].abs())
        .fold(0.0, f64::max)
        .max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let apq = a[p][q];
                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for r in 0..d {
                    if r != p && r != q {
                        let arp = a[r][p];
                        let arq = a[r][q];
                        a[r][p] = c * arp - s * arq;
                        a[p][r] = a[r][p];
                        a[r][q] = s * arp + c * arq;
                        a[q][r] = a[r][q];
                    }
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[k][k]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| v.iter().map(|row| row[k]).collect())
        .collect();
    (eigenvalues, eigenvectors)
}

/// Fits the projection on scaled rows, keeping enough components to explain
/// `fraction` of the variance.
fn fit_projection(rows: &[Vec<f64>], fraction: f64) -> Projection {
    let n = rows.len();
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for row in rows {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let mut cov = vec![vec![0.0; d]; d];
    for row in rows {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[i][j] += centered[i] * centered[j] / denom;
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[i][j] = cov[j][i];
        }
    }
    let (eigenvalues, eigenvectors) = jacobi_eigen(cov);
    let clamped: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 {
        // No variance at all: keep nothing; the model is intercept-only.
        return Projection {
            mean,
            components: Vec::new(),
            explained: 1.0,
        };
    }
    let mut kept = 0;
    let mut cum = 0.0;
    while kept < d && cum < fraction * total {
        cum += clamped[kept];
        kept += 1;
    }
    Projection {
        mean,
        components: eigenvectors.into_iter().take(kept).collect(),
        explained: cum / total,
    }
}

/// Fits an L2-regularized logistic regression. Deterministic: scaling and
/// projection come from the training rows, and optimization starts from the
/// origin with backtracking line search.
pub fn fit_logistic(data: &FeatureDataset, l2: f64, config: &FitConfig) -> Result<TrainedModel> {
    config.validate()?;
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(Error::Config(format!(
            "ridge strength must be a non-negative finite number, got {l2}"
        )));
    }
    let (pos, neg) = data.class_counts();
    if pos < 2 || neg < 2 {
        return Err(Error::DegenerateData(format!(
            "training needs at least two rows of each class (got {pos} wins, {neg} losses)"
        )));
    }

    let scaling: Vec<(f64, f64)> = (0..data.n_features())
        .map(|d| {
            let lo = data.rows.iter().map(|r| r[d]).fold(f64::INFINITY, f64::min);
            let hi = data
                .rows
                .iter()
                .map(|r| r[d])
                .fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();
    let scaled: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&scaling)
                .map(|(&x, &(lo, hi))| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
                .collect()
        })
        .collect();

    let projection = config.pca_variance.map(|f| fit_projection(&scaled, f));
    let model_rows: Vec<Vec<f64>> = match &projection {
        Some(p) => scaled
            .iter()
            .map(|u| {
                p.components
                    .iter()
                    .map(|comp| {
                        comp.iter()
                            .zip(u)
                            .zip(&p.mean)
                            .map(|((c, x), m)| c * (x - m))
                            .sum()
                    })
                    .collect()
            })
            .collect(),
        None => scaled,
    };
    let dim = model_rows[0].len();
    let objective = LogisticObjective {
        rows: &model_rows,
        labels: &data.labels,
        l2,
    };
    let (weights, intercept) = minimize(&objective, dim, config.tolerance, config.max_iterations);
    Ok(TrainedModel {
        scaling: Some(scaling),
        projection,
        weights,
        intercept,
        calibration: None,
    })
}

/// Fits the score calibration `sigmoid(a * s + b)` on held-out data.
///
/// The two parameters are fitted on `splits` random 70% draws of the
/// held-out rows (seeded), then averaged; pass
/// [`DEFAULT_PLATT_SPLITS`] for the usual five. Returns the model with the
/// averaged calibration attached.
pub fn calibrate_platt(
    model: &TrainedModel,
    held_out: &FeatureDataset,
    splits: usize,
    seed: u64,
) -> Result<TrainedModel> {
    if splits == 0 {
        return Err(Error::Config("calibration needs at least one split".into()));
    }
    let (pos, neg) = held_out.class_counts();
    if pos < 2 || neg < 2 {
        return Err(Error::DegenerateData(
            "calibration needs at least two held-out rows of each class".into(),
        ));
    }
    let scores: Vec<f64> = held_out
        .rows
        .iter()
        .map(|r| model.raw_score(r))
        .collect::<Result<_>>()?;
    let n = scores.len();
    let draw = ((0.7 * n as f64).round() as usize).clamp(1, n);

    let mut a_sum = 0.0;
    let mut b_sum = 0.0;
    for split in 0..splits {
        let mut r = rng::stream(seed, split as u64);
        // Redraw until both classes appear; bounded so a pathological draw
        // sequence cannot loop forever.
        let mut indices: Vec<usize> = (0..n).collect();
        let mut chosen: Vec<usize> = Vec::new();
        for _attempt in 0..100 {
            indices.shuffle(&mut r);
            chosen = indices[..draw].to_vec();
            let pos = chosen.iter().filter(|&&i| held_out.labels[i]).count();
            if pos >= 2 && chosen.len() - pos >= 2 {
                break;
            }
            chosen.clear();
        }
        if chosen.is_empty() {
            return Err(Error::DegenerateData(
                "could not draw a calibration split with both classes".into(),
            ));
        }
        let rows: Vec<Vec<f64>> = chosen.iter().map(|&i| vec![scores[i]]).collect();
        let labels: Vec<bool> = chosen.iter().map(|&i| held_out.labels[i]).collect();
        let objective = LogisticObjective {
            rows: &rows,
            labels: &labels,
            // A whisper of ridge keeps separable score samples from running
            // to infinite slope; it is far below estimation noise.
            l2: 1e-9,
        };
        let (w, b) = minimize(&objective, 1, 1e-8, 10_000);
        a_sum += w[0];
        b_sum += b;
    }
    Ok(model
        .clone()
        .with_calibration(a_sum / splits as f64, b_sum / splits as f64))
}

/// Metrics of one cross-validation fold, measured on its validation rows.
#[derive(Debug, Clone)]
pub struct FoldMetrics {
    pub log_loss: f64,
    pub accuracy: f64,
    pub auc: f64,
}

/// Cross-validation summary: per-fold metrics and their means.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldMetrics>,
    pub mean_log_loss: f64,
    pub mean_accuracy: f64,
    pub mean_auc: f64,
}

/// `k` random 70/30 train/validation splits (not a partition: each fold
/// draws its own validation sample of 30% of the rows), reporting log loss,
/// accuracy, and AUC on the held-out side. Deterministic under `seed`.
pub fn cross_validate(
    data: &FeatureDataset,
    l2: f64,
    config: &FitConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    if k == 0 {
        return Err(Error::Config("cross-validation needs at least one fold".into()));
    }
    let n = data.n_rows();
    let val = ((0.3 * n as f64).round() as usize).max(1);
    if n < val + 4 {
        return Err(Error::DegenerateData(format!(
            "{n} rows are too few for a 30% validation split plus training"
        )));
    }
    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let mut r = rng::stream(seed, fold as u64);
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut r);
        let validation = data.subset(&indices[..val]);
        let training = data.subset(&indices[val..]);
        let model = fit_logistic(&training, l2, config)?;
        let probs = model.predict_many(&validation)?;
        folds.push(FoldMetrics {
            log_loss: log_loss(&probs, validation.labels())?,
            accuracy: accuracy(&probs, validation.labels(), 0.5)?,
            auc: auc(&probs, validation.labels())?,
        });
    }
    let kf = folds.len() as f64;
    let report = CvReport {
        mean_log_loss: folds.iter().map(|f| f.log_loss).sum::<f64>() / kf,
        mean_accuracy: folds.iter().map(|f| f.accuracy).sum::<f64>() / kf,
        mean_auc: folds.iter().map(|f| f.auc).sum::<f64>() / kf,
        folds,
    };
    Ok(report)
}

/// Picks the ridge strength with the lowest mean cross-validated log loss.
/// Returns the winner and its report.
pub fn l2_grid_search(
    data: &FeatureDataset,
    grid: &[f64],
    config: &FitConfig,
    k: usize,
    seed: u64,
) -> Result<(f64, CvReport)> {
    if grid.is_empty() {
        return Err(Error::Config("the ridge grid is empty".into()));
    }
    let mut best: Option<(f64, CvReport)> = None;
    for &l2 in grid {
        let report = cross_validate(data, l2, config, k, seed)?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| report.mean_log_loss < b.mean_log_loss)
        {
            best = Some((l2, report));
        }
    }
    Ok(best.expect("grid is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Draws `n` rows from a logistic model with weights `w`, intercept
    /// `b`, features uniform on [0, 1].
    fn synthetic(n: usize, w: &[f64], b: f64, seed: u64) -> FeatureDataset {
        let mut r = rng::stream(seed, 0);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let x: Vec<f64> = (0..w.len()).map(|_| r.random_range(0.0..1.0)).collect();
            let p = sigmoid(dot(w, &x) + b);
            rows.push(x);
            labels.push(r.random_bool(p));
        }
        let ids = (0..n as u32).collect();
        FeatureDataset::new(rows, labels, ids).unwrap()
    }

    #[test]
    fn log_loss_matches_the_analytic_values_and_the_direct_sum() {
        let half = vec![0.5; 8];
        let labels = vec![true, false, true, false, true, true, false, false];
        assert_eq!(log_loss(&half, &labels).unwrap(), std::f64::consts::LN_2);

        let clamped: Vec<f64> = labels
            .iter()
            .map(|&y| if y { PROB_CLAMP.1 } else { PROB_CLAMP.0 })
            .collect();
        let near_perfect = log_loss(&clamped, &labels).unwrap();
        assert!(near_perfect > 0.0 && near_perfect < 1.1e-6);

        let mut r = rng::stream(5, 0);
        for _ in 0..50 {
            let n = r.random_range(1..40);
            let probs: Vec<f64> = (0..n).map(|_| r.random_range(0.01..0.99)).collect();
            let labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.5)).collect();
            let direct = -probs
                .iter()
                .zip(&labels)
                .map(|(&p, &y)| {
                    f64::from(u8::from(y)) * p.ln() + (1.0 - f64::from(u8::from(y))) * (1.0 - p).ln()
                })
                .sum::<f64>()
                / n as f64;
            let got = log_loss(&probs, &labels).unwrap();
            assert!((got - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn log_loss_rejects_boundary_probabilities_and_misalignment() {
        assert!(matches!(
            log_loss(&[0.0], &[false]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(log_loss(&[1.0], &[true]), Err(Error::Domain(_))));
        assert!(matches!(
            log_loss(&[0.5, 0.5], &[true]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn auc_matches_the_pairwise_oracle_and_handles_edges() {
        assert_eq!(
            auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(),
            1.0
        );
        assert_eq!(auc(&[0.4; 6], &[true, false, true, false, true, false]).unwrap(), 0.5);
        assert!(matches!(
            auc(&[0.1, 0.9], &[true, true]),
            Err(Error::DegenerateData(_))
        ));

        let mut r = rng::stream(6, 0);
        for _ in 0..1000 {
            let n = r.random_range(2..40);
            // Coarse grid forces plenty of ties.
            let probs: Vec<f64> = (0..n).map(|_| r.random_range(0..11) as f64 / 10.0).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.5)).collect();
            if labels.iter().all(|&y| y) {
                labels[0] = false;
            }
            if labels.iter().all(|&y| !y) {
                labels[0] = true;
            }
            let mut agree = 0.0;
            let mut pairs = 0.0;
            for (i, &yi) in labels.iter().enumerate() {
                for (j, &yj) in labels.iter().enumerate() {
                    if yi && !yj {
                        pairs += 1.0;
                        if probs[i] > probs[j] {
                            agree += 1.0;
                        } else if probs[i] == probs[j] {
                            agree += 0.5;
                        }
                    }
                }
            }
            let oracle = agree / pairs;
            assert!((auc(&probs, &labels).unwrap() - oracle).abs() <= 1e-12);
        }
    }

    #[test]
    fn accuracy_applies_the_threshold_inclusively() {
        let probs = [0.2, 0.5, 0.7];
        let labels = [false, true, false];
        assert_eq!(accuracy(&probs, &labels, 0.5).unwrap(), 2.0 / 3.0);
        // At 0.8 nothing clears the bar: only the lone true label is missed.
        assert_eq!(accuracy(&probs, &labels, 0.8).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn separable_data_is_classified_perfectly_with_finite_weights() {
        let rows = vec![
            vec![-2.0, 1.0],
            vec![-1.5, 0.5],
            vec![-1.0, 1.5],
            vec![1.0, -0.5],
            vec![1.5, -1.0],
            vec![2.0, -1.5],
        ];
        let labels = vec![false, false, false, true, true, true];
        let data = FeatureDataset::new(rows, labels.clone(), (0..6).collect()).unwrap();
        let config = FitConfig {
            pca_variance: None,
            ..FitConfig::default()
        };
        let model = fit_logistic(&data, 1.0, &config).unwrap();
        let probs = model.predict_many(&data).unwrap();
        assert_eq!(accuracy(&probs, &labels, 0.5).unwrap(), 1.0);
        let (coefficients, constant) = model.raw_affine();
        assert!(coefficients.iter().all(|c| c.is_finite()) && constant.is_finite());
    }

    #[test]
    fn constant_features_carry_no_weight() {
        let mut data = synthetic(200, &[2.0, -1.0], 0.0, 11);
        for row in &mut data.rows {
            row.push(7.25);
        }
        let config = FitConfig {
            pca_variance: None,
            ..FitConfig::default()
        };
        let model = fit_logistic(&data, 0.1, &config).unwrap();
        let (coefficients, _) = model.raw_affine();
        assert_eq!(coefficients[2], 0.0);
    }

    #[test]
    fn known_generating_weights_are_recovered() {
        let data = synthetic(50_000, &[2.0, -1.0], 0.5, 10);
        let config = FitConfig {
            pca_variance: None,
            tolerance: 1e-7,
            max_iterations: 10_000,
        };
        let model = fit_logistic(&data, 0.0, &config).unwrap();
        let (coefficients, constant) = model.raw_affine();
        assert!(
            (coefficients[0] - 2.0).abs() / 2.0 < 0.05,
            "w0 = {}",
            coefficients[0]
        );
        assert!(
            (coefficients[1] + 1.0).abs() / 1.0 < 0.05,
            "w1 = {}",
            coefficients[1]
        );
        assert!((constant - 0.5).abs() / 0.5 < 0.05, "b = {constant}");
    }

    #[test]
    fn loss_gradient_matches_central_differences() {
        let data = synthetic(20, &[1.0, -2.0], 0.3, 13);
        let objective = LogisticObjective {
            rows: data.rows(),
            labels: data.labels(),
            l2: 0.37,
        };
        let mut r = rng::stream(14, 0);
        for _ in 0..25 {
            let w = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
            let b = r.random_range(-2.0..2.0);
            let (gw, gb) = objective.gradient(&w, b);
            let h = 1e-5;
            for d in 0..3 {
                let mut lo = [w[0], w[1], b];
                let mut hi = lo;
                lo[d] -= h;
                hi[d] += h;
                let numeric = (objective.value(&hi[..2], hi[2])
                    - objective.value(&lo[..2], lo[2]))
                    / (2.0 * h);
                let analytic = if d < 2 { gw[d] } else { gb };
                let rel = (numeric - analytic).abs() / analytic.abs().max(1e-8);
                assert!(rel < 1e-6, "coordinate {d}: {analytic} vs {numeric}");
            }
        }
    }

    #[test]
    fn fitted_model_never_loses_to_the_base_rate() {
        for seed in 20..25 {
            let data = synthetic(300, &[1.5, -0.8], -0.2, seed);
            let model = fit_logistic(&data, 0.01, &FitConfig::default()).unwrap();
            let probs = model.predict_many(&data).unwrap();
            let fitted = log_loss(&probs, data.labels()).unwrap();
            let rate = data.labels().iter().filter(|&&y| y).count() as f64
                / data.n_rows() as f64;
            let base = log_loss(&vec![rate; data.n_rows()], data.labels()).unwrap();
            assert!(fitted <= base + 1e-9, "seed {seed}: {fitted} > {base}");
        }
    }

    #[test]
    fn projection_keeps_the_configured_variance_and_drops_redundancy() {
        // Six features spanned by two latent directions plus faint noise:
        // two or three components should suffice for 90% of the variance.
        let mut r = rng::stream(15, 0);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..600 {
            let z1: f64 = r.random_range(-1.0..1.0);
            let z2: f64 = r.random_range(-1.0..1.0);
            let loadings = [
                (1.0, 0.0),
                (-1.0, 0.0),
                (0.5, 0.5),
                (0.0, 1.0),
                (0.0, -0.3),
                (0.7, -0.2),
            ];
            let row: Vec<f64> = loadings
                .iter()
                .map(|&(a, b)| a * z1 + b * z2 + r.random_range(-0.02..0.02))
                .collect();
            labels.push(r.random_bool(sigmoid(1.8 * z1 - 1.1 * z2)));
            rows.push(row);
        }
        let n = rows.len();
        let data = FeatureDataset::new(rows, labels, (0..n as u32).collect()).unwrap();
        let model = fit_logistic(&data, 0.001, &FitConfig::default()).unwrap();
        assert!(model.pca_explained().unwrap() >= 0.90);
        assert!(model.pca_kept().unwrap() <= 3, "kept {:?}", model.pca_kept());

        let full = fit_logistic(
            &data,
            0.001,
            &FitConfig {
                pca_variance: None,
                ..FitConfig::default()
            },
        )
        .unwrap();
        let reduced_loss =
            log_loss(&model.predict_many(&data).unwrap(), data.labels()).unwrap();
        let full_loss = log_loss(&full.predict_many(&data).unwrap(), data.labels()).unwrap();
        assert!(reduced_loss <= full_loss + 0.05);
    }

    #[test]
    fn eigendecomposition_reconstructs_random_symmetric_matrices() {
        let mut r = rng::stream(16, 0);
        for _ in 0..20 {
            let d = r.random_range(2..8);
            let mut a = vec![vec![0.0; d]; d];
            for i in 0..d {
                for j in i..d {
                    let x = r.random_range(-2.0..2.0);
                    a[i][j] = x;
                    a[j][i] = x;
                }
            }
            let (values, vectors) = jacobi_eigen(a.clone());
            for (lambda, vector) in values.iter().zip(&vectors) {
                let norm: f64 = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-9);
                for i in 0..d {
                    let av: f64 = (0..d).map(|j| a[i][j] * vector[j]).sum();
                    assert!(
                        (av - lambda * vector[i]).abs() < 1e-8,
                        "A v != lambda v at row {i}"
                    );
                }
            }
            for w in values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn predictions_are_clamped_monotone_and_centered() {
        let flat = TrainedModel::linear(vec![0.0, 0.0], 0.0);
        assert_eq!(flat.predict_proba(&[3.0, -4.0]).unwrap(), 0.5);

        let rising = TrainedModel::linear(vec![1.0], 0.0);
        let mut last = 0.0;
        for x in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            let p = rising.predict_proba(&[x]).unwrap();
            assert!(p > last);
            last = p;
        }
        assert_eq!(rising.predict_proba(&[50.0]).unwrap(), PROB_CLAMP.1);
        assert_eq!(rising.predict_proba(&[-50.0]).unwrap(), PROB_CLAMP.0);
        assert!(matches!(
            rising.predict_proba(&[1.0, 2.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn identity_calibration_changes_nothing() {
        let model = TrainedModel::linear(vec![0.9, -0.4], 0.1);
        let calibrated = model.clone().with_calibration(1.0, 0.0);
        let mut r = rng::stream(17, 0);
        for _ in 0..50 {
            let x = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
            assert_eq!(
                model.predict_proba(&x).unwrap(),
                calibrated.predict_proba(&x).unwrap()
            );
        }
    }

    /// Scores drawn from a known generator: held-out labels are Bernoulli of
    /// `sigmoid(true_logit)` while the model reports `scale * true_logit`.
    fn scored_dataset(n: usize, scale: f64, seed: u64) -> FeatureDataset {
        let mut r = rng::stream(seed, 0);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let logit = r.random_range(-3.0..3.0);
            rows.push(vec![scale * logit]);
            labels.push(r.random_bool(sigmoid(logit)));
        }
        FeatureDataset::new(rows, labels, (0..n as u32).collect()).unwrap()
    }

    #[test]
    fn calibration_recovers_known_distortions_and_preserves_ranking() {
        let identity_model = TrainedModel::linear(vec![1.0], 0.0);

        let well_calibrated = scored_dataset(10_000, 1.0, 18);
        let fitted =
            calibrate_platt(&identity_model, &well_calibrated, DEFAULT_PLATT_SPLITS, 1).unwrap();
        let (a, b) = fitted.calibration().unwrap();
        assert!((a - 1.0).abs() < 0.1, "a = {a}");
        assert!(b.abs() < 0.1, "b = {b}");

        // The model doubles every logit, so the corrective slope is one half.
        let overconfident = scored_dataset(10_000, 2.0, 19);
        let fixed =
            calibrate_platt(&identity_model, &overconfident, DEFAULT_PLATT_SPLITS, 2).unwrap();
        let (a, _) = fixed.calibration().unwrap();
        assert!((a - 0.5).abs() < 0.1, "a = {a}");

        let before = identity_model.predict_many(&overconfident).unwrap();
        let after = fixed.predict_many(&overconfident).unwrap();
        let auc_before = auc(&before, overconfident.labels()).unwrap();
        let auc_after = auc(&after, overconfident.labels()).unwrap();
        assert!((auc_before - auc_after).abs() <= 1e-12);
    }

    #[test]
    fn cross_validation_is_seeded_and_improves_with_more_data() {
        let data = synthetic(200, &[2.0, -1.0], 0.3, 21);
        let config = FitConfig::default();
        let a = cross_validate(&data, 0.01, &config, 5, 7).unwrap();
        let b = cross_validate(&data, 0.01, &config, 5, 7).unwrap();
        assert_eq!(a.mean_log_loss, b.mean_log_loss);
        assert_eq!(a.mean_auc, b.mean_auc);
        assert_eq!(a.folds.len(), 5);

        let single = cross_validate(&data, 0.01, &config, 1, 7).unwrap();
        assert_eq!(single.folds.len(), 1);

        // Learning curve: a well-specified model fitted on more rows should
        // generalize better, monotonically over a 4x-per-step ladder. Five
        // features keep the small-sample fits visibly overfitted, and
        // averaging over generator seeds drowns the split noise.
        let generator = [3.0, -2.0, 1.5, -1.0, 0.5];
        let mut losses = Vec::new();
        for &n in &[60usize, 240, 960] {
            let mut total = 0.0;
            for seed in 0..6 {
                let d = synthetic(n, &generator, 0.3, 220 + seed);
                total += cross_validate(&d, 0.001, &config, 3, 8).unwrap().mean_log_loss;
            }
            losses.push(total / 6.0);
        }
        assert!(
            losses[0] > losses[1] && losses[1] > losses[2],
            "learning curve did not improve: {losses:?}"
        );
    }

    #[test]
    fn grid_search_prefers_the_better_ridge_strength() {
        let data = synthetic(400, &[2.0, -1.0], 0.0, 23);
        let config = FitConfig::default();
        let (best, report) = l2_grid_search(&data, &[1e-4, 0.1, 100.0], &config, 3, 9).unwrap();
        // A crushing ridge forces the model to the base rate; it can never
        // win on well-specified data.
        assert!(best < 100.0, "picked {best}");
        let crushed = cross_validate(&data, 100.0, &config, 3, 9).unwrap();
        assert!(report.mean_log_loss <= crushed.mean_log_loss);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let one_class = FeatureDataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![true, true, true],
            vec![0, 1, 2],
        )
        .unwrap();
        assert!(matches!(
            fit_logistic(&one_class, 0.1, &FitConfig::default()),
            Err(Error::DegenerateData(_))
        ));

        assert!(matches!(
            FeatureDataset::new(vec![vec![1.0], vec![2.0, 3.0]], vec![true, false], vec![0, 1]),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            FeatureDataset::new(vec![vec![f64::NAN]], vec![true], vec![0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            FeatureDataset::new(vec![], vec![], vec![]),
            Err(Error::DegenerateData(_))
        ));

        let tiny = synthetic(6, &[1.0, 1.0], 0.0, 24);
        assert!(matches!(
            cross_validate(&tiny, 0.1, &FitConfig::default(), 2, 1),
            Err(Error::DegenerateData(_))
        ));
        assert!(matches!(
            fit_logistic(&synthetic(50, &[1.0, 1.0], 0.0, 25), -1.0, &FitConfig::default()),
            Err(Error::Config(_))
        ));

        let bad = FitConfig {
            pca_variance: Some(1.5),
            ..FitConfig::default()
        };
        assert!(matches!(
            fit_logistic(&synthetic(50, &[1.0, 1.0], 0.0, 26), 0.1, &bad),
            Err(Error::Config(_))
        ));
    }
}
