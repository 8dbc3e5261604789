//! Linear soft-margin SVM.
//!
//! Training minimises
//!
//! ```text
//! 1/(2 C n) ||w||² + 1/n Σ max(0, 1 - y_i (w·x_i + b))
//! ```
//!
//! on z-scored bands (frozen = +1). Scaled by `C n` this is the classic
//! `½||w||² + C Σ ξ_i` problem, solved here through its dual with
//! sequential minimal optimisation (second-order working-set selection,
//! unregularised bias). Every step strictly lowers the dual objective, the
//! iteration is free of randomness, and ties are broken by sample order,
//! so a given input always yields the same bits.

use std::fmt::Write as _;

use serde::Deserialize;

use super::{class_of, fit_standardizer, ClassifyError, IceClass, Standardizer};
use crate::ingest::PixelSample;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmOptions {
    /// Stop once the maximal KKT violation drops below this value.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Keep the dual objective after every iteration in the trace.
    pub record_history: bool,
}

impl Default for SvmOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iter: 5_000_000,
            record_history: false,
        }
    }
}

/// Solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmTrace {
    pub iterations: usize,
    pub converged: bool,
    /// `½||w||² - Σα` after each iteration, when recorded.
    pub dual_history: Vec<f64>,
    pub dual_objective: f64,
    /// The training objective in its `1/(2Cn)` normalisation.
    pub primal_objective: f64,
    /// Norm of the primal subgradient picked consistently with the dual
    /// multipliers (points within 1e-6 of the margin use `α/C`).
    pub subgradient_norm: f64,
}

/// Trained classifier: weights act on standardized bands.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub band_means: Vec<f64>,
    pub band_stds: Vec<f64>,
    pub cost: f64,
}

impl LinearModel {
    pub fn band_count(&self) -> usize {
        self.weights.len()
    }

    pub fn standardizer(&self) -> Standardizer {
        Standardizer {
            means: self.band_means.clone(),
            stds: self.band_stds.clone(),
        }
    }

    pub fn decision_value(&self, bands: &[f64]) -> Result<f64, ClassifyError> {
        if bands.len() != self.weights.len() {
            return Err(ClassifyError::BandMismatch {
                expected: self.weights.len(),
                got: bands.len(),
            });
        }
        let mut score = self.bias;
        for (k, x) in bands.iter().enumerate() {
            score += self.weights[k] * ((x - self.band_means[k]) / self.band_stds[k]);
        }
        Ok(score)
    }

    /// JSON with every number printed to 17 significant digits.
    pub fn to_json(&self) -> String {
        fn arr(v: &[f64]) -> String {
            let mut s = String::from("[");
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                s.push_str(&num(*x));
            }
            s.push(']');
            s
        }
        fn num(x: f64) -> String {
            format!("{x:.16e}")
        }
        let mut out = String::new();
        let _ = writeln!(out, "{{");
        let _ = writeln!(out, "  \"weights\": {},", arr(&self.weights));
        let _ = writeln!(out, "  \"bias\": {},", num(self.bias));
        let _ = writeln!(out, "  \"band_means\": {},", arr(&self.band_means));
        let _ = writeln!(out, "  \"band_stds\": {},", arr(&self.band_stds));
        let _ = writeln!(out, "  \"cost\": {}", num(self.cost));
        out.push_str("}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifyError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            weights: Vec<f64>,
            bias: f64,
            band_means: Vec<f64>,
            band_stds: Vec<f64>,
            cost: f64,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| ClassifyError::Json(e.to_string()))?;
        let k = raw.weights.len();
        if k == 0 || raw.band_means.len() != k || raw.band_stds.len() != k {
            return Err(ClassifyError::Json(
                "weights, band_means and band_stds must have equal non-zero length".into(),
            ));
        }
        if raw.band_stds.iter().any(|s| s.is_nan() || *s <= 0.0) {
            return Err(ClassifyError::Json("band_stds must be positive".into()));
        }
        if raw.cost.is_nan() || raw.cost <= 0.0 {
            return Err(ClassifyError::InvalidCost(raw.cost));
        }
        Ok(Self {
            weights: raw.weights,
            bias: raw.bias,
            band_means: raw.band_means,
            band_stds: raw.band_stds,
            cost: raw.cost,
        })
    }
}

/// Frozen iff the decision value is `>= 0`.
pub fn predict(model: &LinearModel, sample: &PixelSample) -> Result<IceClass, ClassifyError> {
    let score = model.decision_value(&sample.bands)?;
    Ok(if score >= 0.0 {
        IceClass::Frozen
    } else {
        IceClass::NonFrozen
    })
}

pub fn train_linear_svm(samples: &[&PixelSample], cost: f64) -> Result<LinearModel, ClassifyError> {
    train_linear_svm_traced(samples, cost, SvmOptions::default()).map(|(m, _)| m)
}

pub fn train_linear_svm_traced(
    samples: &[&PixelSample],
    cost: f64,
    opts: SvmOptions,
) -> Result<(LinearModel, SvmTrace), ClassifyError> {
    if !(cost > 0.0 && cost.is_finite()) {
        return Err(ClassifyError::InvalidCost(cost));
    }
    if samples.is_empty() {
        return Err(ClassifyError::Empty);
    }
    let y: Vec<f64> = samples
        .iter()
        .map(|s| class_of(s).map(IceClass::sign))
        .collect::<Result<_, _>>()?;
    if y.iter().all(|&v| v > 0.0) {
        return Err(ClassifyError::SingleClass(IceClass::Frozen));
    }
    if y.iter().all(|&v| v < 0.0) {
        return Err(ClassifyError::SingleClass(IceClass::NonFrozen));
    }
    let std = fit_standardizer(samples)?;
    let k = std.band_count();
    let n = samples.len();
    let mut x = Vec::with_capacity(n * k);
    for s in samples {
        x.extend(std.apply(&s.bands)?);
    }
    let solution = smo(&x, &y, k, cost, &opts);
    let model = LinearModel {
        weights: solution.w,
        bias: solution.b,
        band_means: std.means,
        band_stds: std.stds,
        cost,
    };
    Ok((model, solution.trace))
}

struct Solution {
    w: Vec<f64>,
    b: f64,
    trace: SvmTrace,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn smo(x: &[f64], y: &[f64], k: usize, c: f64, opts: &SvmOptions) -> Solution {
    let n = y.len();
    let row = |i: usize| &x[i * k..(i + 1) * k];
    let diag: Vec<f64> = (0..n).map(|i| dot(row(i), row(i))).collect();
    let mut alpha = vec![0.0f64; n];
    let mut w = vec![0.0f64; k];
    // v_t = -y_t ∇_t = y_t - w·x_t
    let mut v: Vec<f64> = y.to_vec();
    let mut alpha_sum = 0.0;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < opts.max_iter {
        let mut i = usize::MAX;
        let mut v_max = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && v[t] > v_max {
                v_max = v[t];
                i = t;
            }
        }
        let mut v_min = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        if i != usize::MAX {
            let xi = row(i);
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                if v[t] < v_min {
                    v_min = v[t];
                }
                let gap = v_max - v[t];
                if gap > 0.0 {
                    let mut quad = diag[i] + diag[t] - 2.0 * dot(xi, row(t));
                    if quad <= 0.0 {
                        quad = TAU;
                    }
                    let score = -(gap * gap) / quad;
                    if score < best {
                        best = score;
                        j = t;
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || v_max - v_min < opts.tolerance {
            converged = true;
            break;
        }

        let (ai, aj) = (alpha[i], alpha[j]);
        let gi = -y[i] * v[i];
        let gj = -y[j] * v[j];
        let kij = dot(row(i), row(j));
        let (mut ni, mut nj);
        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ni = ai + delta;
            nj = aj + delta;
            if diff > 0.0 {
                if nj < 0.0 {
                    nj = 0.0;
                    ni = diff;
                }
            } else if ni < 0.0 {
                ni = 0.0;
                nj = -diff;
            }
            if diff > 0.0 {
                if ni > c {
                    ni = c;
                    nj = c - diff;
                }
            } else if nj > c {
                nj = c;
                ni = c + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ni = ai - delta;
            nj = aj + delta;
            if sum > c {
                if ni > c {
                    ni = c;
                    nj = sum - c;
                }
            } else if nj < 0.0 {
                nj = 0.0;
                ni = sum;
            }
            if sum > c {
                if nj > c {
                    nj = c;
                    ni = sum - c;
                }
            } else if ni < 0.0 {
                ni = 0.0;
                nj = sum;
            }
        }
        let di = (ni - ai) * y[i];
        let dj = (nj - aj) * y[j];
        alpha[i] = ni;
        alpha[j] = nj;
        alpha_sum += (ni - ai) + (nj - aj);
        for (m, wm) in w.iter_mut().enumerate() {
            *wm += di * x[i * k + m] + dj * x[j * k + m];
        }
        for t in 0..n {
            v[t] = y[t] - dot(&w, row(t));
        }
        iterations += 1;
        if opts.record_history {
            history.push(0.5 * dot(&w, &w) - alpha_sum);
        }
    }

    // Bias from free multipliers, else the midpoint of the feasible interval.
    let free: Vec<f64> = (0..n)
        .filter(|&t| alpha[t] > 0.0 && alpha[t] < c)
        .map(|t| v[t])
        .collect();
    let b = if free.is_empty() {
        let up = (0..n)
            .filter(|&t| in_up(alpha[t], y[t]))
            .map(|t| v[t])
            .fold(f64::NEG_INFINITY, f64::max);
        let low = (0..n)
            .filter(|&t| in_low(alpha[t], y[t]))
            .map(|t| v[t])
            .fold(f64::INFINITY, f64::min);
        match (up.is_finite(), low.is_finite()) {
            (true, true) => 0.5 * (up + low),
            (true, false) => up,
            (false, true) => low,
            (false, false) => 0.0,
        }
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };

    let nf = n as f64;
    let ww = dot(&w, &w);
    let margins: Vec<f64> = (0..n).map(|t| y[t] * (dot(&w, row(t)) + b)).collect();
    let hinge: f64 = margins.iter().map(|m| (1.0 - m).max(0.0)).sum();
    let primal = ww / (2.0 * c * nf) + hinge / nf;
    let mut grad_w: Vec<f64> = w.iter().map(|wm| wm / (c * nf)).collect();
    let mut grad_b = 0.0;
    for t in 0..n {
        let beta = if margins[t] < 1.0 - 1e-6 {
            1.0
        } else if margins[t] > 1.0 + 1e-6 {
            0.0
        } else {
            alpha[t] / c
        };
        if beta != 0.0 {
            for (m, g) in grad_w.iter_mut().enumerate() {
                *g -= beta * y[t] * x[t * k + m] / nf;
            }
            grad_b -= beta * y[t] / nf;
        }
    }
    let subgradient_norm = (dot(&grad_w, &grad_w) + grad_b * grad_b).sqrt();

    Solution {
        w,
        b,
        trace: SvmTrace {
            iterations,
            converged,
            dual_history: history,
            dual_objective: 0.5 * ww - alpha_sum,
            primal_objective: primal,
            subgradient_norm,
        },
    }
}
