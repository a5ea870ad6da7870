//! Convergence-rate analysis: the Lambert-W rate function, its inverse
//! construction, a hard-margin oracle, and margin tracking under full-batch
//! gradient descent on separable data.
//!
//! The rate function is
//!
//! ```text
//! g(t) = E/r^2 + T + (ln(t+C) + W0(c e^{-E/r - T r} / (t+C))) / r,
//! c = ln_q(N_T/K) + E/r
//! ```
//!
//! and is the exact inverse under `ln` of
//!
//! ```text
//! f(u) = r (u - T) - E/r - c e^{-r u},
//! ```
//!
//! which `rate_f` implements; `rate_f(rate_g(t)) = ln(t + C)` holds to
//! machine precision wherever the Lambert argument stays on the principal
//! branch.

use crate::activation::{LightNeuron, LightParams};
use crate::data::Dataset;
use crate::error::{LightError, Result};
use crate::population::GrowthModel;
use crate::special::{lambert_w0, q_log};

/// Parameters of the rate function: a trained output neuron's parameters
/// plus the integration constant of the inverse construction (0 by default).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub params: LightParams,
    pub integration_constant: f64,
}

impl RateParams {
    pub fn new(params: LightParams) -> Self {
        RateParams {
            params,
            integration_constant: 0.0,
        }
    }

    /// `c = ln_q(N_T/K) + E/r`.
    pub fn c_coefficient(&self) -> Result<f64> {
        let p = &self.params;
        p.validate()?;
        Ok(q_log(p.q, p.n_start / p.k)? + p.e / p.r)
    }

    /// The derivative prefactor `a = eps K r c`.
    pub fn derivative_prefactor(&self) -> Result<f64> {
        let p = &self.params;
        Ok(p.epsilon_value() * p.k * p.r * self.c_coefficient()?)
    }
}

/// The convergence-rate function `g(t)`. Fails with a domain error carrying
/// the offending `t` when the Lambert argument falls below `-1/e`.
pub fn rate_g(t: f64, rp: &RateParams) -> Result<f64> {
    let p = &rp.params;
    let c = rp.c_coefficient()?;
    let shifted = t + rp.integration_constant;
    if !(shifted > 0.0) {
        return Err(LightError::Domain {
            function: "rate_g",
            message: format!("t + C must be positive, got {shifted}"),
        });
    }
    let arg = c * (-p.e / p.r - p.t_start * p.r).exp() / shifted;
    let w = lambert_w0(arg).map_err(|_| LightError::Domain {
        function: "rate_g",
        message: format!("Lambert argument {arg} below -1/e at t = {t}"),
    })?;
    Ok(p.e / (p.r * p.r) + p.t_start + (shifted.ln() + w) / p.r)
}

/// The function whose inverse under `ln` is `g`:
/// `f(u) = r (u - T) - E/r - c e^{-r u}`. Undefined when the derivative
/// prefactor vanishes (`c = 0`).
pub fn rate_f(u: f64, rp: &RateParams) -> Result<f64> {
    let p = &rp.params;
    let c = rp.c_coefficient()?;
    if c == 0.0 {
        return Err(LightError::Domain {
            function: "rate_f",
            message: "derivative prefactor vanishes (N_T at the equilibrium)".into(),
        });
    }
    Ok(p.r * (u - p.t_start) - p.e / p.r - c * (-p.r * u).exp())
}

/// Per-iteration margins and weight norms of one gradient-descent run,
/// together with the limiting max margin.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginTrace {
    /// `min_i theta^T x_i / ||theta||` after each iteration.
    pub margins: Vec<f64>,
    pub norms: Vec<f64>,
    /// The hard-margin optimum of the folded dataset.
    pub max_margin: f64,
}

/// Least-squares fits of `d - margin(t)` against `C/g(t)` and `C/ln(t)` on
/// the tail half of the iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub rate_constant: f64,
    pub rate_residual: f64,
    pub rate_points: usize,
    pub log_constant: f64,
    pub log_residual: f64,
    pub log_points: usize,
}

/// Solve the dense system `A x = b` by Gaussian elimination with partial
/// pivoting; `A` is `n x n` row-major. Small systems only.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-14 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in col + 1..n {
            sum -= a[col * n + k] * x[k];
        }
        x[col] = sum / a[col * n + col];
    }
    Some(x)
}

/// Minimum-norm point of the affine hull of the selected points: solve the
/// KKT system `[G 1; 1^T 0] [alpha; mu] = [0; 1]` with `G` the Gram matrix.
fn affine_min_norm(points: &[&[f64]]) -> Option<Vec<f64>> {
    let k = points.len();
    let n = k + 1;
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for i in 0..k {
        for j in 0..k {
            a[i * n + j] = dot(points[i], points[j]);
        }
        a[i * n + k] = 1.0;
        a[k * n + i] = 1.0;
    }
    b[k] = 1.0;
    solve_dense(&mut a, &mut b, n).map(|mut x| {
        x.truncate(k);
        x
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's method).
/// Returns the point and its support weights over the input indices.
pub fn min_norm_point(points: &[&[f64]]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(LightError::InvalidParams("empty point set".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(LightError::Shape {
            expected: format!("dimension {dim}"),
            got: "mixed".into(),
        });
    }
    // Start from the vertex of least norm.
    let start = (0..points.len())
        .min_by(|&i, &j| {
            dot(points[i], points[i])
                .partial_cmp(&dot(points[j], points[j]))
                .unwrap()
        })
        .unwrap();
    let mut support: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let combine = |support: &[usize], weights: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; dim];
        for (&si, &wi) in support.iter().zip(weights.iter()) {
            for d in 0..dim {
                p[d] += wi * points[si][d];
            }
        }
        p
    };
    let max_major = 16 * points.len() + 64;
    for _ in 0..max_major {
        let p = combine(&support, &weights);
        let pp = dot(&p, &p);
        // Most improving vertex.
        let mut j_best = 0;
        let mut v_best = f64::INFINITY;
        for (j, x) in points.iter().enumerate() {
            let v = dot(&p, x);
            if v < v_best {
                v_best = v;
                j_best = j;
            }
        }
        let scale = pp.max(1.0);
        if v_best >= pp - 1e-12 * scale || support.contains(&j_best) {
            return Ok(p);
        }
        support.push(j_best);
        weights.push(0.0);
        // Minor cycle: pull the weights toward the affine optimum, dropping
        // vertices whose weight hits zero.
        loop {
            let pts: Vec<&[f64]> = support.iter().map(|&i| points[i]).collect();
            let alpha = match affine_min_norm(&pts) {
                Some(a) => a,
                None => {
                    // Degenerate Gram system: drop the smallest-weight vertex.
                    let drop = weights
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                        .map(|(i, _)| i)
                        .unwrap();
                    support.remove(drop);
                    weights.remove(drop);
                    if support.is_empty() {
                        return Err(LightError::Numeric {
                            function: "min_norm_point",
                            at: 0.0,
                            message: "support collapsed".into(),
                        });
                    }
                    continue;
                }
            };
            if alpha.iter().all(|&a| a > 1e-12) {
                weights = alpha;
                break;
            }
            // Step from weights toward alpha until the first coordinate
            // hits zero.
            let mut theta = 1.0f64;
            for (w, a) in weights.iter().zip(alpha.iter()) {
                if *a < 1e-12 && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            let mut next_support = Vec::new();
            let mut next_weights = Vec::new();
            for i in 0..support.len() {
                let w = weights[i] + theta * (alpha[i] - weights[i]);
                if w > 1e-12 {
                    next_support.push(support[i]);
                    next_weights.push(w);
                }
            }
            if next_support.is_empty() {
                next_support.push(support[0]);
                next_weights.push(1.0);
            }
            let total: f64 = next_weights.iter().sum();
            for w in &mut next_weights {
                *w /= total;
            }
            support = next_support;
            weights = next_weights;
        }
    }
    Ok(combine(&support, &weights))
}

/// Hard-margin optimum of the dataset folded through its labels
/// (`x_i <- y_i x_i`): the distance from the origin to the convex hull of
/// the folded points, with the maximizing unit direction.
///
/// The returned pair certifies itself: `min_i direction . x_i` equals `d`
/// within solver precision.
pub fn max_margin(data: &Dataset) -> Result<(f64, Vec<f64>)> {
    let folded: Vec<Vec<f64>> = (0..data.len())
        .map(|i| data.row(i).iter().map(|v| v * data.label(i)).collect())
        .collect();
    let refs: Vec<&[f64]> = folded.iter().map(|v| v.as_slice()).collect();
    let p = min_norm_point(&refs)?;
    let d = dot(&p, &p).sqrt();
    if d <= 1e-9 {
        return Err(LightError::NonSeparable);
    }
    let direction: Vec<f64> = p.iter().map(|v| v / d).collect();
    Ok((d, direction))
}

/// Full-batch gradient descent on the saturating loss `sum_i (K - l(theta^T
/// x_i))` over the folded dataset: `theta += eta * sum_i l'(theta^T x_i)
/// x_i`. Records the margin trajectory and fits the tail of `d - margin(t)`
/// against `C/g(t)` and `C/ln(t)`.
pub fn margin_experiment(
    data: &Dataset,
    params: &LightParams,
    model: GrowthModel,
    eta: f64,
    iterations: usize,
) -> Result<(MarginTrace, FitReport)> {
    if !(eta > 0.0) {
        return Err(LightError::InvalidParams("eta must be > 0".into()));
    }
    if iterations == 0 {
        return Err(LightError::InvalidParams("iterations must be >= 1".into()));
    }
    let (d, _) = max_margin(data)?;
    let neuron = LightNeuron::new(model, params)?;
    let dim = data.dim();
    let folded: Vec<Vec<f64>> = (0..data.len())
        .map(|i| data.row(i).iter().map(|v| v * data.label(i)).collect())
        .collect();
    let mut theta = vec![0.0; dim];
    let mut margins = Vec::with_capacity(iterations);
    let mut norms = Vec::with_capacity(iterations);
    for it in 1..=iterations {
        let mut update = vec![0.0; dim];
        for x in &folded {
            let s = dot(&theta, x);
            let lp = neuron.derivative(s)?;
            for (u, xi) in update.iter_mut().zip(x.iter()) {
                *u += lp * xi;
            }
        }
        for (t, u) in theta.iter_mut().zip(update.iter()) {
            *t += eta * u;
        }
        let norm = dot(&theta, &theta).sqrt();
        if !norm.is_finite() {
            return Err(LightError::Numeric {
                function: "margin_experiment",
                at: it as f64,
                message: "weight norm diverged".into(),
            });
        }
        let margin = if norm > 0.0 {
            folded
                .iter()
                .map(|x| dot(&theta, x))
                .fold(f64::INFINITY, f64::min)
                / norm
        } else {
            f64::NEG_INFINITY
        };
        margins.push(margin);
        norms.push(norm);
    }
    let rp = RateParams::new(*params);
    let tail_from = iterations / 2;
    let fit = |xs: &dyn Fn(usize) -> Option<f64>| -> (f64, f64, usize) {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut pts = Vec::new();
        for it in tail_from.max(1)..=iterations {
            if let Some(u) = xs(it) {
                if u.is_finite() && u > 0.0 {
                    let y = d - margins[it - 1];
                    num += y / u;
                    den += 1.0 / (u * u);
                    pts.push((u, y));
                }
            }
        }
        if den == 0.0 {
            return (f64::NAN, f64::NAN, 0);
        }
        let c = num / den;
        let res = (pts
            .iter()
            .map(|(u, y)| (y - c / u) * (y - c / u))
            .sum::<f64>()
            / pts.len() as f64)
            .sqrt();
        (c, res, pts.len())
    };
    let (rate_constant, rate_residual, rate_points) = fit(&|it| rate_g(it as f64, &rp).ok());
    let (log_constant, log_residual, log_points) =
        fit(&|it| if it > 1 { Some((it as f64).ln()) } else { None });
    Ok((
        MarginTrace {
            margins,
            norms,
            max_margin: d,
        },
        FitReport {
            rate_constant,
            rate_residual,
            rate_points,
            log_constant,
            log_residual,
            log_points,
        },
    ))
}
