//! The LIGHT activation family: harvested-growth solutions used as a
//! differentiable scalar activation, with exact analytic derivatives.
//!
//! Three forms share the parameter tuple `(r, E, K, T, N_T, q, eps)`:
//!
//! - `Verhulst`:  the logistic solution `s / (1 - (1 - s/N_T) e^{-(r-E)(t-T)})`,
//! - `Gompertz`:  `K e^{-E/r + s e^{-r(t-T)}}`,
//! - `Generalized`: `eps K e^{(ln_q(N_T/K) + E/r) e^{-r(t-T)}}`, which equals
//!   the Gompertz form exactly when `q` is infinite and `eps = e^{-E/r}`
//!   (the default).
//!
//! The derivative is obtained by differentiating these expressions directly;
//! the generalized form gives `l' = -eps K r c e^{-r(t-T)} e^{c e^{-r(t-T)}}`
//! with `c = ln_q(N_T/K) + E/r`.
//!
//! All evaluation paths are arranged so exponentials saturate instead of
//! overflowing: the two Verhulst branches never exponentiate a positive
//! argument, and the Gompertz-like forms short-circuit once `e^{-r(t-T)}`
//! leaves the representable range.

use crate::error::{LightError, Result};
use crate::population::{GrowthModel, PopulationParams};
use crate::special::{q_log, QValue};

/// Default harvesting onset for the non-default neuron configurations: the
/// smallest point of the search grid's T axis. Classifier logits start near
/// zero, so a late onset leaves the activation saturated at its lower tail
/// for the first epochs.
pub const DEFAULT_T_START: f64 = 0.1;
/// Default onset population for the non-default neuron configurations.
pub const DEFAULT_N_START: f64 = 0.2;

/// Full parameter tuple of the LIGHT family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightParams {
    pub r: f64,
    pub e: f64,
    pub k: f64,
    pub t_start: f64,
    pub n_start: f64,
    pub q: QValue,
    /// Scale of the generalized form; `None` selects `e^{-E/r}`, the unique
    /// value under which the generalized form with infinite `q` coincides
    /// with the Gompertz solution.
    pub epsilon: Option<f64>,
}

impl LightParams {
    /// The `-default-` configuration: exact sigmoid reduction under the
    /// Verhulst form.
    pub fn default_config() -> Self {
        LightParams {
            r: 1.0,
            e: 0.0,
            k: 1.0,
            t_start: 0.0,
            n_start: 0.5,
            q: QValue::Infinite,
            epsilon: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.population().validate()?;
        if let QValue::Finite(q) = self.q {
            if !(q.is_finite() && q > 0.0) {
                return Err(LightError::InvalidParams(format!("q must be > 0, got {q}")));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(LightError::InvalidParams(format!(
                    "epsilon must be > 0, got {eps}"
                )));
            }
        }
        Ok(())
    }

    pub fn population(&self) -> PopulationParams {
        PopulationParams {
            r: self.r,
            e: self.e,
            k: self.k,
            t_start: self.t_start,
            n_start: self.n_start,
        }
    }

    /// Resolved epsilon (defaults to `e^{-E/r}`).
    pub fn epsilon_value(&self) -> f64 {
        self.epsilon.unwrap_or((-self.e / self.r).exp())
    }
}

/// Neuron configuration: which of `r` and `E` are free constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigTag {
    /// r = 1, E = 0, T = 0, N_T = 1/2: the sigmoid reduction.
    Default,
    /// r free, E = 0.
    R,
    /// r = 1, E free.
    EOnly,
    /// Both free.
    Er,
}

impl ConfigTag {
    pub fn label(&self) -> &'static str {
        match self {
            ConfigTag::Default => "default",
            ConfigTag::R => "r",
            ConfigTag::EOnly => "e",
            ConfigTag::Er => "er",
        }
    }
}

/// A configuration tag together with its resolved parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronConfiguration {
    pub tag: ConfigTag,
    pub params: LightParams,
}

impl NeuronConfiguration {
    pub fn new(tag: ConfigTag, overrides: ConfigOverrides) -> Result<Self> {
        Ok(NeuronConfiguration {
            tag,
            params: config_to_params(tag, overrides)?,
        })
    }
}

/// Optional overrides applied on top of a configuration tag's constants.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConfigOverrides {
    pub r: Option<f64>,
    pub e: Option<f64>,
    pub t_start: Option<f64>,
    pub n_start: Option<f64>,
    pub q: Option<QValue>,
    pub epsilon: Option<f64>,
}

/// Resolve a configuration tag into a full parameter tuple.
///
/// Frozen fields per tag (`Default`: everything; `R`: E = 0; `EOnly`: r = 1;
/// `Er`: none) reject conflicting overrides. Free `T`/`N_T` default to 4 and
/// 0.2 in non-default configurations; `K` is always 1.
pub fn config_to_params(tag: ConfigTag, o: ConfigOverrides) -> Result<LightParams> {
    let conflict = |field: &str, tag: ConfigTag| {
        Err(LightError::InvalidParams(format!(
            "override of {field} conflicts with the -{}- configuration",
            tag.label()
        )))
    };
    let frozen = |v: Option<f64>, frozen_at: f64| match v {
        Some(x) if x != frozen_at => false,
        _ => true,
    };
    match tag {
        ConfigTag::Default => {
            if !frozen(o.r, 1.0) {
                return conflict("r", tag);
            }
            if !frozen(o.e, 0.0) {
                return conflict("E", tag);
            }
            if !frozen(o.t_start, 0.0) {
                return conflict("T", tag);
            }
            if !frozen(o.n_start, 0.5) {
                return conflict("N_T", tag);
            }
            let mut p = LightParams::default_config();
            p.q = o.q.unwrap_or(QValue::Infinite);
            p.epsilon = o.epsilon;
            p.validate()?;
            Ok(p)
        }
        ConfigTag::R | ConfigTag::EOnly | ConfigTag::Er => {
            if tag == ConfigTag::R && !frozen(o.e, 0.0) {
                return conflict("E", tag);
            }
            if tag == ConfigTag::EOnly && !frozen(o.r, 1.0) {
                return conflict("r", tag);
            }
            let p = LightParams {
                r: if tag == ConfigTag::EOnly {
                    1.0
                } else {
                    o.r.unwrap_or(1.0)
                },
                e: if tag == ConfigTag::R {
                    0.0
                } else {
                    o.e.unwrap_or(0.0)
                },
                k: 1.0,
                t_start: o.t_start.unwrap_or(DEFAULT_T_START),
                n_start: o.n_start.unwrap_or(DEFAULT_N_START),
                q: o.q.unwrap_or(QValue::Infinite),
                epsilon: o.epsilon,
            };
            p.validate()?;
            Ok(p)
        }
    }
}

/// Largest exponent fed to `exp` before the evaluation short-circuits to the
/// corresponding limit.
const EXP_GUARD: f64 = 700.0;

enum Kind {
    /// Verhulst: cached `s = K(1-E/r)`, `rho = r - E`, `b = 1 - s/N_T`.
    Verhulst { s: f64, rho: f64, b: f64 },
    /// Gompertz / generalized: `scale * e^{c * e^{-r(t-T)}}`. For Gompertz
    /// `scale = K e^{-E/r}` and `c = ln(N_T/K) + E/r`; the onset value is
    /// then exactly `N_T`.
    GenLike {
        c: f64,
        scale: f64,
        exact_onset: Option<f64>,
    },
}

/// A prevalidated (model, parameters) pair with cached constants; the hot
/// path used by training loops.
pub struct LightNeuron {
    kind: Kind,
    r: f64,
    k: f64,
    t_start: f64,
    n_start: f64,
    asymptote: f64,
}

impl LightNeuron {
    pub fn new(model: GrowthModel, p: &LightParams) -> Result<Self> {
        p.validate()?;
        let kind = match model {
            GrowthModel::Verhulst => Kind::Verhulst {
                s: p.k * (1.0 - p.e / p.r),
                rho: p.r - p.e,
                b: 1.0 - p.k * (1.0 - p.e / p.r) / p.n_start,
            },
            GrowthModel::Gompertz => Kind::GenLike {
                c: (p.n_start / p.k).ln() + p.e / p.r,
                scale: p.k * (-p.e / p.r).exp(),
                exact_onset: Some(p.n_start),
            },
            GrowthModel::Generalized => Kind::GenLike {
                c: q_log(p.q, p.n_start / p.k)? + p.e / p.r,
                scale: p.epsilon_value() * p.k,
                exact_onset: None,
            },
        };
        let asymptote = match &kind {
            Kind::Verhulst { s, .. } => *s,
            Kind::GenLike { scale, .. } => *scale,
        };
        Ok(LightNeuron {
            kind,
            r: p.r,
            k: p.k,
            t_start: p.t_start,
            n_start: p.n_start,
            asymptote,
        })
    }

    /// Upper limit of the activation as `t -> inf` (`s` for Verhulst,
    /// `K e^{-E/r}` for Gompertz, `eps K` for the generalized form).
    pub fn asymptote(&self) -> f64 {
        self.asymptote
    }

    /// Decision midpoint of the activation: half its own saturation value.
    /// Coincides with `K/2` for every zero-harvest configuration.
    pub fn midpoint(&self) -> f64 {
        self.asymptote / 2.0
    }

    /// `E = r` degenerates the Verhulst form to hyperbolic decay
    /// `K N_T / (K + N_T r (t - T))`; this is that denominator.
    fn hyperbolic_denom(&self, t: f64, function: &'static str) -> Result<f64> {
        let denom = self.k + self.n_start * self.r * (t - self.t_start);
        if denom.abs() < 1e-12 * self.k {
            return Err(LightError::Numeric {
                function,
                at: t,
                message: "Verhulst denominator vanished".into(),
            });
        }
        Ok(denom)
    }

    /// Activation value at input `t`.
    pub fn value(&self, t: f64) -> Result<f64> {
        match &self.kind {
            Kind::Verhulst { s, rho, b } => {
                if *rho == 0.0 {
                    let denom = self.hyperbolic_denom(t, "light_forward")?;
                    return Ok(self.k * self.n_start / denom);
                }
                if t == self.t_start || *b == 0.0 {
                    if t == self.t_start {
                        return Ok(self.n_start);
                    }
                    return Ok(*s);
                }
                let z = -rho * (t - self.t_start);
                let (n, denom) = if z <= 0.0 {
                    let ez = z.exp();
                    (s / (1.0 - b * ez), 1.0 - b * ez)
                } else {
                    let emz = (-z).exp();
                    (s * emz / (emz - b), emz - b)
                };
                if denom.abs() < 1e-12 * (1.0 + b.abs()) {
                    return Err(LightError::Numeric {
                        function: "light_forward",
                        at: t,
                        message: "Verhulst denominator vanished".into(),
                    });
                }
                Ok(n)
            }
            Kind::GenLike {
                c,
                scale,
                exact_onset,
            } => {
                if t == self.t_start {
                    if let Some(n) = exact_onset {
                        return Ok(*n);
                    }
                }
                let w = -self.r * (t - self.t_start);
                if *c == 0.0 {
                    return Ok(*scale);
                }
                if w > EXP_GUARD {
                    return Ok(if *c < 0.0 { 0.0 } else { f64::INFINITY });
                }
                Ok(scale * (c * w.exp()).exp())
            }
        }
    }

    /// Exact analytic derivative of `value` with respect to `t`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        match &self.kind {
            Kind::Verhulst { s, rho, b } => {
                if *rho == 0.0 {
                    let denom = self.hyperbolic_denom(t, "light_derivative")?;
                    return Ok(-self.r * self.k * self.n_start * self.n_start / (denom * denom));
                }
                if *b == 0.0 {
                    return Ok(0.0);
                }
                let z = -rho * (t - self.t_start);
                let (num, denom) = if z <= 0.0 {
                    let ez = z.exp();
                    (-s * b * rho * ez, 1.0 - b * ez)
                } else {
                    let emz = (-z).exp();
                    (-s * b * rho * emz, emz - b)
                };
                if denom.abs() < 1e-12 * (1.0 + b.abs()) {
                    return Err(LightError::Numeric {
                        function: "light_derivative",
                        at: t,
                        message: "Verhulst denominator vanished".into(),
                    });
                }
                Ok(num / (denom * denom))
            }
            Kind::GenLike { c, scale, .. } => {
                if *c == 0.0 {
                    return Ok(0.0);
                }
                let w = -self.r * (t - self.t_start);
                if w > EXP_GUARD {
                    return Ok(if *c < 0.0 { 0.0 } else { f64::NEG_INFINITY });
                }
                let ew = w.exp();
                let expo = w + c * ew;
                Ok(-scale * self.r * c * expo.exp())
            }
        }
    }

    /// `l'(t) / l(t)`, the logarithmic derivative. Bounded by `r - E` for the
    /// Verhulst form; grows like `e^{-r(t-T)}` for the Gompertz-like forms
    /// (saturating to infinity, which callers are expected to cap).
    pub fn log_deriv_ratio(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Verhulst { rho, b, .. } => {
                if *rho == 0.0 {
                    let denom = self.k + self.n_start * self.r * (t - self.t_start);
                    return -self.r * self.n_start / denom;
                }
                if *b == 0.0 {
                    return 0.0;
                }
                let z = -rho * (t - self.t_start);
                if z <= 0.0 {
                    let ez = z.exp();
                    -b * rho * ez / (1.0 - b * ez)
                } else {
                    let emz = (-z).exp();
                    -b * rho / (emz - b)
                }
            }
            Kind::GenLike { c, .. } => {
                let w = -self.r * (t - self.t_start);
                if w > EXP_GUARD {
                    return if *c < 0.0 {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    };
                }
                -self.r * c * w.exp()
            }
        }
    }

    /// `1 - l(t)` without cancellation when the activation saturates at 1
    /// (the K = 1, E = 0 configurations).
    pub fn one_minus_value(&self, t: f64) -> Result<f64> {
        match &self.kind {
            Kind::Verhulst { s, rho, b } => {
                if *rho == 0.0 {
                    let denom = self.hyperbolic_denom(t, "light_forward")?;
                    return Ok((denom - self.k * self.n_start) / denom);
                }
                if *b == 0.0 {
                    return Ok(1.0 - s);
                }
                let z = -rho * (t - self.t_start);
                let (num, denom) = if z <= 0.0 {
                    let ez = z.exp();
                    ((1.0 - s) - b * ez, 1.0 - b * ez)
                } else {
                    let emz = (-z).exp();
                    ((1.0 - s) * emz - b, emz - b)
                };
                if denom.abs() < 1e-12 * (1.0 + b.abs()) {
                    return Err(LightError::Numeric {
                        function: "light_forward",
                        at: t,
                        message: "Verhulst denominator vanished".into(),
                    });
                }
                Ok(num / denom)
            }
            Kind::GenLike { c, scale, .. } => {
                let w = -self.r * (t - self.t_start);
                if *c == 0.0 {
                    return Ok(1.0 - scale);
                }
                if w > EXP_GUARD {
                    // value saturates to 0 (c < 0) or blows up (c > 0)
                    return Ok(if *c < 0.0 { 1.0 } else { f64::NEG_INFINITY });
                }
                // 1 - scale * e^{c e^w} = -expm1(ln(scale) + c e^w)
                Ok(-(scale.ln() + c * w.exp()).exp_m1())
            }
        }
    }

    /// `l'(t) / (1 - l(t))`: the negative-label factor of the
    /// cross-entropy gradient, computed without cancellation.
    pub fn deriv_over_one_minus(&self, t: f64) -> Result<f64> {
        let lp = self.derivative(t)?;
        let om = self.one_minus_value(t)?;
        if lp == 0.0 {
            return Ok(0.0);
        }
        let ratio = lp / om;
        if !ratio.is_nan() {
            return Ok(ratio);
        }
        // Both factors overflowed: the decreasing Gompertz-like regime
        // (c > 0) blows past 1 and l'/(1-l) tends to r c e^{-r(t-T)}.
        match &self.kind {
            Kind::GenLike { c, .. } => {
                let w = -self.r * (t - self.t_start);
                let ew = if w > EXP_GUARD {
                    f64::INFINITY
                } else {
                    w.exp()
                };
                Ok(self.r * c * ew)
            }
            Kind::Verhulst { .. } => Ok(ratio),
        }
    }
}

/// Evaluate the LIGHT activation at `t` under the given model and parameters.
pub fn light_forward(t: f64, model: GrowthModel, p: &LightParams) -> Result<f64> {
    LightNeuron::new(model, p)?.value(t)
}

/// Exact analytic derivative of [`light_forward`] with respect to `t`.
pub fn light_derivative(t: f64, model: GrowthModel, p: &LightParams) -> Result<f64> {
    LightNeuron::new(model, p)?.derivative(t)
}
