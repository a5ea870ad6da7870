//! Closed-form harvested growth laws and their equilibrium/yield arithmetic.
//!
//! Both laws impose proportional harvesting `H(t) = E * N(t)` from the onset
//! time `T` onward:
//!
//! - Verhulst:  `dN/dt = r N (1 - N/K) - E N`, solved by
//!   `N(t) = s / (1 - (1 - s/N_T) e^{-(r-E)(t-T)})` with `s = K (1 - E/r)`.
//! - Gompertz:  `dN/dt = r N ln(K/N) - E N`, solved by
//!   `N(t) = K e^{-E/r + s e^{-r(t-T)}}` with `s = ln(N_T/K) + E/r`.

use crate::error::{LightError, Result};

/// Which population law is in force.
///
/// `Generalized` is the q-deformed interpolation used by the activation
/// layer; for equilibrium and yield arithmetic it shares the Gompertz
/// formulas (its default scaling reproduces the Gompertz solution exactly in
/// the q -> inf limit).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthModel {
    Verhulst,
    Gompertz,
    Generalized,
}

impl GrowthModel {
    pub fn label(&self) -> &'static str {
        match self {
            GrowthModel::Verhulst => "verhulst",
            GrowthModel::Gompertz => "gompertz",
            GrowthModel::Generalized => "generalized",
        }
    }
}

/// Parameters of a harvested growth law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationParams {
    /// Per-capita growth rate r (> 0).
    pub r: f64,
    /// Per-capita harvesting rate E (>= 0).
    pub e: f64,
    /// Carrying capacity K (> 0).
    pub k: f64,
    /// Harvesting onset time T.
    pub t_start: f64,
    /// Population at the onset, 0 < N_T < K.
    pub n_start: f64,
}

impl PopulationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(LightError::InvalidParams(format!(
                "r must be > 0, got {}",
                self.r
            )));
        }
        if !(self.e.is_finite() && self.e >= 0.0) {
            return Err(LightError::InvalidParams(format!(
                "E must be >= 0, got {}",
                self.e
            )));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(LightError::InvalidParams(format!(
                "K must be > 0, got {}",
                self.k
            )));
        }
        if !self.t_start.is_finite() {
            return Err(LightError::InvalidParams(format!(
                "T must be finite, got {}",
                self.t_start
            )));
        }
        if !(self.n_start > 0.0 && self.n_start < self.k) {
            return Err(LightError::InvalidParams(format!(
                "N_T must satisfy 0 < N_T < K, got N_T={} K={}",
                self.n_start, self.k
            )));
        }
        Ok(())
    }

    /// Equilibrium the solution tends to: `s = K(1 - E/r)` for Verhulst,
    /// `K e^{-E/r}` otherwise. Negative or zero for Verhulst in the
    /// extinction regime `E >= r`.
    pub fn asymptote(&self, model: GrowthModel) -> f64 {
        match model {
            GrowthModel::Verhulst => self.k * (1.0 - self.e / self.r),
            GrowthModel::Gompertz | GrowthModel::Generalized => self.k * (-self.e / self.r).exp(),
        }
    }
}

/// Stability of the reported nontrivial equilibrium. `Collapsed` marks the
/// Verhulst extinction regime `E >= r` where the nontrivial point is <= 0;
/// `Unstable` is reserved for the trivial point when reported on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Collapsed,
}

/// Equilibria of a harvested law together with the realized harvest there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport {
    pub trivial_point: f64,
    pub nontrivial_point: f64,
    /// `H = E * N*`, clamped to 0 when the nontrivial point is <= 0.
    pub harvest_at_equilibrium: f64,
    pub stability_note: Stability,
}

/// Yield-maximizing harvesting for a given growth rate: `(E*, N*, H*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredefinedRates {
    pub e_star: f64,
    pub n_star: f64,
    pub h_star: f64,
}

/// Closed-form Verhulst solution with proportional harvesting.
///
/// Exact at the onset (`N(T) = N_T`). Fails with a numeric error when the
/// denominator vanishes, which can happen before the onset in the extinction
/// regime.
pub fn verhulst_solution(t: f64, p: &PopulationParams) -> Result<f64> {
    p.validate()?;
    if t == p.t_start {
        return Ok(p.n_start);
    }
    let s = p.asymptote(GrowthModel::Verhulst);
    let rho = p.r - p.e;
    if rho == 0.0 {
        // E = r: the logistic form degenerates to hyperbolic decay
        // N(t) = K N_T / (K + N_T r (t - T)).
        let denom = p.k + p.n_start * p.r * (t - p.t_start);
        if denom.abs() < 1e-12 * p.k {
            return Err(LightError::Numeric {
                function: "verhulst_solution",
                at: t,
                message: "denominator vanished".into(),
            });
        }
        return Ok(p.k * p.n_start / denom);
    }
    let b = 1.0 - s / p.n_start;
    let z = -rho * (t - p.t_start);
    // Two algebraically equal forms, picked so the exponential never overflows.
    let (n, denom) = if z <= 0.0 {
        let ez = z.exp();
        (s / (1.0 - b * ez), 1.0 - b * ez)
    } else {
        let emz = (-z).exp();
        (s * emz / (emz - b), emz - b)
    };
    if denom.abs() < 1e-12 {
        return Err(LightError::Numeric {
            function: "verhulst_solution",
            at: t,
            message: "denominator vanished".into(),
        });
    }
    Ok(n)
}

/// Closed-form Gompertz solution with proportional harvesting. Exact at the
/// onset.
pub fn gompertz_solution(t: f64, p: &PopulationParams) -> Result<f64> {
    p.validate()?;
    if t == p.t_start {
        return Ok(p.n_start);
    }
    let s = (p.n_start / p.k).ln() + p.e / p.r;
    let w = -p.r * (t - p.t_start);
    if s == 0.0 {
        // Started exactly at the equilibrium: constant solution.
        return Ok(p.k * (-p.e / p.r).exp());
    }
    let expo = -p.e / p.r + s * w.exp();
    Ok(p.k * expo.exp())
}

/// Right-hand side of the harvested ODE at population `n` (harvesting
/// active). Used for residual and fixed-point checks.
pub fn growth_rhs(model: GrowthModel, p: &PopulationParams, n: f64) -> f64 {
    match model {
        GrowthModel::Verhulst => p.r * n * (1.0 - n / p.k) - p.e * n,
        GrowthModel::Gompertz | GrowthModel::Generalized => {
            if n <= 0.0 {
                0.0
            } else {
                p.r * n * (p.k / n).ln() - p.e * n
            }
        }
    }
}

/// Equilibria and realized harvest of the law under `p`.
pub fn equilibria(model: GrowthModel, p: &PopulationParams) -> Result<EquilibriumReport> {
    p.validate()?;
    let nontrivial = p.asymptote(model);
    let stability_note = match model {
        GrowthModel::Verhulst if p.e >= p.r => Stability::Collapsed,
        _ => Stability::Stable,
    };
    Ok(EquilibriumReport {
        trivial_point: 0.0,
        nontrivial_point: nontrivial,
        harvest_at_equilibrium: if nontrivial > 0.0 {
            p.e * nontrivial
        } else {
            0.0
        },
        stability_note,
    })
}

/// The harvesting rate, equilibrium and harvest that maximize sustainable
/// yield for a given `r`: `(r/2, K/2, rK/4)` for Verhulst and
/// `(r, K/e, rK/e)` for Gompertz.
pub fn predefined_rates(model: GrowthModel, r: f64, k: f64) -> Result<PredefinedRates> {
    if !(r.is_finite() && r > 0.0) {
        return Err(LightError::InvalidParams(format!("r must be > 0, got {r}")));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(LightError::InvalidParams(format!("K must be > 0, got {k}")));
    }
    Ok(match model {
        GrowthModel::Verhulst => PredefinedRates {
            e_star: r / 2.0,
            n_star: k / 2.0,
            h_star: r * k / 4.0,
        },
        GrowthModel::Gompertz | GrowthModel::Generalized => PredefinedRates {
            e_star: r,
            n_star: k / std::f64::consts::E,
            h_star: r * k / std::f64::consts::E,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> PopulationParams {
        PopulationParams {
            r: 0.9,
            e: 0.1,
            k: 1.0,
            t_start: 4.0,
            n_start: 0.2,
        }
    }

    /// RK4 integration of the harvested ODE from (T, N_T); test-side oracle.
    fn rk4(model: GrowthModel, p: &PopulationParams, t1: f64, h: f64) -> f64 {
        let f = |n: f64| growth_rhs(model, p, n);
        let steps = ((t1 - p.t_start) / h).round() as usize;
        let mut n = p.n_start;
        for _ in 0..steps {
            let k1 = f(n);
            let k2 = f(n + 0.5 * h * k1);
            let k3 = f(n + 0.5 * h * k2);
            let k4 = f(n + h * k3);
            n += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        n
    }

    #[test]
    fn initial_condition_is_exact() {
        for p in [
            fig2(),
            PopulationParams {
                r: 2.0,
                e: 0.0,
                k: 3.0,
                t_start: -1.5,
                n_start: 0.7,
            },
            PopulationParams {
                r: 0.5,
                e: 1.2,
                k: 1.0,
                t_start: 0.0,
                n_start: 0.9,
            },
        ] {
            assert_eq!(verhulst_solution(p.t_start, &p).unwrap(), p.n_start);
            assert_eq!(gompertz_solution(p.t_start, &p).unwrap(), p.n_start);
        }
    }

    #[test]
    fn unharvested_verhulst_is_plain_logistic() {
        let p = PopulationParams {
            r: 1.0,
            e: 0.0,
            k: 1.0,
            t_start: 0.0,
            n_start: 0.5,
        };
        assert_eq!(verhulst_solution(0.0, &p).unwrap(), 0.5);
        assert!((verhulst_solution(80.0, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn verhulst_matches_rk4_on_figure_params() {
        let p = fig2();
        let closed = verhulst_solution(6.0, &p).unwrap();
        let numeric = rk4(GrowthModel::Verhulst, &p, 6.0, 1e-4);
        assert!(
            (closed - numeric).abs() < 1e-6,
            "closed={closed} rk4={numeric}"
        );
        // High-precision reference of the same point.
        assert!((closed - 0.524287897081117).abs() < 1e-12);
    }

    #[test]
    fn gompertz_matches_rk4_on_figure_params() {
        let p = fig2();
        let closed = gompertz_solution(6.0, &p).unwrap();
        let numeric = rk4(GrowthModel::Gompertz, &p, 6.0, 1e-4);
        assert!(
            (closed - numeric).abs() < 1e-6,
            "closed={closed} rk4={numeric}"
        );
        assert!((closed - 0.698526008938030).abs() < 1e-12);
    }

    #[test]
    fn gompertz_asymptote() {
        let p = PopulationParams {
            r: 1.0,
            e: 1.0,
            k: 1.0,
            t_start: 0.0,
            n_start: 0.2,
        };
        let n = gompertz_solution(60.0, &p).unwrap();
        assert!((n - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn ode_residual_central_difference() {
        let param_sets = [
            fig2(),
            PopulationParams {
                r: 2.3,
                e: 0.4,
                k: 1.0,
                t_start: 1.0,
                n_start: 0.35,
            },
            PopulationParams {
                r: 1.1,
                e: 0.9,
                k: 2.0,
                t_start: 0.0,
                n_start: 0.5,
            },
        ];
        let h = 1e-5;
        for p in param_sets {
            for i in 0..40 {
                let t = p.t_start - 1.5 + 0.1 * i as f64;
                for model in [GrowthModel::Verhulst, GrowthModel::Gompertz] {
                    let sol = |t| match model {
                        GrowthModel::Verhulst => verhulst_solution(t, &p).unwrap(),
                        _ => gompertz_solution(t, &p).unwrap(),
                    };
                    let fd = (sol(t + h) - sol(t - h)) / (2.0 * h);
                    let rhs = growth_rhs(model, &p, sol(t));
                    let rel = (fd - rhs).abs() / rhs.abs().max(1e-6);
                    assert!(rel < 1e-6, "{model:?} t={t} fd={fd} rhs={rhs}");
                }
            }
        }
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        for p in [
            fig2(),
            PopulationParams {
                r: 13.23,
                e: 7.6,
                k: 1.0,
                t_start: 0.1,
                n_start: 0.2,
            },
        ] {
            for model in [GrowthModel::Verhulst, GrowthModel::Gompertz] {
                let rep = equilibria(model, &p).unwrap();
                if rep.nontrivial_point > 0.0 {
                    assert!(growth_rhs(model, &p, rep.nontrivial_point).abs() <= 1e-10);
                }
                assert_eq!(growth_rhs(model, &p, rep.trivial_point), 0.0);
            }
        }
    }

    #[test]
    fn equilibria_examples() {
        let p = PopulationParams {
            r: 1.0,
            e: 0.0,
            k: 1.0,
            t_start: 0.0,
            n_start: 0.5,
        };
        let rep = equilibria(GrowthModel::Verhulst, &p).unwrap();
        assert_eq!(rep.nontrivial_point, 1.0);
        assert_eq!(rep.stability_note, Stability::Stable);

        // Realized harvest cells of the main results table.
        let p = PopulationParams {
            r: 13.23,
            e: 7.6,
            k: 1.0,
            t_start: 0.1,
            n_start: 0.2,
        };
        let rep = equilibria(GrowthModel::Verhulst, &p).unwrap();
        assert!((rep.nontrivial_point - 0.4256).abs() < 1e-3);
        assert!((rep.harvest_at_equilibrium - 3.23).abs() < 0.01);

        let p = PopulationParams {
            r: 12.04,
            e: 6.0,
            k: 1.0,
            t_start: 0.1,
            n_start: 0.2,
        };
        let rep = equilibria(GrowthModel::Gompertz, &p).unwrap();
        assert!((rep.nontrivial_point - 0.6076).abs() < 1e-3);
        assert!((rep.harvest_at_equilibrium - 3.65).abs() < 0.01);
    }

    #[test]
    fn extinction_regime_is_flagged_but_evaluable() {
        let p = PopulationParams {
            r: 1.0,
            e: 9.2,
            k: 1.0,
            t_start: 0.0,
            n_start: 0.5,
        };
        let rep = equilibria(GrowthModel::Verhulst, &p).unwrap();
        assert_eq!(rep.stability_note, Stability::Collapsed);
        assert!(rep.nontrivial_point < 0.0);
        assert_eq!(rep.harvest_at_equilibrium, 0.0);
        assert!(verhulst_solution(5.0, &p).unwrap().is_finite());
    }

    #[test]
    fn verhulst_pole_is_reported() {
        // Extinction regime with the singularity before the onset.
        let p = PopulationParams {
            r: 0.5,
            e: 1.0,
            k: 1.0,
            t_start: 0.0,
            n_start: 0.2,
        };
        let s = p.asymptote(GrowthModel::Verhulst);
        let b = 1.0 - s / p.n_start;
        let t_pole = p.t_start + b.ln() / (p.r - p.e);
        match verhulst_solution(t_pole, &p) {
            Err(LightError::Numeric { at, .. }) => assert_eq!(at, t_pole),
            other => panic!("expected numeric error at the pole, got {other:?}"),
        }
    }

    #[test]
    fn predefined_rates_examples() {
        let v = predefined_rates(GrowthModel::Verhulst, 7.26, 1.0).unwrap();
        assert!((v.e_star - 3.63).abs() < 0.01);
        assert!((v.h_star - 1.82).abs() < 0.01);

        let g = predefined_rates(GrowthModel::Gompertz, 6.07, 1.0).unwrap();
        assert!((g.e_star - 6.07).abs() < 1e-12);
        assert!((g.h_star - 2.23).abs() < 0.01);

        let v = predefined_rates(GrowthModel::Verhulst, 2.0, 2.0).unwrap();
        assert_eq!((v.e_star, v.n_star, v.h_star), (1.0, 1.0, 1.0));
    }

    #[test]
    fn harvest_maximizers_on_grid() {
        let (r, k) = (3.7, 1.0);
        let cells = 10_000;
        // Verhulst: E in (0, r), maximum of E * K(1 - E/r) at r/2.
        let mut best = (f64::MIN, 0.0);
        for i in 1..cells {
            let e = r * i as f64 / cells as f64;
            let h = e * k * (1.0 - e / r);
            if h > best.0 {
                best = (h, e);
            }
        }
        assert!((best.1 - r / 2.0).abs() <= r / cells as f64);
        // Gompertz: E in (0, 2r), maximum of E * K e^{-E/r} at r.
        let mut best = (f64::MIN, 0.0);
        for i in 1..cells {
            let e = 2.0 * r * i as f64 / cells as f64;
            let h = e * k * (-e / r).exp();
            if h > best.0 {
                best = (h, e);
            }
        }
        assert!((best.1 - r).abs() <= 2.0 * r / cells as f64);
    }

    #[test]
    fn zero_harvest_converges_to_capacity() {
        for model in [GrowthModel::Verhulst, GrowthModel::Gompertz] {
            let p = PopulationParams {
                r: 1.3,
                e: 0.0,
                k: 2.5,
                t_start: 0.0,
                n_start: 0.4,
            };
            let sol = |t| match model {
                GrowthModel::Verhulst => verhulst_solution(t, &p).unwrap(),
                _ => gompertz_solution(t, &p).unwrap(),
            };
            let mut last = f64::INFINITY;
            for t in [5.0, 10.0, 20.0, 40.0] {
                let gap = (sol(t) - p.k).abs();
                assert!(gap < last);
                last = gap;
            }
            assert!(last < 1e-9);
        }
    }

    #[test]
    fn parameter_validation() {
        let bad = PopulationParams {
            r: 0.0,
            e: 0.0,
            k: 1.0,
            t_start: 0.0,
            n_start: 0.5,
        };
        assert!(bad.validate().is_err());
        let bad = PopulationParams {
            r: 1.0,
            e: -0.1,
            k: 1.0,
            t_start: 0.0,
            n_start: 0.5,
        };
        assert!(bad.validate().is_err());
        let bad = PopulationParams {
            r: 1.0,
            e: 0.0,
            k: 1.0,
            t_start: 0.0,
            n_start: 1.5,
        };
        assert!(bad.validate().is_err());
        assert!(predefined_rates(GrowthModel::Verhulst, -1.0, 1.0).is_err());
    }
}
