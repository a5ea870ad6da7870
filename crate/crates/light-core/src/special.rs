//! Scalar special functions: the q-deformed logarithm and the principal
//! branch of the Lambert W function.
//!
//! The q-logarithm here is the family `ln_q(x) = q * (x^(1/q) - 1)`. It is
//! strictly increasing in `x`, satisfies `ln_1(x) = x - 1`, and converges to
//! the natural logarithm as `q -> inf`, which is the limit the rest of the
//! crate relies on.

use crate::error::{LightError, Result};

/// Deformation parameter of the q-logarithm.
///
/// `Infinite` selects the classical logarithm limit exactly; finite values
/// must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QValue {
    Finite(f64),
    Infinite,
}

impl QValue {
    pub fn finite(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(QValue::Finite(q))
        } else {
            Err(LightError::InvalidParams(format!(
                "q must be a positive finite real, got {q}"
            )))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, QValue::Infinite)
    }
}

/// q-logarithm `ln_q(x) = q * (x^(1/q) - 1)` for finite `q`, `ln(x)` for the
/// infinite variant. Requires `x > 0`.
pub fn q_log(q: QValue, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(LightError::Domain {
            function: "q_log",
            message: format!("x must be positive, got {x}"),
        });
    }
    Ok(match q {
        // exp_m1 keeps the large-q limit accurate: q*(e^(ln x / q) - 1).
        QValue::Finite(q) => q * (x.ln() / q).exp_m1(),
        QValue::Infinite => x.ln(),
    })
}

/// Values of `x` within `BRANCH_TOLERANCE` below `-1/e` are clamped to the
/// branch point instead of rejected.
pub const BRANCH_TOLERANCE: f64 = 1e-12;

/// Below this offset from the branch point the series expansion in
/// `p = sqrt(2(1 + e*x))` is used as the initial guess (and, very close to
/// the branch point, as the returned value: the Halley denominator
/// degenerates there).
const BRANCH_SERIES_WINDOW: f64 = 1e-2;

const RESIDUAL_TARGET: f64 = 1e-12;
const MAX_ITERATIONS: usize = 64;

/// Principal branch `W_0` of the Lambert W function: the solution `w >= -1`
/// of `w * e^w = x`, defined for `x >= -1/e`.
///
/// Damped Halley iteration from a regime-dependent initial guess; the
/// accepted residual is `|w e^w - x| <= 1e-12 * max(1, |x|)`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -(-1.0f64).exp(); // -1/e
    if !x.is_finite() || x < branch - BRANCH_TOLERANCE {
        return Err(LightError::Domain {
            function: "lambert_w0",
            message: format!("x must be >= -1/e = {branch}, got {x}"),
        });
    }
    if x <= branch {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let mut w = initial_guess(x, branch);
    // Extremely close to the branch point the series itself is the best
    // available answer: (1 + w) e^w underflows any Newton/Halley step.
    if x - branch < 1e-12 {
        return Ok(w);
    }

    let tol = RESIDUAL_TARGET * x.abs().max(1.0);
    let mut refined = false;
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= tol {
            if refined {
                return Ok(w);
            }
            // Near the branch point the residual criterion is lax (the
            // derivative vanishes); one extra step costs nothing.
            refined = true;
        }
        // Halley: w' = w - f / (e^w (w+1) - (w+2) f / (2(w+1)))
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let mut step = f / denom;
        if !step.is_finite() || step == 0.0 {
            return Ok(w);
        }
        // Damp steps that would jump past the branch point.
        while w - step < -1.0 {
            step *= 0.5;
        }
        w -= step;
    }
    let residual = (w * w.exp() - x).abs();
    if residual <= tol {
        Ok(w)
    } else {
        Err(LightError::Numeric {
            function: "lambert_w0",
            at: x,
            message: format!(
                "no convergence after {MAX_ITERATIONS} iterations (residual {residual:e})"
            ),
        })
    }
}

fn initial_guess(x: f64, branch: f64) -> f64 {
    if x - branch < BRANCH_SERIES_WINDOW {
        // Series around the branch point in p = sqrt(2(1 + e x)).
        let p = (2.0 * (1.0 + std::f64::consts::E * x)).max(0.0).sqrt();
        -1.0 + p
            * (1.0
                + p * (-1.0 / 3.0
                    + p * (11.0 / 72.0 + p * (-43.0 / 540.0 + p * (769.0 / 17280.0)))))
    } else if x < std::f64::consts::E {
        // ln(1+x) is inside the Halley basin on the whole of [-0.35, e].
        x.ln_1p()
    } else {
        // Asymptotic guess for large arguments.
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qlog(q: f64, x: f64) -> f64 {
        q_log(QValue::finite(q).unwrap(), x).unwrap()
    }

    #[test]
    fn q_log_of_one_is_zero() {
        for q in [0.1, 0.5, 1.0, 2.0, 10.0, 1e4, 1e8] {
            assert_eq!(qlog(q, 1.0), 0.0);
        }
        assert_eq!(q_log(QValue::Infinite, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn q_log_examples() {
        assert!((qlog(2.0, 4.0) - 2.0).abs() < 1e-14);
        assert!((qlog(1e6, 2.0) - std::f64::consts::LN_2).abs() < 1e-6);
        // ln_1(x) = x - 1
        assert!((qlog(1.0, 0.5) - (-0.5)).abs() < 1e-14);
    }

    #[test]
    fn q_log_rejects_nonpositive_x() {
        assert!(q_log(QValue::Infinite, 0.0).is_err());
        assert!(q_log(QValue::Infinite, -3.0).is_err());
        assert!(qlog_err(2.0, f64::NAN));
    }

    fn qlog_err(q: f64, x: f64) -> bool {
        q_log(QValue::finite(q).unwrap(), x).is_err()
    }

    #[test]
    fn q_value_validation() {
        assert!(QValue::finite(0.0).is_err());
        assert!(QValue::finite(-1.0).is_err());
        assert!(QValue::finite(f64::INFINITY).is_err());
        assert!(QValue::finite(2.5).is_ok());
    }

    #[test]
    fn q_log_monotone_convergence_to_ln() {
        // |ln_q(x) - ln(x)| decreases as q sweeps 10, 1e2, 1e4, 1e6.
        let xs = [0.05, 0.3, 0.9, 1.7, 4.2, 9.8];
        for &x in &xs {
            let mut last = f64::INFINITY;
            for q in [10.0, 1e2, 1e4, 1e6] {
                let gap = (qlog(q, x) - x.ln()).abs();
                assert!(gap <= last, "gap grew at q={q}, x={x}");
                last = gap;
            }
        }
    }

    #[test]
    fn lambert_trivial_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-12);
        let branch = -(-1.0f64).exp();
        assert!((lambert_w0(branch).unwrap() + 1.0).abs() < 1e-9);
        let x = 0.5 * 0.5f64.exp();
        assert!((lambert_w0(x).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lambert_domain_error() {
        assert!(lambert_w0(-0.368).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
        // Inside the clamp tolerance: accepted as the branch point.
        let branch = -(-1.0f64).exp();
        assert_eq!(lambert_w0(branch - 0.5e-12).unwrap(), -1.0);
    }

    #[test]
    fn lambert_residual_contract() {
        for &x in &[-0.367, -0.2, -1e-9, 1e-9, 0.3, 1.0, 10.0, 1e4, 1e12] {
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1.0), "x={x}");
            assert!(w >= -1.0);
        }
    }

    proptest! {
        #[test]
        fn q_log_strictly_increasing(q in 0.05f64..50.0, a in 0.001f64..10.0, gap in 0.001f64..5.0) {
            let b = a + gap;
            prop_assert!(qlog(q, b) > qlog(q, a));
        }

        #[test]
        fn lambert_roundtrip(w in -1.0f64..10.0) {
            let x = w * w.exp();
            let back = lambert_w0(x).unwrap();
            prop_assert!((back - w).abs() <= 1e-10, "w={w} back={back}");
        }
    }
}
