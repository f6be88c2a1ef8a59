//! Exponentially tilted empirical likelihood.
//!
//! The maximum-entropy weights subject to `sum p_i h_i = 0` have the form
//! `p_i ∝ exp(eta h_i)`, where `eta` is the root of the strictly increasing
//! function `g(eta) = sum p_i(eta) h_i`. The root is found by Newton steps
//! kept inside a shrinking bracket, falling back to bisection.

use super::moments::{MomentCondition, PseudoData};

/// Bracket for the tilting parameter; a root outside it is treated as
/// "constraint unattainable".
pub const ETA_BOUND: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EtelSolution {
    pub eta: f64,
    /// `sum_i ln p_i`; `-inf` when the constraint cannot be met.
    pub log_lik: f64,
    /// `|sum_i p_i h_i|` at the returned `eta`.
    pub residual: f64,
}

struct Tilt {
    g: f64,
    dg: f64,
    log_norm: f64,
    shift: f64,
}

fn tilt(h: &[f64], eta: f64) -> Tilt {
    let shift = h.iter().map(|&x| eta * x).fold(f64::NEG_INFINITY, f64::max);
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for &x in h {
        let w = (eta * x - shift).exp();
        s0 += w;
        s1 += w * x;
        s2 += w * x * x;
    }
    let g = s1 / s0;
    Tilt { g, dg: (s2 / s0 - g * g).max(0.0), log_norm: s0.ln(), shift }
}

/// Solve the dual problem for moment values `h`.
pub fn etel_dual(h: &[f64]) -> EtelSolution {
    let n = h.len() as f64;
    let unattainable = EtelSolution { eta: f64::NAN, log_lik: f64::NEG_INFINITY, residual: f64::NAN };
    if h.is_empty() || h.iter().any(|x| !x.is_finite()) {
        return unattainable;
    }
    let hmin = h.iter().copied().fold(f64::INFINITY, f64::min);
    let hmax = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hmin == 0.0 && hmax == 0.0 {
        return EtelSolution { eta: 0.0, log_lik: -n * n.ln(), residual: 0.0 };
    }
    if hmin >= 0.0 || hmax <= 0.0 {
        return unattainable;
    }
    let scale = hmin.abs().max(hmax.abs());
    let tol = 1e-14 * scale;

    let mut lo = -ETA_BOUND;
    let mut hi = ETA_BOUND;
    if tilt(h, lo).g > 0.0 || tilt(h, hi).g < 0.0 {
        return unattainable;
    }
    let mut eta = 0.0;
    let mut t = tilt(h, eta);
    for _ in 0..200 {
        if t.g.abs() <= tol {
            break;
        }
        if t.g > 0.0 {
            hi = eta;
        } else {
            lo = eta;
        }
        let newton = eta - t.g / t.dg;
        eta = if t.dg > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        t = tilt(h, eta);
        if hi - lo < 1e-15 * (1.0 + eta.abs()) {
            break;
        }
    }
    let sum_h: f64 = h.iter().sum();
    // ln p_i = eta h_i - shift - log_norm
    let log_lik = eta * sum_h - n * (t.shift + t.log_norm);
    EtelSolution { eta, log_lik, residual: t.g.abs() }
}

/// ETEL weights `p_i` at the solution (for inspection and tests).
pub fn etel_weights(h: &[f64], eta: f64) -> Vec<f64> {
    let shift = h.iter().map(|&x| eta * x).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = h.iter().map(|&x| (eta * x - shift).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Log ETEL likelihood of `psi` on pseudo-data `u`.
pub fn etel_loglik(cond: &MomentCondition, psi: f64, u: &PseudoData) -> f64 {
    let h = cond.evaluate(u, psi);
    etel_dual(&h).log_lik
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::moments::{moment_for, Functional};

    #[test]
    fn uniform_weights_when_constraint_holds() {
        let sol = etel_dual(&[-1.0, 0.0, 1.0]);
        assert_eq!(sol.eta, 0.0);
        assert!((sol.log_lik - 3.0 * (1.0f64 / 3.0).ln()).abs() < 1e-14);

        let zero = etel_dual(&[0.0; 7]);
        assert_eq!(zero.log_lik, -7.0 * 7f64.ln());
    }

    #[test]
    fn outside_hull_is_log_zero() {
        assert_eq!(etel_dual(&[1.0, 2.0, 3.0]).log_lik, f64::NEG_INFINITY);
        assert_eq!(etel_dual(&[-1.0, -2.0]).log_lik, f64::NEG_INFINITY);
        assert_eq!(etel_dual(&[0.0, 2.0]).log_lik, f64::NEG_INFINITY);
    }

    #[test]
    fn root_satisfies_constraint() {
        let h = [-0.5, 0.2, 3.0, -1.2, 0.7, 0.1];
        let sol = etel_dual(&h);
        let p = etel_weights(&h, sol.eta);
        let resid: f64 = p.iter().zip(&h).map(|(a, b)| a * b).sum();
        assert!(resid.abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let direct: f64 = p.iter().map(|x| x.ln()).sum();
        assert!((direct - sol.log_lik).abs() < 1e-10);
        assert!(sol.log_lik <= -(h.len() as f64) * (h.len() as f64).ln());
    }

    #[test]
    fn tail_moment_two_point_solution() {
        // 2 joint exceedances out of 100 at t = 0.9: statistic is 10 or 0
        let cond = moment_for(Functional::UpperTail(0.9));
        let mut rows = vec![[0.5, 0.5]; 98];
        rows.push([0.95, 0.95]);
        rows.push([0.99, 0.92]);
        let u = PseudoData::new(rows);
        let plug = cond.plug_in(&u);
        assert!((plug - 0.2).abs() < 1e-12);
        let at_plug = etel_loglik(&cond, plug, &u);
        assert!((at_plug + 100.0 * 100f64.ln()).abs() < 1e-8);
        assert!(etel_loglik(&cond, 0.5, &u) < at_plug);
    }
}
