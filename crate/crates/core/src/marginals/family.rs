//! Parametric families for income and net wealth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MarginalError;
use crate::stats::{norm_cdf, norm_quantile, softplus};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Which family a fit or a draw belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum FamilyTag {
    SinghMaddala,
    Dagum,
    ShiftedLogNormal,
    NegPosMixture,
}

/// How a parameter is mapped to the real line for random-walk proposals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamKind {
    Positive,
    Real,
    /// Supported on `[0, upper)`.
    Bounded(f64),
    /// Held fixed during sampling (mixture weights).
    Fixed,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 4] = [
        FamilyTag::SinghMaddala,
        FamilyTag::Dagum,
        FamilyTag::ShiftedLogNormal,
        FamilyTag::NegPosMixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::SinghMaddala => "singh_maddala",
            FamilyTag::Dagum => "dagum",
            FamilyTag::ShiftedLogNormal => "shifted_lognormal",
            FamilyTag::NegPosMixture => "negpos_mixture",
        }
    }

    /// Row label used in the selection table.
    pub fn label(self) -> &'static str {
        match self {
            FamilyTag::SinghMaddala => "Singh Maddala",
            FamilyTag::Dagum => "Dagum",
            FamilyTag::ShiftedLogNormal => "Log Normal 3",
            FamilyTag::NegPosMixture => "Dagum 3",
        }
    }

    pub fn from_name(s: &str) -> Option<FamilyTag> {
        FamilyTag::ALL.into_iter().find(|t| t.name() == s)
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyTag::SinghMaddala => &["a", "b", "q"],
            FamilyTag::Dagum => &["c", "d", "p"],
            FamilyTag::ShiftedLogNormal => &["mu", "sigma", "gamma"],
            FamilyTag::NegPosMixture => &["w_neg", "w_zero", "l", "k", "c", "d", "p"],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    /// Build a family from a full parameter vector (in `param_names` order).
    pub fn with_params(self, p: &[f64]) -> MarginalFamily {
        match self {
            FamilyTag::SinghMaddala => MarginalFamily::SinghMaddala { a: p[0], b: p[1], q: p[2] },
            FamilyTag::Dagum => MarginalFamily::Dagum { c: p[0], d: p[1], p: p[2] },
            FamilyTag::ShiftedLogNormal => MarginalFamily::ShiftedLogNormal {
                mu: p[0],
                sigma: p[1],
                gamma: p[2],
            },
            FamilyTag::NegPosMixture => MarginalFamily::NegPosMixture {
                w_neg: p[0],
                w_zero: p[1],
                l: p[2],
                k: p[3],
                c: p[4],
                d: p[5],
                p: p[6],
            },
        }
    }
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully parameterized marginal distribution.
///
/// The mixture places mass `w_neg` on a reflected Weibull(`l`, `k`) below
/// zero, an atom of mass `w_zero` at zero, and the remaining mass on a
/// Dagum(`c`, `d`, `p`) above zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MarginalFamily {
    SinghMaddala { a: f64, b: f64, q: f64 },
    Dagum { c: f64, d: f64, p: f64 },
    ShiftedLogNormal { mu: f64, sigma: f64, gamma: f64 },
    NegPosMixture { w_neg: f64, w_zero: f64, l: f64, k: f64, c: f64, d: f64, p: f64 },
}

fn pos(name: &'static str, v: f64) -> Result<(), MarginalError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(MarginalError::Domain { param: name, value: v })
    }
}

fn dagum_cdf(x: f64, c: f64, d: f64, p: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    // (1 + y)^{-p}, y = (x/c)^{-d}
    let ln_y = -d * (x.ln() - c.ln());
    (-p * softplus(ln_y)).exp()
}

fn dagum_log_pdf(x: f64, c: f64, d: f64, p: f64) -> f64 {
    let lx = x.ln();
    let ln_y = -d * (lx - c.ln());
    p.ln() + d.ln() + ln_y - (p + 1.0) * softplus(ln_y) - lx
}

fn dagum_quantile(u: f64, c: f64, d: f64, p: f64) -> f64 {
    // y = u^{-1/p} - 1, x = c y^{-1/d}
    let y = ((-u.ln()) / p).exp_m1();
    c * y.powf(-1.0 / d)
}

impl MarginalFamily {
    pub fn tag(&self) -> FamilyTag {
        match self {
            MarginalFamily::SinghMaddala { .. } => FamilyTag::SinghMaddala,
            MarginalFamily::Dagum { .. } => FamilyTag::Dagum,
            MarginalFamily::ShiftedLogNormal { .. } => FamilyTag::ShiftedLogNormal,
            MarginalFamily::NegPosMixture { .. } => FamilyTag::NegPosMixture,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            MarginalFamily::SinghMaddala { a, b, q } => vec![a, b, q],
            MarginalFamily::Dagum { c, d, p } => vec![c, d, p],
            MarginalFamily::ShiftedLogNormal { mu, sigma, gamma } => vec![mu, sigma, gamma],
            MarginalFamily::NegPosMixture { w_neg, w_zero, l, k, c, d, p } => {
                vec![w_neg, w_zero, l, k, c, d, p]
            }
        }
    }

    pub fn validate(&self) -> Result<(), MarginalError> {
        match *self {
            MarginalFamily::SinghMaddala { a, b, q } => {
                pos("a", a)?;
                pos("b", b)?;
                pos("q", q)
            }
            MarginalFamily::Dagum { c, d, p } => {
                pos("c", c)?;
                pos("d", d)?;
                pos("p", p)
            }
            MarginalFamily::ShiftedLogNormal { mu, sigma, gamma } => {
                if !mu.is_finite() {
                    return Err(MarginalError::Domain { param: "mu", value: mu });
                }
                pos("sigma", sigma)?;
                if !(gamma.is_finite() && gamma >= 0.0) {
                    return Err(MarginalError::Domain { param: "gamma", value: gamma });
                }
                Ok(())
            }
            MarginalFamily::NegPosMixture { w_neg, w_zero, l, k, c, d, p } => {
                if !(w_neg.is_finite() && w_neg >= 0.0) {
                    return Err(MarginalError::Domain { param: "w_neg", value: w_neg });
                }
                if !(w_zero.is_finite() && w_zero >= 0.0) {
                    return Err(MarginalError::Domain { param: "w_zero", value: w_zero });
                }
                if w_neg + w_zero >= 1.0 {
                    return Err(MarginalError::Domain { param: "w_neg + w_zero", value: w_neg + w_zero });
                }
                pos("l", l)?;
                pos("k", k)?;
                pos("c", c)?;
                pos("d", d)?;
                pos("p", p)
            }
        }
    }

    /// Lower end of the support.
    pub fn support_min(&self) -> f64 {
        match *self {
            MarginalFamily::ShiftedLogNormal { gamma, .. } => gamma,
            MarginalFamily::NegPosMixture { .. } => f64::NEG_INFINITY,
            _ => 0.0,
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64, MarginalError> {
        self.validate()?;
        Ok(self.cdf_unchecked(x))
    }

    /// CDF without the parameter-domain check; callers must have validated.
    pub fn cdf_unchecked(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match *self {
            MarginalFamily::SinghMaddala { a, b, q } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let t = a * (x.ln() - b.ln());
                // 1 - (1 + e^t)^{-q}
                -(-q * softplus(t)).exp_m1()
            }
            MarginalFamily::Dagum { c, d, p } => dagum_cdf(x, c, d, p),
            MarginalFamily::ShiftedLogNormal { mu, sigma, gamma } => {
                if x <= gamma {
                    return 0.0;
                }
                norm_cdf(((x - gamma).ln() - mu) / sigma)
            }
            MarginalFamily::NegPosMixture { w_neg, w_zero, l, k, c, d, p } => {
                if x < 0.0 {
                    w_neg * (-(-x / l).powf(k)).exp()
                } else if x == 0.0 {
                    w_neg + w_zero
                } else {
                    let kappa = w_neg + w_zero;
                    kappa + (1.0 - kappa) * dagum_cdf(x, c, d, p)
                }
            }
        }
    }

    /// Log density. For the mixture at exactly zero the density is undefined
    /// and the atom mass is reported through [`MarginalError::AtomMass`].
    pub fn log_pdf(&self, x: f64) -> Result<f64, MarginalError> {
        self.validate()?;
        match *self {
            MarginalFamily::NegPosMixture { w_zero, .. } if x == 0.0 => {
                Err(MarginalError::AtomMass { mass: w_zero })
            }
            _ => Ok(self.log_pdf_unchecked(x)),
        }
    }

    /// Log density without checks; returns `-inf` outside the support. For
    /// the mixture at zero this returns the log atom mass, which is what the
    /// likelihood needs.
    pub fn log_pdf_unchecked(&self, x: f64) -> f64 {
        match *self {
            MarginalFamily::SinghMaddala { a, b, q } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let lx = x.ln();
                let t = a * (lx - b.ln());
                a.ln() + q.ln() + (a - 1.0) * lx - a * b.ln() - (q + 1.0) * softplus(t)
            }
            MarginalFamily::Dagum { c, d, p } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                dagum_log_pdf(x, c, d, p)
            }
            MarginalFamily::ShiftedLogNormal { mu, sigma, gamma } => {
                if x <= gamma {
                    return f64::NEG_INFINITY;
                }
                let ly = (x - gamma).ln();
                let z = (ly - mu) / sigma;
                -ly - sigma.ln() - LN_SQRT_2PI - 0.5 * z * z
            }
            MarginalFamily::NegPosMixture { w_neg, w_zero, l, k, c, d, p } => {
                if x < 0.0 {
                    let ax = -x;
                    w_neg.ln() + k.ln() - l.ln() + (k - 1.0) * (ax.ln() - l.ln()) - (ax / l).powf(k)
                } else if x == 0.0 {
                    w_zero.ln()
                } else {
                    (1.0 - w_neg - w_zero).ln() + dagum_log_pdf(x, c, d, p)
                }
            }
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64, MarginalError> {
        self.validate()?;
        if !(0.0..=1.0).contains(&u) {
            return Err(MarginalError::Domain { param: "u", value: u });
        }
        Ok(self.quantile_unchecked(u))
    }

    pub fn quantile_unchecked(&self, u: f64) -> f64 {
        match *self {
            MarginalFamily::SinghMaddala { a, b, q } => {
                // x = b [ (1-u)^{-1/q} - 1 ]^{1/a}
                let inner = ((-(-u).ln_1p()) / q).exp_m1();
                b * inner.powf(1.0 / a)
            }
            MarginalFamily::Dagum { c, d, p } => dagum_quantile(u, c, d, p),
            MarginalFamily::ShiftedLogNormal { mu, sigma, gamma } => {
                gamma + (mu + sigma * norm_quantile(u)).exp()
            }
            MarginalFamily::NegPosMixture { w_neg, w_zero, l, k, c, d, p } => {
                let kappa = w_neg + w_zero;
                if u < w_neg {
                    -l * (-(u / w_neg).ln()).powf(1.0 / k)
                } else if u <= kappa {
                    0.0
                } else {
                    dagum_quantile((u - kappa) / (1.0 - kappa), c, d, p)
                }
            }
        }
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>();
        // keep away from the endpoints where quantiles are infinite
        let u = u.clamp(1e-15, 1.0 - 1e-15);
        self.quantile_unchecked(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cdf_reference_points() {
        let sm = MarginalFamily::SinghMaddala { a: 1.0, b: 1.0, q: 1.0 };
        assert_abs_diff_eq!(sm.cdf(1.0).unwrap(), 0.5, epsilon = 1e-15);
        let dg = MarginalFamily::Dagum { c: 1.0, d: 1.0, p: 2.0 };
        assert_abs_diff_eq!(dg.cdf(1.0).unwrap(), 0.25, epsilon = 1e-15);
        let ln = MarginalFamily::ShiftedLogNormal { mu: 0.0, sigma: 1.0, gamma: 3.0 };
        assert_abs_diff_eq!(ln.cdf(4.0).unwrap(), 0.5, epsilon = 1e-15);
        let mx = MarginalFamily::NegPosMixture {
            w_neg: 0.2,
            w_zero: 0.1,
            l: 1.0,
            k: 1.0,
            c: 1.0,
            d: 2.0,
            p: 1.0,
        };
        assert_abs_diff_eq!(mx.cdf(0.0).unwrap(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn lognormal_log_pdf_at_one() {
        let ln = MarginalFamily::ShiftedLogNormal { mu: 0.0, sigma: 1.0, gamma: 0.0 };
        let expected = (1.0 / (2.0 * std::f64::consts::PI).sqrt()).ln();
        assert_abs_diff_eq!(ln.log_pdf(1.0).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, -0.9189, epsilon = 1e-4);
    }

    #[test]
    fn domain_errors() {
        let bad = MarginalFamily::SinghMaddala { a: -1.0, b: 1.0, q: 1.0 };
        assert!(matches!(bad.cdf(1.0), Err(MarginalError::Domain { param: "a", .. })));
        let bad = MarginalFamily::ShiftedLogNormal { mu: 0.0, sigma: 1.0, gamma: -0.5 };
        assert!(bad.validate().is_err());
        let bad = MarginalFamily::NegPosMixture {
            w_neg: 0.6,
            w_zero: 0.4,
            l: 1.0,
            k: 1.0,
            c: 1.0,
            d: 1.0,
            p: 1.0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mixture_atom_and_limits() {
        let mx = MarginalFamily::NegPosMixture {
            w_neg: 0.15,
            w_zero: 0.05,
            l: 2.0,
            k: 1.5,
            c: 10.0,
            d: 3.0,
            p: 1.0,
        };
        assert!(matches!(mx.log_pdf(0.0), Err(MarginalError::AtomMass { mass }) if mass == 0.05));
        assert!(mx.cdf(-1e12).unwrap() < 1e-12);
        assert!(mx.cdf(1e15).unwrap() > 1.0 - 1e-9);
        let jump = mx.cdf(0.0).unwrap() - mx.cdf(-1e-300).unwrap();
        assert_abs_diff_eq!(jump, 0.05, epsilon = 1e-12);
        // right-continuity at the atom
        assert_abs_diff_eq!(mx.cdf(1e-300).unwrap(), mx.cdf(0.0).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for t in FamilyTag::ALL {
            assert_eq!(FamilyTag::from_name(t.name()), Some(t));
            let p: Vec<f64> = (1..=t.n_params()).map(|i| i as f64 * 0.1).collect();
            assert_eq!(t.with_params(&p).params(), p);
        }
    }
}
