use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::BvarError;
use crate::data::MacroPanel;
use crate::rng::{rng_from_seed, Rng as ChainRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarSpec {
    pub names: Vec<String>,
    pub lags: usize,
}

impl VarSpec {
    pub fn new<S: AsRef<str>>(names: &[S], lags: usize) -> Self {
        VarSpec { names: names.iter().map(|s| s.as_ref().to_string()).collect(), lags }
    }

    pub fn m(&self) -> usize {
        self.names.len()
    }

    pub fn k(&self) -> usize {
        self.names.len() * self.lags
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvarPrior {
    /// Inverse-Wishart scale `s * I`.
    pub sigma_scale: f64,
    /// Inverse-Wishart degrees of freedom are `M + df_extra`.
    pub df_extra: f64,
}

impl Default for BvarPrior {
    fn default() -> Self {
        BvarPrior { sigma_scale: 0.1, df_extra: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvarChain {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for BvarChain {
    fn default() -> Self {
        BvarChain { iterations: 15_000, burn_in: 5_000, thin: 5 }
    }
}

/// Retained posterior draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarDraws {
    pub spec: VarSpec,
    /// `M x K` lag coefficients `[A_1 .. A_P]`.
    pub a: Vec<DMatrix<f64>>,
    pub intercept: Vec<DVector<f64>>,
    /// `M x q` coefficients on exogenous regressors (empty when `q = 0`).
    pub exog: Vec<DMatrix<f64>>,
    pub sigma: Vec<DMatrix<f64>>,
    /// Local scales `lambda^2`, `M x (K + q)`.
    pub local: Vec<DMatrix<f64>>,
    /// Global scale `tau^2`.
    pub global: Vec<f64>,
    /// Effective sample length after dropping the initial lags.
    pub t: usize,
}

impl VarDraws {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Lag matrix `A_l` (1-based lag) of draw `s`.
    pub fn lag_matrix(&self, s: usize, lag: usize) -> DMatrix<f64> {
        let m = self.spec.m();
        self.a[s].columns((lag - 1) * m, m).into_owned()
    }

    pub fn posterior_mean_a(&self) -> DMatrix<f64> {
        mean_matrix(&self.a)
    }

    pub fn posterior_mean_exog(&self) -> DMatrix<f64> {
        mean_matrix(&self.exog)
    }
}

fn mean_matrix(ms: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut acc = DMatrix::zeros(ms[0].nrows(), ms[0].ncols());
    for m in ms {
        acc += m;
    }
    acc / ms.len() as f64
}

/// Regressand `Y` (rows `P..T`) and regressors `[1, y_{t-1}, .., y_{t-P}, exog_t]`.
pub fn design_matrices(y: &DMatrix<f64>, exog: Option<&DMatrix<f64>>, lags: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let (t_all, m) = y.shape();
    let t = t_all - lags;
    let q = exog.map(|e| e.ncols()).unwrap_or(0);
    let ncoef = 1 + m * lags + q;
    let yy = y.rows(lags, t).into_owned();
    let mut x = DMatrix::zeros(t, ncoef);
    for r in 0..t {
        let time = r + lags;
        x[(r, 0)] = 1.0;
        for l in 1..=lags {
            for j in 0..m {
                x[(r, 1 + (l - 1) * m + j)] = y[(time - l, j)];
            }
        }
        if let Some(e) = exog {
            for j in 0..q {
                x[(r, 1 + m * lags + j)] = e[(time, j)];
            }
        }
    }
    (yy, x)
}

fn inv_gamma(rng: &mut ChainRng, shape: f64, scale: f64) -> f64 {
    let g: f64 = Gamma::new(shape, 1.0).expect("valid gamma").sample(rng);
    scale / g
}

/// Inverse-Wishart(`df`, `scale`) via the Bartlett decomposition of the
/// matching Wishart draw.
fn inv_wishart(rng: &mut ChainRng, df: f64, scale: &DMatrix<f64>) -> Result<DMatrix<f64>, BvarError> {
    let m = scale.nrows();
    let mut jitter = 0.0;
    let base = scale.trace().abs() / m as f64 * 1e-10;
    for attempt in 0..=5 {
        let s = scale + DMatrix::identity(m, m) * jitter;
        if let Some(sinv) = s.clone().try_inverse() {
            let sinv = (&sinv + sinv.transpose()) * 0.5;
            if let Some(ch) = Cholesky::new(sinv) {
                let l = ch.l();
                let mut a = DMatrix::zeros(m, m);
                for i in 0..m {
                    let chi: f64 = ChiSquared::new(df - i as f64).expect("df").sample(rng);
                    a[(i, i)] = chi.sqrt();
                    for j in 0..i {
                        a[(i, j)] = rng.sample::<f64, _>(StandardNormal);
                    }
                }
                let la = &l * a;
                let w = &la * la.transpose();
                if let Some(wc) = Cholesky::new(w) {
                    let sig = wc.inverse();
                    let sig = (&sig + sig.transpose()) * 0.5;
                    if sig.iter().all(|v| v.is_finite()) && Cholesky::new(sig.clone()).is_some() {
                        return Ok(sig);
                    }
                }
            }
        }
        log::debug!("inverse-Wishart draw not SPD, retry {}", attempt + 1);
        jitter = if jitter == 0.0 { base.max(1e-12) } else { jitter * 100.0 };
    }
    Err(BvarError::NotSpd { attempts: 5 })
}

/// Gibbs sampler on a `T x M` data matrix with optional `T x q` exogenous
/// regressors. Lag and exogenous coefficients get horseshoe priors; the
/// intercept is unpenalized.
pub fn gibbs_fit_matrix(
    y: &DMatrix<f64>,
    exog: Option<&DMatrix<f64>>,
    spec: &VarSpec,
    prior: &BvarPrior,
    chain: &BvarChain,
    seed: u64,
) -> Result<VarDraws, BvarError> {
    let (t_all, m) = y.shape();
    if m != spec.m() {
        return Err(BvarError::LengthMismatch);
    }
    if let Some(e) = exog {
        if e.nrows() != t_all {
            return Err(BvarError::LengthMismatch);
        }
    }
    if y.iter().chain(exog.into_iter().flat_map(|e| e.iter())).any(|v| !v.is_finite()) {
        return Err(BvarError::NonFinite);
    }
    let p = spec.lags;
    let k = spec.k();
    if t_all <= p || t_all - p <= k + 10 {
        return Err(BvarError::TooShort { t: t_all.saturating_sub(p), need: k + 10 });
    }
    let (yy, x) = design_matrices(y, exog, p);
    let t = yy.nrows();
    let ncoef = x.ncols();
    let q = ncoef - 1 - k;
    let nshrunk = k + q;
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &yy;

    let mut rng = rng_from_seed(seed);

    // ridge OLS start
    let ridge = &xtx + DMatrix::identity(ncoef, ncoef) * 1e-6;
    let mut b = ridge.cholesky().ok_or(BvarError::SingularPrecision)?.solve(&xty);
    let resid = &yy - &x * &b;
    let mut sigma = (resid.transpose() * &resid) / t as f64 + DMatrix::identity(m, m) * 1e-8;
    let mut lambda2 = DMatrix::from_element(ncoef, m, 1.0);
    let mut nu = DMatrix::from_element(ncoef, m, 1.0);
    let mut tau2: f64 = 1.0;
    let mut xi: f64 = 1.0;

    let iw_df = m as f64 + prior.df_extra + t as f64;
    let iw_scale0 = DMatrix::identity(m, m) * prior.sigma_scale;
    let dim = ncoef * m;
    let kept = (chain.iterations - chain.burn_in).div_ceil(chain.thin.max(1));
    let mut out = VarDraws {
        spec: spec.clone(),
        a: Vec::with_capacity(kept),
        intercept: Vec::with_capacity(kept),
        exog: Vec::with_capacity(kept),
        sigma: Vec::with_capacity(kept),
        local: Vec::with_capacity(kept),
        global: Vec::with_capacity(kept),
        t,
    };
    let mut prec = DMatrix::zeros(dim, dim);

    for it in 0..chain.iterations {
        // coefficients | sigma, scales
        let sinv = Cholesky::new(sigma.clone()).ok_or(BvarError::NotSpd { attempts: 0 })?.inverse();
        for jb in 0..m {
            for lb in 0..m {
                let s = sinv[(jb, lb)];
                let mut blk = prec.view_mut((jb * ncoef, lb * ncoef), (ncoef, ncoef));
                blk.zip_apply(&xtx, |d, v| *d = s * v);
            }
        }
        for eq in 0..m {
            for i in 1..ncoef {
                let v = (lambda2[(i, eq)] * tau2).clamp(1e-12, 1e12);
                prec[(eq * ncoef + i, eq * ncoef + i)] += 1.0 / v;
            }
        }
        let rhs_m = &xty * &sinv;
        let rhs = DVector::from_column_slice(rhs_m.as_slice());
        let ch = Cholesky::new(prec.clone()).ok_or(BvarError::SingularPrecision)?;
        let mean = ch.solve(&rhs);
        let z = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let l = ch.l();
        let dev = l.transpose().solve_upper_triangular(&z).ok_or(BvarError::SingularPrecision)?;
        let beta = mean + dev;
        b = DMatrix::from_column_slice(ncoef, m, beta.as_slice());

        // sigma | coefficients
        let e = &yy - &x * &b;
        let scale = &iw_scale0 + e.transpose() * &e;
        sigma = inv_wishart(&mut rng, iw_df, &scale)?;

        // horseshoe scales
        let mut ssq = 0.0;
        for eq in 0..m {
            for i in 1..ncoef {
                let b2 = b[(i, eq)] * b[(i, eq)];
                let l2 = inv_gamma(&mut rng, 1.0, 1.0 / nu[(i, eq)] + b2 / (2.0 * tau2)).clamp(1e-12, 1e12);
                lambda2[(i, eq)] = l2;
                nu[(i, eq)] = inv_gamma(&mut rng, 1.0, 1.0 + 1.0 / l2);
                ssq += b2 / l2;
            }
        }
        let ncount = (nshrunk * m) as f64;
        tau2 = inv_gamma(&mut rng, 0.5 * (ncount + 1.0), 1.0 / xi + 0.5 * ssq).clamp(1e-12, 1e12);
        xi = inv_gamma(&mut rng, 1.0, 1.0 + 1.0 / tau2);

        if it >= chain.burn_in && (it - chain.burn_in) % chain.thin.max(1) == 0 {
            let bt = b.transpose();
            out.intercept.push(bt.column(0).into_owned());
            out.a.push(bt.columns(1, k).into_owned());
            out.exog.push(bt.columns(1 + k, q).into_owned());
            out.sigma.push(sigma.clone());
            out.local.push(lambda2.rows(1, nshrunk).transpose());
            out.global.push(tau2);
        }
    }
    Ok(out)
}

/// Fit the VAR on the panel's series in `spec.names` order.
pub fn gibbs_fit(
    panel: &MacroPanel,
    spec: &VarSpec,
    prior: &BvarPrior,
    chain: &BvarChain,
    seed: u64,
) -> Result<VarDraws, BvarError> {
    let cols: Vec<&[f64]> = spec
        .names
        .iter()
        .map(|n| panel.get(n).ok_or_else(|| BvarError::MissingSeries(n.clone())))
        .collect::<Result<_, _>>()?;
    let t = panel.len();
    let y = DMatrix::from_fn(t, cols.len(), |r, c| cols[c][r]);
    gibbs_fit_matrix(&y, None, spec, prior, chain, seed)
}

/// Simulate `t` periods of `y_t = c + sum_l A_l y_{t-l} + e_t`,
/// `e_t ~ N(0, sigma)`, after `burn` discarded periods started at the
/// unconditional mean.
pub fn simulate_var(
    lags: &[DMatrix<f64>],
    intercept: &DVector<f64>,
    sigma: &DMatrix<f64>,
    t: usize,
    burn: usize,
    rng: &mut ChainRng,
) -> Result<DMatrix<f64>, BvarError> {
    let m = intercept.len();
    let radius = super::irf::spectral_radius(lags);
    if radius >= 1.0 {
        return Err(BvarError::Unstable(radius));
    }
    let l = Cholesky::new(sigma.clone()).ok_or(BvarError::NotSpd { attempts: 0 })?.l();
    let mut sum_a = DMatrix::<f64>::identity(m, m);
    for a in lags {
        sum_a -= a;
    }
    let mu = sum_a.lu().solve(intercept).ok_or(BvarError::Unstable(radius))?;
    let p = lags.len();
    let total = t + burn;
    let mut hist: Vec<DVector<f64>> = vec![mu.clone(); p];
    let mut out = DMatrix::zeros(t, m);
    for step in 0..total {
        let z = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut next = intercept + &l * z;
        for (i, a) in lags.iter().enumerate() {
            next += a * &hist[hist.len() - 1 - i];
        }
        if step >= burn {
            out.row_mut(step - burn).copy_from(&next.transpose());
        }
        hist.push(next);
        if hist.len() > p {
            hist.remove(0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_layout() {
        let y = DMatrix::from_row_slice(4, 2, &[1.0, 10.0, 2.0, 20.0, 3.0, 30.0, 4.0, 40.0]);
        let (yy, x) = design_matrices(&y, None, 2);
        assert_eq!(yy.nrows(), 2);
        assert_eq!(x.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 2.0, 20.0, 1.0, 10.0]);
        assert_eq!(yy[(1, 1)], 40.0);
    }

    #[test]
    fn inverse_wishart_mean() {
        let mut rng = rng_from_seed(3);
        let scale = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let df = 12.0;
        let mut acc = DMatrix::zeros(2, 2);
        let n = 20_000;
        for _ in 0..n {
            acc += inv_wishart(&mut rng, df, &scale).unwrap();
        }
        let mean = acc / n as f64;
        let expected = &scale / (df - 2.0 - 1.0);
        assert!((mean - expected).abs().max() < 0.01);
    }

    #[test]
    fn too_short_sample_rejected() {
        let y = DMatrix::from_element(15, 2, 1.0);
        let spec = VarSpec::new(&["a", "b"], 2);
        assert!(matches!(
            gibbs_fit_matrix(&y, None, &spec, &BvarPrior::default(), &BvarChain::default(), 1),
            Err(BvarError::TooShort { .. })
        ));
    }

    #[test]
    fn unstable_simulation_rejected() {
        let mut rng = rng_from_seed(1);
        let a = DMatrix::from_row_slice(1, 1, &[1.02]);
        let r = simulate_var(&[a], &DVector::zeros(1), &DMatrix::identity(1, 1), 10, 10, &mut rng);
        assert!(matches!(r, Err(BvarError::Unstable(_))));
    }
}
