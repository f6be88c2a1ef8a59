use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared as ChiSquaredDist, ContinuousCDF};

use super::tree::Tree;
use super::BartError;
use crate::rng::{rng_from_seed, Rng as ChainRng};
use crate::stats::{norm_cdf, norm_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BartSettings {
    pub trees: usize,
    pub iterations: usize,
    pub burn_in: usize,
    /// Keep every `thin`-th post-burn-in forest for prediction.
    pub thin: usize,
    /// Split probability `alpha (1 + d)^-beta`.
    pub alpha: f64,
    pub beta: f64,
    /// Leaf prior width: the ensemble prior puts +-`k` sd on the target range.
    pub k: f64,
    /// Residual variance prior degrees of freedom and calibration quantile.
    pub nu: f64,
    pub q: f64,
    /// Hard cap on tree depth (`Some(0)` forces stumps).
    pub max_depth: Option<usize>,
}

impl Default for BartSettings {
    fn default() -> Self {
        BartSettings {
            trees: 50,
            iterations: 2_000,
            burn_in: 500,
            thin: 1,
            alpha: 0.95,
            beta: 2.0,
            k: 2.0,
            nu: 3.0,
            q: 0.9,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Regression,
    Probit,
}

/// Posterior sample of sum-of-trees models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub kind: EnsembleKind,
    pub n_features: usize,
    /// Retained forests, each a vector of `m` trees.
    pub forests: Vec<Vec<Tree>>,
    /// Residual variance on the original scale, one value per iteration
    /// (regression only).
    pub sigma2: Vec<f64>,
    /// Affine map from the internal `[-0.5, 0.5]` scale (regression).
    pub y_min: f64,
    pub y_max: f64,
    /// Probit offset `Phi^-1(mean z)`.
    pub offset: f64,
}

impl Ensemble {
    fn check(&self, x: &[Vec<f64>]) -> Result<(), BartError> {
        if let Some(bad) = x.iter().find(|r| r.len() != self.n_features) {
            return Err(BartError::FeatureMismatch { expected: self.n_features, got: bad.len() });
        }
        Ok(())
    }

    fn value(&self, forest: &[Tree], row: &[f64]) -> f64 {
        let s: f64 = forest.iter().map(|t| t.predict_one(row)).sum();
        match self.kind {
            EnsembleKind::Regression => (s + 0.5) * (self.y_max - self.y_min) + self.y_min,
            EnsembleKind::Probit => norm_cdf(self.offset + s),
        }
    }

    /// Predictions per retained forest: `[draw][row]`.
    pub fn predict_draws(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, BartError> {
        self.check(x)?;
        Ok(self.forests.iter().map(|f| x.iter().map(|r| self.value(f, r)).collect()).collect())
    }

    /// Posterior-mean prediction (values or probabilities).
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>, BartError> {
        self.check(x)?;
        let s = self.forests.len() as f64;
        Ok(x.iter()
            .map(|r| {
                let m = self.forests.iter().map(|f| self.value(f, r)).sum::<f64>() / s;
                match self.kind {
                    EnsembleKind::Regression => m,
                    EnsembleKind::Probit => m.clamp(1e-12, 1.0 - 1e-12),
                }
            })
            .collect())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

fn validate_x(x: &[Vec<f64>], n: usize) -> Result<usize, BartError> {
    if x.len() != n {
        return Err(BartError::LengthMismatch(x.len(), n));
    }
    if n < 30 {
        return Err(BartError::TooFew { n, min: 30 });
    }
    let p = x[0].len();
    if p == 0 {
        return Err(BartError::FeatureMismatch { expected: 1, got: 0 });
    }
    if let Some(bad) = x.iter().find(|r| r.len() != p) {
        return Err(BartError::FeatureMismatch { expected: p, got: bad.len() });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(BartError::NonFinite);
    }
    Ok(p)
}

/// Regression BART.
pub fn fit_regression(x: &[Vec<f64>], y: &[f64], cfg: &BartSettings, seed: u64) -> Result<Ensemble, BartError> {
    let p = validate_x(x, y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(BartError::NonFinite);
    }
    let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if y_max - y_min <= 0.0 {
        return Err(BartError::Degenerate);
    }
    let ys: Vec<f64> = y.iter().map(|v| (v - y_min) / (y_max - y_min) - 0.5).collect();
    let sigma_hat = residual_sd(x, &ys);
    let chi_q = ChiSquaredDist::new(cfg.nu).expect("nu > 0").inverse_cdf(1.0 - cfg.q);
    let lambda = sigma_hat * sigma_hat * chi_q / cfg.nu;
    let sigma_mu = 0.5 / (cfg.k * (cfg.trees as f64).sqrt());
    let mut st = State::new(x, ys, p, cfg, sigma_mu, sigma_hat * sigma_hat, seed);
    let scale2 = (y_max - y_min).powi(2);
    let chi = ChiSquared::new(cfg.nu + st.n as f64).expect("df");
    let mut ens = Ensemble {
        kind: EnsembleKind::Regression,
        n_features: p,
        forests: Vec::new(),
        sigma2: Vec::with_capacity(cfg.iterations),
        y_min,
        y_max,
        offset: 0.0,
    };
    for it in 0..cfg.iterations {
        st.sweep();
        let sse: f64 = st.y.iter().zip(&st.total).map(|(a, b)| (a - b) * (a - b)).sum();
        let c: f64 = chi.sample(&mut st.rng);
        st.sigma2 = (cfg.nu * lambda + sse) / c;
        ens.sigma2.push(st.sigma2 * scale2);
        if it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin.max(1) == 0 {
            ens.forests.push(st.trees.clone());
        }
    }
    Ok(ens)
}

/// Probit BART via truncated-normal latent augmentation.
pub fn fit_probit(x: &[Vec<f64>], z: &[bool], cfg: &BartSettings, seed: u64) -> Result<Ensemble, BartError> {
    let p = validate_x(x, z.len())?;
    let ones = z.iter().filter(|&&b| b).count();
    if ones == 0 || ones == z.len() {
        return Err(BartError::SingleClass);
    }
    let offset = norm_quantile(ones as f64 / z.len() as f64);
    let sigma_mu = 3.0 / (cfg.k * (cfg.trees as f64).sqrt());
    let latent0: Vec<f64> = z.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
    let mut st = State::new(x, latent0, p, cfg, sigma_mu, 1.0, seed);
    let mut ens = Ensemble {
        kind: EnsembleKind::Probit,
        n_features: p,
        forests: Vec::new(),
        sigma2: Vec::new(),
        y_min: 0.0,
        y_max: 1.0,
        offset,
    };
    for it in 0..cfg.iterations {
        for i in 0..st.n {
            let mu = offset + st.total[i];
            let w = if z[i] { mu + rtnorm_lower(&mut st.rng, -mu) } else { mu - rtnorm_lower(&mut st.rng, mu) };
            st.y[i] = w - offset;
        }
        st.sweep();
        if it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin.max(1) == 0 {
            ens.forests.push(st.trees.clone());
        }
    }
    Ok(ens)
}

/// Standard normal conditioned on exceeding `a`.
fn rtnorm_lower(rng: &mut ChainRng, a: f64) -> f64 {
    if a <= 0.0 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z > a {
                return z;
            }
        }
    }
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    let exp = Exp::new(alpha).expect("rate");
    loop {
        let z = a + exp.sample(rng);
        let u: f64 = rng.random();
        if u <= (-0.5 * (z - alpha) * (z - alpha)).exp() {
            return z;
        }
    }
}

fn residual_sd(x: &[Vec<f64>], y: &[f64]) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let n = y.len();
    let p = x[0].len();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let sd_y = (y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    if n <= p + 2 {
        return sd_y;
    }
    let xm = DMatrix::from_fn(n, p + 1, |r, c| if c == 0 { 1.0 } else { x[r][c - 1] });
    let yv = DVector::from_column_slice(y);
    let xtx = xm.transpose() * &xm + DMatrix::identity(p + 1, p + 1) * 1e-8;
    match xtx.cholesky() {
        Some(ch) => {
            let b = ch.solve(&(xm.transpose() * &yv));
            let r = yv - xm * b;
            let s = (r.norm_squared() / (n - p - 1) as f64).sqrt();
            if s > 0.0 {
                s
            } else {
                sd_y
            }
        }
        None => sd_y,
    }
}

const P_GROW: f64 = 0.25;
const P_PRUNE: f64 = 0.25;

struct State<'a> {
    x: &'a [Vec<f64>],
    y: Vec<f64>,
    n: usize,
    p: usize,
    cfg: BartSettings,
    sigma_mu2: f64,
    sigma2: f64,
    trees: Vec<Tree>,
    tree_fit: Vec<Vec<f64>>,
    total: Vec<f64>,
    resid: Vec<f64>,
    leaf_of: Vec<usize>,
    cuts: Vec<Vec<f64>>,
    rng: ChainRng,
}

impl<'a> State<'a> {
    fn new(x: &'a [Vec<f64>], y: Vec<f64>, p: usize, cfg: &BartSettings, sigma_mu: f64, sigma2: f64, seed: u64) -> Self {
        let n = y.len();
        let m = cfg.trees;
        let init = y.iter().sum::<f64>() / n as f64 / m as f64;
        let cuts = (0..p)
            .map(|v| {
                let mut vals: Vec<f64> = x.iter().map(|r| r[v]).collect();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                vals
            })
            .collect();
        State {
            cuts,
            x,
            n,
            p,
            cfg: *cfg,
            sigma_mu2: sigma_mu * sigma_mu,
            sigma2,
            trees: vec![Tree::stump(init); m],
            tree_fit: vec![vec![init; n]; m],
            total: vec![init * m as f64; n],
            resid: vec![0.0; n],
            leaf_of: vec![0; n],
            y,
            rng: rng_from_seed(seed),
        }
    }

    fn split_prob(&self, d: usize) -> f64 {
        if self.cfg.max_depth.is_some_and(|md| d >= md) {
            0.0
        } else {
            self.cfg.alpha * (1.0 + d as f64).powf(-self.cfg.beta)
        }
    }

    fn leaf_ll(&self, n: usize, s: f64) -> f64 {
        let (s2, m2) = (self.sigma2, self.sigma_mu2);
        let denom = s2 + n as f64 * m2;
        -0.5 * (denom / s2).ln() + m2 * s * s / (2.0 * s2 * denom)
    }

    fn sweep(&mut self) {
        for j in 0..self.trees.len() {
            for i in 0..self.n {
                self.resid[i] = self.y[i] - self.total[i] + self.tree_fit[j][i];
            }
            let mut tree = std::mem::replace(&mut self.trees[j], Tree::stump(0.0));
            for i in 0..self.n {
                self.leaf_of[i] = tree.leaf_index(&self.x[i]);
            }
            let stump = tree.nodes.len() == 1;
            let u: f64 = self.rng.random();
            let accepted = if stump || u < P_GROW {
                self.propose_grow(&mut tree)
            } else if u < P_GROW + P_PRUNE {
                self.propose_prune(&mut tree)
            } else {
                self.propose_change(&mut tree)
            };
            if accepted {
                for i in 0..self.n {
                    self.leaf_of[i] = tree.leaf_index(&self.x[i]);
                }
            }
            self.draw_leaves(&mut tree);
            for i in 0..self.n {
                let v = match tree.nodes[self.leaf_of[i]] {
                    super::tree::Node::Leaf { value } => value,
                    _ => unreachable!("observation assigned to a split node"),
                };
                self.total[i] += v - self.tree_fit[j][i];
                self.tree_fit[j][i] = v;
            }
            self.trees[j] = tree;
        }
    }

    fn members(&self, node: usize, tree: &Tree) -> Vec<usize> {
        match tree.nodes[node] {
            super::tree::Node::Leaf { .. } => (0..self.n).filter(|&i| self.leaf_of[i] == node).collect(),
            super::tree::Node::Split { left, right, .. } => {
                (0..self.n).filter(|&i| self.leaf_of[i] == left || self.leaf_of[i] == right).collect()
            }
        }
    }

    /// Candidate rules at a node: for each variable, the globally observed
    /// distinct values in `[min, max)` of the node's observations.
    fn rules(&self, obs: &[usize]) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for v in 0..self.p {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in obs {
                let x = self.x[i][v];
                lo = lo.min(x);
                hi = hi.max(x);
            }
            if lo < hi {
                let cuts = &self.cuts[v];
                let a = cuts.partition_point(|&c| c < lo);
                let b = cuts.partition_point(|&c| c < hi);
                out.push((v, a, b));
            }
        }
        out
    }

    fn pick_rule(&mut self, obs: &[usize]) -> Option<(usize, f64)> {
        let rules = self.rules(obs);
        if rules.is_empty() {
            return None;
        }
        let (var, a, b) = rules[self.rng.random_range(0..rules.len())];
        Some((var, self.cuts[var][self.rng.random_range(a..b)]))
    }

    fn split_stats(&self, obs: &[usize], var: usize, thr: f64) -> (usize, f64, usize, f64) {
        let (mut nl, mut sl, mut nr, mut sr) = (0, 0.0, 0, 0.0);
        for &i in obs {
            if self.x[i][var] <= thr {
                nl += 1;
                sl += self.resid[i];
            } else {
                nr += 1;
                sr += self.resid[i];
            }
        }
        (nl, sl, nr, sr)
    }

    fn propose_grow(&mut self, tree: &mut Tree) -> bool {
        let leaves = tree.leaves();
        let leaf = leaves[self.rng.random_range(0..leaves.len())];
        let d = tree.depth_of(leaf);
        let ps = self.split_prob(d);
        if ps <= 0.0 {
            return false;
        }
        let obs = self.members(leaf, tree);
        let Some((var, thr)) = self.pick_rule(&obs) else { return false };
        let (nl, sl, nr, sr) = self.split_stats(&obs, var, thr);
        let lik = self.leaf_ll(nl, sl) + self.leaf_ll(nr, sr) - self.leaf_ll(nl + nr, sl + sr);
        let ps_child = self.split_prob(d + 1);
        let prior = (ps * (1.0 - ps_child).powi(2) / (1.0 - ps)).ln();
        let nogs = tree.nog_nodes();
        let parent_was_nog = tree.parent[leaf].is_some_and(|pa| nogs.contains(&pa));
        let nog = nogs.len();
        let nog_after = nog + 1 - parent_was_nog as usize;
        let p_grow_here = if tree.nodes.len() == 1 { 1.0 } else { P_GROW };
        let trans = (P_PRUNE / nog_after as f64).ln() - (p_grow_here / leaves.len() as f64).ln();
        let ok = self.rng.random::<f64>().ln() < lik + prior + trans;
        if ok {
            tree.grow(leaf, var, thr);
        }
        ok
    }

    fn propose_prune(&mut self, tree: &mut Tree) -> bool {
        let nogs = tree.nog_nodes();
        if nogs.is_empty() {
            return false;
        }
        let node = nogs[self.rng.random_range(0..nogs.len())];
        let d = tree.depth_of(node);
        let obs = self.members(node, tree);
        let (var, thr) = match tree.nodes[node] {
            super::tree::Node::Split { var, threshold, .. } => (var, threshold),
            _ => return false,
        };
        let (nl, sl, nr, sr) = self.split_stats(&obs, var, thr);
        let lik = self.leaf_ll(nl + nr, sl + sr) - self.leaf_ll(nl, sl) - self.leaf_ll(nr, sr);
        let ps = self.split_prob(d);
        let ps_child = self.split_prob(d + 1);
        let prior = -(ps * (1.0 - ps_child).powi(2) / (1.0 - ps)).ln();
        let leaves_after = tree.n_leaves() - 1;
        let p_grow_back = if node == 0 { 1.0 } else { P_GROW };
        let trans = (p_grow_back / leaves_after as f64).ln() - (P_PRUNE / nogs.len() as f64).ln();
        let ok = self.rng.random::<f64>().ln() < lik + prior + trans;
        if ok {
            tree.prune(node);
        }
        ok
    }

    fn propose_change(&mut self, tree: &mut Tree) -> bool {
        let nogs = tree.nog_nodes();
        if nogs.is_empty() {
            return false;
        }
        let node = nogs[self.rng.random_range(0..nogs.len())];
        let (var, thr) = match tree.nodes[node] {
            super::tree::Node::Split { var, threshold, .. } => (var, threshold),
            _ => return false,
        };
        let obs = self.members(node, tree);
        let Some((nv, nt)) = self.pick_rule(&obs) else { return false };
        let (nl, sl, nr, sr) = self.split_stats(&obs, var, thr);
        let (ml, tl, mr, tr) = self.split_stats(&obs, nv, nt);
        let lik = self.leaf_ll(ml, tl) + self.leaf_ll(mr, tr) - self.leaf_ll(nl, sl) - self.leaf_ll(nr, sr);
        let ok = self.rng.random::<f64>().ln() < lik;
        if ok {
            tree.set_rule(node, nv, nt);
        }
        ok
    }

    fn draw_leaves(&mut self, tree: &mut Tree) {
        let leaves = tree.leaves();
        let mut pos = vec![usize::MAX; tree.nodes.len()];
        for (k, &l) in leaves.iter().enumerate() {
            pos[l] = k;
        }
        let mut cnt = vec![0usize; leaves.len()];
        let mut sum = vec![0.0; leaves.len()];
        for i in 0..self.n {
            let k = pos[self.leaf_of[i]];
            cnt[k] += 1;
            sum[k] += self.resid[i];
        }
        for (k, &l) in leaves.iter().enumerate() {
            let denom = self.sigma2 + cnt[k] as f64 * self.sigma_mu2;
            let mean = self.sigma_mu2 * sum[k] / denom;
            let sd = (self.sigma2 * self.sigma_mu2 / denom).sqrt();
            let z: f64 = self.rng.sample(StandardNormal);
            tree.set_leaf(l, mean + sd * z);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_normal_tail_mean() {
        let mut rng = rng_from_seed(5);
        for a in [-1.0, 0.5, 3.0] {
            let n = 200_000;
            let m: f64 = (0..n).map(|_| rtnorm_lower(&mut rng, a)).sum::<f64>() / n as f64;
            // E[Z | Z > a] = phi(a) / (1 - Phi(a))
            let phi = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let expect = phi / (1.0 - norm_cdf(a));
            assert!((m - expect).abs() < 0.01, "a={a} m={m} expect={expect}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let cfg = BartSettings { iterations: 10, burn_in: 5, ..Default::default() };
        assert!(matches!(fit_regression(&x, &[2.0; 40], &cfg, 1), Err(BartError::Degenerate)));
        assert!(matches!(fit_probit(&x, &[true; 40], &cfg, 1), Err(BartError::SingleClass)));
        assert!(matches!(fit_regression(&x[..10], &[1.0; 10], &cfg, 1), Err(BartError::TooFew { .. })));
    }
}
