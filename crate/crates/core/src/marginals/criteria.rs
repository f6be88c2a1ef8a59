//! BIC / DIC and the model-selection table.

use serde::{Deserialize, Serialize};

use super::family::FamilyTag;
use super::mcmc::{log_likelihood, MarginalPosterior};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub bic: f64,
    pub dic: f64,
}

/// BIC from the best draw, DIC from the mean deviance and the deviance at
/// the posterior mean. Lower is better for both.
pub fn information_criteria(post: &MarginalPosterior, data: &[f64]) -> InformationCriteria {
    let k = post.family.n_params() as f64;
    let n = data.len() as f64;
    let max_ll = post.log_likelihood.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bic = k * n.ln() - 2.0 * max_ll;

    let mean_dev = -2.0 * post.log_likelihood.iter().sum::<f64>() / post.log_likelihood.len() as f64;
    let theta_bar = post.posterior_mean();
    let dev_at_mean = -2.0 * log_likelihood(post.family, &theta_bar, data, post.data_shift);
    let dic = mean_dev + (mean_dev - dev_at_mean);
    InformationCriteria { bic, dic }
}

/// One row of the selection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub country: String,
    /// `income` or `net_wealth`.
    pub margin: String,
    pub family: FamilyTag,
    pub dic: f64,
    pub bic: f64,
    pub dic_best: bool,
    pub bic_best: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionTable {
    pub rows: Vec<SelectionRow>,
}

impl SelectionTable {
    pub fn push(&mut self, country: &str, margin: &str, family: FamilyTag, ic: InformationCriteria) {
        self.rows.push(SelectionRow {
            country: country.to_string(),
            margin: margin.to_string(),
            family,
            dic: ic.dic,
            bic: ic.bic,
            dic_best: false,
            bic_best: false,
        });
        self.mark_best();
    }

    /// Flag the minimum of each criterion within every (country, margin)
    /// group.
    fn mark_best(&mut self) {
        let groups: Vec<(String, String)> = self.rows.iter().map(|r| (r.country.clone(), r.margin.clone())).collect();
        for (c, m) in groups {
            let idx: Vec<usize> = (0..self.rows.len())
                .filter(|&i| self.rows[i].country == c && self.rows[i].margin == m)
                .collect();
            let best_dic = idx.iter().copied().min_by(|&a, &b| self.rows[a].dic.total_cmp(&self.rows[b].dic));
            let best_bic = idx.iter().copied().min_by(|&a, &b| self.rows[a].bic.total_cmp(&self.rows[b].bic));
            for &i in &idx {
                self.rows[i].dic_best = Some(i) == best_dic;
                self.rows[i].bic_best = Some(i) == best_bic;
            }
        }
    }

    /// Family with the lowest value of the chosen criterion for a group.
    pub fn selected(&self, country: &str, margin: &str, by_bic: bool) -> Option<FamilyTag> {
        self.rows
            .iter()
            .find(|r| r.country == country && r.margin == margin && if by_bic { r.bic_best } else { r.dic_best })
            .map(|r| r.family)
    }

    /// Wide layout: one row per (margin, model), two columns (DIC, BIC) per
    /// country. Minimum entries carry a trailing `*`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut countries: Vec<&str> = Vec::new();
        let mut models: Vec<(&str, FamilyTag)> = Vec::new();
        for r in &self.rows {
            if !countries.contains(&r.country.as_str()) {
                countries.push(&r.country);
            }
            if !models.contains(&(r.margin.as_str(), r.family)) {
                models.push((&r.margin, r.family));
            }
        }
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["margin".to_string(), "model".to_string()];
        for c in &countries {
            header.push(format!("{c}_DIC"));
            header.push(format!("{c}_BIC"));
        }
        wtr.write_record(&header)?;
        for (margin, fam) in models {
            let mut rec = vec![margin.to_string(), fam.label().to_string()];
            for c in &countries {
                match self.rows.iter().find(|r| r.country == *c && r.margin == margin && r.family == fam) {
                    Some(r) => {
                        rec.push(format!("{:.2}{}", r.dic, if r.dic_best { "*" } else { "" }));
                        rec.push(format!("{:.2}{}", r.bic, if r.bic_best { "*" } else { "" }));
                    }
                    None => {
                        rec.push(String::new());
                        rec.push(String::new());
                    }
                }
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_post(family: FamilyTag, ll: Vec<f64>, draw: Vec<f64>) -> MarginalPosterior {
        MarginalPosterior {
            family,
            param_names: family.param_names().iter().map(|s| s.to_string()).collect(),
            draws: vec![draw; ll.len()],
            log_posterior: ll.clone(),
            log_likelihood: ll,
            acceptance_rate: 0.3,
            n: 100,
            data_shift: 0.0,
        }
    }

    #[test]
    fn higher_likelihood_same_k_gives_lower_bic() {
        let data: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let a = fake_post(FamilyTag::SinghMaddala, vec![-100.0, -90.0], vec![1.0, 50.0, 1.0]);
        let b = fake_post(FamilyTag::Dagum, vec![-100.0, -95.0], vec![50.0, 1.0, 1.0]);
        assert!(information_criteria(&a, &data).bic < information_criteria(&b, &data).bic);
    }

    #[test]
    fn constant_chain_has_zero_effective_parameters() {
        let data: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let theta = vec![1.5, 40.0, 1.2];
        let ll = log_likelihood(FamilyTag::SinghMaddala, &theta, &data, 0.0);
        let post = fake_post(FamilyTag::SinghMaddala, vec![ll; 5], theta);
        let ic = information_criteria(&post, &data);
        assert!((ic.dic + 2.0 * ll).abs() < 1e-9);
        assert!((ic.bic - (3.0 * 100f64.ln() - 2.0 * ll)).abs() < 1e-9);
    }

    #[test]
    fn table_marks_minimum_per_group() {
        let mut t = SelectionTable::default();
        t.push("AT", "income", FamilyTag::SinghMaddala, InformationCriteria { bic: 10.0, dic: 12.0 });
        t.push("AT", "income", FamilyTag::Dagum, InformationCriteria { bic: 11.0, dic: 9.0 });
        t.push("BE", "income", FamilyTag::SinghMaddala, InformationCriteria { bic: 30.0, dic: 30.0 });
        t.push("BE", "income", FamilyTag::Dagum, InformationCriteria { bic: 20.0, dic: 20.0 });
        assert_eq!(t.selected("AT", "income", true), Some(FamilyTag::SinghMaddala));
        assert_eq!(t.selected("AT", "income", false), Some(FamilyTag::Dagum));
        assert_eq!(t.selected("BE", "income", true), Some(FamilyTag::Dagum));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("margin,model,AT_DIC,AT_BIC,BE_DIC,BE_BIC"));
        assert!(s.contains("income,Singh Maddala,12.00,10.00*,30.00,30.00"));
        assert!(s.contains("income,Dagum,9.00*,11.00,20.00*,20.00*"));
    }
}
