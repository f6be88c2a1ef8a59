use serde::{Deserialize, Serialize};

use crate::data::PersonRecord;

/// Covariates for the employment and income models: one-hot gender and
/// marital status, education level, age, number of children and tenure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateEncoder {
    pub genders: Vec<String>,
    pub marital: Vec<String>,
    gender_mode: usize,
    marital_mode: usize,
}

fn levels(values: impl Iterator<Item = String>) -> (Vec<String>, usize) {
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    let lv: Vec<String> = counts.keys().cloned().collect();
    let mode = counts
        .values()
        .enumerate()
        .fold((0, 0), |best, (i, &c)| if c > best.1 { (i, c) } else { best })
        .0;
    (lv, mode)
}

impl CovariateEncoder {
    pub fn fit(persons: &[PersonRecord]) -> Self {
        let (genders, gender_mode) = levels(persons.iter().map(|p| p.gender.clone()));
        let (marital, marital_mode) = levels(persons.iter().map(|p| p.marital_status.clone()));
        CovariateEncoder { genders, marital, gender_mode, marital_mode }
    }

    pub fn n_features(&self) -> usize {
        self.genders.len() + self.marital.len() + 4
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut out: Vec<String> = self.genders.iter().map(|g| format!("gender={g}")).collect();
        out.push("education".into());
        out.push("age".into());
        out.extend(self.marital.iter().map(|m| format!("marital_status={m}")));
        out.push("n_children".into());
        out.push("tenure_years".into());
        out
    }

    fn one_hot(levels: &[String], mode: usize, value: &str, what: &str, out: &mut Vec<f64>) {
        let idx = levels.iter().position(|l| l == value).unwrap_or_else(|| {
            log::warn!("unseen {what} level `{value}`, using `{}`", levels[mode]);
            mode
        });
        out.extend((0..levels.len()).map(|i| if i == idx { 1.0 } else { 0.0 }));
    }

    pub fn encode(&self, p: &PersonRecord) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_features());
        Self::one_hot(&self.genders, self.gender_mode, &p.gender, "gender", &mut out);
        out.push(p.education as f64);
        out.push(p.age);
        Self::one_hot(&self.marital, self.marital_mode, &p.marital_status, "marital status", &mut out);
        out.push(p.n_children as f64);
        out.push(p.tenure_years);
        out
    }

    pub fn encode_all(&self, persons: &[PersonRecord]) -> Vec<Vec<f64>> {
        persons.iter().map(|p| self.encode(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn person(g: &str, m: &str) -> PersonRecord {
        PersonRecord {
            person_id: "p".into(),
            household_id: "h".into(),
            employed: true,
            gender: g.into(),
            education: 2,
            age: 40.0,
            marital_status: m.into(),
            n_children: 1,
            tenure_years: 5.0,
            employment_income: 1.0,
            unemployment_benefits: 0.0,
        }
    }

    #[test]
    fn unseen_level_maps_to_mode() {
        let ps = vec![person("f", "married"), person("m", "married"), person("f", "single")];
        let enc = CovariateEncoder::fit(&ps);
        assert_eq!(enc.n_features(), 8);
        assert_eq!(enc.encode(&ps[0]), vec![1.0, 0.0, 2.0, 40.0, 1.0, 0.0, 1.0, 5.0]);
        let odd = enc.encode(&person("x", "widowed"));
        assert_eq!(odd, enc.encode(&person("f", "married")));
    }
}
