//! Standardized pairwise regressions of a response on features, with
//! significance flags.

use std::collections::BTreeMap;

use mpdist::regression::{exploratory_regressions, pairwise_regress, standardize, CountryFeatureTable, FEATURES};
use mpdist::rng::rng_from_seed;
use rand::Rng;

fn main() {
    let mut rng = rng_from_seed(12);
    let countries = ["AT", "BE", "DE", "ES", "FR", "IT", "NL", "PT"];
    let mut table = CountryFeatureTable::default();
    for c in countries {
        let row: Vec<f64> = (0..FEATURES.len()).map(|_| rng.random::<f64>()).collect();
        table.push(c, row).expect("row");
    }
    let unemployment = table.column(0);
    let response: Vec<f64> = unemployment.iter().map(|u| 2.0 * u + 0.1 * rng.random::<f64>()).collect();

    let x = standardize("unemployment_rate", &unemployment).expect("standardize");
    let y = standardize("peak", &response).expect("standardize");
    let fit = pairwise_regress(&y, &x).expect("fit");
    println!("slope {:.3}, p = {:.2e}, flag `{}`", fit.coefficient, fit.p_value, fit.flag.symbol());

    let responses = BTreeMap::from([("target:gini_income".to_string(), response)]);
    let reg = exploratory_regressions(&table, &responses).expect("table");
    reg.write_csv(std::io::stdout()).expect("csv");
}
