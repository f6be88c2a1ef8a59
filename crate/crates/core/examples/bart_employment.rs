//! Probit BART for employment status and BART income imputation on
//! synthetic persons.

use mpdist::bart::{fit_probit, fit_regression, BartSettings, CovariateEncoder};
use mpdist::pipeline::synthetic::{country_truth, generate_households};
use mpdist::rng::rng_from_seed;

fn main() {
    let truth = country_truth(1, 0.4, &mut rng_from_seed(5));
    let (_, persons) = generate_households("BE", &truth, 800, 5);
    let enc = CovariateEncoder::fit(&persons);
    let x = enc.encode_all(&persons);
    println!("features: {:?}", enc.feature_names());

    let settings = BartSettings { trees: 30, iterations: 600, burn_in: 200, ..Default::default() };
    let z: Vec<bool> = persons.iter().map(|p| p.employed).collect();
    let probit = fit_probit(&x, &z, &settings, 1).expect("probit");
    let p = probit.predict(&x).expect("predict");
    let acc = p.iter().zip(&z).filter(|(pi, zi)| (**pi > 0.5) == **zi).count() as f64 / z.len() as f64;
    println!("in-sample accuracy {acc:.3}, employment rate {:.3}", z.iter().filter(|b| **b).count() as f64 / z.len() as f64);

    let emp: Vec<usize> = (0..persons.len()).filter(|&i| persons[i].employed).collect();
    let xe: Vec<Vec<f64>> = emp.iter().map(|&i| x[i].clone()).collect();
    let ye: Vec<f64> = emp.iter().map(|&i| persons[i].employment_income).collect();
    let reg = fit_regression(&xe, &ye, &settings, 2).expect("regression");
    let sigma2 = reg.sigma2.last().copied().unwrap_or(f64::NAN);
    println!("last residual variance draw {sigma2:.3}");
    let unemployed: Vec<Vec<f64>> = persons.iter().filter(|p| !p.employed).take(5).map(|p| enc.encode(p)).collect();
    println!("imputed incomes for five unemployed: {:?}", reg.predict(&unemployed).expect("predict"));
}
