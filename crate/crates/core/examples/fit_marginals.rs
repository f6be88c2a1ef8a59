//! Fit both income families to simulated Singh-Maddala incomes and compare
//! them by DIC and BIC.

use mpdist::marginals::{information_criteria, rwmh_fit, ChainConfig, MarginalFamily, PriorSpec, SelectionTable, INCOME_FAMILIES};
use mpdist::rng::rng_from_seed;

fn main() {
    let truth = MarginalFamily::SinghMaddala { a: 2.5, b: 30.0, q: 1.5 };
    let mut rng = rng_from_seed(1);
    let data: Vec<f64> = (0..3000).map(|_| truth.sample(&mut rng)).collect();

    let chain = ChainConfig::short(6000, 3000, 3);
    let mut table = SelectionTable::default();
    for (i, fam) in INCOME_FAMILIES.into_iter().enumerate() {
        let post = rwmh_fit(&data, fam, &PriorSpec::default(), &chain, 10 + i as u64).expect("fit");
        let ic = information_criteria(&post, &data);
        println!("{:<14} acceptance {:.2}", fam.label(), post.acceptance_rate);
        for (j, name) in post.param_names.iter().enumerate() {
            let (lo, hi) = post.credible_interval(j, 0.68);
            println!("  {name:>6} = {:8.3}  [{lo:.3}, {hi:.3}]", post.posterior_mean()[j]);
        }
        table.push("SIM", "income", fam, ic);
    }
    println!("truth: {truth:?}");
    println!("selected by DIC: {:?}", table.selected("SIM", "income", false));
    table.write_csv(std::io::stdout()).expect("csv");
}
