//! Horseshoe BVAR on a simulated three-variable system and impulse
//! responses to a shock in the last-ordered variable.

use mpdist::bvar::{gibbs_fit_matrix, irf, simulate_var, BvarChain, BvarPrior, VarSpec};
use mpdist::rng::rng_from_seed;
use nalgebra::{DMatrix, DVector};

fn main() {
    let a = DMatrix::from_row_slice(3, 3, &[0.7, 0.0, -0.2, 0.1, 0.6, -0.3, 0.0, 0.0, 0.8]);
    let sigma = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.1, 0.2, 1.0, 0.1, 0.1, 0.1, 0.5]);
    let c = DVector::from_column_slice(&[0.5, 0.2, 0.1]);
    let mut rng = rng_from_seed(8);
    let y = simulate_var(std::slice::from_ref(&a), &c, &sigma, 300, 100, &mut rng).expect("stable");

    let spec = VarSpec::new(&["output", "prices", "rate"], 2);
    let chain = BvarChain { iterations: 4000, burn_in: 2000, thin: 2 };
    let draws = gibbs_fit_matrix(&y, None, &spec, &BvarPrior::default(), &chain, 9).expect("gibbs");
    println!("posterior mean [A1 A2]:{}", draws.posterior_mean_a());

    let set = irf(&draws, "rate", 12, 1.0).expect("irf");
    println!("{} draws excluded as explosive", set.excluded.len());
    set.write_csv(std::io::stdout()).expect("csv");
}
