use mpdist::bvar::{companion, gibbs_fit_matrix, impulse_response, irf, simulate_var, spectral_radius, BvarChain, BvarPrior, VarSpec};
use mpdist::rng::rng_from_seed;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn stable_pair() -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (prop::collection::vec(-0.4f64..0.4, 4), prop::collection::vec(-0.3f64..0.3, 4))
        .prop_map(|(a1, a2)| (DMatrix::from_row_slice(2, 2, &a1), DMatrix::from_row_slice(2, 2, &a2)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn irf_matches_companion_power((a1, a2) in stable_pair(), b in prop::collection::vec(-2.0f64..2.0, 2)) {
        let impact = DVector::from_column_slice(&b);
        let resp = impulse_response(&[a1.clone(), a2.clone()], &impact, 10);
        let c = companion(&[a1, a2]);
        let mut state = DVector::zeros(4);
        state.rows_mut(0, 2).copy_from(&impact);
        for h in 0..=10 {
            for i in 0..2 {
                prop_assert!((resp[i][h] - state[i]).abs() < 1e-12);
            }
            state = &c * state;
        }
    }

    #[test]
    fn spectral_radius_bounds_growth((a1, a2) in stable_pair()) {
        let r = spectral_radius(&[a1.clone(), a2.clone()]);
        let c = companion(&[a1, a2]);
        let p = c.pow(60);
        // Gelfand: ||C^k||^(1/k) approaches the spectral radius from above
        let norm = p.norm().powf(1.0 / 60.0);
        prop_assert!(norm + 1e-9 >= r);
        prop_assert!(norm < r + 0.15);
    }
}

#[test]
fn unstable_system_cannot_be_simulated() {
    let a = DMatrix::from_row_slice(1, 1, &[1.02]);
    let mut rng = rng_from_seed(1);
    assert!(simulate_var(&[a], &DVector::zeros(1), &DMatrix::identity(1, 1), 50, 10, &mut rng).is_err());
}

#[test]
fn recovers_diagonal_var() {
    let a = DMatrix::from_row_slice(2, 2, &[0.6, 0.0, 0.2, 0.3]);
    let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.8]);
    let mut rng = rng_from_seed(21);
    let y = simulate_var(std::slice::from_ref(&a), &DVector::from_column_slice(&[1.0, -1.0]), &sigma, 800, 100, &mut rng).unwrap();
    let spec = VarSpec::new(&["x", "y"], 1);
    let chain = BvarChain { iterations: 1500, burn_in: 500, thin: 2 };
    let draws = gibbs_fit_matrix(&y, None, &spec, &BvarPrior::default(), &chain, 3).unwrap();
    let am = draws.posterior_mean_a();
    for (est, truth) in am.iter().zip(a.iter()) {
        assert!((est - truth).abs() < 0.08, "{am} vs {a}");
    }
    let sm = draws.sigma.iter().fold(DMatrix::zeros(2, 2), |acc, s| acc + s) / draws.len() as f64;
    assert!((sm - &sigma).abs().max() < 0.15);
}

#[test]
fn identical_seeds_identical_draws() {
    let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.4]);
    let mut rng = rng_from_seed(5);
    let y = simulate_var(std::slice::from_ref(&a), &DVector::zeros(2), &DMatrix::identity(2, 2), 120, 50, &mut rng).unwrap();
    let spec = VarSpec::new(&["a", "b"], 2);
    let chain = BvarChain { iterations: 300, burn_in: 100, thin: 1 };
    let d1 = gibbs_fit_matrix(&y, None, &spec, &BvarPrior::default(), &chain, 8).unwrap();
    let d2 = gibbs_fit_matrix(&y, None, &spec, &BvarPrior::default(), &chain, 8).unwrap();
    assert_eq!(d1, d2);
    let s1 = irf(&d1, "b", 6, 1.0).unwrap();
    assert!(s1.draws.iter().all(|d| d[0][0] == 0.0));
    assert!(irf(&d1, "missing", 6, 1.0).is_err());
}
