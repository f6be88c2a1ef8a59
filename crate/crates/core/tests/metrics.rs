use approx::assert_relative_eq;
use mpdist::metrics::{bivariate_gini, gini, sample_spearman, MetricReport};
use mpdist::data::HouseholdRecord;
use proptest::prelude::*;

/// Mean absolute difference over all ordered pairs divided by twice the mean.
fn gini_pairs(x: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    let mu = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total;
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            s += w[i] * w[j] * (x[i] - x[j]).abs();
        }
    }
    s / (total * total) / (2.0 * mu)
}

fn bivariate_pairs(x1: &[f64], x2: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    let m1 = x1.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total;
    let m2 = x2.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..x1.len() {
        den += w[i] * (x1[i] / m1).hypot(x2[i] / m2);
        for j in 0..x1.len() {
            num += w[i] * w[j] * ((x1[i] - x1[j]) / m1).hypot((x2[i] - x2[j]) / m2);
        }
    }
    (num / (total * total)) / (2.0 * den / total)
}

fn ranks(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let below = x.iter().filter(|&&v| v < x[i]).count() as f64;
            let ties = x.iter().filter(|&&v| v == x[i]).count() as f64;
            below + (ties + 1.0) / 2.0
        })
        .collect()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn sample() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..60).prop_flat_map(|n| (prop::collection::vec(0.0f64..1e4, n), prop::collection::vec(0.1f64..5.0, n)))
}

proptest! {
    #[test]
    fn gini_matches_pair_formula((x, w) in sample()) {
        prop_assume!(x.iter().any(|v| *v > 0.0));
        let g = gini(&x, &w).unwrap();
        prop_assert!((g - gini_pairs(&x, &w)).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn gini_scale_invariant((x, w) in sample(), c in 1e-3f64..1e3) {
        prop_assume!(x.iter().any(|v| *v > 0.0));
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        prop_assert!((gini(&x, &w).unwrap() - gini(&scaled, &w).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn gini_replication_invariant((x, w) in sample(), k in 2usize..5) {
        prop_assume!(x.iter().any(|v| *v > 0.0));
        let xr: Vec<f64> = (0..k).flat_map(|_| x.iter().copied()).collect();
        let wr: Vec<f64> = (0..k).flat_map(|_| w.iter().copied()).collect();
        prop_assert!((gini(&x, &w).unwrap() - gini(&xr, &wr).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn integer_weights_equal_replication(x in prop::collection::vec(0.1f64..100.0, 2..30), k in prop::collection::vec(1usize..4, 30)) {
        let w: Vec<f64> = x.iter().zip(&k).map(|(_, &c)| c as f64).collect();
        let xr: Vec<f64> = x.iter().zip(&k).flat_map(|(&v, &c)| std::iter::repeat_n(v, c)).collect();
        let ones = vec![1.0; xr.len()];
        prop_assert!((gini(&x, &w).unwrap() - gini(&xr, &ones).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn bivariate_matches_pair_formula((x, w) in sample(), y in prop::collection::vec(0.1f64..1e3, 60)) {
        prop_assume!(x.iter().any(|v| *v > 0.0));
        let y = &y[..x.len()];
        let g = bivariate_gini(&x, y, &w).unwrap();
        prop_assert!((g - bivariate_pairs(&x, y, &w)).abs() < 1e-10);
    }

    #[test]
    fn bivariate_comonotone_equals_univariate((x, w) in sample()) {
        prop_assume!(x.iter().any(|v| *v > 0.0));
        let g = gini(&x, &w).unwrap();
        prop_assert!((bivariate_gini(&x, &x, &w).unwrap() - g).abs() < 1e-9);
    }

    #[test]
    fn spearman_is_pearson_of_ranks(x in prop::collection::vec(-50i32..50, 5..40), y in prop::collection::vec(-50i32..50, 40)) {
        let x: Vec<f64> = x.into_iter().map(f64::from).collect();
        let y: Vec<f64> = y[..x.len()].iter().map(|&v| f64::from(v)).collect();
        prop_assume!(x.iter().any(|v| *v != x[0]) && y.iter().any(|v| *v != y[0]));
        let w = vec![1.0; x.len()];
        let rho = sample_spearman(&x, &y, &w).unwrap();
        prop_assert!((rho - pearson(&ranks(&x), &ranks(&y))).abs() < 1e-10);
    }
}

#[test]
fn two_point_gini_is_one_half() {
    for c in [1e-6, 1.0, 3.7, 1e9] {
        assert_eq!(gini(&[0.0, c], &[1.0, 1.0]).unwrap(), 0.5);
    }
}

#[test]
fn equal_incomes_have_zero_gini() {
    assert_eq!(gini(&[4.0; 10], &[1.0; 10]).unwrap(), 0.0);
    assert_relative_eq!(bivariate_gini(&[2.0; 5], &[7.0; 5], &[1.0; 5]).unwrap(), 0.0, epsilon = 1e-15);
}

#[test]
fn negative_values_rejected() {
    assert!(gini(&[1.0, -2.0], &[1.0, 1.0]).is_err());
    assert!(gini(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    assert!(bivariate_gini(&[1.0, 2.0], &[0.0, 0.0], &[1.0, 1.0]).is_err());
}

#[test]
fn report_on_small_panel() {
    let hh = |id: &str, inc: f64, net: f64| HouseholdRecord {
        household_id: id.into(),
        weight: 1.0,
        income: [inc, 0.0, 0.0, 0.0, 0.0, 0.0],
        wealth: [net, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    };
    let panel = vec![hh("a", 10.0, 100.0), hh("b", 20.0, 300.0), hh("c", 30.0, 200.0), hh("d", 40.0, 400.0)];
    let r = MetricReport::compute(&panel, None).unwrap();
    assert_relative_eq!(r.gini_income, gini(&[10.0, 20.0, 30.0, 40.0], &[1.0; 4]).unwrap(), epsilon = 1e-15);
    assert_relative_eq!(r.spearman_rho, 0.8, epsilon = 1e-12);
}
