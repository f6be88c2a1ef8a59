use std::collections::BTreeMap;

use mpdist::regression::{exploratory_regressions, pairwise_regress, standardize, CountryFeatureTable, Flag, FEATURES};
use proptest::prelude::*;

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Two-sided Student-t p-value by Simpson integration of the density.
fn t_p_value(t: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let pdf = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    let n = 20_000;
    let h = t.abs() / n as f64;
    let mut s = pdf(0.0) + pdf(t.abs());
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(i as f64 * h);
    }
    1.0 - 2.0 * s * h / 3.0
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn column() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 3..40).prop_filter("not constant", |v| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() > 1e-6
    })
}

proptest! {
    #[test]
    fn standardized_column_has_zero_mean_unit_sd(v in column()) {
        let z = standardize("v", &v).unwrap();
        let n = z.len() as f64;
        let m = z.iter().sum::<f64>() / n;
        let sd = (z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        prop_assert!(m.abs() < 1e-12);
        prop_assert!((sd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_equals_correlation((x, y) in (3usize..40).prop_flat_map(|n| (prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n)))) {
        let (Ok(zx), Ok(zy)) = (standardize("x", &x), standardize("y", &y)) else { return Ok(()) };
        let fit = pairwise_regress(&zy, &zx).unwrap();
        prop_assert!((fit.coefficient - pearson(&x, &y)).abs() < 1e-10);
    }

    #[test]
    fn flags_nest(p in 0.0f64..1.0) {
        let f = Flag::from_p(p);
        prop_assert_eq!(f == Flag::Circle, p < 0.01);
        prop_assert_eq!(f.significant_at_5(), p < 0.05);
        if f == Flag::Circle {
            prop_assert!(f.significant_at_5());
        }
    }

    #[test]
    fn p_value_matches_t_integral(x in prop::collection::vec(-3.0f64..3.0, 6..25), noise in prop::collection::vec(-1.0f64..1.0, 25), beta in -1.0f64..1.0) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(a, e)| beta * a + e).collect();
        let (Ok(zx), Ok(zy)) = (standardize("x", &x), standardize("y", &y)) else { return Ok(()) };
        let fit = pairwise_regress(&zy, &zx).unwrap();
        let n = x.len() as f64;
        let r = fit.coefficient;
        prop_assume!(r.abs() < 0.999);
        let t = r * ((n - 2.0) / (1.0 - r * r)).sqrt();
        prop_assert!((fit.p_value - t_p_value(t, n - 2.0)).abs() < 1e-6, "{} vs {}", fit.p_value, t_p_value(t, n - 2.0));
    }
}

#[test]
fn constant_column_is_an_error() {
    assert!(standardize("c", &[2.0, 2.0, 2.0]).is_err());
    assert!(standardize("c", &[1.0, f64::NAN, 2.0]).is_err());
}

#[test]
fn flag_symbols() {
    assert_eq!(Flag::from_p(0.2).symbol(), "");
    assert_eq!(Flag::from_p(0.03).symbol(), "*");
    assert_eq!(Flag::from_p(0.001).symbol(), "°");
}

#[test]
fn table_drops_constant_columns() {
    let mut table = CountryFeatureTable::default();
    for (i, c) in ["AT", "BE", "DE", "ES", "FR"].into_iter().enumerate() {
        let mut row: Vec<f64> = (0..FEATURES.len()).map(|j| ((i * 7 + j * 3) % 11) as f64 + i as f64 * 0.1).collect();
        row[0] = 1.0;
        table.push(c, row).unwrap();
    }
    let mut responses = BTreeMap::new();
    responses.insert("peak_gini_income".to_string(), vec![0.1, -0.2, 0.05, 0.3, -0.1]);
    let out = exploratory_regressions(&table, &responses).unwrap();
    assert!(!out.features.iter().any(|f| f == FEATURES[0]));
    assert_eq!(out.fits.len(), out.features.len());
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().lines().count() > 1);
}
