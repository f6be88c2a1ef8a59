use mpdist::marginals::{information_criteria, log_likelihood, rwmh_fit, ChainConfig, FamilyTag, MarginalFamily, PriorSpec};
use mpdist::rng::rng_from_seed;
use proptest::prelude::*;

fn positive_families() -> impl Strategy<Value = MarginalFamily> {
    prop_oneof![
        (0.8f64..5.0, 1.0f64..50.0, 0.5f64..4.0).prop_map(|(a, b, q)| MarginalFamily::SinghMaddala { a, b, q }),
        (1.0f64..50.0, 0.8f64..5.0, 0.3f64..3.0).prop_map(|(c, d, p)| MarginalFamily::Dagum { c, d, p }),
        (-1.0f64..3.0, 0.2f64..1.5, 0.0f64..5.0).prop_map(|(mu, sigma, gamma)| MarginalFamily::ShiftedLogNormal { mu, sigma, gamma }),
    ]
}

fn mixtures() -> impl Strategy<Value = MarginalFamily> {
    (0.01f64..0.3, 0.0f64..0.2, 0.5f64..5.0, 0.7f64..3.0, 1.0f64..20.0, 1.0f64..4.0, 0.4f64..2.0)
        .prop_map(|(w_neg, w_zero, l, k, c, d, p)| MarginalFamily::NegPosMixture { w_neg, w_zero, l, k, c, d, p })
}

/// Composite Simpson on `[a, b]` after the substitution `x = a + (b - a) t^2`.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let g = |t: f64| f(a + (b - a) * t * t) * 2.0 * (b - a) * t;
    let h = 1.0 / n as f64;
    let mut s = g(0.0) + g(1.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_inverts_cdf(f in positive_families(), u in 0.001f64..0.999) {
        let x = f.quantile(u).unwrap();
        prop_assert!((f.cdf(x).unwrap() - u).abs() < 1e-9);
    }

    #[test]
    fn cdf_is_monotone(f in prop_oneof![positive_families(), mixtures()], a in -50.0f64..100.0, d in 0.0f64..50.0) {
        prop_assert!(f.cdf_unchecked(a) <= f.cdf_unchecked(a + d) + 1e-15);
    }

    #[test]
    fn density_is_cdf_derivative(f in positive_families(), u in 0.02f64..0.98) {
        let x = f.quantile(u).unwrap();
        let h = 1e-5 * x.abs().max(1.0);
        let fd = (f.cdf_unchecked(x + h) - f.cdf_unchecked(x - h)) / (2.0 * h);
        let pdf = f.log_pdf(x).unwrap().exp();
        prop_assert!((fd - pdf).abs() < 1e-5 * pdf.max(1e-3), "fd {fd} pdf {pdf}");
    }

    #[test]
    fn mixture_density_is_cdf_derivative_off_the_atom(f in mixtures(), x in prop_oneof![-20.0f64..-0.05, 0.05f64..60.0]) {
        let h = 1e-6 * x.abs().max(1.0);
        let fd = (f.cdf_unchecked(x + h) - f.cdf_unchecked(x - h)) / (2.0 * h);
        let pdf = f.log_pdf_unchecked(x).exp();
        prop_assert!((fd - pdf).abs() < 1e-4 * pdf.max(1e-4), "fd {fd} pdf {pdf}");
    }

    #[test]
    fn loglik_is_sum_of_log_densities(f in positive_families(), seed in 0u64..1000) {
        let mut rng = rng_from_seed(seed);
        let xs: Vec<f64> = (0..50).map(|_| f.sample(&mut rng)).collect();
        let direct: f64 = xs.iter().map(|&x| f.log_pdf_unchecked(x)).sum();
        let fast = log_likelihood(f.tag(), &f.params(), &xs, 0.0);
        prop_assert!((direct - fast).abs() < 1e-8 * direct.abs().max(1.0));
    }
}

#[test]
fn densities_integrate_to_one() {
    let fams = [
        MarginalFamily::SinghMaddala { a: 2.0, b: 10.0, q: 1.5 },
        MarginalFamily::Dagum { c: 10.0, d: 3.0, p: 0.8 },
        MarginalFamily::ShiftedLogNormal { mu: 1.0, sigma: 0.5, gamma: 2.0 },
    ];
    for f in fams {
        let lo = f.quantile(1e-12).unwrap();
        let hi = f.quantile(1.0 - 1e-9).unwrap();
        let mass = integrate(|x| f.log_pdf_unchecked(x).exp(), lo, hi, 20_000);
        assert!((mass - 1.0).abs() < 1e-6, "{f:?}: {mass}");
    }
    let mix = MarginalFamily::NegPosMixture { w_neg: 0.1, w_zero: 0.05, l: 2.0, k: 1.5, c: 10.0, d: 3.0, p: 1.0 };
    let neg = integrate(|x| mix.log_pdf_unchecked(-x).exp(), 0.0, 60.0, 20_000);
    let pos = integrate(|x| mix.log_pdf_unchecked(x).exp(), 0.0, 1e5, 200_000);
    assert!((neg - 0.1).abs() < 1e-5, "negative part {neg}");
    assert!((neg + pos + 0.05 - 1.0).abs() < 1e-3, "total {}", neg + pos + 0.05);
}

#[test]
fn mixture_atom_has_no_density() {
    let mix = MarginalFamily::NegPosMixture { w_neg: 0.1, w_zero: 0.05, l: 2.0, k: 1.5, c: 10.0, d: 3.0, p: 1.0 };
    assert!(mix.log_pdf(0.0).is_err());
    let jump = mix.cdf_unchecked(0.0) - mix.cdf_unchecked(-1e-12);
    assert!((jump - 0.05).abs() < 1e-9);
}

#[test]
fn invalid_parameters_rejected() {
    assert!(MarginalFamily::SinghMaddala { a: -1.0, b: 1.0, q: 1.0 }.validate().is_err());
    assert!(MarginalFamily::Dagum { c: 1.0, d: 0.0, p: 1.0 }.validate().is_err());
    assert!(MarginalFamily::ShiftedLogNormal { mu: 0.0, sigma: f64::NAN, gamma: 0.0 }.validate().is_err());
    assert!(MarginalFamily::NegPosMixture { w_neg: 0.7, w_zero: 0.4, l: 1.0, k: 1.0, c: 1.0, d: 1.0, p: 1.0 }
        .validate()
        .is_err());
}

#[test]
fn fits_are_reproducible() {
    let f = MarginalFamily::Dagum { c: 5.0, d: 3.0, p: 0.7 };
    let mut rng = rng_from_seed(2);
    let xs: Vec<f64> = (0..400).map(|_| f.sample(&mut rng)).collect();
    let chain = ChainConfig::short(800, 400, 2);
    let a = rwmh_fit(&xs, FamilyTag::Dagum, &PriorSpec::default(), &chain, 5).unwrap();
    let b = rwmh_fit(&xs, FamilyTag::Dagum, &PriorSpec::default(), &chain, 5).unwrap();
    assert_eq!(a, b);
    let ic = information_criteria(&a, &xs);
    assert!(ic.bic.is_finite() && ic.dic.is_finite());
}
