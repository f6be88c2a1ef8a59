use mpdist::data::{
    load_households, load_macro_panel, load_persons, write_households, write_macro_panel, write_persons, HouseholdSchema, PersonSchema,
    Quarter,
};
use mpdist::pipeline::synthetic::{country_truth, generate_households, simulate_macro, MacroTruth};
use mpdist::rng::rng_from_seed;
use proptest::prelude::*;

proptest! {
    #[test]
    fn quarter_display_parses_back(year in 1900i32..2100, q in 1u8..=4) {
        let d = Quarter { year, q };
        prop_assert_eq!(Quarter::parse(&d.to_string()).unwrap(), d);
        let n = d.next();
        prop_assert!(n > d);
        prop_assert_eq!(n.year * 4 + i32::from(n.q), d.year * 4 + i32::from(d.q) + 1);
    }

    #[test]
    fn household_files_round_trip(seed in 0u64..500, n in 5usize..40) {
        let truth = country_truth(seed as usize % 2, 0.4, &mut rng_from_seed(seed));
        let (households, persons) = generate_households("ZZ", &truth, n, seed);
        let dir = tempfile::tempdir().unwrap();
        let hp = dir.path().join("households.csv");
        let pp = dir.path().join("persons.csv");
        write_households(&hp, &households, &HouseholdSchema::default()).unwrap();
        write_persons(&pp, &persons, &PersonSchema::default()).unwrap();
        let loaded = load_households(&hp, &HouseholdSchema::default()).unwrap();
        prop_assert_eq!(loaded.households, households);
        prop_assert_eq!(load_persons(&pp, &PersonSchema::default()).unwrap(), persons);
    }
}

#[test]
fn macro_panel_round_trip() {
    let truth = MacroTruth::standard(&mut rng_from_seed(2));
    let panel = simulate_macro("AT", &truth, 40, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("macro.csv");
    write_macro_panel(&path, &panel).unwrap();
    let back = load_macro_panel(&path).unwrap();
    assert_eq!(back.dates, panel.dates);
    for (name, values) in &panel.series {
        let got = back.get(name).unwrap();
        for (a, b) in values.iter().zip(got) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn bad_quarters_rejected() {
    for s in ["2020Q5", "2020", "Q1", "20x0Q1", "2020Q0"] {
        assert!(Quarter::parse(s).is_err(), "{s}");
    }
    assert_eq!(Quarter::parse("2001-q3").unwrap(), Quarter { year: 2001, q: 3 });
}

#[test]
fn missing_column_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("households.csv");
    std::fs::write(&path, "household_id,weight\nh1,1.0\n").unwrap();
    let err = load_households(&path, &HouseholdSchema::default()).unwrap_err();
    assert!(err.to_string().contains("column"), "{err}");
}
