//! Write and read back the household, person and macro files, including the
//! log transform of the macro panel.

use mpdist::data::{load_households, load_macro_panel, load_persons, write_households, write_macro_panel, write_persons};
use mpdist::data::{HouseholdSchema, PersonSchema};
use mpdist::pipeline::synthetic::{country_truth, generate_households, simulate_macro, MacroTruth};
use mpdist::rng::rng_from_seed;

fn main() {
    let dir = std::env::temp_dir().join("mpdist-load-data");
    std::fs::create_dir_all(&dir).expect("dir");
    let mut rng = rng_from_seed(2);
    let truth = country_truth(0, 0.3, &mut rng);
    let (households, persons) = generate_households("NL", &truth, 200, 2);
    let panel = simulate_macro("NL", &MacroTruth::standard(&mut rng), 60, 2).expect("macro");

    let (hs, ps) = (HouseholdSchema::default(), PersonSchema::default());
    write_households(&dir.join("households.csv"), &households, &hs).expect("write");
    write_persons(&dir.join("persons.csv"), &persons, &ps).expect("write");
    write_macro_panel(&dir.join("NL.csv"), &panel).expect("write");

    let load = load_households(&dir.join("households.csv"), &hs).expect("households");
    let people = load_persons(&dir.join("persons.csv"), &ps).expect("persons");
    let back = load_macro_panel(&dir.join("NL.csv")).expect("macro");
    println!("{} households ({} negative income), {} persons", load.households.len(), load.negative_income.len(), people.len());
    println!("macro {}: {} quarters from {} to {}", back.country, back.len(), back.dates[0], back.dates[back.len() - 1]);
    for name in back.series.keys() {
        println!("  {name:<9} first {:10.3}  transformed {}", back.series[name][0], back.transformed[name]);
    }
}
