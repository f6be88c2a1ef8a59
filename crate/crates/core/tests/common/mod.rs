#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use mpdist::config::RunConfig;

/// Small but complete pipeline configuration rooted at `dir`.
pub fn tiny_config(dir: &Path, countries: &[&str]) -> RunConfig {
    let toml = format!(
        r#"
seed = 5
output_dir = "{out}"
[data]
input_dir = "{data}"
[synthetic]
countries = [{list}]
households = 300
quarters = 80
[marginals]
iterations = 800
burn_in = 400
thin = 2
[copula]
proposals = 1000
simulation_proposals = 1000
[bvar]
iterations = 400
burn_in = 200
thin = 2
[bart]
trees = 10
iterations = 120
burn_in = 40
"#,
        out = dir.join("out").display(),
        data = dir.join("data").display(),
        list = countries.iter().map(|c| format!("\"{c}\"")).collect::<Vec<_>>().join(", "),
    );
    RunConfig::from_toml_str(&toml).expect("valid config")
}

/// Relative path to file bytes for every file with extension `ext` under `root`.
pub fn files_with_ext(root: &Path, ext: &str) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).expect("readable dir") {
            let p = e.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().and_then(|s| s.to_str()) == Some(ext) {
                let rel = p.strip_prefix(root).expect("under root").to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).expect("readable file"));
            }
        }
    }
    out
}
