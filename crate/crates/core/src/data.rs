//! Household microdata and quarterly macro panels.
//!
//! Loaded records are plain immutable values; they are `Send + Sync` and can
//! be shared across threads freely.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const N_INCOME: usize = 6;
pub const N_WEALTH: usize = 9;

/// Income components in column order.
pub const INCOME_COMPONENTS: [&str; N_INCOME] = [
    "employment",
    "self_employment",
    "pensions",
    "rental",
    "financial",
    "benefits_transfers",
];

/// Wealth components in column order; the last one is total liabilities.
pub const WEALTH_COMPONENTS: [&str; N_WEALTH] = [
    "main_residence",
    "other_real_estate",
    "business",
    "shares",
    "bonds",
    "pension_life",
    "deposits",
    "other_financial",
    "liabilities",
];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("CSV error in {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("missing required column `{column}`")]
    Schema { column: String },
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    Parse { row: usize, column: String, value: String },
    #[error("row {row}: {message}")]
    Invariant { row: usize, message: String },
    #[error("unknown macro series `{0}`")]
    UnknownSeries(String),
    #[error("bad quarter label `{0}` (expected e.g. 2004Q3)")]
    BadQuarter(String),
    #[error("time index has gaps; missing quarters: {}", .0.join(", "))]
    MissingQuarters(Vec<String>),
    #[error("series `{series}` has a missing interior value at {quarter}")]
    MissingValue { series: String, quarter: String },
    #[error("series `{series}` must be positive for the log transform (got {value} at {quarter})")]
    NonPositiveLog { series: String, quarter: String, value: f64 },
    #[error("{0}")]
    Validation(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> DataError + '_ {
    move |source| DataError::Csv { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdRecord {
    pub household_id: String,
    pub weight: f64,
    pub income: [f64; N_INCOME],
    pub wealth: [f64; N_WEALTH],
}

impl HouseholdRecord {
    pub fn total_income(&self) -> f64 {
        self.income.iter().sum()
    }

    /// Assets (components 1-8) minus liabilities (component 9).
    pub fn net_wealth(&self) -> f64 {
        self.gross_assets() - self.debt()
    }

    pub fn gross_assets(&self) -> f64 {
        self.wealth[..N_WEALTH - 1].iter().sum()
    }

    pub fn debt(&self) -> f64 {
        self.wealth[N_WEALTH - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonRecord {
    pub person_id: String,
    pub household_id: String,
    pub employed: bool,
    pub gender: String,
    /// Highest attained level, ordered (higher = more education).
    pub education: u32,
    pub age: f64,
    pub marital_status: String,
    pub n_children: u32,
    pub tenure_years: f64,
    pub employment_income: f64,
    pub unemployment_benefits: f64,
}

/// Column names of the household file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HouseholdSchema {
    pub household_id: String,
    pub weight: String,
    pub income: [String; N_INCOME],
    pub wealth: [String; N_WEALTH],
}

impl Default for HouseholdSchema {
    fn default() -> Self {
        HouseholdSchema {
            household_id: "household_id".into(),
            weight: "weight".into(),
            income: INCOME_COMPONENTS.map(|s| format!("inc_{s}")),
            wealth: WEALTH_COMPONENTS.map(|s| format!("w_{s}")),
        }
    }
}

/// Column names of the person file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PersonSchema {
    pub person_id: String,
    pub household_id: String,
    pub employed: String,
    pub gender: String,
    pub education: String,
    pub age: String,
    pub marital_status: String,
    pub n_children: String,
    pub tenure_years: String,
    pub employment_income: String,
    pub unemployment_benefits: String,
}

impl Default for PersonSchema {
    fn default() -> Self {
        PersonSchema {
            person_id: "person_id".into(),
            household_id: "household_id".into(),
            employed: "employed".into(),
            gender: "gender".into(),
            education: "education".into(),
            age: "age".into(),
            marital_status: "marital_status".into(),
            n_children: "n_children".into(),
            tenure_years: "tenure_years".into(),
            employment_income: "employment_income".into(),
            unemployment_benefits: "unemployment_benefits".into(),
        }
    }
}

/// Households plus the ids of those with negative total income (kept, but
/// excluded from income-marginal fitting).
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholdLoad {
    pub households: Vec<HouseholdRecord>,
    pub negative_income: Vec<String>,
}

struct Header {
    index: BTreeMap<String, usize>,
}

impl Header {
    fn new(rec: &csv::StringRecord) -> Self {
        Header { index: rec.iter().enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect() }
    }

    fn col(&self, name: &str) -> Result<usize, DataError> {
        self.index.get(name).copied().ok_or_else(|| DataError::Schema { column: name.to_string() })
    }
}

fn parse_f64(rec: &csv::StringRecord, idx: usize, row: usize, column: &str) -> Result<f64, DataError> {
    let raw = rec.get(idx).unwrap_or("").trim();
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::Parse { row, column: column.to_string(), value: raw.to_string() })
}

fn parse_bool(rec: &csv::StringRecord, idx: usize, row: usize, column: &str) -> Result<bool, DataError> {
    let raw = rec.get(idx).unwrap_or("").trim();
    match raw.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        _ => Err(DataError::Parse { row, column: column.to_string(), value: raw.to_string() }),
    }
}

fn parse_u32(rec: &csv::StringRecord, idx: usize, row: usize, column: &str) -> Result<u32, DataError> {
    let raw = rec.get(idx).unwrap_or("").trim();
    raw.parse::<u32>()
        .ok()
        .or_else(|| raw.parse::<f64>().ok().filter(|v| *v >= 0.0 && v.fract() == 0.0).map(|v| v as u32))
        .ok_or_else(|| DataError::Parse { row, column: column.to_string(), value: raw.to_string() })
}

/// Read the household file. Row indices in errors are 1-based data rows.
pub fn load_households(path: &Path, schema: &HouseholdSchema) -> Result<HouseholdLoad, DataError> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = Header::new(rdr.headers().map_err(csv_err(path))?);
    let id_col = header.col(&schema.household_id)?;
    let w_col = header.col(&schema.weight)?;
    let inc_cols: Vec<usize> = schema.income.iter().map(|c| header.col(c)).collect::<Result<_, _>>()?;
    let wea_cols: Vec<usize> = schema.wealth.iter().map(|c| header.col(c)).collect::<Result<_, _>>()?;

    let mut households = Vec::new();
    let mut negative_income = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(csv_err(path))?;
        let weight = parse_f64(&rec, w_col, row, &schema.weight)?;
        if weight < 0.0 {
            return Err(DataError::Invariant { row, message: format!("negative weight {weight}") });
        }
        let mut income = [0.0; N_INCOME];
        for (k, &c) in inc_cols.iter().enumerate() {
            income[k] = parse_f64(&rec, c, row, &schema.income[k])?;
        }
        let mut wealth = [0.0; N_WEALTH];
        for (k, &c) in wea_cols.iter().enumerate() {
            wealth[k] = parse_f64(&rec, c, row, &schema.wealth[k])?;
        }
        let hh = HouseholdRecord {
            household_id: rec.get(id_col).unwrap_or("").trim().to_string(),
            weight,
            income,
            wealth,
        };
        if hh.total_income() < 0.0 {
            negative_income.push(hh.household_id.clone());
        }
        households.push(hh);
    }
    if !negative_income.is_empty() {
        log::info!("{}: {} households with negative total income", path.display(), negative_income.len());
    }
    Ok(HouseholdLoad { households, negative_income })
}

pub fn write_households(path: &Path, households: &[HouseholdRecord], schema: &HouseholdSchema) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header = vec![schema.household_id.clone(), schema.weight.clone()];
    header.extend(schema.income.iter().cloned());
    header.extend(schema.wealth.iter().cloned());
    wtr.write_record(&header).map_err(csv_err(path))?;
    for h in households {
        let mut rec = vec![h.household_id.clone(), h.weight.to_string()];
        rec.extend(h.income.iter().map(|v| v.to_string()));
        rec.extend(h.wealth.iter().map(|v| v.to_string()));
        wtr.write_record(&rec).map_err(csv_err(path))?;
    }
    wtr.flush().map_err(io_err(path))
}

pub fn load_persons(path: &Path, schema: &PersonSchema) -> Result<Vec<PersonRecord>, DataError> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let h = Header::new(rdr.headers().map_err(csv_err(path))?);
    let c = |name: &str| h.col(name);
    let (pid, hid, emp, gen, edu, age, mar, kids, ten, inc, ben) = (
        c(&schema.person_id)?,
        c(&schema.household_id)?,
        c(&schema.employed)?,
        c(&schema.gender)?,
        c(&schema.education)?,
        c(&schema.age)?,
        c(&schema.marital_status)?,
        c(&schema.n_children)?,
        c(&schema.tenure_years)?,
        c(&schema.employment_income)?,
        c(&schema.unemployment_benefits)?,
    );
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(csv_err(path))?;
        let p = PersonRecord {
            person_id: rec.get(pid).unwrap_or("").trim().to_string(),
            household_id: rec.get(hid).unwrap_or("").trim().to_string(),
            employed: parse_bool(&rec, emp, row, &schema.employed)?,
            gender: rec.get(gen).unwrap_or("").trim().to_string(),
            education: parse_u32(&rec, edu, row, &schema.education)?,
            age: parse_f64(&rec, age, row, &schema.age)?,
            marital_status: rec.get(mar).unwrap_or("").trim().to_string(),
            n_children: parse_u32(&rec, kids, row, &schema.n_children)?,
            tenure_years: parse_f64(&rec, ten, row, &schema.tenure_years)?,
            employment_income: parse_f64(&rec, inc, row, &schema.employment_income)?,
            unemployment_benefits: parse_f64(&rec, ben, row, &schema.unemployment_benefits)?,
        };
        for (name, v) in [("age", p.age), ("tenure_years", p.tenure_years), ("employment_income", p.employment_income)] {
            if v < 0.0 {
                return Err(DataError::Invariant { row, message: format!("{name} must be >= 0, got {v}") });
            }
        }
        out.push(p);
    }
    Ok(out)
}

pub fn write_persons(path: &Path, persons: &[PersonRecord], schema: &PersonSchema) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_path(path).map_err(csv_err(path))?;
    wtr.write_record([
        &schema.person_id,
        &schema.household_id,
        &schema.employed,
        &schema.gender,
        &schema.education,
        &schema.age,
        &schema.marital_status,
        &schema.n_children,
        &schema.tenure_years,
        &schema.employment_income,
        &schema.unemployment_benefits,
    ])
    .map_err(csv_err(path))?;
    for p in persons {
        wtr.write_record([
            p.person_id.clone(),
            p.household_id.clone(),
            (p.employed as u8).to_string(),
            p.gender.clone(),
            p.education.to_string(),
            p.age.to_string(),
            p.marital_status.clone(),
            p.n_children.to_string(),
            p.tenure_years.to_string(),
            p.employment_income.to_string(),
            p.unemployment_benefits.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    wtr.flush().map_err(io_err(path))
}

/// Calendar quarter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quarter {
    pub year: i32,
    pub q: u8,
}

impl Quarter {
    pub fn parse(s: &str) -> Result<Quarter, DataError> {
        let t = s.trim().to_ascii_uppercase().replace('-', "");
        let (y, q) = t.split_once('Q').ok_or_else(|| DataError::BadQuarter(s.to_string()))?;
        let year = y.parse::<i32>().map_err(|_| DataError::BadQuarter(s.to_string()))?;
        let q = q.parse::<u8>().map_err(|_| DataError::BadQuarter(s.to_string()))?;
        if !(1..=4).contains(&q) {
            return Err(DataError::BadQuarter(s.to_string()));
        }
        Ok(Quarter { year, q })
    }

    pub fn next(self) -> Quarter {
        if self.q == 4 {
            Quarter { year: self.year + 1, q: 1 }
        } else {
            Quarter { year: self.year, q: self.q + 1 }
        }
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.q)
    }
}

/// Recognized macro series.
pub const MACRO_SERIES: [&str; 9] = ["DJ50", "HP", "LCOMP", "LT-IR", "UNEMP", "EA-spread", "GDP", "HICP", "ST-IR"];

/// Series stored as `100 * ln(x)`; the remaining ones are rates kept in levels.
pub const LOG_SERIES: [&str; 6] = ["DJ50", "HP", "LCOMP", "UNEMP", "GDP", "HICP"];

pub fn is_log_series(name: &str) -> bool {
    LOG_SERIES.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroPanel {
    pub country: String,
    pub dates: Vec<Quarter>,
    pub series: BTreeMap<String, Vec<f64>>,
    /// `true` once the log x 100 transform has been applied to a series.
    pub transformed: BTreeMap<String, bool>,
}

impl MacroPanel {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.series.get(name).map(|v| v.as_slice())
    }

    /// Apply `100 ln(x)` to every log series not yet transformed. Idempotent.
    pub fn apply_transforms(&mut self) -> Result<(), DataError> {
        for (name, values) in self.series.iter_mut() {
            if !is_log_series(name) || self.transformed.get(name).copied().unwrap_or(false) {
                continue;
            }
            for (v, d) in values.iter_mut().zip(&self.dates) {
                if *v <= 0.0 {
                    return Err(DataError::NonPositiveLog { series: name.clone(), quarter: d.to_string(), value: *v });
                }
                *v = 100.0 * v.ln();
            }
            self.transformed.insert(name.clone(), true);
        }
        Ok(())
    }
}

/// Read a quarterly macro panel and apply the log transforms. The first
/// column must be `date`; an optional `country` column overrides the file
/// stem as the country code. Leading and trailing rows with missing values
/// are trimmed; interior gaps are errors.
pub fn load_macro_panel(path: &Path) -> Result<MacroPanel, DataError> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let header = Header::new(&headers);
    let date_col = header.col("date")?;
    let country_col = header.index.get("country").copied();
    let mut names = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        let h = h.trim();
        if i == date_col || Some(i) == country_col {
            continue;
        }
        if !MACRO_SERIES.contains(&h) {
            return Err(DataError::UnknownSeries(h.to_string()));
        }
        names.push((i, h.to_string()));
    }

    let mut country = path.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    let mut dates = Vec::new();
    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(csv_err(path))?;
        dates.push(Quarter::parse(rec.get(date_col).unwrap_or(""))?);
        if let Some(c) = country_col {
            country = rec.get(c).unwrap_or("").trim().to_string();
        }
        for (k, (idx, name)) in names.iter().enumerate() {
            let raw = rec.get(*idx).unwrap_or("").trim();
            if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("nan") {
                cols[k].push(None);
            } else {
                let v = raw.parse::<f64>().map_err(|_| DataError::Parse {
                    row,
                    column: name.clone(),
                    value: raw.to_string(),
                })?;
                cols[k].push(Some(v));
            }
        }
    }

    for w in dates.windows(2) {
        if w[1] <= w[0] {
            return Err(DataError::Validation(format!("dates not increasing at {}", w[1])));
        }
    }
    let mut missing = Vec::new();
    for w in dates.windows(2) {
        let mut q = w[0].next();
        while q < w[1] {
            missing.push(q.to_string());
            q = q.next();
        }
    }
    if !missing.is_empty() {
        return Err(DataError::MissingQuarters(missing));
    }

    let complete = |t: usize| cols.iter().all(|c| c[t].is_some());
    let start = (0..dates.len()).find(|&t| complete(t)).unwrap_or(dates.len());
    let end = (0..dates.len()).rev().find(|&t| complete(t)).map(|t| t + 1).unwrap_or(start);
    let mut series = BTreeMap::new();
    for (k, (_, name)) in names.iter().enumerate() {
        let mut v = Vec::with_capacity(end.saturating_sub(start));
        for t in start..end {
            match cols[k][t] {
                Some(x) => v.push(x),
                None => {
                    return Err(DataError::MissingValue { series: name.clone(), quarter: dates[t].to_string() })
                }
            }
        }
        series.insert(name.clone(), v);
    }
    let mut panel = MacroPanel {
        country,
        dates: dates[start..end].to_vec(),
        series,
        transformed: BTreeMap::new(),
    };
    panel.apply_transforms()?;
    Ok(panel)
}

/// Write a panel in raw units (log series are exponentiated back).
pub fn write_macro_panel(path: &Path, panel: &MacroPanel) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let names: Vec<&String> = panel.series.keys().collect();
    let mut header = vec!["date".to_string()];
    header.extend(names.iter().map(|s| s.to_string()));
    wtr.write_record(&header).map_err(csv_err(path))?;
    for (t, d) in panel.dates.iter().enumerate() {
        let mut rec = vec![d.to_string()];
        for n in &names {
            let v = panel.series[*n][t];
            let raw = if is_log_series(n) && panel.transformed.get(*n).copied().unwrap_or(false) {
                (v / 100.0).exp()
            } else {
                v
            };
            rec.push(raw.to_string());
        }
        wtr.write_record(&rec).map_err(csv_err(path))?;
    }
    wtr.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    fn hh_header() -> String {
        let s = HouseholdSchema::default();
        let mut cols = vec![s.household_id.clone(), s.weight.clone()];
        cols.extend(s.income.iter().cloned());
        cols.extend(s.wealth.iter().cloned());
        cols.join(",")
    }

    #[test]
    fn totals_from_components() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("{}\nh1,1.5,10,0,0,0,0,0,100,0,0,0,0,0,0,0,0\nh2,1,0,0,0,0,0,0,60,0,0,0,0,0,40,0,150\n", hh_header());
        let p = write(dir.path(), "hh.csv", &body);
        let load = load_households(&p, &HouseholdSchema::default()).unwrap();
        assert_eq!(load.households[0].total_income(), 10.0);
        assert_eq!(load.households[0].net_wealth(), 100.0);
        assert_eq!(load.households[1].net_wealth(), -50.0);
        assert!(load.negative_income.is_empty());
    }

    #[test]
    fn missing_weight_column_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let body = hh_header().replace("weight,", "w,") + "\nh1,1,10,0,0,0,0,0,100,0,0,0,0,0,0,0,0\n";
        let p = write(dir.path(), "hh.csv", &body);
        match load_households(&p, &HouseholdSchema::default()) {
            Err(DataError::Schema { column }) => assert_eq!(column, "weight"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_row() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("{}\nh1,1,10,0,0,0,0,0,100,0,0,0,0,0,0,0,0\nh2,1,abc,0,0,0,0,0,100,0,0,0,0,0,0,0,0\n", hh_header());
        let p = write(dir.path(), "hh.csv", &body);
        match load_households(&p, &HouseholdSchema::default()) {
            Err(DataError::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "inc_employment");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_income_flagged_not_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("{}\nh1,1,10,0,0,0,-20,0,100,0,0,0,0,0,0,0,0\n", hh_header());
        let p = write(dir.path(), "hh.csv", &body);
        let load = load_households(&p, &HouseholdSchema::default()).unwrap();
        assert_eq!(load.negative_income, vec!["h1".to_string()]);
        assert_eq!(load.households.len(), 1);
    }

    #[test]
    fn macro_transforms() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "AT.csv", "date,GDP,LT-IR\n2000Q1,100,2.5\n2000Q2,110,2.6\n");
        let panel = load_macro_panel(&p).unwrap();
        assert_eq!(panel.country, "AT");
        assert!((panel.get("GDP").unwrap()[0] - 460.517_018_598_809_1).abs() < 1e-9);
        assert_eq!(panel.get("LT-IR").unwrap()[0], 2.5);
        let mut again = panel.clone();
        again.apply_transforms().unwrap();
        assert_eq!(again, panel);
    }

    #[test]
    fn macro_gap_lists_missing_quarter() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "BE.csv", "date,GDP\n2000Q1,100\n2000Q3,101\n");
        match load_macro_panel(&p) {
            Err(DataError::MissingQuarters(q)) => assert_eq!(q, vec!["2000Q2".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn macro_interior_missing_value_and_trim() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "DE.csv", "date,GDP,HICP\n2000Q1,,1\n2000Q2,100,2\n2000Q3,101,\n2000Q4,102,3\n");
        assert!(matches!(load_macro_panel(&p), Err(DataError::MissingValue { .. })));
        let p = write(dir.path(), "FR.csv", "date,GDP,HICP\n2000Q1,,1\n2000Q2,100,2\n2000Q3,101,3\n");
        let panel = load_macro_panel(&p).unwrap();
        assert_eq!(panel.dates.len(), 2);
        assert_eq!(panel.dates[0], Quarter { year: 2000, q: 2 });
    }

    #[test]
    fn unknown_series_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "IT.csv", "date,FOO\n2000Q1,1\n");
        assert!(matches!(load_macro_panel(&p), Err(DataError::UnknownSeries(s)) if s == "FOO"));
    }
}
