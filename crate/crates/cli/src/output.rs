//! Versioned output schemas, the per-run manifest and round-trip validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";
const MANIFEST_FORMAT: &str = "bayesbag-manifest";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Col {
    Int,
    Float,
    /// A float or the literal `NA`.
    FloatOrNa,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Csv(&'static [(&'static str, Col)]),
    /// Float columns `z1..zD` followed by `y`.
    DatasetCsv,
    MismatchJson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub version: u32,
    pub layout: Layout,
}

use Col::*;

pub const PIPS: Schema = Schema {
    name: "pips",
    version: 1,
    layout: Layout::Csv(&[("replicate", Int), ("method", Text), ("component", Int), ("pip", Float)]),
};

pub const SIM_SUMMARY: Schema = Schema {
    name: "sim_summary",
    version: 1,
    layout: Layout::Csv(&[
        ("method", Text),
        ("component", Int),
        ("mean_pip", Float),
        ("var_pip", Float),
        ("frac_uncertain", Float),
    ]),
};

pub const SPLIT_PIPS: Schema = Schema {
    name: "split_pips",
    version: 1,
    layout: Layout::Csv(&[
        ("split", Text),
        ("n", Int),
        ("method", Text),
        ("component", Int),
        ("name", Text),
        ("pip", Float),
    ]),
};

pub const REPRODUCIBILITY: Schema = Schema {
    name: "reproducibility",
    version: 1,
    layout: Layout::Csv(&[
        ("method", Text),
        ("component", Int),
        ("name", Text),
        ("full_pip", Float),
        ("split_min", Float),
        ("split_max", Float),
        ("split_range", Float),
    ]),
};

pub const TWO_MODEL: Schema = Schema {
    name: "two_model_curves",
    version: 1,
    layout: Layout::Csv(&[("delta", Float), ("c", Float), ("p_std_zero", Float), ("p_bb_strong", Float)]),
};

pub const DENSITY: Schema = Schema {
    name: "ubb_density",
    version: 1,
    layout: Layout::Csv(&[("delta", Float), ("c", Float), ("u", Float), ("density", Float)]),
};

pub const K_MODEL: Schema = Schema {
    name: "k_model_curves",
    version: 1,
    layout: Layout::Csv(&[
        ("scenario", Text),
        ("param", Float),
        ("model", Int),
        ("p_std_zero", Float),
        ("p_std_zero_se", Float),
        ("p_bb_strong", Float),
        ("p_bb_strong_se", Float),
    ]),
};

pub const OVERLAP: Schema = Schema {
    name: "overlap",
    version: 1,
    layout: Layout::Csv(&[
        ("level", Float),
        ("n_a", Int),
        ("n_b", Int),
        ("mass_a", Float),
        ("mass_b", Float),
        ("mass_avg", Float),
        ("count", Int),
        ("ci_stat", Text),
        ("ci_level", FloatOrNa),
        ("ci_lo", FloatOrNa),
        ("ci_hi", FloatOrNa),
    ]),
};

pub const DATASET: Schema = Schema {
    name: "dataset",
    version: 1,
    layout: Layout::DatasetCsv,
};

pub const MISMATCH: Schema = Schema {
    name: "mismatch_report",
    version: 1,
    layout: Layout::MismatchJson,
};

const ALL: &[Schema] = &[
    PIPS,
    SIM_SUMMARY,
    SPLIT_PIPS,
    REPRODUCIBILITY,
    TWO_MODEL,
    DENSITY,
    K_MODEL,
    OVERLAP,
    DATASET,
    MISMATCH,
];

fn lookup(name: &str, version: u32) -> Option<Schema> {
    ALL.iter().copied().find(|s| s.name == name && s.version == version)
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    I(u64),
    F(f64),
    Na,
    T(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::I(v) => v.to_string(),
            Cell::F(v) => v.to_string(),
            Cell::Na => "NA".to_string(),
            Cell::T(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::T(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::T(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Na, Cell::F)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format: String,
    version: u32,
    tool_version: String,
    command: String,
    settings: BTreeMap<String, String>,
    files: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    file: String,
    schema: String,
    version: u32,
}

/// Output directory that records every file it writes.
pub struct OutDir {
    path: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            entries: Vec::new(),
        })
    }

    fn record(&mut self, file: &str, schema: Schema) {
        self.entries.push(ManifestEntry {
            file: file.to_string(),
            schema: schema.name.to_string(),
            version: schema.version,
        });
    }

    fn write_bytes(&self, file: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path.join(file);
        std::fs::write(&p, bytes).map_err(|e| CliError::io(p, e))
    }

    pub fn write_csv(&mut self, file: &str, schema: Schema, header: &[String], rows: &[Vec<Cell>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::data(e.to_string()))?;
        self.write_bytes(file, &bytes)?;
        self.record(file, schema);
        Ok(())
    }

    /// Writes a CSV whose header is the schema's fixed column list.
    pub fn write_table(&mut self, file: &str, schema: Schema, rows: &[Vec<Cell>]) -> Result<()> {
        let Layout::Csv(cols) = schema.layout else {
            return Err(CliError::data(format!("schema {} is not a fixed CSV layout", schema.name)));
        };
        let header: Vec<String> = cols.iter().map(|(c, _)| c.to_string()).collect();
        self.write_csv(file, schema, &header, rows)
    }

    pub fn write_mismatch(&mut self, file: &str, report: &MismatchFile) -> Result<()> {
        self.write_bytes(file, render_json(report)?.as_bytes())?;
        self.record(file, MISMATCH);
        Ok(())
    }

    /// Writes `manifest.json`. The output location itself is not recorded.
    pub fn finish(self, command: &str, mut settings: BTreeMap<String, String>) -> Result<PathBuf> {
        settings.remove("out");
        let manifest = Manifest {
            format: MANIFEST_FORMAT.to_string(),
            version: 1,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            settings,
            files: self.entries,
        };
        let p = self.path.join(MANIFEST);
        std::fs::write(&p, render_json(&manifest)?).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }
}

fn render_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Mismatch report as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MismatchFile {
    pub schema: String,
    pub source: String,
    pub n: usize,
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    #[serde(with = "na_float")]
    pub overall: Option<f64>,
    pub coords: Vec<MismatchCoord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MismatchCoord {
    pub coord: usize,
    pub label: String,
    pub v: f64,
    pub v_bb: f64,
    #[serde(with = "na_float")]
    pub index: Option<f64>,
}

pub fn schema_tag(s: Schema) -> String {
    format!("{}/{}", s.name, s.version)
}

mod na_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("NA"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Some(x)),
            Raw::Text(t) if t == "NA" => Ok(None),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"NA\", got \"{t}\""))),
        }
    }
}

fn canonical(col: Col, field: &str) -> std::result::Result<(), String> {
    let ok = match col {
        Col::Text => return Ok(()),
        Col::Int => field.parse::<u64>().is_ok_and(|v| v.to_string() == field),
        Col::Float => field.parse::<f64>().is_ok_and(|v| v.to_string() == field),
        Col::FloatOrNa => field == "NA" || field.parse::<f64>().is_ok_and(|v| v.to_string() == field),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("'{field}' is not a canonical {col:?} value"))
    }
}

fn check_csv(path: &Path, cols: Option<&[(&str, Col)]>) -> std::result::Result<usize, String> {
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes.as_slice());
    let records: Vec<csv::StringRecord> = rdr
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let header = records.first().ok_or("empty file")?;
    let types: Vec<Col> = match cols {
        Some(cols) => {
            let expected: Vec<&str> = cols.iter().map(|(c, _)| *c).collect();
            let got: Vec<&str> = header.iter().collect();
            if got != expected {
                return Err(format!("header {got:?} does not match {expected:?}"));
            }
            cols.iter().map(|(_, t)| *t).collect()
        }
        None => {
            let d = header.len().saturating_sub(1);
            let expected: Vec<String> = (1..=d).map(|j| format!("z{j}")).chain(["y".to_string()]).collect();
            if d == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
                return Err("dataset header must be z1..zD,y".into());
            }
            vec![Col::Float; d + 1]
        }
    };
    for (i, rec) in records.iter().enumerate().skip(1) {
        if rec.len() != types.len() {
            return Err(format!("row {}: {} fields, expected {}", i + 1, rec.len(), types.len()));
        }
        for (field, &t) in rec.iter().zip(&types) {
            canonical(t, field).map_err(|e| format!("row {}: {e}", i + 1))?;
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in &records {
        w.write_record(rec).map_err(|e| e.to_string())?;
    }
    if w.into_inner().map_err(|e| e.to_string())? != bytes {
        return Err("file does not round-trip byte-for-byte".into());
    }
    Ok(records.len() - 1)
}

fn check_mismatch(path: &Path) -> std::result::Result<usize, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let report: MismatchFile = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    if report.schema != schema_tag(MISMATCH) {
        return Err(format!("schema field is '{}'", report.schema));
    }
    if render_json(&report).map_err(|e| e.to_string())? != text {
        return Err("file does not round-trip byte-for-byte".into());
    }
    Ok(report.coords.len())
}

/// Validates every file listed in `dir/manifest.json`. Returns one line per
/// file on success.
pub fn schema_check(dir: &Path) -> Result<Vec<String>> {
    let mpath = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&mpath).map_err(|e| CliError::io(&mpath, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", mpath.display())))?;
    if manifest.format != MANIFEST_FORMAT || manifest.version != 1 {
        return Err(CliError::data(format!(
            "{}: unsupported manifest {} v{}",
            mpath.display(),
            manifest.format,
            manifest.version
        )));
    }
    let mut report = Vec::new();
    let mut problems = Vec::new();
    for entry in &manifest.files {
        let path = dir.join(&entry.file);
        let Some(schema) = lookup(&entry.schema, entry.version) else {
            problems.push(format!("{}: unknown schema {}/{}", entry.file, entry.schema, entry.version));
            continue;
        };
        let result = match schema.layout {
            Layout::Csv(cols) => check_csv(&path, Some(cols)),
            Layout::DatasetCsv => check_csv(&path, None),
            Layout::MismatchJson => check_mismatch(&path),
        };
        match result {
            Ok(n) => report.push(format!("ok {} ({}, {n} records)", entry.file, schema_tag(schema))),
            Err(e) => problems.push(format!("{}: {e}", entry.file)),
        }
    }
    if problems.is_empty() {
        Ok(report)
    } else {
        Err(CliError::data(problems.join("; ")))
    }
}
