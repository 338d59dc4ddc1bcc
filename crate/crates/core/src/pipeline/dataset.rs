use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One labeled text item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub text: String,
    pub label: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Jsonl,
    Csv,
}

impl DatasetFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") | Some("json") => Ok(Self::Jsonl),
            Some("csv") => Ok(Self::Csv),
            _ => Err(Error::Config(format!(
                "cannot infer dataset format of {}; pass --format jsonl|csv",
                path.display()
            ))),
        }
    }
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Config(format!("unknown dataset format {other:?}"))),
        }
    }
}

impl std::fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Jsonl => "jsonl",
            Self::Csv => "csv",
        })
    }
}

#[derive(Deserialize)]
struct JsonRow {
    #[serde(default)]
    id: Option<String>,
    text: String,
    label: u32,
}

/// Reads a dataset. Records keep file order; rows without an id get their
/// zero-based row index.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<DatasetRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let rows = match format {
        DatasetFormat::Jsonl => read_jsonl(BufReader::new(file), path)?,
        DatasetFormat::Csv => read_csv(file)?,
    };
    assign_ids(rows)
}

type Row = (usize, Option<String>, String, u32);

fn read_jsonl(reader: impl BufRead, path: &Path) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(&line).map_err(|e| Error::parse(Some(i + 1), e.to_string()))?;
        rows.push((i + 1, row.id, row.text, row.label));
    }
    Ok(rows)
}

fn read_csv(reader: impl std::io::Read) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(Some(1), e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = col("id");
    let text_col = col("text").ok_or_else(|| Error::parse(Some(1), "CSV header lacks a `text` column"))?;
    let label_col = col("label").ok_or_else(|| Error::parse(Some(1), "CSV header lacks a `label` column"))?;

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |c: usize| {
            rec.get(c)
                .ok_or_else(|| Error::parse(Some(line), format!("missing column {c}")))
        };
        let text = field(text_col)?.to_string();
        let raw_label = field(label_col)?.trim();
        let label: u32 = raw_label
            .parse()
            .map_err(|_| Error::parse(Some(line), format!("label {raw_label:?} is not a non-negative integer")))?;
        let id = match id_col {
            Some(c) => Some(field(c)?.to_string()).filter(|s| !s.is_empty()),
            None => None,
        };
        rows.push((line, id, text, label));
    }
    Ok(rows)
}

fn assign_ids(rows: Vec<Row>) -> Result<Vec<DatasetRecord>> {
    let mut seen = HashSet::with_capacity(rows.len());
    let mut out = Vec::with_capacity(rows.len());
    for (index, (line, id, text, label)) in rows.into_iter().enumerate() {
        let id = id.unwrap_or_else(|| index.to_string());
        if !seen.insert(id.clone()) {
            return Err(Error::parse(Some(line), format!("duplicate record id {id:?}")));
        }
        out.push(DatasetRecord { id, text, label });
    }
    Ok(out)
}

pub fn write_dataset_jsonl(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    super::write_atomic(path, &buf)
}

/// Record ids grouped by label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPartition {
    pub groups: BTreeMap<u32, Vec<String>>,
}

impl ClassPartition {
    pub fn from_records(records: &[DatasetRecord]) -> Self {
        let mut groups: BTreeMap<u32, Vec<String>> = BTreeMap::new();
        for r in records {
            groups.entry(r.label).or_default().push(r.id.clone());
        }
        Self { groups }
    }

    pub fn labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.groups.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}
