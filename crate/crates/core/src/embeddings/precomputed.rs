use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_vector, EmbeddingConfig, EmbeddingVector};
use crate::error::{Error, Result};
use crate::pipeline::DatasetRecord;

/// One line of an embedding file: `{"id": "...", "vector": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEntry {
    pub id: String,
    pub vector: Vec<f64>,
}

pub fn read_embedding_file(path: &Path) -> Result<Vec<EmbeddingEntry>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: EmbeddingEntry = serde_json::from_str(&line)
            .map_err(|e| Error::parse(Some(i + 1), format!("{}: {e}", path.display())))?;
        out.push(entry);
    }
    Ok(out)
}

pub fn write_embedding_file(path: &Path, entries: &[EmbeddingEntry]) -> Result<()> {
    let mut buf = Vec::new();
    for e in entries {
        serde_json::to_writer(&mut buf, e)?;
        buf.push(b'\n');
    }
    crate::pipeline::write_atomic(path, &buf)
}

pub fn embed_precomputed(config: &EmbeddingConfig, records: &[DatasetRecord]) -> Result<Vec<EmbeddingVector>> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let path = config
        .precomputed_path
        .as_deref()
        .ok_or_else(|| Error::Config("precomputed embedder needs an embedding file path".into()))?;
    let entries = read_embedding_file(path)?;
    lookup(entries, config.dim, records)
}

fn lookup(entries: Vec<EmbeddingEntry>, dim: usize, records: &[DatasetRecord]) -> Result<Vec<EmbeddingVector>> {
    let mut table: HashMap<String, Vec<f64>> = HashMap::with_capacity(entries.len());
    for e in entries {
        check_vector(&e.vector, dim, &format!("embedding for id {:?}", e.id))?;
        table.insert(e.id, e.vector);
    }
    let missing: Vec<&str> = records
        .iter()
        .filter(|r| !table.contains_key(&r.id))
        .map(|r| r.id.as_str())
        .collect();
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(10).copied().collect();
        return Err(Error::Data(format!(
            "{} record id(s) have no precomputed embedding: {}",
            missing.len(),
            shown.join(", ")
        )));
    }
    Ok(records.iter().map(|r| table[&r.id].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn rec(id: &str) -> DatasetRecord {
        DatasetRecord {
            id: id.into(),
            text: String::new(),
            label: 0,
        }
    }

    fn entry(id: &str, v: &[f64]) -> EmbeddingEntry {
        EmbeddingEntry {
            id: id.into(),
            vector: v.to_vec(),
        }
    }

    #[test]
    fn reorders_to_record_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.jsonl");
        write_embedding_file(&path, &[entry("a", &[1., 0.]), entry("b", &[0., 1.])]).unwrap();
        let cfg = EmbeddingConfig::precomputed(&path, 2);
        let out = embed_precomputed(&cfg, &[rec("b"), rec("a")]).unwrap();
        assert_eq!(out, vec![vec![0., 1.], vec![1., 0.]]);
    }

    #[test]
    fn no_records_no_vectors() {
        let cfg = EmbeddingConfig::precomputed("/nonexistent.jsonl", 2);
        assert!(embed_precomputed(&cfg, &[]).unwrap().is_empty());
    }

    #[test]
    fn dim_mismatch_reports_expected_and_actual() {
        let err = lookup(vec![entry("a", &[1., 2., 3.])], 384, &[rec("a")]).unwrap_err();
        match err {
            Error::Shape { expected, actual, .. } => assert_eq!((expected, actual), (384, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_ids_listed_up_to_ten() {
        let records: Vec<_> = (0..15).map(|i| rec(&format!("m{i}"))).collect();
        let err = lookup(vec![], 2, &records).unwrap_err().to_string();
        assert!(err.contains("15 record id(s)"));
        assert!(err.contains("m9"));
        assert!(!err.contains("m10"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.jsonl");
        std::fs::write(&path, "{\"id\":\"a\",\"vector\":[1,2]}\nnot json\n").unwrap();
        match read_embedding_file(&path) {
            Err(Error::Parse { line: Some(2), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_is_readable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.jsonl");
        let entries = vec![entry("x", &[0.25, -1.5])];
        write_embedding_file(&path, &entries).unwrap();
        let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
        writeln!(f).unwrap();
        assert_eq!(read_embedding_file(&path).unwrap(), entries);
    }
}
