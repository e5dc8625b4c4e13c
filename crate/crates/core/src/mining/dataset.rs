//! Commit dataset export/import (CSV and JSON).
//!
//! The CSV layout is a fixed header of record fields followed by one
//! `kw:<keyword>` column per tracked keyword (sorted). Lines starting
//! with `#` are treated as comments on import, so callers may prepend
//! provenance lines without breaking round-trips.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{CommitRecord, MiningError};

/// Serialization format for commit datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

const FIXED_HEADER: [&str; 20] = [
    "id",
    "parent_ids",
    "author_timestamp",
    "message",
    "files_added_gross",
    "files_modified_gross",
    "files_deleted_gross",
    "files_renamed_gross",
    "files_added_net",
    "files_modified_net",
    "files_deleted_net",
    "files_renamed_net",
    "lines_added_gross",
    "lines_deleted_gross",
    "lines_added_net",
    "lines_deleted_net",
    "density",
    "is_merge",
    "is_initial",
    "sojourn_seconds",
];

/// Keyword columns present in a record set (sorted union).
fn keyword_columns(records: &[CommitRecord]) -> Vec<String> {
    let mut keys: Vec<String> = records
        .iter()
        .flat_map(|r| r.keyword_counts.keys().cloned())
        .collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Write records to `path`. Errors on an empty record list.
pub fn export_dataset(
    records: &[CommitRecord],
    path: &Path,
    format: ExportFormat,
) -> Result<(), MiningError> {
    let file = std::fs::File::create(path)?;
    export_dataset_to(records, file, format)
}

/// Same as [`export_dataset`] for any writer.
pub fn export_dataset_to<W: Write>(
    records: &[CommitRecord],
    writer: W,
    format: ExportFormat,
) -> Result<(), MiningError> {
    if records.is_empty() {
        return Err(MiningError::EmptyDataset);
    }
    match format {
        ExportFormat::Json => {
            serde_json::to_writer_pretty(writer, records)?;
            Ok(())
        }
        ExportFormat::Csv => {
            let mut csv_writer = csv::Writer::from_writer(writer);
            let keywords = keyword_columns(records);
            write_csv_records(&mut csv_writer, records, &keywords, &[])?;
            csv_writer.flush()?;
            Ok(())
        }
    }
}

/// Shared CSV row writer; `extra` appends additional columns (used by the
/// labeled-dataset format).
pub(crate) fn write_csv_records<W: Write>(
    writer: &mut csv::Writer<W>,
    records: &[CommitRecord],
    keywords: &[String],
    extra: &[(&str, Vec<String>)],
) -> Result<(), MiningError> {
    let mut header: Vec<String> = FIXED_HEADER.iter().map(|s| s.to_string()).collect();
    header.extend(keywords.iter().map(|k| format!("kw:{k}")));
    header.extend(extra.iter().map(|(name, _)| name.to_string()));
    writer.write_record(&header)?;

    for (i, record) in records.iter().enumerate() {
        let mut row: Vec<String> = vec![
            record.id.clone(),
            record.parent_ids.join(" "),
            record.author_timestamp.to_string(),
            record.message.clone(),
            record.files_added_gross.to_string(),
            record.files_modified_gross.to_string(),
            record.files_deleted_gross.to_string(),
            record.files_renamed_gross.to_string(),
            record.files_added_net.to_string(),
            record.files_modified_net.to_string(),
            record.files_deleted_net.to_string(),
            record.files_renamed_net.to_string(),
            record.lines_added_gross.to_string(),
            record.lines_deleted_gross.to_string(),
            record.lines_added_net.to_string(),
            record.lines_deleted_net.to_string(),
            record.density.to_string(),
            record.is_merge.to_string(),
            record.is_initial.to_string(),
            record
                .sojourn_seconds
                .map(|s| s.to_string())
                .unwrap_or_default(),
        ];
        for keyword in keywords {
            row.push(record.keyword_count(keyword).to_string());
        }
        for (_, values) in extra {
            row.push(values[i].clone());
        }
        writer.write_record(&row)?;
    }
    Ok(())
}

/// Read a dataset back; the format is detected from the first byte.
pub fn import_dataset(path: &Path) -> Result<Vec<CommitRecord>, MiningError> {
    let bytes = std::fs::read(path)?;
    import_dataset_from(&bytes[..])
}

pub fn import_dataset_from<R: Read>(mut reader: R) -> Result<Vec<CommitRecord>, MiningError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let first = bytes
        .iter()
        .find(|b| !b.is_ascii_whitespace())
        .copied()
        .unwrap_or(b'[');
    if first == b'[' {
        Ok(serde_json::from_slice(&bytes)?)
    } else {
        Ok(read_csv_records(&bytes[..])?.0)
    }
}

/// Parse CSV rows; returns records plus any extra (non-schema) columns.
pub(crate) fn read_csv_records(
    bytes: &[u8],
) -> Result<(Vec<CommitRecord>, BTreeMap<String, Vec<String>>), MiningError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(bytes);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.to_string())
        .collect();
    for (i, expected) in FIXED_HEADER.iter().enumerate() {
        if header.get(i).map(String::as_str) != Some(*expected) {
            return Err(MiningError::MalformedDataset(format!(
                "expected column {i} to be {expected}, found {:?}",
                header.get(i)
            )));
        }
    }
    let keyword_cols: Vec<(usize, String)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, name)| {
            name.strip_prefix("kw:")
                .map(|keyword| (i, keyword.to_string()))
        })
        .collect();
    let extra_cols: Vec<(usize, String)> = header
        .iter()
        .enumerate()
        .skip(FIXED_HEADER.len())
        .filter(|(_, name)| !name.starts_with("kw:"))
        .map(|(i, name)| (i, name.clone()))
        .collect();

    let parse_u64 = |field: &str, name: &str| -> Result<u64, MiningError> {
        field
            .parse()
            .map_err(|_| MiningError::MalformedDataset(format!("bad {name}: {field:?}")))
    };

    let mut records = Vec::new();
    let mut extras: BTreeMap<String, Vec<String>> = extra_cols
        .iter()
        .map(|(_, name)| (name.clone(), Vec::new()))
        .collect();
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let mut keyword_counts = BTreeMap::new();
        for (i, keyword) in &keyword_cols {
            keyword_counts.insert(keyword.clone(), parse_u64(field(*i), keyword)?);
        }
        let record = CommitRecord {
            id: field(0).to_string(),
            parent_ids: field(1)
                .split_whitespace()
                .map(str::to_string)
                .collect(),
            author_timestamp: field(2).parse().map_err(|_| {
                MiningError::MalformedDataset(format!("bad author_timestamp: {:?}", field(2)))
            })?,
            message: field(3).to_string(),
            files_added_gross: parse_u64(field(4), "files_added_gross")?,
            files_modified_gross: parse_u64(field(5), "files_modified_gross")?,
            files_deleted_gross: parse_u64(field(6), "files_deleted_gross")?,
            files_renamed_gross: parse_u64(field(7), "files_renamed_gross")?,
            files_added_net: parse_u64(field(8), "files_added_net")?,
            files_modified_net: parse_u64(field(9), "files_modified_net")?,
            files_deleted_net: parse_u64(field(10), "files_deleted_net")?,
            files_renamed_net: parse_u64(field(11), "files_renamed_net")?,
            lines_added_gross: parse_u64(field(12), "lines_added_gross")?,
            lines_deleted_gross: parse_u64(field(13), "lines_deleted_gross")?,
            lines_added_net: parse_u64(field(14), "lines_added_net")?,
            lines_deleted_net: parse_u64(field(15), "lines_deleted_net")?,
            density: field(16).parse().map_err(|_| {
                MiningError::MalformedDataset(format!("bad density: {:?}", field(16)))
            })?,
            is_merge: field(17) == "true",
            is_initial: field(18) == "true",
            sojourn_seconds: if field(19).is_empty() {
                None
            } else {
                Some(parse_u64(field(19), "sojourn_seconds")?)
            },
            keyword_counts,
        };
        for (i, name) in &extra_cols {
            extras.get_mut(name).unwrap().push(field(*i).to_string());
        }
        records.push(record);
    }
    Ok((records, extras))
}
