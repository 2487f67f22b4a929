//! CSV parsing into validated records, and the canonical re-serialization.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use hemascreen_core::dataset::{FeatureVector, Pathogen, PathogenPanel, PathogenStatus};
use hemascreen_core::{BloodCountRecord, Feature, Label, Location, FEATURE_COUNT};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::IngestError;
use crate::mapping::{self, ColumnMapping};

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDataset {
    pub records: Vec<BloodCountRecord>,
    pub rows_read: usize,
    /// Rows with at least one blank modeling feature.
    pub excluded_incomplete: usize,
    /// `sha256:<hex>` of the raw input bytes.
    pub digest: String,
}

/// Counts written to `ingest_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub schema: &'static str,
    pub source_digest: String,
    pub rows_read: usize,
    pub kept: usize,
    pub excluded: BTreeMap<&'static str, usize>,
    pub per_location: BTreeMap<&'static str, LocationCount>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct LocationCount {
    pub records: usize,
    pub positive: usize,
    pub negative: usize,
}

pub const INGEST_REPORT_SCHEMA: &str = "hemascreen.ingest-report/1";

impl ParsedDataset {
    pub fn report(&self) -> IngestReport {
        let mut per_location: BTreeMap<&'static str, LocationCount> =
            Location::ALL.iter().map(|l| (l.name(), LocationCount::default())).collect();
        for r in &self.records {
            let c = per_location.get_mut(r.location.name()).expect("all locations present");
            c.records += 1;
            if r.is_positive() {
                c.positive += 1;
            } else {
                c.negative += 1;
            }
        }
        IngestReport {
            schema: INGEST_REPORT_SCHEMA,
            source_digest: self.digest.clone(),
            rows_read: self.rows_read,
            kept: self.records.len(),
            excluded: BTreeMap::from([("incomplete_features", self.excluded_incomplete)]),
            per_location,
        }
    }
}

pub fn sha256_digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Header positions of every mapped field.
struct Columns {
    patient_id: usize,
    label: usize,
    flags: [usize; 3],
    features: [usize; FEATURE_COUNT],
    age: Option<usize>,
    neutrophils: Option<usize>,
    pathogens: Vec<(Pathogen, usize)>,
}

impl Columns {
    fn resolve(header: &csv::StringRecord, mapping: &ColumnMapping) -> Result<Self, IngestError> {
        let position: BTreeMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h.trim(), i)).collect();
        let mut missing = Vec::new();
        let mut find = |field: &str, required: bool| -> Option<usize> {
            let h = mapping.header(field)?;
            let found = position.get(h.trim()).copied();
            if found.is_none() && required {
                missing.push(h.to_string());
            }
            found
        };
        let patient_id = find(mapping::PATIENT_ID, true);
        let label = find(mapping::LABEL, true);
        let flags = [mapping::REGULAR_WARD, mapping::SEMI_INTENSIVE, mapping::ICU].map(|f| find(f, true));
        let features = Feature::ALL.map(|f| find(f.name(), true));
        // optional columns only need to exist when mapped
        let age = mapping.header(mapping::AGE_QUANTILE).and_then(|_| find(mapping::AGE_QUANTILE, true));
        let neutrophils = mapping.header(mapping::NEUTROPHILS).and_then(|_| find(mapping::NEUTROPHILS, true));
        let pathogens: Vec<(Pathogen, usize)> = Pathogen::ALL
            .iter()
            .filter(|p| mapping.header(p.name()).is_some())
            .filter_map(|&p| find(p.name(), true).map(|i| (p, i)))
            .collect();
        if !missing.is_empty() {
            return Err(IngestError::MalformedHeader { missing });
        }
        Ok(Columns {
            patient_id: patient_id.expect("checked"),
            label: label.expect("checked"),
            flags: flags.map(|f| f.expect("checked")),
            features: features.map(|f| f.expect("checked")),
            age,
            neutrophils,
            pathogens,
        })
    }
}

fn cell<'a>(row: &'a csv::StringRecord, i: usize) -> &'a str {
    row.get(i).unwrap_or("").trim()
}

fn parse_number(row: usize, column: &str, value: &str) -> Result<f64, IngestError> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IngestError::MalformedRow { row, column: column.to_string(), value: value.to_string() }),
    }
}

/// Parses a CSV stream into records, keeping only rows where all fourteen
/// modeling features are present.
pub fn parse_dataset<R: Read>(mut input: R, mapping: &ColumnMapping) -> Result<ParsedDataset, IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| IngestError::Csv(e.into()))?;
    let digest = sha256_digest(&bytes);

    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(bytes.as_slice());
    let header = reader.headers()?.clone();
    let cols = Columns::resolve(&header, mapping)?;
    let v = &mapping.values;

    let mut records = Vec::new();
    let mut rows_read = 0;
    let mut excluded_incomplete = 0;
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let n = i + 1;
        rows_read += 1;
        if cols.features.iter().any(|&c| cell(&row, c).is_empty()) {
            excluded_incomplete += 1;
            continue;
        }
        let malformed = |field: &str, value: &str| IngestError::MalformedRow {
            row: n,
            column: mapping.header(field).unwrap_or(field).to_string(),
            value: value.to_string(),
        };

        let mut features = FeatureVector([0.0; FEATURE_COUNT]);
        for (f, &c) in Feature::ALL.iter().zip(&cols.features) {
            features.set(*f, parse_number(n, mapping.header(f.name()).unwrap_or(f.name()), cell(&row, c))?);
        }

        let patient_id = cell(&row, cols.patient_id);
        if patient_id.is_empty() {
            return Err(malformed(mapping::PATIENT_ID, patient_id));
        }

        let raw_label = cell(&row, cols.label);
        let label = if raw_label == v.label_positive {
            Label::Positive
        } else if v.label_negative.as_deref().map_or(!raw_label.is_empty(), |neg| raw_label == neg) {
            Label::Negative
        } else {
            return Err(malformed(mapping::LABEL, raw_label));
        };

        let names = [mapping::REGULAR_WARD, mapping::SEMI_INTENSIVE, mapping::ICU];
        let mut set = [false; 3];
        for k in 0..3 {
            let raw = cell(&row, cols.flags[k]);
            set[k] = if raw == v.admission_true {
                true
            } else if raw == v.admission_false {
                false
            } else {
                return Err(malformed(names[k], raw));
            };
        }
        let location = match set {
            [false, false, false] => Location::Community,
            [true, false, false] => Location::RegularWard,
            [false, true, false] => Location::SemiIntensive,
            [false, false, true] => Location::Icu,
            _ => return Err(IngestError::ConflictingAdmission { row: n }),
        };

        let age_quantile = match cols.age.map(|c| cell(&row, c)).filter(|s| !s.is_empty()) {
            None => None,
            Some(s) => Some(s.parse::<i64>().map_err(|_| malformed(mapping::AGE_QUANTILE, s))?),
        };
        let neutrophils = match cols.neutrophils.map(|c| cell(&row, c)).filter(|s| !s.is_empty()) {
            None => None,
            Some(s) => Some(parse_number(n, mapping.header(mapping::NEUTROPHILS).unwrap_or("neutrophils"), s)?),
        };

        let pathogen_panel = if cols.pathogens.iter().all(|&(_, c)| cell(&row, c).is_empty()) {
            None
        } else {
            let mut panel = PathogenPanel::default();
            for &(p, c) in &cols.pathogens {
                let raw = cell(&row, c);
                let status = if raw == v.pathogen_positive {
                    PathogenStatus::Positive
                } else if raw == v.pathogen_negative {
                    PathogenStatus::Negative
                } else {
                    PathogenStatus::NotTested
                };
                panel.set(p, status);
            }
            Some(panel)
        };

        records.push(BloodCountRecord {
            patient_id: patient_id.to_string(),
            age_quantile,
            location,
            label,
            features,
            neutrophils,
            pathogen_panel,
        });
    }
    Ok(ParsedDataset { records, rows_read, excluded_incomplete, digest })
}

/// Writes records with canonical headers; [`ColumnMapping::canonical`] reads them back.
pub fn write_records<W: Write>(out: W, records: &[BloodCountRecord]) -> Result<(), csv::Error> {
    let canonical = ColumnMapping::canonical();
    let v = &canonical.values;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = vec![
        mapping::PATIENT_ID,
        mapping::AGE_QUANTILE,
        mapping::LABEL,
        mapping::REGULAR_WARD,
        mapping::SEMI_INTENSIVE,
        mapping::ICU,
    ];
    header.extend(Feature::ALL.iter().map(|f| f.name()));
    header.push(mapping::NEUTROPHILS);
    header.extend(Pathogen::ALL.iter().map(|p| p.name()));
    w.write_record(&header)?;

    for r in records {
        let flag = |l: Location| if r.location == l { v.admission_true.clone() } else { v.admission_false.clone() };
        let mut row: Vec<String> = vec![
            r.patient_id.clone(),
            r.age_quantile.map(|a| a.to_string()).unwrap_or_default(),
            if r.is_positive() { v.label_positive.clone() } else { v.label_negative.clone().expect("canonical") },
            flag(Location::RegularWard),
            flag(Location::SemiIntensive),
            flag(Location::Icu),
        ];
        row.extend(r.features.as_slice().iter().map(|x| x.to_string()));
        row.push(r.neutrophils.map(|x| x.to_string()).unwrap_or_default());
        for p in Pathogen::ALL {
            row.push(match r.pathogen_panel.map(|panel| panel.get(p)) {
                None => String::new(),
                Some(PathogenStatus::Positive) => v.pathogen_positive.clone(),
                Some(PathogenStatus::Negative) => v.pathogen_negative.clone(),
                Some(PathogenStatus::NotTested) => "not_tested".into(),
            });
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Canonical mapping when the header carries the canonical id and label
/// columns, otherwise the public dataset's headers.
pub fn detect_mapping(bytes: &[u8]) -> ColumnMapping {
    let first = bytes.split(|&b| b == b'\n').next().unwrap_or(&[]);
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(first);
    let names: Vec<String> = match reader.records().next() {
        Some(Ok(r)) => r.iter().map(|s| s.trim().to_string()).collect(),
        _ => Vec::new(),
    };
    let has = |n: &str| names.iter().any(|h| h == n);
    if has(mapping::PATIENT_ID) && has(mapping::LABEL) {
        ColumnMapping::canonical()
    } else {
        ColumnMapping::einstein_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        let m = ColumnMapping::canonical();
        let mut cols: Vec<String> = m.headers.values().cloned().collect();
        cols.sort();
        cols.join(",")
    }

    #[test]
    fn header_only_file_is_empty() {
        let parsed = parse_dataset(format!("{}\n", header()).as_bytes(), &ColumnMapping::canonical()).unwrap();
        assert!(parsed.records.is_empty());
        assert_eq!(parsed.excluded_incomplete, 0);
        assert!(parsed.digest.starts_with("sha256:"));
    }

    #[test]
    fn missing_header_is_named() {
        let err = parse_dataset("patient_id,label\n".as_bytes(), &ColumnMapping::canonical()).unwrap_err();
        match err {
            IngestError::MalformedHeader { missing } => assert!(missing.contains(&"eosinophils".to_string())),
            e => panic!("{e}"),
        }
    }
}
