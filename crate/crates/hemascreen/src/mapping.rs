//! Column mapping between canonical field names and source CSV headers.
//!
//! On disk the mapping is a flat JSON object: every canonical name maps to the
//! header string it is read from, next to a few value conventions.
//!
//! ```json
//! {
//!   "patient_id": "Patient ID",
//!   "label": "SARS-Cov-2 exam result",
//!   "label_positive_value": "positive",
//!   "admitted_regular_ward": "Patient addmited to regular ward (1=yes, 0=no)",
//!   "hematocrit": "Hematocrit"
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use hemascreen_core::dataset::Pathogen;
use hemascreen_core::Feature;
use serde_json::Value;

use crate::error::IngestError;

pub const PATIENT_ID: &str = "patient_id";
pub const AGE_QUANTILE: &str = "age_quantile";
pub const LABEL: &str = "label";
pub const REGULAR_WARD: &str = "admitted_regular_ward";
pub const SEMI_INTENSIVE: &str = "admitted_semi_intensive";
pub const ICU: &str = "admitted_icu";
pub const NEUTROPHILS: &str = "neutrophils";

/// Fields that must be mapped.
pub fn required_fields() -> Vec<&'static str> {
    let mut v = vec![PATIENT_ID, LABEL, REGULAR_WARD, SEMI_INTENSIVE, ICU];
    v.extend(Feature::ALL.iter().map(|f| f.name()));
    v
}

fn optional_fields() -> Vec<&'static str> {
    let mut v = vec![AGE_QUANTILE, NEUTROPHILS];
    v.extend(Pathogen::ALL.iter().map(|p| p.name()));
    v
}

/// How cell values are read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueConventions {
    pub label_positive: String,
    /// When unset, any other non-empty label is negative.
    pub label_negative: Option<String>,
    pub admission_true: String,
    pub admission_false: String,
    pub pathogen_positive: String,
    pub pathogen_negative: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    /// Canonical name to source header.
    pub headers: BTreeMap<String, String>,
    pub values: ValueConventions,
}

const VALUE_KEYS: [&str; 6] = [
    "label_positive_value",
    "label_negative_value",
    "admission_true_value",
    "admission_false_value",
    "pathogen_positive_value",
    "pathogen_negative_value",
];

impl ColumnMapping {
    /// Headers of the public hospital dataset snapshot.
    pub fn einstein_default() -> Self {
        let mut headers = BTreeMap::new();
        let mut put = |k: &str, v: &str| {
            headers.insert(k.to_string(), v.to_string());
        };
        put(PATIENT_ID, "Patient ID");
        put(AGE_QUANTILE, "Patient age quantile");
        put(LABEL, "SARS-Cov-2 exam result");
        put(REGULAR_WARD, "Patient addmited to regular ward (1=yes, 0=no)");
        put(SEMI_INTENSIVE, "Patient addmited to semi-intensive unit (1=yes, 0=no)");
        put(ICU, "Patient addmited to intensive care unit (1=yes, 0=no)");
        put("hematocrit", "Hematocrit");
        put("hemoglobin", "Hemoglobin");
        put("platelets", "Platelets");
        put("mpv", "Mean platelet volume");
        put("rbc", "Red blood Cells");
        put("lymphocytes", "Lymphocytes");
        put("mchc", "Mean corpuscular hemoglobin concentration (MCHC)");
        put("leukocytes", "Leukocytes");
        put("basophils", "Basophils");
        put("mch", "Mean corpuscular hemoglobin (MCH)");
        put("eosinophils", "Eosinophils");
        put("mcv", "Mean corpuscular volume (MCV)");
        put("monocytes", "Monocytes");
        put("rbcdw", "Red blood cell distribution width (RDW)");
        put(NEUTROPHILS, "Neutrophils");
        put("adenovirus", "Adenovirus");
        put("bordetella_pertussis", "Bordetella pertussis");
        put("chlamydophila_pneumoniae", "Chlamydophila pneumoniae");
        put("coronavirus_229e", "Coronavirus229E");
        put("coronavirus_hku1", "Coronavirus HKU1");
        put("coronavirus_nl63", "CoronavirusNL63");
        put("coronavirus_oc43", "CoronavirusOC43");
        put("influenza_a_h1n1_2009", "Inf A H1N1 2009");
        put("influenza_a", "Influenza A");
        put("influenza_b", "Influenza B");
        put("metapneumovirus", "Metapneumovirus");
        put("parainfluenza_1", "Parainfluenza 1");
        put("parainfluenza_2", "Parainfluenza 2");
        put("parainfluenza_3", "Parainfluenza 3");
        put("parainfluenza_4", "Parainfluenza 4");
        put("respiratory_syncytial_virus", "Respiratory Syncytial Virus");
        put("rhinovirus_enterovirus", "Rhinovirus/Enterovirus");
        ColumnMapping {
            headers,
            values: ValueConventions {
                label_positive: "positive".into(),
                label_negative: Some("negative".into()),
                admission_true: "1".into(),
                admission_false: "0".into(),
                pathogen_positive: "detected".into(),
                pathogen_negative: "not_detected".into(),
            },
        }
    }

    /// Identity mapping used for the re-serialized cohort files.
    pub fn canonical() -> Self {
        let headers = required_fields().into_iter().chain(optional_fields()).map(|k| (k.to_string(), k.to_string())).collect();
        ColumnMapping {
            headers,
            values: ValueConventions {
                label_positive: "positive".into(),
                label_negative: Some("negative".into()),
                admission_true: "1".into(),
                admission_false: "0".into(),
                pathogen_positive: "positive".into(),
                pathogen_negative: "negative".into(),
            },
        }
    }

    /// Parses the JSON form. Unknown keys, non-string values, missing required
    /// names and two names sharing one header are all rejected.
    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let bad = |m: String| IngestError::MappingValue(m);
        let obj: BTreeMap<String, Value> = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let known: Vec<&str> = required_fields().into_iter().chain(optional_fields()).collect();
        let mut headers = BTreeMap::new();
        let mut values = BTreeMap::new();
        for (k, v) in obj {
            let Value::String(s) = v else { return Err(bad(format!("value of {k:?} must be a string"))) };
            if VALUE_KEYS.contains(&k.as_str()) {
                values.insert(k, s);
            } else if known.contains(&k.as_str()) {
                headers.insert(k, s);
            } else {
                return Err(bad(format!("unknown key {k:?}")));
            }
        }
        let missing: Vec<&str> = required_fields().into_iter().filter(|k| !headers.contains_key(*k)).collect();
        if !missing.is_empty() {
            return Err(bad(format!("missing required name(s): {}", missing.join(", "))));
        }
        let mut owners: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, h) in &headers {
            if let Some(prev) = owners.insert(h.trim(), k) {
                return Err(bad(format!("{prev:?} and {k:?} both map to header {h:?}")));
            }
        }
        let mut take = |k: &str, default: Option<&str>| values.remove(k).or(default.map(String::from));
        let label_positive =
            take("label_positive_value", None).ok_or_else(|| bad("missing \"label_positive_value\"".into()))?;
        Ok(ColumnMapping {
            headers,
            values: ValueConventions {
                label_positive,
                label_negative: take("label_negative_value", None),
                admission_true: take("admission_true_value", Some("1")).expect("default"),
                admission_false: take("admission_false_value", Some("0")).expect("default"),
                pathogen_positive: take("pathogen_positive_value", Some("detected")).expect("default"),
                pathogen_negative: take("pathogen_negative_value", Some("not_detected")).expect("default"),
            },
        })
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text).map_err(|e| IngestError::Mapping { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn to_json(&self) -> String {
        let mut obj: BTreeMap<&str, &str> = self.headers.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let v = &self.values;
        obj.insert("label_positive_value", &v.label_positive);
        if let Some(n) = &v.label_negative {
            obj.insert("label_negative_value", n);
        }
        obj.insert("admission_true_value", &v.admission_true);
        obj.insert("admission_false_value", &v.admission_false);
        obj.insert("pathogen_positive_value", &v.pathogen_positive);
        obj.insert("pathogen_negative_value", &v.pathogen_negative);
        serde_json::to_string_pretty(&obj).expect("string map")
    }

    pub fn header(&self, field: &str) -> Option<&str> {
        self.headers.get(field).map(String::as_str)
    }
}
