//! Blood-count records, cohort selection and cohort tabulations.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::Matrix;

pub const FEATURE_COUNT: usize = 14;
pub const PATHOGEN_COUNT: usize = 17;

/// The fourteen modeled blood-count parameters, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Hematocrit,
    Hemoglobin,
    Platelets,
    Mpv,
    Rbc,
    Lymphocytes,
    Mchc,
    Leukocytes,
    Basophils,
    Mch,
    Eosinophils,
    Mcv,
    Monocytes,
    Rbcdw,
}

impl Feature {
    pub const ALL: [Feature; FEATURE_COUNT] = [
        Feature::Hematocrit,
        Feature::Hemoglobin,
        Feature::Platelets,
        Feature::Mpv,
        Feature::Rbc,
        Feature::Lymphocytes,
        Feature::Mchc,
        Feature::Leukocytes,
        Feature::Basophils,
        Feature::Mch,
        Feature::Eosinophils,
        Feature::Mcv,
        Feature::Monocytes,
        Feature::Rbcdw,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Hematocrit => "hematocrit",
            Feature::Hemoglobin => "hemoglobin",
            Feature::Platelets => "platelets",
            Feature::Mpv => "mpv",
            Feature::Rbc => "rbc",
            Feature::Lymphocytes => "lymphocytes",
            Feature::Mchc => "mchc",
            Feature::Leukocytes => "leukocytes",
            Feature::Basophils => "basophils",
            Feature::Mch => "mch",
            Feature::Eosinophils => "eosinophils",
            Feature::Mcv => "mcv",
            Feature::Monocytes => "monocytes",
            Feature::Rbcdw => "rbcdw",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// Where the patient was when sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Location {
    Community,
    RegularWard,
    SemiIntensive,
    Icu,
}

impl Location {
    pub const ALL: [Location; 4] =
        [Location::Community, Location::RegularWard, Location::SemiIntensive, Location::Icu];

    pub fn name(self) -> &'static str {
        match self {
            Location::Community => "community",
            Location::RegularWard => "regular-ward",
            Location::SemiIntensive => "semi-intensive",
            Location::Icu => "icu",
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Location {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Location::ALL
            .iter()
            .copied()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// rt-PCR SARS-CoV-2 result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    #[inline]
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Negative => "negative",
            Label::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pathogen {
    Adenovirus,
    BordetellaPertussis,
    ChlamydophilaPneumoniae,
    Coronavirus229e,
    CoronavirusHku1,
    CoronavirusNl63,
    CoronavirusOc43,
    InfluenzaAH1n1_2009,
    InfluenzaA,
    InfluenzaB,
    Metapneumovirus,
    Parainfluenza1,
    Parainfluenza2,
    Parainfluenza3,
    Parainfluenza4,
    RespiratorySyncytialVirus,
    RhinovirusEnterovirus,
}

impl Pathogen {
    pub const ALL: [Pathogen; PATHOGEN_COUNT] = [
        Pathogen::Adenovirus,
        Pathogen::BordetellaPertussis,
        Pathogen::ChlamydophilaPneumoniae,
        Pathogen::Coronavirus229e,
        Pathogen::CoronavirusHku1,
        Pathogen::CoronavirusNl63,
        Pathogen::CoronavirusOc43,
        Pathogen::InfluenzaAH1n1_2009,
        Pathogen::InfluenzaA,
        Pathogen::InfluenzaB,
        Pathogen::Metapneumovirus,
        Pathogen::Parainfluenza1,
        Pathogen::Parainfluenza2,
        Pathogen::Parainfluenza3,
        Pathogen::Parainfluenza4,
        Pathogen::RespiratorySyncytialVirus,
        Pathogen::RhinovirusEnterovirus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pathogen::Adenovirus => "adenovirus",
            Pathogen::BordetellaPertussis => "bordetella_pertussis",
            Pathogen::ChlamydophilaPneumoniae => "chlamydophila_pneumoniae",
            Pathogen::Coronavirus229e => "coronavirus_229e",
            Pathogen::CoronavirusHku1 => "coronavirus_hku1",
            Pathogen::CoronavirusNl63 => "coronavirus_nl63",
            Pathogen::CoronavirusOc43 => "coronavirus_oc43",
            Pathogen::InfluenzaAH1n1_2009 => "influenza_a_h1n1_2009",
            Pathogen::InfluenzaA => "influenza_a",
            Pathogen::InfluenzaB => "influenza_b",
            Pathogen::Metapneumovirus => "metapneumovirus",
            Pathogen::Parainfluenza1 => "parainfluenza_1",
            Pathogen::Parainfluenza2 => "parainfluenza_2",
            Pathogen::Parainfluenza3 => "parainfluenza_3",
            Pathogen::Parainfluenza4 => "parainfluenza_4",
            Pathogen::RespiratorySyncytialVirus => "respiratory_syncytial_virus",
            Pathogen::RhinovirusEnterovirus => "rhinovirus_enterovirus",
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Pathogen {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pathogen::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PathogenStatus {
    Positive,
    Negative,
    #[default]
    NotTested,
}

/// Results of the respiratory pathogen panel, indexed by [`Pathogen`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct PathogenPanel(pub [PathogenStatus; PATHOGEN_COUNT]);

impl PathogenPanel {
    pub fn get(&self, p: Pathogen) -> PathogenStatus {
        self.0[p.index()]
    }

    pub fn set(&mut self, p: Pathogen, status: PathogenStatus) {
        self.0[p.index()] = status;
    }

    pub fn any_tested(&self) -> bool {
        self.0.iter().any(|s| *s != PathogenStatus::NotTested)
    }

    pub fn any_positive(&self) -> bool {
        self.0.contains(&PathogenStatus::Positive)
    }
}

/// Standardized values of the fourteen modeled features, indexed by [`Feature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    #[inline]
    pub fn get(&self, f: Feature) -> f64 {
        self.0[f.index()]
    }

    #[inline]
    pub fn set(&mut self, f: Feature, v: f64) {
        self.0[f.index()] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Named access to feature values, so models can read inputs in their own manifest order.
pub trait FeatureSource {
    fn feature(&self, f: Feature) -> Option<f64>;
}

impl FeatureSource for FeatureVector {
    fn feature(&self, f: Feature) -> Option<f64> {
        Some(self.get(f))
    }
}

impl FeatureSource for BloodCountRecord {
    fn feature(&self, f: Feature) -> Option<f64> {
        Some(self.features.get(f))
    }
}

impl FeatureSource for [(Feature, f64)] {
    fn feature(&self, f: Feature) -> Option<f64> {
        self.iter().find(|(g, _)| *g == f).map(|(_, v)| *v)
    }
}

impl FeatureSource for alloc::collections::BTreeMap<Feature, f64> {
    fn feature(&self, f: Feature) -> Option<f64> {
        self.get(&f).copied()
    }
}

/// One patient row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BloodCountRecord {
    pub patient_id: String,
    /// Kept as metadata; never a model input.
    pub age_quantile: Option<i64>,
    pub location: Location,
    pub label: Label,
    pub features: FeatureVector,
    /// Not modeled (missing for part of the cohort); carried for the significance screen.
    pub neutrophils: Option<f64>,
    pub pathogen_panel: Option<PathogenPanel>,
}

impl BloodCountRecord {
    pub fn is_positive(&self) -> bool {
        self.label.is_positive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub source_digest: String,
    pub filter: String,
}

/// A filtered, validated set of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    records: Vec<BloodCountRecord>,
    feature_manifest: Vec<Feature>,
    site_filter: Vec<Location>,
    provenance: Provenance,
}

impl Cohort {
    pub fn records(&self) -> &[BloodCountRecord] {
        &self.records
    }

    pub fn feature_manifest(&self) -> &[Feature] {
        &self.feature_manifest
    }

    pub fn site_filter(&self) -> &[Location] {
        &self.site_filter
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_source_digest(mut self, digest: impl Into<String>) -> Self {
        self.provenance.source_digest = digest.into();
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.records.iter().filter(|r| r.is_positive()).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.is_positive()).collect()
    }

    /// Feature matrix with columns in manifest order.
    pub fn design_matrix(&self) -> Matrix {
        let cols = self.feature_manifest.len();
        let mut data = Vec::with_capacity(self.records.len() * cols);
        for r in &self.records {
            data.extend(self.feature_manifest.iter().map(|f| r.features.get(*f)));
        }
        Matrix::from_vec(self.records.len(), cols, data).expect("manifest-sized rows")
    }

    /// Short label such as `community` or `community+regular-ward`.
    pub fn filter_name(&self) -> String {
        let mut s = String::new();
        for (i, l) in self.site_filter.iter().enumerate() {
            if i > 0 {
                s.push('+');
            }
            s.push_str(l.name());
        }
        s
    }
}

/// Keeps the records whose location is in `site_filter`.
pub fn select_cohort(records: &[BloodCountRecord], site_filter: &[Location]) -> Result<Cohort> {
    let filter: BTreeSet<Location> = site_filter.iter().copied().collect();
    if filter.is_empty() {
        return Err(Error::EmptyCohort(Vec::new()));
    }
    let mut seen = BTreeSet::new();
    let mut kept = Vec::new();
    for r in records.iter().filter(|r| filter.contains(&r.location)) {
        if !r.features.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if !seen.insert(r.patient_id.as_str()) {
            return Err(Error::DuplicatePatient(r.patient_id.clone()));
        }
        kept.push(r.clone());
    }
    let site_filter: Vec<Location> = filter.into_iter().collect();
    if kept.is_empty() {
        return Err(Error::EmptyCohort(site_filter));
    }
    let mut cohort = Cohort {
        records: kept,
        feature_manifest: Feature::ALL.to_vec(),
        site_filter,
        provenance: Provenance::default(),
    };
    cohort.provenance.filter = cohort.filter_name();
    Ok(cohort)
}

/// Fitted location/scale of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: f64,
    pub sd: f64,
}

impl Scaler {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub values: Vec<f64>,
    pub scaler: Scaler,
}

/// Centers to mean 0 and scales to sample standard deviation 1.
pub fn standardize(values: &[f64]) -> Result<Standardized> {
    if values.len() < 2 {
        return Err(Error::TooFewValues(values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mean = math::mean(values);
    let sd = math::sample_sd(values);
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::DegenerateFeature);
    }
    let scaler = Scaler { mean, sd };
    Ok(Standardized { values: values.iter().map(|&v| scaler.apply(v)).collect(), scaler })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ClassCount {
    pub count: usize,
    /// Percentage of the column (location) total.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationColumn {
    /// `None` for the all-locations total column.
    pub location: Option<Location>,
    pub total: usize,
    pub negative: ClassCount,
    pub positive: ClassCount,
    /// Patients positive for at least one non-SARS-CoV-2 pathogen.
    pub other_pathogen: ClassCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathogenRow {
    pub pathogen: Pathogen,
    pub per_location: [usize; 4],
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    /// Community, regular ward, semi-intensive, ICU, then the total column.
    pub groups: Vec<LocationColumn>,
    /// Records with at least one tested pathogen.
    pub panel_records: usize,
    pub pathogens: Vec<PathogenRow>,
    /// Column sums of the pathogen table (positive results, not patients).
    pub pathogen_totals: [usize; 4],
    pub pathogen_grand_total: usize,
}

fn class_count(count: usize, total: usize) -> ClassCount {
    let percent = if total == 0 { 0.0 } else { 100.0 * count as f64 / total as f64 };
    ClassCount { count, percent }
}

/// Per-location class counts and per-pathogen positive counts.
pub fn cohort_summary(records: &[BloodCountRecord]) -> CohortSummary {
    let mut totals = [0usize; 5];
    let mut pos = [0usize; 5];
    let mut other = [0usize; 5];
    let mut pathogen_counts = [[0usize; 4]; PATHOGEN_COUNT];
    let mut panel_records = 0;

    for r in records {
        let l = r.location.index();
        for slot in [l, 4] {
            totals[slot] += 1;
            if r.is_positive() {
                pos[slot] += 1;
            }
        }
        if let Some(panel) = r.pathogen_panel.as_ref().filter(|p| p.any_tested()) {
            panel_records += 1;
            if panel.any_positive() {
                other[l] += 1;
                other[4] += 1;
            }
            for p in Pathogen::ALL {
                if panel.get(p) == PathogenStatus::Positive {
                    pathogen_counts[p.index()][l] += 1;
                }
            }
        }
    }

    let groups = (0..5)
        .map(|i| LocationColumn {
            location: Location::ALL.get(i).copied(),
            total: totals[i],
            negative: class_count(totals[i] - pos[i], totals[i]),
            positive: class_count(pos[i], totals[i]),
            other_pathogen: class_count(other[i], totals[i]),
        })
        .collect();

    let pathogens: Vec<PathogenRow> = Pathogen::ALL
        .iter()
        .map(|&p| {
            let per_location = pathogen_counts[p.index()];
            PathogenRow { pathogen: p, per_location, total: per_location.iter().sum() }
        })
        .collect();
    let mut pathogen_totals = [0usize; 4];
    for row in &pathogens {
        for (t, c) in pathogen_totals.iter_mut().zip(row.per_location) {
            *t += c;
        }
    }

    CohortSummary {
        groups,
        panel_records,
        pathogen_grand_total: pathogen_totals.iter().sum(),
        pathogens,
        pathogen_totals,
    }
}
