#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Header layout of the public snapshot, including unmapped columns and the
/// trailing space on the platelet volume header.
pub const HEADER: [&str; 42] = [
    "Patient ID",
    "Patient age quantile",
    "SARS-Cov-2 exam result",
    "Patient addmited to regular ward (1=yes, 0=no)",
    "Patient addmited to semi-intensive unit (1=yes, 0=no)",
    "Patient addmited to intensive care unit (1=yes, 0=no)",
    "Hematocrit",
    "Hemoglobin",
    "Platelets",
    "Mean platelet volume ",
    "Red blood Cells",
    "Lymphocytes",
    "Mean corpuscular hemoglobin concentration (MCHC)",
    "Leukocytes",
    "Basophils",
    "Mean corpuscular hemoglobin (MCH)",
    "Eosinophils",
    "Mean corpuscular volume (MCV)",
    "Monocytes",
    "Red blood cell distribution width (RDW)",
    "Serum Glucose",
    "Respiratory Syncytial Virus",
    "Influenza A",
    "Influenza B",
    "Parainfluenza 1",
    "CoronavirusNL63",
    "Rhinovirus/Enterovirus",
    "Mycoplasma pneumoniae",
    "Coronavirus HKU1",
    "Parainfluenza 3",
    "Chlamydophila pneumoniae",
    "Adenovirus",
    "Parainfluenza 4",
    "Coronavirus229E",
    "CoronavirusOC43",
    "Inf A H1N1 2009",
    "Bordetella pertussis",
    "Metapneumovirus",
    "Parainfluenza 2",
    "Neutrophils",
    "Urea",
    "Influenza B, rapid test",
];

const FEATURES: std::ops::Range<usize> = 6..20;
const PATHOGENS: std::ops::Range<usize> = 21..39;
const MONOCYTES: usize = 18;
const LEUKOCYTES: usize = 13;
const EOSINOPHILS: usize = 16;
const PLATELETS: usize = 8;
const RHINOVIRUS: usize = 26;

/// (positive, negative) counts per location.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub community: (usize, usize),
    pub regular_ward: (usize, usize),
    pub semi_intensive: (usize, usize),
    pub icu: (usize, usize),
    /// Extra rows with a blank blood count.
    pub incomplete: usize,
}

impl Default for Layout {
    fn default() -> Self {
        Layout { community: (24, 96), regular_ward: (16, 20), semi_intensive: (3, 5), icu: (4, 6), incomplete: 30 }
    }
}

impl Layout {
    pub fn complete(&self) -> usize {
        [self.community, self.regular_ward, self.semi_intensive, self.icu].iter().map(|(p, n)| p + n).sum()
    }
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    (0..12).map(|_| r.gen::<f64>()).sum::<f64>() - 6.0
}

/// Positives have higher monocytes and lower leukocytes, eosinophils and platelets.
pub fn source_csv(layout: &Layout, seed: u64) -> String {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).unwrap();
    let groups = [
        (layout.community, [0, 0, 0]),
        (layout.regular_ward, [1, 0, 0]),
        (layout.semi_intensive, [0, 1, 0]),
        (layout.icu, [0, 0, 1]),
    ];
    let mut id = 0;
    let mut rows = Vec::new();
    for ((pos, neg), flags) in groups {
        for k in 0..pos + neg {
            rows.push((k < pos, flags, false));
        }
    }
    for k in 0..layout.incomplete {
        rows.push((k % 4 == 0, [0, 0, 0], true));
    }
    for (positive, flags, incomplete) in rows {
        let mut row = vec![String::new(); HEADER.len()];
        row[0] = format!("{id:015x}");
        id += 1;
        row[1] = r.gen_range(0..20).to_string();
        row[2] = if positive { "positive" } else { "negative" }.into();
        for (k, f) in flags.iter().enumerate() {
            row[3 + k] = f.to_string();
        }
        for c in FEATURES {
            let shift = match (positive, c) {
                (true, MONOCYTES) => 1.3,
                (true, LEUKOCYTES | EOSINOPHILS | PLATELETS) => -1.1,
                _ => 0.0,
            };
            row[c] = format!("{:.9}", normal(&mut r) + shift);
        }
        if incomplete {
            let blank = FEATURES.start + r.gen_range(0..FEATURES.len());
            row[blank].clear();
        }
        if r.gen_bool(0.7) {
            row[39] = format!("{:.9}", normal(&mut r));
        }
        if r.gen_bool(0.5) {
            for c in PATHOGENS {
                row[c] = "not_detected".into();
            }
            if r.gen_bool(0.3) {
                row[RHINOVIRUS] = "detected".into();
            }
        }
        row[40] = format!("{:.3}", r.gen::<f64>());
        w.write_record(&row).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn write_source(dir: &Path, layout: &Layout, seed: u64) -> PathBuf {
    let p = dir.join("source.csv");
    std::fs::write(&p, source_csv(layout, seed)).unwrap();
    p
}

pub fn hemascreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hemascreen"))
        .args(args)
        .env_remove("HEMASCREEN_DATA")
        .output()
        .expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small models so end-to-end runs stay quick.
pub const FAST_CONFIG: &str = r#"{
  "folds": 4,
  "hyperparameters": {
    "rf": {"n_trees": 25},
    "glmnet": {"n_lambda": 15},
    "ann": {"epochs": 15}
  }
}"#;
