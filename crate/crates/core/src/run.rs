//! Run directories: problem, baseline, box, trace and sections on disk.
//!
//! Layout:
//!
//! ```text
//! <run>/problem.json
//! <run>/baseline.json
//! <run>/box.json
//! <run>/trace.json
//! <run>/sections/section_<i>_<j>.{json,csv,svg}
//! <run>/manifest.json
//! ```
//!
//! Every JSON file is canonical (sorted keys, shortest round-trip floats, no
//! timestamps), so identical inputs produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::baseline::BaselineResult;
use crate::boxsolver::{DesignBox, SolverParams, SolverTrace};
use crate::problem::ProblemFile;
use crate::sections::{export_section, ExportFormat, SectionData};

pub const PROBLEM_FILE: &str = "problem.json";
pub const BASELINE_FILE: &str = "baseline.json";
pub const BOX_FILE: &str = "box.json";
pub const TRACE_FILE: &str = "trace.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SECTIONS_DIR: &str = "sections";

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pretty JSON with object keys sorted, terminated by a newline.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("run records serialize to JSON");
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Contents of `box.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub intervals: Vec<(f64, f64)>,
    pub mu: f64,
    pub purity: f64,
    pub seed: u64,
    pub params: SolverParams,
}

impl BoxRecord {
    pub fn design_box(&self) -> DesignBox {
        DesignBox::new(self.intervals.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seeds: BTreeMap<String, u64>,
    pub files: Vec<ManifestEntry>,
}

/// Everything a complete run consists of.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: ProblemFile,
    pub baseline: BaselineResult,
    pub box_record: BoxRecord,
    pub trace: SolverTrace,
    pub sections: Vec<SectionData>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{file} absent")]
    Missing { file: String },
    #[error("{file} is corrupt: {reason}")]
    Corrupt { file: String, reason: String },
    #[error("cannot write {file}: {source}")]
    Write { file: String, source: io::Error },
}

pub fn section_stem(section: &SectionData) -> String {
    format!("section_{}_{}", section.dims.0, section.dims.1)
}

/// A run directory opened for incremental writes.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write_bytes(&self, rel: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.path(rel);
        let wrap = |source| RunError::Write {
            file: rel.to_string(),
            source,
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(wrap)?;
        }
        fs::write(&path, bytes).map_err(wrap)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, rel: &str, value: &T) -> Result<(), RunError> {
        self.write_bytes(rel, canonical_json(value).as_bytes())
    }

    pub fn exists(&self, rel: &str) -> bool {
        self.path(rel).is_file()
    }

    pub fn read_json<T: DeserializeOwned>(&self, rel: &str) -> Result<T, RunError> {
        let bytes = fs::read(self.path(rel)).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => RunError::Missing {
                file: rel.to_string(),
            },
            _ => RunError::Corrupt {
                file: rel.to_string(),
                reason: e.to_string(),
            },
        })?;
        serde_json::from_slice(&bytes).map_err(|e| RunError::Corrupt {
            file: rel.to_string(),
            reason: e.to_string(),
        })
    }

    pub fn write_section(&self, section: &SectionData) -> Result<(), RunError> {
        let stem = section_stem(section);
        for format in [ExportFormat::Json, ExportFormat::Csv, ExportFormat::Svg] {
            let rel = format!("{SECTIONS_DIR}/{stem}.{}", format.extension());
            self.write_bytes(&rel, &export_section(section, format))?;
        }
        Ok(())
    }

    /// Section JSON files currently present, sorted by name.
    pub fn section_files(&self) -> Result<Vec<String>, RunError> {
        let dir = self.path(SECTIONS_DIR);
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut names: Vec<String> = fs::read_dir(&dir)
            .map_err(|e| RunError::Corrupt {
                file: SECTIONS_DIR.to_string(),
                reason: e.to_string(),
            })?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.starts_with("section_") && n.ends_with(".json"))
            .map(|n| format!("{SECTIONS_DIR}/{n}"))
            .collect();
        names.sort();
        Ok(names)
    }

    /// Rewrites `manifest.json` listing every run file with its SHA-256 and
    /// the seeds recorded in baseline, box and sections.
    pub fn write_manifest(&self) -> Result<Manifest, RunError> {
        let mut files = Vec::new();
        let mut rels: Vec<String> = [PROBLEM_FILE, BASELINE_FILE, BOX_FILE, TRACE_FILE]
            .iter()
            .map(|s| s.to_string())
            .filter(|r| self.exists(r))
            .collect();
        let dir = self.path(SECTIONS_DIR);
        if dir.is_dir() {
            let mut extra: Vec<String> = fs::read_dir(&dir)
                .map_err(|e| RunError::Corrupt {
                    file: SECTIONS_DIR.to_string(),
                    reason: e.to_string(),
                })?
                .filter_map(|e| e.ok())
                .map(|e| format!("{SECTIONS_DIR}/{}", e.file_name().to_string_lossy()))
                .collect();
            extra.sort();
            rels.extend(extra);
        }
        for rel in rels {
            let bytes = fs::read(self.path(&rel)).map_err(|e| RunError::Corrupt {
                file: rel.clone(),
                reason: e.to_string(),
            })?;
            files.push(ManifestEntry {
                sha256: hex::encode(Sha256::digest(&bytes)),
                path: rel,
            });
        }

        let mut seeds = BTreeMap::new();
        if let Ok(b) = self.read_json::<BaselineResult>(BASELINE_FILE) {
            if let Some(s) = b.seed {
                seeds.insert("baseline".to_string(), s);
            }
        }
        if let Ok(b) = self.read_json::<BoxRecord>(BOX_FILE) {
            seeds.insert("solve".to_string(), b.seed);
        }
        for rel in self.section_files()? {
            if let Ok(s) = self.read_json::<SectionData>(&rel) {
                seeds.insert(format!("section_{}_{}", s.dims.0, s.dims.1), s.seed);
            }
        }
        let manifest = Manifest {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            seeds,
            files,
        };
        self.write_json(MANIFEST_FILE, &manifest)?;
        Ok(manifest)
    }
}

/// Writes a complete run and its manifest.
pub fn persist_run(dir: impl Into<PathBuf>, run: &RunRecord) -> Result<Manifest, RunError> {
    let dir = RunDir::new(dir);
    dir.write_json(PROBLEM_FILE, &run.problem)?;
    dir.write_json(BASELINE_FILE, &run.baseline)?;
    dir.write_json(BOX_FILE, &run.box_record)?;
    dir.write_json(TRACE_FILE, &run.trace)?;
    for s in &run.sections {
        dir.write_section(s)?;
    }
    dir.write_manifest()
}

/// Loads a run written by [`persist_run`] (or assembled by the CLI).
pub fn load_run(dir: impl Into<PathBuf>) -> Result<RunRecord, RunError> {
    let dir = RunDir::new(dir);
    let problem = dir.read_json(PROBLEM_FILE)?;
    let baseline = dir.read_json(BASELINE_FILE)?;
    let box_record = dir.read_json(BOX_FILE)?;
    let trace = dir.read_json(TRACE_FILE)?;
    let sections = dir
        .section_files()?
        .iter()
        .map(|rel| dir.read_json(rel))
        .collect::<Result<_, _>>()?;
    Ok(RunRecord {
        problem,
        baseline,
        box_record,
        trace,
        sections,
    })
}

/// Reads `manifest.json` of a run directory.
pub fn load_manifest(dir: impl Into<PathBuf>) -> Result<Manifest, RunError> {
    RunDir::new(dir).read_json(MANIFEST_FILE)
}
