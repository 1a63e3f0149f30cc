use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Job, JobKind};
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub key: String,
    pub status: TaskStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// Per-task result file, relative to the output directory.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub artifact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

/// Record of one job run. Holds no timestamps and no worker count, so equal
/// inputs give byte-identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub kind: JobKind,
    pub seed: u64,
    /// SHA-256 over the resolved job and the contents of its input files.
    pub input_hash: String,
    pub tasks: Vec<TaskEntry>,
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn new(job: &Job) -> Result<Self, CliError> {
        Ok(Self {
            tool: concat!("wgmsim ", env!("CARGO_PKG_VERSION")).into(),
            kind: job.kind,
            seed: job.seed,
            input_hash: input_hash(job)?,
            tasks: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    pub fn failed(&self) -> usize {
        self.tasks.iter().filter(|t| t.status == TaskStatus::Failed).count()
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| CliError::MissingResults(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::MissingResults(format!("{}: {e}", path.display())))
    }
}

fn hex(digest: impl AsRef<[u8]>) -> String {
    digest.as_ref().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    Ok(hex(Sha256::digest(fs::read(path)?)))
}

fn input_hash(job: &Job) -> Result<String, CliError> {
    let mut h = Sha256::new();
    // file names differ between machines; only the contents count
    let mut canonical = job.clone();
    canonical.spec.out = None;
    canonical.spec.workers = None;
    let strip = |p: &mut PathBuf| *p = PathBuf::from(p.file_name().unwrap_or_default());
    canonical.spec.materials.guiding_table.as_mut().map(strip);
    canonical.spec.materials.diamond_table.as_mut().map(strip);
    if let Some(f) = canonical.spec.fit.as_mut() {
        f.spectrum.as_mut().map(strip);
        f.families.as_mut().map(strip);
    }
    if let Some(r) = canonical.spec.report.as_mut() {
        // inputs enter through the contents of their mode tables
        r.inputs.clear();
    }
    h.update(serde_json::to_vec(&canonical)?);
    for path in job.input_files() {
        let bytes = fs::read(&path).map_err(|e| {
            let msg = format!("{}: {e}", path.display());
            if job.kind == JobKind::Report {
                CliError::MissingResults(msg)
            } else {
                CliError::Config(msg)
            }
        })?;
        h.update(Sha256::digest(bytes));
    }
    Ok(hex(h.finalize()))
}

/// Output directory with artifact bookkeeping.
pub struct OutDir {
    pub root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root.join("tasks")).map_err(|e| CliError::Config(format!("output directory {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), artifacts: Vec::new() })
    }

    /// Writes `bytes` to `rel` and records it as an artifact.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        let mut f = fs::File::create(&path)?;
        f.write_all(bytes)?;
        self.record(rel)
    }

    /// Registers a file some other writer produced.
    pub fn record(&mut self, rel: &str) -> Result<(), CliError> {
        let sha256 = sha256_file(&self.root.join(rel))?;
        self.artifacts.retain(|a| a.path != rel);
        self.artifacts.push(Artifact { path: rel.into(), sha256 });
        Ok(())
    }

    /// Per-task result, written as soon as the task finishes.
    pub fn write_task(&self, key: &str, value: &impl Serialize) -> Result<String, CliError> {
        let rel = format!("tasks/{key}.json");
        fs::write(self.root.join(&rel), serde_json::to_vec_pretty(value)?)?;
        Ok(rel)
    }

    pub fn finish(mut self, mut manifest: Manifest) -> Result<Manifest, CliError> {
        manifest.tasks.sort_by(|a, b| a.key.cmp(&b.key));
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        manifest.artifacts = std::mem::take(&mut self.artifacts);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.root.join(MANIFEST), text)?;
        Ok(manifest)
    }
}

/// Serialises rows as CSV with a header.
pub fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// One JSON object per line.
pub fn jsonl_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn read_jsonl<R: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<R>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::MissingResults(format!("{}: {e}", path.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| CliError::MissingResults(format!("{}: {e}", path.display()))))
        .collect()
}
