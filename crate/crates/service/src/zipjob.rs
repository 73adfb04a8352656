//! ZIP archive jobs: a main `.tex` file plus its inputs in, converted
//! files plus a manifest and a JSON-lines log out.

use std::collections::BTreeMap;
use std::io::{Cursor, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use texmath::pipeline::{convert_document, is_safe_relative, log_to_json_lines, MapResolver, Profile, Status, VERSION};
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipArchive, ZipWriter};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZipLimits {
    pub max_entries: usize,
    /// Total uncompressed bytes across all entries.
    pub max_uncompressed: u64,
}

impl Default for ZipLimits {
    fn default() -> Self {
        ZipLimits { max_entries: 4096, max_uncompressed: 64 << 20 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JobError {
    #[error("not a readable ZIP archive: {0}")]
    Corrupt(String),
    #[error("archive entry {0:?} escapes the archive root")]
    UnsafePath(String),
    #[error("archive holds no main file; name it main.tex (candidates: {})", .0.join(", "))]
    NoMainFile(Vec<String>),
    #[error("archive exceeds {0}")]
    TooLarge(String),
    #[error("archive entry {0:?} appears twice")]
    DuplicateEntry(String),
}

impl JobError {
    pub fn category(&self) -> &'static str {
        match self {
            JobError::Corrupt(_) => "corrupt-archive",
            JobError::UnsafePath(_) => "unsafe-path",
            JobError::NoMainFile(_) => "no-main-file",
            JobError::TooLarge(_) => "archive-too-large",
            JobError::DuplicateEntry(_) => "duplicate-entry",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub input: String,
    pub output: String,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobManifest {
    pub main: String,
    pub entries: Vec<ManifestEntry>,
    pub version: String,
}

impl JobManifest {
    /// The worst status over all converted files.
    pub fn status(&self) -> Status {
        let rank = |s: Status| match s {
            Status::Success => 0,
            Status::SuccessWithWarnings => 1,
            Status::Failed => 2,
        };
        self.entries.iter().map(|e| e.status).max_by_key(|s| rank(*s)).unwrap_or(Status::Success)
    }
}

#[derive(Clone, Debug)]
pub struct JobOutput {
    pub archive: Vec<u8>,
    pub manifest: JobManifest,
}

/// Read every entry into memory, refusing unsafe names and oversized archives.
pub fn read_archive(bytes: &[u8], limits: ZipLimits) -> Result<BTreeMap<String, Vec<u8>>, JobError> {
    let mut zip = ZipArchive::new(Cursor::new(bytes)).map_err(|e| JobError::Corrupt(e.to_string()))?;
    if zip.len() > limits.max_entries {
        return Err(JobError::TooLarge(format!("{} entries", limits.max_entries)));
    }
    let mut files = BTreeMap::new();
    let mut total = 0u64;
    for i in 0..zip.len() {
        let mut entry = zip.by_index(i).map_err(|e| JobError::Corrupt(e.to_string()))?;
        let name = entry.name().replace('\\', "/");
        let trimmed = name.trim_end_matches('/');
        if !is_safe_relative(trimmed) || entry.enclosed_name().is_none() {
            return Err(JobError::UnsafePath(entry.name().to_string()));
        }
        if entry.is_dir() {
            continue;
        }
        let budget = limits.max_uncompressed - total;
        let mut data = Vec::new();
        (&mut entry).take(budget + 1).read_to_end(&mut data).map_err(|e| JobError::Corrupt(e.to_string()))?;
        if data.len() as u64 > budget {
            return Err(JobError::TooLarge(format!("{} uncompressed bytes", limits.max_uncompressed)));
        }
        total += data.len() as u64;
        if files.insert(trimmed.to_string(), data).is_some() {
            return Err(JobError::DuplicateEntry(trimmed.to_string()));
        }
    }
    Ok(files)
}

fn is_tex(name: &str) -> bool {
    name.rsplit_once('.').is_some_and(|(_, ext)| ext.eq_ignore_ascii_case("tex"))
}

/// `main.tex` at the root, or else the only `.tex` file in the archive.
pub fn find_main(files: &BTreeMap<String, Vec<u8>>) -> Result<String, JobError> {
    if files.contains_key("main.tex") {
        return Ok("main.tex".into());
    }
    let tex: Vec<String> = files.keys().filter(|n| is_tex(n)).cloned().collect();
    match tex.as_slice() {
        [only] => Ok(only.clone()),
        _ => Err(JobError::NoMainFile(tex)),
    }
}

fn output_name(input: &str, extension: &str) -> String {
    let stem = input.rsplit_once('.').map_or(input, |(s, _)| s);
    format!("{stem}.{extension}")
}

/// Convert every `.tex` file in `archive`, main file first. `\input` is
/// resolved against the other archive entries only.
pub fn run_job(archive: &[u8], profile: &Profile, limits: ZipLimits) -> Result<JobOutput, JobError> {
    let files = read_archive(archive, limits)?;
    let main = find_main(&files)?;
    let mut resolver = MapResolver::default();
    for (name, data) in &files {
        if let Ok(text) = std::str::from_utf8(data) {
            resolver.insert(name.clone(), text);
        }
    }
    let mut order = vec![main.clone()];
    order.extend(files.keys().filter(|n| is_tex(n) && **n != main).cloned());

    let opts = SimpleFileOptions::default().compression_method(CompressionMethod::Deflated);
    let mut out = ZipWriter::new(Cursor::new(Vec::new()));
    let mut entries = Vec::new();
    let mut log = String::new();
    for input in order {
        let source = String::from_utf8_lossy(&files[&input]);
        let result = convert_document(&source, &input, profile, Some(&resolver));
        let output = output_name(&input, profile.format.extension());
        out.start_file(output.as_str(), opts).map_err(|e| JobError::Corrupt(e.to_string()))?;
        out.write_all(result.output.as_bytes()).map_err(|e| JobError::Corrupt(e.to_string()))?;
        log.push_str(&log_to_json_lines(&result.log, &result.version));
        entries.push(ManifestEntry { input, output, status: result.status });
    }
    let manifest = JobManifest { main, entries, version: VERSION.to_string() };
    let write = |out: &mut ZipWriter<Cursor<Vec<u8>>>, name: &str, data: &[u8]| -> Result<(), JobError> {
        out.start_file(name, opts).map_err(|e| JobError::Corrupt(e.to_string()))?;
        out.write_all(data).map_err(|e| JobError::Corrupt(e.to_string()))
    };
    let manifest_json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write(&mut out, "manifest.json", &manifest_json)?;
    write(&mut out, "log.jsonl", log.as_bytes())?;
    let archive = out.finish().map_err(|e| JobError::Corrupt(e.to_string()))?.into_inner();
    Ok(JobOutput { archive, manifest })
}

/// Build an archive from `(name, contents)` pairs, names taken verbatim.
pub fn build_archive<'a>(files: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> Vec<u8> {
    let opts = SimpleFileOptions::default().compression_method(CompressionMethod::Deflated);
    let mut out = ZipWriter::new(Cursor::new(Vec::new()));
    for (name, data) in files {
        out.start_file(name, opts).expect("start entry");
        out.write_all(data).expect("write entry");
    }
    out.finish().expect("finish archive").into_inner()
}
