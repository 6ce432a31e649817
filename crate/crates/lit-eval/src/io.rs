//! Line-delimited JSON files, output headers and atomic writes.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use lit_eval_core::fingerprint::sha256_hex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

/// First line of every line-delimited file this tool writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub kind: String,
    pub run_id: String,
    pub config_fingerprint: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub provenance: Value,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: Header,
}

/// Records of a line-delimited file with their 1-based line numbers.
pub struct Jsonl<T> {
    pub header: Option<Header>,
    pub records: Vec<(usize, T)>,
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Jsonl<T>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Jsonl { header: None, records: Vec::new() };
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if out.header.is_none() && out.records.is_empty() {
            if let Ok(h) = serde_json::from_str::<HeaderLine>(&line) {
                out.header = Some(h.header);
                continue;
            }
        }
        let rec = serde_json::from_str(&line).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        out.records.push((line_no, rec));
    }
    Ok(out)
}

/// Reads a file that must carry a header of `kind`.
pub fn read_artifact<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<(Header, Vec<T>)> {
    let file = read_jsonl::<T>(path)?;
    let header = file.header.ok_or_else(|| CliError::WrongKind {
        path: path.to_path_buf(),
        expected: kind.into(),
        found: "a file without header".into(),
    })?;
    if header.kind != kind {
        return Err(CliError::WrongKind { path: path.to_path_buf(), expected: kind.into(), found: header.kind });
    }
    Ok((header, file.records.into_iter().map(|(_, r)| r).collect()))
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Writes `bytes` to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let tmp = temp_sibling(path);
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn temp_sibling(path: &Path) -> PathBuf {
    use std::sync::atomic::{AtomicU64, Ordering};
    static SEQ: AtomicU64 = AtomicU64::new(0);
    let n = SEQ.fetch_add(1, Ordering::Relaxed);
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp.{}.{n}", std::process::id()));
    path.with_file_name(name)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// A line-delimited output written incrementally to `<path>.partial` and
/// renamed into place by [`JsonlOutput::finish`]. A crash leaves a valid
/// prefix of the final file behind.
pub struct JsonlOutput {
    path: PathBuf,
    partial: PathBuf,
    out: BufWriter<File>,
    written: usize,
}

impl JsonlOutput {
    pub fn create(path: PathBuf, header: &Header) -> Result<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let mut partial = path.clone().into_os_string();
        partial.push(".partial");
        let partial = PathBuf::from(partial);
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(&partial)
            .map_err(|e| CliError::io(&partial, e))?;
        let mut me = Self { path, partial, out: BufWriter::new(file), written: 0 };
        me.line(&HeaderLine { header: header.clone() })?;
        me.written = 0;
        Ok(me)
    }

    fn line<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let s = serde_json::to_string(value).expect("serializable");
        writeln!(self.out, "{s}").and_then(|_| self.out.flush()).map_err(|e| CliError::io(&self.partial, e))?;
        self.written += 1;
        Ok(())
    }

    pub fn push<T: Serialize>(&mut self, value: &T) -> Result<()> {
        self.line(value)
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush().map_err(|e| CliError::io(&self.partial, e))?;
        drop(self.out);
        fs::rename(&self.partial, &self.path).map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}
