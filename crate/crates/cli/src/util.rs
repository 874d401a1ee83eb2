//! File plumbing: atomic writes and the feature-CSV format.

use anyhow::{bail, Context, Result};
use exq_core::skeleton::Label;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Writes a file via a temp sibling + rename, so failed runs never leave
/// half-written artifacts.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .context("output path has no file name")?;
    let tmp = match dir {
        Some(d) => d.join(format!(".{file_name}.tmp")),
        None => Path::new(&format!(".{file_name}.tmp")).to_path_buf(),
    };
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents)
            .with_context(|| format!("writing {}", tmp.display()))?;
        f.flush()?;
    }
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// One row per sample: `subject_id,label,v0,v1,...` with no header.
pub fn write_features_csv(
    subjects: &[u32],
    labels: &[Label],
    vectors: &[Vec<f64>],
) -> Vec<u8> {
    let mut out = String::new();
    for ((subj, label), row) in subjects.iter().zip(labels).zip(vectors) {
        out.push_str(&format!("{subj},{}", label.as_str()));
        for v in row {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub struct FeatureRows {
    pub subjects: Vec<u32>,
    pub labels: Vec<Label>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn read_features_csv(path: &Path) -> Result<FeatureRows> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let reader = BufReader::new(file);
    let mut rows = FeatureRows {
        subjects: Vec::new(),
        labels: Vec::new(),
        vectors: Vec::new(),
    };
    let mut dim: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let subj: u32 = fields
            .next()
            .context("empty row")?
            .parse()
            .with_context(|| format!("line {line_no}: bad subject_id"))?;
        let label_text = fields.next().context("missing label")?;
        let label = Label::parse(label_text)
            .with_context(|| format!("line {line_no}: unknown label {label_text:?}"))?;
        let values: Vec<f64> = fields
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("line {line_no}: bad feature value"))?;
        if let Some(d) = dim {
            if values.len() != d {
                bail!("line {line_no}: row has {} features, expected {d}", values.len());
            }
        } else {
            dim = Some(values.len());
        }
        rows.subjects.push(subj);
        rows.labels.push(label);
        rows.vectors.push(values);
    }
    if rows.vectors.is_empty() {
        bail!("no feature rows in {}", path.display());
    }
    Ok(rows)
}
