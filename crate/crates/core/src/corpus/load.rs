//! Dataset ingestion for the normalized JSONL layout and the official
//! MovieQA challenge layout (`qa.json` plus per-movie plot files).

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Dataset, Document, QAItem, Split};
use crate::error::{Error, Result};

pub const DOCUMENTS_FILE: &str = "documents.jsonl";
pub const ITEMS_FILE: &str = "items.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    MovieqaOfficial,
    NormalizedJsonl,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "movieqa_official" => Ok(DataFormat::MovieqaOfficial),
            "normalized_jsonl" => Ok(DataFormat::NormalizedJsonl),
            other => Err(Error::Config(format!(
                "unknown data format {other:?} (expected movieqa_official or normalized_jsonl)"
            ))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DocumentRecord {
    doc_id: String,
    title: String,
    sentences: Vec<String>,
}

/// Loads one split.
///
/// For `NormalizedJsonl`, `qa_path` is `items.jsonl` and `docs_path` is
/// `documents.jsonl`; every item in the file belongs to `split`.
/// For `MovieqaOfficial`, `qa_path` is the challenge `qa.json` and `docs_path`
/// is the plot directory holding `<imdb_key>.wiki` files; items are filtered
/// by the `<split>:` prefix of their qid and only referenced plots are read.
pub fn load_dataset(
    qa_path: &Path,
    docs_path: &Path,
    format: DataFormat,
    split: Split,
) -> Result<Dataset> {
    match format {
        DataFormat::NormalizedJsonl => load_normalized(qa_path, docs_path, split),
        DataFormat::MovieqaOfficial => load_official(qa_path, docs_path, split),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        let record = serde_json::from_value(value).map_err(|e| {
            Error::Schema(format!("{} line {}: {e}", path.display(), i + 1))
        })?;
        out.push(record);
    }
    Ok(out)
}

fn load_normalized(items_path: &Path, docs_path: &Path, split: Split) -> Result<Dataset> {
    let docs: Vec<DocumentRecord> = read_jsonl(docs_path)?;
    let items: Vec<QAItem> = read_jsonl(items_path)?;
    let documents = docs
        .into_iter()
        .map(|d| Document::new(d.doc_id, d.title, d.sentences))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(split, documents, items)
}

/// Writes `documents.jsonl` and `items.jsonl` into `dir`, creating it if needed.
pub fn write_normalized(ds: &Dataset, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let docs_path = dir.join(DOCUMENTS_FILE);
    let items_path = dir.join(ITEMS_FILE);

    write_lines(
        &docs_path,
        ds.documents().map(|d| DocumentRecord {
            doc_id: d.doc_id.clone(),
            title: d.title.clone(),
            sentences: d.sentences().iter().map(|s| s.text().to_string()).collect(),
        }),
    )?;
    write_lines(&items_path, ds.items().iter())?;
    Ok((docs_path, items_path))
}

fn write_lines<T: Serialize>(path: &Path, records: impl Iterator<Item = T>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for rec in records {
        serde_json::to_writer(&mut w, &rec)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Deserialize)]
struct OfficialQa {
    qid: String,
    question: String,
    answers: Vec<String>,
    imdb_key: String,
    #[serde(default)]
    correct_index: Option<usize>,
    #[serde(default)]
    plot_alignment: Option<Vec<usize>>,
}

fn qid_split(qid: &str) -> Option<Split> {
    qid.split(':').next().and_then(|p| p.parse().ok())
}

fn load_official(qa_path: &Path, plot_dir: &Path, split: Split) -> Result<Dataset> {
    let text = read_to_string(qa_path)?;
    let raw: Vec<serde_json::Value> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: qa_path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;

    let mut items = Vec::new();
    for (i, value) in raw.into_iter().enumerate() {
        let qa: OfficialQa = serde_json::from_value(value).map_err(|e| {
            Error::Schema(format!("{} entry {i}: {e}", qa_path.display()))
        })?;
        if qid_split(&qa.qid) != Some(split) {
            continue;
        }
        items.push(QAItem {
            qid: qa.qid,
            doc_id: qa.imdb_key,
            question: qa.question,
            choices: qa.answers,
            correct_index: qa.correct_index,
            gold_alignment: qa.plot_alignment.filter(|a| !a.is_empty()),
        });
    }

    let keys: BTreeSet<&str> = items.iter().map(|i| i.doc_id.as_str()).collect();
    let mut documents = Vec::with_capacity(keys.len());
    for key in keys {
        let path = plot_dir.join(format!("{key}.wiki"));
        if !path.is_file() {
            let qid = items
                .iter()
                .find(|i| i.doc_id == key)
                .map(|i| i.qid.clone())
                .unwrap_or_default();
            return Err(Error::DanglingDocument {
                qid,
                doc_id: key.to_string(),
            });
        }
        // one sentence per non-blank line; alignments index these lines
        let plot = read_to_string(&path)?;
        let sentences: Vec<&str> = plot.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        documents.push(Document::new(key, key, sentences)?);
    }
    Dataset::new(split, documents, items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn normalized_parse_error_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let docs = write(
            dir.path(),
            DOCUMENTS_FILE,
            "{\"doc_id\":\"d\",\"title\":\"t\",\"sentences\":[\"A b.\"]}\n",
        );
        let items = write(dir.path(), ITEMS_FILE, "\n{not json\n");
        match load_dataset(&items, &docs, DataFormat::NormalizedJsonl, Split::Train) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let docs = write(
            dir.path(),
            DOCUMENTS_FILE,
            "{\"doc_id\":\"d\",\"title\":\"t\",\"sentences\":[\"A b.\"]}\n",
        );
        let items = write(
            dir.path(),
            ITEMS_FILE,
            "{\"qid\":\"q\",\"doc_id\":\"d\",\"choices\":[\"x\",\"y\"]}\n",
        );
        assert!(matches!(
            load_dataset(&items, &docs, DataFormat::NormalizedJsonl, Split::Train),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("absent.jsonl");
        assert!(matches!(
            load_dataset(&p, &p, DataFormat::NormalizedJsonl, Split::Val),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn official_layout_filters_split_and_reads_plots() {
        let dir = tempfile::tempdir().unwrap();
        let qa = write(
            dir.path(),
            "qa.json",
            r#"[
              {"qid":"train:tt01:0000","question":"Who runs?","answers":["a","b","c","d","e"],
               "imdb_key":"tt01","correct_index":1,"plot_alignment":[1],"video_clips":[]},
              {"qid":"test:tt02:0000","question":"Who sits?","answers":["a","b","c","d","e"],
               "imdb_key":"tt02","plot_alignment":[]}
            ]"#,
        );
        let plots = dir.path().join("plot");
        fs::create_dir(&plots).unwrap();
        write(&plots, "tt01.wiki", "Forrest runs.\n\nJenny waits.\n");
        write(&plots, "tt02.wiki", "Tom sits.\n");

        let train = load_dataset(&qa, &plots, DataFormat::MovieqaOfficial, Split::Train).unwrap();
        assert_eq!(train.items().len(), 1);
        assert_eq!(train.num_documents(), 1);
        let doc = train.document("tt01").unwrap();
        assert_eq!(doc.sentence(1).unwrap().text(), "Jenny waits.");

        let test = load_dataset(&qa, &plots, DataFormat::MovieqaOfficial, Split::Test).unwrap();
        assert_eq!(test.items()[0].correct_index, None);
        assert_eq!(test.items()[0].gold_alignment, None);
    }

    #[test]
    fn official_missing_plot_is_dangling() {
        let dir = tempfile::tempdir().unwrap();
        let qa = write(
            dir.path(),
            "qa.json",
            r#"[{"qid":"val:tt09:0000","question":"Q?","answers":["a","b"],"imdb_key":"tt09","correct_index":0}]"#,
        );
        assert!(matches!(
            load_dataset(&qa, dir.path(), DataFormat::MovieqaOfficial, Split::Val),
            Err(Error::DanglingDocument { .. })
        ));
    }
}
