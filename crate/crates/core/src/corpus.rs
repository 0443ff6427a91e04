//! Shared-task corpus loading and the two textual views used for training.
//!
//! A corpus file is an RFC-4180 CSV with a mandatory header. Only the comment
//! column is required; the code and label columns may be absent (comments-only
//! exports and unlabeled test files).

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{tokenize, TokenizerConfig};

/// Binary relevance label. `Useful` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Useful,
    NotUseful,
}

impl Label {
    /// Surface form used in prediction files.
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Useful => "Useful",
            Label::NotUseful => "Not Useful",
        }
    }

    /// +1 for `Useful`, -1 for `NotUseful`.
    pub fn sign(self) -> f64 {
        match self {
            Label::Useful => 1.0,
            Label::NotUseful => -1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Useful => Label::NotUseful,
            Label::NotUseful => Label::Useful,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelParseError(pub String);

impl fmt::Display for LabelParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unrecognized label `{}`", self.0)
    }
}

impl std::error::Error for LabelParseError {}

impl FromStr for Label {
    type Err = LabelParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let folded = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        match folded.as_str() {
            "useful" | "1" => Ok(Label::Useful),
            "not useful" | "not_useful" | "0" => Ok(Label::NotUseful),
            _ => Err(LabelParseError(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: usize,
    pub comment_text: String,
    pub code_text: String,
    pub label: Option<Label>,
}

/// Maps corpus fields onto CSV header names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub comment: String,
    pub code: String,
    pub label: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            comment: "comment".into(),
            code: "code".into(),
            label: "label".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    examples: Vec<LabeledExample>,
    labeled: bool,
    has_code: bool,
}

impl Corpus {
    /// Builds a corpus from in-memory examples, re-assigning ids by position.
    pub fn new(examples: Vec<LabeledExample>, has_code: bool) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut examples = examples;
        for (i, ex) in examples.iter_mut().enumerate() {
            if ex.comment_text.trim().is_empty() {
                return Err(Error::EmptyComment(i + 1));
            }
            ex.id = i;
        }
        let labeled = examples.iter().all(|e| e.label.is_some());
        Ok(Corpus {
            examples,
            labeled,
            has_code,
        })
    }

    /// Convenience constructor for labeled (comment, code, label) triples.
    pub fn from_triples<I, S, T>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T, Label)>,
        S: Into<String>,
        T: Into<String>,
    {
        let examples = rows
            .into_iter()
            .map(|(comment, code, label)| LabeledExample {
                id: 0,
                comment_text: comment.into(),
                code_text: code.into(),
                label: Some(label),
            })
            .collect();
        Corpus::new(examples, true)
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.labeled
    }

    /// Whether the source file carried a code column.
    pub fn has_code(&self) -> bool {
        self.has_code
    }

    /// Labels in corpus order, or `UnlabeledCorpus` if any row lacks one.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.examples
            .iter()
            .map(|e| e.label.ok_or(Error::UnlabeledCorpus))
            .collect()
    }

    /// Sub-corpus of the given row positions, in the given order. Ids are kept.
    pub fn subset(&self, rows: &[usize]) -> Corpus {
        let examples: Vec<_> = rows.iter().map(|&r| self.examples[r].clone()).collect();
        let labeled = examples.iter().all(|e| e.label.is_some());
        Corpus {
            examples,
            labeled,
            has_code: self.has_code,
        }
    }

    /// Writes the corpus back as CSV under `schema`'s column names.
    pub fn write_csv<W: Write>(&self, writer: W, schema: &ColumnMapping) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec![schema.comment.as_str()];
        if self.has_code {
            header.push(schema.code.as_str());
        }
        if self.labeled {
            header.push(schema.label.as_str());
        }
        out.write_record(&header).map_err(csv_err)?;
        for ex in &self.examples {
            let mut row = vec![ex.comment_text.as_str()];
            if self.has_code {
                row.push(ex.code_text.as_str());
            }
            if let Some(label) = ex.label.filter(|_| self.labeled) {
                row.push(label.as_str());
            }
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::MalformedCsv(e.to_string())
}

/// Loads a corpus CSV from disk. See [`read_csv`].
pub fn load_csv(path: impl AsRef<Path>, schema: &ColumnMapping, expect_labels: bool) -> Result<Corpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema, expect_labels)
}

/// Parses a corpus from any reader.
///
/// The label column is parsed whenever present; `expect_labels` makes its
/// absence an error. Row numbers in errors count data rows from 1.
pub fn read_csv<R: Read>(reader: R, schema: &ColumnMapping, expect_labels: bool) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| header.iter().position(|h| h.trim() == name);

    let comment_col = find(&schema.comment).ok_or_else(|| Error::MissingColumn(schema.comment.clone()))?;
    let code_col = find(&schema.code);
    let label_col = find(&schema.label);
    if expect_labels && label_col.is_none() {
        return Err(Error::MissingColumn(schema.label.clone()));
    }

    let mut examples = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_err)?;
        let comment = record.get(comment_col).unwrap_or_default();
        if comment.trim().is_empty() {
            return Err(Error::EmptyComment(row));
        }
        let code = code_col.and_then(|c| record.get(c)).unwrap_or_default();
        let label = match label_col {
            Some(c) => {
                let raw = record.get(c).unwrap_or_default();
                Some(raw.parse::<Label>().map_err(|_| Error::UnparsableLabel {
                    row,
                    value: raw.to_string(),
                })?)
            }
            None => None,
        };
        examples.push(LabeledExample {
            id: i,
            comment_text: comment.to_string(),
            code_text: code.to_string(),
            label,
        });
    }
    if examples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Corpus {
        labeled: label_col.is_some(),
        has_code: code_col.is_some(),
        examples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViewMode {
    CommentsOnly,
    CodeAndComments,
}

impl ViewMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViewMode::CommentsOnly => "comments",
            ViewMode::CodeAndComments => "code+comments",
        }
    }
}

impl FromStr for ViewMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "comments" => Ok(ViewMode::CommentsOnly),
            "code+comments" => Ok(ViewMode::CodeAndComments),
            other => Err(format!("unknown view `{other}` (expected comments | code+comments)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextView {
    pub mode: ViewMode,
    pub documents: Vec<String>,
}

/// Projects a corpus onto one document per example.
pub fn extract_view(corpus: &Corpus, mode: ViewMode) -> TextView {
    let documents = corpus
        .examples()
        .iter()
        .map(|ex| match mode {
            ViewMode::CommentsOnly => ex.comment_text.clone(),
            ViewMode::CodeAndComments => format!("{}\n{}", ex.comment_text, ex.code_text),
        })
        .collect();
    TextView { mode, documents }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub total: usize,
    pub useful: usize,
    pub not_useful: usize,
    pub mean_comment_tokens: f64,
}

pub fn corpus_stats(corpus: &Corpus) -> Result<Stats> {
    let labels = corpus.labels()?;
    let useful = labels.iter().filter(|&&l| l == Label::Useful).count();
    let tokenizer = TokenizerConfig::default();
    let tokens: usize = corpus
        .examples()
        .iter()
        .map(|e| tokenize(&e.comment_text, &tokenizer).len())
        .sum();
    Ok(Stats {
        total: labels.len(),
        useful,
        not_useful: labels.len() - useful,
        mean_comment_tokens: tokens as f64 / corpus.len() as f64,
    })
}

/// Writes the shared `id,predicted_label` prediction file.
pub fn write_predictions<W: Write>(writer: W, ids: &[usize], labels: &[Label]) -> Result<()> {
    if ids.len() != labels.len() {
        return Err(Error::LengthMismatch {
            predicted: labels.len(),
            gold: ids.len(),
        });
    }
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["id", "predicted_label"]).map_err(csv_err)?;
    for (id, label) in ids.iter().zip(labels) {
        out.write_record([id.to_string().as_str(), label.as_str()])
            .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::io("<prediction writer>", e))?;
    Ok(())
}

/// Reads a prediction file written by this crate or the fine-tuning component.
pub fn read_predictions<R: Read>(reader: R) -> Result<Vec<(usize, Label)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() != 2 || &header[0] != "id" || &header[1] != "predicted_label" {
        return Err(Error::SchemaMismatch(format!(
            "prediction header must be `id,predicted_label`, found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let id = record[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::MalformedCsv(format!("bad id `{}` at data row {}", &record[0], i + 1)))?;
        let label = match &record[1] {
            "Useful" => Label::Useful,
            "Not Useful" => Label::NotUseful,
            other => {
                return Err(Error::UnparsableLabel {
                    row: i + 1,
                    value: other.to_string(),
                })
            }
        };
        rows.push((id, label));
    }
    Ok(rows)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<(usize, Label)>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_predictions(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Corpus> {
        read_csv(text.as_bytes(), &ColumnMapping::default(), true)
    }

    #[test]
    fn header_only_is_empty_corpus() {
        assert!(matches!(parse("comment,code,label\n"), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn labels_parse_case_insensitively() {
        let c = parse("comment,code,label\na,x,Useful\nb,y,Not Useful\nc,z,useful\n").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(
            c.labels().unwrap(),
            vec![Label::Useful, Label::NotUseful, Label::Useful]
        );
        let ids: Vec<_> = c.examples().iter().map(|e| e.id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn label_surface_forms() {
        for (s, l) in [
            ("useful", Label::Useful),
            ("  USEFUL ", Label::Useful),
            ("1", Label::Useful),
            ("not useful", Label::NotUseful),
            ("Not   Useful", Label::NotUseful),
            ("NOT_USEFUL", Label::NotUseful),
            ("0", Label::NotUseful),
        ] {
            assert_eq!(s.parse::<Label>().unwrap(), l, "{s}");
        }
        assert!("2".parse::<Label>().is_err());
    }

    #[test]
    fn bad_label_reports_row() {
        match parse("comment,code,label\nfoo,x,maybe\n") {
            Err(Error::UnparsableLabel { row, value }) => {
                assert_eq!(row, 1);
                assert_eq!(value, "maybe");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_columns() {
        assert!(matches!(
            parse("text,code,label\nfoo,x,1\n"),
            Err(Error::MissingColumn(c)) if c == "comment"
        ));
        assert!(matches!(
            parse("comment,code\nfoo,x\n"),
            Err(Error::MissingColumn(c)) if c == "label"
        ));
        let unlabeled = read_csv("comment\nfoo\n".as_bytes(), &ColumnMapping::default(), false).unwrap();
        assert!(!unlabeled.is_labeled());
        assert!(!unlabeled.has_code());
    }

    #[test]
    fn ragged_rows_and_bad_utf8_are_malformed() {
        assert!(matches!(
            parse("comment,code,label\nfoo,x\n"),
            Err(Error::MalformedCsv(_))
        ));
        let mut bytes = b"comment,code,label\nfoo,".to_vec();
        bytes.extend_from_slice(&[0xff, 0xfe]);
        bytes.extend_from_slice(b",1\n");
        assert!(matches!(
            read_csv(&bytes[..], &ColumnMapping::default(), true),
            Err(Error::MalformedCsv(_))
        ));
    }

    #[test]
    fn quoted_fields() {
        let c = parse("comment,code,label\n\"frees, the buffer\",\"free(p);\nreturn;\",1\n").unwrap();
        assert_eq!(c.examples()[0].comment_text, "frees, the buffer");
        assert_eq!(c.examples()[0].code_text, "free(p);\nreturn;");
    }

    #[test]
    fn views() {
        let c = Corpus::from_triples([("frees buffer", "free(p);", Label::Useful)]).unwrap();
        assert_eq!(extract_view(&c, ViewMode::CommentsOnly).documents, vec!["frees buffer"]);
        assert_eq!(
            extract_view(&c, ViewMode::CodeAndComments).documents,
            vec!["frees buffer\nfree(p);"]
        );
        let two = Corpus::from_triples([("first", "", Label::Useful), ("second", "", Label::NotUseful)]).unwrap();
        let v = extract_view(&two, ViewMode::CodeAndComments);
        assert_eq!(v.documents.len(), 2);
        assert!(v.documents[0].starts_with("first"));
        assert_eq!(v, extract_view(&two, ViewMode::CodeAndComments));
    }

    #[test]
    fn stats() {
        let c = Corpus::from_triples([
            ("aa bb", "", Label::Useful),
            ("cc", "", Label::Useful),
            ("dd ee ff", "", Label::Useful),
            ("gg", "", Label::NotUseful),
        ])
        .unwrap();
        let s = corpus_stats(&c).unwrap();
        assert_eq!((s.total, s.useful, s.not_useful), (4, 3, 1));
        assert_eq!(s.mean_comment_tokens, 7.0 / 4.0);

        let one = Corpus::from_triples([("aa", "", Label::Useful)]).unwrap();
        assert_eq!(corpus_stats(&one).unwrap().total, 1);

        let unlabeled = read_csv("comment\nfoo\n".as_bytes(), &ColumnMapping::default(), false).unwrap();
        assert!(matches!(corpus_stats(&unlabeled), Err(Error::UnlabeledCorpus)));
    }

    #[test]
    fn csv_round_trip() {
        let text = "comment,code,label\n\"a, b\",x,Useful\nc,\"y\"\"z\",Not Useful\n";
        let c = parse(text).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf, &ColumnMapping::default()).unwrap();
        let again = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn prediction_file_round_trip() {
        let mut buf = Vec::new();
        write_predictions(&mut buf, &[0, 1, 7], &[Label::Useful, Label::NotUseful, Label::Useful]).unwrap();
        assert_eq!(
            std::str::from_utf8(&buf).unwrap(),
            "id,predicted_label\n0,Useful\n1,Not Useful\n7,Useful\n"
        );
        let rows = read_predictions(&buf[..]).unwrap();
        assert_eq!(rows[1], (1, Label::NotUseful));
        assert!(read_predictions("id,label\n0,Useful\n".as_bytes()).is_err());
        assert!(read_predictions("id,predicted_label\n0,useful\n".as_bytes()).is_err());
    }
}
