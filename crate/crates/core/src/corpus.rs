//! Parallel GEC corpora: loading, validation, statistics, and the
//! identity ("no correction needed") subset.
//!
//! Input text is stored exactly as read. No Unicode normalization is
//! applied unless explicitly requested via [`LoadOptions::nfc`]; Indic
//! matras and conjuncts are orthographically significant, so bytes in
//! means codepoints out.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid UTF-8 at byte {offset}")]
    InvalidUtf8 { path: String, offset: usize },
    #[error("{path}: empty file")]
    EmptyFile { path: String },
    #[error("{path}: row {row}: expected 2 fields, found {found}")]
    FieldCount {
        path: String,
        row: usize,
        found: usize,
    },
    #[error("{path}: row {row}: empty {field}")]
    EmptyField {
        path: String,
        row: usize,
        field: &'static str,
    },
    #[error("line count mismatch {src} vs {tgt}")]
    LineCountMismatch { src: usize, tgt: usize },
    #[error("empty source at line {line}")]
    EmptySourceLine { line: usize },
    #[error("empty reference at line {line}")]
    EmptyReferenceLine { line: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("duplicate pair id {id:?}")]
    DuplicateId { id: String },
    #[error("invalid language code {code:?}: must be nonempty lowercase ASCII")]
    InvalidLanguageCode { code: String },
    #[error("{path}: row {row}: embedded tab in field (TSV output forbids tabs)")]
    EmbeddedTab { path: String, row: usize },
    #[error("{path}: csv error: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// Writing system of a task language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Script {
    Devanagari,
    EasternNagari,
    Tamil,
    Telugu,
    Malayalam,
    Other,
}

/// A task language, identified by a short lowercase code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Language {
    pub code: String,
    pub display_name: String,
    pub script: Script,
}

impl Language {
    pub fn new(
        code: impl Into<String>,
        display_name: impl Into<String>,
        script: Script,
    ) -> Result<Self> {
        let code = code.into();
        if code.is_empty() || !code.chars().all(|c| c.is_ascii_lowercase()) {
            return Err(CorpusError::InvalidLanguageCode { code });
        }
        Ok(Self {
            code,
            display_name: display_name.into(),
            script,
        })
    }

    /// The five task languages, by usual code.
    pub fn builtin(code: &str) -> Option<Self> {
        let (name, script) = match code {
            "tam" => ("Tamil", Script::Tamil),
            "mal" => ("Malayalam", Script::Malayalam),
            "hi" => ("Hindi", Script::Devanagari),
            "bn" => ("Bengali", Script::EasternNagari),
            "tel" => ("Telugu", Script::Telugu),
            _ => return None,
        };
        Some(Self {
            code: code.to_string(),
            display_name: name.to_string(),
            script,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        };
        f.write_str(s)
    }
}

/// One erroneous/corrected example pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: String,
    /// The erroneous input sentence.
    pub source: String,
    /// The corrected gold sentence.
    pub reference: String,
    pub language: Language,
}

impl SentencePair {
    /// Identity pairs need no correction: source equals reference after
    /// leading/trailing whitespace trim.
    pub fn is_identity(&self) -> bool {
        self.source.trim() == self.reference.trim()
    }
}

/// An ordered collection of sentence pairs for one language and split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub language: Language,
    pub split: Split,
    pairs: Vec<SentencePair>,
}

/// Summary counts for a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_pairs: usize,
    /// Pairs whose source equals reference after whitespace trim.
    pub n_identity: usize,
    pub mean_source_codepoints: f64,
    /// Mean whitespace-delimited chunk count of the source side.
    pub mean_source_words: f64,
}

/// Two-column input file flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoColumnFormat {
    Tsv,
    Csv,
}

/// Options for [`load_two_column`].
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub format: TwoColumnFormat,
    /// Skip the first record. The shared-task files carry no header, so
    /// this defaults to false.
    pub has_header: bool,
    /// Apply NFC normalization to both columns on load. Off by default:
    /// stored text is byte-for-byte what the file contained.
    pub nfc: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            format: TwoColumnFormat::Tsv,
            has_header: false,
            nfc: false,
        }
    }
}

impl LoadOptions {
    pub fn tsv() -> Self {
        Self::default()
    }

    pub fn csv() -> Self {
        Self {
            format: TwoColumnFormat::Csv,
            ..Self::default()
        }
    }
}

impl Corpus {
    /// Build a corpus, checking id uniqueness.
    pub fn new(language: Language, split: Split, pairs: Vec<SentencePair>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &pairs {
            if !seen.insert(p.id.as_str()) {
                return Err(CorpusError::DuplicateId { id: p.id.clone() });
            }
        }
        Ok(Self {
            language,
            split,
            pairs,
        })
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SentencePair> {
        self.pairs.iter()
    }

    pub fn get(&self, id: &str) -> Option<&SentencePair> {
        self.pairs.iter().find(|p| p.id == id)
    }
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| CorpusError::InvalidUtf8 {
        path: path.display().to_string(),
        offset: e.utf8_error().valid_up_to(),
    })
}

fn maybe_nfc(text: &str, nfc: bool) -> String {
    if nfc {
        text.nfc().collect()
    } else {
        text.to_string()
    }
}

/// Load a two-column (source, reference) file into a corpus.
///
/// Ids are `<split>-<row>` with 1-based data-row numbering; row order is
/// preserved. TSV records are split on a single tab with no quoting; CSV
/// uses standard quoting rules.
pub fn load_two_column(
    path: impl AsRef<Path>,
    language: Language,
    split: Split,
    options: LoadOptions,
) -> Result<Corpus> {
    let path = path.as_ref();
    let records: Vec<Vec<String>> = match options.format {
        TwoColumnFormat::Tsv => {
            let text = read_utf8(path)?;
            text.lines()
                .map(|line| line.split('\t').map(str::to_string).collect())
                .collect()
        }
        TwoColumnFormat::Csv => {
            let text = read_utf8(path)?;
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .from_reader(text.as_bytes());
            let mut out = Vec::new();
            for record in reader.records() {
                let record = record.map_err(|source| CorpusError::Csv {
                    path: path.display().to_string(),
                    source,
                })?;
                out.push(record.iter().map(str::to_string).collect());
            }
            out
        }
    };

    let records = if options.has_header && !records.is_empty() {
        records[1..].to_vec()
    } else {
        records
    };
    if records.is_empty() {
        return Err(CorpusError::EmptyFile {
            path: path.display().to_string(),
        });
    }

    let mut pairs = Vec::with_capacity(records.len());
    for (i, fields) in records.iter().enumerate() {
        let row = i + 1;
        if fields.len() != 2 {
            return Err(CorpusError::FieldCount {
                path: path.display().to_string(),
                row,
                found: fields.len(),
            });
        }
        let source = maybe_nfc(&fields[0], options.nfc);
        let reference = maybe_nfc(&fields[1], options.nfc);
        if source.trim().is_empty() {
            return Err(CorpusError::EmptyField {
                path: path.display().to_string(),
                row,
                field: "source",
            });
        }
        if reference.trim().is_empty() {
            return Err(CorpusError::EmptyField {
                path: path.display().to_string(),
                row,
                field: "reference",
            });
        }
        pairs.push(SentencePair {
            id: format!("{split}-{row}"),
            source,
            reference,
            language: language.clone(),
        });
    }
    Corpus::new(language, split, pairs)
}

/// Load line-aligned `.src`/`.tgt` files; line i of src pairs with line i
/// of tgt.
pub fn load_src_tgt(
    src_path: impl AsRef<Path>,
    tgt_path: impl AsRef<Path>,
    language: Language,
    split: Split,
) -> Result<Corpus> {
    let src_text = read_utf8(src_path.as_ref())?;
    let tgt_text = read_utf8(tgt_path.as_ref())?;
    let src_lines: Vec<&str> = src_text.lines().collect();
    let tgt_lines: Vec<&str> = tgt_text.lines().collect();
    if src_lines.len() != tgt_lines.len() {
        return Err(CorpusError::LineCountMismatch {
            src: src_lines.len(),
            tgt: tgt_lines.len(),
        });
    }
    if src_lines.is_empty() {
        return Err(CorpusError::EmptyFile {
            path: src_path.as_ref().display().to_string(),
        });
    }
    let mut pairs = Vec::with_capacity(src_lines.len());
    for (i, (src, tgt)) in src_lines.iter().zip(&tgt_lines).enumerate() {
        let line = i + 1;
        if src.trim().is_empty() {
            return Err(CorpusError::EmptySourceLine { line });
        }
        if tgt.trim().is_empty() {
            return Err(CorpusError::EmptyReferenceLine { line });
        }
        pairs.push(SentencePair {
            id: format!("{split}-{line}"),
            source: (*src).to_string(),
            reference: (*tgt).to_string(),
            language: language.clone(),
        });
    }
    Corpus::new(language, split, pairs)
}

/// Summarize a nonempty corpus.
pub fn stats(corpus: &Corpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let n_pairs = corpus.len();
    let n_identity = corpus.iter().filter(|p| p.is_identity()).count();
    let total_cp: usize = corpus.iter().map(|p| p.source.chars().count()).sum();
    let total_words: usize = corpus
        .iter()
        .map(|p| p.source.split_whitespace().count())
        .sum();
    Ok(CorpusStats {
        n_pairs,
        n_identity,
        mean_source_codepoints: total_cp as f64 / n_pairs as f64,
        mean_source_words: total_words as f64 / n_pairs as f64,
    })
}

/// The sub-corpus of pairs where the source already equals the reference,
/// in original order. May be empty.
pub fn identity_subset(corpus: &Corpus) -> Corpus {
    let pairs = corpus
        .iter()
        .filter(|p| p.is_identity())
        .cloned()
        .collect();
    Corpus {
        language: corpus.language.clone(),
        split: corpus.split,
        pairs,
    }
}

/// Write a corpus back to two-column format. Reloading the file with the
/// same format yields an equal corpus.
pub fn write_two_column(
    corpus: &Corpus,
    path: impl AsRef<Path>,
    format: TwoColumnFormat,
) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    match format {
        TwoColumnFormat::Tsv => {
            let mut file = fs::File::create(path).map_err(io_err)?;
            for (i, p) in corpus.iter().enumerate() {
                if p.source.contains('\t') || p.reference.contains('\t') {
                    return Err(CorpusError::EmbeddedTab {
                        path: path.display().to_string(),
                        row: i + 1,
                    });
                }
                writeln!(file, "{}\t{}", p.source, p.reference).map_err(io_err)?;
            }
        }
        TwoColumnFormat::Csv => {
            let mut writer = csv::Writer::from_path(path).map_err(|source| CorpusError::Csv {
                path: path.display().to_string(),
                source,
            })?;
            for p in corpus.iter() {
                writer
                    .write_record([&p.source, &p.reference])
                    .map_err(|source| CorpusError::Csv {
                        path: path.display().to_string(),
                        source,
                    })?;
            }
            writer.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang() -> Language {
        Language::builtin("hi").unwrap()
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_three_row_tsv_with_sequential_ids() {
        let f = write_temp("a x\tb x\nc y\td y\ne z\tf z\n");
        let corpus = load_two_column(f.path(), lang(), Split::Test, LoadOptions::tsv()).unwrap();
        assert_eq!(corpus.len(), 3);
        let ids: Vec<&str> = corpus.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["test-1", "test-2", "test-3"]);
        assert_eq!(corpus.pairs()[0].source, "a x");
        assert_eq!(corpus.pairs()[2].reference, "f z");
    }

    #[test]
    fn rejects_row_with_three_fields() {
        let f = write_temp("a\tb\nc\td\te\n");
        let err = load_two_column(f.path(), lang(), Split::Test, LoadOptions::tsv()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("expected 2 fields"), "{msg}");
    }

    #[test]
    fn rejects_empty_file() {
        let f = write_temp("");
        let err = load_two_column(f.path(), lang(), Split::Test, LoadOptions::tsv()).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyFile { .. }));
    }

    #[test]
    fn rejects_invalid_utf8() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"ok\tok\n\xff\xfe\tx\n").unwrap();
        let err = load_two_column(f.path(), lang(), Split::Test, LoadOptions::tsv()).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidUtf8 { .. }));
    }

    #[test]
    fn rejects_empty_reference() {
        let f = write_temp("src\t \n");
        let err = load_two_column(f.path(), lang(), Split::Test, LoadOptions::tsv()).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::EmptyField {
                field: "reference",
                row: 1,
                ..
            }
        ));
    }

    #[test]
    fn header_row_skipped_when_flagged() {
        let f = write_temp("source\treference\na\tb\n");
        let options = LoadOptions {
            has_header: true,
            ..LoadOptions::tsv()
        };
        let corpus = load_two_column(f.path(), lang(), Split::Dev, options).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.pairs()[0].id, "dev-1");
        assert_eq!(corpus.pairs()[0].source, "a");
    }

    #[test]
    fn csv_quoting_preserves_embedded_commas() {
        let f = write_temp("\"a, b\",c\nd,\"e\ne2\"\n");
        let corpus = load_two_column(f.path(), lang(), Split::Test, LoadOptions::csv()).unwrap();
        assert_eq!(corpus.pairs()[0].source, "a, b");
        assert_eq!(corpus.pairs()[1].reference, "e\ne2");
    }

    #[test]
    fn nfc_flag_off_preserves_decomposed_text() {
        // U+0928 U+093C decomposed nukta form vs precomposed U+0929
        let decomposed = "\u{0928}\u{093C}";
        let f = write_temp(&format!("{decomposed}\tok\n"));
        let corpus = load_two_column(f.path(), lang(), Split::Test, LoadOptions::tsv()).unwrap();
        assert_eq!(corpus.pairs()[0].source, decomposed);

        let options = LoadOptions {
            nfc: true,
            ..LoadOptions::tsv()
        };
        let corpus = load_two_column(f.path(), lang(), Split::Test, options).unwrap();
        assert_eq!(corpus.pairs()[0].source, "\u{0929}");
    }

    #[test]
    fn src_tgt_pairs_line_by_line() {
        let src = write_temp("s1\ns2\ns3\ns4\ns5\n");
        let tgt = write_temp("t1\nt2\nt3\nt4\nt5\n");
        let corpus = load_src_tgt(src.path(), tgt.path(), lang(), Split::Train).unwrap();
        assert_eq!(corpus.len(), 5);
        assert_eq!(corpus.pairs()[4].source, "s5");
        assert_eq!(corpus.pairs()[4].reference, "t5");
        assert_eq!(corpus.pairs()[0].id, "train-1");
    }

    #[test]
    fn src_tgt_line_count_mismatch() {
        let src = write_temp("a\nb\nc\nd\ne\n");
        let tgt = write_temp("a\nb\nc\nd\n");
        let err = load_src_tgt(src.path(), tgt.path(), lang(), Split::Train).unwrap_err();
        assert_eq!(err.to_string(), "line count mismatch 5 vs 4");
    }

    #[test]
    fn src_tgt_empty_source_line() {
        let src = write_temp("a\nb\n \nd\n");
        let tgt = write_temp("a\nb\nc\nd\n");
        let err = load_src_tgt(src.path(), tgt.path(), lang(), Split::Train).unwrap_err();
        assert_eq!(err.to_string(), "empty source at line 3");
    }

    #[test]
    fn stats_counts_identity_pairs() {
        let mk = |src: &str, reference: &str, i: usize| SentencePair {
            id: format!("test-{i}"),
            source: src.to_string(),
            reference: reference.to_string(),
            language: lang(),
        };
        let corpus = Corpus::new(
            lang(),
            Split::Test,
            vec![
                mk("same", "same", 1),
                mk("a b", "a c", 2),
                mk("x", "y", 3),
                mk("p q r", "p q z", 4),
            ],
        )
        .unwrap();
        let s = stats(&corpus).unwrap();
        assert_eq!(s.n_pairs, 4);
        assert_eq!(s.n_identity, 1);
        assert!((s.mean_source_words - 7.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn stats_all_identity() {
        let pairs = (0..3)
            .map(|i| SentencePair {
                id: format!("p{i}"),
                source: format!("text {i}"),
                reference: format!("text {i}"),
                language: lang(),
            })
            .collect();
        let corpus = Corpus::new(lang(), Split::Test, pairs).unwrap();
        let s = stats(&corpus).unwrap();
        assert_eq!(s.n_identity, s.n_pairs);
    }

    #[test]
    fn stats_rejects_empty_corpus() {
        let corpus = Corpus::new(lang(), Split::Test, vec![]).unwrap();
        assert!(matches!(stats(&corpus), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn table1_scale_counts() {
        // Synthetic splits at the shared-task Hindi sizes.
        for (split, n) in [(Split::Train, 599), (Split::Dev, 107), (Split::Test, 236)] {
            let body: String = (0..n).map(|i| format!("src {i}\tref {i}\n")).collect();
            let f = write_temp(&body);
            let corpus = load_two_column(f.path(), lang(), split, LoadOptions::tsv()).unwrap();
            assert_eq!(corpus.len(), n);
            assert_eq!(stats(&corpus).unwrap().n_pairs, n);
        }
    }

    #[test]
    fn identity_subset_preserves_order() {
        let mut pairs = Vec::new();
        for i in 0..10 {
            let identity = [2, 5, 9].contains(&i);
            pairs.push(SentencePair {
                id: format!("test-{i}"),
                source: format!("s{i}"),
                reference: if identity {
                    format!("s{i}")
                } else {
                    format!("r{i}")
                },
                language: lang(),
            });
        }
        let corpus = Corpus::new(lang(), Split::Test, pairs).unwrap();
        let sub = identity_subset(&corpus);
        let ids: Vec<&str> = sub.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["test-2", "test-5", "test-9"]);
        assert_eq!(stats(&corpus).unwrap().n_identity, sub.len());
    }

    #[test]
    fn identity_subset_empty_and_full() {
        let none = Corpus::new(
            lang(),
            Split::Test,
            vec![SentencePair {
                id: "a".into(),
                source: "x".into(),
                reference: "y".into(),
                language: lang(),
            }],
        )
        .unwrap();
        assert!(identity_subset(&none).is_empty());

        let all = Corpus::new(
            lang(),
            Split::Test,
            vec![SentencePair {
                id: "a".into(),
                source: "x".into(),
                reference: "x".into(),
                language: lang(),
            }],
        )
        .unwrap();
        assert_eq!(identity_subset(&all).len(), all.len());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let p = SentencePair {
            id: "dup".into(),
            source: "x".into(),
            reference: "y".into(),
            language: lang(),
        };
        let err = Corpus::new(lang(), Split::Test, vec![p.clone(), p]).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { .. }));
    }

    #[test]
    fn tsv_load_never_alters_text() {
        let raw = "नमस्ते दुनिया।\tनमस्ते, दुनिया।\n";
        let f = write_temp(raw);
        let corpus = load_two_column(f.path(), lang(), Split::Test, LoadOptions::tsv()).unwrap();
        let p = &corpus.pairs()[0];
        let line = raw.lines().next().unwrap();
        assert_eq!(format!("{}\t{}", p.source, p.reference), line);
        let rejoined = format!("{}{}", p.source, p.reference);
        assert_eq!(rejoined, line.replace('\t', ""));
    }

    #[test]
    fn round_trip_tsv_and_csv() {
        let f = write_temp("अच्छा लड़का\tअच्छे लड़के\nठीक है\tठीक है\n");
        let corpus = load_two_column(f.path(), lang(), Split::Dev, LoadOptions::tsv()).unwrap();

        for format in [TwoColumnFormat::Tsv, TwoColumnFormat::Csv] {
            let out = tempfile::NamedTempFile::new().unwrap();
            write_two_column(&corpus, out.path(), format).unwrap();
            let options = LoadOptions {
                format,
                ..LoadOptions::tsv()
            };
            let reloaded = load_two_column(out.path(), lang(), Split::Dev, options).unwrap();
            assert_eq!(corpus, reloaded);
        }
    }
}
