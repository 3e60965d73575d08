//! Pest vocabulary and fuzzy labelling of query records.
//!
//! A record is pest-related when some token window of its question (or,
//! failing that, its answer) is within one edit of a pest name or alias.
//! Edits are Damerau-Levenshtein operations: substitution, insertion,
//! deletion and adjacent transposition.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{self, normalize_text, KccRecord};

const REFERENCE_LEXICON: &str = include_str!("../data/pests.json");

/// Names shorter than this many characters only match exactly.
pub const MIN_FUZZY_CHARS: usize = 4;
const MAX_NAME_TOKENS: usize = 4;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("alias `{alias}` is listed under both `{first}` and `{second}`")]
    AliasCollision {
        alias: String,
        first: String,
        second: String,
    },
    #[error("duplicate pest id `{0}`")]
    DuplicateId(String),
    #[error("pest `{id}`: invalid name `{name}`: {reason}")]
    InvalidName {
        id: String,
        name: String,
        reason: String,
    },
    #[error("lexicon TSV line {line}: {message}")]
    Tsv { line: usize, message: String },
    #[error("malformed labelled CSV: {0}")]
    Labelled(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PestEntry {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone)]
struct NameForm {
    entry: usize,
    text: String,
    tokens: usize,
    chars: usize,
}

/// Validated, immutable pest vocabulary.
#[derive(Debug, Clone)]
pub struct PestLexicon {
    entries: Vec<PestEntry>,
    forms: Vec<NameForm>,
}

impl PestLexicon {
    pub fn new(entries: Vec<PestEntry>) -> Result<Self, LexiconError> {
        let mut owner: HashMap<String, usize> = HashMap::new();
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut forms = Vec::new();
        for (idx, entry) in entries.iter().enumerate() {
            if entry.id.trim().is_empty() {
                return Err(LexiconError::InvalidName {
                    id: entry.id.clone(),
                    name: entry.name.clone(),
                    reason: "empty pest id".into(),
                });
            }
            if ids.insert(entry.id.as_str(), idx).is_some() {
                return Err(LexiconError::DuplicateId(entry.id.clone()));
            }
            for text in std::iter::once(&entry.name).chain(&entry.aliases) {
                validate_name(&entry.id, text)?;
                match owner.get(text) {
                    Some(&other) if other != idx => {
                        return Err(LexiconError::AliasCollision {
                            alias: text.clone(),
                            first: entries[other].id.clone(),
                            second: entry.id.clone(),
                        })
                    }
                    Some(_) => continue,
                    None => {
                        owner.insert(text.clone(), idx);
                    }
                }
                forms.push(NameForm {
                    entry: idx,
                    text: text.clone(),
                    tokens: text.split(' ').count(),
                    chars: text.chars().count(),
                });
            }
        }
        Ok(Self { entries, forms })
    }

    /// The bundled vocabulary covering the common field-crop pests.
    pub fn reference() -> Self {
        Self::from_json(REFERENCE_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        Self::new(serde_json::from_str(text)?)
    }

    /// Tab-separated `id`, `name`, `aliases` (pipe-separated), with an
    /// optional header row starting with `id`.
    pub fn from_tsv(text: &str) -> Result<Self, LexiconError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || (lineno == 0 && line.starts_with("id\t")) {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 || cols.len() > 3 {
                return Err(LexiconError::Tsv {
                    line: lineno + 1,
                    message: format!("expected 2 or 3 columns, found {}", cols.len()),
                });
            }
            let aliases = cols
                .get(2)
                .map(|a| {
                    a.split('|')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                })
                .unwrap_or_default();
            entries.push(PestEntry {
                id: cols[0].trim().to_string(),
                name: cols[1].trim().to_string(),
                aliases,
            });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[PestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("entries serialize")
    }
}

fn validate_name(id: &str, name: &str) -> Result<(), LexiconError> {
    let invalid = |reason: &str| LexiconError::InvalidName {
        id: id.to_string(),
        name: name.to_string(),
        reason: reason.to_string(),
    };
    if name.is_empty() {
        return Err(invalid("empty name"));
    }
    if normalize_text(name) != name {
        return Err(invalid("not in normalized form"));
    }
    if name.split(' ').count() > MAX_NAME_TOKENS {
        return Err(invalid("more than 4 tokens"));
    }
    Ok(())
}

/// Load a lexicon from a `.json` or `.tsv` file (JSON is assumed when the
/// content starts with `[`).
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<PestLexicon, LexiconError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let is_json =
        path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('[');
    if is_json {
        PestLexicon::from_json(&text)
    } else {
        PestLexicon::from_tsv(&text)
    }
}

/// Damerau-Levenshtein distance between `candidate` and `name` when it is at
/// most one, compared case-insensitively.
pub fn match_distance(candidate: &str, name: &str) -> Option<u8> {
    let a: Vec<char> = candidate.chars().flat_map(char::to_lowercase).collect();
    let b: Vec<char> = name.chars().flat_map(char::to_lowercase).collect();
    within_one(&a, &b)
}

fn within_one(a: &[char], b: &[char]) -> Option<u8> {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if long.len() - short.len() > 1 {
        return None;
    }
    let prefix = short.iter().zip(long).take_while(|(x, y)| x == y).count();
    if prefix == long.len() {
        return Some(0);
    }
    if short.len() == long.len() {
        let i = prefix;
        if short[i + 1..] == long[i + 1..] {
            return Some(1);
        }
        let transposed = i + 1 < short.len()
            && short[i] == long[i + 1]
            && short[i + 1] == long[i]
            && short[i + 2..] == long[i + 2..];
        return transposed.then_some(1);
    }
    (short[prefix..] == long[prefix + 1..]).then_some(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Question,
    Answer,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Question => "question",
            Source::Answer => "answer",
        })
    }
}

impl std::str::FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "question" => Ok(Source::Question),
            "answer" => Ok(Source::Answer),
            other => Err(format!("unknown label source `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PestLabel {
    pub pest_id: String,
    pub matched_text: String,
    pub source: Source,
    pub distance: u8,
}

/// Best pest match for one record, or `None`.
///
/// Question tokens are scanned before answer tokens; among equal distances
/// the earlier source, then the earlier token position, then the earlier
/// lexicon entry wins.
pub fn label_query(record: &KccRecord, lexicon: &PestLexicon) -> Option<PestLabel> {
    let mut best: Option<(u8, Source, &str, usize)> = None;
    let mut window_buf = String::new();
    for (source, text) in [
        (Source::Question, record.query_text.as_str()),
        (Source::Answer, record.answer_text.as_str()),
    ] {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        for pos in 0..tokens.len() {
            for form in &lexicon.forms {
                if pos + form.tokens > tokens.len() {
                    continue;
                }
                window_buf.clear();
                for (i, tok) in tokens[pos..pos + form.tokens].iter().enumerate() {
                    if i > 0 {
                        window_buf.push(' ');
                    }
                    window_buf.push_str(tok);
                }
                let distance = if form.chars < MIN_FUZZY_CHARS {
                    (window_buf.to_lowercase() == form.text).then_some(0)
                } else {
                    match_distance(&window_buf, &form.text)
                };
                let Some(d) = distance else { continue };
                if best.is_none_or(|(bd, ..)| d < bd) {
                    let start = byte_offset(text, &tokens, pos);
                    let end = byte_offset(text, &tokens, pos + form.tokens - 1)
                        + tokens[pos + form.tokens - 1].len();
                    best = Some((d, source, &text[start..end], form.entry));
                    if d == 0 {
                        return best.map(|b| to_label(b, lexicon));
                    }
                }
            }
        }
    }
    best.map(|b| to_label(b, lexicon))
}

fn to_label(
    (distance, source, text, entry): (u8, Source, &str, usize),
    lexicon: &PestLexicon,
) -> PestLabel {
    PestLabel {
        pest_id: lexicon.entries[entry].id.clone(),
        matched_text: text.to_string(),
        source,
        distance,
    }
}

fn byte_offset(text: &str, tokens: &[&str], index: usize) -> usize {
    tokens[index].as_ptr() as usize - text.as_ptr() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub labelled: usize,
    pub total: usize,
    /// `labelled / total`, reported as 0 for an empty corpus.
    pub fraction: f64,
}

/// Label every record, keeping only pest-related ones in input order.
pub fn label_corpus(
    records: &[KccRecord],
    lexicon: &PestLexicon,
) -> (Vec<(KccRecord, PestLabel)>, LabelStats) {
    let labelled: Vec<(KccRecord, PestLabel)> = records
        .par_iter()
        .filter_map(|r| label_query(r, lexicon).map(|l| (r.clone(), l)))
        .collect();
    let total = records.len();
    let stats = LabelStats {
        labelled: labelled.len(),
        total,
        fraction: if total == 0 {
            0.0
        } else {
            labelled.len() as f64 / total as f64
        },
    };
    (labelled, stats)
}

const LABEL_COLUMNS: [&str; 4] = ["pest_id", "matched_text", "source", "distance"];

/// Labelled CSV: the record columns followed by the label columns.
pub fn write_labelled<W: Write>(
    output: W,
    labelled: &[(KccRecord, PestLabel)],
) -> Result<(), LexiconError> {
    let mut writer = csv::Writer::from_writer(output);
    let mut header: Vec<&str> = ingest::default_headers().to_vec();
    header.extend(LABEL_COLUMNS);
    writer.write_record(&header)?;
    for (rec, label) in labelled {
        let mut row = ingest::record_fields(rec).to_vec();
        row.push(label.pest_id.clone());
        row.push(label.matched_text.clone());
        row.push(label.source.to_string());
        row.push(label.distance.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_labelled<R: Read>(input: R) -> Result<Vec<(KccRecord, PestLabel)>, LexiconError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    let expected: Vec<&str> = ingest::default_headers()
        .into_iter()
        .chain(LABEL_COLUMNS)
        .collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(LexiconError::Labelled("unexpected header".into()));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |what: &str| LexiconError::Labelled(format!("row {}: {what}", i + 1));
        let created_on = ingest::parse_timestamp(&row[10]).ok_or_else(|| bad("bad CreatedOn"))?;
        let record = KccRecord {
            season: ingest::Season::parse(&row[0]),
            sector: row[1].to_string(),
            category: row[2].to_string(),
            crop: row[3].to_string(),
            query_type: row[4].to_string(),
            query_text: row[5].to_string(),
            answer_text: row[6].to_string(),
            state: row[7].to_string(),
            district: row[8].to_string(),
            block: row[9].to_string(),
            created_on,
        };
        let label = PestLabel {
            pest_id: row[11].to_string(),
            matched_text: row[12].to_string(),
            source: row[13].parse().map_err(|e: String| bad(&e))?,
            distance: row[14].parse().map_err(|_| bad("bad distance"))?,
        };
        out.push((record, label));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_timestamp, Season};

    fn record(question: &str, answer: &str) -> KccRecord {
        KccRecord {
            season: Season::Rabi,
            sector: "AGRICULTURE".into(),
            category: "Pulses".into(),
            crop: "Black Gram (urd bean)".into(),
            query_type: "Plant Protection".into(),
            query_text: question.into(),
            answer_text: answer.into(),
            state: "TAMILNADU".into(),
            district: "TIRUCHIRAPPALLI".into(),
            block: "PULLAMBADI".into(),
            created_on: parse_timestamp("2015-03-14 15:35:05.087").unwrap(),
        }
    }

    /// Optimal-string-alignment DP; equals true Damerau-Levenshtein for
    /// distances up to one.
    fn dl_oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            d[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = (d[i - 1][j] + 1)
                    .min(d[i][j - 1] + 1)
                    .min(d[i - 1][j - 1] + cost);
                if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                    d[i][j] = d[i][j].min(d[i - 2][j - 2] + 1);
                }
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn distance_examples() {
        assert_eq!(match_distance("aphid", "aphid"), Some(0));
        assert_eq!(dl_oracle("ahpid", "aphid"), 1);
        assert_eq!(match_distance("ahpid", "aphid"), Some(1));
        assert_eq!(dl_oracle("stemborar", "stemborer"), 1);
        assert_eq!(match_distance("stemborar", "stemborer"), Some(1));
        assert_eq!(dl_oracle("stemb", "stemborer"), 4);
        assert_eq!(match_distance("stemb", "stemborer"), None);
        assert_eq!(match_distance("APHID", "aphid"), Some(0));
        assert_eq!(match_distance("", "a"), Some(1));
        assert_eq!(match_distance("", ""), Some(0));
    }

    #[test]
    fn distance_exhaustive_over_small_alphabet() {
        let alphabet = ['a', 'b', 'c'];
        let mut words = vec![String::new()];
        let mut frontier = vec![String::new()];
        for _ in 0..4 {
            frontier = frontier
                .iter()
                .flat_map(|w| alphabet.iter().map(move |c| format!("{w}{c}")))
                .collect();
            words.extend(frontier.iter().cloned());
        }
        for a in &words {
            for b in &words {
                let oracle = dl_oracle(a, b);
                let expected = (oracle <= 1).then_some(oracle as u8);
                assert_eq!(match_distance(a, b), expected, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn reference_lexicon_has_named_pests() {
        let lex = PestLexicon::reference();
        for id in [
            "whitefly",
            "bollworm",
            "armyworm",
            "locust",
            "aphid",
            "bug",
            "stemborer",
            "termite",
            "insect",
            "pod borer",
        ] {
            assert!(lex.contains_id(id), "{id}");
        }
    }

    #[test]
    fn empty_lexicon_is_valid() {
        let lex = PestLexicon::from_json("[]").unwrap();
        assert!(lex.is_empty());
        assert_eq!(label_query(&record("aphid", ""), &lex), None);
    }

    #[test]
    fn alias_collision_names_both_ids() {
        let json = r#"[{"id":"aphid","name":"aphid","aliases":[]},
                       {"id":"plant louse","name":"plant louse","aliases":["aphid"]}]"#;
        let err = PestLexicon::from_json(json).unwrap_err().to_string();
        assert!(
            err.contains("`aphid`") && err.contains("`plant louse`"),
            "{err}"
        );
    }

    #[test]
    fn rejects_unnormalized_and_duplicate_ids() {
        assert!(PestLexicon::from_json(r#"[{"id":"a","name":"White Fly"}]"#).is_err());
        assert!(PestLexicon::from_json(r#"[{"id":"a","name":"a b c d e"}]"#).is_err());
        let dup = r#"[{"id":"a","name":"aaaa"},{"id":"a","name":"bbbb"}]"#;
        assert!(matches!(
            PestLexicon::from_json(dup),
            Err(LexiconError::DuplicateId(_))
        ));
    }

    #[test]
    fn tsv_format_loads() {
        let tsv = "id\tname\taliases\naphid\taphid\taphids|aphis\nbug\tbug\t\n";
        let lex = PestLexicon::from_tsv(tsv).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.entries()[0].aliases, vec!["aphids", "aphis"]);
        assert!(PestLexicon::from_tsv("only-one-column\n").is_err());
    }

    #[test]
    fn table1_record_labels_pod_borer() {
        let rec = record(
            "pod borer in black gram",
            "recommended for spray quinalphos 2ml liter",
        );
        let label = label_query(&rec, &PestLexicon::reference()).unwrap();
        assert_eq!(label.pest_id, "pod borer");
        assert_eq!(label.distance, 0);
        assert_eq!(label.source, Source::Question);
        assert_eq!(label.matched_text, "pod borer");
    }

    #[test]
    fn no_pest_tokens_gives_none() {
        let rec = record("urea dose for wheat", "apply 50 kg per acre");
        assert_eq!(label_query(&rec, &PestLexicon::reference()), None);
    }

    #[test]
    fn alias_path_wins_at_distance_zero() {
        let rec = record("aphids attack on mustard", "");
        let label = label_query(&rec, &PestLexicon::reference()).unwrap();
        assert_eq!(label.pest_id, "aphid");
        assert_eq!(label.matched_text, "aphids");
        assert_eq!(label.distance, 0);

        let no_alias = PestLexicon::from_json(r#"[{"id":"aphid","name":"aphid"}]"#).unwrap();
        let label = label_query(&rec, &no_alias).unwrap();
        assert_eq!(label.distance, 1);
    }

    #[test]
    fn short_names_need_exact_match() {
        let lex = PestLexicon::reference();
        assert_eq!(label_query(&record("big bag of seed", ""), &lex), None);
        let label = label_query(&record("bug on paddy", ""), &lex).unwrap();
        assert_eq!(label.pest_id, "bug");
    }

    #[test]
    fn question_beats_answer_on_ties() {
        let lex = PestLexicon::reference();
        let label = label_query(&record("whitefli problem", "spray for aphidd"), &lex).unwrap();
        assert_eq!(label.source, Source::Question);
        assert_eq!(label.pest_id, "whitefly");
        // an exact answer match beats a fuzzy question match
        let label = label_query(&record("whitefli problem", "spray for aphid"), &lex).unwrap();
        assert_eq!(label.source, Source::Answer);
        assert_eq!(label.distance, 0);
    }

    #[test]
    fn label_corpus_counts_and_empty() {
        let lex = PestLexicon::reference();
        let (out, stats) = label_corpus(&[], &lex);
        assert!(out.is_empty());
        assert_eq!((stats.labelled, stats.total, stats.fraction), (0, 0, 0.0));
        let recs = vec![
            record("aphid", ""),
            record("wheat", ""),
            record("locusts", ""),
        ];
        let (out, stats) = label_corpus(&recs, &lex);
        assert_eq!(stats.labelled, 2);
        assert_eq!(out[1].1.pest_id, "locust");
    }

    #[test]
    fn labelled_csv_round_trip() {
        let lex = PestLexicon::reference();
        let recs = vec![record("aphid, \"quoted\"", "x"), record("stem borer", "")];
        let (labelled, _) = label_corpus(&recs, &lex);
        let mut buf = Vec::new();
        write_labelled(&mut buf, &labelled).unwrap();
        assert_eq!(read_labelled(buf.as_slice()).unwrap(), labelled);
    }
}
