//! Corpus-to-memory text pipeline: sentence segmentation, tokenization,
//! stopword removal, and sentence-by-sentence ingestion.
//!
//! The preprocessed corpus format is UTF-8 text with one sentence per line,
//! single-space-separated lowercase tokens, newline-terminated. Stopword
//! files carry one token per line; `#` starts a comment.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::model::Model;

/// Words that end in a period without ending a sentence. Checked after
/// stripping leading punctuation and lowercasing.
pub const ABBREVIATIONS: &[&str] = &[
    "dr.", "mr.", "mrs.", "ms.", "prof.", "rev.", "hon.", "gen.", "col.", "capt.", "lt.",
    "sgt.", "gov.", "sen.", "rep.", "sr.", "jr.", "st.", "mt.", "vs.", "etc.", "e.g.", "i.e.",
    "u.s.", "u.k.", "u.n.", "inc.", "ltd.", "co.", "corp.", "dept.", "est.", "fig.", "figs.",
    "no.", "nos.", "vol.", "vols.", "approx.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.",
    "aug.", "sep.", "sept.", "oct.", "nov.", "dec.",
];

const BUILTIN_STOPWORDS: &str = include_str!("stopwords.txt");

/// A case-insensitive stopword set.
#[derive(Debug, Clone)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    /// The built-in list of 179 common English words shipped with the crate.
    pub fn builtin() -> Self {
        let words = BUILTIN_STOPWORDS
            .lines()
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        Self { words }
    }

    /// Load a custom list: one token per line, `#` comments allowed.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let words = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        Ok(Self { words })
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(&token.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Rule-based sentence segmentation.
///
/// A sentence ends at '.', '?', or '!' followed by whitespace and then an
/// uppercase letter or digit, unless the word ending at a period is in the
/// abbreviation guard table. Trailing unterminated text forms a final
/// sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '.' || c == '?' || c == '!' {
            let mut j = i + 1;
            let mut saw_space = false;
            while j < chars.len() && chars[j].is_whitespace() {
                saw_space = true;
                j += 1;
            }
            let next_opens = j < chars.len() && (chars[j].is_uppercase() || chars[j].is_ascii_digit());
            let guarded = c == '.' && is_guarded_abbreviation(&chars[start..=i]);
            if saw_space && next_opens && !guarded {
                let sentence: String = chars[start..=i].iter().collect();
                let sentence = sentence.trim();
                if !sentence.is_empty() {
                    sentences.push(sentence.to_string());
                }
                start = j;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let tail = tail.trim();
        if !tail.is_empty() {
            sentences.push(tail.to_string());
        }
    }
    sentences
}

/// Does the text end in a guarded abbreviation (e.g. "Dr.")?
fn is_guarded_abbreviation(upto: &[char]) -> bool {
    let word_start = upto
        .iter()
        .rposition(|c| c.is_whitespace())
        .map(|p| p + 1)
        .unwrap_or(0);
    let word: String = upto[word_start..].iter().collect::<String>().to_lowercase();
    let word = word.trim_start_matches(|c: char| !c.is_alphanumeric());
    ABBREVIATIONS.contains(&word)
}

/// Lowercase, split on whitespace, strip punctuation from token edges, and
/// drop anything left empty. Interior punctuation (hyphens, apostrophes)
/// survives.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|raw| {
            raw.to_lowercase()
                .trim_matches(|c: char| !c.is_alphanumeric())
                .to_string()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Order-preserving stopword filter.
pub fn remove_stopwords(tokens: Vec<String>, stops: &StopwordList) -> Vec<String> {
    tokens.into_iter().filter(|t| !stops.contains(t)).collect()
}

/// Run the full preprocessing pipeline over one text.
fn preprocess(text: &str, stops: &StopwordList, drop_numerals: bool) -> Vec<Vec<String>> {
    split_sentences(text)
        .iter()
        .map(|s| {
            let mut tokens = remove_stopwords(tokenize(s), stops);
            if drop_numerals {
                tokens.retain(|t| !t.chars().all(|c| c.is_ascii_digit()));
            }
            tokens
        })
        .filter(|tokens| !tokens.is_empty())
        .collect()
}

/// Preprocess a raw text file into the corpus format. Returns the number of
/// lines (sentences) written; empty sentences are omitted.
pub fn preprocess_text(
    in_path: impl AsRef<Path>,
    out_path: impl AsRef<Path>,
    stops: &StopwordList,
    drop_numerals: bool,
) -> Result<usize> {
    let text = fs::read_to_string(in_path)?;
    let sentences = preprocess(&text, stops, drop_numerals);
    let mut out = String::new();
    for tokens in &sentences {
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    fs::write(out_path, out)?;
    Ok(sentences.len())
}

/// Counts from a corpus ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestReport {
    /// Sentences fed into the store (each advances the chunk counter).
    pub ingested: usize,
    /// Blank lines skipped with a warning count.
    pub skipped: usize,
}

/// Read a preprocessed corpus into the store, one sentence per line.
pub fn read_corpus(
    model: &mut Model,
    path: impl AsRef<Path>,
    encode_time: bool,
) -> Result<IngestReport> {
    let text = fs::read_to_string(path)?;
    let mut report = IngestReport {
        ingested: 0,
        skipped: 0,
    };
    for line in text.lines() {
        let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_string()).collect();
        if tokens.is_empty() {
            report.skipped += 1;
            continue;
        }
        model.ingest_sentence(&tokens, encode_time)?;
        report.ingested += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;

    #[test]
    fn builtin_stopword_list_is_fixed() {
        let stops = StopwordList::builtin();
        assert_eq!(stops.len(), 179);
        assert!(stops.contains("the"));
        assert!(stops.contains("and"));
        assert!(stops.contains("The"));
        assert!(!stops.contains("flood"));
    }

    #[test]
    fn sentence_splitting_rules() {
        assert!(split_sentences("").is_empty());
        assert_eq!(split_sentences("It rained"), vec!["It rained"]);
        assert_eq!(
            split_sentences("Dr. Smith arrived. It rained."),
            vec!["Dr. Smith arrived.", "It rained."]
        );
        assert_eq!(
            split_sentences("The house flooded. We left."),
            vec!["The house flooded.", "We left."]
        );
        // Lowercase continuation does not split.
        assert_eq!(
            split_sentences("the U.S. government responded"),
            vec!["the U.S. government responded"]
        );
        // Question and exclamation marks split too.
        assert_eq!(
            split_sentences("Did it flood? Yes! Badly."),
            vec!["Did it flood?", "Yes!", "Badly."]
        );
        // Digits open a sentence.
        assert_eq!(
            split_sentences("We left early. 40 homes flooded."),
            vec!["We left early.", "40 homes flooded."]
        );
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize("The house, flooded!"), vec!["the", "house", "flooded"]);
        assert!(tokenize("...").is_empty());
        assert_eq!(tokenize("FEMA-led"), vec!["fema-led"]);
        assert_eq!(tokenize("don't stop"), vec!["don't", "stop"]);
    }

    #[test]
    fn stopword_removal_preserves_order() {
        let stops = StopwordList::builtin();
        let tokens = vec!["the".to_string(), "flood".to_string()];
        assert_eq!(remove_stopwords(tokens, &stops), vec!["flood"]);
        assert!(remove_stopwords(Vec::new(), &stops).is_empty());
        let all_stop = vec!["and".to_string(), "the".to_string()];
        assert!(remove_stopwords(all_stop, &stops).is_empty());
    }

    #[test]
    fn preprocess_writes_expected_lines() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("raw.txt");
        let output = dir.path().join("corpus.txt");
        std::fs::write(&input, "The house flooded. We left.").unwrap();
        let stops = StopwordList::builtin();
        let lines = preprocess_text(&input, &output, &stops, false).unwrap();
        assert_eq!(lines, 2);
        let text = std::fs::read_to_string(&output).unwrap();
        assert_eq!(text, "house flooded\nleft\n");

        // Re-running is byte-identical.
        let again = dir.path().join("corpus2.txt");
        preprocess_text(&input, &again, &stops, false).unwrap();
        assert_eq!(std::fs::read_to_string(&again).unwrap(), text);

        // Empty input produces an empty file.
        std::fs::write(&input, "").unwrap();
        assert_eq!(preprocess_text(&input, &output, &stops, false).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&output).unwrap(), "");
    }

    #[test]
    fn preprocess_is_idempotent_at_token_level() {
        let stops = StopwordList::builtin();
        let text = "Dr. Smith arrived. The town of Eastville flooded badly! FEMA-led teams helped 40 families.";
        let once = preprocess(text, &stops, false);
        let rejoined: String = once
            .iter()
            .map(|s| s.join(" "))
            .collect::<Vec<_>>()
            .join("\n");
        let twice = preprocess(&rejoined, &stops, false);
        let stream_once: Vec<&String> = once.iter().flatten().collect();
        let stream_twice: Vec<&String> = twice.iter().flatten().collect();
        assert_eq!(stream_once, stream_twice);
    }

    #[test]
    fn numerals_flag_drops_digit_tokens() {
        let stops = StopwordList::builtin();
        let kept = preprocess("40 homes flooded.", &stops, false);
        assert_eq!(kept, vec![vec!["40", "homes", "flooded"]]);
        let dropped = preprocess("40 homes flooded.", &stops, true);
        assert_eq!(dropped, vec![vec!["homes", "flooded"]]);
    }

    #[test]
    fn read_corpus_feeds_the_store_line_by_line() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus.txt");
        std::fs::write(&corpus, "house flooded\n\nleft town\n").unwrap();
        let mut model = Model::new(ModelConfig {
            dimension: 64,
            seed: 1,
            ..ModelConfig::default()
        })
        .unwrap();
        let report = read_corpus(&mut model, &corpus, false).unwrap();
        assert_eq!(report.ingested, 2);
        assert_eq!(report.skipped, 1);
        assert_eq!(model.chunk_counter(), 2);
        assert_eq!(model.lexicon_len(), 4);
        assert!(read_corpus(&mut model, dir.path().join("missing.txt"), false).is_err());
    }

    #[test]
    fn duplicate_sentences_change_memory_but_not_the_lexicon() {
        let dir = tempfile::tempdir().unwrap();
        let single = dir.path().join("single.txt");
        let double = dir.path().join("double.txt");
        std::fs::write(&single, "house flooded badly\n").unwrap();
        std::fs::write(&double, "house flooded badly\nhouse flooded badly\n").unwrap();

        let build = |path: &std::path::Path| {
            let mut m = Model::new(ModelConfig {
                dimension: 128,
                seed: 2,
                ..ModelConfig::default()
            })
            .unwrap();
            read_corpus(&mut m, path, false).unwrap();
            m
        };
        let once = build(&single);
        let twice = build(&double);
        assert_eq!(once.lexicon_len(), twice.lexicon_len());
        let m1 = once.lexicon_entry("house").unwrap().memory();
        let m2 = twice.lexicon_entry("house").unwrap().memory();
        // Linearity: the duplicated corpus doubles the trace.
        let diff = m2.add(&m1.scale(-2.0)).unwrap().norm();
        assert!(diff / m1.norm() < 1e-9);
    }
}
