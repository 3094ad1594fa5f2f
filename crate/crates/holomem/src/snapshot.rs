//! Versioned text snapshots of the full model state.
//!
//! The format is line-oriented UTF-8: a version header, `key=value` config
//! lines, the oscillator bank and its tables, the time bases, the order
//! marker and placeholder, then one record per lexicon token. Floats are
//! written with 17 significant digits so every f64 round-trips exactly;
//! save -> load -> save is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::{ModelConfig, RecallPolicy};
use crate::error::{Error, Result};
use crate::hrr::{HoloVector, Permutation};
use crate::model::{LexiconEntry, Model};
use crate::time::{BankParams, OscillatorBank, OSCILLATOR_COUNT, SELECTIONS_PER_ELEMENT, TIME_VECTOR_LEN};

/// Header line of the current snapshot format.
pub const SNAPSHOT_VERSION: &str = "HOLOMEM 1";

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_floats(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}

/// Serialize a model to snapshot text.
pub fn to_text(model: &Model) -> String {
    let cfg = model.config();
    let mut out = String::new();
    let _ = writeln!(out, "{SNAPSHOT_VERSION}");
    let _ = writeln!(out, "config.n={}", cfg.dimension);
    let _ = writeln!(out, "config.seed={}", cfg.seed);
    let _ = writeln!(out, "config.time_scale={}", fmt_f64(cfg.time_scale));
    let _ = writeln!(out, "config.sigma2={}", fmt_f64(cfg.frequency_variance));
    let _ = writeln!(out, "config.beta={}", fmt_f64(cfg.selection_scale));
    let _ = writeln!(out, "config.noise_sd={}", fmt_f64(cfg.noise_sd));
    let _ = writeln!(
        out,
        "config.retrieval_threshold={}",
        fmt_f64(cfg.retrieval_threshold)
    );
    let _ = writeln!(
        out,
        "config.recenter_frequencies={}",
        u8::from(cfg.recenter_frequencies)
    );
    let _ = writeln!(
        out,
        "config.max_pair_distance={}",
        cfg.max_pair_distance
            .map(|d| d.to_string())
            .unwrap_or_else(|| "none".to_string())
    );
    let _ = writeln!(out, "config.policy.method={}", cfg.policy.method);
    let _ = writeln!(out, "config.policy.p={}", cfg.policy.top_p);
    let _ = writeln!(
        out,
        "config.policy.time_threshold={}",
        fmt_f64(cfg.policy.time_threshold)
    );
    let _ = writeln!(
        out,
        "config.policy.retrieval_threshold={}",
        fmt_f64(cfg.policy.retrieval_threshold)
    );
    let _ = writeln!(out, "counter={}", model.chunk_counter());

    let bank = model.bank();
    let _ = writeln!(out, "bank.theta={}", fmt_floats(bank.thetas().as_slice()));
    let _ = writeln!(out, "bank.phi={}", fmt_floats(bank.phis().as_slice()));
    let selection: Vec<String> = bank
        .selection_rows()
        .iter()
        .flat_map(|row| row.iter().map(|j| j.to_string()))
        .collect();
    let _ = writeln!(out, "bank.selection={}", selection.join(" "));
    let trig: Vec<String> = bank
        .trig_rows()
        .iter()
        .flat_map(|row| row.iter().map(|&b| u8::from(b).to_string()))
        .collect();
    let _ = writeln!(out, "bank.trig={}", trig.join(" "));

    let _ = writeln!(out, "bases={}", model.time_bases().len());
    for base in model.time_bases() {
        let _ = writeln!(out, "base={}", fmt_floats(base.as_slice()));
    }
    let _ = writeln!(out, "placeholder={}", fmt_floats(model.placeholder().as_slice()));
    let permutation: Vec<String> = model
        .order_marker()
        .map()
        .iter()
        .map(|i| i.to_string())
        .collect();
    let _ = writeln!(out, "permutation={}", permutation.join(" "));

    let tokens = model.list_tokens();
    let _ = writeln!(out, "tokens={}", tokens.len());
    for info in tokens {
        let entry = model.lexicon_entry(&info.token).expect("listed token");
        let _ = writeln!(out, "token={}", info.token);
        let _ = writeln!(out, "token.slot={}", u8::from(entry.is_slot()));
        let _ = writeln!(out, "token.count={}", entry.count());
        let _ = writeln!(out, "token.e={}", fmt_floats(entry.environment().as_slice()));
        let _ = writeln!(out, "token.m={}", fmt_floats(entry.memory().as_slice()));
        let _ = writeln!(out, "token.mt={}", fmt_floats(entry.time_memory().as_slice()));
    }
    let _ = writeln!(out, "end");
    out
}

/// Write a snapshot file.
pub fn save(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_text(model))?;
    Ok(())
}

/// Load a model from a snapshot file.
pub fn load(path: impl AsRef<Path>) -> Result<Model> {
    from_text(&fs::read_to_string(path)?)
}

struct Reader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines(),
            line_no: 0,
        }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        self.line_no += 1;
        self.lines
            .next()
            .ok_or_else(|| Error::CorruptSnapshot(format!("unexpected end of file at line {}", self.line_no)))
    }

    /// Read `key=value` and return the value.
    fn value_of(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        let (found, value) = line.split_once('=').ok_or_else(|| {
            Error::CorruptSnapshot(format!("line {}: expected {key}=..., got {line:?}", self.line_no))
        })?;
        if found != key {
            return Err(Error::CorruptSnapshot(format!(
                "line {}: expected key {key:?}, got {found:?}",
                self.line_no
            )));
        }
        Ok(value)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let line_no = self.line_no + 1;
        let value = self.value_of(key)?;
        value.parse().map_err(|_| {
            Error::CorruptSnapshot(format!("line {line_no}: cannot parse {key} value {value:?}"))
        })
    }

    fn floats(&mut self, key: &str, expected: usize) -> Result<Vec<f64>> {
        let line_no = self.line_no + 1;
        let value = self.value_of(key)?;
        let parsed: std::result::Result<Vec<f64>, _> =
            value.split(' ').map(str::parse).collect();
        let floats = parsed.map_err(|_| {
            Error::CorruptSnapshot(format!("line {line_no}: bad float in {key}"))
        })?;
        if floats.len() != expected {
            return Err(Error::CorruptSnapshot(format!(
                "line {line_no}: {key} has {} values, expected {expected}",
                floats.len()
            )));
        }
        Ok(floats)
    }

    fn ints(&mut self, key: &str, expected: usize) -> Result<Vec<usize>> {
        let line_no = self.line_no + 1;
        let value = self.value_of(key)?;
        let parsed: std::result::Result<Vec<usize>, _> =
            value.split(' ').map(str::parse).collect();
        let ints = parsed.map_err(|_| {
            Error::CorruptSnapshot(format!("line {line_no}: bad integer in {key}"))
        })?;
        if ints.len() != expected {
            return Err(Error::CorruptSnapshot(format!(
                "line {line_no}: {key} has {} values, expected {expected}",
                ints.len()
            )));
        }
        Ok(ints)
    }
}

/// Parse snapshot text back into a model.
pub fn from_text(text: &str) -> Result<Model> {
    let mut r = Reader::new(text);
    let header = r.next_line()?;
    if header != SNAPSHOT_VERSION {
        if header.starts_with("HOLOMEM ") {
            return Err(Error::IncompatibleSnapshot {
                found: header.to_string(),
                expected: SNAPSHOT_VERSION.to_string(),
            });
        }
        return Err(Error::CorruptSnapshot(format!(
            "missing version header, got {header:?}"
        )));
    }

    let dimension: usize = r.parse("config.n")?;
    let seed: u64 = r.parse("config.seed")?;
    let time_scale: f64 = r.parse("config.time_scale")?;
    let frequency_variance: f64 = r.parse("config.sigma2")?;
    let selection_scale: f64 = r.parse("config.beta")?;
    let noise_sd: f64 = r.parse("config.noise_sd")?;
    let retrieval_threshold: f64 = r.parse("config.retrieval_threshold")?;
    let recenter: u8 = r.parse("config.recenter_frequencies")?;
    let max_pair_distance = {
        let value = r.value_of("config.max_pair_distance")?;
        if value == "none" {
            None
        } else {
            Some(value.parse::<usize>().map_err(|_| {
                Error::CorruptSnapshot(format!("bad max_pair_distance {value:?}"))
            })?)
        }
    };
    let method = r.value_of("config.policy.method")?.parse()?;
    let top_p: usize = r.parse("config.policy.p")?;
    let time_threshold: f64 = r.parse("config.policy.time_threshold")?;
    let policy_retrieval_threshold: f64 = r.parse("config.policy.retrieval_threshold")?;
    let counter: u64 = r.parse("counter")?;

    let config = ModelConfig {
        dimension,
        seed,
        time_scale,
        frequency_variance,
        selection_scale,
        noise_sd,
        retrieval_threshold,
        policy: RecallPolicy {
            method,
            top_p,
            time_threshold,
            retrieval_threshold: policy_retrieval_threshold,
        },
        recenter_frequencies: recenter != 0,
        max_pair_distance,
    };

    let thetas_v = r.floats("bank.theta", OSCILLATOR_COUNT)?;
    let phis_v = r.floats("bank.phi", OSCILLATOR_COUNT)?;
    let selection_flat = r.ints("bank.selection", TIME_VECTOR_LEN * SELECTIONS_PER_ELEMENT)?;
    let trig_flat = r.ints("bank.trig", TIME_VECTOR_LEN * SELECTIONS_PER_ELEMENT)?;
    let mut thetas = [0.0; OSCILLATOR_COUNT];
    thetas.copy_from_slice(&thetas_v);
    let mut phis = [0.0; OSCILLATOR_COUNT];
    phis.copy_from_slice(&phis_v);
    let selection: Vec<[u8; SELECTIONS_PER_ELEMENT]> = selection_flat
        .chunks(SELECTIONS_PER_ELEMENT)
        .map(|c| {
            let mut row = [0u8; SELECTIONS_PER_ELEMENT];
            for (r, &v) in row.iter_mut().zip(c) {
                *r = v as u8;
            }
            row
        })
        .collect();
    let trig: Vec<[bool; SELECTIONS_PER_ELEMENT]> = trig_flat
        .chunks(SELECTIONS_PER_ELEMENT)
        .map(|c| {
            let mut row = [false; SELECTIONS_PER_ELEMENT];
            for (r, &v) in row.iter_mut().zip(c) {
                *r = v != 0;
            }
            row
        })
        .collect();
    let bank = OscillatorBank::from_parts(
        thetas,
        phis,
        selection,
        trig,
        BankParams {
            time_scale,
            frequency_variance,
            selection_scale,
            recenter: recenter != 0,
        },
    )?;

    let base_count: usize = r.parse("bases")?;
    if base_count != TIME_VECTOR_LEN {
        return Err(Error::CorruptSnapshot(format!(
            "expected {TIME_VECTOR_LEN} bases, got {base_count}"
        )));
    }
    let mut bases = Vec::with_capacity(base_count);
    for _ in 0..base_count {
        bases.push(HoloVector::from_elements(r.floats("base", dimension)?));
    }
    let placeholder = HoloVector::from_elements(r.floats("placeholder", dimension)?);
    let permutation = Permutation::from_map(r.ints("permutation", dimension)?)?;

    let token_count: usize = r.parse("tokens")?;
    let mut lexicon = BTreeMap::new();
    for _ in 0..token_count {
        let token = r.value_of("token")?.to_string();
        let slot: u8 = r.parse("token.slot")?;
        let count: u64 = r.parse("token.count")?;
        let environment = HoloVector::from_elements(r.floats("token.e", dimension)?);
        let memory = HoloVector::from_elements(r.floats("token.m", dimension)?);
        let time_memory = HoloVector::from_elements(r.floats("token.mt", dimension)?);
        lexicon.insert(
            token,
            LexiconEntry {
                environment,
                memory,
                time_memory,
                is_slot: slot != 0,
                count,
            },
        );
    }
    let end = r.next_line()?;
    if end != "end" {
        return Err(Error::CorruptSnapshot(format!(
            "expected end marker, got {end:?}"
        )));
    }

    Model::from_parts(config, bank, bases, placeholder, permutation, lexicon, counter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use crate::store::Cue;

    fn populated_model() -> Model {
        let mut m = Model::new(ModelConfig {
            dimension: 64,
            seed: 17,
            ..ModelConfig::default()
        })
        .unwrap();
        m.add_chunk(
            &[
                ("homeowner".to_string(), "yes".to_string()),
                ("damage".to_string(), "severe".to_string()),
            ],
            true,
        )
        .unwrap();
        m.ingest_sentence(
            &["house".to_string(), "flooded".to_string()],
            false,
        )
        .unwrap();
        m
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let model = populated_model();
        let text = to_text(&model);
        let reloaded = from_text(&text).unwrap();
        let text2 = to_text(&reloaded);
        assert_eq!(text, text2);
    }

    #[test]
    fn loaded_model_retrieves_identically() {
        let model = populated_model();
        let cue = Cue::new(
            vec![("homeowner".to_string(), "yes".to_string())],
            std::iter::once("damage".to_string()),
        )
        .unwrap();
        let before = model.retrieve_value(&cue, 0.0, 0.0).unwrap().unwrap();
        let reloaded = from_text(&to_text(&model)).unwrap();
        let after = reloaded.retrieve_value(&cue, 0.0, 0.0).unwrap().unwrap();
        assert_eq!(before.0, after.0);
        assert_eq!(before.1.to_bits(), after.1.to_bits());
        assert_eq!(model.chunk_counter(), reloaded.chunk_counter());
    }

    #[test]
    fn version_mismatch_is_reported() {
        let model = populated_model();
        let text = to_text(&model).replacen("HOLOMEM 1", "HOLOMEM 9", 1);
        assert!(matches!(
            from_text(&text),
            Err(Error::IncompatibleSnapshot { .. })
        ));
        assert!(matches!(
            from_text("not a snapshot\n"),
            Err(Error::CorruptSnapshot(_))
        ));
    }

    #[test]
    fn truncation_is_detected() {
        let model = populated_model();
        let text = to_text(&model);
        let cut = &text[..text.len() / 2];
        let cut = &cut[..cut.rfind('\n').unwrap()];
        assert!(matches!(
            from_text(cut),
            Err(Error::CorruptSnapshot(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.hm");
        let model = populated_model();
        save(&model, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(to_text(&model), to_text(&loaded));
        assert!(load(dir.path().join("missing.hm")).is_err());
    }
}
