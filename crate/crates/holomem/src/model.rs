//! The assembled memory model: configuration, oscillator bank, time bases,
//! placeholder, order marker, and the token lexicon.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::hrr::{self, HoloVector, Permutation};
use crate::time::{OscillatorBank, BankParams, TIME_VECTOR_LEN};

/// Per-token vector storage: the fixed environment vector, the accumulating
/// memory vector, and the accumulating time-memory vector. Exactly three
/// vectors per unique token, regardless of how much has been encoded.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub(crate) environment: HoloVector,
    pub(crate) memory: HoloVector,
    pub(crate) time_memory: HoloVector,
    pub(crate) is_slot: bool,
    pub(crate) count: u64,
}

impl LexiconEntry {
    pub fn environment(&self) -> &HoloVector {
        &self.environment
    }

    pub fn memory(&self) -> &HoloVector {
        &self.memory
    }

    pub fn time_memory(&self) -> &HoloVector {
        &self.time_memory
    }

    pub fn is_slot(&self) -> bool {
        self.is_slot
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

/// Listing row for one lexicon token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenInfo {
    pub token: String,
    pub is_slot: bool,
    pub count: u64,
}

/// A loaded memory model.
///
/// Writes (adding chunks, ingesting sentences) take `&mut self` and are
/// serialized by the borrow checker; reads (retrievals, listings, exports)
/// take `&self` and may run concurrently between writes.
pub struct Model {
    pub(crate) config: ModelConfig,
    pub(crate) bank: OscillatorBank,
    pub(crate) time_bases: Vec<HoloVector>,
    /// Fourier phases of the time bases, flattened as [coefficient][base]
    /// for cache-friendly accumulation when encoding time representations.
    pub(crate) base_phases: Vec<f64>,
    pub(crate) placeholder: HoloVector,
    pub(crate) order_marker: Permutation,
    pub(crate) lexicon: BTreeMap<String, LexiconEntry>,
    pub(crate) chunk_counter: u64,
    /// Cache of encoded time representations, keyed by time step. Valid for
    /// the life of the model because bank and bases never change after load.
    pub(crate) time_code_cache: Mutex<HashMap<u64, Arc<HoloVector>>>,
}

impl Model {
    /// Build a fresh model from a configuration.
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let bank = OscillatorBank::sample(
            BankParams {
                time_scale: config.time_scale,
                frequency_variance: config.frequency_variance,
                selection_scale: config.selection_scale,
                recenter: config.recenter_frequencies,
            },
            config.seed,
        )?;
        let time_bases = Self::generate_time_bases(config.seed, config.dimension)?;
        let placeholder =
            HoloVector::random_in_domain("placeholder", "query-marker", config.seed, config.dimension);
        let order_marker = Permutation::random(config.seed, config.dimension);
        Self::from_parts(
            config,
            bank,
            time_bases,
            placeholder,
            order_marker,
            BTreeMap::new(),
            0,
        )
    }

    /// Assemble a model from explicit state (snapshot load path).
    pub fn from_parts(
        config: ModelConfig,
        bank: OscillatorBank,
        time_bases: Vec<HoloVector>,
        placeholder: HoloVector,
        order_marker: Permutation,
        lexicon: BTreeMap<String, LexiconEntry>,
        chunk_counter: u64,
    ) -> Result<Self> {
        config.validate()?;
        if time_bases.len() != TIME_VECTOR_LEN {
            return Err(Error::InvalidParameter {
                name: "time_bases",
                reason: format!("expected {TIME_VECTOR_LEN} bases, got {}", time_bases.len()),
            });
        }
        for base in &time_bases {
            if base.dimension() != config.dimension {
                return Err(Error::DimensionMismatch {
                    left: base.dimension(),
                    right: config.dimension,
                });
            }
        }
        if placeholder.dimension() != config.dimension
            || order_marker.dimension() != config.dimension
        {
            return Err(Error::DimensionMismatch {
                left: placeholder.dimension(),
                right: config.dimension,
            });
        }
        let base_phases = Self::phase_table(&time_bases, config.dimension);
        Ok(Self {
            config,
            bank,
            time_bases,
            base_phases,
            placeholder,
            order_marker,
            lexicon,
            chunk_counter,
            time_code_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Unitary random bases for the time encoding, one per time-vector
    /// element. A degenerate draw (a near-zero Fourier coefficient) is
    /// retried under a fresh label.
    fn generate_time_bases(seed: u64, n: usize) -> Result<Vec<HoloVector>> {
        let mut bases = Vec::with_capacity(TIME_VECTOR_LEN);
        for l in 0..TIME_VECTOR_LEN {
            let mut unitary = None;
            for attempt in 0..16 {
                let raw = HoloVector::random_in_domain(
                    "time-base",
                    &format!("{l}:{attempt}"),
                    seed,
                    n,
                );
                match raw.make_unitary() {
                    Ok(u) => {
                        unitary = Some(u);
                        break;
                    }
                    Err(Error::DegenerateSpectrum { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            match unitary {
                Some(u) => bases.push(u),
                None => {
                    return Err(Error::InvalidParameter {
                        name: "time_bases",
                        reason: format!("could not draw a non-degenerate base for element {l}"),
                    })
                }
            }
        }
        Ok(bases)
    }

    /// Flattened [coefficient][base] phase table of the base spectra.
    fn phase_table(bases: &[HoloVector], n: usize) -> Vec<f64> {
        let mut table = vec![0.0; n * bases.len()];
        for (l, base) in bases.iter().enumerate() {
            let spec = hrr::spectrum(base.as_slice());
            for (k, c) in spec.iter().enumerate() {
                table[k * bases.len() + l] = c.arg();
            }
        }
        table
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn bank(&self) -> &OscillatorBank {
        &self.bank
    }

    pub fn time_bases(&self) -> &[HoloVector] {
        &self.time_bases
    }

    pub fn placeholder(&self) -> &HoloVector {
        &self.placeholder
    }

    pub fn order_marker(&self) -> &Permutation {
        &self.order_marker
    }

    /// The current chunk counter (the time step of the last encoding).
    pub fn chunk_counter(&self) -> u64 {
        self.chunk_counter
    }

    pub fn lexicon_len(&self) -> usize {
        self.lexicon.len()
    }

    /// Total vectors stored: exactly three per unique token.
    pub fn vector_storage_count(&self) -> usize {
        self.lexicon.len() * 3
    }

    pub fn lexicon_entry(&self, token: &str) -> Option<&LexiconEntry> {
        self.lexicon.get(token)
    }

    /// Normalize a raw token: trimmed and lowercased. Rejects empty results
    /// and tokens with interior whitespace or control characters, which
    /// would not survive the line-oriented snapshot format.
    pub fn normalize_token(raw: &str) -> Result<String> {
        let token = raw.trim().to_lowercase();
        if token.is_empty() {
            return Err(Error::InvalidToken {
                token: raw.to_string(),
                reason: "empty after normalization",
            });
        }
        if token.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(Error::InvalidToken {
                token: raw.to_string(),
                reason: "contains whitespace or control characters",
            });
        }
        Ok(token)
    }

    /// Intern a token, creating its lexicon entry on first sight.
    ///
    /// Idempotent: re-interning bumps the occurrence count and returns the
    /// existing entry. New tokens get a deterministic environment vector and
    /// zero memory vectors.
    pub fn intern_token(&mut self, raw: &str) -> Result<TokenInfo> {
        let token = Self::normalize_token(raw)?;
        let key = self.intern_normalized(&token)?;
        let entry = &self.lexicon[&key];
        Ok(TokenInfo {
            token: key,
            is_slot: entry.is_slot,
            count: entry.count,
        })
    }

    /// Intern an already-normalized token and return its key.
    pub(crate) fn intern_normalized(&mut self, token: &str) -> Result<String> {
        if !self.lexicon.contains_key(token) {
            let environment =
                HoloVector::random(token, self.config.seed, self.config.dimension)?;
            let n = self.config.dimension;
            self.lexicon.insert(
                token.to_string(),
                LexiconEntry {
                    environment,
                    memory: HoloVector::zeros(n),
                    time_memory: HoloVector::zeros(n),
                    is_slot: false,
                    count: 0,
                },
            );
        }
        let entry = self.lexicon.get_mut(token).expect("just inserted");
        entry.count += 1;
        Ok(token.to_string())
    }

    /// Mark a token as having appeared in slot position. Never reverts.
    pub(crate) fn flag_slot(&mut self, token: &str) {
        if let Some(entry) = self.lexicon.get_mut(token) {
            entry.is_slot = true;
        }
    }

    /// All tokens in lexicographic order with their flags and counts.
    pub fn list_tokens(&self) -> Vec<TokenInfo> {
        self.lexicon
            .iter()
            .map(|(token, entry)| TokenInfo {
                token: token.clone(),
                is_slot: entry.is_slot,
                count: entry.count,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_model() -> Model {
        let config = ModelConfig {
            dimension: 64,
            seed: 9,
            ..ModelConfig::default()
        };
        Model::new(config).unwrap()
    }

    #[test]
    fn fresh_model_is_empty() {
        let model = small_model();
        assert_eq!(model.lexicon_len(), 0);
        assert_eq!(model.chunk_counter(), 0);
        assert!(model.list_tokens().is_empty());
        assert_eq!(model.time_bases().len(), TIME_VECTOR_LEN);
    }

    #[test]
    fn interning_is_idempotent_and_normalizing() {
        let mut model = small_model();
        let first = model.intern_token("flood").unwrap();
        assert_eq!(first.count, 1);
        let second = model.intern_token("Flood").unwrap();
        assert_eq!(second.token, "flood");
        assert_eq!(second.count, 2);
        assert_eq!(model.lexicon_len(), 1);

        model.intern_token("  RAIN  ").unwrap();
        assert_eq!(model.lexicon_len(), 2);
    }

    #[test]
    fn interning_rejects_bad_tokens() {
        let mut model = small_model();
        assert!(matches!(
            model.intern_token("   "),
            Err(Error::InvalidToken { .. })
        ));
        assert!(matches!(
            model.intern_token("two words"),
            Err(Error::InvalidToken { .. })
        ));
    }

    #[test]
    fn lexicon_size_tracks_distinct_tokens() {
        let mut model = small_model();
        for i in 0..10 {
            model.intern_token(&format!("token-{i}")).unwrap();
        }
        assert_eq!(model.lexicon_len(), 10);
        assert_eq!(model.vector_storage_count(), 30);
    }

    #[test]
    fn environment_vectors_are_deterministic_per_seed() {
        let mut a = small_model();
        let mut b = small_model();
        a.intern_token("storm").unwrap();
        b.intern_token("storm").unwrap();
        assert_eq!(
            a.lexicon_entry("storm").unwrap().environment(),
            b.lexicon_entry("storm").unwrap().environment()
        );
    }

    #[test]
    fn time_bases_are_unitary() {
        let model = small_model();
        for base in model.time_bases().iter().take(8) {
            for c in crate::hrr::spectrum(base.as_slice()) {
                assert!((c.norm() - 1.0).abs() < 1e-10);
            }
        }
    }
}
