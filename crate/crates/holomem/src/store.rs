//! Associative token memory: chunk and sentence encoding, and cue-based
//! retrieval with multiple-unknown chaining.
//!
//! Storage scales with the number of unique tokens, never with the number
//! of chunks or sentences encoded: each token owns exactly one environment
//! vector, one memory vector, and one time-memory vector.
//!
//! A chunk {s1:v1, ... sn:vn} updates each value's memory vector with a
//! placeholder-bound slot marker plus the other pairs' bindings convolved
//! onto that marker:
//!
//! ```text
//! m[vi] += e[si] (*) P  +  sum over j != i of (e[sj] (*) e[vj]) (*) (e[si] (*) P)
//! ```
//!
//! where P is the distinguished placeholder vector. A retrieval cue with
//! unknown slot u builds the matching probe, so the inner product peaks at
//! the value stored under u in the chunk that shares the cue's known pairs.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::hrr::HoloVector;
use crate::model::Model;
use crate::rng;

/// An ordered set of slot:value pairs encoded at one time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub pairs: Vec<(String, String)>,
    /// The time step at which the chunk was encoded.
    pub index: u64,
}

/// A retrieval request: known slot:value pairs plus unknown slot names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cue {
    known: Vec<(String, String)>,
    unknown: Vec<String>,
}

impl Cue {
    /// Normalize tokens and validate: slot names must be unique across the
    /// known and unknown parts, and the cue must not be empty overall.
    pub fn new<K, U>(known: K, unknown: U) -> Result<Self>
    where
        K: IntoIterator<Item = (String, String)>,
        U: IntoIterator<Item = String>,
    {
        let mut seen = std::collections::BTreeSet::new();
        let mut known_pairs = Vec::new();
        for (slot, value) in known {
            let slot = Model::normalize_token(&slot)?;
            let value = Model::normalize_token(&value)?;
            if !seen.insert(slot.clone()) {
                return Err(Error::InvalidCue(format!("duplicate slot {slot:?}")));
            }
            known_pairs.push((slot, value));
        }
        let mut unknown_slots = Vec::new();
        for slot in unknown {
            let slot = Model::normalize_token(&slot)?;
            if !seen.insert(slot.clone()) {
                return Err(Error::InvalidCue(format!("duplicate slot {slot:?}")));
            }
            unknown_slots.push(slot);
        }
        if known_pairs.is_empty() && unknown_slots.is_empty() {
            return Err(Error::InvalidCue("cue has no slots".to_string()));
        }
        Ok(Self {
            known: known_pairs,
            unknown: unknown_slots,
        })
    }

    pub fn known(&self) -> &[(String, String)] {
        &self.known
    }

    pub fn unknown(&self) -> &[String] {
        &self.unknown
    }

    /// Canonical text form used to key deterministic retrieval noise.
    pub(crate) fn canonical(&self) -> String {
        let mut known: Vec<String> = self
            .known
            .iter()
            .map(|(s, v)| format!("{s}:{v}"))
            .collect();
        known.sort();
        let mut unknown: Vec<String> = self.unknown.iter().map(|u| format!("{u}:?")).collect();
        unknown.sort();
        known.extend(unknown);
        known.join(" ")
    }
}

/// Normalize and validate chunk pairs: at least one pair, unique slots.
fn normalize_pairs(pairs: &[(String, String)]) -> Result<Vec<(String, String)>> {
    if pairs.is_empty() {
        return Err(Error::EmptyChunk);
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(pairs.len());
    for (slot, value) in pairs {
        let slot = Model::normalize_token(slot)?;
        let value = Model::normalize_token(value)?;
        if !seen.insert(slot.clone()) {
            return Err(Error::DuplicateSlot(slot));
        }
        out.push((slot, value));
    }
    Ok(out)
}

impl Model {
    fn environment(&self, token: &str) -> Result<HoloVector> {
        self.lexicon
            .get(token)
            .map(|e| e.environment.clone())
            .ok_or_else(|| Error::UnknownToken(token.to_string()))
    }

    /// The placeholder-bound marker for a slot: e[slot] (*) P.
    fn slot_marker(&self, slot_env: &HoloVector) -> Result<HoloVector> {
        slot_env.convolve(&self.placeholder)
    }

    /// Elementwise Gaussian noise with expected norm `self.config.noise_sd`,
    /// drawn from a stream keyed by the encoding event and token so that
    /// identical command sequences stay reproducible.
    fn encoding_noise(&self, event: u64, token: &str) -> HoloVector {
        let n = self.config.dimension;
        let sd = self.config.noise_sd / (n as f64).sqrt();
        let mut rng = rng::stream("encode-noise", &format!("{event}|{token}"), self.config.seed);
        let normal = Normal::new(0.0, sd).expect("valid sd");
        HoloVector::from_elements((0..n).map(|_| normal.sample(&mut rng)).collect())
    }

    /// Encode a chunk of slot:value pairs at the next time step.
    ///
    /// All tokens are interned, slot tokens are flagged, and each value's
    /// memory vector is updated. With `encode_time` set, the chunk contents
    /// are also bound to the step's time representation (see
    /// [`Model::update_time_memory`]).
    pub fn add_chunk(&mut self, pairs: &[(String, String)], encode_time: bool) -> Result<Chunk> {
        let pairs = normalize_pairs(pairs)?;
        self.chunk_counter += 1;
        let index = self.chunk_counter;

        for (slot, value) in &pairs {
            self.intern_normalized(slot)?;
            self.flag_slot(slot);
            self.intern_normalized(value)?;
        }

        let envs: Vec<(HoloVector, HoloVector)> = pairs
            .iter()
            .map(|(s, v)| Ok((self.environment(s)?, self.environment(v)?)))
            .collect::<Result<_>>()?;

        // Pair bindings e[s] (*) e[v] and their sum.
        let bindings: Vec<HoloVector> = envs
            .iter()
            .map(|(s, v)| s.convolve(v))
            .collect::<Result<_>>()?;
        let mut binding_sum = HoloVector::zeros(self.config.dimension);
        for b in &bindings {
            binding_sum.add_assign(b)?;
        }

        let noisy = self.config.noise_sd > 0.0;
        for (i, (slot_env, _)) in envs.iter().enumerate() {
            let marker = self.slot_marker(slot_env)?;
            let mut others = binding_sum.clone();
            others.add_assign(&bindings[i].scale(-1.0))?;
            let mut delta = marker.add(&others.convolve(&marker)?)?;
            if noisy {
                delta.add_assign(&self.encoding_noise(index, &pairs[i].1))?;
            }
            let entry = self
                .lexicon
                .get_mut(&pairs[i].1)
                .expect("value token interned above");
            entry.memory.add_assign(&delta)?;
        }

        if encode_time {
            let code = self.time_code(index)?;
            self.apply_time_memory_update(&pairs, &code)?;
        }

        Ok(Chunk { pairs, index })
    }

    /// Encode one sentence: every ordered token pair (earlier, later) in
    /// left-to-right order, with the later token marked by the fixed order
    /// permutation. Advances the chunk counter by one.
    pub fn ingest_sentence(&mut self, tokens: &[String], encode_time: bool) -> Result<()> {
        if tokens.is_empty() {
            return Err(Error::EmptySentence);
        }
        let tokens: Vec<String> = tokens
            .iter()
            .map(|t| Model::normalize_token(t))
            .collect::<Result<_>>()?;
        self.chunk_counter += 1;
        let index = self.chunk_counter;

        for token in &tokens {
            self.intern_normalized(token)?;
        }

        let envs: Vec<HoloVector> = tokens
            .iter()
            .map(|t| self.environment(t))
            .collect::<Result<_>>()?;
        let permuted: Vec<HoloVector> = envs
            .iter()
            .map(|e| e.permute(&self.order_marker, false))
            .collect::<Result<_>>()?;
        let marked_placeholder = self.placeholder.permute(&self.order_marker, false)?;

        // Accumulate one delta per token position, then fold into the
        // lexicon so each token takes a single noise draw per sentence.
        let n = self.config.dimension;
        let mut deltas: std::collections::BTreeMap<&str, HoloVector> = Default::default();
        let mut pair_bindings = Vec::new();
        for i in 0..tokens.len() {
            for j in (i + 1)..tokens.len() {
                if let Some(max) = self.config.max_pair_distance {
                    if j - i > max {
                        continue;
                    }
                }
                let earlier_delta = self.placeholder.convolve(&permuted[j])?;
                let later_delta = envs[i].convolve(&marked_placeholder)?;
                deltas
                    .entry(&tokens[i])
                    .or_insert_with(|| HoloVector::zeros(n))
                    .add_assign(&earlier_delta)?;
                deltas
                    .entry(&tokens[j])
                    .or_insert_with(|| HoloVector::zeros(n))
                    .add_assign(&later_delta)?;
                if encode_time {
                    pair_bindings.push(envs[i].convolve(&permuted[j])?);
                }
            }
        }

        let noisy = self.config.noise_sd > 0.0;
        let deltas: Vec<(String, HoloVector)> = deltas
            .into_iter()
            .map(|(t, d)| (t.to_string(), d))
            .collect();
        for (token, mut delta) in deltas {
            if noisy {
                delta.add_assign(&self.encoding_noise(index, &token))?;
            }
            let entry = self.lexicon.get_mut(&token).expect("interned above");
            entry.memory.add_assign(&delta)?;
        }

        if encode_time {
            let mut binding_sum = HoloVector::zeros(n);
            for b in &pair_bindings {
                binding_sum.add_assign(b)?;
            }
            let code = self.time_code(index)?;
            self.apply_time_memory_trace(tokens.iter().map(String::as_str), &binding_sum, &code)?;
        }

        Ok(())
    }

    /// Probe vector for a cue with unknown slot `u`:
    /// normalize(marker_u + (sum of known pair bindings) (*) marker_u).
    fn probe(&self, known: &[(String, String)], unknown: &str) -> Result<HoloVector> {
        let unknown_env = self.environment(unknown)?;
        let marker = self.slot_marker(&unknown_env)?;
        let mut binding_sum = HoloVector::zeros(self.config.dimension);
        for (slot, value) in known {
            let b = self
                .environment(slot)?
                .convolve(&self.environment(value)?)?;
            binding_sum.add_assign(&b)?;
        }
        let probe = marker.add(&binding_sum.convolve(&marker)?)?;
        Ok(probe.normalize())
    }

    /// Score every non-slot token against the probe and return the best,
    /// regardless of any threshold. None when a cue token is not interned
    /// or there are no candidates.
    fn score_unknown(
        &self,
        known: &[(String, String)],
        unknown: &str,
        noise_sd: f64,
        noise_key: &str,
    ) -> Result<Option<(String, f64)>> {
        let interned = |t: &str| self.lexicon.contains_key(t);
        if !interned(unknown)
            || known
                .iter()
                .any(|(s, v)| !interned(s) || !interned(v))
        {
            return Ok(None);
        }
        let probe = self.probe(known, unknown)?;
        let mut best: Option<(String, f64)> = None;
        for (token, entry) in &self.lexicon {
            if entry.is_slot {
                continue;
            }
            let mut score = entry.memory.cosine(&probe)?;
            if noise_sd > 0.0 {
                let mut rng = rng::stream(
                    "score-noise",
                    &format!("{noise_key}|{token}"),
                    self.config.seed,
                );
                let normal = Normal::new(0.0, noise_sd).expect("valid sd");
                score += normal.sample(&mut rng);
            }
            // Lexicographic iteration order makes ties deterministic: the
            // first strictly-better score wins.
            match &best {
                Some((_, s)) if score <= *s => {}
                _ => best = Some((token.clone(), score)),
            }
        }
        Ok(best)
    }

    /// Resolve a cue with exactly one unknown slot.
    ///
    /// Returns the best-scoring non-slot token and its score when the score
    /// meets `threshold`; `Ok(None)` is a retrieval failure (including cues
    /// naming tokens that were never interned).
    pub fn retrieve_value(
        &self,
        cue: &Cue,
        threshold: f64,
        noise_sd: f64,
    ) -> Result<Option<(String, f64)>> {
        if cue.unknown().len() != 1 {
            return Err(Error::InvalidCue(format!(
                "expected exactly one unknown slot, got {}",
                cue.unknown().len()
            )));
        }
        let unknown = &cue.unknown()[0];
        let noise_key = cue.canonical();
        match self.score_unknown(cue.known(), unknown, noise_sd, &noise_key)? {
            Some((token, score)) if score >= threshold => Ok(Some((token, score))),
            _ => Ok(None),
        }
    }

    /// Resolve a cue with one or more unknowns by chaining single-unknown
    /// retrievals: unknowns are ordered by descending first-pass score, and
    /// each resolved pair joins the known set before the next resolution.
    /// Any single failure fails the whole request.
    ///
    /// On success the returned pairs are the cue's known pairs followed by
    /// the resolved pairs in resolution order.
    pub fn retrieve_multi(
        &self,
        cue: &Cue,
        threshold: f64,
        noise_sd: f64,
    ) -> Result<Option<Vec<(String, String)>>> {
        if cue.unknown().is_empty() {
            return Err(Error::InvalidCue("no unknown slots to resolve".to_string()));
        }

        // First pass: rank unknowns by their best score against the
        // original known set. Unscorable unknowns sort last.
        let mut ranked: Vec<(String, f64)> = Vec::with_capacity(cue.unknown().len());
        for unknown in cue.unknown() {
            let single = Cue::new(
                cue.known().to_vec(),
                std::iter::once(unknown.clone()),
            )?;
            let score = self
                .score_unknown(cue.known(), unknown, noise_sd, &single.canonical())?
                .map(|(_, s)| s)
                .unwrap_or(f64::NEG_INFINITY);
            ranked.push((unknown.clone(), score));
        }
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });

        let mut resolved = cue.known().to_vec();
        for (unknown, _) in ranked {
            let step = Cue::new(resolved.clone(), std::iter::once(unknown.clone()))?;
            match self.retrieve_value(&step, threshold, noise_sd)? {
                Some((value, _)) => resolved.push((unknown, value)),
                None => return Ok(None),
            }
        }
        Ok(Some(resolved))
    }
}
