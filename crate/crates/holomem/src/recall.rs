//! Whole-chunk recall through time representations.
//!
//! Each encoded chunk binds its contents to a holographic representation of
//! its time step. The time step's 320-element oscillator vector is carried
//! into holographic space by raising a fixed set of unitary base vectors to
//! fractional powers given by the vector's raw oscillator products and
//! binding the powers together with circular convolution. Unitary spectra
//! make that one phase accumulation per Fourier coefficient, and nearby
//! time steps land on nearby representations while distant ones decorrelate.
//! Recall from a partial cue runs in three stages:
//!
//! 1. reconstruct: unbind every token's time-memory vector with the inverse
//!    of the cue binding, yielding a noisy time representation per token;
//! 2. scan: step through candidate time steps, score each reconstruction
//!    against the step's representation, and keep the best-supported step
//!    and its surviving tokens;
//! 3. retrieve: build a full cue from the surviving slot tokens and resolve
//!    it with chained single-unknown retrievals.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::config::{RecallMethod, RecallPolicy};
use crate::error::{Error, Result};
use crate::hrr::{self, HoloVector};
use crate::model::Model;
use crate::store::Cue;
use crate::time::{TimeVector, TIME_VECTOR_LEN};

/// Gain applied to the oscillator products before fractional binding,
/// calibrated so that at the default time scales a step's code keeps clear
/// separation from its neighbors' during scans.
const TIME_EXPONENT_GAIN: f64 = 3.0;

/// A time step's representation in holographic space.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeHrr {
    vector: HoloVector,
    t: u64,
}

impl TimeHrr {
    pub fn vector(&self) -> &HoloVector {
        &self.vector
    }

    pub fn t(&self) -> u64 {
        self.t
    }
}

/// Result of a time scan: the best-supported time step and the surviving
/// slot tokens, ordered by descending score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub t_star: u64,
    pub slot_candidates: Vec<String>,
}

/// Outcome of a whole-chunk recall.
#[derive(Debug, Clone, PartialEq)]
pub enum Recall {
    Complete(Vec<(String, String)>),
    Failed(RecallStage),
}

/// The stage at which a recall gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecallStage {
    Scan,
    Retrieve,
}

impl std::fmt::Display for RecallStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RecallStage::Scan => f.write_str("scan"),
            RecallStage::Retrieve => f.write_str("retrieve"),
        }
    }
}

impl Model {
    /// Encode a time vector into holographic space: each unitary time base
    /// is raised to the matching raw oscillator product and the 320 powers
    /// are bound together with circular convolution, computed in Fourier
    /// space as one phase accumulation and inverse-transformed once, then
    /// normalized.
    ///
    /// The raw (pre-normalization) products are used as exponents, scaled
    /// by a fixed gain. The gain sets the similarity bandwidth between
    /// steps: with gain g, the code similarity at lag d is roughly the
    /// no-gain similarity raised to g^2, so larger gains sharpen the scan
    /// around the exact encoding step and keep adjacent steps' tokens from
    /// crowding out the target's under top-p filtering.
    pub fn encode_time_hrr(&self, tv: &TimeVector) -> Result<TimeHrr> {
        let exponents: Vec<f64> = tv
            .raw_elements()
            .iter()
            .map(|x| x * TIME_EXPONENT_GAIN)
            .collect();
        let vector = self.encode_exponents(&exponents);
        Ok(TimeHrr {
            vector: vector.normalize(),
            t: tv.t(),
        })
    }

    /// Bound product of fractional powers of the time bases. The bases are
    /// unitary, so the l-th power's coefficient is a pure phase rotated by
    /// exponent * base_phase and the product reduces to a phase sum.
    fn encode_exponents(&self, exponents: &[f64]) -> HoloVector {
        debug_assert_eq!(exponents.len(), TIME_VECTOR_LEN);
        let n = self.config.dimension;
        let bases = TIME_VECTOR_LEN;
        let spec: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let row = &self.base_phases[k * bases..(k + 1) * bases];
                let mut phase = 0.0;
                for (base_phase, &x) in row.iter().zip(exponents) {
                    phase += base_phase * x;
                }
                let (s, c) = phase.sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        HoloVector::from_elements(hrr::from_spectrum(spec))
    }

    /// The (cached) holographic time representation for step `t`. The cache
    /// never invalidates: bank and bases are fixed for the model's life.
    pub fn time_code(&self, t: u64) -> Result<Arc<HoloVector>> {
        if let Some(hit) = self
            .time_code_cache
            .lock()
            .expect("time code cache poisoned")
            .get(&t)
        {
            return Ok(hit.clone());
        }
        let tv = self.bank.time_vector(t)?;
        let encoded = Arc::new(self.encode_time_hrr(&tv)?.vector);
        self.time_code_cache
            .lock()
            .expect("time code cache poisoned")
            .insert(t, encoded.clone());
        Ok(encoded)
    }

    /// Bind a chunk's contents to a time representation and fold the trace
    /// into the time-memory vector of every token in the chunk.
    ///
    /// The trace is `code (*) sum of e[slot] (*) e[value]`; no noise is ever
    /// added on this path, so repeated updates are exactly linear.
    pub fn update_time_memory(
        &mut self,
        pairs: &[(String, String)],
        code: &TimeHrr,
    ) -> Result<()> {
        self.apply_time_memory_update(pairs, code.vector())
    }

    pub(crate) fn apply_time_memory_update(
        &mut self,
        pairs: &[(String, String)],
        code: &HoloVector,
    ) -> Result<()> {
        let mut binding_sum = HoloVector::zeros(self.config.dimension);
        for (slot, value) in pairs {
            let s = self
                .lexicon
                .get(slot)
                .ok_or_else(|| Error::UnknownToken(slot.clone()))?;
            let v = self
                .lexicon
                .get(value)
                .ok_or_else(|| Error::UnknownToken(value.clone()))?;
            binding_sum.add_assign(&s.environment.convolve(&v.environment)?)?;
        }
        let tokens = pairs
            .iter()
            .flat_map(|(s, v)| [s.as_str(), v.as_str()])
            .collect::<Vec<_>>();
        self.apply_time_memory_trace(tokens.into_iter(), &binding_sum, code)
    }

    /// Shared trace application: each unique token's time-memory vector
    /// accumulates `code (*) binding_sum` once.
    pub(crate) fn apply_time_memory_trace<'a>(
        &mut self,
        tokens: impl Iterator<Item = &'a str>,
        binding_sum: &HoloVector,
        code: &HoloVector,
    ) -> Result<()> {
        let trace = code.convolve(binding_sum)?;
        let unique: BTreeSet<&str> = tokens.collect();
        for token in unique {
            let entry = self
                .lexicon
                .get_mut(token)
                .ok_or_else(|| Error::UnknownToken(token.to_string()))?;
            entry.time_memory.add_assign(&trace)?;
        }
        Ok(())
    }

    /// Reconstruct a noisy time representation per token from a partial cue.
    ///
    /// The cue binding `Q` is the sum of the known pair bindings; for every
    /// token whose time-memory vector is nonzero, the reconstruction is
    /// `normalize(mt (*) involution(Q))`. Tokens with untouched time memory
    /// are excluded. A cue naming tokens that were never interned yields an
    /// empty list, which downstream stages treat as a scan failure.
    pub fn reconstruct_time(
        &self,
        known: &[(String, String)],
    ) -> Result<Vec<(String, HoloVector)>> {
        if known.is_empty() {
            return Err(Error::InvalidCue("no known pairs".to_string()));
        }
        let mut cue_binding = HoloVector::zeros(self.config.dimension);
        for (slot, value) in known {
            let slot = Model::normalize_token(slot)?;
            let value = Model::normalize_token(value)?;
            let (Some(s), Some(v)) = (self.lexicon.get(&slot), self.lexicon.get(&value)) else {
                return Ok(Vec::new());
            };
            cue_binding.add_assign(&s.environment.convolve(&v.environment)?)?;
        }
        let inverse = cue_binding.approx_inverse();
        let touched: Vec<(&String, &HoloVector)> = self
            .lexicon
            .iter()
            .filter(|(_, e)| !e.time_memory.is_zero())
            .map(|(t, e)| (t, &e.time_memory))
            .collect();
        touched
            .into_par_iter()
            .map(|(token, mt)| Ok((token.clone(), mt.convolve(&inverse)?.normalize())))
            .collect()
    }

    /// Step through time steps 1..=t_now, score every reconstruction against
    /// each step's representation, and keep tokens per the policy (top-p,
    /// threshold, or both). The winning step maximizes the summed kept
    /// scores, with ties broken toward the earliest step.
    ///
    /// Returns `Ok(None)` when there are no reconstructions to scan.
    pub fn scan_time(
        &self,
        reconstructions: &[(String, HoloVector)],
        policy: &RecallPolicy,
        t_now: u64,
    ) -> Result<Option<ScanOutcome>> {
        if reconstructions.is_empty() {
            return Ok(None);
        }
        if t_now < 1 {
            return Err(Error::InvalidTime(t_now));
        }

        // Kept token indices per step, ordered by (score desc, token asc).
        let keep_at = |scores: &[f64]| -> Vec<usize> {
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&a, &b| {
                scores[b]
                    .partial_cmp(&scores[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| reconstructions[a].0.cmp(&reconstructions[b].0))
            });
            match policy.method {
                RecallMethod::TopP => order.into_iter().take(policy.top_p).collect(),
                RecallMethod::Threshold => order
                    .into_iter()
                    .filter(|&i| scores[i] >= policy.time_threshold)
                    .collect(),
                RecallMethod::Both => order
                    .into_iter()
                    .take(policy.top_p)
                    .filter(|&i| scores[i] >= policy.time_threshold)
                    .collect(),
            }
        };

        let per_step: Vec<(f64, Vec<usize>)> = (1..=t_now)
            .into_par_iter()
            .map(|t| {
                let code = self.time_code(t)?;
                let scores: Vec<f64> = reconstructions
                    .iter()
                    .map(|(_, rec)| rec.cosine(&code))
                    .collect::<Result<_>>()?;
                let kept = keep_at(&scores);
                let sum: f64 = kept.iter().map(|&i| scores[i]).sum();
                Ok((sum, kept))
            })
            .collect::<Result<_>>()?;

        let mut best_t = 1u64;
        let mut best_sum = f64::NEG_INFINITY;
        for (i, (sum, _)) in per_step.iter().enumerate() {
            if *sum > best_sum {
                best_sum = *sum;
                best_t = i as u64 + 1;
            }
        }
        let kept = &per_step[(best_t - 1) as usize].1;
        let slot_candidates = kept
            .iter()
            .map(|&i| reconstructions[i].0.clone())
            .filter(|token| {
                self.lexicon
                    .get(token)
                    .map(|e| e.is_slot)
                    .unwrap_or(false)
            })
            .collect();
        Ok(Some(ScanOutcome {
            t_star: best_t,
            slot_candidates,
        }))
    }

    /// Recall an entire chunk from known pairs: reconstruct, scan, build a
    /// full cue over the surviving slot tokens (known pairs win over
    /// duplicate candidates), and resolve the rest by chained retrieval.
    pub fn recall_whole_chunk(
        &self,
        known: &[(String, String)],
        policy: &RecallPolicy,
    ) -> Result<Recall> {
        if known.is_empty() {
            return Err(Error::InvalidCue("no known pairs".to_string()));
        }
        let known: Vec<(String, String)> = known
            .iter()
            .map(|(s, v)| Ok((Model::normalize_token(s)?, Model::normalize_token(v)?)))
            .collect::<Result<_>>()?;
        let reconstructions = self.reconstruct_time(&known)?;
        let outcome = self.scan_time(&reconstructions, policy, self.chunk_counter.max(1))?;
        let Some(outcome) = outcome else {
            return Ok(Recall::Failed(RecallStage::Scan));
        };
        if outcome.slot_candidates.is_empty() {
            return Ok(Recall::Failed(RecallStage::Scan));
        }

        let known_slots: BTreeSet<&str> = known.iter().map(|(s, _)| s.as_str()).collect();
        let unknowns: Vec<String> = outcome
            .slot_candidates
            .iter()
            .filter(|c| !known_slots.contains(c.as_str()))
            .cloned()
            .collect();
        if unknowns.is_empty() {
            return Ok(Recall::Complete(known));
        }
        let cue = Cue::new(known, unknowns)?;
        match self.retrieve_multi(&cue, policy.retrieval_threshold, self.config.noise_sd)? {
            Some(pairs) => Ok(Recall::Complete(pairs)),
            None => Ok(Recall::Failed(RecallStage::Retrieve)),
        }
    }
}


/// Build the acceptance-scale scenario (20 four-slot chunks over a 50-token
/// vocabulary with one distinguishing pair per chunk) and return the recall
/// success rate averaged over the given number of seeds. Test support.
#[doc(hidden)]
pub fn measure_recall_rate(seeds: u64) -> f64 {
    use crate::config::{ModelConfig, RecallPolicy, RecallMethod};
    use rand::seq::SliceRandom;
    use rand::Rng;

    let policy = RecallPolicy {
        method: RecallMethod::Both,
        top_p: 8,
        time_threshold: 0.15,
        retrieval_threshold: 0.05,
    };
    let totals: Vec<(u32, u32)> = (0..seeds)
        .map(|seed| {
            // 50-token vocabulary: 20 slot tokens, 30 value tokens. Every
            // stored (slot, value) pair is globally unique, so each chunk's
            // first pair is a distinguishing cue; tokens themselves recur
            // across chunks, which is what the storage-scaling design is
            // about.
            let slots: Vec<String> = (0..20).map(|i| format!("slot{i}")).collect();
            let values: Vec<String> = (0..30).map(|i| format!("val{i}")).collect();
            let mut rng = crate::rng::stream("recall-rate", "scenario", seed);
            let mut m = Model::new(ModelConfig {
                dimension: 2048,
                seed,
                time_scale: 5e-6,
                ..ModelConfig::default()
            })
            .expect("model");

            // Balanced usage: every slot appears in exactly 4 chunks and
            // every value in 2-3, so no token's trace is unusually noisy
            // or unusually rare. Least-used-first with seeded tie-breaks.
            let mut slot_use = vec![0u32; slots.len()];
            let mut value_use = vec![0u32; values.len()];
            let mut used_pairs = std::collections::BTreeSet::new();
            let mut chunks = Vec::new();
            for _ in 0..20usize {
                let mut slot_order: Vec<usize> = (0..slots.len()).collect();
                slot_order.shuffle(&mut rng);
                slot_order.sort_by_key(|&i| slot_use[i]);
                let chunk_slots: Vec<usize> = slot_order.into_iter().take(4).collect();
                let mut chunk = Vec::with_capacity(4);
                for &si in &chunk_slots {
                    slot_use[si] += 1;
                    let mut value_order: Vec<usize> = (0..values.len()).collect();
                    value_order.shuffle(&mut rng);
                    value_order.sort_by_key(|&i| value_use[i]);
                    let vi = value_order
                        .into_iter()
                        .find(|&vi| !used_pairs.contains(&(si, vi)))
                        .expect("an unused pair always exists");
                    value_use[vi] += 1;
                    used_pairs.insert((si, vi));
                    chunk.push((slots[si].clone(), values[vi].clone()));
                }
                m.add_chunk(&chunk, true).expect("add chunk");
                chunks.push(chunk);
            }

            let mut hits = 0u32;
            for chunk in &chunks {
                let got = m
                    .recall_whole_chunk(&[chunk[0].clone()], &policy)
                    .expect("recall");
                if let Recall::Complete(pairs) = got {
                    let got: std::collections::BTreeSet<_> = pairs.into_iter().collect();
                    let want: std::collections::BTreeSet<_> =
                        chunk.iter().cloned().collect();
                    if got == want {
                        hits += 1;
                    }
                }
            }
            (hits, 20)
        })
        .collect();

    let (hits, total) = totals
        .into_iter()
        .fold((0u32, 0u32), |(h, t), (hh, tt)| (h + hh, t + tt));
    f64::from(hits) / f64::from(total)
}
