//! Oscillator time codes.
//!
//! A bank of fifteen noisy oscillators spanning a ladder of frequencies
//! encodes the chunk index as a 320-element vector: each element is the
//! product of four oscillator values, with the oscillators for each element
//! drawn once (favoring the slower ones) when the bank is sampled. Nearby
//! time steps produce similar vectors whose similarity decays with lag and
//! shows small local "bumps", mimicking positional confusions in serial
//! memory.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng;

/// Number of oscillators in a bank.
pub const OSCILLATOR_COUNT: usize = 15;
/// Elements in a time vector.
pub const TIME_VECTOR_LEN: usize = 320;
/// Oscillators multiplied together per element.
pub const SELECTIONS_PER_ELEMENT: usize = 4;

/// Floor applied to |theta| when deriving the phase-offset range, so the
/// uniform draw stays finite even for near-zero frequencies.
const THETA_FLOOR: f64 = 1e-12;

/// Per-index selection probabilities: a discretized, bounded exponential
/// with scale `beta`, normalized over the oscillator indices.
pub fn selection_probabilities(beta: f64) -> Result<[f64; OSCILLATOR_COUNT]> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("must be a positive finite number, got {beta}"),
        });
    }
    let mut probs = [0.0; OSCILLATOR_COUNT];
    for (j, p) in probs.iter_mut().enumerate() {
        *p = (-(j as f64) / beta).exp();
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(probs)
}

/// Draw `count` oscillator indices i.i.d. from the selection distribution.
pub fn sample_indices(beta: f64, count: usize, rng: &mut impl Rng) -> Result<Vec<u8>> {
    let probs = selection_probabilities(beta)?;
    let mut cumulative = [0.0; OSCILLATOR_COUNT];
    let mut acc = 0.0;
    for (c, p) in cumulative.iter_mut().zip(probs.iter()) {
        acc += p;
        *c = acc;
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.gen();
        let idx = cumulative
            .iter()
            .position(|&c| u <= c)
            .unwrap_or(OSCILLATOR_COUNT - 1);
        out.push(idx as u8);
    }
    Ok(out)
}

/// Bank parameters kept for inspection and serialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankParams {
    /// Time scale S applied to every frequency.
    pub time_scale: f64,
    /// Variance of the per-oscillator frequency noise.
    pub frequency_variance: f64,
    /// Scale of the selection distribution.
    pub selection_scale: f64,
    /// Draw frequency noise around 1 instead of 0.
    pub recenter: bool,
}

/// A sampled oscillator bank: frequencies, phase offsets, and the fixed
/// per-element selection and sine/cosine tables.
///
/// A bank is drawn once at model load and never mutated afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorBank {
    thetas: [f64; OSCILLATOR_COUNT],
    phis: [f64; OSCILLATOR_COUNT],
    selection: Vec<[u8; SELECTIONS_PER_ELEMENT]>,
    trig: Vec<[bool; SELECTIONS_PER_ELEMENT]>,
    params: BankParams,
}

impl OscillatorBank {
    /// Sample a bank from the model seed.
    ///
    /// Oscillator i (1-based) gets frequency theta_i = S * R_i * 2^i with
    /// R_i drawn from N(0, sigma2) (or N(1, sigma2) when recentering), and a
    /// phase offset drawn uniformly from (0, pi / |theta_i|). Each of the
    /// 320 elements independently selects four oscillator indices from the
    /// discretized exponential and flips a fair coin between sine and cosine
    /// per selection.
    pub fn sample(params: BankParams, seed: u64) -> Result<Self> {
        if !(params.time_scale > 0.0) || !params.time_scale.is_finite() {
            return Err(Error::InvalidParameter {
                name: "time_scale",
                reason: format!("must be a positive finite number, got {}", params.time_scale),
            });
        }
        if !(params.frequency_variance >= 0.0) || !params.frequency_variance.is_finite() {
            return Err(Error::InvalidParameter {
                name: "frequency_variance",
                reason: format!(
                    "must be a non-negative finite number, got {}",
                    params.frequency_variance
                ),
            });
        }
        // Validates beta as well.
        selection_probabilities(params.selection_scale)?;

        let mut rng = rng::stream("oscillator-bank", "bank", seed);
        let mean = if params.recenter { 1.0 } else { 0.0 };
        let normal = Normal::new(mean, params.frequency_variance.sqrt()).expect("valid sd");

        let mut thetas = [0.0; OSCILLATOR_COUNT];
        let mut phis = [0.0; OSCILLATOR_COUNT];
        for i in 0..OSCILLATOR_COUNT {
            let noise = normal.sample(&mut rng);
            thetas[i] = params.time_scale * noise * 2f64.powi(i as i32 + 1);
        }
        for i in 0..OSCILLATOR_COUNT {
            let range = std::f64::consts::PI / thetas[i].abs().max(THETA_FLOOR);
            phis[i] = rng.gen::<f64>() * range;
        }

        let mut selection = Vec::with_capacity(TIME_VECTOR_LEN);
        for _ in 0..TIME_VECTOR_LEN {
            let picks = sample_indices(params.selection_scale, SELECTIONS_PER_ELEMENT, &mut rng)?;
            selection.push([picks[0], picks[1], picks[2], picks[3]]);
        }
        let mut trig = Vec::with_capacity(TIME_VECTOR_LEN);
        for _ in 0..TIME_VECTOR_LEN {
            let mut flags = [false; SELECTIONS_PER_ELEMENT];
            for f in flags.iter_mut() {
                *f = rng.gen::<bool>();
            }
            trig.push(flags);
        }

        Ok(Self {
            thetas,
            phis,
            selection,
            trig,
            params,
        })
    }

    /// Rebuild a bank from serialized parts.
    pub fn from_parts(
        thetas: [f64; OSCILLATOR_COUNT],
        phis: [f64; OSCILLATOR_COUNT],
        selection: Vec<[u8; SELECTIONS_PER_ELEMENT]>,
        trig: Vec<[bool; SELECTIONS_PER_ELEMENT]>,
        params: BankParams,
    ) -> Result<Self> {
        if selection.len() != TIME_VECTOR_LEN || trig.len() != TIME_VECTOR_LEN {
            return Err(Error::InvalidParameter {
                name: "bank",
                reason: format!(
                    "expected {TIME_VECTOR_LEN} selection and trig rows, got {} and {}",
                    selection.len(),
                    trig.len()
                ),
            });
        }
        if selection
            .iter()
            .any(|row| row.iter().any(|&j| usize::from(j) >= OSCILLATOR_COUNT))
        {
            return Err(Error::InvalidParameter {
                name: "bank",
                reason: "selection index out of range".to_string(),
            });
        }
        Ok(Self {
            thetas,
            phis,
            selection,
            trig,
            params,
        })
    }

    pub fn params(&self) -> BankParams {
        self.params
    }

    pub fn thetas(&self) -> &[f64; OSCILLATOR_COUNT] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64; OSCILLATOR_COUNT] {
        &self.phis
    }

    pub fn selection_rows(&self) -> &[[u8; SELECTIONS_PER_ELEMENT]] {
        &self.selection
    }

    pub fn trig_rows(&self) -> &[[bool; SELECTIONS_PER_ELEMENT]] {
        &self.trig
    }

    /// True when every frequency collapsed to zero (e.g. sigma2 = 0 without
    /// recentering), so all time vectors are the same constant vector.
    pub fn is_degenerate(&self) -> bool {
        self.thetas.iter().all(|t| t.abs() < THETA_FLOOR)
    }

    /// The time vector for chunk index `t`: per element, the product of the
    /// four selected oscillator values, normalized to unit Euclidean norm.
    pub fn time_vector(&self, t: u64) -> Result<TimeVector> {
        if t < 1 {
            return Err(Error::InvalidTime(t));
        }
        let tf = t as f64;
        let mut elems = Vec::with_capacity(TIME_VECTOR_LEN);
        for (row, flags) in self.selection.iter().zip(self.trig.iter()) {
            let mut product = 1.0;
            for (j, &sine) in row.iter().zip(flags.iter()) {
                let idx = usize::from(*j);
                let angle = self.phis[idx] + tf * self.thetas[idx];
                product *= if sine { angle.sin() } else { angle.cos() };
            }
            elems.push(product);
        }
        let scale = elems.iter().map(|x| x * x).sum::<f64>().sqrt();
        if scale > 0.0 {
            for x in elems.iter_mut() {
                *x /= scale;
            }
        }
        Ok(TimeVector { elems, scale, t })
    }

    /// Pairwise dot products of the time vectors for 1..=t_max.
    pub fn self_similarity(&self, t_max: u64) -> Result<SimilarityMatrix> {
        if t_max < 2 {
            return Err(Error::InvalidParameter {
                name: "t_max",
                reason: format!("must be at least 2, got {t_max}"),
            });
        }
        let size = t_max as usize;
        let vectors: Vec<TimeVector> = (1..=t_max)
            .map(|t| self.time_vector(t))
            .collect::<Result<_>>()?;
        let mut values = vec![0.0; size * size];
        for i in 0..size {
            for j in i..size {
                let dot: f64 = vectors[i]
                    .elements()
                    .iter()
                    .zip(vectors[j].elements())
                    .map(|(a, b)| a * b)
                    .sum();
                values[i * size + j] = dot;
                values[j * size + i] = dot;
            }
        }
        Ok(SimilarityMatrix { size, values })
    }
}

/// The oscillator signature of one chunk index, normalized to unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVector {
    elems: Vec<f64>,
    /// Euclidean norm of the raw oscillator products before normalization.
    scale: f64,
    t: u64,
}

impl TimeVector {
    /// Normalized elements (unit Euclidean norm).
    pub fn elements(&self) -> &[f64] {
        &self.elems
    }

    /// The raw oscillator products before normalization.
    pub fn raw_elements(&self) -> Vec<f64> {
        self.elems.iter().map(|x| x * self.scale).collect()
    }

    pub fn t(&self) -> u64 {
        self.t
    }
}

/// Symmetric matrix of time-vector similarities over 1..=t_max.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    size: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn t_max(&self) -> usize {
        self.size
    }

    /// Similarity of time steps t1 and t2 (both 1-based).
    pub fn get(&self, t1: u64, t2: u64) -> f64 {
        let (i, j) = ((t1 - 1) as usize, (t2 - 1) as usize);
        self.values[i * self.size + j]
    }

    /// Mean similarity at each lag 0..t_max-1.
    pub fn lag_means(&self) -> Vec<f64> {
        let mut means = Vec::with_capacity(self.size);
        for lag in 0..self.size {
            let count = self.size - lag;
            let mut total = 0.0;
            for i in 0..count {
                total += self.values[i * self.size + (i + lag)];
            }
            means.push(total / count as f64);
        }
        means
    }
}
