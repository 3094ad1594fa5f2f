//! Holographic reduced representation algebra.
//!
//! The currency of the whole engine is the [`HoloVector`]: a fixed-dimension
//! real vector. Two vectors are bound with circular convolution; a bound pair
//! can be approximately unbound by convolving the trace with the involution
//! (approximate inverse) of one partner. Order information is marked with a
//! fixed random [`Permutation`], and continuous values are encoded by raising
//! unitary vectors to fractional powers in the Fourier domain.
//!
//! All operations here are pure functions of their inputs and are safe to
//! call from any number of threads.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::rng;

type Plan = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

/// Forward/inverse FFT plans cached per dimension.
fn plans(n: usize) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Discrete Fourier transform of a real vector.
pub(crate) fn spectrum(elems: &[f64]) -> Vec<Complex64> {
    let (forward, _) = plans(elems.len());
    let mut buf: Vec<Complex64> = elems.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward.process(&mut buf);
    buf
}

/// Inverse transform back to a real vector (imaginary residue discarded).
pub(crate) fn from_spectrum(mut spec: Vec<Complex64>) -> Vec<f64> {
    let n = spec.len();
    let (_, inverse) = plans(n);
    inverse.process(&mut spec);
    let scale = 1.0 / n as f64;
    spec.into_iter().map(|c| c.re * scale).collect()
}

/// A fixed-dimension real vector in the holographic space.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloVector {
    elems: Vec<f64>,
}

impl HoloVector {
    /// Wrap raw elements.
    pub fn from_elements(elems: Vec<f64>) -> Self {
        Self { elems }
    }

    /// The all-zero vector.
    pub fn zeros(n: usize) -> Self {
        Self { elems: vec![0.0; n] }
    }

    /// The convolution identity: 1 at index 0, 0 elsewhere.
    pub fn delta(n: usize) -> Self {
        let mut elems = vec![0.0; n];
        if n > 0 {
            elems[0] = 1.0;
        }
        Self { elems }
    }

    /// Deterministic random vector for a token.
    ///
    /// Elements are drawn i.i.d. from N(0, 1/n) under a stream keyed by
    /// (token, seed), so the expected Euclidean norm is 1 and the same
    /// (token, seed, n) always produces the same vector.
    pub fn random(token: &str, seed: u64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        if token.is_empty() {
            return Err(Error::InvalidToken {
                token: token.to_string(),
                reason: "token must be non-empty",
            });
        }
        Ok(Self::random_in_domain("environment", token, seed, n))
    }

    /// Random vector from an explicit stream domain (internal use).
    pub(crate) fn random_in_domain(domain: &str, label: &str, seed: u64, n: usize) -> Self {
        let mut rng = rng::stream(domain, label, seed);
        let normal = Normal::new(0.0, (1.0 / n as f64).sqrt()).expect("valid sd");
        let elems = (0..n).map(|_| normal.sample(&mut rng)).collect();
        Self { elems }
    }

    pub fn dimension(&self) -> usize {
        self.elems.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.elems
    }

    pub fn is_zero(&self) -> bool {
        self.elems.iter().all(|&x| x == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.elems.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                left: self.dimension(),
                right: other.dimension(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_dims(other)?;
        Ok(self
            .elems
            .iter()
            .zip(other.elems.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Cosine similarity. Returns 0 when either norm is below 1e-12.
    pub fn cosine(&self, other: &Self) -> Result<f64> {
        self.check_dims(other)?;
        let na = self.norm();
        let nb = other.norm();
        if na < 1e-12 || nb < 1e-12 {
            return Ok(0.0);
        }
        Ok(self.dot(other)? / (na * nb))
    }

    /// Unit-norm copy; the zero vector is returned unchanged.
    pub fn normalize(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        Self {
            elems: self.elems.iter().map(|x| x / n).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            elems: self.elems.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            elems: self
                .elems
                .iter()
                .zip(other.elems.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_dims(other)?;
        for (a, b) in self.elems.iter_mut().zip(other.elems.iter()) {
            *a += b;
        }
        Ok(())
    }

    /// Circular convolution (binding), computed through the FFT.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut a = spectrum(&self.elems);
        let b = spectrum(&other.elems);
        for (x, y) in a.iter_mut().zip(b.iter()) {
            *x *= *y;
        }
        Ok(Self {
            elems: from_spectrum(a),
        })
    }

    /// Involution: index 0 fixed, the remaining elements reversed.
    ///
    /// Convolving a trace with the involution of one bound partner recovers
    /// a noisy version of the other partner.
    pub fn approx_inverse(&self) -> Self {
        let n = self.dimension();
        let elems = (0..n).map(|k| self.elems[(n - k) % n]).collect();
        Self { elems }
    }

    /// Reorder elements by a permutation (or its inverse).
    pub fn permute(&self, p: &Permutation, inverse: bool) -> Result<Self> {
        if self.dimension() != p.dimension() {
            return Err(Error::DimensionMismatch {
                left: self.dimension(),
                right: p.dimension(),
            });
        }
        let mut elems = vec![0.0; self.dimension()];
        if inverse {
            for (i, &src) in p.map().iter().enumerate() {
                elems[src] = self.elems[i];
            }
        } else {
            for (i, &src) in p.map().iter().enumerate() {
                elems[i] = self.elems[src];
            }
        }
        Ok(Self { elems })
    }

    /// Project onto the unitary manifold: every Fourier coefficient is
    /// rescaled to magnitude 1 with its phase preserved.
    ///
    /// Fails with a degenerate-spectrum error if any coefficient magnitude
    /// is below 1e-12; callers regenerate the source vector with a new key.
    pub fn make_unitary(&self) -> Result<Self> {
        let mut spec = spectrum(&self.elems);
        for (index, c) in spec.iter_mut().enumerate() {
            let magnitude = c.norm();
            if magnitude < 1e-12 {
                return Err(Error::DegenerateSpectrum { index, magnitude });
            }
            *c /= magnitude;
        }
        Ok(Self {
            elems: from_spectrum(spec),
        })
    }

    /// Raise a unitary vector to a real power.
    ///
    /// Each Fourier coefficient is taken to its elementwise x-th power:
    /// magnitude^x with the principal-branch phase multiplied by x. The
    /// base must be unitary (all coefficient magnitudes within 1e-6 of 1),
    /// otherwise repeated powers drift in magnitude.
    pub fn fractional_power(&self, exponent: f64) -> Result<Self> {
        let mut spec = spectrum(&self.elems);
        for (index, c) in spec.iter_mut().enumerate() {
            let magnitude = c.norm();
            if (magnitude - 1.0).abs() > 1e-6 {
                return Err(Error::NotUnitary { index, magnitude });
            }
            let phase = c.arg();
            *c = Complex64::from_polar(magnitude.powf(exponent), phase * exponent);
        }
        Ok(Self {
            elems: from_spectrum(spec),
        })
    }
}

/// A bijective reordering of vector elements, used as an order marker when
/// encoding left-to-right word pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    /// Seeded Fisher-Yates shuffle of 0..n.
    pub fn random(seed: u64, n: usize) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        let mut rng = rng::stream("permutation", "order-marker", seed);
        map.shuffle(&mut rng);
        Self { map }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// Rebuild from an explicit index map, validating bijectivity.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter {
                    name: "permutation",
                    reason: "index map is not a bijection".to_string(),
                });
            }
            seen[i] = true;
        }
        Ok(Self { map })
    }

    pub fn dimension(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent O(n^2) oracle for circular convolution.
    fn convolve_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut out = vec![0.0; n];
        for k in 0..n {
            let mut sum = 0.0;
            for i in 0..n {
                sum += a[i] * b[(k + n - i) % n];
            }
            out[k] = sum;
        }
        out
    }

    fn rand_vec(label: &str, n: usize) -> HoloVector {
        HoloVector::random(label, 99, n).unwrap()
    }

    #[test]
    fn random_is_deterministic() {
        let a = HoloVector::random("flood", 7, 1024).unwrap();
        let b = HoloVector::random("flood", 7, 1024).unwrap();
        assert_eq!(a, b);
        let c = HoloVector::random("flood", 8, 1024).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_rejects_tiny_dimension() {
        assert!(matches!(
            HoloVector::random("x", 0, 1),
            Err(Error::InvalidDimension(1))
        ));
    }

    #[test]
    fn random_norms_concentrate_near_one() {
        let mean: f64 = (0..100)
            .map(|i| rand_vec(&format!("token-{i}"), 1024).norm())
            .sum::<f64>()
            / 100.0;
        assert!((0.9..=1.1).contains(&mean), "mean norm {mean}");
    }

    #[test]
    fn random_vectors_are_near_orthogonal() {
        let a = rand_vec("alpha", 1024);
        let b = rand_vec("beta", 1024);
        assert!(a.cosine(&b).unwrap().abs() < 0.2);
    }

    #[test]
    fn delta_is_convolution_identity() {
        let delta = HoloVector::delta(4);
        let v = HoloVector::from_elements(vec![5.0, 6.0, 7.0, 8.0]);
        let out = delta.convolve(&v).unwrap();
        for (x, y) in out.as_slice().iter().zip(v.as_slice()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn convolution_matches_hand_worked_shift() {
        // Convolving with the unit shift rotates the partner by one place.
        let a = HoloVector::from_elements(vec![0.0, 1.0, 0.0, 0.0]);
        let b = HoloVector::from_elements(vec![1.0, 2.0, 3.0, 4.0]);
        let out = a.convolve(&b).unwrap();
        let expect = convolve_direct(a.as_slice(), b.as_slice());
        assert_eq!(expect, vec![4.0, 1.0, 2.0, 3.0]);
        for (x, y) in out.as_slice().iter().zip(&expect) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn fft_convolution_matches_direct_sum() {
        for n in [4usize, 8, 64] {
            let a = rand_vec(&format!("fft-a-{n}"), n);
            let b = rand_vec(&format!("fft-b-{n}"), n);
            let fast = a.convolve(&b).unwrap();
            let slow = convolve_direct(a.as_slice(), b.as_slice());
            for (x, y) in fast.as_slice().iter().zip(&slow) {
                assert!((x - y).abs() < 1e-10, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn convolution_commutes() {
        let a = rand_vec("comm-a", 256);
        let b = rand_vec("comm-b", 256);
        let ab = a.convolve(&b).unwrap();
        let ba = b.convolve(&a).unwrap();
        for (x, y) in ab.as_slice().iter().zip(ba.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_distributes_over_addition() {
        let a = rand_vec("dist-a", 512);
        let b = rand_vec("dist-b", 512);
        let c = rand_vec("dist-c", 512);
        let lhs = a.convolve(&b.add(&c).unwrap()).unwrap();
        let rhs = a.convolve(&b).unwrap().add(&a.convolve(&c).unwrap()).unwrap();
        let diff = lhs.add(&rhs.scale(-1.0)).unwrap().norm();
        assert!(diff / rhs.norm() < 1e-9);
    }

    #[test]
    fn convolve_rejects_dimension_mismatch() {
        let a = HoloVector::zeros(8);
        let b = HoloVector::zeros(16);
        assert!(matches!(
            a.convolve(&b),
            Err(Error::DimensionMismatch { left: 8, right: 16 })
        ));
    }

    #[test]
    fn involution_reverses_tail() {
        let a = HoloVector::from_elements(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.approx_inverse().as_slice(), &[1.0, 4.0, 3.0, 2.0]);
        let delta = HoloVector::delta(8);
        assert_eq!(delta.approx_inverse(), delta);
    }

    #[test]
    fn unbinding_recovers_partner_on_average() {
        let mut total = 0.0;
        for i in 0..100 {
            let a = rand_vec(&format!("unbind-a-{i}"), 1024).normalize();
            let b = rand_vec(&format!("unbind-b-{i}"), 1024).normalize();
            let trace = a.convolve(&b).unwrap();
            let recovered = trace.convolve(&b.approx_inverse()).unwrap();
            total += recovered.cosine(&a).unwrap();
        }
        let mean = total / 100.0;
        assert!(mean > 0.5, "mean unbinding cosine {mean}");
    }

    #[test]
    fn unbinding_beats_random_foils() {
        let mut wins = 0;
        for trial in 0..100 {
            let a = rand_vec(&format!("foil-a-{trial}"), 1024);
            let b = rand_vec(&format!("foil-b-{trial}"), 1024);
            let recovered = a
                .convolve(&b)
                .unwrap()
                .convolve(&b.approx_inverse())
                .unwrap();
            let target = recovered.cosine(&a).unwrap();
            let beaten = (0..49).all(|f| {
                let foil = rand_vec(&format!("foil-{trial}-{f}"), 1024);
                recovered.cosine(&foil).unwrap() < target
            });
            if beaten {
                wins += 1;
            }
        }
        assert!(wins >= 99, "unbinding beat all foils in only {wins}/100 trials");
    }

    #[test]
    fn cosine_basics() {
        let v = rand_vec("cos", 64);
        assert!((v.cosine(&v).unwrap() - 1.0).abs() < 1e-12);
        assert!((v.cosine(&v.scale(-1.0)).unwrap() + 1.0).abs() < 1e-12);
        let x = HoloVector::from_elements(vec![1.0, 0.0]);
        let y = HoloVector::from_elements(vec![0.0, 1.0]);
        assert_eq!(x.cosine(&y).unwrap(), 0.0);
        assert_eq!(HoloVector::zeros(64).cosine(&v).unwrap(), 0.0);
    }

    #[test]
    fn normalize_basics() {
        let v = HoloVector::from_elements(vec![3.0, 4.0]);
        assert_eq!(v.normalize().as_slice(), &[0.6, 0.8]);
        let z = HoloVector::zeros(4);
        assert_eq!(z.normalize(), z);
        let r = rand_vec("norm", 512);
        assert!((r.normalize().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_round_trip_and_norm() {
        let p = Permutation::random(3, 1024);
        let v = rand_vec("perm", 1024);
        let forward = v.permute(&p, false).unwrap();
        let back = forward.permute(&p, true).unwrap();
        assert_eq!(back, v);
        assert!((forward.norm() - v.norm()).abs() < 1e-12);
        assert!(forward.cosine(&v).unwrap().abs() < 0.2);
    }

    #[test]
    fn permutation_from_map_validates() {
        assert!(Permutation::from_map(vec![1, 0, 2]).is_ok());
        assert!(Permutation::from_map(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_map(vec![0, 3]).is_err());
    }

    #[test]
    fn make_unitary_flattens_spectrum() {
        let v = rand_vec("unitary", 256);
        let u = v.make_unitary().unwrap();
        for c in spectrum(u.as_slice()) {
            assert!((c.norm() - 1.0).abs() < 1e-10);
        }
        let again = u.make_unitary().unwrap();
        let drift = again.add(&u.scale(-1.0)).unwrap().norm();
        assert!(drift < 1e-12, "not idempotent: drift {drift}");
        let delta = HoloVector::delta(64);
        let ud = delta.make_unitary().unwrap();
        let diff = ud.add(&delta.scale(-1.0)).unwrap().norm();
        assert!(diff < 1e-12);
    }

    #[test]
    fn make_unitary_rejects_degenerate_spectrum() {
        assert!(matches!(
            HoloVector::zeros(16).make_unitary(),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn fractional_power_identity_and_zero() {
        let base = rand_vec("frac", 512).make_unitary().unwrap();
        let one = base.fractional_power(1.0).unwrap();
        let drift = one.add(&base.scale(-1.0)).unwrap().norm();
        assert!(drift < 1e-10);
        let zero = base.fractional_power(0.0).unwrap();
        let delta = HoloVector::delta(512);
        let diff = zero.add(&delta.scale(-1.0)).unwrap().norm();
        assert!(diff < 1e-10);
    }

    #[test]
    fn fractional_power_requires_unitary_base() {
        let raw = rand_vec("frac-raw", 128);
        assert!(matches!(
            raw.fractional_power(0.5),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn fractional_power_exponents_add() {
        let base = rand_vec("frac-add", 1024).make_unitary().unwrap();
        for (x, y) in [(0.5, 0.5), (0.3, 0.7), (-0.4, 1.2), (1.5, -2.0), (2.0, 2.0)] {
            let combined = base
                .fractional_power(x)
                .unwrap()
                .convolve(&base.fractional_power(y).unwrap())
                .unwrap();
            let direct = base.fractional_power(x + y).unwrap();
            let cos = combined.cosine(&direct).unwrap();
            assert!(cos > 0.999, "exponents {x}+{y}: cosine {cos}");
        }
    }
}
