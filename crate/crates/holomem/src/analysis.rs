//! Vector-space and time-code analyses exported as CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::hrr::HoloVector;
use crate::model::Model;
use crate::time::OscillatorBank;

const POWER_ITERATION_TOL: f64 = 1e-9;
const POWER_ITERATION_MAX: usize = 10_000;

/// Which per-token vectors to project.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorSource {
    Memory,
    Environment,
}

/// A 2-d projection of token vectors onto the top two principal components.
#[derive(Debug, Clone)]
pub struct Projection2D {
    /// (token, x, y) coordinates in component space.
    pub rows: Vec<(String, f64, f64)>,
    pub component1: HoloVector,
    pub component2: HoloVector,
}

/// Top-2 PCA by power iteration with deflation.
///
/// Vectors are mean-centered; each component starts from a seeded random
/// direction, is orthogonalized against earlier components every step, and
/// iterates to tolerance 1e-9 (at most 10000 steps). Component signs are
/// fixed so the largest-magnitude coordinate on each axis is positive.
pub fn pca_2d(vectors: &[(String, HoloVector)], seed: u64) -> Result<Projection2D> {
    if vectors.len() < 3 {
        return Err(Error::InsufficientData(vectors.len()));
    }
    let n = vectors[0].1.dimension();
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    for (_, v) in vectors {
        if v.dimension() != n {
            return Err(Error::DimensionMismatch {
                left: v.dimension(),
                right: n,
            });
        }
    }

    let count = vectors.len();
    let mut mean = vec![0.0; n];
    for (_, v) in vectors {
        for (m, x) in mean.iter_mut().zip(v.as_slice()) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= count as f64;
    }
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|(_, v)| {
            v.as_slice()
                .iter()
                .zip(&mean)
                .map(|(x, m)| x - m)
                .collect()
        })
        .collect();

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(2);
    for index in 0..2 {
        let component = dominant_direction(&centered, &components, index, seed)?;
        components.push(component);
    }

    // Variance ordering is a property of power iteration; enforce it anyway
    // so degenerate spectra cannot slip through out of order.
    let variance = |c: &[f64]| -> f64 {
        centered
            .iter()
            .map(|row| dot(row, c).powi(2))
            .sum::<f64>()
            / count as f64
    };
    if variance(&components[1]) > variance(&components[0]) {
        components.swap(0, 1);
    }

    let mut rows: Vec<(String, f64, f64)> = vectors
        .iter()
        .zip(&centered)
        .map(|((token, _), row)| (token.clone(), dot(row, &components[0]), dot(row, &components[1])))
        .collect();

    // Sign convention: the largest-magnitude coordinate on each axis is
    // positive.
    for axis in 0..2 {
        let extreme = rows
            .iter()
            .map(|r| if axis == 0 { r.1 } else { r.2 })
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(std::cmp::Ordering::Equal));
        if let Some(extreme) = extreme {
            if extreme < 0.0 {
                for c in components[axis].iter_mut() {
                    *c = -*c;
                }
                for r in rows.iter_mut() {
                    if axis == 0 {
                        r.1 = -r.1;
                    } else {
                        r.2 = -r.2;
                    }
                }
            }
        }
    }

    Ok(Projection2D {
        rows,
        component1: HoloVector::from_elements(components[0].clone()),
        component2: HoloVector::from_elements(components[1].clone()),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Power iteration for the dominant direction of the centered data,
/// restricted to the orthogonal complement of `previous`.
fn dominant_direction(
    centered: &[Vec<f64>],
    previous: &[Vec<f64>],
    index: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = centered[0].len();
    let mut v = seeded_unit_start(n, index, seed);
    orthogonalize(&mut v, previous);
    normalize_in_place(&mut v);

    for _ in 0..POWER_ITERATION_MAX {
        // w = (X^T X) v without forming the covariance matrix.
        let mut w = vec![0.0; n];
        for row in centered {
            let proj = dot(row, &v);
            for (wi, xi) in w.iter_mut().zip(row) {
                *wi += proj * xi;
            }
        }
        let raw_norm = dot(&w, &w).sqrt();
        orthogonalize(&mut w, previous);
        let norm = dot(&w, &w).sqrt();
        // No variance left in this subspace (zero data, or numerically
        // nothing beyond the earlier components): keep the current unit
        // direction, which is already orthogonal to them.
        if norm < 1e-300 || norm <= raw_norm * 1e-12 {
            return Ok(v);
        }
        for wi in w.iter_mut() {
            *wi /= norm;
        }
        let drift = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        v = w;
        if drift <= POWER_ITERATION_TOL {
            return Ok(v);
        }
    }
    Err(Error::Convergence {
        iterations: POWER_ITERATION_MAX,
    })
}

fn seeded_unit_start(n: usize, index: usize, seed: u64) -> Vec<f64> {
    let v = HoloVector::random_in_domain("pca-start", &index.to_string(), seed, n);
    v.normalize().as_slice().to_vec()
}

fn orthogonalize(v: &mut [f64], previous: &[Vec<f64>]) {
    for p in previous {
        let proj = dot(v, p);
        for (vi, pi) in v.iter_mut().zip(p) {
            *vi -= proj * pi;
        }
    }
}

fn normalize_in_place(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Fixed CSV float format: 9 significant digits, scientific notation.
pub(crate) fn format_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Render a projection as `token,x,y` CSV.
pub fn projection_csv(projection: &Projection2D) -> String {
    let mut out = String::from("token,x,y\n");
    for (token, x, y) in &projection.rows {
        let _ = writeln!(out, "{token},{},{}", format_sig9(*x), format_sig9(*y));
    }
    out
}

/// The matrix CSV path derived from the lag CSV path: `sim.csv` becomes
/// `sim.matrix.csv`.
pub fn matrix_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.matrix.{}", ext.to_string_lossy()),
        None => format!("{stem}.matrix"),
    };
    path.with_file_name(name)
}

/// Export time-code self-similarity: a `lag,similarity` CSV averaging over
/// equal lags at `path`, and the full `t1,t2,similarity` matrix alongside it
/// (see [`matrix_path`]).
pub fn export_self_similarity(
    bank: &OscillatorBank,
    t_max: u64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let matrix = bank.self_similarity(t_max)?;

    let mut lag_csv = String::from("lag,similarity\n");
    for (lag, mean) in matrix.lag_means().iter().enumerate() {
        let _ = writeln!(lag_csv, "{lag},{}", format_sig9(*mean));
    }
    fs::write(path, lag_csv)?;

    let mut matrix_csv = String::from("t1,t2,similarity\n");
    for t1 in 1..=t_max {
        for t2 in 1..=t_max {
            let _ = writeln!(matrix_csv, "{t1},{t2},{}", format_sig9(matrix.get(t1, t2)));
        }
    }
    fs::write(matrix_path(path), matrix_csv)?;
    Ok(())
}

impl Model {
    /// Project the lexicon's vectors (memory by default, environment on
    /// request) onto their top two principal components.
    pub fn token_projection(&self, source: VectorSource) -> Result<Projection2D> {
        let vectors: Vec<(String, HoloVector)> = self
            .list_tokens()
            .into_iter()
            .map(|info| {
                let entry = self.lexicon_entry(&info.token).expect("listed token");
                let v = match source {
                    VectorSource::Memory => entry.memory().clone(),
                    VectorSource::Environment => entry.environment().clone(),
                };
                (info.token, v)
            })
            .collect();
        pca_2d(&vectors, self.config().seed)
    }

    /// Write the token projection as CSV.
    pub fn export_pca(&self, path: impl AsRef<Path>, source: VectorSource) -> Result<()> {
        let projection = self.token_projection(source)?;
        fs::write(path, projection_csv(&projection))?;
        Ok(())
    }
}
