//! Point sets in the unit hypercube: Halton low-discrepancy sets and seeded
//! uniform random sets, plus the affine map onto a truncation hypercube.
//!
//! Coordinate `j` of Halton point `i` is the radical inverse of `i` in the
//! `j`-th prime base. Uniform sets are drawn from a ChaCha8 stream whose
//! word position is derived from the point index, so `(seed, index)` alone
//! determines a point and any subset can be regenerated independently.

pub mod primes;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use primes::{first_n_primes, nth_prime, primes_up_to};

/// Largest dimension accepted by [`halton`].
pub const HALTON_MAX_DIM: usize = 64;

/// How a point set was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointSetKind {
    /// Halton points `start_index .. start_index + m` with per-column prime bases.
    Halton { start_index: u64, bases: Vec<u64> },
    /// Independent uniform draws determined by `seed`.
    Uniform { seed: u64 },
    /// Points supplied by the caller (e.g. read from CSV).
    External,
}

/// Serializable summary of a point set, used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub kind: String,
    pub m: usize,
    pub p: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_index: Option<u64>,
}

/// `m` points in `[0,1)^p`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<f64>,
    m: usize,
    p: usize,
    kind: PointSetKind,
}

impl PointSet {
    /// Wraps caller-supplied rows. Every coordinate must lie in `[0,1)`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::invalid("point set must contain at least one point"));
        }
        let p = rows[0].len();
        if p == 0 {
            return Err(Error::invalid("points must have dimension >= 1"));
        }
        let mut coords = Vec::with_capacity(m * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch { expected: p, actual: row.len() });
            }
            for &x in row {
                if !(0.0..1.0).contains(&x) {
                    return Err(Error::invalid(format!("coordinate {x} outside [0,1)")));
                }
            }
            coords.extend_from_slice(row);
        }
        Ok(PointSet { coords, m, p, kind: PointSetKind::External })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn kind(&self) -> &PointSetKind {
        &self.kind
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.p)
    }

    /// Row-major coordinates.
    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn descriptor(&self) -> GridDescriptor {
        let (kind, seed, start_index) = match &self.kind {
            PointSetKind::Halton { start_index, .. } => ("halton", None, Some(*start_index)),
            PointSetKind::Uniform { seed } => ("uniform", Some(*seed), None),
            PointSetKind::External => ("external", None, None),
        };
        GridDescriptor { kind: kind.to_string(), m: self.m, p: self.p, seed, start_index }
    }
}

/// Base-`b` radical inverse: the digits of `i` mirrored about the radix point.
///
/// Computed as `reverse(i) / b^k` in 128-bit integers, where `k` is the number
/// of base-`b` digits of `i`, so the only rounding is the final division.
pub fn radical_inverse(i: u64, b: u64) -> Result<f64> {
    if b < 2 {
        return Err(Error::invalid(format!("radical inverse base must be >= 2, got {b}")));
    }
    Ok(radical_inverse_unchecked(i, b))
}

fn radical_inverse_unchecked(mut i: u64, b: u64) -> f64 {
    let b128 = b as u128;
    let mut reversed: u128 = 0;
    let mut scale: u128 = 1;
    while i > 0 {
        reversed = reversed * b128 + (i % b) as u128;
        scale *= b128;
        i /= b;
    }
    let x = reversed as f64 / scale as f64;
    // (scale - 1) / scale can round up to 1.0 once scale exceeds 2^53.
    if x < 1.0 {
        x
    } else {
        1.0 - f64::EPSILON / 2.0
    }
}

/// Halton points with global indices `start_index .. start_index + m`,
/// coordinate `j` in base `c_j` (the `j`-th prime).
pub fn halton(m: usize, p: usize, start_index: u64) -> Result<PointSet> {
    if m == 0 {
        return Err(Error::invalid("halton: m must be >= 1"));
    }
    if p == 0 || p > HALTON_MAX_DIM {
        return Err(Error::invalid(format!("halton: dimension must be in 1..={HALTON_MAX_DIM}, got {p}")));
    }
    let bases = first_n_primes(p);
    let mut coords = Vec::with_capacity(m * p);
    for i in 0..m as u64 {
        let idx = start_index.checked_add(i).ok_or_else(|| Error::invalid("halton: index overflows u64"))?;
        coords.extend(bases.iter().map(|&b| radical_inverse_unchecked(idx, b)));
    }
    Ok(PointSet { coords, m, p, kind: PointSetKind::Halton { start_index, bases } })
}

/// ChaCha8 words consumed per `f64` draw.
const WORDS_PER_DRAW: u128 = 2;

/// Coordinates of point `index` of the uniform set with the given seed.
pub fn uniform_point(seed: u64, p: usize, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(index as u128 * p as u128 * WORDS_PER_DRAW);
    (0..p).map(|_| rng.random::<f64>()).collect()
}

/// `m` independent uniform points in `[0,1)^p`; point `i` equals
/// [`uniform_point`]`(seed, p, i)`.
pub fn uniform_grid(m: usize, p: usize, seed: u64) -> Result<PointSet> {
    if m == 0 || p == 0 {
        return Err(Error::invalid("uniform_grid: m and p must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..m * p).map(|_| rng.random::<f64>()).collect();
    Ok(PointSet { coords, m, p, kind: PointSetKind::Uniform { seed } })
}

/// Maps unit-cube points onto `[center - radius, center + radius]^p` via
/// `θ = 2·radius·(x − 1/2) + center`. Returns row-major coordinates.
pub fn scale_to_box(ps: &PointSet, center: &[f64], radius: f64) -> Result<Vec<f64>> {
    if center.len() != ps.p() {
        return Err(Error::DimensionMismatch { expected: ps.p(), actual: center.len() });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive and finite, got {radius}")));
    }
    let mut out = Vec::with_capacity(ps.as_slice().len());
    for row in ps.rows() {
        out.extend(row.iter().zip(center).map(|(&x, &c)| affine(x, c, radius)));
    }
    Ok(out)
}

#[inline]
pub(crate) fn affine(x: f64, center: f64, radius: f64) -> f64 {
    2.0 * radius * (x - 0.5) + center
}

/// Inverse of [`scale_to_box`] for a single coordinate.
pub fn unscale(theta: f64, center: f64, radius: f64) -> f64 {
    (theta - center) / (2.0 * radius) + 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Digit-expansion oracle: explicit base-b digits, then Σ d_k b^{-k-1}
    /// evaluated in exact rational arithmetic (numerator / denominator).
    fn radical_inverse_oracle(i: u64, b: u64) -> (u128, u128) {
        let mut digits = Vec::new();
        let mut v = i;
        while v > 0 {
            digits.push(v % b);
            v /= b;
        }
        let mut num: u128 = 0;
        let mut den: u128 = 1;
        for d in digits {
            den *= b as u128;
            num = num * b as u128 + d as u128;
        }
        (num, den)
    }

    #[test]
    fn radical_inverse_examples() {
        assert_eq!(radical_inverse(0, 2).unwrap(), 0.0);
        assert_eq!(radical_inverse(3, 2).unwrap(), 0.75);
        assert!((radical_inverse(5, 3).unwrap() - 7.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn radical_inverse_rejects_small_base() {
        assert!(radical_inverse(3, 1).is_err());
        assert!(radical_inverse(3, 0).is_err());
    }

    #[test]
    fn radical_inverse_matches_oracle() {
        for b in [2u64, 3, 5, 7, 11, 97] {
            for i in 0..500u64 {
                let (num, den) = radical_inverse_oracle(i, b);
                let expected = num as f64 / den as f64;
                assert_eq!(radical_inverse(i, b).unwrap(), expected, "i={i} b={b}");
            }
        }
    }

    #[test]
    fn radical_inverse_stays_below_one_for_huge_indices() {
        for b in [2u64, 3, 7, 251] {
            let x = radical_inverse(u64::MAX, b).unwrap();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn halton_examples() {
        let ps = halton(4, 1, 0).unwrap();
        assert_eq!(ps.as_slice(), &[0.0, 0.5, 0.25, 0.75]);

        let ps = halton(2, 2, 0).unwrap();
        assert_eq!(ps.row(0), &[0.0, 0.0]);
        assert_eq!(ps.row(1)[0], 0.5);
        assert!((ps.row(1)[1] - 1.0 / 3.0).abs() < 1e-16);

        let ps = halton(1, 3, 5).unwrap();
        let r = ps.row(0);
        assert_eq!(r[0], 5.0 / 8.0);
        assert!((r[1] - 7.0 / 9.0).abs() < 1e-16);
        // 5 = "10" in base 5, mirrored to 0.01 in base 5.
        assert!((r[2] - 1.0 / 25.0).abs() < 1e-16);
    }

    #[test]
    fn halton_rejects_bad_dimensions() {
        assert!(halton(0, 2, 0).is_err());
        assert!(halton(3, 0, 0).is_err());
        assert!(halton(3, HALTON_MAX_DIM + 1, 0).is_err());
        assert!(halton(3, HALTON_MAX_DIM, 0).is_ok());
    }

    #[test]
    fn halton_records_bases_and_start() {
        let ps = halton(3, 4, 7).unwrap();
        match ps.kind() {
            PointSetKind::Halton { start_index, bases } => {
                assert_eq!(*start_index, 7);
                assert_eq!(bases, &vec![2, 3, 5, 7]);
            }
            other => panic!("unexpected kind {other:?}"),
        }
        let d = ps.descriptor();
        assert_eq!(d.kind, "halton");
        assert_eq!(d.start_index, Some(7));
        assert_eq!(d.seed, None);
    }

    #[test]
    fn van_der_corput_stratification() {
        // With m = 2^r points, each interval [t/2^r, (t+1)/2^r) holds exactly one.
        for r in 1..=4u32 {
            let m = 1usize << r;
            let ps = halton(m, 1, 0).unwrap();
            let mut hits = vec![0usize; m];
            for x in ps.as_slice() {
                hits[(x * m as f64).floor() as usize] += 1;
            }
            assert!(hits.iter().all(|&h| h == 1), "r = {r}: {hits:?}");
        }
    }

    #[test]
    fn uniform_examples() {
        let a = uniform_grid(5, 2, 42).unwrap();
        let b = uniform_grid(5, 2, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, uniform_grid(5, 2, 43).unwrap());

        let ps = uniform_grid(3, 4, 0).unwrap();
        assert_eq!(ps.as_slice().len(), 12);
        assert!(ps.as_slice().iter().all(|x| (0.0..1.0).contains(x)));

        let ps = uniform_grid(10_000, 1, 7).unwrap();
        let mean = ps.as_slice().iter().sum::<f64>() / 10_000.0;
        // 3 sigma with sigma = 1/sqrt(12 * 1e4) ~ 0.00289
        assert!((mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn uniform_points_are_individually_addressable() {
        let ps = uniform_grid(50, 3, 9).unwrap();
        for i in [0usize, 1, 17, 49] {
            assert_eq!(ps.row(i), uniform_point(9, 3, i as u64).as_slice());
        }
    }

    #[test]
    fn scale_to_box_examples() {
        let ps = PointSet::from_rows(&[vec![0.5, 0.5, 0.5]]).unwrap();
        let out = scale_to_box(&ps, &[1.0, -2.0, 3.5], 0.7).unwrap();
        assert_eq!(out, vec![1.0, -2.0, 3.5]);

        let ps = PointSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(scale_to_box(&ps, &[1.0, 2.0], 0.5).unwrap(), vec![0.5, 1.5]);

        let ps = PointSet::from_rows(&[vec![0.75]]).unwrap();
        assert_eq!(scale_to_box(&ps, &[0.0], 2.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn scale_to_box_errors() {
        let ps = halton(4, 2, 0).unwrap();
        assert!(matches!(scale_to_box(&ps, &[0.0], 1.0), Err(Error::DimensionMismatch { expected: 2, actual: 1 })));
        assert!(scale_to_box(&ps, &[0.0, 0.0], 0.0).is_err());
        assert!(scale_to_box(&ps, &[0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn from_rows_validation() {
        assert!(PointSet::from_rows(&[]).is_err());
        assert!(PointSet::from_rows(&[vec![1.0]]).is_err());
        assert!(PointSet::from_rows(&[vec![0.1, 0.2], vec![0.3]]).is_err());
        assert_eq!(PointSet::from_rows(&[vec![0.1]]).unwrap().descriptor().kind, "external");
    }
}
