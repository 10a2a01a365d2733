use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linops::vector::norm2;
use crate::linops::SparseMatrix;

use super::{Provenance, SystemSequence};

/// Number of alternating layers of adjacent-plane rotations used to build `A_0`.
pub const ROTATION_LAYERS: usize = 3;

/// Half-bandwidth reserved for `A_0`: each layer after the first widens the
/// band by two.
pub const HALF_BANDWIDTH: usize = 2 * ROTATION_LAYERS - 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum {
    /// Mixed-sign eigenvalues: a bulk with magnitudes uniform in `[1, 3]` and
    /// `max(1, n / 50)` small outliers with magnitudes log-uniform in
    /// `[0.05, 0.2]`.
    Indefinite,
    /// Positive eigenvalues uniform in `[1, 10]`.
    Spd,
    /// Positive, geometrically spaced eigenvalues with `lambda_max / lambda_min = kappa`.
    Ill(f64),
}

impl std::fmt::Display for Spectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Spectrum::Indefinite => write!(f, "indefinite"),
            Spectrum::Spd => write!(f, "spd"),
            Spectrum::Ill(k) => write!(f, "ill({k:e})"),
        }
    }
}

impl std::str::FromStr for Spectrum {
    type Err = Error;

    /// Accepts `indefinite`, `spd`, `ill`, `ill(KAPPA)` or `ill:KAPPA`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "indefinite" => return Ok(Spectrum::Indefinite),
            "spd" => return Ok(Spectrum::Spd),
            "ill" => return Ok(Spectrum::Ill(1e6)),
            _ => {}
        }
        let kappa = s
            .strip_prefix("ill(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("ill:"))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown spectrum '{s}'")))?;
        let kappa: f64 =
            kappa.parse().map_err(|_| Error::InvalidParameter(format!("bad condition number in '{s}'")))?;
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("condition number must be >= 1, got {kappa}")));
        }
        Ok(Spectrum::Ill(kappa))
    }
}

/// Eigenvalues for `spectrum`, in random order.
pub fn draw_spectrum(n: usize, spectrum: Spectrum, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut lambda: Vec<f64> = match spectrum {
        Spectrum::Indefinite => {
            let outliers = (n / 50).max(1);
            (0..n)
                .map(|i| {
                    let mag = if i < outliers {
                        10f64.powf(rng.random_range(0.05f64.log10()..=0.2f64.log10()))
                    } else {
                        rng.random_range(1.0..=3.0)
                    };
                    // Alternate signs so both halves of the spectrum are populated.
                    if i % 2 == 0 {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect()
        }
        Spectrum::Spd => (0..n).map(|_| rng.random_range(1.0..=10.0)).collect(),
        Spectrum::Ill(kappa) => {
            (0..n).map(|i| if n == 1 { 1.0 } else { kappa.powf(i as f64 / (n - 1) as f64 - 1.0) }).collect()
        }
    };
    lambda.shuffle(rng);
    lambda
}

/// Symmetric band matrix with half-bandwidth `bw`, stored row-wise.
struct Band {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl Band {
    fn diagonal(values: &[f64], bw: usize) -> Self {
        let n = values.len();
        let mut b = Band { n, bw, data: vec![0.0; n * (2 * bw + 1)] };
        for (i, &v) in values.iter().enumerate() {
            b.set(i, i, v);
        }
        b
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i.abs_diff(j) <= self.bw
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[i * (2 * self.bw + 1) + j + self.bw - i]
        } else {
            0.0
        }
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        if self.in_band(i, j) {
            self.data[i * (2 * self.bw + 1) + j + self.bw - i] = v;
        } else {
            assert!(v == 0.0, "fill outside the band at ({i}, {j})");
        }
    }

    /// `A <- G A G^T` for the Givens rotation acting on coordinates `p, p+1`.
    fn rotate(&mut self, p: usize, c: f64, s: f64) {
        let lo = p.saturating_sub(self.bw + 1);
        let hi = (p + self.bw + 2).min(self.n);
        for j in lo..hi {
            let (a, b) = (self.get(p, j), self.get(p + 1, j));
            self.set(p, j, c * a - s * b);
            self.set(p + 1, j, s * a + c * b);
        }
        for i in lo..hi {
            let (a, b) = (self.get(i, p), self.get(i, p + 1));
            self.set(i, p, c * a - s * b);
            self.set(i, p + 1, s * a + c * b);
        }
    }

    fn to_sparse(&self) -> SparseMatrix {
        let mut triplets = Vec::new();
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..(i + self.bw + 1).min(self.n) {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        SparseMatrix::from_triplets(self.n, self.n, &triplets).expect("band entries are in range").assume_symmetric()
    }
}

/// `Q diag(lambda) Q^T` where `Q` is a product of [`ROTATION_LAYERS`] layers
/// of disjoint adjacent-plane Givens rotations with random angles, so the
/// result is banded and has exactly the eigenvalues `lambda`.
pub fn banded_with_spectrum(lambda: &[f64], rng: &mut ChaCha8Rng) -> SparseMatrix {
    let n = lambda.len();
    let mut band = Band::diagonal(lambda, HALF_BANDWIDTH);
    for layer in 0..ROTATION_LAYERS {
        let mut p = layer % 2;
        while p + 1 < n {
            let theta: f64 = rng.random_range(0.0..2.0 * PI);
            band.rotate(p, theta.cos(), theta.sin());
            p += 2;
        }
    }
    band.to_sparse()
}

/// Random symmetric perturbation inside the band of `A_0`, `||E||_F = 1`.
fn random_perturbation(n: usize, rng: &mut ChaCha8Rng) -> SparseMatrix {
    let bw = HALF_BANDWIDTH.min(n.saturating_sub(1));
    let mut triplets = Vec::with_capacity(2 * n);
    for _ in 0..n.max(1) {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(0..=bw)).min(n - 1);
        let v: f64 = rng.sample(StandardNormal);
        triplets.push((i, j, v));
        if i != j {
            triplets.push((j, i, v));
        }
    }
    let e = SparseMatrix::from_triplets(n, n, &triplets).expect("indices in range");
    let nrm = e.frobenius_norm();
    let scaled: Vec<_> = e.iter().map(|(i, j, v)| (i, j, v / nrm)).collect();
    SparseMatrix::from_triplets(n, n, &scaled).expect("indices in range").assume_symmetric()
}

/// Synthetic sequence `A_k = A_{k-1} + drift E_k` with `A_0` banded with a
/// prescribed spectrum and `b_k` random unit vectors. Deterministic in `seed`
/// (ChaCha8 stream).
pub fn generate_sequence(n: usize, m: usize, drift: f64, spectrum: Spectrum, seed: u64) -> Result<SystemSequence> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if !(drift >= 0.0 && drift.is_finite()) {
        return Err(Error::InvalidParameter(format!("drift must be >= 0, got {drift}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = draw_spectrum(n, spectrum, &mut rng);
    let mut a = banded_with_spectrum(&lambda, &mut rng);

    let mut systems = Vec::with_capacity(m);
    for k in 0..m {
        if k > 0 {
            let e = random_perturbation(n, &mut rng);
            if drift > 0.0 {
                a = a.add_scaled(drift, &e)?;
            }
        }
        let mut b: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let nb = norm2(&b);
        b.iter_mut().for_each(|v| *v /= nb);
        systems.push((a.clone(), b));
    }
    SystemSequence::new(systems, Provenance::Synthetic { n, m, drift, spectrum, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::frobenius_diff;

    #[test]
    fn zero_drift_repeats_the_matrix() {
        let seq = generate_sequence(30, 4, 0.0, Spectrum::Indefinite, 3).unwrap();
        for k in 1..4 {
            assert_eq!(frobenius_diff(seq.matrix(k), seq.matrix(k - 1)).unwrap(), 0.0);
        }
    }

    #[test]
    fn drift_is_exact_per_step() {
        let seq = generate_sequence(40, 5, 1e-3, Spectrum::Spd, 9).unwrap();
        for k in 1..5 {
            assert!((frobenius_diff(seq.matrix(k), seq.matrix(k - 1)).unwrap() - 1e-3).abs() <= 1e-12);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_sequence(25, 3, 1e-2, Spectrum::Ill(1e3), 5).unwrap();
        let b = generate_sequence(25, 3, 1e-2, Spectrum::Ill(1e3), 5).unwrap();
        let c = generate_sequence(25, 3, 1e-2, Spectrum::Ill(1e3), 6).unwrap();
        assert_eq!(a.systems(), b.systems());
        assert_ne!(a.systems(), c.systems());
    }

    #[test]
    fn rhs_are_unit_vectors_and_matrices_banded() {
        let seq = generate_sequence(50, 3, 1e-2, Spectrum::Indefinite, 1).unwrap();
        for (a, b) in seq.systems() {
            assert!((norm2(b) - 1.0).abs() < 1e-14);
            assert!(a.is_symmetric());
            assert!(a.iter().all(|(i, j, _)| i.abs_diff(j) <= HALF_BANDWIDTH));
        }
    }

    #[test]
    fn spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ind = draw_spectrum(100, Spectrum::Indefinite, &mut rng);
        assert!(ind.iter().any(|&l| l < 0.0) && ind.iter().any(|&l| l > 0.0));
        let ill = draw_spectrum(100, Spectrum::Ill(1e6), &mut rng);
        let (lo, hi) = ill.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        assert!((hi / lo - 1e6).abs() < 1e-3);
        assert!(draw_spectrum(10, Spectrum::Spd, &mut rng).iter().all(|&l| (1.0..=10.0).contains(&l)));
    }

    #[test]
    fn spectrum_parsing() {
        assert_eq!("spd".parse::<Spectrum>().unwrap(), Spectrum::Spd);
        assert_eq!("ill".parse::<Spectrum>().unwrap(), Spectrum::Ill(1e6));
        assert_eq!("ill(100)".parse::<Spectrum>().unwrap(), Spectrum::Ill(100.0));
        assert_eq!("ill:1e4".parse::<Spectrum>().unwrap(), Spectrum::Ill(1e4));
        assert!("ill:0.5".parse::<Spectrum>().is_err());
        assert!("wild".parse::<Spectrum>().is_err());
    }

    #[test]
    fn parameter_checks() {
        assert!(generate_sequence(1, 1, 0.0, Spectrum::Spd, 0).is_err());
        assert!(generate_sequence(5, 0, 0.0, Spectrum::Spd, 0).is_err());
        assert!(generate_sequence(5, 1, -1.0, Spectrum::Spd, 0).is_err());
    }
}
