//! Correlation-versus-energy scans over randomly perturbed bases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::casci::casci_energy_with;
use crate::error::{QicasError, Result};
use crate::fci::{ground_state, FciOptions};
use crate::measures::f_qi;
use crate::model::MolecularHamiltonian;
use crate::partition::CasPartition;
use crate::rdm::SpinTracedRDMs;
use crate::rotation::{random_perturbation, OrbitalRotation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample {
    pub f_qi: f64,
    pub e_casci: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub fci: FciOptions,
    /// Worker threads; 1 runs sequentially. Results do not depend on it.
    pub jobs: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            fci: FciOptions::default(),
            jobs: 1,
        }
    }
}

/// Per-sample seeds drawn from one master seed.
pub fn sample_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random()).collect()
}

pub fn scan_random_bases(
    h: &MolecularHamiltonian,
    part: &CasPartition,
    n: usize,
    center: &OrbitalRotation,
    scale: f64,
    seed: u64,
) -> Result<Vec<ScanSample>> {
    scan_random_bases_with(h, part, n, center, scale, seed, &ScanOptions::default())
}

pub fn scan_random_bases_with(
    h: &MolecularHamiltonian,
    part: &CasPartition,
    n: usize,
    center: &OrbitalRotation,
    scale: f64,
    seed: u64,
    opts: &ScanOptions,
) -> Result<Vec<ScanSample>> {
    if !scale.is_finite() || scale < 0.0 {
        return Err(QicasError::Config(format!("scan scale must be non-negative, got {scale}")));
    }
    let (_, psi) = ground_state(h, h.n_elec, h.ms2, &opts.fci)?;
    let rdms = SpinTracedRDMs::from_wavefunction(&psi)?;
    let sample = |&s: &u64| -> Result<ScanSample> {
        let u = random_perturbation(center, scale, s);
        Ok(ScanSample {
            f_qi: f_qi(&rdms.rotated(&u)?, part)?,
            e_casci: casci_energy_with(h, &u, part, &opts.fci)?.e_total,
            seed: s,
        })
    };
    let seeds = sample_seeds(seed, n);
    let mut samples: Vec<ScanSample> = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| QicasError::Config(format!("thread pool: {e}")))?;
        pool.install(|| seeds.par_iter().map(sample).collect::<Result<_>>())?
    } else {
        seeds.iter().map(sample).collect::<Result<_>>()?
    };
    samples.sort_by(|a, b| a.f_qi.total_cmp(&b.f_qi).then(a.seed.cmp(&b.seed)));
    Ok(samples)
}

pub fn scan_csv(samples: &[ScanSample], precision: usize) -> String {
    let mut out = String::from("f_qi,e_casci,seed\n");
    for s in samples {
        out.push_str(&format!("{:.p$},{:.p$},{}\n", s.f_qi, s.e_casci, s.seed, p = precision));
    }
    out
}

/// Pearson correlation coefficient; `None` for fewer than two points or a
/// constant series.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Summary statistics of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSummary {
    pub pearson: Option<f64>,
    /// Energy rank (0 = lowest) of the sample with the smallest `f_qi`.
    pub min_f_energy_rank: usize,
    pub n: usize,
}

impl ScanSummary {
    /// Whether the smallest-`f_qi` sample lies in the lowest tenth of energies.
    pub fn min_f_in_lowest_decile(&self) -> bool {
        self.n > 0 && self.min_f_energy_rank * 10 < self.n.max(10)
    }
}

pub fn summarize_scan(samples: &[ScanSample]) -> ScanSummary {
    let xs: Vec<f64> = samples.iter().map(|s| s.f_qi).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.e_casci).collect();
    let min_f = samples
        .iter()
        .min_by(|a, b| a.f_qi.total_cmp(&b.f_qi))
        .map(|s| s.e_casci);
    let rank = min_f.map_or(0, |e| ys.iter().filter(|&&y| y < e).count());
    ScanSummary {
        pearson: pearson(&xs, &ys),
        min_f_energy_rank: rank,
        n: samples.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hubbard, HubbardParams};
    use crate::rotation::random_orthogonal;

    #[test]
    fn pearson_limits() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 1.0], &[2.0, 3.0]), None);
        assert_eq!(pearson(&[1.0], &[2.0]), None);
    }

    #[test]
    fn zero_scale_repeats_the_center() {
        let h = build_hubbard(HubbardParams::chain(4, 1.0, 4.0)).unwrap();
        let part = CasPartition::ordered(4, 4, 2, 2).unwrap();
        let center = random_orthogonal(4, 3);
        let s = scan_random_bases(&h, &part, 5, &center, 0.0, 1).unwrap();
        assert!(s.windows(2).all(|w| w[0].f_qi == w[1].f_qi && w[0].e_casci == w[1].e_casci));
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let h = build_hubbard(HubbardParams::chain(4, 1.0, 4.0)).unwrap();
        let part = CasPartition::ordered(4, 4, 2, 2).unwrap();
        let c = OrbitalRotation::identity(4);
        let a = scan_csv(&scan_random_bases(&h, &part, 8, &c, 0.3, 9).unwrap(), 9);
        let b = scan_csv(&scan_random_bases(&h, &part, 8, &c, 0.3, 9).unwrap(), 9);
        let opts = ScanOptions {
            jobs: 4,
            ..ScanOptions::default()
        };
        let p = scan_csv(&scan_random_bases_with(&h, &part, 8, &c, 0.3, 9, &opts).unwrap(), 9);
        assert_eq!(a, b);
        assert_eq!(a, p);
        assert_eq!(a.lines().count(), 9);
    }

    #[test]
    fn decile_rank() {
        let samples: Vec<ScanSample> = (0..20)
            .map(|k| ScanSample {
                f_qi: k as f64,
                e_casci: if k == 0 { -1.0 } else { k as f64 },
                seed: k,
            })
            .collect();
        let s = summarize_scan(&samples);
        assert_eq!(s.min_f_energy_rank, 0);
        assert!(s.min_f_in_lowest_decile());
    }
}
