//! Orbital entropies and the correlation functionals built from them.
//! All entropies are in nats.

use std::f64::consts::LN_2;

use crate::error::{QicasError, Result};
use crate::fci::Wavefunction;
use crate::partition::CasPartition;
use crate::rdm::{orbital_spectrum, subsystem_rdm, OrbitalSpectrum, SpinTracedRDMs};

/// `−Σ p ln p` with `0·ln 0 = 0`.
pub fn shannon(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

pub fn entropy(spectrum: &OrbitalSpectrum) -> f64 {
    shannon(&spectrum.lambdas)
}

pub fn binary_entropy(x: f64) -> f64 {
    shannon(&[x, 1.0 - x])
}

/// Inverse of the binary entropy on `[0, ½]`; `None` for `s > ln 2`.
pub fn binary_entropy_inverse(s: f64) -> Option<f64> {
    if !(0.0..=LN_2 + 1e-12).contains(&s) {
        return None;
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Per-orbital entropies and occupancies of one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    pub spectra: Vec<OrbitalSpectrum>,
    pub entropies: Vec<f64>,
    pub occupancies: Vec<f64>,
}

impl EntropyProfile {
    pub fn from_rdms(rdms: &SpinTracedRDMs) -> Result<Self> {
        let spectra = (0..rdms.d())
            .map(|i| orbital_spectrum(rdms, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_spectra(spectra))
    }

    pub fn from_spectra(spectra: Vec<OrbitalSpectrum>) -> Self {
        EntropyProfile {
            entropies: spectra.iter().map(entropy).collect(),
            occupancies: spectra.iter().map(|s| s.occupancy).collect(),
            spectra,
        }
    }

    /// Bare entropies, e.g. for threshold diagrams of external data.
    pub fn from_entropies(entropies: Vec<f64>) -> Self {
        EntropyProfile {
            spectra: Vec::new(),
            occupancies: vec![f64::NAN; entropies.len()],
            entropies,
        }
    }

    pub fn len(&self) -> usize {
        self.entropies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entropies.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entropies.iter().sum()
    }

    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = String::from("orbital_index,lambda0,lambda1,lambda2,lambda3,occupancy,entropy\n");
        for (i, ((s, occ), e)) in self.spectra.iter().zip(&self.occupancies).zip(&self.entropies).enumerate() {
            let l = s.lambdas;
            out.push_str(&format!(
                "{i},{:.p$},{:.p$},{:.p$},{:.p$},{occ:.p$},{e:.p$}\n",
                l[0],
                l[1],
                l[2],
                l[3],
                p = precision
            ));
        }
        out
    }
}

fn check_dims(rdms: &SpinTracedRDMs, part: &CasPartition) -> Result<()> {
    if rdms.d() != part.d() {
        return Err(QicasError::Shape(format!(
            "RDMs over {} orbitals, partition over {}",
            rdms.d(),
            part.d()
        )));
    }
    Ok(())
}

/// Out-of-CAS correlation: summed entropies of the non-active orbitals.
pub fn f_qi(rdms: &SpinTracedRDMs, part: &CasPartition) -> Result<f64> {
    check_dims(rdms, part)?;
    let mut total = 0.0;
    for i in 0..rdms.d() {
        if !part.is_active(i) {
            total += entropy(&orbital_spectrum(rdms, i)?);
        }
    }
    Ok(total)
}

/// Summed entropies of all orbitals.
pub fn f_qi_all(rdms: &SpinTracedRDMs) -> Result<f64> {
    Ok(EntropyProfile::from_rdms(rdms)?.total())
}

/// `I(i,j) = S(ρ_i) + S(ρ_j) − S(ρ_ij)`, symmetric in its arguments.
pub fn mutual_information(psi: &Wavefunction, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(QicasError::Range(format!("mutual information needs distinct orbitals, got {i} twice")));
    }
    let (a, b) = (i.min(j), i.max(j));
    let pair = subsystem_rdm(psi, &[a, b])?;
    let rho = pair.to_dense()?;
    // single-orbital marginals straight from the pair state
    let mut pa = [0.0; 4];
    let mut pb = [0.0; 4];
    for x in 0..4 {
        for y in 0..4 {
            let v = rho[(4 * x + y, 4 * x + y)];
            pa[x] += v;
            pb[y] += v;
        }
    }
    Ok(shannon(&pa) + shannon(&pb) - pair.entropy()?)
}

/// Full `D×D` mutual-information matrix (zero diagonal).
pub fn mutual_information_matrix(psi: &Wavefunction) -> Result<nalgebra::DMatrix<f64>> {
    let d = psi.space().d();
    let mut m = nalgebra::DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let v = mutual_information(psi, i, j)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

pub fn mutual_information_csv(m: &nalgebra::DMatrix<f64>, precision: usize) -> String {
    let mut out = String::from("i,j,value\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                out.push_str(&format!("{i},{j},{:.p$}\n", m[(i, j)], p = precision));
            }
        }
    }
    out
}

/// Split of the out-of-CAS correlation into the multipartite correlation
/// inside the non-active space and its entanglement with the active space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub f_qi: f64,
    pub i_n: f64,
    pub e_an: f64,
}

pub fn decompose_correlation(psi: &Wavefunction, part: &CasPartition) -> Result<CorrelationReport> {
    let rdms = SpinTracedRDMs::from_wavefunction(psi)?;
    let f = f_qi(&rdms, part)?;
    let e_an = subsystem_rdm(psi, &part.nonactive())?.entropy()?;
    Ok(CorrelationReport {
        f_qi: f,
        i_n: f - e_an,
        e_an,
    })
}

/// Number of orbitals whose entropy exceeds `τ·max S` for each `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdDiagram {
    pub points: Vec<(f64, usize)>,
    pub n_orbitals: usize,
    /// Set when every orbital entropy is zero.
    pub degenerate: bool,
}

impl ThresholdDiagram {
    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = String::from("threshold,count\n");
        for (t, c) in &self.points {
            out.push_str(&format!("{t:.p$},{c}\n", p = precision.min(4)));
        }
        out
    }
}

/// `τ = 0.01, 0.02, …, 0.50`.
pub fn default_thresholds() -> Vec<f64> {
    (1..=50).map(|k| k as f64 / 100.0).collect()
}

pub fn threshold_diagram(profile: &EntropyProfile, thresholds: &[f64]) -> Result<ThresholdDiagram> {
    if profile.is_empty() {
        return Err(QicasError::Shape("empty entropy profile".into()));
    }
    let max = profile.entropies.iter().copied().fold(0.0, f64::max);
    let points = thresholds
        .iter()
        .map(|&t| (t, profile.entropies.iter().filter(|&&s| s > t * max && max > 0.0).count()))
        .collect();
    Ok(ThresholdDiagram {
        points,
        n_orbitals: profile.len(),
        degenerate: max <= 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasSizeSuggestion {
    pub d_cas: usize,
    /// First and last threshold of the plateau.
    pub span: (f64, f64),
}

pub const DEFAULT_MIN_RUN: usize = 5;

/// Takes the first run of at least `min_run` equal counts, scanning upward
/// in `τ` and skipping the run where every orbital is counted.
pub fn suggest_cas_size(diagram: &ThresholdDiagram, min_run: usize) -> Result<CasSizeSuggestion> {
    if diagram.degenerate {
        return Err(QicasError::DegenerateProfile);
    }
    let pts = &diagram.points;
    let mut start = 0;
    while start < pts.len() {
        let mut end = start;
        while end + 1 < pts.len() && pts[end + 1].1 == pts[start].1 {
            end += 1;
        }
        let count = pts[start].1;
        if end + 1 - start >= min_run.max(1) && count != diagram.n_orbitals {
            return Ok(CasSizeSuggestion {
                d_cas: count,
                span: (pts[start].0, pts[end].0),
            });
        }
        start = end + 1;
    }
    Err(QicasError::NoPlateau { min_run })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_limits() {
        let pure = OrbitalSpectrum::from_diagonals(0.0, 0.0, 0.0);
        assert_eq!(entropy(&pure), 0.0);
        let mixed = OrbitalSpectrum {
            lambdas: [0.25; 4],
            occupancy: 1.0,
        };
        assert!((entropy(&mixed) - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn dimer_site_entropy_value() {
        let s = shannon(&[0.0732233, 0.4267767, 0.4267767, 0.0732233]);
        assert!((s - 1.1097).abs() < 1e-4);
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.5) - LN_2).abs() < 1e-15);
        assert_eq!(binary_entropy(0.3), binary_entropy(1.0 - 0.3));
        let x = binary_entropy_inverse(binary_entropy(0.1)).unwrap();
        assert!((x - 0.1).abs() < 1e-12);
        assert!(binary_entropy_inverse(1.0).is_none());
    }

    #[test]
    fn threshold_counts() {
        let p = EntropyProfile::from_entropies(vec![1.0, 1.0, 0.1, 0.1]);
        let d = threshold_diagram(&p, &[0.05, 0.2]).unwrap();
        assert_eq!(d.points, vec![(0.05, 4), (0.2, 2)]);
        let full = threshold_diagram(&p, &default_thresholds()).unwrap();
        assert!(full.points.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn degenerate_profile() {
        let p = EntropyProfile::from_entropies(vec![0.0; 3]);
        let d = threshold_diagram(&p, &default_thresholds()).unwrap();
        assert!(d.degenerate);
        assert!(matches!(suggest_cas_size(&d, 5), Err(QicasError::DegenerateProfile)));
    }

    fn diagram(counts: &[usize], n: usize) -> ThresholdDiagram {
        ThresholdDiagram {
            points: counts.iter().enumerate().map(|(k, &c)| ((k + 1) as f64 / 100.0, c)).collect(),
            n_orbitals: n,
            degenerate: false,
        }
    }

    #[test]
    fn plateau_detection() {
        let d = diagram(&[12, 12, 12, 12, 12, 12, 10, 9, 8, 8, 8, 8, 8, 8, 7, 6], 12);
        let s = suggest_cas_size(&d, 5).unwrap();
        assert_eq!(s.d_cas, 8);
        assert_eq!(s.span, (0.09, 0.14));
    }

    #[test]
    fn first_plateau_wins() {
        let d = diagram(&[9, 9, 9, 9, 9, 6, 6, 6, 6, 6, 6, 6, 6], 12);
        assert_eq!(suggest_cas_size(&d, 5).unwrap().d_cas, 9);
    }

    #[test]
    fn no_plateau() {
        let d = diagram(&[10, 9, 8, 7, 6, 5, 4, 3, 2, 1], 12);
        assert!(matches!(suggest_cas_size(&d, 5), Err(QicasError::NoPlateau { .. })));
    }
}
