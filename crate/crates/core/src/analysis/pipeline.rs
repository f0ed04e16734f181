//! End-to-end run: exact solve, entropies, optional size selection, orbital
//! optimization, CASCI and bound check.

use crate::casci::casci_energy_with;
use crate::error::{QicasError, Result};
use crate::fci::{ground_state, FciOptions};
use crate::measures::{default_thresholds, suggest_cas_size, threshold_diagram, EntropyProfile, DEFAULT_MIN_RUN};
use crate::model::{transform_integrals, write_orbitals, MolecularHamiltonian};
use crate::optimizer::{history_csv, minimize_total_entropy, optimize, QicasConfig};
use crate::partition::CasPartition;
use crate::rdm::SpinTracedRDMs;
use crate::rotation::OrbitalRotation;

use super::bound::{verify_bound_with, BoundOptions};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub n_cas: usize,
    /// Active-space size; taken from the threshold diagram when `None`.
    pub d_cas: Option<usize>,
    /// Explicit active orbitals in the input basis.
    pub active: Option<Vec<usize>>,
    pub qicas: QicasConfig,
    pub fci: FciOptions,
    pub select_size: bool,
    /// Starting basis; orbital output is expressed in the input basis.
    pub basis: Option<OrbitalRotation>,
    pub min_run: usize,
    pub precision: usize,
}

impl PipelineConfig {
    pub fn new(n_cas: usize, d_cas: Option<usize>) -> Self {
        PipelineConfig {
            n_cas,
            d_cas,
            active: None,
            qicas: QicasConfig::default(),
            fci: FciOptions::default(),
            select_size: d_cas.is_none(),
            basis: None,
            min_run: DEFAULT_MIN_RUN,
            precision: 9,
        }
    }
}

/// Named output files and a key=value summary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportBundle {
    pub files: Vec<(String, String)>,
    pub summary: Vec<(String, String)>,
}

impl ReportBundle {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn summary_text(&self) -> String {
        self.summary.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    fn put(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }
}

fn orbitals_text(u: &OrbitalRotation) -> Result<String> {
    let mut buf = Vec::new();
    write_orbitals(u, &mut buf).map_err(|e| QicasError::io("orbitals", e))?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}

pub fn run_pipeline(input: &MolecularHamiltonian, cfg: &PipelineConfig) -> Result<ReportBundle> {
    let p = cfg.precision;
    let mut out = ReportBundle::default();
    let d = input.d();
    let start = cfg.basis.clone().unwrap_or_else(|| OrbitalRotation::identity(d));
    let rotated;
    let h = match &cfg.basis {
        Some(u) => {
            rotated = transform_integrals(input, u).map_err(|e| e.in_stage("basis"))?;
            &rotated
        }
        None => input,
    };

    let (e_fci, psi) = ground_state(h, h.n_elec, h.ms2, &cfg.fci).map_err(|e| e.in_stage("solve"))?;
    out.put("e_fci", format!("{e_fci:.p$}"));
    let rdms = SpinTracedRDMs::from_wavefunction(&psi).map_err(|e| e.in_stage("rdm"))?;
    let initial = EntropyProfile::from_rdms(&rdms).map_err(|e| e.in_stage("entropy"))?;
    out.files.push(("entropy_initial.csv".into(), initial.to_csv(p)));

    let mut d_cas = cfg.d_cas;
    if cfg.select_size {
        let stage = |e: QicasError| e.in_stage("size");
        let min = minimize_total_entropy(&rdms, &cfg.qicas).map_err(stage)?;
        let profile = EntropyProfile::from_rdms(&min.rdms).map_err(stage)?;
        let diagram = threshold_diagram(&profile, &default_thresholds()).map_err(stage)?;
        out.files.push(("entropy_total_min.csv".into(), profile.to_csv(p)));
        out.files.push(("threshold.csv".into(), diagram.to_csv(p)));
        out.put("f_total_min", format!("{:.p$}", min.f_star));
        match suggest_cas_size(&diagram, cfg.min_run) {
            Ok(s) => {
                out.put("suggested_d_cas", s.d_cas);
                d_cas.get_or_insert(s.d_cas);
            }
            Err(e) if d_cas.is_some() => out.put("suggested_d_cas", format!("none ({e})")),
            Err(e) => return Err(stage(e)),
        }
    }
    let d_cas = d_cas.ok_or_else(|| QicasError::Config("active-space size not given and size selection disabled".into()))?;

    let part = match &cfg.active {
        Some(active) => {
            if active.len() != d_cas {
                return Err(QicasError::Partition(format!(
                    "{} active orbitals listed for D_CAS = {d_cas}",
                    active.len()
                ))
                .in_stage("partition"));
            }
            CasPartition::by_occupancy(&rdms.occupancies(), h.n_elec, cfg.n_cas, active)
        }
        None => CasPartition::ordered(d, h.n_elec, cfg.n_cas, d_cas),
    }
    .map_err(|e| e.in_stage("partition"))?;
    out.put("n_cas", cfg.n_cas);
    out.put("d_cas", d_cas);

    let identity = OrbitalRotation::identity(d);
    let e_initial = casci_energy_with(h, &identity, &part, &cfg.fci)
        .map_err(|e| e.in_stage("casci"))?
        .e_total;
    out.put("e_casci_initial", format!("{e_initial:.p$}"));

    let result = optimize(&rdms, &part, &cfg.qicas).map_err(|e| e.in_stage("qicas"))?;
    out.put("f_qi_initial", format!("{:.p$}", result.f_initial));
    out.put("f_qi_star", format!("{:.p$}", result.f_star));
    out.put("accepted_steps", result.accepted_steps.len());
    out.put("cycles", result.history.len().saturating_sub(1));
    out.put("best_restart", result.restart);
    let fmt_set = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    out.put("closed", fmt_set(result.partition.closed()));
    out.put("active", fmt_set(result.partition.active()));
    out.put("virtual", fmt_set(result.partition.virtual_orbitals()));
    out.files.push(("history.csv".into(), history_csv(&result.history, p)));
    out.files.push((
        "entropy_final.csv".into(),
        EntropyProfile::from_rdms(&result.rdms)
            .map_err(|e| e.in_stage("entropy"))?
            .to_csv(p),
    ));
    out.files.push(("orbitals.txt".into(), orbitals_text(&result.u_star.compose(&start))?));

    let casci = casci_energy_with(h, &result.u_star, &result.partition, &cfg.fci).map_err(|e| e.in_stage("casci"))?;
    out.put("e_casci", format!("{:.p$}", casci.e_total));
    out.put("delta_e", format!("{:.p$}", casci.e_total - e_fci));
    out.files.push(("casci.csv".into(), casci.to_csv(p)));

    let bound_opts = BoundOptions {
        fci: cfg.fci,
        spectral_range: None,
    };
    let bound = verify_bound_with(h, &result.u_star, &result.partition, &bound_opts).map_err(|e| e.in_stage("bound"))?;
    out.put("epsilon", format!("{:.p$}", bound.epsilon));
    out.put("bound", format!("{:.p$}", bound.k * bound.f_qi));
    out.put("chain_ok", bound.chain_ok());
    out.files.push(("bound.csv".into(), bound.to_csv(p)));
    Ok(out)
}
