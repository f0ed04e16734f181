//! Command-line front end.

mod config;

pub use config::{parse_config_text, InputSource, RawConfig, RunConfig, KEYS};

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    run_pipeline, scan_csv, scan_random_bases_with, summarize_scan, verify_bound_with, BoundOptions, PipelineConfig,
    ScanOptions,
};
use crate::casci::casci_energy_with;
use crate::error::{QicasError, Result};
use crate::fci::ground_state;
use crate::measures::{
    default_thresholds, f_qi, mutual_information_csv, mutual_information_matrix, suggest_cas_size, threshold_diagram,
    EntropyProfile,
};
use crate::model::{build_hubbard, read_fcidump, read_orbitals, transform_integrals, write_orbitals, MolecularHamiltonian};
use crate::optimizer::{history_csv, minimize_total_entropy, optimize};
use crate::partition::CasPartition;
use crate::rdm::SpinTracedRDMs;
use crate::rotation::OrbitalRotation;

#[derive(Debug, Parser)]
#[command(name = "qicas", version, about = "Entropy-driven active-space orbital optimization on exact ground states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ground-state energy by full configuration interaction.
    Solve(Flags),
    /// One-body and opposite-spin two-body reduced density matrices.
    Rdm(Flags),
    /// Orbital entropies, mutual information and F_QI.
    Entropy(Flags),
    /// Orbital optimization minimizing the out-of-CAS correlation.
    Qicas(Flags),
    /// CASCI energy in a given basis.
    Casci(Flags),
    /// Random-basis scan of F_QI against CASCI energy.
    Scan(Flags),
    /// Energy-error bound check in a given basis.
    Bound(Flags),
    /// Active-space size suggestion from the threshold diagram.
    Size(Flags),
    /// Solve, optimize, CASCI and bound check in one run.
    Pipeline(Flags),
}

impl Command {
    fn split(self) -> (&'static str, Flags) {
        match self {
            Command::Solve(f) => ("solve", f),
            Command::Rdm(f) => ("rdm", f),
            Command::Entropy(f) => ("entropy", f),
            Command::Qicas(f) => ("qicas", f),
            Command::Casci(f) => ("casci", f),
            Command::Scan(f) => ("scan", f),
            Command::Bound(f) => ("bound", f),
            Command::Size(f) => ("size", f),
            Command::Pipeline(f) => ("pipeline", f),
        }
    }
}

#[derive(Debug, Clone, Args)]
struct Flags {
    /// Hubbard chain as L,t,U.
    #[arg(long, value_name = "L,t,U", allow_hyphen_values = true)]
    hubbard: Option<String>,
    /// Close the Hubbard chain into a ring.
    #[arg(long)]
    periodic: bool,
    /// Integral file in FCIDUMP format.
    #[arg(long, value_name = "PATH")]
    fcidump: Option<String>,
    #[arg(long)]
    nelec: Option<String>,
    /// Twice the spin projection.
    #[arg(long, allow_hyphen_values = true)]
    ms2: Option<String>,
    /// Eigensolver residual tolerance.
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    /// Largest determinant space the solver will attempt.
    #[arg(long)]
    max_space_dim: Option<String>,
    /// Active space as N_CAS,D_CAS (or N_CAS alone for size selection).
    #[arg(long, value_name = "N,D")]
    cas: Option<String>,
    /// Explicit active orbitals, comma separated.
    #[arg(long, value_name = "I,J,...")]
    active: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    restarts: Option<String>,
    #[arg(long)]
    coarse_step: Option<String>,
    #[arg(long)]
    fine_step: Option<String>,
    /// Minimal improvement for accepting a rotation.
    #[arg(long)]
    eps1: Option<String>,
    /// Minimal improvement per sweep (default 10·eps1).
    #[arg(long)]
    eps2: Option<String>,
    #[arg(long)]
    n_cycle: Option<String>,
    /// Admitted pairs: `or` (any non-active) or `xor` (active with non-active).
    #[arg(long, value_name = "or|xor")]
    scope: Option<String>,
    /// Orbital basis file (rows are new orbitals in the input basis).
    #[arg(long, value_name = "PATH")]
    basis_file: Option<String>,
    /// Number of scan samples.
    #[arg(long)]
    n: Option<String>,
    /// Perturbation scale of scan samples, in radians.
    #[arg(long)]
    scale: Option<String>,
    /// Shortest plateau accepted by size selection.
    #[arg(long)]
    min_run: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Decimal places of floating-point output.
    #[arg(long)]
    precision: Option<String>,
    /// key=value file overriding defaults; flags override the file.
    #[arg(long, value_name = "PATH")]
    config: Option<String>,
    /// Worker threads for restarts and scan samples.
    #[arg(long)]
    jobs: Option<String>,
}

impl Flags {
    fn entries(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("hubbard", self.hubbard.clone()),
            ("periodic", self.periodic.then(|| "true".to_string())),
            ("fcidump", self.fcidump.clone()),
            ("nelec", self.nelec.clone()),
            ("ms2", self.ms2.clone()),
            ("tol", self.tol.clone()),
            ("max-iter", self.max_iter.clone()),
            ("max-space-dim", self.max_space_dim.clone()),
            ("cas", self.cas.clone()),
            ("active", self.active.clone()),
            ("seed", self.seed.clone()),
            ("restarts", self.restarts.clone()),
            ("coarse-step", self.coarse_step.clone()),
            ("fine-step", self.fine_step.clone()),
            ("eps1", self.eps1.clone()),
            ("eps2", self.eps2.clone()),
            ("n-cycle", self.n_cycle.clone()),
            ("scope", self.scope.clone()),
            ("basis-file", self.basis_file.clone()),
            ("n", self.n.clone()),
            ("scale", self.scale.clone()),
            ("min-run", self.min_run.clone()),
            ("out", self.out.clone()),
            ("precision", self.precision.clone()),
            ("jobs", self.jobs.clone()),
        ]
    }

    fn resolve(&self) -> Result<RunConfig> {
        let mut raw = match &self.config {
            Some(path) => parse_config_text(&fs::read_to_string(path).map_err(|e| QicasError::io(path, e))?)?,
            None => RawConfig::new(),
        };
        for (key, value) in self.entries() {
            if let Some(v) = value {
                raw.insert(key.to_string(), v);
            }
        }
        RunConfig::resolve(&raw)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on a domain or file error, 2 on a
/// usage or configuration error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, flags) = cli.command.split();
    let outcome = flags.resolve().and_then(|cfg| execute(name, &cfg));
    match outcome {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                QicasError::Config(_) => 2,
                _ => 1,
            }
        }
    }
}

pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}

struct Outputs<'a> {
    cfg: &'a RunConfig,
    files: Vec<(String, String)>,
}

impl Outputs<'_> {
    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn write(self, command: &str) -> Result<()> {
        let dir = &self.cfg.out;
        fs::create_dir_all(dir).map_err(|e| QicasError::io(dir, e))?;
        let manifest = self.cfg.manifest(command);
        for (name, contents) in std::iter::once(("manifest.txt".to_string(), manifest)).chain(self.files) {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| QicasError::io(&path, e))?;
        }
        Ok(())
    }
}

fn load_hamiltonian(cfg: &RunConfig) -> Result<MolecularHamiltonian> {
    let h = match &cfg.input {
        InputSource::Hubbard(p) => build_hubbard(*p)?,
        InputSource::Fcidump(path) => read_fcidump(path)?,
    };
    match (cfg.nelec, cfg.ms2) {
        (None, None) => Ok(h),
        (n, m) => {
            let n = n.unwrap_or(h.n_elec);
            let m = m.unwrap_or(if cfg.nelec.is_some() { (n % 2) as i32 } else { h.ms2 });
            h.with_electrons(n, m)
        }
    }
}

fn load_basis(cfg: &RunConfig, d: usize) -> Result<OrbitalRotation> {
    let u = match &cfg.basis_file {
        Some(path) => read_orbitals(path)?,
        None => return Ok(OrbitalRotation::identity(d)),
    };
    if u.dim() != d {
        return Err(QicasError::Shape(format!("basis file has {} orbitals, Hamiltonian {d}", u.dim())));
    }
    Ok(u)
}

fn require_cas(cfg: &RunConfig) -> Result<(usize, usize)> {
    match cfg.cas {
        Some((n, Some(d))) => Ok((n, d)),
        _ => Err(QicasError::Config("this command needs --cas N,D".into())),
    }
}

/// The ordered convention, or the listed active orbitals with the closed
/// orbitals chosen by occupancy.
fn partition(cfg: &RunConfig, h: &MolecularHamiltonian, occupancies: impl FnOnce() -> Result<Vec<f64>>) -> Result<CasPartition> {
    let (n_cas, d_cas) = require_cas(cfg)?;
    match &cfg.active {
        Some(active) => {
            if active.len() != d_cas {
                return Err(QicasError::Config(format!(
                    "--active lists {} orbitals for D_CAS = {d_cas}",
                    active.len()
                )));
            }
            CasPartition::by_occupancy(&occupancies()?, h.n_elec, n_cas, active)
        }
        None => CasPartition::ordered(h.d(), h.n_elec, n_cas, d_cas),
    }
}

fn solve_rdms(h: &MolecularHamiltonian, cfg: &RunConfig) -> Result<(f64, crate::fci::Wavefunction, SpinTracedRDMs)> {
    let (e, psi) = ground_state(h, h.n_elec, h.ms2, &cfg.fci)?;
    let rdms = SpinTracedRDMs::from_wavefunction(&psi)?;
    Ok((e, psi, rdms))
}

fn orbitals_text(u: &OrbitalRotation) -> String {
    let mut buf = Vec::new();
    write_orbitals(u, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn execute(command: &str, cfg: &RunConfig) -> Result<String> {
    let p = cfg.precision;
    let mut out = Outputs {
        cfg,
        files: Vec::new(),
    };
    let base = load_hamiltonian(cfg)?;
    let d = base.d();
    let line = match command {
        "solve" | "rdm" | "entropy" | "size" => {
            let h = match &cfg.basis_file {
                Some(_) => transform_integrals(&base, &load_basis(cfg, d)?)?,
                None => base,
            };
            let (e, psi, rdms) = solve_rdms(&h, cfg)?;
            match command {
                "solve" => {
                    out.add("energy.csv", format!("field,value\ne_fci,{e:.p$}\n"));
                    format!("E = {e:.p$}")
                }
                "rdm" => {
                    let mut one = String::from("p,q,alpha,beta\n");
                    for i in 0..d {
                        for j in 0..d {
                            let _ = writeln!(one, "{i},{j},{:.p$},{:.p$}", rdms.gamma_a[(i, j)], rdms.gamma_b[(i, j)]);
                        }
                    }
                    let mut two = String::from("p,q,r,s,value\n");
                    for a in 0..d {
                        for b in 0..d {
                            for c in 0..d {
                                for e in 0..d {
                                    let v = rdms.gamma_os.get(a, b, c, e);
                                    if v != 0.0 {
                                        let _ = writeln!(two, "{a},{b},{c},{e},{v:.p$}");
                                    }
                                }
                            }
                        }
                    }
                    out.add("one_rdm.csv", one);
                    out.add("os_two_rdm.csv", two);
                    let n: f64 = rdms.occupancies().iter().sum();
                    format!("N = {n:.p$}")
                }
                "entropy" => {
                    let profile = EntropyProfile::from_rdms(&rdms)?;
                    out.add("entropy.csv", profile.to_csv(p));
                    out.add("mutual_information.csv", mutual_information_csv(&mutual_information_matrix(&psi)?, p));
                    match cfg.cas {
                        Some((_, Some(_))) => {
                            let part = partition(cfg, &h, || Ok(rdms.occupancies()))?;
                            let f = f_qi(&rdms, &part)?;
                            format!("F_QI = {f:.p$}, total = {:.p$}", profile.total())
                        }
                        _ => format!("total = {:.p$}", profile.total()),
                    }
                }
                _ => {
                    let min = minimize_total_entropy(&rdms, &cfg.qicas)?;
                    let profile = EntropyProfile::from_rdms(&min.rdms)?;
                    let diagram = threshold_diagram(&profile, &default_thresholds())?;
                    out.add("entropy.csv", profile.to_csv(p));
                    out.add("threshold.csv", diagram.to_csv(p));
                    out.add("history.csv", history_csv(&min.history, p));
                    out.add("orbitals.txt", orbitals_text(&min.u_star));
                    let s = suggest_cas_size(&diagram, cfg.min_run)?;
                    format!("D_CAS = {} (plateau {:.2}..{:.2}, F' = {:.p$})", s.d_cas, s.span.0, s.span.1, min.f_star)
                }
            }
        }
        "qicas" => {
            let u0 = load_basis(cfg, d)?;
            let h = transform_integrals(&base, &u0)?;
            let (_, _, rdms) = solve_rdms(&h, cfg)?;
            let part = partition(cfg, &h, || Ok(rdms.occupancies()))?;
            let r = optimize(&rdms, &part, &cfg.qicas)?;
            let u_total = r.u_star.compose(&u0);
            out.add("history.csv", history_csv(&r.history, p));
            out.add("entropy.csv", EntropyProfile::from_rdms(&r.rdms)?.to_csv(p));
            out.add("orbitals.txt", orbitals_text(&u_total));
            let set = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
            out.add(
                "qicas.csv",
                format!(
                    "field,value\nf_initial,{:.p$}\nf_star,{:.p$}\naccepted_steps,{}\nbest_restart,{}\nclosed,{}\nactive,{}\nvirtual,{}\n",
                    r.f_initial,
                    r.f_star,
                    r.accepted_steps.len(),
                    r.restart,
                    set(r.partition.closed()),
                    set(r.partition.active()),
                    set(r.partition.virtual_orbitals()),
                ),
            );
            format!("F_QI* = {:.p$} (from {:.p$}, {} steps)", r.f_star, r.f_initial, r.accepted_steps.len())
        }
        "casci" => {
            let u = load_basis(cfg, d)?;
            let part = partition(cfg, &base, || {
                let (_, _, rdms) = solve_rdms(&transform_integrals(&base, &u)?, cfg)?;
                Ok(rdms.occupancies())
            })?;
            let r = casci_energy_with(&base, &u, &part, &cfg.fci)?;
            out.add("casci.csv", r.to_csv(p));
            format!("E_CASCI = {:.p$}", r.e_total)
        }
        "scan" => {
            let center = load_basis(cfg, d)?;
            let part = partition(cfg, &base, || {
                let (_, _, rdms) = solve_rdms(&transform_integrals(&base, &center)?, cfg)?;
                Ok(rdms.occupancies())
            })?;
            let opts = ScanOptions {
                fci: cfg.fci,
                jobs: cfg.qicas.jobs,
            };
            let samples = scan_random_bases_with(&base, &part, cfg.n, &center, cfg.scale, cfg.qicas.seed, &opts)?;
            out.add("scan.csv", scan_csv(&samples, p));
            let s = summarize_scan(&samples);
            match s.pearson {
                Some(r) => format!("{} samples, pearson = {r:.4}", s.n),
                None => format!("{} samples, pearson undefined", s.n),
            }
        }
        "bound" => {
            let u = load_basis(cfg, d)?;
            let part = partition(cfg, &base, || {
                let (_, _, rdms) = solve_rdms(&transform_integrals(&base, &u)?, cfg)?;
                Ok(rdms.occupancies())
            })?;
            let opts = BoundOptions {
                fci: cfg.fci,
                spectral_range: None,
            };
            let r = verify_bound_with(&base, &u, &part, &opts)?;
            out.add("bound.csv", r.to_csv(p));
            format!(
                "delta_e = {:.p$}, bound = {:.p$}, epsilon = {:.p$}, chain_ok = {}",
                r.delta_e,
                r.k * r.f_qi,
                r.epsilon,
                r.chain_ok()
            )
        }
        "pipeline" => {
            let (n_cas, d_cas) = match cfg.cas {
                Some(c) => c,
                None => return Err(QicasError::Config("pipeline needs --cas N or --cas N,D".into())),
            };
            let mut pc = PipelineConfig::new(n_cas, d_cas);
            pc.active = cfg.active.clone();
            pc.qicas = cfg.qicas.clone();
            pc.fci = cfg.fci;
            pc.min_run = cfg.min_run;
            pc.precision = p;
            pc.basis = cfg.basis_file.as_ref().map(|_| load_basis(cfg, d)).transpose()?;
            let bundle = run_pipeline(&base, &pc)?;
            for (name, contents) in &bundle.files {
                out.add(name, contents.clone());
            }
            out.add("summary.txt", bundle.summary_text());
            format!(
                "E_FCI = {}, E_CASCI = {}, F_QI* = {}",
                bundle.value("e_fci").unwrap_or("?"),
                bundle.value("e_casci").unwrap_or("?"),
                bundle.value("f_qi_star").unwrap_or("?")
            )
        }
        other => unreachable!("unhandled command {other}"),
    };
    out.write(command)?;
    Ok(line)
}
