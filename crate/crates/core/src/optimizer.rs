//! Jacobi-sweep minimization of the out-of-CAS correlation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{QicasError, Result};
use crate::measures::entropy;
use crate::partition::CasPartition;
use crate::rdm::{OrbitalSpectrum, SpinTracedRDMs};
use crate::rotation::{pair_local_sum, random_orthogonal, JacobiStep, OrbitalRotation};

/// Which orbital pairs may be rotated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationScope {
    /// At least one orbital of the pair is non-active.
    AnyNonactive,
    /// Exactly one orbital of the pair is non-active.
    ActiveNonactiveOnly,
}

impl RotationScope {
    fn admits(self, i_counted: bool, j_counted: bool) -> bool {
        match self {
            RotationScope::AnyNonactive => i_counted || j_counted,
            RotationScope::ActiveNonactiveOnly => i_counted != j_counted,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RotationScope::AnyNonactive => "or",
            RotationScope::ActiveNonactiveOnly => "xor",
        }
    }
}

impl std::str::FromStr for RotationScope {
    type Err = QicasError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "or" | "any_nonactive" => Ok(RotationScope::AnyNonactive),
            "xor" | "active_nonactive_only" => Ok(RotationScope::ActiveNonactiveOnly),
            other => Err(QicasError::Config(format!("unknown rotation scope `{other}` (expected or|xor)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QicasConfig {
    pub coarse_step: f64,
    pub fine_step: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub n_cycle: usize,
    pub rotation_scope: RotationScope,
    pub seed: u64,
    pub restarts: usize,
    /// Worker threads for independent restarts; 1 runs sequentially.
    pub jobs: usize,
}

impl Default for QicasConfig {
    fn default() -> Self {
        QicasConfig {
            coarse_step: 1e-2,
            fine_step: 1e-4,
            eps1: 1e-8,
            eps2: 1e-7,
            n_cycle: 200,
            rotation_scope: RotationScope::AnyNonactive,
            seed: 0,
            restarts: 1,
            jobs: 1,
        }
    }
}

impl QicasConfig {
    /// Sets `eps1` and ties `eps2` to `10·eps1`.
    pub fn with_eps1(mut self, eps1: f64) -> Self {
        self.eps1 = eps1;
        self.eps2 = 10.0 * eps1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(QicasError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("coarse_step", self.coarse_step)?;
        positive("fine_step", self.fine_step)?;
        positive("eps1", self.eps1)?;
        positive("eps2", self.eps2)?;
        if self.fine_step >= self.coarse_step {
            return Err(QicasError::Config(format!(
                "fine_step {} must be below coarse_step {}",
                self.fine_step, self.coarse_step
            )));
        }
        if self.coarse_step >= PI {
            return Err(QicasError::Config("coarse_step must be below π".into()));
        }
        if self.n_cycle == 0 || self.restarts == 0 || self.jobs == 0 {
            return Err(QicasError::Config("n_cycle, restarts and jobs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub f_qi: f64,
    pub accepted: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptedStep {
    pub step: JacobiStep,
    pub f_before: f64,
    pub f_after: f64,
}

/// Outcome of one descent from one starting basis, before relabeling.
#[derive(Debug, Clone)]
pub struct Descent {
    pub restart: usize,
    pub u: OrbitalRotation,
    pub rdms: SpinTracedRDMs,
    pub entropies: Vec<f64>,
    pub f_initial: f64,
    pub f_final: f64,
    pub history: Vec<CycleRecord>,
    pub accepted_steps: Vec<AcceptedStep>,
}

#[derive(Debug, Clone)]
pub struct QicasResult {
    /// Optimized basis relative to the input basis, rows ordered closed,
    /// active, virtual, each by descending occupancy.
    pub u_star: OrbitalRotation,
    pub f_star: f64,
    pub partition: CasPartition,
    /// RDMs in the `u_star` basis.
    pub rdms: SpinTracedRDMs,
    pub occupancies: Vec<f64>,
    /// `order[k]` is the pre-relabeling index of final orbital `k`.
    pub order: Vec<usize>,
    pub restart: usize,
    pub f_initial: f64,
    pub history: Vec<CycleRecord>,
    /// Steps of the winning descent, in the pre-relabeling index space.
    pub accepted_steps: Vec<AcceptedStep>,
    /// Final F_QI of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

fn spectrum_of(rdms: &SpinTracedRDMs, i: usize) -> OrbitalSpectrum {
    OrbitalSpectrum::from_diagonals(rdms.gamma_a[(i, i)], rdms.gamma_b[(i, i)], rdms.gamma_os.get(i, i, i, i))
}

fn counted_sum(entropies: &[f64], counted: &[bool]) -> f64 {
    let mut total = 0.0;
    for (e, &c) in entropies.iter().zip(counted) {
        if c {
            total += e;
        }
    }
    total
}

fn rotate_rdms_in_place(rdms: &mut SpinTracedRDMs, step: &JacobiStep) {
    let (s, c) = step.angle.sin_cos();
    let (i, j) = (step.i, step.j);
    for g in [&mut rdms.gamma_a, &mut rdms.gamma_b] {
        let d = g.nrows();
        for k in 0..d {
            let (a, b) = (g[(i, k)], g[(j, k)]);
            g[(i, k)] = c * a + s * b;
            g[(j, k)] = -s * a + c * b;
        }
        for k in 0..d {
            let (a, b) = (g[(k, i)], g[(k, j)]);
            g[(k, i)] = c * a + s * b;
            g[(k, j)] = -s * a + c * b;
        }
    }
    rdms.gamma_os.rotate_pair(i, j, c, s);
}

/// Final bracket width of the angle refinement.
const REFINE_WIDTH: f64 = 1e-10;

/// Minimizing angle of one pair. A coarse grid on `[0, π)` locates the local
/// minima, each is refined on a fine grid of half-width `coarse_step`, and
/// refined values within `eps1` of the best count as ties, which the lowest
/// angle wins. The winner is polished by a golden-section search.
fn scan_pair(rdms: &SpinTracedRDMs, counted: &[bool], entropies: &[f64], i: usize, j: usize, cfg: &QicasConfig) -> (f64, f64) {
    let eval = |angle: f64| pair_local_sum(rdms, counted, entropies, &JacobiStep::new(i, j, angle));
    let coarse: Vec<(f64, f64)> = (0..)
        .map(|k| k as f64 * cfg.coarse_step)
        .take_while(|&a| a < PI)
        .map(|a| (a, eval(a)))
        .collect();
    let n = coarse.len();
    let half = (cfg.coarse_step / cfg.fine_step).round() as i64;
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for k in 0..n {
        let f = coarse[k].1;
        // the scan is periodic, so neighbours wrap around
        let (prev, next) = (coarse[(k + n - 1) % n].1, coarse[(k + 1) % n].1);
        if !(f <= prev && f <= next) {
            continue;
        }
        let mut best = coarse[k];
        for m in -half..=half {
            let angle = (coarse[k].0 + m as f64 * cfg.fine_step).rem_euclid(PI);
            let f = eval(angle);
            if f < best.1 || (f == best.1 && angle < best.0) {
                best = (angle, f);
            }
        }
        candidates.push(best);
    }
    if candidates.is_empty() {
        // a flat or noisy profile: fall back to the global coarse minimum
        let best = coarse.iter().copied().fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        candidates.push(best);
    }
    let f_min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let chosen = candidates
        .into_iter()
        .filter(|c| c.1 <= f_min + cfg.eps1)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one candidate");
    refine_angle(&eval, chosen, cfg.fine_step)
}

/// Golden-section search on `[angle − width, angle + width]`; keeps the
/// grid point unless the search improves on it.
fn refine_angle(eval: &impl Fn(f64) -> f64, (angle, f): (f64, f64), width: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (angle - width, angle + width);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    while b - a > REFINE_WIDTH {
        if f1 < f2 {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
    }
    let (x, fx) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if fx < f {
        (x.rem_euclid(PI), fx)
    } else {
        (angle, f)
    }
}

/// One Jacobi descent on `rdms` (already in the starting basis `u0`).
pub(crate) fn descend(
    mut rdms: SpinTracedRDMs,
    u0: OrbitalRotation,
    counted: &[bool],
    cfg: &QicasConfig,
    restart: usize,
) -> Result<Descent> {
    let d = rdms.d();
    let mut entropies: Vec<f64> = (0..d).map(|i| entropy(&spectrum_of(&rdms, i))).collect();
    let mut f = counted_sum(&entropies, counted);
    if !f.is_finite() {
        return Err(QicasError::NonFinite(format!("F_QI = {f} at the starting basis")));
    }
    let f_initial = f;
    let mut u = u0;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, restart, 0));
    let mut labels: Vec<usize> = (0..d).collect();
    let mut history = vec![CycleRecord {
        cycle: 0,
        f_qi: f,
        accepted: 0,
    }];
    let mut accepted_steps = Vec::new();

    for cycle in 1..=cfg.n_cycle {
        let f_cycle_start = f;
        let mut accepted = 0;
        labels.shuffle(&mut rng);
        for a in 0..d {
            for b in a + 1..d {
                let (i, j) = (labels[a].min(labels[b]), labels[a].max(labels[b]));
                if !cfg.rotation_scope.admits(counted[i], counted[j]) {
                    continue;
                }
                let (angle, f_new) = scan_pair(&rdms, counted, &entropies, i, j, cfg);
                if !f_new.is_finite() {
                    return Err(QicasError::NonFinite(format!("F_QI = {f_new} while rotating ({i}, {j})")));
                }
                if f - f_new <= cfg.eps1 {
                    continue;
                }
                let step = JacobiStep::new(i, j, angle);
                rotate_rdms_in_place(&mut rdms, &step);
                u.apply_jacobi(&step);
                if u.orthogonality_error() > 1e-8 {
                    u.reorthonormalize();
                }
                entropies[i] = entropy(&spectrum_of(&rdms, i));
                entropies[j] = entropy(&spectrum_of(&rdms, j));
                let f_before = f;
                f = counted_sum(&entropies, counted);
                accepted_steps.push(AcceptedStep {
                    step,
                    f_before,
                    f_after: f,
                });
                accepted += 1;
            }
        }
        history.push(CycleRecord {
            cycle,
            f_qi: f,
            accepted,
        });
        if f_cycle_start - f < cfg.eps2 {
            break;
        }
    }
    Ok(Descent {
        restart,
        u,
        rdms,
        entropies,
        f_initial,
        f_final: f,
        history,
        accepted_steps,
    })
}

fn sub_seed(seed: u64, restart: usize, stream: u64) -> u64 {
    seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Runs every restart (restart 0 from the input basis, later ones from
/// seeded random bases) and returns all descents in restart order.
pub(crate) fn descend_restarts(rdms: &SpinTracedRDMs, counted: &[bool], cfg: &QicasConfig) -> Result<Vec<Descent>> {
    cfg.validate()?;
    let d = rdms.d();
    let run = |k: usize| -> Result<Descent> {
        let (start, u0) = if k == 0 {
            (rdms.clone(), OrbitalRotation::identity(d))
        } else {
            let u0 = random_orthogonal(d, sub_seed(cfg.seed, k, 1));
            (rdms.rotated(&u0)?, u0)
        };
        descend(start, u0, counted, cfg, k)
    };
    if cfg.jobs > 1 && cfg.restarts > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| QicasError::Config(format!("thread pool: {e}")))?;
        pool.install(|| (0..cfg.restarts).into_par_iter().map(run).collect())
    } else {
        (0..cfg.restarts).map(run).collect()
    }
}

fn best_of(descents: Vec<Descent>) -> Descent {
    descents
        .into_iter()
        .reduce(|best, r| if r.f_final < best.f_final { r } else { best })
        .expect("at least one restart")
}

/// Occupancy-based split of the non-active orbitals: closed above 1,
/// virtual otherwise.
pub fn classify_partition(
    occupancies: &[f64],
    n_elec: usize,
    n_cas: usize,
    d_cas: usize,
    active_hint: &[usize],
) -> Result<CasPartition> {
    if active_hint.len() != d_cas {
        return Err(QicasError::Partition(format!(
            "{} active orbitals given for D_CAS = {d_cas}",
            active_hint.len()
        )));
    }
    if n_cas > n_elec || !(n_elec - n_cas).is_multiple_of(2) {
        return Err(QicasError::Partition(format!(
            "{n_cas} active electrons are incompatible with {n_elec} electrons"
        )));
    }
    let d = occupancies.len();
    let nonactive: Vec<usize> = (0..d).filter(|i| !active_hint.contains(i)).collect();
    let (closed, virtual_): (Vec<usize>, Vec<usize>) = nonactive.iter().partition(|&&i| occupancies[i] > 1.0);
    let expected = (n_elec - n_cas) / 2;
    if closed.len() != expected {
        return Err(QicasError::Classification {
            expected,
            found: closed.len(),
            occupancies: nonactive.iter().map(|&i| (i, occupancies[i])).collect(),
        });
    }
    CasPartition::new(d, n_elec, active_hint.to_vec(), closed, virtual_)
}

/// Rotates the active orbitals among themselves into the eigenbasis of their
/// 1-RDM block. Non-active entropies are untouched.
fn rotate_active_to_natural(best: &mut Descent, active: &[usize]) -> Result<()> {
    let n = active.len();
    if n < 2 {
        return Ok(());
    }
    let gamma = best.rdms.spin_summed();
    let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |a, b| gamma[(active[a], active[b])]));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let d = best.rdms.d();
    let mut r = DMatrix::identity(d, d);
    for (a, &k) in order.iter().enumerate() {
        for (b, &q) in active.iter().enumerate() {
            r[(active[a], q)] = eig.eigenvectors[(b, k)];
        }
    }
    let r = OrbitalRotation::new(r)?;
    best.rdms = best.rdms.rotated(&r)?;
    best.u = r.compose(&best.u);
    for &i in active {
        best.entropies[i] = entropy(&spectrum_of(&best.rdms, i));
    }
    Ok(())
}

/// Swaps active and non-active orbitals until exactly `n_closed` non-active
/// orbitals hold more than one electron, taking at each step the swap that
/// changes the objective least. Returns `None` when every available swap
/// would raise it by more than `tol`.
fn exchange_roles(occ: &[f64], entropies: &[f64], active: &[usize], n_closed: usize, tol: f64) -> Option<Vec<usize>> {
    let mut active = active.to_vec();
    loop {
        let nonactive: Vec<usize> = (0..occ.len()).filter(|i| !active.contains(i)).collect();
        let closed = nonactive.iter().filter(|&&i| occ[i] > 1.0).count();
        if closed == n_closed {
            return Some(active);
        }
        // too many closed: a filled orbital moves in and an empty one moves out
        let filled_in = closed > n_closed;
        let mut best: Option<(f64, usize, usize)> = None;
        for (slot, &a) in active.iter().enumerate() {
            if (occ[a] > 1.0) == filled_in {
                continue;
            }
            for &n in &nonactive {
                if (occ[n] > 1.0) != filled_in {
                    continue;
                }
                // `a` becomes counted, `n` stops being counted
                let gap = entropies[a] - entropies[n];
                if best.is_none_or(|(g, _, _)| gap < g) {
                    best = Some((gap, slot, n));
                }
            }
        }
        match best {
            Some((gap, slot, n)) if gap <= tol => active[slot] = n,
            _ => return None,
        }
    }
}

/// Minimizes F_QI for the given partition, classifies the optimized
/// non-active orbitals by occupancy and returns the relabeled basis.
pub fn optimize(rdms: &SpinTracedRDMs, part: &CasPartition, cfg: &QicasConfig) -> Result<QicasResult> {
    if rdms.d() != part.d() {
        return Err(QicasError::Partition(format!(
            "partition over {} orbitals for RDMs over {}",
            part.d(),
            rdms.d()
        )));
    }
    let descents = descend_restarts(rdms, &part.nonactive_mask(), cfg)?;
    let restart_values: Vec<f64> = descents.iter().map(|r| r.f_final).collect();
    let mut best = best_of(descents);

    let classify = |occ: &[f64], active: &[usize]| classify_partition(occ, part.n_elec(), part.n_cas(), part.d_cas(), active);
    let classified = match classify(&best.rdms.occupancies(), part.active()) {
        Err(err @ QicasError::Classification { .. }) => {
            rotate_active_to_natural(&mut best, part.active())?;
            let occ = best.rdms.occupancies();
            let n_closed = (part.n_elec() - part.n_cas()) / 2;
            match exchange_roles(&occ, &best.entropies, part.active(), n_closed, cfg.eps1) {
                Some(active) => classify(&occ, &active)?,
                None => return Err(err),
            }
        }
        other => other?,
    };
    let occ = best.rdms.occupancies();
    let by_occupancy = |set: &[usize]| {
        let mut v = set.to_vec();
        v.sort_by(|&a, &b| occ[b].total_cmp(&occ[a]).then(a.cmp(&b)));
        v
    };
    let order: Vec<usize> = by_occupancy(classified.closed())
        .into_iter()
        .chain(by_occupancy(classified.active()))
        .chain(by_occupancy(classified.virtual_orbitals()))
        .collect();
    let mut perm = vec![0; order.len()];
    for (k, &old) in order.iter().enumerate() {
        perm[old] = k;
    }
    let partition = classified.relabel(&perm)?;
    let rdms_star = best.rdms.permuted(&order);
    let f_star = counted_sum(
        &order.iter().map(|&k| best.entropies[k]).collect::<Vec<_>>(),
        &partition.nonactive_mask(),
    );
    Ok(QicasResult {
        u_star: best.u.permute_rows(&order),
        f_star,
        partition,
        occupancies: rdms_star.occupancies(),
        rdms: rdms_star,
        order,
        restart: best.restart,
        f_initial: best.f_initial,
        history: best.history,
        accepted_steps: best.accepted_steps,
        restart_values,
    })
}

/// Result of minimizing the summed entropy of all orbitals.
#[derive(Debug, Clone)]
pub struct EntropyMinimum {
    pub u_star: OrbitalRotation,
    pub f_star: f64,
    pub entropies: Vec<f64>,
    pub rdms: SpinTracedRDMs,
    pub history: Vec<CycleRecord>,
}

/// Minimizes the total orbital entropy, the unbiased cost used before
/// choosing an active-space size.
pub fn minimize_total_entropy(rdms: &SpinTracedRDMs, cfg: &QicasConfig) -> Result<EntropyMinimum> {
    let counted = vec![true; rdms.d()];
    let best = best_of(descend_restarts(rdms, &counted, cfg)?);
    Ok(EntropyMinimum {
        u_star: best.u,
        f_star: best.f_final,
        entropies: best.entropies,
        rdms: best.rdms,
        history: best.history,
    })
}

pub fn history_csv(history: &[CycleRecord], precision: usize) -> String {
    let mut out = String::from("cycle,f_qi,accepted_steps\n");
    for r in history {
        out.push_str(&format!("{},{:.p$},{}\n", r.cycle, r.f_qi, r.accepted, p = precision));
    }
    out
}
