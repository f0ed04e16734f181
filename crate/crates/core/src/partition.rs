use crate::error::{QicasError, Result};

/// Split of the orbital basis into active, closed (doubly occupied) and
/// virtual (empty) sets. Index lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CasPartition {
    d: usize,
    active: Vec<usize>,
    closed: Vec<usize>,
    virtual_: Vec<usize>,
    n_cas: usize,
}

impl CasPartition {
    pub fn new(
        d: usize,
        n_elec: usize,
        mut active: Vec<usize>,
        mut closed: Vec<usize>,
        mut virtual_: Vec<usize>,
    ) -> Result<Self> {
        active.sort_unstable();
        closed.sort_unstable();
        virtual_.sort_unstable();
        let mut seen = vec![false; d];
        for &i in active.iter().chain(&closed).chain(&virtual_) {
            if i >= d {
                return Err(QicasError::Partition(format!("orbital {i} outside 0..{d}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(QicasError::Partition(format!("orbital {i} assigned twice")));
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(QicasError::Partition(format!("orbital {i} is unassigned")));
        }
        let n_cas = n_elec
            .checked_sub(2 * closed.len())
            .ok_or_else(|| QicasError::Partition(format!("{} closed orbitals need more than {n_elec} electrons", closed.len())))?;
        if n_cas > 2 * active.len() {
            return Err(QicasError::Partition(format!(
                "{n_cas} active electrons do not fit in {} active orbitals",
                active.len()
            )));
        }
        Ok(CasPartition {
            d,
            active,
            closed,
            virtual_,
            n_cas,
        })
    }

    /// The ordered-basis convention: the first `(n_elec − n_cas)/2` orbitals
    /// are closed, the next `d_cas` active, the rest virtual.
    pub fn ordered(d: usize, n_elec: usize, n_cas: usize, d_cas: usize) -> Result<Self> {
        if n_cas > n_elec || !(n_elec - n_cas).is_multiple_of(2) {
            return Err(QicasError::Partition(format!(
                "CAS({n_cas},{d_cas}) is incompatible with {n_elec} electrons"
            )));
        }
        let n_closed = (n_elec - n_cas) / 2;
        if n_closed + d_cas > d {
            return Err(QicasError::Partition(format!(
                "CAS({n_cas},{d_cas}) with {n_closed} closed orbitals exceeds {d} orbitals"
            )));
        }
        Self::new(
            d,
            n_elec,
            (n_closed..n_closed + d_cas).collect(),
            (0..n_closed).collect(),
            (n_closed + d_cas..d).collect(),
        )
    }

    pub fn all_active(d: usize, n_elec: usize) -> Result<Self> {
        Self::new(d, n_elec, (0..d).collect(), vec![], vec![])
    }

    /// Fixes the active set and fills the closed set with the non-active
    /// orbitals of highest occupancy (ties broken by lower index).
    pub fn by_occupancy(occupancies: &[f64], n_elec: usize, n_cas: usize, active: &[usize]) -> Result<Self> {
        let d = occupancies.len();
        if n_cas > n_elec || !(n_elec - n_cas).is_multiple_of(2) {
            return Err(QicasError::Partition(format!(
                "{n_cas} active electrons are incompatible with {n_elec} electrons"
            )));
        }
        let n_closed = (n_elec - n_cas) / 2;
        let mut rest: Vec<usize> = (0..d).filter(|i| !active.contains(i)).collect();
        if rest.len() < n_closed {
            return Err(QicasError::Partition(format!(
                "{} non-active orbitals cannot hold {n_closed} closed orbitals",
                rest.len()
            )));
        }
        rest.sort_by(|&a, &b| occupancies[b].total_cmp(&occupancies[a]).then(a.cmp(&b)));
        let virtual_ = rest.split_off(n_closed);
        Self::new(d, n_elec, active.to_vec(), rest, virtual_)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d_cas(&self) -> usize {
        self.active.len()
    }

    pub fn n_cas(&self) -> usize {
        self.n_cas
    }

    pub fn n_elec(&self) -> usize {
        self.n_cas + 2 * self.closed.len()
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn closed(&self) -> &[usize] {
        &self.closed
    }

    pub fn virtual_orbitals(&self) -> &[usize] {
        &self.virtual_
    }

    /// Closed ∪ virtual, sorted.
    pub fn nonactive(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.closed.iter().chain(&self.virtual_).copied().collect();
        v.sort_unstable();
        v
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active.binary_search(&i).is_ok()
    }

    pub fn nonactive_mask(&self) -> Vec<bool> {
        (0..self.d).map(|i| !self.is_active(i)).collect()
    }

    /// Bitmasks `(closed, virtual)`.
    pub(crate) fn masks(&self) -> (u64, u64) {
        let m = |v: &[usize]| v.iter().fold(0u64, |acc, &i| acc | 1 << i);
        (m(&self.closed), m(&self.virtual_))
    }

    /// Relabels orbitals: new index of old orbital `i` is `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let map = |v: &[usize]| v.iter().map(|&i| perm[i]).collect::<Vec<_>>();
        Self::new(self.d, self.n_elec(), map(&self.active), map(&self.closed), map(&self.virtual_))
    }
}
