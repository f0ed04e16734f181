mod common;

use common::{ann, cre, lowest, rotate_integrals, sector_of, Sector, DOWN, UP};
use nalgebra::DMatrix;
use qicas::casci::casci_energy;
use qicas::fci::{ground_state, project_cas, FciOptions};
use qicas::measures::{mutual_information, EntropyProfile};
use qicas::model::{build_hubbard, HubbardParams, MolecularHamiltonian};
use qicas::partition::CasPartition;
use qicas::rdm::{compute_1rdm, compute_os_2rdm, two_orbital_rdm};
use qicas::rotation::OrbitalRotation;

fn hubbard(sites: usize, u: f64) -> MolecularHamiltonian {
    build_hubbard(HubbardParams::chain(sites, 1.0, u)).unwrap()
}

/// A Hubbard chain in a generic orbital basis, so no integral vanishes by symmetry.
fn scrambled(sites: usize, u: f64, seed: u64) -> (MolecularHamiltonian, DMatrix<f64>) {
    let m = common::orthogonal(sites, seed);
    (rotate_integrals(&hubbard(sites, u), &m), m)
}

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

#[test]
fn fci_energies_match_dense_diagonalization() {
    let cases = vec![
        hubbard(4, 4.0),
        hubbard(6, 4.0),
        hubbard(5, 2.0),
        hubbard(4, 4.0).with_electrons(3, 1).unwrap(),
        scrambled(4, 3.0, 11).0,
        scrambled(5, 1.5, 12).0.with_electrons(4, 2).unwrap(),
    ];
    for h in cases {
        let sector = sector_of(&h);
        let (e_dense, _) = lowest(&sector.operator(&common::hamiltonian_terms(&h)));
        let (e, psi) = ground_state(&h, h.n_elec, h.ms2, &FciOptions::default()).unwrap();
        assert!((e - e_dense).abs() < 1e-9, "d={} n={} ms2={}: {e} vs {e_dense}", h.d(), h.n_elec, h.ms2);
        assert_eq!(psi.coeffs().len(), sector.dim());
    }
}

#[test]
fn embedded_ci_vector_is_a_dense_eigenvector() {
    let (h, _) = scrambled(4, 4.0, 3);
    let sector = sector_of(&h);
    let hm = sector.operator(&common::hamiltonian_terms(&h));
    let (e, psi) = ground_state(&h, h.n_elec, h.ms2, &FciOptions::default()).unwrap();
    let v = sector.embed(&psi);
    let residual = (&hm * &v - e * &v).norm();
    assert!(residual < 1e-8, "residual {residual}");
}

#[test]
fn rdms_match_operator_expectations() {
    for (h, label) in [(hubbard(4, 4.0), "site"), (scrambled(4, 4.0, 5).0, "scrambled")] {
        let d = h.d();
        let (_, psi) = ground_state(&h, h.n_elec, h.ms2, &FciOptions::default()).unwrap();
        let sector = sector_of(&h);
        let v = sector.embed(&psi);
        let (ga, gb) = compute_1rdm(&psi);
        let os = compute_os_2rdm(&psi).unwrap();
        for p in 0..d {
            for q in 0..d {
                let ea = sector.expect(&v, &[cre(p, UP), ann(q, UP)]);
                let eb = sector.expect(&v, &[cre(p, DOWN), ann(q, DOWN)]);
                assert!((ga[(p, q)] - ea).abs() < 1e-10, "{label} gamma_a[{p}][{q}]");
                assert!((gb[(p, q)] - eb).abs() < 1e-10, "{label} gamma_b[{p}][{q}]");
                for r in 0..d {
                    for s in 0..d {
                        let e = sector.expect(&v, &[cre(p, UP), cre(q, DOWN), ann(s, DOWN), ann(r, UP)]);
                        assert!((os.get(p, q, r, s) - e).abs() < 1e-10, "{label} os[{p}{q}{r}{s}]");
                    }
                }
            }
        }
    }
}

/// `⟨x|ρ_ij|y⟩ = ⟨ψ| Y† P₀ X |ψ⟩` with the subsystem modes ordered first.
fn two_orbital_oracle(sector: &Sector, v: &nalgebra::DVector<f64>, i: usize, j: usize) -> DMatrix<f64> {
    let local = |o: usize, x: usize| {
        let mut ops = Vec::new();
        if x == 1 || x == 3 {
            ops.push(cre(o, UP));
        }
        if x == 2 || x == 3 {
            ops.push(cre(o, DOWN));
        }
        ops
    };
    let creators = |x: usize| {
        let mut ops = local(i, x / 4);
        ops.extend(local(j, x % 4));
        ops
    };
    let sub_mask = 0b11u64 << (2 * i) | 0b11u64 << (2 * j);
    let mut rho = DMatrix::zeros(16, 16);
    for x in 0..16 {
        for y in 0..16 {
            let x_dag = creators(x);
            let x_ann: Vec<_> = x_dag.iter().rev().map(|&(m, _)| (m, false)).collect();
            let y_dag = creators(y);
            let mut total = 0.0;
            for (col, &s) in sector.states.iter().enumerate() {
                let Some((s1, t)) = common::apply(&x_ann, s) else { continue };
                if t & sub_mask != 0 {
                    continue;
                }
                let Some((s2, w)) = common::apply(&y_dag, t) else { continue };
                if let Some(&row) = sector.index.get(&w) {
                    total += v[row] * s1 * s2 * v[col];
                }
            }
            rho[(x, y)] = total;
        }
    }
    rho
}

#[test]
fn two_orbital_rdm_matches_partial_trace_oracle() {
    let (h, _) = scrambled(4, 4.0, 9);
    let (_, psi) = ground_state(&h, h.n_elec, h.ms2, &FciOptions::default()).unwrap();
    let sector = sector_of(&h);
    let v = sector.embed(&psi);
    for (i, j) in [(0, 1), (1, 3), (3, 0), (2, 1)] {
        let rho = two_orbital_rdm(&psi, i, j).unwrap();
        let oracle = two_orbital_oracle(&sector, &v, i, j);
        let diff = (&rho - &oracle).abs().max();
        assert!(diff < 1e-10, "pair ({i},{j}) differs by {diff}");
    }
}

#[test]
fn orbital_entropies_and_mutual_information_match_oracle() {
    let (h, _) = scrambled(5, 3.0, 21);
    let (_, psi) = ground_state(&h, h.n_elec, h.ms2, &FciOptions::default()).unwrap();
    let sector = sector_of(&h);
    let v = sector.embed(&psi);
    let rdms = qicas::rdm::SpinTracedRDMs::from_wavefunction(&psi).unwrap();
    let profile = EntropyProfile::from_rdms(&rdms).unwrap();
    let one_orbital = |i: usize| {
        let nu = sector.expect(&v, &[cre(i, UP), ann(i, UP)]);
        let nd = sector.expect(&v, &[cre(i, DOWN), ann(i, DOWN)]);
        let dbl = sector.expect(&v, &[cre(i, UP), cre(i, DOWN), ann(i, DOWN), ann(i, UP)]);
        shannon(&[1.0 - nu - nd + dbl, nu - dbl, nd - dbl, dbl])
    };
    for i in 0..5 {
        assert!((profile.entropies[i] - one_orbital(i)).abs() < 1e-10, "orbital {i}");
    }
    for (i, j) in [(0, 1), (2, 4)] {
        let rho = two_orbital_oracle(&sector, &v, i, j);
        let eig = nalgebra::SymmetricEigen::new(rho).eigenvalues;
        let s_ij = shannon(eig.as_slice());
        let expected = one_orbital(i) + one_orbital(j) - s_ij;
        let got = mutual_information(&psi, i, j).unwrap();
        assert!((got - expected).abs() < 1e-9, "pair ({i},{j}): {got} vs {expected}");
    }
}

#[test]
fn casci_matches_dense_projected_hamiltonian() {
    let h = hubbard(6, 4.0);
    for seed in [1u64, 2, 3] {
        let u = common::orthogonal(6, seed);
        let rotated = rotate_integrals(&h, &u);
        for (active, closed, virtual_) in [
            (vec![1, 2, 3, 4], vec![0], vec![5]),
            (vec![0, 5], vec![2, 3], vec![1, 4]),
            (vec![2, 3, 4], vec![0, 1], vec![5]),
        ] {
            let n_elec = 6;
            let n_cas = n_elec - 2 * closed.len();
            let keep = |s: u64| {
                closed.iter().all(|&c| s >> (2 * c) & 0b11 == 0b11) && virtual_.iter().all(|&x| s >> (2 * x) & 0b11 == 0)
            };
            let sector = Sector::filtered(6, 3, 3, keep);
            let (e_dense, _) = lowest(&sector.operator(&common::hamiltonian_terms(&rotated)));
            let part = CasPartition::new(6, n_elec, active.clone(), closed.clone(), virtual_.clone()).unwrap();
            assert_eq!(part.n_cas(), n_cas);
            let r = casci_energy(&h, &OrbitalRotation::new(u.clone()).unwrap(), &part).unwrap();
            assert!((r.e_total - e_dense).abs() < 1e-9, "seed {seed}, active {active:?}: {} vs {e_dense}", r.e_total);
        }
    }
}

#[test]
fn projection_weight_matches_oracle() {
    let (h, _) = scrambled(5, 4.0, 31);
    let h = h.with_electrons(4, 0).unwrap();
    let (_, psi) = ground_state(&h, 4, 0, &FciOptions::default()).unwrap();
    let sector = sector_of(&h);
    let v = sector.embed(&psi);
    let part = CasPartition::new(5, 4, vec![1, 2, 4], vec![3], vec![0]).unwrap();
    let weight: f64 = sector
        .states
        .iter()
        .zip(v.iter())
        .filter(|(&s, _)| s >> 6 & 0b11 == 0b11 && s & 0b11 == 0)
        .map(|(_, c)| c * c)
        .sum();
    let proj = project_cas(&psi, &part).unwrap();
    assert!((proj.weight - weight).abs() < 1e-12, "{} vs {weight}", proj.weight);
}
