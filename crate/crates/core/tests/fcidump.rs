mod common;

use std::path::PathBuf;

use qicas::fci::{ground_state, FciOptions};
use qicas::model::{parse_fcidump, read_fcidump, write_fcidump, MolecularHamiltonian};

const FIXTURES: [&str; 2] = ["h2_sto3g.fcidump", "scrambled_4orb.fcidump"];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Body entries as listed in the file, read with a plain tokenizer.
fn listed_entries(name: &str) -> Vec<(f64, [usize; 4])> {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    let body = text.lines().skip_while(|l| !(l.contains("&END") || l.trim_end().ends_with('/'))).skip(1);
    body.filter(|l| !l.trim().is_empty())
        .map(|l| {
            let t: Vec<&str> = l.split_whitespace().collect();
            let v: f64 = t[0].replace(['D', 'd'], "e").parse().unwrap();
            let idx = [1, 2, 3, 4].map(|k| t[k].parse::<usize>().unwrap());
            (v, idx)
        })
        .collect()
}

fn write_to_string(h: &MolecularHamiltonian) -> String {
    let mut buf = Vec::new();
    write_fcidump(h, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn every_listed_integral_fills_its_symmetry_orbit() {
    for name in FIXTURES {
        let h = read_fcidump(fixture(name)).unwrap();
        for (v, [i, j, k, l]) in listed_entries(name) {
            match (i, j, k, l) {
                (0, 0, 0, 0) => assert_eq!(h.e_core, v),
                (i, j, 0, 0) => {
                    assert_eq!(h.h1()[(i - 1, j - 1)], v);
                    assert_eq!(h.h1()[(j - 1, i - 1)], v);
                }
                _ => {
                    let (p, q, r, s) = (i - 1, j - 1, k - 1, l - 1);
                    for (a, b, c, e) in [
                        (p, q, r, s),
                        (q, p, r, s),
                        (p, q, s, r),
                        (q, p, s, r),
                        (r, s, p, q),
                        (s, r, p, q),
                        (r, s, q, p),
                        (s, r, q, p),
                    ] {
                        assert_eq!(h.eri().get(a, b, c, e), v, "{name}: ({a}{b}|{c}{e})");
                    }
                }
            }
        }
    }
}

#[test]
fn unlisted_integrals_are_zero() {
    let h = read_fcidump(fixture("h2_sto3g.fcidump")).unwrap();
    assert_eq!(h.eri().get(0, 0, 0, 1), 0.0);
    assert_eq!(h.eri().get(0, 1, 1, 1), 0.0);
    assert_eq!(h.h1()[(0, 1)], 0.0);
}

#[test]
fn header_fields() {
    let h = read_fcidump(fixture("scrambled_4orb.fcidump")).unwrap();
    assert_eq!((h.d(), h.n_elec, h.ms2), (4, 3, 1));
    assert_eq!(h.e_core, 1.25);
}

#[test]
fn parse_write_parse_round_trip() {
    for name in FIXTURES {
        let h = read_fcidump(fixture(name)).unwrap();
        let text = write_to_string(&h);
        let again = parse_fcidump(&text).unwrap();
        assert_eq!(h, again, "{name}");
        assert_eq!(text, write_to_string(&again), "{name}: writer is not stable");
    }
}

#[test]
fn hydrogen_molecule_energy() {
    let h = read_fcidump(fixture("h2_sto3g.fcidump")).unwrap();
    let (e, _) = ground_state(&h, 2, 0, &FciOptions::default()).unwrap();
    let sector = common::sector_of(&h);
    let (e_dense, _) = common::lowest(&sector.operator(&common::hamiltonian_terms(&h)));
    assert!((e - e_dense).abs() < 1e-10);
    // minimal-basis H2 near equilibrium
    assert!((e - -1.1373).abs() < 1e-3, "{e}");
}

#[test]
fn open_shell_fixture_solves() {
    let h = read_fcidump(fixture("scrambled_4orb.fcidump")).unwrap();
    let (e, _) = ground_state(&h, h.n_elec, h.ms2, &FciOptions::default()).unwrap();
    let sector = common::sector_of(&h);
    let (e_dense, _) = common::lowest(&sector.operator(&common::hamiltonian_terms(&h)));
    assert!((e - e_dense).abs() < 1e-9, "{e} vs {e_dense}");
}
