//! FCIDUMP reader and writer.
//!
//! Header: a Fortran namelist opened by `&FCI` and closed by `&END` or `/`.
//! Body: `value i j k l` lines with 1-based orbital indices, where
//! `i=j=k=l=0` is the core energy and `k=l=0` marks one-electron integrals.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::{Eri, MolecularHamiltonian};
use crate::error::{QicasError, Result};

const DUPLICATE_TOL: f64 = 1e-12;

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<MolecularHamiltonian> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| QicasError::io(path, e))?;
    parse_fcidump(&text)
}

fn format_err(line: usize, token: &str, message: impl Into<String>) -> QicasError {
    QicasError::Format {
        line,
        token: token.to_string(),
        message: message.into(),
    }
}

fn parse_float(tok: &str, line: usize) -> Result<f64> {
    tok.replace(['D', 'd'], "E")
        .parse::<f64>()
        .map_err(|_| format_err(line, tok, "not a floating-point number"))
}

fn parse_header_int(key: &str, value: &str, line: usize) -> Result<i64> {
    value
        .trim()
        .parse::<i64>()
        .map_err(|_| format_err(line, &format!("{key}={value}"), "expected an integer value"))
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i32,
}

/// Parses the namelist header; returns it with the index of the first body line.
fn parse_header(lines: &[&str]) -> Result<(Header, usize)> {
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| format_err(1, "", "empty input"))?;
    let opener = lines[first].trim_start();
    if !opener.to_ascii_uppercase().starts_with("&FCI") {
        let tok = opener.split_whitespace().next().unwrap_or("");
        return Err(format_err(first + 1, tok, "expected `&FCI` namelist header"));
    }

    let mut norb = None;
    let mut nelec = None;
    let mut ms2 = None;
    let mut body_start = None;
    let mut current_key: Option<String> = None;

    for (k, raw) in lines.iter().enumerate().skip(first) {
        let lineno = k + 1;
        let mut text = raw.trim().to_string();
        if k == first {
            text = text[4..].to_string();
        }
        let upper = text.to_ascii_uppercase();
        let mut terminated = false;
        if let Some(pos) = upper.find("&END") {
            text.truncate(pos);
            terminated = true;
        } else if let Some(stripped) = text.trim_end().strip_suffix('/') {
            text = stripped.to_string();
            terminated = true;
        }

        for tok in text.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
            if let Some((key, value)) = tok.split_once('=') {
                let key = key.trim().to_ascii_uppercase();
                match key.as_str() {
                    "NORB" => norb = Some(parse_header_int(&key, value, lineno)?),
                    "NELEC" => nelec = Some(parse_header_int(&key, value, lineno)?),
                    "MS2" => ms2 = Some(parse_header_int(&key, value, lineno)?),
                    "" => return Err(format_err(lineno, tok, "missing key before `=`")),
                    _ => {
                        // ORBSYM, ISYM, UHF, ... accepted and ignored
                        if !value.is_empty() {
                            value
                                .trim()
                                .parse::<f64>()
                                .map_err(|_| format_err(lineno, tok, "unreadable header value"))?;
                        }
                    }
                }
                current_key = Some(key);
            } else {
                // continuation of a list-valued key such as ORBSYM=1,1,2,
                match current_key.as_deref() {
                    Some("NORB" | "NELEC" | "MS2") | None => {
                        return Err(format_err(lineno, tok, "unexpected token in header"));
                    }
                    Some(_) => {
                        tok.parse::<i64>()
                            .map_err(|_| format_err(lineno, tok, "unreadable header value"))?;
                    }
                }
            }
        }
        if terminated {
            body_start = Some(k + 1);
            break;
        }
    }

    let body_start = body_start.ok_or_else(|| format_err(lines.len(), "", "header is not terminated by `&END` or `/`"))?;
    let missing = |key: &str| format_err(first + 1, key, format!("header lacks {key}"));
    let norb = norb.ok_or_else(|| missing("NORB"))?;
    let nelec = nelec.ok_or_else(|| missing("NELEC"))?;
    let ms2 = ms2.ok_or_else(|| missing("MS2"))?;
    if !(1..=64).contains(&norb) {
        return Err(format_err(first + 1, &format!("NORB={norb}"), "NORB must lie in 1..=64"));
    }
    if nelec < 1 || nelec > 2 * norb {
        return Err(format_err(
            first + 1,
            &format!("NELEC={nelec}"),
            "NELEC must lie in 1..=2·NORB",
        ));
    }
    Ok((
        Header {
            norb: norb as usize,
            nelec: nelec as usize,
            ms2: ms2 as i32,
        },
        body_start,
    ))
}

/// Stores `value` at `slot`, rejecting conflicting duplicates.
fn store(slot: &mut Option<f64>, value: f64, what: impl FnOnce() -> String) -> Result<()> {
    match *slot {
        Some(prev) if (prev - value).abs() > DUPLICATE_TOL => Err(QicasError::Consistency(format!(
            "{} given as both {prev:e} and {value:e}",
            what()
        ))),
        _ => {
            *slot = Some(value);
            Ok(())
        }
    }
}

pub fn parse_fcidump(text: &str) -> Result<MolecularHamiltonian> {
    let lines: Vec<&str> = text.lines().collect();
    let (header, body_start) = parse_header(&lines)?;
    let d = header.norb;

    let npair = d * (d + 1) / 2;
    let mut eri_slots: Vec<Option<f64>> = vec![None; npair * (npair + 1) / 2];
    let mut h1_slots: Vec<Option<f64>> = vec![None; npair];
    let mut e_core: Option<f64> = None;

    for (k, raw) in lines.iter().enumerate().skip(body_start) {
        let lineno = k + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(format_err(lineno, raw.trim(), "expected `value i j k l`"));
        }
        let value = parse_float(toks[0], lineno)?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&toks[1..]) {
            let v: i64 = tok
                .parse()
                .map_err(|_| format_err(lineno, tok, "expected an integer orbital index"))?;
            if v < 0 || v as usize > d {
                return Err(QicasError::Range(format!(
                    "line {lineno}: orbital index {v} outside 0..={d}"
                )));
            }
            *slot = v as usize;
        }
        let [i, j, kk, l] = idx;
        match (i, j, kk, l) {
            (0, 0, 0, 0) => store(&mut e_core, value, || "core energy".into())?,
            (i, j, 0, 0) if i > 0 && j > 0 => {
                let slot = &mut h1_slots[super::pair_index(i - 1, j - 1)];
                store(slot, value, || format!("h({i},{j})"))?;
            }
            (i, j, kk, l) if i > 0 && j > 0 && kk > 0 && l > 0 => {
                let slot = &mut eri_slots[Eri::canonical_index(i - 1, j - 1, kk - 1, l - 1)];
                store(slot, value, || format!("({i}{j}|{kk}{l})"))?;
            }
            _ => {
                return Err(QicasError::Range(format!(
                    "line {lineno}: index pattern {i} {j} {kk} {l} mixes zero and orbital indices"
                )));
            }
        }
    }

    let mut h1 = DMatrix::zeros(d, d);
    for p in 0..d {
        for q in 0..=p {
            h1[(p, q)] = h1_slots[super::pair_index(p, q)].unwrap_or(0.0);
        }
    }
    let mut eri = Eri::zeros(d);
    for (p, q, r, s, _) in Eri::zeros(d).canonical_entries() {
        if let Some(v) = eri_slots[Eri::canonical_index(p, q, r, s)] {
            eri.set(p, q, r, s, v);
        }
    }
    MolecularHamiltonian::new(header.nelec, header.ms2, e_core.unwrap_or(0.0), h1, eri)
}

/// Writes canonical nonzero integrals with 17 significant digits.
pub fn write_fcidump<W: std::io::Write>(h: &MolecularHamiltonian, sink: &mut W) -> std::io::Result<()> {
    let d = h.d();
    let mut out = String::new();
    let _ = writeln!(out, " &FCI NORB={d},NELEC={},MS2={},", h.n_elec, h.ms2);
    let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(d));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for (p, q, r, s, v) in h.eri().canonical_entries() {
        if v != 0.0 {
            let _ = writeln!(out, "{v:.16e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
        }
    }
    for p in 0..d {
        for q in 0..=p {
            let v = h.h1()[(p, q)];
            if v != 0.0 {
                let _ = writeln!(out, "{v:.16e} {} {} 0 0", p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.16e} 0 0 0 0", h.e_core);
    sink.write_all(out.as_bytes())
}
