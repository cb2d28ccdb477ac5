use std::collections::HashMap;
use std::fmt::Write as _;

use super::integrals::{eri_permutations, MolecularIntegrals};
use crate::error::{Error, Result};

const DUPLICATE_TOL: f64 = 1e-10;

fn header_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_number(tok: &str) -> Option<f64> {
    tok.replace(['D', 'd'], "E").parse().ok()
}

struct Header {
    values: HashMap<String, Vec<String>>,
    end_line: usize,
}

/// Reads the `&FCI ... &END` namelist. Returns the header and the index of
/// the first data line.
fn parse_header(lines: &[&str]) -> Result<Header> {
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| header_error(1, "empty file"))?;
    let start = lines[first].trim_start();
    if !start.to_ascii_uppercase().starts_with("&FCI") {
        return Err(header_error(first + 1, "expected &FCI namelist"));
    }
    let mut values: HashMap<String, Vec<String>> = HashMap::new();
    let mut key: Option<String> = None;
    for (i, raw) in lines.iter().enumerate().skip(first) {
        let mut body = raw.trim().to_string();
        if i == first {
            body = body[4..].to_string();
        }
        let upper = body.to_ascii_uppercase();
        let end = upper.find("&END").or_else(|| (upper.trim() == "/").then_some(0));
        let content = match end {
            Some(e) => &body[..e],
            None => &body[..],
        };
        for tok in content.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
            if let Some((k, v)) = tok.split_once('=') {
                let k = k.trim().to_ascii_uppercase();
                let entry = values.entry(k.clone()).or_default();
                if !v.is_empty() {
                    entry.push(v.to_string());
                }
                key = Some(k);
            } else {
                match &key {
                    Some(k) => values.get_mut(k).unwrap().push(tok.to_string()),
                    None => return Err(header_error(i + 1, format!("value '{tok}' before any key"))),
                }
            }
        }
        if let Some(e) = end {
            let rest = body[e..].trim();
            let rest = rest
                .strip_prefix("&END")
                .or_else(|| rest.strip_prefix("&end"))
                .or_else(|| rest.strip_prefix('/'))
                .unwrap_or("");
            if !rest.trim().is_empty() {
                return Err(header_error(i + 1, "trailing text after &END"));
            }
            return Ok(Header { values, end_line: i + 1 });
        }
    }
    Err(header_error(lines.len(), "unterminated namelist"))
}

fn header_int(h: &Header, key: &str, required: bool) -> Result<Option<i64>> {
    match h.values.get(key) {
        Some(v) if !v.is_empty() => v[0]
            .parse()
            .map(Some)
            .map_err(|_| header_error(1, format!("{key} is not an integer: '{}'", v[0]))),
        _ if required => Err(header_error(1, format!("missing {key} in header"))),
        _ => Ok(None),
    }
}

/// Parses FCIDUMP text. Indices are 1-based; `ORBSYM` and `ISYM` are read
/// and ignored.
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let lines: Vec<&str> = text.lines().collect();
    let header = parse_header(&lines)?;
    let norb = header_int(&header, "NORB", true)?.unwrap();
    let nelec = header_int(&header, "NELEC", true)?.unwrap();
    let ms2 = header_int(&header, "MS2", false)?.unwrap_or(0);
    if norb < 0 || nelec < 0 {
        return Err(header_error(1, "NORB and NELEC must be nonnegative"));
    }
    let n = norb as usize;
    let mut ints = MolecularIntegrals::zeros(n, nelec as usize);
    ints.ms2 = ms2;
    let mut seen_eri: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    let mut seen_h: HashMap<(usize, usize), f64> = HashMap::new();
    let mut seen_nuc: Option<f64> = None;

    let conflict = |line: usize, old: f64, new: f64| -> Result<()> {
        if (old - new).abs() > DUPLICATE_TOL {
            Err(Error::Parse {
                line,
                msg: format!("conflicting duplicate entry: {old} vs {new}"),
            })
        } else {
            Ok(())
        }
    };

    for (i, raw) in lines.iter().enumerate().skip(header.end_line) {
        let line = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 'value i j k l', found {} fields", toks.len()),
            });
        }
        let value = parse_number(toks[0]).ok_or_else(|| Error::Parse {
            line,
            msg: format!("bad value '{}'", toks[0]),
        })?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&toks[1..]) {
            *slot = tok.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad index '{tok}'"),
            })?;
            if *slot > n {
                return Err(Error::Parse {
                    line,
                    msg: format!("index {slot} exceeds NORB = {n}"),
                });
            }
        }
        match idx {
            [0, 0, 0, 0] => {
                if let Some(old) = seen_nuc {
                    conflict(line, old, value)?;
                }
                seen_nuc = Some(value);
                ints.e_nuc = value;
            }
            [p, r, 0, 0] if p > 0 && r > 0 => {
                let key = (p.max(r) - 1, p.min(r) - 1);
                if let Some(&old) = seen_h.get(&key) {
                    conflict(line, old, value)?;
                }
                seen_h.insert(key, value);
                ints.set_h(p - 1, r - 1, value);
            }
            [p, r, q, s] if p > 0 && r > 0 && q > 0 && s > 0 => {
                let key = canonical(p - 1, r - 1, q - 1, s - 1);
                if let Some(&old) = seen_eri.get(&key) {
                    conflict(line, old, value)?;
                }
                seen_eri.insert(key, value);
                ints.set_eri(p - 1, r - 1, q - 1, s - 1, value);
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unsupported index pattern {idx:?}"),
                })
            }
        }
    }
    Ok(ints)
}

/// Symmetry representative with `p <= r`, `q <= s`, `(p, r) <= (q, s)`.
fn canonical(p: usize, r: usize, q: usize, s: usize) -> (usize, usize, usize, usize) {
    eri_permutations(p, r, q, s)
        .into_iter()
        .filter(|&(a, b, c, d)| a <= b && c <= d && (a, b) <= (c, d))
        .min()
        .unwrap()
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16E}")
}

/// Writes integrals in canonical order: two-electron entries, one-electron
/// entries, then the nuclear repulsion. Zero integrals are omitted.
pub fn write_fcidump(ints: &MolecularIntegrals) -> String {
    let n = ints.n_spatial;
    let mut out = String::new();
    let _ = writeln!(out, " &FCI NORB={},NELEC={},MS2={},", n, ints.n_electrons, ints.ms2);
    let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for p in 0..n {
        for r in p..n {
            for q in p..n {
                for s in q..n {
                    if (p, r) > (q, s) {
                        continue;
                    }
                    let v = ints.eri(p, r, q, s);
                    if v != 0.0 {
                        let _ = writeln!(
                            out,
                            "{} {} {} {} {}",
                            fmt_value(v),
                            p + 1,
                            r + 1,
                            q + 1,
                            s + 1
                        );
                    }
                }
            }
        }
    }
    for p in 0..n {
        for r in p..n {
            let v = ints.h[(p, r)];
            if v != 0.0 {
                let _ = writeln!(out, "{} {} {} 0 0", fmt_value(v), p + 1, r + 1);
            }
        }
    }
    let _ = writeln!(out, "{} 0 0 0 0", fmt_value(ints.e_nuc));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_dump() {
        let ints = parse_fcidump("&FCI NORB=1, NELEC=2 &END\n-1.25 1 1 0 0\n").unwrap();
        assert_eq!(ints.h[(0, 0)], -1.25);
        assert_eq!(ints.n_electrons, 2);
    }

    #[test]
    fn eri_expands_eightfold() {
        let ints = parse_fcidump("&FCI NORB=2, NELEC=2 &END\n0.5 1 2 1 2\n").unwrap();
        for (p, r, q, s) in eri_permutations(0, 1, 0, 1) {
            assert_eq!(ints.eri(p, r, q, s), 0.5);
        }
        assert_eq!(ints.eri(0, 0, 1, 1), 0.0);
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse_fcidump("&FCI NELEC=2 &END\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_fcidump("&FCI NORB=2 &END\n"), Err(Error::Parse { .. })));
        assert!(parse_fcidump("NORB=2\n").is_err());
    }

    #[test]
    fn index_and_garbage_errors() {
        let e = parse_fcidump("&FCI NORB=1, NELEC=2 &END\n1.0 2 1 0 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
        let e = parse_fcidump("&FCI NORB=1, NELEC=2 &END\n1.0 1 1 0 0 junk\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn conflicting_duplicates() {
        let ok = "&FCI NORB=2, NELEC=2 &END\n0.5 1 2 1 2\n0.5 2 1 2 1\n";
        assert!(parse_fcidump(ok).is_ok());
        let bad = "&FCI NORB=2, NELEC=2 &END\n0.5 1 2 1 2\n0.6 2 1 2 1\n";
        assert!(matches!(parse_fcidump(bad), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn writer_omits_zeros_and_ends_with_nuclear_term() {
        let mut ints = MolecularIntegrals::zeros(2, 2);
        ints.set_h(0, 1, 0.25);
        ints.e_nuc = 0.7;
        let text = write_fcidump(&ints);
        let data: Vec<&str> = text.lines().skip(4).collect();
        assert_eq!(data.len(), 2);
        assert!(data[1].ends_with(" 0 0 0 0"));
        assert_eq!(parse_fcidump(&text).unwrap(), ints);
    }

    #[test]
    fn fortran_exponent() {
        let ints = parse_fcidump("&FCI NORB=1,NELEC=1,\n/\n1.5D-01 1 1 0 0\n").unwrap();
        assert_eq!(ints.h[(0, 0)], 0.15);
    }
}
