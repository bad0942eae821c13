//! Parsers for command-line values and input files.

use std::fs;

use heightzeta_core::lattice::{parse_gram, parse_unit_spec};
use heightzeta_core::{parse_rat, Complex64, Error, HermitianLattice, Rat, Result};

/// `a`, `a+bi`, `a-bi`, `bi` or `a,b`.
pub fn complex(text: &str) -> Result<Complex64> {
    let bad = || Error::invalid(format!("cannot parse complex number {text:?}"));
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some((re, im)) = t.split_once(',') {
        return Ok(Complex64::new(
            re.parse().map_err(|_| bad())?,
            im.parse().map_err(|_| bad())?,
        ));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Ok(Complex64::new(
        re.parse().map_err(|_| bad())?,
        im.parse().map_err(|_| bad())?,
    ))
}

pub fn rationals(items: &[String]) -> Result<Vec<Rat>> {
    items.iter().map(|s| parse_rat(s)).collect()
}

pub fn int_list(text: &str) -> Result<Vec<i64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Error::invalid(format!("expected integers, got {text:?}")))
        })
        .collect()
}

pub fn float_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("expected numbers, got {text:?}")))
        })
        .collect()
}

/// Fixed-length integer tuple such as `u,v,s,t`.
pub fn int_tuple<const N: usize>(text: &str) -> Result<[i64; N]> {
    let v = int_list(text)?;
    v.try_into()
        .map_err(|_| Error::invalid(format!("expected {N} comma-separated integers, got {text:?}")))
}

pub fn read_file(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {path}: {e}")))
}

/// `I<d>` inline, otherwise a Gram file.
pub fn gram(arg: &str) -> Result<HermitianLattice> {
    match parse_unit_spec(arg) {
        Some(l) => Ok(l),
        None => parse_gram(&read_file(arg)?),
    }
}
