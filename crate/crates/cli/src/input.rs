use std::str::FromStr;

use num_bigint::BigUint;
use serde_json::Value;

use collatz_transfer::collatz::LemmaMode;
use collatz_transfer::num::{parse_qcomplex, QComplex};
use collatz_transfer::{CoeffVec, Error, Result};

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum Mode {
    Density,
    Adjoint,
}

impl From<Mode> for LemmaMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Density => LemmaMode::Density,
            Mode::Adjoint => LemmaMode::Adjoint,
        }
    }
}

pub fn biguint(s: &str) -> Result<BigUint> {
    BigUint::from_str(s.trim()).map_err(|e| Error::Parse(format!("{s:?} is not a nonnegative integer: {e}")))
}

/// `deg:coeff,deg:coeff` with rational complex coefficients, or the JSON
/// object form `{"scalar": ..., "entries": [...]}`.
pub fn rational_vec(s: &str) -> Result<CoeffVec<QComplex>> {
    let t = s.trim();
    if t.starts_with('{') {
        let v: Value = serde_json::from_str(t).map_err(|e| Error::Parse(e.to_string()))?;
        return CoeffVec::from_json(&v);
    }
    let mut terms = Vec::new();
    for part in t.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (d, c) = part
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("term {part:?} is not deg:coeff")))?;
        terms.push((biguint(d)?, parse_qcomplex(c)?));
    }
    CoeffVec::from_big_terms(terms)
}

/// `m:mu`.
pub fn field(s: &str) -> Result<(u64, QComplex)> {
    let (m, mu) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("field {s:?} is not m:mu")))?;
    let m = m
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("field index {m:?} is not an integer")))?;
    Ok((m, parse_qcomplex(mu)?))
}

pub fn read_json(path: &std::path::Path) -> Result<Value> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Error::InvalidInput(e.to_string()))?
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use collatz_transfer::num::{int, qc, ratio};

    #[test]
    fn sparse_vectors() {
        let v = rational_vec("3:1, 4:2, 5:-1/2+1/3i").unwrap();
        assert_eq!(v.coeff(4), qc(int(2), int(0)));
        assert_eq!(v.coeff(5), qc(ratio(-1, 2), ratio(1, 3)));
        assert!(rational_vec("2:1").is_err());
        assert!(rational_vec("3").is_err());
        assert!(rational_vec("").unwrap().is_empty());
        assert_eq!(rational_vec(&v.to_json().to_string()).unwrap(), v);
    }

    #[test]
    fn fields() {
        assert_eq!(field("2:-1/2").unwrap(), (2, qc(ratio(-1, 2), int(0))));
        assert!(field("x:1").is_err());
    }
}
