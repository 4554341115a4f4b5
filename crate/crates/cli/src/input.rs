use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::Failure;
use kamtorus::arithmetic::{BrunoSequence, FrequencyBox, FrequencyVector};

fn malformed(field: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::config(format!("{field}: {msg}"))
}

pub fn reals(field: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| malformed(field, format!("cannot parse '{}': {e}", p.trim())))
        })
        .collect()
}

pub fn frequency(field: &str, text: &str) -> Result<FrequencyVector, Failure> {
    FrequencyVector::new(reals(field, text)?).map_err(|e| malformed(field, e))
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read_text(path)?).map_err(|e| malformed(&path.display().to_string(), e))
}

/// `geometric:c,r`, `superexp:c,b`, `explicit:a0,a1,...` or `file:path`
/// (a JSON array of values).
pub fn bruno(field: &str, text: &str) -> Result<BrunoSequence, Failure> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| malformed(field, "expected <kind>:<parameters>"))?;
    let pair = |rest: &str| -> Result<(f64, f64), Failure> {
        match reals(field, rest)?[..] {
            [a, b] => Ok((a, b)),
            _ => Err(malformed(field, "expected two comma-separated numbers")),
        }
    };
    let seq = match kind {
        "geometric" => {
            let (c, r) = pair(rest)?;
            BrunoSequence::Geometric { c, r }
        }
        "superexp" => {
            let (c, b) = pair(rest)?;
            BrunoSequence::Superexp { c, b }
        }
        "explicit" => BrunoSequence::Explicit {
            values: reals(field, rest)?,
        },
        "file" => BrunoSequence::Explicit {
            values: read_json(Path::new(rest))?,
        },
        other => return Err(malformed(field, format!("unknown sequence kind '{other}'"))),
    };
    seq.validate().map_err(|e| malformed(field, e))?;
    Ok(seq)
}

/// `lo:hi,lo:hi,...`.
pub fn frequency_box(field: &str, text: &str) -> Result<FrequencyBox, Failure> {
    let sides = text
        .split(',')
        .map(|side| {
            let (lo, hi) = side
                .split_once(':')
                .ok_or_else(|| malformed(field, format!("side '{side}' is not lo:hi")))?;
            let lo = reals(field, lo)?[0];
            let hi = reals(field, hi)?[0];
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    FrequencyBox::new(sides).map_err(|e| malformed(field, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sequences() {
        assert_eq!(bruno("b", "geometric:0.1,0.5").unwrap(), BrunoSequence::Geometric { c: 0.1, r: 0.5 });
        assert_eq!(bruno("b", "superexp:1,2").unwrap(), BrunoSequence::Superexp { c: 1.0, b: 2.0 });
        assert!(bruno("b", "geometric:0.1").is_err());
        assert!(bruno("b", "geometric:0.1,2").is_err());
        assert!(bruno("b", "poly:1,2").is_err());
    }

    #[test]
    fn parses_boxes_and_vectors() {
        assert_eq!(frequency_box("box", "1:2,1.5:1.7").unwrap().bounds(), &[(1.0, 2.0), (1.5, 1.7)]);
        assert!(frequency_box("box", "1:2").is_err());
        assert!(frequency("omega", "1,x").is_err());
        assert_eq!(frequency("omega", " 1, 2").unwrap().entries(), &[1.0, 2.0]);
    }
}
