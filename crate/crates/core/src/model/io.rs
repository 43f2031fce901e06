//! JSON Lines dataset files, one instance per line:
//!
//! ```text
//! {"signal": {"A": [[...]], "b": [...]}, "response": {"y": [], "z": [...]}, "family": "binary_lp"}
//! {"signal": {"A": [[...]], "B": [[...]], "c": [...], "w": null}, "response": {"y": [...], "z": [...]}, "family": "mixed_integer"}
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linalg::DenseMatrix;
use crate::{Error, Result};

use super::{IODataset, IOInstance, MixedIntegerSignal, Response, Signal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    BinaryLp,
    MixedInteger,
}

#[derive(Serialize, Deserialize)]
struct BinarySignalRecord {
    #[serde(rename = "A")]
    a: DenseMatrix,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    signal: Value,
    response: Response,
    family: Family,
}

fn to_record(inst: &IOInstance) -> Result<Record> {
    let (signal, family) = match &inst.signal {
        Signal::BinaryLp { a, b } => (
            serde_json::to_value(BinarySignalRecord {
                a: a.clone(),
                b: b.clone(),
            })?,
            Family::BinaryLp,
        ),
        Signal::MixedInteger(m) => (serde_json::to_value(m)?, Family::MixedInteger),
        Signal::Opaque(_) => {
            return Err(Error::Unsupported("opaque signals have no file format".into()))
        }
    };
    Ok(Record {
        signal,
        response: inst.response.clone(),
        family,
    })
}

fn from_record(rec: Record) -> Result<IOInstance> {
    match rec.family {
        Family::BinaryLp => {
            let s: BinarySignalRecord = serde_json::from_value(rec.signal)?;
            // An empty constraint list still fixes n through the response length.
            let a = if s.a.nrows() == 0 {
                DenseMatrix::zeros(0, rec.response.discrete.len())
            } else {
                s.a
            };
            IOInstance::binary_lp(a, s.b, rec.response.discrete)
        }
        Family::MixedInteger => {
            let m: MixedIntegerSignal = serde_json::from_value(rec.signal)?;
            IOInstance::mixed_integer(m, rec.response)
        }
    }
}

pub fn write_jsonl<W: Write>(mut w: W, instances: &[IOInstance]) -> Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut w, &to_record(inst)?)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<IOInstance>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| Error::Config(format!("dataset line {}: {e}", lineno + 1)))?;
        out.push(from_record(rec)?);
    }
    Ok(out)
}

pub fn save_dataset(path: &Path, ds: &IODataset) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_jsonl(f, &ds.instances)
}

pub fn load_dataset(path: &Path, seed: u64) -> Result<IODataset> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    IODataset::new(read_jsonl(f)?, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_both_families() {
        let bin = IOInstance::binary_lp(
            DenseMatrix::from_rows(&[vec![1.0, -0.5]]),
            vec![0.75],
            vec![0, 1],
        )
        .unwrap();
        let mi = IOInstance::mixed_integer(
            MixedIntegerSignal {
                a: DenseMatrix::from_rows(&[vec![-0.5]]),
                b: DenseMatrix::from_rows(&[vec![-1.0]]),
                c: vec![-0.25],
                w: serde_json::json!({"tag": 3}),
                y_box: true,
            },
            Response::mixed(vec![0.5], vec![0]),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &[bin.clone(), mi.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().contains("\"family\":\"binary_lp\""));
        let back = read_jsonl(&buf[..]).unwrap();
        assert_eq!(back[0].signal, bin.signal);
        assert_eq!(back[0].response, bin.response);
        assert_eq!(back[1].signal, mi.signal);
        assert_eq!(back[1].response, mi.response);
        assert!(!back[1].infeasible);
    }

    #[test]
    fn malformed_line_is_config_error() {
        let err = read_jsonl(&b"{\"signal\": 3}\n"[..]).unwrap_err();
        assert!(err.is_config_error());
    }
}
