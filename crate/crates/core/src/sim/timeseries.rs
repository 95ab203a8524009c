use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two equal-length symbol series over a shared alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeseriesPair {
    x: Vec<u8>,
    y: Vec<u8>,
    alphabet: usize,
    provenance: String,
}

impl TimeseriesPair {
    pub fn new(x: Vec<u8>, y: Vec<u8>, alphabet: usize, provenance: impl Into<String>) -> Result<Self> {
        if !(2..=36).contains(&alphabet) {
            return Err(Error::input(format!("alphabet size {alphabet} outside 2..=36")));
        }
        if x.len() != y.len() {
            return Err(Error::input(format!(
                "series lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (row, (&a, &b)) in x.iter().zip(&y).enumerate() {
            if let Some(s) = [a, b].into_iter().find(|&s| s as usize >= alphabet) {
                return Err(Error::Row {
                    row: row + 1,
                    message: format!("symbol {s} outside alphabet of size {alphabet}"),
                });
            }
        }
        Ok(TimeseriesPair {
            x,
            y,
            alphabet,
            provenance: provenance.into(),
        })
    }

    pub fn x(&self) -> &[u8] {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Same pair with y replaced; used by permutation schemes.
    pub fn with_y(&self, y: Vec<u8>) -> TimeseriesPair {
        debug_assert_eq!(y.len(), self.x.len());
        TimeseriesPair {
            x: self.x.clone(),
            y,
            alphabet: self.alphabet,
            provenance: self.provenance.clone(),
        }
    }

    /// Exchanges the roles of x and y.
    pub fn swapped(&self) -> TimeseriesPair {
        TimeseriesPair {
            x: self.y.clone(),
            y: self.x.clone(),
            alphabet: self.alphabet,
            provenance: self.provenance.clone(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "y"])?;
        for (a, b) in self.x.iter().zip(&self.y) {
            out.write_record([a.to_string(), b.to_string()])?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }

    /// Reads the `x,y` CSV format. With `alphabet = None` the size is the
    /// largest symbol plus one, at least 2.
    pub fn read_csv<R: Read>(r: R, alphabet: Option<usize>, source: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let header = reader.headers()?.clone();
        if header.is_empty() {
            return Err(Error::EmptyInput);
        }
        if header.len() != 2 || &header[0] != "x" || &header[1] != "y" {
            return Err(Error::input(format!(
                "{source}: expected header `x,y`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Row {
                    row,
                    message: format!("expected 2 fields, found {}", record.len()),
                });
            }
            let parse = |s: &str| -> Result<u8> {
                let v: usize = s.parse().map_err(|_| Error::Row {
                    row,
                    message: format!("{s:?} is not a symbol"),
                })?;
                if let Some(k) = alphabet {
                    if v >= k {
                        return Err(Error::Row {
                            row,
                            message: format!("symbol {v} outside alphabet of size {k}"),
                        });
                    }
                }
                u8::try_from(v).ok().filter(|&v| v < 36).ok_or_else(|| Error::Row {
                    row,
                    message: format!("symbol {v} outside alphabet of size 36"),
                })
            };
            x.push(parse(&record[0])?);
            y.push(parse(&record[1])?);
        }
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        let k = alphabet.unwrap_or_else(|| {
            let max = x.iter().chain(&y).copied().max().unwrap_or(0) as usize;
            (max + 1).max(2)
        });
        TimeseriesPair::new(x, y, k, format!("csv:{source}"))
    }
}

pub fn ingest_timeseries(path: &Path, alphabet: Option<usize>) -> Result<TimeseriesPair> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    TimeseriesPair::read_csv(file, alphabet, &path.display().to_string())
}
