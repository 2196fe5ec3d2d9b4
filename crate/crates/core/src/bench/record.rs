//! One Monte Carlo cell and its CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Clsk,
    Csk,
    Dcsk,
}

impl Scheme {
    pub(crate) fn id(self) -> u64 {
        match self {
            Scheme::Clsk => 0,
            Scheme::Csk => 1,
            Scheme::Dcsk => 2,
        }
    }
}

/// CSV row. Field order is the column order. For CSK and DCSK rows `sigma`
/// carries Eb/N0 in dB and `epsilon`, `alpha` are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub scheme: Scheme,
    pub sigma: f64,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub spreading_factor: usize,
    pub bits: u64,
    pub errors: u64,
    pub pe: f64,
    pub pe_is_upper_bound: bool,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub wall_seconds: f64,
}

/// Grid coordinates of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub scheme: Scheme,
    pub sigma: f64,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub spreading_factor: usize,
}

impl BerRecord {
    /// Fills in the estimate and a 95 % Clopper-Pearson interval. A cell
    /// without errors reports `1/bits` flagged as an upper bound.
    pub fn from_counts(key: CellKey, bits: u64, errors: u64, seed: u64, wall_seconds: f64) -> Result<Self> {
        if bits == 0 || errors > bits {
            return Err(Error::invalid(format!("{errors} errors in {bits} bits")));
        }
        let (ci_low, ci_high) = clopper_pearson(errors, bits, 0.05);
        let zero = errors == 0;
        Ok(BerRecord {
            scheme: key.scheme,
            sigma: key.sigma,
            epsilon: key.epsilon,
            alpha: key.alpha,
            spreading_factor: key.spreading_factor,
            bits,
            errors,
            pe: if zero { 1.0 / bits as f64 } else { errors as f64 / bits as f64 },
            pe_is_upper_bound: zero,
            ci_low,
            ci_high,
            seed,
            wall_seconds,
        })
    }

    pub fn key(&self) -> CellKey {
        CellKey {
            scheme: self.scheme,
            sigma: self.sigma,
            epsilon: self.epsilon,
            alpha: self.alpha,
            spreading_factor: self.spreading_factor,
        }
    }
}

/// Exact binomial interval at level `1 - level`.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 { 0.0 } else { Beta::new(kf, nf - kf + 1.0).map(|b| b.inverse_cdf(level / 2.0)).unwrap_or(0.0) };
    let hi = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf).map(|b| b.inverse_cdf(1.0 - level / 2.0)).unwrap_or(1.0)
    };
    (lo, hi)
}

pub fn write_ber_csv<W: Write>(w: W, records: &[BerRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    if records.is_empty() {
        wr.write_record(COLUMNS)?;
    }
    wr.flush()?;
    Ok(())
}

pub const COLUMNS: [&str; 13] = [
    "scheme",
    "sigma",
    "epsilon",
    "alpha",
    "spreading_factor",
    "bits",
    "errors",
    "pe",
    "pe_is_upper_bound",
    "ci_low",
    "ci_high",
    "seed",
    "wall_seconds",
];

pub fn read_ber_csv<R: Read>(r: R) -> Result<Vec<BerRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != COLUMNS {
        return Err(Error::Config(format!("unexpected BER CSV header: {}", header.join(","))));
    }
    Ok(rd.deserialize().collect::<std::result::Result<Vec<BerRecord>, _>>()?)
}

/// Appends rows, writing the header only when the file is new or empty.
pub fn append_ber_csv(path: &Path, records: &[BerRecord]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut wr = csv::WriterBuilder::new().has_headers(fresh).from_writer(f);
    if fresh && records.is_empty() {
        wr.write_record(COLUMNS)?;
    }
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Records already in `path`; an absent file yields none.
pub fn load_ber_csv(path: &Path) -> Result<Vec<BerRecord>> {
    match std::fs::File::open(path) {
        Ok(f) => read_ber_csv(f),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}
