//! Synthetic covariance generators and CSV matrix I/O.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. Gaussian draws
//! use `rand_distr::StandardNormal` (ziggurat over uniform 64-bit draws);
//! uniform draws use `rand`'s `[0, 1)` float sampler. The same seed always
//! yields the same bits; other implementations are expected to match
//! statistically, not bitwise.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{FspcaError, Result};
use crate::matcore::SymMat;
use crate::solver::orthonormalize;

/// The six fixed synthetic schemes plus a Zipf-like spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    A,
    B,
    C,
    D,
    E,
    F,
    Zipf,
}

impl FromStr for Scheme {
    type Err = FspcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Scheme::A),
            "B" => Ok(Scheme::B),
            "C" => Ok(Scheme::C),
            "D" => Ok(Scheme::D),
            "E" => Ok(Scheme::E),
            "F" => Ok(Scheme::F),
            "ZIPF" => Ok(Scheme::Zipf),
            other => Err(FspcaError::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scheme::A => "A",
            Scheme::B => "B",
            Scheme::C => "C",
            Scheme::D => "D",
            Scheme::E => "E",
            Scheme::F => "F",
            Scheme::Zipf => "zipf",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SchemeKind {
    /// `Q diag(values) Q^T` with a random orthogonal `Q`.
    FixedSpectrum { values: Vec<f64> },
    /// `X X^T` with `X` (`d x n`) i.i.d. `U[0, 1)`.
    UniformData { n: usize },
    /// `X X^T` with `X` (`d x n`) i.i.d. `N(0, 1)`.
    GaussianData { n: usize },
    /// Spectrum `c i^{-t}`, `i = 1..d`, random eigenbasis.
    Zipf { c: f64, t: f64 },
}

/// A reproducible description of one synthetic covariance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub d: usize,
    pub seed: u64,
}

fn padded(head: &[f64], fill: f64, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = head.iter().copied().take(d).collect();
    v.resize(d, fill);
    v
}

impl SchemeSpec {
    /// One of the named schemes. `n` is the sample count for E/F (defaults to `d`).
    /// Zipf uses `c = 1`, `t = 2`; see [`SchemeSpec::zipf`] for other values.
    pub fn named(scheme: Scheme, d: usize, seed: u64, n: Option<usize>) -> Self {
        let n = n.unwrap_or(d);
        let kind = match scheme {
            Scheme::A => SchemeKind::FixedSpectrum {
                values: padded(&[100.0, 100.0, 4.0], 1.0, d),
            },
            Scheme::B => SchemeKind::FixedSpectrum {
                values: padded(&[300.0, 180.0, 60.0], 1.0, d),
            },
            Scheme::C => SchemeKind::FixedSpectrum {
                values: padded(&[300.0, 180.0, 60.0], 0.0, d),
            },
            Scheme::D => SchemeKind::FixedSpectrum {
                values: padded(&[160.0, 80.0, 40.0, 20.0, 10.0, 5.0, 2.0], 1.0, d),
            },
            Scheme::E => SchemeKind::UniformData { n },
            Scheme::F => SchemeKind::GaussianData { n },
            Scheme::Zipf => SchemeKind::Zipf { c: 1.0, t: 2.0 },
        };
        Self { kind, d, seed }
    }

    pub fn zipf(c: f64, t: f64, d: usize, seed: u64) -> Self {
        Self {
            kind: SchemeKind::Zipf { c, t },
            d,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(FspcaError::InvalidInput("d must be positive".into()));
        }
        match &self.kind {
            SchemeKind::FixedSpectrum { values } => {
                if values.len() > self.d {
                    return Err(FspcaError::InvalidInput(format!(
                        "spectrum has {} values but d = {}",
                        values.len(),
                        self.d
                    )));
                }
                if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return Err(FspcaError::InvalidInput(format!(
                        "spectrum values must be finite and nonnegative, got {v}"
                    )));
                }
            }
            SchemeKind::UniformData { n } | SchemeKind::GaussianData { n } => {
                if *n == 0 {
                    return Err(FspcaError::InvalidInput("sample count n must be positive".into()));
                }
            }
            SchemeKind::Zipf { c, t } => {
                if !(*c > 0.0 && *t > 1.0 && c.is_finite() && t.is_finite()) {
                    return Err(FspcaError::InvalidInput(format!(
                        "Zipf spectrum needs c > 0 and t > 1, got c = {c}, t = {t}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The exact spectrum for fixed-spectrum and Zipf kinds (descending, length `d`).
    pub fn spectrum(&self) -> Option<Vec<f64>> {
        match &self.kind {
            SchemeKind::FixedSpectrum { values } => Some(padded(values, 0.0, self.d)),
            SchemeKind::Zipf { c, t } => Some(zipf_spectrum(*c, *t, self.d)),
            _ => None,
        }
    }
}

/// `c i^{-t}` for `i = 1..=d`.
pub fn zipf_spectrum(c: f64, t: f64, d: usize) -> Vec<f64> {
    (1..=d).map(|i| c * (i as f64).powf(-t)).collect()
}

/// Orthonormalized standard-Gaussian `d x d` matrix, columns sign-normalized.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        // orthonormalize already applies the column sign convention
        if let Ok(q) = orthonormalize(g) {
            return q;
        }
    }
}

fn with_spectrum<R: Rng + ?Sized>(values: &[f64], d: usize, rng: &mut R) -> Result<SymMat> {
    let q = random_orthogonal(d, rng);
    let mut scaled = q.clone();
    for (j, &lam) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(lam);
    }
    SymMat::symmetrize(scaled * q.transpose())
}

pub fn make_covariance(spec: &SchemeSpec) -> Result<SymMat> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.d;
    match &spec.kind {
        SchemeKind::FixedSpectrum { values } => with_spectrum(&padded(values, 0.0, d), d, &mut rng),
        SchemeKind::Zipf { c, t } => with_spectrum(&zipf_spectrum(*c, *t, d), d, &mut rng),
        SchemeKind::UniformData { n } => {
            let x = DMatrix::from_fn(d, *n, |_, _| rng.random::<f64>());
            sample_covariance(&x, false)
        }
        SchemeKind::GaussianData { n } => {
            let x = DMatrix::from_fn(d, *n, |_, _| rng.sample::<f64, _>(StandardNormal));
            sample_covariance(&x, false)
        }
    }
}

/// `X H_n X^T` (centered) or `X X^T` for a `d x n` data matrix.
pub fn sample_covariance(x: &DMatrix<f64>, center: bool) -> Result<SymMat> {
    if x.ncols() == 0 || x.nrows() == 0 {
        return Err(FspcaError::InvalidInput("data matrix must be non-empty".into()));
    }
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if !x[(i, j)].is_finite() {
                return Err(FspcaError::NonFinite { row: i, col: j });
            }
        }
    }
    if center {
        let mut xc = x.clone();
        for mut row in xc.row_iter_mut() {
            let mean = row.mean();
            row.add_scalar_mut(-mean);
        }
        SymMat::symmetrize(&xc * xc.transpose())
    } else {
        SymMat::symmetrize(x * x.transpose())
    }
}

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut raw: Vec<Vec<String>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| FspcaError::Parse {
            row: raw.len(),
            col: 0,
            msg: e.to_string(),
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        raw.push(rec.iter().map(str::to_owned).collect());
    }
    if raw.is_empty() {
        return Err(FspcaError::Parse {
            row: 0,
            col: 0,
            msg: "no data rows".into(),
        });
    }
    // a first row containing any non-numeric cell is a header
    let start = usize::from(raw[0].iter().any(|c| c.parse::<f64>().is_err()));
    let width = raw.get(start).map(|r| r.len()).unwrap_or(0);
    let mut rows = Vec::with_capacity(raw.len() - start);
    for (r, cells) in raw.iter().enumerate().skip(start) {
        if cells.len() != width {
            return Err(FspcaError::Parse {
                row: r,
                col: cells.len().min(width),
                msg: format!("expected {width} columns, found {}", cells.len()),
            });
        }
        let mut row = Vec::with_capacity(width);
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| FspcaError::Parse {
                row: r,
                col: c,
                msg: format!("non-numeric cell '{cell}'"),
            })?;
            if !v.is_finite() {
                return Err(FspcaError::Parse {
                    row: r,
                    col: c,
                    msg: format!("non-finite value '{cell}'"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(FspcaError::Parse {
            row: start,
            col: 0,
            msg: "no data rows after header".into(),
        });
    }
    Ok(rows)
}

/// Parses CSV text into a row-major matrix. A first row with any non-numeric
/// cell is treated as a header and skipped. Row/column numbers in errors are
/// 0-based positions in the file.
pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let rows = parse_rows(text)?;
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Parses CSV text as a covariance and validates symmetry.
pub fn parse_covariance_csv(text: &str) -> Result<SymMat> {
    let m = parse_matrix_csv(text)?;
    if m.nrows() != m.ncols() {
        return Err(FspcaError::Parse {
            row: 0,
            col: 0,
            msg: format!("covariance must be square, got {}x{}", m.nrows(), m.ncols()),
        });
    }
    SymMat::new(m)
}

pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    parse_matrix_csv(&std::fs::read_to_string(path)?)
}

pub fn load_covariance_csv(path: impl AsRef<Path>) -> Result<SymMat> {
    parse_covariance_csv(&std::fs::read_to_string(path)?)
}

/// 17 significant digits; parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix_csv<W: Write>(out: &mut W, m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols()).map(|j| format_f64(m[(i, j)])).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
