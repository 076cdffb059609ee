//! Estimating drifts and the volatility matrix from two price histories.
//!
//! Log returns of exact GBM increments are i.i.d. Gaussian with mean
//! `(mu_i - a_ii / 2) dt` and covariance `a dt`, so sample moments give `a`
//! and `mu` directly; `sigma` is taken as the symmetric positive-definite
//! square root of `a`.

use std::io::Read;
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::gbm::{validate_params, MarketParams, ValidatedParams, LAMBDA_TOLERANCE};
use crate::numeric::pairwise_sum;

pub const MIN_OBSERVATIONS: usize = 3;
/// One trading day, in years.
pub const DEFAULT_DT: f64 = 1.0 / 252.0;

/// Two aligned price histories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

impl PriceSeries {
    /// Checks lengths, positivity and strictly increasing dates. Errors
    /// report 1-based data row numbers.
    pub fn new(dates: Vec<NaiveDate>, p1: Vec<f64>, p2: Vec<f64>) -> Result<Self> {
        if dates.len() != p1.len() || dates.len() != p2.len() {
            return Err(Error::Parse {
                line: 0,
                message: format!("column lengths differ: {} dates, {} and {} prices", dates.len(), p1.len(), p2.len()),
            });
        }
        for (i, (&a, &b)) in p1.iter().zip(&p2).enumerate() {
            if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                return Err(Error::Parse { line: i as u64 + 1, message: format!("prices must be positive, got {a}, {b}") });
            }
        }
        if let Some(i) = dates.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Order { line: i as u64 + 2 });
        }
        if dates.len() < MIN_OBSERVATIONS {
            return Err(Error::TooShort { len: dates.len(), min: MIN_OBSERVATIONS });
        }
        Ok(PriceSeries { dates, p1, p2 })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn price1(&self) -> &[f64] {
        &self.p1
    }

    pub fn price2(&self) -> &[f64] {
        &self.p2
    }

    /// The first `fraction` of the rows (rounded down), e.g. 0.5 for the
    /// in-sample half.
    pub fn head_fraction(&self, fraction: f64) -> Result<PriceSeries> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Domain { what: "split fraction", value: fraction });
        }
        let n = (self.len() as f64 * fraction).floor() as usize;
        if n < MIN_OBSERVATIONS {
            return Err(Error::TooShort { len: n, min: MIN_OBSERVATIONS });
        }
        Ok(self.slice(0, n))
    }

    /// The rows after [`PriceSeries::head_fraction`].
    pub fn tail_fraction(&self, fraction: f64) -> Result<PriceSeries> {
        let head = self.head_fraction(fraction)?.len();
        if self.len() - head < MIN_OBSERVATIONS {
            return Err(Error::TooShort { len: self.len() - head, min: MIN_OBSERVATIONS });
        }
        Ok(self.slice(head, self.len()))
    }

    fn slice(&self, from: usize, to: usize) -> PriceSeries {
        PriceSeries {
            dates: self.dates[from..to].to_vec(),
            p1: self.p1[from..to].to_vec(),
            p2: self.p2[from..to].to_vec(),
        }
    }

    /// Prices on consecutive weekdays starting at `start` (or the next
    /// weekday).
    pub fn on_weekdays(start: NaiveDate, p1: Vec<f64>, p2: Vec<f64>) -> Result<Self> {
        let mut dates = Vec::with_capacity(p1.len());
        let mut day = start;
        while dates.len() < p1.len() {
            if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
                dates.push(day);
            }
            day = day.succ_opt().ok_or(Error::Parse { line: 0, message: "date overflow".into() })?;
        }
        PriceSeries::new(dates, p1, p2)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["date", "price1", "price2"]).map_err(io)?;
        for i in 0..self.len() {
            w.write_record([self.dates[i].to_string(), self.p1[i].to_string(), self.p2[i].to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_csv_from(file)
}

/// Parses `date,price1,price2` CSV. Line numbers count the header as line 1.
pub fn load_csv_from<R: Read>(input: R) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input);
    let mut dates = Vec::new();
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    let mut saw_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse { line, message: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if !saw_header {
            let header: Vec<&str> = record.iter().collect();
            if header != ["date", "price1", "price2"] {
                return Err(Error::Parse { line, message: format!("expected header `date,price1,price2`, got `{}`", header.join(",")) });
            }
            saw_header = true;
            continue;
        }
        if record.len() != 3 {
            return Err(Error::Parse { line, message: format!("expected 3 fields, got {}", record.len()) });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| Error::Parse { line, message: format!("bad date `{}`: {e}", &record[0]) })?;
        let price = |s: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
                Ok(v) => Err(Error::Parse { line, message: format!("price must be positive, got {v}") }),
                Err(_) => Err(Error::Parse { line, message: format!("bad price `{s}`") }),
            }
        };
        let (a, b) = (price(&record[1])?, price(&record[2])?);
        if let Some(&last) = dates.last() {
            if date <= last {
                return Err(Error::Order { line });
            }
        }
        dates.push(date);
        p1.push(a);
        p2.push(b);
    }
    if !saw_header {
        return Err(Error::Parse { line: 1, message: "empty file".into() });
    }
    if dates.len() < MIN_OBSERVATIONS {
        return Err(Error::TooShort { len: dates.len(), min: MIN_OBSERVATIONS });
    }
    Ok(PriceSeries { dates, p1, p2 })
}

/// Symmetric positive-definite square root of a 2x2 SPD matrix.
pub fn spd_sqrt(a: [[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let off = 0.5 * (a[0][1] + a[1][0]);
    let det = a[0][0] * a[1][1] - off * off;
    let trace = a[0][0] + a[1][1];
    if !(det > 0.0 && trace > 0.0 && det.is_finite() && trace.is_finite()) {
        return Err(Error::Domain { what: "covariance determinant", value: det });
    }
    let s = det.sqrt();
    let t = (trace + 2.0 * s).sqrt();
    Ok([[(a[0][0] + s) / t, off / t], [off / t, (a[1][1] + s) / t]])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationDiagnostics {
    /// Number of log-return pairs.
    pub returns: usize,
    pub dt: f64,
    pub mean_log_return: [f64; 2],
    pub var_log_return: [f64; 2],
    /// Infinitesimal covariance `a`, per year.
    pub a: [[f64; 2]; 2],
    /// `|sigma12 - sigma21|` of the recovered matrix.
    pub symmetry_residual: f64,
    /// Largest relative entry error of `sigma sigma^T` against `a`.
    pub reconstruction_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub params: MarketParams,
    pub diagnostics: CalibrationDiagnostics,
}

impl CalibrationResult {
    pub fn validated(&self) -> Result<ValidatedParams> {
        validate_params(&self.params)
    }
}

/// Moment estimates of `mu` and `sigma` from `series` sampled every `dt`
/// years; `rho` and `k` are passed through.
pub fn estimate(series: &PriceSeries, dt: f64, rho: f64, k: f64) -> Result<CalibrationResult> {
    positive("dt", dt)?;
    let r1: Vec<f64> = series.p1.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let r2: Vec<f64> = series.p2.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let n = r1.len();
    let m1 = pairwise_sum(&r1) / n as f64;
    let m2 = pairwise_sum(&r2) / n as f64;
    let d1: Vec<f64> = r1.iter().map(|r| r - m1).collect();
    let d2: Vec<f64> = r2.iter().map(|r| r - m2).collect();
    let cov = |x: &[f64], y: &[f64]| {
        let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
        pairwise_sum(&prods) / (n - 1) as f64
    };
    let (s11, s12, s22) = (cov(&d1, &d1), cov(&d1, &d2), cov(&d2, &d2));
    let a = [[s11 / dt, s12 / dt], [s12 / dt, s22 / dt]];

    let lambda = 0.5 * (a[0][0] - 2.0 * a[0][1] + a[1][1]);
    if !(lambda > LAMBDA_TOLERANCE) {
        return Err(Error::DegenerateDiffusion { lambda, tolerance: LAMBDA_TOLERANCE });
    }
    let sigma = spd_sqrt(a)?;
    let params = MarketParams {
        mu1: m1 / dt + 0.5 * a[0][0],
        mu2: m2 / dt + 0.5 * a[1][1],
        sigma,
        rho,
        k,
    };
    validate_params(&params)?;

    let mut reconstruction_residual: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let back = sigma[i][0] * sigma[j][0] + sigma[i][1] * sigma[j][1];
            let scale = (a[i][i] * a[j][j]).sqrt();
            reconstruction_residual = reconstruction_residual.max((back - a[i][j]).abs() / scale);
        }
    }
    Ok(CalibrationResult {
        params,
        diagnostics: CalibrationDiagnostics {
            returns: n,
            dt,
            mean_log_return: [m1, m2],
            var_log_return: [s11, s22],
            a,
            symmetry_residual: (sigma[0][1] - sigma[1][0]).abs(),
            reconstruction_residual,
        },
    })
}
