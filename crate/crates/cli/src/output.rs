use std::io::{Read, Write};

use raf_core::Loss;

use crate::CliError;

pub const CSV_HEADER: [&str; 16] = [
    "sweep_value", "alpha", "eps", "mu1", "mustar", "lambda", "loss", "m", "q", "V", "e_gen", "e_mem", "source",
    "stderr_gen", "stderr_mem", "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Theory,
    Mc,
}

impl Source {
    fn name(self) -> &'static str {
        match self {
            Source::Theory => "theory",
            Source::Mc => "mc",
        }
    }
}

/// One output line. Overlaps unknown to a row (Monte Carlo, infinite
/// regularisation) are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub sweep_value: f64,
    pub alpha: f64,
    pub eps: f64,
    pub mu1: f64,
    pub mustar: f64,
    pub lambda: f64,
    pub loss: Loss,
    pub m: f64,
    pub q: f64,
    pub v: f64,
    pub e_gen: f64,
    pub e_mem: f64,
    pub source: Source,
    pub stderr_gen: Option<f64>,
    pub stderr_mem: Option<f64>,
    /// `ok`, or why the row is not trustworthy.
    pub status: String,
}

impl CsvRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        vec![
            num(self.sweep_value),
            num(self.alpha),
            num(self.eps),
            num(self.mu1),
            num(self.mustar),
            num(self.lambda),
            self.loss.to_string(),
            num(self.m),
            num(self.q),
            num(self.v),
            num(self.e_gen),
            num(self.e_mem),
            self.source.name().into(),
            opt(self.stderr_gen),
            opt(self.stderr_mem),
            self.status.clone(),
        ]
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self, CliError> {
        if rec.len() != CSV_HEADER.len() {
            return Err(CliError::Invalid(format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len())));
        }
        let f = |i: usize| -> Result<f64, CliError> {
            rec[i].parse().map_err(|_| CliError::Invalid(format!("{}: {:?} is not a number", CSV_HEADER[i], &rec[i])))
        };
        let opt = |i: usize| if rec[i].is_empty() { Ok(None) } else { f(i).map(Some) };
        Ok(CsvRow {
            sweep_value: f(0)?,
            alpha: f(1)?,
            eps: f(2)?,
            mu1: f(3)?,
            mustar: f(4)?,
            lambda: f(5)?,
            loss: rec[6].parse().map_err(|e: raf_core::channel::ChannelError| CliError::Invalid(e.to_string()))?,
            m: f(7)?,
            q: f(8)?,
            v: f(9)?,
            e_gen: f(10)?,
            e_mem: f(11)?,
            source: match &rec[12] {
                "theory" => Source::Theory,
                "mc" => Source::Mc,
                other => return Err(CliError::Invalid(format!("unknown source {other:?}"))),
            },
            stderr_gen: opt(13)?,
            stderr_mem: opt(14)?,
            status: rec[15].to_string(),
        })
    }
}

/// 17 significant digits, which round-trips every finite double.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Header plus one line per row.
pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(CliError::Invalid("unexpected CSV header".into()));
    }
    r.records().map(|rec| CsvRow::from_record(&rec?)).collect()
}
