//! CSV outputs. Every file starts with a `#schema=1` comment line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matching::{TickPrice, Trade};
use crate::sim::{AaOutcome, SimConfig};

pub const SCHEMA_LINE: &str = "#schema=1";

/// Formats tick prices on the tick grid with a fixed number of decimals.
#[derive(Debug, Clone, Copy)]
pub struct PriceFormat {
    tick_size: f64,
    decimals: usize,
}

impl PriceFormat {
    pub fn new(config: &SimConfig) -> Self {
        Self {
            tick_size: config.tick_size,
            decimals: config.price_decimals(),
        }
    }

    pub fn format(&self, price: TickPrice) -> String {
        // Exact for power-of-ten ticks: split the integer tick count.
        let pow = 10i64.checked_pow(self.decimals as u32);
        match pow {
            Some(pow) if (self.tick_size * pow as f64 - 1.0).abs() < 1e-9 => {
                let t = price.ticks();
                if self.decimals == 0 {
                    t.to_string()
                } else {
                    format!("{}.{:0width$}", t / pow, t % pow, width = self.decimals)
                }
            }
            _ => format!(
                "{:.prec$}",
                price.ticks() as f64 * self.tick_size,
                prec = self.decimals
            ),
        }
    }

    pub fn format_currency(&self, value: f64) -> String {
        format!("{:.prec$}", value, prec = self.decimals)
    }
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{SCHEMA_LINE}").map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(out))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// `(t, mid_price)` for `t = stride, 2·stride, ...`; `prices[i]` is `P^{i+1}`.
pub fn write_prices(path: &Path, prices: &[TickPrice], stride: u64, fmt: PriceFormat) -> Result<usize> {
    let stride = stride.max(1) as usize;
    let mut w = create(path)?;
    w.write_record(["t", "mid_price"])?;
    let mut rows = 0;
    for (i, p) in prices.iter().enumerate() {
        let t = i + 1;
        if t % stride == 0 {
            w.write_record([t.to_string(), fmt.format(*p)])?;
            rows += 1;
        }
    }
    finish(w, path)?;
    Ok(rows)
}

pub fn write_ledger(path: &Path, additional: &[AaOutcome], fmt: PriceFormat) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["aa_index", "kind", "profit", "trades"])?;
    for aa in additional {
        w.write_record([
            aa.index.to_string(),
            aa.kind.label().to_string(),
            fmt.format_currency(aa.profit),
            aa.trades.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_trades(path: &Path, trades: &[Trade], fmt: PriceFormat) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["time", "price", "size", "buyer", "seller"])?;
    for t in trades {
        w.write_record([
            t.time.to_string(),
            fmt.format(t.price),
            t.size.to_string(),
            t.buyer.0.to_string(),
            t.seller.0.to_string(),
        ])?;
    }
    finish(w, path)
}

/// Reads a CSV written by this module, skipping the schema line.
pub fn read_records(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

pub(crate) fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    finish(w, path)
}
