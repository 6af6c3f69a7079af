// SPDX-License-Identifier: Apache-2.0

//! Per-trial CSV: `trial,seed,hd,normalized_hd`, header included.

use std::io::Write;

use ternpuf_core::metrics::TrialRow;

use crate::error::Result;

pub const HEADER: [&str; 4] = ["trial", "seed", "hd", "normalized_hd"];

pub fn write_rows<W: Write>(out: W, rows: &[TrialRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.hd.to_string(),
            format!("{:.6}", r.normalized_hd()),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}
