use std::io::{Read, Write};

use super::{ChannelKind, ChannelModel, StatsRow};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 13] = [
    "channel",
    "model",
    "snr_db",
    "reps",
    "tones",
    "trials",
    "detect_or_pass",
    "false_alarm",
    "ack_miss",
    "timing_err_us",
    "cfo_err_hz",
    "throughput_frac",
    "wall_s",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Header plus one record per row.
pub fn write_csv<W: Write>(rows: &[StatsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.channel.name().to_string(),
            r.model.name().to_string(),
            r.snr_db.to_string(),
            r.reps.to_string(),
            r.tones.to_string(),
            r.trials.to_string(),
            opt(r.detect_or_pass),
            opt(r.false_alarm),
            opt(r.ack_miss),
            opt(r.timing_err_us),
            opt(r.cfo_err_hz),
            opt(r.throughput_frac),
            opt(r.wall_s),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<StatsRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Io(format!("unexpected CSV header {header:?}")));
    }
    let bad = |what: &str| Error::Io(format!("bad CSV field {what}"));
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(s))
        }
    };
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let f = |i: usize| rec.get(i).unwrap_or("");
            Ok(StatsRow {
                channel: f(0).parse::<ChannelKind>()?,
                model: f(1).parse::<ChannelModel>()?,
                snr_db: f(2).parse().map_err(|_| bad(f(2)))?,
                reps: f(3).parse().map_err(|_| bad(f(3)))?,
                tones: f(4).parse().map_err(|_| bad(f(4)))?,
                trials: f(5).parse().map_err(|_| bad(f(5)))?,
                detect_or_pass: num(f(6))?,
                false_alarm: num(f(7))?,
                ack_miss: num(f(8))?,
                timing_err_us: num(f(9))?,
                cfo_err_hz: num(f(10))?,
                throughput_frac: num(f(11))?,
                wall_s: num(f(12))?,
            })
        })
        .collect()
}
