use std::io::{Read, Write};

use super::market::{BidRecord, Truth};
use crate::{Error, Result};

pub const BIDS_HEADER: [&str; 13] = [
    "bid_id",
    "worker_id",
    "job_id",
    "period",
    "access",
    "used_ai",
    "tailoring",
    "wage_norm",
    "rank_pct",
    "callback",
    "offer",
    "edit_minutes",
    "pre_ability",
];

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes bids with shortest round-trip float formatting, so reading the
/// file back reproduces every value exactly.
pub fn write_bids<W: Write>(bids: &[BidRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BIDS_HEADER)?;
    for b in bids {
        w.write_record([
            b.bid_id.to_string(),
            b.worker_id.to_string(),
            b.job_id.to_string(),
            b.period.to_string(),
            flag(b.access).into(),
            flag(b.used_ai).into(),
            b.tailoring.to_string(),
            b.wage_norm.to_string(),
            b.rank_pct.to_string(),
            flag(b.callback).into(),
            flag(b.offer).into(),
            opt(b.edit_minutes),
            opt(b.pre_ability),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bids<R: Read>(input: R, file: &str) -> Result<Vec<BidRecord>> {
    let schema = |message: String| Error::Schema { file: file.to_string(), message };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    for (i, expected) in BIDS_HEADER.iter().enumerate() {
        match header.get(i) {
            Some(got) if got == *expected => {}
            Some(got) => return Err(schema(format!("column {} should be '{expected}', found '{got}'", i + 1))),
            None => return Err(schema(format!("missing column '{expected}'"))),
        }
    }
    if header.len() > BIDS_HEADER.len() {
        return Err(schema(format!("unexpected column '{}'", &header[BIDS_HEADER.len()])));
    }
    let mut bids = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = line + 2;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |i: usize| schema(format!("row {row}: bad value '{}' in column '{}'", field(i), BIDS_HEADER[i]));
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        let real = |i: usize| field(i).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(i));
        let boolean = |i: usize| match field(i) {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad(i)),
        };
        let optional = |i: usize| if field(i).is_empty() { Ok(None) } else { real(i).map(Some) };
        bids.push(BidRecord {
            bid_id: int(0)?,
            worker_id: int(1)?,
            job_id: int(2)?,
            period: u32::try_from(int(3)?).map_err(|_| bad(3))?,
            access: boolean(4)?,
            used_ai: boolean(5)?,
            tailoring: real(6)?,
            wage_norm: real(7)?,
            rank_pct: real(8)?,
            callback: boolean(9)?,
            offer: boolean(10)?,
            edit_minutes: optional(11)?,
            pre_ability: optional(12)?,
        });
    }
    Ok(bids)
}

pub fn write_truth<W: Write>(truth: &Truth, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, truth)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_truth<R: Read>(input: R) -> Result<Truth> {
    Ok(serde_json::from_reader(input)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_market, SimConfig};

    fn dataset() -> crate::sim::Dataset {
        generate_market(&SimConfig { n_workers: 60, n_jobs: 120, ..SimConfig::default() }).unwrap()
    }

    #[test]
    fn bids_round_trip_exactly() {
        let ds = dataset();
        let mut buf = Vec::new();
        write_bids(&ds.bids, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), BIDS_HEADER.join(","));
        assert_eq!(read_bids(&buf[..], "bids.csv").unwrap(), ds.bids);
    }

    #[test]
    fn truth_round_trips() {
        let ds = dataset();
        let mut buf = Vec::new();
        write_truth(&ds.truth, &mut buf).unwrap();
        assert_eq!(read_truth(&buf[..]).unwrap(), ds.truth);
    }

    #[test]
    fn wrong_header_names_the_column() {
        let text = "bid_id,worker_id,job,period\n";
        match read_bids(text.as_bytes(), "bids.csv") {
            Err(Error::Schema { file, message }) => {
                assert_eq!(file, "bids.csv");
                assert!(message.contains("job_id") && message.contains("'job'"), "{message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn bad_cell_is_reported_with_row() {
        let ds = dataset();
        let mut buf = Vec::new();
        write_bids(&ds.bids[..2], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen(",0,", ",x,", 1);
        let err = read_bids(text.as_bytes(), "b.csv").unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
    }
}
